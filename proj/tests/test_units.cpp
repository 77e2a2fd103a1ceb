#include <doctest.h>

#include "mecppo/units.hpp"

using namespace mecppo;

TEST_SUITE("units") {

TEST_CASE("SI passthrough") {
  CHECK(units::to_si(3.5, "bits") == 3.5);
  CHECK(units::to_si(2e7, "Hz") == 2e7);
  CHECK(units::to_si(0.2, "W") == 0.2);
  CHECK(units::to_si(4.0, "J") == 4.0);
  CHECK(units::to_si(1e-20, "W/Hz") == 1e-20);
}

TEST_CASE("scaled units") {
  CHECK(units::to_si(200, "Mb") == doctest::Approx(2e8));
  CHECK(units::to_si(20, "MHz") == doctest::Approx(2e7));
  CHECK(units::to_si(2, "GHz") == doctest::Approx(2e9));
  // compute intensity: 2 GHz/Mb = 2000 cycles/bit
  CHECK(units::to_si(2, "GHz/Mb") == doctest::Approx(2000));
}

TEST_CASE("unknown unit rejected") {
  CHECK_THROWS_AS(units::to_si(1, "furlongs"), std::invalid_argument);
}

}  // TEST_SUITE
