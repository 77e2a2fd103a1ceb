#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "mecppo/noma.hpp"
#include "mecppo/verify.hpp"

using namespace mecppo;

TEST_SUITE("noma") {

// Two equal-gain users, 5 Mb each over 1 MHz: the closed form gives a
// 5-second upload with powers 0.1 W and 0.2 W.
TEST_CASE("two-user closed-form instance") {
  std::vector<double> loads{5e6, 5e6}, gains{1e-13, 1e-13}, pmax{0.2, 0.2};
  auto sol = noma::solve_min_upload_time(loads, gains, 1e6, 1e-20, pmax);
  CHECK(sol.time == doctest::Approx(5.0).epsilon(1e-6));
  CHECK(sol.theta == doctest::Approx(0.2).epsilon(1e-6));
  REQUIRE(sol.powers.size() == 2);
  CHECK(sol.powers[0] == doctest::Approx(0.1).epsilon(1e-6));
  CHECK(sol.powers[1] == doctest::Approx(0.2).epsilon(1e-6));
  CHECK(sol.binding_pos == 1);
  // the binding user transmits exactly at its cap
  CHECK(sol.powers[1] <= pmax[1] * (1 + 1e-9));

  auto td = noma::tdma_min_upload_time(loads, gains, 1e6, 1e-20, pmax);
  CHECK(td.time == doctest::Approx(10.0 / std::log2(3.0)).epsilon(1e-9));
  CHECK(td.time == doctest::Approx(6.309297535714574).epsilon(1e-6));
}

TEST_CASE("single-user theta closed form") {
  std::vector<double> loads{1e7}, gains{1e-13}, pmax{0.2};
  auto sol = noma::solve_min_upload_time(loads, gains, 1e6, 1e-20, pmax);
  // 0.1 (2^{10 theta} - 1) = 0.2  =>  theta = log2(3)/10
  CHECK(sol.theta == doctest::Approx(std::log2(3.0) / 10).epsilon(1e-9));
}

TEST_CASE("decode order: ascending gain, ties by ascending id") {
  auto sc = generate_scenario(17, 1, 3, GenParams{});
  sc.gains[0] = {2e-13, 5e-13, 2e-13};
  auto order = noma::DecodeOrder::make(sc, 0, {0, 1, 2});
  CHECK(order.ue_ids == std::vector<int>{0, 2, 1});
}

TEST_CASE("zero loads upload instantly") {
  std::vector<double> loads{0, 0}, gains{1e-13, 1e-13}, pmax{0.2, 0.2};
  auto sol = noma::solve_min_upload_time(loads, gains, 1e6, 1e-20, pmax);
  CHECK(sol.time == 0.0);
  CHECK(std::isinf(sol.theta));
  CHECK(sol.powers == std::vector<double>{0, 0});
}

TEST_CASE("zero-load positions draw zero power, others unaffected") {
  std::vector<double> loads{0, 5e6}, gains{1e-13, 1e-13}, pmax{0.2, 0.2};
  auto p = noma::min_powers_for_time(loads, gains, 1e6, 1e-20, 5.0);
  CHECK(p[0] == 0.0);
  CHECK(p[1] == doctest::Approx(0.1).epsilon(1e-9));  // no interference ahead
}

TEST_CASE("capacity residual signs bracket the root") {
  std::vector<double> loads{5e6, 5e6}, gains{1e-13, 1e-13};
  // binding position residual at theta*=0.2 is zero; below negative, above positive
  CHECK(noma::capacity_violation(0.2, 1, loads, gains, 1e6, 1e-20, 0.2) ==
        doctest::Approx(0.0).epsilon(1e-9));
  CHECK(noma::capacity_violation(0.1, 1, loads, gains, 1e6, 1e-20, 0.2) < 0);
  CHECK(noma::capacity_violation(0.3, 1, loads, gains, 1e6, 1e-20, 0.2) > 0);
  // first decode position has no interference term
  CHECK(noma::capacity_violation(0.2, 0, loads, gains, 1e6, 1e-20, 0.2) ==
        doctest::Approx(0.1 - 0.2).epsilon(1e-9));
}

TEST_CASE("rates reproduce loads over the horizon") {
  std::ostringstream log;
  CHECK(verify::suite_roundtrip(200, log) == 0);
}

TEST_CASE("root solve matches the bisection oracle") {
  std::ostringstream log;
  CHECK(verify::suite_newton(200, log) == 0);
}

}  // TEST_SUITE
