#include <doctest.h>

#include <cmath>
#include <algorithm>

#include "ivfe/dgp.hpp"
#include "support.hpp"

using namespace ivfe;
using ivfe::test::code;
using ivfe::test::error_code_of;

TEST_SUITE("dgp") {
  TEST_CASE("C1 center with forced innovations") {
    // y1 = 0 + 1 + 2*0 = 1; y2 = 0.4*1 + 1 + 2*1 = 3.4
    const auto y = c1_center(std::vector<double>{1.0, 1.0});
    CHECK(y[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(y[1] == doctest::Approx(3.4).epsilon(1e-15));
  }

  TEST_CASE("C2 zero-noise trajectory matches hand iteration through both regimes") {
    const auto y = c2_center(std::vector<double>(60, 0.0));
    CHECK(std::abs(y[0] - 0.6) < 1e-12);
    CHECK(std::abs(y[1] - 1.38) < 1e-12);
    double prev2 = 0.0, prev1 = 0.0;
    bool upper_regime_seen = false;
    for (std::size_t t = 0; t < y.size(); ++t) {
      double next = 0.0;
      if (prev2 < 5.0) {
        next = 0.6 + 1.3 * prev1 - 0.4 * prev2;
      } else {
        next = 1.2 + 1.6 * prev1 - 1.1 * prev2;
        upper_regime_seen = true;
      }
      CHECK(std::abs(y[t] - next) < 1e-9);
      prev2 = prev1;
      prev1 = next;
    }
    CHECK(upper_regime_seen);
  }

  TEST_CASE("C3 range zero-noise values") {
    const auto y = c3_range(std::vector<double>{0.0, 0.0});
    CHECK(y[0] == doctest::Approx(30.0002).epsilon(1e-12));
    const double second = 0.2 * 30.0002 + 1.6 * std::log(30000.2) + 30.0;
    CHECK(y[1] == doctest::Approx(second).epsilon(1e-12));
    CHECK(std::abs(y[1] - 52.4944) < 1e-4);
    const auto y10 = c3_range(std::vector<double>{0.0, 0.0}, false);
    CHECK(y10[1] == doctest::Approx(0.2 * 30.0002 + 1.6 * std::log10(30000.2) + 30.0).epsilon(1e-12));
  }

  TEST_CASE("C3 range fails on a nonpositive iterate") {
    CHECK(error_code_of([] { (void)c3_range(std::vector<double>{-100.0, 0.0}); }) == code(ErrorCode::kLogDomain));
  }

  TEST_CASE("generated series: length, determinism, seed sensitivity") {
    for (auto kind : {DgpKind::kC1, DgpKind::kC2, DgpKind::kC3}) {
      DgpSpec spec;
      spec.kind = kind;
      spec.length = 300;
      spec.seed = 4;
      const auto a = generate_dgp(spec);
      const auto b = generate_dgp(spec);
      CHECK(a.size() == 300);
      CHECK(a.range.size() == 300);
      CHECK(a.center == b.center);
      CHECK(a.range == b.range);
      spec.seed = 5;
      CHECK(generate_dgp(spec).center != a.center);
      for (double r : a.range) CHECK(r > 0.0);
    }
  }

  TEST_CASE("uniform ranges stay in [30, 50]") {
    DgpSpec spec;
    spec.length = 2000;
    for (auto kind : {DgpKind::kC1, DgpKind::kC2}) {
      spec.kind = kind;
      const auto s = generate_dgp(spec);
      for (double r : s.range) {
        CHECK(r >= 30.0);
        CHECK(r <= 50.0);
      }
    }
  }

  TEST_CASE("burn-in drops leading values of the same trajectory") {
    DgpSpec spec;
    spec.length = 100;
    spec.seed = 8;
    spec.burn_in = 0;
    const auto full = generate_dgp(spec);
    spec.burn_in = 10;
    spec.length = 90;
    const auto cut = generate_dgp(spec);
    REQUIRE(cut.size() == 90);
    // Both runs draw 100 values from the same stream.
    CHECK(std::equal(cut.center.begin(), cut.center.end(), full.center.begin() + 10));
    CHECK(std::equal(cut.range.begin(), cut.range.end(), full.range.begin() + 10));
  }

  TEST_CASE("provenance marks the reused halves") {
    CHECK_FALSE(dgp_provenance(DgpKind::kC1).center_extrapolated);
    CHECK_FALSE(dgp_provenance(DgpKind::kC1).range_extrapolated);
    CHECK(dgp_provenance(DgpKind::kC2).range_extrapolated);
    CHECK_FALSE(dgp_provenance(DgpKind::kC2).center_extrapolated);
    CHECK(dgp_provenance(DgpKind::kC3).center_extrapolated);
    CHECK_FALSE(dgp_provenance(DgpKind::kC3).range_extrapolated);
  }

  TEST_CASE("names and validation") {
    CHECK(parse_dgp_kind("C2") == DgpKind::kC2);
    CHECK_FALSE(parse_dgp_kind("c9").has_value());
    CHECK(dgp_name(DgpKind::kC3) == "c3");
    DgpSpec spec;
    spec.length = 5;
    CHECK(error_code_of([&] { spec.validate(); }) == code(ErrorCode::kInvalidArgument));
    spec.length = 100;
    spec.noise_std = 0.0;
    CHECK(error_code_of([&] { (void)generate_dgp(spec); }) == code(ErrorCode::kInvalidArgument));
  }
}
