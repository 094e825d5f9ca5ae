#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <numeric>
#include <random>

#include "ivfe/regress.hpp"
#include "support.hpp"

using namespace ivfe;
using ivfe::test::code;
using ivfe::test::error_code_of;

namespace {

Matrix random_matrix(std::size_t n, std::size_t d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Matrix x(n, std::vector<double>(d));
  for (auto& row : x) {
    for (auto& v : row) v = g(rng);
  }
  return x;
}

std::vector<double> linear_target(const Matrix& x, std::uint64_t seed, double noise) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    y[i] = 0.5;
    for (std::size_t j = 0; j < x[i].size(); ++j) y[i] += static_cast<double>(j + 1) * x[i][j];
    y[i] += noise * g(rng);
  }
  return y;
}

RegressorSpec ridge(double lambda) {
  RegressorSpec s;
  s.kind = RegressorKind::kRidge;
  s.lambda = lambda;
  return s;
}

RegressorSpec knn(std::size_t k) {
  RegressorSpec s;
  s.kind = RegressorKind::kKnn;
  s.k = k;
  return s;
}

// Standardized design matrix rebuilt from the fitted mean and scale.
Eigen::MatrixXd standardized(const FittedRegressor& m, const Matrix& x) {
  Eigen::MatrixXd z(static_cast<Eigen::Index>(x.size()), static_cast<Eigen::Index>(m.width));
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = 0; j < m.width; ++j) {
      z(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = (x[i][j] - m.feature_mean[j]) / m.feature_scale[j];
    }
  }
  return z;
}

}  // namespace

TEST_SUITE("regress") {
  TEST_CASE("ridge satisfies its normal equations") {
    const auto x = random_matrix(60, 4, 1);
    const auto y = linear_target(x, 2, 0.3);
    for (double lambda : {0.0, 0.1, 1.0, 25.0}) {
      const auto m = fit(ridge(lambda), x, y);
      const auto z = standardized(m, x);
      Eigen::VectorXd yc(static_cast<Eigen::Index>(y.size()));
      for (std::size_t i = 0; i < y.size(); ++i) yc(static_cast<Eigen::Index>(i)) = y[i] - m.intercept;
      const Eigen::VectorXd beta = Eigen::Map<const Eigen::VectorXd>(m.coefficients.data(), 4);
      const Eigen::VectorXd residual = z.transpose() * (yc - z * beta) - lambda * beta;
      CHECK(residual.norm() < 1e-8);
      CHECK(std::abs(m.intercept - std::accumulate(y.begin(), y.end(), 0.0) / 60.0) < 1e-12);
    }
  }

  TEST_CASE("ridge limits") {
    // Zero penalty on a square, nonsingular design interpolates.
    const Matrix eye{{1.0, 0.0}, {0.0, 1.0}, {0.0, 0.0}};
    const std::vector<double> t{3.0, -1.0, 2.0};
    const auto exact = predict(fit(ridge(0.0), eye, t), eye);
    CHECK(ivfe::test::max_abs_diff(exact, t) < 1e-10);

    const auto x = random_matrix(50, 3, 3);
    const auto y = linear_target(x, 4, 1.0);
    const double mean = std::accumulate(y.begin(), y.end(), 0.0) / 50.0;
    for (double v : predict(fit(ridge(1e12), x, y), x)) CHECK(std::abs(v - mean) < 1e-6);

    Matrix line(20, std::vector<double>(1));
    std::vector<double> yl(20);
    for (std::size_t i = 0; i < 20; ++i) {
      line[i][0] = static_cast<double>(i) * 0.37 - 2.0;
      yl[i] = 2.0 * line[i][0] + 1.0;
    }
    const auto fitted = fit(ridge(1e-10), line, yl);
    CHECK(ivfe::test::max_abs_diff(predict(fitted, line), yl) < 1e-6);
    CHECK(ivfe::test::max_abs_diff(predict(fitted, Matrix{{10.0}}), {21.0}) < 1e-6);
  }

  TEST_CASE("knn memorizes with k = 1 and averages with larger k") {
    const auto x = random_matrix(40, 3, 5);
    const auto y = linear_target(x, 6, 0.5);
    CHECK(ivfe::test::max_abs_diff(predict(fit(knn(1), x, y), x), y) < 1e-12);

    // Brute-force oracle for k = 5 on fresh queries.
    const auto m = fit(knn(5), x, y);
    const auto q = random_matrix(15, 3, 7);
    const auto pred = predict(m, q);
    for (std::size_t i = 0; i < q.size(); ++i) {
      const auto zq = standardize(m, q[i]);
      std::vector<std::pair<double, std::size_t>> d;
      for (std::size_t r = 0; r < x.size(); ++r) {
        const auto zr = standardize(m, x[r]);
        double s = 0.0;
        for (std::size_t j = 0; j < 3; ++j) s += (zq[j] - zr[j]) * (zq[j] - zr[j]);
        d.emplace_back(s, r);
      }
      std::sort(d.begin(), d.end());
      double avg = 0.0;
      for (std::size_t j = 0; j < 5; ++j) avg += y[d[j].second];
      CHECK(std::abs(pred[i] - avg / 5.0) < 1e-12);
      const auto nb = knn_neighbors(m, q[i]);
      REQUIRE(nb.size() == 5);
      for (std::size_t j = 0; j < 5; ++j) CHECK(nb[j] == d[j].second);
    }
  }

  TEST_CASE("knn includes every row tied at the boundary distance") {
    const Matrix x{{0.0}, {0.0}, {0.0}, {1.0}, {5.0}};
    const std::vector<double> y{1.0, 2.0, 6.0, 10.0, 20.0};
    const auto m = fit(knn(2), x, y);
    CHECK(std::abs(predict(m, Matrix{{0.0}})[0] - 3.0) < 1e-12);
    CHECK(knn_neighbors(m, std::vector<double>{0.0}).size() == 2);
  }

  TEST_CASE("knn neighbourhoods are unchanged by per-feature affine rescaling") {
    const auto x = random_matrix(50, 4, 8);
    const auto y = linear_target(x, 9, 0.1);
    Matrix xs = x;
    const std::vector<double> scale{3.0, 0.01, 250.0, 1.0};
    const std::vector<double> shift{-7.0, 4.0, 0.5, 1e3};
    for (auto& row : xs) {
      for (std::size_t j = 0; j < 4; ++j) row[j] = scale[j] * row[j] + shift[j];
    }
    const auto a = fit(knn(4), x, y);
    const auto b = fit(knn(4), xs, y);
    for (std::size_t i = 0; i < 10; ++i) {
      auto q = xs[i];
      CHECK(knn_neighbors(a, x[i]) == knn_neighbors(b, q));
    }
  }

  TEST_CASE("fits are invariant to row order") {
    const auto x = random_matrix(45, 3, 10);
    const auto y = linear_target(x, 11, 0.8);
    std::vector<std::size_t> perm(45);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), std::mt19937_64(12));
    Matrix xp;
    std::vector<double> yp;
    for (auto i : perm) {
      xp.push_back(x[i]);
      yp.push_back(y[i]);
    }
    const auto q = random_matrix(10, 3, 13);
    for (RegressorKind kind : {RegressorKind::kRidge, RegressorKind::kKnn, RegressorKind::kMlp}) {
      RegressorSpec s;
      s.kind = kind;
      s.k = 3;
      s.epochs = 200;
      s.seed = 4;
      CHECK(predict(fit(s, x, y), q) == predict(fit(s, xp, yp), q));
    }
  }

  TEST_CASE("mlp gradient matches finite differences") {
    MlpParams p;
    p.inputs = 3;
    p.hidden = 4;
    std::mt19937_64 rng(14);
    std::normal_distribution<double> g(0.0, 0.7);
    std::vector<double> flat(3 * 4 + 4 + 4 + 1);
    for (auto& v : flat) v = g(rng);
    p.w1.resize(12);
    p.b1.resize(4);
    p.w2.resize(4);
    p.assign(flat);
    CHECK(p.flatten() == flat);
    const auto x = random_matrix(3, 3, 15);
    const std::vector<double> y{0.3, -1.2, 2.0};
    MlpParams grad = p;
    (void)mlp_loss_and_grad(p, x, y, &grad);
    const auto analytic = grad.flatten();
    const double h = 1e-6;
    for (std::size_t i = 0; i < flat.size(); ++i) {
      auto up = flat, dn = flat;
      up[i] += h;
      dn[i] -= h;
      MlpParams pu = p, pd = p;
      pu.assign(up);
      pd.assign(dn);
      const double fd = (mlp_loss_and_grad(pu, x, y, nullptr) - mlp_loss_and_grad(pd, x, y, nullptr)) / (2 * h);
      CHECK(std::abs(fd - analytic[i]) < 1e-7 * std::max(1.0, std::abs(fd)));
    }
  }

  TEST_CASE("mlp learns a smooth function") {
    const auto x = random_matrix(200, 2, 16);
    std::vector<double> y(200);
    for (std::size_t i = 0; i < 200; ++i) y[i] = std::sin(x[i][0]) + 0.5 * x[i][1];
    RegressorSpec s;
    s.kind = RegressorKind::kMlp;
    s.seed = 1;
    const auto pred = predict(fit(s, x, y), x);
    double err = 0.0, var = 0.0;
    const double mean = std::accumulate(y.begin(), y.end(), 0.0) / 200.0;
    for (std::size_t i = 0; i < 200; ++i) {
      err += (pred[i] - y[i]) * (pred[i] - y[i]);
      var += (y[i] - mean) * (y[i] - mean);
    }
    CHECK(err < 0.05 * var);
  }

  TEST_CASE("shapes and validation") {
    const auto x = random_matrix(10, 2, 17);
    const auto y = linear_target(x, 18, 0.1);
    const auto m = fit(ridge(1.0), x, y);
    CHECK(predict(m, Matrix{}).empty());
    CHECK(error_code_of([&] { (void)predict(m, Matrix{{1.0, 2.0, 3.0}}); }) == code(ErrorCode::kDimensionMismatch));
    CHECK(error_code_of([&] { (void)fit(ridge(1.0), x, std::vector<double>(9)); }) ==
          code(ErrorCode::kDimensionMismatch));
    CHECK(error_code_of([&] { (void)fit(ridge(1.0), Matrix{{1.0}, {2.0, 3.0}}, std::vector<double>{1, 2}); }) ==
          code(ErrorCode::kDimensionMismatch));
    CHECK(error_code_of([&] { (void)fit(ridge(1.0), Matrix{{1.0}}, std::vector<double>{1}); }) ==
          code(ErrorCode::kInvalidArgument));
    CHECK(error_code_of([&] { (void)fit(ridge(-1.0), x, y); }) == code(ErrorCode::kInvalidArgument));
    CHECK(error_code_of([&] { (void)fit(knn(0), x, y); }) == code(ErrorCode::kInvalidArgument));
    CHECK(parse_regressor_kind("knn") == RegressorKind::kKnn);
    CHECK(!parse_regressor_kind("svm"));
    CHECK(regressor_kind_name(RegressorKind::kMlp) == "mlp");
  }
}
