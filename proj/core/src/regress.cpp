#include "ivfe/regress.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <Eigen/Dense>

#include "ivfe/error.hpp"

namespace ivfe {
namespace {

void check_matrix(const Matrix& x, std::size_t width) {
  for (const auto& row : x) {
    if (row.size() != width) {
      throw Error(ErrorCode::kDimensionMismatch, "row width " + std::to_string(row.size()) +
                                                     " differs from " + std::to_string(width));
    }
  }
}

std::vector<std::size_t> canonical_order(const Matrix& x, std::span<const double> y) {
  std::vector<std::size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (x[a] != x[b]) return x[a] < x[b];
    return y[a] < y[b];
  });
  return idx;
}

void fit_ridge(FittedRegressor& m, const Matrix& z, std::span<const double> y) {
  const auto n = static_cast<Eigen::Index>(z.size());
  const auto d = static_cast<Eigen::Index>(m.width);
  double ybar = 0.0;
  for (double v : y) ybar += v;
  ybar /= static_cast<double>(y.size());

  Eigen::MatrixXd zm(n, d);
  Eigen::VectorXd yc(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) zm(i, j) = z[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    yc(i) = y[static_cast<std::size_t>(i)] - ybar;
  }

  Eigen::VectorXd beta;
  if (m.spec.lambda > 0.0) {
    Eigen::MatrixXd a = zm.transpose() * zm;
    a.diagonal().array() += m.spec.lambda;
    beta = a.ldlt().solve(zm.transpose() * yc);
  } else {
    // Minimum-norm least squares; equals the normal-equation solution when
    // Z'Z is invertible.
    beta = zm.completeOrthogonalDecomposition().solve(yc);
  }
  if (!beta.allFinite()) throw Error(ErrorCode::kSingularSystem, "ridge solve produced non-finite coefficients");
  m.intercept = ybar;
  m.coefficients.assign(beta.data(), beta.data() + beta.size());
}

void fit_mlp(FittedRegressor& m, const Matrix& z, std::span<const double> y) {
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(y.size());
  double var = 0.0;
  for (double v : y) var += (v - mean) * (v - mean);
  var /= static_cast<double>(y.size());
  if (!(var > 0.0)) throw Error(ErrorCode::kInvalidArgument, "mlp target is constant");
  m.target_mean = mean;
  m.target_scale = std::sqrt(var);
  std::vector<double> ys(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) ys[i] = (y[i] - mean) / m.target_scale;

  MlpParams& p = m.mlp;
  p.inputs = m.width;
  p.hidden = m.spec.hidden;
  p.w1.resize(p.hidden * p.inputs);
  p.b1.assign(p.hidden, 0.0);
  p.w2.resize(p.hidden);
  p.b2 = 0.0;
  std::mt19937_64 rng(m.spec.seed);
  const double l1 = std::sqrt(6.0 / static_cast<double>(p.inputs + p.hidden));
  const double l2 = std::sqrt(6.0 / static_cast<double>(p.hidden + 1));
  std::uniform_real_distribution<double> u1(-l1, l1);
  std::uniform_real_distribution<double> u2(-l2, l2);
  for (auto& v : p.w1) v = u1(rng);
  for (auto& v : p.w2) v = u2(rng);

  auto theta = p.flatten();
  std::vector<double> velocity(theta.size(), 0.0);
  MlpParams grad;
  for (std::size_t epoch = 0; epoch < m.spec.epochs; ++epoch) {
    mlp_loss_and_grad(p, z, ys, &grad);
    const auto g = grad.flatten();
    for (std::size_t i = 0; i < theta.size(); ++i) {
      velocity[i] = m.spec.momentum * velocity[i] + g[i];
      theta[i] -= m.spec.learning_rate * velocity[i];
    }
    p.assign(theta);
  }
  for (double v : theta) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kSingularSystem, "mlp training diverged");
  }
}

double mlp_output(const MlpParams& p, std::span<const double> x, std::vector<double>* hidden_out) {
  double out = p.b2;
  for (std::size_t h = 0; h < p.hidden; ++h) {
    double a = p.b1[h];
    const double* w = &p.w1[h * p.inputs];
    for (std::size_t j = 0; j < p.inputs; ++j) a += w[j] * x[j];
    const double t = std::tanh(a);
    if (hidden_out) (*hidden_out)[h] = t;
    out += p.w2[h] * t;
  }
  return out;
}

}  // namespace

std::string_view regressor_kind_name(RegressorKind k) noexcept {
  switch (k) {
    case RegressorKind::kRidge: return "ridge";
    case RegressorKind::kKnn: return "knn";
    case RegressorKind::kMlp: return "mlp";
  }
  return "?";
}

std::optional<RegressorKind> parse_regressor_kind(std::string_view name) noexcept {
  if (name == "ridge") return RegressorKind::kRidge;
  if (name == "knn") return RegressorKind::kKnn;
  if (name == "mlp") return RegressorKind::kMlp;
  return std::nullopt;
}

void RegressorSpec::validate() const {
  if (kind == RegressorKind::kRidge && !(lambda >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "ridge lambda must be >= 0");
  if (kind == RegressorKind::kKnn && k < 1) throw Error(ErrorCode::kInvalidArgument, "knn k must be >= 1");
  if (kind == RegressorKind::kMlp) {
    if (hidden < 1) throw Error(ErrorCode::kInvalidArgument, "mlp hidden must be >= 1");
    if (epochs < 1) throw Error(ErrorCode::kInvalidArgument, "mlp epochs must be >= 1");
    if (!(learning_rate > 0.0)) throw Error(ErrorCode::kInvalidArgument, "mlp learning_rate must be > 0");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw Error(ErrorCode::kInvalidArgument, "mlp momentum must lie in [0,1)");
  }
}

std::string RegressorSpec::label() const { return std::string(regressor_kind_name(kind)); }

std::vector<double> MlpParams::flatten() const {
  std::vector<double> out;
  out.reserve(w1.size() + b1.size() + w2.size() + 1);
  out.insert(out.end(), w1.begin(), w1.end());
  out.insert(out.end(), b1.begin(), b1.end());
  out.insert(out.end(), w2.begin(), w2.end());
  out.push_back(b2);
  return out;
}

void MlpParams::assign(std::span<const double> flat) {
  auto it = flat.begin();
  std::copy_n(it, w1.size(), w1.begin());
  it += static_cast<std::ptrdiff_t>(w1.size());
  std::copy_n(it, b1.size(), b1.begin());
  it += static_cast<std::ptrdiff_t>(b1.size());
  std::copy_n(it, w2.size(), w2.begin());
  it += static_cast<std::ptrdiff_t>(w2.size());
  b2 = *it;
}

double mlp_loss_and_grad(const MlpParams& p, const Matrix& x, std::span<const double> y, MlpParams* grad) {
  if (x.size() != y.size() || x.empty()) throw Error(ErrorCode::kDimensionMismatch, "mlp inputs and targets disagree");
  check_matrix(x, p.inputs);
  if (grad) {
    grad->inputs = p.inputs;
    grad->hidden = p.hidden;
    grad->w1.assign(p.w1.size(), 0.0);
    grad->b1.assign(p.b1.size(), 0.0);
    grad->w2.assign(p.w2.size(), 0.0);
    grad->b2 = 0.0;
  }
  const double n = static_cast<double>(x.size());
  std::vector<double> h(p.hidden);
  double loss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = mlp_output(p, x[i], &h) - y[i];
    loss += 0.5 * r * r;
    if (!grad) continue;
    const double g = r / n;
    grad->b2 += g;
    for (std::size_t k = 0; k < p.hidden; ++k) {
      grad->w2[k] += g * h[k];
      const double ga = g * p.w2[k] * (1.0 - h[k] * h[k]);
      grad->b1[k] += ga;
      double* gw = &grad->w1[k * p.inputs];
      for (std::size_t j = 0; j < p.inputs; ++j) gw[j] += ga * x[i][j];
    }
  }
  return loss / n;
}

FittedRegressor fit(const RegressorSpec& spec, const Matrix& x, std::span<const double> y) {
  spec.validate();
  if (x.size() != y.size()) {
    throw Error(ErrorCode::kDimensionMismatch, std::to_string(x.size()) + " rows but " +
                                                   std::to_string(y.size()) + " targets");
  }
  if (x.size() < 2) throw Error(ErrorCode::kInvalidArgument, "need at least 2 training rows");
  FittedRegressor m;
  m.spec = spec;
  m.width = x.front().size();
  if (m.width == 0) throw Error(ErrorCode::kDimensionMismatch, "feature rows are empty");
  check_matrix(x, m.width);

  const auto order = canonical_order(x, y);
  const double n = static_cast<double>(x.size());
  m.feature_mean.assign(m.width, 0.0);
  m.feature_scale.assign(m.width, 0.0);
  for (auto i : order) {
    for (std::size_t j = 0; j < m.width; ++j) m.feature_mean[j] += x[i][j];
  }
  for (auto& v : m.feature_mean) v /= n;
  for (auto i : order) {
    for (std::size_t j = 0; j < m.width; ++j) {
      const double d = x[i][j] - m.feature_mean[j];
      m.feature_scale[j] += d * d;
    }
  }
  for (auto& v : m.feature_scale) {
    v = std::sqrt(v / n);
    if (!(v > 1e-12)) v = 1.0;
  }

  Matrix z;
  z.reserve(x.size());
  std::vector<double> ys;
  ys.reserve(y.size());
  for (auto i : order) {
    z.push_back(standardize(m, x[i]));
    ys.push_back(y[i]);
  }

  switch (spec.kind) {
    case RegressorKind::kRidge:
      fit_ridge(m, z, ys);
      break;
    case RegressorKind::kKnn:
      m.train_rows = std::move(z);
      m.train_targets = std::move(ys);
      m.train_origin = order;
      break;
    case RegressorKind::kMlp:
      fit_mlp(m, z, ys);
      break;
  }
  return m;
}

std::vector<double> standardize(const FittedRegressor& model, std::span<const double> row) {
  if (row.size() != model.width) {
    throw Error(ErrorCode::kDimensionMismatch, "row width " + std::to_string(row.size()) +
                                                   " differs from training width " +
                                                   std::to_string(model.width));
  }
  std::vector<double> z(row.size());
  for (std::size_t j = 0; j < row.size(); ++j) z[j] = (row[j] - model.feature_mean[j]) / model.feature_scale[j];
  return z;
}

namespace {

std::vector<std::size_t> nearest_positions(const FittedRegressor& model, const std::vector<double>& z) {
  const std::size_t n = model.train_rows.size();
  std::vector<std::pair<double, std::size_t>> dist(n);
  for (std::size_t i = 0; i < n; ++i) {
    double d = 0.0;
    const auto& r = model.train_rows[i];
    for (std::size_t j = 0; j < z.size(); ++j) d += (r[j] - z[j]) * (r[j] - z[j]);
    dist[i] = {d, i};
  }
  const std::size_t k = std::min(model.spec.k, n);
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
  std::vector<std::size_t> out(k);
  for (std::size_t i = 0; i < k; ++i) out[i] = dist[i].second;
  return out;
}

// Every training row tied with the k-th distance is averaged in, so the
// prediction never depends on how equidistant rows happen to be ordered.
double knn_average(const FittedRegressor& model, const std::vector<double>& z) {
  const std::size_t n = model.train_rows.size();
  std::vector<double> dist(n);
  for (std::size_t i = 0; i < n; ++i) {
    double d = 0.0;
    const auto& r = model.train_rows[i];
    for (std::size_t j = 0; j < z.size(); ++j) d += (r[j] - z[j]) * (r[j] - z[j]);
    dist[i] = d;
  }
  const std::size_t k = std::min(model.spec.k, n);
  std::vector<double> sorted = dist;
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(k - 1), sorted.end());
  const double radius = sorted[k - 1];
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (dist[i] <= radius) {
      sum += model.train_targets[i];
      ++count;
    }
  }
  return sum / static_cast<double>(count);
}

}  // namespace

std::vector<std::size_t> knn_neighbors(const FittedRegressor& model, std::span<const double> row) {
  if (model.spec.kind != RegressorKind::kKnn) throw Error(ErrorCode::kInvalidArgument, "not a knn model");
  auto pos = nearest_positions(model, standardize(model, row));
  for (auto& p : pos) p = model.train_origin[p];
  return pos;
}

std::vector<double> predict(const FittedRegressor& model, const Matrix& x) {
  std::vector<double> out;
  out.reserve(x.size());
  for (const auto& row : x) {
    const auto z = standardize(model, row);
    switch (model.spec.kind) {
      case RegressorKind::kRidge: {
        double v = model.intercept;
        for (std::size_t j = 0; j < z.size(); ++j) v += model.coefficients[j] * z[j];
        out.push_back(v);
        break;
      }
      case RegressorKind::kKnn:
        out.push_back(knn_average(model, z));
        break;
      case RegressorKind::kMlp:
        out.push_back(model.target_mean + model.target_scale * mlp_output(model.mlp, z, nullptr));
        break;
    }
  }
  return out;
}

}  // namespace ivfe
