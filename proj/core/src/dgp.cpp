#include "ivfe/dgp.hpp"

#include <cmath>
#include <random>
#include <string>

#include "ivfe/error.hpp"

namespace ivfe {

std::string_view dgp_name(DgpKind kind) noexcept {
  switch (kind) {
    case DgpKind::kC1: return "c1";
    case DgpKind::kC2: return "c2";
    case DgpKind::kC3: return "c3";
  }
  return "?";
}

std::optional<DgpKind> parse_dgp_kind(std::string_view name) noexcept {
  if (name == "c1" || name == "C1") return DgpKind::kC1;
  if (name == "c2" || name == "C2") return DgpKind::kC2;
  if (name == "c3" || name == "C3") return DgpKind::kC3;
  return std::nullopt;
}

void DgpSpec::validate() const {
  if (length < 10) {
    throw Error(ErrorCode::kInvalidArgument, "dgp length must be >= 10, got " + std::to_string(length));
  }
  if (!(noise_std > 0.0)) throw Error(ErrorCode::kInvalidArgument, "noise_std must be > 0");
}

DgpProvenance dgp_provenance(DgpKind kind) noexcept {
  switch (kind) {
    case DgpKind::kC1: return {false, false};
    case DgpKind::kC2: return {false, true};   // range reuses C1's Uniform(30,50)
    case DgpKind::kC3: return {true, false};   // center reuses C1's recursion
  }
  return {};
}

std::vector<double> c1_center(std::span<const double> eps) {
  std::vector<double> y(eps.size());
  double prev_y = 0.0;
  double prev_e = 0.0;
  for (std::size_t t = 0; t < eps.size(); ++t) {
    y[t] = 0.4 * prev_y + eps[t] + 2.0 * prev_e;
    prev_y = y[t];
    prev_e = eps[t];
  }
  return y;
}

std::vector<double> c2_center(std::span<const double> eps) {
  std::vector<double> y(eps.size());
  double lag2 = 0.0;  // y_t
  double lag1 = 0.0;  // y_{t+1}
  for (std::size_t t = 0; t < eps.size(); ++t) {
    const double next = lag2 < 5.0 ? 0.6 + 1.3 * lag1 - 0.4 * lag2 + eps[t]
                                    : 1.2 + 1.6 * lag1 - 1.1 * lag2 + eps[t];
    y[t] = next;
    lag2 = lag1;
    lag1 = next;
  }
  return y;
}

std::vector<double> c3_range(std::span<const double> eps, bool natural_log) {
  std::vector<double> y(eps.size());
  double prev = 0.001;
  for (std::size_t t = 0; t < eps.size(); ++t) {
    if (!(prev > 0.0)) {
      throw Error(ErrorCode::kLogDomain, "C3 range iterate " + std::to_string(prev) +
                                             " <= 0 before step " + std::to_string(t + 1));
    }
    const double arg = 1000.0 * prev;
    const double lg = natural_log ? std::log(arg) : std::log10(arg);
    y[t] = 0.2 * prev + 1.6 * lg + 30.0 + eps[t];
    prev = y[t];
  }
  if (!y.empty() && !(y.back() > 0.0)) {
    throw Error(ErrorCode::kLogDomain, "C3 range final iterate <= 0");
  }
  return y;
}

CenterRangeSeries generate_dgp(const DgpSpec& spec) {
  spec.validate();
  const std::size_t n = spec.length + spec.burn_in;
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, spec.noise_std);
  std::uniform_real_distribution<double> uniform(30.0, 50.0);

  // Fixed draw order: all center innovations, then all range draws.
  std::vector<double> eps_c(n);
  for (auto& e : eps_c) e = normal(rng);
  std::vector<double> range_draws(n);
  if (spec.kind == DgpKind::kC3) {
    for (auto& e : range_draws) e = normal(rng);
  } else {
    for (auto& r : range_draws) r = uniform(rng);
  }

  CenterRangeSeries out;
  switch (spec.kind) {
    case DgpKind::kC1:
    case DgpKind::kC3:
      out.center = c1_center(eps_c);
      break;
    case DgpKind::kC2:
      out.center = c2_center(eps_c);
      break;
  }
  out.range = spec.kind == DgpKind::kC3 ? c3_range(range_draws, spec.natural_log) : range_draws;

  if (spec.burn_in > 0) {
    out.center.erase(out.center.begin(), out.center.begin() + static_cast<std::ptrdiff_t>(spec.burn_in));
    out.range.erase(out.range.begin(), out.range.begin() + static_cast<std::ptrdiff_t>(spec.burn_in));
  }
  return out;
}

}  // namespace ivfe
