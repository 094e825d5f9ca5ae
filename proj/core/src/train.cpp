#include "ivfe/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "ivfe/error.hpp"

namespace ivfe {
namespace {

class OptimizerState {
 public:
  OptimizerState(const TrainConfig& cfg, const TensorSet& params)
      : cfg_(cfg), first_(params.zeros_like()), second_(params.zeros_like()) {}

  void step(TensorSet& params, const TensorSet& grads) {
    ++t_;
    for (std::size_t i = 0; i < params.size(); ++i) {
      auto& p = params[i].data;
      const auto& g = grads[i].data;
      auto& m = first_[i].data;
      if (cfg_.optimizer == Optimizer::kSgdMomentum) {
        for (std::size_t j = 0; j < p.size(); ++j) {
          m[j] = cfg_.momentum * m[j] + g[j];
          p[j] -= cfg_.learning_rate * m[j];
        }
      } else {
        constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
        auto& v = second_[i].data;
        const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
        const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
        for (std::size_t j = 0; j < p.size(); ++j) {
          m[j] = kBeta1 * m[j] + (1.0 - kBeta1) * g[j];
          v[j] = kBeta2 * v[j] + (1.0 - kBeta2) * g[j] * g[j];
          p[j] -= cfg_.learning_rate * (m[j] / c1) / (std::sqrt(v[j] / c2) + kEps);
        }
      }
    }
  }

 private:
  const TrainConfig& cfg_;
  TensorSet first_;
  TensorSet second_;
  std::size_t t_ = 0;
};

std::vector<LabeledImage> gather(const LabeledImageSet& dataset, std::span<const std::size_t> idx) {
  std::vector<LabeledImage> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(dataset.items[i]);
  return out;
}

// Minibatches over `order`; a trailing batch of one is folded into its
// predecessor so batch statistics stay defined.
std::vector<std::pair<std::size_t, std::size_t>> batch_bounds(std::size_t n, std::size_t batch) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t b = 0; b < n; b += batch) out.emplace_back(b, std::min(n, b + batch));
  if (out.size() > 1 && out.back().second - out.back().first == 1) {
    out[out.size() - 2].second = out.back().second;
    out.pop_back();
  }
  return out;
}

}  // namespace

std::string_view optimizer_name(Optimizer o) noexcept {
  return o == Optimizer::kSgdMomentum ? "sgd-momentum" : "adam";
}

std::optional<Optimizer> parse_optimizer(std::string_view name) noexcept {
  if (name == "sgd-momentum" || name == "sgd") return Optimizer::kSgdMomentum;
  if (name == "adam") return Optimizer::kAdam;
  return std::nullopt;
}

void TrainConfig::validate() const {
  if (!(split > 0.0 && split < 1.0)) throw Error(ErrorCode::kInvalidArgument, "split must lie in (0,1)");
  if (epochs < 1) throw Error(ErrorCode::kInvalidArgument, "epochs must be >= 1");
  if (batch_size < 2) throw Error(ErrorCode::kInvalidArgument, "batch_size must be >= 2");
  if (!(learning_rate > 0.0)) throw Error(ErrorCode::kInvalidArgument, "learning_rate must be > 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw Error(ErrorCode::kInvalidArgument, "momentum must lie in [0,1)");
  if (!(bn_momentum > 0.0 && bn_momentum <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "bn_momentum must lie in (0,1]");
  }
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> stratified_split(
    const LabeledImageSet& dataset, double train_fraction, std::uint64_t seed) {
  std::array<std::vector<std::size_t>, 4> by_class;
  for (std::size_t i = 0; i < dataset.items.size(); ++i) {
    const int label = dataset.items[i].label;
    if (label < 1 || label > 4) throw Error(ErrorCode::kInvalidArgument, "label outside 1..4");
    by_class[static_cast<std::size_t>(label - 1)].push_back(i);
  }
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> train_idx, test_idx;
  for (auto& members : by_class) {
    std::shuffle(members.begin(), members.end(), rng);
    if (members.empty()) continue;
    auto n_test = static_cast<std::size_t>(
        std::llround((1.0 - train_fraction) * static_cast<double>(members.size())));
    n_test = std::clamp<std::size_t>(n_test, 1, members.size() > 1 ? members.size() - 1 : 1);
    test_idx.insert(test_idx.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(n_test));
    train_idx.insert(train_idx.end(), members.begin() + static_cast<std::ptrdiff_t>(n_test), members.end());
  }
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(test_idx.begin(), test_idx.end());
  return {train_idx, test_idx};
}

double accuracy(const FenModel& model, const LabeledImageSet& dataset, std::span<const std::size_t> indices) {
  if (indices.empty()) return 0.0;
  std::size_t correct = 0;
  for (auto i : indices) {
    const auto res = forward(model, dataset.items[i].image);
    const auto pred = static_cast<int>(std::max_element(res.logits.begin(), res.logits.end()) -
                                       res.logits.begin()) + 1;
    if (pred == dataset.items[i].label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(indices.size());
}

std::pair<FenModel, TrainReport> train(const LabeledImageSet& dataset, const FenArchitecture& arch,
                                       const TrainConfig& cfg) {
  cfg.validate();
  arch.validate();
  const auto counts = dataset.class_counts();
  for (std::size_t c = 0; c < 4; ++c) {
    if (counts[c] < 4) {
      throw Error(ErrorCode::kInsufficientData, "class " + std::to_string(c + 1) + " has " +
                                                    std::to_string(counts[c]) + " samples, need >= 4");
    }
  }

  // Independent streams for the split, the initialization and the shuffles.
  std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32)};
  std::array<std::uint64_t, 3> seeds{};
  {
    std::array<std::uint32_t, 6> raw{};
    seq.generate(raw.begin(), raw.end());
    for (std::size_t i = 0; i < 3; ++i) seeds[i] = (std::uint64_t{raw[2 * i]} << 32) | raw[2 * i + 1];
  }
  const auto [train_idx, test_idx] = stratified_split(dataset, cfg.split, seeds[0]);
  FenModel model = init_model(arch, seeds[1], cfg.head_init);
  model.rng_seed = cfg.seed;
  std::mt19937_64 shuffle_rng(seeds[2]);

  TrainReport report;
  report.train_size = train_idx.size();
  report.test_size = test_idx.size();

  const auto bounds = batch_bounds(train_idx.size(), cfg.batch_size);
  {
    double total = 0.0;
    for (auto [b, e] : bounds) {
      const auto batch = gather(dataset, std::span(train_idx).subspan(b, e - b));
      total += loss_and_grad(model, batch).loss * static_cast<double>(e - b);
    }
    report.initial_loss = total / static_cast<double>(train_idx.size());
  }

  OptimizerState opt(cfg, model.params);
  FenModel best = model;
  double best_acc = -1.0;
  std::vector<std::size_t> order = train_idx;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double total = 0.0;
    for (auto [b, e] : bounds) {
      const auto batch = gather(dataset, std::span(order).subspan(b, e - b));
      auto lg = loss_and_grad(model, batch);
      total += lg.loss * static_cast<double>(e - b);
      opt.step(model.params, lg.grads);
      for (std::size_t i = 0; i < model.buffers.size(); ++i) {
        auto& run = model.buffers[i].data;
        const auto& cur = lg.batch_stats[i].data;
        for (std::size_t j = 0; j < run.size(); ++j) {
          run[j] = (1.0 - cfg.bn_momentum) * run[j] + cfg.bn_momentum * cur[j];
        }
      }
    }
    model.trained_epochs = epoch;
    const double loss = total / static_cast<double>(order.size());
    const double acc = accuracy(model, dataset, test_idx);
    report.epoch_loss.push_back(loss);
    report.epoch_accuracy.push_back(acc);
    if (acc > best_acc) {
      best_acc = acc;
      best = model;
      report.best_epoch = epoch;
      report.best_accuracy = acc;
      report.best_loss = loss;
    }
  }
  return {std::move(best), report};
}

}  // namespace ivfe
