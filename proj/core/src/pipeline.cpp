#include "ivfe/pipeline.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>
#include <tuple>

#include "ivfe/error.hpp"
#include "ivfe/version.hpp"
#include "parallel.hpp"

namespace ivfe {
namespace {

struct Candidate {
  std::size_t depth;
  std::size_t segment_length;
  std::size_t epochs;
};

std::vector<Candidate> candidates_of(const ExperimentConfig& cfg) {
  if (cfg.pinned_fen) return {{cfg.pinned_fen->depth, cfg.pinned_fen->segment_length, cfg.pinned_fen->epochs}};
  std::vector<Candidate> out;
  for (auto depth : cfg.depths) {
    for (auto len : cfg.segment_lengths) out.push_back({depth, len, cfg.train.epochs});
  }
  return out;
}

FenArchitecture architecture_of(const ExperimentConfig& cfg, std::size_t depth) {
  FenArchitecture arch;
  arch.blocks = depth;
  arch.widths = cfg.widths;
  arch.feature_dim = cfg.widths.back();
  return arch;
}

MetricValue guarded(auto&& fn) {
  MetricValue v;
  try {
    v.value = fn();
  } catch (const Error& e) {
    v.error = e.what();
  }
  return v;
}

struct SplitRows {
  Matrix train_x, test_x;
  std::vector<double> train_y, test_y;
};

SplitRows split_rows(const Matrix& x, std::span<const double> y, std::span<const std::size_t> target_index,
                     std::size_t split_index) {
  SplitRows s;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (target_index[i] < split_index) {
      s.train_x.push_back(x[i]);
      s.train_y.push_back(y[i]);
    } else {
      s.test_x.push_back(x[i]);
      s.test_y.push_back(y[i]);
    }
  }
  return s;
}

}  // namespace

std::size_t select_candidate(std::span<const CandidateResult> candidates, double tolerance) {
  double best = -1.0;
  for (const auto& c : candidates) {
    if (c.report) best = std::max(best, c.report->best_accuracy);
  }
  if (best < 0.0) throw Error(ErrorCode::kInsufficientData, "no FEN candidate trained successfully");
  std::optional<std::size_t> chosen;
  auto key = [&](const CandidateResult& c) {
    return std::make_tuple(c.depth, c.report->best_epoch, c.segment_length);
  };
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto& c = candidates[i];
    if (!c.report || c.report->best_accuracy < best - tolerance - 1e-12) continue;
    if (!chosen || key(c) < key(candidates[*chosen])) chosen = i;
  }
  return *chosen;
}

FenOutcome run_algorithm1(const ExperimentConfig& cfg, const CenterRangeSeries& series, std::size_t jobs) {
  const auto cands = candidates_of(cfg);
  for (const auto& c : cands) {
    if (c.segment_length < 2 || series.size() / c.segment_length < 2) {
      throw Error(ErrorCode::kInsufficientData, "segment length " + std::to_string(c.segment_length) +
                                                    " yields fewer than 2 segments of a length-" +
                                                    std::to_string(series.size()) + " series");
    }
  }

  FenOutcome out;
  out.selection.candidates.resize(cands.size());
  std::vector<std::optional<FenModel>> models(cands.size());
  detail::parallel_for(cands.size(), jobs, [&](std::size_t i) {
    const auto& c = cands[i];
    auto& result = out.selection.candidates[i];
    result.depth = c.depth;
    result.segment_length = c.segment_length;
    try {
      const auto seg_c = segment(series.center, c.segment_length, Source::kCenter);
      const auto seg_r = segment(series.range, c.segment_length, Source::kRange);
      const auto dataset = build_classification_dataset(seg_c, seg_r, cfg.imaging);
      TrainConfig tc = cfg.train;
      tc.epochs = c.epochs;
      tc.seed = mix_seed(cfg.seed, {1, c.depth, c.segment_length});
      auto [model, report] = train(dataset, architecture_of(cfg, c.depth), tc);
      result.report = report;
      models[i] = std::move(model);
    } catch (const Error& e) {
      result.error = e.what();
    }
  });
  out.selection.chosen = select_candidate(out.selection.candidates, cfg.selection_tolerance);
  out.model = std::move(*models[out.selection.chosen]);
  return out;
}

FenOutcome run_algorithm1(const ExperimentConfig& cfg, std::size_t jobs) {
  cfg.validate();
  auto series = load_series(cfg.data);
  if (cfg.leak_free) {
    const auto cut = chronological_split_index(series.size(), cfg.split);
    series.center.resize(cut);
    series.range.resize(cut);
  }
  return run_algorithm1(cfg, series, jobs);
}

GrayImage feature_image(std::span<const double> window, ImagingMethod method, const ImagingOptions& options,
                        std::size_t min_side) {
  ImagingOptions opts = options;
  opts.mtf_bins = std::min(opts.mtf_bins, window.size());
  GrayImage img = normalize_unit(make_image(method, window, opts));
  if (img.side < min_side) img = resize_bilinear(img, min_side);
  return img;
}

FeatureDataset build_feature_dataset(const FenModel& model, std::span<const double> x, std::size_t order,
                                     ImagingMethod method, const ImagingOptions& options, Source source,
                                     std::size_t jobs) {
  order = std::max<std::size_t>(order, 2);
  const auto lag = build_lag_dataset(x, order, source);
  FeatureDataset out;
  out.order = order;
  out.method = method;
  out.source = source;
  out.targets = lag.targets;
  out.target_index = lag.target_index;
  out.features.resize(lag.size());
  detail::parallel_for(lag.size(), jobs, [&](std::size_t j) {
    const auto img = feature_image(lag.windows[j], method, options, model.architecture.min_side);
    out.features[j] = extract_features(model, img);
  });
  return out;
}

std::pair<FeatureDataset, FeatureDataset> build_feature_datasets(const FenModel& model,
                                                                 const CenterRangeSeries& series,
                                                                 OrderPair orders, ImagingMethod method,
                                                                 const ImagingOptions& options, std::size_t jobs) {
  return {build_feature_dataset(model, series.center, orders.center, method, options, Source::kCenter, jobs),
          build_feature_dataset(model, series.range, orders.range, method, options, Source::kRange, jobs)};
}

const CellResult* ExperimentReport::find_cell(std::string_view regressor, std::string_view method,
                                              Source source) const noexcept {
  for (const auto& c : cells) {
    if (c.regressor == regressor && c.method == method && c.source == source) return &c;
  }
  return nullptr;
}

CenterRangeSeries load_series(const DataSource& data) {
  if (data.dgp) return generate_dgp(*data.dgp);
  if (data.csv_path) return to_center_range(load_csv(*data.csv_path, data.csv_schema));
  throw Error(ErrorCode::kConfigError, "no data source configured");
}

OrderPair resolve_orders(const ExperimentConfig& cfg, const CenterRangeSeries& series) {
  const std::size_t max_lag = std::min(cfg.orders.max_lag, series.size() - 1);
  OrderPair out;
  out.center = cfg.orders.center ? *cfg.orders.center : select_order(series.center, max_lag);
  out.range = cfg.orders.range ? *cfg.orders.range : select_order(series.range, max_lag);
  return out;
}

std::size_t chronological_split_index(std::size_t length, double split) {
  return static_cast<std::size_t>(std::floor(split * static_cast<double>(length)));
}

ExperimentReport run_experiment(const ExperimentConfig& cfg, std::size_t jobs) {
  cfg.validate();
  ExperimentReport report;
  report.version = std::string(version());
  report.config_json = config_to_json(cfg);
  report.config_hash = config_hash(cfg);
  report.dataset = cfg.data.name();
  report.seed = cfg.seed;

  const auto series = load_series(cfg.data);
  const std::size_t T = series.size();
  report.series_length = T;
  report.orders = resolve_orders(cfg, series);
  report.split_index = chronological_split_index(T, cfg.split);

  CenterRangeSeries fen_series = series;
  if (cfg.leak_free) {
    fen_series.center.resize(report.split_index);
    fen_series.range.resize(report.split_index);
  }
  auto fen = run_algorithm1(cfg, fen_series, jobs);
  report.selection = std::move(fen.selection);
  report.model = std::move(fen.model);

  if (cfg.feature_window == FeatureWindow::kSegment) {
    const auto len = report.selection.chosen_candidate().segment_length;
    report.feature_orders = {len, len};
  } else {
    report.feature_orders = {std::max<std::size_t>(report.orders.center, 2),
                             std::max<std::size_t>(report.orders.range, 2)};
  }
  const std::size_t widest = std::max({report.orders.center, report.orders.range, report.feature_orders.center,
                                       report.feature_orders.range});
  if (report.split_index < widest + 2 || report.split_index >= T) {
    throw Error(ErrorCode::kInsufficientData, "split index " + std::to_string(report.split_index) +
                                                  " leaves too few training or test rows for order " +
                                                  std::to_string(widest));
  }

  // Datasets per (method slot, source). Slot 0 is the raw lag baseline.
  struct Inputs {
    Matrix x;
    std::vector<double> y;
    std::vector<std::size_t> index;
  };
  const std::size_t slots = 1 + cfg.methods.size();
  std::vector<std::array<Inputs, 2>> inputs(slots);
  {
    auto raw_c = build_lag_dataset(series.center, report.orders.center, Source::kCenter);
    auto raw_r = build_lag_dataset(series.range, report.orders.range, Source::kRange);
    inputs[0][0] = {std::move(raw_c.windows), std::move(raw_c.targets), std::move(raw_c.target_index)};
    inputs[0][1] = {std::move(raw_r.windows), std::move(raw_r.targets), std::move(raw_r.target_index)};
  }
  for (std::size_t m = 0; m < cfg.methods.size(); ++m) {
    auto [fc, fr] = build_feature_datasets(report.model, series, report.feature_orders, cfg.methods[m],
                                           cfg.imaging, jobs);
    inputs[m + 1][0] = {std::move(fc.features), std::move(fc.targets), std::move(fc.target_index)};
    inputs[m + 1][1] = {std::move(fr.features), std::move(fr.targets), std::move(fr.target_index)};
  }

  auto slot_name = [&](std::size_t slot) {
    return slot == 0 ? std::string("raw") : std::string(method_name(cfg.methods[slot - 1]));
  };
  const auto regs = cfg.effective_regressors();
  const std::size_t n_cells = regs.size() * slots * 2;
  report.cells.resize(n_cells);
  std::vector<std::vector<double>> truths(n_cells);
  detail::parallel_for(n_cells, jobs, [&](std::size_t cell) {
    const std::size_t r = cell / (slots * 2);
    const std::size_t slot = (cell / 2) % slots;
    const std::size_t s = cell % 2;
    auto& out = report.cells[cell];
    out.regressor = regs[r].label();
    out.method = slot_name(slot);
    out.source = s == 0 ? Source::kCenter : Source::kRange;
    const auto& in = inputs[slot][s];
    auto rows = split_rows(in.x, in.y, in.index, report.split_index);
    truths[cell] = rows.test_y;
    try {
      RegressorSpec spec = regs[r];
      spec.seed = mix_seed(cfg.seed, {2, r, slot, s});
      const auto model = fit(spec, rows.train_x, rows.train_y);
      out.predictions = predict(model, rows.test_x);
    } catch (const Error& e) {
      out.error = e.what();
      return;
    }
    const auto& y = rows.test_y;
    const auto& p = out.predictions;
    out.mse = guarded([&] { return mse(y, p); });
    out.mae = guarded([&] { return mae(y, p); });
    out.mape = guarded([&] { return mape(y, p); });
    out.smape = guarded([&] { return smape(y, p); });
  });

  for (std::size_t r = 0; r < regs.size(); ++r) {
    for (std::size_t slot = 0; slot < slots; ++slot) {
      const std::size_t base = (r * slots + slot) * 2;
      const auto& c = report.cells[base];
      const auto& g = report.cells[base + 1];
      MdeResult m;
      m.regressor = regs[r].label();
      m.method = slot_name(slot);
      if (!c.error.empty() || !g.error.empty()) {
        m.nested.error = m.single_root.error = "missing center or range predictions";
      } else {
        m.nested = guarded([&] { return mde(truths[base], c.predictions, truths[base + 1], g.predictions, true); });
        m.single_root =
            guarded([&] { return mde(truths[base], c.predictions, truths[base + 1], g.predictions, false); });
      }
      report.mde.push_back(std::move(m));
    }
  }
  return report;
}

std::string describe_plan(const ExperimentConfig& cfg) {
  cfg.validate();
  std::ostringstream os;
  os << "dataset: " << cfg.data.name() << '\n';
  os << "orders: center=" << (cfg.orders.center ? std::to_string(*cfg.orders.center) : "auto")
     << " range=" << (cfg.orders.range ? std::to_string(*cfg.orders.range) : "auto")
     << " (max_lag " << cfg.orders.max_lag << ")\n";
  os << "fen candidates (depth x segment length, epochs):\n";
  for (const auto& c : candidates_of(cfg)) {
    os << "  depth " << c.depth << ", segment " << c.segment_length << ", " << c.epochs << " epochs\n";
  }
  os << "methods:";
  for (auto m : cfg.methods) os << ' ' << method_name(m);
  os << "\nregressors:";
  for (const auto& r : cfg.effective_regressors()) os << ' ' << r.label();
  const auto regs = cfg.effective_regressors().size();
  os << "\ncells: " << regs * (1 + cfg.methods.size()) * 2 << " point-metric cells, "
     << regs * (1 + cfg.methods.size()) << " interval (MDE) cells\n";
  os << "split: " << cfg.split << " chronological, leak_free=" << (cfg.leak_free ? "true" : "false") << '\n';
  return os.str();
}

}  // namespace ivfe
