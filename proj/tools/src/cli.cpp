#include "ivfe_cli/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ivfe/autocorr.hpp"
#include "ivfe/csv.hpp"
#include "ivfe/dgp.hpp"
#include "ivfe/error.hpp"
#include "ivfe/model_io.hpp"
#include "ivfe/pipeline.hpp"
#include "ivfe/report.hpp"
#include "ivfe/version.hpp"

namespace ivfe::cli {
namespace {

namespace fs = std::filesystem;

/// Thrown for bad arguments detected after CLI11 parsing.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct GenArgs {
  std::string dgp;
  std::size_t length = 1500;
  std::uint64_t seed = 0;
  double noise_std = 1.0;
  std::size_t burn_in = 0;
  bool log10 = false;
  std::string out;
};

int cmd_gen(const GenArgs& a, std::ostream& out) {
  const auto kind = parse_dgp_kind(a.dgp);
  if (!kind) throw UsageError("unknown dgp '" + a.dgp + "' (expected c1, c2 or c3)");
  DgpSpec spec;
  spec.kind = *kind;
  spec.length = a.length;
  spec.seed = a.seed;
  spec.noise_std = a.noise_std;
  spec.burn_in = a.burn_in;
  spec.natural_log = !a.log10;
  try {
    spec.validate();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  const auto series = from_center_range(generate_dgp(spec));
  save_csv(a.out, series);
  out << "wrote " << series.size() << " rows of " << dgp_name(spec.kind) << " to " << a.out << '\n';
  return kExitOk;
}

struct OrdersArgs {
  std::string input;
  std::string schema = "bounds";
  std::size_t max_lag = 40;
  std::string pin;
  bool json = false;
  std::string plot_data;
};

std::optional<OrderPair> parse_pin(const std::string& text) {
  if (text.empty()) return std::nullopt;
  const auto comma = text.find(',');
  std::size_t c = 0, r = 0;
  try {
    if (comma == std::string::npos) throw std::invalid_argument(text);
    std::size_t used = 0;
    c = std::stoul(text.substr(0, comma), &used);
    if (used != comma) throw std::invalid_argument(text);
    const auto rest = text.substr(comma + 1);
    r = std::stoul(rest, &used);
    if (used != rest.size()) throw std::invalid_argument(text);
  } catch (const std::logic_error&) {
    throw UsageError("--pin expects CENTER,RANGE (e.g. 35,35), got '" + text + "'");
  }
  if (c == 0 || r == 0) throw UsageError("pinned orders must be positive");
  return OrderPair{c, r};
}

int cmd_orders(const OrdersArgs& a, std::ostream& out) {
  const auto schema = parse_csv_schema(a.schema);
  if (!schema) throw UsageError("unknown schema '" + a.schema + "' (expected bounds or ohlc)");
  const auto pin = parse_pin(a.pin);
  const auto series = to_center_range(load_csv(a.input, *schema));
  const std::size_t max_lag = std::min(a.max_lag, series.size() - 1);

  struct Row {
    Source source;
    std::vector<double> acf, pacf;
    std::size_t order;
  };
  std::vector<Row> rows;
  for (auto src : {Source::kCenter, Source::kRange}) {
    const auto& x = src == Source::kCenter ? series.center : series.range;
    Row row{src, acf(x, max_lag), pacf(x, max_lag), 0};
    row.order = pin ? (src == Source::kCenter ? pin->center : pin->range) : select_order(x, max_lag);
    rows.push_back(std::move(row));
  }
  const double band = pacf_band(series.size());

  if (!a.plot_data.empty()) {
    std::ofstream plot(a.plot_data, std::ios::binary);
    if (!plot) throw Error(ErrorCode::kIoError, "cannot open " + a.plot_data + " for writing");
    plot << "source,lag,acf,pacf,band\n";
    for (const auto& row : rows) {
      for (std::size_t k = 0; k <= max_lag; ++k) {
        plot << source_name(row.source) << ',' << k << ',' << fmt17(row.acf[k]) << ',' << fmt17(row.pacf[k]) << ','
             << fmt17(band) << '\n';
      }
    }
  }

  if (a.json) {
    nlohmann::ordered_json j;
    j["input"] = a.input;
    j["length"] = series.size();
    j["max_lag"] = max_lag;
    j["band"] = band;
    j["pinned"] = pin.has_value();
    for (const auto& row : rows) {
      j[std::string(source_name(row.source))] = {{"order", row.order}, {"acf", row.acf}, {"pacf", row.pacf}};
    }
    out << j.dump(2) << '\n';
    return kExitOk;
  }
  out << "T=" << series.size() << " max_lag=" << max_lag << " band=+/-" << band << '\n';
  out << "lag   acf(center)  pacf(center)   acf(range)   pacf(range)\n";
  for (std::size_t k = 1; k <= max_lag; ++k) {
    char line[128];
    std::snprintf(line, sizeof line, "%3zu %12.5f %13.5f %12.5f %13.5f\n", k, rows[0].acf[k], rows[0].pacf[k],
                  rows[1].acf[k], rows[1].pacf[k]);
    out << line;
  }
  out << "orders: center=" << rows[0].order << " range=" << rows[1].order << (pin ? " (pinned)" : "") << '\n';
  return kExitOk;
}

struct RunArgs {
  std::string config;
  std::string out_dir = ".";
  bool dry_run = false;
  std::size_t jobs = 1;
};

int cmd_run(const RunArgs& a, std::ostream& out, std::ostream& err) {
  ExperimentConfig cfg;
  try {
    if (!fs::exists(a.config)) throw UsageError("config file not found: " + a.config);
    cfg = load_config(a.config);
    cfg.validate();
  } catch (const Error& e) {
    throw UsageError(std::string("invalid config: ") + e.what());
  }
  if (a.dry_run) {
    out << "config ok (hash " << config_hash(cfg) << ")\n" << describe_plan(cfg);
    return kExitOk;
  }

  std::string stage = "experiment";
  try {
    const auto report = run_experiment(cfg, std::max<std::size_t>(a.jobs, 1));
    stage = "write";
    fs::create_directories(a.out_dir);
    const fs::path dir(a.out_dir);
    write_text_file(dir / "report.json", report_to_json(report));
    write_text_file(dir / "report.csv", report_to_csv(report));
    save_model(report.model, dir / "fen_model.json",
               {{"config_hash", report.config_hash},
                {"seed", std::to_string(report.seed)},
                {"version", report.version},
                {"dataset", report.dataset}});
    out << report_summary(report);
    out << "wrote report.json, report.csv, fen_model.json to " << a.out_dir << '\n';
  } catch (const std::exception& e) {
    err << "ivfe run: stage '" << stage << "' failed: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

struct ImageArgs {
  std::string input;
  std::string schema = "bounds";
  std::string source = "center";
  std::string method = "gasf";
  std::size_t begin = 0;
  std::size_t length = 45;
  std::size_t mtf_bins = 8;
  std::string out;
};

int cmd_image(const ImageArgs& a, std::ostream& out) {
  const auto schema = parse_csv_schema(a.schema);
  if (!schema) throw UsageError("unknown schema '" + a.schema + "'");
  const auto method = parse_method(a.method);
  if (!method) throw UsageError("unknown imaging method '" + a.method + "' (expected rp, gasf, gadf or mtf)");
  if (a.source != "center" && a.source != "range") throw UsageError("--source must be center or range");
  const auto series = to_center_range(load_csv(a.input, *schema));
  const auto& x = a.source == "center" ? series.center : series.range;
  if (a.begin + a.length > x.size()) {
    throw Error(ErrorCode::kSegmentTooLong, "window [" + std::to_string(a.begin) + ", " +
                                                std::to_string(a.begin + a.length) + ") exceeds series length " +
                                                std::to_string(x.size()));
  }
  ImagingOptions opts;
  opts.mtf_bins = a.mtf_bins;
  const auto window = std::span<const double>(x).subspan(a.begin, a.length);
  export_pgm(a.out, make_image(*method, window, opts), *method, a.begin, a.begin + a.length);
  out << "wrote " << a.out << " and " << a.out << ".json\n";
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Interval-valued time series forecasting with imaging-based feature extraction", "ivfe"};
  app.set_version_flag("--version", std::string(version()));
  app.require_subcommand(1);

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a simulated interval series as t,lower,upper CSV");
  gen_cmd->add_option("--dgp", gen.dgp, "Process: c1, c2 or c3")->required();
  gen_cmd->add_option("--length", gen.length, "Number of rows")->capture_default_str();
  gen_cmd->add_option("--seed", gen.seed, "Random seed")->capture_default_str();
  gen_cmd->add_option("--noise-std", gen.noise_std, "Innovation standard deviation")->capture_default_str();
  gen_cmd->add_option("--burn-in", gen.burn_in, "Leading values to discard")->capture_default_str();
  gen_cmd->add_flag("--log10", gen.log10, "Use log10 in the c3 range recursion");
  gen_cmd->add_option("--out", gen.out, "Output CSV path")->required();

  OrdersArgs ord;
  auto* ord_cmd = app.add_subcommand("orders", "ACF/PACF and lag-order selection for center and range");
  ord_cmd->add_option("--input", ord.input, "Input CSV")->required();
  ord_cmd->add_option("--schema", ord.schema, "bounds (t,lower,upper) or ohlc (date,high,low)")
      ->capture_default_str();
  ord_cmd->add_option("--max-lag", ord.max_lag, "Largest lag examined")->capture_default_str();
  ord_cmd->add_option("--pin", ord.pin, "Use fixed orders CENTER,RANGE");
  ord_cmd->add_flag("--json", ord.json, "Emit JSON instead of a table");
  ord_cmd->add_option("--emit-plot-data", ord.plot_data, "Write source,lag,acf,pacf,band CSV");

  RunArgs run_args;
  auto* run_cmd = app.add_subcommand("run", "Run the full experiment described by a JSON config");
  run_cmd->add_option("--config", run_args.config, "Experiment config (JSON)")->required();
  run_cmd->add_option("--out-dir", run_args.out_dir, "Directory for report and model files")
      ->capture_default_str();
  run_cmd->add_flag("--dry-run", run_args.dry_run, "Validate the config and print the planned grid");
  run_cmd->add_option("--jobs", run_args.jobs, "Maximum concurrent grid cells")->capture_default_str();

  ImageArgs img;
  auto* img_cmd = app.add_subcommand("image", "Export one imaged window as an 8-bit PGM with a JSON sidecar");
  img_cmd->add_option("--input", img.input, "Input CSV")->required();
  img_cmd->add_option("--schema", img.schema, "bounds or ohlc")->capture_default_str();
  img_cmd->add_option("--source", img.source, "center or range")->capture_default_str();
  img_cmd->add_option("--method", img.method, "rp, gasf, gadf or mtf")->capture_default_str();
  img_cmd->add_option("--begin", img.begin, "First index of the window")->capture_default_str();
  img_cmd->add_option("--length", img.length, "Window length")->capture_default_str();
  img_cmd->add_option("--mtf-bins", img.mtf_bins, "Quantile bins for mtf")->capture_default_str();
  img_cmd->add_option("--out", img.out, "Output .pgm path")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << version() << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "ivfe: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (gen_cmd->parsed()) return cmd_gen(gen, out);
    if (ord_cmd->parsed()) return cmd_orders(ord, out);
    if (run_cmd->parsed()) return cmd_run(run_args, out, err);
    if (img_cmd->parsed()) return cmd_image(img, out);
  } catch (const UsageError& e) {
    err << "ivfe: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "ivfe: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace ivfe::cli
