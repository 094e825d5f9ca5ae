#include "ivfe/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ivfe/error.hpp"

namespace ivfe {
namespace {

using Json = nlohmann::ordered_json;

Json metric_json(const MetricValue& m) {
  if (m.value) return *m.value;
  return Json{{"error", m.error}};
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Error text may contain commas or quotes.
std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

Json candidate_json(const CandidateResult& c) {
  Json j;
  j["depth"] = c.depth;
  j["segment_length"] = c.segment_length;
  if (c.report) {
    const auto& r = *c.report;
    j["best_epoch"] = r.best_epoch;
    j["best_accuracy"] = r.best_accuracy;
    j["best_loss"] = r.best_loss;
    j["initial_loss"] = r.initial_loss;
    j["train_size"] = r.train_size;
    j["test_size"] = r.test_size;
    j["epoch_loss"] = r.epoch_loss;
    j["epoch_accuracy"] = r.epoch_accuracy;
  } else {
    j["error"] = c.error;
  }
  return j;
}

}  // namespace

std::string report_to_json(const ExperimentReport& report) {
  Json j;
  j["meta"] = {{"seed", report.seed},
               {"config_hash", report.config_hash},
               {"version", report.version},
               {"dataset", report.dataset}};
  j["config"] = Json::parse(report.config_json);
  j["series_length"] = report.series_length;
  j["split_index"] = report.split_index;
  j["orders"] = {{"center", report.orders.center}, {"range", report.orders.range}};
  j["feature_orders"] = {{"center", report.feature_orders.center}, {"range", report.feature_orders.range}};

  Json sel;
  sel["candidates"] = Json::array();
  for (const auto& c : report.selection.candidates) sel["candidates"].push_back(candidate_json(c));
  if (!report.selection.candidates.empty()) {
    const auto& c = report.selection.chosen_candidate();
    sel["chosen"] = {{"depth", c.depth},
                     {"segment_length", c.segment_length},
                     {"best_epoch", c.report ? c.report->best_epoch : 0}};
  }
  j["fen_selection"] = std::move(sel);

  j["cells"] = Json::array();
  for (const auto& c : report.cells) {
    Json cell{{"regressor", c.regressor}, {"method", c.method}, {"source", std::string(source_name(c.source))}};
    if (!c.error.empty()) {
      cell["error"] = c.error;
    } else {
      cell["metrics"] = {{"mse", metric_json(c.mse)},
                         {"mae", metric_json(c.mae)},
                         {"mape", metric_json(c.mape)},
                         {"smape", metric_json(c.smape)}};
    }
    j["cells"].push_back(std::move(cell));
  }
  j["mde"] = Json::array();
  for (const auto& m : report.mde) {
    j["mde"].push_back({{"regressor", m.regressor},
                        {"method", m.method},
                        {"value", metric_json(m.nested)},
                        {"single_root", metric_json(m.single_root)}});
  }
  return j.dump(2) + "\n";
}

std::string report_to_csv(const ExperimentReport& report) {
  std::ostringstream os;
  os << "# ivfe " << report.version << " seed=" << report.seed << " config_hash=" << report.config_hash << '\n';
  os << "section,regressor,method,source,metric,value,error\n";
  auto row = [&](std::string_view section, const std::string& reg, const std::string& method,
                 std::string_view source, std::string_view metric, const MetricValue& v) {
    os << section << ',' << csv_field(reg) << ',' << method << ',' << source << ',' << metric << ','
       << (v.value ? fmt(*v.value) : std::string()) << ',' << csv_field(v.error) << '\n';
  };
  auto plain = [](double v) { return MetricValue{v, {}}; };
  row("orders", "", "", "center", "order", plain(static_cast<double>(report.orders.center)));
  row("orders", "", "", "range", "order", plain(static_cast<double>(report.orders.range)));
  for (const auto& c : report.selection.candidates) {
    const std::string tag = "depth=" + std::to_string(c.depth) + " segment=" + std::to_string(c.segment_length);
    if (c.report) {
      row("fen", tag, "", "", "best_accuracy", plain(c.report->best_accuracy));
      row("fen", tag, "", "", "best_epoch", plain(static_cast<double>(c.report->best_epoch)));
    } else {
      row("fen", tag, "", "", "best_accuracy", MetricValue{std::nullopt, c.error});
    }
  }
  for (const auto& c : report.cells) {
    const auto src = source_name(c.source);
    if (!c.error.empty()) {
      row("cell", c.regressor, c.method, src, "fit", MetricValue{std::nullopt, c.error});
      continue;
    }
    row("cell", c.regressor, c.method, src, "mse", c.mse);
    row("cell", c.regressor, c.method, src, "mae", c.mae);
    row("cell", c.regressor, c.method, src, "mape", c.mape);
    row("cell", c.regressor, c.method, src, "smape", c.smape);
  }
  for (const auto& m : report.mde) {
    row("mde", m.regressor, m.method, "interval", "mde", m.nested);
    row("mde", m.regressor, m.method, "interval", "mde_single_root", m.single_root);
  }
  return os.str();
}

std::string report_summary(const ExperimentReport& report) {
  std::ostringstream os;
  const auto& chosen = report.selection.chosen_candidate();
  os << "dataset " << report.dataset << ", T=" << report.series_length << ", orders center=" << report.orders.center
     << " range=" << report.orders.range << ", test targets from index " << report.split_index << '\n';
  os << "FEN: depth " << chosen.depth << ", segment " << chosen.segment_length;
  if (chosen.report) {
    os << ", accuracy " << fmt(chosen.report->best_accuracy) << " at epoch " << chosen.report->best_epoch;
  }
  os << '\n';
  char line[160];
  std::snprintf(line, sizeof line, "%-24s %-6s %14s %14s %14s\n", "regressor", "method", "mse(center)",
                "mse(range)", "mde");
  os << line;
  auto show = [](const CellResult* c) {
    char b[32];
    if (c && c->mse.value) {
      std::snprintf(b, sizeof b, "%.6g", *c->mse.value);
      return std::string(b);
    }
    return std::string("error");
  };
  for (const auto& m : report.mde) {
    char mde_buf[32] = "error";
    if (m.nested.value) std::snprintf(mde_buf, sizeof mde_buf, "%.6g", *m.nested.value);
    std::snprintf(line, sizeof line, "%-24s %-6s %14s %14s %14s\n", m.regressor.c_str(), m.method.c_str(),
                  show(report.find_cell(m.regressor, m.method, Source::kCenter)).c_str(),
                  show(report.find_cell(m.regressor, m.method, Source::kRange)).c_str(), mde_buf);
    os << line;
  }
  return os.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw Error(ErrorCode::kIoError, "failed writing " + path.string());
}

}  // namespace ivfe
