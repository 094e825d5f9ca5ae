#include "ivfe/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ivfe/error.hpp"

namespace ivfe {

using json = nlohmann::ordered_json;

namespace {

[[noreturn]] void config_error(const std::string& msg) { throw Error(ErrorCode::kConfigError, msg); }

void allow_keys(const json& obj, const std::string& where, std::initializer_list<const char*> keys) {
  if (!obj.is_object()) config_error(where + " must be an object");
  std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [k, v] : obj.items()) {
    if (!allowed.count(k)) config_error("unknown key '" + k + "' in " + where);
  }
}

template <typename T>
T get_as(const json& obj, const char* key, const std::string& where, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    config_error("bad value for '" + std::string(key) + "' in " + where + ": " + obj.at(key).dump());
  }
}

std::size_t get_count(const json& obj, const char* key, const std::string& where, std::size_t fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    config_error("'" + std::string(key) + "' in " + where + " must be a nonnegative integer");
  }
  return v.get<std::size_t>();
}

std::vector<std::size_t> get_counts(const json& obj, const char* key, std::vector<std::size_t> fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_array()) config_error("'" + std::string(key) + "' must be an array");
  std::vector<std::size_t> out;
  for (const auto& e : v) {
    if (!e.is_number_integer() || e.get<long long>() < 0) {
      config_error("'" + std::string(key) + "' must hold nonnegative integers");
    }
    out.push_back(e.get<std::size_t>());
  }
  return out;
}

std::optional<std::size_t> get_order(const json& obj, const char* key) {
  if (!obj.contains(key)) return std::nullopt;
  const auto& v = obj.at(key);
  if (v.is_string() && v.get<std::string>() == "auto") return std::nullopt;
  if (v.is_number_integer() && v.get<long long>() >= 1) return v.get<std::size_t>();
  config_error("orders." + std::string(key) + " must be \"auto\" or a positive integer");
}

RegressorSpec parse_regressor(const json& r) {
  allow_keys(r, "regressor", {"kind", "lambda", "k", "hidden", "epochs", "learning_rate", "momentum"});
  RegressorSpec s;
  const auto kind = get_as<std::string>(r, "kind", "regressor", "");
  auto parsed = parse_regressor_kind(kind);
  if (!parsed) config_error("unknown regressor kind '" + kind + "'");
  s.kind = *parsed;
  s.lambda = get_as<double>(r, "lambda", "regressor", s.lambda);
  s.k = get_count(r, "k", "regressor", s.k);
  s.hidden = get_count(r, "hidden", "regressor", s.hidden);
  s.epochs = get_count(r, "epochs", "regressor", s.epochs);
  s.learning_rate = get_as<double>(r, "learning_rate", "regressor", s.learning_rate);
  s.momentum = get_as<double>(r, "momentum", "regressor", s.momentum);
  return s;
}

json regressor_json(const RegressorSpec& s) {
  json r;
  r["kind"] = regressor_kind_name(s.kind);
  switch (s.kind) {
    case RegressorKind::kRidge: r["lambda"] = s.lambda; break;
    case RegressorKind::kKnn: r["k"] = s.k; break;
    case RegressorKind::kMlp:
      r["hidden"] = s.hidden;
      r["epochs"] = s.epochs;
      r["learning_rate"] = s.learning_rate;
      r["momentum"] = s.momentum;
      break;
  }
  return r;
}

}  // namespace

std::string DataSource::name() const {
  if (dgp) return std::string(dgp_name(dgp->kind));
  if (csv_path) return csv_path->stem().string();
  return "none";
}

std::vector<RegressorSpec> default_regressors() {
  RegressorSpec ridge;
  ridge.kind = RegressorKind::kRidge;
  ridge.lambda = 1.0;
  RegressorSpec knn;
  knn.kind = RegressorKind::kKnn;
  knn.k = 10;
  RegressorSpec mlp;
  mlp.kind = RegressorKind::kMlp;
  return {ridge, knn, mlp};
}

std::vector<RegressorSpec> ExperimentConfig::effective_regressors() const {
  return regressors.empty() ? default_regressors() : regressors;
}

void ExperimentConfig::validate() const {
  if (data.dgp.has_value() == data.csv_path.has_value()) config_error("data needs exactly one of dgp or csv");
  try {
    if (data.dgp) data.dgp->validate();
    train.validate();
    for (const auto& r : effective_regressors()) r.validate();
  } catch (const Error& e) {
    config_error(e.what());
  }
  if (!(split > 0.0 && split < 1.0)) config_error("split must lie in (0,1)");
  if (orders.max_lag < 1) config_error("orders.max_lag must be >= 1");
  if (pinned_fen) {
    if (pinned_fen->depth < 1 || pinned_fen->depth > 5) config_error("pinned_fen.depth must be in 1..5");
    if (pinned_fen->segment_length < 2) config_error("pinned_fen.segment_length must be >= 2");
    if (pinned_fen->epochs < 1) config_error("pinned_fen.epochs must be >= 1");
  } else {
    if (segment_lengths.empty()) config_error("segment_lengths must be nonempty");
    if (depths.empty()) config_error("depths must be nonempty");
  }
  for (auto d : segment_lengths) {
    if (d < 2) config_error("segment lengths must be >= 2");
  }
  for (auto d : depths) {
    if (d < 1 || d > 5) config_error("depths must lie in 1..5");
  }
  if (widths.empty() || widths.back() < 8) config_error("widths must be nonempty with last width >= 8");
  for (auto w : widths) {
    if (w == 0) config_error("widths must be positive");
  }
  if (methods.empty()) config_error("imaging.methods must be nonempty");
  if (imaging.mtf_bins < 2) config_error("imaging.mtf_bins must be >= 2");
  if (!(selection_tolerance >= 0.0 && selection_tolerance < 1.0)) config_error("selection_tolerance must lie in [0,1)");
}

ExperimentConfig config_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    config_error(std::string("config is not valid JSON: ") + e.what());
  }
  allow_keys(doc, "config", {"data", "orders", "segment_lengths", "depths", "widths", "pinned_fen", "train",
                             "imaging", "regressors", "split", "leak_free", "feature_window",
                             "selection_tolerance", "seed"});
  ExperimentConfig cfg;

  if (doc.contains("data")) {
    const auto& d = doc.at("data");
    allow_keys(d, "data", {"dgp", "csv"});
    if (d.contains("dgp")) {
      const auto& g = d.at("dgp");
      allow_keys(g, "data.dgp", {"kind", "length", "seed", "noise_std", "burn_in", "natural_log"});
      DgpSpec spec;
      const auto kind = get_as<std::string>(g, "kind", "data.dgp", "c1");
      auto parsed = parse_dgp_kind(kind);
      if (!parsed) config_error("unknown dgp '" + kind + "'");
      spec.kind = *parsed;
      spec.length = get_count(g, "length", "data.dgp", spec.length);
      spec.seed = get_as<std::uint64_t>(g, "seed", "data.dgp", spec.seed);
      spec.noise_std = get_as<double>(g, "noise_std", "data.dgp", spec.noise_std);
      spec.burn_in = get_count(g, "burn_in", "data.dgp", spec.burn_in);
      spec.natural_log = get_as<bool>(g, "natural_log", "data.dgp", spec.natural_log);
      cfg.data.dgp = spec;
    }
    if (d.contains("csv")) {
      const auto& c = d.at("csv");
      allow_keys(c, "data.csv", {"path", "schema"});
      if (!c.contains("path")) config_error("data.csv.path is required");
      cfg.data.csv_path = get_as<std::string>(c, "path", "data.csv", "");
      const auto schema = get_as<std::string>(c, "schema", "data.csv", "bounds");
      auto parsed = parse_csv_schema(schema);
      if (!parsed) config_error("unknown csv schema '" + schema + "'");
      cfg.data.csv_schema = *parsed;
    }
  }
  if (!cfg.data.dgp && !cfg.data.csv_path) cfg.data.dgp = DgpSpec{};

  if (doc.contains("orders")) {
    const auto& o = doc.at("orders");
    allow_keys(o, "orders", {"center", "range", "max_lag"});
    cfg.orders.center = get_order(o, "center");
    cfg.orders.range = get_order(o, "range");
    cfg.orders.max_lag = get_count(o, "max_lag", "orders", cfg.orders.max_lag);
  }
  cfg.segment_lengths = get_counts(doc, "segment_lengths", cfg.segment_lengths);
  cfg.depths = get_counts(doc, "depths", cfg.depths);
  cfg.widths = get_counts(doc, "widths", cfg.widths);

  if (doc.contains("pinned_fen") && !doc.at("pinned_fen").is_null()) {
    const auto& p = doc.at("pinned_fen");
    allow_keys(p, "pinned_fen", {"depth", "segment_length", "epochs"});
    FenPin pin;
    pin.depth = get_count(p, "depth", "pinned_fen", pin.depth);
    pin.segment_length = get_count(p, "segment_length", "pinned_fen", pin.segment_length);
    pin.epochs = get_count(p, "epochs", "pinned_fen", pin.epochs);
    cfg.pinned_fen = pin;
  }

  if (doc.contains("train")) {
    const auto& t = doc.at("train");
    allow_keys(t, "train", {"epochs", "batch_size", "learning_rate", "optimizer", "momentum", "split",
                            "bn_momentum", "head_init"});
    auto& tc = cfg.train;
    tc.epochs = get_count(t, "epochs", "train", tc.epochs);
    tc.batch_size = get_count(t, "batch_size", "train", tc.batch_size);
    tc.learning_rate = get_as<double>(t, "learning_rate", "train", tc.learning_rate);
    const auto opt = get_as<std::string>(t, "optimizer", "train", std::string(optimizer_name(tc.optimizer)));
    auto parsed = parse_optimizer(opt);
    if (!parsed) config_error("unknown optimizer '" + opt + "'");
    tc.optimizer = *parsed;
    tc.momentum = get_as<double>(t, "momentum", "train", tc.momentum);
    tc.split = get_as<double>(t, "split", "train", tc.split);
    tc.bn_momentum = get_as<double>(t, "bn_momentum", "train", tc.bn_momentum);
    const auto head = get_as<std::string>(t, "head_init", "train", "zero");
    if (head == "zero") {
      tc.head_init = HeadInit::kZero;
    } else if (head == "random") {
      tc.head_init = HeadInit::kRandom;
    } else {
      config_error("train.head_init must be \"zero\" or \"random\"");
    }
  }

  if (doc.contains("imaging")) {
    const auto& im = doc.at("imaging");
    allow_keys(im, "imaging", {"methods", "mtf_bins", "rp_threshold"});
    if (im.contains("methods")) {
      cfg.methods.clear();
      if (!im.at("methods").is_array()) config_error("imaging.methods must be an array");
      for (const auto& m : im.at("methods")) {
        auto parsed = m.is_string() ? parse_method(m.get<std::string>()) : std::nullopt;
        if (!parsed) config_error("unknown imaging method " + m.dump());
        cfg.methods.push_back(*parsed);
      }
    }
    cfg.imaging.mtf_bins = get_count(im, "mtf_bins", "imaging", cfg.imaging.mtf_bins);
    if (im.contains("rp_threshold") && !im.at("rp_threshold").is_null()) {
      cfg.imaging.rp_threshold = get_as<double>(im, "rp_threshold", "imaging", 0.0);
    }
  }

  if (doc.contains("regressors")) {
    if (!doc.at("regressors").is_array()) config_error("regressors must be an array");
    for (const auto& r : doc.at("regressors")) cfg.regressors.push_back(parse_regressor(r));
  }
  cfg.split = get_as<double>(doc, "split", "config", cfg.split);
  cfg.leak_free = get_as<bool>(doc, "leak_free", "config", cfg.leak_free);
  const auto fw = get_as<std::string>(doc, "feature_window", "config", "order");
  if (fw == "order") {
    cfg.feature_window = FeatureWindow::kOrder;
  } else if (fw == "segment") {
    cfg.feature_window = FeatureWindow::kSegment;
  } else {
    config_error("feature_window must be \"order\" or \"segment\"");
  }
  cfg.selection_tolerance = get_as<double>(doc, "selection_tolerance", "config", cfg.selection_tolerance);
  cfg.seed = get_as<std::uint64_t>(doc, "seed", "config", cfg.seed);

  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  auto cfg = config_from_json(ss.str());
  if (cfg.data.csv_path && cfg.data.csv_path->is_relative()) {
    cfg.data.csv_path = path.parent_path() / *cfg.data.csv_path;
  }
  return cfg;
}

std::string config_to_json(const ExperimentConfig& cfg) {
  json doc;
  json data;
  if (cfg.data.dgp) {
    const auto& g = *cfg.data.dgp;
    data["dgp"] = {{"kind", dgp_name(g.kind)},      {"length", g.length},   {"seed", g.seed},
                   {"noise_std", g.noise_std},       {"burn_in", g.burn_in}, {"natural_log", g.natural_log}};
  } else if (cfg.data.csv_path) {
    data["csv"] = {{"path", cfg.data.csv_path->generic_string()},
                   {"schema", cfg.data.csv_schema == CsvSchema::kBounds ? "bounds" : "ohlc"}};
  }
  doc["data"] = data;
  auto order_json = [](const std::optional<std::size_t>& o) { return o ? json(*o) : json("auto"); };
  doc["orders"] = {{"center", order_json(cfg.orders.center)},
                   {"range", order_json(cfg.orders.range)},
                   {"max_lag", cfg.orders.max_lag}};
  doc["segment_lengths"] = cfg.segment_lengths;
  doc["depths"] = cfg.depths;
  doc["widths"] = cfg.widths;
  doc["pinned_fen"] = cfg.pinned_fen ? json{{"depth", cfg.pinned_fen->depth},
                                            {"segment_length", cfg.pinned_fen->segment_length},
                                            {"epochs", cfg.pinned_fen->epochs}}
                                     : json(nullptr);
  const auto& t = cfg.train;
  doc["train"] = {{"epochs", t.epochs},
                  {"batch_size", t.batch_size},
                  {"learning_rate", t.learning_rate},
                  {"optimizer", optimizer_name(t.optimizer)},
                  {"momentum", t.momentum},
                  {"split", t.split},
                  {"bn_momentum", t.bn_momentum},
                  {"head_init", t.head_init == HeadInit::kZero ? "zero" : "random"}};
  json methods = json::array();
  for (auto m : cfg.methods) methods.push_back(method_name(m));
  doc["imaging"] = {{"methods", methods},
                    {"mtf_bins", cfg.imaging.mtf_bins},
                    {"rp_threshold", cfg.imaging.rp_threshold ? json(*cfg.imaging.rp_threshold) : json(nullptr)}};
  json regs = json::array();
  for (const auto& r : cfg.effective_regressors()) regs.push_back(regressor_json(r));
  doc["regressors"] = regs;
  doc["split"] = cfg.split;
  doc["leak_free"] = cfg.leak_free;
  doc["feature_window"] = cfg.feature_window == FeatureWindow::kOrder ? "order" : "segment";
  doc["selection_tolerance"] = cfg.selection_tolerance;
  doc["seed"] = cfg.seed;
  return doc.dump(2);
}

std::uint64_t fnv1a(std::string_view text) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string config_hash(const ExperimentConfig& cfg) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(config_to_json(cfg))));
  return buf;
}

std::uint64_t mix_seed(std::uint64_t master, std::initializer_list<std::uint64_t> parts) noexcept {
  auto splitmix = [](std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  };
  std::uint64_t h = splitmix(master);
  for (auto p : parts) h = splitmix(h ^ splitmix(p));
  return h;
}

}  // namespace ivfe
