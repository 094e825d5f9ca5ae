#include "ivfe/model_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ivfe/error.hpp"

namespace ivfe {

using json = nlohmann::ordered_json;

std::string model_to_json(const FenModel& model,
                          const std::vector<std::pair<std::string, std::string>>& meta) {
  json doc;
  doc["version"] = kModelFormatVersion;
  const auto& a = model.architecture;
  doc["architecture"] = {{"blocks", a.blocks},           {"widths", a.widths},
                         {"feature_dim", a.feature_dim}, {"classes", a.classes},
                         {"min_side", a.min_side}};
  doc["trained_epochs"] = model.trained_epochs;
  doc["rng_seed"] = model.rng_seed;
  json order = json::array();
  json weights = json::object();
  for (const TensorSet* set : {&model.params, &model.buffers}) {
    for (const auto& item : *set) {
      order.push_back(item.name);
      weights[item.name] = {{"shape", item.tensor.shape}, {"data", item.tensor.data}};
    }
  }
  doc["weight_order"] = std::move(order);
  doc["weights"] = std::move(weights);
  json m = json::object();
  for (const auto& [k, v] : meta) m[k] = v;
  doc["meta"] = std::move(m);
  return doc.dump();
}

FenModel model_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kCorruptModel, std::string("unparseable model document: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("version")) {
    throw Error(ErrorCode::kCorruptModel, "missing version field");
  }
  if (!doc["version"].is_number_integer() || doc["version"].get<int>() != kModelFormatVersion) {
    throw Error(ErrorCode::kVersionMismatch, "model version " + doc["version"].dump() +
                                                 " unsupported (expected " +
                                                 std::to_string(kModelFormatVersion) + ")");
  }
  try {
    FenArchitecture arch;
    const auto& a = doc.at("architecture");
    arch.blocks = a.at("blocks").get<std::size_t>();
    arch.widths = a.at("widths").get<std::vector<std::size_t>>();
    arch.feature_dim = a.at("feature_dim").get<std::size_t>();
    arch.classes = a.at("classes").get<std::size_t>();
    arch.min_side = a.at("min_side").get<std::size_t>();

    // Build the reference layout, then fill it from the document.
    FenModel model = init_model(arch, 0, HeadInit::kZero);
    model.trained_epochs = doc.at("trained_epochs").get<std::size_t>();
    model.rng_seed = doc.at("rng_seed").get<std::uint64_t>();

    const auto order = doc.at("weight_order").get<std::vector<std::string>>();
    const auto& weights = doc.at("weights");
    if (order.size() != model.params.size() + model.buffers.size() || weights.size() != order.size()) {
      throw Error(ErrorCode::kCorruptModel, "weight count does not match the architecture");
    }
    std::size_t pos = 0;
    for (TensorSet* set : {&model.params, &model.buffers}) {
      for (std::size_t i = 0; i < set->size(); ++i, ++pos) {
        if (order[pos] != set->name(i)) {
          throw Error(ErrorCode::kCorruptModel, "unexpected weight '" + order[pos] + "' at position " +
                                                    std::to_string(pos));
        }
        const auto& w = weights.at(order[pos]);
        Tensor t;
        t.shape = w.at("shape").get<std::vector<std::size_t>>();
        t.data = w.at("data").get<std::vector<double>>();
        if (t.shape != (*set)[i].shape || !t.consistent()) {
          throw Error(ErrorCode::kCorruptModel, "shape mismatch for '" + order[pos] + "'");
        }
        (*set)[i] = std::move(t);
      }
    }
    return model;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kCorruptModel, e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kInvalidArgument) throw Error(ErrorCode::kCorruptModel, e.what());
    throw;
  }
}

void save_model(const FenModel& model, const std::filesystem::path& path,
                const std::vector<std::pair<std::string, std::string>>& meta) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out << model_to_json(model, meta) << '\n';
  if (!out) throw Error(ErrorCode::kIoError, "write failed for " + path.string());
}

FenModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return model_from_json(ss.str());
}

}  // namespace ivfe
