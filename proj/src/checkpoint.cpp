#include "satnn/checkpoint.hpp"

#include <fstream>

#include <json.hpp>

namespace satnn {

namespace {

using nlohmann::json;

json config_json(const ModelConfig& cfg) {
  json j;
  j["graph_kind"] = cfg.graph_kind == GraphKind::VCG ? "vcg" : "lcg";
  j["cell"] = cfg.cell == CellKind::RNN ? "rnn" : "lstm";
  j["d_model"] = cfg.d_model;
  j["mlp_hidden"] = cfg.resolved_hidden();
  j["t_train"] = cfg.t_train;
  j["value_embedding"] = cfg.value_embedding;
  j["lcg_message_mlp"] = cfg.lcg_message_mlp;
  return j;
}

ModelConfig config_from(const json& j) {
  ModelConfig cfg;
  cfg.graph_kind = j.at("graph_kind").get<std::string>() == "vcg" ? GraphKind::VCG
                                                                  : GraphKind::LCG;
  cfg.cell = j.at("cell").get<std::string>() == "rnn" ? CellKind::RNN : CellKind::LSTM;
  cfg.d_model = j.at("d_model").get<int>();
  cfg.mlp_hidden = j.at("mlp_hidden").get<std::vector<int>>();
  cfg.t_train = j.at("t_train").get<int>();
  cfg.value_embedding = j.at("value_embedding").get<bool>();
  cfg.lcg_message_mlp = j.at("lcg_message_mlp").get<bool>();
  return cfg;
}

json mat_to_json(const MatX<float>& m) {
  json a = json::array();
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) a.push_back(m(i, j));
  return a;
}

MatX<float> mat_from_json(const json& a, int rows, int cols) {
  MatX<float> m(rows, cols);
  size_t k = 0;
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = a.at(k++).get<float>();
  return m;
}

}  // namespace

std::string config_to_json(const ModelConfig& cfg) { return config_json(cfg).dump(); }

ModelConfig config_from_json(const std::string& text) {
  return config_from(json::parse(text));
}

std::string config_hash(const ModelConfig& cfg) {
  std::string canonical = config_json(cfg).dump();
  uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : canonical) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void save_checkpoint(const std::string& path, const GnnModel<float>& model) {
  json j;
  j["format"] = "satnn.checkpoint";
  j["version"] = 1;
  j["model"] = config_json(model.cfg);
  j["config_hash"] = config_hash(model.cfg);
  j["step"] = model.params.step_count;
  json params = json::array();
  for (const std::string& name : model.params.names()) {
    const ParamEntry<float>& e = model.params.at(name);
    json p;
    p["name"] = name;
    p["rows"] = e.value.rows();
    p["cols"] = e.value.cols();
    p["value"] = mat_to_json(e.value);
    p["m"] = mat_to_json(e.m);
    p["v"] = mat_to_json(e.v);
    p["ema"] = mat_to_json(e.ema);
    params.push_back(std::move(p));
  }
  j["params"] = std::move(params);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  out << j.dump();
}

GnnModel<float> load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  json j = json::parse(in);
  if (j.at("format").get<std::string>() != "satnn.checkpoint")
    throw std::runtime_error("not a satnn checkpoint: " + path);
  ModelConfig cfg = config_from(j.at("model"));
  std::string expected = j.at("config_hash").get<std::string>();
  if (config_hash(cfg) != expected)
    throw std::runtime_error("checkpoint config hash mismatch in " + path);
  GnnModel<float> model(cfg, 0);
  model.params.step_count = j.at("step").get<long>();
  for (const json& p : j.at("params")) {
    const std::string name = p.at("name").get<std::string>();
    if (!model.params.has(name))
      throw std::runtime_error("checkpoint parameter not in model: " + name);
    ParamEntry<float>& e = model.params.at(name);
    int rows = p.at("rows").get<int>(), cols = p.at("cols").get<int>();
    if (rows != e.value.rows() || cols != e.value.cols())
      throw std::runtime_error("checkpoint shape mismatch for " + name);
    e.value = mat_from_json(p.at("value"), rows, cols);
    e.m = mat_from_json(p.at("m"), rows, cols);
    e.v = mat_from_json(p.at("v"), rows, cols);
    e.ema = mat_from_json(p.at("ema"), rows, cols);
  }
  return model;
}

}  // namespace satnn
