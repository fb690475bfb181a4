#pragma once

// JSON, JSON-Lines and CSV persistence for every pipeline artifact. Each
// JSON document carries a "schema" field of the form "seqids.<kind>/<n>".

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "seqids/eval.hpp"
#include "seqids/forest.hpp"
#include "seqids/hmm.hpp"
#include "seqids/lstm.hpp"
#include "seqids/preprocess.hpp"
#include "seqids/trace_sim.hpp"
#include "seqids/types.hpp"

namespace seqids {

using Json = nlohmann::json;

class IoError : public Error {
public:
  using Error::Error;
};

inline constexpr std::string_view kVersion = "0.1.0";
inline constexpr int kSchemaVersion = 1;

inline std::string schema_id(std::string_view kind) {
  return "seqids." + std::string(kind) + "/" + std::to_string(kSchemaVersion);
}

inline void check_schema(const Json& j, std::string_view kind) {
  const std::string want = schema_id(kind);
  if (!j.is_object() || !j.contains("schema"))
    throw DataError("document has no 'schema' field (expected " + want + ")");
  const auto got = j.at("schema").get<std::string>();
  if (got != want) throw DataError("schema mismatch: expected " + want + ", got " + got);
}

// -- files -------------------------------------------------------------------

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

inline Json read_json(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  try {
    return Json::parse(text);
  } catch (const Json::exception& e) {
    throw DataError("malformed JSON in " + path.string() + ": " + e.what());
  }
}

inline void write_json(const std::filesystem::path& path, const Json& j) {
  write_text(path, j.dump(2) + "\n");
}

template <typename T>
T json_get(const Json& j, const char* key) {
  if (!j.contains(key)) throw DataError(std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception&) {
    throw DataError(std::string("field '") + key + "' has the wrong type");
  }
}

/// Decimal string with 17 significant digits; parses back to the same double.
inline std::string exact_decimal(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double parse_decimal(const Json& j) {
  if (j.is_number()) return j.get<double>();
  if (!j.is_string()) throw DataError("expected a decimal string");
  const auto s = j.get<std::string>();
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw DataError("invalid decimal '" + s + "'");
  }
  if (used != s.size()) throw DataError("invalid decimal '" + s + "'");
  return v;
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
  return buf;
}

// -- configs -----------------------------------------------------------------

namespace detail {

inline void reject_unknown(const Json& j, std::initializer_list<std::string_view> known,
                           std::string_view what) {
  if (!j.is_object()) throw ConfigError(std::string(what) + " must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (key == "schema") continue;
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw ConfigError("unknown " + std::string(what) + " key '" + key + "'");
  }
}

template <std::size_t R>
void read_table(const Json& j, std::array<PerAction, R>& table, const char* key) {
  if (!j.contains(key)) return;
  const auto& rows = j.at(key);
  if (!rows.is_array() || rows.size() != R)
    throw ConfigError(std::string(key) + " needs " + std::to_string(R) + " rows");
  for (std::size_t r = 0; r < R; ++r) {
    if (!rows[r].is_array() || rows[r].size() != kNumActions)
      throw ConfigError(std::string(key) + " rows need " + std::to_string(kNumActions) + " values");
    for (std::size_t a = 0; a < kNumActions; ++a) table[r][a] = rows[r][a].get<double>();
  }
}

}  // namespace detail

inline Json to_json(const SimConfig& c) {
  return Json{{"schema", schema_id("sim_config")},
              {"seed", c.seed},
              {"p_geom", c.p_geom},
              {"episodes_per_type", c.episodes_per_type},
              {"noise", c.noise},
              {"duplicate_scale", c.duplicate_scale},
              {"background_rate", c.emission.background_rate},
              {"alert_rates", c.emission.alert_rates},
              {"server_means", c.emission.server_means},
              {"server_stddevs", c.emission.server_stddevs}};
}

/// Every key is optional; missing keys keep their defaults.
inline SimConfig sim_config_from_json(const Json& j) {
  if (j.contains("schema")) check_schema(j, "sim_config");
  detail::reject_unknown(j,
                         {"seed", "p_geom", "episodes_per_type", "noise", "duplicate_scale",
                          "background_rate", "alert_rates", "server_means", "server_stddevs"},
                         "simulator config");
  SimConfig c;
  try {
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("p_geom")) c.p_geom = j.at("p_geom").get<double>();
    if (j.contains("episodes_per_type")) c.episodes_per_type = j.at("episodes_per_type").get<std::size_t>();
    if (j.contains("noise")) c.noise = j.at("noise").get<double>();
    if (j.contains("duplicate_scale")) c.duplicate_scale = j.at("duplicate_scale").get<double>();
    if (j.contains("background_rate")) c.emission.background_rate = j.at("background_rate").get<double>();
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("simulator config: ") + e.what());
  }
  detail::read_table(j, c.emission.alert_rates, "alert_rates");
  detail::read_table(j, c.emission.server_means, "server_means");
  detail::read_table(j, c.emission.server_stddevs, "server_stddevs");
  c.validate();
  return c;
}

inline Json to_json(const ExperimentConfig& c) {
  return Json{{"schema", schema_id("experiment_config")},
              {"seeds", c.seeds},
              {"train_fraction", c.train_fraction},
              {"num_symbols", c.num_symbols},
              {"smoothing", c.smoothing},
              {"mapping_pairs", c.mapping_pairs},
              {"baum_welch_restarts", c.baum_welch_restarts},
              {"baum_welch_tolerance", c.baum_welch.tolerance},
              {"baum_welch_max_iterations", c.baum_welch.max_iterations},
              {"forest_trees", c.action_forest.num_trees},
              {"ranking_trees", c.ranking_forest.num_trees},
              {"lstm_hidden", c.lstm.hidden_size},
              {"lstm_epochs", c.lstm.epochs},
              {"lstm_batch", c.lstm.batch_size},
              {"lstm_learning_rate", c.lstm.learning_rate}};
}

inline ExperimentConfig experiment_config_from_json(const Json& j) {
  if (j.contains("schema")) check_schema(j, "experiment_config");
  detail::reject_unknown(j,
                         {"seeds", "train_fraction", "num_symbols", "smoothing", "mapping_pairs",
                          "baum_welch_restarts", "baum_welch_tolerance",
                          "baum_welch_max_iterations", "forest_trees", "ranking_trees",
                          "lstm_hidden", "lstm_epochs", "lstm_batch", "lstm_learning_rate"},
                         "experiment config");
  ExperimentConfig c;
  try {
    if (j.contains("seeds")) c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    if (j.contains("train_fraction")) c.train_fraction = j.at("train_fraction").get<double>();
    if (j.contains("num_symbols")) c.num_symbols = j.at("num_symbols").get<std::size_t>();
    if (j.contains("smoothing")) c.smoothing = j.at("smoothing").get<double>();
    if (j.contains("mapping_pairs")) c.mapping_pairs = j.at("mapping_pairs").get<std::size_t>();
    if (j.contains("baum_welch_restarts"))
      c.baum_welch_restarts = j.at("baum_welch_restarts").get<std::size_t>();
    if (j.contains("baum_welch_tolerance"))
      c.baum_welch.tolerance = j.at("baum_welch_tolerance").get<double>();
    if (j.contains("baum_welch_max_iterations"))
      c.baum_welch.max_iterations = j.at("baum_welch_max_iterations").get<std::size_t>();
    if (j.contains("forest_trees")) c.action_forest.num_trees = j.at("forest_trees").get<std::size_t>();
    if (j.contains("ranking_trees")) c.ranking_forest.num_trees = j.at("ranking_trees").get<std::size_t>();
    if (j.contains("lstm_hidden")) c.lstm.hidden_size = j.at("lstm_hidden").get<std::size_t>();
    if (j.contains("lstm_epochs")) c.lstm.epochs = j.at("lstm_epochs").get<std::size_t>();
    if (j.contains("lstm_batch")) c.lstm.batch_size = j.at("lstm_batch").get<std::size_t>();
    if (j.contains("lstm_learning_rate")) c.lstm.learning_rate = j.at("lstm_learning_rate").get<double>();
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("experiment config: ") + e.what());
  }
  return c;
}

/// Hash of the canonical (sorted-key, compact) JSON form of a config.
inline std::string config_hash(const Json& config) { return hex64(fnv1a(config.dump())); }

// -- datasets ----------------------------------------------------------------

/// Sidecar holding the attribute manifest of a JSON-Lines dataset.
inline std::filesystem::path sidecar_path(const std::filesystem::path& dataset) {
  return std::filesystem::path(dataset.string() + ".attributes.json");
}

inline Json window_to_json(const SampleWindow& w) {
  Json j{{"episode_id", w.episode_id}, {"attack_type", to_string(w.attack_type)}};
  if (w.labeled()) {
    j["t_start_local"] = w.t_start_local;
    Json acts = Json::array();
    for (AttackAction a : w.actions) acts.push_back(to_string(a));
    j["actions"] = std::move(acts);
  }
  j["observations"] = w.observations;
  return j;
}

inline SampleWindow window_from_json(const Json& j, std::size_t num_attributes) {
  SampleWindow w;
  w.episode_id = json_get<std::uint64_t>(j, "episode_id");
  w.attack_type = parse_attack_type(json_get<std::string>(j, "attack_type"));
  w.observations = json_get<std::vector<Observation>>(j, "observations");
  if (w.observations.size() != kWindowLength)
    throw DataError("window has " + std::to_string(w.observations.size()) + " steps, expected " +
                    std::to_string(kWindowLength));
  for (const auto& o : w.observations)
    if (o.size() != num_attributes)
      throw DataError("observation has " + std::to_string(o.size()) + " attributes, manifest lists " +
                      std::to_string(num_attributes));
  if (j.contains("actions")) {
    for (const auto& name : j.at("actions")) w.actions.push_back(parse_action(name.get<std::string>()));
    if (w.actions.size() != kWindowLength)
      throw DataError("window has " + std::to_string(w.actions.size()) + " actions, expected " +
                      std::to_string(kWindowLength));
    const auto first = first_attack_step(w.actions);
    w.t_start_local = json_get<std::size_t>(j, "t_start_local");
    if (!first || *first != w.t_start_local)
      throw DataError("t_start_local does not match the first attack action");
  }
  return w;
}

inline Json attribute_manifest_json(const std::vector<std::string>& names, std::string_view kind) {
  Json attrs = Json::array();
  const auto& specs = attribute_manifest();
  for (const auto& n : names) {
    Json a{{"name", n}};
    for (const auto& s : specs)
      if (s.name == n) a["class"] = to_string(s.generator);
    attrs.push_back(std::move(a));
  }
  return Json{{"schema", schema_id(kind)}, {"attributes", std::move(attrs)}};
}

inline std::vector<std::string> read_attribute_names(const std::filesystem::path& sidecar,
                                                     std::string_view kind) {
  if (!std::filesystem::exists(sidecar))
    throw IoError("attribute manifest " + sidecar.string() + " not found");
  const Json j = read_json(sidecar);
  check_schema(j, kind);
  std::vector<std::string> names;
  for (const auto& a : json_get<Json>(j, "attributes")) names.push_back(json_get<std::string>(a, "name"));
  return names;
}

inline void write_dataset(const std::filesystem::path& path, const Dataset& ds) {
  std::string text;
  for (const auto& w : ds.windows) text += window_to_json(w).dump() + "\n";
  write_text(path, text);
  write_json(sidecar_path(path), attribute_manifest_json(ds.attribute_names, "dataset"));
}

namespace detail {

inline void for_each_line(const std::filesystem::path& path,
                          const std::function<void(const Json&)>& f) {
  std::istringstream in(read_text(path));
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      f(Json::parse(line));
    } catch (const Json::exception& e) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    } catch (const DataError& e) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

}  // namespace detail

/// Reads a JSON-Lines dataset and its attribute sidecar. Windows without an
/// "actions" field load as unlabeled.
inline Dataset read_dataset(const std::filesystem::path& path) {
  Dataset ds;
  ds.attribute_names = read_attribute_names(sidecar_path(path), "dataset");
  detail::for_each_line(path, [&](const Json& j) {
    ds.windows.push_back(window_from_json(j, ds.attribute_names.size()));
  });
  if (ds.windows.empty()) throw DataError(path.string() + " contains no windows");
  return ds;
}

/// Name of the first field a labeled consumer would miss, or empty.
inline std::string missing_label_field(const Dataset& ds) {
  for (const auto& w : ds.windows)
    if (!w.labeled()) return "actions";
  return {};
}

// -- symbolized datasets -------------------------------------------------------

struct SymbolizedWindow {
  std::uint64_t episode_id = 0;
  AttackType attack_type = AttackType::Type1;
  std::size_t t_start_local = 0;
  ActionSequence actions;
  SymbolSequence symbols;

  bool operator==(const SymbolizedWindow&) const = default;
};

struct SymbolizedDataset {
  std::vector<std::string> attributes;  // symbolizer input attributes
  std::size_t num_symbols = 0;
  std::vector<SymbolizedWindow> windows;

  bool operator==(const SymbolizedDataset&) const = default;
};

inline SymbolizedDataset symbolize_dataset(const Symbolizer& sym, const Dataset& ds) {
  SymbolizedDataset out;
  out.attributes = sym.attributes;
  out.num_symbols = sym.num_symbols();
  const auto cols = column_indices(ds, sym.attributes);
  for (const auto& w : ds.windows)
    out.windows.push_back({w.episode_id, w.attack_type, w.t_start_local, w.actions,
                           symbolize_window(sym, w, cols)});
  return out;
}

inline void write_symbolized(const std::filesystem::path& path, const SymbolizedDataset& ds) {
  std::string text;
  for (const auto& w : ds.windows) {
    Json j{{"episode_id", w.episode_id}, {"attack_type", to_string(w.attack_type)}};
    if (!w.actions.empty()) {
      j["t_start_local"] = w.t_start_local;
      Json acts = Json::array();
      for (AttackAction a : w.actions) acts.push_back(to_string(a));
      j["actions"] = std::move(acts);
    }
    j["observations"] = w.symbols;
    text += j.dump() + "\n";
  }
  write_text(path, text);
  Json side = attribute_manifest_json(ds.attributes, "symbolized");
  side["num_symbols"] = ds.num_symbols;
  write_json(sidecar_path(path), side);
}

inline SymbolizedDataset read_symbolized(const std::filesystem::path& path) {
  SymbolizedDataset ds;
  ds.attributes = read_attribute_names(sidecar_path(path), "symbolized");
  ds.num_symbols = json_get<std::size_t>(read_json(sidecar_path(path)), "num_symbols");
  detail::for_each_line(path, [&](const Json& j) {
    SymbolizedWindow w;
    w.episode_id = json_get<std::uint64_t>(j, "episode_id");
    w.attack_type = parse_attack_type(json_get<std::string>(j, "attack_type"));
    w.symbols = json_get<SymbolSequence>(j, "observations");
    for (std::size_t s : w.symbols)
      if (s >= ds.num_symbols) throw DataError("symbol " + std::to_string(s) + " out of range");
    if (j.contains("actions")) {
      for (const auto& name : j.at("actions")) w.actions.push_back(parse_action(name.get<std::string>()));
      w.t_start_local = json_get<std::size_t>(j, "t_start_local");
    }
    ds.windows.push_back(std::move(w));
  });
  return ds;
}

// -- preprocessing artifacts ---------------------------------------------------

inline Json to_json(const AttributeReport& r) {
  Json corr = Json::array();
  for (const auto& d : r.dropped_correlated)
    corr.push_back({{"dropped", d.dropped}, {"kept_partner", d.kept_partner}, {"correlation", d.correlation}});
  Json rank = Json::array();
  for (const auto& s : r.ranking) rank.push_back({{"attribute", s.attribute}, {"score", s.score}});
  return Json{{"schema", schema_id("attribute_report")},
              {"kept", r.kept},
              {"dropped_constant", r.dropped_constant},
              {"dropped_correlated", std::move(corr)},
              {"ranking", std::move(rank)}};
}

inline AttributeReport attribute_report_from_json(const Json& j) {
  check_schema(j, "attribute_report");
  AttributeReport r;
  r.kept = json_get<std::vector<std::string>>(j, "kept");
  r.dropped_constant = json_get<std::vector<std::string>>(j, "dropped_constant");
  for (const auto& d : json_get<Json>(j, "dropped_correlated"))
    r.dropped_correlated.push_back({json_get<std::string>(d, "dropped"),
                                    json_get<std::string>(d, "kept_partner"),
                                    json_get<double>(d, "correlation")});
  for (const auto& s : json_get<Json>(j, "ranking"))
    r.ranking.push_back({json_get<std::string>(s, "attribute"), json_get<double>(s, "score")});
  return r;
}

inline Json to_json(const Symbolizer& s) {
  Json comps = Json::array();
  for (const auto& c : s.components)
    comps.push_back({{"weight", c.weight}, {"mean", c.mean}, {"variance", c.variance}});
  return Json{{"schema", schema_id("symbolizer")},
              {"attributes", s.attributes},
              {"center", s.center},
              {"scale", s.scale},
              {"components", std::move(comps)},
              {"symbol_order", s.symbol_order},
              {"num_samples", s.num_samples},
              {"log_likelihood_trace", s.log_likelihood_trace}};
}

inline Symbolizer symbolizer_from_json(const Json& j) {
  check_schema(j, "symbolizer");
  Symbolizer s;
  s.attributes = json_get<std::vector<std::string>>(j, "attributes");
  s.center = json_get<std::vector<double>>(j, "center");
  s.scale = json_get<std::vector<double>>(j, "scale");
  for (const auto& c : json_get<Json>(j, "components"))
    s.components.push_back({json_get<double>(c, "weight"), json_get<std::vector<double>>(c, "mean"),
                            json_get<std::vector<double>>(c, "variance")});
  s.symbol_order = json_get<std::vector<std::size_t>>(j, "symbol_order");
  s.num_samples = json_get<std::size_t>(j, "num_samples");
  s.log_likelihood_trace = json_get<std::vector<double>>(j, "log_likelihood_trace");
  const std::size_t d = s.attributes.size();
  if (d == 0 || s.center.size() != d || s.scale.size() != d)
    throw DataError("symbolizer attribute vectors disagree in length");
  if (s.symbol_order.size() != s.components.size()) throw DataError("symbolizer order size mismatch");
  for (const auto& c : s.components)
    if (c.mean.size() != d || c.variance.size() != d)
      throw DataError("symbolizer component dimension mismatch");
  for (std::size_t i : s.symbol_order)
    if (i >= s.components.size()) throw DataError("symbolizer order out of range");
  return s;
}

// -- HMM ---------------------------------------------------------------------

inline Json to_json(const HmmModel& h) {
  h.validate();
  const auto n = h.transition.rows(), m = h.emission.cols();
  Json a = Json::array(), b = Json::array(), pi = Json::array();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < n; ++k) a.push_back(exact_decimal(h.transition(i, k)));
    for (Eigen::Index k = 0; k < m; ++k) b.push_back(exact_decimal(h.emission(i, k)));
    pi.push_back(exact_decimal(h.initial(i)));
  }
  return Json{{"schema", schema_id("hmm")}, {"N", n}, {"M", m}, {"state_labels", h.state_labels},
              {"A", std::move(a)}, {"B", std::move(b)}, {"pi", std::move(pi)}};
}

inline HmmModel hmm_from_json(const Json& j) {
  check_schema(j, "hmm");
  const auto n = json_get<Eigen::Index>(j, "N");
  const auto m = json_get<Eigen::Index>(j, "M");
  if (n < 1 || m < 1) throw DataError("HMM needs N >= 1 and M >= 1");
  const auto& a = json_get<Json>(j, "A");
  const auto& b = json_get<Json>(j, "B");
  const auto& pi = json_get<Json>(j, "pi");
  if (a.size() != std::size_t(n * n) || b.size() != std::size_t(n * m) || pi.size() != std::size_t(n))
    throw DataError("HMM parameter arrays do not match N and M");
  HmmModel h;
  h.transition.resize(n, n);
  h.emission.resize(n, m);
  h.initial.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < n; ++k) h.transition(i, k) = parse_decimal(a[std::size_t(i * n + k)]);
    for (Eigen::Index k = 0; k < m; ++k) h.emission(i, k) = parse_decimal(b[std::size_t(i * m + k)]);
    h.initial(i) = parse_decimal(pi[std::size_t(i)]);
  }
  h.state_labels = json_get<std::vector<std::string>>(j, "state_labels");
  h.validate();
  return h;
}

// -- LSTM --------------------------------------------------------------------

namespace detail {

inline Json tensor_json(std::string_view name, const Eigen::MatrixXd& t) {
  Json data = Json::array();
  for (Eigen::Index i = 0; i < t.rows(); ++i)
    for (Eigen::Index k = 0; k < t.cols(); ++k) data.push_back(t(i, k));
  return Json{{"name", name}, {"shape", {t.rows(), t.cols()}}, {"data", std::move(data)}};
}

inline Eigen::MatrixXd tensor_from_json(const Json& tensors, std::string_view name,
                                        Eigen::Index rows, Eigen::Index cols) {
  for (const auto& t : tensors) {
    if (json_get<std::string>(t, "name") != name) continue;
    const auto shape = json_get<std::vector<Eigen::Index>>(t, "shape");
    if (shape.size() != 2 || shape[0] != rows || shape[1] != cols)
      throw DataError("LSTM tensor " + std::string(name) + " has the wrong shape");
    const auto data = json_get<std::vector<double>>(t, "data");
    if (data.size() != std::size_t(rows * cols))
      throw DataError("LSTM tensor " + std::string(name) + " has the wrong size");
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = data[std::size_t(i * cols + k)];
    return m;
  }
  throw DataError("LSTM tensor " + std::string(name) + " missing");
}

}  // namespace detail

inline Json to_json(const LstmModel& model) {
  const auto& c = model.config;
  Json tensors = Json::array();
  tensors.push_back(detail::tensor_json("W", model.params.w));
  tensors.push_back(detail::tensor_json("U", model.params.u));
  tensors.push_back(detail::tensor_json("b", model.params.b));
  tensors.push_back(detail::tensor_json("V", model.params.v));
  tensors.push_back(detail::tensor_json("c", model.params.c));
  return Json{{"schema", schema_id("lstm")},
              {"input_dim", c.input_dim},
              {"hidden_size", c.hidden_size},
              {"num_actions", c.num_actions},
              {"sequence_length", c.sequence_length},
              {"learning_rate", c.learning_rate},
              {"beta1", c.beta1},
              {"beta2", c.beta2},
              {"epsilon", c.epsilon},
              {"epochs", c.epochs},
              {"batch_size", c.batch_size},
              {"seed", c.seed},
              {"input_mean", model.input_mean},
              {"input_scale", model.input_scale},
              {"loss_history", model.loss_history},
              {"tensors", std::move(tensors)}};
}

inline LstmModel lstm_from_json(const Json& j) {
  check_schema(j, "lstm");
  LstmModel model;
  auto& c = model.config;
  c.input_dim = json_get<std::size_t>(j, "input_dim");
  c.hidden_size = json_get<std::size_t>(j, "hidden_size");
  c.num_actions = json_get<std::size_t>(j, "num_actions");
  c.sequence_length = json_get<std::size_t>(j, "sequence_length");
  c.learning_rate = json_get<double>(j, "learning_rate");
  c.beta1 = json_get<double>(j, "beta1");
  c.beta2 = json_get<double>(j, "beta2");
  c.epsilon = json_get<double>(j, "epsilon");
  c.epochs = json_get<std::size_t>(j, "epochs");
  c.batch_size = json_get<std::size_t>(j, "batch_size");
  c.seed = json_get<std::uint64_t>(j, "seed");
  c.validate();
  model.input_mean = json_get<std::vector<double>>(j, "input_mean");
  model.input_scale = json_get<std::vector<double>>(j, "input_scale");
  model.loss_history = json_get<std::vector<double>>(j, "loss_history");
  if (model.input_mean.size() != c.input_dim || model.input_scale.size() != c.input_dim)
    throw DataError("LSTM standardization vectors do not match input_dim");
  const auto d = Eigen::Index(c.input_dim), h = Eigen::Index(c.hidden_size),
             n = Eigen::Index(c.num_actions);
  const auto& t = json_get<Json>(j, "tensors");
  model.params.w = detail::tensor_from_json(t, "W", 4 * h, d);
  model.params.u = detail::tensor_from_json(t, "U", 4 * h, h);
  model.params.b = detail::tensor_from_json(t, "b", 4 * h, 1);
  model.params.v = detail::tensor_from_json(t, "V", n, h);
  model.params.c = detail::tensor_from_json(t, "c", n, 1);
  return model;
}

// -- forest ------------------------------------------------------------------

namespace detail {

inline Json tree_node_json(const DecisionTree& tree, std::size_t i) {
  const auto& n = tree.nodes.at(i);
  Json j{{"counts", n.class_counts}};
  if (!n.is_leaf()) {
    j["feature"] = n.feature;
    j["threshold"] = n.threshold;
    j["left"] = tree_node_json(tree, std::size_t(n.left));
    j["right"] = tree_node_json(tree, std::size_t(n.right));
  }
  return j;
}

// Rebuilds nodes in the same preorder the grower used: parent, then both
// children allocated together, left subtree grown before right.
inline void tree_node_from_json(const Json& j, DecisionTree& tree, std::size_t i,
                                std::size_t num_features, std::size_t num_classes) {
  auto counts = json_get<std::vector<std::uint32_t>>(j, "counts");
  if (counts.size() != num_classes) throw DataError("tree node class counts have the wrong size");
  tree.nodes[i].class_counts = std::move(counts);
  if (!j.contains("feature")) return;
  const int f = json_get<int>(j, "feature");
  if (f < 0 || std::size_t(f) >= num_features) throw DataError("tree node feature out of range");
  const auto li = tree.nodes.size();
  tree.nodes.emplace_back();
  tree.nodes.emplace_back();
  tree.nodes[i].feature = f;
  tree.nodes[i].threshold = json_get<double>(j, "threshold");
  tree.nodes[i].left = int(li);
  tree.nodes[i].right = int(li + 1);
  tree_node_from_json(json_get<Json>(j, "left"), tree, li, num_features, num_classes);
  tree_node_from_json(json_get<Json>(j, "right"), tree, li + 1, num_features, num_classes);
}

}  // namespace detail

inline Json to_json(const ForestModel& f) {
  Json trees = Json::array();
  for (const auto& t : f.trees) trees.push_back(detail::tree_node_json(t, 0));
  return Json{{"schema", schema_id("forest")},
              {"num_features", f.num_features},
              {"num_classes", f.num_classes},
              {"attributes", f.attributes},
              {"impurity_decrease", f.impurity_decrease},
              {"trees", std::move(trees)}};
}

inline ForestModel forest_from_json(const Json& j) {
  check_schema(j, "forest");
  ForestModel f;
  f.num_features = json_get<std::size_t>(j, "num_features");
  f.num_classes = json_get<std::size_t>(j, "num_classes");
  f.attributes = json_get<std::vector<std::string>>(j, "attributes");
  f.impurity_decrease = json_get<std::vector<double>>(j, "impurity_decrease");
  if (f.impurity_decrease.size() != f.num_features) throw DataError("forest importance size mismatch");
  for (const auto& root : json_get<Json>(j, "trees")) {
    DecisionTree t;
    t.nodes.emplace_back();
    detail::tree_node_from_json(root, t, 0, f.num_features, f.num_classes);
    f.trees.push_back(std::move(t));
  }
  if (f.trees.empty()) throw DataError("forest has no trees");
  return f;
}

inline std::string attribute_set_id(std::size_t top_k) { return "top-" + std::to_string(top_k); }

inline std::size_t parse_attribute_set(std::string_view id) {
  if (id.substr(0, 4) != "top-") throw DataError("bad attribute-set id '" + std::string(id) + "'");
  const std::string digits(id.substr(4));
  if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos)
    throw DataError("bad attribute-set id '" + std::string(id) + "'");
  return std::stoul(digits);
}

// -- trained models ------------------------------------------------------------

inline Json to_json(const TrainedModel& tm) {
  Json j{{"schema", schema_id("model")},
         {"method", to_string(tm.method)},
         {"attribute_set", attribute_set_id(tm.top_k)},
         {"attributes", tm.attributes}};
  if (tm.hmm) {
    Json models = Json::object();
    for (const auto& [type, h] : tm.hmm->models) models[std::string(to_string(type))] = to_json(h);
    j["symbolizer"] = to_json(tm.hmm->symbolizer);
    j["hmms"] = std::move(models);
  }
  if (tm.lstm) j["lstm"] = to_json(*tm.lstm);
  if (tm.forest) j["forest"] = to_json(*tm.forest);
  return j;
}

inline TrainedModel trained_model_from_json(const Json& j) {
  check_schema(j, "model");
  TrainedModel tm;
  tm.method = parse_method(json_get<std::string>(j, "method"));
  tm.top_k = parse_attribute_set(json_get<std::string>(j, "attribute_set"));
  tm.attributes = json_get<std::vector<std::string>>(j, "attributes");
  switch (tm.method) {
    case Method::HmmSupervised:
    case Method::HmmUnsupervised: {
      HmmSet set;
      set.symbolizer = symbolizer_from_json(json_get<Json>(j, "symbolizer"));
      const auto hmms = json_get<Json>(j, "hmms");
      for (AttackType t : kAllTypes)
        set.models[t] = hmm_from_json(json_get<Json>(hmms, std::string(to_string(t)).c_str()));
      tm.hmm = std::move(set);
      break;
    }
    case Method::Lstm: tm.lstm = lstm_from_json(json_get<Json>(j, "lstm")); break;
    case Method::Rfc: tm.forest = forest_from_json(json_get<Json>(j, "forest")); break;
  }
  return tm;
}

// -- reports -----------------------------------------------------------------

inline Json to_json(const MetricSet& m) {
  return Json{{"acc_start", m.acc_start}, {"acc_type", m.acc_type}, {"acc_action", m.acc_action},
              {"acc_sequence", m.acc_sequence}, {"count", m.count}};
}

inline MetricSet metric_set_from_json(const Json& j) {
  return {json_get<double>(j, "acc_start"), json_get<double>(j, "acc_type"),
          json_get<double>(j, "acc_action"), json_get<double>(j, "acc_sequence"),
          json_get<std::size_t>(j, "count")};
}

inline Json to_json(const StudyReport& study) {
  Json offline = Json::array();
  for (const auto& r : study.offline) {
    if (r.seeds.empty()) throw ConfigError("report has an empty seed list");
    Json attacks = Json::object();
    for (AttackType a : kAllTypes) {
      Json per_seed = Json::array();
      for (const auto& m : r.per_seed[index_of(a)]) per_seed.push_back(to_json(m));
      const auto s = r.summary(a);
      attacks[std::string(to_string(a))] = {
          {"per_seed", std::move(per_seed)}, {"mean", to_json(s.mean)}, {"stddev", to_json(s.stddev)}};
    }
    offline.push_back({{"method", to_string(r.method)},
                       {"attribute_set", attribute_set_id(r.top_k)},
                       {"seeds", r.seeds},
                       {"attacks", std::move(attacks)}});
  }
  Json online = Json::array();
  for (const auto& c : study.online)
    online.push_back({{"method", to_string(c.method)},
                      {"attribute_set", attribute_set_id(c.top_k)},
                      {"attack", to_string(c.attack)},
                      {"per_seed", c.per_seed},
                      {"mean", c.mean()},
                      {"stddev", c.stddev()}});
  return Json{{"schema", schema_id("report")}, {"offline", std::move(offline)}, {"online", std::move(online)}};
}

inline StudyReport study_report_from_json(const Json& j) {
  check_schema(j, "report");
  StudyReport study;
  for (const auto& r : json_get<Json>(j, "offline")) {
    ExperimentReport e;
    e.method = parse_method(json_get<std::string>(r, "method"));
    e.top_k = parse_attribute_set(json_get<std::string>(r, "attribute_set"));
    e.seeds = json_get<std::vector<std::uint64_t>>(r, "seeds");
    if (e.seeds.empty()) throw DataError("report has an empty seed list");
    const auto& attacks = json_get<Json>(r, "attacks");
    for (AttackType a : kAllTypes)
      for (const auto& m : json_get<Json>(json_get<Json>(attacks, std::string(to_string(a)).c_str()), "per_seed"))
        e.per_seed[index_of(a)].push_back(metric_set_from_json(m));
    study.offline.push_back(std::move(e));
  }
  for (const auto& c : json_get<Json>(j, "online")) {
    OnlineCurve curve;
    curve.method = parse_method(json_get<std::string>(c, "method"));
    curve.top_k = parse_attribute_set(json_get<std::string>(c, "attribute_set"));
    curve.attack = parse_attack_type(json_get<std::string>(c, "attack"));
    curve.per_seed = json_get<std::vector<std::vector<double>>>(c, "per_seed");
    for (const auto& s : curve.per_seed)
      if (s.size() != kWindowLength) throw DataError("online curve needs one value per prefix length");
    study.online.push_back(std::move(curve));
  }
  return study;
}

namespace detail {

inline std::string csv_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace detail

/// One row per (method, attribute set): mean and std-dev of the four metrics
/// on the given attack type.
inline std::string report_csv(const StudyReport& study, AttackType attack) {
  if (study.offline.empty()) throw ConfigError("report has no rows");
  std::string out =
      "method,attribute_set,acc_start_mean,acc_start_std,acc_type_mean,acc_type_std,"
      "acc_action_mean,acc_action_std,acc_sequence_mean,acc_sequence_std\n";
  for (const auto& r : study.offline) {
    if (r.seeds.empty()) throw ConfigError("report has an empty seed list");
    const auto s = r.summary(attack);
    out += std::string(to_string(r.method)) + "," + attribute_set_id(r.top_k);
    for (auto f : {&MetricSet::acc_start, &MetricSet::acc_type, &MetricSet::acc_action,
                   &MetricSet::acc_sequence})
      out += "," + detail::csv_number(s.mean.*f) + "," + detail::csv_number(s.stddev.*f);
    out += "\n";
  }
  return out;
}

inline std::string online_curve_csv(std::span<const OnlineCurve> curves) {
  if (curves.empty()) throw ConfigError("no online curves to write");
  std::string out = "method,attribute_set,attack,length,mean,std\n";
  for (const auto& c : curves) {
    if (c.per_seed.empty()) throw ConfigError("online curve has an empty seed list");
    const auto m = c.mean(), sd = c.stddev();
    for (std::size_t t = 0; t < kWindowLength; ++t)
      out += std::string(to_string(c.method)) + "," + attribute_set_id(c.top_k) + "," +
             std::string(to_string(c.attack)) + "," + std::to_string(t + 1) + "," +
             detail::csv_number(m[t]) + "," + detail::csv_number(sd[t]) + "\n";
  }
  return out;
}

/// Writes report.csv (Attack 1), report_attack2.csv, report.json and, when
/// curves are present, online_curve.csv into `dir`.
inline std::vector<std::filesystem::path> emit_report(const StudyReport& study,
                                                      const std::filesystem::path& dir) {
  const Json j = to_json(study);  // validates seed lists before anything is written
  std::vector<std::filesystem::path> written;
  if (!study.offline.empty()) {
    const std::string csv1 = report_csv(study, AttackType::Type1);
    const std::string csv2 = report_csv(study, AttackType::Type2);
    write_text(dir / "report.csv", csv1);
    write_text(dir / "report_attack2.csv", csv2);
    written.push_back(dir / "report.csv");
    written.push_back(dir / "report_attack2.csv");
  }
  if (!study.online.empty()) {
    write_text(dir / "online_curve.csv", online_curve_csv(study.online));
    written.push_back(dir / "online_curve.csv");
  }
  write_json(dir / "report.json", j);
  written.push_back(dir / "report.json");
  return written;
}

// -- pipeline manifest -----------------------------------------------------------

inline Json component_versions() {
  Json v{{"seqids", kVersion}};
  for (const char* kind : {"dataset", "symbolized", "attribute_report", "symbolizer", "hmm",
                           "model", "lstm", "forest", "report"})
    v[kind] = schema_id(kind);
  return v;
}

/// Adds or replaces the entry for `artifact` in `<dir>/manifest.json`.
inline void record_artifact(const std::filesystem::path& artifact, std::string_view command,
                            const Json& config, const std::vector<std::uint64_t>& seeds) {
  const auto dir = artifact.has_parent_path() ? artifact.parent_path() : std::filesystem::path(".");
  const auto path = dir / "manifest.json";
  Json manifest{{"schema", schema_id("manifest")}, {"artifacts", Json::object()}};
  if (std::filesystem::exists(path)) {
    manifest = read_json(path);
    check_schema(manifest, "manifest");
  }
  manifest["artifacts"][artifact.filename().string()] = {{"command", command},
                                                         {"config", config},
                                                         {"config_hash", config_hash(config)},
                                                         {"seeds", seeds},
                                                         {"versions", component_versions()}};
  write_json(path, manifest);
}

}  // namespace seqids
