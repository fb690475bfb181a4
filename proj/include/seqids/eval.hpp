#pragma once

// Accuracy metrics and the offline / online experiment protocol.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "seqids/forest.hpp"
#include "seqids/hmm.hpp"
#include "seqids/lstm.hpp"
#include "seqids/preprocess.hpp"
#include "seqids/rng.hpp"
#include "seqids/trace_sim.hpp"
#include "seqids/types.hpp"

namespace seqids {

enum class Method : std::uint8_t { HmmUnsupervised, HmmSupervised, Lstm, Rfc };

inline constexpr std::array<Method, 4> kAllMethods{Method::HmmUnsupervised, Method::HmmSupervised,
                                                   Method::Lstm, Method::Rfc};

inline std::string_view to_string(Method m) {
  switch (m) {
    case Method::HmmUnsupervised: return "hmm-unsup";
    case Method::HmmSupervised: return "hmm-sup";
    case Method::Lstm: return "lstm";
    case Method::Rfc: return "rfc";
  }
  return "unknown";
}

inline Method parse_method(std::string_view id) {
  for (Method m : kAllMethods)
    if (to_string(m) == id) return m;
  throw ConfigError("unknown method id '" + std::string(id) +
                    "' (expected hmm-sup, hmm-unsup, lstm or rfc)");
}

// -- metrics -----------------------------------------------------------------

struct MetricSet {
  double acc_start = 0.0;
  double acc_type = 0.0;
  double acc_action = 0.0;
  double acc_sequence = 0.0;
  std::size_t count = 0;  // number of test sequences

  bool operator==(const MetricSet&) const = default;
};

/// 1-based index of the first predicted attack step; nullopt means "no attack".
inline std::optional<std::size_t> predict_start_time(const ActionSequence& predicted) {
  return first_attack_step(predicted);
}

/// Fraction of positions, counted from the predicted start, at which the
/// prediction agrees with the canonical action list of `type`.
inline double sequence_similarity(const ActionSequence& predicted, AttackType type) {
  const auto start = predict_start_time(predicted);
  if (!start) return 0.0;
  const auto& canon = attack_steps(type);
  std::size_t hits = 0, total = 0;
  for (std::size_t t = *start - 1, k = 0; t < predicted.size() && k < canon.size(); ++t, ++k) {
    hits += predicted[t] == canon[k];
    ++total;
  }
  return total == 0 ? 0.0 : double(hits) / double(total);
}

/// Attack type whose canonical list is most similar to the predicted
/// post-start actions; ties go to Type1.
inline AttackType classify_by_similarity(const ActionSequence& predicted) {
  return sequence_similarity(predicted, AttackType::Type2) >
                 sequence_similarity(predicted, AttackType::Type1)
             ? AttackType::Type2
             : AttackType::Type1;
}

inline MetricSet compute_metrics(std::span<const ActionSequence> truth,
                                 std::span<const AttackType> truth_types,
                                 std::span<const ActionSequence> predicted,
                                 std::span<const AttackType> predicted_types) {
  const std::size_t l = truth.size();
  if (truth_types.size() != l || predicted.size() != l || predicted_types.size() != l)
    throw DataError("compute_metrics: inputs have different lengths");
  MetricSet m;
  m.count = l;
  if (l == 0) return m;
  std::size_t start_hits = 0, type_hits = 0, action_hits = 0, steps = 0, seq_hits = 0;
  for (std::size_t i = 0; i < l; ++i) {
    if (truth[i].size() != predicted[i].size())
      throw DataError("compute_metrics: predicted sequence length differs from ground truth");
    const auto ts = first_attack_step(truth[i]);
    const auto ps = predict_start_time(predicted[i]);
    start_hits += ts.has_value() && ps.has_value() && *ts == *ps;
    type_hits += truth_types[i] == predicted_types[i];
    bool all = true;
    for (std::size_t t = 0; t < truth[i].size(); ++t) {
      const bool ok = truth[i][t] == predicted[i][t];
      action_hits += ok;
      all = all && ok;
    }
    steps += truth[i].size();
    seq_hits += all;
  }
  m.acc_start = double(start_hits) / double(l);
  m.acc_type = double(type_hits) / double(l);
  m.acc_action = steps == 0 ? 0.0 : double(action_hits) / double(steps);
  m.acc_sequence = double(seq_hits) / double(l);
  return m;
}

// -- protocol ----------------------------------------------------------------

struct ExperimentConfig {
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  double train_fraction = 0.7;
  std::size_t num_symbols = 6;
  double smoothing = 0.01;
  std::size_t mapping_pairs = 100;
  BaumWelchOptions baum_welch{};
  std::size_t baum_welch_restarts = 8;
  ForestConfig ranking_forest{};
  ForestConfig action_forest{};
  LstmConfig lstm{};  // input_dim is set from the attribute set
};

struct Split {
  std::vector<std::size_t> train;  // indices into the dataset
  std::vector<std::size_t> test;
};

/// Per attack type, a uniformly random train_fraction of the windows goes to
/// training (rounded to nearest) and the rest to testing.
inline Split stratified_split(const Dataset& ds, double train_fraction, Rng& rng) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw ConfigError("train fraction must lie in (0, 1)");
  Split split;
  for (AttackType type : kAllTypes) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < ds.windows.size(); ++i)
      if (ds.windows[i].attack_type == type) idx.push_back(i);
    std::shuffle(idx.begin(), idx.end(), rng);
    const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * double(idx.size())));
    split.train.insert(split.train.end(), idx.begin(), idx.begin() + std::ptrdiff_t(n_train));
    split.test.insert(split.test.end(), idx.begin() + std::ptrdiff_t(n_train), idx.end());
  }
  return split;
}

inline Dataset subset(const Dataset& ds, std::span<const std::size_t> indices) {
  Dataset out;
  out.attribute_names = ds.attribute_names;
  out.windows.reserve(indices.size());
  for (std::size_t i : indices) out.windows.push_back(ds.windows[i]);
  return out;
}

/// Split and attribute reduction of one seed, fitted on the training fold only.
struct SeedPreparation {
  std::uint64_t seed = 0;
  Dataset train;
  Dataset test;
  AttributeReport report;
};

inline SeedPreparation prepare_seed(const Dataset& ds, std::uint64_t seed,
                                    const ExperimentConfig& config) {
  for (AttackType type : kAllTypes) {
    const auto n = std::count_if(ds.windows.begin(), ds.windows.end(),
                                 [type](const SampleWindow& w) { return w.attack_type == type; });
    if (n < 10)
      throw DataError("experiment needs at least 10 windows of " + std::string(to_string(type)));
  }
  for (const auto& w : ds.windows)
    if (!w.labeled()) throw DataError("experiment requires labeled windows (missing 'actions')");

  SeedPreparation prep;
  prep.seed = seed;
  Rng split_rng = make_stream(seed, StreamTag::Split);
  const Split split = stratified_split(ds, config.train_fraction, split_rng);
  prep.train = subset(ds, split.train);
  prep.test = subset(ds, split.test);
  ForestConfig ranking = config.ranking_forest;
  ranking.seed = seed;
  prep.report = reduce_attributes(prep.train, ranking);
  return prep;
}

inline Symbolizer fit_seed_symbolizer(const SeedPreparation& prep, std::size_t top_k,
                                      const ExperimentConfig& config) {
  Rng rng = make_stream(prep.seed, StreamTag::Symbolizer, top_k);
  const auto selected = prep.report.top(top_k);
  return fit_symbolizer(prep.train, selected, config.num_symbols, rng);
}

/// Predictions of one method on one test fold.
struct MethodOutput {
  std::vector<ActionSequence> actions;
  std::vector<AttackType> types;
  // online[i][t]: predicted current action after observing steps 1..t+1
  std::vector<ActionSequence> online;
};

// -- trained models ------------------------------------------------------------

/// Per-attack-type HMMs over one symbolizer. State labels name the action
/// each state stands for; an unsupervised model fitted without labeled pairs
/// keeps placeholder labels ("state0", ...) and cannot decode to actions.
struct HmmSet {
  Symbolizer symbolizer;
  std::map<AttackType, HmmModel> models;

  bool mapped() const {
    for (const auto& [_, m] : models)
      for (const auto& l : m.state_labels)
        if (std::none_of(kAllActions.begin(), kAllActions.end(),
                         [&](AttackAction a) { return to_string(a) == l; }))
          return false;
    return !models.empty();
  }

  /// Mapping from state index to action read off the state labels.
  LabelMapping mapping(AttackType type) const {
    const auto& m = models.at(type);
    LabelMapping out;
    for (std::size_t s = 0; s < m.state_labels.size(); ++s) {
      out.state_to_action.push_back(parse_action(m.state_labels[s]));
      if (out.state_to_action.back() == AttackAction::Continue) out.continue_state = s;
    }
    if (out.state_to_action.size() != m.num_states())
      throw DataError("HMM for " + std::string(to_string(type)) + " has no label mapping");
    return out;
  }
};

struct TrainedModel {
  Method method = Method::HmmSupervised;
  std::size_t top_k = 1;
  std::vector<std::string> attributes;  // selected attributes, ranking order
  std::optional<HmmSet> hmm;
  std::optional<LstmModel> lstm;
  std::optional<ForestModel> forest;
};

namespace detail {

inline std::vector<LabeledSequence> hmm_pairs(const Dataset& ds, const Symbolizer& sym,
                                              std::span<const std::size_t> cols,
                                              std::optional<AttackType> only) {
  std::vector<LabeledSequence> out;
  for (const auto& w : ds.windows) {
    if (only && w.attack_type != *only) continue;
    LabeledSequence p;
    p.symbols = symbolize_window(sym, w, cols);
    for (AttackAction a : w.actions) p.states.push_back(index_of(a));
    out.push_back(std::move(p));
  }
  return out;
}

inline ActionSequence identity_actions(std::span<const std::size_t> states) {
  ActionSequence out;
  for (std::size_t s : states) out.push_back(action_at(s));
  return out;
}

inline void require_labels(const Dataset& ds, Method method) {
  for (const auto& w : ds.windows)
    if (!w.labeled())
      throw DataError(std::string(to_string(method)) +
                      " needs labeled windows: dataset is missing the 'actions' field");
}

}  // namespace detail

/// Fits one HMM per attack type. The supervised path needs action labels.
/// The unsupervised path uses observations only; when the training windows
/// carry labels, the first `mapping_pairs` of them fix the state-to-action
/// mapping, otherwise the states stay unmapped.
inline HmmSet train_hmm_set(const Dataset& train, Symbolizer sym, bool supervised,
                            const ExperimentConfig& config, std::uint64_t seed,
                            std::size_t stream_key) {
  const Method method = supervised ? Method::HmmSupervised : Method::HmmUnsupervised;
  if (supervised) detail::require_labels(train, method);
  const bool labeled = std::all_of(train.windows.begin(), train.windows.end(),
                                   [](const SampleWindow& w) { return w.labeled(); });
  const auto cols = column_indices(train, sym.attributes);
  const std::size_t m = sym.num_symbols();

  HmmSet set;
  for (AttackType type : kAllTypes) {
    auto pairs = detail::hmm_pairs(train, sym, cols, type);
    if (pairs.empty())
      throw DataError("no training windows of " + std::string(to_string(type)));
    if (supervised) {
      HmmModel h = fit_supervised(pairs, kNumActions, m, config.smoothing);
      h.state_labels = action_state_labels();
      set.models[type] = std::move(h);
      continue;
    }
    std::vector<SymbolSequence> seqs;
    for (const auto& p : pairs) seqs.push_back(p.symbols);
    std::vector<LabeledActions> sample;
    for (std::size_t i = 0; labeled && i < pairs.size() && sample.size() < config.mapping_pairs; ++i)
      sample.push_back({detail::identity_actions(pairs[i].states), pairs[i].symbols});
    // Restarts are ranked on the labeled sample by mapped start-time plus
    // per-step accuracy, then by likelihood.
    std::optional<BaumWelchResult> best;
    LabelMappingFit mapping;
    double best_score = 0.0;
    for (std::size_t r = 0; r < std::max<std::size_t>(1, config.baum_welch_restarts); ++r) {
      Rng rng = make_stream(seed, StreamTag::BaumWelch, stream_key * 1000 + index_of(type) * 100 + r);
      auto fit = fit_baum_welch(seqs, kNumActions, m, rng, config.baum_welch);
      double score = 0.0;
      LabelMappingFit candidate;
      if (!sample.empty()) {
        candidate = fit_label_mapping(fit.model, sample);
        double starts = 0.0;
        for (const auto& l : sample) {
          const auto decoded = candidate.mapping.apply(viterbi(fit.model, l.symbols).path);
          starts += predict_start_time(decoded) == first_attack_step(l.actions);
        }
        score = candidate.accuracy + starts / static_cast<double>(sample.size());
      }
      const bool better = !best || score > best_score ||
                          (score == best_score && fit.log_likelihood_trace.back() >
                                                      best->log_likelihood_trace.back());
      if (better) {
        best = std::move(fit);
        mapping = std::move(candidate);
        best_score = score;
      }
    }
    best->model.state_labels.clear();
    for (std::size_t s = 0; s < kNumActions; ++s)
      best->model.state_labels.push_back(sample.empty() ? "state" + std::to_string(s)
                                                        : std::string(to_string(mapping.mapping(s))));
    set.models[type] = std::move(best->model);
  }
  set.symbolizer = std::move(sym);
  return set;
}

/// Decodes each window with the model of its classified type. Online
/// predictions classify the type on each prefix and filter with that model.
inline MethodOutput predict_hmm_set(const HmmSet& set, const Dataset& test, bool online) {
  if (!set.mapped()) throw DataError("HMM states carry no action labels; cannot decode actions");
  std::map<AttackType, LabelMapping> mappings;
  for (const auto& [type, _] : set.models) mappings[type] = set.mapping(type);
  const auto cols = column_indices(test, set.symbolizer.attributes);
  MethodOutput out;
  for (const auto& w : test.windows) {
    const SymbolSequence seq = symbolize_window(set.symbolizer, w, cols);
    const AttackType type = classify_attack_type(set.models, seq);
    out.types.push_back(type);
    out.actions.push_back(mappings.at(type).apply(viterbi(set.models.at(type), seq).path));
    if (online) {
      ActionSequence cur;
      for (std::size_t t = 1; t <= seq.size(); ++t) {
        std::span<const std::size_t> prefix(seq.data(), t);
        const AttackType pt = classify_attack_type(set.models, prefix);
        cur.push_back(mappings.at(pt)(filter_current_state(set.models.at(pt), prefix)));
      }
      out.online.push_back(std::move(cur));
    }
  }
  return out;
}

inline LstmModel train_lstm_model(const Dataset& train, std::span<const std::string> attributes,
                                  const ExperimentConfig& config, std::uint64_t seed,
                                  std::size_t stream_key) {
  detail::require_labels(train, Method::Lstm);
  const auto cols = column_indices(train, attributes);
  std::vector<LabeledSeries> data;
  for (const auto& w : train.windows) {
    LabeledSeries s;
    s.inputs = project(w, cols);
    for (AttackAction a : w.actions) s.labels.push_back(index_of(a));
    data.push_back(std::move(s));
  }
  LstmConfig lc = config.lstm;
  lc.input_dim = attributes.size();
  lc.sequence_length = kWindowLength;
  lc.num_actions = kNumActions;
  lc.seed = make_stream(seed, StreamTag::Lstm, stream_key)();
  return lstm_train(lc, data);
}

inline ForestModel train_action_forest(const Dataset& train, std::span<const std::string> attributes,
                                       const ExperimentConfig& config, std::uint64_t seed,
                                       std::size_t stream_key) {
  detail::require_labels(train, Method::Rfc);
  const auto cols = column_indices(train, attributes);
  std::vector<std::vector<double>> x;
  std::vector<std::size_t> y;
  for (const auto& w : train.windows) {
    auto rows = project(w, cols);
    for (std::size_t t = 0; t < rows.size(); ++t) {
      x.push_back(std::move(rows[t]));
      y.push_back(index_of(w.actions[t]));
    }
  }
  ForestConfig fc = config.action_forest;
  fc.seed = make_stream(seed, StreamTag::ActionForest, stream_key)();
  return forest_train(fc, x, y, kNumActions, {attributes.begin(), attributes.end()});
}

/// Trains `method` on the top-k attributes of `report`. HMM methods use the
/// given symbolizer or fit a new one on `train`.
inline TrainedModel train_model(const Dataset& train, Method method, std::size_t top_k,
                                const AttributeReport& report, const ExperimentConfig& config,
                                std::uint64_t seed, std::optional<Symbolizer> symbolizer = {}) {
  if (method == Method::HmmSupervised || method == Method::Lstm || method == Method::Rfc)
    detail::require_labels(train, method);
  TrainedModel tm;
  tm.method = method;
  tm.top_k = top_k;
  tm.attributes = symbolizer ? symbolizer->attributes : report.top(top_k);
  switch (method) {
    case Method::HmmSupervised:
    case Method::HmmUnsupervised: {
      if (!symbolizer) {
        Rng rng = make_stream(seed, StreamTag::Symbolizer, top_k);
        symbolizer = fit_symbolizer(train, tm.attributes, config.num_symbols, rng);
      }
      tm.hmm = train_hmm_set(train, std::move(*symbolizer), method == Method::HmmSupervised,
                             config, seed, top_k);
      break;
    }
    case Method::Lstm: tm.lstm = train_lstm_model(train, tm.attributes, config, seed, top_k); break;
    case Method::Rfc: tm.forest = train_action_forest(train, tm.attributes, config, seed, top_k); break;
  }
  return tm;
}

/// Offline predictions and, for HMM and RFC when requested, per-prefix
/// current-action predictions.
inline MethodOutput predict_model(const TrainedModel& tm, const Dataset& test, bool online) {
  if (tm.hmm) return predict_hmm_set(*tm.hmm, test, online);
  const auto cols = column_indices(test, tm.attributes);
  MethodOutput out;
  for (const auto& w : test.windows) {
    const auto x = project(w, cols);
    ActionSequence pred;
    if (tm.lstm) pred = lstm_predict_sequence(*tm.lstm, x);
    else if (tm.forest) pred = forest_predict_sequence(*tm.forest, x);
    else throw DataError("trained model holds no parameters");
    out.types.push_back(classify_by_similarity(pred));
    // A forest is stateless: its prediction at step t only sees observation t.
    if (online && tm.forest) out.online.push_back(pred);
    out.actions.push_back(std::move(pred));
  }
  return out;
}

inline MethodOutput run_method(const SeedPreparation& prep, Method method, std::size_t top_k,
                               bool online, const ExperimentConfig& config) {
  const TrainedModel tm = train_model(prep.train, method, top_k, prep.report, config, prep.seed);
  return predict_model(tm, prep.test, online);
}

/// Metrics of one method on the test windows of one attack type.
inline MetricSet score_attack(const Dataset& test, const MethodOutput& out, AttackType attack) {
  std::vector<ActionSequence> truth, pred;
  std::vector<AttackType> truth_types, pred_types;
  for (std::size_t i = 0; i < test.windows.size(); ++i) {
    if (test.windows[i].attack_type != attack) continue;
    truth.push_back(test.windows[i].actions);
    truth_types.push_back(attack);
    pred.push_back(out.actions[i]);
    pred_types.push_back(out.types[i]);
  }
  return compute_metrics(truth, truth_types, pred, pred_types);
}

/// Current-action accuracy per prefix length (1..T) on one attack type.
inline std::vector<double> score_online(const Dataset& test, const MethodOutput& out,
                                        AttackType attack) {
  std::vector<double> hits(kWindowLength, 0.0);
  double n = 0.0;
  for (std::size_t i = 0; i < test.windows.size(); ++i) {
    if (test.windows[i].attack_type != attack) continue;
    n += 1.0;
    for (std::size_t t = 0; t < kWindowLength; ++t)
      hits[t] += out.online[i][t] == test.windows[i].actions[t];
  }
  for (auto& h : hits) h = n > 0.0 ? h / n : 0.0;
  return hits;
}

// -- reports -----------------------------------------------------------------

struct MetricSummary {
  MetricSet mean;
  MetricSet stddev;
};

inline MetricSummary summarize(std::span<const MetricSet> runs) {
  MetricSummary s;
  if (runs.empty()) return s;
  const double n = double(runs.size());
  auto field = [&](auto member) {
    double mean = 0.0;
    for (const auto& r : runs) mean += r.*member;
    mean /= n;
    double ss = 0.0;
    for (const auto& r : runs) ss += (r.*member - mean) * (r.*member - mean);
    s.mean.*member = mean;
    s.stddev.*member = runs.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  };
  field(&MetricSet::acc_start);
  field(&MetricSet::acc_type);
  field(&MetricSet::acc_action);
  field(&MetricSet::acc_sequence);
  s.mean.count = runs.front().count;
  return s;
}

struct ExperimentReport {
  Method method = Method::HmmSupervised;
  std::size_t top_k = 1;
  std::vector<std::uint64_t> seeds;
  std::array<std::vector<MetricSet>, 2> per_seed;  // indexed by attack type

  MetricSummary summary(AttackType attack) const { return summarize(per_seed[index_of(attack)]); }
  bool operator==(const ExperimentReport&) const = default;
};

struct OnlineCurve {
  Method method = Method::HmmSupervised;
  std::size_t top_k = 1;
  AttackType attack = AttackType::Type1;
  std::vector<std::vector<double>> per_seed;  // per seed, accuracy at lengths 1..T

  std::vector<double> mean() const {
    std::vector<double> m(kWindowLength, 0.0);
    for (const auto& s : per_seed)
      for (std::size_t t = 0; t < kWindowLength; ++t) m[t] += s[t];
    for (auto& v : m) v = per_seed.empty() ? 0.0 : v / double(per_seed.size());
    return m;
  }

  std::vector<double> stddev() const {
    const auto m = mean();
    std::vector<double> sd(kWindowLength, 0.0);
    if (per_seed.size() < 2) return sd;
    for (const auto& s : per_seed)
      for (std::size_t t = 0; t < kWindowLength; ++t) sd[t] += (s[t] - m[t]) * (s[t] - m[t]);
    for (auto& v : sd) v = std::sqrt(v / double(per_seed.size() - 1));
    return sd;
  }

  bool operator==(const OnlineCurve&) const = default;
};

struct StudyReport {
  std::vector<ExperimentReport> offline;
  std::vector<OnlineCurve> online;

  const ExperimentReport& find(Method m, std::size_t top_k) const {
    for (const auto& r : offline)
      if (r.method == m && r.top_k == top_k) return r;
    throw DataError("no report for " + std::string(to_string(m)) + " top-" + std::to_string(top_k));
  }

  const OnlineCurve& find_curve(Method m, std::size_t top_k, AttackType attack) const {
    for (const auto& c : online)
      if (c.method == m && c.top_k == top_k && c.attack == attack) return c;
    throw DataError("no online curve for " + std::string(to_string(m)));
  }

  bool operator==(const StudyReport&) const = default;
};

/// Runs every (method, attribute set) combination over all seeds. Online
/// curves are produced for supervised HMM and RFC when requested.
inline StudyReport run_study(const Dataset& ds, std::span<const Method> methods,
                             std::span<const std::size_t> top_ks, const ExperimentConfig& config,
                             bool online = true) {
  if (config.seeds.empty()) throw ConfigError("experiment needs at least one seed");
  if (methods.empty()) throw ConfigError("experiment needs at least one method");
  StudyReport study;
  for (std::size_t k : top_ks)
    for (Method m : methods) {
      ExperimentReport r;
      r.method = m;
      r.top_k = k;
      r.seeds = config.seeds;
      study.offline.push_back(std::move(r));
      const bool wants_curve = online && (m == Method::HmmSupervised || m == Method::Rfc);
      if (wants_curve)
        for (AttackType a : kAllTypes) study.online.push_back({m, k, a, {}});
    }

  for (std::uint64_t seed : config.seeds) {
    const SeedPreparation prep = prepare_seed(ds, seed, config);
    for (auto& report : study.offline) {
      const bool wants_curve =
          online && (report.method == Method::HmmSupervised || report.method == Method::Rfc);
      const MethodOutput out = run_method(prep, report.method, report.top_k, wants_curve, config);
      for (AttackType a : kAllTypes)
        report.per_seed[index_of(a)].push_back(score_attack(prep.test, out, a));
      if (wants_curve)
        for (auto& c : study.online)
          if (c.method == report.method && c.top_k == report.top_k)
            c.per_seed.push_back(score_online(prep.test, out, c.attack));
    }
  }
  return study;
}

inline ExperimentReport run_offline_experiment(const Dataset& ds, Method method,
                                               std::size_t top_k,
                                               const ExperimentConfig& config) {
  const std::array<Method, 1> methods{method};
  const std::array<std::size_t, 1> ks{top_k};
  return run_study(ds, methods, ks, config, false).offline.front();
}

/// Online curves for supervised HMM and RFC.
inline std::vector<OnlineCurve> run_online_experiment(const Dataset& ds,
                                                      const ExperimentConfig& config,
                                                      std::size_t top_k = 1) {
  const std::array<Method, 2> methods{Method::HmmSupervised, Method::Rfc};
  const std::array<std::size_t, 1> ks{top_k};
  return run_study(ds, methods, ks, config, true).online;
}

}  // namespace seqids
