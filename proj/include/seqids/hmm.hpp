#pragma once

// Categorical hidden Markov model: counting and Baum-Welch estimation,
// scaled forward scoring, Viterbi decoding, online filtering and the
// learned-state to attack-action mapping.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "seqids/rng.hpp"
#include "seqids/types.hpp"

namespace seqids {

using SymbolSequence = std::vector<std::size_t>;
using StateSequence = std::vector<std::size_t>;

inline constexpr double kStochasticTolerance = 1e-9;

struct HmmModel {
  Eigen::MatrixXd transition;  // N x N, rows sum to 1
  Eigen::MatrixXd emission;    // N x M, rows sum to 1
  Eigen::VectorXd initial;     // N
  std::vector<std::string> state_labels;

  std::size_t num_states() const { return static_cast<std::size_t>(transition.rows()); }
  std::size_t num_symbols() const { return static_cast<std::size_t>(emission.cols()); }

  void validate() const {
    const auto n = transition.rows();
    if (n < 1 || transition.cols() != n || emission.rows() != n || initial.size() != n)
      throw DataError("HMM parameter shapes are inconsistent");
    if (emission.cols() < 1) throw DataError("HMM needs at least one symbol");
    if (!state_labels.empty() && static_cast<Eigen::Index>(state_labels.size()) != n)
      throw DataError("HMM state label count does not match N");
    auto check = [](const auto& v, const char* what) {
      if ((v.array() < 0.0).any() || (v.array() > 1.0).any() || !v.allFinite())
        throw DataError(std::string("HMM ") + what + " has entries outside [0, 1]");
      if (std::abs(v.sum() - 1.0) > kStochasticTolerance)
        throw DataError(std::string("HMM ") + what + " does not sum to 1");
    };
    for (Eigen::Index i = 0; i < n; ++i) {
      check(transition.row(i), "transition row");
      check(emission.row(i), "emission row");
    }
    check(initial, "initial distribution");
  }

  void check_sequence(std::span<const std::size_t> seq) const {
    for (std::size_t o : seq)
      if (o >= num_symbols())
        throw DataError("symbol " + std::to_string(o) + " out of range for M=" +
                        std::to_string(num_symbols()));
  }
};

/// Uniform model; mainly a convenient starting point for tests.
inline HmmModel uniform_hmm(std::size_t n, std::size_t m) {
  HmmModel h;
  h.transition = Eigen::MatrixXd::Constant(n, n, 1.0 / double(n));
  h.emission = Eigen::MatrixXd::Constant(n, m, 1.0 / double(m));
  h.initial = Eigen::VectorXd::Constant(n, 1.0 / double(n));
  return h;
}

inline std::vector<std::string> action_state_labels() {
  std::vector<std::string> labels;
  for (AttackAction a : kAllActions) labels.emplace_back(to_string(a));
  return labels;
}

struct LabeledSequence {
  StateSequence states;
  SymbolSequence symbols;
};

// -- supervised estimation ---------------------------------------------------

namespace detail {

// Normalizes each row of counts + eps; an all-zero row becomes uniform.
inline void normalize_rows(Eigen::MatrixXd& m, double eps) {
  m.array() += eps;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const double s = m.row(i).sum();
    if (s > 0.0)
      m.row(i) /= s;
    else
      m.row(i).setConstant(1.0 / double(m.cols()));
  }
}

}  // namespace detail

/// Counting estimator with additive smoothing eps. With eps = 0 this is the
/// plain relative-frequency estimate; rows without any count become uniform.
inline HmmModel fit_supervised(std::span<const LabeledSequence> pairs, std::size_t num_states,
                               std::size_t num_symbols, double smoothing = 0.01) {
  if (pairs.empty()) throw DataError("fit_supervised: empty training set");
  if (smoothing < 0.0) throw ConfigError("fit_supervised: smoothing must be >= 0");
  const auto n = static_cast<Eigen::Index>(num_states);
  const auto m = static_cast<Eigen::Index>(num_symbols);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n, m);
  Eigen::MatrixXd pi = Eigen::MatrixXd::Zero(1, n);
  for (const auto& p : pairs) {
    if (p.states.size() != p.symbols.size())
      throw DataError("fit_supervised: state and symbol sequences differ in length");
    if (p.states.empty()) continue;
    for (std::size_t t = 0; t < p.states.size(); ++t) {
      if (p.states[t] >= num_states) throw DataError("fit_supervised: state out of range");
      if (p.symbols[t] >= num_symbols) throw DataError("fit_supervised: symbol out of range");
      b(Eigen::Index(p.states[t]), Eigen::Index(p.symbols[t])) += 1.0;
      if (t + 1 < p.states.size()) {
        if (p.states[t + 1] >= num_states) throw DataError("fit_supervised: state out of range");
        a(Eigen::Index(p.states[t]), Eigen::Index(p.states[t + 1])) += 1.0;
      }
    }
    pi(0, Eigen::Index(p.states.front())) += 1.0;
  }
  detail::normalize_rows(a, smoothing);
  detail::normalize_rows(b, smoothing);
  detail::normalize_rows(pi, smoothing);
  HmmModel h;
  h.transition = std::move(a);
  h.emission = std::move(b);
  h.initial = pi.row(0).transpose();
  return h;
}

// -- forward / backward ------------------------------------------------------

/// Normalized forward variables: row t is P(s_t | o_1..o_t); `scales[t]` is
/// P(o_t | o_1..o_{t-1}).
struct ForwardPass {
  Eigen::MatrixXd alpha_hat;  // T x N
  Eigen::VectorXd scales;     // T

  double log_likelihood() const {
    double s = 0.0;
    for (Eigen::Index t = 0; t < scales.size(); ++t) s += std::log(scales(t));
    return s;
  }
};

inline ForwardPass forward_pass(const HmmModel& model, std::span<const std::size_t> seq) {
  model.check_sequence(seq);
  const auto n = static_cast<Eigen::Index>(model.num_states());
  const auto T = static_cast<Eigen::Index>(seq.size());
  ForwardPass fp;
  fp.alpha_hat.resize(T, n);
  fp.scales.resize(T);
  Eigen::RowVectorXd alpha(n);
  for (Eigen::Index t = 0; t < T; ++t) {
    const auto o = static_cast<Eigen::Index>(seq[static_cast<std::size_t>(t)]);
    if (t == 0)
      alpha = model.initial.transpose().cwiseProduct(model.emission.col(o).transpose());
    else
      alpha = (fp.alpha_hat.row(t - 1) * model.transition).cwiseProduct(model.emission.col(o).transpose());
    const double c = alpha.sum();
    fp.scales(t) = c;
    if (c > 0.0)
      fp.alpha_hat.row(t) = alpha / c;
    else
      fp.alpha_hat.row(t).setZero();
  }
  return fp;
}

/// log P(O | model); -inf for impossible sequences, 0 for the empty one.
inline double forward_log_likelihood(const HmmModel& model, std::span<const std::size_t> seq) {
  const ForwardPass fp = forward_pass(model, seq);
  double s = 0.0;
  for (Eigen::Index t = 0; t < fp.scales.size(); ++t) {
    if (!(fp.scales(t) > 0.0)) return -std::numeric_limits<double>::infinity();
    s += std::log(fp.scales(t));
  }
  return s;
}

// -- decoding ----------------------------------------------------------------

struct ViterbiResult {
  StateSequence path;
  double log_probability = 0.0;  // log P(path, O)
};

/// Most probable state path, computed in log space. Ties resolve to the
/// lowest state index both at the final step and in every backpointer.
inline ViterbiResult viterbi(const HmmModel& model, std::span<const std::size_t> seq) {
  model.check_sequence(seq);
  ViterbiResult res;
  const std::size_t n = model.num_states(), T = seq.size();
  if (T == 0) return res;
  const Eigen::MatrixXd log_a = model.transition.array().log();
  const Eigen::MatrixXd log_b = model.emission.array().log();
  const Eigen::VectorXd log_pi = model.initial.array().log();

  std::vector<double> delta(n), next(n);
  std::vector<std::size_t> back(T * n, 0);
  for (std::size_t i = 0; i < n; ++i)
    delta[i] = log_pi(Eigen::Index(i)) + log_b(Eigen::Index(i), Eigen::Index(seq[0]));
  for (std::size_t t = 1; t < T; ++t) {
    for (std::size_t j = 0; j < n; ++j) {
      double best = -std::numeric_limits<double>::infinity();
      std::size_t arg = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const double v = delta[i] + log_a(Eigen::Index(i), Eigen::Index(j));
        if (v > best) {
          best = v;
          arg = i;
        }
      }
      next[j] = best + log_b(Eigen::Index(j), Eigen::Index(seq[t]));
      back[t * n + j] = arg;
    }
    std::swap(delta, next);
  }
  std::size_t last = 0;
  for (std::size_t i = 1; i < n; ++i)
    if (delta[i] > delta[last]) last = i;
  res.log_probability = delta[last];
  res.path.assign(T, 0);
  res.path[T - 1] = last;
  for (std::size_t t = T - 1; t > 0; --t) res.path[t - 1] = back[t * n + res.path[t]];
  return res;
}

/// log P(S, O | model) for an explicit path.
inline double path_log_probability(const HmmModel& model, std::span<const std::size_t> states,
                                   std::span<const std::size_t> seq) {
  if (states.size() != seq.size()) throw DataError("path and sequence lengths differ");
  double lp = 0.0;
  for (std::size_t t = 0; t < seq.size(); ++t) {
    const auto s = Eigen::Index(states[t]);
    lp += std::log(t == 0 ? model.initial(s) : model.transition(Eigen::Index(states[t - 1]), s));
    lp += std::log(model.emission(s, Eigen::Index(seq[t])));
  }
  return lp;
}

/// Filtered state distribution P(s_t | o_1..o_t) at the last step of the prefix.
inline Eigen::VectorXd filter_distribution(const HmmModel& model,
                                           std::span<const std::size_t> prefix) {
  if (prefix.empty()) throw DataError("filter_current_state: empty prefix");
  const ForwardPass fp = forward_pass(model, prefix);
  return fp.alpha_hat.row(fp.alpha_hat.rows() - 1).transpose();
}

/// Online estimate of the current state: argmax of the normalized forward
/// variable at the last step; ties go to the lowest index.
inline std::size_t filter_current_state(const HmmModel& model,
                                        std::span<const std::size_t> prefix) {
  const Eigen::VectorXd p = filter_distribution(model, prefix);
  std::size_t best = 0;
  for (Eigen::Index i = 1; i < p.size(); ++i)
    if (p(i) > p(Eigen::Index(best))) best = static_cast<std::size_t>(i);
  return best;
}

/// Last state of the Viterbi path over the prefix; the alternative online rule.
inline std::size_t prefix_viterbi_state(const HmmModel& model,
                                        std::span<const std::size_t> prefix) {
  if (prefix.empty()) throw DataError("prefix_viterbi_state: empty prefix");
  return viterbi(model, prefix).path.back();
}

// -- Baum-Welch --------------------------------------------------------------

inline constexpr double kBaumWelchFloor = 1e-10;

struct BaumWelchOptions {
  double tolerance = 1e-6;  // on total log-likelihood
  std::size_t max_iterations = 100;
  double floor = kBaumWelchFloor;
};

struct BaumWelchResult {
  HmmModel model;
  std::vector<double> log_likelihood_trace;  // total log-likelihood of each iterate
};

namespace detail {

// Maximizes sum_j c_j log p_j subject to p_j >= floor and sum_j p_j = 1:
// entries whose relative frequency falls under the floor are pinned to it
// and the rest are renormalized over the remaining mass.
inline void floored_normalize(Eigen::Ref<Eigen::RowVectorXd> row, double floor) {
  const auto n = row.size();
  if (floor * double(n) >= 1.0) {
    row.setConstant(1.0 / double(n));
    return;
  }
  const Eigen::RowVectorXd counts = row;
  std::vector<bool> pinned(static_cast<std::size_t>(n), false);
  for (;;) {
    double free_mass = 1.0, free_count = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (pinned[std::size_t(j)])
        free_mass -= floor;
      else
        free_count += counts(j);
    }
    bool changed = false;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (pinned[std::size_t(j)]) {
        row(j) = floor;
        continue;
      }
      row(j) = free_count > 0.0 ? free_mass * counts(j) / free_count
                                : free_mass / double(n - std::count(pinned.begin(), pinned.end(), true));
      if (row(j) < floor) {
        pinned[std::size_t(j)] = true;
        changed = true;
      }
    }
    if (!changed) return;
  }
}

inline Eigen::MatrixXd random_stochastic(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = 0.05 + uniform01(rng);
    m.row(i) /= m.row(i).sum();
  }
  return m;
}

}  // namespace detail

/// Random stochastic starting point for Baum-Welch.
inline HmmModel random_hmm(std::size_t n, std::size_t m, Rng& rng) {
  HmmModel h;
  h.transition = detail::random_stochastic(Eigen::Index(n), Eigen::Index(n), rng);
  h.emission = detail::random_stochastic(Eigen::Index(n), Eigen::Index(m), rng);
  h.initial = detail::random_stochastic(1, Eigen::Index(n), rng).row(0).transpose();
  return h;
}

/// Multi-sequence EM with scaled forward-backward recursions. Each trace
/// entry is the total log-likelihood of the parameters at that iteration;
/// the returned model is the one scored by the last entry.
inline BaumWelchResult fit_baum_welch(std::span<const SymbolSequence> sequences, std::size_t n,
                                      std::size_t m, const HmmModel& init,
                                      const BaumWelchOptions& options = {}) {
  if (n < 1 || m < 1) throw ConfigError("fit_baum_welch: N and M must be >= 1");
  if (sequences.empty()) throw DataError("fit_baum_welch: no sequences");
  if (init.num_states() != n || init.num_symbols() != m)
    throw ConfigError("fit_baum_welch: initial model has the wrong shape");
  for (const auto& s : sequences)
    for (std::size_t o : s)
      if (o >= m)
        throw DataError("fit_baum_welch: symbol " + std::to_string(o) + " out of range for M=" +
                        std::to_string(m));

  const auto N = Eigen::Index(n), M = Eigen::Index(m);
  BaumWelchResult res;
  res.model = init;
  HmmModel& h = res.model;

  for (std::size_t iter = 0;; ++iter) {
    Eigen::MatrixXd xi_sum = Eigen::MatrixXd::Zero(N, N);
    Eigen::MatrixXd emit_sum = Eigen::MatrixXd::Zero(N, M);
    Eigen::RowVectorXd pi_sum = Eigen::RowVectorXd::Zero(N);
    double ll = 0.0;

    for (const auto& seq : sequences) {
      const auto T = Eigen::Index(seq.size());
      if (T == 0) continue;
      const ForwardPass fp = forward_pass(h, seq);
      ll += fp.log_likelihood();
      Eigen::MatrixXd beta(T, N);
      beta.row(T - 1).setOnes();
      for (Eigen::Index t = T - 2; t >= 0; --t) {
        const auto o = Eigen::Index(seq[std::size_t(t + 1)]);
        const Eigen::VectorXd w = h.emission.col(o).cwiseProduct(beta.row(t + 1).transpose());
        beta.row(t) = (h.transition * w).transpose() / fp.scales(t + 1);
      }
      for (Eigen::Index t = 0; t < T; ++t) {
        const Eigen::RowVectorXd gamma = fp.alpha_hat.row(t).cwiseProduct(beta.row(t));
        emit_sum.col(Eigen::Index(seq[std::size_t(t)])) += gamma.transpose();
        if (t == 0) pi_sum += gamma;
        if (t + 1 < T) {
          const auto o = Eigen::Index(seq[std::size_t(t + 1)]);
          const Eigen::RowVectorXd w =
              h.emission.col(o).transpose().cwiseProduct(beta.row(t + 1)) / fp.scales(t + 1);
          xi_sum += (fp.alpha_hat.row(t).transpose() * w).cwiseProduct(h.transition);
        }
      }
    }

    const bool converged = !res.log_likelihood_trace.empty() &&
                           ll - res.log_likelihood_trace.back() < options.tolerance;
    res.log_likelihood_trace.push_back(ll);
    if (converged || iter >= options.max_iterations) break;

    for (Eigen::Index i = 0; i < N; ++i) {
      Eigen::RowVectorXd row = xi_sum.row(i);
      detail::floored_normalize(row, options.floor);
      h.transition.row(i) = row;
      row = emit_sum.row(i);
      detail::floored_normalize(row, options.floor);
      h.emission.row(i) = row;
    }
    detail::floored_normalize(pi_sum, options.floor);
    h.initial = pi_sum.transpose();
  }
  return res;
}

inline BaumWelchResult fit_baum_welch(std::span<const SymbolSequence> sequences, std::size_t n,
                                      std::size_t m, Rng& rng,
                                      const BaumWelchOptions& options = {}) {
  if (n < 1 || m < 1) throw ConfigError("fit_baum_welch: N and M must be >= 1");
  return fit_baum_welch(sequences, n, m, random_hmm(n, m, rng), options);
}

// -- sampling ----------------------------------------------------------------

namespace detail {
template <typename Row>
std::size_t draw_categorical(const Row& p, Rng& rng) {
  double u = uniform01(rng);
  const auto n = p.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    u -= p(i);
    if (u < 0.0) return static_cast<std::size_t>(i);
  }
  return static_cast<std::size_t>(n - 1);
}
}  // namespace detail

/// Draws a (state, symbol) sequence of length T from the model.
inline LabeledSequence sample_hmm(const HmmModel& model, std::size_t T, Rng& rng) {
  LabeledSequence out;
  std::size_t s = 0;
  for (std::size_t t = 0; t < T; ++t) {
    s = t == 0 ? detail::draw_categorical(model.initial, rng)
               : detail::draw_categorical(model.transition.row(Eigen::Index(s)), rng);
    out.states.push_back(s);
    out.symbols.push_back(detail::draw_categorical(model.emission.row(Eigen::Index(s)), rng));
  }
  return out;
}

// -- label mapping -----------------------------------------------------------

/// Bijection from learned state index to attack action.
struct LabelMapping {
  std::vector<AttackAction> state_to_action;
  std::size_t continue_state = 0;

  AttackAction operator()(std::size_t state) const { return state_to_action.at(state); }

  ActionSequence apply(std::span<const std::size_t> states) const {
    ActionSequence out;
    out.reserve(states.size());
    for (std::size_t s : states) out.push_back((*this)(s));
    return out;
  }
};

struct LabeledActions {
  ActionSequence actions;
  SymbolSequence symbols;
};

/// Pins the state with the largest initial mass to Continue (lowest index on
/// ties) and returns every assignment of the remaining states to the six
/// attack actions, in lexicographic order of the assigned actions.
inline std::vector<LabelMapping> label_mapping_candidates(const HmmModel& model) {
  if (model.num_states() != kNumActions)
    throw ConfigError("label mapping requires N=" + std::to_string(kNumActions) + ", got " +
                      std::to_string(model.num_states()));
  Eigen::Index pinned = 0;
  model.initial.maxCoeff(&pinned);
  std::vector<AttackAction> attack(kAllActions.begin() + 1, kAllActions.end());
  std::vector<LabelMapping> out;
  do {
    LabelMapping m;
    m.continue_state = static_cast<std::size_t>(pinned);
    m.state_to_action.resize(kNumActions);
    std::size_t k = 0;
    for (std::size_t s = 0; s < kNumActions; ++s)
      m.state_to_action[s] = s == m.continue_state ? AttackAction::Continue : attack[k++];
    out.push_back(std::move(m));
  } while (std::next_permutation(attack.begin(), attack.end()));
  return out;
}

/// Fraction of steps whose mapped decoded state equals the true action.
inline double mapping_accuracy(const LabelMapping& mapping,
                               std::span<const StateSequence> decoded,
                               std::span<const LabeledActions> pairs) {
  std::size_t hits = 0, total = 0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    for (std::size_t t = 0; t < pairs[i].actions.size(); ++t) {
      hits += mapping(decoded[i][t]) == pairs[i].actions[t];
      ++total;
    }
  }
  return total == 0 ? 0.0 : double(hits) / double(total);
}

struct LabelMappingFit {
  LabelMapping mapping;
  double accuracy = 0.0;
  std::size_t candidates_evaluated = 0;
};

/// Chooses the candidate mapping with the highest per-step accuracy over the
/// labeled pairs; ties keep the lexicographically smallest candidate.
inline LabelMappingFit fit_label_mapping(const HmmModel& model,
                                         std::span<const LabeledActions> pairs) {
  if (pairs.empty()) throw DataError("fit_label_mapping: no labeled pairs");
  auto candidates = label_mapping_candidates(model);
  std::vector<StateSequence> decoded;
  decoded.reserve(pairs.size());
  for (const auto& p : pairs) {
    if (p.actions.size() != p.symbols.size())
      throw DataError("fit_label_mapping: action and symbol sequences differ in length");
    decoded.push_back(viterbi(model, p.symbols).path);
  }
  LabelMappingFit best;
  best.accuracy = -1.0;
  for (auto& c : candidates) {
    const double acc = mapping_accuracy(c, decoded, pairs);
    if (acc > best.accuracy) {
      best.accuracy = acc;
      best.mapping = c;
    }
  }
  best.candidates_evaluated = candidates.size();
  return best;
}

// -- attack-type classification ----------------------------------------------

/// Attack type whose model assigns the sequence the highest likelihood;
/// ties go to Type1.
inline AttackType classify_attack_type(const std::map<AttackType, HmmModel>& models,
                                       std::span<const std::size_t> seq) {
  AttackType best = AttackType::Type1;
  double best_ll = -std::numeric_limits<double>::infinity();
  bool first = true;
  for (AttackType t : kAllTypes) {
    auto it = models.find(t);
    if (it == models.end()) continue;
    const double ll = forward_log_likelihood(it->second, seq);
    if (first || ll > best_ll) {
      best = t;
      best_ll = ll;
      first = false;
    }
  }
  if (first) throw ConfigError("classify_attack_type: no models");
  return best;
}

}  // namespace seqids
