#pragma once

// Observation-space reduction: constant removal, correlation pruning,
// forest-based ranking and Gaussian-mixture symbolization.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "seqids/forest.hpp"
#include "seqids/rng.hpp"
#include "seqids/trace_sim.hpp"
#include "seqids/types.hpp"

namespace seqids {

inline constexpr double kConstantVarianceThreshold = 1e-12;
inline constexpr double kDefaultCorrelationThreshold = 0.9;

struct CorrelatedDrop {
  std::string dropped;
  std::string kept_partner;
  double correlation = 0.0;
};

struct AttributeReport {
  std::vector<std::string> kept;  // manifest order
  std::vector<std::string> dropped_constant;
  std::vector<CorrelatedDrop> dropped_correlated;
  std::vector<ScoredAttribute> ranking;  // descending importance

  std::vector<std::string> top(std::size_t k) const {
    if (ranking.empty()) throw DataError("attribute report has no ranking");
    if (k < 1 || k > ranking.size())
      throw ConfigError("top-k must lie in [1, " + std::to_string(ranking.size()) + "]");
    std::vector<std::string> out;
    for (std::size_t i = 0; i < k; ++i) out.push_back(ranking[i].attribute);
    return out;
  }
};

// -- dataset column helpers ------------------------------------------------

inline std::size_t column_index(const Dataset& ds, const std::string& name) {
  auto it = std::find(ds.attribute_names.begin(), ds.attribute_names.end(), name);
  if (it == ds.attribute_names.end()) throw DataError("missing attribute '" + name + "'");
  return static_cast<std::size_t>(std::distance(ds.attribute_names.begin(), it));
}

inline std::vector<std::size_t> column_indices(const Dataset& ds,
                                               std::span<const std::string> names) {
  std::vector<std::size_t> out;
  out.reserve(names.size());
  for (const auto& n : names) out.push_back(column_index(ds, n));
  return out;
}

/// All values of one attribute over every step of every window.
inline std::vector<double> column_values(const Dataset& ds, std::size_t col) {
  std::vector<double> v;
  v.reserve(ds.windows.size() * kWindowLength);
  for (const auto& w : ds.windows)
    for (const auto& obs : w.observations) v.push_back(obs.at(col));
  return v;
}

/// Projection of a window onto the given columns (T x k).
inline std::vector<std::vector<double>> project(const SampleWindow& w,
                                                std::span<const std::size_t> cols) {
  std::vector<std::vector<double>> out;
  out.reserve(w.observations.size());
  for (const auto& obs : w.observations) {
    std::vector<double> row;
    row.reserve(cols.size());
    for (std::size_t c : cols) row.push_back(obs.at(c));
    out.push_back(std::move(row));
  }
  return out;
}

/// Dataset restricted to the named attributes, in the given order.
inline Dataset select_attributes(const Dataset& ds, std::span<const std::string> names) {
  const auto cols = column_indices(ds, names);
  Dataset out;
  out.attribute_names.assign(names.begin(), names.end());
  out.windows.reserve(ds.windows.size());
  for (const auto& w : ds.windows) {
    SampleWindow p = w;
    p.observations = project(w, cols);
    out.windows.push_back(std::move(p));
  }
  return out;
}

inline double sample_variance(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(v.size() - 1);
}

/// Pearson correlation; 0 when either side has no variance.
inline double pearson(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size();
  if (n != b.size() || n < 2) return 0.0;
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / static_cast<double>(n);
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / static_cast<double>(n);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double da = a[i] - ma, db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa <= 0.0 || sbb <= 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

// -- pruning and ranking -----------------------------------------------------

/// Drops every attribute whose sample variance over all steps is below 1e-12.
/// A single step (one window of length one) has zero variance by definition.
inline AttributeReport drop_constants(const Dataset& ds) {
  if (ds.windows.empty()) throw DataError("drop_constants: empty dataset");
  AttributeReport report;
  for (std::size_t c = 0; c < ds.attribute_names.size(); ++c) {
    const auto v = column_values(ds, c);
    if (sample_variance(v) < kConstantVarianceThreshold)
      report.dropped_constant.push_back(ds.attribute_names[c]);
    else
      report.kept.push_back(ds.attribute_names[c]);
  }
  return report;
}

/// Greedy pruning in manifest order: an attribute is dropped when its
/// |Pearson r| with an already-kept attribute exceeds the threshold. The
/// recorded partner is the kept attribute with the largest |r|.
inline void drop_correlated(const Dataset& ds, AttributeReport& report,
                            double threshold = kDefaultCorrelationThreshold) {
  std::vector<std::string> survivors;
  std::vector<std::vector<double>> survivor_values;
  for (const auto& name : report.kept) {
    auto values = column_values(ds, column_index(ds, name));
    double best_abs = -1.0, best_r = 0.0;
    std::size_t partner = 0;
    for (std::size_t i = 0; i < survivors.size(); ++i) {
      const double r = pearson(survivor_values[i], values);
      if (std::abs(r) > best_abs) {
        best_abs = std::abs(r);
        best_r = r;
        partner = i;
      }
    }
    if (best_abs > threshold) {
      report.dropped_correlated.push_back({name, survivors[partner], best_r});
    } else {
      survivors.push_back(name);
      survivor_values.push_back(std::move(values));
    }
  }
  report.kept = std::move(survivors);
}

/// Per-step binary samples over the given columns; label 1 iff the step is
/// part of the attack (action != Continue).
inline void attack_indicator_samples(const Dataset& ds, std::span<const std::size_t> cols,
                                     std::vector<std::vector<double>>& x,
                                     std::vector<std::size_t>& y) {
  for (const auto& w : ds.windows) {
    if (!w.labeled()) throw DataError("ranking requires labeled windows (missing 'actions')");
    for (std::size_t t = 0; t < w.observations.size(); ++t) {
      std::vector<double> row;
      row.reserve(cols.size());
      for (std::size_t c : cols) row.push_back(w.observations[t].at(c));
      x.push_back(std::move(row));
      y.push_back(w.actions[t] == AttackAction::Continue ? 0 : 1);
    }
  }
}

/// Ranks the given attributes by forest importance for predicting whether
/// an attack is ongoing. Ties keep manifest order.
inline std::vector<ScoredAttribute> rank_attributes(const Dataset& ds,
                                                    std::span<const std::string> attributes,
                                                    const ForestConfig& config = {}) {
  if (attributes.empty()) throw DataError("rank_attributes: no attributes to rank");
  const auto cols = column_indices(ds, attributes);
  std::vector<std::vector<double>> x;
  std::vector<std::size_t> y;
  attack_indicator_samples(ds, cols, x, y);
  ForestModel forest =
      forest_train(config, x, y, 2, std::vector<std::string>(attributes.begin(), attributes.end()));
  auto ranking = feature_importances(forest);
  // Importances come back in the order of `attributes`; restore manifest
  // order before the stable sort so ties resolve by manifest position.
  std::vector<std::size_t> order(ranking.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return cols[a] < cols[b]; });
  std::vector<ScoredAttribute> sorted;
  for (std::size_t i : order) sorted.push_back(ranking[i]);
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const ScoredAttribute& a, const ScoredAttribute& b) {
                     return a.score > b.score;
                   });
  return sorted;
}

/// Constant removal, correlation pruning and ranking in one pass.
inline AttributeReport reduce_attributes(const Dataset& ds, const ForestConfig& ranking_forest = {},
                                         double threshold = kDefaultCorrelationThreshold) {
  AttributeReport report = drop_constants(ds);
  drop_correlated(ds, report, threshold);
  report.ranking = rank_attributes(ds, report.kept, ranking_forest);
  return report;
}

// -- Gaussian mixture symbolizer -------------------------------------------

inline constexpr double kGmmVarianceFloor = 1e-6;

struct GaussianComponent {
  double weight = 0.0;
  std::vector<double> mean;      // standardized space
  std::vector<double> variance;  // diagonal, >= floor
};

struct GmmOptions {
  std::size_t components = 6;
  double tolerance = 1e-6;  // on per-sample log-likelihood
  std::size_t max_iterations = 200;
  double variance_floor = kGmmVarianceFloor;
};

struct GmmFit {
  std::vector<GaussianComponent> components;
  std::vector<double> log_likelihood_trace;  // per-sample, one entry per EM step
};

namespace detail {

inline double component_log_density(const GaussianComponent& c, std::span<const double> x) {
  constexpr double kLog2Pi = 1.8378770664093453;
  double s = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double diff = x[j] - c.mean[j];
    s += kLog2Pi + std::log(c.variance[j]) + diff * diff / c.variance[j];
  }
  return -0.5 * s;
}

inline double log_sum_exp(std::span<const double> v) {
  const double m = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += (a[j] - b[j]) * (a[j] - b[j]);
  return s;
}

inline std::size_t count_distinct(const std::vector<std::vector<double>>& x) {
  std::set<std::vector<double>> seen(x.begin(), x.end());
  return seen.size();
}

// k-means++ seeding: first centre uniform, then proportional to squared
// distance to the nearest chosen centre.
inline std::vector<std::vector<double>> kmeanspp(const std::vector<std::vector<double>>& x,
                                                 std::size_t k, Rng& rng) {
  std::vector<std::vector<double>> centers;
  centers.push_back(x[std::uniform_int_distribution<std::size_t>(0, x.size() - 1)(rng)]);
  std::vector<double> d2(x.size(), std::numeric_limits<double>::infinity());
  while (centers.size() < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      d2[i] = std::min(d2[i], squared_distance(x[i], centers.back()));
      total += d2[i];
    }
    std::size_t pick = 0;
    if (total > 0.0) {
      double u = uniform01(rng) * total;
      for (pick = 0; pick + 1 < x.size(); ++pick) {
        u -= d2[pick];
        if (u < 0.0 && d2[pick] > 0.0) break;
      }
      while (d2[pick] <= 0.0 && pick > 0) --pick;
    }
    centers.push_back(x[pick]);
  }
  return centers;
}

}  // namespace detail

/// Diagonal-covariance GMM fitted by EM. Stops when the per-sample
/// log-likelihood improves by less than the tolerance.
inline GmmFit fit_gmm(const std::vector<std::vector<double>>& x, const GmmOptions& options,
                      Rng& rng) {
  const std::size_t m = options.components;
  if (x.empty()) throw DataError("fit_gmm: no data");
  if (m < 1) throw ConfigError("fit_gmm: need at least one component");
  const std::size_t n = x.size(), d = x[0].size();
  if (m > detail::count_distinct(x))
    throw DataError("fit_gmm: " + std::to_string(m) + " components exceed the " +
                    std::to_string(detail::count_distinct(x)) + " distinct data points");

  const auto centers = detail::kmeanspp(x, m, rng);
  GmmFit fit;
  fit.components.resize(m);
  {
    // Initial weights and variances from a hard nearest-centre assignment.
    std::vector<std::size_t> assign(n);
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < m; ++k) {
        const double dist = detail::squared_distance(x[i], centers[k]);
        if (dist < best) {
          best = dist;
          assign[i] = k;
        }
      }
    }
    for (std::size_t k = 0; k < m; ++k) {
      auto& c = fit.components[k];
      c.mean = centers[k];
      c.variance.assign(d, 0.0);
      std::size_t cnt = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (assign[i] != k) continue;
        ++cnt;
        for (std::size_t j = 0; j < d; ++j)
          c.variance[j] += (x[i][j] - c.mean[j]) * (x[i][j] - c.mean[j]);
      }
      for (auto& v : c.variance)
        v = std::max(options.variance_floor, cnt > 0 ? v / static_cast<double>(cnt) : 1.0);
      c.weight = static_cast<double>(std::max<std::size_t>(cnt, 1));
    }
    double wsum = 0.0;
    for (const auto& c : fit.components) wsum += c.weight;
    for (auto& c : fit.components) c.weight /= wsum;
  }

  std::vector<double> resp(n * m), logp(m);
  for (std::size_t iter = 0; iter < options.max_iterations; ++iter) {
    // E-step
    double ll = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < m; ++k)
        logp[k] = std::log(fit.components[k].weight) +
                  detail::component_log_density(fit.components[k], x[i]);
      const double lse = detail::log_sum_exp(logp);
      ll += lse;
      for (std::size_t k = 0; k < m; ++k) resp[i * m + k] = std::exp(logp[k] - lse);
    }
    ll /= static_cast<double>(n);
    const bool converged = !fit.log_likelihood_trace.empty() &&
                           ll - fit.log_likelihood_trace.back() < options.tolerance;
    fit.log_likelihood_trace.push_back(ll);
    if (converged) break;

    // M-step; the floored variance is the constrained maximizer, so the
    // likelihood stays monotone.
    for (std::size_t k = 0; k < m; ++k) {
      auto& c = fit.components[k];
      double nk = 0.0;
      for (std::size_t i = 0; i < n; ++i) nk += resp[i * m + k];
      c.weight = nk / static_cast<double>(n);
      if (nk <= 1e-300) continue;
      for (std::size_t j = 0; j < d; ++j) {
        double mu = 0.0;
        for (std::size_t i = 0; i < n; ++i) mu += resp[i * m + k] * x[i][j];
        mu /= nk;
        double var = 0.0;
        for (std::size_t i = 0; i < n; ++i) var += resp[i * m + k] * (x[i][j] - mu) * (x[i][j] - mu);
        c.mean[j] = mu;
        c.variance[j] = std::max(options.variance_floor, var / nk);
      }
    }
  }
  return fit;
}

/// Maps a reduced observation vector onto one of M symbols.
struct Symbolizer {
  std::vector<std::string> attributes;
  std::vector<double> center;  // per-attribute mean of the training data
  std::vector<double> scale;   // per-attribute std-dev (1 when degenerate)
  std::vector<GaussianComponent> components;  // EM order
  std::vector<std::size_t> symbol_order;      // symbol_order[s] = component index
  std::size_t num_samples = 0;                // rows the mixture was fitted on
  std::vector<double> log_likelihood_trace;

  std::size_t num_symbols() const { return components.size(); }

  std::vector<double> standardize(std::span<const double> values) const {
    if (values.size() != attributes.size())
      throw DataError("symbolizer expects " + std::to_string(attributes.size()) + " attributes");
    std::vector<double> z(values.size());
    for (std::size_t j = 0; j < values.size(); ++j) z[j] = (values[j] - center[j]) / scale[j];
    return z;
  }

  /// Symbol of an observation already restricted to `attributes`. Picks the
  /// component with the largest responsibility; ties go to the lower symbol.
  std::size_t symbolize_selected(std::span<const double> values) const {
    const auto z = standardize(values);
    std::size_t best = 0;
    double best_lp = -std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < symbol_order.size(); ++s) {
      const auto& c = components[symbol_order[s]];
      const double lp = std::log(c.weight) + detail::component_log_density(c, z);
      if (lp > best_lp) {
        best_lp = lp;
        best = s;
      }
    }
    return best;
  }

  /// Symbol of a full observation whose attribute names are given.
  std::size_t symbolize(std::span<const double> observation,
                        std::span<const std::string> names) const {
    std::vector<double> values;
    values.reserve(attributes.size());
    for (const auto& a : attributes) {
      auto it = std::find(names.begin(), names.end(), a);
      if (it == names.end()) throw DataError("observation is missing attribute '" + a + "'");
      values.push_back(observation[static_cast<std::size_t>(std::distance(names.begin(), it))]);
    }
    return symbolize_selected(values);
  }
};

inline Symbolizer fit_symbolizer(const Dataset& ds, std::span<const std::string> selected,
                                 std::size_t num_symbols, Rng& rng, GmmOptions options = {}) {
  if (selected.empty()) throw ConfigError("fit_symbolizer: no attributes selected");
  if (num_symbols < 2) throw ConfigError("fit_symbolizer: need at least two symbols");
  if (ds.windows.empty()) throw DataError("fit_symbolizer: empty dataset");
  const auto cols = column_indices(ds, selected);

  Symbolizer sym;
  sym.attributes.assign(selected.begin(), selected.end());
  std::vector<std::vector<double>> rows;
  for (const auto& w : ds.windows)
    for (auto& r : project(w, cols)) rows.push_back(std::move(r));

  const std::size_t d = cols.size();
  sym.center.assign(d, 0.0);
  sym.scale.assign(d, 1.0);
  for (std::size_t j = 0; j < d; ++j) {
    std::vector<double> col;
    col.reserve(rows.size());
    for (const auto& r : rows) col.push_back(r[j]);
    sym.center[j] = std::accumulate(col.begin(), col.end(), 0.0) / static_cast<double>(col.size());
    double ss = 0.0;
    for (double v : col) ss += (v - sym.center[j]) * (v - sym.center[j]);
    const double sd = std::sqrt(ss / static_cast<double>(col.size()));
    sym.scale[j] = sd > 0.0 ? sd : 1.0;
  }
  for (auto& r : rows)
    for (std::size_t j = 0; j < d; ++j) r[j] = (r[j] - sym.center[j]) / sym.scale[j];

  options.components = num_symbols;
  GmmFit fit = fit_gmm(rows, options, rng);
  sym.components = std::move(fit.components);
  sym.log_likelihood_trace = std::move(fit.log_likelihood_trace);
  sym.num_samples = rows.size();
  sym.symbol_order.resize(sym.components.size());
  std::iota(sym.symbol_order.begin(), sym.symbol_order.end(), std::size_t{0});
  std::stable_sort(sym.symbol_order.begin(), sym.symbol_order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return sym.components[a].mean[0] < sym.components[b].mean[0];
                   });
  return sym;
}

using SymbolSequence = std::vector<std::size_t>;

inline SymbolSequence symbolize_window(const Symbolizer& sym, const SampleWindow& w,
                                       std::span<const std::size_t> cols) {
  SymbolSequence out;
  out.reserve(w.observations.size());
  std::vector<double> values(cols.size());
  for (const auto& obs : w.observations) {
    for (std::size_t j = 0; j < cols.size(); ++j) values[j] = obs.at(cols[j]);
    out.push_back(sym.symbolize_selected(values));
  }
  return out;
}

}  // namespace seqids
