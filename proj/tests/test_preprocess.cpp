#include <gtest/gtest.h>

#include <set>

#include <seqids.hpp>

using namespace seqids;

namespace {

const Dataset& default_dataset() {
  static const Dataset ds = generate_dataset(SimConfig{});
  return ds;
}

const AttributeReport& default_report() {
  static const AttributeReport r = reduce_attributes(default_dataset());
  return r;
}

Dataset table(const std::vector<std::string>& names, const std::vector<std::vector<double>>& rows,
              const std::vector<AttackAction>& labels = {}) {
  Dataset ds;
  ds.attribute_names = names;
  SampleWindow w;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    w.observations.push_back(rows[i]);
    if (!labels.empty()) w.actions.push_back(labels[i]);
    if (w.observations.size() == kWindowLength || i + 1 == rows.size()) {
      ds.windows.push_back(w);
      w = {};
    }
  }
  return ds;
}

bool is_alert_count(const std::string& name) {
  for (const auto& a : attribute_manifest())
    if (a.name == name) return a.generator == GeneratorClass::AlertCount;
  return false;
}

}  // namespace

TEST(Constants, DefaultDatasetLeaves14) {
  const AttributeReport r = drop_constants(default_dataset());
  EXPECT_EQ(r.dropped_constant.size(), 36u);
  EXPECT_EQ(r.kept.size(), 14u);
}

TEST(Constants, AllVaryingKeepsAll) {
  Rng rng = make_stream(1);
  std::normal_distribution<double> z;
  std::vector<std::vector<double>> rows(40, std::vector<double>(3));
  for (auto& r : rows)
    for (auto& v : r) v = z(rng);
  const auto r = drop_constants(table({"a", "b", "c"}, rows));
  EXPECT_TRUE(r.dropped_constant.empty());
  EXPECT_EQ(r.kept.size(), 3u);
}

TEST(Constants, FlatColumnInSingleWindow) {
  std::vector<std::vector<double>> rows;
  for (int t = 0; t < 10; ++t) rows.push_back({double(t), 5.0});
  const auto r = drop_constants(table({"x", "flat"}, rows));
  EXPECT_EQ(r.dropped_constant, std::vector<std::string>{"flat"});
}

TEST(Constants, EmptyDatasetThrows) { EXPECT_THROW(drop_constants(Dataset{}), DataError); }

TEST(Correlation, DefaultDatasetLeaves11) {
  const auto& r = default_report();
  EXPECT_EQ(r.dropped_correlated.size(), 3u);
  EXPECT_EQ(r.kept.size(), 11u);
  for (const auto& d : r.dropped_correlated) EXPECT_NEAR(std::abs(d.correlation), 1.0, 1e-9);
}

TEST(Correlation, PartitionOfAttributes) {
  const auto& r = default_report();
  std::multiset<std::string> all(r.kept.begin(), r.kept.end());
  all.insert(r.dropped_constant.begin(), r.dropped_constant.end());
  for (const auto& d : r.dropped_correlated) all.insert(d.dropped);
  const auto names = attribute_names();
  EXPECT_EQ(all, std::multiset<std::string>(names.begin(), names.end()));
}

TEST(Correlation, SurvivorsBelowThreshold) {
  const auto& ds = default_dataset();
  const auto& r = default_report();
  for (std::size_t i = 0; i < r.kept.size(); ++i)
    for (std::size_t j = i + 1; j < r.kept.size(); ++j) {
      const auto a = column_values(ds, column_index(ds, r.kept[i]));
      const auto b = column_values(ds, column_index(ds, r.kept[j]));
      EXPECT_LE(std::abs(pearson(a, b)), 0.9) << r.kept[i] << " vs " << r.kept[j];
    }
}

TEST(Correlation, DuplicatesPerfectlyCorrelated) {
  const auto& ds = default_dataset();
  for (const auto& a : attribute_manifest()) {
    if (a.generator != GeneratorClass::Duplicate) continue;
    const auto x = column_values(ds, column_index(ds, a.name));
    const auto y = column_values(ds, a.slot);
    EXPECT_NEAR(pearson(x, y), 1.0, 1e-9);
  }
}

TEST(Correlation, IdenticalColumnsDropSecond) {
  Rng rng = make_stream(2);
  std::normal_distribution<double> z;
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < 30; ++i) {
    const double v = z(rng);
    rows.push_back({v, z(rng), v});
  }
  const Dataset ds = table({"a", "b", "c"}, rows);
  AttributeReport r = drop_constants(ds);
  drop_correlated(ds, r);
  ASSERT_EQ(r.dropped_correlated.size(), 1u);
  EXPECT_EQ(r.dropped_correlated[0].dropped, "c");
  EXPECT_EQ(r.dropped_correlated[0].kept_partner, "a");
  EXPECT_DOUBLE_EQ(r.dropped_correlated[0].correlation, 1.0);
}

TEST(Correlation, IndependentColumnsKept) {
  Rng rng = make_stream(3);
  std::normal_distribution<double> z;
  std::vector<std::vector<double>> rows(10000, std::vector<double>(5));
  for (auto& r : rows)
    for (auto& v : r) v = z(rng);
  const Dataset ds = table({"a", "b", "c", "d", "e"}, rows);
  AttributeReport r = drop_constants(ds);
  drop_correlated(ds, r);
  EXPECT_TRUE(r.dropped_correlated.empty());
}

TEST(Correlation, Idempotent) {
  const auto& r = default_report();
  const Dataset pruned = select_attributes(default_dataset(), r.kept);
  AttributeReport again = drop_constants(pruned);
  drop_correlated(pruned, again);
  EXPECT_TRUE(again.dropped_constant.empty());
  EXPECT_TRUE(again.dropped_correlated.empty());
  EXPECT_EQ(again.kept, r.kept);
}

TEST(Ranking, TopAttributeIsAlertCount) {
  const auto& r = default_report();
  ASSERT_EQ(r.ranking.size(), r.kept.size());
  EXPECT_TRUE(is_alert_count(r.ranking.front().attribute)) << r.ranking.front().attribute;
  double sum = 0.0;
  for (std::size_t i = 0; i < r.ranking.size(); ++i) {
    EXPECT_GE(r.ranking[i].score, 0.0);
    if (i > 0) {
      EXPECT_GE(r.ranking[i - 1].score, r.ranking[i].score);
    }
    sum += r.ranking[i].score;
  }
  EXPECT_NEAR(sum, 1.0, 1e-6);
  std::set<std::string> ranked;
  for (const auto& s : r.ranking) ranked.insert(s.attribute);
  EXPECT_EQ(ranked, std::set<std::string>(r.kept.begin(), r.kept.end()));
}

TEST(Ranking, Deterministic) {
  const auto again = reduce_attributes(default_dataset());
  ASSERT_EQ(again.ranking.size(), default_report().ranking.size());
  for (std::size_t i = 0; i < again.ranking.size(); ++i) {
    EXPECT_EQ(again.ranking[i].attribute, default_report().ranking[i].attribute);
    EXPECT_EQ(again.ranking[i].score, default_report().ranking[i].score);
  }
}

TEST(Ranking, SingleInformativeAttributeFirst) {
  Rng rng = make_stream(4);
  std::normal_distribution<double> z;
  std::vector<std::vector<double>> rows;
  std::vector<AttackAction> labels;
  for (int w = 0; w < 40; ++w)
    for (int t = 0; t < 10; ++t) {
      const bool attack = t >= 5;
      rows.push_back({z(rng), (attack ? 10.0 : 0.0) + z(rng), z(rng)});
      labels.push_back(attack ? AttackAction::PingScan : AttackAction::Continue);
    }
  const Dataset ds = table({"n1", "signal", "n2"}, rows, labels);
  const std::vector<std::string> attrs{"n1", "signal", "n2"};
  const auto ranking = rank_attributes(ds, attrs);
  EXPECT_EQ(ranking.front().attribute, "signal");
}

TEST(Ranking, UnlabeledThrows) {
  std::vector<std::vector<double>> rows;
  for (int t = 0; t < 10; ++t) rows.push_back({double(t)});
  const std::vector<std::string> attrs{"x"};
  EXPECT_THROW(rank_attributes(table({"x"}, rows), attrs), DataError);
}

TEST(Gmm, TwoBlobs) {
  Rng rng = make_stream(5);
  std::normal_distribution<double> z(0.0, 0.1);
  std::vector<std::vector<double>> rows;
  std::vector<int> truth;
  for (int i = 0; i < 400; ++i) {
    const int k = i % 2;
    rows.push_back({(k ? 10.0 : -10.0) + z(rng)});
    truth.push_back(k);
  }
  const Dataset ds = table({"x"}, rows);
  Rng fit_rng = make_stream(6);
  const std::vector<std::string> attrs{"x"};
  const Symbolizer sym = fit_symbolizer(ds, attrs, 2, fit_rng);
  for (std::size_t i = 0; i < rows.size(); ++i)
    EXPECT_EQ(sym.symbolize_selected(rows[i]), std::size_t(truth[i]));
}

TEST(Gmm, MonotoneTraceAndConstraints) {
  const auto& ds = default_dataset();
  const auto top = default_report().top(4);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng = make_stream(seed);
    const Symbolizer sym = fit_symbolizer(ds, top, 6, rng);
    for (std::size_t i = 1; i < sym.log_likelihood_trace.size(); ++i)
      EXPECT_GE(sym.log_likelihood_trace[i], sym.log_likelihood_trace[i - 1] - 1e-9);
    double w = 0.0;
    for (const auto& c : sym.components) {
      w += c.weight;
      for (double v : c.variance) EXPECT_GE(v, kGmmVarianceFloor);
    }
    EXPECT_NEAR(w, 1.0, 1e-9);
    for (std::size_t s = 1; s < sym.symbol_order.size(); ++s)
      EXPECT_LE(sym.components[sym.symbol_order[s - 1]].mean[0],
                sym.components[sym.symbol_order[s]].mean[0]);
  }
}

TEST(Gmm, AllSixSymbolsOccur) {
  const auto& ds = default_dataset();
  for (std::size_t k : {1u, 4u}) {
    Rng rng = make_stream(0, StreamTag::Symbolizer, k);
    const Symbolizer sym = fit_symbolizer(ds, default_report().top(k), 6, rng);
    const auto cols = column_indices(ds, sym.attributes);
    std::set<std::size_t> used;
    for (const auto& w : ds.windows)
      for (std::size_t s : symbolize_window(sym, w, cols)) used.insert(s);
    EXPECT_EQ(used.size(), 6u) << "top-" << k;
  }
}

TEST(Gmm, TooFewDistinctPoints) {
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < 10; ++i) rows.push_back({double(i % 3)});
  Rng rng = make_stream(7);
  const std::vector<std::string> attrs{"x"};
  EXPECT_THROW(fit_symbolizer(table({"x"}, rows), attrs, 4, rng), DataError);
}

TEST(Symbolize, MatchesResponsibilityArgmax) {
  Rng rng = make_stream(8);
  const auto& ds = default_dataset();
  const Symbolizer sym = fit_symbolizer(ds, default_report().top(1), 6, rng);
  for (std::size_t s = 1; s < sym.num_symbols(); ++s)
    EXPECT_LE(sym.components[sym.symbol_order[s - 1]].mean[0], sym.components[sym.symbol_order[s]].mean[0]);
  const double pi = std::acos(-1.0);
  const std::vector<std::size_t> cols{column_index(ds, sym.attributes[0])};
  for (const auto& w : ds.windows) {
    for (const auto& obs : project(w, cols)) {
      const double z = (obs[0] - sym.center[0]) / sym.scale[0];
      std::size_t best = 0;
      double best_p = -1.0;
      for (std::size_t s = 0; s < sym.num_symbols(); ++s) {
        const auto& c = sym.components[sym.symbol_order[s]];
        const double d = z - c.mean[0];
        const double p = c.weight * std::exp(-0.5 * d * d / c.variance[0]) / std::sqrt(2 * pi * c.variance[0]);
        if (p > best_p) {
          best_p = p;
          best = s;
        }
      }
      ASSERT_EQ(sym.symbolize_selected(obs), best);
    }
  }
}

TEST(Symbolize, MissingAttributeThrows) {
  Rng rng = make_stream(9);
  const auto& ds = default_dataset();
  const Symbolizer sym = fit_symbolizer(ds, default_report().top(1), 6, rng);
  const std::vector<std::string> names{"other"};
  const std::vector<double> obs{1.0};
  EXPECT_THROW(sym.symbolize(obs, names), DataError);
  Dataset missing;
  missing.attribute_names = {"other"};
  EXPECT_THROW(column_indices(missing, sym.attributes), DataError);
}

TEST(Symbolize, ZeroNoiseConstantPerAction) {
  SimConfig c;
  c.noise = 0.0;
  c.episodes_per_type = 100;
  const Dataset ds = generate_dataset(c);
  const std::vector<std::string> attrs{"snort_misc_activity", "snort_attempted_recon"};
  Rng rng = make_stream(10);
  const Symbolizer sym = fit_symbolizer(ds, attrs, 2, rng);
  const auto cols = column_indices(ds, attrs);
  std::map<AttackAction, std::size_t> seen;
  for (const auto& w : ds.windows) {
    const auto syms = symbolize_window(sym, w, cols);
    for (std::size_t t = 0; t < syms.size(); ++t) {
      auto [it, fresh] = seen.emplace(w.actions[t], syms[t]);
      if (!fresh) {
        EXPECT_EQ(it->second, syms[t]);
      }
    }
  }
}
