#include <gtest/gtest.h>

#include <set>

#include <seqids.hpp>

#include "oracles.hpp"

using namespace seqids;
using A = AttackAction;

namespace {

ExperimentConfig quick_config() {
  ExperimentConfig c;
  c.seeds = {0, 1};
  c.baum_welch_restarts = 2;
  c.ranking_forest.num_trees = 20;
  c.action_forest.num_trees = 10;
  c.lstm.epochs = 3;
  c.lstm.hidden_size = 8;
  return c;
}

const Dataset& small_dataset() {
  static const Dataset ds = [] {
    SimConfig c;
    c.episodes_per_type = 30;
    return generate_dataset(c);
  }();
  return ds;
}

ActionSequence random_actions(std::mt19937_64& g) {
  std::uniform_int_distribution<int> coin(0, 3);
  std::uniform_int_distribution<std::size_t> any(0, kNumActions - 1);
  ActionSequence s(kWindowLength);
  for (auto& a : s) a = coin(g) == 0 ? A::Continue : action_at(any(g));
  return s;
}

}  // namespace

TEST(StartTime, FirstNonContinue) {
  ActionSequence s(kWindowLength, A::Continue);
  EXPECT_FALSE(predict_start_time(s).has_value());
  s[2] = A::PingScan;
  s[5] = A::InstallTools;
  EXPECT_EQ(predict_start_time(s), 3u);
}

TEST(StartTime, RecoversSimulatorStart) {
  for (const auto& w : small_dataset().windows) EXPECT_EQ(predict_start_time(w.actions), w.t_start_local);
}

TEST(Metrics, PerfectPrediction) {
  std::vector<ActionSequence> truth;
  std::vector<AttackType> types;
  for (const auto& w : small_dataset().windows) {
    truth.push_back(w.actions);
    types.push_back(w.attack_type);
  }
  const MetricSet m = compute_metrics(truth, types, truth, types);
  EXPECT_EQ(m.acc_start, 1.0);
  EXPECT_EQ(m.acc_type, 1.0);
  EXPECT_EQ(m.acc_action, 1.0);
  EXPECT_EQ(m.acc_sequence, 1.0);
  EXPECT_EQ(m.count, truth.size());
}

TEST(Metrics, NineOfTenSteps) {
  std::vector<ActionSequence> truth, pred;
  std::vector<AttackType> types;
  for (const auto& w : small_dataset().windows) {
    truth.push_back(w.actions);
    auto p = w.actions;
    p[kWindowLength - 1] = p.back() == A::PingScan ? A::InstallTools : A::PingScan;
    pred.push_back(p);
    types.push_back(w.attack_type);
  }
  const MetricSet m = compute_metrics(truth, types, pred, types);
  EXPECT_DOUBLE_EQ(m.acc_action, 0.9);
  EXPECT_EQ(m.acc_sequence, 0.0);
}

TEST(Metrics, HandBuiltStartsAndTypes) {
  const ActionSequence truth{A::Continue, A::PingScan, A::InstallTools};
  const ActionSequence early{A::PingScan, A::PingScan, A::InstallTools};
  const std::vector<ActionSequence> t(4, truth);
  const std::vector<ActionSequence> p{truth, truth, early, early};
  const std::vector<AttackType> tt(4, AttackType::Type1);
  const std::vector<AttackType> pt{AttackType::Type1, AttackType::Type2, AttackType::Type1, AttackType::Type1};
  const MetricSet m = compute_metrics(t, tt, p, pt);
  EXPECT_EQ(m.acc_start, 0.5);
  EXPECT_EQ(m.acc_type, 0.75);
  EXPECT_EQ(m.count, 4u);
}

TEST(Metrics, MatchesNaiveOracle) {
  std::mt19937_64 g(42);
  std::uniform_int_distribution<std::size_t> size(1, 30);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t l = size(g);
    std::vector<ActionSequence> truth, pred;
    std::vector<AttackType> tt, pt;
    for (std::size_t i = 0; i < l; ++i) {
      truth.push_back(random_actions(g));
      pred.push_back(g() % 3 == 0 ? truth.back() : random_actions(g));
      tt.push_back(kAllTypes[g() % 2]);
      pt.push_back(kAllTypes[g() % 2]);
    }
    const MetricSet m = compute_metrics(truth, tt, pred, pt);
    ASSERT_EQ(m, oracle::metrics(truth, tt, pred, pt));
    ASSERT_LE(m.acc_sequence, m.acc_action);
  }
}

TEST(Metrics, LengthMismatch) {
  const std::vector<ActionSequence> one(1, ActionSequence(kWindowLength, A::Continue));
  const std::vector<ActionSequence> two(2, ActionSequence(kWindowLength, A::Continue));
  const std::vector<AttackType> t1(1, AttackType::Type1);
  EXPECT_THROW(compute_metrics(one, t1, two, t1), DataError);
  const std::vector<ActionSequence> shorter(1, ActionSequence(3, A::Continue));
  EXPECT_THROW(compute_metrics(one, t1, shorter, t1), DataError);
}

TEST(Similarity, CanonicalSuffixClassifiesItsType) {
  for (AttackType type : kAllTypes)
    for (std::size_t start = 1; start <= kWindowLength; ++start) {
      ActionSequence s(kWindowLength, A::Continue);
      for (std::size_t t = start - 1, k = 0; t < kWindowLength; ++t, ++k) s[t] = attack_steps(type)[k];
      EXPECT_EQ(sequence_similarity(s, type), 1.0);
      if (start < kWindowLength) {
        EXPECT_EQ(classify_by_similarity(s), type);
      }
    }
  EXPECT_EQ(classify_by_similarity(ActionSequence(kWindowLength, A::Continue)), AttackType::Type1);
}

TEST(Split, StratifiedAndDisjoint) {
  const Dataset& ds = small_dataset();
  Rng rng = make_stream(3);
  const Split s = stratified_split(ds, 0.7, rng);
  EXPECT_EQ(s.train.size() + s.test.size(), ds.windows.size());
  std::set<std::size_t> all(s.train.begin(), s.train.end());
  for (std::size_t i : s.test) EXPECT_TRUE(all.insert(i).second);
  for (AttackType t : kAllTypes) {
    std::size_t n = 0;
    for (std::size_t i : s.train) n += ds.windows[i].attack_type == t;
    EXPECT_EQ(n, 21u);
  }
}

TEST(Protocol, PreprocessingSeesTrainingDataOnly) {
  const auto config = quick_config();
  const SeedPreparation prep = prepare_seed(small_dataset(), 0, config);
  EXPECT_EQ(prep.train.windows.size(), 42u);
  EXPECT_EQ(prep.test.windows.size(), 18u);
  const Symbolizer sym = fit_seed_symbolizer(prep, 1, config);
  EXPECT_EQ(sym.num_samples, prep.train.windows.size() * kWindowLength);
  const TrainedModel tm = train_model(prep.train, Method::HmmSupervised, 1, prep.report, config, 0);
  EXPECT_EQ(tm.hmm->symbolizer.num_samples, prep.train.windows.size() * kWindowLength);
}

TEST(Protocol, ReportShapeAndDeterminism) {
  const auto config = quick_config();
  const std::array<std::size_t, 1> ks{1};
  const StudyReport a = run_study(small_dataset(), kAllMethods, ks, config);
  ASSERT_EQ(a.offline.size(), 4u);
  for (const auto& r : a.offline) {
    EXPECT_EQ(r.seeds, config.seeds);
    for (AttackType t : kAllTypes) {
      ASSERT_EQ(r.per_seed[index_of(t)].size(), 2u);
      for (const auto& m : r.per_seed[index_of(t)]) {
        EXPECT_EQ(m.count, 9u);
        EXPECT_LE(m.acc_sequence, m.acc_action);
        for (double v : {m.acc_start, m.acc_type, m.acc_action, m.acc_sequence}) {
          EXPECT_GE(v, 0.0);
          EXPECT_LE(v, 1.0);
        }
      }
      const auto s = r.summary(t);
      EXPECT_DOUBLE_EQ(s.mean.acc_action,
                       (r.per_seed[index_of(t)][0].acc_action + r.per_seed[index_of(t)][1].acc_action) / 2);
    }
  }
  ASSERT_EQ(a.online.size(), 4u);
  for (const auto& c : a.online) {
    ASSERT_EQ(c.per_seed.size(), 2u);
    EXPECT_EQ(c.mean().size(), kWindowLength);
  }
  EXPECT_EQ(run_study(small_dataset(), kAllMethods, ks, config), a);
}

TEST(Protocol, Errors) {
  auto config = quick_config();
  config.seeds.clear();
  EXPECT_THROW(run_offline_experiment(small_dataset(), Method::Rfc, 1, config), ConfigError);
  EXPECT_THROW(parse_method("svm"), ConfigError);
  for (Method m : kAllMethods) EXPECT_EQ(parse_method(to_string(m)), m);
}

TEST(Protocol, UnlabeledTrainingNeedsUnsupervisedMethod) {
  const auto config = quick_config();
  const SeedPreparation prep = prepare_seed(small_dataset(), 0, config);
  Dataset unlabeled = prep.train;
  for (auto& w : unlabeled.windows) w.actions.clear();
  for (Method m : {Method::HmmSupervised, Method::Lstm, Method::Rfc}) {
    try {
      train_model(unlabeled, m, 1, prep.report, config, 0);
      ADD_FAILURE() << "expected an error for " << to_string(m);
    } catch (const DataError& e) {
      EXPECT_NE(std::string(e.what()).find("actions"), std::string::npos);
    }
  }
  const TrainedModel tm = train_model(unlabeled, Method::HmmUnsupervised, 1, prep.report, config, 0);
  EXPECT_FALSE(tm.hmm->mapped());
  EXPECT_EQ(tm.hmm->models.size(), 2u);
  EXPECT_THROW(predict_model(tm, prep.test, false), DataError);
}
