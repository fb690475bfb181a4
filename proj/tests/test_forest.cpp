#include <gtest/gtest.h>

#include <map>
#include <set>

#include <seqids.hpp>

using namespace seqids;

namespace {

std::vector<std::vector<double>> xor_points(std::vector<std::size_t>& y, std::size_t reps) {
  std::vector<std::vector<double>> x;
  for (std::size_t r = 0; r < reps; ++r)
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        x.push_back({double(a), double(b)});
        y.push_back(std::size_t(a ^ b));
      }
  return x;
}

}  // namespace

TEST(Forest, SingleClassAlwaysPredicted) {
  const std::vector<std::vector<double>> x{{0.0}, {1.0}, {2.0}};
  const std::vector<std::size_t> y{3, 3, 3};
  ForestConfig c;
  c.num_trees = 5;
  const ForestModel m = forest_train(c, x, y, 7);
  const std::vector<double> probe{-5.0};
  EXPECT_EQ(forest_predict(m, probe), 3u);
  for (const auto& s : feature_importances(m)) EXPECT_EQ(s.score, 0.0);
}

TEST(Forest, LearnsXor) {
  std::vector<std::size_t> y;
  const auto x = xor_points(y, 10);
  ForestConfig c;
  c.num_trees = 25;
  c.max_features = 2;
  const ForestModel m = forest_train(c, x, y);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(forest_predict(m, x[i]), y[i]);
}

TEST(Forest, SingleFeatureSeparation) {
  std::vector<std::vector<double>> x;
  std::vector<std::size_t> y;
  for (int i = 0; i < 30; ++i) {
    x.push_back({double(i)});
    y.push_back(i < 10 ? 0 : (i < 20 ? 1 : 2));
  }
  ForestConfig c;
  c.num_trees = 15;
  const ForestModel m = forest_train(c, x, y);
  const std::vector<double> lo{2.0}, mid{14.5}, hi{40.0};
  EXPECT_EQ(forest_predict(m, lo), 0u);
  EXPECT_EQ(forest_predict(m, mid), 1u);
  EXPECT_EQ(forest_predict(m, hi), 2u);
}

TEST(Forest, StatelessSequencePrediction) {
  std::vector<std::size_t> y;
  const auto x = xor_points(y, 5);
  ForestConfig c;
  c.num_trees = 11;
  c.max_features = 2;
  const ForestModel m = forest_train(c, x, y);
  const std::vector<std::vector<double>> window{{0, 0}, {0, 1}, {1, 0}, {1, 1}};
  const ActionSequence forward = forest_predict_sequence(m, window);
  const std::vector<std::vector<double>> reversed(window.rbegin(), window.rend());
  ActionSequence backward = forest_predict_sequence(m, reversed);
  std::reverse(backward.begin(), backward.end());
  EXPECT_EQ(forward, backward);
  for (std::size_t t = 0; t < window.size(); ++t) EXPECT_EQ(forward[t], action_at(forest_predict(m, window[t])));
}

TEST(Forest, ImportanceFindsInformativeAttribute) {
  Rng rng = make_stream(3);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<std::vector<double>> x;
  std::vector<std::size_t> y;
  for (int i = 0; i < 400; ++i) {
    const std::size_t label = std::size_t(i % 2);
    x.push_back({n(rng), double(label) * 4.0 + n(rng), n(rng)});
    y.push_back(label);
  }
  ForestConfig c;
  c.num_trees = 30;
  const ForestModel m = forest_train(c, x, y, 2, {"a", "signal", "b"});
  const auto scores = feature_importances(m);
  ASSERT_EQ(scores.size(), 3u);
  double sum = 0.0;
  for (const auto& s : scores) {
    EXPECT_GE(s.score, 0.0);
    sum += s.score;
  }
  EXPECT_NEAR(sum, 1.0, 1e-12);
  EXPECT_EQ(scores[1].attribute, "signal");
  EXPECT_GT(scores[1].score, scores[0].score + scores[2].score);
}

TEST(Forest, DeterministicPerSeed) {
  std::vector<std::size_t> y;
  const auto x = xor_points(y, 6);
  ForestConfig c;
  c.num_trees = 7;
  c.seed = 4;
  const ForestModel a = forest_train(c, x, y), b = forest_train(c, x, y);
  ASSERT_EQ(a.trees.size(), b.trees.size());
  for (std::size_t t = 0; t < a.trees.size(); ++t) EXPECT_EQ(a.trees[t].nodes.size(), b.trees[t].nodes.size());
  EXPECT_EQ(a.impurity_decrease, b.impurity_decrease);
}

TEST(Forest, Errors) {
  ForestConfig c;
  const std::vector<std::vector<double>> x{{0.0, 1.0}, {1.0}};
  const std::vector<std::size_t> y{0, 1};
  EXPECT_THROW(forest_train(c, x, y), DataError);
  EXPECT_THROW(forest_train(c, {}, std::vector<std::size_t>{}), DataError);
  const std::vector<std::vector<double>> ok{{0.0}, {1.0}};
  EXPECT_THROW(forest_train(c, ok, y, 1), DataError);
  c.max_features = 2;
  EXPECT_THROW(forest_train(c, ok, y), ConfigError);
  c = {};
  const ForestModel m = forest_train(c, ok, y);
  const std::vector<double> wrong{1.0, 2.0};
  EXPECT_THROW(forest_predict(m, wrong), DataError);
}

TEST(Forest, ZeroNoiseFitsEveryDistinctObservation) {
  SimConfig sc;
  sc.noise = 0.0;
  sc.episodes_per_type = 40;
  const Dataset ds = generate_dataset(sc);
  std::vector<std::vector<double>> x;
  std::vector<std::size_t> y;
  std::map<std::vector<double>, std::set<std::size_t>> groups;
  for (const auto& w : ds.windows)
    for (std::size_t t = 0; t < w.actions.size(); ++t) {
      x.push_back(w.observations[t]);
      y.push_back(index_of(w.actions[t]));
      groups[x.back()].insert(y.back());
    }
  ForestConfig c;
  c.num_trees = 20;
  c.max_features = x[0].size();
  const ForestModel m = forest_train(c, x, y, kNumActions);
  std::size_t unique = 0;
  for (const auto& [obs, labels] : groups) {
    const std::size_t p = forest_predict(m, obs);
    EXPECT_TRUE(labels.count(p));
    if (labels.size() == 1) {
      ++unique;
      EXPECT_EQ(p, *labels.begin());
    }
  }
  EXPECT_GE(unique, 4u);
}
