// Copyright 2026 The Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "prefcache/learner.h"

#include <cmath>
#include <random>

#include "gtest/gtest.h"
#include "test_util.h"

namespace prefcache {
namespace {

using ::prefcache::testing::RandomRequests;

// Dense log-likelihood straight from the definition.
double ReferenceLikelihood(const PlsaModel& model, const RequestMatrix& n) {
  double total = 0.0;
  for (int k = 0; k < n.num_users(); ++k) {
    for (int f = 0; f < n.num_files(); ++f) {
      const int64_t c = n.count(k, f);
      if (c == 0) continue;
      double q = 0.0;
      for (int j = 0; j < model.num_topics; ++j) {
        q += model.file_given_topic(j, f) * model.topic_pref(k, j);
      }
      total += c * std::log(model.active[k] * q);
    }
  }
  return total;
}

// One dense EM iteration, materializing the full posterior tensor.
PlsaModel ReferenceStep(const PlsaModel& model, const RequestMatrix& n,
                        bool learn_topic_pref) {
  const int users = n.num_users(), files = n.num_files(), topics = model.num_topics;
  std::vector<double> post(static_cast<size_t>(users) * files * topics, 0.0);
  auto at = [&](int k, int f, int j) -> double& {
    return post[(static_cast<size_t>(k) * files + f) * topics + j];
  };
  for (int k = 0; k < users; ++k) {
    for (int f = 0; f < files; ++f) {
      double denom = 0.0;
      for (int j = 0; j < topics; ++j) {
        denom += model.file_given_topic(j, f) * model.topic_pref(k, j);
      }
      if (denom == 0.0) continue;
      for (int j = 0; j < topics; ++j) {
        at(k, f, j) = model.file_given_topic(j, f) * model.topic_pref(k, j) / denom;
      }
    }
  }
  PlsaModel next = model;
  for (int j = 0; j < topics; ++j) {
    double s = 0.0;
    for (int f = 0; f < files; ++f) {
      double v = 0.0;
      for (int k = 0; k < users; ++k) v += n.count(k, f) * at(k, f, j);
      next.file_given_topic(j, f) = v;
      s += v;
    }
    for (int f = 0; f < files; ++f) next.file_given_topic(j, f) /= s;
  }
  if (learn_topic_pref) {
    for (int k = 0; k < users; ++k) {
      for (int j = 0; j < topics; ++j) {
        double v = 0.0;
        for (int f = 0; f < files; ++f) v += n.count(k, f) * at(k, f, j);
        next.topic_pref(k, j) = v / n.user_total(k);
      }
    }
  }
  return next;
}

void ExpectModelsNear(const PlsaModel& a, const PlsaModel& b, double tol) {
  ASSERT_EQ(a.num_topics, b.num_topics);
  for (int k = 0; k < a.num_users(); ++k) {
    for (int j = 0; j < a.num_topics; ++j) {
      ASSERT_NEAR(a.topic_pref(k, j), b.topic_pref(k, j), tol);
    }
  }
  for (int j = 0; j < a.num_topics; ++j) {
    for (int f = 0; f < a.num_files(); ++f) {
      ASSERT_NEAR(a.file_given_topic(j, f), b.file_given_topic(j, f), tol);
    }
  }
}

TEST(LikelihoodTest, SingleTopicHandInstance) {
  PlsaModel model;
  model.num_topics = 1;
  model.active = {0.75, 0.25};
  model.topic_pref = Matrix(2, 1, 1.0);
  model.file_given_topic = Matrix(1, 2);
  model.file_given_topic(0, 0) = 0.6;
  model.file_given_topic(0, 1) = 0.4;
  auto n = RequestMatrix::FromDense({{2, 1}, {0, 1}});
  auto l = LogLikelihood(model, *n);
  ASSERT_TRUE(l.ok());
  const double expected =
      2 * std::log(0.75 * 0.6) + std::log(0.75 * 0.4) + std::log(0.25 * 0.4);
  EXPECT_NEAR(l->value, expected, 1e-14);
  EXPECT_FALSE(l->minus_infinity);
}

TEST(LikelihoodTest, PerfectFitIsZero) {
  PlsaModel model;
  model.num_topics = 1;
  model.active = {1.0, 0.0};
  model.topic_pref = Matrix(2, 1, 1.0);
  model.file_given_topic = Matrix(1, 3);
  model.file_given_topic(0, 2) = 1.0;
  RequestMatrix n(2, 3);
  n.Add(0, 2);
  EXPECT_EQ(LogLikelihood(model, n)->value, 0.0);
}

TEST(LikelihoodTest, FlagsUnexplainedCell) {
  PlsaModel model;
  model.num_topics = 1;
  model.active = {1.0};
  model.topic_pref = Matrix(1, 1, 1.0);
  model.file_given_topic = Matrix(1, 2);
  model.file_given_topic(0, 0) = 1.0;
  RequestMatrix n(1, 2);
  n.Add(0, 1);
  auto l = LogLikelihood(model, n);
  ASSERT_TRUE(l.ok());
  EXPECT_TRUE(l->minus_infinity);
  EXPECT_EQ(l->user, 0);
  EXPECT_EQ(l->file, 1);
}

TEST(EstimateActiveTest, HandCounts) {
  auto n = RequestMatrix::FromDense({{3, 0}, {1, 0}});
  EXPECT_EQ(*EstimateActive(*n), (std::vector<double>{0.75, 0.25}));
  auto single = RequestMatrix::FromDense({{0, 0}, {0, 4}, {0, 0}});
  EXPECT_EQ(*EstimateActive(*single), (std::vector<double>{0, 1, 0}));

  std::mt19937_64 gen(1);
  RequestMatrix r = RandomRequests(gen, 7, 9, 0.3, 5);
  EXPECT_EQ(*EstimateActive(r), MlEstimates(r)->profile.active);
  EXPECT_FALSE(EstimateActive(RequestMatrix(2, 2)).ok());
}

TEST(EmFitTest, SingleTopicClosedForm) {
  std::mt19937_64 gen(2);
  RequestMatrix n = RandomRequests(gen, 6, 10, 0.4, 7);
  for (uint64_t seed : {1u, 2u, 3u}) {
    auto fit = EmFit(n, {.num_topics = 1, .seed = seed, .max_iterations = 1});
    ASSERT_TRUE(fit.ok());
    for (int f = 0; f < 10; ++f) {
      EXPECT_NEAR(fit->model.file_given_topic(0, f),
                  static_cast<double>(n.file_total(f)) / n.total(), 1e-14);
    }
  }
}

TEST(EmFitTest, MatchesDenseReferenceIterations) {
  std::mt19937_64 gen(3);
  for (int z : {1, 2, 4}) {
    RequestMatrix n = RandomRequests(gen, 8, 12, 0.35, 6);
    std::vector<PlsaModel> models;
    EmConfig config{.num_topics = z, .seed = 5, .tolerance = 1e-12,
                    .max_iterations = 15};
    auto fit = EmFit(n, config, nullptr,
                     [&](const PlsaModel& m) { models.push_back(m); });
    ASSERT_TRUE(fit.ok());
    ASSERT_GE(models.size(), 2u);
    for (size_t i = 1; i < models.size(); ++i) {
      ExpectModelsNear(ReferenceStep(models[i - 1], n, true), models[i], 1e-12);
      EXPECT_NEAR(fit->likelihood_trace[i + 1], ReferenceLikelihood(models[i], n),
                  1e-9);
    }
  }
}

TEST(EmFitTest, LikelihoodMonotoneAndModelsStochastic) {
  std::mt19937_64 gen(4);
  for (int trial = 0; trial < 10; ++trial) {
    RequestMatrix n = RandomRequests(gen, 20, 25, 0.2, 4);
    bool valid = true;
    auto fit = EmFit(n, {.num_topics = 1 + trial % 5, .seed = 7}, nullptr,
                     [&](const PlsaModel& m) { valid = valid && ValidateModel(m).ok(); });
    ASSERT_TRUE(fit.ok());
    EXPECT_TRUE(valid);
    const auto& trace = fit->likelihood_trace;
    ASSERT_EQ(trace.size(), static_cast<size_t>(fit->iterations) + 1);
    for (size_t i = 1; i < trace.size(); ++i) EXPECT_GE(trace[i], trace[i - 1] - 1e-9);
  }
}

TEST(EmFitTest, SeparableInstanceRecoversFrequencies) {
  // Two users with disjoint supports: with two topics, EM can explain each
  // user with its own topic and then reproduces the frequency estimates.
  auto n = RequestMatrix::FromDense({{5, 3, 2, 0, 0, 0}, {0, 0, 0, 1, 4, 5}});
  auto ml = MlEstimates(*n);
  auto fit = EmFit(*n, {.num_topics = 2, .seed = 1, .tolerance = 1e-13,
                        .max_iterations = 5000});
  ASSERT_TRUE(fit.ok());
  DemandProfile learned = PredictPreferences(fit->model);
  for (int k = 0; k < 2; ++k) {
    EXPECT_NEAR(learned.active[k], ml->profile.active[k], 1e-15);
    for (int f = 0; f < 6; ++f) {
      EXPECT_NEAR(learned.preference(k, f), ml->profile.preference(k, f), 1e-6);
    }
  }
}

TEST(EmFitTest, DeterministicForSeed) {
  std::mt19937_64 gen(5);
  RequestMatrix n = RandomRequests(gen, 10, 15, 0.3, 5);
  auto a = EmFit(n, {.num_topics = 3, .seed = 9});
  auto b = EmFit(n, {.num_topics = 3, .seed = 9});
  EXPECT_EQ(a->likelihood_trace, b->likelihood_trace);
  EXPECT_EQ(a->model.file_given_topic, b->model.file_given_topic);
}

TEST(EmFitTest, CatalogConfinesTopics) {
  std::mt19937_64 gen(6);
  RequestMatrix n = RandomRequests(gen, 10, 8, 0.5, 5);
  auto catalog = TopicCatalog::Create({"a", "b"}, {{0, 1, 2, 3, 4}, {3, 4, 5, 6, 7}}, 8);
  ASSERT_TRUE(catalog.ok());
  auto fit = EmFit(n, {.num_topics = 2, .seed = 3}, &*catalog);
  ASSERT_TRUE(fit.ok());
  for (int j = 0; j < 2; ++j) {
    for (int f = 0; f < 8; ++f) {
      if (!catalog->Contains(j, f)) EXPECT_EQ(fit->model.file_given_topic(j, f), 0.0);
    }
  }
}

TEST(EmFitTest, Errors) {
  RequestMatrix n(2, 2);
  EXPECT_FALSE(EmFit(n, {}).ok());
  n.Add(0, 0);
  EXPECT_FALSE(EmFit(n, {.num_topics = 0}).ok());
  EXPECT_FALSE(EmFit(n, {.num_topics = 1, .tolerance = 0.0}).ok());
  auto many = EmFit(n, {.num_topics = 3});
  ASSERT_TRUE(many.ok());
  EXPECT_FALSE(many->warnings.empty());
}

TEST(EmFitWeightedTest, AgreesWithCountsWhenWeightsAreCounts) {
  std::mt19937_64 gen(7);
  RequestMatrix n = RandomRequests(gen, 6, 9, 0.4, 5);
  Matrix w(6, 9);
  for (int k = 0; k < 6; ++k) {
    for (int f = 0; f < 9; ++f) w(k, f) = static_cast<double>(n.count(k, f));
  }
  auto a = EmFit(n, {.num_topics = 2, .seed = 4});
  auto b = EmFitWeighted(w, {.num_topics = 2, .seed = 4});
  ASSERT_TRUE(a.ok() && b.ok());
  EXPECT_EQ(a->iterations, b->iterations);
  ExpectModelsNear(a->model, b->model, 1e-12);
}

TEST(PredictTest, Identities) {
  PlsaModel model;
  model.num_topics = 2;
  model.active = {0.5, 0.5};
  model.topic_pref = Matrix(2, 2);
  model.topic_pref(0, 1) = 1.0;
  model.topic_pref(1, 0) = 0.3;
  model.topic_pref(1, 1) = 0.7;
  model.file_given_topic = Matrix(2, 3);
  model.file_given_topic(0, 0) = 0.5;
  model.file_given_topic(0, 1) = 0.5;
  model.file_given_topic(1, 2) = 0.9;
  model.file_given_topic(1, 0) = 0.1;
  DemandProfile q = PredictPreferences(model);
  EXPECT_EQ(q.preference(0, 0), 0.1);
  EXPECT_EQ(q.preference(0, 1), 0.0);
  EXPECT_EQ(q.preference(0, 2), 0.9);
  for (int k = 0; k < 2; ++k) {
    double s = 0.0;
    for (double v : q.preference.row(k)) s += v;
    EXPECT_NEAR(s, 1.0, 1e-10);
  }
  std::vector<double> post = TopicPosterior(model, 1, 0);
  EXPECT_NEAR(post[0], 0.15 / (0.15 + 0.07), 1e-15);
  EXPECT_NEAR(post[1], 0.07 / (0.15 + 0.07), 1e-15);
  EXPECT_EQ(TopicPosterior(model, 0, 1), (std::vector<double>{0.0, 0.0}));

  model.num_topics = 1;
  model.topic_pref = Matrix(2, 1, 1.0);
  model.file_given_topic = Matrix(1, 3, 1.0 / 3);
  DemandProfile same = PredictPreferences(model);
  EXPECT_EQ(same.preference.row(0)[1], same.preference.row(1)[1]);
}

TEST(TopicCatalogTest, Validation) {
  EXPECT_TRUE(TopicCatalog::Create({"a", "b"}, {{0, 1}, {1, 2}}, 3).ok());
  EXPECT_FALSE(TopicCatalog::Create({"a", "b"}, {{0}, {1}}, 3).ok());      // file 2 orphaned
  EXPECT_FALSE(TopicCatalog::Create({"a", "b"}, {{0, 1, 2}, {}}, 3).ok()); // empty topic
  EXPECT_FALSE(TopicCatalog::Create({"a"}, {{0, 3}}, 3).ok());             // out of range
  EXPECT_FALSE(TopicCatalog::Create({"a"}, {{0, 1}, {2}}, 3).ok());        // label count
  TopicCatalog all = TopicCatalog::Unrestricted(2, 3);
  EXPECT_TRUE(all.Contains(1, 2));
  EXPECT_EQ(all.files(0), (std::vector<int>{0, 1, 2}));
}

PriorKnowledge OneHotPrior(const std::vector<int>& topic_of_user, int topics,
                           const TopicCatalog& catalog) {
  PriorKnowledge prior;
  prior.topic_pref = Matrix(static_cast<int>(topic_of_user.size()), topics);
  for (size_t k = 0; k < topic_of_user.size(); ++k) {
    prior.topic_pref(static_cast<int>(k), topic_of_user[k]) = 1.0;
  }
  prior.catalog = catalog;
  return prior;
}

TEST(PriorFitTest, OneHotTopicsGiveGroupFrequencies) {
  // With one-hot topic preferences every posterior is an indicator, so the
  // fit converges in one step to the request frequencies of each group.
  std::mt19937_64 gen(8);
  RequestMatrix n = RandomRequests(gen, 6, 10, 0.5, 5);
  const std::vector<int> group = {0, 1, 0, 2, 1, 0};
  PriorKnowledge prior = OneHotPrior(group, 3, TopicCatalog::Unrestricted(3, 10));
  auto fit = PriorFit(n, prior, {.num_topics = 3, .seed = 2});
  ASSERT_TRUE(fit.ok());
  for (int j = 0; j < 3; ++j) {
    double total = 0.0;
    std::vector<double> counts(10, 0.0);
    for (int k = 0; k < 6; ++k) {
      if (group[k] != j) continue;
      for (int f = 0; f < 10; ++f) counts[f] += n.count(k, f);
      total += n.user_total(k);
    }
    for (int f = 0; f < 10; ++f) {
      EXPECT_NEAR(fit->model.file_given_topic(j, f), counts[f] / total, 1e-14);
    }
  }
  EXPECT_LE(fit->iterations, 2);
}

TEST(PriorFitTest, MatchesDenseReferenceWithFrozenTopics) {
  std::mt19937_64 gen(9);
  RequestMatrix n = RandomRequests(gen, 7, 9, 0.4, 5);
  PriorKnowledge prior;
  prior.topic_pref = Matrix(7, 3);
  for (int k = 0; k < 7; ++k) {
    std::vector<double> row = testing::RandomSimplex(gen, 3);
    std::copy(row.begin(), row.end(), prior.topic_pref.row(k).begin());
  }
  prior.catalog = TopicCatalog::Unrestricted(3, 9);
  std::vector<PlsaModel> models;
  auto fit = PriorFit(n, prior, {.num_topics = 3, .seed = 1, .tolerance = 1e-12,
                                 .max_iterations = 10},
                      [&](const PlsaModel& m) { models.push_back(m); });
  ASSERT_TRUE(fit.ok());
  for (size_t i = 1; i < models.size(); ++i) {
    ExpectModelsNear(ReferenceStep(models[i - 1], n, false), models[i], 1e-12);
    EXPECT_EQ(models[i].topic_pref, prior.topic_pref);
  }
  const auto& trace = fit->likelihood_trace;
  for (size_t i = 1; i < trace.size(); ++i) EXPECT_GE(trace[i], trace[i - 1] - 1e-9);
}

TEST(PriorFitTest, ZeroOutsideAllowedTopics) {
  auto n = RequestMatrix::FromDense({{3, 1, 0, 0}, {0, 0, 2, 2}, {1, 0, 0, 1}});
  auto catalog = TopicCatalog::Create({"x", "y"}, {{0, 1}, {2, 3}}, 4);
  ASSERT_TRUE(catalog.ok());
  PriorKnowledge prior;
  prior.topic_pref = Matrix(3, 2);
  prior.topic_pref(0, 0) = 1.0;
  prior.topic_pref(1, 1) = 1.0;
  prior.topic_pref(2, 0) = prior.topic_pref(2, 1) = 0.5;
  prior.catalog = *catalog;
  auto fit = PriorFit(*n, prior, {.num_topics = 2});
  ASSERT_TRUE(fit.ok());
  EXPECT_EQ(fit->profile.preference(0, 2), 0.0);
  EXPECT_EQ(fit->profile.preference(0, 3), 0.0);
  EXPECT_EQ(fit->profile.preference(1, 0), 0.0);
  EXPECT_EQ(fit->profile.preference(1, 1), 0.0);
  EXPECT_GT(fit->profile.preference(2, 3), 0.0);
  EXPECT_FALSE(fit->zero_cell.has_value());
}

TEST(PriorFitTest, ReportsCellTheTopicsCannotExplain) {
  auto n = RequestMatrix::FromDense({{1, 1}});
  auto catalog = TopicCatalog::Create({"x", "y"}, {{0}, {1}}, 2);
  PriorKnowledge prior;
  prior.topic_pref = Matrix(1, 2);
  prior.topic_pref(0, 0) = 1.0;
  prior.catalog = *catalog;
  auto fit = PriorFit(*n, prior, {.num_topics = 2});
  ASSERT_TRUE(fit.ok());
  ASSERT_TRUE(fit->zero_cell.has_value());
  EXPECT_EQ(fit->zero_cell->file, 1);
}

TEST(PriorFitTest, KnownActiveLevelsAreKept) {
  auto n = RequestMatrix::FromDense({{1, 2}, {3, 0}});
  PriorKnowledge prior;
  prior.topic_pref = Matrix(2, 1, 1.0);
  prior.catalog = TopicCatalog::Unrestricted(1, 2);
  prior.active = std::vector<double>{0.3, 0.7};
  auto fit = PriorFit(*n, prior, {.num_topics = 1});
  ASSERT_TRUE(fit.ok());
  EXPECT_EQ(fit->profile.active, (std::vector<double>{0.3, 0.7}));
  prior.active = std::vector<double>{1.0};
  EXPECT_FALSE(PriorFit(*n, prior, {.num_topics = 1}).ok());
}

TEST(PriorFitTest, ConvergesFasterThanFullEm) {
  SynthesisParams params{.num_files = 200, .num_users = 30, .alpha = 0.36,
                         .beta = 0.6, .seed = 4};
  auto demand = SynthesizeDemand(params);
  ASSERT_TRUE(demand.ok());
  Matrix joint(30, 200);
  for (int k = 0; k < 30; ++k) {
    for (int f = 0; f < 200; ++f) {
      joint(k, f) = demand->profile.active[k] * demand->profile.preference(k, f);
    }
  }
  auto oracle = EmFitWeighted(joint, {.num_topics = 5, .seed = 1});
  ASSERT_TRUE(oracle.ok());
  std::mt19937_64 gen(10);
  std::discrete_distribution<int> draw(joint.data().begin(), joint.data().end());
  RequestMatrix n(30, 200);
  for (int i = 0; i < 3000; ++i) {
    const int cell = draw(gen);
    n.Add(cell / 200, cell % 200);
  }
  PriorKnowledge prior{.topic_pref = oracle->model.topic_pref,
                       .catalog = CatalogFromModel(oracle->model, 0.0),
                       .active = std::nullopt};
  EmConfig config{.num_topics = 5, .seed = 2, .tolerance = 1e-4};
  auto em = EmFit(n, config);
  auto pf = PriorFit(n, prior, config);
  ASSERT_TRUE(em.ok() && pf.ok());
  EXPECT_LT(pf->iterations, em->iterations);
}

TEST(BaselineTest, FrequencyCounts) {
  auto n = RequestMatrix::FromDense({{2, 0}, {0, 2}});
  auto fit = BaselineFit(*n);
  ASSERT_TRUE(fit.ok());
  EXPECT_EQ(fit->active, (std::vector<double>{0.5, 0.5}));
  EXPECT_EQ(fit->preference(0, 1), 0.0);
  EXPECT_EQ(fit->preference(1, 1), 1.0);

  std::mt19937_64 gen(11);
  RequestMatrix r = RandomRequests(gen, 8, 20, 0.2, 3);
  auto random_fit = BaselineFit(r);
  for (int k = 0; k < 8; ++k) {
    for (int f = 0; f < 20; ++f) {
      if (r.count(k, f) == 0) EXPECT_EQ(random_fit->preference(k, f), 0.0);
    }
  }
}

TEST(ParameterCountTest, Values) {
  EXPECT_EQ(BaselineParameterCount(100, 3000), 300000);
  EXPECT_EQ(PlsaParameterCount(100, 3000, 20), 20 * 3100 + 100);
  EXPECT_LT(PlsaParameterCount(6040, 3952, 18), BaselineParameterCount(6040, 3952));
}

TEST(CatalogFromModelTest, ThresholdAndFallback) {
  PlsaModel model;
  model.num_topics = 2;
  model.active = {1.0};
  model.topic_pref = Matrix(1, 2, 0.5);
  model.file_given_topic = Matrix(2, 3);
  model.file_given_topic(0, 0) = 0.9;
  model.file_given_topic(0, 1) = 0.1;
  model.file_given_topic(1, 1) = 0.2;
  model.file_given_topic(1, 2) = 0.8;
  TopicCatalog c = CatalogFromModel(model, 0.5);
  EXPECT_EQ(c.files(0), (std::vector<int>{0}));
  // File 1 clears neither threshold and falls back to its likelier topic.
  EXPECT_EQ(c.files(1), (std::vector<int>{1, 2}));
}

}  // namespace
}  // namespace prefcache
