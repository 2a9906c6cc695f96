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

// Acceptance suite: one PASS/FAIL/SKIP line per criterion. Exits non-zero
// when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "prefcache/curve_fit.h"
#include "prefcache/dataset.h"
#include "prefcache/demand_model.h"
#include "prefcache/experiment.h"
#include "prefcache/learner.h"
#include "prefcache/mobility.h"
#include "prefcache/optimizer.h"
#include "test_util.h"

namespace prefcache {
namespace {

namespace fs = std::filesystem;
using ::prefcache::testing::RandomCaching;
using ::prefcache::testing::RandomContacts;
using ::prefcache::testing::RandomProfile;
using ::prefcache::testing::RandomRequests;
using ::prefcache::testing::RandomSimplex;
using ::prefcache::testing::ReferenceOffloading;
using ::prefcache::testing::ReferenceOptimum;
using ::prefcache::testing::ToBits;

enum class Outcome { kPass, kFail, kSkip };

struct Verdict {
  Outcome outcome = Outcome::kFail;
  std::string detail;
};

Verdict Pass(std::string detail) { return {Outcome::kPass, std::move(detail)}; }
Verdict Fail(std::string detail) { return {Outcome::kFail, std::move(detail)}; }
Verdict Check(bool ok, std::string detail) {
  return {ok ? Outcome::kPass : Outcome::kFail, std::move(detail)};
}

double Seconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// 1. Greedy and alternating against exhaustive search on tiny instances.
Verdict OracleOptimality() {
  std::mt19937_64 gen(20260101);
  std::uniform_int_distribution<int> users(2, 4), files(3, 5);
  int greedy_exact = 0, alternating_exact = 0;
  double worst_ratio = 1.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int k = users(gen), f = files(gen);
    const DemandProfile profile = RandomProfile(gen, k, f);
    const ContactMatrix contacts = RandomContacts(gen, k);
    const double opt = ReferenceOptimum(profile, contacts.a, 1);
    auto brute = BruteForceOptimize(profile, contacts, 1);
    auto greedy = GreedyOptimize(profile, contacts, 1);
    auto alt = AlternatingOptimize(profile, contacts, 1,
                                   {.seed = static_cast<uint64_t>(trial)});
    if (!brute.ok() || !greedy.ok() || !alt.ok()) return Fail("optimizer error");
    if (std::fabs(brute->objective - opt) > 1e-12) {
      return Fail(absl::StrCat("brute force disagrees with enumeration in instance ", trial));
    }
    const double g = ReferenceOffloading(profile, contacts.a, ToBits(greedy->caching));
    const double a = ReferenceOffloading(profile, contacts.a, ToBits(alt->caching));
    worst_ratio = std::min({worst_ratio, g / opt, a / opt});
    greedy_exact += opt - g <= 1e-9;
    alternating_exact += opt - a <= 1e-9;
  }
  // Both conditions gate: the half-optimum bound in every instance and at
  // least 95 exact optima per algorithm.
  const bool ok = worst_ratio >= 0.5 && greedy_exact >= 95 && alternating_exact >= 95;
  return Check(ok, absl::StrFormat(
                       "worst ratio to optimum %.4f (bound 0.5 %s); exactly optimal: greedy "
                       "%d/100, alternating %d/100 (95 expected)",
                       worst_ratio, worst_ratio >= 0.5 ? "holds" : "violated",
                       greedy_exact, alternating_exact));
}

// 2. Popularity-only objective equals the full objective in the two
// degenerate cases.
Verdict IdentityChecks() {
  std::mt19937_64 gen(2);
  double worst_uniform = 0.0, worst_full = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int k = 2 + trial % 7, f = 3 + trial % 11;
    PopularityVector p{RandomSimplex(gen, f)};
    ContactMatrix contacts = RandomContacts(gen, k);
    CachingMatrix c = RandomCaching(gen, k, f, 1 + trial % 3);
    const double full = *OffloadingProbability(UniformProfile(p, k), contacts, c);
    worst_uniform = std::max(worst_uniform,
                             std::fabs(full - *PopularityOffloading(p, contacts, c)));
  }
  for (int trial = 0; trial < 50; ++trial) {
    const int k = 2 + trial % 7, f = 3 + trial % 11;
    DemandProfile profile = RandomProfile(gen, k, f);
    ContactMatrix ones = ContactMatrix::AllOnes(k);
    CachingMatrix c = RandomCaching(gen, k, f, 1 + trial % 3);
    const double full = *OffloadingProbability(profile, ones, c);
    const double pop = *PopularityOffloading(AggregatePopularity(profile), ones, c);
    worst_full = std::max(worst_full, std::fabs(full - pop));
  }
  return Check(worst_uniform <= 1e-12 && worst_full <= 1e-12,
               absl::StrFormat("max deviation: uniform-identical %.2e, full contact %.2e",
                               worst_uniform, worst_full));
}

// 3. EM and prior-fit log-likelihood never decreases; parameters stay
// stochastic after every iteration.
Verdict EmMonotonicity() {
  std::mt19937_64 gen(3);
  std::uniform_int_distribution<int> dim(2, 30);
  const int topic_choices[] = {1, 2, 5};
  double worst_drop = 0.0;
  int invalid = 0, iterations = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const int k = dim(gen), f = dim(gen);
    const int z = topic_choices[trial % 3];
    RequestMatrix n = RandomRequests(gen, k, f, 0.3, 5);
    const EmConfig config{.num_topics = z, .seed = static_cast<uint64_t>(trial),
                          .tolerance = 1e-10, .max_iterations = 300};
    auto observe = [&](const PlsaModel& m) {
      invalid += !ValidateModel(m).ok();
    };
    auto em = EmFit(n, config, nullptr, observe);
    if (!em.ok()) return Fail(absl::StrCat("EM failed: ", em.status().ToString()));

    PriorKnowledge prior;
    prior.topic_pref = Matrix(k, z);
    for (int u = 0; u < k; ++u) {
      std::vector<double> row = RandomSimplex(gen, z);
      std::copy(row.begin(), row.end(), prior.topic_pref.row(u).begin());
    }
    prior.catalog = TopicCatalog::Unrestricted(z, f);
    auto fit = PriorFit(n, prior, config, observe);
    if (!fit.ok()) return Fail(absl::StrCat("prior fit failed: ", fit.status().ToString()));

    for (const auto* trace : {&em->likelihood_trace, &fit->likelihood_trace}) {
      for (size_t i = 1; i < trace->size(); ++i) {
        worst_drop = std::max(worst_drop, (*trace)[i - 1] - (*trace)[i]);
        ++iterations;
      }
    }
  }
  return Check(worst_drop <= 1e-9 && invalid == 0,
               absl::StrFormat("%d iterations; largest decrease %.2e; invalid models %d",
                               iterations, std::max(worst_drop, 0.0), invalid));
}

// 4. Column sums of the synthetic joint reproduce Zipf; alpha = 1 collapses
// every preference onto it.
Verdict SyntheticIdentities() {
  double worst_sum = 0.0;
  const double alphas[] = {0.05, 0.2, 0.36, 0.7, 1.0};
  const double betas[] = {0.0, 0.6, 1.2};
  int cases = 0;
  for (double alpha : alphas) {
    for (double beta : betas) {
      for (int k : {2, 30, 100}) {
        const int f = 50 + 37 * cases % 900;
        auto demand = SynthesizeDemand({.num_files = f, .num_users = k, .alpha = alpha,
                                        .beta = beta, .seed = static_cast<uint64_t>(cases)});
        if (!demand.ok()) return Fail(demand.status().ToString());
        auto zipf = ZipfPopularity(f, beta);
        const PopularityVector p = AggregatePopularity(demand->profile);
        for (int i = 0; i < f; ++i) {
          worst_sum = std::max(worst_sum, std::fabs(p.p[i] - zipf->p[i]));
        }
        ++cases;
      }
    }
  }
  auto flat = SynthesizeDemand({.num_files = 3000, .num_users = 100, .alpha = 1.0,
                                .beta = 0.6, .seed = 1});
  auto zipf = ZipfPopularity(3000, 0.6);
  double worst_row = 0.0;
  for (int k = 0; k < 100; ++k) {
    for (int f = 0; f < 3000; ++f) {
      worst_row = std::max(worst_row, std::fabs(flat->profile.preference(k, f) - zipf->p[f]));
    }
  }
  const double sim = *AverageSimilarity(flat->profile.preference);
  return Check(worst_sum <= 1e-12 && worst_row <= 1e-12 && std::fabs(sim - 1.0) <= 1e-12,
               absl::StrFormat("%d profiles: max |sum_k w_k q - p| %.2e; alpha=1: max "
                               "|q_k - p| %.2e, similarity %.15f",
                               cases, worst_sum, worst_row, sim));
}

// 5. Incremental gains against direct differences, and diminishing returns.
Verdict GainCorrectness() {
  std::mt19937_64 gen(5);
  std::bernoulli_distribution coin(0.35);
  double worst = 0.0;
  for (int probe = 0; probe < 200; ++probe) {
    const int k = 2 + probe % 6, f = 3 + probe % 9;
    DemandProfile profile = RandomProfile(gen, k, f);
    ContactMatrix contacts = RandomContacts(gen, k);
    CachingMatrix c(k, f, f);
    for (int u = 0; u < k; ++u) {
      for (int i = 0; i < f; ++i) c.Set(u, i, coin(gen));
    }
    std::uniform_int_distribution<int> pu(0, k - 1), pf(0, f - 1);
    int m = pu(gen), file = pf(gen);
    c.Set(m, file, false);
    CachingMatrix with = c;
    with.Set(m, file, true);
    const double direct = ReferenceOffloading(profile, contacts.a, ToBits(with)) -
                          ReferenceOffloading(profile, contacts.a, ToBits(c));
    worst = std::max(worst, std::fabs(*IncrementalGain(profile, contacts, c, m, file) - direct));
  }
  int violations = 0;
  for (int probe = 0; probe < 200; ++probe) {
    const int k = 2 + probe % 5, f = 3 + probe % 7;
    DemandProfile profile = RandomProfile(gen, k, f);
    ContactMatrix contacts = RandomContacts(gen, k);
    CachingMatrix small(k, f, f), large(k, f, f);
    for (int u = 0; u < k; ++u) {
      for (int i = 0; i < f; ++i) {
        const bool in = coin(gen);
        small.Set(u, i, in);
        large.Set(u, i, in || coin(gen));
      }
    }
    std::uniform_int_distribution<int> pu(0, k - 1), pf(0, f - 1);
    int m = pu(gen), file = pf(gen);
    small.Set(m, file, false);
    large.Set(m, file, false);
    const double g_small = *IncrementalGain(profile, contacts, small, m, file);
    const double g_large = *IncrementalGain(profile, contacts, large, m, file);
    violations += g_small + 1e-15 < g_large;
  }
  return Check(worst <= 1e-12 && violations == 0,
               absl::StrFormat("max gain error %.2e over 200 probes; %d diminishing-returns "
                               "violations in 200 nested pairs",
                               worst, violations));
}

// 6. Desk-scale learning curves.
Verdict DeskScaleGap() {
  Scenario s;
  s.num_users = 50;
  s.num_files = 500;
  s.cache_size = 5;
  s.alpha = 0.36;
  s.beta = 0.6;
  s.r_c_m = 30.0;
  s.v_max_mps = 0.0;
  s.schemes = {Scheme::kS1Perfect, Scheme::kS2Perfect, Scheme::kS1Em, Scheme::kS1Prior};
  s.checkpoints.clear();
  // Half-octave grid from 250 to 64000 accumulated requests.
  for (int i = 0; i <= 16; ++i) {
    s.checkpoints.push_back(std::llround(250.0 * std::pow(2.0, i / 2.0)));
  }
  const int kSeeds = 5;
  std::map<Scheme, std::vector<double>> mean;
  for (int seed = 1; seed <= kSeeds; ++seed) {
    s.seed = static_cast<uint64_t>(seed);
    auto run = RunScenario(s);
    if (!run.ok()) return Fail(run.status().ToString());
    for (const SchemeResult& r : run->results) {
      auto& curve = mean[r.scheme];
      curve.resize(r.checkpoints.size(), 0.0);
      for (size_t i = 0; i < r.checkpoints.size(); ++i) {
        curve[i] += r.checkpoints[i].offloading_probability / kSeeds;
      }
    }
  }
  const double gap = mean[Scheme::kS1Perfect][0] - mean[Scheme::kS2Perfect][0];
  const double em_final = mean[Scheme::kS1Em].back();
  const double target = em_final - 0.02;
  auto first_reaching = [&](const std::vector<double>& curve) -> int64_t {
    for (size_t i = 0; i < curve.size(); ++i) {
      if (curve[i] >= target) return s.checkpoints[i];
    }
    return -1;
  };
  const int64_t em_needs = first_reaching(mean[Scheme::kS1Em]);
  const int64_t prior_needs = first_reaching(mean[Scheme::kS1Prior]);
  const bool ok = gap >= 0.05 && prior_needs > 0 && 2 * prior_needs <= em_needs;
  return Check(ok, absl::StrFormat(
                       "mean of %d seeds: S1-perfect %.4f, S2-perfect %.4f (gap %.4f); "
                       "S1-EM final %.4f; requests to reach %.4f: S1-prior %d, S1-EM %d",
                       kSeeds, mean[Scheme::kS1Perfect][0], mean[Scheme::kS2Perfect][0],
                       gap, em_final, target, prior_needs, em_needs));
}

struct SpeedRun {
  double greedy_seconds = 0.0;
  double alternating_seconds = 0.0;
  double greedy_objective = 0.0;
  double alternating_objective = 0.0;
  int sweeps = 0;
  std::string error;
};

SpeedRun MeasureSpeed() {
  SpeedRun out;
  auto demand = SynthesizeDemand({.num_files = 1000, .num_users = 100, .alpha = 0.36,
                                  .beta = 0.6, .seed = 1});
  if (!demand.ok()) {
    out.error = demand.status().ToString();
    return out;
  }
  const ContactMatrix contacts =
      StaticContacts(UniformPositions(100, 500.0, 1), 30.0);
  // Best of several repetitions for each algorithm.
  out.greedy_seconds = out.alternating_seconds = 1e300;
  for (int rep = 0; rep < 5; ++rep) {
    auto start = std::chrono::steady_clock::now();
    auto greedy = GreedyOptimize(demand->profile, contacts, 5);
    out.greedy_seconds = std::min(out.greedy_seconds, Seconds(start));
    start = std::chrono::steady_clock::now();
    auto alt = AlternatingOptimize(demand->profile, contacts, 5, {.seed = 1});
    out.alternating_seconds = std::min(out.alternating_seconds, Seconds(start));
    if (!greedy.ok() || !alt.ok()) {
      out.error = "optimizer error";
      return out;
    }
    out.greedy_objective = *OffloadingProbability(demand->profile, contacts, greedy->caching);
    out.alternating_objective = *OffloadingProbability(demand->profile, contacts, alt->caching);
    out.sweeps = alt->report.iterations;
  }
  return out;
}

// 7. Alternating is at least ten times faster and about as good.
Verdict SpeedOrdering(const SpeedRun& run) {
  if (!run.error.empty()) return Fail(run.error);
  const double ratio = run.alternating_seconds / run.greedy_seconds;
  const double diff = std::fabs(run.greedy_objective - run.alternating_objective);
  return Check(ratio <= 0.1 && diff <= 1e-3,
               absl::StrFormat("greedy %.4f s, alternating %.4f s (ratio %.3f); objectives "
                               "%.6f vs %.6f",
                               run.greedy_seconds, run.alternating_seconds, ratio,
                               run.greedy_objective, run.alternating_objective));
}

// 8. Sweeps to convergence, counting the final sweep without changes.
Verdict ConvergenceCount(const SpeedRun& run) {
  if (!run.error.empty()) return Fail(run.error);
  return Check(run.sweeps <= 5, absl::StrCat(run.sweeps, " sweeps"));
}

// 9. Full MovieLens-1M statistics, when the archive is available.
Verdict MovieLens() {
  const char* dir = std::getenv("PREFCACHE_MOVIELENS_DIR");
  if (dir == nullptr || *dir == '\0') {
    return {Outcome::kSkip, "PREFCACHE_MOVIELENS_DIR not set (offline)"};
  }
  auto movies = ReadMoviesFile(absl::StrCat(dir, "/movies.dat"));
  auto ratings = ReadRatingsFile(absl::StrCat(dir, "/ratings.dat"));
  if (!movies.ok()) return Fail(movies.status().ToString());
  if (!ratings.ok()) return Fail(ratings.status().ToString());
  auto analysis = AnalyzeMovieLens(*movies, *ratings, AnalysisOptions{});
  if (!analysis.ok()) return Fail(analysis.status().ToString());
  const double power = analysis->fits[static_cast<int>(CurveFamily::kPower)].r_squared;
  const double log = analysis->fits[static_cast<int>(CurveFamily::kLog)].r_squared;
  const double above = analysis->temporal.FractionAbove(0.8);
  const bool ok = analysis->ratings == 1000209 && analysis->max_movie_id == 3952 &&
                  power > log && analysis->active_similarity >= 0.8 &&
                  analysis->active_similarity <= 0.95 && above >= 0.5;
  return Check(ok, absl::StrFormat(
                       "%d ratings, max movie id %d, %d users; R^2 power %.4f vs log "
                       "%.4f; active similarity %.4f; %.1f%% of users above 0.8",
                       analysis->ratings, analysis->max_movie_id, analysis->num_users,
                       power, log, analysis->active_similarity, 100.0 * above));
}

std::map<std::string, std::string> Snapshot(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file()) continue;
    std::ifstream in(entry.path(), std::ios::binary);
    std::stringstream buffer;
    buffer << in.rdbuf();
    files[fs::relative(entry.path(), root).string()] = buffer.str();
  }
  return files;
}

// 10. Every CLI verb, run twice with the same seed, writes identical bytes.
Verdict Determinism() {
#ifndef PREFCACHE_CLI
  return {Outcome::kSkip, "command-line tool not built"};
#else
  const std::string cli = PREFCACHE_CLI;
  const fs::path base = fs::temp_directory_path() / "prefcache_acceptance_determinism";
  fs::remove_all(base);
  const fs::path scenario = base / "scenario.txt";
  fs::create_directories(base);
  std::ofstream(scenario) << "num_users = 15\nnum_files = 120\nnum_topics = 4\n"
                             "v_max_mps = 1\nperiod_s = 600\n"
                             "schemes = S1-perfect,S2-perfect,S1-EM,S2-EM,S1-prior,"
                             "S2-prior,S1-baseline,S2-baseline\n"
                             "checkpoints = 100,400\n";
  std::vector<std::string> commands;
  for (const char* pass : {"a", "b"}) {
    const std::string out = (base / pass).string();
    const std::string q = " --out " + out;
    commands.push_back(cli + " synth --num-users 15 --num-files 120 --seed 3 --requests 800" +
                       q + "/synth");
    commands.push_back(cli + " contacts --num-users 15 --v-max-mps 1 --period-s 600 --seed 3" +
                       q + "/contacts");
    for (const char* algorithm : {"greedy", "alternating"}) {
      commands.push_back(cli + " optimize --profile " + out + "/synth/profile.csv" +
                         " --contacts " + out + "/contacts/contacts.csv --cache-size 3" +
                         " --algorithm " + algorithm + " --seed 3" + q + "/optimize_" +
                         algorithm);
    }
    commands.push_back(cli + " optimize --popularity " + out + "/synth/popularity.csv" +
                       " --contacts " + out + "/contacts/contacts.csv --cache-size 3" +
                       " --policy popularity" + q + "/optimize_popularity");
    commands.push_back(cli + " learn --requests " + out + "/synth/requests.csv" +
                       " --num-users 15 --num-files 120 --method em --num-topics 4 --seed 3" +
                       q + "/learn_em");
    commands.push_back(cli + " learn --requests " + out + "/synth/requests.csv" +
                       " --num-users 15 --num-files 120 --method prior --num-topics 4" +
                       " --prior-model " + out + "/learn_em/model --seed 3" + q +
                       "/learn_prior");
    commands.push_back(cli + " learn --requests " + out + "/synth/requests.csv" +
                       " --num-users 15 --num-files 120 --method baseline" + q +
                       "/learn_baseline");
    commands.push_back(cli + " analyze --offline --trials 5 --seed 3" + q + "/analyze");
    commands.push_back(cli + " run --scenario " + scenario.string() + " --seed 3" + q + "/run");
    commands.push_back(cli + " run --scenario " + scenario.string() +
                       " --offline --set num_users=20 --set num_files=60 --seed 3" + q +
                       "/run_offline");
    commands.push_back(cli + " sweep --scenario " + scenario.string() +
                       " --parameter r_c --values 10,30,60 --seed 3" + q + "/sweep");
  }
  for (const std::string& command : commands) {
    if (std::system((command + " > /dev/null 2>&1").c_str()) != 0) {
      return Fail("command failed: " + command);
    }
  }
  const auto a = Snapshot(base / "a");
  const auto b = Snapshot(base / "b");
  if (a.size() != b.size()) {
    return Fail(absl::StrCat(a.size(), " files vs ", b.size(), " files"));
  }
  for (const auto& [name, bytes] : a) {
    auto it = b.find(name);
    if (it == b.end() || it->second != bytes) return Fail("outputs differ: " + name);
  }
  fs::remove_all(base);
  return Pass(absl::StrCat(commands.size() / 2, " invocations, ", a.size(),
                           " output files byte-identical"));
#endif
}

}  // namespace
}  // namespace prefcache

int main() {
  using namespace prefcache;
  SpeedRun speed;
  bool speed_done = false;
  auto speed_run = [&]() -> const SpeedRun& {
    if (!speed_done) {
      speed = MeasureSpeed();
      speed_done = true;
    }
    return speed;
  };
  struct Criterion {
    const char* name;
    double limit_seconds;  // 0: no stated limit
    std::function<Verdict()> run;
  };
  const std::vector<Criterion> criteria = {
      {"oracle optimality", 10, OracleOptimality},
      {"identity checks", 1, IdentityChecks},
      {"EM monotonicity", 10, EmMonotonicity},
      {"synthetic-model identities", 0, SyntheticIdentities},
      {"gain correctness", 0, GainCorrectness},
      {"desk-scale gap", 300, DeskScaleGap},
      {"speed ordering", 0, [&] { return SpeedOrdering(speed_run()); }},
      {"convergence count", 0, [&] { return ConvergenceCount(speed_run()); }},
      {"MovieLens statistics", 1800, MovieLens},
      {"determinism", 0, Determinism},
  };
  int failed = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v = criteria[i].run();
    const double seconds = Seconds(start);
    if (v.outcome == Outcome::kPass && criteria[i].limit_seconds > 0 &&
        seconds > criteria[i].limit_seconds) {
      v.outcome = Outcome::kFail;
      v.detail += absl::StrFormat("; exceeded %.0f s limit", criteria[i].limit_seconds);
    }
    const char* tag = v.outcome == Outcome::kPass   ? "PASS"
                      : v.outcome == Outcome::kSkip ? "SKIP"
                                                    : "FAIL";
    failed += v.outcome == Outcome::kFail;
    std::printf("[%s] %2zu %s (%.2f s): %s\n", tag, i + 1, criteria[i].name, seconds,
                v.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
