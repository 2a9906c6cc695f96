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

// Experiment scenarios: demand and contacts are built once, requests are
// sampled in batches, learners are refitted at each checkpoint and every
// placement is scored under the true demand.

#ifndef PREFCACHE_EXPERIMENT_H_
#define PREFCACHE_EXPERIMENT_H_

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "prefcache/demand_model.h"
#include "prefcache/mobility.h"
#include "prefcache/optimizer.h"

namespace prefcache {

// S1 designs the placement from (w, Q); S2 from the aggregated popularity.
// The suffix names where the demand knowledge comes from.
enum class Scheme {
  kS1Perfect,
  kS2Perfect,
  kS1Em,
  kS2Em,
  kS1Prior,
  kS2Prior,
  kS1Baseline,
  kS2Baseline,
};

std::string_view SchemeName(Scheme scheme);
absl::StatusOr<Scheme> ParseScheme(std::string_view name);
bool IsPreferenceScheme(Scheme scheme);  // S1-*
bool IsLearningScheme(Scheme scheme);    // not *-perfect

// Where the topic preferences used by the *-prior schemes come from.
enum class PriorMode {
  // A pLSA fit to the exact joint distribution (synthetic data) or to the
  // same users' ratings of other movies (MovieLens).
  kOracle,
  // A pLSA fit to an independent batch of `prior_requests` sampled requests.
  kHistory,
};

struct Scenario {
  int num_users = 100;
  int num_files = 3000;
  int cache_size = 5;
  double r_c_m = 30.0;
  double area_side_m = 500.0;
  double alpha = 0.36;
  double beta = 0.6;
  double v_max_mps = 0.0;
  double period_s = 7200.0;
  double leg_duration_s = 100.0;
  double time_step_s = 1.0;
  int num_topics = 20;
  uint64_t seed = 1;
  std::vector<Scheme> schemes = {Scheme::kS1Perfect, Scheme::kS2Perfect};
  // Accumulated request counts at which every scheme is evaluated.
  std::vector<int64_t> checkpoints = {1000};
  // "synthetic" or "movielens:<directory with ratings.dat and movies.dat>".
  std::string data_source = "synthetic";
  Algorithm algorithm = Algorithm::kAlternating;
  double em_tolerance = 1e-4;
  int em_max_iterations = 1000;
  PriorMode prior_mode = PriorMode::kOracle;
  int64_t prior_requests = 100000;
  // Relative threshold turning a fitted P(f | z) into a topic file set.
  double prior_catalog_threshold = 0.05;
};

absl::Status ValidateScenario(const Scenario& scenario);

// Flat "key = value" text, '#' starts a comment. Keys carry their units:
// num_users, num_files, cache_size, r_c_m, area_side_m, alpha, beta,
// v_max_mps, period_s, leg_duration_s, time_step_s, num_topics, seed,
// schemes (comma list of tags), checkpoints (comma list of request counts),
// data_source, algorithm (greedy|alternating), em_tolerance,
// em_max_iterations, prior_mode (oracle|history), prior_requests,
// prior_catalog_threshold.
absl::StatusOr<Scenario> ParseScenario(std::string_view text);
// Applies one key; used by the parser and for command-line overrides.
absl::Status SetScenarioValue(Scenario& scenario, std::string_view key,
                              std::string_view value);
// Canonical text form, every key in a fixed order.
std::string FormatScenario(const Scenario& scenario);

struct CheckpointResult {
  int64_t requests = 0;
  double offloading_probability = 0.0;
  CachingMatrix caching;
  // EM or prior-fit iterations; 0 for the other schemes.
  int learner_iterations = 0;
  double seconds = 0.0;
};

struct SchemeResult {
  Scheme scheme = Scheme::kS1Perfect;
  std::vector<CheckpointResult> checkpoints;
};

struct ScenarioRun {
  DemandProfile truth;
  ContactMatrix contacts;
  // Realized mean cosine similarity of the true preferences (K >= 2).
  double average_similarity = 0.0;
  int regenerated_users = 0;
  std::vector<SchemeResult> results;
  double seconds = 0.0;
};

absl::StatusOr<ScenarioRun> RunScenario(const Scenario& scenario);

enum class SweepParameter { kAlpha, kBeta, kCacheSize, kCollaborationDistance, kVMax };
absl::StatusOr<SweepParameter> ParseSweepParameter(std::string_view name);
std::string_view SweepParameterName(SweepParameter parameter);

struct SweepRow {
  double value = 0.0;
  double s1 = 0.0;
  double s2 = 0.0;
};

// Runs the perfect-knowledge schemes once per value.
absl::StatusOr<std::vector<SweepRow>> Sweep(const Scenario& scenario,
                                            SweepParameter parameter,
                                            const std::vector<double>& values);

struct EmitOptions {
  // Adds wall-clock seconds to the manifest, which makes reruns differ.
  bool record_timing = false;
};

// Writes <scheme>.csv ("requests,offloading_probability") per scheme and
// manifest.json. With no results only the manifest is written.
absl::Status EmitResults(const Scenario& scenario, const ScenarioRun* run,
                         const std::string& directory, const EmitOptions& options);
// Writes sweep_<parameter>.csv ("value,S1,S2") and manifest.json.
absl::Status EmitSweep(const Scenario& scenario, SweepParameter parameter,
                       const std::vector<SweepRow>& rows, const std::string& directory);

// Library version written into manifests.
std::string_view Version();

}  // namespace prefcache

#endif  // PREFCACHE_EXPERIMENT_H_
