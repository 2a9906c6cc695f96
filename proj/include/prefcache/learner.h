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

// Learning active levels and preferences from request histories.
//
// pLSA factors each user's preference through Z latent topics:
//   P(f | u_k) = sum_j P(f | z_j) P(z_j | u_k),
// and is fitted by EM. The prior-knowledge variant keeps P(z_j | u_k) fixed
// and only learns P(f | z_j), restricted to each topic's known file set.

#ifndef PREFCACHE_LEARNER_H_
#define PREFCACHE_LEARNER_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "prefcache/demand_model.h"
#include "prefcache/matrix.h"

namespace prefcache {

struct PlsaModel {
  int num_topics = 0;
  std::vector<double> active;  // P(u_k)
  Matrix topic_pref;           // K x Z, P(z_j | u_k)
  Matrix file_given_topic;     // Z x F, P(f | z_j)

  int num_users() const { return static_cast<int>(active.size()); }
  int num_files() const { return file_given_topic.cols(); }
};

absl::Status ValidateModel(const PlsaModel& model, double tolerance = 1e-10);

// Files associated with each topic. A file may belong to several topics.
class TopicCatalog {
 public:
  TopicCatalog() = default;

  // Every file in [0, num_files) must belong to at least one topic and every
  // topic must hold at least one file.
  static absl::StatusOr<TopicCatalog> Create(std::vector<std::string> labels,
                                             std::vector<std::vector<int>> files,
                                             int num_files);
  // Every topic contains every file.
  static TopicCatalog Unrestricted(int num_topics, int num_files);

  int num_topics() const { return static_cast<int>(labels_.size()); }
  int num_files() const { return num_files_; }
  const std::vector<std::string>& labels() const { return labels_; }
  // Sorted file ids of topic j.
  const std::vector<int>& files(int topic) const { return files_[topic]; }
  bool Contains(int topic, int file) const {
    return member_[static_cast<size_t>(topic) * num_files_ + file] != 0;
  }

 private:
  std::vector<std::string> labels_;
  std::vector<std::vector<int>> files_;
  std::vector<uint8_t> member_;
  int num_files_ = 0;
};

struct EmConfig {
  int num_topics = 20;
  uint64_t seed = 1;
  // Stop once |L(i) - L(i-1)| <= tolerance.
  double tolerance = 1e-4;
  int max_iterations = 1000;
};

absl::Status ValidateEmConfig(const EmConfig& config);

struct Likelihood {
  double value = 0.0;
  // Set when the model assigns exactly zero probability to an observed cell;
  // `value` then carries the 1e-12 log floor for that cell.
  bool minus_infinity = false;
  int user = -1;
  int file = -1;
};

// sum over observed cells of n_{k,f} log[P(u_k) sum_j P(f|z_j) P(z_j|u_k)].
absl::StatusOr<Likelihood> LogLikelihood(const PlsaModel& model,
                                         const RequestMatrix& requests);

// w_k = n_k / N.
absl::StatusOr<std::vector<double>> EstimateActive(const RequestMatrix& requests);

struct EmResult {
  PlsaModel model;
  // L(0) for the initial parameters followed by one value per iteration.
  std::vector<double> likelihood_trace;
  int iterations = 0;
  bool converged = false;
  // Topics whose M-step numerators vanished and were reset to uniform.
  std::vector<int> reset_topics;
  std::vector<std::string> warnings;
};

// Called after every iteration with the updated model.
using EmObserver = std::function<void(const PlsaModel&)>;

// EM for pLSA. When `catalog` is given, P(f | z_j) is confined to the
// topic's file set, which anchors topic j to catalog label j.
absl::StatusOr<EmResult> EmFit(const RequestMatrix& requests,
                               const EmConfig& config,
                               const TopicCatalog* catalog = nullptr,
                               const EmObserver& observer = {});

// Same as EmFit on real-valued weights, e.g. an exact joint distribution
// P(u_k, f) in place of sampled counts.
absl::StatusOr<EmResult> EmFitWeighted(const Matrix& weights,
                                       const EmConfig& config,
                                       const TopicCatalog* catalog = nullptr);

// Posterior P(z_j | u_k, f) under the current parameters. All zeros when the
// model gives the cell zero probability.
std::vector<double> TopicPosterior(const PlsaModel& model, int user, int file);

// q_{f|k} = sum_j P(f|z_j) P(z_j|u_k), w = P(u_k).
DemandProfile PredictPreferences(const PlsaModel& model);

struct PriorKnowledge {
  Matrix topic_pref;  // K x Z, held fixed
  TopicCatalog catalog;
  // Known active levels; estimated from the requests when absent.
  std::optional<std::vector<double>> active;
};

struct PriorFitResult {
  DemandProfile profile;
  PlsaModel model;
  std::vector<double> likelihood_trace;
  int iterations = 0;
  bool converged = false;
  std::vector<int> reset_topics;
  // Observed cell the fixed topic preferences cannot explain, if any.
  std::optional<Likelihood> zero_cell;
};

// Learns P(f | z_j) with P(z_j | u_k) fixed, forcing P(f | z_j) = 0 for
// files outside topic j.
absl::StatusOr<PriorFitResult> PriorFit(const RequestMatrix& requests,
                                        const PriorKnowledge& prior,
                                        const EmConfig& config,
                                        const EmObserver& observer = {});

// Frequency-count baseline.
absl::StatusOr<DemandProfile> BaselineFit(const RequestMatrix& requests);

// Topic file sets read off a fitted model: f joins topic j when
// P(f | z_j) >= relative_threshold * max_f' P(f' | z_j). Files that join no
// topic go to their most likely one.
TopicCatalog CatalogFromModel(const PlsaModel& model, double relative_threshold);

// Free parameters: K F for the frequency count, Z (K + F) + K for pLSA.
int64_t BaselineParameterCount(int num_users, int num_files);
int64_t PlsaParameterCount(int num_users, int num_files, int num_topics);

}  // namespace prefcache

#endif  // PREFCACHE_LEARNER_H_
