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

// Demand objects: content popularity, per-user preference and active level,
// the latent-feature generator used for synthetic workloads, and request
// count matrices with their frequency-count estimators.

#ifndef PREFCACHE_DEMAND_MODEL_H_
#define PREFCACHE_DEMAND_MODEL_H_

#include <cstdint>
#include <span>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "prefcache/matrix.h"

namespace prefcache {

// Probability that a request (from anyone) targets each file.
struct PopularityVector {
  std::vector<double> p;

  int num_files() const { return static_cast<int>(p.size()); }
};

// Active levels `active[k]` (probability a request comes from user k) and the
// row-stochastic preference matrix `preference(k, f)` = P(file f | user k).
struct DemandProfile {
  std::vector<double> active;
  Matrix preference;

  int num_users() const { return static_cast<int>(active.size()); }
  int num_files() const { return preference.cols(); }
};

// Checks the probability-simplex invariants of a profile.
absl::Status ValidateProfile(const DemandProfile& profile,
                             double tolerance = 1e-12);

// Feature values in the shared one-dimensional latent space.
struct LatentFeatures {
  std::vector<double> user;
  std::vector<double> file;
  double alpha = 1.0;
};

// Sparse user-by-file request counts with cached marginals.
class RequestMatrix {
 public:
  struct Entry {
    int file;
    int64_t count;
  };

  RequestMatrix() = default;
  RequestMatrix(int num_users, int num_files);

  static absl::StatusOr<RequestMatrix> FromDense(
      const std::vector<std::vector<int64_t>>& counts);

  int num_users() const { return static_cast<int>(rows_.size()); }
  int num_files() const { return static_cast<int>(file_totals_.size()); }

  // Adds `count` (>= 0) requests of `file` by `user`.
  void Add(int user, int file, int64_t count = 1);
  // Overwrites the count at (user, file); zero removes the entry.
  void Set(int user, int file, int64_t count);

  int64_t count(int user, int file) const;
  // Nonzero entries of one user, sorted by file.
  std::span<const Entry> row(int user) const { return rows_[user]; }

  int64_t user_total(int user) const { return user_totals_[user]; }
  int64_t file_total(int file) const { return file_totals_[file]; }
  int64_t total() const { return total_; }
  int64_t nonzeros() const;

  const std::vector<int64_t>& user_totals() const { return user_totals_; }
  const std::vector<int64_t>& file_totals() const { return file_totals_; }

  // Sub-matrix keeping all users and the given columns, in the given order.
  RequestMatrix SelectFiles(std::span<const int> files) const;

  std::vector<std::vector<int64_t>> ToDense() const;

  bool operator==(const RequestMatrix& other) const;

 private:
  std::vector<std::vector<Entry>> rows_;
  std::vector<int64_t> user_totals_;
  std::vector<int64_t> file_totals_;
  int64_t total_ = 0;
};

// Zipf popularity p_f = f^-beta / sum_j j^-beta for files ranked 1..F.
absl::StatusOr<PopularityVector> ZipfPopularity(int num_files, double beta);

// Power-kernel correlation (1 - |x - y|)^(1/alpha^3 - 1).
absl::StatusOr<double> PowerKernel(double x, double y, double alpha);

struct SynthesisParams {
  int num_files = 3000;
  int num_users = 100;
  double alpha = 0.36;
  double beta = 0.6;
  uint64_t seed = 1;
};

struct SyntheticDemand {
  DemandProfile profile;
  LatentFeatures features;
  // Zipf target; file ids are popularity ranks.
  PopularityVector popularity;
  // Number of users whose features had to be redrawn because every joint
  // probability of that user underflowed to zero.
  int regenerated_users = 0;
};

// Draws user and file features uniformly on [0, 1] and spreads each file's
// Zipf mass across users in proportion to the kernel.
absl::StatusOr<SyntheticDemand> SynthesizeDemand(const SynthesisParams& params);

absl::StatusOr<double> CosineSimilarity(std::span<const double> a,
                                        std::span<const double> b);

// Mean cosine similarity over all unordered pairs of rows.
absl::StatusOr<double> AverageSimilarity(const Matrix& preferences);

// p_f = sum_k w_k q_{f|k}.
PopularityVector AggregatePopularity(const DemandProfile& profile);

struct FrequencyEstimates {
  PopularityVector popularity;
  DemandProfile profile;
  // Users with no requests; they receive a uniform preference row.
  int users_without_history = 0;
};

// Frequency-count (maximum likelihood) estimates of popularity, active level
// and preference.
absl::StatusOr<FrequencyEstimates> MlEstimates(const RequestMatrix& requests);

}  // namespace prefcache

#endif  // PREFCACHE_DEMAND_MODEL_H_
