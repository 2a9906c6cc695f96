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

// Caching placement for cache-enabled D2D networks.
//
// A request of user k for file f is offloaded when some user m in contact
// with k (including k itself) caches f. With contact probabilities a_{k,m}
// and a binary placement c_{m,f}, the offloading probability is
//
//   sum_k w_k sum_f q_{f|k} (1 - prod_m (1 - a_{k,m} c_{m,f})).
//
// This is monotone submodular in the set of placed (user, file) pairs and
// each user's row is limited to M files (a partition matroid).

#ifndef PREFCACHE_OPTIMIZER_H_
#define PREFCACHE_OPTIMIZER_H_

#include <cstdint>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "prefcache/demand_model.h"
#include "prefcache/mobility.h"

namespace prefcache {

// Binary user-by-file placement; each row holds at most `budget` files.
class CachingMatrix {
 public:
  CachingMatrix() = default;
  CachingMatrix(int num_users, int num_files, int budget);

  int num_users() const { return num_users_; }
  int num_files() const { return num_files_; }
  int budget() const { return budget_; }

  bool cached(int user, int file) const {
    return bits_[static_cast<size_t>(user) * num_files_ + file] != 0;
  }
  // Does not enforce the budget; see `Validate`.
  void Set(int user, int file, bool value);
  // Replaces a row with the given files.
  void SetRow(int user, const std::vector<int>& files);

  int RowCount(int user) const;
  // Cached files of one user, ascending.
  std::vector<int> Row(int user) const;
  int64_t TotalPlaced() const;

  absl::Status Validate() const;

  bool operator==(const CachingMatrix&) const = default;

 private:
  int num_users_ = 0;
  int num_files_ = 0;
  int budget_ = 0;
  std::vector<uint8_t> bits_;
};

struct OptimizerReport {
  // e.g. "S1-A2" (preference policy, alternating) or "S2-A1".
  std::string scheme;
  // Greedy: objective after each placement. Alternating: objective of the
  // initial placement, then after every sweep (or every row update when
  // requested).
  std::vector<double> objective_trace;
  // Greedy: number of placements. Alternating: number of sweeps, including
  // the final sweep that changed nothing.
  int iterations = 0;
  bool converged = true;
  double seconds = 0.0;
};

struct Placement {
  CachingMatrix caching;
  OptimizerReport report;
};

enum class Algorithm { kGreedy, kAlternating };

absl::StatusOr<double> OffloadingProbability(const DemandProfile& profile,
                                             const ContactMatrix& contacts,
                                             const CachingMatrix& caching);

// Offloading probability when every user has equal activity and requests by
// popularity: (1/K) sum_f p_f sum_k (1 - prod_m (1 - a_{k,m} c_{m,f})).
absl::StatusOr<double> PopularityOffloading(const PopularityVector& popularity,
                                            const ContactMatrix& contacts,
                                            const CachingMatrix& caching);

// Objective increase from additionally caching `file` at `user`.
absl::StatusOr<double> IncrementalGain(const DemandProfile& profile,
                                       const ContactMatrix& contacts,
                                       const CachingMatrix& caching, int user,
                                       int file);

// Greedy placement: repeatedly caches the feasible (user, file) pair with the
// largest incremental gain until every cache is full. Ties go to the lowest
// (user, file) pair.
absl::StatusOr<Placement> GreedyOptimize(const DemandProfile& profile,
                                         const ContactMatrix& contacts,
                                         int budget);

// b_f for one user with all other rows fixed: the objective gained by
// caching f at that user.
absl::StatusOr<std::vector<double>> BestResponseGains(
    const DemandProfile& profile, const ContactMatrix& contacts,
    const CachingMatrix& caching, int user);

// Optimal row for one user given the others: the `budget` files with the
// largest gains, ties to the lowest file index. Returned ascending.
absl::StatusOr<std::vector<int>> BestResponse(const DemandProfile& profile,
                                              const ContactMatrix& contacts,
                                              const CachingMatrix& caching,
                                              int user);

struct AlternatingOptions {
  uint64_t seed = 1;
  // Safety valve; each changed row strictly improves the objective, so the
  // iteration terminates well before this in practice.
  int max_sweeps = 1000;
  bool trace_each_update = false;
  // Start from this placement instead of a random one.
  const CachingMatrix* initial = nullptr;
};

// Alternating best responses over users until a full sweep leaves every row
// unchanged.
absl::StatusOr<Placement> AlternatingOptimize(const DemandProfile& profile,
                                              const ContactMatrix& contacts,
                                              int budget,
                                              const AlternatingOptions& options = {});

// Placement designed from content popularity only: every user is given
// activity 1/K and preference p before running the chosen algorithm.
absl::StatusOr<Placement> PopularityPolicy(const PopularityVector& popularity,
                                           const ContactMatrix& contacts,
                                           int budget, Algorithm algorithm,
                                           uint64_t seed = 1);

// Profile with uniform activity and every preference row equal to p.
DemandProfile UniformProfile(const PopularityVector& popularity, int num_users);

struct BruteForceResult {
  CachingMatrix caching;
  double objective = 0.0;
  int64_t evaluated = 0;
};

// Exhaustive maximization over every placement with min(M, F) files per
// user. Fails when C(F, M)^K exceeds `max_placements`.
absl::StatusOr<BruteForceResult> BruteForceOptimize(
    const DemandProfile& profile, const ContactMatrix& contacts, int budget,
    int64_t max_placements = 1'000'000);

}  // namespace prefcache

#endif  // PREFCACHE_OPTIMIZER_H_
