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

#include "prefcache/optimizer.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "absl/strings/str_cat.h"
#include "prefcache/random.h"

namespace prefcache {
namespace {

using Rows = std::vector<std::vector<int>>;
using Neighbors = std::vector<std::vector<int>>;

// A changed row must beat the incumbent by this relative margin; this keeps
// rounding noise between equal-valued rows from causing endless swaps.
constexpr double kImprovementSlack = 1e-13;

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double Seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

absl::Status CheckDimensions(int profile_users, int profile_files,
                             const ContactMatrix& contacts) {
  if (contacts.a.rows() != profile_users || contacts.a.cols() != profile_users) {
    return absl::InvalidArgumentError(absl::StrCat(
        "dimension mismatch: ", profile_users, " users but contact matrix is ",
        contacts.a.rows(), "x", contacts.a.cols()));
  }
  if (profile_files <= 0) {
    return absl::InvalidArgumentError("dimension mismatch: empty catalog");
  }
  return absl::OkStatus();
}

absl::Status CheckDimensions(int profile_users, int profile_files,
                             const ContactMatrix& contacts,
                             const CachingMatrix& caching) {
  if (absl::Status s = CheckDimensions(profile_users, profile_files, contacts); !s.ok()) {
    return s;
  }
  if (caching.num_users() != profile_users || caching.num_files() != profile_files) {
    return absl::InvalidArgumentError(absl::StrCat(
        "dimension mismatch: demand is ", profile_users, "x", profile_files,
        " but caching matrix is ", caching.num_users(), "x", caching.num_files()));
  }
  return absl::OkStatus();
}

absl::Status CheckProfileShape(const DemandProfile& profile) {
  if (profile.preference.rows() != profile.num_users()) {
    return absl::InvalidArgumentError("preference rows differ from active levels");
  }
  return absl::OkStatus();
}

absl::Status CheckBudget(int budget, int num_files) {
  if (budget < 0 || budget > num_files) {
    return absl::InvalidArgumentError(
        absl::StrCat("cache budget ", budget, " outside [0, ", num_files, "]"));
  }
  return absl::OkStatus();
}

// Users with positive contact probability, ascending (includes self when
// the diagonal is positive).
Neighbors BuildNeighbors(const Matrix& a) {
  const int n = a.rows();
  Neighbors out(n);
  for (int k = 0; k < n; ++k) {
    for (int m = 0; m < n; ++m) {
      if (a(k, m) > 0.0) out[k].push_back(m);
    }
  }
  return out;
}

Rows ExtractRows(const CachingMatrix& caching) {
  Rows rows(caching.num_users());
  for (int k = 0; k < caching.num_users(); ++k) rows[k] = caching.Row(k);
  return rows;
}

// Fills miss[f] = prod_{m in N(k), m != skip} (1 - a_{k,m} c_{m,f}) for the
// files cached near k, recording them in `touched`. Other entries stay 1.
void AccumulateMiss(int k, int skip, const Matrix& a, const Neighbors& neighbors,
                    const Rows& rows, std::vector<double>& miss,
                    std::vector<int>& touched) {
  for (int m : neighbors[k]) {
    if (m == skip) continue;
    const double factor = 1.0 - a(k, m);
    for (int f : rows[m]) {
      if (miss[f] == 1.0) touched.push_back(f);
      miss[f] *= factor;
    }
  }
}

void ResetMiss(std::vector<double>& miss, std::vector<int>& touched) {
  for (int f : touched) miss[f] = 1.0;
  touched.clear();
}

// sum_k w_k sum_f q_{f|k} (1 - miss_{k,f}); k outer, f inner.
double Objective(const DemandProfile& profile, const Matrix& a,
                 const Neighbors& neighbors, const Rows& rows) {
  const int f_files = profile.num_files();
  std::vector<double> miss(f_files, 1.0);
  std::vector<int> touched;
  double total = 0.0;
  for (int k = 0; k < profile.num_users(); ++k) {
    AccumulateMiss(k, -1, a, neighbors, rows, miss, touched);
    const auto q = profile.preference.row(k);
    double inner = 0.0;
    for (int f = 0; f < f_files; ++f) inner += q[f] * (1.0 - miss[f]);
    total += profile.active[k] * inner;
    ResetMiss(miss, touched);
  }
  return total;
}

void ComputeGains(const DemandProfile& profile, const Matrix& a,
                  const Neighbors& neighbors, const Rows& rows, int user,
                  std::vector<double>& gains) {
  const int f_files = profile.num_files();
  gains.assign(f_files, 0.0);
  std::vector<double> miss(f_files, 1.0);
  std::vector<int> touched;
  for (int k : neighbors[user]) {
    AccumulateMiss(k, user, a, neighbors, rows, miss, touched);
    const double weight = profile.active[k] * a(k, user);
    const auto q = profile.preference.row(k);
    for (int f = 0; f < f_files; ++f) gains[f] += weight * q[f] * miss[f];
    ResetMiss(miss, touched);
  }
}

// Indices of the `count` largest gains, ties to the lowest index, ascending.
std::vector<int> TopFiles(const std::vector<double>& gains, int count) {
  std::vector<int> order(gains.size());
  std::iota(order.begin(), order.end(), 0);
  std::partial_sort(order.begin(), order.begin() + count, order.end(),
                    [&](int i, int j) {
                      return gains[i] > gains[j] || (gains[i] == gains[j] && i < j);
                    });
  order.resize(count);
  std::sort(order.begin(), order.end());
  return order;
}

double RowValue(const std::vector<double>& gains, const std::vector<int>& files) {
  double v = 0.0;
  for (int f : files) v += gains[f];
  return v;
}

CachingMatrix FromRows(const Rows& rows, int num_files, int budget) {
  CachingMatrix c(static_cast<int>(rows.size()), num_files, budget);
  for (size_t k = 0; k < rows.size(); ++k) c.SetRow(static_cast<int>(k), rows[k]);
  return c;
}

}  // namespace

CachingMatrix::CachingMatrix(int num_users, int num_files, int budget)
    : num_users_(num_users),
      num_files_(num_files),
      budget_(budget),
      bits_(static_cast<size_t>(num_users) * num_files, 0) {}

void CachingMatrix::Set(int user, int file, bool value) {
  bits_[static_cast<size_t>(user) * num_files_ + file] = value ? 1 : 0;
}

void CachingMatrix::SetRow(int user, const std::vector<int>& files) {
  std::fill_n(bits_.begin() + static_cast<ptrdiff_t>(user) * num_files_, num_files_, 0);
  for (int f : files) Set(user, f, true);
}

int CachingMatrix::RowCount(int user) const {
  const auto begin = bits_.begin() + static_cast<ptrdiff_t>(user) * num_files_;
  return static_cast<int>(std::count(begin, begin + num_files_, 1));
}

std::vector<int> CachingMatrix::Row(int user) const {
  std::vector<int> files;
  for (int f = 0; f < num_files_; ++f) {
    if (cached(user, f)) files.push_back(f);
  }
  return files;
}

int64_t CachingMatrix::TotalPlaced() const {
  return std::count(bits_.begin(), bits_.end(), 1);
}

absl::Status CachingMatrix::Validate() const {
  for (int k = 0; k < num_users_; ++k) {
    const int n = RowCount(k);
    if (n > budget_) {
      return absl::FailedPreconditionError(
          absl::StrCat("user ", k, " caches ", n, " files, budget is ", budget_));
    }
  }
  return absl::OkStatus();
}

absl::StatusOr<double> OffloadingProbability(const DemandProfile& profile,
                                             const ContactMatrix& contacts,
                                             const CachingMatrix& caching) {
  if (absl::Status s = CheckProfileShape(profile); !s.ok()) return s;
  if (absl::Status s = CheckDimensions(profile.num_users(), profile.num_files(),
                                       contacts, caching);
      !s.ok()) {
    return s;
  }
  return Objective(profile, contacts.a, BuildNeighbors(contacts.a),
                   ExtractRows(caching));
}

absl::StatusOr<double> PopularityOffloading(const PopularityVector& popularity,
                                            const ContactMatrix& contacts,
                                            const CachingMatrix& caching) {
  const int k_users = contacts.num_users();
  const int f_files = popularity.num_files();
  if (absl::Status s = CheckDimensions(k_users, f_files, contacts, caching); !s.ok()) {
    return s;
  }
  const Neighbors neighbors = BuildNeighbors(contacts.a);
  const Rows rows = ExtractRows(caching);
  std::vector<double> miss(f_files, 1.0);
  std::vector<int> touched;
  double total = 0.0;
  for (int k = 0; k < k_users; ++k) {
    AccumulateMiss(k, -1, contacts.a, neighbors, rows, miss, touched);
    double inner = 0.0;
    for (int f = 0; f < f_files; ++f) inner += popularity.p[f] * (1.0 - miss[f]);
    total += inner;
    ResetMiss(miss, touched);
  }
  return total / k_users;
}

absl::StatusOr<double> IncrementalGain(const DemandProfile& profile,
                                       const ContactMatrix& contacts,
                                       const CachingMatrix& caching, int user,
                                       int file) {
  if (absl::Status s = CheckProfileShape(profile); !s.ok()) return s;
  if (absl::Status s = CheckDimensions(profile.num_users(), profile.num_files(),
                                       contacts, caching);
      !s.ok()) {
    return s;
  }
  if (user < 0 || user >= caching.num_users() || file < 0 ||
      file >= caching.num_files()) {
    return absl::OutOfRangeError(absl::StrCat("no such pair (", user, ", ", file, ")"));
  }
  if (caching.cached(user, file)) {
    return absl::FailedPreconditionError(
        absl::StrCat("file ", file, " is already cached at user ", user));
  }
  // Caching f at `user` multiplies k's miss probability by (1 - a_{k,user}),
  // so the gain is sum_k w_k q_{f|k} a_{k,user} prod_m (1 - a_{k,m} c_{m,f}).
  const Matrix& a = contacts.a;
  double gain = 0.0;
  for (int k = 0; k < profile.num_users(); ++k) {
    if (a(k, user) <= 0.0) continue;
    double miss = 1.0;
    for (int m = 0; m < profile.num_users(); ++m) {
      if (caching.cached(m, file)) miss *= 1.0 - a(k, m);
    }
    gain += profile.active[k] * profile.preference(k, file) * a(k, user) * miss;
  }
  return gain;
}

absl::StatusOr<Placement> GreedyOptimize(const DemandProfile& profile,
                                         const ContactMatrix& contacts,
                                         int budget) {
  if (absl::Status s = CheckProfileShape(profile); !s.ok()) return s;
  const int k_users = profile.num_users();
  const int f_files = profile.num_files();
  if (absl::Status s = CheckDimensions(k_users, f_files, contacts); !s.ok()) return s;
  if (absl::Status s = CheckBudget(budget, f_files); !s.ok()) return s;

  Stopwatch timer;
  const Matrix& a = contacts.a;
  const Neighbors neighbors = BuildNeighbors(a);
  // miss(k, f) = prod_m (1 - a_{k,m} c_{m,f}); gain(m, f) is the incremental
  // gain of caching f at m, refreshed only for the column that changed.
  Matrix miss(k_users, f_files, 1.0);
  Matrix gain(k_users, f_files, 0.0);
  for (int m = 0; m < k_users; ++m) {
    for (int k : neighbors[m]) {
      const double weight = profile.active[k] * a(k, m);
      const auto q = profile.preference.row(k);
      auto g = gain.row(m);
      for (int f = 0; f < f_files; ++f) g[f] += weight * q[f];
    }
  }

  Placement out;
  out.caching = CachingMatrix(k_users, f_files, budget);
  std::vector<int> placed(k_users, 0);
  double objective = 0.0;
  const int64_t steps = static_cast<int64_t>(k_users) * budget;
  for (int64_t step = 0; step < steps; ++step) {
    int best_m = -1, best_f = -1;
    double best = -1.0;
    for (int m = 0; m < k_users; ++m) {
      if (placed[m] == budget) continue;
      const auto g = gain.row(m);
      for (int f = 0; f < f_files; ++f) {
        if (g[f] > best && !out.caching.cached(m, f)) {
          best = g[f];
          best_m = m;
          best_f = f;
        }
      }
    }
    out.caching.Set(best_m, best_f, true);
    ++placed[best_m];
    objective += best;
    out.report.objective_trace.push_back(objective);

    for (int k : neighbors[best_m]) miss(k, best_f) *= 1.0 - a(k, best_m);
    for (int m = 0; m < k_users; ++m) {
      double g = 0.0;
      for (int k : neighbors[m]) {
        g += profile.active[k] * profile.preference(k, best_f) * a(k, m) *
             miss(k, best_f);
      }
      gain(m, best_f) = g;
    }
  }
  out.report.scheme = "S1-A1";
  out.report.iterations = static_cast<int>(steps);
  out.report.seconds = timer.Seconds();
  return out;
}

absl::StatusOr<std::vector<double>> BestResponseGains(
    const DemandProfile& profile, const ContactMatrix& contacts,
    const CachingMatrix& caching, int user) {
  if (absl::Status s = CheckProfileShape(profile); !s.ok()) return s;
  if (absl::Status s = CheckDimensions(profile.num_users(), profile.num_files(),
                                       contacts, caching);
      !s.ok()) {
    return s;
  }
  if (user < 0 || user >= profile.num_users()) {
    return absl::OutOfRangeError(absl::StrCat("no user ", user));
  }
  std::vector<double> gains;
  ComputeGains(profile, contacts.a, BuildNeighbors(contacts.a), ExtractRows(caching),
               user, gains);
  return gains;
}

absl::StatusOr<std::vector<int>> BestResponse(const DemandProfile& profile,
                                              const ContactMatrix& contacts,
                                              const CachingMatrix& caching,
                                              int user) {
  absl::StatusOr<std::vector<double>> gains =
      BestResponseGains(profile, contacts, caching, user);
  if (!gains.ok()) return gains.status();
  if (absl::Status s = CheckBudget(caching.budget(), caching.num_files()); !s.ok()) {
    return s;
  }
  return TopFiles(*gains, caching.budget());
}

absl::StatusOr<Placement> AlternatingOptimize(const DemandProfile& profile,
                                              const ContactMatrix& contacts,
                                              int budget,
                                              const AlternatingOptions& options) {
  if (absl::Status s = CheckProfileShape(profile); !s.ok()) return s;
  const int k_users = profile.num_users();
  const int f_files = profile.num_files();
  if (absl::Status s = CheckDimensions(k_users, f_files, contacts); !s.ok()) return s;
  if (absl::Status s = CheckBudget(budget, f_files); !s.ok()) return s;

  Stopwatch timer;
  const Matrix& a = contacts.a;
  const Neighbors neighbors = BuildNeighbors(a);
  Rows rows(k_users);
  if (options.initial != nullptr) {
    const CachingMatrix& init = *options.initial;
    if (init.num_users() != k_users || init.num_files() != f_files) {
      return absl::InvalidArgumentError("initial placement has the wrong shape");
    }
    rows = ExtractRows(init);
    for (int k = 0; k < k_users; ++k) {
      if (static_cast<int>(rows[k].size()) > budget) {
        return absl::InvalidArgumentError(
            absl::StrCat("initial placement exceeds the budget at user ", k));
      }
    }
  } else {
    for (int k = 0; k < k_users; ++k) {
      Rng rng(DeriveSeed(options.seed, static_cast<uint64_t>(k)));
      rows[k] = rng.SampleWithoutReplacement(f_files, budget);
      std::sort(rows[k].begin(), rows[k].end());
    }
  }

  Placement out;
  out.report.scheme = "S1-A2";
  out.report.objective_trace.push_back(Objective(profile, a, neighbors, rows));
  std::vector<double> gains;
  bool changed = true;
  int sweeps = 0;
  while (changed && sweeps < options.max_sweeps) {
    changed = false;
    ++sweeps;
    for (int k = 0; k < k_users; ++k) {
      ComputeGains(profile, a, neighbors, rows, k, gains);
      std::vector<int> best = TopFiles(gains, budget);
      if (best == rows[k]) continue;
      const double incumbent = RowValue(gains, rows[k]);
      const double candidate = RowValue(gains, best);
      if (candidate <= incumbent + kImprovementSlack * std::fabs(candidate)) continue;
      rows[k] = std::move(best);
      changed = true;
      if (options.trace_each_update) {
        out.report.objective_trace.push_back(Objective(profile, a, neighbors, rows));
      }
    }
    if (!options.trace_each_update) {
      out.report.objective_trace.push_back(Objective(profile, a, neighbors, rows));
    }
  }
  out.report.iterations = sweeps;
  out.report.converged = !changed;
  out.caching = FromRows(rows, f_files, budget);
  out.report.seconds = timer.Seconds();
  return out;
}

DemandProfile UniformProfile(const PopularityVector& popularity, int num_users) {
  DemandProfile profile;
  profile.active.assign(num_users, 1.0 / num_users);
  profile.preference = Matrix(num_users, popularity.num_files());
  for (int k = 0; k < num_users; ++k) {
    std::copy(popularity.p.begin(), popularity.p.end(),
              profile.preference.row(k).begin());
  }
  return profile;
}

absl::StatusOr<Placement> PopularityPolicy(const PopularityVector& popularity,
                                           const ContactMatrix& contacts,
                                           int budget, Algorithm algorithm,
                                           uint64_t seed) {
  const DemandProfile profile = UniformProfile(popularity, contacts.num_users());
  absl::StatusOr<Placement> result =
      algorithm == Algorithm::kGreedy
          ? GreedyOptimize(profile, contacts, budget)
          : AlternatingOptimize(profile, contacts, budget, {.seed = seed});
  if (result.ok()) {
    result->report.scheme = algorithm == Algorithm::kGreedy ? "S2-A1" : "S2-A2";
  }
  return result;
}

absl::StatusOr<BruteForceResult> BruteForceOptimize(const DemandProfile& profile,
                                                    const ContactMatrix& contacts,
                                                    int budget,
                                                    int64_t max_placements) {
  if (absl::Status s = CheckProfileShape(profile); !s.ok()) return s;
  const int k_users = profile.num_users();
  const int f_files = profile.num_files();
  if (absl::Status s = CheckDimensions(k_users, f_files, contacts); !s.ok()) return s;
  if (absl::Status s = CheckBudget(budget, f_files); !s.ok()) return s;

  double rows_per_user = 1.0;  // C(F, M)
  for (int i = 0; i < budget; ++i) {
    rows_per_user = rows_per_user * (f_files - i) / (i + 1);
  }
  const double total = std::pow(rows_per_user, k_users);
  if (total > static_cast<double>(max_placements)) {
    return absl::ResourceExhaustedError(absl::StrCat(
        "instance too large for exhaustive search: ", total, " placements > cap ",
        max_placements));
  }

  // All M-subsets of the catalog in lexicographic order.
  std::vector<std::vector<int>> subsets;
  std::vector<int> comb(budget);
  std::iota(comb.begin(), comb.end(), 0);
  while (true) {
    subsets.push_back(comb);
    int i = budget - 1;
    while (i >= 0 && comb[i] == f_files - budget + i) --i;
    if (i < 0) break;
    ++comb[i];
    for (int j = i + 1; j < budget; ++j) comb[j] = comb[j - 1] + 1;
  }

  const Neighbors neighbors = BuildNeighbors(contacts.a);
  std::vector<size_t> choice(k_users, 0);
  Rows rows(k_users, subsets[0]);
  BruteForceResult best;
  best.objective = -1.0;
  Rows best_rows;
  while (true) {
    const double value = Objective(profile, contacts.a, neighbors, rows);
    ++best.evaluated;
    if (value > best.objective) {
      best.objective = value;
      best_rows = rows;
    }
    int k = k_users - 1;
    while (k >= 0 && choice[k] + 1 == subsets.size()) {
      choice[k] = 0;
      rows[k] = subsets[0];
      --k;
    }
    if (k < 0) break;
    rows[k] = subsets[++choice[k]];
  }
  best.caching = FromRows(best_rows, f_files, budget);
  return best;
}

}  // namespace prefcache
