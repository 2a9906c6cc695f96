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

#include "prefcache/demand_model.h"

#include <algorithm>
#include <cassert>
#include <cfloat>
#include <cmath>
#include <limits>

#include "absl/strings/str_cat.h"
#include "prefcache/random.h"

namespace prefcache {
namespace {

// Kernel exponents above this are evaluated in log space.
constexpr double kLogSpaceExponent = 50.0;
constexpr int kMaxRegenerationRounds = 100;

double KernelExponent(double alpha) { return 1.0 / (alpha * alpha * alpha) - 1.0; }

absl::Status CheckAlpha(double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("similarity parameter alpha must lie in (0, 1], got ", alpha));
  }
  return absl::OkStatus();
}

// Share of file mass assigned to each user, i.e. g(X_k, Y) / sum_k' g(X_k', Y).
void KernelShares(std::span<const double> users, double file_feature,
                  double exponent, std::vector<double>& shares) {
  const size_t n = users.size();
  shares.assign(n, 0.0);
  if (exponent <= kLogSpaceExponent) {
    double sum = 0.0;
    for (size_t k = 0; k < n; ++k) {
      shares[k] = std::pow(1.0 - std::fabs(users[k] - file_feature), exponent);
      sum += shares[k];
    }
    if (sum > 0.0 && std::isfinite(sum)) {
      for (double& s : shares) s /= sum;
      return;
    }
  }
  // Log-sum-exp normalization; the largest term is exactly 1 after shifting.
  double max_log = -std::numeric_limits<double>::infinity();
  for (size_t k = 0; k < n; ++k) {
    shares[k] = exponent * std::log1p(-std::fabs(users[k] - file_feature));
    max_log = std::max(max_log, shares[k]);
  }
  if (max_log == -std::numeric_limits<double>::infinity()) {
    // Every user sits at distance 1 from the file.
    std::fill(shares.begin(), shares.end(), 1.0 / static_cast<double>(n));
    return;
  }
  double sum = 0.0;
  for (double& s : shares) {
    s = std::exp(s - max_log);
    sum += s;
  }
  for (double& s : shares) s /= sum;
}

}  // namespace

absl::Status ValidateProfile(const DemandProfile& profile, double tolerance) {
  const int k_users = profile.num_users();
  if (profile.preference.rows() != k_users) {
    return absl::InvalidArgumentError(
        absl::StrCat("preference matrix has ", profile.preference.rows(),
                     " rows for ", k_users, " active levels"));
  }
  double active_sum = 0.0;
  for (int k = 0; k < k_users; ++k) {
    const double w = profile.active[k];
    if (!(w >= 0.0 && w <= 1.0)) {
      return absl::InvalidArgumentError(absl::StrCat("active level ", k, " = ", w));
    }
    active_sum += w;
    double row_sum = 0.0;
    for (double q : profile.preference.row(k)) {
      if (!(q >= 0.0 && q <= 1.0)) {
        return absl::InvalidArgumentError(
            absl::StrCat("preference entry out of [0,1] in row ", k));
      }
      row_sum += q;
    }
    if (std::fabs(row_sum - 1.0) > tolerance) {
      return absl::InvalidArgumentError(
          absl::StrCat("preference row ", k, " sums to ", row_sum));
    }
  }
  if (std::fabs(active_sum - 1.0) > tolerance) {
    return absl::InvalidArgumentError(
        absl::StrCat("active levels sum to ", active_sum));
  }
  return absl::OkStatus();
}

RequestMatrix::RequestMatrix(int num_users, int num_files)
    : rows_(num_users), user_totals_(num_users, 0), file_totals_(num_files, 0) {}

absl::StatusOr<RequestMatrix> RequestMatrix::FromDense(
    const std::vector<std::vector<int64_t>>& counts) {
  const int k_users = static_cast<int>(counts.size());
  const int f_files = k_users == 0 ? 0 : static_cast<int>(counts[0].size());
  RequestMatrix result(k_users, f_files);
  for (int k = 0; k < k_users; ++k) {
    if (static_cast<int>(counts[k].size()) != f_files) {
      return absl::InvalidArgumentError("ragged request matrix");
    }
    for (int f = 0; f < f_files; ++f) {
      if (counts[k][f] < 0) {
        return absl::InvalidArgumentError(
            absl::StrCat("negative count at (", k, ", ", f, ")"));
      }
      if (counts[k][f] > 0) result.Add(k, f, counts[k][f]);
    }
  }
  return result;
}

void RequestMatrix::Add(int user, int file, int64_t count) {
  assert(count >= 0);
  if (count == 0) return;
  auto& row = rows_[user];
  auto it = std::lower_bound(row.begin(), row.end(), file,
                             [](const Entry& e, int f) { return e.file < f; });
  if (it != row.end() && it->file == file) {
    it->count += count;
  } else {
    row.insert(it, Entry{file, count});
  }
  user_totals_[user] += count;
  file_totals_[file] += count;
  total_ += count;
}

void RequestMatrix::Set(int user, int file, int64_t count) {
  assert(count >= 0);
  auto& row = rows_[user];
  auto it = std::lower_bound(row.begin(), row.end(), file,
                             [](const Entry& e, int f) { return e.file < f; });
  int64_t previous = 0;
  if (it != row.end() && it->file == file) {
    previous = it->count;
    if (count == 0) {
      row.erase(it);
    } else {
      it->count = count;
    }
  } else if (count > 0) {
    row.insert(it, Entry{file, count});
  }
  const int64_t delta = count - previous;
  user_totals_[user] += delta;
  file_totals_[file] += delta;
  total_ += delta;
}

int64_t RequestMatrix::count(int user, int file) const {
  const auto& row = rows_[user];
  auto it = std::lower_bound(row.begin(), row.end(), file,
                             [](const Entry& e, int f) { return e.file < f; });
  return (it != row.end() && it->file == file) ? it->count : 0;
}

int64_t RequestMatrix::nonzeros() const {
  int64_t n = 0;
  for (const auto& row : rows_) n += static_cast<int64_t>(row.size());
  return n;
}

RequestMatrix RequestMatrix::SelectFiles(std::span<const int> files) const {
  std::vector<int> new_index(num_files(), -1);
  for (size_t i = 0; i < files.size(); ++i) new_index[files[i]] = static_cast<int>(i);
  RequestMatrix result(num_users(), static_cast<int>(files.size()));
  for (int k = 0; k < num_users(); ++k) {
    for (const Entry& e : rows_[k]) {
      if (new_index[e.file] >= 0) result.Add(k, new_index[e.file], e.count);
    }
  }
  return result;
}

std::vector<std::vector<int64_t>> RequestMatrix::ToDense() const {
  std::vector<std::vector<int64_t>> dense(num_users(),
                                          std::vector<int64_t>(num_files(), 0));
  for (int k = 0; k < num_users(); ++k) {
    for (const Entry& e : rows_[k]) dense[k][e.file] = e.count;
  }
  return dense;
}

bool RequestMatrix::operator==(const RequestMatrix& other) const {
  if (num_users() != other.num_users() || num_files() != other.num_files()) {
    return false;
  }
  for (int k = 0; k < num_users(); ++k) {
    const auto& a = rows_[k];
    const auto& b = other.rows_[k];
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i) {
      if (a[i].file != b[i].file || a[i].count != b[i].count) return false;
    }
  }
  return true;
}

absl::StatusOr<PopularityVector> ZipfPopularity(int num_files, double beta) {
  if (num_files <= 0) {
    return absl::InvalidArgumentError("empty catalog: Zipf needs at least one file");
  }
  if (!(beta >= 0.0)) {
    return absl::InvalidArgumentError(absl::StrCat("Zipf skewness must be >= 0, got ", beta));
  }
  PopularityVector result;
  result.p.resize(num_files);
  double norm = 0.0;
  for (int f = 0; f < num_files; ++f) {
    result.p[f] = std::pow(static_cast<double>(f + 1), -beta);
    norm += result.p[f];
  }
  for (double& v : result.p) v /= norm;
  return result;
}

absl::StatusOr<double> PowerKernel(double x, double y, double alpha) {
  if (absl::Status s = CheckAlpha(alpha); !s.ok()) return s;
  if (!(x >= 0.0 && x <= 1.0 && y >= 0.0 && y <= 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("feature values must lie in [0, 1], got ", x, " and ", y));
  }
  const double exponent = KernelExponent(alpha);
  const double base = 1.0 - std::fabs(x - y);
  if (exponent <= kLogSpaceExponent) return std::pow(base, exponent);
  const double log_value = exponent * std::log(base);
  // Flush results below the normal range instead of producing denormals.
  if (log_value < std::log(DBL_MIN)) return 0.0;
  return std::exp(log_value);
}

absl::StatusOr<SyntheticDemand> SynthesizeDemand(const SynthesisParams& params) {
  if (params.num_users <= 0 || params.num_files <= 0) {
    return absl::InvalidArgumentError("synthesis needs at least one user and one file");
  }
  if (absl::Status s = CheckAlpha(params.alpha); !s.ok()) return s;
  absl::StatusOr<PopularityVector> zipf = ZipfPopularity(params.num_files, params.beta);
  if (!zipf.ok()) return zipf.status();

  const int k_users = params.num_users;
  const int f_files = params.num_files;
  SyntheticDemand out;
  out.popularity = *std::move(zipf);
  out.features.alpha = params.alpha;
  out.features.user.resize(k_users);
  out.features.file.resize(f_files);

  // Independent streams: users first, then files, then redraws.
  Rng user_rng(DeriveSeed(params.seed, 0));
  for (double& x : out.features.user) x = user_rng.Uniform();
  Rng file_rng(DeriveSeed(params.seed, 1));
  for (double& y : out.features.file) y = file_rng.Uniform();
  Rng redraw_rng(DeriveSeed(params.seed, 2));

  const double exponent = KernelExponent(params.alpha);
  Matrix joint(k_users, f_files);
  std::vector<double> shares;
  std::vector<double> active(k_users);
  for (int round = 0;; ++round) {
    for (int f = 0; f < f_files; ++f) {
      KernelShares(out.features.user, out.features.file[f], exponent, shares);
      for (int k = 0; k < k_users; ++k) joint(k, f) = out.popularity.p[f] * shares[k];
    }
    std::vector<int> degenerate;
    for (int k = 0; k < k_users; ++k) {
      double w = 0.0;
      for (double v : joint.row(k)) w += v;
      active[k] = w;
      if (w <= 0.0) degenerate.push_back(k);
    }
    if (degenerate.empty()) break;
    if (round + 1 >= kMaxRegenerationRounds) {
      return absl::FailedPreconditionError(absl::StrCat(
          degenerate.size(), " users receive no demand after ", round + 1,
          " feature redraws; alpha too small for this catalog"));
    }
    for (int k : degenerate) {
      out.features.user[k] = redraw_rng.Uniform();
      ++out.regenerated_users;
    }
  }

  out.profile.active = std::move(active);
  out.profile.preference = Matrix(k_users, f_files);
  for (int k = 0; k < k_users; ++k) {
    const double w = out.profile.active[k];
    for (int f = 0; f < f_files; ++f) out.profile.preference(k, f) = joint(k, f) / w;
  }
  return out;
}

absl::StatusOr<double> CosineSimilarity(std::span<const double> a,
                                        std::span<const double> b) {
  if (a.size() != b.size()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "cosine similarity of vectors with lengths ", a.size(), " and ", b.size()));
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) {
    return absl::InvalidArgumentError("cosine similarity undefined for a zero vector");
  }
  return dot / std::sqrt(na * nb);
}

absl::StatusOr<double> AverageSimilarity(const Matrix& preferences) {
  const int k_users = preferences.rows();
  if (k_users < 2) {
    return absl::InvalidArgumentError("average similarity needs at least two users");
  }
  std::vector<double> norms(k_users);
  for (int k = 0; k < k_users; ++k) {
    double s = 0.0;
    for (double v : preferences.row(k)) s += v * v;
    if (s == 0.0) {
      return absl::InvalidArgumentError(
          absl::StrCat("cosine similarity undefined: user ", k, " has a zero row"));
    }
    norms[k] = std::sqrt(s);
  }
  double total = 0.0;
  for (int k = 0; k < k_users; ++k) {
    const auto rk = preferences.row(k);
    for (int m = k + 1; m < k_users; ++m) {
      const auto rm = preferences.row(m);
      double dot = 0.0;
      for (size_t f = 0; f < rk.size(); ++f) dot += rk[f] * rm[f];
      total += dot / (norms[k] * norms[m]);
    }
  }
  const double pairs = 0.5 * k_users * (k_users - 1.0);
  return total / pairs;
}

PopularityVector AggregatePopularity(const DemandProfile& profile) {
  PopularityVector result;
  result.p.assign(profile.num_files(), 0.0);
  for (int k = 0; k < profile.num_users(); ++k) {
    const double w = profile.active[k];
    const auto row = profile.preference.row(k);
    for (size_t f = 0; f < row.size(); ++f) result.p[f] += w * row[f];
  }
  return result;
}

absl::StatusOr<FrequencyEstimates> MlEstimates(const RequestMatrix& requests) {
  if (requests.total() <= 0) {
    return absl::FailedPreconditionError("empty request history");
  }
  const int k_users = requests.num_users();
  const int f_files = requests.num_files();
  const double total = static_cast<double>(requests.total());
  FrequencyEstimates out;
  out.popularity.p.resize(f_files);
  for (int f = 0; f < f_files; ++f) {
    out.popularity.p[f] = static_cast<double>(requests.file_total(f)) / total;
  }
  out.profile.active.resize(k_users);
  out.profile.preference = Matrix(k_users, f_files);
  for (int k = 0; k < k_users; ++k) {
    const int64_t n_k = requests.user_total(k);
    out.profile.active[k] = static_cast<double>(n_k) / total;
    if (n_k == 0) {
      ++out.users_without_history;
      for (double& q : out.profile.preference.row(k)) q = 1.0 / f_files;
      continue;
    }
    for (const auto& e : requests.row(k)) {
      out.profile.preference(k, e.file) =
          static_cast<double>(e.count) / static_cast<double>(n_k);
    }
  }
  return out;
}

}  // namespace prefcache
