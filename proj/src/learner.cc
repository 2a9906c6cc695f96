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

#include <algorithm>
#include <cmath>

#include "absl/strings/str_cat.h"
#include "prefcache/random.h"

namespace prefcache {
namespace {

// Floor applied inside logarithms only; stored parameters are never floored.
constexpr double kLogFloor = 1e-12;
constexpr uint64_t kTopicPrefStream = 0;
constexpr uint64_t kFileGivenTopicStream = 1;

struct Cell {
  int user;
  int file;
  double weight;
};

// Observed cells in user-major, file-minor order.
struct Observations {
  int num_users = 0;
  int num_files = 0;
  std::vector<Cell> cells;
  std::vector<double> user_totals;
};

Observations FromRequests(const RequestMatrix& requests) {
  Observations obs;
  obs.num_users = requests.num_users();
  obs.num_files = requests.num_files();
  obs.cells.reserve(static_cast<size_t>(requests.nonzeros()));
  obs.user_totals.resize(obs.num_users);
  for (int k = 0; k < obs.num_users; ++k) {
    for (const auto& e : requests.row(k)) {
      obs.cells.push_back({k, e.file, static_cast<double>(e.count)});
    }
    obs.user_totals[k] = static_cast<double>(requests.user_total(k));
  }
  return obs;
}

Observations FromWeights(const Matrix& weights) {
  Observations obs;
  obs.num_users = weights.rows();
  obs.num_files = weights.cols();
  obs.user_totals.assign(obs.num_users, 0.0);
  for (int k = 0; k < obs.num_users; ++k) {
    for (int f = 0; f < obs.num_files; ++f) {
      const double w = weights(k, f);
      if (w > 0.0) {
        obs.cells.push_back({k, f, w});
        obs.user_totals[k] += w;
      }
    }
  }
  return obs;
}

double CellProbability(const PlsaModel& model, int k, int f) {
  double s = 0.0;
  for (int j = 0; j < model.num_topics; ++j) {
    s += model.file_given_topic(j, f) * model.topic_pref(k, j);
  }
  return s;
}

Likelihood ComputeLikelihood(const PlsaModel& model, const Observations& obs) {
  Likelihood out;
  for (const Cell& c : obs.cells) {
    const double p = model.active[c.user] * CellProbability(model, c.user, c.file);
    if (p == 0.0 && !out.minus_infinity) {
      out.minus_infinity = true;
      out.user = c.user;
      out.file = c.file;
    }
    out.value += c.weight * std::log(std::max(p, kLogFloor));
  }
  return out;
}

void FillRandomRow(Rng& rng, std::span<double> row,
                   const TopicCatalog* catalog, int topic) {
  double sum = 0.0;
  for (size_t i = 0; i < row.size(); ++i) {
    const bool allowed =
        catalog == nullptr || topic < 0 || catalog->Contains(topic, static_cast<int>(i));
    // Draw for every slot so the stream does not depend on the catalog.
    const double v = 1e-6 + rng.Uniform();
    row[i] = allowed ? v : 0.0;
    sum += row[i];
  }
  for (double& v : row) v /= sum;
}

void ResetRowUniform(std::span<double> row, const TopicCatalog* catalog, int topic) {
  int allowed = 0;
  for (size_t i = 0; i < row.size(); ++i) {
    if (catalog == nullptr || catalog->Contains(topic, static_cast<int>(i))) ++allowed;
  }
  for (size_t i = 0; i < row.size(); ++i) {
    const bool in = catalog == nullptr || catalog->Contains(topic, static_cast<int>(i));
    row[i] = in ? 1.0 / allowed : 0.0;
  }
}

struct EngineOptions {
  const TopicCatalog* catalog = nullptr;
  bool learn_topic_pref = true;
};

struct EngineResult {
  std::vector<double> trace;
  int iterations = 0;
  bool converged = false;
  std::vector<int> reset_topics;
};

// Alternates the E-step and M-step over observed cells only; the posterior
// tensor is never stored, its contributions go straight into the M-step
// numerators.
EngineResult RunEm(const Observations& obs, const EmConfig& config,
                   const EngineOptions& options, PlsaModel& model,
                   const EmObserver& observer) {
  const int z_topics = model.num_topics;
  const int k_users = obs.num_users;
  const int f_files = obs.num_files;
  EngineResult out;
  out.trace.push_back(ComputeLikelihood(model, obs).value);

  Matrix num_file(z_topics, f_files);
  Matrix num_topic(k_users, z_topics);
  std::vector<double> joint(z_topics);
  for (int iter = 1; iter <= config.max_iterations; ++iter) {
    num_file.Fill(0.0);
    num_topic.Fill(0.0);
    for (const Cell& c : obs.cells) {
      double denom = 0.0;
      for (int j = 0; j < z_topics; ++j) {
        joint[j] = model.topic_pref(c.user, j) * model.file_given_topic(j, c.file);
        denom += joint[j];
      }
      if (denom == 0.0) continue;  // unexplained cell, flagged by the likelihood
      const double scale = c.weight / denom;
      for (int j = 0; j < z_topics; ++j) {
        const double r = joint[j] * scale;
        num_file(j, c.file) += r;
        num_topic(c.user, j) += r;
      }
    }

    for (int j = 0; j < z_topics; ++j) {
      double s = 0.0;
      for (double v : num_file.row(j)) s += v;
      auto row = model.file_given_topic.row(j);
      if (s == 0.0) {
        ResetRowUniform(row, options.catalog, j);
        if (std::find(out.reset_topics.begin(), out.reset_topics.end(), j) ==
            out.reset_topics.end()) {
          out.reset_topics.push_back(j);
        }
        continue;
      }
      const auto num = num_file.row(j);
      for (int f = 0; f < f_files; ++f) row[f] = num[f] / s;
    }
    if (options.learn_topic_pref) {
      for (int k = 0; k < k_users; ++k) {
        double s = 0.0;
        for (double v : num_topic.row(k)) s += v;
        if (s == 0.0) continue;  // no history: keep the uniform row
        auto row = model.topic_pref.row(k);
        const auto num = num_topic.row(k);
        for (int j = 0; j < z_topics; ++j) row[j] = num[j] / s;
      }
    }

    const double value = ComputeLikelihood(model, obs).value;
    const double delta = std::fabs(value - out.trace.back());
    out.trace.push_back(value);
    out.iterations = iter;
    if (observer) observer(model);
    if (delta <= config.tolerance) {
      out.converged = true;
      break;
    }
  }
  return out;
}

absl::Status CheckCatalog(const TopicCatalog* catalog, int num_topics, int num_files) {
  if (catalog == nullptr) return absl::OkStatus();
  if (catalog->num_topics() != num_topics || catalog->num_files() != num_files) {
    return absl::InvalidArgumentError(absl::StrCat(
        "topic catalog is ", catalog->num_topics(), " topics x ",
        catalog->num_files(), " files; expected ", num_topics, " x ", num_files));
  }
  return absl::OkStatus();
}

absl::StatusOr<EmResult> FitObservations(const Observations& obs,
                                         const EmConfig& config,
                                         const TopicCatalog* catalog,
                                         const EmObserver& observer) {
  if (absl::Status s = ValidateEmConfig(config); !s.ok()) return s;
  if (absl::Status s = CheckCatalog(catalog, config.num_topics, obs.num_files); !s.ok()) {
    return s;
  }
  double total = 0.0;
  for (double t : obs.user_totals) total += t;
  if (!(total > 0.0)) return absl::FailedPreconditionError("empty request history");

  const int z_topics = config.num_topics;
  EmResult out;
  if (z_topics > obs.num_files) {
    out.warnings.push_back(absl::StrCat("ill-posed: ", z_topics, " topics for ",
                                        obs.num_files, " files; some topics degenerate"));
  }
  PlsaModel& model = out.model;
  model.num_topics = z_topics;
  model.active.resize(obs.num_users);
  for (int k = 0; k < obs.num_users; ++k) model.active[k] = obs.user_totals[k] / total;
  model.topic_pref = Matrix(obs.num_users, z_topics);
  model.file_given_topic = Matrix(z_topics, obs.num_files);
  Rng pref_rng(DeriveSeed(config.seed, kTopicPrefStream));
  for (int k = 0; k < obs.num_users; ++k) {
    if (obs.user_totals[k] > 0.0) {
      FillRandomRow(pref_rng, model.topic_pref.row(k), nullptr, -1);
    } else {
      for (double& v : model.topic_pref.row(k)) v = 1.0 / z_topics;
    }
  }
  Rng file_rng(DeriveSeed(config.seed, kFileGivenTopicStream));
  for (int j = 0; j < z_topics; ++j) {
    FillRandomRow(file_rng, model.file_given_topic.row(j), catalog, j);
  }

  EngineResult run = RunEm(obs, config, {.catalog = catalog, .learn_topic_pref = true},
                           model, observer);
  out.likelihood_trace = std::move(run.trace);
  out.iterations = run.iterations;
  out.converged = run.converged;
  out.reset_topics = std::move(run.reset_topics);
  return out;
}

}  // namespace

absl::Status ValidateModel(const PlsaModel& model, double tolerance) {
  const int k_users = model.num_users();
  const int z_topics = model.num_topics;
  if (model.topic_pref.rows() != k_users || model.topic_pref.cols() != z_topics ||
      model.file_given_topic.rows() != z_topics) {
    return absl::InvalidArgumentError("pLSA model dimensions are inconsistent");
  }
  auto check_row = [&](std::span<const double> row, const char* what,
                       int index) -> absl::Status {
    double s = 0.0;
    for (double v : row) {
      if (!(v >= 0.0 && v <= 1.0)) {
        return absl::InvalidArgumentError(absl::StrCat(what, " row ", index,
                                                       " has an entry outside [0,1]"));
      }
      s += v;
    }
    if (std::fabs(s - 1.0) > tolerance) {
      return absl::InvalidArgumentError(
          absl::StrCat(what, " row ", index, " sums to ", s));
    }
    return absl::OkStatus();
  };
  if (absl::Status s = check_row(model.active, "active", 0); !s.ok()) return s;
  for (int k = 0; k < k_users; ++k) {
    if (absl::Status s = check_row(model.topic_pref.row(k), "topic_pref", k); !s.ok()) {
      return s;
    }
  }
  for (int j = 0; j < z_topics; ++j) {
    if (absl::Status s = check_row(model.file_given_topic.row(j), "file_given_topic", j);
        !s.ok()) {
      return s;
    }
  }
  return absl::OkStatus();
}

absl::StatusOr<TopicCatalog> TopicCatalog::Create(std::vector<std::string> labels,
                                                  std::vector<std::vector<int>> files,
                                                  int num_files) {
  if (labels.size() != files.size()) {
    return absl::InvalidArgumentError("one file set per topic label required");
  }
  TopicCatalog catalog;
  catalog.num_files_ = num_files;
  catalog.member_.assign(labels.size() * static_cast<size_t>(num_files), 0);
  std::vector<int> coverage(num_files, 0);
  for (size_t j = 0; j < files.size(); ++j) {
    auto& set = files[j];
    if (set.empty()) {
      return absl::InvalidArgumentError(absl::StrCat("topic ", j, " has no files"));
    }
    std::sort(set.begin(), set.end());
    set.erase(std::unique(set.begin(), set.end()), set.end());
    for (int f : set) {
      if (f < 0 || f >= num_files) {
        return absl::OutOfRangeError(
            absl::StrCat("topic ", j, " lists file ", f, " outside the catalog"));
      }
      catalog.member_[j * static_cast<size_t>(num_files) + f] = 1;
      ++coverage[f];
    }
  }
  for (int f = 0; f < num_files; ++f) {
    if (coverage[f] == 0) {
      return absl::InvalidArgumentError(
          absl::StrCat("file ", f, " belongs to no topic"));
    }
  }
  catalog.labels_ = std::move(labels);
  catalog.files_ = std::move(files);
  return catalog;
}

TopicCatalog TopicCatalog::Unrestricted(int num_topics, int num_files) {
  std::vector<std::string> labels;
  std::vector<std::vector<int>> files;
  std::vector<int> all(num_files);
  for (int f = 0; f < num_files; ++f) all[f] = f;
  for (int j = 0; j < num_topics; ++j) {
    labels.push_back(absl::StrCat("z", j));
    files.push_back(all);
  }
  return *Create(std::move(labels), std::move(files), num_files);
}

absl::Status ValidateEmConfig(const EmConfig& config) {
  if (config.num_topics < 1) return absl::InvalidArgumentError("need at least one topic");
  if (!(config.tolerance > 0.0)) {
    return absl::InvalidArgumentError("EM tolerance must be positive");
  }
  if (config.max_iterations < 1) {
    return absl::InvalidArgumentError("EM needs at least one iteration");
  }
  return absl::OkStatus();
}

absl::StatusOr<Likelihood> LogLikelihood(const PlsaModel& model,
                                         const RequestMatrix& requests) {
  if (model.num_users() != requests.num_users() ||
      model.num_files() != requests.num_files() ||
      model.topic_pref.rows() != model.num_users() ||
      model.topic_pref.cols() != model.num_topics ||
      model.file_given_topic.rows() != model.num_topics) {
    return absl::InvalidArgumentError("model and request matrix dimensions differ");
  }
  return ComputeLikelihood(model, FromRequests(requests));
}

absl::StatusOr<std::vector<double>> EstimateActive(const RequestMatrix& requests) {
  if (requests.total() <= 0) return absl::FailedPreconditionError("empty request history");
  std::vector<double> w(requests.num_users());
  const double total = static_cast<double>(requests.total());
  for (int k = 0; k < requests.num_users(); ++k) {
    w[k] = static_cast<double>(requests.user_total(k)) / total;
  }
  return w;
}

absl::StatusOr<EmResult> EmFit(const RequestMatrix& requests, const EmConfig& config,
                               const TopicCatalog* catalog,
                               const EmObserver& observer) {
  return FitObservations(FromRequests(requests), config, catalog, observer);
}

absl::StatusOr<EmResult> EmFitWeighted(const Matrix& weights, const EmConfig& config,
                                       const TopicCatalog* catalog) {
  for (double v : weights.data()) {
    if (!(v >= 0.0)) return absl::InvalidArgumentError("negative request weight");
  }
  return FitObservations(FromWeights(weights), config, catalog, {});
}

std::vector<double> TopicPosterior(const PlsaModel& model, int user, int file) {
  std::vector<double> post(model.num_topics);
  double denom = 0.0;
  for (int j = 0; j < model.num_topics; ++j) {
    post[j] = model.topic_pref(user, j) * model.file_given_topic(j, file);
    denom += post[j];
  }
  if (denom == 0.0) return std::vector<double>(model.num_topics, 0.0);
  for (double& v : post) v /= denom;
  return post;
}

DemandProfile PredictPreferences(const PlsaModel& model) {
  DemandProfile profile;
  profile.active = model.active;
  const int k_users = model.num_users();
  const int f_files = model.num_files();
  profile.preference = Matrix(k_users, f_files);
  for (int k = 0; k < k_users; ++k) {
    auto q = profile.preference.row(k);
    for (int j = 0; j < model.num_topics; ++j) {
      const double t = model.topic_pref(k, j);
      if (t == 0.0) continue;
      const auto p = model.file_given_topic.row(j);
      for (int f = 0; f < f_files; ++f) q[f] += p[f] * t;
    }
  }
  return profile;
}

absl::StatusOr<PriorFitResult> PriorFit(const RequestMatrix& requests,
                                        const PriorKnowledge& prior,
                                        const EmConfig& config,
                                        const EmObserver& observer) {
  if (absl::Status s = ValidateEmConfig(config); !s.ok()) return s;
  if (requests.total() <= 0) return absl::FailedPreconditionError("empty request history");
  const int k_users = requests.num_users();
  const int f_files = requests.num_files();
  const int z_topics = prior.topic_pref.cols();
  if (prior.topic_pref.rows() != k_users) {
    return absl::InvalidArgumentError(absl::StrCat(
        "topic preferences cover ", prior.topic_pref.rows(), " users, requests ", k_users));
  }
  if (absl::Status s = CheckCatalog(&prior.catalog, z_topics, f_files); !s.ok()) return s;
  for (int k = 0; k < k_users; ++k) {
    double s = 0.0;
    for (double v : prior.topic_pref.row(k)) s += v;
    if (std::fabs(s - 1.0) > 1e-10) {
      return absl::InvalidArgumentError(
          absl::StrCat("topic preference row ", k, " sums to ", s));
    }
  }

  PriorFitResult out;
  PlsaModel& model = out.model;
  model.num_topics = z_topics;
  if (prior.active.has_value()) {
    if (static_cast<int>(prior.active->size()) != k_users) {
      return absl::InvalidArgumentError("known active levels have the wrong length");
    }
    model.active = *prior.active;
  } else {
    model.active = *EstimateActive(requests);
  }
  model.topic_pref = prior.topic_pref;
  model.file_given_topic = Matrix(z_topics, f_files);
  Rng file_rng(DeriveSeed(config.seed, kFileGivenTopicStream));
  for (int j = 0; j < z_topics; ++j) {
    FillRandomRow(file_rng, model.file_given_topic.row(j), &prior.catalog, j);
  }

  const Observations obs = FromRequests(requests);
  EngineResult run =
      RunEm(obs, config, {.catalog = &prior.catalog, .learn_topic_pref = false}, model,
            observer);
  out.likelihood_trace = std::move(run.trace);
  out.iterations = run.iterations;
  out.converged = run.converged;
  out.reset_topics = std::move(run.reset_topics);
  Likelihood final_likelihood = ComputeLikelihood(model, obs);
  if (final_likelihood.minus_infinity) out.zero_cell = final_likelihood;
  out.profile = PredictPreferences(model);
  return out;
}

absl::StatusOr<DemandProfile> BaselineFit(const RequestMatrix& requests) {
  absl::StatusOr<FrequencyEstimates> estimates = MlEstimates(requests);
  if (!estimates.ok()) return estimates.status();
  return std::move(estimates->profile);
}

TopicCatalog CatalogFromModel(const PlsaModel& model, double relative_threshold) {
  const int z_topics = model.num_topics;
  const int f_files = model.num_files();
  std::vector<std::vector<int>> files(z_topics);
  std::vector<bool> covered(f_files, false);
  for (int j = 0; j < z_topics; ++j) {
    const auto row = model.file_given_topic.row(j);
    const double peak = *std::max_element(row.begin(), row.end());
    for (int f = 0; f < f_files; ++f) {
      if (peak > 0.0 && row[f] >= relative_threshold * peak) {
        files[j].push_back(f);
        covered[f] = true;
      }
    }
  }
  for (int f = 0; f < f_files; ++f) {
    if (covered[f]) continue;
    int best = 0;
    for (int j = 1; j < z_topics; ++j) {
      if (model.file_given_topic(j, f) > model.file_given_topic(best, f)) best = j;
    }
    files[best].push_back(f);
  }
  std::vector<std::string> labels;
  for (int j = 0; j < z_topics; ++j) labels.push_back(absl::StrCat("z", j));
  return *TopicCatalog::Create(std::move(labels), std::move(files), f_files);
}

int64_t BaselineParameterCount(int num_users, int num_files) {
  return static_cast<int64_t>(num_users) * num_files;
}

int64_t PlsaParameterCount(int num_users, int num_files, int num_topics) {
  return static_cast<int64_t>(num_topics) * (num_users + num_files) + num_users;
}

}  // namespace prefcache
