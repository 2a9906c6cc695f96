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

#include "prefcache/experiment.h"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <optional>
#include <utility>

#include "absl/strings/str_cat.h"
#include "json.hpp"
#include "prefcache/dataset.h"
#include "prefcache/io.h"
#include "prefcache/learner.h"
#include "prefcache/random.h"

namespace prefcache {
namespace {

using Json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

// Independent random streams derived from the scenario seed.
constexpr uint64_t kDemandStream = 10;
constexpr uint64_t kMobilityStream = 11;
constexpr uint64_t kRequestStream = 12;
constexpr uint64_t kEmStream = 13;
constexpr uint64_t kPlacementStream = 14;
constexpr uint64_t kDatasetStream = 15;
constexpr uint64_t kPriorStream = 16;
constexpr uint64_t kPriorRequestStream = 17;

constexpr std::string_view kMovieLensPrefix = "movielens:";
// Request rate used to translate request counts into hours in the manifest.
constexpr double kRequestsPerSecond = 0.04;

constexpr Scheme kAllSchemes[] = {Scheme::kS1Perfect, Scheme::kS2Perfect,
                                  Scheme::kS1Em,      Scheme::kS2Em,
                                  Scheme::kS1Prior,   Scheme::kS2Prior,
                                  Scheme::kS1Baseline, Scheme::kS2Baseline};

double Seconds(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string_view Trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> SplitList(std::string_view s) {
  std::vector<std::string_view> items;
  size_t start = 0;
  while (start <= s.size()) {
    size_t end = s.find(',', start);
    if (end == std::string_view::npos) end = s.size();
    std::string_view item = Trim(s.substr(start, end - start));
    if (!item.empty()) items.push_back(item);
    start = end + 1;
  }
  return items;
}

template <typename T>
absl::Status ParseNumber(std::string_view key, std::string_view text, T& out) {
  text = Trim(text);
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, out);
  if (text.empty() || ec != std::errc() || ptr != end) {
    return absl::InvalidArgumentError(absl::StrCat("bad value '", std::string(text),
                                                   "' for ", std::string(key)));
  }
  return absl::OkStatus();
}

std::vector<std::pair<std::string, std::string>> ScenarioEntries(const Scenario& s) {
  std::string schemes;
  for (Scheme scheme : s.schemes) {
    if (!schemes.empty()) schemes += ",";
    schemes += std::string(SchemeName(scheme));
  }
  std::string checkpoints;
  for (int64_t c : s.checkpoints) {
    if (!checkpoints.empty()) checkpoints += ",";
    absl::StrAppend(&checkpoints, c);
  }
  return {
      {"num_users", absl::StrCat(s.num_users)},
      {"num_files", absl::StrCat(s.num_files)},
      {"cache_size", absl::StrCat(s.cache_size)},
      {"r_c_m", FormatDouble(s.r_c_m)},
      {"area_side_m", FormatDouble(s.area_side_m)},
      {"alpha", FormatDouble(s.alpha)},
      {"beta", FormatDouble(s.beta)},
      {"v_max_mps", FormatDouble(s.v_max_mps)},
      {"period_s", FormatDouble(s.period_s)},
      {"leg_duration_s", FormatDouble(s.leg_duration_s)},
      {"time_step_s", FormatDouble(s.time_step_s)},
      {"num_topics", absl::StrCat(s.num_topics)},
      {"seed", absl::StrCat(s.seed)},
      {"schemes", schemes},
      {"checkpoints", checkpoints},
      {"data_source", s.data_source},
      {"algorithm", s.algorithm == Algorithm::kGreedy ? "greedy" : "alternating"},
      {"em_tolerance", FormatDouble(s.em_tolerance)},
      {"em_max_iterations", absl::StrCat(s.em_max_iterations)},
      {"prior_mode", s.prior_mode == PriorMode::kOracle ? "oracle" : "history"},
      {"prior_requests", absl::StrCat(s.prior_requests)},
      {"prior_catalog_threshold", FormatDouble(s.prior_catalog_threshold)},
  };
}

// Draws (user, file) pairs from the joint distribution w_k q_{f|k}.
class JointSampler {
 public:
  explicit JointSampler(const DemandProfile& profile)
      : num_files_(profile.num_files()) {
    cumulative_.reserve(static_cast<size_t>(profile.num_users()) * num_files_);
    double total = 0.0;
    for (int k = 0; k < profile.num_users(); ++k) {
      for (int f = 0; f < num_files_; ++f) {
        total += profile.active[k] * profile.preference(k, f);
        cumulative_.push_back(total);
      }
    }
  }

  void Draw(Rng& rng, int64_t count, RequestMatrix& into) const {
    const double total = cumulative_.back();
    for (int64_t i = 0; i < count; ++i) {
      const double u = rng.Uniform() * total;
      auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
      if (it == cumulative_.end()) --it;
      // Skip zero-probability cells that share the bound.
      while (it != cumulative_.begin() && *(it - 1) == *it) --it;
      const auto cell = static_cast<int64_t>(it - cumulative_.begin());
      into.Add(static_cast<int>(cell / num_files_), static_cast<int>(cell % num_files_));
    }
  }

 private:
  int num_files_;
  std::vector<double> cumulative_;
};

struct RequestCell {
  int user;
  int file;
};

// Demand built from MovieLens ratings.
struct DatasetDemand {
  DemandProfile truth;
  // Every observed request, in a seeded random order.
  std::vector<RequestCell> requests;
  std::optional<PriorKnowledge> prior;
};

absl::StatusOr<DatasetDemand> LoadMovieLensDemand(const Scenario& scenario,
                                                  const std::string& directory,
                                                  bool want_prior) {
  const std::filesystem::path dir(directory);
  absl::StatusOr<ParseResult<MovieRecord>> movies =
      ReadMoviesFile((dir / "movies.dat").string());
  if (!movies.ok()) return movies.status();
  absl::StatusOr<ParseResult<RatingRecord>> ratings =
      ReadRatingsFile((dir / "ratings.dat").string());
  if (!ratings.ok()) return ratings.status();

  std::vector<int64_t> user_ids, movie_ids;
  for (const RatingRecord& r : ratings->records) user_ids.push_back(r.user_id);
  for (const MovieRecord& m : movies->records) movie_ids.push_back(m.movie_id);
  const IdIndex users = IdIndex::Sorted(std::move(user_ids));
  const IdIndex all_movies = IdIndex::Sorted(std::move(movie_ids));
  absl::StatusOr<RequestData> full = ToRequestMatrix(ratings->records, users, all_movies);
  if (!full.ok()) return full.status();
  const RequestMatrix& n = full->requests;

  if (scenario.num_files > n.num_files()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "num_files ", scenario.num_files, " exceeds the ", n.num_files(), " listed movies"));
  }
  // Most requested movies, ties to the lower id.
  std::vector<int> by_count(n.num_files());
  for (int f = 0; f < n.num_files(); ++f) by_count[f] = f;
  std::stable_sort(by_count.begin(), by_count.end(),
                   [&](int a, int b) { return n.file_total(a) > n.file_total(b); });
  std::vector<int> top(by_count.begin(), by_count.begin() + scenario.num_files);
  std::sort(top.begin(), top.end());
  std::vector<int> rest(by_count.begin() + scenario.num_files, by_count.end());
  std::sort(rest.begin(), rest.end());
  const RequestMatrix top_requests = n.SelectFiles(top);

  std::vector<int> eligible;
  for (int k = 0; k < n.num_users(); ++k) {
    if (top_requests.user_total(k) > 0) eligible.push_back(k);
  }
  if (scenario.num_users > static_cast<int>(eligible.size())) {
    return absl::InvalidArgumentError(
        absl::StrCat("num_users ", scenario.num_users, " exceeds the ", eligible.size(),
                     " users with requests among the selected movies"));
  }
  Rng rng(DeriveSeed(scenario.seed, kDatasetStream));
  std::vector<int> chosen;
  for (int i : rng.SampleWithoutReplacement(static_cast<int>(eligible.size()),
                                            scenario.num_users)) {
    chosen.push_back(eligible[i]);
  }
  std::sort(chosen.begin(), chosen.end());

  RequestMatrix selected(scenario.num_users, scenario.num_files);
  RequestMatrix outside(scenario.num_users, static_cast<int>(rest.size()));
  const RequestMatrix rest_requests = n.SelectFiles(rest);
  for (int k = 0; k < scenario.num_users; ++k) {
    for (const auto& e : top_requests.row(chosen[k])) selected.Set(k, e.file, e.count);
    for (const auto& e : rest_requests.row(chosen[k])) outside.Set(k, e.file, e.count);
  }

  DatasetDemand out;
  absl::StatusOr<FrequencyEstimates> truth = MlEstimates(selected);
  if (!truth.ok()) return truth.status();
  out.truth = std::move(truth->profile);
  std::vector<RequestCell> cells;
  for (int k = 0; k < selected.num_users(); ++k) {
    for (const auto& e : selected.row(k)) cells.push_back({k, e.file});
  }
  for (int i : rng.SampleWithoutReplacement(static_cast<int>(cells.size()),
                                            static_cast<int>(cells.size()))) {
    out.requests.push_back(cells[i]);
  }

  if (want_prior && scenario.prior_mode == PriorMode::kOracle) {
    // Topic preferences from the same users' ratings of the other movies,
    // with topics pinned to genres.
    if (outside.total() == 0) {
      return absl::FailedPreconditionError(
          "no ratings outside the selected movies to learn topic preferences from");
    }
    std::vector<int64_t> top_ids, rest_ids;
    for (int f : top) top_ids.push_back(all_movies.id(f));
    for (int f : rest) rest_ids.push_back(all_movies.id(f));
    const IdIndex top_index(top_ids), rest_index(rest_ids);
    const IdIndex* sets[] = {&top_index, &rest_index};
    const std::vector<int> genres = CommonGenres(movies->records, sets);
    absl::StatusOr<TopicCatalog> rest_catalog =
        GenreCatalog(movies->records, rest_index, genres);
    if (!rest_catalog.ok()) return rest_catalog.status();
    absl::StatusOr<TopicCatalog> top_catalog =
        GenreCatalog(movies->records, top_index, genres);
    if (!top_catalog.ok()) return top_catalog.status();
    EmConfig config{.num_topics = static_cast<int>(genres.size()),
                    .seed = DeriveSeed(scenario.seed, kPriorStream),
                    .tolerance = scenario.em_tolerance,
                    .max_iterations = scenario.em_max_iterations};
    absl::StatusOr<EmResult> fit = EmFit(outside, config, &*rest_catalog);
    if (!fit.ok()) return fit.status();
    out.prior = PriorKnowledge{.topic_pref = fit->model.topic_pref,
                               .catalog = std::move(*top_catalog),
                               .active = std::nullopt};
  }
  return out;
}

absl::StatusOr<Placement> Optimize(const Scenario& scenario, const DemandProfile& profile,
                                   const ContactMatrix& contacts) {
  if (scenario.algorithm == Algorithm::kGreedy) {
    return GreedyOptimize(profile, contacts, scenario.cache_size);
  }
  AlternatingOptions options;
  options.seed = DeriveSeed(scenario.seed, kPlacementStream);
  return AlternatingOptimize(profile, contacts, scenario.cache_size, options);
}

absl::StatusOr<Placement> OptimizePopularity(const Scenario& scenario,
                                             const PopularityVector& popularity,
                                             const ContactMatrix& contacts) {
  return PopularityPolicy(popularity, contacts, scenario.cache_size, scenario.algorithm,
                          DeriveSeed(scenario.seed, kPlacementStream));
}

// Learned demand for one checkpoint.
struct Learned {
  DemandProfile profile;
  int iterations = 0;
  double seconds = 0.0;
};

SchemeResult* FindResult(std::vector<SchemeResult>& results, Scheme scheme) {
  for (SchemeResult& r : results) {
    if (r.scheme == scheme) return &r;
  }
  return nullptr;
}

absl::Status Score(const Scenario& scenario, const ScenarioRun& run, Scheme scheme,
                   const DemandProfile& design, int64_t requests, const Learned* learned,
                   std::vector<SchemeResult>& results) {
  SchemeResult* result = FindResult(results, scheme);
  if (result == nullptr) return absl::OkStatus();
  const auto start = Clock::now();
  absl::StatusOr<Placement> placement =
      IsPreferenceScheme(scheme)
          ? Optimize(scenario, design, run.contacts)
          : OptimizePopularity(scenario, AggregatePopularity(design), run.contacts);
  if (!placement.ok()) return placement.status();
  absl::StatusOr<double> value =
      OffloadingProbability(run.truth, run.contacts, placement->caching);
  if (!value.ok()) return value.status();
  CheckpointResult point;
  point.requests = requests;
  point.offloading_probability = *value;
  point.caching = std::move(placement->caching);
  point.learner_iterations = learned != nullptr ? learned->iterations : 0;
  point.seconds = Seconds(start) + (learned != nullptr ? learned->seconds : 0.0);
  result->checkpoints.push_back(std::move(point));
  return absl::OkStatus();
}

bool Wants(const Scenario& scenario, Scheme a, Scheme b) {
  return std::find(scenario.schemes.begin(), scenario.schemes.end(), a) !=
             scenario.schemes.end() ||
         std::find(scenario.schemes.begin(), scenario.schemes.end(), b) !=
             scenario.schemes.end();
}

Json ManifestBase(const Scenario& scenario) {
  Json json;
  json["tool"] = "prefcache";
  json["version"] = std::string(Version());
  Json entries = Json::object();
  for (const auto& [key, value] : ScenarioEntries(scenario)) entries[key] = value;
  json["scenario"] = entries;
  json["seed"] = scenario.seed;
  json["streams"] = {{"demand", kDemandStream},       {"mobility", kMobilityStream},
                     {"requests", kRequestStream},    {"em", kEmStream},
                     {"placement", kPlacementStream}, {"dataset", kDatasetStream},
                     {"prior", kPriorStream},         {"prior_requests", kPriorRequestStream}};
  return json;
}

}  // namespace

std::string_view Version() { return "0.1.0"; }

std::string_view SchemeName(Scheme scheme) {
  switch (scheme) {
    case Scheme::kS1Perfect:
      return "S1-perfect";
    case Scheme::kS2Perfect:
      return "S2-perfect";
    case Scheme::kS1Em:
      return "S1-EM";
    case Scheme::kS2Em:
      return "S2-EM";
    case Scheme::kS1Prior:
      return "S1-prior";
    case Scheme::kS2Prior:
      return "S2-prior";
    case Scheme::kS1Baseline:
      return "S1-baseline";
    case Scheme::kS2Baseline:
      return "S2-baseline";
  }
  return "unknown";
}

absl::StatusOr<Scheme> ParseScheme(std::string_view name) {
  for (Scheme s : kAllSchemes) {
    if (SchemeName(s) == name) return s;
  }
  return absl::InvalidArgumentError(absl::StrCat("unknown scheme '", std::string(name), "'"));
}

bool IsPreferenceScheme(Scheme scheme) {
  return scheme == Scheme::kS1Perfect || scheme == Scheme::kS1Em ||
         scheme == Scheme::kS1Prior || scheme == Scheme::kS1Baseline;
}

bool IsLearningScheme(Scheme scheme) {
  return scheme != Scheme::kS1Perfect && scheme != Scheme::kS2Perfect;
}

absl::Status ValidateScenario(const Scenario& s) {
  if (s.num_users < 1 || s.num_files < 1) {
    return absl::InvalidArgumentError("num_users and num_files must be positive");
  }
  if (s.cache_size < 0 || s.cache_size > s.num_files) {
    return absl::InvalidArgumentError(
        absl::StrCat("cache_size ", s.cache_size, " outside [0, num_files]"));
  }
  if (!(s.r_c_m >= 0.0) || !(s.area_side_m >= 0.0)) {
    return absl::InvalidArgumentError("r_c_m and area_side_m must be non-negative");
  }
  if (!(s.alpha > 0.0 && s.alpha <= 1.0)) {
    return absl::InvalidArgumentError("alpha must lie in (0, 1]");
  }
  if (!(s.beta >= 0.0)) return absl::InvalidArgumentError("beta must be non-negative");
  if (s.num_topics < 1) return absl::InvalidArgumentError("num_topics must be positive");
  if (s.schemes.empty()) return absl::InvalidArgumentError("scheme list is empty");
  for (size_t i = 0; i < s.schemes.size(); ++i) {
    for (size_t j = 0; j < i; ++j) {
      if (s.schemes[i] == s.schemes[j]) {
        return absl::InvalidArgumentError(
            absl::StrCat("scheme ", std::string(SchemeName(s.schemes[i])), " listed twice"));
      }
    }
  }
  if (s.checkpoints.empty()) return absl::InvalidArgumentError("no checkpoints");
  for (size_t i = 0; i < s.checkpoints.size(); ++i) {
    if (s.checkpoints[i] < 0) return absl::InvalidArgumentError("negative checkpoint");
    if (i > 0 && s.checkpoints[i] <= s.checkpoints[i - 1]) {
      return absl::InvalidArgumentError("checkpoints must be strictly increasing");
    }
  }
  const bool learning = std::any_of(s.schemes.begin(), s.schemes.end(), IsLearningScheme);
  if (learning && s.checkpoints.front() == 0) {
    return absl::InvalidArgumentError("learning schemes need at least one request");
  }
  if (s.data_source != "synthetic" && !s.data_source.starts_with(kMovieLensPrefix)) {
    return absl::InvalidArgumentError(
        absl::StrCat("data_source must be 'synthetic' or 'movielens:<dir>', got '",
                     s.data_source, "'"));
  }
  if (!(s.em_tolerance > 0.0) || s.em_max_iterations < 1) {
    return absl::InvalidArgumentError("invalid EM stopping rule");
  }
  if (s.prior_requests < 1) return absl::InvalidArgumentError("prior_requests must be positive");
  if (!(s.prior_catalog_threshold >= 0.0 && s.prior_catalog_threshold <= 1.0)) {
    return absl::InvalidArgumentError("prior_catalog_threshold must lie in [0, 1]");
  }
  MobilityConfig mobility{.area_side_m = s.area_side_m, .v_max_mps = s.v_max_mps,
                          .period_s = s.period_s, .leg_duration_s = s.leg_duration_s,
                          .time_step_s = s.time_step_s, .seed = s.seed};
  return ValidateMobilityConfig(mobility);
}

absl::Status SetScenarioValue(Scenario& s, std::string_view key, std::string_view value) {
  value = Trim(value);
  if (key == "num_users") return ParseNumber(key, value, s.num_users);
  if (key == "num_files") return ParseNumber(key, value, s.num_files);
  if (key == "cache_size") return ParseNumber(key, value, s.cache_size);
  if (key == "r_c_m") return ParseNumber(key, value, s.r_c_m);
  if (key == "area_side_m") return ParseNumber(key, value, s.area_side_m);
  if (key == "alpha") return ParseNumber(key, value, s.alpha);
  if (key == "beta") return ParseNumber(key, value, s.beta);
  if (key == "v_max_mps") return ParseNumber(key, value, s.v_max_mps);
  if (key == "period_s") return ParseNumber(key, value, s.period_s);
  if (key == "leg_duration_s") return ParseNumber(key, value, s.leg_duration_s);
  if (key == "time_step_s") return ParseNumber(key, value, s.time_step_s);
  if (key == "num_topics") return ParseNumber(key, value, s.num_topics);
  if (key == "seed") return ParseNumber(key, value, s.seed);
  if (key == "em_tolerance") return ParseNumber(key, value, s.em_tolerance);
  if (key == "em_max_iterations") return ParseNumber(key, value, s.em_max_iterations);
  if (key == "prior_requests") return ParseNumber(key, value, s.prior_requests);
  if (key == "prior_catalog_threshold") {
    return ParseNumber(key, value, s.prior_catalog_threshold);
  }
  if (key == "data_source") {
    s.data_source = std::string(value);
    return absl::OkStatus();
  }
  if (key == "algorithm") {
    if (value == "greedy") {
      s.algorithm = Algorithm::kGreedy;
    } else if (value == "alternating") {
      s.algorithm = Algorithm::kAlternating;
    } else {
      return absl::InvalidArgumentError(
          absl::StrCat("algorithm must be greedy or alternating, got '", std::string(value), "'"));
    }
    return absl::OkStatus();
  }
  if (key == "prior_mode") {
    if (value == "oracle") {
      s.prior_mode = PriorMode::kOracle;
    } else if (value == "history") {
      s.prior_mode = PriorMode::kHistory;
    } else {
      return absl::InvalidArgumentError(
          absl::StrCat("prior_mode must be oracle or history, got '", std::string(value), "'"));
    }
    return absl::OkStatus();
  }
  if (key == "schemes") {
    std::vector<Scheme> schemes;
    for (std::string_view item : SplitList(value)) {
      absl::StatusOr<Scheme> scheme = ParseScheme(item);
      if (!scheme.ok()) return scheme.status();
      schemes.push_back(*scheme);
    }
    s.schemes = std::move(schemes);
    return absl::OkStatus();
  }
  if (key == "checkpoints") {
    std::vector<int64_t> checkpoints;
    for (std::string_view item : SplitList(value)) {
      int64_t c = 0;
      if (absl::Status st = ParseNumber(key, item, c); !st.ok()) return st;
      checkpoints.push_back(c);
    }
    s.checkpoints = std::move(checkpoints);
    return absl::OkStatus();
  }
  return absl::InvalidArgumentError(absl::StrCat("unknown scenario key '", std::string(key), "'"));
}

absl::StatusOr<Scenario> ParseScenario(std::string_view text) {
  Scenario scenario;
  int line_number = 0;
  size_t start = 0;
  while (start < text.size()) {
    size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_number;
    if (const size_t hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = Trim(line);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      return absl::InvalidArgumentError(
          absl::StrCat("line ", line_number, ": expected key = value"));
    }
    absl::Status s = SetScenarioValue(scenario, Trim(line.substr(0, eq)), line.substr(eq + 1));
    if (!s.ok()) {
      return absl::InvalidArgumentError(absl::StrCat("line ", line_number, ": ", s.message()));
    }
  }
  if (absl::Status s = ValidateScenario(scenario); !s.ok()) return s;
  return scenario;
}

std::string FormatScenario(const Scenario& scenario) {
  std::string out;
  for (const auto& [key, value] : ScenarioEntries(scenario)) {
    absl::StrAppend(&out, key, " = ", value, "\n");
  }
  return out;
}

absl::StatusOr<ScenarioRun> RunScenario(const Scenario& scenario) {
  if (absl::Status s = ValidateScenario(scenario); !s.ok()) return s;
  const auto start = Clock::now();
  const bool want_em = Wants(scenario, Scheme::kS1Em, Scheme::kS2Em);
  const bool want_prior = Wants(scenario, Scheme::kS1Prior, Scheme::kS2Prior);
  const bool want_baseline = Wants(scenario, Scheme::kS1Baseline, Scheme::kS2Baseline);

  ScenarioRun run;
  std::optional<DatasetDemand> dataset;
  std::optional<PriorKnowledge> prior;
  if (scenario.data_source.starts_with(kMovieLensPrefix)) {
    absl::StatusOr<DatasetDemand> loaded = LoadMovieLensDemand(
        scenario, scenario.data_source.substr(kMovieLensPrefix.size()), want_prior);
    if (!loaded.ok()) return loaded.status();
    dataset = std::move(*loaded);
    run.truth = dataset->truth;
    prior = dataset->prior;
    if (scenario.checkpoints.back() > static_cast<int64_t>(dataset->requests.size())) {
      return absl::InvalidArgumentError(absl::StrCat(
          "last checkpoint ", scenario.checkpoints.back(), " exceeds the ",
          dataset->requests.size(), " available requests"));
    }
  } else {
    SynthesisParams params{.num_files = scenario.num_files, .num_users = scenario.num_users,
                           .alpha = scenario.alpha, .beta = scenario.beta,
                           .seed = DeriveSeed(scenario.seed, kDemandStream)};
    absl::StatusOr<SyntheticDemand> demand = SynthesizeDemand(params);
    if (!demand.ok()) return demand.status();
    run.truth = std::move(demand->profile);
    run.regenerated_users = demand->regenerated_users;
  }
  if (run.truth.num_users() >= 2) {
    absl::StatusOr<double> similarity = AverageSimilarity(run.truth.preference);
    if (similarity.ok()) run.average_similarity = *similarity;
  }

  MobilityConfig mobility{.area_side_m = scenario.area_side_m,
                          .v_max_mps = scenario.v_max_mps,
                          .period_s = scenario.period_s,
                          .leg_duration_s = scenario.leg_duration_s,
                          .time_step_s = scenario.time_step_s,
                          .seed = DeriveSeed(scenario.seed, kMobilityStream)};
  absl::StatusOr<ContactMatrix> contacts =
      RandomWalkContacts(mobility, scenario.num_users, scenario.r_c_m);
  if (!contacts.ok()) return contacts.status();
  run.contacts = std::move(*contacts);

  const EmConfig em_config{.num_topics = scenario.num_topics,
                           .seed = DeriveSeed(scenario.seed, kEmStream),
                           .tolerance = scenario.em_tolerance,
                           .max_iterations = scenario.em_max_iterations};
  const JointSampler sampler(run.truth);
  if (want_prior && !prior.has_value()) {
    const EmConfig prior_config{.num_topics = scenario.num_topics,
                                .seed = DeriveSeed(scenario.seed, kPriorStream),
                                .tolerance = scenario.em_tolerance,
                                .max_iterations = scenario.em_max_iterations};
    absl::StatusOr<EmResult> fit;
    std::optional<std::vector<double>> active;
    if (scenario.prior_mode == PriorMode::kOracle) {
      Matrix joint(run.truth.num_users(), run.truth.num_files());
      for (int k = 0; k < joint.rows(); ++k) {
        for (int f = 0; f < joint.cols(); ++f) {
          joint(k, f) = run.truth.active[k] * run.truth.preference(k, f);
        }
      }
      fit = EmFitWeighted(joint, prior_config);
      active = run.truth.active;
    } else {
      RequestMatrix history(run.truth.num_users(), run.truth.num_files());
      Rng rng(DeriveSeed(scenario.seed, kPriorRequestStream));
      sampler.Draw(rng, scenario.prior_requests, history);
      fit = EmFit(history, prior_config);
    }
    if (!fit.ok()) return fit.status();
    prior = PriorKnowledge{
        .topic_pref = fit->model.topic_pref,
        .catalog = CatalogFromModel(fit->model, scenario.prior_catalog_threshold),
        .active = std::move(active)};
  }

  for (Scheme scheme : scenario.schemes) run.results.push_back({.scheme = scheme, .checkpoints = {}});
  // Perfect knowledge does not depend on the history; design once.
  for (Scheme scheme : {Scheme::kS1Perfect, Scheme::kS2Perfect}) {
    SchemeResult* result = FindResult(run.results, scheme);
    if (result == nullptr) continue;
    std::vector<SchemeResult> single(1);
    single[0].scheme = scheme;
    if (absl::Status s = Score(scenario, run, scheme, run.truth, 0, nullptr, single);
        !s.ok()) {
      return s;
    }
    for (int64_t c : scenario.checkpoints) {
      CheckpointResult point = single[0].checkpoints[0];
      point.requests = c;
      result->checkpoints.push_back(std::move(point));
    }
  }

  const bool learning = want_em || want_prior || want_baseline;
  RequestMatrix history(run.truth.num_users(), run.truth.num_files());
  Rng request_rng(DeriveSeed(scenario.seed, kRequestStream));
  int64_t drawn = 0;
  for (int64_t checkpoint : scenario.checkpoints) {
    if (!learning) break;
    if (dataset.has_value()) {
      for (; drawn < checkpoint; ++drawn) {
        const RequestCell cell = dataset->requests[drawn];
        history.Add(cell.user, cell.file);
      }
    } else {
      sampler.Draw(request_rng, checkpoint - drawn, history);
      drawn = checkpoint;
    }

    if (want_em) {
      const auto t0 = Clock::now();
      absl::StatusOr<EmResult> fit = EmFit(history, em_config);
      if (!fit.ok()) return fit.status();
      Learned learned{PredictPreferences(fit->model), fit->iterations, Seconds(t0)};
      for (Scheme s : {Scheme::kS1Em, Scheme::kS2Em}) {
        if (absl::Status st =
                Score(scenario, run, s, learned.profile, checkpoint, &learned, run.results);
            !st.ok()) {
          return st;
        }
      }
    }
    if (want_prior) {
      const auto t0 = Clock::now();
      absl::StatusOr<PriorFitResult> fit = PriorFit(history, *prior, em_config);
      if (!fit.ok()) return fit.status();
      Learned learned{std::move(fit->profile), fit->iterations, Seconds(t0)};
      for (Scheme s : {Scheme::kS1Prior, Scheme::kS2Prior}) {
        if (absl::Status st =
                Score(scenario, run, s, learned.profile, checkpoint, &learned, run.results);
            !st.ok()) {
          return st;
        }
      }
    }
    if (want_baseline) {
      const auto t0 = Clock::now();
      absl::StatusOr<DemandProfile> fit = BaselineFit(history);
      if (!fit.ok()) return fit.status();
      Learned learned{std::move(*fit), 0, Seconds(t0)};
      for (Scheme s : {Scheme::kS1Baseline, Scheme::kS2Baseline}) {
        if (absl::Status st =
                Score(scenario, run, s, learned.profile, checkpoint, &learned, run.results);
            !st.ok()) {
          return st;
        }
      }
    }
  }
  run.seconds = Seconds(start);
  return run;
}

absl::StatusOr<SweepParameter> ParseSweepParameter(std::string_view name) {
  for (SweepParameter p : {SweepParameter::kAlpha, SweepParameter::kBeta,
                           SweepParameter::kCacheSize, SweepParameter::kCollaborationDistance,
                           SweepParameter::kVMax}) {
    if (SweepParameterName(p) == name) return p;
  }
  return absl::InvalidArgumentError(
      absl::StrCat("sweep parameter must be alpha, beta, M, r_c or v_max, got '",
                   std::string(name), "'"));
}

std::string_view SweepParameterName(SweepParameter parameter) {
  switch (parameter) {
    case SweepParameter::kAlpha:
      return "alpha";
    case SweepParameter::kBeta:
      return "beta";
    case SweepParameter::kCacheSize:
      return "M";
    case SweepParameter::kCollaborationDistance:
      return "r_c";
    case SweepParameter::kVMax:
      return "v_max";
  }
  return "unknown";
}

absl::StatusOr<std::vector<SweepRow>> Sweep(const Scenario& scenario,
                                            SweepParameter parameter,
                                            const std::vector<double>& values) {
  if (values.empty()) return absl::InvalidArgumentError("no sweep values");
  std::vector<SweepRow> rows;
  for (double value : values) {
    Scenario point = scenario;
    point.schemes = {Scheme::kS1Perfect, Scheme::kS2Perfect};
    point.checkpoints = {0};
    switch (parameter) {
      case SweepParameter::kAlpha:
        point.alpha = value;
        break;
      case SweepParameter::kBeta:
        point.beta = value;
        break;
      case SweepParameter::kCacheSize:
        if (value != std::floor(value)) {
          return absl::InvalidArgumentError("cache sizes must be whole numbers");
        }
        point.cache_size = static_cast<int>(value);
        break;
      case SweepParameter::kCollaborationDistance:
        point.r_c_m = value;
        break;
      case SweepParameter::kVMax:
        point.v_max_mps = value;
        break;
    }
    absl::StatusOr<ScenarioRun> run = RunScenario(point);
    if (!run.ok()) {
      return absl::Status(run.status().code(),
                          absl::StrCat(std::string(SweepParameterName(parameter)), "=",
                                       FormatDouble(value), ": ", run.status().message()));
    }
    rows.push_back({value, run->results[0].checkpoints[0].offloading_probability,
                    run->results[1].checkpoints[0].offloading_probability});
  }
  return rows;
}

absl::Status EmitResults(const Scenario& scenario, const ScenarioRun* run,
                         const std::string& directory, const EmitOptions& options) {
  if (absl::Status s = EnsureDirectory(directory); !s.ok()) return s;
  const std::filesystem::path dir(directory);
  Json manifest = ManifestBase(scenario);
  manifest["kind"] = "run";
  Json files = Json::array();
  if (run != nullptr && !run->results.empty()) {
    manifest["average_similarity"] = run->average_similarity;
    manifest["regenerated_users"] = run->regenerated_users;
    Json hours = Json::array();
    for (int64_t c : scenario.checkpoints) {
      hours.push_back(static_cast<double>(c) / kRequestsPerSecond / 3600.0);
    }
    manifest["time_axis"] = {{"unit", "accumulated requests"},
                             {"requests_per_second", kRequestsPerSecond},
                             {"hours", hours}};
    Json timing = Json::object();
    for (const SchemeResult& result : run->results) {
      std::string csv = "requests,offloading_probability\n";
      Json seconds = Json::array();
      for (const CheckpointResult& point : result.checkpoints) {
        absl::StrAppend(&csv, point.requests, ",",
                        FormatDouble(point.offloading_probability), "\n");
        seconds.push_back(point.seconds);
      }
      const std::string name = absl::StrCat(std::string(SchemeName(result.scheme)), ".csv");
      if (absl::Status s = WriteFileAtomic((dir / name).string(), csv); !s.ok()) return s;
      files.push_back(name);
      timing[std::string(SchemeName(result.scheme))] = seconds;
    }
    if (options.record_timing) {
      manifest["seconds"] = run->seconds;
      manifest["scheme_seconds"] = timing;
    }
  }
  manifest["files"] = files;
  return WriteFileAtomic((dir / "manifest.json").string(), manifest.dump(2) + "\n");
}

absl::Status EmitSweep(const Scenario& scenario, SweepParameter parameter,
                       const std::vector<SweepRow>& rows, const std::string& directory) {
  if (absl::Status s = EnsureDirectory(directory); !s.ok()) return s;
  const std::filesystem::path dir(directory);
  const std::string name =
      absl::StrCat("sweep_", std::string(SweepParameterName(parameter)), ".csv");
  std::string csv = "value,S1,S2\n";
  for (const SweepRow& row : rows) {
    absl::StrAppend(&csv, FormatDouble(row.value), ",", FormatDouble(row.s1), ",",
                    FormatDouble(row.s2), "\n");
  }
  if (absl::Status s = WriteFileAtomic((dir / name).string(), csv); !s.ok()) return s;
  Json manifest = ManifestBase(scenario);
  manifest["kind"] = "sweep";
  manifest["parameter"] = std::string(SweepParameterName(parameter));
  manifest["files"] = Json::array({name});
  return WriteFileAtomic((dir / "manifest.json").string(), manifest.dump(2) + "\n");
}

}  // namespace prefcache
