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

// Command-line driver: demand synthesis, contacts, placement, learning,
// dataset analysis and experiment scenarios.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "CLI11.hpp"
#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "prefcache/curve_fit.h"
#include "prefcache/dataset.h"
#include "prefcache/demand_model.h"
#include "prefcache/experiment.h"
#include "prefcache/io.h"
#include "prefcache/learner.h"
#include "prefcache/mobility.h"
#include "prefcache/optimizer.h"
#include "prefcache/random.h"

#ifndef PREFCACHE_DATA_DIR
#define PREFCACHE_DATA_DIR "data"
#endif

namespace prefcache {
namespace {

namespace fs = std::filesystem;

// Stream of the request sample drawn by `synth --requests`.
constexpr uint64_t kSynthRequestStream = 100;

int Fail(const absl::Status& status) {
  std::cerr << "prefcache: " << status << "\n";
  return 1;
}

absl::Status Write(const std::string& dir, const std::string& name,
                   const std::string& contents) {
  return WriteFileAtomic((fs::path(dir) / name).string(), contents);
}

#define PREFCACHE_RETURN_IF_ERROR(expr)                \
  do {                                                 \
    if (absl::Status _s = (expr); !_s.ok()) return _s; \
  } while (0)

struct SynthArgs {
  SynthesisParams params;
  int64_t requests = 0;
  std::string out = ".";
};

absl::Status RunSynth(const SynthArgs& args) {
  absl::StatusOr<SyntheticDemand> demand = SynthesizeDemand(args.params);
  if (!demand.ok()) return demand.status();
  PREFCACHE_RETURN_IF_ERROR(EnsureDirectory(args.out));
  DemandMetadata meta{.num_users = args.params.num_users,
                      .num_files = args.params.num_files,
                      .alpha = args.params.alpha,
                      .beta = args.params.beta,
                      .seed = args.params.seed,
                      .average_similarity = -1.0,
                      .regenerated_users = demand->regenerated_users};
  if (args.params.num_users >= 2) {
    absl::StatusOr<double> sim = AverageSimilarity(demand->profile.preference);
    if (sim.ok()) meta.average_similarity = *sim;
  }
  PREFCACHE_RETURN_IF_ERROR(Write(args.out, "profile.csv", DemandProfileToCsv(demand->profile)));
  PREFCACHE_RETURN_IF_ERROR(Write(args.out, "popularity.csv", PopularityToCsv(demand->popularity)));
  PREFCACHE_RETURN_IF_ERROR(Write(args.out, "demand.json", DemandMetadataToJson(meta)));
  if (args.requests > 0) {
    // Multinomial sample over the joint distribution, user-major CDF.
    const DemandProfile& p = demand->profile;
    std::vector<double> cdf;
    double total = 0.0;
    for (int k = 0; k < p.num_users(); ++k) {
      for (int f = 0; f < p.num_files(); ++f) {
        total += p.active[k] * p.preference(k, f);
        cdf.push_back(total);
      }
    }
    RequestMatrix requests(p.num_users(), p.num_files());
    Rng rng(DeriveSeed(args.params.seed, kSynthRequestStream));
    for (int64_t i = 0; i < args.requests; ++i) {
      auto it = std::upper_bound(cdf.begin(), cdf.end(), rng.Uniform() * total);
      if (it == cdf.end()) --it;
      while (it != cdf.begin() && *(it - 1) == *it) --it;
      const auto cell = static_cast<int>(it - cdf.begin());
      requests.Add(cell / p.num_files(), cell % p.num_files());
    }
    PREFCACHE_RETURN_IF_ERROR(Write(args.out, "requests.csv", RequestsToCsv(requests)));
  }
  std::printf("synthesized K=%d F=%d average_similarity=%s\n", args.params.num_users,
              args.params.num_files, FormatDouble(meta.average_similarity).c_str());
  return absl::OkStatus();
}

struct ContactArgs {
  MobilityConfig config;
  int num_users = 100;
  double r_c_m = 30.0;
  std::string out = ".";
};

absl::Status RunContacts(const ContactArgs& args) {
  absl::StatusOr<ContactMatrix> contacts =
      RandomWalkContacts(args.config, args.num_users, args.r_c_m);
  if (!contacts.ok()) return contacts.status();
  PREFCACHE_RETURN_IF_ERROR(EnsureDirectory(args.out));
  ContactMetadata meta{.r_c_m = args.r_c_m,
                       .period_s = args.config.period_s,
                       .v_max_mps = args.config.v_max_mps,
                       .area_side_m = args.config.area_side_m,
                       .time_step_s = args.config.time_step_s,
                       .leg_duration_s = args.config.leg_duration_s,
                       .seed = args.config.seed};
  PREFCACHE_RETURN_IF_ERROR(Write(args.out, "contacts.csv", ContactMatrixToCsv(*contacts)));
  PREFCACHE_RETURN_IF_ERROR(Write(args.out, "contacts.json", ContactMetadataToJson(meta)));
  return absl::OkStatus();
}

struct OptimizeArgs {
  std::string profile;
  std::string popularity;
  std::string contacts;
  int cache_size = 5;
  std::string algorithm = "alternating";
  std::string policy = "preference";
  uint64_t seed = 1;
  bool record_timing = false;
  std::string out = ".";
};

absl::Status RunOptimize(const OptimizeArgs& args) {
  absl::StatusOr<std::string> contacts_text = ReadTextFile(args.contacts);
  if (!contacts_text.ok()) return contacts_text.status();
  double r_c = 0.0;
  const fs::path sidecar = fs::path(args.contacts).replace_extension(".json");
  if (fs::exists(sidecar)) {
    absl::StatusOr<std::string> text = ReadTextFile(sidecar.string());
    if (!text.ok()) return text.status();
    absl::StatusOr<ContactMetadata> meta = ContactMetadataFromJson(*text);
    if (!meta.ok()) return meta.status();
    r_c = meta->r_c_m;
  }
  absl::StatusOr<ContactMatrix> contacts = ContactMatrixFromCsv(*contacts_text, r_c);
  if (!contacts.ok()) return contacts.status();

  // The popularity policy designs from p alone; the preference policy from
  // (w, Q). Either way the objective is reported under the given profile
  // when one is supplied.
  std::optional<DemandProfile> profile;
  if (!args.profile.empty()) {
    absl::StatusOr<std::string> text = ReadTextFile(args.profile);
    if (!text.ok()) return text.status();
    absl::StatusOr<DemandProfile> parsed = DemandProfileFromCsv(*text);
    if (!parsed.ok()) return parsed.status();
    profile = std::move(*parsed);
  }
  DemandProfile design;
  if (args.policy == "preference") {
    if (!profile.has_value()) {
      return absl::InvalidArgumentError("--profile is required for the preference policy");
    }
    design = *profile;
  } else if (args.policy == "popularity") {
    PopularityVector popularity;
    if (!args.popularity.empty()) {
      absl::StatusOr<std::string> text = ReadTextFile(args.popularity);
      if (!text.ok()) return text.status();
      absl::StatusOr<PopularityVector> parsed = PopularityFromCsv(*text);
      if (!parsed.ok()) return parsed.status();
      popularity = std::move(*parsed);
    } else if (profile.has_value()) {
      popularity = AggregatePopularity(*profile);
    } else {
      return absl::InvalidArgumentError("--popularity or --profile is required");
    }
    design = UniformProfile(popularity, contacts->num_users());
  } else {
    return absl::InvalidArgumentError("--policy must be preference or popularity");
  }

  Placement placement;
  const std::string policy_tag = args.policy == "preference" ? "S1" : "S2";
  if (args.algorithm == "greedy") {
    absl::StatusOr<Placement> p = GreedyOptimize(design, *contacts, args.cache_size);
    if (!p.ok()) return p.status();
    placement = std::move(*p);
    placement.report.scheme = policy_tag + "-A1";
  } else if (args.algorithm == "alternating") {
    AlternatingOptions options;
    options.seed = args.seed;
    absl::StatusOr<Placement> p =
        AlternatingOptimize(design, *contacts, args.cache_size, options);
    if (!p.ok()) return p.status();
    placement = std::move(*p);
    placement.report.scheme = policy_tag + "-A2";
  } else if (args.algorithm == "brute") {
    absl::StatusOr<BruteForceResult> p = BruteForceOptimize(design, *contacts, args.cache_size);
    if (!p.ok()) return p.status();
    placement.caching = std::move(p->caching);
    placement.report.scheme = policy_tag + "-exhaustive";
    placement.report.objective_trace = {p->objective};
    placement.report.iterations = static_cast<int>(p->evaluated);
  } else {
    return absl::InvalidArgumentError("--algorithm must be greedy, alternating or brute");
  }

  PREFCACHE_RETURN_IF_ERROR(EnsureDirectory(args.out));
  PREFCACHE_RETURN_IF_ERROR(Write(args.out, "caching.csv", CachingMatrixToCsv(placement.caching)));
  PREFCACHE_RETURN_IF_ERROR(
      Write(args.out, "report.json", OptimizerReportToJson(placement.report, args.record_timing)));
  const DemandProfile& judge = profile.has_value() ? *profile : design;
  absl::StatusOr<double> value = OffloadingProbability(judge, *contacts, placement.caching);
  if (!value.ok()) return value.status();
  std::printf("%s offloading_probability=%s\n", placement.report.scheme.c_str(),
              FormatDouble(*value).c_str());
  return absl::OkStatus();
}

struct LearnArgs {
  std::string requests;
  int num_users = 0;
  int num_files = 0;
  std::string method = "em";
  EmConfig em;
  std::string prior_model;
  double catalog_threshold = 0.05;
  std::string out = ".";
};

absl::Status RunLearn(const LearnArgs& args) {
  absl::StatusOr<std::string> text = ReadTextFile(args.requests);
  if (!text.ok()) return text.status();
  absl::StatusOr<RequestMatrix> requests =
      RequestsFromCsv(*text, args.num_users, args.num_files);
  if (!requests.ok()) return requests.status();
  PREFCACHE_RETURN_IF_ERROR(EnsureDirectory(args.out));

  if (args.method == "baseline") {
    absl::StatusOr<DemandProfile> profile = BaselineFit(*requests);
    if (!profile.ok()) return profile.status();
    return Write(args.out, "profile.csv", DemandProfileToCsv(*profile));
  }
  if (args.method == "em") {
    absl::StatusOr<EmResult> fit = EmFit(*requests, args.em);
    if (!fit.ok()) return fit.status();
    for (const std::string& w : fit->warnings) std::cerr << "warning: " << w << "\n";
    PREFCACHE_RETURN_IF_ERROR(
        Write(args.out, "profile.csv", DemandProfileToCsv(PredictPreferences(fit->model))));
    PREFCACHE_RETURN_IF_ERROR(
        Write(args.out, "likelihood.csv", LikelihoodTraceToCsv(fit->likelihood_trace)));
    std::printf("em iterations=%d converged=%d log_likelihood=%s\n", fit->iterations,
                fit->converged ? 1 : 0, FormatDouble(fit->likelihood_trace.back()).c_str());
    return WritePlsaModel((fs::path(args.out) / "model").string(), fit->model,
                          {.seed = args.em.seed,
                           .iterations = fit->iterations,
                           .converged = fit->converged,
                           .final_log_likelihood = fit->likelihood_trace.back(),
                           .scheme = "EM"});
  }
  if (args.method == "prior") {
    if (args.prior_model.empty()) {
      return absl::InvalidArgumentError("--prior-model is required for --method prior");
    }
    absl::StatusOr<PlsaModel> source = ReadPlsaModel(args.prior_model);
    if (!source.ok()) return source.status();
    PriorKnowledge prior{.topic_pref = source->topic_pref,
                         .catalog = CatalogFromModel(*source, args.catalog_threshold),
                         .active = std::nullopt};
    EmConfig config = args.em;
    config.num_topics = source->num_topics;
    absl::StatusOr<PriorFitResult> fit = PriorFit(*requests, prior, config);
    if (!fit.ok()) return fit.status();
    if (fit->zero_cell.has_value()) {
      std::cerr << "warning: request at user " << fit->zero_cell->user << ", file "
                << fit->zero_cell->file << " lies outside the user's topics\n";
    }
    PREFCACHE_RETURN_IF_ERROR(Write(args.out, "profile.csv", DemandProfileToCsv(fit->profile)));
    PREFCACHE_RETURN_IF_ERROR(
        Write(args.out, "likelihood.csv", LikelihoodTraceToCsv(fit->likelihood_trace)));
    std::printf("prior iterations=%d converged=%d\n", fit->iterations, fit->converged ? 1 : 0);
    return WritePlsaModel((fs::path(args.out) / "model").string(), fit->model,
                          {.seed = config.seed,
                           .iterations = fit->iterations,
                           .converged = fit->converged,
                           .final_log_likelihood = fit->likelihood_trace.back(),
                           .scheme = "prior"});
  }
  return absl::InvalidArgumentError("--method must be em, prior or baseline");
}

struct AnalyzeArgs {
  std::string ratings;
  std::string movies;
  std::string data_dir;
  bool offline = false;
  AnalysisOptions options;
  std::string out = ".";
};

absl::Status RunAnalyze(AnalyzeArgs args) {
  std::string dir = args.data_dir;
  if (args.offline) dir = (fs::path(PREFCACHE_DATA_DIR) / "ml-mini").string();
  if (!dir.empty()) {
    if (args.ratings.empty()) args.ratings = (fs::path(dir) / "ratings.dat").string();
    if (args.movies.empty()) args.movies = (fs::path(dir) / "movies.dat").string();
  }
  if (args.ratings.empty() || args.movies.empty()) {
    return absl::InvalidArgumentError("give --ratings and --movies, --data-dir or --offline");
  }
  absl::StatusOr<ParseResult<MovieRecord>> movies = ReadMoviesFile(args.movies);
  if (!movies.ok()) return movies.status();
  absl::StatusOr<ParseResult<RatingRecord>> ratings = ReadRatingsFile(args.ratings);
  if (!ratings.ok()) return ratings.status();
  absl::StatusOr<MovieLensAnalysis> analysis = AnalyzeMovieLens(*movies, *ratings, args.options);
  if (!analysis.ok()) return analysis.status();
  PREFCACHE_RETURN_IF_ERROR(EnsureDirectory(args.out));

  std::string curve = "users,mean_catalog_size\n";
  for (const CurvePoint& p : analysis->catalog_curve) {
    absl::StrAppend(&curve, FormatDouble(p.x), ",", FormatDouble(p.y), "\n");
  }
  PREFCACHE_RETURN_IF_ERROR(Write(args.out, "catalog_curve.csv", curve));
  std::string fits = "family,a,b,c,r_squared\n";
  for (const FitResult& fit : analysis->fits) {
    absl::StrAppend(&fits, std::string(CurveFamilyName(fit.family)));
    for (size_t i = 0; i < 3; ++i) {
      absl::StrAppend(&fits, ",", i < fit.params.size() ? FormatDouble(fit.params[i]) : "");
    }
    absl::StrAppend(&fits, ",", fit.r_squared_defined ? FormatDouble(fit.r_squared) : "", "\n");
  }
  PREFCACHE_RETURN_IF_ERROR(Write(args.out, "curve_fits.csv", fits));
  std::string sims = "user_index,cosine_similarity\n";
  for (size_t i = 0; i < analysis->temporal.users.size(); ++i) {
    absl::StrAppend(&sims, analysis->temporal.users[i], ",",
                    FormatDouble(analysis->temporal.similarity[i]), "\n");
  }
  PREFCACHE_RETURN_IF_ERROR(Write(args.out, "topic_similarity.csv", sims));
  std::string cdf = "cosine_similarity,fraction_of_users\n";
  for (const CurvePoint& p : analysis->temporal.cdf) {
    absl::StrAppend(&cdf, FormatDouble(p.x), ",", FormatDouble(p.y), "\n");
  }
  PREFCACHE_RETURN_IF_ERROR(Write(args.out, "topic_similarity_cdf.csv", cdf));
  std::string summary = "metric,value\n";
  absl::StrAppend(&summary, "ratings,", analysis->ratings, "\n");
  absl::StrAppend(&summary, "rejected_ratings,", analysis->rejected_ratings, "\n");
  absl::StrAppend(&summary, "movies,", analysis->movies, "\n");
  absl::StrAppend(&summary, "max_movie_id,", analysis->max_movie_id, "\n");
  absl::StrAppend(&summary, "users,", analysis->num_users, "\n");
  absl::StrAppend(&summary, "requests,", analysis->requests, "\n");
  absl::StrAppend(&summary, "duplicates,", analysis->duplicates, "\n");
  absl::StrAppend(&summary, "active_level_similarity,",
                  FormatDouble(analysis->active_similarity), "\n");
  absl::StrAppend(&summary, "topics,", analysis->topic_genres.size(), "\n");
  absl::StrAppend(&summary, "users_compared,", analysis->temporal.users.size(), "\n");
  absl::StrAppend(&summary, "users_excluded,", analysis->temporal.excluded_users, "\n");
  absl::StrAppend(&summary, "fraction_above_0.8,",
                  FormatDouble(analysis->temporal.FractionAbove(0.8)), "\n");
  PREFCACHE_RETURN_IF_ERROR(Write(args.out, "summary.csv", summary));
  std::fputs(summary.c_str(), stdout);
  return absl::OkStatus();
}

struct ScenarioArgs {
  std::string scenario_file;
  std::vector<std::string> overrides;
  bool offline = false;
  bool record_timing = false;
  std::string parameter;
  std::vector<double> values;
  std::string out = ".";
};

absl::StatusOr<Scenario> LoadScenario(const ScenarioArgs& args) {
  Scenario scenario;
  if (!args.scenario_file.empty()) {
    absl::StatusOr<std::string> text = ReadTextFile(args.scenario_file);
    if (!text.ok()) return text.status();
    absl::StatusOr<Scenario> parsed = ParseScenario(*text);
    if (!parsed.ok()) return parsed.status();
    scenario = std::move(*parsed);
  }
  for (const std::string& item : args.overrides) {
    const size_t eq = item.find('=');
    if (eq == std::string::npos) {
      return absl::InvalidArgumentError(absl::StrCat("--set expects key=value, got ", item));
    }
    PREFCACHE_RETURN_IF_ERROR(
        SetScenarioValue(scenario, item.substr(0, eq), item.substr(eq + 1)));
  }
  if (args.offline) {
    scenario.data_source =
        absl::StrCat("movielens:", (fs::path(PREFCACHE_DATA_DIR) / "ml-mini").string());
  }
  PREFCACHE_RETURN_IF_ERROR(ValidateScenario(scenario));
  return scenario;
}

absl::Status RunRun(const ScenarioArgs& args) {
  absl::StatusOr<Scenario> scenario = LoadScenario(args);
  if (!scenario.ok()) return scenario.status();
  absl::StatusOr<ScenarioRun> run = RunScenario(*scenario);
  if (!run.ok()) return run.status();
  PREFCACHE_RETURN_IF_ERROR(
      EmitResults(*scenario, &*run, args.out, {.record_timing = args.record_timing}));
  for (const SchemeResult& result : run->results) {
    const CheckpointResult& last = result.checkpoints.back();
    std::printf("%-12s requests=%lld offloading_probability=%s\n",
                std::string(SchemeName(result.scheme)).c_str(),
                static_cast<long long>(last.requests),
                FormatDouble(last.offloading_probability).c_str());
  }
  return absl::OkStatus();
}

absl::Status RunSweep(const ScenarioArgs& args) {
  absl::StatusOr<Scenario> scenario = LoadScenario(args);
  if (!scenario.ok()) return scenario.status();
  absl::StatusOr<SweepParameter> parameter = ParseSweepParameter(args.parameter);
  if (!parameter.ok()) return parameter.status();
  absl::StatusOr<std::vector<SweepRow>> rows = Sweep(*scenario, *parameter, args.values);
  if (!rows.ok()) return rows.status();
  PREFCACHE_RETURN_IF_ERROR(EmitSweep(*scenario, *parameter, *rows, args.out));
  for (const SweepRow& row : *rows) {
    std::printf("%s=%s S1=%s S2=%s\n", args.parameter.c_str(), FormatDouble(row.value).c_str(),
                FormatDouble(row.s1).c_str(), FormatDouble(row.s2).c_str());
  }
  return absl::OkStatus();
}

int Main(int argc, char** argv) {
  CLI::App app{"Caching placement with learned user preferences for D2D networks"};
  app.require_subcommand(1);

  SynthArgs synth;
  CLI::App* synth_cmd = app.add_subcommand("synth", "Synthesize a demand profile");
  synth_cmd->add_option("--num-users", synth.params.num_users, "K")->capture_default_str();
  synth_cmd->add_option("--num-files", synth.params.num_files, "F")->capture_default_str();
  synth_cmd->add_option("--alpha", synth.params.alpha, "Preference similarity in (0, 1]")
      ->capture_default_str();
  synth_cmd->add_option("--beta", synth.params.beta, "Zipf skewness")->capture_default_str();
  synth_cmd->add_option("--seed", synth.params.seed)->capture_default_str();
  synth_cmd->add_option("--requests", synth.requests,
                        "Also sample this many requests into requests.csv");
  synth_cmd->add_option("--out", synth.out, "Output directory")->capture_default_str();

  ContactArgs contacts;
  CLI::App* contacts_cmd = app.add_subcommand("contacts", "Contact probabilities");
  contacts_cmd->add_option("--num-users", contacts.num_users)->capture_default_str();
  contacts_cmd->add_option("--r-c-m", contacts.r_c_m, "Collaboration distance")
      ->capture_default_str();
  contacts_cmd->add_option("--area-side-m", contacts.config.area_side_m)->capture_default_str();
  contacts_cmd->add_option("--v-max-mps", contacts.config.v_max_mps)->capture_default_str();
  contacts_cmd->add_option("--period-s", contacts.config.period_s)->capture_default_str();
  contacts_cmd->add_option("--leg-duration-s", contacts.config.leg_duration_s)
      ->capture_default_str();
  contacts_cmd->add_option("--time-step-s", contacts.config.time_step_s)->capture_default_str();
  contacts_cmd->add_option("--seed", contacts.config.seed)->capture_default_str();
  contacts_cmd->add_option("--out", contacts.out)->capture_default_str();

  OptimizeArgs optimize;
  CLI::App* optimize_cmd = app.add_subcommand("optimize", "Caching placement");
  optimize_cmd->add_option("--profile", optimize.profile, "Demand profile CSV");
  optimize_cmd->add_option("--popularity", optimize.popularity, "Popularity CSV");
  optimize_cmd->add_option("--contacts", optimize.contacts, "Contact matrix CSV")->required();
  optimize_cmd->add_option("--cache-size", optimize.cache_size, "M")->capture_default_str();
  optimize_cmd->add_option("--algorithm", optimize.algorithm, "greedy|alternating|brute")
      ->capture_default_str();
  optimize_cmd->add_option("--policy", optimize.policy, "preference|popularity")
      ->capture_default_str();
  optimize_cmd->add_option("--seed", optimize.seed)->capture_default_str();
  optimize_cmd->add_flag("--record-timing", optimize.record_timing);
  optimize_cmd->add_option("--out", optimize.out)->capture_default_str();

  LearnArgs learn;
  CLI::App* learn_cmd = app.add_subcommand("learn", "Learn preferences from requests");
  learn_cmd->add_option("--requests", learn.requests, "user_id,file_id,count CSV")->required();
  learn_cmd->add_option("--num-users", learn.num_users)->required();
  learn_cmd->add_option("--num-files", learn.num_files)->required();
  learn_cmd->add_option("--method", learn.method, "em|prior|baseline")->capture_default_str();
  learn_cmd->add_option("--num-topics", learn.em.num_topics)->capture_default_str();
  learn_cmd->add_option("--tolerance", learn.em.tolerance)->capture_default_str();
  learn_cmd->add_option("--max-iterations", learn.em.max_iterations)->capture_default_str();
  learn_cmd->add_option("--seed", learn.em.seed)->capture_default_str();
  learn_cmd->add_option("--prior-model", learn.prior_model,
                        "Model directory supplying topic preferences and topic files");
  learn_cmd->add_option("--catalog-threshold", learn.catalog_threshold)->capture_default_str();
  learn_cmd->add_option("--out", learn.out)->capture_default_str();

  AnalyzeArgs analyze;
  CLI::App* analyze_cmd = app.add_subcommand("analyze", "MovieLens request statistics");
  analyze_cmd->add_option("--ratings", analyze.ratings, "ratings.dat");
  analyze_cmd->add_option("--movies", analyze.movies, "movies.dat");
  analyze_cmd->add_option("--data-dir", analyze.data_dir, "Directory with both files");
  analyze_cmd->add_flag("--offline", analyze.offline, "Use the bundled excerpt");
  analyze_cmd->add_option("--trials", analyze.options.trials)->capture_default_str();
  analyze_cmd->add_option("--seed", analyze.options.seed)->capture_default_str();
  analyze_cmd->add_option("--em-tolerance", analyze.options.em.tolerance)->capture_default_str();
  analyze_cmd->add_option("--out", analyze.out)->capture_default_str();

  ScenarioArgs run;
  CLI::App* run_cmd = app.add_subcommand("run", "Run an experiment scenario");
  ScenarioArgs sweep;
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "Sweep one scenario parameter");
  uint64_t run_seed = 0, sweep_seed = 0;
  for (auto [cmd, args, seed] : {std::tuple{run_cmd, &run, &run_seed},
                                 std::tuple{sweep_cmd, &sweep, &sweep_seed}}) {
    cmd->add_option("--scenario", args->scenario_file, "key = value scenario file");
    cmd->add_option("--set", args->overrides, "Override a scenario key: key=value");
    cmd->add_option("--seed", *seed, "Override the scenario seed");
    cmd->add_flag("--offline", args->offline, "Use the bundled MovieLens excerpt");
    cmd->add_option("--out", args->out)->capture_default_str();
  }
  run_cmd->add_flag("--record-timing", run.record_timing, "Add wall times to the manifest");
  sweep_cmd->add_option("--parameter", sweep.parameter, "alpha|beta|M|r_c|v_max")->required();
  sweep_cmd->add_option("--values", sweep.values, "Comma-separated values")
      ->required()
      ->delimiter(',');

  CLI11_PARSE(app, argc, argv);

  absl::Status status;
  if (*synth_cmd) {
    status = RunSynth(synth);
  } else if (*contacts_cmd) {
    status = RunContacts(contacts);
  } else if (*optimize_cmd) {
    status = RunOptimize(optimize);
  } else if (*learn_cmd) {
    status = RunLearn(learn);
  } else if (*analyze_cmd) {
    status = RunAnalyze(analyze);
  } else if (*run_cmd) {
    if (run_cmd->count("--seed") > 0) run.overrides.push_back(absl::StrCat("seed=", run_seed));
    status = RunRun(run);
  } else if (*sweep_cmd) {
    if (sweep_cmd->count("--seed") > 0) {
      sweep.overrides.push_back(absl::StrCat("seed=", sweep_seed));
    }
    status = RunSweep(sweep);
  }
  return status.ok() ? 0 : Fail(status);
}

}  // namespace
}  // namespace prefcache

int main(int argc, char** argv) { return prefcache::Main(argc, argv); }
