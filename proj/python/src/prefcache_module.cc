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

// Python bindings. Matrices cross the boundary as NumPy arrays; errors are
// raised as ValueError with the library's status message.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "prefcache/curve_fit.h"
#include "prefcache/dataset.h"
#include "prefcache/demand_model.h"
#include "prefcache/experiment.h"
#include "prefcache/learner.h"
#include "prefcache/mobility.h"
#include "prefcache/optimizer.h"

namespace py = pybind11;

namespace prefcache {
namespace {

using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;
using IntArray = py::array_t<int64_t, py::array::c_style | py::array::forcecast>;

template <typename T>
T Unwrap(absl::StatusOr<T> value) {
  if (!value.ok()) throw py::value_error(std::string(value.status().message()));
  return std::move(*value);
}

Matrix ToMatrix(const DoubleArray& array) {
  if (array.ndim() != 2) throw py::value_error("expected a 2-D array");
  Matrix m(static_cast<int>(array.shape(0)), static_cast<int>(array.shape(1)));
  auto view = array.unchecked<2>();
  for (int r = 0; r < m.rows(); ++r) {
    for (int c = 0; c < m.cols(); ++c) m(r, c) = view(r, c);
  }
  return m;
}

std::vector<double> ToVector(const DoubleArray& array) {
  if (array.ndim() != 1) throw py::value_error("expected a 1-D array");
  return std::vector<double>(array.data(), array.data() + array.size());
}

py::array_t<double> FromMatrix(const Matrix& m) {
  py::array_t<double> out({m.rows(), m.cols()});
  std::copy(m.data().begin(), m.data().end(), out.mutable_data());
  return out;
}

py::array_t<double> FromVector(const std::vector<double>& v) {
  py::array_t<double> out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

DemandProfile ToProfile(const DoubleArray& active, const DoubleArray& preference) {
  DemandProfile profile{ToVector(active), ToMatrix(preference)};
  if (profile.preference.rows() != profile.num_users()) {
    throw py::value_error("active and preference disagree on the number of users");
  }
  return profile;
}

ContactMatrix ToContacts(const DoubleArray& a) { return ContactMatrix{ToMatrix(a), 0.0}; }

CachingMatrix ToCaching(const IntArray& array, int budget) {
  if (array.ndim() != 2) throw py::value_error("expected a 2-D caching array");
  const int rows = static_cast<int>(array.shape(0));
  const int cols = static_cast<int>(array.shape(1));
  CachingMatrix c(rows, cols, budget);
  auto view = array.unchecked<2>();
  for (int k = 0; k < rows; ++k) {
    for (int f = 0; f < cols; ++f) {
      if (view(k, f) != 0) c.Set(k, f, true);
    }
  }
  return c;
}

py::array_t<int64_t> FromCaching(const CachingMatrix& c) {
  py::array_t<int64_t> out({c.num_users(), c.num_files()});
  auto view = out.mutable_unchecked<2>();
  for (int k = 0; k < c.num_users(); ++k) {
    for (int f = 0; f < c.num_files(); ++f) view(k, f) = c.cached(k, f) ? 1 : 0;
  }
  return out;
}

RequestMatrix ToRequests(const IntArray& counts) {
  if (counts.ndim() != 2) throw py::value_error("expected a 2-D count array");
  const int rows = static_cast<int>(counts.shape(0));
  const int cols = static_cast<int>(counts.shape(1));
  RequestMatrix n(rows, cols);
  auto view = counts.unchecked<2>();
  for (int k = 0; k < rows; ++k) {
    for (int f = 0; f < cols; ++f) {
      if (view(k, f) < 0) throw py::value_error("negative request count");
      if (view(k, f) > 0) n.Set(k, f, view(k, f));
    }
  }
  return n;
}

py::dict ReportDict(const OptimizerReport& report) {
  py::dict d;
  d["scheme"] = report.scheme;
  d["objective_trace"] = report.objective_trace;
  d["iterations"] = report.iterations;
  d["converged"] = report.converged;
  d["seconds"] = report.seconds;
  return d;
}

py::tuple PlacementTuple(const Placement& p) {
  return py::make_tuple(FromCaching(p.caching), ReportDict(p.report));
}

py::dict ModelDict(const PlsaModel& model) {
  py::dict d;
  d["active"] = FromVector(model.active);
  d["topic_pref"] = FromMatrix(model.topic_pref);
  d["file_given_topic"] = FromMatrix(model.file_given_topic);
  return d;
}

Algorithm ParseAlgorithm(const std::string& name) {
  if (name == "greedy") return Algorithm::kGreedy;
  if (name == "alternating") return Algorithm::kAlternating;
  throw py::value_error("algorithm must be 'greedy' or 'alternating'");
}

}  // namespace
}  // namespace prefcache

PYBIND11_MODULE(_prefcache, m) {
  using namespace prefcache;
  m.doc() = "Caching placement with learned user preferences for D2D networks";

  m.def(
      "zipf_popularity",
      [](int num_files, double beta) {
        return FromVector(Unwrap(ZipfPopularity(num_files, beta)).p);
      },
      py::arg("num_files"), py::arg("beta"));
  m.def(
      "power_kernel",
      [](double x, double y, double alpha) { return Unwrap(PowerKernel(x, y, alpha)); },
      py::arg("x"), py::arg("y"), py::arg("alpha"));
  m.def(
      "synthesize_demand",
      [](int num_users, int num_files, double alpha, double beta, uint64_t seed) {
        SyntheticDemand d = Unwrap(SynthesizeDemand({.num_files = num_files,
                                                     .num_users = num_users,
                                                     .alpha = alpha,
                                                     .beta = beta,
                                                     .seed = seed}));
        py::dict out;
        out["active"] = FromVector(d.profile.active);
        out["preference"] = FromMatrix(d.profile.preference);
        out["popularity"] = FromVector(d.popularity.p);
        out["user_features"] = FromVector(d.features.user);
        out["file_features"] = FromVector(d.features.file);
        out["regenerated_users"] = d.regenerated_users;
        return out;
      },
      py::arg("num_users"), py::arg("num_files"), py::arg("alpha") = 0.36,
      py::arg("beta") = 0.6, py::arg("seed") = 1);
  m.def(
      "cosine_similarity",
      [](const DoubleArray& a, const DoubleArray& b) {
        return Unwrap(CosineSimilarity(ToVector(a), ToVector(b)));
      },
      py::arg("a"), py::arg("b"));
  m.def(
      "average_similarity",
      [](const DoubleArray& q) { return Unwrap(AverageSimilarity(ToMatrix(q))); },
      py::arg("preference"));
  m.def(
      "aggregate_popularity",
      [](const DoubleArray& active, const DoubleArray& preference) {
        return FromVector(AggregatePopularity(ToProfile(active, preference)).p);
      },
      py::arg("active"), py::arg("preference"));

  m.def(
      "random_walk_contacts",
      [](int num_users, double r_c_m, double area_side_m, double v_max_mps,
         double period_s, double leg_duration_s, double time_step_s, uint64_t seed) {
        MobilityConfig config{.area_side_m = area_side_m,
                              .v_max_mps = v_max_mps,
                              .period_s = period_s,
                              .leg_duration_s = leg_duration_s,
                              .time_step_s = time_step_s,
                              .seed = seed};
        return FromMatrix(Unwrap(RandomWalkContacts(config, num_users, r_c_m)).a);
      },
      py::arg("num_users"), py::arg("r_c_m") = 30.0, py::arg("area_side_m") = 500.0,
      py::arg("v_max_mps") = 0.0, py::arg("period_s") = 7200.0,
      py::arg("leg_duration_s") = 100.0, py::arg("time_step_s") = 1.0, py::arg("seed") = 1);
  m.def(
      "static_contacts",
      [](const DoubleArray& positions, double r_c_m) {
        const Matrix p = ToMatrix(positions);
        if (p.cols() != 2) throw py::value_error("positions must be K x 2");
        std::vector<Point> points;
        for (int k = 0; k < p.rows(); ++k) points.push_back({p(k, 0), p(k, 1)});
        return FromMatrix(StaticContacts(points, r_c_m).a);
      },
      py::arg("positions"), py::arg("r_c_m"));

  m.def(
      "offloading_probability",
      [](const DoubleArray& active, const DoubleArray& preference,
         const DoubleArray& contacts, const IntArray& caching) {
        const DemandProfile profile = ToProfile(active, preference);
        return Unwrap(OffloadingProbability(profile, ToContacts(contacts),
                                            ToCaching(caching, profile.num_files())));
      },
      py::arg("active"), py::arg("preference"), py::arg("contacts"), py::arg("caching"));
  m.def(
      "popularity_offloading",
      [](const DoubleArray& popularity, const DoubleArray& contacts,
         const IntArray& caching) {
        const PopularityVector p{ToVector(popularity)};
        return Unwrap(PopularityOffloading(p, ToContacts(contacts),
                                           ToCaching(caching, p.num_files())));
      },
      py::arg("popularity"), py::arg("contacts"), py::arg("caching"));
  m.def(
      "greedy_optimize",
      [](const DoubleArray& active, const DoubleArray& preference,
         const DoubleArray& contacts, int cache_size) {
        return PlacementTuple(Unwrap(
            GreedyOptimize(ToProfile(active, preference), ToContacts(contacts), cache_size)));
      },
      py::arg("active"), py::arg("preference"), py::arg("contacts"), py::arg("cache_size"));
  m.def(
      "alternating_optimize",
      [](const DoubleArray& active, const DoubleArray& preference,
         const DoubleArray& contacts, int cache_size, uint64_t seed) {
        AlternatingOptions options;
        options.seed = seed;
        return PlacementTuple(Unwrap(AlternatingOptimize(
            ToProfile(active, preference), ToContacts(contacts), cache_size, options)));
      },
      py::arg("active"), py::arg("preference"), py::arg("contacts"), py::arg("cache_size"),
      py::arg("seed") = 1);
  m.def(
      "popularity_policy",
      [](const DoubleArray& popularity, const DoubleArray& contacts, int cache_size,
         const std::string& algorithm, uint64_t seed) {
        return PlacementTuple(Unwrap(PopularityPolicy({ToVector(popularity)},
                                                      ToContacts(contacts), cache_size,
                                                      ParseAlgorithm(algorithm), seed)));
      },
      py::arg("popularity"), py::arg("contacts"), py::arg("cache_size"),
      py::arg("algorithm") = "alternating", py::arg("seed") = 1);
  m.def(
      "brute_force_optimize",
      [](const DoubleArray& active, const DoubleArray& preference,
         const DoubleArray& contacts, int cache_size) {
        BruteForceResult r = Unwrap(BruteForceOptimize(ToProfile(active, preference),
                                                       ToContacts(contacts), cache_size));
        return py::make_tuple(FromCaching(r.caching), r.objective);
      },
      py::arg("active"), py::arg("preference"), py::arg("contacts"), py::arg("cache_size"));

  m.def(
      "em_fit",
      [](const IntArray& counts, int num_topics, uint64_t seed, double tolerance,
         int max_iterations) {
        EmResult r = Unwrap(EmFit(ToRequests(counts), {.num_topics = num_topics,
                                                       .seed = seed,
                                                       .tolerance = tolerance,
                                                       .max_iterations = max_iterations}));
        py::dict out = ModelDict(r.model);
        out["preference"] = FromMatrix(PredictPreferences(r.model).preference);
        out["likelihood_trace"] = r.likelihood_trace;
        out["iterations"] = r.iterations;
        out["converged"] = r.converged;
        out["warnings"] = r.warnings;
        return out;
      },
      py::arg("counts"), py::arg("num_topics") = 20, py::arg("seed") = 1,
      py::arg("tolerance") = 1e-4, py::arg("max_iterations") = 1000);
  m.def(
      "prior_fit",
      [](const IntArray& counts, const DoubleArray& topic_pref,
         std::vector<std::vector<int>> topic_files, uint64_t seed, double tolerance,
         int max_iterations) {
        const RequestMatrix n = ToRequests(counts);
        std::vector<std::string> labels;
        for (size_t j = 0; j < topic_files.size(); ++j) labels.push_back("z" + std::to_string(j));
        PriorKnowledge prior{
            .topic_pref = ToMatrix(topic_pref),
            .catalog = Unwrap(TopicCatalog::Create(labels, std::move(topic_files),
                                                   n.num_files())),
            .active = std::nullopt};
        PriorFitResult r =
            Unwrap(PriorFit(n, prior, {.num_topics = prior.topic_pref.cols(),
                                       .seed = seed,
                                       .tolerance = tolerance,
                                       .max_iterations = max_iterations}));
        py::dict out = ModelDict(r.model);
        out["preference"] = FromMatrix(r.profile.preference);
        out["likelihood_trace"] = r.likelihood_trace;
        out["iterations"] = r.iterations;
        out["converged"] = r.converged;
        return out;
      },
      py::arg("counts"), py::arg("topic_pref"), py::arg("topic_files"), py::arg("seed") = 1,
      py::arg("tolerance") = 1e-4, py::arg("max_iterations") = 1000);
  m.def(
      "baseline_fit",
      [](const IntArray& counts) {
        DemandProfile p = Unwrap(BaselineFit(ToRequests(counts)));
        return py::make_tuple(FromVector(p.active), FromMatrix(p.preference));
      },
      py::arg("counts"));

  m.def(
      "fit_curve",
      [](const DoubleArray& x, const DoubleArray& y, const std::string& family) {
        const std::vector<double> xs = ToVector(x), ys = ToVector(y);
        if (xs.size() != ys.size()) throw py::value_error("x and y lengths differ");
        std::vector<CurvePoint> points;
        for (size_t i = 0; i < xs.size(); ++i) points.push_back({xs[i], ys[i]});
        FitResult r = Unwrap(FitCurve(points, Unwrap(ParseCurveFamily(family))));
        py::dict out;
        out["family"] = family;
        out["params"] = r.params;
        out["r_squared"] = r.r_squared;
        out["r_squared_defined"] = r.r_squared_defined;
        return out;
      },
      py::arg("x"), py::arg("y"), py::arg("family"));
  m.def(
      "analyze_movielens",
      [](const std::string& ratings_path, const std::string& movies_path, int trials,
         uint64_t seed) {
        auto movies = Unwrap(ReadMoviesFile(movies_path));
        auto ratings = Unwrap(ReadRatingsFile(ratings_path));
        AnalysisOptions options;
        options.trials = trials;
        options.seed = seed;
        MovieLensAnalysis a = Unwrap(AnalyzeMovieLens(movies, ratings, options));
        py::dict out;
        out["ratings"] = a.ratings;
        out["movies"] = a.movies;
        out["max_movie_id"] = a.max_movie_id;
        out["users"] = a.num_users;
        out["requests"] = a.requests;
        out["duplicates"] = a.duplicates;
        std::vector<std::pair<double, double>> curve;
        for (const CurvePoint& p : a.catalog_curve) curve.emplace_back(p.x, p.y);
        out["catalog_curve"] = curve;
        py::dict fits;
        for (const FitResult& f : a.fits) {
          fits[py::str(std::string(CurveFamilyName(f.family)))] = f.r_squared;
        }
        out["r_squared"] = fits;
        out["active_similarity"] = a.active_similarity;
        out["topic_similarity"] = a.temporal.similarity;
        out["fraction_above_0_8"] = a.temporal.FractionAbove(0.8);
        return out;
      },
      py::arg("ratings_path"), py::arg("movies_path"), py::arg("trials") = 50,
      py::arg("seed") = 1);

  m.def(
      "run_scenario",
      [](const std::string& text) {
        Scenario scenario = Unwrap(ParseScenario(text));
        ScenarioRun run = Unwrap(RunScenario(scenario));
        py::dict out;
        for (const SchemeResult& r : run.results) {
          std::vector<std::pair<int64_t, double>> points;
          for (const CheckpointResult& c : r.checkpoints) {
            points.emplace_back(c.requests, c.offloading_probability);
          }
          out[py::str(std::string(SchemeName(r.scheme)))] = points;
        }
        return out;
      },
      py::arg("scenario_text"),
      "Runs a scenario given in key = value form; returns {scheme: [(requests, p)]}.");
  m.attr("__version__") = std::string(Version());
}
