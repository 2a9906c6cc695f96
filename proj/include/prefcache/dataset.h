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

// MovieLens-1M ingestion and the request statistics derived from it.
//
// Every rated movie counts as one request by that user, whatever the rating.

#ifndef PREFCACHE_DATASET_H_
#define PREFCACHE_DATASET_H_

#include <array>
#include <cstdint>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "absl/status/statusor.h"
#include "prefcache/curve_fit.h"
#include "prefcache/demand_model.h"
#include "prefcache/learner.h"

namespace prefcache {

// Genre labels in the order documented with the dataset. Topic j of a genre
// catalog is always kMovieLensGenres[j] (or a subset preserving this order).
inline constexpr std::array<std::string_view, 18> kMovieLensGenres = {
    "Action",  "Adventure", "Animation", "Children's", "Comedy",  "Crime",
    "Documentary", "Drama", "Fantasy",   "Film-Noir",  "Horror",  "Musical",
    "Mystery", "Romance",   "Sci-Fi",    "Thriller",   "War",     "Western"};

// Index into kMovieLensGenres, or -1.
int GenreIndex(std::string_view label);

struct RatingRecord {
  int64_t user_id = 0;
  int64_t movie_id = 0;
  int rating = 0;
  int64_t timestamp = 0;
  bool operator==(const RatingRecord&) const = default;
};

struct MovieRecord {
  int64_t movie_id = 0;
  std::string title;
  // Trailing "(YYYY)" of the title, when present.
  std::optional<int> year;
  // Genre indices in file order.
  std::vector<int> genres;
  bool operator==(const MovieRecord&) const = default;
};

struct RejectedLine {
  int64_t line = 0;  // 1-based
  std::string text;
  std::string reason;
};

template <typename T>
struct ParseResult {
  std::vector<T> records;
  std::vector<RejectedLine> rejects;
  // Non-empty lines seen.
  int64_t lines = 0;
};

// UserID::MovieID::Rating::Timestamp per line. Malformed lines are collected;
// more than `max_reject_fraction` of them fails the parse.
absl::StatusOr<ParseResult<RatingRecord>> ParseRatings(
    std::istream& in, double max_reject_fraction = 0.01);
// MovieID::Title (Year)::Genre|Genre|...
absl::StatusOr<ParseResult<MovieRecord>> ParseMovies(
    std::istream& in, double max_reject_fraction = 0.01);
absl::StatusOr<ParseResult<RatingRecord>> ReadRatingsFile(const std::string& path);
absl::StatusOr<ParseResult<MovieRecord>> ReadMoviesFile(const std::string& path);

// Inverse of the parsers (one line, no newline).
std::string FormatRating(const RatingRecord& record);
std::string FormatMovie(const MovieRecord& record);

// Dense 0-based positions for external ids, in the order given.
class IdIndex {
 public:
  IdIndex() = default;
  explicit IdIndex(std::vector<int64_t> ids);
  // Sorted distinct ids.
  static IdIndex Sorted(std::vector<int64_t> ids);
  int size() const { return static_cast<int>(ids_.size()); }
  int64_t id(int position) const { return ids_[position]; }
  const std::vector<int64_t>& ids() const { return ids_; }
  // -1 when absent.
  int Find(int64_t id) const;

 private:
  std::vector<int64_t> ids_;
  std::unordered_map<int64_t, int> position_;
};

struct RequestData {
  RequestMatrix requests;
  // Ratings of an already counted (user, movie) pair.
  int64_t duplicates = 0;
};

// n_{k,f} = 1 when user k rated movie f. Every id must be indexed.
absl::StatusOr<RequestData> ToRequestMatrix(std::span<const RatingRecord> ratings,
                                            const IdIndex& users,
                                            const IdIndex& movies);

struct ReleaseSplit {
  IdIndex users;
  // Older half (ascending release year, ties by id) and newer half.
  IdIndex first_movies;
  IdIndex second_movies;
  RequestMatrix first;
  RequestMatrix second;
  int64_t duplicates = 0;
};

// Sorts the listed movies by release year (unknown years last) and splits
// them in two halves; the first gets the extra movie when the count is odd.
// Users are every rater, ascending by id.
absl::StatusOr<ReleaseSplit> SplitByRelease(std::span<const MovieRecord> movies,
                                            std::span<const RatingRecord> ratings);

// Mean number of distinct files requested by `user_counts[i]` users drawn
// uniformly without replacement, over `trials` draws. Each trial uses one
// random user order and reads every size off its prefixes, so the curve is
// non-decreasing.
absl::StatusOr<std::vector<CurvePoint>> CatalogSizeCurve(
    const RequestMatrix& requests, std::span<const int> user_counts, int trials,
    uint64_t seed);

// 1, 2, 5, 10, 20, 50, ... below K, then K.
std::vector<int> DefaultUserCounts(int num_users);

// Genre topics for the movies in `columns`, keeping only the genres listed in
// `genres` (indices into kMovieLensGenres). Movies with none of those genres
// are an error.
absl::StatusOr<TopicCatalog> GenreCatalog(std::span<const MovieRecord> movies,
                                          const IdIndex& columns,
                                          std::span<const int> genres);

// Genres carried by at least one movie of each column set, ascending.
std::vector<int> CommonGenres(std::span<const MovieRecord> movies,
                              std::span<const IdIndex* const> column_sets);

struct TemporalSimilarity {
  // Users with requests in both halves, and their topic-preference cosine
  // similarity.
  std::vector<int> users;
  std::vector<double> similarity;
  int excluded_users = 0;
  // Empirical CDF: (similarity, fraction of users at or below it).
  std::vector<CurvePoint> cdf;
  double FractionAbove(double threshold) const;
};

// Fits pLSA to each half with the same configuration and compares every
// user's topic preferences. Catalogs, when given, pin topic j to the same
// label in both halves.
absl::StatusOr<TemporalSimilarity> TemporalTopicSimilarity(
    const RequestMatrix& first, const RequestMatrix& second, const EmConfig& config,
    const TopicCatalog* first_catalog = nullptr,
    const TopicCatalog* second_catalog = nullptr);

// Cosine similarity of the two halves' active-level vectors.
absl::StatusOr<double> ActiveLevelSimilarity(const RequestMatrix& first,
                                             const RequestMatrix& second);

struct AnalysisOptions {
  std::vector<int> user_counts;  // empty: DefaultUserCounts
  int trials = 50;
  uint64_t seed = 1;
  EmConfig em{.num_topics = 18, .seed = 1, .tolerance = 1e-4, .max_iterations = 1000};
  // Topics fitted per half are pinned to genres.
  bool genre_topics = true;
};

struct MovieLensAnalysis {
  int64_t ratings = 0;  // accepted rating lines
  int64_t rejected_ratings = 0;
  int64_t movies = 0;   // accepted movie lines
  int64_t max_movie_id = 0;
  int num_users = 0;
  int64_t requests = 0;  // after deduplication
  int64_t duplicates = 0;
  std::vector<CurvePoint> catalog_curve;
  std::vector<FitResult> fits;  // one per family, in enum order
  double active_similarity = 0.0;
  std::vector<int> topic_genres;
  TemporalSimilarity temporal;
};

absl::StatusOr<MovieLensAnalysis> AnalyzeMovieLens(
    const ParseResult<MovieRecord>& movies, const ParseResult<RatingRecord>& ratings,
    const AnalysisOptions& options);

}  // namespace prefcache

#endif  // PREFCACHE_DATASET_H_
