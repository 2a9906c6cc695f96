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

#include "prefcache/dataset.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "prefcache/random.h"

namespace prefcache {
namespace {

bool ParseInt(std::string_view text, int64_t& out) {
  if (text.empty()) return false;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc() && ptr == end;
}

std::vector<std::string_view> Split(std::string_view text, std::string_view delimiter) {
  std::vector<std::string_view> parts;
  size_t start = 0;
  while (true) {
    const size_t pos = text.find(delimiter, start);
    if (pos == std::string_view::npos) break;
    parts.push_back(text.substr(start, pos - start));
    start = pos + delimiter.size();
  }
  parts.push_back(text.substr(start));
  return parts;
}

std::string_view StripLineEnd(std::string_view line) {
  while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) {
    line.remove_suffix(1);
  }
  return line;
}

std::optional<int> TrailingYear(std::string_view title) {
  while (!title.empty() && title.back() == ' ') title.remove_suffix(1);
  if (title.size() < 6 || title.back() != ')') return std::nullopt;
  const std::string_view digits = title.substr(title.size() - 5, 4);
  if (title[title.size() - 6] != '(') return std::nullopt;
  int64_t year = 0;
  if (!ParseInt(digits, year)) return std::nullopt;
  return static_cast<int>(year);
}

// Returns an error message, or empty on success.
std::string ParseRatingLine(std::string_view line, RatingRecord& out) {
  const std::vector<std::string_view> fields = Split(line, "::");
  if (fields.size() != 4) {
    return absl::StrCat("expected 4 '::' fields, found ", fields.size());
  }
  int64_t rating = 0;
  if (!ParseInt(fields[0], out.user_id) || !ParseInt(fields[1], out.movie_id) ||
      !ParseInt(fields[2], rating) || !ParseInt(fields[3], out.timestamp)) {
    return "non-numeric field";
  }
  if (out.user_id <= 0 || out.movie_id <= 0) return "ids must be positive";
  if (rating < 1 || rating > 5) return absl::StrCat("rating ", rating, " outside 1..5");
  out.rating = static_cast<int>(rating);
  return "";
}

std::string ParseMovieLine(std::string_view line, MovieRecord& out) {
  const size_t first = line.find("::");
  const size_t last = line.rfind("::");
  if (first == std::string_view::npos || first == last) {
    return "expected MovieID::Title::Genres";
  }
  if (!ParseInt(line.substr(0, first), out.movie_id) || out.movie_id <= 0) {
    return "movie id must be a positive integer";
  }
  out.title = std::string(line.substr(first + 2, last - first - 2));
  if (out.title.empty()) return "empty title";
  out.year = TrailingYear(out.title);
  out.genres.clear();
  for (std::string_view label : Split(line.substr(last + 2), "|")) {
    const int g = GenreIndex(label);
    if (g < 0) return absl::StrCat("unknown genre '", std::string(label), "'");
    out.genres.push_back(g);
  }
  return "";
}

template <typename T, typename LineParser>
absl::StatusOr<ParseResult<T>> ParseLines(std::istream& in, double max_reject_fraction,
                                          const char* what, LineParser parse) {
  ParseResult<T> result;
  std::string buffer;
  int64_t line_number = 0;
  while (std::getline(in, buffer)) {
    ++line_number;
    const std::string_view line = StripLineEnd(buffer);
    if (line.empty()) continue;
    ++result.lines;
    T record;
    std::string error = parse(line, record);
    if (error.empty()) {
      result.records.push_back(std::move(record));
    } else {
      result.rejects.push_back({line_number, std::string(line), std::move(error)});
    }
  }
  if (in.bad()) return absl::DataLossError(absl::StrCat("error reading ", what));
  const double rejected = static_cast<double>(result.rejects.size());
  if (rejected > max_reject_fraction * static_cast<double>(result.lines)) {
    const RejectedLine& r = result.rejects.front();
    return absl::InvalidArgumentError(absl::StrCat(
        result.rejects.size(), " of ", result.lines, " ", what,
        " lines are malformed; first at line ", r.line, ": ", r.reason));
  }
  return result;
}

template <typename T>
absl::StatusOr<ParseResult<T>> ReadFile(
    const std::string& path,
    absl::StatusOr<ParseResult<T>> (*parse)(std::istream&, double)) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  return parse(in, 0.01);
}

double Cosine(std::span<const double> a, std::span<const double> b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return dot / std::sqrt(na * nb);
}

}  // namespace

int GenreIndex(std::string_view label) {
  for (size_t g = 0; g < kMovieLensGenres.size(); ++g) {
    if (kMovieLensGenres[g] == label) return static_cast<int>(g);
  }
  return -1;
}

absl::StatusOr<ParseResult<RatingRecord>> ParseRatings(std::istream& in,
                                                       double max_reject_fraction) {
  return ParseLines<RatingRecord>(in, max_reject_fraction, "rating", ParseRatingLine);
}

absl::StatusOr<ParseResult<MovieRecord>> ParseMovies(std::istream& in,
                                                     double max_reject_fraction) {
  return ParseLines<MovieRecord>(in, max_reject_fraction, "movie", ParseMovieLine);
}

absl::StatusOr<ParseResult<RatingRecord>> ReadRatingsFile(const std::string& path) {
  return ReadFile<RatingRecord>(path, &ParseRatings);
}

absl::StatusOr<ParseResult<MovieRecord>> ReadMoviesFile(const std::string& path) {
  return ReadFile<MovieRecord>(path, &ParseMovies);
}

std::string FormatRating(const RatingRecord& r) {
  return absl::StrCat(r.user_id, "::", r.movie_id, "::", r.rating, "::", r.timestamp);
}

std::string FormatMovie(const MovieRecord& m) {
  std::vector<std::string> labels;
  for (int g : m.genres) labels.emplace_back(kMovieLensGenres[g]);
  return absl::StrCat(m.movie_id, "::", m.title, "::", absl::StrJoin(labels, "|"));
}

IdIndex::IdIndex(std::vector<int64_t> ids) : ids_(std::move(ids)) {
  position_.reserve(ids_.size());
  for (size_t i = 0; i < ids_.size(); ++i) {
    position_.emplace(ids_[i], static_cast<int>(i));
  }
}

IdIndex IdIndex::Sorted(std::vector<int64_t> ids) {
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return IdIndex(std::move(ids));
}

int IdIndex::Find(int64_t id) const {
  auto it = position_.find(id);
  return it == position_.end() ? -1 : it->second;
}

absl::StatusOr<RequestData> ToRequestMatrix(std::span<const RatingRecord> ratings,
                                            const IdIndex& users,
                                            const IdIndex& movies) {
  RequestData out;
  out.requests = RequestMatrix(users.size(), movies.size());
  for (const RatingRecord& r : ratings) {
    const int k = users.Find(r.user_id);
    const int f = movies.Find(r.movie_id);
    if (k < 0) return absl::NotFoundError(absl::StrCat("user ", r.user_id, " not indexed"));
    if (f < 0) {
      return absl::NotFoundError(absl::StrCat("movie ", r.movie_id, " not indexed"));
    }
    if (out.requests.count(k, f) > 0) {
      ++out.duplicates;
    } else {
      out.requests.Set(k, f, 1);
    }
  }
  return out;
}

absl::StatusOr<ReleaseSplit> SplitByRelease(std::span<const MovieRecord> movies,
                                            std::span<const RatingRecord> ratings) {
  std::vector<const MovieRecord*> order;
  for (const MovieRecord& m : movies) order.push_back(&m);
  std::sort(order.begin(), order.end(), [](const MovieRecord* a, const MovieRecord* b) {
    if (a->year.has_value() != b->year.has_value()) return a->year.has_value();
    if (a->year != b->year) return *a->year < *b->year;
    return a->movie_id < b->movie_id;
  });
  std::vector<int64_t> ids;
  for (const MovieRecord* m : order) ids.push_back(m->movie_id);
  std::vector<int64_t> check = ids;
  std::sort(check.begin(), check.end());
  if (std::adjacent_find(check.begin(), check.end()) != check.end()) {
    return absl::InvalidArgumentError("duplicate movie id in the movie list");
  }
  IdIndex all(ids);

  std::vector<int64_t> user_ids;
  user_ids.reserve(ratings.size());
  for (const RatingRecord& r : ratings) user_ids.push_back(r.user_id);
  ReleaseSplit out;
  out.users = IdIndex::Sorted(std::move(user_ids));
  absl::StatusOr<RequestData> full = ToRequestMatrix(ratings, out.users, all);
  if (!full.ok()) return full.status();
  out.duplicates = full->duplicates;

  const int n_first = (all.size() + 1) / 2;
  std::vector<int> first_cols, second_cols;
  for (int f = 0; f < all.size(); ++f) (f < n_first ? first_cols : second_cols).push_back(f);
  out.first_movies = IdIndex(std::vector<int64_t>(ids.begin(), ids.begin() + n_first));
  out.second_movies = IdIndex(std::vector<int64_t>(ids.begin() + n_first, ids.end()));
  out.first = full->requests.SelectFiles(first_cols);
  out.second = full->requests.SelectFiles(second_cols);
  return out;
}

absl::StatusOr<std::vector<CurvePoint>> CatalogSizeCurve(const RequestMatrix& requests,
                                                         std::span<const int> user_counts,
                                                         int trials, uint64_t seed) {
  const int k_users = requests.num_users();
  if (trials < 1) return absl::InvalidArgumentError("need at least one trial");
  int largest = 0;
  for (int c : user_counts) {
    if (c < 1 || c > k_users) {
      return absl::OutOfRangeError(
          absl::StrCat("user count ", c, " outside [1, ", k_users, "]"));
    }
    largest = std::max(largest, c);
  }
  // Positions of each requested count along a trial's prefix.
  std::map<int, std::vector<size_t>> wanted;
  for (size_t i = 0; i < user_counts.size(); ++i) wanted[user_counts[i]].push_back(i);

  std::vector<double> sums(user_counts.size(), 0.0);
  std::vector<uint8_t> seen(requests.num_files());
  for (int t = 0; t < trials; ++t) {
    Rng rng(DeriveSeed(seed, static_cast<uint64_t>(t)));
    const std::vector<int> order = rng.SampleWithoutReplacement(k_users, largest);
    std::fill(seen.begin(), seen.end(), 0);
    int64_t distinct = 0;
    auto next = wanted.begin();
    for (int i = 0; i < largest && next != wanted.end(); ++i) {
      for (const auto& e : requests.row(order[i])) {
        if (!seen[e.file]) {
          seen[e.file] = 1;
          ++distinct;
        }
      }
      if (next->first == i + 1) {
        for (size_t idx : next->second) sums[idx] += static_cast<double>(distinct);
        ++next;
      }
    }
  }
  std::vector<CurvePoint> curve;
  for (size_t i = 0; i < user_counts.size(); ++i) {
    curve.push_back({static_cast<double>(user_counts[i]), sums[i] / trials});
  }
  return curve;
}

std::vector<int> DefaultUserCounts(int num_users) {
  std::vector<int> counts;
  for (int64_t scale = 1; scale < num_users; scale *= 10) {
    for (int64_t m : {1, 2, 5}) {
      if (m * scale < num_users) counts.push_back(static_cast<int>(m * scale));
    }
  }
  if (num_users >= 1) counts.push_back(num_users);
  return counts;
}

absl::StatusOr<TopicCatalog> GenreCatalog(std::span<const MovieRecord> movies,
                                          const IdIndex& columns,
                                          std::span<const int> genres) {
  std::unordered_map<int64_t, const MovieRecord*> by_id;
  for (const MovieRecord& m : movies) by_id[m.movie_id] = &m;
  std::vector<int> topic_of_genre(kMovieLensGenres.size(), -1);
  std::vector<std::string> labels;
  for (size_t j = 0; j < genres.size(); ++j) {
    const int g = genres[j];
    if (g < 0 || g >= static_cast<int>(kMovieLensGenres.size())) {
      return absl::OutOfRangeError(absl::StrCat("genre index ", g));
    }
    topic_of_genre[g] = static_cast<int>(j);
    labels.emplace_back(kMovieLensGenres[g]);
  }
  std::vector<std::vector<int>> files(genres.size());
  for (int f = 0; f < columns.size(); ++f) {
    auto it = by_id.find(columns.id(f));
    if (it == by_id.end()) {
      return absl::NotFoundError(absl::StrCat("movie ", columns.id(f), " not listed"));
    }
    bool placed = false;
    for (int g : it->second->genres) {
      if (topic_of_genre[g] >= 0) {
        files[topic_of_genre[g]].push_back(f);
        placed = true;
      }
    }
    if (!placed) {
      return absl::InvalidArgumentError(absl::StrCat(
          "movie ", columns.id(f), " has none of the selected genres"));
    }
  }
  return TopicCatalog::Create(std::move(labels), std::move(files), columns.size());
}

std::vector<int> CommonGenres(std::span<const MovieRecord> movies,
                              std::span<const IdIndex* const> column_sets) {
  std::vector<int> present(kMovieLensGenres.size(), 0);
  for (const IdIndex* columns : column_sets) {
    std::vector<bool> here(kMovieLensGenres.size(), false);
    for (const MovieRecord& m : movies) {
      if (columns->Find(m.movie_id) < 0) continue;
      for (int g : m.genres) here[g] = true;
    }
    for (size_t g = 0; g < here.size(); ++g) present[g] += here[g] ? 1 : 0;
  }
  std::vector<int> common;
  for (size_t g = 0; g < present.size(); ++g) {
    if (present[g] == static_cast<int>(column_sets.size())) {
      common.push_back(static_cast<int>(g));
    }
  }
  return common;
}

double TemporalSimilarity::FractionAbove(double threshold) const {
  if (similarity.empty()) return 0.0;
  const auto above = std::count_if(similarity.begin(), similarity.end(),
                                   [&](double s) { return s > threshold; });
  return static_cast<double>(above) / static_cast<double>(similarity.size());
}

absl::StatusOr<TemporalSimilarity> TemporalTopicSimilarity(
    const RequestMatrix& first, const RequestMatrix& second, const EmConfig& config,
    const TopicCatalog* first_catalog, const TopicCatalog* second_catalog) {
  if (first.num_users() != second.num_users()) {
    return absl::InvalidArgumentError("halves cover different user sets");
  }
  absl::StatusOr<EmResult> fit1 = EmFit(first, config, first_catalog);
  if (!fit1.ok()) return fit1.status();
  absl::StatusOr<EmResult> fit2 = EmFit(second, config, second_catalog);
  if (!fit2.ok()) return fit2.status();

  TemporalSimilarity out;
  for (int k = 0; k < first.num_users(); ++k) {
    if (first.user_total(k) == 0 || second.user_total(k) == 0) {
      ++out.excluded_users;
      continue;
    }
    out.users.push_back(k);
    out.similarity.push_back(
        Cosine(fit1->model.topic_pref.row(k), fit2->model.topic_pref.row(k)));
  }
  std::vector<double> sorted = out.similarity;
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  for (size_t i = 0; i < sorted.size(); ++i) {
    if (i + 1 < sorted.size() && sorted[i + 1] == sorted[i]) continue;
    out.cdf.push_back({sorted[i], static_cast<double>(i + 1) / n});
  }
  return out;
}

absl::StatusOr<double> ActiveLevelSimilarity(const RequestMatrix& first,
                                             const RequestMatrix& second) {
  if (first.num_users() != second.num_users()) {
    return absl::InvalidArgumentError("halves cover different user sets");
  }
  std::vector<double> a(first.user_totals().begin(), first.user_totals().end());
  std::vector<double> b(second.user_totals().begin(), second.user_totals().end());
  return CosineSimilarity(a, b);
}

absl::StatusOr<MovieLensAnalysis> AnalyzeMovieLens(const ParseResult<MovieRecord>& movies,
                                                   const ParseResult<RatingRecord>& ratings,
                                                   const AnalysisOptions& options) {
  MovieLensAnalysis out;
  out.ratings = static_cast<int64_t>(ratings.records.size());
  out.rejected_ratings = static_cast<int64_t>(ratings.rejects.size());
  out.movies = static_cast<int64_t>(movies.records.size());
  for (const MovieRecord& m : movies.records) {
    out.max_movie_id = std::max(out.max_movie_id, m.movie_id);
  }

  absl::StatusOr<ReleaseSplit> split = SplitByRelease(movies.records, ratings.records);
  if (!split.ok()) return split.status();
  out.num_users = split->users.size();
  out.duplicates = split->duplicates;
  out.requests = split->first.total() + split->second.total();

  // Whole matrix with movies in release order; the column order does not
  // affect the catalog-size statistic.
  RequestMatrix full(out.num_users, split->first.num_files() + split->second.num_files());
  for (int k = 0; k < out.num_users; ++k) {
    for (const auto& e : split->first.row(k)) full.Set(k, e.file, e.count);
    for (const auto& e : split->second.row(k)) {
      full.Set(k, split->first.num_files() + e.file, e.count);
    }
  }
  const std::vector<int> counts =
      options.user_counts.empty() ? DefaultUserCounts(out.num_users) : options.user_counts;
  absl::StatusOr<std::vector<CurvePoint>> curve =
      CatalogSizeCurve(full, counts, options.trials, options.seed);
  if (!curve.ok()) return curve.status();
  out.catalog_curve = std::move(*curve);
  for (CurveFamily family : {CurveFamily::kZipf, CurveFamily::kWeibull,
                             CurveFamily::kExponential, CurveFamily::kPower,
                             CurveFamily::kLog}) {
    absl::StatusOr<FitResult> fit = FitCurve(out.catalog_curve, family);
    if (fit.ok()) out.fits.push_back(std::move(*fit));
  }

  absl::StatusOr<double> active = ActiveLevelSimilarity(split->first, split->second);
  if (!active.ok()) return active.status();
  out.active_similarity = *active;

  EmConfig em = options.em;
  absl::StatusOr<TemporalSimilarity> temporal;
  if (options.genre_topics) {
    const IdIndex* halves[] = {&split->first_movies, &split->second_movies};
    out.topic_genres = CommonGenres(movies.records, halves);
    absl::StatusOr<TopicCatalog> c1 =
        GenreCatalog(movies.records, split->first_movies, out.topic_genres);
    if (!c1.ok()) return c1.status();
    absl::StatusOr<TopicCatalog> c2 =
        GenreCatalog(movies.records, split->second_movies, out.topic_genres);
    if (!c2.ok()) return c2.status();
    em.num_topics = static_cast<int>(out.topic_genres.size());
    temporal = TemporalTopicSimilarity(split->first, split->second, em, &*c1, &*c2);
  } else {
    temporal = TemporalTopicSimilarity(split->first, split->second, em);
  }
  if (!temporal.ok()) return temporal.status();
  out.temporal = std::move(*temporal);
  return out;
}

}  // namespace prefcache
