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
#include <random>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "gtest/gtest.h"
#include "test_util.h"

namespace prefcache {
namespace {

const std::string kDataDir = PREFCACHE_DATA_DIR;

absl::StatusOr<ParseResult<RatingRecord>> Ratings(const std::string& text,
                                                  double max_reject = 0.01) {
  std::istringstream in(text);
  return ParseRatings(in, max_reject);
}

absl::StatusOr<ParseResult<MovieRecord>> Movies(const std::string& text,
                                                double max_reject = 0.01) {
  std::istringstream in(text);
  return ParseMovies(in, max_reject);
}

TEST(ParseRatingsTest, ReadmeLine) {
  auto r = Ratings("1::1193::5::978300760\n");
  ASSERT_TRUE(r.ok());
  ASSERT_EQ(r->records.size(), 1u);
  EXPECT_EQ(r->records[0], (RatingRecord{1, 1193, 5, 978300760}));
}

TEST(ParseRatingsTest, EmptyStream) {
  auto r = Ratings("");
  ASSERT_TRUE(r.ok());
  EXPECT_TRUE(r->records.empty());
  EXPECT_EQ(r->lines, 0);
}

TEST(ParseRatingsTest, RejectsMalformedWithLineNumber) {
  auto r = Ratings("1::2::3::4\na::b::c::d\n1::2::3\n", 1.0);
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(r->records.size(), 1u);
  ASSERT_EQ(r->rejects.size(), 2u);
  EXPECT_EQ(r->rejects[0].line, 2);
  EXPECT_EQ(r->rejects[0].text, "a::b::c::d");
  EXPECT_FALSE(r->rejects[0].reason.empty());
  EXPECT_EQ(r->rejects[1].line, 3);
  // Too many bad lines under the default budget.
  EXPECT_FALSE(Ratings("1::2::3::4\na::b::c::d\n").ok());
}

TEST(ParseRatingsTest, ToleratesCarriageReturns) {
  auto r = Ratings("1::2::3::4\r\n5::6::1::7\r\n");
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(r->records.size(), 2u);
}

TEST(ParseMoviesTest, ToyStory) {
  auto m = Movies("1::Toy Story (1995)::Animation|Children's|Comedy\n");
  ASSERT_TRUE(m.ok());
  ASSERT_EQ(m->records.size(), 1u);
  const MovieRecord& toy = m->records[0];
  EXPECT_EQ(toy.movie_id, 1);
  EXPECT_EQ(toy.title, "Toy Story (1995)");
  EXPECT_EQ(toy.year, 1995);
  EXPECT_EQ(toy.genres, (std::vector<int>{GenreIndex("Animation"),
                                          GenreIndex("Children's"),
                                          GenreIndex("Comedy")}));
}

TEST(ParseMoviesTest, MissingYearAndUnknownGenre) {
  auto m = Movies("7::Untitled::Drama\n8::Other (1990)::Cooking\n", 1.0);
  ASSERT_TRUE(m.ok());
  ASSERT_EQ(m->records.size(), 1u);
  EXPECT_FALSE(m->records[0].year.has_value());
  ASSERT_EQ(m->rejects.size(), 1u);
  EXPECT_EQ(m->rejects[0].line, 2);
  EXPECT_NE(m->rejects[0].reason.find("Cooking"), std::string::npos);
}

TEST(ParseMoviesTest, TitlesMayContainSeparators) {
  auto m = Movies("9::Title: Part (2) (1999)::Comedy\n");
  ASSERT_TRUE(m.ok());
  ASSERT_EQ(m->records.size(), 1u);
  EXPECT_EQ(m->records[0].year, 1999);
}

TEST(GenreTest, DocumentedOrder) {
  EXPECT_EQ(GenreIndex("Action"), 0);
  EXPECT_EQ(GenreIndex("Western"), 17);
  EXPECT_EQ(GenreIndex("Cooking"), -1);
}

TEST(RoundTripTest, AcceptedLinesReproduced) {
  const std::string ratings = "3::10::4::100\nbad line\n1::2::5::99\n";
  auto r = Ratings(ratings, 1.0);
  ASSERT_TRUE(r.ok());
  std::string out;
  for (const auto& rec : r->records) out += FormatRating(rec) + "\n";
  EXPECT_EQ(out, "3::10::4::100\n1::2::5::99\n");

  const std::string movies =
      "1::Toy Story (1995)::Animation|Children's|Comedy\n2::Heat (1995)::Action|Crime|Thriller\n";
  auto m = Movies(movies);
  ASSERT_TRUE(m.ok());
  std::string mout;
  for (const auto& rec : m->records) mout += FormatMovie(rec) + "\n";
  EXPECT_EQ(mout, movies);
}

TEST(RoundTripTest, BundledExcerpt) {
  for (const std::string name : {"ratings.dat", "movies.dat"}) {
    std::ifstream in(kDataDir + "/ml-mini/" + name);
    ASSERT_TRUE(in.good()) << name;
    std::stringstream buffer;
    buffer << in.rdbuf();
    std::multiset<std::string> original, formatted;
    std::istringstream lines(buffer.str());
    for (std::string line; std::getline(lines, line);) original.insert(line);
    std::istringstream again(buffer.str());
    if (name == "ratings.dat") {
      auto r = ParseRatings(again);
      ASSERT_TRUE(r.ok());
      for (const auto& rec : r->records) formatted.insert(FormatRating(rec));
    } else {
      auto m = ParseMovies(again);
      ASSERT_TRUE(m.ok());
      for (const auto& rec : m->records) formatted.insert(FormatMovie(rec));
    }
    EXPECT_EQ(original, formatted) << name;
  }
}

TEST(IdIndexTest, SortedLookup) {
  IdIndex index = IdIndex::Sorted({30, 10, 20, 10});
  EXPECT_EQ(index.ids(), (std::vector<int64_t>{10, 20, 30}));
  EXPECT_EQ(index.Find(20), 1);
  EXPECT_EQ(index.Find(25), -1);
  IdIndex ordered({5, 3});
  EXPECT_EQ(ordered.Find(3), 1);
}

TEST(RequestMatrixTest, CountsAndDeduplicates) {
  std::vector<RatingRecord> one = {{1, 7, 4, 0}};
  auto single = ToRequestMatrix(one, IdIndex({1}), IdIndex({7}));
  ASSERT_TRUE(single.ok());
  EXPECT_EQ(single->requests.total(), 1);

  std::vector<RatingRecord> twice = {{1, 7, 4, 0}, {1, 7, 2, 5}, {2, 7, 1, 0}};
  auto dedup = ToRequestMatrix(twice, IdIndex({1, 2}), IdIndex({7}));
  ASSERT_TRUE(dedup.ok());
  EXPECT_EQ(dedup->requests.count(0, 0), 1);
  EXPECT_EQ(dedup->duplicates, 1);
  EXPECT_EQ(dedup->requests.total(), 3 - dedup->duplicates);

  EXPECT_FALSE(ToRequestMatrix(twice, IdIndex({1}), IdIndex({7})).ok());
}

TEST(SplitTest, PartitionsRatingsByRelease) {
  auto movies = Movies(
      "1::A (1990)::Drama\n2::B (1950)::Comedy\n3::C::Drama\n4::D (1970)::Action\n"
      "5::E (1950)::Drama\n");
  std::vector<RatingRecord> ratings = {
      {1, 1, 5, 0}, {1, 2, 3, 0}, {2, 3, 4, 0}, {2, 4, 2, 0}, {3, 5, 1, 0},
      {3, 1, 1, 0}, {3, 1, 2, 0}};
  auto split = SplitByRelease(movies->records, ratings);
  ASSERT_TRUE(split.ok());
  // Order: 2 (1950), 5 (1950), 4 (1970), 1 (1990), 3 (no year).
  EXPECT_EQ(split->first_movies.ids(), (std::vector<int64_t>{2, 5, 4}));
  EXPECT_EQ(split->second_movies.ids(), (std::vector<int64_t>{1, 3}));
  EXPECT_EQ(split->duplicates, 1);
  EXPECT_EQ(split->first.total() + split->second.total(),
            static_cast<int64_t>(ratings.size()) - split->duplicates);

  // Concatenating the halves recovers the full matrix up to column order.
  std::vector<int64_t> all_ids = split->first_movies.ids();
  all_ids.insert(all_ids.end(), split->second_movies.ids().begin(),
                 split->second_movies.ids().end());
  auto full = ToRequestMatrix(ratings, split->users, IdIndex(all_ids));
  ASSERT_TRUE(full.ok());
  const int first_cols = split->first_movies.size();
  for (int k = 0; k < split->users.size(); ++k) {
    for (int c = 0; c < static_cast<int>(all_ids.size()); ++c) {
      const int64_t expected = c < first_cols ? split->first.count(k, c)
                                              : split->second.count(k, c - first_cols);
      EXPECT_EQ(full->requests.count(k, c), expected);
    }
  }
}

TEST(SplitTest, HalvesOfBundledExcerpt) {
  auto movies = ReadMoviesFile(kDataDir + "/ml-mini/movies.dat");
  auto ratings = ReadRatingsFile(kDataDir + "/ml-mini/ratings.dat");
  ASSERT_TRUE(movies.ok() && ratings.ok());
  auto split = SplitByRelease(movies->records, ratings->records);
  ASSERT_TRUE(split.ok());
  const int total = static_cast<int>(movies->records.size());
  EXPECT_EQ(split->first_movies.size() + split->second_movies.size(), total);
  EXPECT_LE(std::abs(split->first_movies.size() - split->second_movies.size()), 1);
  EXPECT_EQ(split->first.total() + split->second.total(),
            static_cast<int64_t>(ratings->records.size()) - split->duplicates);
}

TEST(CatalogSizeTest, Properties) {
  std::mt19937_64 gen(3);
  RequestMatrix n = testing::RandomRequests(gen, 20, 60, 0.1, 1);
  std::vector<int> counts = DefaultUserCounts(20);
  EXPECT_EQ(counts.front(), 1);
  EXPECT_EQ(counts.back(), 20);
  auto curve = CatalogSizeCurve(n, counts, 30, 5);
  ASSERT_TRUE(curve.ok());
  ASSERT_EQ(curve->size(), counts.size());
  for (size_t i = 1; i < curve->size(); ++i) {
    EXPECT_GE((*curve)[i].y, (*curve)[i - 1].y);
  }
  int requested = 0;
  for (int f = 0; f < 60; ++f) requested += n.file_total(f) > 0;
  EXPECT_EQ(curve->back().y, requested);
  auto other_seed = CatalogSizeCurve(n, counts, 7, 99);
  EXPECT_EQ(other_seed->back().y, curve->back().y);

  // Samples of one user average to the mean per-user distinct count.
  double distinct = 0.0;
  for (int k = 0; k < 20; ++k) distinct += n.row(k).size();
  auto ones = CatalogSizeCurve(n, std::vector<int>{1}, 20000, 1);
  EXPECT_NEAR((*ones)[0].y, distinct / 20, 0.05 * distinct / 20);
}

TEST(GenreCatalogTest, ColumnsFollowGenres) {
  auto movies = Movies("1::A (1990)::Drama|Comedy\n2::B (1950)::Comedy\n3::C (1960)::Action\n");
  const std::vector<int> genres = {GenreIndex("Comedy"), GenreIndex("Drama"),
                                   GenreIndex("Action")};
  auto catalog = GenreCatalog(movies->records, IdIndex({3, 1, 2}), genres);
  ASSERT_TRUE(catalog.ok());
  EXPECT_EQ(catalog->files(0), (std::vector<int>{1, 2}));
  EXPECT_EQ(catalog->files(1), (std::vector<int>{1}));
  EXPECT_EQ(catalog->files(2), (std::vector<int>{0}));
  EXPECT_EQ(catalog->labels()[0], "Comedy");
}

TEST(TemporalSimilarityTest, IdenticalHalvesGiveOne) {
  std::mt19937_64 gen(4);
  RequestMatrix n = testing::RandomRequests(gen, 15, 30, 0.2, 3);
  RequestMatrix with_idle(16, 30);
  for (int k = 0; k < 15; ++k) {
    for (const auto& e : n.row(k)) with_idle.Set(k, e.file, e.count);
  }
  auto sim = TemporalTopicSimilarity(with_idle, with_idle, {.num_topics = 3, .seed = 2});
  ASSERT_TRUE(sim.ok());
  EXPECT_EQ(sim->excluded_users, 1);
  ASSERT_EQ(sim->similarity.size(), 15u);
  for (double s : sim->similarity) EXPECT_NEAR(s, 1.0, 1e-12);
  EXPECT_EQ(sim->FractionAbove(0.8), 1.0);
  EXPECT_NEAR(sim->cdf.back().y, 1.0, 1e-15);
}

TEST(ActiveSimilarityTest, Values) {
  auto a = RequestMatrix::FromDense({{1, 1}, {2, 0}});
  auto b = RequestMatrix::FromDense({{4}, {4}});
  // Active levels (0.5, 0.5) and (0.5, 0.5).
  EXPECT_NEAR(*ActiveLevelSimilarity(*a, *b), 1.0, 1e-15);
  auto c = RequestMatrix::FromDense({{0}, {3}});
  EXPECT_NEAR(*ActiveLevelSimilarity(*a, *c), 1.0 / std::sqrt(2.0), 1e-15);
}

TEST(AnalyzeTest, BundledExcerpt) {
  auto movies = ReadMoviesFile(kDataDir + "/ml-mini/movies.dat");
  auto ratings = ReadRatingsFile(kDataDir + "/ml-mini/ratings.dat");
  ASSERT_TRUE(movies.ok() && ratings.ok());
  AnalysisOptions options;
  options.trials = 10;
  auto analysis = AnalyzeMovieLens(*movies, *ratings, options);
  ASSERT_TRUE(analysis.ok()) << analysis.status();
  EXPECT_EQ(analysis->num_users, 50);
  EXPECT_EQ(analysis->movies, 200);
  EXPECT_EQ(analysis->requests, analysis->ratings - analysis->duplicates);
  EXPECT_EQ(analysis->fits.size(), 5u);
  EXPECT_GT(analysis->active_similarity, 0.0);
  EXPECT_LE(analysis->active_similarity, 1.0 + 1e-12);
  for (size_t i = 1; i < analysis->catalog_curve.size(); ++i) {
    EXPECT_GE(analysis->catalog_curve[i].y, analysis->catalog_curve[i - 1].y);
  }
}

}  // namespace
}  // namespace prefcache
