#!/usr/bin/env python3
# Copyright 2026 The Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Writes the bundled offline excerpt in MovieLens-1M format.

The MovieLens license does not allow redistribution, so the excerpt is
generated: 50 users and 200 movies whose ratings follow a stable per-user
genre taste. Every genre occurs among both the older and the newer half of
the movies.
"""

import argparse
import os
import random

GENRES = [
    "Action", "Adventure", "Animation", "Children's", "Comedy", "Crime",
    "Documentary", "Drama", "Fantasy", "Film-Noir", "Horror", "Musical",
    "Mystery", "Romance", "Sci-Fi", "Thriller", "War", "Western",
]

NUM_USERS = 50
NUM_MOVIES = 200


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default=os.path.join(
        os.path.dirname(os.path.abspath(__file__)), "..", "data", "ml-mini"))
    parser.add_argument("--seed", type=int, default=20260101)
    args = parser.parse_args()
    rng = random.Random(args.seed)
    os.makedirs(args.out, exist_ok=True)

    movies = []
    for i in range(NUM_MOVIES):
        movie_id = i + 1
        year = 1930 + (i * 70) // NUM_MOVIES
        genres = [i % len(GENRES)]
        if rng.random() < 0.4:
            extra = rng.randrange(len(GENRES))
            if extra not in genres:
                genres.append(extra)
        title = "Movie %03d (%d)" % (movie_id, year)
        movies.append((movie_id, title, genres))

    # Popularity ranks are a random permutation of the catalog.
    ranks = list(range(1, NUM_MOVIES + 1))
    rng.shuffle(ranks)

    ratings = []
    for u in range(NUM_USERS):
        user_id = u + 1
        favorites = rng.sample(range(len(GENRES)), 3)
        weights = []
        for (movie_id, _, genres), rank in zip(movies, ranks):
            taste = 1.0 + 6.0 * sum(1 for g in genres if g in favorites)
            weights.append(taste * rank ** -0.6)
        count = rng.randint(20, 80)
        chosen = set()
        while len(chosen) < count:
            chosen.add(rng.choices(range(NUM_MOVIES), weights=weights)[0])
        for m in sorted(chosen):
            timestamp = 956703932 + rng.randrange(3 * 365 * 86400)
            ratings.append((user_id, movies[m][0], rng.randint(1, 5), timestamp))

    with open(os.path.join(args.out, "movies.dat"), "w", newline="\n") as f:
        for movie_id, title, genres in movies:
            f.write("%d::%s::%s\n" % (movie_id, title,
                                      "|".join(GENRES[g] for g in genres)))
    with open(os.path.join(args.out, "ratings.dat"), "w", newline="\n") as f:
        for r in ratings:
            f.write("%d::%d::%d::%d\n" % r)


if __name__ == "__main__":
    main()
