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
"""Caching placement with learned user preferences for D2D networks."""

from prefcache._prefcache import (
    __version__,
    aggregate_popularity,
    alternating_optimize,
    analyze_movielens,
    average_similarity,
    baseline_fit,
    brute_force_optimize,
    cosine_similarity,
    em_fit,
    fit_curve,
    greedy_optimize,
    offloading_probability,
    popularity_offloading,
    popularity_policy,
    power_kernel,
    prior_fit,
    random_walk_contacts,
    run_scenario,
    static_contacts,
    synthesize_demand,
    zipf_popularity,
)
