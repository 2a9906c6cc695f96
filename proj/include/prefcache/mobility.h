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

#ifndef PREFCACHE_MOBILITY_H_
#define PREFCACHE_MOBILITY_H_

#include <cstdint>
#include <span>
#include <vector>

#include "absl/status/statusor.h"
#include "prefcache/matrix.h"

namespace prefcache {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

// Pairwise probability that two users are within the collaboration distance.
// Symmetric with a unit diagonal: a user always reaches its own cache.
struct ContactMatrix {
  Matrix a;
  double collaboration_distance_m = 0.0;

  int num_users() const { return a.rows(); }

  static ContactMatrix Identity(int num_users);
  static ContactMatrix AllOnes(int num_users);
};

struct MobilityConfig {
  double area_side_m = 500.0;
  double v_max_mps = 0.0;
  double period_s = 7200.0;
  double leg_duration_s = 100.0;
  double time_step_s = 1.0;
  uint64_t seed = 1;
};

absl::Status ValidateMobilityConfig(const MobilityConfig& config);

// Users placed uniformly at random in the square [0, side]^2.
std::vector<Point> UniformPositions(int num_users, double area_side_m,
                                    uint64_t seed);

// Binary contacts: 1 when the distance is at most r_c.
ContactMatrix StaticContacts(std::span<const Point> positions, double r_c_m);

// Sampled positions: `samples[t][k]` is user k at time t * time_step.
struct Trajectories {
  double time_step_s = 1.0;
  std::vector<std::vector<Point>> samples;
};

// Random walk in the square. Every leg each user draws a speed in
// [0, v_max] and a heading in [0, 2 pi); walls reflect.
absl::StatusOr<Trajectories> SimulateRandomWalk(const MobilityConfig& config,
                                                int num_users);

// Fraction of samples each pair spends within r_c.
ContactMatrix ContactsFromTrajectories(const Trajectories& trajectories,
                                       double r_c_m);

// Simulates and accumulates without storing trajectories.
absl::StatusOr<ContactMatrix> RandomWalkContacts(const MobilityConfig& config,
                                                 int num_users, double r_c_m);

}  // namespace prefcache

#endif  // PREFCACHE_MOBILITY_H_
