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

#include "prefcache/mobility.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "absl/strings/str_cat.h"
#include "prefcache/random.h"

namespace prefcache {
namespace {

// Stream ids; per-user walks use kWalkStream + user.
constexpr uint64_t kPositionStream = 0;
constexpr uint64_t kWalkStream = 1000;

// Maps an unfolded coordinate onto [0, side] with mirror reflection.
double Fold(double u, double side) {
  if (side <= 0.0) return 0.0;
  const double period = 2.0 * side;
  double r = std::fmod(u, period);
  if (r < 0.0) r += period;
  return r > side ? period - r : r;
}

bool InContact(const Point& p, const Point& q, double r_c_sq) {
  const double dx = p.x - q.x;
  const double dy = p.y - q.y;
  return dx * dx + dy * dy <= r_c_sq;
}

int64_t SampleCount(const MobilityConfig& config) {
  return static_cast<int64_t>(std::llround(config.period_s / config.time_step_s));
}

// One user's walk, advanced one time step at a time.
class Walker {
 public:
  Walker(const MobilityConfig& config, Point start, uint64_t seed)
      : config_(config), rng_(seed), ux_(start.x), uy_(start.y) {
    steps_per_leg_ = std::max<int64_t>(
        1, std::llround(config.leg_duration_s / config.time_step_s));
    NewLeg();
  }

  Point position() const {
    return {Fold(ux_, config_.area_side_m), Fold(uy_, config_.area_side_m)};
  }

  void Step() {
    ux_ += vx_ * config_.time_step_s;
    uy_ += vy_ * config_.time_step_s;
    if (++steps_in_leg_ == steps_per_leg_) NewLeg();
  }

 private:
  void NewLeg() {
    const double speed = rng_.Uniform(0.0, config_.v_max_mps);
    const double heading = rng_.Uniform(0.0, 2.0 * std::numbers::pi);
    vx_ = speed * std::cos(heading);
    vy_ = speed * std::sin(heading);
    steps_in_leg_ = 0;
  }

  const MobilityConfig& config_;
  Rng rng_;
  double ux_, uy_;
  double vx_ = 0.0, vy_ = 0.0;
  int64_t steps_per_leg_ = 1;
  int64_t steps_in_leg_ = 0;
};

std::vector<Walker> MakeWalkers(const MobilityConfig& config, int num_users) {
  const std::vector<Point> start =
      UniformPositions(num_users, config.area_side_m,
                       DeriveSeed(config.seed, kPositionStream));
  std::vector<Walker> walkers;
  walkers.reserve(num_users);
  for (int k = 0; k < num_users; ++k) {
    walkers.emplace_back(config, start[k],
                         DeriveSeed(config.seed, kWalkStream + static_cast<uint64_t>(k)));
  }
  return walkers;
}

ContactMatrix FromCounts(const std::vector<int64_t>& counts, int num_users,
                         int64_t samples, double r_c_m) {
  ContactMatrix result;
  result.collaboration_distance_m = r_c_m;
  result.a = Matrix(num_users, num_users);
  for (int k = 0; k < num_users; ++k) {
    result.a(k, k) = 1.0;
    for (int m = k + 1; m < num_users; ++m) {
      const double v = static_cast<double>(counts[static_cast<size_t>(k) * num_users + m]) /
                       static_cast<double>(samples);
      result.a(k, m) = v;
      result.a(m, k) = v;
    }
  }
  return result;
}

}  // namespace

ContactMatrix ContactMatrix::Identity(int num_users) {
  return ContactMatrix{Matrix::Identity(num_users), 0.0};
}

ContactMatrix ContactMatrix::AllOnes(int num_users) {
  return ContactMatrix{Matrix(num_users, num_users, 1.0),
                       std::numeric_limits<double>::infinity()};
}

absl::Status ValidateMobilityConfig(const MobilityConfig& config) {
  if (!(config.period_s > 0.0 && config.leg_duration_s > 0.0 &&
        config.time_step_s > 0.0)) {
    return absl::InvalidArgumentError("mobility durations must be positive");
  }
  if (config.leg_duration_s > config.period_s) {
    return absl::InvalidArgumentError("leg duration exceeds the placement period");
  }
  if (config.time_step_s > config.leg_duration_s) {
    return absl::InvalidArgumentError(
        absl::StrCat("time step ", config.time_step_s, " s exceeds leg duration ",
                     config.leg_duration_s, " s"));
  }
  if (!(config.v_max_mps >= 0.0)) {
    return absl::InvalidArgumentError("v_max must be non-negative");
  }
  if (!(config.area_side_m >= 0.0)) {
    return absl::InvalidArgumentError("area side must be non-negative");
  }
  return absl::OkStatus();
}

std::vector<Point> UniformPositions(int num_users, double area_side_m,
                                    uint64_t seed) {
  Rng rng(seed);
  std::vector<Point> points(num_users);
  for (Point& p : points) {
    p.x = rng.Uniform(0.0, area_side_m);
    p.y = rng.Uniform(0.0, area_side_m);
  }
  return points;
}

ContactMatrix StaticContacts(std::span<const Point> positions, double r_c_m) {
  const int n = static_cast<int>(positions.size());
  ContactMatrix result;
  result.collaboration_distance_m = r_c_m;
  result.a = Matrix(n, n);
  const double r_c_sq = r_c_m * r_c_m;
  for (int k = 0; k < n; ++k) {
    result.a(k, k) = 1.0;
    for (int m = k + 1; m < n; ++m) {
      const double v = InContact(positions[k], positions[m], r_c_sq) ? 1.0 : 0.0;
      result.a(k, m) = v;
      result.a(m, k) = v;
    }
  }
  return result;
}

absl::StatusOr<Trajectories> SimulateRandomWalk(const MobilityConfig& config,
                                                int num_users) {
  if (absl::Status s = ValidateMobilityConfig(config); !s.ok()) return s;
  std::vector<Walker> walkers = MakeWalkers(config, num_users);
  Trajectories out;
  out.time_step_s = config.time_step_s;
  const int64_t samples = SampleCount(config);
  out.samples.resize(samples);
  for (int64_t t = 0; t < samples; ++t) {
    auto& snapshot = out.samples[t];
    snapshot.reserve(num_users);
    for (Walker& w : walkers) {
      snapshot.push_back(w.position());
      w.Step();
    }
  }
  return out;
}

ContactMatrix ContactsFromTrajectories(const Trajectories& trajectories,
                                       double r_c_m) {
  const int64_t samples = static_cast<int64_t>(trajectories.samples.size());
  const int n = samples == 0 ? 0 : static_cast<int>(trajectories.samples[0].size());
  std::vector<int64_t> counts(static_cast<size_t>(n) * n, 0);
  const double r_c_sq = r_c_m * r_c_m;
  for (const auto& snapshot : trajectories.samples) {
    for (int k = 0; k < n; ++k) {
      for (int m = k + 1; m < n; ++m) {
        if (InContact(snapshot[k], snapshot[m], r_c_sq)) {
          ++counts[static_cast<size_t>(k) * n + m];
        }
      }
    }
  }
  return FromCounts(counts, n, std::max<int64_t>(samples, 1), r_c_m);
}

absl::StatusOr<ContactMatrix> RandomWalkContacts(const MobilityConfig& config,
                                                 int num_users, double r_c_m) {
  if (absl::Status s = ValidateMobilityConfig(config); !s.ok()) return s;
  std::vector<Walker> walkers = MakeWalkers(config, num_users);
  const int64_t samples = SampleCount(config);
  std::vector<int64_t> counts(static_cast<size_t>(num_users) * num_users, 0);
  std::vector<Point> snapshot(num_users);
  const double r_c_sq = r_c_m * r_c_m;
  for (int64_t t = 0; t < samples; ++t) {
    for (int k = 0; k < num_users; ++k) {
      snapshot[k] = walkers[k].position();
      walkers[k].Step();
    }
    for (int k = 0; k < num_users; ++k) {
      for (int m = k + 1; m < num_users; ++m) {
        if (InContact(snapshot[k], snapshot[m], r_c_sq)) {
          ++counts[static_cast<size_t>(k) * num_users + m];
        }
      }
    }
  }
  return FromCounts(counts, num_users, std::max<int64_t>(samples, 1), r_c_m);
}

}  // namespace prefcache
