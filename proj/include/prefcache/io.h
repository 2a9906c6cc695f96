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

// CSV and JSON forms of the library objects. Doubles are written with 17
// significant digits so every file reads back to the same bits.

#ifndef PREFCACHE_IO_H_
#define PREFCACHE_IO_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "prefcache/demand_model.h"
#include "prefcache/learner.h"
#include "prefcache/matrix.h"
#include "prefcache/mobility.h"
#include "prefcache/optimizer.h"

namespace prefcache {

std::string FormatDouble(double value);

// Writes to a temporary sibling and renames it into place.
absl::Status WriteFileAtomic(const std::string& path, std::string_view contents);
absl::StatusOr<std::string> ReadTextFile(const std::string& path);
// Creates the directory and its parents if needed.
absl::Status EnsureDirectory(const std::string& path);

// Comma-separated numeric table; `skip_header` drops the first line.
absl::StatusOr<std::vector<std::vector<double>>> ParseNumericCsv(std::string_view text,
                                                                 bool skip_header);

// "user_id,active,0,1,...,F-1" then one row per user.
std::string DemandProfileToCsv(const DemandProfile& profile);
absl::StatusOr<DemandProfile> DemandProfileFromCsv(std::string_view text);

struct DemandMetadata {
  int num_users = 0;
  int num_files = 0;
  double alpha = 0.0;
  double beta = 0.0;
  uint64_t seed = 0;
  // Realized average cosine similarity, when computed.
  double average_similarity = -1.0;
  int regenerated_users = 0;
};
std::string DemandMetadataToJson(const DemandMetadata& meta);

// "file_id,probability".
std::string PopularityToCsv(const PopularityVector& popularity);
absl::StatusOr<PopularityVector> PopularityFromCsv(std::string_view text);

// Dense K x K, no header.
std::string ContactMatrixToCsv(const ContactMatrix& contacts);
absl::StatusOr<ContactMatrix> ContactMatrixFromCsv(std::string_view text, double r_c_m);

struct ContactMetadata {
  double r_c_m = 0.0;
  double period_s = 0.0;
  double v_max_mps = 0.0;
  double area_side_m = 0.0;
  double time_step_s = 0.0;
  double leg_duration_s = 0.0;
  uint64_t seed = 0;
};
std::string ContactMetadataToJson(const ContactMetadata& meta);
absl::StatusOr<ContactMetadata> ContactMetadataFromJson(std::string_view text);

// "user_id,file_id" for every placed pair.
std::string CachingMatrixToCsv(const CachingMatrix& caching);
absl::StatusOr<CachingMatrix> CachingMatrixFromCsv(std::string_view text, int num_users,
                                                   int num_files, int budget);

// {scheme, iterations, converged, objective_trace, seconds}; `seconds` is
// left out unless `include_timing`, keeping repeated runs byte-identical.
std::string OptimizerReportToJson(const OptimizerReport& report, bool include_timing);

// "user_id,file_id,count".
std::string RequestsToCsv(const RequestMatrix& requests);
absl::StatusOr<RequestMatrix> RequestsFromCsv(std::string_view text, int num_users,
                                              int num_files);

// "iteration,log_likelihood".
std::string LikelihoodTraceToCsv(const std::vector<double>& trace);

struct ModelMetadata {
  uint64_t seed = 0;
  int iterations = 0;
  bool converged = false;
  double final_log_likelihood = 0.0;
  std::string scheme;
};
// Writes model.json, active.csv, topic_pref.csv and file_given_topic.csv.
absl::Status WritePlsaModel(const std::string& directory, const PlsaModel& model,
                            const ModelMetadata& meta);
absl::StatusOr<PlsaModel> ReadPlsaModel(const std::string& directory);

// Headerless dense matrix.
std::string MatrixToCsv(const Matrix& matrix);
absl::StatusOr<Matrix> MatrixFromCsv(std::string_view text);

}  // namespace prefcache

#endif  // PREFCACHE_IO_H_
