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

#include "prefcache/io.h"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <system_error>

#include "absl/strings/str_cat.h"
#include "json.hpp"

namespace prefcache {
namespace {

using Json = nlohmann::ordered_json;

std::vector<std::string_view> SplitLines(std::string_view text) {
  std::vector<std::string_view> lines;
  size_t start = 0;
  while (start < text.size()) {
    size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) lines.push_back(line);
    start = end + 1;
  }
  return lines;
}

std::vector<std::string_view> SplitFields(std::string_view line) {
  std::vector<std::string_view> fields;
  size_t start = 0;
  while (true) {
    const size_t pos = line.find(',', start);
    if (pos == std::string_view::npos) break;
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  fields.push_back(line.substr(start));
  return fields;
}

bool ParseDouble(std::string_view text, double& out) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  if (text.empty()) return false;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc() && ptr == end;
}

bool IsWholeNumber(double v) { return std::isfinite(v) && v == std::floor(v); }

std::string Row(std::span<const double> values) {
  std::string line;
  for (size_t i = 0; i < values.size(); ++i) {
    if (i > 0) line += ',';
    line += FormatDouble(values[i]);
  }
  line += '\n';
  return line;
}

absl::StatusOr<Json> ParseJson(std::string_view text) {
  Json json = Json::parse(text.begin(), text.end(), nullptr, /*allow_exceptions=*/false);
  if (json.is_discarded()) return absl::InvalidArgumentError("malformed JSON");
  return json;
}

}  // namespace

std::string FormatDouble(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

absl::Status WriteFileAtomic(const std::string& path, std::string_view contents) {
  const std::string temp = path + ".tmp";
  {
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    if (!out) return absl::PermissionDeniedError(absl::StrCat("cannot write ", temp));
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) return absl::DataLossError(absl::StrCat("short write to ", temp));
  }
  std::error_code ec;
  std::filesystem::rename(temp, path, ec);
  if (ec) {
    std::filesystem::remove(temp, ec);
    return absl::PermissionDeniedError(absl::StrCat("cannot create ", path));
  }
  return absl::OkStatus();
}

absl::StatusOr<std::string> ReadTextFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

absl::Status EnsureDirectory(const std::string& path) {
  std::error_code ec;
  std::filesystem::create_directories(path, ec);
  if (ec || !std::filesystem::is_directory(path)) {
    return absl::PermissionDeniedError(absl::StrCat("cannot create directory ", path));
  }
  return absl::OkStatus();
}

absl::StatusOr<std::vector<std::vector<double>>> ParseNumericCsv(std::string_view text,
                                                                 bool skip_header) {
  std::vector<std::vector<double>> rows;
  const std::vector<std::string_view> lines = SplitLines(text);
  for (size_t i = skip_header ? 1 : 0; i < lines.size(); ++i) {
    std::vector<double> row;
    for (std::string_view field : SplitFields(lines[i])) {
      double v = 0.0;
      if (!ParseDouble(field, v)) {
        return absl::InvalidArgumentError(absl::StrCat(
            "line ", i + 1, ": '", std::string(field), "' is not a number"));
      }
      row.push_back(v);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string DemandProfileToCsv(const DemandProfile& profile) {
  std::string out = "user_id,active";
  for (int f = 0; f < profile.num_files(); ++f) absl::StrAppend(&out, ",", f);
  out += '\n';
  for (int k = 0; k < profile.num_users(); ++k) {
    absl::StrAppend(&out, k, ",", FormatDouble(profile.active[k]), ",");
    out += Row(profile.preference.row(k));
  }
  return out;
}

absl::StatusOr<DemandProfile> DemandProfileFromCsv(std::string_view text) {
  absl::StatusOr<std::vector<std::vector<double>>> rows = ParseNumericCsv(text, true);
  if (!rows.ok()) return rows.status();
  if (rows->empty()) return absl::InvalidArgumentError("profile has no users");
  const size_t width = rows->front().size();
  if (width < 3) return absl::InvalidArgumentError("profile has no files");
  DemandProfile profile;
  const int k_users = static_cast<int>(rows->size());
  profile.active.resize(k_users);
  profile.preference = Matrix(k_users, static_cast<int>(width - 2));
  for (int k = 0; k < k_users; ++k) {
    const auto& row = (*rows)[k];
    if (row.size() != width) {
      return absl::InvalidArgumentError(absl::StrCat("user row ", k, " has ", row.size(),
                                                     " fields, expected ", width));
    }
    if (row[0] != k) {
      return absl::InvalidArgumentError(absl::StrCat("user rows out of order at ", k));
    }
    profile.active[k] = row[1];
    for (size_t f = 2; f < width; ++f) profile.preference(k, static_cast<int>(f - 2)) = row[f];
  }
  if (absl::Status s = ValidateProfile(profile, 1e-9); !s.ok()) return s;
  return profile;
}

std::string DemandMetadataToJson(const DemandMetadata& meta) {
  Json json;
  json["K"] = meta.num_users;
  json["F"] = meta.num_files;
  json["alpha"] = meta.alpha;
  json["beta"] = meta.beta;
  json["seed"] = meta.seed;
  if (meta.average_similarity >= 0.0) json["average_similarity"] = meta.average_similarity;
  json["regenerated_users"] = meta.regenerated_users;
  return json.dump(2) + "\n";
}

std::string PopularityToCsv(const PopularityVector& popularity) {
  std::string out = "file_id,probability\n";
  for (int f = 0; f < popularity.num_files(); ++f) {
    absl::StrAppend(&out, f, ",", FormatDouble(popularity.p[f]), "\n");
  }
  return out;
}

absl::StatusOr<PopularityVector> PopularityFromCsv(std::string_view text) {
  absl::StatusOr<std::vector<std::vector<double>>> rows = ParseNumericCsv(text, true);
  if (!rows.ok()) return rows.status();
  PopularityVector popularity;
  double sum = 0.0;
  for (size_t f = 0; f < rows->size(); ++f) {
    const auto& row = (*rows)[f];
    if (row.size() != 2 || row[0] != static_cast<double>(f)) {
      return absl::InvalidArgumentError(absl::StrCat("bad popularity row ", f));
    }
    if (!(row[1] >= 0.0 && row[1] <= 1.0)) {
      return absl::InvalidArgumentError(absl::StrCat("probability of file ", f,
                                                     " outside [0,1]"));
    }
    popularity.p.push_back(row[1]);
    sum += row[1];
  }
  if (popularity.p.empty()) return absl::InvalidArgumentError("empty popularity vector");
  if (std::fabs(sum - 1.0) > 1e-9) {
    return absl::InvalidArgumentError(absl::StrCat("popularity sums to ", sum));
  }
  return popularity;
}

std::string MatrixToCsv(const Matrix& matrix) {
  std::string out;
  for (int r = 0; r < matrix.rows(); ++r) out += Row(matrix.row(r));
  return out;
}

absl::StatusOr<Matrix> MatrixFromCsv(std::string_view text) {
  absl::StatusOr<std::vector<std::vector<double>>> rows = ParseNumericCsv(text, false);
  if (!rows.ok()) return rows.status();
  if (rows->empty()) return Matrix();
  const size_t width = rows->front().size();
  Matrix matrix(static_cast<int>(rows->size()), static_cast<int>(width));
  for (size_t r = 0; r < rows->size(); ++r) {
    if ((*rows)[r].size() != width) {
      return absl::InvalidArgumentError(absl::StrCat("row ", r, " is ragged"));
    }
    for (size_t c = 0; c < width; ++c) {
      matrix(static_cast<int>(r), static_cast<int>(c)) = (*rows)[r][c];
    }
  }
  return matrix;
}

std::string ContactMatrixToCsv(const ContactMatrix& contacts) {
  return MatrixToCsv(contacts.a);
}

absl::StatusOr<ContactMatrix> ContactMatrixFromCsv(std::string_view text, double r_c_m) {
  absl::StatusOr<Matrix> a = MatrixFromCsv(text);
  if (!a.ok()) return a.status();
  const int k_users = a->rows();
  if (k_users == 0 || a->cols() != k_users) {
    return absl::InvalidArgumentError("contact matrix must be square and non-empty");
  }
  for (int i = 0; i < k_users; ++i) {
    if ((*a)(i, i) != 1.0) {
      return absl::InvalidArgumentError(absl::StrCat("diagonal entry ", i, " is not 1"));
    }
    for (int j = 0; j < k_users; ++j) {
      const double v = (*a)(i, j);
      if (!(v >= 0.0 && v <= 1.0) || v != (*a)(j, i)) {
        return absl::InvalidArgumentError(
            absl::StrCat("contact entry (", i, ",", j, ") is invalid or asymmetric"));
      }
    }
  }
  return ContactMatrix{.a = std::move(*a), .collaboration_distance_m = r_c_m};
}

std::string ContactMetadataToJson(const ContactMetadata& meta) {
  Json json;
  json["r_c"] = meta.r_c_m;
  json["T_p"] = meta.period_s;
  json["v_max"] = meta.v_max_mps;
  json["area_side"] = meta.area_side_m;
  json["time_step"] = meta.time_step_s;
  json["leg_duration"] = meta.leg_duration_s;
  json["seed"] = meta.seed;
  return json.dump(2) + "\n";
}

absl::StatusOr<ContactMetadata> ContactMetadataFromJson(std::string_view text) {
  absl::StatusOr<Json> json = ParseJson(text);
  if (!json.ok()) return json.status();
  ContactMetadata meta;
  if (!json->contains("r_c") || !(*json)["r_c"].is_number()) {
    return absl::InvalidArgumentError("contact metadata lacks r_c");
  }
  meta.r_c_m = (*json)["r_c"].get<double>();
  meta.period_s = json->value("T_p", 0.0);
  meta.v_max_mps = json->value("v_max", 0.0);
  meta.area_side_m = json->value("area_side", 0.0);
  meta.time_step_s = json->value("time_step", 0.0);
  meta.leg_duration_s = json->value("leg_duration", 0.0);
  meta.seed = json->value("seed", uint64_t{0});
  return meta;
}

std::string CachingMatrixToCsv(const CachingMatrix& caching) {
  std::string out = "user_id,file_id\n";
  for (int k = 0; k < caching.num_users(); ++k) {
    for (int f : caching.Row(k)) absl::StrAppend(&out, k, ",", f, "\n");
  }
  return out;
}

absl::StatusOr<CachingMatrix> CachingMatrixFromCsv(std::string_view text, int num_users,
                                                   int num_files, int budget) {
  absl::StatusOr<std::vector<std::vector<double>>> rows = ParseNumericCsv(text, true);
  if (!rows.ok()) return rows.status();
  CachingMatrix caching(num_users, num_files, budget);
  for (const auto& row : *rows) {
    if (row.size() != 2 || !IsWholeNumber(row[0]) || !IsWholeNumber(row[1]) ||
        row[0] < 0 || row[0] >= num_users || row[1] < 0 || row[1] >= num_files) {
      return absl::InvalidArgumentError("placement row outside the user/file range");
    }
    caching.Set(static_cast<int>(row[0]), static_cast<int>(row[1]), true);
  }
  if (absl::Status s = caching.Validate(); !s.ok()) return s;
  return caching;
}

std::string OptimizerReportToJson(const OptimizerReport& report, bool include_timing) {
  Json json;
  json["scheme"] = report.scheme;
  json["iterations"] = report.iterations;
  json["converged"] = report.converged;
  json["objective_trace"] = report.objective_trace;
  if (include_timing) json["seconds"] = report.seconds;
  return json.dump(2) + "\n";
}

std::string RequestsToCsv(const RequestMatrix& requests) {
  std::string out = "user_id,file_id,count\n";
  for (int k = 0; k < requests.num_users(); ++k) {
    for (const auto& e : requests.row(k)) {
      absl::StrAppend(&out, k, ",", e.file, ",", e.count, "\n");
    }
  }
  return out;
}

absl::StatusOr<RequestMatrix> RequestsFromCsv(std::string_view text, int num_users,
                                              int num_files) {
  absl::StatusOr<std::vector<std::vector<double>>> rows = ParseNumericCsv(text, true);
  if (!rows.ok()) return rows.status();
  RequestMatrix requests(num_users, num_files);
  for (const auto& row : *rows) {
    if (row.size() != 3 || !IsWholeNumber(row[0]) || !IsWholeNumber(row[1]) ||
        !IsWholeNumber(row[2]) || row[0] < 0 || row[0] >= num_users || row[1] < 0 ||
        row[1] >= num_files || row[2] < 0) {
      return absl::InvalidArgumentError("request row outside the user/file range");
    }
    requests.Add(static_cast<int>(row[0]), static_cast<int>(row[1]),
                 static_cast<int64_t>(row[2]));
  }
  return requests;
}

std::string LikelihoodTraceToCsv(const std::vector<double>& trace) {
  std::string out = "iteration,log_likelihood\n";
  for (size_t i = 0; i < trace.size(); ++i) {
    absl::StrAppend(&out, i, ",", FormatDouble(trace[i]), "\n");
  }
  return out;
}

absl::Status WritePlsaModel(const std::string& directory, const PlsaModel& model,
                            const ModelMetadata& meta) {
  if (absl::Status s = EnsureDirectory(directory); !s.ok()) return s;
  Json json;
  json["K"] = model.num_users();
  json["F"] = model.num_files();
  json["Z"] = model.num_topics;
  json["seed"] = meta.seed;
  json["iterations"] = meta.iterations;
  json["converged"] = meta.converged;
  json["final_log_likelihood"] = meta.final_log_likelihood;
  if (!meta.scheme.empty()) json["scheme"] = meta.scheme;
  const std::filesystem::path dir(directory);
  Matrix active(1, model.num_users());
  for (int k = 0; k < model.num_users(); ++k) active(0, k) = model.active[k];
  if (absl::Status s = WriteFileAtomic((dir / "model.json").string(), json.dump(2) + "\n");
      !s.ok()) {
    return s;
  }
  if (absl::Status s = WriteFileAtomic((dir / "active.csv").string(), MatrixToCsv(active));
      !s.ok()) {
    return s;
  }
  if (absl::Status s = WriteFileAtomic((dir / "topic_pref.csv").string(),
                                       MatrixToCsv(model.topic_pref));
      !s.ok()) {
    return s;
  }
  return WriteFileAtomic((dir / "file_given_topic.csv").string(),
                         MatrixToCsv(model.file_given_topic));
}

absl::StatusOr<PlsaModel> ReadPlsaModel(const std::string& directory) {
  const std::filesystem::path dir(directory);
  absl::StatusOr<std::string> text = ReadTextFile((dir / "model.json").string());
  if (!text.ok()) return text.status();
  absl::StatusOr<Json> json = ParseJson(*text);
  if (!json.ok()) return json.status();
  PlsaModel model;
  model.num_topics = json->value("Z", 0);
  auto load = [&](const char* name) -> absl::StatusOr<Matrix> {
    absl::StatusOr<std::string> csv = ReadTextFile((dir / name).string());
    if (!csv.ok()) return csv.status();
    return MatrixFromCsv(*csv);
  };
  absl::StatusOr<Matrix> active = load("active.csv");
  if (!active.ok()) return active.status();
  absl::StatusOr<Matrix> topic_pref = load("topic_pref.csv");
  if (!topic_pref.ok()) return topic_pref.status();
  absl::StatusOr<Matrix> file_given_topic = load("file_given_topic.csv");
  if (!file_given_topic.ok()) return file_given_topic.status();
  if (active->rows() != 1) return absl::InvalidArgumentError("active.csv must be one row");
  model.active.assign(active->data().begin(), active->data().end());
  model.topic_pref = std::move(*topic_pref);
  model.file_given_topic = std::move(*file_given_topic);
  if (model.num_users() != json->value("K", -1) || model.num_files() != json->value("F", -1)) {
    return absl::InvalidArgumentError("model files disagree with model.json dimensions");
  }
  if (absl::Status s = ValidateModel(model, 1e-9); !s.ok()) return s;
  return model;
}

}  // namespace prefcache
