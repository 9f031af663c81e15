/*
 * Copyright 2026 The CID Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// JSON and CSV encodings of the library's result types.

#pragma once

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "cid/cid.hpp"
#include "cid/dataset.hpp"
#include "cid/evaluation.hpp"

namespace cid {

inline nlohmann::json matrix_to_json(const RowMatrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto r = m.row(i);
    rows.push_back(std::vector<double>(r.begin(), r.end()));
  }
  return rows;
}

inline nlohmann::json to_json(const CfConfig& cf) {
  nlohmann::json j = {
      {"m", cf.m},
      {"method", std::string(to_string(cf.method))},
      {"max_attempts", cf.resolved_max_attempts()},
      {"sparsity", cf.sparsity},
      {"seed", cf.seed},
  };
  j["features_to_vary"] = cf.features_to_vary ? nlohmann::json(*cf.features_to_vary) : nlohmann::json(nullptr);
  if (cf.method == CfMethod::genetic) {
    j["genetic"] = {{"population", cf.resolved_population()},
                    {"generations", cf.genetic.generations},
                    {"lambda", cf.genetic.lambda}};
  }
  return j;
}

inline nlohmann::json to_json(const CidConfig& cfg) {
  return {
      {"kernel", std::string(to_string(cfg.kernel))},
      {"cf", to_json(cfg.cf)},
      {"n_grid", cfg.n_grid},
      {"grid_pad", cfg.grid_pad},
      {"k", cfg.k},
      {"repeats", cfg.repeats},
  };
}

// {"features": [...], "scores": [...], "per_repeat": [[...]], "config": {...}}
inline nlohmann::json to_json(const ImportanceVector& iv) {
  nlohmann::json cfg = to_json(iv.config);
  cfg["repeat_seeds"] = iv.seeds;
  cfg["cf"]["sparsity"] = iv.config.cf.resolved_sparsity(iv.scores.size());
  return {
      {"features", iv.feature_names},
      {"scores", iv.scores},
      {"per_repeat", matrix_to_json(iv.per_repeat)},
      {"config", std::move(cfg)},
  };
}

// feature,score
inline void write_importance_csv(const ImportanceVector& iv, std::ostream& out) {
  out << "feature,score\n";
  for (std::size_t j = 0; j < iv.scores.size(); ++j) {
    out << iv.feature_names[j] << ',' << detail::format_double(iv.scores[j]) << '\n';
  }
}

inline nlohmann::json to_json(const CounterfactualSets& sets) {
  return {
      {"instance", sets.instance},
      {"original_label", sets.original_label},
      {"method", std::string(to_string(sets.method_used))},
      {"attempts_used", sets.attempts_used},
      {"positives", matrix_to_json(sets.positives)},
      {"negatives", matrix_to_json(sets.negatives)},
  };
}

inline nlohmann::json to_json(const DensityEstimate& est) {
  return {
      {"grid", est.grid},
      {"values", est.values},
      {"bandwidth", est.bandwidth},
      {"kernel", std::string(to_string(est.kernel))},
  };
}

// Counterfactual sets of every repeat.
inline nlohmann::json cfs_dump(const std::vector<RepeatTrace>& trace) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& t : trace) {
    nlohmann::json j = to_json(t.sets);
    j["seed"] = t.seed;
    out.push_back(std::move(j));
  }
  return out;
}

// Per repeat, per feature: both densities on their shared grid plus the
// overlap terms.
inline nlohmann::json densities_dump(const std::vector<RepeatTrace>& trace,
                                     const std::vector<std::string>& names) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& t : trace) {
    nlohmann::json feats = nlohmann::json::array();
    for (std::size_t j = 0; j < t.features.size(); ++j) {
      const auto& fd = t.features[j];
      feats.push_back({
          {"feature", names.at(j)},
          {"positive", to_json(fd.positive)},
          {"negative", to_json(fd.negative)},
          {"overlap", fd.result.overlap},
          {"d", fd.result.d_value},
      });
    }
    out.push_back({{"seed", t.seed}, {"features", std::move(feats)}});
  }
  return out;
}

inline nlohmann::json to_json(const Aggregate& a) {
  return {{"mean", a.mean}, {"ci", a.ci}, {"n", a.n}};
}

// Fixed-point "mean ± ci" cell.
inline std::string format_cell(double mean, double ci, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f \xC2\xB1 %.*f", digits, mean, digits, ci);
  return buf;
}

inline nlohmann::json to_json(const EvaluationReport& r, bool comp = true, bool suff = true) {
  nlohmann::json per = nlohmann::json::array();
  for (const auto& p : r.per_instance) {
    nlohmann::json row = {{"instance_id", p.instance_id}};
    if (comp) row["comprehensiveness"] = p.comprehensiveness;
    if (suff) row["sufficiency"] = p.sufficiency;
    per.push_back(std::move(row));
  }
  nlohmann::json j = {{"n", r.n}, {"per_instance", std::move(per)}};
  if (comp) j["comprehensiveness"] = {{"mean", r.mean_comp}, {"ci", r.ci_comp}};
  if (suff) j["sufficiency"] = {{"mean", r.mean_suff}, {"ci", r.ci_suff}};
  return j;
}

// Plain-text table: one row per method, one column per metric.
inline std::string report_table(const std::vector<std::pair<std::string, EvaluationReport>>& rows,
                                bool comp = true, bool suff = true) {
  std::ostringstream out;
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%-24s", "Method");
  out << buf;
  if (comp) out << "  Comprehensiveness (up)";
  if (suff) out << "  Sufficiency (down)";
  out << '\n';
  for (const auto& [name, r] : rows) {
    std::snprintf(buf, sizeof(buf), "%-24s", name.c_str());
    out << buf;
    if (comp) {
      std::snprintf(buf, sizeof(buf), "  %-22s", format_cell(r.mean_comp, r.ci_comp, 4).c_str());
      out << buf;
    }
    if (suff) {
      std::snprintf(buf, sizeof(buf), "  %s", format_cell(r.mean_suff, r.ci_suff, 4).c_str());
      out << buf;
    }
    out << "  (n = " << r.n << ")\n";
  }
  return out.str();
}

// Explanation files: header `instance_id,<feature names...>`, one row of
// scores per instance.
struct ExplanationFile {
  std::vector<std::string> feature_names;
  std::vector<Explanation> explanations;
};

inline void write_explanations(const ExplanationFile& file, std::ostream& out) {
  out << "instance_id";
  for (const auto& n : file.feature_names) out << ',' << n;
  out << '\n';
  for (const auto& e : file.explanations) {
    out << e.instance_id;
    for (double s : e.scores) out << ',' << detail::format_double(s);
    out << '\n';
  }
}

inline void write_explanations(const ExplanationFile& file, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  write_explanations(file, out);
}

inline ExplanationFile read_explanations(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) throw DataError(source + ": missing header row");
  const auto header = detail::split_csv_line(line);
  if (header.empty() || detail::unquote(header[0]) != "instance_id") {
    throw DataError(source + ": first column must be 'instance_id'");
  }
  ExplanationFile file;
  for (std::size_t c = 1; c < header.size(); ++c) {
    file.feature_names.emplace_back(detail::unquote(header[c]));
  }
  if (file.feature_names.empty()) throw DataError(source + ": no feature columns");
  std::size_t row_no = 0;
  while (std::getline(in, line)) {
    if (detail::trim(line).empty()) continue;
    ++row_no;
    const auto cells = detail::split_csv_line(line);
    if (cells.size() != header.size()) {
      throw DataError(source + ": row " + std::to_string(row_no) + " has " +
                      std::to_string(cells.size()) + " cells, expected " +
                      std::to_string(header.size()));
    }
    Explanation e;
    double id = 0.0;
    if (!detail::parse_double(cells[0], id) || id < 0 || id != std::floor(id)) {
      throw DataError(source + ": row " + std::to_string(row_no) + ": bad instance_id '" +
                      std::string(cells[0]) + "'");
    }
    e.instance_id = static_cast<long>(id);
    for (std::size_t c = 1; c < cells.size(); ++c) {
      double v = 0.0;
      if (!detail::parse_double(cells[c], v)) {
        throw DataError(source + ": row " + std::to_string(row_no) + ", column '" +
                        file.feature_names[c - 1] + "': cannot parse '" +
                        std::string(cells[c]) + "'");
      }
      e.scores.push_back(v);
    }
    file.explanations.push_back(std::move(e));
  }
  return file;
}

inline ExplanationFile read_explanations(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open explanation file '" + path + "'");
  return read_explanations(in, path);
}

}  // namespace cid
