#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "sepath/common.hpp"

namespace sepath {

// One unit's observed data: (A, T~, R~, delta_T, delta_R, X).
// Convention for subjects with no observed intermediate event: r_obs = t_obs
// and delta_r = 0.
struct SubjectRecord {
  std::string id;
  int arm = 0;          // A in {0,1}
  double t_obs = 0.0;   // observed terminal time
  double r_obs = 0.0;   // observed intermediate time
  int delta_t = 0;      // terminal event indicator
  int delta_r = 0;      // intermediate event indicator
  std::vector<double> covariates;
};

struct Dataset {
  std::vector<SubjectRecord> subjects;
  std::vector<std::string> covariate_names;
  double tau = 0.0;       // administrative horizon
  double tie_shift = 1e-9;

  std::size_t size() const { return subjects.size(); }
  std::size_t n_covariates() const { return covariate_names.size(); }
};

struct CsvSchema {
  std::string id = "id";
  std::string arm = "arm";
  std::string t_obs = "t_obs";
  std::string r_obs = "r_obs";
  std::string delta_t = "delta_t";
  std::string delta_r = "delta_r";
  // Any remaining columns are treated as covariates, in header order.
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

inline double parse_double(const std::string& s, std::size_t row, const std::string& col) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ValidationError("row " + std::to_string(row) + ": non-numeric value '" + s +
                          "' in column " + col);
  }
}

inline int parse_indicator(const std::string& s, std::size_t row, const std::string& col) {
  double v = parse_double(s, row, col);
  if (v != 0.0 && v != 1.0)
    throw ValidationError("row " + std::to_string(row) + ": column " + col +
                          " must be 0 or 1, got " + s);
  return static_cast<int>(v);
}

}  // namespace detail

// Checks per-subject invariants and applies the tie-shift for R = T ties
// (intermediate event moved just before the terminal event).
inline void finalize_dataset(Dataset& ds, double tau_override = -1.0) {
  if (ds.subjects.empty()) throw ValidationError("dataset is empty");
  double tmax = 0.0;
  for (std::size_t i = 0; i < ds.subjects.size(); ++i) {
    auto& s = ds.subjects[i];
    const std::string at = "row " + std::to_string(i + 1) + ": ";
    if (!(std::isfinite(s.t_obs) && std::isfinite(s.r_obs)))
      throw ValidationError(at + "non-finite time");
    if (s.t_obs < 0.0 || s.r_obs < 0.0) throw ValidationError(at + "negative time");
    if (s.arm != 0 && s.arm != 1) throw ValidationError(at + "arm must be 0 or 1");
    if (s.delta_r == 1 && s.r_obs > s.t_obs)
      throw ValidationError(at + "r_obs > t_obs with delta_r = 1");
    if (s.delta_r == 0 && s.r_obs != s.t_obs)
      throw ValidationError(at + "delta_r = 0 requires r_obs = t_obs");
    if (s.covariates.size() != ds.covariate_names.size())
      throw ValidationError(at + "covariate count mismatch");
    if (s.delta_r == 1 && s.r_obs == s.t_obs) s.r_obs = s.t_obs - ds.tie_shift;
    tmax = std::max(tmax, s.t_obs);
  }
  ds.tau = (tau_override >= 0.0) ? tau_override : std::max(ds.tau, tmax);
  if (ds.tau < tmax) throw ValidationError("tau smaller than max observed time");
}

inline Dataset load_dataset(const std::string& path, const CsvSchema& schema = {}) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("empty file: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  auto header = detail::split_csv_line(line);

  auto find_col = [&](const std::string& name) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end())
      throw ValidationError("missing required column: " + name);
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t c_id = find_col(schema.id);
  const std::size_t c_arm = find_col(schema.arm);
  const std::size_t c_t = find_col(schema.t_obs);
  const std::size_t c_r = find_col(schema.r_obs);
  const std::size_t c_dt = find_col(schema.delta_t);
  const std::size_t c_dr = find_col(schema.delta_r);

  Dataset ds;
  std::vector<std::size_t> cov_cols;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c == c_id || c == c_arm || c == c_t || c == c_r || c == c_dt || c == c_dr) continue;
    cov_cols.push_back(c);
    ds.covariate_names.push_back(header[c]);
  }

  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++row;
    auto cells = detail::split_csv_line(line);
    if (cells.size() != header.size())
      throw ValidationError("row " + std::to_string(row) + ": expected " +
                            std::to_string(header.size()) + " cells, got " +
                            std::to_string(cells.size()));
    SubjectRecord s;
    s.id = cells[c_id];
    s.arm = detail::parse_indicator(cells[c_arm], row, schema.arm);
    s.t_obs = detail::parse_double(cells[c_t], row, schema.t_obs);
    s.r_obs = detail::parse_double(cells[c_r], row, schema.r_obs);
    s.delta_t = detail::parse_indicator(cells[c_dt], row, schema.delta_t);
    s.delta_r = detail::parse_indicator(cells[c_dr], row, schema.delta_r);
    for (std::size_t c : cov_cols)
      s.covariates.push_back(detail::parse_double(cells[c], row, header[c]));
    ds.subjects.push_back(std::move(s));
  }
  finalize_dataset(ds);
  return ds;
}

inline void save_dataset(const Dataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write file: " + path);
  out << "id,arm,t_obs,r_obs,delta_t,delta_r";
  for (const auto& name : ds.covariate_names) out << "," << name;
  out << "\n";
  out << std::setprecision(17);
  for (const auto& s : ds.subjects) {
    // Undo the tie-shift on output so a load round-trips identically.
    double r = (s.delta_r == 1 && s.r_obs == s.t_obs - ds.tie_shift) ? s.t_obs : s.r_obs;
    out << s.id << "," << s.arm << "," << s.t_obs << "," << r << "," << s.delta_t
        << "," << s.delta_r;
    for (double x : s.covariates) out << "," << x;
    out << "\n";
  }
}

// Per-arm counts of the four (delta_r, delta_t) path types plus covariate
// summaries.  Report-only.
struct ValidationReport {
  // path_counts[arm][delta_r][delta_t]
  std::array<std::array<std::array<std::size_t, 2>, 2>, 2> path_counts{};
  std::size_t n = 0;
  std::vector<std::string> covariate_names;
  std::vector<double> cov_min, cov_max, cov_mean;
  double ps_min = std::nan("");  // filled once a propensity model is available
  double ps_max = std::nan("");

  std::size_t count(int arm, int delta_r, int delta_t) const {
    return path_counts[static_cast<std::size_t>(arm)][static_cast<std::size_t>(delta_r)]
                      [static_cast<std::size_t>(delta_t)];
  }
};

inline ValidationReport validate(const Dataset& ds) {
  ValidationReport rep;
  rep.n = ds.size();
  rep.covariate_names = ds.covariate_names;
  const std::size_t k = ds.n_covariates();
  rep.cov_min.assign(k, std::numeric_limits<double>::infinity());
  rep.cov_max.assign(k, -std::numeric_limits<double>::infinity());
  rep.cov_mean.assign(k, 0.0);
  for (const auto& s : ds.subjects) {
    rep.path_counts[static_cast<std::size_t>(s.arm)][static_cast<std::size_t>(s.delta_r)]
                   [static_cast<std::size_t>(s.delta_t)]++;
    for (std::size_t j = 0; j < k; ++j) {
      rep.cov_min[j] = std::min(rep.cov_min[j], s.covariates[j]);
      rep.cov_max[j] = std::max(rep.cov_max[j], s.covariates[j]);
      rep.cov_mean[j] += s.covariates[j] / static_cast<double>(ds.size());
    }
  }
  return rep;
}

}  // namespace sepath
