#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "equilib/exhaustion.hpp"

namespace equilib {

using json = nlohmann::json;

namespace io {

inline json vec_to_json(const VectorXd& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i)
    a.push_back(std::isinf(v[i]) ? json("inf") : json(v[i]));
  return a;
}

inline std::string fmt17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace io

inline void to_json(json& j, const DiscreteMeasure& m) {
  j = json{{"weights", io::vec_to_json(m.weights)},
           {"total_mass", m.total_mass()}};
}

inline void to_json(json& j, const CapacityReport& r) {
  j = json{{"w_value", r.w_value},
           {"capacity", r.capacity},
           {"equilibrium", r.equilibrium},
           {"capacitary", r.capacitary},
           {"frostman_residual", r.frostman_residual},
           {"frostman_screen", r.frostman_screen},
           {"kkt_residual", r.kkt_residual},
           {"iterations", r.iterations}};
}

inline void to_json(json& j, const BalayageReport& r) {
  j = json{{"swept", r.swept},
           {"equality_residual_on_A", r.equality_residual_on_A},
           {"domination_residual", r.domination_residual},
           {"mass_in", r.mass_in},
           {"mass_out", r.mass_out},
           {"domination_screen", r.domination_screen},
           {"kkt_residual", r.kkt_residual},
           {"iterations", r.iterations}};
  if (r.rest_residual) j["rest_residual"] = *r.rest_residual;
}

inline void to_json(json& j, const GaussReport& r) {
  j = json{{"minimizer", r.minimizer},
           {"w_f", r.w_f},
           {"c_f", r.c_f},
           {"kkt_residual", r.kkt_residual},
           {"swept_mass", r.swept_mass},
           {"screens",
            {{"frostman", r.frostman_screen}, {"domination", r.domination_screen}}},
           {"iterations", r.iterations}};
  if (r.eta) j["eta"] = *r.eta;
  if (r.representation_gap) j["representation_gap"] = *r.representation_gap;
}

inline void to_json(json& j, const StageStats& s) {
  j = json{{"stage_size", s.stage_size}, {"w_f", s.w_f},
           {"c_f", s.c_f},              {"cap", s.cap},
           {"sweep_mass", s.sweep_mass}, {"eta", s.eta},
           {"dist_to_final", s.dist_to_final}};
}

inline void to_json(json& j, const ExhaustionReport& r) {
  j = json{{"stages", r.stages},
           {"final", r.final},
           {"w_monotone", r.w_monotone},
           {"cap_monotone", r.cap_monotone},
           {"c_monotone", r.c_monotone},
           {"c_monotone_asserted", r.c_monotone_asserted},
           {"screens_all", r.screens_all}};
}

inline void to_json(json& j, const ThinnessReport& r) {
  j = json{{"k", r.ks},
           {"cap", r.caps},
           {"term", r.terms},
           {"partial_sum", r.partial_sums},
           {"classification", r.classification}};
}

inline void to_json(json& j, const MassDeficiencyStage& s) {
  j = json{{"truncation", s.truncation},
           {"cap", s.cap},
           {"eta", s.eta},
           {"sweep_mass", s.sweep_mass},
           {"c_f", s.c_f},
           {"dist_lambda_sweep", s.dist_lambda_sweep},
           {"screens", s.screens}};
}

inline void to_json(json& j, const MassDeficiencyReport& r) {
  j = json{{"stages", r.stages}, {"fitted_mass_limit", r.fitted_mass_limit}};
}

namespace io {

/// Column contract shared by the exhaustion experiments and the plotting
/// scripts downstream.
inline constexpr const char* kSeriesHeader =
    "stage,size,w_f,c_f,cap,sweep_mass,eta,dist_to_final";

inline void write_series_csv(std::ostream& os, const ExhaustionReport& rep) {
  os << kSeriesHeader << "\n";
  for (std::size_t j = 0; j < rep.stages.size(); ++j) {
    const StageStats& s = rep.stages[j];
    os << j << ',' << s.stage_size << ',' << fmt17(s.w_f) << ','
       << fmt17(s.c_f) << ',' << fmt17(s.cap) << ',' << fmt17(s.sweep_mass)
       << ',' << fmt17(s.eta) << ',' << fmt17(s.dist_to_final) << "\n";
  }
}

inline constexpr const char* kThinnessHeader = "k,cap,term,partial_sum";

inline void write_thinness_csv(std::ostream& os, const ThinnessReport& rep) {
  os << kThinnessHeader << "\n";
  for (std::size_t j = 0; j < rep.ks.size(); ++j)
    os << rep.ks[j] << ',' << fmt17(rep.caps[j]) << ',' << fmt17(rep.terms[j])
       << ',' << fmt17(rep.partial_sums[j]) << "\n";
}

/// Explicit matrix files: CSV is a first line holding N followed by N
/// comma-separated rows; JSON is {"n": N, "entries": [[...], ...]}.
inline MatrixXd load_matrix_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw Error("matrix csv: empty file");
  int n = 0;
  try {
    n = std::stoi(line);
  } catch (...) {
    throw Error("matrix csv: header must hold the matrix size N");
  }
  if (n <= 0) throw Error("matrix csv: N must be positive");
  MatrixXd m(n, n);
  for (int i = 0; i < n; ++i) {
    if (!std::getline(is, line))
      throw Error("matrix csv: expected " + std::to_string(n) + " rows");
    std::stringstream ss(line);
    std::string cell;
    for (int jcol = 0; jcol < n; ++jcol) {
      if (!std::getline(ss, cell, ','))
        throw Error("matrix csv: row " + std::to_string(i) + " too short");
      m(i, jcol) = std::stod(cell);
    }
  }
  return m;
}

inline MatrixXd load_matrix_json(const json& j) {
  if (!j.contains("n") || !j.contains("entries"))
    throw Error("matrix json: need fields 'n' and 'entries'");
  const int n = j["n"].get<int>();
  const auto& rows = j["entries"];
  if (static_cast<int>(rows.size()) != n)
    throw Error("matrix json: row count mismatch");
  MatrixXd m(n, n);
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(rows[i].size()) != n)
      throw Error("matrix json: row " + std::to_string(i) + " length mismatch");
    for (int jcol = 0; jcol < n; ++jcol) m(i, jcol) = rows[i][jcol].get<double>();
  }
  return m;
}

inline MatrixXd load_matrix_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot open matrix file: " + path);
  if (path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0) {
    json j;
    f >> j;
    return load_matrix_json(j);
  }
  return load_matrix_csv(f);
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write file: " + path);
  f << content;
}

}  // namespace io
}  // namespace equilib
