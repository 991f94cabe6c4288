#pragma once

#include <cstdint>
#include <cstdio>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "qcomm/engine.hpp"
#include "qcomm/errors.hpp"
#include "qcomm/graph.hpp"

namespace qcomm {

inline constexpr int kRunRecordVersion = 1;

struct RunRecord {
  std::string graph;
  bool weighted = false;
  std::size_t K = 0;
  std::string mode = "inequality";
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  std::uint64_t seed = 0;
  double time_limit_sec = 0.0;
  std::optional<std::size_t> sweeps_requested;
  std::size_t restarts = 1;
  double solve_time_sec = 0.0;
  double q = 0.0;
  bool feasible = false;
  std::size_t repaired_rows = 0;
  std::size_t empty_groups = 0;
  double best_energy = 0.0;
  std::size_t sweeps = 0;
  double t_initial = 0.0;
  double t_final = 0.0;
  double offset_increment = 0.0;
  std::vector<std::size_t> assignment;
  std::vector<std::string> node_labels;
};

inline RunRecord make_run_record(const std::string& graph_id, bool weighted, const Graph& g,
                                 std::size_t K, const PartitionConfig& config,
                                 const PartitionResult& r) {
  RunRecord rec;
  rec.graph = graph_id;
  rec.weighted = weighted;
  rec.K = K;
  rec.mode = to_string(r.mode);
  rec.lambda1 = r.lambda_used.lambda1;
  rec.lambda2 = r.lambda_used.lambda2;
  rec.seed = r.seed;
  rec.time_limit_sec = r.time_limit_sec;
  rec.sweeps_requested = config.solver.sweeps;
  rec.restarts = config.restarts;
  rec.solve_time_sec = r.solve_time;
  rec.q = r.modularity;
  rec.feasible = r.feasible;
  rec.repaired_rows = r.repaired_rows;
  rec.empty_groups = r.empty_groups;
  rec.best_energy = r.best_energy;
  rec.sweeps = r.sweeps;
  rec.t_initial = r.schedule.t_initial;
  rec.t_final = r.schedule.t_final;
  rec.offset_increment = r.schedule.offset_increment;
  rec.assignment = r.assignment.labels;
  rec.node_labels = g.labels();
  return rec;
}

inline nlohmann::json to_json(const RunRecord& r) {
  nlohmann::json j = {
      {"version", kRunRecordVersion},
      {"graph", r.graph},
      {"weighted", r.weighted},
      {"k", r.K},
      {"mode", r.mode},
      {"lambda1", r.lambda1},
      {"lambda2", r.lambda2},
      {"seed", r.seed},
      {"time_limit_sec", r.time_limit_sec},
      {"sweeps_requested", r.sweeps_requested ? nlohmann::json(*r.sweeps_requested) : nullptr},
      {"restarts", r.restarts},
      {"solve_time_sec", r.solve_time_sec},
      {"q", r.q},
      {"feasible", r.feasible},
      {"repaired_rows", r.repaired_rows},
      {"empty_groups", r.empty_groups},
      {"best_energy", r.best_energy},
      {"sweeps", r.sweeps},
      {"schedule",
       {{"t_initial", r.t_initial}, {"t_final", r.t_final}, {"offset_increment", r.offset_increment}}},
      {"assignment", r.assignment},
      {"node_labels", r.node_labels},
  };
  return j;
}

inline RunRecord run_record_from_json(const nlohmann::json& j) {
  try {
    if (j.at("version").get<int>() != kRunRecordVersion)
      throw DomainError("unsupported run record version");
    RunRecord r;
    j.at("graph").get_to(r.graph);
    j.at("weighted").get_to(r.weighted);
    j.at("k").get_to(r.K);
    j.at("mode").get_to(r.mode);
    j.at("lambda1").get_to(r.lambda1);
    j.at("lambda2").get_to(r.lambda2);
    j.at("seed").get_to(r.seed);
    j.at("time_limit_sec").get_to(r.time_limit_sec);
    if (j.contains("sweeps_requested") && !j["sweeps_requested"].is_null())
      r.sweeps_requested = j["sweeps_requested"].get<std::size_t>();
    j.at("restarts").get_to(r.restarts);
    j.at("solve_time_sec").get_to(r.solve_time_sec);
    j.at("q").get_to(r.q);
    j.at("feasible").get_to(r.feasible);
    j.at("repaired_rows").get_to(r.repaired_rows);
    j.at("empty_groups").get_to(r.empty_groups);
    j.at("best_energy").get_to(r.best_energy);
    j.at("sweeps").get_to(r.sweeps);
    const auto& s = j.at("schedule");
    s.at("t_initial").get_to(r.t_initial);
    s.at("t_final").get_to(r.t_final);
    s.at("offset_increment").get_to(r.offset_increment);
    j.at("assignment").get_to(r.assignment);
    j.at("node_labels").get_to(r.node_labels);
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("malformed run record: ") + e.what());
  }
}

/// Checks the record against the graph it names and returns the recomputed Q.
inline double revalidate(const RunRecord& r, const Graph& g, const ModularityParams& p = {}) {
  if (r.assignment.size() != g.node_count())
    throw DimensionError("assignment has " + std::to_string(r.assignment.size()) +
                         " entries, graph has " + std::to_string(g.node_count()) + " nodes");
  CommunityAssignment a{r.assignment, r.K};
  a.validate(g.node_count());
  return modularity(g, a, p);
}

inline constexpr const char* kRunRecordCsvHeader =
    "graph,weighted,k,mode,lambda1,lambda2,seed,time_limit_sec,solve_time_sec,q,feasible,"
    "repaired_rows,empty_groups,assignment";

namespace detail {
inline std::string fmt_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
}  // namespace detail

/// One header line and one data line; the assignment column is
/// space-separated group indices in node order.
inline void write_csv(std::ostream& out, const RunRecord& r) {
  out << kRunRecordCsvHeader << '\n';
  out << r.graph << ',' << (r.weighted ? "true" : "false") << ',' << r.K << ',' << r.mode << ','
      << detail::fmt_real(r.lambda1) << ',' << detail::fmt_real(r.lambda2) << ',' << r.seed << ','
      << detail::fmt_real(r.time_limit_sec) << ',' << detail::fmt_real(r.solve_time_sec) << ','
      << detail::fmt_real(r.q) << ',' << (r.feasible ? "true" : "false") << ',' << r.repaired_rows
      << ',' << r.empty_groups << ',';
  for (std::size_t i = 0; i < r.assignment.size(); ++i) out << (i ? " " : "") << r.assignment[i];
  out << '\n';
}

inline RunRecord read_csv(std::istream& in) {
  std::string header, line;
  if (!std::getline(in, header) || header != kRunRecordCsvHeader)
    throw ParseError(1, "missing run record header");
  if (!std::getline(in, line)) throw ParseError(2, "missing run record row");
  std::vector<std::string> f;
  std::stringstream ss(line);
  for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
  if (f.size() != 14) throw ParseError(2, "expected 14 columns");
  auto real = [](const std::string& s) {
    double v = 0;
    if (!detail::parse_real(s, v)) throw ParseError(2, "bad number '" + s + "'");
    return v;
  };
  RunRecord r;
  r.graph = f[0];
  r.weighted = f[1] == "true";
  r.K = static_cast<std::size_t>(real(f[2]));
  r.mode = f[3];
  r.lambda1 = real(f[4]);
  r.lambda2 = real(f[5]);
  r.seed = std::stoull(f[6]);
  r.time_limit_sec = real(f[7]);
  r.solve_time_sec = real(f[8]);
  r.q = real(f[9]);
  r.feasible = f[10] == "true";
  r.repaired_rows = static_cast<std::size_t>(real(f[11]));
  r.empty_groups = static_cast<std::size_t>(real(f[12]));
  std::stringstream as(f[13]);
  for (std::size_t v; as >> v;) r.assignment.push_back(v);
  return r;
}

}  // namespace qcomm
