#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <openssl/evp.h>

#include "CLI11.hpp"
#include "qcomm.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitInfeasible = 2;

struct CommonArgs {
  std::string graph;
  double time_limit_sec = 10.0;
  std::uint64_t seed = 42;
  bool weighted = false;
  bool unweighted = false;
  std::string mode = "inequality";
  std::string lambda1 = "auto";
  std::string lambda2 = "auto";
  std::size_t sweeps = 0;
  std::size_t workers = 1;
  std::size_t restarts = 5;
  std::optional<double> t_initial;
  std::optional<double> t_final;
  bool no_repair = false;
};

void add_common(CLI::App& cmd, CommonArgs& a) {
  cmd.add_option("--graph", a.graph, "dataset name or edge-list path")->required();
  cmd.add_option("--time-limit-sec", a.time_limit_sec, "wall-clock budget per run")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd.add_option("--seed", a.seed, "base seed")->capture_default_str();
  auto* w = cmd.add_flag("--weighted", a.weighted, "use the weight column");
  auto* u = cmd.add_flag("--unweighted", a.unweighted, "ignore weights (default)");
  w->excludes(u);
  cmd.add_option("--mode", a.mode, "non-empty group constraint")
      ->check(CLI::IsMember({"inequality", "slack"}))
      ->capture_default_str();
  cmd.add_option("--lambda1", a.lambda1, "one-hot penalty: number, auto or bound")
      ->capture_default_str();
  cmd.add_option("--lambda2", a.lambda2, "non-empty penalty: number, auto or bound")
      ->capture_default_str();
  cmd.add_option("--sweeps", a.sweeps,
                 "run exactly this many sweeps per cycle (reproducible; ignores the time limit)");
  cmd.add_option("--workers", a.workers, "scan threads per step")->capture_default_str();
  cmd.add_option("--restarts", a.restarts, "independent anneal cycles sharing the budget")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd.add_option("--t-initial", a.t_initial, "starting temperature (default 0.3 lambda1)")
      ->check(CLI::PositiveNumber);
  cmd.add_option("--t-final", a.t_final, "final temperature (default 0.003 lambda1)")
      ->check(CLI::PositiveNumber);
  cmd.add_flag("--no-repair", a.no_repair, "report rows and groups as decoded");
}

std::optional<double> parse_lambda(const std::string& s, const qcomm::Graph& g,
                                   bool first) {
  if (s == "auto") return std::nullopt;
  if (s == "bound") {
    const auto w = qcomm::bound_penalty_weights(g);
    return first ? w.lambda1 : w.lambda2;
  }
  double v = 0;
  if (!qcomm::detail::parse_real(s, v) || v < 0)
    throw CLI::ValidationError("--lambda", "expected a non-negative number, auto or bound");
  return v;
}

qcomm::PartitionConfig make_config(const CommonArgs& a, const qcomm::Graph& g) {
  qcomm::PartitionConfig c;
  c.model.mode = a.mode == "slack" ? qcomm::ConstraintMode::slack_qubo
                                   : qcomm::ConstraintMode::native_inequality;
  c.model.lambda1 = parse_lambda(a.lambda1, g, true);
  c.model.lambda2 = parse_lambda(a.lambda2, g, false);
  c.solver.time_limit_sec = a.time_limit_sec;
  c.solver.seed = a.seed;
  c.solver.workers = a.workers;
  if (a.sweeps) c.solver.sweeps = a.sweeps;
  c.repair = !a.no_repair;
  c.restarts = a.restarts;
  c.solver.t_initial = a.t_initial;
  c.solver.t_final = a.t_final;
  return c;
}

qcomm::Graph load(const CommonArgs& a, std::vector<std::string>& warnings) {
  qcomm::Graph g = qcomm::resolve_graph(a.graph, a.weighted, &warnings);
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
  return g;
}

std::string fmt(double v, const char* spec = "%.6f") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string hex_byte(unsigned v) {
  char buf[3];
  std::snprintf(buf, sizeof buf, "%02x", v);
  return buf;
}

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string data = ss.str();
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr);
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += hex_byte(md[i]);
  return hex;
}

int cmd_partition(const CommonArgs& a, std::size_t K, const std::string& out,
                  const std::string& format) {
  std::vector<std::string> warnings;
  const qcomm::Graph g = load(a, warnings);
  const qcomm::PartitionConfig cfg = make_config(a, g);
  const qcomm::PartitionResult r = qcomm::partition(g, K, cfg);
  const qcomm::RunRecord rec = qcomm::make_run_record(a.graph, a.weighted, g, K, cfg, r);
  std::cout << "Q=" << fmt(r.modularity) << " K=" << K
            << " feasible=" << (r.feasible ? "true" : "false")
            << " solve_time=" << fmt(r.solve_time, "%.3f") << '\n';
  if (!out.empty()) {
    std::ofstream f(out);
    if (!f) throw qcomm::DomainError("cannot write " + out);
    if (format == "csv")
      qcomm::write_csv(f, rec);
    else
      f << qcomm::to_json(rec).dump(2) << '\n';
  }
  return r.feasible ? kExitOk : kExitInfeasible;
}

int cmd_sweep(const CommonArgs& a, std::size_t k_min, std::size_t k_max, std::size_t parallel) {
  if (k_min > k_max) throw CLI::ValidationError("--k-min", "must not exceed --k-max");
  std::vector<std::string> warnings;
  const qcomm::Graph g = load(a, warnings);
  if (k_min < 1 || k_max > g.node_count())
    throw qcomm::DomainError("K range must lie within [1, " + std::to_string(g.node_count()) + "]");
  const qcomm::SweepReport rep = qcomm::sweep_k(g, k_min, k_max, make_config(a, g), parallel);
  std::cout << "# graph=" << a.graph << " weighted=" << (a.weighted ? "true" : "false")
            << " seed_policy=\"" << rep.seed_policy << "\" base_seed=" << a.seed << '\n';
  std::cout << "k,q,feasible,solve_time_sec,seed\n";
  int code = kExitOk;
  for (const auto& row : rep.rows) {
    if (!row.result) {
      std::cerr << "K=" << row.K << ": " << row.error << '\n';
      code = kExitError;
      continue;
    }
    std::cout << row.K << ',' << fmt(row.result->modularity, "%.10f") << ','
              << (row.result->feasible ? "true" : "false") << ','
              << fmt(row.result->solve_time, "%.3f") << ',' << row.seed << '\n';
    if (!row.result->feasible && code == kExitOk) code = kExitInfeasible;
  }
  return code;
}

int cmd_bench(const CommonArgs& a, const std::string& suite, std::size_t runs) {
  qcomm::PartitionConfig cfg;
  cfg.solver.time_limit_sec = a.time_limit_sec;
  cfg.solver.seed = a.seed;
  cfg.solver.workers = a.workers;
  if (a.sweeps) cfg.solver.sweeps = a.sweeps;
  bool all = true;
  if (suite == "table1") {
    std::cout << "graph,variant,K,Q_best,Q_reference,result\n";
    for (const auto& c : qcomm::table1_cases()) {
      const qcomm::BenchRow row = qcomm::run_table1_case(c, cfg, runs);
      all = all && row.pass;
      std::cout << row.graph << ',' << row.variant << ',' << row.K << ','
                << (row.q_best ? fmt(*row.q_best) : std::string("NA")) << ','
                << fmt(row.q_reference, "%.4f") << ',' << (row.pass ? "pass" : "fail");
      if (!row.note.empty()) std::cout << " (" << row.note << ')';
      std::cout << '\n' << std::flush;
    }
  } else {
    cfg.solver.time_limit_sec = std::min(a.time_limit_sec, 2.0);
    std::cout << "instance,n,edges,K,Q_solver,Q_oracle,result\n";
    std::size_t idx = 0, matched = 0;
    const auto instances = qcomm::oracle_instances();
    for (const auto& inst : instances) {
      const qcomm::OracleRow row = qcomm::run_oracle_instance(inst, cfg);
      matched += row.match;
      std::cout << idx++ << ',' << row.n << ',' << row.edges << ',' << row.K << ','
                << fmt(row.q_solver, "%.12f") << ',' << fmt(row.q_oracle, "%.12f") << ','
                << (row.match ? "pass" : "fail") << '\n'
                << std::flush;
    }
    std::cout << "# " << matched << '/' << instances.size() << " matches\n";
    all = matched == instances.size();
  }
  return all ? kExitOk : kExitError;
}

int cmd_timestudy(const CommonArgs& a, std::size_t K, const std::string& budgets_arg) {
  std::vector<double> budgets;
  std::stringstream ss(budgets_arg);
  for (std::string tok; std::getline(ss, tok, ',');) {
    double v = 0;
    if (!qcomm::detail::parse_real(tok, v) || !(v > 0))
      throw CLI::ValidationError("--budgets", "budgets must be positive numbers");
    budgets.push_back(v);
  }
  if (budgets.empty()) throw CLI::ValidationError("--budgets", "at least one budget is required");
  std::vector<std::string> warnings;
  const qcomm::Graph g = load(a, warnings);
  const auto rows = qcomm::time_study(g, K, budgets, make_config(a, g));
  std::cout << "# graph=" << a.graph << " K=" << K << " seed=" << a.seed
            << " (same seed for every budget)\n";
  std::cout << "time_limit_sec,solve_time_sec,q\n";
  for (const auto& r : rows)
    std::cout << fmt(r.time_limit_sec, "%g") << ',' << fmt(r.solve_time, "%.3f") << ','
              << fmt(r.modularity, "%.10f") << '\n';
  return kExitOk;
}

int cmd_datasets(bool verify) {
  std::cout << "data directory: " << qcomm::data_dir().string() << '\n';
  bool ok = true;
  for (const auto& e : qcomm::dataset_registry()) {
    std::cout << e.name << "  nodes=" << e.nodes << " edges=" << e.edges
              << " weighted=" << (e.weighted_available ? "yes" : "no") << "  " << e.provenance;
    if (!verify) {
      std::cout << (qcomm::dataset_present(e) ? "" : "  [missing]") << '\n';
      continue;
    }
    const qcomm::DatasetCheck c = qcomm::verify_dataset(e);
    if (!c.present) {
      std::cout << "  [missing]\n";
      ok = false;
      continue;
    }
    bool good = c.ok();
    std::string detail = "counted " + std::to_string(c.nodes) + "/" + std::to_string(c.edges);
    if (!c.error.empty()) detail = c.error;
    if (!e.sha256.empty()) {
      const bool sum_ok = sha256_file(qcomm::dataset_path(e).string()) == e.sha256;
      detail += sum_ok ? ", sha256 ok" : ", sha256 MISMATCH";
      good = good && sum_ok;
    }
    std::cout << "  [" << (good ? "ok" : "FAIL") << ": " << detail << "]\n";
    ok = ok && good;
  }
  return ok ? kExitOk : kExitError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"QUBO modularity community detection with a parallel-trial annealer"};
  app.require_subcommand(1);

  CommonArgs part_args, sweep_args, ts_args, bench_args;
  std::size_t part_k = 0, ts_k = 0, k_min = 1, k_max = 1, parallel = 1, runs = 3;
  std::string out, format = "json", budgets, suite = "table1";
  bool verify = false;

  auto* part = app.add_subcommand("partition", "partition a graph into K groups");
  add_common(*part, part_args);
  part->add_option("--k", part_k, "number of groups")->required();
  part->add_option("--out", out, "write the run record here");
  part->add_option("--format", format, "run record format")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();

  auto* sweep = app.add_subcommand("sweep", "one partition per K, CSV on stdout");
  add_common(*sweep, sweep_args);
  sweep->add_option("--k-min", k_min)->required();
  sweep->add_option("--k-max", k_max)->required();
  sweep->add_option("--parallel", parallel, "K rows run concurrently")->capture_default_str();

  auto* bench = app.add_subcommand("bench", "benchmark suites");
  bench->add_option("--suite", suite, "table1 or oracle")
      ->check(CLI::IsMember({"table1", "oracle"}))
      ->capture_default_str();
  bench->add_option("--runs", runs, "seeds per table1 row (best is reported)")
      ->capture_default_str();
  bench->add_option("--time-limit-sec", bench_args.time_limit_sec)
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  bench->add_option("--seed", bench_args.seed)->capture_default_str();
  bench->add_option("--sweeps", bench_args.sweeps);
  bench->add_option("--workers", bench_args.workers)->capture_default_str();
  bench->add_option("--restarts", bench_args.restarts)
      ->capture_default_str()
      ->check(CLI::PositiveNumber);

  auto* ts = app.add_subcommand("timestudy", "one run per budget, CSV on stdout");
  add_common(*ts, ts_args);
  ts->add_option("--k", ts_k, "number of groups")->required();
  ts->add_option("--budgets", budgets, "comma separated seconds")->required();

  auto* ds = app.add_subcommand("datasets", "list bundled datasets");
  ds->add_flag("--verify", verify, "recount nodes and edges and check checksums");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitError;
  }

  try {
    if (*part) return cmd_partition(part_args, part_k, out, format);
    if (*sweep) return cmd_sweep(sweep_args, k_min, k_max, parallel);
    if (*bench) return cmd_bench(bench_args, suite, runs);
    if (*ts) return cmd_timestudy(ts_args, ts_k, budgets);
    if (*ds) return cmd_datasets(verify);
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
