// fairflow: generate instances, solve the offline flow models, simulate the
// online policies, and emit comparison reports.
//
// Exit codes: 0 success, 2 configuration error, 3 solver failure,
// 4 invalid instance.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "fairflow/errors.hpp"
#include "fairflow/experiment.hpp"
#include "fairflow/flownet.hpp"
#include "fairflow/instance.hpp"
#include "fairflow/metric.hpp"
#include "fairflow/metrics.hpp"
#include "fairflow/milp.hpp"
#include "fairflow/online.hpp"
#include "fairflow/solve.hpp"
#include "fairflow/verify.hpp"

namespace ff = fairflow;

namespace {

// Loads and validates an instance file; prints problems and returns the
// matching exit code through `code` when something is wrong.
std::optional<ff::Instance> load_checked_instance(const std::string& path, int& code) {
  ff::Instance inst;
  std::vector<std::string> warnings;
  try {
    inst = ff::load_instance_file(path, &warnings);
  } catch (const ff::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    code = ff::kExitConfig;
    return std::nullopt;
  } catch (const ff::Error& e) {
    std::cerr << "error: " << path << ": " << e.what() << "\n";
    code = ff::kExitInstance;
    return std::nullopt;
  }
  for (const std::string& w : warnings) std::cerr << "warning: " << w << "\n";
  std::vector<ff::Violation> violations = ff::validate(inst);
  if (!violations.empty()) {
    for (const ff::Violation& v : violations) {
      std::cerr << "invalid instance";
      if (v.request_id >= 0) std::cerr << " (request " << v.request_id << ")";
      std::cerr << ": " << v.reason << "\n";
    }
    code = ff::kExitInstance;
    return std::nullopt;
  }
  return inst;
}

void announce(const std::string& path) { std::cout << "wrote " << path << "\n"; }

struct GenSynOpts {
  int nodes = 500;
  double p = 0.5;
  int requests = 250;
  int k = 100;
  uint64_t seed = 1;
  int64_t horizon = 1000;
  std::vector<int64_t> arrival = {100, 900};
  std::vector<int64_t> prep = {1, 100};
  std::vector<int64_t> weights = {10, 10000};
  double eta = 1.0;
  double speed = 1.0;
  std::string out = "instance.json";
};

struct GenStarOpts {
  std::vector<int64_t> d;
  int k = 1;
  int64_t slack = 2;
  std::string out = "instance.json";
};

struct GenIngestOpts {
  std::string csv;
  std::string graph;
  int k = 1;
  std::vector<int> positions;
  double eta = 1.0;
  double speed = 1.0;
  std::optional<int64_t> horizon;
  std::string out = "instance.json";
};

int cmd_gen_syn(const GenSynOpts& o) {
  if (o.arrival.size() != 2 || o.prep.size() != 2 || o.weights.size() != 2) {
    std::cerr << "error: --arrival, --prep and --weights take exactly two values\n";
    return ff::kExitConfig;
  }
  ff::MetricSpace ms = ff::gen_erdos_renyi(o.nodes, o.p, o.weights[0], o.weights[1], o.seed);
  ff::Instance inst = ff::gen_synthetic(ms, o.requests, o.horizon, {o.arrival[0], o.arrival[1]},
                                        {o.prep[0], o.prep[1]}, o.k, o.seed + 1);
  inst.eta = o.eta;
  inst.speed = o.speed;
  ff::save_instance_file(inst, o.out);
  announce(o.out);
  return ff::kExitOk;
}

int cmd_gen_star(const GenStarOpts& o) {
  std::vector<ff::Dist> d(o.d.begin(), o.d.end());
  ff::Instance inst = ff::gen_partition_instance(d, o.k, o.slack);
  ff::save_instance_file(inst, o.out);
  announce(o.out);
  return ff::kExitOk;
}

int cmd_gen_ingest(const GenIngestOpts& o) {
  std::ifstream gin(o.graph);
  if (!gin) {
    std::cerr << "error: cannot read graph file " << o.graph << "\n";
    return ff::kExitConfig;
  }
  std::stringstream gbuf;
  gbuf << gin.rdbuf();
  ff::MetricSpace ms;
  try {
    ms = ff::MetricSpace::from_json(gbuf.str());
  } catch (const ff::Error& e) {
    std::cerr << "error: " << o.graph << ": " << e.what() << "\n";
    return ff::kExitInstance;
  }

  std::vector<ff::NodeId> positions(o.positions.begin(), o.positions.end());
  if (positions.empty()) positions.assign(o.k, 0);
  std::ifstream cin_file(o.csv);
  if (!cin_file) {
    std::cerr << "error: cannot read csv file " << o.csv << "\n";
    return ff::kExitConfig;
  }
  std::vector<std::string> warnings;
  ff::Instance inst =
      ff::ingest_csv(cin_file, ms, o.k, positions, o.eta, o.speed, o.horizon, &warnings);
  for (const std::string& w : warnings) std::cerr << "warning: " << w << "\n";
  ff::save_instance_file(inst, o.out);
  announce(o.out);
  return ff::kExitOk;
}

struct RunOpts {
  std::string instance;
  std::string config;
  ff::ExperimentConfig cfg;
  std::vector<std::string> algos;
  std::vector<uint64_t> seeds;
  double alpha = 0.0;
  double penalty = 0.0;
  std::string initial_mode = "free";
};

// Applies a JSON config file, then lets explicitly passed flags win.
void apply_config_file(const std::string& path, RunOpts& o, const CLI::App* sub) {
  std::ifstream in(path);
  if (!in) throw ff::IoError("cannot read config file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ff::ParseError(std::string("config file: ") + e.what());
  }
  if (!j.is_object()) throw ff::ParseError("config file: expected a JSON object");
  for (auto& [key, val] : j.items()) {
    try {
      if (key == "instance") {
        if (o.instance.empty()) o.instance = val.get<std::string>();
      } else if (key == "algorithms") {
        if (sub->count("--algos") == 0) o.cfg.algorithms = val.get<std::vector<std::string>>();
      } else if (key == "seeds") {
        if (sub->count("--seeds") == 0) o.cfg.seeds = val.get<std::vector<uint64_t>>();
      } else if (key == "alpha") {
        if (sub->count("--alpha") == 0) o.cfg.alpha = val.get<double>();
      } else if (key == "penalty") {
        if (sub->count("--penalty") == 0) o.cfg.penalty = val.get<double>();
      } else if (key == "solver") {
        if (sub->count("--solver") == 0) o.cfg.solver = val.get<std::string>();
      } else if (key == "out_dir") {
        if (sub->count("--out") == 0) o.cfg.out_dir = val.get<std::string>();
      } else if (key == "trace") {
        if (sub->count("--trace") == 0) o.cfg.trace = val.get<bool>();
      } else if (key == "initial_mode") {
        if (sub->count("--initial-mode") == 0) o.initial_mode = val.get<std::string>();
      } else {
        throw ff::ParseError("config file: unknown field '" + key + "'");
      }
    } catch (const nlohmann::json::exception& e) {
      throw ff::ParseError("config file: field '" + key + "': " + e.what());
    }
  }
}

ff::InitialMode parse_initial_mode(const std::string& s) {
  if (s == "free") return ff::InitialMode::Free;
  if (s == "fixed") return ff::InitialMode::Fixed;
  throw ff::InvalidParameter("initial mode must be 'free' or 'fixed'");
}

int cmd_run(RunOpts& o, const CLI::App* sub) {
  try {
    if (!o.config.empty()) apply_config_file(o.config, o, sub);
    if (sub->count("--algos")) o.cfg.algorithms = o.algos;
    if (sub->count("--seeds")) o.cfg.seeds = o.seeds;
    if (sub->count("--alpha")) o.cfg.alpha = o.alpha;
    if (sub->count("--penalty")) o.cfg.penalty = o.penalty;
    o.cfg.initial_mode = parse_initial_mode(o.initial_mode);
    if (o.instance.empty()) throw ff::InvalidParameter("run needs --instance (or a config file)");
    ff::validate_config(o.cfg);
  } catch (const ff::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return ff::kExitConfig;
  }

  int code = ff::kExitOk;
  std::optional<ff::Instance> inst = load_checked_instance(o.instance, code);
  if (!inst) return code;

  ff::ExperimentResult result = ff::run_experiment(*inst, o.cfg);
  std::cout << ff::metrics_table_csv(result.rows);
  for (const ff::AlgoFailure& f : result.failures)
    std::cerr << "failed: " << f.algorithm << ": " << f.message << "\n";
  return result.exit_code;
}

struct SolveOpts {
  std::string instance;
  std::string algo = "FlowMILP";
  double alpha = 0.0;
  double penalty = 0.0;
  std::string solver = "embedded";
  std::string out_dir = ".";
  std::string initial_mode = "free";
  bool export_only = false;
};

int cmd_solve(const SolveOpts& o, const CLI::App* sub) {
  if (!ff::is_offline_algorithm(o.algo)) {
    std::cerr << "error: solve handles FlowMILP, FlowMILP2S or MinCost (got '" << o.algo << "')\n";
    return ff::kExitConfig;
  }
  if (o.algo == "FlowMILP2S" && sub->count("--alpha") == 0) {
    std::cerr << "error: FlowMILP2S needs --alpha\n";
    return ff::kExitConfig;
  }

  int code = ff::kExitOk;
  std::optional<ff::Instance> inst = load_checked_instance(o.instance, code);
  if (!inst) return code;

  try {
    ff::TimeExpandedNetwork net = ff::TimeExpandedNetwork::build(*inst);
    ff::ModelSpec spec;
    spec.k = inst->k;
    spec.penalty = sub->count("--penalty") ? o.penalty : ff::default_penalty(*inst);
    spec.objective =
        o.algo == "MinCost" ? ff::MilpObjective::MinCost : ff::MilpObjective::MaxMin;
    if (o.algo == "FlowMILP2S") spec.alpha = o.alpha;
    spec.initial_mode = parse_initial_mode(o.initial_mode);
    ff::MilpModel model = ff::build_flow_milp(net, spec);

    std::filesystem::create_directories(o.out_dir);
    std::string model_path =
        (std::filesystem::path(o.out_dir) / ("model_" + o.algo + ".lp")).string();
    {
      std::ofstream out(model_path, std::ios::binary);
      out << ff::export_milp_text(model);
    }
    announce(model_path);
    if (o.export_only) return ff::kExitOk;

    ff::Solution sol;
    if (o.solver == "embedded") {
      sol = ff::solve_embedded(model);
    } else if (o.solver.rfind("external:", 0) == 0) {
      std::string cmd = o.solver.substr(9) + " '" + model_path + "'";
      FILE* pipe = popen(cmd.c_str(), "r");
      if (!pipe) throw ff::IoError("cannot start external solver");
      std::string outbuf;
      char buf[4096];
      size_t got;
      while ((got = fread(buf, 1, sizeof(buf), pipe)) > 0) outbuf.append(buf, got);
      if (pclose(pipe) != 0) throw ff::IoError("external solver failed");
      std::string sol_path;
      std::istringstream lines(outbuf);
      for (std::string line; std::getline(lines, line);) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (!line.empty()) sol_path = line;
      }
      std::ifstream in(sol_path, std::ios::binary);
      if (!in) throw ff::IoError("external solver produced no readable solution file");
      std::stringstream sbuf;
      sbuf << in.rdbuf();
      sol = ff::parse_external_solution(model, sbuf.str());
    } else {
      std::cerr << "error: solver must be 'embedded' or 'external:<command>'\n";
      return ff::kExitConfig;
    }

    if (sol.status == ff::SolveStatus::Infeasible) {
      std::cerr << "error: model infeasible\n";
      return ff::kExitSolver;
    }
    ff::ResidualReport rep = ff::verify_solution(net, spec, sol);
    if (!rep.ok(1e-6)) {
      std::cerr << "error: solution residual too large (" << rep.worst_detail << ")\n";
      return ff::kExitSolver;
    }

    std::string sol_path =
        (std::filesystem::path(o.out_dir) / ("solution_" + o.algo + ".sol")).string();
    {
      std::ofstream out(sol_path, std::ios::binary);
      out << ff::write_solution_text(model, sol);
    }
    announce(sol_path);
    std::cout << "status "
              << (sol.status == ff::SolveStatus::Optimal ? "optimal" : "limit_reached") << "\n";
    std::cout << "objective " << sol.objective_value << "\n";
    int dropped = 0;
    for (int zj : sol.z) dropped += zj;
    std::cout << "unserved " << dropped << "\n";
    if (spec.objective == ff::MilpObjective::MaxMin)
      std::cout << "min_reward " << sol.min_reward << "\n";
    else
      std::cout << "total_cost " << ff::total_movement_cost(sol, model) << "\n";
    return sol.status == ff::SolveStatus::Optimal ? ff::kExitOk : ff::kExitSolver;
  } catch (const ff::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return ff::kExitSolver;
  }
}

struct SimOpts {
  std::string instance;
  std::string policy = "GreedyMin";
  uint64_t seed = 1;
  bool trace = false;
  std::string out_dir = ".";
};

int cmd_simulate(const SimOpts& o) {
  ff::PolicyKind kind;
  try {
    kind = ff::policy_from_name(o.policy);
  } catch (const ff::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return ff::kExitConfig;
  }

  int code = ff::kExitOk;
  std::optional<ff::Instance> inst = load_checked_instance(o.instance, code);
  if (!inst) return code;

  ff::SimulationResult sim = ff::simulate(*inst, kind, o.seed, o.trace);
  std::vector<double> rewards(sim.server_rewards.begin(), sim.server_rewards.end());
  ff::Metrics m = ff::evaluate(rewards, sim.unserved);

  std::filesystem::create_directories(o.out_dir);
  std::string summary_path =
      (std::filesystem::path(o.out_dir) / ("summary_" + o.policy + ".csv")).string();
  {
    std::ofstream out(summary_path, std::ios::binary);
    out << ff::summary_csv(m);
  }
  announce(summary_path);
  std::string lorenz_path =
      (std::filesystem::path(o.out_dir) / ("lorenz_" + o.policy + ".csv")).string();
  {
    std::ofstream out(lorenz_path, std::ios::binary);
    out << ff::lorenz_csv(ff::lorenz_curve(m.rewards).full);
  }
  announce(lorenz_path);
  if (o.trace) {
    std::string trace_path =
        (std::filesystem::path(o.out_dir) / ("trace_" + o.policy + ".jsonl")).string();
    std::ofstream out(trace_path, std::ios::binary);
    out << sim.trace;
    announce(trace_path);
  }

  std::cout << "unserved " << m.unserved << "\n"
            << "cost " << m.cost << "\n"
            << "min_reward " << m.min_reward << "\n"
            << "zero_reward_count " << m.zero_reward_count << "\n";
  if (kind == ff::PolicyKind::Doc4Food)
    std::cout << "eligibility_divergence " << sim.divergence << "\n";
  return ff::kExitOk;
}

int cmd_report(const std::string& dir) {
  try {
    std::vector<ff::MetricsRow> rows = ff::reaggregate_summaries(dir);
    std::string table = ff::metrics_table_csv(rows);
    std::string path = (std::filesystem::path(dir) / "metrics.csv").string();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ff::IoError("cannot write " + path);
    out << table;
    std::cout << table;
    announce(path);
    return ff::kExitOk;
  } catch (const ff::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return ff::kExitConfig;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fair k-food flow models and online policy simulator"};
  app.require_subcommand(1);

  // gen
  CLI::App* gen = app.add_subcommand("gen", "generate instance files");
  gen->require_subcommand(1);

  GenSynOpts syn_opts;
  CLI::App* syn = gen->add_subcommand("syn", "random graph + random requests");
  syn->add_option("--nodes", syn_opts.nodes, "graph size")->capture_default_str();
  syn->add_option("--p", syn_opts.p, "edge probability")->capture_default_str();
  syn->add_option("--requests", syn_opts.requests, "request count")->capture_default_str();
  syn->add_option("--k", syn_opts.k, "server count")->capture_default_str();
  syn->add_option("--seed", syn_opts.seed, "generator seed")->capture_default_str();
  syn->add_option("--horizon", syn_opts.horizon, "timestep horizon")->capture_default_str();
  syn->add_option("--arrival", syn_opts.arrival, "arrival window lo,hi")
      ->delimiter(',')
      ->expected(2);
  syn->add_option("--prep", syn_opts.prep, "window length range lo,hi")
      ->delimiter(',')
      ->expected(2);
  syn->add_option("--weights", syn_opts.weights, "edge weight range lo,hi")
      ->delimiter(',')
      ->expected(2);
  syn->add_option("--eta", syn_opts.eta, "timestep duration")->capture_default_str();
  syn->add_option("--speed", syn_opts.speed, "distance per time unit")->capture_default_str();
  syn->add_option("-o,--out", syn_opts.out, "output file")->capture_default_str();

  GenStarOpts star_opts;
  CLI::App* star = gen->add_subcommand("star", "star metric with hub-to-leaf requests");
  star->add_option("--d", star_opts.d, "leaf distances, comma separated")
      ->delimiter(',')
      ->required();
  star->add_option("--k", star_opts.k, "server count")->capture_default_str();
  star->add_option("--slack", star_opts.slack, "extra spacing between deadlines")
      ->capture_default_str();
  star->add_option("-o,--out", star_opts.out, "output file")->capture_default_str();

  GenIngestOpts ingest_opts;
  CLI::App* ingest = gen->add_subcommand("ingest", "build an instance from a CSV trace");
  ingest->add_option("--csv", ingest_opts.csv, "orders CSV")->required();
  ingest->add_option("--graph", ingest_opts.graph, "metric graph JSON")->required();
  ingest->add_option("--k", ingest_opts.k, "server count")->capture_default_str();
  ingest->add_option("--positions", ingest_opts.positions, "initial positions, comma separated")
      ->delimiter(',');
  ingest->add_option("--eta", ingest_opts.eta, "timestep duration")->capture_default_str();
  ingest->add_option("--speed", ingest_opts.speed, "distance per time unit")
      ->capture_default_str();
  int64_t ingest_horizon = 0;
  CLI::Option* ingest_horizon_opt =
      ingest->add_option("--horizon", ingest_horizon, "timestep horizon (default: fit)");
  ingest->add_option("-o,--out", ingest_opts.out, "output file")->capture_default_str();

  // run
  RunOpts run_opts;
  CLI::App* run = app.add_subcommand("run", "run algorithms and write a comparison report");
  run->add_option("--instance", run_opts.instance, "instance JSON file");
  run->add_option("--config", run_opts.config, "JSON config file (flags override it)");
  run->add_option("--algos", run_opts.algos, "algorithms, comma separated (default: all)")
      ->delimiter(',');
  run->add_option("--seeds", run_opts.seeds, "seeds for Random, comma separated")->delimiter(',');
  run->add_option("--alpha", run_opts.alpha, "two-sided cap for FlowMILP2S");
  run->add_option("--penalty", run_opts.penalty, "drop penalty (default: auto)");
  run->add_option("--solver", run_opts.cfg.solver, "embedded | external:<command>")
      ->capture_default_str();
  run->add_option("--out", run_opts.cfg.out_dir, "output directory")->capture_default_str();
  run->add_flag("--trace", run_opts.cfg.trace, "write per-policy event traces");
  run->add_option("--initial-mode", run_opts.initial_mode, "free | fixed")
      ->capture_default_str();

  // solve
  SolveOpts solve_opts;
  CLI::App* solve = app.add_subcommand("solve", "offline flow model only");
  solve->add_option("--instance", solve_opts.instance, "instance JSON file")->required();
  solve->add_option("--algo", solve_opts.algo, "FlowMILP | FlowMILP2S | MinCost")
      ->capture_default_str();
  solve->add_option("--alpha", solve_opts.alpha, "two-sided cap (FlowMILP2S)");
  solve->add_option("--penalty", solve_opts.penalty, "drop penalty (default: auto)");
  solve->add_option("--solver", solve_opts.solver, "embedded | external:<command>")
      ->capture_default_str();
  solve->add_option("--out", solve_opts.out_dir, "output directory")->capture_default_str();
  solve->add_option("--initial-mode", solve_opts.initial_mode, "free | fixed")
      ->capture_default_str();
  solve->add_flag("--export-only", solve_opts.export_only, "write the model file and stop");

  // simulate
  SimOpts sim_opts;
  CLI::App* sim = app.add_subcommand("simulate", "one online policy on one instance");
  sim->add_option("--instance", sim_opts.instance, "instance JSON file")->required();
  sim->add_option("--policy", sim_opts.policy, "Random | GreedyMin | Doc4Food | MinDelta | RoundRobin")
      ->capture_default_str();
  sim->add_option("--seed", sim_opts.seed, "rng seed (Random only)")->capture_default_str();
  sim->add_flag("--trace", sim_opts.trace, "write the event trace");
  sim->add_option("--out", sim_opts.out_dir, "output directory")->capture_default_str();

  // report
  std::string report_dir = ".";
  CLI::App* report = app.add_subcommand("report", "re-aggregate summaries into metrics.csv");
  report->add_option("--dir", report_dir, "directory with summary_<Algo>.csv files")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return ff::kExitConfig;
  }

  try {
    if (syn->parsed()) return cmd_gen_syn(syn_opts);
    if (star->parsed()) return cmd_gen_star(star_opts);
    if (ingest->parsed()) {
      if (ingest_horizon_opt->count()) ingest_opts.horizon = ingest_horizon;
      return cmd_gen_ingest(ingest_opts);
    }
    if (run->parsed()) return cmd_run(run_opts, run);
    if (solve->parsed()) return cmd_solve(solve_opts, solve);
    if (sim->parsed()) return cmd_simulate(sim_opts);
    if (report->parsed()) return cmd_report(report_dir);
  } catch (const ff::GuardRailExceeded& e) {
    std::cerr << "error: " << e.what() << "\n";
    return ff::kExitSolver;
  } catch (const ff::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return ff::kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return ff::kExitConfig;
  }
  return ff::kExitConfig;
}
