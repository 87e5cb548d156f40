#include "fairflow/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fairflow/errors.hpp"
#include "fairflow/online.hpp"
#include "fairflow/solve.hpp"
#include "fairflow/verify.hpp"

namespace fairflow {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void write_file(const std::string& path, const std::string& content,
                std::vector<std::string>& written) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << content;
  if (!out) throw IoError("write failed for " + path);
  written.push_back(path);
}

// Runs `command path` and returns the last non-empty stdout line.
std::string run_external(const std::string& command, const std::string& model_path) {
  std::string cmd = command + " '" + model_path + "'";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) throw IoError("cannot start external solver: " + command);
  std::string output;
  char buf[4096];
  size_t got;
  while ((got = fread(buf, 1, sizeof(buf), pipe)) > 0) output.append(buf, got);
  int rc = pclose(pipe);
  if (rc != 0)
    throw IoError("external solver exited with status " + std::to_string(rc));
  std::string last;
  std::istringstream lines(output);
  for (std::string line; std::getline(lines, line);) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (!line.empty()) last = line;
  }
  if (last.empty()) throw IoError("external solver printed no solution path");
  return last;
}

struct OfflineRun {
  Solution sol;
  MilpModel model;
};

}  // namespace

const std::vector<std::string>& canonical_algorithms() {
  static const std::vector<std::string> kAll = {"FlowMILP", "FlowMILP2S", "MinCost", "Random",
                                                "GreedyMin", "Doc4Food", "MinDelta", "RoundRobin"};
  return kAll;
}

bool is_offline_algorithm(const std::string& name) {
  return name == "FlowMILP" || name == "FlowMILP2S" || name == "MinCost";
}

void validate_config(const ExperimentConfig& cfg) {
  const auto& known = canonical_algorithms();
  for (const std::string& a : cfg.algorithms) {
    if (std::find(known.begin(), known.end(), a) == known.end()) {
      std::string names;
      for (const std::string& n : known) names += (names.empty() ? "" : ", ") + n;
      throw InvalidParameter("unknown algorithm '" + a + "' (known: " + names + ")");
    }
  }
  auto wants = [&](const std::string& a) {
    return cfg.algorithms.empty() ||
           std::find(cfg.algorithms.begin(), cfg.algorithms.end(), a) != cfg.algorithms.end();
  };
  if (wants("FlowMILP2S") && !cfg.alpha)
    throw InvalidParameter("FlowMILP2S needs --alpha");
  if (cfg.alpha && *cfg.alpha <= 0) throw InvalidParameter("alpha must be positive");
  if (cfg.penalty && *cfg.penalty <= 0) throw InvalidParameter("penalty must be positive");
  if (cfg.seeds.empty()) throw InvalidParameter("need at least one seed");
  if (cfg.solver != "embedded" && cfg.solver.rfind("external:", 0) != 0)
    throw InvalidParameter("solver must be 'embedded' or 'external:<command>'");
  if (cfg.solver.rfind("external:", 0) == 0 && cfg.solver.size() <= 9)
    throw InvalidParameter("external solver command is empty");
}

ExperimentResult run_experiment(const Instance& inst, const ExperimentConfig& cfg) {
  validate_config(cfg);
  std::filesystem::create_directories(cfg.out_dir);

  std::vector<std::string> algos = cfg.algorithms.empty() ? canonical_algorithms() : cfg.algorithms;
  std::sort(algos.begin(), algos.end());
  algos.erase(std::unique(algos.begin(), algos.end()), algos.end());

  ExperimentResult result;
  auto out_path = [&](const std::string& name) {
    return (std::filesystem::path(cfg.out_dir) / name).string();
  };

  // The network and base model are shared by the offline algorithms.
  bool any_offline = std::any_of(algos.begin(), algos.end(), is_offline_algorithm);
  std::optional<TimeExpandedNetwork> net;
  double penalty = 0.0;
  if (any_offline) {
    net.emplace(TimeExpandedNetwork::build(inst));
    penalty = cfg.penalty ? *cfg.penalty : default_penalty(inst);
  }

  auto solve_offline = [&](const std::string& algo) -> OfflineRun {
    ModelSpec spec;
    spec.k = inst.k;
    spec.penalty = penalty;
    spec.initial_mode = cfg.initial_mode;
    if (algo == "MinCost") {
      spec.objective = MilpObjective::MinCost;
    } else {
      spec.objective = MilpObjective::MaxMin;
      if (algo == "FlowMILP2S") spec.alpha = cfg.alpha;
    }
    OfflineRun run{Solution{}, build_flow_milp(*net, spec)};

    std::string model_path = out_path("model_" + algo + ".lp");
    write_file(model_path, export_milp_text(run.model), result.files_written);

    if (cfg.solver == "embedded") {
      run.sol = solve_embedded(run.model);
    } else {
      std::string sol_path = run_external(cfg.solver.substr(9), model_path);
      std::ifstream in(sol_path, std::ios::binary);
      if (!in) throw IoError("external solver pointed at unreadable file " + sol_path);
      std::stringstream buf;
      buf << in.rdbuf();
      run.sol = parse_external_solution(run.model, buf.str());
    }
    if (run.sol.status == SolveStatus::Infeasible)
      throw NumericalFailure("model reported infeasible");
    if (run.sol.status == SolveStatus::LimitReached)
      throw NumericalFailure("solver hit its node/time limits before proving optimality");

    ResidualReport rep = verify_solution(*net, run.model.spec, run.sol);
    if (!rep.ok(1e-6))
      throw ResidualTooLarge("solution violates the model (worst " + rep.worst_detail + ")");

    write_file(out_path("solution_" + algo + ".sol"), write_solution_text(run.model, run.sol),
               result.files_written);
    return run;
  };

  for (const std::string& algo : algos) {
    try {
      MetricsRow row;
      row.algorithm = algo;
      std::optional<std::vector<double>> lorenz_rewards;

      if (is_offline_algorithm(algo)) {
        OfflineRun run = solve_offline(algo);
        double dropped = 0.0;
        for (int zj : run.sol.z) dropped += zj;
        if (algo == "MinCost") {
          // Aggregate flows cannot be attributed to individual servers, so
          // the per-server metrics stay blank for this algorithm.
          row.unserved = dropped;
          row.cost = total_movement_cost(run.sol, run.model) / inst.k;
          row.min_reward = kNaN;
          row.zero_reward_count = kNaN;
        } else {
          Metrics m = evaluate(run.sol.rewards, static_cast<int>(dropped));
          row.unserved = m.unserved;
          row.cost = m.cost;
          row.min_reward = m.min_reward;
          row.zero_reward_count = m.zero_reward_count;
          lorenz_rewards = run.sol.rewards;
        }
      } else if (algo == "Random") {
        // Mean over the configured seeds, element-wise on every metric and
        // on the per-server reward vector feeding the Lorenz curve.
        double uns = 0, cost = 0, minr = 0, zc = 0;
        std::vector<double> mean_rewards(inst.k, 0.0);
        for (uint64_t seed : cfg.seeds) {
          SimulationResult sim = simulate(inst, PolicyKind::Random, seed);
          std::vector<double> rewards(sim.server_rewards.begin(), sim.server_rewards.end());
          Metrics m = evaluate(rewards, sim.unserved);
          uns += m.unserved;
          cost += m.cost;
          minr += m.min_reward;
          zc += m.zero_reward_count;
          for (int i = 0; i < inst.k; ++i)
            mean_rewards[i] += static_cast<double>(sim.server_rewards[i]);
        }
        double s = static_cast<double>(cfg.seeds.size());
        row.unserved = uns / s;
        row.cost = cost / s;
        row.min_reward = minr / s;
        row.zero_reward_count = zc / s;
        for (double& r : mean_rewards) r /= s;
        lorenz_rewards = std::move(mean_rewards);
        if (cfg.trace) {
          SimulationResult sim = simulate(inst, PolicyKind::Random, cfg.seeds.front(), true);
          write_file(out_path("trace_" + algo + ".jsonl"), sim.trace, result.files_written);
        }
      } else {
        PolicyKind kind = policy_from_name(algo);
        SimulationResult sim = simulate(inst, kind, cfg.seeds.front(), cfg.trace);
        std::vector<double> rewards(sim.server_rewards.begin(), sim.server_rewards.end());
        Metrics m = evaluate(rewards, sim.unserved);
        row.unserved = m.unserved;
        row.cost = m.cost;
        row.min_reward = m.min_reward;
        row.zero_reward_count = m.zero_reward_count;
        lorenz_rewards = std::move(rewards);
        if (cfg.trace)
          write_file(out_path("trace_" + algo + ".jsonl"), sim.trace, result.files_written);
      }

      std::string summary_text = "metric,value\n";
      {
        auto cell = [](double v) {
          if (std::isnan(v)) return std::string();
          char buf[64];
          std::snprintf(buf, sizeof(buf), "%.10g", v);
          return std::string(buf);
        };
        summary_text += "unserved," + cell(row.unserved) + "\n";
        summary_text += "cost," + cell(row.cost) + "\n";
        summary_text += "min_reward," + cell(row.min_reward) + "\n";
        summary_text += "zero_reward_count," + cell(row.zero_reward_count) + "\n";
      }
      write_file(out_path("summary_" + algo + ".csv"), summary_text, result.files_written);

      if (lorenz_rewards) {
        LorenzCurve curve = lorenz_curve(*lorenz_rewards);
        write_file(out_path("lorenz_" + algo + ".csv"), lorenz_csv(curve.full),
                   result.files_written);
      }

      result.rows.push_back(std::move(row));
    } catch (const Error& e) {
      result.failures.push_back({algo, e.what()});
    }
  }

  write_file(out_path("metrics.csv"), metrics_table_csv(result.rows), result.files_written);

  if (!result.failures.empty()) {
    nlohmann::ordered_json manifest = nlohmann::ordered_json::array();
    for (const AlgoFailure& f : result.failures)
      manifest.push_back({{"algorithm", f.algorithm}, {"error", f.message}});
    write_file(out_path("failures.json"), manifest.dump(2) + "\n", result.files_written);
    result.exit_code = kExitSolver;
  }
  return result;
}

std::vector<MetricsRow> reaggregate_summaries(const std::string& dir) {
  std::vector<MetricsRow> rows;
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    std::string name = entry.path().filename().string();
    if (name.rfind("summary_", 0) == 0 && name.size() > 12 &&
        name.substr(name.size() - 4) == ".csv")
      files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& path : files) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path.string());
    std::string fname = path.filename().string();
    MetricsRow row;
    row.algorithm = fname.substr(8, fname.size() - 12);
    row.unserved = row.cost = row.min_reward = row.zero_reward_count = kNaN;
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
      auto comma = line.find(',');
      if (comma == std::string::npos) continue;
      std::string key = line.substr(0, comma);
      std::string val = line.substr(comma + 1);
      if (!val.empty() && val.back() == '\r') val.pop_back();
      double v = val.empty() ? kNaN : std::stod(val);
      if (key == "unserved") row.unserved = v;
      else if (key == "cost") row.cost = v;
      else if (key == "min_reward") row.min_reward = v;
      else if (key == "zero_reward_count") row.zero_reward_count = v;
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw IoError("no summary_<Algo>.csv files under " + dir);
  std::sort(rows.begin(), rows.end(),
            [](const MetricsRow& a, const MetricsRow& b) { return a.algorithm < b.algorithm; });
  return rows;
}

}  // namespace fairflow
