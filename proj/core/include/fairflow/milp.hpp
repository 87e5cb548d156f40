#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fairflow/flownet.hpp"
#include "fairflow/linear.hpp"

namespace fairflow {

enum class MilpObjective { MaxMin, MinCost };
enum class InitialMode { Free, Fixed };

// Shape of the reward cap constraint. Prose: one row bounding the total of
// the per-server rewards by alpha times the cost-weighted delivery flow.
// PerRequestLiteral: one row per request bounding the reward total by alpha
// times that request's (unweighted) delivery flow, kept for comparison.
enum class TwoSidedForm { Prose, PerRequestLiteral };

struct ModelSpec {
  int k = 1;
  double penalty = 1.0;  // objective weight of each dropped request
  MilpObjective objective = MilpObjective::MaxMin;
  std::optional<double> alpha;  // absent = no reward cap row
  TwoSidedForm alpha_form = TwoSidedForm::Prose;
  InitialMode initial_mode = InitialMode::Free;
};

// Linear model over the time-expanded network.
//
// MaxMin: one flow variable in [0,1] per (edge, server), a binary drop flag
// z_r per request, a reward variable m_i per server and the scalar minimum
// reward M. Objective: maximize M - penalty * sum z. Rows: reward definition,
// M <= m_i, pickup capacity, serve-or-drop, per-server flow conservation,
// fleet size at source and sink, optional reward cap.
//
// MinCost: a single aggregate flow variable in [0,k] per edge, plus the z
// flags. Objective: minimize sum(cost * flow) + penalty * sum z.
//
// Fixed initial mode pins flow to the instance start positions through
// variable bounds on the source links: per-server unit links in MaxMin,
// per-position multiplicity in MinCost.
struct MilpModel {
  const TimeExpandedNetwork* net = nullptr;
  ModelSpec spec;

  int num_vars = 0;
  std::vector<double> lb, ub;
  std::vector<bool> is_binary;
  std::vector<std::string> var_names;
  std::vector<double> obj_coef;
  bool maximize = true;
  std::vector<LinearRow> rows;

  int servers_per_edge() const {
    return spec.objective == MilpObjective::MaxMin ? spec.k : 1;
  }
  int flow_var(int edge, int server) const { return edge * servers_per_edge() + server; }
  int z_var(int request_index) const {
    return static_cast<int>(net->edges().size()) * servers_per_edge() + request_index;
  }
  int reward_var(int server) const;   // MaxMin only
  int minreward_var() const;          // MaxMin only
  int var_by_name(const std::string& name) const;  // -1 if unknown
};

MilpModel build_flow_milp(const TimeExpandedNetwork& net, const ModelSpec& spec);

// penalty large enough that dropping a servable request never pays for
// itself: 1 + total delivery distance + n * max pairwise distance.
double default_penalty(const Instance& inst);

// LP text format (Maximize/Minimize, Subject To, Bounds, Binary, End).
// Deterministic: re-exporting the same model is byte-identical.
std::string export_milp_text(const MilpModel& model);

enum class SolveStatus { Optimal, Infeasible, LimitReached };

struct Solution {
  SolveStatus status = SolveStatus::Optimal;
  double objective_value = 0.0;
  std::vector<double> flows;    // indexed flow_var(edge, server)
  std::vector<int> z;           // 0/1 per request
  std::vector<double> rewards;  // per server (empty in MinCost mode)
  double min_reward = 0.0;
  int64_t nodes_explored = 0;
};

// `name value` lines; '#' starts a comment. The writer emits nonzero flows,
// every z, and the reward variables; the parser treats missing names as 0.
std::string write_solution_text(const MilpModel& model, const Solution& sol);

// Parses a solution produced by an external solver (or by the writer above).
// Throws UnknownVariable for names outside the model and ResidualTooLarge
// when bounds, integrality of z, serve-or-drop rows, or reported rewards are
// off by more than 1e-6. Rewards and the objective are recomputed.
Solution parse_external_solution(const MilpModel& model, const std::string& text);

struct RewardReport {
  std::vector<double> rewards;  // recomputed from flows
  double min_reward = 0.0;
  std::vector<int> served;    // request indices with z == 0
  std::vector<int> unserved;  // request indices with z == 1
};

// Recomputes per-server rewards from the flow values (MaxMin models).
RewardReport extract_rewards(const Solution& sol, const TimeExpandedNetwork& net, int k);

// Cost-weighted total flow, valid in both modes.
double total_movement_cost(const Solution& sol, const MilpModel& model);

}  // namespace fairflow
