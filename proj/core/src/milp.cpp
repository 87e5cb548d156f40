#include "fairflow/milp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

namespace fairflow {

int MilpModel::reward_var(int server) const {
  if (spec.objective != MilpObjective::MaxMin)
    throw InvalidParameter("reward_var: only present in MaxMin models");
  return static_cast<int>(net->edges().size()) * spec.k +
         static_cast<int>(net->instance().requests.size()) + server;
}

int MilpModel::minreward_var() const {
  if (spec.objective != MilpObjective::MaxMin)
    throw InvalidParameter("minreward_var: only present in MaxMin models");
  return reward_var(spec.k - 1) + 1;
}

int MilpModel::var_by_name(const std::string& name) const {
  for (int i = 0; i < num_vars; ++i)
    if (var_names[i] == name) return i;
  return -1;
}

double default_penalty(const Instance& inst) {
  double total_delivery = 0.0;
  for (const auto& r : inst.requests)
    total_delivery += static_cast<double>(inst.metric.dist(r.source, r.dest));
  const double max_pair = static_cast<double>(inst.metric.diameter());
  return 1.0 + total_delivery + max_pair * static_cast<double>(inst.requests.size());
}

MilpModel build_flow_milp(const TimeExpandedNetwork& net, const ModelSpec& spec) {
  const Instance& inst = net.instance();
  const int n = static_cast<int>(inst.requests.size());
  const int E = static_cast<int>(net.edges().size());
  if (spec.k < 1) throw InvalidParameter("build_flow_milp: k must be >= 1");
  if (spec.penalty <= 0) throw InvalidParameter("build_flow_milp: penalty must be positive");
  if (spec.alpha && *spec.alpha <= 0)
    throw InvalidParameter("build_flow_milp: alpha must be positive");
  if (spec.initial_mode == InitialMode::Fixed &&
      static_cast<int>(inst.initial_positions.size()) != spec.k)
    throw InvalidParameter("build_flow_milp: Fixed mode needs one start position per server");

  MilpModel model;
  model.net = &net;
  model.spec = spec;
  const bool maxmin = spec.objective == MilpObjective::MaxMin;
  const int spe = maxmin ? spec.k : 1;

  model.num_vars = E * spe + n + (maxmin ? spec.k + 1 : 0);
  model.lb.assign(model.num_vars, 0.0);
  model.ub.assign(model.num_vars, 1.0);
  model.is_binary.assign(model.num_vars, false);
  model.var_names.resize(model.num_vars);
  model.obj_coef.assign(model.num_vars, 0.0);
  model.maximize = maxmin;

  char buf[64];
  for (int e = 0; e < E; ++e) {
    for (int s = 0; s < spe; ++s) {
      const int v = model.flow_var(e, s);
      if (maxmin) {
        std::snprintf(buf, sizeof buf, "f_e%d_s%d", e, s);
      } else {
        std::snprintf(buf, sizeof buf, "f_e%d", e);
        model.ub[v] = static_cast<double>(spec.k);
      }
      model.var_names[v] = buf;
    }
  }
  for (int j = 0; j < n; ++j) {
    const int v = model.z_var(j);
    std::snprintf(buf, sizeof buf, "z_r%d", j);
    model.var_names[v] = buf;
    model.is_binary[v] = true;
    model.obj_coef[v] = maxmin ? -spec.penalty : spec.penalty;
  }
  if (maxmin) {
    constexpr double kInf = 1e30;
    for (int i = 0; i < spec.k; ++i) {
      const int v = model.reward_var(i);
      std::snprintf(buf, sizeof buf, "m_s%d", i);
      model.var_names[v] = buf;
      model.ub[v] = kInf;
    }
    model.var_names[model.minreward_var()] = "minR";
    model.ub[model.minreward_var()] = kInf;
    model.obj_coef[model.minreward_var()] = 1.0;
  } else {
    for (int e = 0; e < E; ++e)
      model.obj_coef[model.flow_var(e, 0)] = static_cast<double>(net.edges()[e].cost);
  }

  // Fixed start positions are encoded purely through source-link bounds.
  if (spec.initial_mode == InitialMode::Fixed) {
    std::map<NodeId, int> multiplicity;
    for (NodeId p : inst.initial_positions) ++multiplicity[p];
    for (int e = 0; e < E; ++e) {
      const TEEdge& edge = net.edges()[e];
      if (edge.kind != TEEdgeKind::SourceLink) continue;
      const NodeId loc = net.nodes()[edge.to].location;
      if (maxmin) {
        for (int s = 0; s < spec.k; ++s)
          if (inst.initial_positions[s] != loc) model.ub[model.flow_var(e, s)] = 0.0;
      } else {
        const auto it = multiplicity.find(loc);
        const double mult = it == multiplicity.end() ? 0.0 : it->second;
        model.lb[model.flow_var(e, 0)] = mult;
        model.ub[model.flow_var(e, 0)] = mult;
      }
    }
  }

  auto add_row = [&](std::string name, char cmp, double rhs) -> LinearRow& {
    model.rows.push_back({std::move(name), {}, cmp, rhs});
    return model.rows.back();
  };
  char nb[80];

  if (maxmin) {
    for (int i = 0; i < spec.k; ++i) {
      std::snprintf(nb, sizeof nb, "reward_s%d", i);
      auto& row = add_row(nb, '=', 0.0);
      row.terms.push_back({model.reward_var(i), 1.0});
      for (int e = 0; e < E; ++e)
        if (net.edges()[e].cost != 0)
          row.terms.push_back({model.flow_var(e, i),
                               -static_cast<double>(net.edges()[e].cost)});
    }
    for (int i = 0; i < spec.k; ++i) {
      std::snprintf(nb, sizeof nb, "floor_s%d", i);
      auto& row = add_row(nb, '<', 0.0);
      row.terms.push_back({model.minreward_var(), 1.0});
      row.terms.push_back({model.reward_var(i), -1.0});
    }
  }

  const int n_requests = n;
  for (int j = 0; j < n_requests; ++j) {
    std::snprintf(nb, sizeof nb, "pickup_r%d", j);
    auto& row = add_row(nb, '<', 1.0);
    for (int e : net.in_edges()[net.pickup_node(j)])
      for (int s = 0; s < spe; ++s) row.terms.push_back({model.flow_var(e, s), 1.0});
  }
  for (int j = 0; j < n_requests; ++j) {
    std::snprintf(nb, sizeof nb, "serve_r%d", j);
    auto& row = add_row(nb, '=', 1.0);
    row.terms.push_back({model.z_var(j), 1.0});
    for (int s = 0; s < spe; ++s)
      row.terms.push_back({model.flow_var(net.delivery_edge(j), s), 1.0});
  }

  const int node_count = static_cast<int>(net.nodes().size());
  for (int v = 0; v < node_count; ++v) {
    if (v == net.source_node() || v == net.sink_node()) continue;
    for (int s = 0; s < spe; ++s) {
      std::snprintf(nb, sizeof nb, spe > 1 ? "balance_n%d_s%d" : "balance_n%d", v, s);
      auto& row = add_row(nb, '=', 0.0);
      for (int e : net.out_edges()[v]) row.terms.push_back({model.flow_var(e, s), 1.0});
      for (int e : net.in_edges()[v]) row.terms.push_back({model.flow_var(e, s), -1.0});
    }
  }

  {
    auto& row = add_row("fleet_out", '=', static_cast<double>(spec.k));
    for (int e : net.out_edges()[net.source_node()])
      for (int s = 0; s < spe; ++s) row.terms.push_back({model.flow_var(e, s), 1.0});
  }
  {
    auto& row = add_row("fleet_in", '=', static_cast<double>(spec.k));
    for (int e : net.in_edges()[net.sink_node()])
      for (int s = 0; s < spe; ++s) row.terms.push_back({model.flow_var(e, s), 1.0});
  }

  if (spec.alpha && maxmin) {
    if (spec.alpha_form == TwoSidedForm::Prose) {
      auto& row = add_row("reward_cap", '<', 0.0);
      for (int i = 0; i < spec.k; ++i) row.terms.push_back({model.reward_var(i), 1.0});
      for (int j = 0; j < n_requests; ++j) {
        const int de = net.delivery_edge(j);
        const double c = static_cast<double>(net.edges()[de].cost);
        if (c == 0) continue;
        for (int s = 0; s < spe; ++s)
          row.terms.push_back({model.flow_var(de, s), -*spec.alpha * c});
      }
    } else {
      for (int j = 0; j < n_requests; ++j) {
        std::snprintf(nb, sizeof nb, "reward_cap_r%d", j);
        auto& row = add_row(nb, '<', 0.0);
        for (int i = 0; i < spec.k; ++i) row.terms.push_back({model.reward_var(i), 1.0});
        const int de = net.delivery_edge(j);
        for (int s = 0; s < spe; ++s)
          row.terms.push_back({model.flow_var(de, s), -*spec.alpha});
      }
    }
  }

  return model;
}

namespace {

std::string fmt_num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void append_term(std::string& line, bool first, double coef, const std::string& name) {
  if (first) {
    if (coef == 1.0) {
      line += name;
    } else if (coef == -1.0) {
      line += "- " + name;
    } else {
      line += fmt_num(coef) + " " + name;
    }
    return;
  }
  if (coef >= 0) {
    line += " + ";
    if (coef != 1.0) line += fmt_num(coef) + " ";
  } else {
    line += " - ";
    if (coef != -1.0) line += fmt_num(-coef) + " ";
  }
  line += name;
}

void flush_wrapped(std::ostringstream& os, std::string& line) {
  os << line << '\n';
  line.clear();
}

}  // namespace

std::string export_milp_text(const MilpModel& model) {
  std::ostringstream os;
  os << "\\ fairflow flow model\n";
  os << (model.maximize ? "Maximize\n" : "Minimize\n");
  {
    std::string line = " obj: ";
    bool first = true;
    for (int v = 0; v < model.num_vars; ++v) {
      if (model.obj_coef[v] == 0.0) continue;
      append_term(line, first, model.obj_coef[v], model.var_names[v]);
      first = false;
      if (line.size() > 200) {
        os << line << '\n';
        line = "   ";
      }
    }
    if (first) line += "0 " + model.var_names[0];
    flush_wrapped(os, line);
  }
  os << "Subject To\n";
  for (const auto& row : model.rows) {
    std::string line = " " + row.name + ": ";
    bool first = true;
    for (const auto& [v, c] : row.terms) {
      if (c == 0.0) continue;
      append_term(line, first, c, model.var_names[v]);
      first = false;
      if (line.size() > 200) {
        os << line << '\n';
        line = "   ";
      }
    }
    if (first) line += "0 " + model.var_names[0];
    line += row.cmp == '<' ? " <= " : (row.cmp == '>' ? " >= " : " = ");
    line += fmt_num(row.rhs);
    flush_wrapped(os, line);
  }
  os << "Bounds\n";
  for (int v = 0; v < model.num_vars; ++v) {
    if (model.is_binary[v]) continue;  // declared in the Binary section
    if (model.lb[v] == model.ub[v]) {
      os << ' ' << model.var_names[v] << " = " << fmt_num(model.lb[v]) << '\n';
    } else if (model.ub[v] >= 1e30) {
      if (model.lb[v] != 0.0)
        os << ' ' << model.var_names[v] << " >= " << fmt_num(model.lb[v]) << '\n';
      // default bounds [0, inf) need no line
    } else if (model.lb[v] == 0.0) {
      os << ' ' << model.var_names[v] << " <= " << fmt_num(model.ub[v]) << '\n';
    } else {
      os << ' ' << fmt_num(model.lb[v]) << " <= " << model.var_names[v] << " <= "
         << fmt_num(model.ub[v]) << '\n';
    }
  }
  os << "Binary\n";
  for (int v = 0; v < model.num_vars; ++v)
    if (model.is_binary[v]) os << ' ' << model.var_names[v] << '\n';
  os << "End\n";
  return os.str();
}

std::string write_solution_text(const MilpModel& model, const Solution& sol) {
  std::ostringstream os;
  char buf[64];
  auto put = [&](const std::string& name, double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    os << name << ' ' << buf << '\n';
  };
  os << "# fairflow solution\n";
  os << "# status "
     << (sol.status == SolveStatus::Optimal
             ? "Optimal"
             : (sol.status == SolveStatus::Infeasible ? "Infeasible" : "LimitReached"))
     << '\n';
  std::snprintf(buf, sizeof buf, "%.17g", sol.objective_value);
  os << "# objective " << buf << '\n';
  const int E = static_cast<int>(model.net->edges().size());
  for (int e = 0; e < E; ++e)
    for (int s = 0; s < model.servers_per_edge(); ++s) {
      const int v = model.flow_var(e, s);
      if (sol.flows[v] != 0.0) put(model.var_names[v], sol.flows[v]);
    }
  for (size_t j = 0; j < sol.z.size(); ++j)
    put(model.var_names[model.z_var(static_cast<int>(j))], sol.z[j]);
  if (model.spec.objective == MilpObjective::MaxMin) {
    for (int i = 0; i < model.spec.k; ++i)
      put(model.var_names[model.reward_var(i)], sol.rewards[i]);
    put("minR", sol.min_reward);
  }
  return os.str();
}

Solution parse_external_solution(const MilpModel& model, const std::string& text) {
  std::map<std::string, int> by_name;
  for (int v = 0; v < model.num_vars; ++v) by_name[model.var_names[v]] = v;

  std::vector<double> x(model.num_vars, 0.0);
  Solution sol;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) {
      // "# status X" comments are honored; everything else is ignored.
      std::istringstream cs(line.substr(hash + 1));
      std::string word;
      if (cs >> word && word == "status") {
        std::string status;
        if (cs >> status) {
          if (status == "Infeasible") sol.status = SolveStatus::Infeasible;
          else if (status == "LimitReached") sol.status = SolveStatus::LimitReached;
        }
      }
      line = line.substr(0, hash);
    }
    std::istringstream ls(line);
    std::string name;
    if (!(ls >> name)) continue;
    double value = 0.0;
    if (!(ls >> value))
      throw ParseError("solution line " + std::to_string(line_no) + ": missing value");
    const auto it = by_name.find(name);
    if (it == by_name.end())
      throw UnknownVariable("solution line " + std::to_string(line_no) +
                            ": unknown variable '" + name + "'");
    x[it->second] = value;
  }

  const double tol = 1e-6;
  for (int v = 0; v < model.num_vars; ++v) {
    if (x[v] < model.lb[v] - tol || x[v] > model.ub[v] + tol)
      throw ResidualTooLarge("variable " + model.var_names[v] + " violates its bounds");
    if (model.is_binary[v] && std::abs(x[v] - std::round(x[v])) > tol)
      throw ResidualTooLarge("binary variable " + model.var_names[v] + " is fractional");
  }

  const int E = static_cast<int>(model.net->edges().size());
  const int n = static_cast<int>(model.net->instance().requests.size());
  const int spe = model.servers_per_edge();
  sol.flows.assign(static_cast<size_t>(E) * spe, 0.0);
  for (int e = 0; e < E; ++e)
    for (int s = 0; s < spe; ++s) sol.flows[model.flow_var(e, s)] = x[model.flow_var(e, s)];
  sol.z.resize(n);
  for (int j = 0; j < n; ++j) {
    sol.z[j] = static_cast<int>(std::round(x[model.z_var(j)]));
    double served = x[model.z_var(j)];
    for (int s = 0; s < spe; ++s) served += sol.flows[model.flow_var(model.net->delivery_edge(j), s)];
    if (std::abs(served - 1.0) > tol)
      throw ResidualTooLarge("request " + std::to_string(j) +
                             ": serve-or-drop row residual exceeds 1e-6");
  }

  if (model.spec.objective == MilpObjective::MaxMin) {
    const auto report = extract_rewards(sol, *model.net, model.spec.k);
    for (int i = 0; i < model.spec.k; ++i) {
      const double claimed = x[model.reward_var(i)];
      if (claimed != 0.0 && std::abs(claimed - report.rewards[i]) > tol)
        throw ResidualTooLarge("reported reward m_s" + std::to_string(i) +
                               " does not match the flow values");
    }
    sol.rewards = report.rewards;
    const double claimed_min = x[model.minreward_var()];
    sol.min_reward = claimed_min != 0.0 ? claimed_min : report.min_reward;
    for (double r : sol.rewards)
      if (sol.min_reward > r + tol)
        throw ResidualTooLarge("minR exceeds a per-server reward");
  }

  double obj = 0.0;
  for (int e = 0; e < E; ++e)
    for (int s = 0; s < spe; ++s)
      obj += model.obj_coef[model.flow_var(e, s)] * sol.flows[model.flow_var(e, s)];
  for (int j = 0; j < n; ++j) obj += model.obj_coef[model.z_var(j)] * sol.z[j];
  if (model.spec.objective == MilpObjective::MaxMin)
    obj += model.obj_coef[model.minreward_var()] * sol.min_reward;
  sol.objective_value = obj;
  return sol;
}

RewardReport extract_rewards(const Solution& sol, const TimeExpandedNetwork& net, int k) {
  RewardReport report;
  const int E = static_cast<int>(net.edges().size());
  report.rewards.assign(k, 0.0);
  for (int e = 0; e < E; ++e) {
    const double c = static_cast<double>(net.edges()[e].cost);
    if (c == 0) continue;
    for (int s = 0; s < k; ++s)
      report.rewards[s] += c * sol.flows[static_cast<size_t>(e) * k + s];
  }
  report.min_reward = report.rewards.empty()
                          ? 0.0
                          : *std::min_element(report.rewards.begin(), report.rewards.end());
  for (size_t j = 0; j < sol.z.size(); ++j) {
    if (sol.z[j]) report.unserved.push_back(static_cast<int>(j));
    else report.served.push_back(static_cast<int>(j));
  }
  return report;
}

double total_movement_cost(const Solution& sol, const MilpModel& model) {
  double total = 0.0;
  const int E = static_cast<int>(model.net->edges().size());
  for (int e = 0; e < E; ++e) {
    const double c = static_cast<double>(model.net->edges()[e].cost);
    if (c == 0) continue;
    for (int s = 0; s < model.servers_per_edge(); ++s)
      total += c * sol.flows[model.flow_var(e, s)];
  }
  return total;
}

}  // namespace fairflow
