#include "fairflow/instance.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fairflow/rng.hpp"

namespace fairflow {

void Instance::refresh_source_set() {
  std::set<NodeId> s;
  for (const auto& r : requests) s.insert(r.source);
  source_set.assign(s.begin(), s.end());
}

std::vector<Violation> validate(const Instance& inst) {
  std::vector<Violation> out;
  const int m = inst.metric.node_count();

  if (inst.k < 1) out.push_back({-1, "k must be >= 1"});
  if (static_cast<int>(inst.initial_positions.size()) != inst.k)
    out.push_back({-1, "initial_positions size must equal k"});
  for (NodeId p : inst.initial_positions) {
    if (p < 0 || p >= m) out.push_back({-1, "initial position out of range"});
  }
  if (inst.eta <= 0) out.push_back({-1, "eta must be positive"});
  if (inst.speed <= 0) out.push_back({-1, "speed must be positive"});
  if (inst.horizon < 0) out.push_back({-1, "horizon must be non-negative"});

  std::set<Timestep> arrivals;
  Timestep prev_begin = -1;
  for (const auto& r : inst.requests) {
    if (r.source < 0 || r.source >= m) out.push_back({r.id, "source out of range"});
    if (r.dest < 0 || r.dest >= m) out.push_back({r.id, "dest out of range"});
    if (r.t_begin < 0) out.push_back({r.id, "t_begin must be >= 0"});
    if (r.t_end < r.t_begin) out.push_back({r.id, "window is inverted"});
    if (r.source >= 0 && r.source < m && r.dest >= 0 && r.dest < m) {
      if (r.t_end + inst.travel_steps(r.source, r.dest) > inst.horizon)
        out.push_back({r.id, "delivery cannot complete within the horizon"});
    }
    if (r.t_begin < prev_begin) out.push_back({r.id, "requests not sorted by arrival"});
    prev_begin = r.t_begin;
    if (!arrivals.insert(r.t_begin).second)
      out.push_back({r.id, "arrival timestep collides with another request"});
  }

  std::set<NodeId> sources;
  for (const auto& r : inst.requests) sources.insert(r.source);
  std::vector<NodeId> expected(sources.begin(), sources.end());
  if (inst.source_set != expected)
    out.push_back({-1, "source_set does not match the request sources"});

  return out;
}

Instance gen_synthetic(const MetricSpace& metric, int n_requests, Timestep horizon,
                       std::pair<Timestep, Timestep> arrival_range,
                       std::pair<Timestep, Timestep> prep_range, int k, uint64_t seed) {
  if (n_requests < 1) throw InvalidParameter("gen_synthetic: n_requests must be >= 1");
  if (k < 1) throw InvalidParameter("gen_synthetic: k must be >= 1");
  if (metric.node_count() < 2)
    throw InvalidParameter("gen_synthetic: metric needs at least two nodes");
  const auto [arr_lo, arr_hi] = arrival_range;
  const auto [prep_lo, prep_hi] = prep_range;
  if (arr_lo < 0 || arr_lo > arr_hi) throw InvalidParameter("gen_synthetic: bad arrival range");
  if (prep_lo < 1 || prep_lo > prep_hi) throw InvalidParameter("gen_synthetic: bad prep range");
  if (arr_hi > horizon) throw InvalidParameter("gen_synthetic: arrivals beyond horizon");

  Rng rng(seed);
  const int m = metric.node_count();

  Instance inst;
  inst.metric = metric;
  inst.k = k;
  inst.horizon = horizon;
  inst.eta = 1.0;
  inst.speed = 1.0;

  std::set<Timestep> used_begin, used_end;
  const int64_t max_attempts = 10000;
  for (int j = 0; j < n_requests; ++j) {
    bool placed = false;
    for (int64_t attempt = 0; attempt < max_attempts && !placed; ++attempt) {
      NodeId s = static_cast<NodeId>(rng.below(m));
      NodeId d = static_cast<NodeId>(rng.below(m));
      if (s == d) continue;
      Timestep prep = rng.uniform_int(prep_lo, prep_hi);
      if (arr_hi - prep < arr_lo) continue;
      Timestep tb = rng.uniform_int(arr_lo, arr_hi - prep);
      Timestep te = tb + prep;
      if (used_begin.count(tb) || used_end.count(te)) continue;
      if (te + inst.steps_for_distance(static_cast<double>(metric.dist(s, d))) > horizon)
        continue;
      used_begin.insert(tb);
      used_end.insert(te);
      inst.requests.push_back({0, s, d, tb, te});
      placed = true;
    }
    if (!placed)
      throw RangeExhausted("gen_synthetic: could not place request " + std::to_string(j));
  }

  for (int i = 0; i < k; ++i)
    inst.initial_positions.push_back(static_cast<NodeId>(rng.below(m)));

  std::sort(inst.requests.begin(), inst.requests.end(),
            [](const Request& a, const Request& b) { return a.t_begin < b.t_begin; });
  for (size_t j = 0; j < inst.requests.size(); ++j)
    inst.requests[j].id = static_cast<int>(j);

  inst.refresh_source_set();
  return inst;
}

Instance gen_partition_instance(const std::vector<Dist>& d_values, int k, Timestep slack) {
  if (d_values.empty()) throw EmptyInput("gen_partition_instance: empty d_values");
  if (k < 1) throw InvalidParameter("gen_partition_instance: k must be >= 1");
  if (slack < 0) throw InvalidParameter("gen_partition_instance: slack must be >= 0");

  Instance inst;
  inst.metric = gen_star(d_values);
  inst.k = k;
  inst.eta = 1.0;
  inst.speed = 1.0;
  inst.initial_positions.assign(k, 0);

  const Dist max_d = *std::max_element(d_values.begin(), d_values.end());
  const Timestep spacing = 2 * max_d + slack;
  for (size_t j = 0; j < d_values.size(); ++j) {
    Request r;
    r.id = static_cast<int>(j);
    r.source = 0;
    r.dest = static_cast<NodeId>(j + 1);
    r.t_begin = static_cast<Timestep>(j) * spacing;
    r.t_end = r.t_begin + 2 * max_d;
    inst.requests.push_back(r);
  }
  inst.horizon = inst.requests.back().t_end + max_d;
  inst.refresh_source_set();
  return inst;
}

namespace {

void require_fields(const nlohmann::json& j, const char* what,
                    const std::vector<std::string>& required,
                    const std::vector<std::string>& optional = {}) {
  for (const auto& [key, _] : j.items()) {
    bool known = std::find(required.begin(), required.end(), key) != required.end() ||
                 std::find(optional.begin(), optional.end(), key) != optional.end();
    if (!known)
      throw ParseError(std::string(what) + ": unknown field '" + key + "'");
  }
  for (const auto& key : required) {
    if (!j.contains(key))
      throw ParseError(std::string(what) + ": missing field '" + key + "'");
  }
}

}  // namespace

void save_instance(const Instance& inst, std::ostream& out) {
  nlohmann::ordered_json j;
  j["version"] = 1;
  nlohmann::ordered_json metric;
  metric["nodes"] = inst.metric.node_count();
  auto arr = nlohmann::ordered_json::array();
  for (const auto& e : inst.metric.edges()) arr.push_back({e.u, e.v, e.w});
  metric["edges"] = std::move(arr);
  j["metric"] = std::move(metric);
  j["k"] = inst.k;
  j["initial_positions"] = inst.initial_positions;
  j["eta"] = inst.eta;
  j["horizon"] = inst.horizon;
  j["speed"] = inst.speed;
  auto reqs = nlohmann::ordered_json::array();
  for (const auto& r : inst.requests) {
    nlohmann::ordered_json rj;
    rj["id"] = r.id;
    rj["source"] = r.source;
    rj["dest"] = r.dest;
    rj["t_begin"] = r.t_begin;
    rj["t_end"] = r.t_end;
    reqs.push_back(std::move(rj));
  }
  j["requests"] = std::move(reqs);
  out << j.dump(2) << '\n';
}

Instance load_instance(std::istream& in, std::vector<std::string>* warnings) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("instance json: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("instance json: top level must be an object");

  if (!j.contains("version") || !j["version"].is_number_integer())
    throw SchemaVersionMismatch("instance json: missing integer field 'version'");
  if (j["version"].get<int>() != 1)
    throw SchemaVersionMismatch("instance json: unsupported version " +
                                std::to_string(j["version"].get<int>()));

  require_fields(j, "instance json",
                 {"version", "metric", "k", "initial_positions", "eta", "horizon", "requests"},
                 {"speed"});

  const auto& mj = j["metric"];
  if (!mj.is_object()) throw ParseError("instance json: 'metric' must be an object");
  require_fields(mj, "instance json metric", {"nodes", "edges"});
  if (!mj["nodes"].is_number_integer() || !mj["edges"].is_array())
    throw ParseError("instance json: metric must have integer 'nodes' and array 'edges'");
  std::vector<WeightedEdge> edges;
  for (const auto& item : mj["edges"]) {
    if (!item.is_array() || item.size() != 3 || !item[0].is_number_integer() ||
        !item[1].is_number_integer() || !item[2].is_number_integer())
      throw ParseError("instance json: each edge must be [u, v, w] with integers");
    edges.push_back({item[0].get<NodeId>(), item[1].get<NodeId>(), item[2].get<Dist>()});
  }

  Instance inst;
  inst.metric = MetricSpace::build(mj["nodes"].get<int>(), std::move(edges));

  if (!j["k"].is_number_integer()) throw ParseError("instance json: 'k' must be an integer");
  inst.k = j["k"].get<int>();
  if (!j["initial_positions"].is_array())
    throw ParseError("instance json: 'initial_positions' must be an array");
  for (const auto& p : j["initial_positions"]) {
    if (!p.is_number_integer())
      throw ParseError("instance json: initial positions must be integers");
    inst.initial_positions.push_back(p.get<NodeId>());
  }
  if (!j["eta"].is_number()) throw ParseError("instance json: 'eta' must be a number");
  inst.eta = j["eta"].get<double>();
  if (!j["horizon"].is_number_integer())
    throw ParseError("instance json: 'horizon' must be an integer");
  inst.horizon = j["horizon"].get<Timestep>();
  if (j.contains("speed")) {
    if (!j["speed"].is_number()) throw ParseError("instance json: 'speed' must be a number");
    inst.speed = j["speed"].get<double>();
  } else {
    inst.speed = 1.0;
    if (warnings) warnings->push_back("instance json: 'speed' missing, defaulted to 1");
  }

  if (!j["requests"].is_array())
    throw ParseError("instance json: 'requests' must be an array");
  for (const auto& rj : j["requests"]) {
    if (!rj.is_object()) throw ParseError("instance json: each request must be an object");
    require_fields(rj, "instance json request", {"id", "source", "dest", "t_begin", "t_end"});
    for (const char* f : {"id", "source", "dest", "t_begin", "t_end"}) {
      if (!rj[f].is_number_integer())
        throw ParseError(std::string("instance json: request field '") + f +
                         "' must be an integer");
    }
    inst.requests.push_back({rj["id"].get<int>(), rj["source"].get<NodeId>(),
                             rj["dest"].get<NodeId>(), rj["t_begin"].get<Timestep>(),
                             rj["t_end"].get<Timestep>()});
  }

  inst.refresh_source_set();
  return inst;
}

void save_instance_file(const Instance& inst, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  save_instance(inst, out);
}

Instance load_instance_file(const std::string& path, std::vector<std::string>* warnings) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open for reading: " + path);
  return load_instance(in, warnings);
}

Instance ingest_csv(std::istream& in, const MetricSpace& metric, int k,
                    std::vector<NodeId> initial_positions, double eta, double speed,
                    std::optional<Timestep> horizon, std::vector<std::string>* warnings) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("csv: empty input");
  auto strip = [](std::string s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.pop_back();
    size_t i = 0;
    while (i < s.size() && s[i] == ' ') ++i;
    return s.substr(i);
  };
  if (strip(line) != "order_id,source_node,dest_node,arrival_ts,pickup_deadline_ts")
    throw ParseError("csv: unexpected header '" + strip(line) + "'");

  Instance inst;
  inst.metric = metric;
  inst.k = k;
  inst.initial_positions = std::move(initial_positions);
  inst.eta = eta;
  inst.speed = speed;

  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip(line);
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<int64_t> vals;
    while (std::getline(ss, cell, ',')) {
      try {
        vals.push_back(std::stoll(strip(cell)));
      } catch (const std::exception&) {
        throw ParseError("csv line " + std::to_string(line_no) + ": not an integer: " + cell);
      }
    }
    if (vals.size() != 5)
      throw ParseError("csv line " + std::to_string(line_no) + ": expected 5 columns");
    inst.requests.push_back({static_cast<int>(vals[0]), static_cast<NodeId>(vals[1]),
                             static_cast<NodeId>(vals[2]), vals[3], vals[4]});
  }
  if (inst.requests.empty()) throw ParseError("csv: no data rows");

  std::stable_sort(inst.requests.begin(), inst.requests.end(),
                   [](const Request& a, const Request& b) { return a.t_begin < b.t_begin; });
  // Collided arrivals are moved forward in time, keeping their window length.
  Timestep prev = -1;
  for (auto& r : inst.requests) {
    if (r.t_begin <= prev) {
      const Timestep delta = prev + 1 - r.t_begin;
      r.t_begin += delta;
      r.t_end += delta;
      if (warnings)
        warnings->push_back("csv: order " + std::to_string(r.id) + " shifted forward by " +
                            std::to_string(delta) + " timestep(s)");
    }
    prev = r.t_begin;
  }

  if (horizon) {
    inst.horizon = *horizon;
  } else {
    Timestep h = 0;
    for (const auto& r : inst.requests) {
      if (r.source >= 0 && r.source < metric.node_count() && r.dest >= 0 &&
          r.dest < metric.node_count())
        h = std::max(h, r.t_end + inst.travel_steps(r.source, r.dest));
      else
        h = std::max(h, r.t_end);
    }
    inst.horizon = h;
  }

  inst.refresh_source_set();
  return inst;
}

}  // namespace fairflow
