#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "fairflow/instance.hpp"
#include "fairflow/metric.hpp"

using namespace fairflow;

namespace {

bool has_violation(const std::vector<Violation>& v, const std::string& needle) {
  return std::any_of(v.begin(), v.end(), [&](const Violation& x) {
    return x.reason.find(needle) != std::string::npos;
  });
}

Instance small_valid_instance() {
  Instance inst;
  inst.metric = gen_star({2, 3});
  inst.k = 1;
  inst.initial_positions = {0};
  inst.requests = {{0, 0, 1, 0, 4}, {1, 0, 2, 6, 10}};
  inst.horizon = 13;
  inst.refresh_source_set();
  return inst;
}

}  // namespace

TEST_CASE("validate accepts a clean instance and flags each corruption") {
  Instance base = small_valid_instance();
  REQUIRE(validate(base).empty());

  Instance inst = base;
  inst.k = 0;
  CHECK(has_violation(validate(inst), "k must be >= 1"));

  inst = base;
  inst.initial_positions = {0, 1};
  CHECK(has_violation(validate(inst), "initial_positions size"));

  inst = base;
  inst.initial_positions = {9};
  CHECK(has_violation(validate(inst), "initial position out of range"));

  inst = base;
  inst.eta = 0.0;
  CHECK(has_violation(validate(inst), "eta"));

  inst = base;
  inst.speed = -1.0;
  CHECK(has_violation(validate(inst), "speed"));

  inst = base;
  inst.requests[0].source = 7;
  CHECK(has_violation(validate(inst), "source out of range"));
  CHECK(has_violation(validate(inst), "source_set"));

  inst = base;
  inst.requests[0].dest = -1;
  CHECK(has_violation(validate(inst), "dest out of range"));

  inst = base;
  inst.requests[0].t_begin = 3;
  inst.requests[0].t_end = 1;
  CHECK(has_violation(validate(inst), "window is inverted"));

  inst = base;
  inst.horizon = 5;  // request 1 finishes at 10 + 3
  CHECK(has_violation(validate(inst), "within the horizon"));

  inst = base;
  std::swap(inst.requests[0], inst.requests[1]);
  CHECK(has_violation(validate(inst), "not sorted"));

  inst = base;
  inst.requests[1].t_begin = 0;
  inst.requests[1].t_end = 4;
  CHECK(has_violation(validate(inst), "collides"));

  inst = base;
  inst.source_set = {1};
  CHECK(has_violation(validate(inst), "source_set"));
}

TEST_CASE("synthetic generator: valid, deterministic, distinct windows") {
  MetricSpace ms = gen_erdos_renyi(30, 0.3, 1, 10, 11);
  Instance a = gen_synthetic(ms, 40, 200, {0, 150}, {5, 30}, 4, 77);
  CHECK(validate(a).empty());
  REQUIRE(a.requests.size() == 40u);
  CHECK(a.k == 4);

  std::set<Timestep> begins, ends;
  for (const auto& r : a.requests) {
    CHECK(r.source != r.dest);
    CHECK(r.t_begin >= 0);
    CHECK(r.t_end - r.t_begin >= 5);
    CHECK(r.t_end - r.t_begin <= 30);
    CHECK(r.t_end + a.travel_steps(r.source, r.dest) <= a.horizon);
    begins.insert(r.t_begin);
    ends.insert(r.t_end);
  }
  CHECK(begins.size() == 40u);
  CHECK(ends.size() == 40u);
  for (size_t j = 0; j + 1 < a.requests.size(); ++j)
    CHECK(a.requests[j].t_begin < a.requests[j + 1].t_begin);

  Instance b = gen_synthetic(ms, 40, 200, {0, 150}, {5, 30}, 4, 77);
  std::ostringstream sa, sb;
  save_instance(a, sa);
  save_instance(b, sb);
  CHECK(sa.str() == sb.str());

  Instance c = gen_synthetic(ms, 40, 200, {0, 150}, {5, 30}, 4, 78);
  std::ostringstream sc;
  save_instance(c, sc);
  CHECK(sa.str() != sc.str());
}

TEST_CASE("synthetic generator throws when the ranges cannot host the workload") {
  MetricSpace ms = gen_star({1});
  // Only three distinct arrival timesteps exist; five requests cannot fit.
  CHECK_THROWS_AS(gen_synthetic(ms, 5, 50, {0, 2}, {1, 1}, 1, 3), RangeExhausted);
  CHECK_THROWS_AS(gen_synthetic(ms, 0, 50, {0, 2}, {1, 1}, 1, 3), InvalidParameter);
  CHECK_THROWS_AS(gen_synthetic(ms, 1, 50, {0, 2}, {0, 1}, 1, 3), InvalidParameter);
  CHECK_THROWS_AS(gen_synthetic(ms, 1, 50, {0, 2}, {1, 1}, 0, 3), InvalidParameter);
  CHECK_THROWS_AS(gen_synthetic(ms, 1, 5, {0, 20}, {1, 1}, 1, 3), InvalidParameter);
}

TEST_CASE("partition generator: hub-to-leaf workload every server can interleave") {
  Instance inst = gen_partition_instance({1, 2, 3}, 2, 0);
  CHECK(validate(inst).empty());
  CHECK(inst.metric.node_count() == 4);
  CHECK(inst.k == 2);
  CHECK(inst.initial_positions == std::vector<NodeId>{0, 0});
  REQUIRE(inst.requests.size() == 3u);
  for (size_t j = 0; j < 3; ++j) {
    const Request& r = inst.requests[j];
    CHECK(r.source == 0);
    CHECK(r.dest == static_cast<NodeId>(j + 1));
    CHECK(r.t_end - r.t_begin == 6);  // 2 * max distance
    if (j > 0) CHECK(r.t_begin - inst.requests[j - 1].t_begin == 6);
  }
  CHECK(inst.horizon == inst.requests.back().t_end + 3);

  Instance slack = gen_partition_instance({2, 2}, 2, 4);
  CHECK(slack.requests[1].t_begin - slack.requests[0].t_begin == 8);
  CHECK_THROWS_AS(gen_partition_instance({}, 1, 0), EmptyInput);
}

TEST_CASE("instance json round trip is lossless and byte-stable") {
  Instance inst = small_valid_instance();
  inst.speed = 2.0;
  inst.eta = 0.5;
  std::ostringstream first;
  save_instance(inst, first);

  std::istringstream in(first.str());
  Instance back = load_instance(in);
  std::ostringstream second;
  save_instance(back, second);
  CHECK(first.str() == second.str());
  CHECK(back.k == inst.k);
  CHECK(back.speed == inst.speed);
  CHECK(back.eta == inst.eta);
  CHECK(back.horizon == inst.horizon);
  CHECK(back.source_set == inst.source_set);
  REQUIRE(back.requests.size() == inst.requests.size());
  for (size_t j = 0; j < inst.requests.size(); ++j) {
    CHECK(back.requests[j].source == inst.requests[j].source);
    CHECK(back.requests[j].dest == inst.requests[j].dest);
    CHECK(back.requests[j].t_begin == inst.requests[j].t_begin);
    CHECK(back.requests[j].t_end == inst.requests[j].t_end);
  }
}

TEST_CASE("instance json: version gate, unknown fields, speed default") {
  Instance inst = small_valid_instance();
  std::ostringstream out;
  save_instance(inst, out);
  std::string text = out.str();

  {
    std::string bad = text;
    bad.replace(bad.find("\"version\": 1"), 12, "\"version\": 2");
    std::istringstream in(bad);
    CHECK_THROWS_AS(load_instance(in), SchemaVersionMismatch);
  }
  {
    std::string bad = text;
    bad.replace(bad.find("\"k\":"), 4, "\"kk\":");
    std::istringstream in(bad);
    CHECK_THROWS_AS(load_instance(in), ParseError);
  }
  {
    // Drop the "speed" line entirely: loads with a warning, speed == 1.
    std::string trimmed = text;
    size_t pos = trimmed.find("  \"speed\":");
    REQUIRE(pos != std::string::npos);
    size_t eol = trimmed.find('\n', pos);
    trimmed.erase(pos, eol - pos + 1);
    std::istringstream in(trimmed);
    std::vector<std::string> warnings;
    Instance lenient = load_instance(in, &warnings);
    CHECK(lenient.speed == 1.0);
    REQUIRE(warnings.size() == 1u);
    CHECK(warnings[0].find("speed") != std::string::npos);
  }
  {
    std::istringstream in("{\"version\": 1}");
    CHECK_THROWS_AS(load_instance(in), ParseError);
  }
  {
    std::istringstream in("not json");
    CHECK_THROWS_AS(load_instance(in), ParseError);
  }
  {
    std::istringstream in("{}");
    CHECK_THROWS_AS(load_instance(in), SchemaVersionMismatch);
  }
}

TEST_CASE("csv ingestion: ordering, collision shifts, default horizon") {
  MetricSpace ms = gen_star({2, 3, 4});
  std::istringstream in(
      "order_id,source_node,dest_node,arrival_ts,pickup_deadline_ts\n"
      "10,0,1,5,9\n"
      "11,1,2,0,4\n"
      "12,0,3,5,12\n");
  std::vector<std::string> warnings;
  Instance inst = ingest_csv(in, ms, 2, {0, 0}, 1.0, 1.0, std::nullopt, &warnings);

  REQUIRE(inst.requests.size() == 3u);
  // Sorted by arrival; the duplicate arrival 5 is shifted to 6 keeping the
  // window length intact.
  CHECK(inst.requests[0].id == 11);
  CHECK(inst.requests[1].id == 10);
  CHECK(inst.requests[2].id == 12);
  CHECK(inst.requests[1].t_begin == 5);
  CHECK(inst.requests[2].t_begin == 6);
  CHECK(inst.requests[2].t_end == 13);
  REQUIRE(warnings.size() == 1u);
  CHECK(warnings[0].find("order 12") != std::string::npos);
  CHECK(warnings[0].find("1 timestep") != std::string::npos);

  // Horizon defaults to the latest completion: request 12 ends 13 + dist(0,3)=4.
  CHECK(inst.horizon == 17);
  CHECK(validate(inst).empty());
}

TEST_CASE("csv ingestion rejects malformed input") {
  MetricSpace ms = gen_star({1});
  std::istringstream bad_header("id,src\n1,2\n");
  CHECK_THROWS_AS(ingest_csv(bad_header, ms, 1, {0}, 1.0, 1.0), ParseError);

  std::istringstream bad_cell(
      "order_id,source_node,dest_node,arrival_ts,pickup_deadline_ts\n"
      "1,0,1,zero,4\n");
  CHECK_THROWS_AS(ingest_csv(bad_cell, ms, 1, {0}, 1.0, 1.0), ParseError);

  std::istringstream short_row(
      "order_id,source_node,dest_node,arrival_ts,pickup_deadline_ts\n"
      "1,0,1,4\n");
  CHECK_THROWS_AS(ingest_csv(short_row, ms, 1, {0}, 1.0, 1.0), ParseError);

  std::istringstream no_rows("order_id,source_node,dest_node,arrival_ts,pickup_deadline_ts\n");
  CHECK_THROWS_AS(ingest_csv(no_rows, ms, 1, {0}, 1.0, 1.0), ParseError);

  std::istringstream empty("");
  CHECK_THROWS_AS(ingest_csv(empty, ms, 1, {0}, 1.0, 1.0), ParseError);
}

TEST_CASE("csv ingestion tolerates CRLF line endings and explicit horizon") {
  MetricSpace ms = gen_star({2});
  std::istringstream in(
      "order_id,source_node,dest_node,arrival_ts,pickup_deadline_ts\r\n"
      "1,0,1,0,5\r\n");
  Instance inst = ingest_csv(in, ms, 1, {0}, 1.0, 1.0, Timestep{40});
  CHECK(inst.horizon == 40);
  CHECK(inst.requests[0].t_end == 5);
}
