#include <cmath>
#include <sstream>

#include "doctest.h"
#include "netsynth/core_model.hpp"
#include "netsynth/csv.hpp"
#include "netsynth/errors.hpp"
#include "netsynth/random.hpp"

using namespace netsynth;

namespace {

DynamicMultigraph parse(const std::string& text, IngestStats* stats = nullptr, IngestOptions opts = {}) {
  std::istringstream in(text);
  return ingest_csv(in, opts, stats);
}

}  // namespace

TEST_CASE("ingest assigns node ids by first appearance and rebases time") {
  const auto g = parse(
      "src,dst,start_time,duration,port_protocol\n"
      "10.0.0.1,10.0.0.2,1000,5,443/tcp\n"
      "10.0.0.2,10.0.0.3,1010.5,0,53/udp\n"
      "10.0.0.1,10.0.0.2,1020,1,443/tcp\n");
  CHECK(g.node_count() == 3);
  CHECK(g.flow_count() == 3);
  CHECK(g.epoch() == 1000.0);
  CHECK(g.ip_map() == std::vector<std::string>{"10.0.0.1", "10.0.0.2", "10.0.0.3"});
  CHECK(g.flows()[1].src == 1);
  CHECK(g.flows()[1].dst == 2);
  CHECK(g.flows()[1].start_time == doctest::Approx(10.5));
  CHECK(g.label(g.flows()[2]) == "443/tcp");
  CHECK(g.max_end_time() == doctest::Approx(21.0));
}

TEST_CASE("ingest reads end times and split port/protocol columns") {
  IngestOptions opts;
  opts.schema.end = "end";
  opts.schema.port_protocol.clear();
  opts.schema.port = "port";
  opts.schema.protocol = "proto";
  const auto g = parse("start_time,end,src,dst,port,proto\n5,8,a,b,22,tcp\n", nullptr, opts);
  REQUIRE(g.flow_count() == 1);
  CHECK(g.flows()[0].duration == 3.0);
  CHECK(g.label(g.flows()[0]) == "22/tcp");
}

TEST_CASE("ingest rejects a missing column by name") {
  try {
    parse("src,dst,duration,port_protocol\na,b,1,x\n");
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    CHECK(std::string(e.what()) == "missing column 'start_time'");
  }
}

TEST_CASE("negative durations are rejected with a warning") {
  IngestStats stats;
  const auto g = parse("src,dst,start_time,duration,port_protocol\na,b,0,1,x\na,b,3,-2,x\n", &stats);
  CHECK(g.flow_count() == 1);
  CHECK(stats.rows_read == 2);
  CHECK(stats.rows_rejected == 1);
  REQUIRE(stats.warnings.size() == 1);
  CHECK(stats.warnings[0].find("negative duration") != std::string::npos);
}

TEST_CASE("empty input and malformed numbers are data errors") {
  CHECK_THROWS_AS(parse(""), DataError);
  CHECK_THROWS_AS(parse("src,dst,start_time,duration,port_protocol\na,b,1x,1,x\n"), DataError);
  CHECK_THROWS_AS(ingest_csv(std::filesystem::path("/nonexistent/flows.csv")), DataError);
}

TEST_CASE("known ips and a fixed epoch align a second dataset") {
  const std::vector<std::string> ips{"b", "a", "z"};
  IngestOptions opts;
  opts.known_ips = &ips;
  opts.epoch = 100.0;
  const auto g = parse("src,dst,start_time,duration,port_protocol\na,b,150,1,x\nc,a,100,0,x\n", nullptr, opts);
  CHECK(g.node_count() == 4);
  CHECK(g.flows()[0].src == 1);
  CHECK(g.flows()[0].dst == 0);
  CHECK(g.flows()[0].start_time == 50.0);
  CHECK(g.flows()[1].src == 3);
}

TEST_CASE("write then ingest reproduces the graph") {
  Rng rng(5);
  std::vector<NetflowRecord> flows;
  for (int i = 0; i < 200; ++i) {
    flows.push_back({static_cast<NodeId>(rng.index(6)), static_cast<NodeId>(rng.index(6)),
                     rng.uniform(0.0, 1e6) * (i > 0), rng.uniform(0.0, 100.0), static_cast<CategoryId>(rng.index(2))});
  }
  std::vector<std::string> ips{"h0", "h1", "h2", "h3", "h4", "h5"};
  const DynamicMultigraph g(6, flows, {"80/tcp", "a,b"}, ips, 1.7e9 + 0.25);
  std::ostringstream out;
  write_csv(g, out);
  IngestOptions opts;
  opts.known_ips = &ips;
  opts.epoch = g.epoch();
  std::istringstream in(out.str());
  const auto h = ingest_csv(in, opts);
  REQUIRE(h.flow_count() == g.flow_count());
  for (std::size_t i = 0; i < g.flow_count(); ++i) {
    CHECK(h.flows()[i].src == g.flows()[i].src);
    CHECK(h.flows()[i].dst == g.flows()[i].dst);
    CHECK(h.flows()[i].start_time == doctest::Approx(g.flows()[i].start_time).epsilon(1e-12).scale(1e9));
    CHECK(h.flows()[i].duration == g.flows()[i].duration);
    CHECK(h.label(h.flows()[i]) == g.label(g.flows()[i]));
  }
}

TEST_CASE("graph constructor validates flows") {
  CHECK_THROWS_AS(DynamicMultigraph(2, {{0, 2, 0, 1, 0}}, {"x"}), DataError);
  CHECK_THROWS_AS(DynamicMultigraph(2, {{0, 1, 0, -1, 0}}, {"x"}), DataError);
  CHECK_THROWS_AS(DynamicMultigraph(2, {{0, 1, 0, 1, 1}}, {"x"}), DataError);
  CHECK_THROWS_AS(DynamicMultigraph(2, {}, {"x"}, {"only-one"}), DataError);
  CHECK_NOTHROW(DynamicMultigraph(2, {{1, 1, 0, 0, 0}}, {"x"}));
}

TEST_CASE("static graph deduplicates and counts degrees") {
  const StaticGraph g(3, {{0, 1}, {0, 1}, {1, 0}, {2, 2}}, true);
  CHECK(g.edge_count() == 3);
  CHECK(g.contains(1, 0));
  CHECK_FALSE(g.contains(1, 2));
  CHECK(g.degrees() == std::vector<std::size_t>{2, 2, 2});
  const StaticGraph u(3, {{0, 1}, {1, 0}, {2, 1}}, false);
  CHECK(u.edge_count() == 2);
  CHECK(u.contains(1, 2));
  const auto nbr = undirected_neighbors(g);
  CHECK(nbr[0] == std::vector<NodeId>{1});
  CHECK(nbr[2].empty());
}

TEST_CASE("to_static keeps one edge per active pair") {
  const DynamicMultigraph g(3, {{0, 1, 0, 1, 0}, {0, 1, 5, 1, 0}, {2, 0, 1, 1, 0}}, {"x"});
  const auto s = to_static(g);
  CHECK(s.edge_count() == 2);
  CHECK(s.contains(2, 0));
}

TEST_CASE("daily tensor counts a flow on every day it touches") {
  const DynamicMultigraph g(2, {{0, 1, 10, 5, 0}, {0, 1, 95, 10, 0}, {1, 0, 200, 0, 0}}, {"x"});
  const auto t = daily_tensor(g, 100.0);
  REQUIRE(t.size() == 3);
  CHECK(t[0].at(0, 1) == 2.0);
  CHECK(t[1].at(0, 1) == 1.0);
  CHECK(t[2].at(1, 0) == 1.0);
  CHECK(t[2].total() == 1.0);
  CHECK(daily_tensor(DynamicMultigraph(2, {}, {})).empty());
  CHECK_THROWS_AS(daily_tensor(g, 0.0), PreconditionError);
}

TEST_CASE("csv helpers") {
  CHECK(csv::split_line("a,\"b,c\",\"d\"\"e\",") == csv::Row{"a", "b,c", "d\"e", ""});
  CHECK(csv::escape("a,b") == "\"a,b\"");
  CHECK(csv::escape("plain") == "plain");
  Rng rng(11);
  for (int i = 0; i < 1000; ++i) {
    const double x = std::ldexp(rng.uniform(-1.0, 1.0), static_cast<int>(rng.index(80)) - 40);
    CHECK(csv::parse_double(csv::format_double(x), "x") == x);
  }
  CHECK_THROWS_AS(csv::parse_double("", "x"), DataError);
  CHECK_THROWS_AS(csv::parse_double("1.5e", "x"), DataError);
}

TEST_CASE("rng is reproducible and unbiased in index") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());
  Rng r(1);
  std::vector<int> hits(3, 0);
  for (int i = 0; i < 30000; ++i) ++hits[r.index(3)];
  for (int h : hits) CHECK(std::abs(h - 10000) < 400);
  const std::vector<double> cumulative{0.0, 1.0, 1.0};
  for (int i = 0; i < 100; ++i) CHECK(r.categorical(cumulative) == 1);
}
