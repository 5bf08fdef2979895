#include <random>
#include <sstream>

#include "doctest.h"
#include "flowdir/errors.hpp"
#include "flowdir/tntp.hpp"
#include "support.hpp"

using namespace flowdir;

namespace {

const std::string kHeader =
    "<NUMBER OF ZONES> 3\n<NUMBER OF NODES> 3\n<FIRST THRU NODE> 1\n<NUMBER OF LINKS> 2\n<END OF METADATA>\n\n";

std::string data_file(const char* name) { return std::string(FLOWDIR_DATA_DIR) + "/" + name; }

}  // namespace

TEST_CASE("first Sioux Falls arc row") {
  const auto net = tntp::parse_network(
      "<NUMBER OF LINKS> 1\n<END OF METADATA>\n~ header comment ;\n1 2 25900.2 6 6 0.15 4 0 0 1 ;\n");
  REQUIRE(net.arcs.size() == 1);
  const auto& a = net.arcs[0];
  CHECK(a.init_node == 1);
  CHECK(a.term_node == 2);
  CHECK(a.capacity == 25900.2);
  CHECK(a.free_flow_time == 6);
  CHECK(a.bpr_b == 0.15);
  CHECK(a.bpr_power == 4);
  CHECK(net.metadata_int("NUMBER OF LINKS") == 1);
}

TEST_CASE("full Sioux Falls files") {
  const auto net = tntp::load_network(data_file("SiouxFalls_net.tntp"));
  CHECK(net.arcs.size() == 76);
  CHECK(net.nodes().size() == 24);

  const auto trips = tntp::load_trips(data_file("SiouxFalls_trips.tntp"));
  CHECK(trips.total() == doctest::Approx(360600.0).epsilon(1e-12));
  CHECK(trips.at(1, 2) == 100.0);
  CHECK(trips.at(1, 1) == 0.0);
}

TEST_CASE("empty inputs") {
  const auto net = tntp::parse_network("<NUMBER OF LINKS> 0\n<END OF METADATA>\n");
  CHECK(net.arcs.empty());

  const auto trips = tntp::parse_trips("<NUMBER OF ZONES> 2\n<END OF METADATA>\n");
  CHECK(trips.entries().empty());
  CHECK(trips.total() == 0.0);
}

TEST_CASE("trips block") {
  const auto trips = tntp::parse_trips("<NUMBER OF ZONES> 6\n<END OF METADATA>\nOrigin 5\n  6 : 200.0;\n");
  CHECK(trips.at(5, 6) == 200.0);
  CHECK(trips.at(6, 5) == 0.0);
}

TEST_CASE("parse errors carry line numbers") {
  SUBCASE("wrong field count") {
    try {
      tntp::parse_network(kHeader + "1 2 100 1 1 0.15 4 0 0 1 ;\n2 3 100 1 1 0.15 ;\n");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 8);
      CHECK(std::string(e.what()).find("line 8") != std::string::npos);
    }
  }
  SUBCASE("non-numeric field") {
    CHECK_THROWS_AS(tntp::parse_network(kHeader + "1 2 abc 1 1 0.15 4 0 0 1 ;\n2 3 100 1 1 0.15 4 0 0 1 ;\n"),
                    ParseError);
  }
  SUBCASE("missing end of metadata") {
    CHECK_THROWS_AS(tntp::parse_network("<NUMBER OF LINKS> 0\n1 2 100 1 1 0.15 4 0 0 1 ;\n"), DataError);
  }
  SUBCASE("link count mismatch") {
    CHECK_THROWS_AS(tntp::parse_network(kHeader + "1 2 100 1 1 0.15 4 0 0 1 ;\n"), DataError);
  }
  SUBCASE("duplicate trip pair") {
    CHECK_THROWS_AS(tntp::parse_trips("<END OF METADATA>\nOrigin 1\n 2 : 5; 2 : 6;\n"), ParseError);
  }
  SUBCASE("negative trips") {
    CHECK_THROWS_AS(tntp::parse_trips("<END OF METADATA>\nOrigin 1\n 2 : -5;\n"), ParseError);
  }
}

TEST_CASE("network round trip") {
  const auto net = tntp::load_network(data_file("SiouxFalls_net.tntp"));
  CHECK(tntp::parse_network(tntp::to_tntp(net)) == net);

  // Random datasets with awkward doubles.
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.001, 1e5);
  for (int round = 0; round < 20; ++round) {
    tntp::NetworkDataset ds;
    for (NodeId a = 1; a <= 5; ++a)
      for (NodeId b = 1; b <= 5; ++b)
        if (a != b && rng() % 2)
          ds.arcs.push_back({a, b, u(rng), u(rng), u(rng), 0.15, 4, 0, 0, 1});
    ds.metadata = {{"NUMBER OF NODES", "5"}, {"NUMBER OF LINKS", std::to_string(ds.arcs.size())}};
    CHECK(tntp::parse_network(tntp::to_tntp(ds)) == ds);
  }
}

TEST_CASE("trips round trip") {
  const auto trips = tntp::load_trips(data_file("SiouxFalls_trips.tntp"));
  CHECK(tntp::parse_trips(tntp::to_tntp(trips)) == trips);
}

TEST_CASE("case-study extraction") {
  const auto sub = testing::sioux_falls_subnet();
  const std::vector<std::pair<NodeId, NodeId>> expected = {{5, 6},  {5, 9},   {6, 8},   {8, 9},  {8, 16},
                                                           {9, 10}, {10, 16}, {10, 17}, {16, 17}};
  REQUIRE(sub.links.size() == expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) {
    CHECK(sub.links[i].a == expected[i].first);
    CHECK(sub.links[i].b == expected[i].second);
    CHECK_FALSE(sub.links[i].mirrored);
  }
  CHECK(sub.nodes == std::vector<NodeId>{5, 6, 8, 9, 10, 16, 17});
  // Demand restricted to the selection; every off-diagonal pair is positive here.
  CHECK(sub.demand.entries().size() == 42);
  const auto full = tntp::load_trips(data_file("SiouxFalls_trips.tntp"));
  CHECK(sub.demand.total() <= full.total());
  CHECK(sub.demand.at(9, 5) == full.at(9, 5));
}

TEST_CASE("extraction is order invariant and covers the full network") {
  const auto net = tntp::load_network(data_file("SiouxFalls_net.tntp"));
  const auto trips = tntp::load_trips(data_file("SiouxFalls_trips.tntp"));
  std::vector<NodeId> shuffled{17, 5, 10, 9, 16, 8, 6};
  CHECK(tntp::extract_subnetwork(net, trips, shuffled).links.size() == 9);

  std::vector<NodeId> all;
  for (NodeId i = 1; i <= 24; ++i) all.push_back(i);
  const auto whole = tntp::extract_subnetwork(net, trips, all);
  CHECK(whole.links.size() == 38);
  CHECK(whole.demand.total() == doctest::Approx(trips.total()));
}

TEST_CASE("extraction errors") {
  const auto net = tntp::load_network(data_file("SiouxFalls_net.tntp"));
  const auto trips = tntp::load_trips(data_file("SiouxFalls_trips.tntp"));
  CHECK_THROWS_WITH_AS(tntp::extract_subnetwork(net, trips, std::vector<NodeId>{1, 24}),
                       doctest::Contains("disconnected selection"), DataError);
  CHECK_THROWS_AS(tntp::extract_subnetwork(net, trips, std::vector<NodeId>{5}), DataError);
  CHECK_THROWS_AS(tntp::extract_subnetwork(net, trips, std::vector<NodeId>{}), DataError);
  CHECK_THROWS_AS(tntp::extract_subnetwork(net, trips, std::vector<NodeId>{5, 99}), DataError);
}

TEST_CASE("one-way source arcs are mirrored and flagged") {
  const auto net = tntp::parse_network(
      "<NUMBER OF LINKS> 2\n<END OF METADATA>\n1 2 100 3 3 0.15 4 0 0 1 ;\n2 3 50 2 2 0.15 4 0 0 1 ;\n");
  const auto sub = tntp::extract_subnetwork(net, DemandMatrix{}, std::vector<NodeId>{1, 2, 3});
  REQUIRE(sub.links.size() == 2);
  CHECK(sub.links[0].mirrored);
  CHECK(sub.links[0].backward == sub.links[0].forward);
  CHECK(sub.links[0].forward.capacity == 100);
}

TEST_CASE("subnetwork written back as TNTP") {
  const auto sub = testing::sioux_falls_subnet();
  const auto ds = tntp::parse_network(tntp::to_tntp(tntp::to_dataset(sub)));
  CHECK(ds.arcs.size() == 18);
  const auto again = tntp::extract_subnetwork(ds, sub.demand, sub.nodes);
  CHECK(again.links == sub.links);
}
