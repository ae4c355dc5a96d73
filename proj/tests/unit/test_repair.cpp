#include <filesystem>
#include <set>

#include "doctest.h"
#include "helpers.hpp"
#include "qgnn/compress.hpp"
#include "qgnn/repair.hpp"
#include "qgnn/rng.hpp"
#include "qgnn/synthetic.hpp"

using namespace qgnn;
using namespace qgnn::testing;

TEST_CASE("a repeating pair collapses into a single rule") {
  std::vector<Token> input{1, 2, 1, 2, 1, 2};
  std::vector<std::pair<Token, Token>> rules;
  auto out = repair_encode_stream(input, 10, rules);
  REQUIRE(rules.size() == 1);
  CHECK(rules[0] == std::pair<Token, Token>{1, 2});
  CHECK(out == std::vector<Token>{10, 10, 10});
  CHECK(repair_expand_stream(out, 10, rules) == input);
}

TEST_CASE("all-distinct tokens stay untouched") {
  std::vector<Token> input{5, 3, 9, 1};
  std::vector<std::pair<Token, Token>> rules;
  auto out = repair_encode_stream(input, 10, rules);
  CHECK(rules.empty());
  CHECK(out == input);
}

TEST_CASE("tie-breaks pick the lexicographically smallest pair") {
  // (1,2) and (3,4) both occur twice; (1,2) must win the first round
  std::vector<Token> input{1, 2, 3, 4, 1, 2, 3, 4};
  std::vector<std::pair<Token, Token>> rules;
  (void)repair_encode_stream(input, 10, rules);
  REQUIRE(!rules.empty());
  CHECK(rules[0] == std::pair<Token, Token>{1, 2});
}

TEST_CASE("encode/decode round-trips adjacency lists byte-exactly") {
  SplitMix64 rng(2024);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 5 + rng.below(40);
    std::vector<std::vector<NodeId>> adjacency(n);
    for (std::size_t v = 0; v < n; ++v) {
      const std::size_t len = rng.below(8);
      std::set<NodeId> s;
      for (std::size_t i = 0; i < len; ++i) s.insert(static_cast<NodeId>(rng.below(n)));
      adjacency[v].assign(s.begin(), s.end());
    }
    std::vector<BlockId> block_of(n);
    const std::size_t blocks = 1 + rng.below(4);
    for (std::size_t v = 0; v < n; ++v) block_of[v] = static_cast<BlockId>(rng.below(blocks));

    RePairBundle bundle = repair_encode(adjacency, block_of, blocks, n);
    CHECK(repair_decode(bundle, n) == adjacency);
  }
}

TEST_CASE("repair files round-trip") {
  FeaturedGraph g = load_fixture("fanout8");
  RefinementConfig cfg;
  cfg.seed = RefinementConfig::Seed::kXsim;
  cfg.alpha = 0.5;
  cfg.r = 2;
  auto res = alpha_r_compress(g, cfg, ModelClass::kVanilla);
  auto path = std::filesystem::temp_directory_path() / "repair.bin";
  save_repair(res.bundle, path.string());
  RePairBundle loaded = load_repair(path.string());
  CHECK(loaded.alphabet_size == res.bundle.alphabet_size);
  CHECK(loaded.rules == res.bundle.rules);
  REQUIRE(loaded.streams.size() == res.bundle.streams.size());
  for (std::size_t i = 0; i < loaded.streams.size(); ++i) {
    CHECK(loaded.streams[i].stream == res.bundle.streams[i].stream);
    CHECK(loaded.streams[i].members == res.bundle.streams[i].members);
  }
}

TEST_CASE("decompression restores shared 2-hop neighbors in degree order") {
  FeaturedGraph g = load_fixture("fanout8");
  RefinementConfig cfg;
  cfg.seed = RefinementConfig::Seed::kXsim;
  cfg.alpha = 0.5;
  cfg.r = 2;
  auto res = alpha_r_compress(g, cfg, ModelClass::kVanilla);
  DecompressedGraph dg = decomp_g(res.graph, res.bundle, res.memo.degrees);

  // the merged {0, 1} block: node 0 (higher 2-hop degree) restores 2,3,4,6
  // first, then node 1 contributes only 5 and 7
  const BlockId a_block = res.graph.block_of[0];
  std::vector<NodeId> a_edges;
  for (const auto& [u, b] : dg.added_edges) {
    if (b == a_block) a_edges.push_back(u);
  }
  CHECK(a_edges == std::vector<NodeId>{2, 3, 4, 6, 5, 7});
}

TEST_CASE("with nothing merged, decompression adds no structure beyond the quotient") {
  FeaturedGraph g = make_graph(4, {{0, 1}, {1, 2}, {2, 3}}, {{1}, {2}, {3}, {4}});
  RefinementConfig cfg;
  cfg.seed = RefinementConfig::Seed::kXsim;
  cfg.alpha = 1.0;
  cfg.r = 1;
  auto res = alpha_r_compress(g, cfg, ModelClass::kVanilla);
  REQUIRE(res.graph.block_count == g.node_count);  // identity partition
  DecompressedGraph dg = decomp_g(res.graph, res.bundle, res.memo.degrees);
  std::set<std::pair<BlockId, BlockId>> super(res.graph.superedges.begin(),
                                              res.graph.superedges.end());
  for (const auto& [u, b] : dg.added_edges) {
    CHECK(super.count({res.graph.block_of[u], b}) == 1);
  }
}

TEST_CASE("a fully merged block restores the union of member r-hop neighborhoods") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    RandomGraphSpec spec;
    spec.min_nodes = 8;
    spec.max_nodes = 30;
    spec.feature_pool = 1;  // every node feature-equal
    FeaturedGraph g = make_random_graph(spec, seed * 61);
    RefinementConfig cfg;
    cfg.seed = RefinementConfig::Seed::kXsim;
    cfg.alpha = 0.0;  // all nodes pass the similarity gate
    cfg.r = 2;
    auto res = alpha_r_compress(g, cfg, ModelClass::kVanilla);

    DecompressedGraph dg = decomp_g(res.graph, res.bundle, res.memo.degrees);
    NeighborView nv = NeighborView::build(g);

    // oracle: per block, the union of member 2-hop in-neighborhoods
    for (BlockId b = 0; b < res.graph.block_count; ++b) {
      std::set<NodeId> expect;
      for (NodeId v : res.graph.members[b]) {
        for (NodeId u : r_hop_neighbors(nv, v, 2)) expect.insert(u);
      }
      std::set<NodeId> got;
      for (const auto& [u, eb] : dg.added_edges) {
        if (eb == b) got.insert(u);
      }
      CHECK(got == expect);
    }

    // soundness: no duplicate (node, block) pairs
    std::set<std::pair<NodeId, BlockId>> uniq(dg.added_edges.begin(), dg.added_edges.end());
    CHECK(uniq.size() == dg.added_edges.size());
  }
}

TEST_CASE("corrupted streams are detected") {
  FeaturedGraph g = load_fixture("fanout8");
  RefinementConfig cfg;
  cfg.seed = RefinementConfig::Seed::kXsim;
  cfg.alpha = 0.5;
  cfg.r = 2;
  auto res = alpha_r_compress(g, cfg, ModelClass::kVanilla);
  RePairBundle broken = res.bundle;
  REQUIRE(!broken.streams.empty());
  REQUIRE(!broken.streams[0].list_sizes.empty());
  broken.streams[0].list_sizes[0] += 7;
  CHECK_THROWS_AS(repair_decode(broken, g.node_count), CorruptionError);
}
