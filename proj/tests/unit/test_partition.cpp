#include <filesystem>

#include "doctest.h"
#include "helpers.hpp"
#include "qgnn/partition.hpp"
#include "qgnn/synthetic.hpp"

using namespace qgnn;
using namespace qgnn::testing;

namespace {

std::vector<NodeId> block_containing(const Partition& p, NodeId v) {
  return p.blocks[p.block_of[v]];
}

}  // namespace

TEST_CASE("feature-equality seed groups identical rows") {
  FeaturedGraph g = make_graph(3, {}, {{1, 0}, {1, 0}, {0, 1}});
  Partition p = seed_by_feature_equality(g);
  CHECK(p.block_count() == 2);
  CHECK(p.block_of[0] == p.block_of[1]);
  CHECK(p.block_of[0] != p.block_of[2]);
}

TEST_CASE("feature-equality seed with identical rows yields one block") {
  FeaturedGraph g = make_graph(4, {}, {{2, 2}, {2, 2}, {2, 2}, {2, 2}});
  CHECK(seed_by_feature_equality(g).block_count() == 1);
}

TEST_CASE("layered10 seeds node 3 apart from its same-label peers") {
  FeaturedGraph g = load_fixture("layered10");
  Partition p = seed_by_feature_equality(g);
  CHECK(p.block_of[2] == p.block_of[4]);
  CHECK(p.block_of[2] != p.block_of[3]);
}

TEST_CASE("xsim with alpha 0 collapses everything") {
  FeaturedGraph g = make_graph(5, {}, {{1, 0}, {0, 1}, {3, 2}, {-1, 0}, {2, 2}});
  CHECK(seed_by_xsim(g, 0.0).block_count() == 1);
}

TEST_CASE("xsim separates orthogonal rows at alpha 0.5") {
  FeaturedGraph g = make_graph(2, {}, {{1, 0}, {0, 1}});
  CHECK(seed_by_xsim(g, 0.5).block_count() == 2);
}

TEST_CASE("fanout8 xsim 0.5 groups the near-similar middle layer") {
  FeaturedGraph g = load_fixture("fanout8");
  Partition p = seed_by_xsim(g, 0.5);
  CHECK(p.block_of[2] == p.block_of[3]);
  CHECK(p.block_of[2] == p.block_of[4]);
  CHECK(p.block_of[2] == p.block_of[5]);
  CHECK(p.block_of[0] != p.block_of[2]);
  CHECK(p.block_of[6] != p.block_of[2]);
}

TEST_CASE("zero-norm rows are similar only to other zero rows") {
  FeaturedGraph g = make_graph(3, {}, {{0, 0}, {0, 0}, {1, 0}});
  Partition p = seed_by_xsim(g, 0.9);
  CHECK(p.block_of[0] == p.block_of[1]);
  CHECK(p.block_of[0] != p.block_of[2]);
}

TEST_CASE("layered10 bisimulation merges exactly the documented pairs") {
  FeaturedGraph g = load_fixture("layered10");
  NeighborView nv = NeighborView::build(g);
  Partition p = max_bisimulation(nv, seed_by_feature_equality(g));
  CHECK(p.block_count() == 7);
  CHECK(block_containing(p, 2) == std::vector<NodeId>{2, 4});
  CHECK(block_containing(p, 5) == std::vector<NodeId>{5, 6});
  CHECK(block_containing(p, 7) == std::vector<NodeId>{7, 9});
  CHECK(block_containing(p, 0) == std::vector<NodeId>{0});
  CHECK(block_containing(p, 1) == std::vector<NodeId>{1});
  CHECK(block_containing(p, 3) == std::vector<NodeId>{3});
  CHECK(block_containing(p, 8) == std::vector<NodeId>{8});
}

TEST_CASE("ring12 collapses to one block per feature class, any cycle length") {
  FeaturedGraph g = load_fixture("ring12");
  NeighborView nv = NeighborView::build(g);
  Partition p = max_bisimulation(nv, seed_by_feature_equality(g));
  CHECK(p.block_count() == 3);
}

TEST_CASE("all-distinct features leave the identity partition") {
  FeaturedGraph g = make_graph(4, {{0, 1}, {1, 2}, {2, 3}}, {{1}, {2}, {3}, {4}});
  NeighborView nv = NeighborView::build(g);
  Partition p = max_bisimulation(nv, seed_by_feature_equality(g));
  CHECK(p.block_count() == 4);
}

TEST_CASE("bisimulation output is a fixpoint") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    FeaturedGraph g =
        make_random_graph({.min_nodes = 10, .max_nodes = 50, .feature_pool = 3}, seed);
    NeighborView nv = NeighborView::build(g);
    Partition p = max_bisimulation(nv, seed_by_feature_equality(g));
    Partition again = max_bisimulation(nv, p);
    CHECK(p == again);
  }
}

TEST_CASE("bisimulation matches the brute-force coarsest stable partition") {
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    FeaturedGraph g = make_random_graph(
        {.min_nodes = 2, .max_nodes = 8, .feature_dim = 1, .feature_pool = 2}, seed * 31);
    NeighborView nv = NeighborView::build(g);
    Partition seedp = seed_by_feature_equality(g);
    Partition fast = max_bisimulation(nv, seedp);
    Partition oracle = brute_force_coarsest(nv, seedp);
    CHECK(fast == oracle);
  }
}

TEST_CASE("alpha-r partition at (1,1) equals feature-seeded bisimulation") {
  for (std::uint64_t seed = 3; seed <= 12; ++seed) {
    FeaturedGraph g =
        make_random_graph({.min_nodes = 10, .max_nodes = 60, .feature_pool = 4}, seed * 7);
    RefinementConfig cfg;
    cfg.seed = RefinementConfig::Seed::kXsim;
    cfg.alpha = 1.0;
    cfg.r = 1;
    Partition p1 = compute_alpha_r_partition(g, cfg);
    Partition p2 = max_bisimulation(NeighborView::build(g), seed_by_feature_equality(g));
    CHECK(p1 == p2);
  }
}

TEST_CASE("fanout8 collapses to 3 blocks at (0.5, 2) but not at (1, 1)") {
  FeaturedGraph g = load_fixture("fanout8");
  RefinementConfig lossy;
  lossy.seed = RefinementConfig::Seed::kXsim;
  lossy.alpha = 0.5;
  lossy.r = 2;
  Partition p = compute_alpha_r_partition(g, lossy);
  REQUIRE(p.block_count() == 3);
  CHECK(block_containing(p, 0) == std::vector<NodeId>{0, 1});
  CHECK(block_containing(p, 2) == std::vector<NodeId>{2, 3, 4, 5});
  CHECK(block_containing(p, 6) == std::vector<NodeId>{6, 7});

  RefinementConfig strict;
  strict.seed = RefinementConfig::Seed::kXsim;
  strict.alpha = 1.0;
  strict.r = 1;
  Partition q = compute_alpha_r_partition(g, strict);
  CHECK(q.block_count() > 3);
  CHECK(q.block_of[2] != q.block_of[3]);  // unequal features cannot merge exactly
}

TEST_CASE("uniform refine splits star centers with different leaf counts") {
  // center 3 has two equal leaves, center 4 has one; a sum aggregation sees 2x vs 1x
  FeaturedGraph g =
      make_graph(5, {{0, 3}, {1, 3}, {2, 4}}, {{1, 0}, {1, 0}, {1, 0}, {0, 1}, {0, 1}});
  NeighborView nv = NeighborView::build(g);
  Partition p = max_bisimulation(nv, seed_by_feature_equality(g));
  REQUIRE(p.block_of[3] == p.block_of[4]);  // plain bisimulation merges them

  // the brute-force oracle shows their embeddings differ, forcing the split
  ModelSpec m = generate_model(ModelClass::kVanilla, 1, std::vector<std::size_t>{2, 2}, 99);
  EmbeddingMatrix emb = dense_oracle(g, m);
  bool differ = false;
  for (std::size_t j = 0; j < emb.cols; ++j) {
    differ = differ || emb.row(3)[j] != emb.row(4)[j];
  }
  CHECK(differ);

  auto degrees = nv.degrees();
  Partition refined = uniform_scaling_refine(p, nv, ModelClass::kVanilla, nullptr, degrees);
  CHECK(refined.block_of[3] != refined.block_of[4]);
  CHECK(refined.refines(p));
}

TEST_CASE("uniform refine leaves single-neighbor-per-block cycles alone") {
  FeaturedGraph g = load_fixture("ring12");
  NeighborView nv = NeighborView::build(g);
  Partition p = max_bisimulation(nv, seed_by_feature_equality(g));
  auto degrees = nv.degrees();
  for (ModelClass cls :
       {ModelClass::kVanilla, ModelClass::kGcn, ModelClass::kSage, ModelClass::kGin}) {
    Partition refined = uniform_scaling_refine(p, nv, cls, nullptr, degrees);
    CHECK(refined == p);
  }
}

TEST_CASE("uniform refine is idempotent") {
  for (std::uint64_t seed = 5; seed <= 9; ++seed) {
    FeaturedGraph g =
        make_random_graph({.min_nodes = 20, .max_nodes = 80, .feature_pool = 3}, seed * 13);
    NeighborView nv = NeighborView::build(g);
    auto degrees = nv.degrees();
    Partition p = max_bisimulation(nv, seed_by_feature_equality(g));
    Partition r1 = uniform_scaling_refine(p, nv, ModelClass::kGcn, nullptr, degrees);
    Partition r2 = uniform_scaling_refine(r1, nv, ModelClass::kGcn, nullptr, degrees);
    CHECK(r1 == r2);
    CHECK(r1.refines(p));
  }
}

TEST_CASE("identical inputs produce identical block numbering") {
  FeaturedGraph g =
      make_random_graph({.min_nodes = 40, .max_nodes = 80, .feature_pool = 4}, 1234);
  NeighborView nv = NeighborView::build(g);
  Partition a = max_bisimulation(nv, seed_by_feature_equality(g));
  Partition b = max_bisimulation(nv, seed_by_feature_equality(g));
  CHECK(a.block_of == b.block_of);
  CHECK(a.blocks == b.blocks);
}

TEST_CASE("partition text round-trips") {
  FeaturedGraph g = load_fixture("layered10");
  Partition p = max_bisimulation(NeighborView::build(g), seed_by_feature_equality(g));
  auto path = std::filesystem::temp_directory_path() / "part.tsv";
  save_partition(p, path.string());
  CHECK(load_partition(path.string()) == p);
}
