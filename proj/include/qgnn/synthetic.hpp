#pragma once

#include "qgnn/graph.hpp"

namespace qgnn {

// Preferential-attachment backbone with house motifs hung off random
// backbone nodes. Motif nodes carry role one-hots (top / middle / base),
// backbone nodes the non-motif role; motif in-neighborhoods never see the
// backbone, so the houses collapse to a handful of blocks.
FeaturedGraph make_ba_house_graph(std::size_t backbone_nodes, std::size_t houses,
                                  std::size_t attach_degree, std::uint64_t seed);

struct RandomGraphSpec {
  std::size_t min_nodes = 5;
  std::size_t max_nodes = 200;
  std::size_t feature_dim = 4;
  std::size_t feature_pool = 8;  // distinct feature rows to draw from
  double avg_degree = 2.5;
  double self_loop_prob = 0.05;
  std::size_t weight_layers = 0;  // > 0 generates per-layer edge weights
  DirectionMode mode = DirectionMode::kInNeighbors;
};

FeaturedGraph make_random_graph(const RandomGraphSpec& spec, std::uint64_t seed);

}  // namespace qgnn
