#include "qgnn/synthetic.hpp"

#include <algorithm>

#include "qgnn/rng.hpp"

namespace qgnn {

FeaturedGraph make_ba_house_graph(std::size_t backbone_nodes, std::size_t houses,
                                  std::size_t attach_degree, std::uint64_t seed) {
  if (backbone_nodes < attach_degree + 1) throw ArgumentError("backbone too small");
  SplitMix64 rng(seed);
  FeaturedGraph g;
  g.feature_dim = 4;  // role one-hot: top, middle, base, non-motif
  g.node_count = backbone_nodes + houses * 5;
  g.features.assign(g.node_count * 4, 0.0);

  auto set_role = [&](NodeId v, std::size_t role) { g.features[v * 4 + role] = 1.0; };

  // preferential attachment: repeated endpoints make high-degree nodes
  // proportionally likely picks
  std::vector<NodeId> endpoint_pool;
  for (NodeId v = 0; v < backbone_nodes; ++v) set_role(v, 3);
  for (NodeId v = 1; v <= attach_degree; ++v) {
    g.edges.emplace_back(v, 0);
    endpoint_pool.push_back(v);
    endpoint_pool.push_back(0);
  }
  for (NodeId v = static_cast<NodeId>(attach_degree) + 1; v < backbone_nodes; ++v) {
    std::vector<NodeId> picks;
    while (picks.size() < attach_degree) {
      NodeId u = endpoint_pool[rng.below(endpoint_pool.size())];
      if (std::find(picks.begin(), picks.end(), u) == picks.end()) picks.push_back(u);
    }
    for (NodeId u : picks) {
      g.edges.emplace_back(v, u);
      endpoint_pool.push_back(v);
      endpoint_pool.push_back(u);
    }
  }

  for (std::size_t h = 0; h < houses; ++h) {
    const NodeId base = static_cast<NodeId>(backbone_nodes + h * 5);
    const NodeId b1 = base, b2 = base + 1, m1 = base + 2, m2 = base + 3, top = base + 4;
    set_role(b1, 2);
    set_role(b2, 2);
    set_role(m1, 1);
    set_role(m2, 1);
    set_role(top, 0);
    g.edges.emplace_back(b1, b2);
    g.edges.emplace_back(b1, m1);
    g.edges.emplace_back(b2, m2);
    g.edges.emplace_back(m1, m2);
    g.edges.emplace_back(m1, top);
    g.edges.emplace_back(m2, top);
    // the roof feeds one backbone node; nothing flows back into the motif
    g.edges.emplace_back(top, static_cast<NodeId>(rng.below(backbone_nodes)));
  }

  std::sort(g.edges.begin(), g.edges.end());
  g.edges.erase(std::unique(g.edges.begin(), g.edges.end()), g.edges.end());
  return g;
}

FeaturedGraph make_random_graph(const RandomGraphSpec& spec, std::uint64_t seed) {
  SplitMix64 rng(seed);
  FeaturedGraph g;
  g.mode = spec.mode;
  g.node_count = spec.min_nodes + rng.below(spec.max_nodes - spec.min_nodes + 1);
  g.feature_dim = spec.feature_dim;

  std::vector<std::vector<Real>> pool(std::max<std::size_t>(1, spec.feature_pool));
  for (auto& row : pool) {
    row.resize(spec.feature_dim);
    for (Real& x : row) x = rng.uniform(-1.0, 1.0);
  }
  g.features.reserve(g.node_count * g.feature_dim);
  for (NodeId v = 0; v < g.node_count; ++v) {
    const auto& row = pool[rng.below(pool.size())];
    g.features.insert(g.features.end(), row.begin(), row.end());
  }

  const std::size_t edge_target =
      static_cast<std::size_t>(spec.avg_degree * static_cast<double>(g.node_count));
  for (std::size_t i = 0; i < edge_target; ++i) {
    NodeId u = static_cast<NodeId>(rng.below(g.node_count));
    NodeId v = static_cast<NodeId>(rng.below(g.node_count));
    if (u == v && rng.uniform() >= spec.self_loop_prob) continue;
    g.edges.emplace_back(u, v);
  }
  canonicalize_edges(g.edges, g.mode);

  for (std::size_t k = 0; k < spec.weight_layers; ++k) {
    for (const auto& [u, v] : g.edges) {
      g.edge_weights.set(k, u, v, rng.uniform(0.1, 1.0));
    }
  }
  return g;
}

}  // namespace qgnn
