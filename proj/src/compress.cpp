#include "qgnn/compress.hpp"

#include <algorithm>
#include <cstring>
#include <sstream>

#include "qgnn/bundle_io.hpp"

namespace qgnn {

CompressedGraph build_quotient(const FeaturedGraph& g, const Partition& p, bool mean_features) {
  CompressedGraph gc;
  gc.block_count = p.block_count();
  gc.feature_dim = g.feature_dim;
  gc.members = p.blocks;
  gc.block_of = p.block_of;
  gc.mode = g.mode;

  gc.superedges.reserve(g.edges.size());
  for (const auto& [u, v] : g.edges) {
    gc.superedges.emplace_back(p.block_of[u], p.block_of[v]);
  }
  std::sort(gc.superedges.begin(), gc.superedges.end());
  gc.superedges.erase(std::unique(gc.superedges.begin(), gc.superedges.end()),
                      gc.superedges.end());

  gc.rep_features.resize(gc.block_count * gc.feature_dim, 0.0);
  for (BlockId b = 0; b < gc.block_count; ++b) {
    const auto& ms = gc.members[b];
    auto first = g.feature_row(ms[0]);
    bool identical = true;
    for (std::size_t i = 1; identical && i < ms.size(); ++i) {
      auto row = g.feature_row(ms[i]);
      identical = std::memcmp(row.data(), first.data(), row.size_bytes()) == 0;
    }
    Real* out = gc.rep_features.data() + static_cast<std::size_t>(b) * gc.feature_dim;
    if (!mean_features || identical) {
      std::copy(first.begin(), first.end(), out);
    } else {
      for (NodeId v : ms) {
        auto row = g.feature_row(v);
        for (std::size_t j = 0; j < row.size(); ++j) out[j] += row[j];
      }
      for (std::size_t j = 0; j < gc.feature_dim; ++j) out[j] /= static_cast<Real>(ms.size());
    }
  }
  return gc;
}

MemoTable build_memo(const NeighborView& propagation, const Partition& p, ModelClass cls,
                     const EdgeWeights* weights, std::span<const std::uint32_t> degrees,
                     std::size_t weight_layers, bool exact) {
  MemoTable memo;
  memo.mode = memo_mode_for(cls);
  memo.exact = exact;
  memo.layer_count = memo.mode == MemoMode::kWeight ? weight_layers : 1;
  memo.rows =
      compute_scaling_rows(propagation, p.block_of, memo.mode, weights, degrees, weight_layers);
  memo.degrees.assign(degrees.begin(), degrees.end());
  return memo;
}

SpgcResult spgc_compress(const FeaturedGraph& g, ModelClass cls, bool exact_mode,
                         std::size_t weight_layers, Aggregator agg) {
  if (cls == ModelClass::kGat && !g.edges.empty() && g.edge_weights.empty()) {
    throw MissingWeightsError("gat compression needs static edge weights");
  }
  const NeighborView nv = NeighborView::build(g);
  const auto degrees = nv.degrees();

  Partition p = max_bisimulation(nv, seed_by_feature_equality(g));
  if (exact_mode) {
    p = uniform_scaling_refine(p, nv, cls, &g.edge_weights, degrees, weight_layers, agg);
  }

  SpgcResult res;
  res.graph = build_quotient(g, p, /*mean_features=*/false);
  res.memo = build_memo(nv, p, cls, &g.edge_weights, degrees, weight_layers, exact_mode);
  return res;
}

AlphaRResult alpha_r_compress(const FeaturedGraph& g, const RefinementConfig& cfg, ModelClass cls,
                              std::size_t weight_layers, Aggregator agg) {
  if (cls == ModelClass::kGat) {
    if (!g.edges.empty() && g.edge_weights.empty()) {
      throw MissingWeightsError("gat compression needs static edge weights");
    }
    if (cfg.r > 1) {
      throw ContractError("weight-mode memoization is defined on direct edges only; r must be 1");
    }
  }

  FeaturedGraph gr;
  Partition p = compute_alpha_r_partition(g, cfg, &gr);
  gr.edge_weights = g.edge_weights;  // r == 1 leaves the edge set unchanged

  const NeighborView nv_r = NeighborView::build(gr);
  const auto degrees_r = nv_r.degrees();
  if (cfg.exact_mode) {
    p = uniform_scaling_refine(p, nv_r, cls, &gr.edge_weights, degrees_r, weight_layers, agg);
  }

  AlphaRResult res;
  res.graph = build_quotient(g, p, /*mean_features=*/true);
  res.memo = build_memo(nv_r, p, cls, &gr.edge_weights, degrees_r, weight_layers, cfg.exact_mode);

  std::vector<std::vector<NodeId>> adjacency(gr.node_count);
  for (NodeId v = 0; v < gr.node_count; ++v) {
    auto in = nv_r.in(v);
    adjacency[v].assign(in.begin(), in.end());
  }
  res.bundle = repair_encode(adjacency, p.block_of, p.block_count(), gr.node_count);
  res.partition = std::move(p);
  return res;
}

AnchoredResult anchored_compress(const FeaturedGraph& g, std::span<const NodeId> anchors,
                                 unsigned l, ModelClass cls, bool exact_mode,
                                 std::size_t weight_layers, Aggregator agg) {
  if (l < 1) throw ArgumentError("layer bound must be >= 1");
  if (cls == ModelClass::kGat && !g.edges.empty() && g.edge_weights.empty()) {
    throw MissingWeightsError("gat compression needs static edge weights");
  }
  InducedSubgraph sub = induce_l_hop_subgraph(g, anchors, l);

  const NeighborView nv_sub = NeighborView::build(sub.graph);
  // normalization degrees come from the full graph: the subgraph truncates
  // in-edges of boundary nodes but their true degrees still drive inference
  const NeighborView nv_full = NeighborView::build(g);
  std::vector<std::uint32_t> degrees(sub.graph.node_count);
  for (NodeId v = 0; v < sub.graph.node_count; ++v) {
    degrees[v] = nv_full.degree(sub.to_original[v]);
  }

  Partition p = max_bisimulation(nv_sub, seed_by_feature_equality(sub.graph));
  if (exact_mode) {
    p = uniform_scaling_refine(p, nv_sub, cls, &sub.graph.edge_weights, degrees, weight_layers,
                               agg);
  }

  AnchoredResult res;
  res.graph = build_quotient(sub.graph, p, /*mean_features=*/false);
  res.memo =
      build_memo(nv_sub, p, cls, &sub.graph.edge_weights, degrees, weight_layers, exact_mode);
  res.to_original = std::move(sub.to_original);
  res.from_original = std::move(sub.from_original);
  return res;
}

MetricsReport metrics(const FeaturedGraph& g, const CompressedGraph& gc, const MemoTable& memo) {
  MetricsReport r;
  r.nodes = g.node_count;
  r.edges = g.edges.size();
  r.super_nodes = gc.block_count;
  r.super_edges = gc.superedges.size();
  r.ncr = g.size() == 0 ? 0.0 : 1.0 - static_cast<double>(gc.size()) / static_cast<double>(g.size());

  std::size_t merged = 0;
  for (const auto& ms : gc.members) {
    if (ms.size() > 1) merged += ms.size();
  }
  r.psn = g.node_count == 0 ? 0.0 : static_cast<double>(merged) / static_cast<double>(g.node_count);

  // byte sizes of the canonical serializations, so a recount from the
  // on-disk artifacts reproduces these numbers exactly
  {
    std::ostringstream edges_s, feats_s;
    write_edges_text(edges_s, g);
    write_features_text(feats_s, g);
    r.graph_bytes = edges_s.str().size() + feats_s.str().size();
  }
  {
    std::ostringstream part_s, super_s, feat_s;
    write_partition_text(part_s, gc.block_of);
    write_superedges_text(super_s, gc);
    write_block_features_text(feat_s, gc);
    r.compressed_bytes = part_s.str().size() + super_s.str().size() + feat_s.str().size();
  }
  {
    std::ostringstream memo_s, deg_s;
    write_memo_text(memo_s, gc, memo);
    write_degrees_text(deg_s, memo);
    r.memo_bytes = memo_s.str().size() + deg_s.str().size();
  }
  return r;
}

FeaturedGraph as_graph(const CompressedGraph& gc) {
  FeaturedGraph g;
  g.node_count = gc.block_count;
  g.feature_dim = gc.feature_dim;
  g.features = gc.rep_features;
  g.mode = gc.mode;
  g.edges = gc.superedges;
  return g;
}

}  // namespace qgnn
