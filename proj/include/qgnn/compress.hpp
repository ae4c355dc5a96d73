#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qgnn/graph.hpp"
#include "qgnn/partition.hpp"
#include "qgnn/repair.hpp"
#include "qgnn/types.hpp"

namespace qgnn {

// Quotient graph: supernodes are partition blocks, a superedge ([u], [v])
// exists iff some member edge (u, v) does. Carries the node -> block map.
struct CompressedGraph {
  std::size_t block_count = 0;
  std::size_t feature_dim = 0;
  std::vector<std::pair<BlockId, BlockId>> superedges;  // sorted, unique
  std::vector<std::vector<NodeId>> members;             // block -> sorted nodes
  std::vector<BlockId> block_of;                        // node -> block
  std::vector<Real> rep_features;                       // block_count x feature_dim
  DirectionMode mode = DirectionMode::kInNeighbors;

  std::span<const Real> block_feature(BlockId b) const {
    return {rep_features.data() + static_cast<std::size_t>(b) * feature_dim, feature_dim};
  }
  std::size_t node_count() const { return block_of.size(); }
  std::size_t size() const { return block_count + superedges.size(); }
};

// Per-(member, neighbor block) aggregated scaling factors plus per-node
// degrees. Weight mode keeps one table per layer; other modes keep one.
// In exact mode every member of a block carries the same row.
struct MemoTable {
  MemoMode mode = MemoMode::kCount;
  bool exact = false;
  std::size_t layer_count = 1;
  std::vector<std::vector<MemoRow>> rows;  // [layer][node] -> sorted (block, factor)
  std::vector<std::uint32_t> degrees;      // node -> degree in the propagation graph

  const MemoRow& row(std::size_t layer, NodeId v) const {
    return rows[mode == MemoMode::kWeight ? layer : 0][v];
  }
};

struct SpgcResult {
  CompressedGraph graph;
  MemoTable memo;
};

// Feature-seeded coarsest stable partition (plus the uniform-scaling split
// when exact_mode), quotient graph and memo built in one pass.
SpgcResult spgc_compress(const FeaturedGraph& g, ModelClass cls, bool exact_mode = true,
                         std::size_t weight_layers = 1, Aggregator agg = Aggregator::kSum);

struct AlphaRResult {
  CompressedGraph graph;
  MemoTable memo;       // statistics over the r-hop graph
  RePairBundle bundle;  // r-hop adjacency, grouped per block
  Partition partition;
};

AlphaRResult alpha_r_compress(const FeaturedGraph& g, const RefinementConfig& cfg, ModelClass cls,
                              std::size_t weight_layers = 1, Aggregator agg = Aggregator::kSum);

struct AnchoredResult {
  CompressedGraph graph;  // over the L-hop induced subgraph's nodes
  MemoTable memo;         // degrees taken from the full graph
  std::vector<NodeId> to_original;
  std::vector<std::int64_t> from_original;
};

// SPGC applied to the L-hop induced subgraph of the anchors; preserves
// inference output for the anchors only.
AnchoredResult anchored_compress(const FeaturedGraph& g, std::span<const NodeId> anchors,
                                 unsigned l, ModelClass cls, bool exact_mode = true,
                                 std::size_t weight_layers = 1, Aggregator agg = Aggregator::kSum);

struct MetricsReport {
  std::size_t nodes = 0, edges = 0;
  std::size_t super_nodes = 0, super_edges = 0;
  double ncr = 0.0;  // 1 - |G_c| / |G|
  double psn = 0.0;  // fraction of nodes in non-singleton blocks
  std::size_t graph_bytes = 0, compressed_bytes = 0, memo_bytes = 0;  // mcr inputs
};

MetricsReport metrics(const FeaturedGraph& g, const CompressedGraph& gc, const MemoTable& memo);

// quotient + memo over arbitrary propagation adjacency; building block for
// the three schemes above
CompressedGraph build_quotient(const FeaturedGraph& g, const Partition& p, bool mean_features);
MemoTable build_memo(const NeighborView& propagation, const Partition& p, ModelClass cls,
                     const EdgeWeights* weights, std::span<const std::uint32_t> degrees,
                     std::size_t weight_layers, bool exact);

// Treats a compressed graph as a plain graph again (members collapse to one
// node per block); used for recompression checks.
FeaturedGraph as_graph(const CompressedGraph& gc);

}  // namespace qgnn
