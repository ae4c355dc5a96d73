#pragma once

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "qgnn/types.hpp"

namespace qgnn {

// Static per-edge, per-layer weights (e.g. pre-trained attention values).
// Keyed by the directed edge (u, v); layers are 1-based externally and
// stored 0-based here.
struct EdgeWeights {
  std::size_t layer_count = 0;
  std::vector<std::unordered_map<std::uint64_t, Real>> by_layer;

  static std::uint64_t key(NodeId u, NodeId v) {
    return (static_cast<std::uint64_t>(u) << 32) | v;
  }

  bool empty() const { return layer_count == 0; }

  void set(std::size_t layer, NodeId u, NodeId v, Real w);
  // throws MissingWeightsError when the edge has no weight at `layer`
  Real at(std::size_t layer, NodeId u, NodeId v) const;
  const Real* find(std::size_t layer, NodeId u, NodeId v) const;
};

// Directed graph with dense node ids, per-node feature rows and optional
// static edge weights. Immutable after construction/load.
struct FeaturedGraph {
  std::size_t node_count = 0;
  std::size_t feature_dim = 0;
  std::vector<std::pair<NodeId, NodeId>> edges;  // sorted, unique
  std::vector<Real> features;                    // node_count x feature_dim, row major
  EdgeWeights edge_weights;
  DirectionMode mode = DirectionMode::kInNeighbors;

  std::span<const Real> feature_row(NodeId v) const {
    return {features.data() + static_cast<std::size_t>(v) * feature_dim, feature_dim};
  }
  std::span<Real> feature_row(NodeId v) {
    return {features.data() + static_cast<std::size_t>(v) * feature_dim, feature_dim};
  }

  std::size_t size() const { return node_count + edges.size(); }

  // enforces the structural invariants; throws on violation
  void validate() const;
};

// Adjacency under the graph's direction mode. `in(v)` lists the nodes whose
// messages v consumes; `consumers(u)` is the reverse relation.
struct NeighborView {
  DirectionMode mode = DirectionMode::kInNeighbors;
  std::vector<std::uint32_t> offsets;  // size V+1
  std::vector<NodeId> neighbors;       // sorted within each node
  std::vector<std::uint32_t> rev_offsets;
  std::vector<NodeId> rev_neighbors;

  static NeighborView build(const FeaturedGraph& g);

  std::size_t node_count() const { return offsets.empty() ? 0 : offsets.size() - 1; }

  std::span<const NodeId> in(NodeId v) const {
    return {neighbors.data() + offsets[v], offsets[v + 1] - offsets[v]};
  }
  std::span<const NodeId> consumers(NodeId u) const {
    return {rev_neighbors.data() + rev_offsets[u], rev_offsets[u + 1] - rev_offsets[u]};
  }
  std::uint32_t degree(NodeId v) const { return offsets[v + 1] - offsets[v]; }

  std::vector<std::uint32_t> degrees() const;
};

// 1/sqrt(deg) with the zero-degree convention: a degree-0 endpoint
// contributes nothing rather than dividing by zero.
inline Real inv_sqrt_degree(std::uint32_t deg) {
  return deg == 0 ? 0.0 : 1.0 / std::sqrt(static_cast<Real>(deg));
}

struct IdMap {
  // external id -> internal id (identity for dense inputs, persisted anyway)
  std::vector<std::pair<std::uint64_t, NodeId>> entries;
};

// sorts and dedups; undirected mode stores each edge as (min, max)
void canonicalize_edges(std::vector<std::pair<NodeId, NodeId>>& edges, DirectionMode mode);

// canonical text serializers, shared by save_graph and the metrics byte counts
void write_edges_text(std::ostream& out, const FeaturedGraph& g);
void write_features_text(std::ostream& out, const FeaturedGraph& g);

FeaturedGraph load_graph(const std::string& edge_path, const std::string& feature_path,
                         const std::optional<std::string>& weight_path, DirectionMode mode,
                         IdMap* id_map = nullptr);

// canonical form: dense ids, sorted unique edges, full-precision features
void save_graph(const FeaturedGraph& g, const std::string& edge_path,
                const std::string& feature_path);
void save_id_map(const IdMap& map, const std::string& path);

// Per-column feature binning. Either a uniform bin count per column
// (equal-width over the observed [min, max]) or explicit ascending edges.
struct BinSpec {
  // one entry per column, or a single entry broadcast to all columns
  std::vector<std::uint32_t> counts;
  std::vector<std::vector<Real>> edges;  // used when counts is empty

  static BinSpec uniform(std::uint32_t bins) { return BinSpec{{bins}, {}}; }
};

FeaturedGraph discretize_features(const FeaturedGraph& g, const BinSpec& bins);

// G_r: same node set, edge (u, v) iff u lies within r hops into v under the
// graph's direction mode. r = 1 reproduces the input edge set.
FeaturedGraph build_r_hop_graph(const FeaturedGraph& g, unsigned r);

// nodes within <= r hops into v (v itself only via a cycle); sorted
std::vector<NodeId> r_hop_neighbors(const NeighborView& nv, NodeId v, unsigned r);

struct InducedSubgraph {
  FeaturedGraph graph;
  std::vector<NodeId> to_original;        // subgraph id -> original id
  std::vector<std::int64_t> from_original;  // original id -> subgraph id or -1
};

InducedSubgraph induce_l_hop_subgraph(const FeaturedGraph& g, std::span<const NodeId> anchors,
                                      unsigned l);

std::uint64_t fnv1a_file_hash(const std::string& path);

}  // namespace qgnn
