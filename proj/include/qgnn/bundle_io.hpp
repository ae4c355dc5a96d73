#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "qgnn/compress.hpp"
#include "qgnn/repair.hpp"

namespace qgnn {

// text serializers shared by the bundle writer and the metrics byte counts
void write_partition_text(std::ostream& out, std::span<const BlockId> block_of);
void write_superedges_text(std::ostream& out, const CompressedGraph& gc);
void write_block_features_text(std::ostream& out, const CompressedGraph& gc);
// exact tables store one row per block (written under the smallest member id);
// weight-mode rows carry a layer column
void write_memo_text(std::ostream& out, const CompressedGraph& gc, const MemoTable& memo);
void write_degrees_text(std::ostream& out, const MemoTable& memo);

struct BundleMeta {
  std::string scheme;  // spgc | alpha-r | anchored
  double alpha = 1.0;
  unsigned r = 1;
  unsigned l = 0;  // anchored layer bound, 0 otherwise
  ModelClass cls = ModelClass::kVanilla;
  Aggregator aggregator = Aggregator::kSum;
  DirectionMode mode = DirectionMode::kInNeighbors;
  bool exact = false;
  std::size_t weight_layers = 1;
  std::size_t node_count = 0;
  std::vector<NodeId> anchor_set;  // original ids; anchored scheme only
  std::string edge_hash, feature_hash, weight_hash;
};

// Bundle directory layout: partition.tsv, superedges.tsv, memo.tsv,
// degrees.tsv, block_features.tsv, meta.json, and repair.bin plus
// anchors.tsv where the scheme produces them.
void write_bundle(const std::string& dir, const CompressedGraph& gc, const MemoTable& memo,
                  const RePairBundle* repair, const std::vector<NodeId>* to_original,
                  const BundleMeta& meta);

struct LoadedBundle {
  CompressedGraph graph;
  MemoTable memo;
  std::optional<RePairBundle> repair;
  std::vector<NodeId> to_original;  // anchored: subgraph node -> original node
  BundleMeta meta;
};

LoadedBundle read_bundle(const std::string& dir);

}  // namespace qgnn
