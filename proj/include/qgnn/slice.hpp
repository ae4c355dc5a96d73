#pragma once

#include <vector>

#include "qgnn/compress.hpp"
#include "qgnn/infer.hpp"
#include "qgnn/model.hpp"

namespace qgnn {

// Self-contained L-hop working set for one target: the blocks that can reach
// the target's block within L hops of the factor graph, their shared rows
// and degrees, and the target's own row for the per-member restore.
struct CompressedSlice {
  NodeId target = 0;
  BlockId target_block = 0;  // local id
  std::size_t block_count = 0;
  std::size_t feature_dim = 0;
  std::size_t layer_count = 1;
  MemoMode mode = MemoMode::kCount;
  bool exact = false;

  std::vector<Real> block_features;             // local blocks, row major
  std::vector<std::vector<MemoRow>> rep_rows;   // [layer][local block], local ids
  std::vector<std::uint32_t> rep_degrees;
  std::vector<MemoRow> target_rows;             // [layer]
  std::uint32_t target_degree = 0;

  std::vector<BlockId> to_global;               // local block -> global block
  std::vector<std::vector<NodeId>> members;     // local block -> global member nodes
  std::vector<std::pair<BlockId, BlockId>> edges;  // local factor-graph edges (u -> v)

  std::span<const Real> block_feature(BlockId b) const {
    return {block_features.data() + static_cast<std::size_t>(b) * feature_dim, feature_dim};
  }
  std::size_t size() const { return block_count + edges.size(); }
};

CompressedSlice slice_joblet(const CompressedGraph& gc, const MemoTable& memo, NodeId target,
                             std::size_t l);

// Target output on the slice; blocks with allowed[b] == 0 are occluded
// (their embeddings pinned to zero at every layer). allowed == nullptr
// means the whole slice. Equals full-graph compressed inference when
// nothing is occluded.
std::vector<Real> slice_infer(const CompressedSlice& slice, const ModelSpec& m,
                              const std::vector<char>* allowed = nullptr);

}  // namespace qgnn
