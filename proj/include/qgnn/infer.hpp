#pragma once

#include <span>
#include <vector>

#include "qgnn/compress.hpp"
#include "qgnn/graph.hpp"
#include "qgnn/model.hpp"

namespace qgnn {

struct EmbeddingMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<Real> a;

  EmbeddingMatrix() = default;
  EmbeddingMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, 0.0) {}

  std::span<Real> row(std::size_t i) { return {a.data() + i * cols, cols}; }
  std::span<const Real> row(std::size_t i) const { return {a.data() + i * cols, cols}; }
};

namespace detail {

// One unit's layer-k update from its already-aggregated neighbor term.
// `agg` carries the class-specific weighted neighbor sum in prev-layer space;
// deg is the unit's propagation degree (AVG and GCN normalization).
void apply_update(const ModelSpec& m, std::size_t k, std::span<const Real> self_prev,
                  std::span<const Real> agg, std::uint32_t deg, std::span<Real> out,
                  std::vector<Real>& scratch);

}  // namespace detail

// Layer-by-layer sweep over the full graph; the brute-force oracle for every
// compressed path. Returns one row per node.
EmbeddingMatrix infer_reference_full(const FeaturedGraph& g, const NeighborView& nv,
                                     const ModelSpec& m);

// rows follow target order
EmbeddingMatrix infer_reference(const FeaturedGraph& g, const NeighborView& nv,
                                const ModelSpec& m, std::span<const NodeId> targets);

// Rewritten update over the quotient graph: neighbor-block embeddings scaled
// by memoized factors. Exact tables read targets straight off their blocks;
// per-member rows/degrees are applied at the final layer otherwise.
EmbeddingMatrix infer_compressed(const CompressedGraph& gc, const MemoTable& memo,
                                 const ModelSpec& m, std::span<const NodeId> targets);

// per-block embeddings after the final layer (shared half of the above)
EmbeddingMatrix infer_compressed_blocks(const CompressedGraph& gc, const MemoTable& memo,
                                        const ModelSpec& m);

// argmax per row, ties toward the lowest index
std::vector<int> classify(const EmbeddingMatrix& emb);
int classify_row(std::span<const Real> row);

}  // namespace qgnn
