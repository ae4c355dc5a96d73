#include "qgnn/infer.hpp"

#include <algorithm>

namespace qgnn {

namespace detail {

void apply_update(const ModelSpec& m, std::size_t k, std::span<const Real> self_prev,
                  std::span<const Real> agg, std::uint32_t deg, std::span<Real> out,
                  std::vector<Real>& scratch) {
  const Activation act = m.activation_at(k);
  const std::size_t in_dim = m.dims[k];

  switch (m.cls) {
    case ModelClass::kVanilla: {
      scratch.assign(agg.begin(), agg.end());
      if (m.aggregator == Aggregator::kAvg) {
        const Real rf = deg == 0 ? 0.0 : 1.0 / static_cast<Real>(deg);
        for (Real& x : scratch) x *= rf;
      }
      m.weights[k].apply(scratch, out);
      break;
    }
    case ModelClass::kGcn: {
      scratch.assign(agg.begin(), agg.end());
      const Real norm = inv_sqrt_degree(deg);
      for (Real& x : scratch) x *= norm;
      m.weights[k].apply(scratch, out);
      break;
    }
    case ModelClass::kGat: {
      m.weights[k].apply(agg, out);
      break;
    }
    case ModelClass::kSage: {
      scratch.resize(2 * in_dim);
      std::copy(self_prev.begin(), self_prev.end(), scratch.begin());
      const Real rf = deg == 0 ? 0.0 : 1.0 / static_cast<Real>(deg);
      for (std::size_t j = 0; j < in_dim; ++j) scratch[in_dim + j] = rf * agg[j];
      m.weights[k].apply(scratch, out);
      break;
    }
    case ModelClass::kGin: {
      scratch.resize(in_dim);
      const Real self_w = 1.0 + m.gin_gamma;
      for (std::size_t j = 0; j < in_dim; ++j) scratch[j] = self_w * self_prev[j] + agg[j];
      const auto& [w1, w2] = m.mlp[k];
      std::vector<Real> hidden(w1.rows);
      w1.apply(scratch, hidden);
      for (Real& x : hidden) x = m.activate(x, m.hidden_activation);
      w2.apply(hidden, out);
      break;
    }
  }
  for (Real& x : out) x = m.activate(x, act);
}

}  // namespace detail

namespace {

// class-specific per-neighbor weighting on the reference path; mirrors the
// factors the memo table accumulates
Real neighbor_term(const ModelSpec& m, std::size_t k, const FeaturedGraph& g,
                   const NeighborView& nv, NodeId u, NodeId v) {
  switch (m.cls) {
    case ModelClass::kGcn:
      return inv_sqrt_degree(nv.degree(u));
    case ModelClass::kGat: {
      const Real* w = g.edge_weights.find(k, u, v);
      if (!w && g.mode == DirectionMode::kUndirected) w = g.edge_weights.find(k, v, u);
      if (!w) {
        throw MissingWeightsError("no edge weight for (" + std::to_string(u) + ", " +
                                  std::to_string(v) + ") at layer " + std::to_string(k + 1));
      }
      return *w;
    }
    default:
      return 1.0;
  }
}

}  // namespace

EmbeddingMatrix infer_reference_full(const FeaturedGraph& g, const NeighborView& nv,
                                     const ModelSpec& m) {
  m.validate();
  if (g.feature_dim != m.input_dim()) {
    throw ShapeError("feature dim " + std::to_string(g.feature_dim) + " does not match model (" +
                     std::to_string(m.input_dim()) + ")");
  }
  if (m.cls == ModelClass::kGat && !g.edges.empty() && g.edge_weights.empty()) {
    throw MissingWeightsError("gat inference needs static edge weights");
  }

  const std::size_t n = g.node_count;
  EmbeddingMatrix cur(n, g.feature_dim);
  cur.a = g.features;

  std::vector<Real> agg, scratch;
  for (std::size_t k = 0; k < m.layers; ++k) {
    EmbeddingMatrix next(n, m.dims[k + 1]);
    agg.assign(m.dims[k], 0.0);
    for (NodeId v = 0; v < n; ++v) {
      std::fill(agg.begin(), agg.end(), 0.0);
      for (NodeId u : nv.in(v)) {
        const Real t = neighbor_term(m, k, g, nv, u, v);
        auto xu = cur.row(u);
        for (std::size_t j = 0; j < agg.size(); ++j) agg[j] += t * xu[j];
      }
      detail::apply_update(m, k, cur.row(v), agg, nv.degree(v), next.row(v), scratch);
    }
    cur = std::move(next);
  }
  return cur;
}

EmbeddingMatrix infer_reference(const FeaturedGraph& g, const NeighborView& nv,
                                const ModelSpec& m, std::span<const NodeId> targets) {
  EmbeddingMatrix full = infer_reference_full(g, nv, m);
  if (targets.empty()) return full;
  EmbeddingMatrix out(targets.size(), full.cols);
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (targets[i] >= g.node_count) {
      throw ReferenceError("target " + std::to_string(targets[i]) + " outside graph");
    }
    auto src = full.row(targets[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

namespace {

void check_compatibility(const CompressedGraph& gc, const MemoTable& memo, const ModelSpec& m) {
  m.validate();
  if (memo.mode != memo_mode_for(m.cls)) {
    throw ContractError(std::string("memo table was built for a different model class (") +
                        model_class_name(m.cls) + " requested)");
  }
  if (memo.mode == MemoMode::kWeight && memo.layer_count < m.layers) {
    throw ContractError("memo table covers fewer layers than the model");
  }
  if (gc.feature_dim != m.input_dim()) {
    throw ShapeError("block feature dim does not match model input dim");
  }
}

}  // namespace

EmbeddingMatrix infer_compressed_blocks(const CompressedGraph& gc, const MemoTable& memo,
                                        const ModelSpec& m) {
  check_compatibility(gc, memo, m);
  const std::size_t nb = gc.block_count;
  EmbeddingMatrix cur(nb, gc.feature_dim);
  cur.a = gc.rep_features;

  std::vector<Real> agg, scratch;
  for (std::size_t k = 0; k < m.layers; ++k) {
    EmbeddingMatrix next(nb, m.dims[k + 1]);
    for (BlockId b = 0; b < nb; ++b) {
      const NodeId rep = gc.members[b][0];
      agg.assign(m.dims[k], 0.0);
      for (const auto& [ub, f] : memo.row(k, rep)) {
        auto xu = cur.row(ub);
        for (std::size_t j = 0; j < agg.size(); ++j) agg[j] += f * xu[j];
      }
      detail::apply_update(m, k, cur.row(b), agg, memo.degrees[rep], next.row(b), scratch);
    }
    cur = std::move(next);
  }
  return cur;
}

EmbeddingMatrix infer_compressed(const CompressedGraph& gc, const MemoTable& memo,
                                 const ModelSpec& m, std::span<const NodeId> targets) {
  check_compatibility(gc, memo, m);
  for (NodeId t : targets) {
    if (t >= gc.block_of.size()) {
      throw ReferenceError("target " + std::to_string(t) + " maps to no block");
    }
  }

  const std::size_t nb = gc.block_count;
  EmbeddingMatrix cur(nb, gc.feature_dim);
  cur.a = gc.rep_features;
  EmbeddingMatrix prev;

  std::vector<Real> agg, scratch;
  for (std::size_t k = 0; k < m.layers; ++k) {
    EmbeddingMatrix next(nb, m.dims[k + 1]);
    for (BlockId b = 0; b < nb; ++b) {
      const NodeId rep = gc.members[b][0];
      agg.assign(m.dims[k], 0.0);
      for (const auto& [ub, f] : memo.row(k, rep)) {
        auto xu = cur.row(ub);
        for (std::size_t j = 0; j < agg.size(); ++j) agg[j] += f * xu[j];
      }
      detail::apply_update(m, k, cur.row(b), agg, memo.degrees[rep], next.row(b), scratch);
    }
    if (k + 1 == m.layers) prev = std::move(cur);
    cur = std::move(next);
  }

  const std::size_t out_dim = m.dims[m.layers];
  std::vector<NodeId> all;
  if (targets.empty()) {
    all.resize(gc.node_count());
    for (NodeId v = 0; v < all.size(); ++v) all[v] = v;
    targets = all;
  }
  EmbeddingMatrix out(targets.size(), out_dim);
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const NodeId t = targets[i];
    const BlockId b = gc.block_of[t];
    if (memo.exact) {
      auto src = cur.row(b);
      std::copy(src.begin(), src.end(), out.row(i).begin());
    } else {
      // per-member restore: redo the final layer with the target's own
      // factors and degree, consuming the shared block embeddings
      const std::size_t k = m.layers - 1;
      agg.assign(m.dims[k], 0.0);
      for (const auto& [ub, f] : memo.row(k, t)) {
        auto xu = prev.row(ub);
        for (std::size_t j = 0; j < agg.size(); ++j) agg[j] += f * xu[j];
      }
      detail::apply_update(m, k, prev.row(b), agg, memo.degrees[t], out.row(i), scratch);
    }
  }
  return out;
}

int classify_row(std::span<const Real> row) {
  int best = 0;
  for (std::size_t j = 1; j < row.size(); ++j) {
    if (row[j] > row[best]) best = static_cast<int>(j);
  }
  return best;
}

std::vector<int> classify(const EmbeddingMatrix& emb) {
  std::vector<int> labels(emb.rows);
  for (std::size_t i = 0; i < emb.rows; ++i) labels[i] = classify_row(emb.row(i));
  return labels;
}

}  // namespace qgnn
