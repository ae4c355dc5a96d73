#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "qgnn/compress.hpp"
#include "qgnn/graph.hpp"
#include "qgnn/infer.hpp"
#include "qgnn/model.hpp"
#include "qgnn/partition.hpp"

namespace qgnn::testing {

inline std::string fixture(const std::string& name) {
  return std::string(QGNN_FIXTURE_DIR) + "/" + name;
}

inline FeaturedGraph load_fixture(const std::string& stem,
                                  DirectionMode mode = DirectionMode::kInNeighbors) {
  return load_graph(fixture(stem + ".edges.tsv"), fixture(stem + ".features.tsv"), std::nullopt,
                    mode);
}

inline FeaturedGraph make_graph(std::size_t n, std::vector<std::pair<NodeId, NodeId>> edges,
                                std::vector<std::vector<Real>> features,
                                DirectionMode mode = DirectionMode::kInNeighbors) {
  FeaturedGraph g;
  g.node_count = n;
  g.feature_dim = features.empty() ? 0 : features[0].size();
  for (auto& row : features) g.features.insert(g.features.end(), row.begin(), row.end());
  canonicalize_edges(edges, mode);
  g.edges = std::move(edges);
  g.mode = mode;
  g.validate();
  return g;
}

// Dense-matrix inference oracle, written against the update formulas
// directly: full |V| x |V| adjacency, no neighbor lists, no memoization.
// Deliberately independent of the library's sparse path.
inline EmbeddingMatrix dense_oracle(const FeaturedGraph& g, const ModelSpec& m) {
  const std::size_t n = g.node_count;
  std::vector<std::vector<Real>> adj(n, std::vector<Real>(n, 0.0));  // adj[u][v] = 1 iff u -> v
  for (const auto& [u, v] : g.edges) {
    adj[u][v] = 1.0;
    if (g.mode == DirectionMode::kUndirected && u != v) adj[v][u] = 1.0;
  }
  std::vector<Real> deg(n, 0.0);
  for (NodeId v = 0; v < n; ++v) {
    for (NodeId u = 0; u < n; ++u) deg[v] += adj[u][v];
  }

  std::vector<std::vector<Real>> x(n);
  for (NodeId v = 0; v < n; ++v) {
    auto row = g.feature_row(v);
    x[v].assign(row.begin(), row.end());
  }

  for (std::size_t k = 0; k < m.layers; ++k) {
    const std::size_t din = m.dims[k], dout = m.dims[k + 1];
    std::vector<std::vector<Real>> nx(n, std::vector<Real>(dout, 0.0));
    for (NodeId v = 0; v < n; ++v) {
      std::vector<Real> agg(din, 0.0);
      for (NodeId u = 0; u < n; ++u) {
        if (adj[u][v] == 0.0) continue;
        Real t = 1.0;
        if (m.cls == ModelClass::kGcn) {
          t = deg[u] > 0 ? 1.0 / std::sqrt(deg[u]) : 0.0;
        } else if (m.cls == ModelClass::kGat) {
          const Real* w = g.edge_weights.find(k, u, v);
          if (!w && g.mode == DirectionMode::kUndirected) w = g.edge_weights.find(k, v, u);
          t = *w;
        }
        for (std::size_t j = 0; j < din; ++j) agg[j] += t * x[u][j];
      }
      std::vector<Real> z;
      switch (m.cls) {
        case ModelClass::kVanilla: {
          z = agg;
          if (m.aggregator == Aggregator::kAvg) {
            const Real rf = deg[v] > 0 ? 1.0 / deg[v] : 0.0;
            for (Real& e : z) e *= rf;
          }
          break;
        }
        case ModelClass::kGcn: {
          z = agg;
          const Real nrm = deg[v] > 0 ? 1.0 / std::sqrt(deg[v]) : 0.0;
          for (Real& e : z) e *= nrm;
          break;
        }
        case ModelClass::kGat:
          z = agg;
          break;
        case ModelClass::kSage: {
          z = x[v];
          const Real rf = deg[v] > 0 ? 1.0 / deg[v] : 0.0;
          for (std::size_t j = 0; j < din; ++j) z.push_back(rf * agg[j]);
          break;
        }
        case ModelClass::kGin: {
          z.resize(din);
          for (std::size_t j = 0; j < din; ++j) z[j] = (1.0 + m.gin_gamma) * x[v][j] + agg[j];
          break;
        }
      }
      if (m.cls == ModelClass::kGin) {
        const auto& [w1, w2] = m.mlp[k];
        std::vector<Real> h(w1.rows, 0.0);
        for (std::size_t r = 0; r < w1.rows; ++r) {
          for (std::size_t c = 0; c < w1.cols; ++c) h[r] += w1.at(r, c) * z[c];
          h[r] = m.activate(h[r], m.hidden_activation);
        }
        for (std::size_t r = 0; r < w2.rows; ++r) {
          Real acc = 0;
          for (std::size_t c = 0; c < w2.cols; ++c) acc += w2.at(r, c) * h[c];
          nx[v][r] = m.activate(acc, m.activation_at(k));
        }
      } else {
        const Matrix& w = m.weights[k];
        for (std::size_t r = 0; r < dout; ++r) {
          Real acc = 0;
          for (std::size_t c = 0; c < w.cols; ++c) acc += w.at(r, c) * z[c];
          nx[v][r] = m.activate(acc, m.activation_at(k));
        }
      }
    }
    x = std::move(nx);
  }

  EmbeddingMatrix out(n, m.output_dim());
  for (NodeId v = 0; v < n; ++v) std::copy(x[v].begin(), x[v].end(), out.row(v).begin());
  return out;
}

inline double max_abs_gap(const EmbeddingMatrix& a, const EmbeddingMatrix& b) {
  double gap = 0;
  for (std::size_t i = 0; i < a.a.size(); ++i) gap = std::max(gap, std::abs(a.a[i] - b.a[i]));
  return gap;
}

// --- brute-force coarsest stable partition -------------------------------

inline bool is_stable(const NeighborView& nv, const std::vector<BlockId>& block_of,
                      std::size_t block_count) {
  const std::size_t n = nv.node_count();
  // signature: set of neighbor blocks, per node; members of a block must agree
  std::vector<std::vector<char>> sig(n, std::vector<char>(block_count, 0));
  for (NodeId v = 0; v < n; ++v) {
    for (NodeId u : nv.in(v)) sig[v][block_of[u]] = 1;
  }
  for (NodeId v = 0; v < n; ++v) {
    for (NodeId w = v + 1; w < n; ++w) {
      if (block_of[v] == block_of[w] && sig[v] != sig[w]) return false;
    }
  }
  return true;
}

namespace detail {

template <typename Visit>
void enumerate_partitions(std::size_t n, std::size_t pos, BlockId next_free,
                          std::vector<BlockId>& assign, Visit&& visit) {
  if (pos == n) {
    visit(assign, next_free);
    return;
  }
  for (BlockId b = 0; b <= next_free; ++b) {
    assign[pos] = b;
    enumerate_partitions(n, pos + 1, b == next_free ? next_free + 1 : next_free, assign, visit);
  }
}

}  // namespace detail

// Enumerates every partition refining `seed` (restricted growth strings) and
// returns the stable one with the fewest blocks; the coarsest stable
// refinement is the unique minimum. Exponential; |V| <= 8 only.
inline Partition brute_force_coarsest(const NeighborView& nv, const Partition& seed) {
  const std::size_t n = nv.node_count();
  std::vector<BlockId> assign(n, 0);
  std::vector<BlockId> best;
  std::size_t best_blocks = n + 1;
  detail::enumerate_partitions(
      n, 0, 0, assign, [&](const std::vector<BlockId>& cand, BlockId block_count) {
        if (block_count >= best_blocks) return;
        for (NodeId v = 0; v < n; ++v) {
          for (NodeId w = v + 1; w < n; ++w) {
            if (cand[v] == cand[w] && seed.block_of[v] != seed.block_of[w]) return;
          }
        }
        if (!is_stable(nv, cand, block_count)) return;
        best = cand;
        best_blocks = block_count;
      });
  return Partition::from_assignment(best);
}

}  // namespace qgnn::testing
