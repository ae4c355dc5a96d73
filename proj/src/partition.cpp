#include "qgnn/partition.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <deque>
#include <fstream>
#include <unordered_map>

namespace qgnn {

Partition Partition::from_assignment(std::span<const BlockId> raw) {
  Partition p;
  p.block_of.assign(raw.size(), 0);
  std::unordered_map<BlockId, BlockId> renumber;
  renumber.reserve(raw.size());
  for (std::size_t v = 0; v < raw.size(); ++v) {
    auto [it, fresh] = renumber.emplace(raw[v], static_cast<BlockId>(p.blocks.size()));
    if (fresh) p.blocks.emplace_back();
    p.block_of[v] = it->second;
    p.blocks[it->second].push_back(static_cast<NodeId>(v));
  }
  return p;
}

Partition Partition::discrete(std::size_t n) {
  std::vector<BlockId> raw(n);
  for (std::size_t v = 0; v < n; ++v) raw[v] = static_cast<BlockId>(v);
  return from_assignment(raw);
}

Partition Partition::single(std::size_t n) {
  std::vector<BlockId> raw(n, 0);
  return from_assignment(raw);
}

bool Partition::refines(const Partition& coarser) const {
  if (block_of.size() != coarser.block_of.size()) return false;
  for (const auto& block : blocks) {
    for (std::size_t i = 1; i < block.size(); ++i) {
      if (coarser.block_of[block[i]] != coarser.block_of[block[0]]) return false;
    }
  }
  return true;
}

Real xsim_cosine(std::span<const Real> a, std::span<const Real> b) {
  Real dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return (na == 0.0 && nb == 0.0) ? 1.0 : 0.0;
  return std::max(0.0, dot / (std::sqrt(na) * std::sqrt(nb)));
}

namespace {

struct BytesHash {
  std::size_t operator()(const std::string& s) const { return std::hash<std::string>{}(s); }
};

std::string row_bytes(std::span<const Real> row) {
  std::string key(row.size() * sizeof(Real), '\0');
  std::memcpy(key.data(), row.data(), key.size());
  return key;
}

}  // namespace

Partition seed_by_feature_equality(const FeaturedGraph& g) {
  std::vector<BlockId> raw(g.node_count);
  std::unordered_map<std::string, BlockId, BytesHash> seen;
  seen.reserve(g.node_count);
  for (NodeId v = 0; v < g.node_count; ++v) {
    auto [it, fresh] =
        seen.emplace(row_bytes(g.feature_row(v)), static_cast<BlockId>(seen.size()));
    raw[v] = it->second;
  }
  return Partition::from_assignment(raw);
}

Partition seed_by_xsim(const FeaturedGraph& g, double alpha) {
  if (alpha < 0.0 || alpha > 1.0) throw ArgumentError("alpha must lie in [0, 1]");
  std::vector<BlockId> raw(g.node_count);
  std::vector<NodeId> leaders;
  for (NodeId v = 0; v < g.node_count; ++v) {
    BlockId assigned = static_cast<BlockId>(leaders.size());
    for (std::size_t i = 0; i < leaders.size(); ++i) {
      if (xsim_cosine(g.feature_row(v), g.feature_row(leaders[i])) >= alpha) {
        assigned = static_cast<BlockId>(i);
        break;
      }
    }
    if (assigned == leaders.size()) leaders.push_back(v);
    raw[v] = assigned;
  }
  return Partition::from_assignment(raw);
}

Partition max_bisimulation(const NeighborView& nv, const Partition& seed) {
  const std::size_t n = nv.node_count();
  if (seed.block_of.size() != n) throw ArgumentError("seed partition does not cover the graph");

  std::vector<BlockId> block_of = seed.block_of;
  std::vector<std::vector<NodeId>> blocks = seed.blocks;

  std::deque<BlockId> worklist;
  std::vector<char> queued(blocks.size(), 1);
  for (BlockId b = 0; b < blocks.size(); ++b) worklist.push_back(b);

  auto enqueue = [&](BlockId b) {
    if (b >= queued.size()) queued.resize(b + 1, 0);
    if (!queued[b]) {
      queued[b] = 1;
      worklist.push_back(b);
    }
  };

  std::vector<char> touched_flag(n, 0);
  std::vector<NodeId> touched;

  while (!worklist.empty()) {
    const BlockId splitter = worklist.front();
    worklist.pop_front();
    queued[splitter] = 0;

    touched.clear();
    for (NodeId u : blocks[splitter]) {
      for (NodeId v : nv.consumers(u)) {
        if (!touched_flag[v]) {
          touched_flag[v] = 1;
          touched.push_back(v);
        }
      }
    }
    std::sort(touched.begin(), touched.end());

    // group touched nodes by their current block
    std::unordered_map<BlockId, std::vector<NodeId>> moved;
    for (NodeId v : touched) moved[block_of[v]].push_back(v);

    std::vector<BlockId> affected;
    affected.reserve(moved.size());
    for (auto& [b, _] : moved) affected.push_back(b);
    std::sort(affected.begin(), affected.end());

    for (BlockId b : affected) {
      auto& part = moved[b];
      if (part.size() == blocks[b].size()) continue;  // whole block touched, no split
      // untouched members keep block b, touched members form a new block
      std::vector<NodeId> stay;
      stay.reserve(blocks[b].size() - part.size());
      for (NodeId v : blocks[b]) {
        if (!touched_flag[v]) stay.push_back(v);
      }
      const BlockId nb = static_cast<BlockId>(blocks.size());
      for (NodeId v : part) block_of[v] = nb;
      blocks[b] = std::move(stay);
      blocks.push_back(std::move(part));
      enqueue(b);
      enqueue(nb);
    }

    for (NodeId v : touched) touched_flag[v] = 0;
  }

  return Partition::from_assignment(block_of);
}

Partition compute_alpha_r_partition(const FeaturedGraph& g, const RefinementConfig& cfg,
                                    FeaturedGraph* gr_out) {
  if (cfg.r < 1) throw ArgumentError("r must be >= 1");
  FeaturedGraph gr = build_r_hop_graph(g, cfg.r);
  // alpha = 1 demands a true equivalence relation, which cosine thresholding
  // is not; fall back to exact feature equality there
  Partition seed = (cfg.seed == RefinementConfig::Seed::kFeatureEqual || cfg.alpha >= 1.0)
                       ? seed_by_feature_equality(g)
                       : seed_by_xsim(g, cfg.alpha);
  Partition p = max_bisimulation(NeighborView::build(gr), seed);
  if (gr_out) *gr_out = std::move(gr);
  return p;
}

std::vector<std::vector<MemoRow>> compute_scaling_rows(const NeighborView& nv,
                                                       std::span<const BlockId> block_of,
                                                       MemoMode mode, const EdgeWeights* weights,
                                                       std::span<const std::uint32_t> degrees,
                                                       std::size_t layer_count) {
  const std::size_t n = nv.node_count();
  const std::size_t layers = mode == MemoMode::kWeight ? layer_count : 1;
  if (mode == MemoMode::kWeight && !weights) {
    throw MissingWeightsError("weight-mode rows need static edge weights");
  }
  std::vector<std::vector<MemoRow>> rows(layers, std::vector<MemoRow>(n));
  std::vector<std::pair<BlockId, Real>> terms;
  for (std::size_t k = 0; k < layers; ++k) {
    for (NodeId v = 0; v < n; ++v) {
      terms.clear();
      for (NodeId u : nv.in(v)) {
        Real t = 1.0;
        if (mode == MemoMode::kTopology) {
          t = inv_sqrt_degree(degrees[u]);
        } else if (mode == MemoMode::kWeight) {
          const Real* w = weights->find(k, u, v);
          if (!w && nv.mode == DirectionMode::kUndirected) w = weights->find(k, v, u);
          if (!w) {
            throw MissingWeightsError("no edge weight for (" + std::to_string(u) + ", " +
                                      std::to_string(v) + ") at layer " + std::to_string(k + 1));
          }
          t = *w;
        }
        terms.emplace_back(block_of[u], t);
      }
      std::sort(terms.begin(), terms.end());
      MemoRow& row = rows[k][v];
      for (const auto& [b, t] : terms) {
        if (!row.empty() && row.back().first == b) {
          row.back().second += t;
        } else {
          row.emplace_back(b, t);
        }
      }
    }
  }
  return rows;
}

Partition uniform_scaling_refine(const Partition& p, const NeighborView& nv, ModelClass cls,
                                 const EdgeWeights* weights,
                                 std::span<const std::uint32_t> degrees,
                                 std::size_t layer_count, Aggregator agg) {
  const MemoMode mode = memo_mode_for(cls);
  const bool with_degree = degree_sensitive(cls, agg);
  std::vector<BlockId> block_of = p.block_of;
  std::vector<std::vector<NodeId>> blocks = p.blocks;

  for (;;) {
    auto rows = compute_scaling_rows(nv, block_of, mode, weights, degrees, layer_count);
    bool changed = false;
    std::vector<std::vector<NodeId>> next_blocks;
    next_blocks.reserve(blocks.size());
    for (const auto& block : blocks) {
      if (block.size() <= 1) {
        next_blocks.push_back(block);
        continue;
      }
      std::unordered_map<std::string, std::size_t, BytesHash> groups;
      std::vector<std::vector<NodeId>> split;
      for (NodeId v : block) {
        std::string key;
        for (const auto& layer_rows : rows) {
          for (const auto& [b, f] : layer_rows[v]) {
            key.append(reinterpret_cast<const char*>(&b), sizeof b);
            key.append(reinterpret_cast<const char*>(&f), sizeof f);
          }
          key.push_back('|');
        }
        if (with_degree) {
          const std::uint32_t d = degrees[v];
          key.append(reinterpret_cast<const char*>(&d), sizeof d);
        }
        auto [it, fresh] = groups.emplace(std::move(key), split.size());
        if (fresh) split.emplace_back();
        split[it->second].push_back(v);
      }
      if (split.size() > 1) changed = true;
      for (auto& part : split) next_blocks.push_back(std::move(part));
    }
    blocks = std::move(next_blocks);
    for (BlockId b = 0; b < blocks.size(); ++b) {
      for (NodeId v : blocks[b]) block_of[v] = b;
    }
    if (!changed) break;
  }
  return Partition::from_assignment(block_of);
}

void save_partition(const Partition& p, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  for (std::size_t v = 0; v < p.block_of.size(); ++v) out << v << '\t' << p.block_of[v] << '\n';
}

Partition load_partition(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::vector<BlockId> raw;
  std::uint64_t v = 0, b = 0;
  while (in >> v >> b) {
    if (v != raw.size()) throw CorruptionError(path + ": node ids must be dense and ordered");
    raw.push_back(static_cast<BlockId>(b));
  }
  return Partition::from_assignment(raw);
}

}  // namespace qgnn
