#include "qgnn/explain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace qgnn {

namespace {

Real l2_distance(std::span<const Real> a, std::span<const Real> b) {
  Real acc = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const Real d = a[i] - b[i];
    acc += d * d;
  }
  return std::sqrt(acc);
}

// occlusion score per local block; target's block scores +inf
std::vector<Real> block_scores(const CompressedSlice& slice, const ModelSpec& m) {
  const std::vector<Real> base = slice_infer(slice, m);
  std::vector<Real> scores(slice.block_count, 0.0);
  std::vector<char> allowed(slice.block_count, 1);
  for (BlockId b = 0; b < slice.block_count; ++b) {
    if (b == slice.target_block) {
      scores[b] = std::numeric_limits<Real>::infinity();
      continue;
    }
    allowed[b] = 0;
    scores[b] = l2_distance(base, slice_infer(slice, m, &allowed));
    allowed[b] = 1;
  }
  return scores;
}

std::vector<char> subgraph_mask(const CompressedSlice& slice, std::span<const char> chosen,
                                bool keep_chosen) {
  std::vector<char> allowed(slice.block_count, keep_chosen ? 0 : 1);
  for (BlockId b = 0; b < slice.block_count; ++b) {
    if (chosen[b]) allowed[b] = keep_chosen ? 1 : 0;
  }
  if (!keep_chosen) allowed[slice.target_block] = 1;  // never occlude the target itself
  return allowed;
}

}  // namespace

std::vector<std::pair<NodeId, Real>> influence_scores(const CompressedSlice& slice,
                                                      const ModelSpec& m) {
  const auto scores = block_scores(slice, m);
  std::vector<std::pair<NodeId, Real>> out;
  for (BlockId b = 0; b < slice.block_count; ++b) {
    for (NodeId v : slice.members[b]) out.emplace_back(v, scores[b]);
  }
  std::sort(out.begin(), out.end());
  return out;
}

Explanation build_explanation(const CompressedSlice& slice, const ModelSpec& m,
                              std::size_t budget) {
  if (budget < 1) throw ArgumentError("budget must be >= 1");
  Explanation e;
  e.target = slice.target;

  const int base_label = classify_row(slice_infer(slice, m));
  const auto scores = block_scores(slice, m);

  // undirected connectivity over slice edges
  std::vector<std::vector<BlockId>> adj(slice.block_count);
  for (const auto& [a, b] : slice.edges) {
    if (a == b) continue;
    adj[a].push_back(b);
    adj[b].push_back(a);
  }

  std::vector<BlockId> order;
  for (BlockId b = 0; b < slice.block_count; ++b) {
    if (b != slice.target_block) order.push_back(b);
  }
  std::sort(order.begin(), order.end(), [&](BlockId a, BlockId b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return slice.to_global[a] < slice.to_global[b];
  });

  std::vector<char> chosen(slice.block_count, 0);
  chosen[slice.target_block] = 1;
  e.blocks.push_back(slice.to_global[slice.target_block]);

  auto factual_now = [&]() {
    auto mask = subgraph_mask(slice, chosen, /*keep_chosen=*/true);
    return classify_row(slice_infer(slice, m, &mask)) == base_label;
  };

  auto touches_subgraph = [&](BlockId b) {
    for (BlockId nb : adj[b]) {
      if (chosen[nb]) return true;
    }
    return false;
  };

  // re-scan after every growth: a candidate rejected for connectivity may
  // become reachable once higher-scored blocks join
  e.factual_ok = false;
  bool grew = true;
  while (grew && e.budget_used < budget && !e.factual_ok) {
    grew = false;
    for (BlockId b : order) {
      if (e.budget_used >= budget || e.factual_ok) break;
      if (chosen[b] || !touches_subgraph(b)) continue;
      chosen[b] = 1;
      e.blocks.push_back(slice.to_global[b]);
      ++e.budget_used;
      grew = true;
      e.factual_ok = factual_now();
    }
  }
  if (e.budget_used < budget && !e.factual_ok) {
    for (BlockId b : order) {
      if (!chosen[b] && !touches_subgraph(b)) e.skipped.push_back(slice.to_global[b]);
    }
  }
  // final verification on the finished subgraph
  e.factual_ok = factual_now();
  {
    auto mask = subgraph_mask(slice, chosen, /*keep_chosen=*/false);
    e.counterfactual_ok = classify_row(slice_infer(slice, m, &mask)) != base_label;
  }

  for (BlockId b = 0; b < slice.block_count; ++b) {
    if (!chosen[b]) continue;
    for (NodeId v : slice.members[b]) e.nodes.push_back(v);
  }
  std::sort(e.nodes.begin(), e.nodes.end());
  for (const auto& [a, b] : slice.edges) {
    if (chosen[a] && chosen[b]) {
      e.edges.emplace_back(slice.to_global[a], slice.to_global[b]);
    }
  }

  for (BlockId b = 0; b < slice.block_count; ++b) {
    for (NodeId v : slice.members[b]) e.influences.emplace_back(v, scores[b]);
  }
  std::sort(e.influences.begin(), e.influences.end(),
            [](const std::pair<NodeId, Real>& a, const std::pair<NodeId, Real>& b) {
              if (a.second != b.second) return a.second > b.second;
              return a.first < b.first;
            });
  return e;
}

namespace {

std::vector<char> chosen_mask_from(const CompressedSlice& slice, const Explanation& e) {
  std::vector<char> chosen(slice.block_count, 0);
  for (BlockId gb : e.blocks) {
    for (BlockId b = 0; b < slice.block_count; ++b) {
      if (slice.to_global[b] == gb) chosen[b] = 1;
    }
  }
  return chosen;
}

}  // namespace

bool recheck_factual(const CompressedSlice& slice, const ModelSpec& m, const Explanation& e) {
  const int base_label = classify_row(slice_infer(slice, m));
  auto chosen = chosen_mask_from(slice, e);
  auto mask = subgraph_mask(slice, chosen, true);
  return classify_row(slice_infer(slice, m, &mask)) == base_label;
}

bool recheck_counterfactual(const CompressedSlice& slice, const ModelSpec& m,
                            const Explanation& e) {
  const int base_label = classify_row(slice_infer(slice, m));
  auto chosen = chosen_mask_from(slice, e);
  auto mask = subgraph_mask(slice, chosen, false);
  return classify_row(slice_infer(slice, m, &mask)) != base_label;
}

std::string format_explanation(const Explanation& e) {
  std::ostringstream out;
  out << "target\t" << e.target << '\n';
  out << "factual\t" << (e.factual_ok ? 1 : 0) << '\n';
  out << "counterfactual\t" << (e.counterfactual_ok ? 1 : 0) << '\n';
  out << "budget_used\t" << e.budget_used << '\n';
  out << "blocks";
  for (BlockId b : e.blocks) out << '\t' << b;
  out << '\n';
  out << "nodes";
  for (NodeId v : e.nodes) out << '\t' << v;
  out << '\n';
  for (const auto& [a, b] : e.edges) out << "edge\t" << a << '\t' << b << '\n';
  for (const auto& [v, s] : e.influences) out << "influence\t" << v << '\t' << s << '\n';
  if (!e.skipped.empty()) {
    out << "skipped";
    for (BlockId b : e.skipped) out << '\t' << b;
    out << '\n';
  }
  return out.str();
}

}  // namespace qgnn
