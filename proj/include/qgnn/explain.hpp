#pragma once

#include <string>
#include <vector>

#include "qgnn/slice.hpp"

namespace qgnn {

// Influence-scored factual explanation inside the target's L-hop slice.
// Node and block ids are global; edges are global block pairs.
struct Explanation {
  NodeId target = 0;
  std::vector<BlockId> blocks;                        // chosen blocks, target's first
  std::vector<NodeId> nodes;                          // members of the chosen blocks
  std::vector<std::pair<BlockId, BlockId>> edges;     // slice edges inside the subgraph
  std::vector<std::pair<NodeId, Real>> influences;    // node -> occlusion score
  bool factual_ok = false;
  bool counterfactual_ok = false;
  std::size_t budget_used = 0;
  std::vector<BlockId> skipped;  // candidates with no connection into the subgraph
};

// Occlusion influence: L2 distance between the target's output on the full
// slice and with the node's block removed. Members share their block's
// score; the target's own block scores +inf. Nodes outside the slice are
// omitted (their influence is 0 by locality).
std::vector<std::pair<NodeId, Real>> influence_scores(const CompressedSlice& slice,
                                                      const ModelSpec& m);

// Greedy growth by descending influence, one block per candidate, connected
// through slice edges; stops at the budget or once the kept subgraph alone
// reproduces the prediction. Flags are evaluated on the final subgraph.
Explanation build_explanation(const CompressedSlice& slice, const ModelSpec& m,
                              std::size_t budget);

// independent re-check of the stored flags; used by verification tests
bool recheck_factual(const CompressedSlice& slice, const ModelSpec& m, const Explanation& e);
bool recheck_counterfactual(const CompressedSlice& slice, const ModelSpec& m,
                            const Explanation& e);

std::string format_explanation(const Explanation& e);

}  // namespace qgnn
