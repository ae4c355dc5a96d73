#pragma once

#include <span>
#include <vector>

#include "qgnn/graph.hpp"
#include "qgnn/types.hpp"

namespace qgnn {

// Node partition with canonical numbering: block ids are dense and ordered
// by smallest member id, so identical partitions serialize identically.
struct Partition {
  std::vector<BlockId> block_of;             // node -> block
  std::vector<std::vector<NodeId>> blocks;   // block -> sorted members

  std::size_t block_count() const { return blocks.size(); }
  std::size_t node_count() const { return block_of.size(); }

  static Partition from_assignment(std::span<const BlockId> raw);
  static Partition discrete(std::size_t n);   // all singletons
  static Partition single(std::size_t n);     // one block

  // every block of *this is contained in one block of coarser
  bool refines(const Partition& coarser) const;
  bool operator==(const Partition& other) const { return block_of == other.block_of; }
};

struct RefinementConfig {
  enum class Seed { kFeatureEqual, kXsim };
  Seed seed = Seed::kFeatureEqual;
  double alpha = 1.0;   // xsim threshold, in [0, 1]
  unsigned r = 1;       // hop radius
  bool exact_mode = false;
};

// clamped cosine similarity in [0, 1]; zero-norm rows match only each other
Real xsim_cosine(std::span<const Real> a, std::span<const Real> b);

// nodes share a block iff their feature rows are bitwise identical
Partition seed_by_feature_equality(const FeaturedGraph& g);

// greedy leader clustering in ascending node-id order: a node joins the
// first leader with xsim >= alpha, else starts a new block
Partition seed_by_xsim(const FeaturedGraph& g, double alpha);

// Coarsest refinement of `seed` that is stable: for every pair of blocks
// (B, B'), either every node of B has a neighbor in B' or none does.
Partition max_bisimulation(const NeighborView& nv, const Partition& seed);

// Partition over G_r: xsim (or feature-equality, when alpha == 1) seeding,
// then max_bisimulation on the r-hop graph. Optionally hands back G_r.
Partition compute_alpha_r_partition(const FeaturedGraph& g, const RefinementConfig& cfg,
                                    FeaturedGraph* gr_out = nullptr);

using MemoRow = std::vector<std::pair<BlockId, Real>>;

// Per-node aggregated scaling factors toward the current blocks, one table
// per layer (layer_count > 1 only for weight mode). Terms within a block
// are summed in ascending value order so equal multisets sum identically.
std::vector<std::vector<MemoRow>> compute_scaling_rows(const NeighborView& nv,
                                                       std::span<const BlockId> block_of,
                                                       MemoMode mode, const EdgeWeights* weights,
                                                       std::span<const std::uint32_t> degrees,
                                                       std::size_t layer_count);

// Splits blocks of a stable partition until every member of a block carries
// identical per-neighbor-block factors (and identical degree where the model
// class normalizes by it). Coarsest such refinement; idempotent.
Partition uniform_scaling_refine(const Partition& p, const NeighborView& nv, ModelClass cls,
                                 const EdgeWeights* weights,
                                 std::span<const std::uint32_t> degrees,
                                 std::size_t layer_count = 1,
                                 Aggregator agg = Aggregator::kSum);

void save_partition(const Partition& p, const std::string& path);
Partition load_partition(const std::string& path);

}  // namespace qgnn
