#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace qgnn {

using NodeId = std::uint32_t;
using BlockId = std::uint32_t;
using Real = double;

enum class DirectionMode { kInNeighbors, kUndirected };

enum class ModelClass { kVanilla, kGcn, kGat, kSage, kGin };

enum class Aggregator { kSum, kAvg };

// What a memo row aggregates per neighbor block: plain neighbor counts,
// inverse-root neighbor degrees, or per-layer edge weights.
enum class MemoMode { kCount, kTopology, kWeight };

inline MemoMode memo_mode_for(ModelClass cls) {
  switch (cls) {
    case ModelClass::kGcn:
      return MemoMode::kTopology;
    case ModelClass::kGat:
      return MemoMode::kWeight;
    default:
      return MemoMode::kCount;
  }
}

// Whether the rewritten update consumes deg_v itself (beyond the row
// values): GCN's 1/sqrt(deg_v) and the AVG normalizations. Degrees can come
// from a different graph than the rows (anchored compression keeps original
// degrees over a truncated subgraph), so row sums do not substitute.
inline bool degree_sensitive(ModelClass cls, Aggregator agg) {
  switch (cls) {
    case ModelClass::kGcn:
    case ModelClass::kSage:
      return true;
    case ModelClass::kVanilla:
      return agg == Aggregator::kAvg;
    default:
      return false;
  }
}

inline const char* model_class_name(ModelClass cls) {
  switch (cls) {
    case ModelClass::kVanilla: return "vanilla";
    case ModelClass::kGcn: return "gcn";
    case ModelClass::kGat: return "gat";
    case ModelClass::kSage: return "sage";
    case ModelClass::kGin: return "gin";
  }
  return "?";
}

ModelClass model_class_from_name(const std::string& name);

inline const char* direction_mode_name(DirectionMode m) {
  return m == DirectionMode::kInNeighbors ? "in-neighbors" : "undirected";
}

DirectionMode direction_mode_from_name(const std::string& name);

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParseError : Error { using Error::Error; };
struct ShapeError : Error { using Error::Error; };
struct ReferenceError : Error { using Error::Error; };
struct DataError : Error { using Error::Error; };
struct ArgumentError : Error { using Error::Error; };
struct ContractError : Error { using Error::Error; };
struct CorruptionError : Error { using Error::Error; };
struct MissingWeightsError : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

}  // namespace qgnn
