#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "qgnn/explain.hpp"
#include "qgnn/slice.hpp"

namespace qgnn {

struct Workload {
  std::vector<NodeId> targets;
  std::size_t processors = 1;
  bool explain = false;
  std::size_t explain_budget = 4;
  std::uint64_t seed = 0;  // batch shuffle seed
};

// deterministic: seed-shuffled round robin; min(n, |targets|) batches whose
// sizes differ by at most one
std::vector<std::vector<NodeId>> partition_workload(std::span<const NodeId> targets,
                                                    std::size_t n, std::uint64_t seed);

struct Joblet {
  enum class Kind { kInference, kExplanation };
  Kind kind = Kind::kInference;
  NodeId target = 0;
  CompressedSlice slice;
};

struct ResultEnvelope {
  NodeId target = 0;
  std::vector<Real> embedding;
  int label = -1;
  std::optional<Explanation> explanation;
  double slice_ms = 0, infer_ms = 0, explain_ms = 0;
  std::string error;  // nonempty when this target failed

  bool ok() const { return error.empty(); }
};

struct RunOptions {
  bool stable_order = false;  // sort returned envelopes by target id
};

// One worker per batch over the shared read-only graph and memo; per-target
// slice -> infer -> (optional) explain, envelopes emitted in completion
// order through on_emit before the full workload finishes.
std::vector<ResultEnvelope> run_parallel(
    const Workload& workload, const CompressedGraph& gc, const MemoTable& memo,
    const ModelSpec& m, const RunOptions& options = {},
    const std::function<void(const ResultEnvelope&)>& on_emit = nullptr);

}  // namespace qgnn
