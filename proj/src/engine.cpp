#include "qgnn/engine.hpp"

#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <mutex>
#include <thread>
#include <unordered_map>

#include "qgnn/rng.hpp"

namespace qgnn {

std::vector<std::vector<NodeId>> partition_workload(std::span<const NodeId> targets,
                                                    std::size_t n, std::uint64_t seed) {
  if (n < 1) throw ArgumentError("processor count must be >= 1");
  std::vector<NodeId> order(targets.begin(), targets.end());
  SplitMix64 rng(seed);
  rng.shuffle(order);
  const std::size_t k = std::min(n, order.size());
  std::vector<std::vector<NodeId>> batches(k);
  for (std::size_t i = 0; i < order.size(); ++i) batches[i % k].push_back(order[i]);
  return batches;
}

CompressedSlice slice_joblet(const CompressedGraph& gc, const MemoTable& memo, NodeId target,
                             std::size_t l) {
  if (target >= gc.block_of.size()) {
    throw ReferenceError("target " + std::to_string(target) + " maps to no block");
  }
  const BlockId root = gc.block_of[target];

  // blocks reaching the target within <= l hops of the factor graph
  std::unordered_map<BlockId, std::size_t> depth;
  std::deque<BlockId> frontier;
  depth.emplace(root, 0);
  frontier.push_back(root);
  auto in_blocks_of = [&](BlockId b, std::vector<BlockId>& out) {
    out.clear();
    const NodeId rep = gc.members[b][0];
    for (std::size_t k = 0; k < memo.rows.size(); ++k) {
      for (const auto& [ub, f] : memo.rows[k][rep]) {
        (void)f;
        out.push_back(ub);
      }
      if (b == root) {
        for (const auto& [ub, f] : memo.rows[k][target]) {
          (void)f;
          out.push_back(ub);
        }
      }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
  };
  std::vector<BlockId> ins;
  while (!frontier.empty()) {
    const BlockId b = frontier.front();
    frontier.pop_front();
    const std::size_t d = depth[b];
    if (d == l) continue;
    in_blocks_of(b, ins);
    for (BlockId ub : ins) {
      if (depth.emplace(ub, d + 1).second) frontier.push_back(ub);
    }
  }

  CompressedSlice slice;
  slice.target = target;
  slice.feature_dim = gc.feature_dim;
  slice.layer_count = memo.layer_count;
  slice.mode = memo.mode;
  slice.exact = memo.exact;

  slice.to_global.reserve(depth.size());
  for (const auto& [b, d] : depth) {
    (void)d;
    slice.to_global.push_back(b);
  }
  std::sort(slice.to_global.begin(), slice.to_global.end());
  slice.block_count = slice.to_global.size();

  std::unordered_map<BlockId, BlockId> to_local;
  to_local.reserve(slice.block_count);
  for (BlockId i = 0; i < slice.block_count; ++i) to_local.emplace(slice.to_global[i], i);
  slice.target_block = to_local.at(root);

  slice.block_features.resize(slice.block_count * slice.feature_dim);
  slice.members.resize(slice.block_count);
  slice.rep_rows.assign(memo.layer_count, std::vector<MemoRow>(slice.block_count));
  slice.rep_degrees.resize(slice.block_count);
  slice.target_rows.resize(memo.layer_count);

  auto localize = [&](const MemoRow& row) {
    MemoRow out;
    out.reserve(row.size());
    for (const auto& [ub, f] : row) {
      auto it = to_local.find(ub);
      if (it != to_local.end()) out.emplace_back(it->second, f);
    }
    return out;  // stays sorted: localization preserves relative order
  };

  std::vector<std::pair<BlockId, BlockId>> edges;
  for (BlockId i = 0; i < slice.block_count; ++i) {
    const BlockId gb = slice.to_global[i];
    auto feat = gc.block_feature(gb);
    std::copy(feat.begin(), feat.end(),
              slice.block_features.begin() + static_cast<std::size_t>(i) * slice.feature_dim);
    slice.members[i] = gc.members[gb];
    const NodeId rep = gc.members[gb][0];
    slice.rep_degrees[i] = memo.degrees[rep];
    for (std::size_t k = 0; k < memo.layer_count; ++k) {
      slice.rep_rows[k][i] = localize(memo.rows[k][rep]);
      for (const auto& [ub, f] : slice.rep_rows[k][i]) {
        (void)f;
        edges.emplace_back(ub, i);
      }
    }
  }
  for (std::size_t k = 0; k < memo.layer_count; ++k) {
    slice.target_rows[k] = localize(memo.rows[k][target]);
    for (const auto& [ub, f] : slice.target_rows[k]) {
      (void)f;
      edges.emplace_back(ub, slice.target_block);
    }
  }
  slice.target_degree = memo.degrees[target];
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  slice.edges = std::move(edges);
  return slice;
}

std::vector<Real> slice_infer(const CompressedSlice& slice, const ModelSpec& m,
                              const std::vector<char>* allowed) {
  m.validate();
  if (slice.feature_dim != m.input_dim()) {
    throw ShapeError("slice feature dim does not match model input dim");
  }
  if (slice.mode != memo_mode_for(m.cls)) {
    throw ContractError("slice memo mode does not match the model class");
  }
  if (slice.mode == MemoMode::kWeight && slice.layer_count < m.layers) {
    throw ContractError("slice covers fewer weight layers than the model");
  }
  const std::size_t nb = slice.block_count;
  auto blocked = [&](BlockId b) { return allowed && !(*allowed)[b]; };

  EmbeddingMatrix cur(nb, slice.feature_dim);
  cur.a = slice.block_features;
  for (BlockId b = 0; b < nb; ++b) {
    if (blocked(b)) std::fill(cur.row(b).begin(), cur.row(b).end(), 0.0);
  }

  EmbeddingMatrix prev;
  std::vector<Real> agg, scratch;
  for (std::size_t k = 0; k < m.layers; ++k) {
    EmbeddingMatrix next(nb, m.dims[k + 1]);
    for (BlockId b = 0; b < nb; ++b) {
      if (blocked(b)) continue;  // stays zero
      const auto& row = slice.rep_rows[slice.mode == MemoMode::kWeight ? k : 0][b];
      agg.assign(m.dims[k], 0.0);
      for (const auto& [ub, f] : row) {
        if (blocked(ub)) continue;
        auto xu = cur.row(ub);
        for (std::size_t j = 0; j < agg.size(); ++j) agg[j] += f * xu[j];
      }
      detail::apply_update(m, k, cur.row(b), agg, slice.rep_degrees[b], next.row(b), scratch);
    }
    if (k + 1 == m.layers) prev = std::move(cur);
    cur = std::move(next);
  }

  if (slice.exact) {
    auto out = cur.row(slice.target_block);
    return {out.begin(), out.end()};
  }
  const std::size_t k = m.layers - 1;
  const auto& trow = slice.target_rows[slice.mode == MemoMode::kWeight ? k : 0];
  agg.assign(m.dims[k], 0.0);
  for (const auto& [ub, f] : trow) {
    if (blocked(ub)) continue;
    auto xu = prev.row(ub);
    for (std::size_t j = 0; j < agg.size(); ++j) agg[j] += f * xu[j];
  }
  std::vector<Real> out(m.output_dim());
  detail::apply_update(m, k, prev.row(slice.target_block), agg, slice.target_degree, out, scratch);
  return out;
}

namespace {

double elapsed_ms(std::chrono::steady_clock::time_point from) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - from)
      .count();
}

ResultEnvelope process_target(NodeId target, const Workload& workload, const CompressedGraph& gc,
                              const MemoTable& memo, const ModelSpec& m) {
  ResultEnvelope env;
  env.target = target;
  try {
    auto t0 = std::chrono::steady_clock::now();
    CompressedSlice slice = slice_joblet(gc, memo, target, m.layers);
    env.slice_ms = elapsed_ms(t0);

    auto t1 = std::chrono::steady_clock::now();
    env.embedding = slice_infer(slice, m);
    env.label = classify_row(env.embedding);
    env.infer_ms = elapsed_ms(t1);

    if (workload.explain) {
      auto t2 = std::chrono::steady_clock::now();
      env.explanation = build_explanation(slice, m, workload.explain_budget);
      env.explain_ms = elapsed_ms(t2);
    }
  } catch (const std::exception& e) {
    env.error = e.what();
  }
  return env;
}

}  // namespace

std::vector<ResultEnvelope> run_parallel(
    const Workload& workload, const CompressedGraph& gc, const MemoTable& memo,
    const ModelSpec& m, const RunOptions& options,
    const std::function<void(const ResultEnvelope&)>& on_emit) {
  const auto batches = partition_workload(workload.targets, workload.processors, workload.seed);
  std::vector<ResultEnvelope> results;
  results.reserve(workload.targets.size());
  if (batches.empty()) return results;

  std::mutex mu;
  std::condition_variable cv;
  std::deque<ResultEnvelope> channel;
  std::size_t open_workers = batches.size();

  std::vector<std::thread> workers;
  workers.reserve(batches.size());
  for (const auto& batch : batches) {
    workers.emplace_back([&, batch] {
      for (NodeId target : batch) {
        ResultEnvelope env = process_target(target, workload, gc, memo, m);
        {
          std::lock_guard<std::mutex> lock(mu);
          channel.push_back(std::move(env));
        }
        cv.notify_one();
      }
      {
        std::lock_guard<std::mutex> lock(mu);
        --open_workers;
      }
      cv.notify_one();
    });
  }

  // consume incrementally: envelopes surface as they complete
  {
    std::unique_lock<std::mutex> lock(mu);
    for (;;) {
      cv.wait(lock, [&] { return !channel.empty() || open_workers == 0; });
      while (!channel.empty()) {
        results.push_back(std::move(channel.front()));
        channel.pop_front();
        if (on_emit) {
          lock.unlock();
          on_emit(results.back());
          lock.lock();
        }
      }
      if (open_workers == 0 && channel.empty()) break;
    }
  }
  for (auto& w : workers) w.join();

  if (options.stable_order) {
    std::stable_sort(results.begin(), results.end(),
                     [](const ResultEnvelope& a, const ResultEnvelope& b) {
                       return a.target < b.target;
                     });
  }
  return results;
}

}  // namespace qgnn
