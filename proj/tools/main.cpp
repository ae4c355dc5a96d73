#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>

#include "CLI11.hpp"
#include "json.hpp"
#include "qgnn/bundle_io.hpp"
#include "qgnn/compress.hpp"
#include "qgnn/engine.hpp"
#include "qgnn/explain.hpp"
#include "qgnn/infer.hpp"
#include "qgnn/model.hpp"
#include "qgnn/synthetic.hpp"

namespace {

using nlohmann::json;
using namespace qgnn;

double wall_ms(const std::function<void()>& fn) {
  auto t0 = std::chrono::steady_clock::now();
  fn();
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<NodeId> read_targets(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open targets file " + path);
  std::vector<NodeId> out;
  std::uint64_t v;
  while (in >> v) out.push_back(static_cast<NodeId>(v));
  return out;
}

void emit_report(const json& j, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << j.dump(2) << std::endl;
  } else {
    std::ofstream out(out_path);
    if (!out) throw IoError("cannot write " + out_path);
    out << j.dump(2) << '\n';
  }
}

std::string hex64(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

struct GraphArgs {
  std::string edges, features, weights;
  bool undirected = false;

  void attach(CLI::App* cmd, bool required = true) {
    auto* g = cmd->add_option("--graph", edges, "edge file (u<TAB>v per line)");
    auto* f = cmd->add_option("--features", features, "feature file ('|V| F' header)");
    if (required) {
      g->required();
      f->required();
    }
    cmd->add_option("--edge-weights", weights, "edge weight file (u v k w)");
    cmd->add_flag("--undirected", undirected, "treat edges as undirected");
  }

  FeaturedGraph load(IdMap* map = nullptr) const {
    std::optional<std::string> w;
    if (!weights.empty()) w = weights;
    const DirectionMode mode =
        undirected ? DirectionMode::kUndirected : DirectionMode::kInNeighbors;
    return load_graph(edges, features, w, mode, map);
  }
};

// targets in original-id space onto bundle-internal ids (anchored bundles
// renumber the retained subgraph)
struct TargetMapper {
  std::vector<std::int64_t> to_internal;  // empty = identity
  std::size_t internal_count = 0;

  explicit TargetMapper(const LoadedBundle& lb) {
    internal_count = lb.graph.node_count();
    if (!lb.to_original.empty()) {
      std::size_t max_orig = 0;
      for (NodeId o : lb.to_original) max_orig = std::max<std::size_t>(max_orig, o);
      to_internal.assign(max_orig + 1, -1);
      for (NodeId v = 0; v < lb.to_original.size(); ++v) to_internal[lb.to_original[v]] = v;
    }
  }
  std::int64_t map(NodeId original) const {
    if (to_internal.empty()) {
      return original < internal_count ? static_cast<std::int64_t>(original) : -1;
    }
    return original < to_internal.size() ? to_internal[original] : -1;
  }
  NodeId unmap(const LoadedBundle& lb, NodeId internal) const {
    return lb.to_original.empty() ? internal : lb.to_original[internal];
  }
};

json envelope_json(const ResultEnvelope& env, NodeId original_target) {
  json j{{"target", original_target},
         {"label", env.label},
         {"slice_ms", env.slice_ms},
         {"infer_ms", env.infer_ms},
         {"explain_ms", env.explain_ms}};
  if (!env.ok()) {
    j["error"] = env.error;
    return j;
  }
  j["embedding"] = env.embedding;
  if (env.explanation) {
    const Explanation& e = *env.explanation;
    j["explanation"] = {{"blocks", e.blocks},
                        {"nodes", e.nodes},
                        {"factual_ok", e.factual_ok},
                        {"counterfactual_ok", e.counterfactual_ok},
                        {"budget_used", e.budget_used},
                        {"skipped", e.skipped}};
  }
  return j;
}

int run_compress(const GraphArgs& gargs, const std::string& scheme, double alpha, unsigned r,
                 unsigned layers, const std::string& model_class, const std::string& aggregator,
                 bool exact, bool no_exact, std::size_t weight_layers,
                 const std::string& anchors_path, const std::string& out_dir,
                 const std::string& report_path) {
  IdMap id_map;
  FeaturedGraph g = gargs.load(&id_map);
  const ModelClass cls = model_class_from_name(model_class);
  const Aggregator agg = aggregator == "avg" ? Aggregator::kAvg : Aggregator::kSum;

  BundleMeta meta;
  meta.scheme = scheme;
  meta.alpha = alpha;
  meta.r = r;
  meta.l = scheme == "anchored" ? layers : 0;
  meta.cls = cls;
  meta.aggregator = agg;
  meta.mode = g.mode;
  meta.weight_layers = weight_layers;
  meta.node_count = g.node_count;
  meta.edge_hash = hex64(fnv1a_file_hash(gargs.edges));
  meta.feature_hash = hex64(fnv1a_file_hash(gargs.features));
  if (!gargs.weights.empty()) meta.weight_hash = hex64(fnv1a_file_hash(gargs.weights));

  CompressedGraph gc;
  MemoTable memo;
  RePairBundle repair_store;
  std::vector<NodeId> to_original_store;
  const RePairBundle* repair = nullptr;
  const std::vector<NodeId>* to_original = nullptr;

  double ms = 0;
  if (scheme == "spgc") {
    meta.exact = !no_exact;
    ms = wall_ms([&] {
      auto res = spgc_compress(g, cls, meta.exact, weight_layers, agg);
      gc = std::move(res.graph);
      memo = std::move(res.memo);
    });
  } else if (scheme == "alpha-r") {
    RefinementConfig cfg;
    cfg.seed = RefinementConfig::Seed::kXsim;
    cfg.alpha = alpha;
    cfg.r = r;
    cfg.exact_mode = exact;  // lossy unless forced
    meta.exact = cfg.exact_mode;
    ms = wall_ms([&] {
      auto res = alpha_r_compress(g, cfg, cls, weight_layers, agg);
      gc = std::move(res.graph);
      memo = std::move(res.memo);
      repair_store = std::move(res.bundle);
    });
    repair = &repair_store;
  } else if (scheme == "anchored") {
    if (anchors_path.empty()) throw ArgumentError("anchored scheme needs --anchors");
    if (layers < 1) throw ArgumentError("anchored scheme needs --layers >= 1");
    meta.exact = !no_exact;
    meta.anchor_set = read_targets(anchors_path);
    ms = wall_ms([&] {
      auto res =
          anchored_compress(g, meta.anchor_set, layers, cls, meta.exact, weight_layers, agg);
      gc = std::move(res.graph);
      memo = std::move(res.memo);
      to_original_store = std::move(res.to_original);
    });
    to_original = &to_original_store;
  } else {
    throw ArgumentError("unknown scheme: " + scheme);
  }

  write_bundle(out_dir, gc, memo, repair, to_original, meta);
  save_id_map(id_map, (std::filesystem::path(out_dir) / "idmap.tsv").string());

  const MetricsReport mr = metrics(g, gc, memo);
  json hist = json::array();
  {
    std::map<std::size_t, std::size_t> sizes;
    for (const auto& members : gc.members) ++sizes[members.size()];
    for (const auto& [size, count] : sizes) hist.push_back({{"size", size}, {"count", count}});
  }
  emit_report(json{{"scheme", scheme},
                   {"nodes", mr.nodes},
                   {"edges", mr.edges},
                   {"super_nodes", mr.super_nodes},
                   {"super_edges", mr.super_edges},
                   {"ncr", mr.ncr},
                   {"psn", mr.psn},
                   {"graph_bytes", mr.graph_bytes},
                   {"compressed_bytes", mr.compressed_bytes},
                   {"memo_bytes", mr.memo_bytes},
                   {"block_histogram", hist},
                   {"wall_ms", ms}},
              report_path);
  return 0;
}

int run_infer(const std::string& bundle_dir, const std::string& model_path,
              const std::string& targets_path, std::size_t n, std::uint64_t seed, bool explain,
              std::size_t budget, const std::string& report_path) {
  LoadedBundle lb = read_bundle(bundle_dir);
  ModelSpec m = load_model(model_path);
  TargetMapper mapper(lb);

  std::vector<NodeId> requested;
  if (targets_path.empty()) {
    if (!lb.meta.anchor_set.empty()) {
      requested = lb.meta.anchor_set;
    } else {
      requested.resize(lb.graph.node_count());
      for (NodeId v = 0; v < requested.size(); ++v) requested[v] = v;
    }
  } else {
    requested = read_targets(targets_path);
  }

  Workload workload;
  workload.processors = n;
  workload.explain = explain;
  workload.explain_budget = budget;
  workload.seed = seed;
  json unmapped = json::array();
  for (NodeId t : requested) {
    const std::int64_t internal = mapper.map(t);
    if (internal < 0) {
      unmapped.push_back(t);
    } else {
      workload.targets.push_back(static_cast<NodeId>(internal));
    }
  }

  RunOptions options;
  options.stable_order = true;
  double ms = 0;
  std::vector<ResultEnvelope> results;
  ms = wall_ms([&] { results = run_parallel(workload, lb.graph, lb.memo, m, options); });

  json out_results = json::array();
  for (const auto& env : results) {
    out_results.push_back(envelope_json(env, mapper.unmap(lb, env.target)));
  }
  emit_report(json{{"bundle", bundle_dir},
                   {"scheme", lb.meta.scheme},
                   {"n", n},
                   {"targets", workload.targets.size()},
                   {"unmapped_targets", unmapped},
                   {"wall_ms", ms},
                   {"results", out_results}},
              report_path);
  return unmapped.empty() ? 0 : 1;
}

int run_verify(const GraphArgs& gargs, const std::string& bundle_dir,
               const std::string& model_path, const std::string& targets_path, double tolerance,
               const std::string& report_path) {
  if (tolerance <= 0) throw ArgumentError("tolerance must be > 0");
  FeaturedGraph g = gargs.load();
  LoadedBundle lb = read_bundle(bundle_dir);
  ModelSpec m = load_model(model_path);
  TargetMapper mapper(lb);

  if (lb.meta.cls != m.cls) {
    // memo/model mismatch is recorded as a failure, not an exception
    emit_report(json{{"pass", false},
                     {"reason", std::string("bundle was compressed for ") +
                                    model_class_name(lb.meta.cls) + " but model is " +
                                    model_class_name(m.cls)}},
                report_path);
    return 1;
  }

  const bool anchored = lb.meta.scheme == "anchored";
  std::vector<NodeId> originals;
  if (!targets_path.empty()) {
    originals = read_targets(targets_path);
  } else if (anchored) {
    originals = lb.meta.anchor_set;  // guarantee scope
  } else {
    originals.resize(g.node_count);
    for (NodeId v = 0; v < g.node_count; ++v) originals[v] = v;
  }

  json warnings = json::array();
  if (m.cls == ModelClass::kVanilla && m.aggregator != lb.meta.aggregator) {
    warnings.push_back("bundle was refined for a different vanilla aggregator");
  }
  std::vector<NodeId> kept_orig, internal;
  for (NodeId t : originals) {
    if (anchored) {
      bool is_anchor = std::find(lb.meta.anchor_set.begin(), lb.meta.anchor_set.end(), t) !=
                       lb.meta.anchor_set.end();
      if (!is_anchor) {
        warnings.push_back("node " + std::to_string(t) +
                           " is not anchored: no preservation guarantee applies");
      }
    }
    const std::int64_t i = mapper.map(t);
    if (i < 0) {
      warnings.push_back("node " + std::to_string(t) + " is outside the compressed bundle");
      continue;
    }
    kept_orig.push_back(t);
    internal.push_back(static_cast<NodeId>(i));
  }

  const NeighborView nv = NeighborView::build(g);
  EmbeddingMatrix ref = infer_reference(g, nv, m, kept_orig);
  EmbeddingMatrix cmp = infer_compressed(lb.graph, lb.memo, m, internal);

  double max_gap = 0;
  std::size_t agree = 0;
  for (std::size_t i = 0; i < kept_orig.size(); ++i) {
    auto a = ref.row(i), b = cmp.row(i);
    for (std::size_t j = 0; j < a.size(); ++j) max_gap = std::max(max_gap, std::abs(a[j] - b[j]));
    if (classify_row(a) == classify_row(b)) ++agree;
  }
  const double agreement =
      kept_orig.empty() ? 1.0 : static_cast<double>(agree) / static_cast<double>(kept_orig.size());

  // lossy bundles report only; exact schemes assert the tolerance
  const bool asserted = lb.meta.exact;
  const bool pass = !asserted || (max_gap <= tolerance && agree == kept_orig.size());
  emit_report(json{{"scheme", lb.meta.scheme},
                   {"exact_scheme", lb.meta.exact},
                   {"targets", kept_orig.size()},
                   {"max_abs_gap", max_gap},
                   {"label_agreement", agreement},
                   {"tolerance", tolerance},
                   {"asserted", asserted},
                   {"pass", pass},
                   {"warnings", warnings}},
              report_path);
  return pass ? 0 : 1;
}

int run_explain(const std::string& bundle_dir, const std::string& model_path,
                const std::string& targets_path, std::size_t budget,
                const std::string& report_path) {
  LoadedBundle lb = read_bundle(bundle_dir);
  ModelSpec m = load_model(model_path);
  TargetMapper mapper(lb);
  if (targets_path.empty()) throw ArgumentError("explain needs --targets");

  json out = json::array();
  for (NodeId t : read_targets(targets_path)) {
    const std::int64_t internal = mapper.map(t);
    if (internal < 0) {
      out.push_back(json{{"target", t}, {"error", "outside the compressed bundle"}});
      continue;
    }
    CompressedSlice slice = slice_joblet(lb.graph, lb.memo, static_cast<NodeId>(internal),
                                         m.layers);
    Explanation e = build_explanation(slice, m, budget);
    json influences = json::array();
    for (const auto& [v, s] : e.influences) {
      influences.push_back(
          {{"node", v}, {"score", std::isinf(s) ? json("inf") : json(s)}});
    }
    out.push_back(json{{"target", t},
                       {"blocks", e.blocks},
                       {"nodes", e.nodes},
                       {"factual_ok", e.factual_ok},
                       {"counterfactual_ok", e.counterfactual_ok},
                       {"budget_used", e.budget_used},
                       {"skipped", e.skipped},
                       {"influences", influences},
                       {"text", format_explanation(e)}});
  }
  emit_report(json{{"bundle", bundle_dir}, {"explanations", out}}, report_path);
  return 0;
}

int run_bench(const GraphArgs& gargs, const std::string& bundle_dir,
              const std::string& model_path, const std::string& targets_path,
              const std::vector<std::size_t>& n_list, std::uint64_t seed,
              const std::string& report_path) {
  FeaturedGraph g = gargs.load();
  LoadedBundle lb = read_bundle(bundle_dir);
  ModelSpec m = load_model(model_path);
  TargetMapper mapper(lb);

  std::vector<NodeId> originals;
  if (!targets_path.empty()) {
    originals = read_targets(targets_path);
  } else {
    originals.resize(g.node_count);
    for (NodeId v = 0; v < g.node_count; ++v) originals[v] = v;
  }
  std::vector<NodeId> internal;
  for (NodeId t : originals) {
    const std::int64_t i = mapper.map(t);
    if (i >= 0) internal.push_back(static_cast<NodeId>(i));
  }

  const NeighborView nv = NeighborView::build(g);
  double t_mg = wall_ms([&] { (void)infer_reference(g, nv, m, originals); });
  double t_mc = wall_ms([&] { (void)infer_compressed(lb.graph, lb.memo, m, internal); });

  Workload workload;
  workload.targets = internal;
  workload.seed = seed;
  double t_seq = 0;
  json per_n = json::array();
  json per_target_detail = json::array();
  for (std::size_t n : n_list) {
    workload.processors = n;
    std::vector<ResultEnvelope> results;
    double ms = wall_ms([&] {
      RunOptions options;
      options.stable_order = true;
      results = run_parallel(workload, lb.graph, lb.memo, m, options);
    });
    if (n == 1 || t_seq == 0) t_seq = (n == 1) ? ms : t_seq;
    if (per_target_detail.empty()) {
      for (const auto& env : results) {
        per_target_detail.push_back(json{{"target", mapper.unmap(lb, env.target)},
                                         {"slice_ms", env.slice_ms},
                                         {"infer_ms", env.infer_ms}});
      }
    }
    const double per_target = internal.empty() ? 0 : ms / static_cast<double>(internal.size());
    per_n.push_back(json{{"n", n},
                         {"wall_ms", ms},
                         {"per_target_ms", per_target},
                         {"speedup_vs_seq", t_seq > 0 ? t_seq / ms : 1.0}});
  }

  emit_report(json{{"graph_size", g.size()},
                   {"compressed_size", lb.graph.size()},
                   {"targets", internal.size()},
                   {"T_MG_ms", t_mg},
                   {"T_MC_ms", t_mc},
                   {"inference_speedup", t_mc > 0 ? t_mg / t_mc : 0.0},
                   {"parallel", per_n},
                   {"per_target", per_target_detail}},
              report_path);
  return 0;
}

int run_gen_bahouse(std::size_t backbone, std::size_t houses, std::size_t attach,
                    std::uint64_t seed, const std::string& out_prefix) {
  FeaturedGraph g = make_ba_house_graph(backbone, houses, attach, seed);
  save_graph(g, out_prefix + ".edges.tsv", out_prefix + ".features.tsv");
  std::cerr << "wrote " << out_prefix << ".edges.tsv (" << g.node_count << " nodes, "
            << g.edges.size() << " edges)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"compress featured graphs into inference-equivalent quotients and run "
               "fixed-weight GNN inference on them"};
  app.require_subcommand(1);

  // compress
  auto* c = app.add_subcommand("compress", "build a compressed bundle and metrics report");
  GraphArgs c_graph;
  c_graph.attach(c);
  std::string c_scheme = "spgc", c_class = "vanilla", c_agg = "sum", c_anchors, c_out, c_report;
  double c_alpha = 0.5;
  unsigned c_r = 1, c_layers = 2;
  bool c_exact = false, c_no_exact = false;
  std::size_t c_weight_layers = 1;
  c->add_option("--scheme", c_scheme, "spgc | alpha-r | anchored")->required();
  c->add_option("--alpha", c_alpha, "feature similarity threshold (alpha-r)");
  c->add_option("--r", c_r, "hop radius (alpha-r)");
  c->add_option("--anchors", c_anchors, "anchor node file (anchored)");
  c->add_option("--layers", c_layers, "layer bound L (anchored)");
  c->add_option("--model-class", c_class, "vanilla | gcn | gat | sage | gin");
  c->add_option("--aggregator", c_agg, "sum | avg (vanilla aggregation)");
  c->add_option("--weight-layers", c_weight_layers, "layers of edge weights to memoize (gat)");
  c->add_flag("--exact", c_exact, "force the uniform-scaling refinement (alpha-r)");
  c->add_flag("--no-exact", c_no_exact, "skip the uniform-scaling refinement (spgc/anchored)");
  c->add_option("--out", c_out, "bundle output directory")->required();
  c->add_option("--report", c_report, "report path (default: stdout)");

  // infer
  auto* i = app.add_subcommand("infer", "parallel inference over a compressed bundle");
  std::string i_bundle, i_model, i_targets, i_report;
  std::size_t i_n = 1, i_budget = 4;
  std::uint64_t i_seed = 0;
  bool i_explain = false;
  i->add_option("--bundle", i_bundle, "bundle directory")->required();
  i->add_option("--model", i_model, "model file")->required();
  i->add_option("--targets", i_targets, "target node file (default: all / anchors)");
  i->add_option("--n", i_n, "worker count");
  i->add_option("--seed", i_seed, "batch shuffle seed");
  i->add_flag("--explain", i_explain, "attach explanations");
  i->add_option("--budget", i_budget, "explanation budget (blocks)");
  i->add_option("--out", i_report, "report path (default: stdout)");

  // verify
  auto* v = app.add_subcommand("verify", "reference vs compressed parity report");
  GraphArgs v_graph;
  v_graph.attach(v);
  std::string v_bundle, v_model, v_targets, v_report;
  double v_tolerance = 1e-9;
  v->add_option("--bundle", v_bundle, "bundle directory")->required();
  v->add_option("--model", v_model, "model file")->required();
  v->add_option("--targets", v_targets, "target node file");
  v->add_option("--tolerance", v_tolerance, "max allowed absolute gap");
  v->add_option("--out", v_report, "report path (default: stdout)");

  // explain
  auto* e = app.add_subcommand("explain", "explanatory subgraphs for target nodes");
  std::string e_bundle, e_model, e_targets, e_report;
  std::size_t e_budget = 4;
  e->add_option("--bundle", e_bundle, "bundle directory")->required();
  e->add_option("--model", e_model, "model file")->required();
  e->add_option("--targets", e_targets, "target node file")->required();
  e->add_option("--budget", e_budget, "max blocks beyond the target's own");
  e->add_option("--out", e_report, "report path (default: stdout)");

  // bench
  auto* b = app.add_subcommand("bench", "timing report: reference vs compressed, 1..n workers");
  GraphArgs b_graph;
  b_graph.attach(b);
  std::string b_bundle, b_model, b_targets, b_report;
  std::vector<std::size_t> b_n_list{1, 2, 4, 8};
  std::uint64_t b_seed = 0;
  b->add_option("--bundle", b_bundle, "bundle directory")->required();
  b->add_option("--model", b_model, "model file")->required();
  b->add_option("--targets", b_targets, "target node file (default: all)");
  b->add_option("--n", b_n_list, "worker counts to sweep");
  b->add_option("--seed", b_seed, "batch shuffle seed");
  b->add_option("--out", b_report, "report path (default: stdout)");

  // gen-bahouse (fixture generator)
  auto* gen = app.add_subcommand("gen-bahouse", "generate a motif-rich synthetic graph");
  std::size_t g_backbone = 4000, g_houses = 3500, g_attach = 2;
  std::uint64_t g_seed = 7;
  std::string g_prefix;
  gen->add_option("--backbone", g_backbone, "backbone node count");
  gen->add_option("--houses", g_houses, "house motif count");
  gen->add_option("--attach", g_attach, "backbone attachment degree");
  gen->add_option("--seed", g_seed, "generator seed");
  gen->add_option("--out-prefix", g_prefix, "output path prefix")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(c)) {
      return run_compress(c_graph, c_scheme, c_alpha, c_r, c_layers, c_class, c_agg, c_exact,
                          c_no_exact, c_weight_layers, c_anchors, c_out, c_report);
    }
    if (app.got_subcommand(i)) {
      return run_infer(i_bundle, i_model, i_targets, i_n, i_seed, i_explain, i_budget, i_report);
    }
    if (app.got_subcommand(v)) {
      return run_verify(v_graph, v_bundle, v_model, v_targets, v_tolerance, v_report);
    }
    if (app.got_subcommand(e)) {
      return run_explain(e_bundle, e_model, e_targets, e_budget, e_report);
    }
    if (app.got_subcommand(b)) {
      return run_bench(b_graph, b_bundle, b_model, b_targets, b_n_list, b_seed, b_report);
    }
    if (app.got_subcommand(gen)) {
      return run_gen_bahouse(g_backbone, g_houses, g_attach, g_seed, g_prefix);
    }
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return 1;
  }
  return 0;
}
