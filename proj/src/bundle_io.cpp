#include "qgnn/bundle_io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace qgnn {

namespace {

void real_text(std::ostream& out, Real x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  out << buf;
}

}  // namespace

void write_partition_text(std::ostream& out, std::span<const BlockId> block_of) {
  for (std::size_t v = 0; v < block_of.size(); ++v) out << v << '\t' << block_of[v] << '\n';
}

void write_superedges_text(std::ostream& out, const CompressedGraph& gc) {
  for (const auto& [a, b] : gc.superedges) out << a << '\t' << b << '\n';
}

void write_block_features_text(std::ostream& out, const CompressedGraph& gc) {
  out << gc.block_count << ' ' << gc.feature_dim << '\n';
  for (BlockId b = 0; b < gc.block_count; ++b) {
    auto row = gc.block_feature(b);
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out << ' ';
      real_text(out, row[j]);
    }
    out << '\n';
  }
}

void write_memo_text(std::ostream& out, const CompressedGraph& gc, const MemoTable& memo) {
  const bool layered = memo.mode == MemoMode::kWeight;
  auto write_node = [&](NodeId v) {
    for (std::size_t k = 0; k < memo.rows.size(); ++k) {
      for (const auto& [b, f] : memo.rows[k][v]) {
        out << v << '\t' << b << '\t';
        if (layered) out << (k + 1) << '\t';
        real_text(out, f);
        out << '\n';
      }
    }
  };
  if (memo.exact) {
    for (const auto& ms : gc.members) write_node(ms[0]);
  } else {
    for (NodeId v = 0; v < gc.node_count(); ++v) write_node(v);
  }
}

void write_degrees_text(std::ostream& out, const MemoTable& memo) {
  for (std::size_t v = 0; v < memo.degrees.size(); ++v) {
    out << v << '\t' << memo.degrees[v] << '\n';
  }
}

void write_bundle(const std::string& dir, const CompressedGraph& gc, const MemoTable& memo,
                  const RePairBundle* repair, const std::vector<NodeId>* to_original,
                  const BundleMeta& meta) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream out(fs::path(dir) / name);
    if (!out) throw IoError(std::string("cannot write ") + name + " in " + dir);
    return out;
  };
  {
    auto out = open("partition.tsv");
    write_partition_text(out, gc.block_of);
  }
  {
    auto out = open("superedges.tsv");
    write_superedges_text(out, gc);
  }
  {
    auto out = open("block_features.tsv");
    write_block_features_text(out, gc);
  }
  {
    auto out = open("memo.tsv");
    write_memo_text(out, gc, memo);
  }
  {
    auto out = open("degrees.tsv");
    write_degrees_text(out, memo);
  }
  if (repair) save_repair(*repair, (fs::path(dir) / "repair.bin").string());
  if (to_original) {
    auto out = open("anchors.tsv");
    for (std::size_t v = 0; v < to_original->size(); ++v) {
      out << v << '\t' << (*to_original)[v] << '\n';
    }
  }

  nlohmann::json j;
  j["scheme"] = meta.scheme;
  j["alpha"] = meta.alpha;
  j["r"] = meta.r;
  j["L"] = meta.l;
  j["model_class"] = model_class_name(meta.cls);
  j["aggregator"] = meta.aggregator == Aggregator::kAvg ? "avg" : "sum";
  j["direction_mode"] = direction_mode_name(meta.mode);
  j["exact"] = meta.exact;
  j["weight_layers"] = meta.weight_layers;
  j["node_count"] = meta.node_count;
  j["block_count"] = gc.block_count;
  j["superedge_count"] = gc.superedges.size();
  if (!meta.anchor_set.empty()) j["anchors"] = meta.anchor_set;
  j["hashes"] = {{"edges", meta.edge_hash},
                 {"features", meta.feature_hash},
                 {"edge_weights", meta.weight_hash}};
  auto out = open("meta.json");
  out << j.dump(2) << '\n';
}

LoadedBundle read_bundle(const std::string& dir) {
  namespace fs = std::filesystem;
  LoadedBundle lb;

  {
    std::ifstream in(fs::path(dir) / "meta.json");
    if (!in) throw IoError("cannot open meta.json in " + dir);
    nlohmann::json j = nlohmann::json::parse(in);
    lb.meta.scheme = j.at("scheme").get<std::string>();
    lb.meta.alpha = j.at("alpha").get<double>();
    lb.meta.r = j.at("r").get<unsigned>();
    lb.meta.l = j.at("L").get<unsigned>();
    lb.meta.cls = model_class_from_name(j.at("model_class").get<std::string>());
    lb.meta.aggregator =
        j.value("aggregator", "sum") == "avg" ? Aggregator::kAvg : Aggregator::kSum;
    lb.meta.mode = direction_mode_from_name(j.at("direction_mode").get<std::string>());
    lb.meta.exact = j.at("exact").get<bool>();
    lb.meta.weight_layers = j.at("weight_layers").get<std::size_t>();
    lb.meta.node_count = j.at("node_count").get<std::size_t>();
    if (j.contains("anchors")) lb.meta.anchor_set = j["anchors"].get<std::vector<NodeId>>();
    if (j.contains("hashes")) {
      lb.meta.edge_hash = j["hashes"].value("edges", "");
      lb.meta.feature_hash = j["hashes"].value("features", "");
      lb.meta.weight_hash = j["hashes"].value("edge_weights", "");
    }
  }

  CompressedGraph& gc = lb.graph;
  gc.mode = lb.meta.mode;
  {
    Partition p = load_partition((fs::path(dir) / "partition.tsv").string());
    gc.block_of = p.block_of;
    gc.members = p.blocks;
    gc.block_count = p.block_count();
  }
  {
    std::ifstream in(fs::path(dir) / "superedges.tsv");
    if (!in) throw IoError("cannot open superedges.tsv in " + dir);
    std::uint64_t a = 0, b = 0;
    while (in >> a >> b) {
      gc.superedges.emplace_back(static_cast<BlockId>(a), static_cast<BlockId>(b));
    }
  }
  {
    std::ifstream in(fs::path(dir) / "block_features.tsv");
    if (!in) throw IoError("cannot open block_features.tsv in " + dir);
    std::size_t blocks = 0;
    in >> blocks >> gc.feature_dim;
    if (blocks != gc.block_count) throw CorruptionError("block_features.tsv block count mismatch");
    gc.rep_features.resize(blocks * gc.feature_dim);
    for (Real& x : gc.rep_features) {
      if (!(in >> x)) throw CorruptionError("truncated block_features.tsv");
    }
  }

  MemoTable& memo = lb.memo;
  memo.mode = memo_mode_for(lb.meta.cls);
  memo.exact = lb.meta.exact;
  memo.layer_count = memo.mode == MemoMode::kWeight ? lb.meta.weight_layers : 1;
  memo.rows.assign(memo.layer_count, std::vector<MemoRow>(gc.node_count()));
  {
    std::ifstream in(fs::path(dir) / "memo.tsv");
    if (!in) throw IoError("cannot open memo.tsv in " + dir);
    std::string line;
    const bool layered = memo.mode == MemoMode::kWeight;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::istringstream ss(line);
      std::uint64_t v = 0, b = 0, k = 1;
      Real f = 0;
      if (layered) {
        if (!(ss >> v >> b >> k >> f)) throw CorruptionError("bad memo.tsv line: " + line);
      } else {
        if (!(ss >> v >> b >> f)) throw CorruptionError("bad memo.tsv line: " + line);
      }
      if (v >= gc.node_count() || k < 1 || k > memo.layer_count) {
        throw CorruptionError("memo.tsv row out of range: " + line);
      }
      memo.rows[k - 1][v].emplace_back(static_cast<BlockId>(b), f);
    }
  }
  if (memo.exact) {
    // shared rows were written once per block; mirror them onto every member
    for (const auto& ms : gc.members) {
      for (std::size_t k = 0; k < memo.layer_count; ++k) {
        for (std::size_t i = 1; i < ms.size(); ++i) {
          memo.rows[k][ms[i]] = memo.rows[k][ms[0]];
        }
      }
    }
  }
  {
    std::ifstream in(fs::path(dir) / "degrees.tsv");
    if (!in) throw IoError("cannot open degrees.tsv in " + dir);
    std::uint64_t v = 0, d = 0;
    memo.degrees.assign(gc.node_count(), 0);
    while (in >> v >> d) {
      if (v >= memo.degrees.size()) throw CorruptionError("degrees.tsv node out of range");
      memo.degrees[v] = static_cast<std::uint32_t>(d);
    }
  }

  if (fs::exists(fs::path(dir) / "repair.bin")) {
    lb.repair = load_repair((fs::path(dir) / "repair.bin").string());
  }
  if (fs::exists(fs::path(dir) / "anchors.tsv")) {
    std::ifstream in(fs::path(dir) / "anchors.tsv");
    std::uint64_t v = 0, orig = 0;
    lb.to_original.assign(gc.node_count(), 0);
    while (in >> v >> orig) {
      if (v >= lb.to_original.size()) throw CorruptionError("anchors.tsv node out of range");
      lb.to_original[v] = static_cast<NodeId>(orig);
    }
  }
  return lb;
}

}  // namespace qgnn
