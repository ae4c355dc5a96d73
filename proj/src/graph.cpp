#include "qgnn/graph.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <deque>
#include <fstream>
#include <sstream>

namespace qgnn {

ModelClass model_class_from_name(const std::string& name) {
  if (name == "vanilla") return ModelClass::kVanilla;
  if (name == "gcn") return ModelClass::kGcn;
  if (name == "gat") return ModelClass::kGat;
  if (name == "sage") return ModelClass::kSage;
  if (name == "gin") return ModelClass::kGin;
  throw ArgumentError("unknown model class: " + name);
}

DirectionMode direction_mode_from_name(const std::string& name) {
  if (name == "in-neighbors") return DirectionMode::kInNeighbors;
  if (name == "undirected") return DirectionMode::kUndirected;
  throw ArgumentError("unknown direction mode: " + name);
}

void EdgeWeights::set(std::size_t layer, NodeId u, NodeId v, Real w) {
  if (layer >= by_layer.size()) {
    by_layer.resize(layer + 1);
    layer_count = by_layer.size();
  }
  by_layer[layer][key(u, v)] = w;
}

Real EdgeWeights::at(std::size_t layer, NodeId u, NodeId v) const {
  const Real* w = find(layer, u, v);
  if (!w) {
    throw MissingWeightsError("no edge weight for (" + std::to_string(u) + ", " +
                              std::to_string(v) + ") at layer " + std::to_string(layer + 1));
  }
  return *w;
}

const Real* EdgeWeights::find(std::size_t layer, NodeId u, NodeId v) const {
  if (layer >= by_layer.size()) return nullptr;
  auto it = by_layer[layer].find(key(u, v));
  return it == by_layer[layer].end() ? nullptr : &it->second;
}

void FeaturedGraph::validate() const {
  if (features.size() != node_count * feature_dim) {
    throw ShapeError("feature matrix is " + std::to_string(features.size()) +
                     " values, expected " + std::to_string(node_count * feature_dim));
  }
  for (const Real x : features) {
    if (!std::isfinite(x)) throw DataError("non-finite feature value");
  }
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const auto& [u, v] = edges[i];
    if (u >= node_count || v >= node_count) {
      throw ReferenceError("edge (" + std::to_string(u) + ", " + std::to_string(v) +
                           ") references a node outside [0, " + std::to_string(node_count) + ")");
    }
    if (i > 0 && edges[i] == edges[i - 1]) {
      throw DataError("duplicate edge (" + std::to_string(u) + ", " + std::to_string(v) + ")");
    }
  }
  if (!edge_weights.empty()) {
    for (std::size_t k = 0; k < edge_weights.layer_count; ++k) {
      for (const auto& [u, v] : edges) {
        const Real* w = edge_weights.find(k, u, v);
        if (!w && mode == DirectionMode::kUndirected) w = edge_weights.find(k, v, u);
        if (!w) {
          throw MissingWeightsError("no edge weight for (" + std::to_string(u) + ", " +
                                    std::to_string(v) + ") at layer " + std::to_string(k + 1));
        }
      }
    }
  }
}

NeighborView NeighborView::build(const FeaturedGraph& g) {
  NeighborView nv;
  nv.mode = g.mode;
  const std::size_t n = g.node_count;
  std::vector<std::vector<NodeId>> in_lists(n);
  for (const auto& [u, v] : g.edges) {
    in_lists[v].push_back(u);
    if (g.mode == DirectionMode::kUndirected && u != v) in_lists[u].push_back(v);
  }
  nv.offsets.assign(n + 1, 0);
  for (std::size_t v = 0; v < n; ++v) {
    auto& l = in_lists[v];
    std::sort(l.begin(), l.end());
    l.erase(std::unique(l.begin(), l.end()), l.end());
    nv.offsets[v + 1] = nv.offsets[v] + static_cast<std::uint32_t>(l.size());
  }
  nv.neighbors.reserve(nv.offsets[n]);
  for (auto& l : in_lists) nv.neighbors.insert(nv.neighbors.end(), l.begin(), l.end());

  std::vector<std::vector<NodeId>> rev(n);
  for (NodeId v = 0; v < n; ++v) {
    for (NodeId u : nv.in(v)) rev[u].push_back(v);
  }
  nv.rev_offsets.assign(n + 1, 0);
  for (std::size_t u = 0; u < n; ++u) {
    nv.rev_offsets[u + 1] = nv.rev_offsets[u] + static_cast<std::uint32_t>(rev[u].size());
  }
  nv.rev_neighbors.reserve(nv.rev_offsets[n]);
  for (auto& l : rev) nv.rev_neighbors.insert(nv.rev_neighbors.end(), l.begin(), l.end());
  return nv;
}

std::vector<std::uint32_t> NeighborView::degrees() const {
  std::vector<std::uint32_t> d(node_count());
  for (std::size_t v = 0; v < d.size(); ++v) d[v] = degree(static_cast<NodeId>(v));
  return d;
}

void canonicalize_edges(std::vector<std::pair<NodeId, NodeId>>& edges, DirectionMode mode) {
  if (mode == DirectionMode::kUndirected) {
    for (auto& [u, v] : edges) {
      if (u > v) std::swap(u, v);
    }
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
}

namespace {

bool is_comment_or_blank(const std::string& line) {
  for (char c : line) {
    if (c == '#') return true;
    if (!std::isspace(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

std::uint64_t parse_u64(const std::string& tok, const std::string& path, std::size_t line_no) {
  std::uint64_t out = 0;
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  if (ec != std::errc{} || p != tok.data() + tok.size()) {
    throw ParseError(path + ":" + std::to_string(line_no) + ": expected integer, got '" + tok +
                     "'");
  }
  return out;
}

Real parse_real(const std::string& tok, const std::string& path, std::size_t line_no) {
  try {
    std::size_t used = 0;
    Real out = std::stod(tok, &used);
    if (used != tok.size()) throw std::invalid_argument(tok);
    return out;
  } catch (const std::exception&) {
    throw ParseError(path + ":" + std::to_string(line_no) + ": expected real, got '" + tok + "'");
  }
}

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream ss(line);
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

}  // namespace

FeaturedGraph load_graph(const std::string& edge_path, const std::string& feature_path,
                         const std::optional<std::string>& weight_path, DirectionMode mode,
                         IdMap* id_map) {
  FeaturedGraph g;
  g.mode = mode;

  std::ifstream fin(feature_path);
  if (!fin) throw IoError("cannot open feature file " + feature_path);
  std::string line;
  std::size_t line_no = 0;
  std::size_t declared_nodes = 0;
  while (std::getline(fin, line)) {
    ++line_no;
    if (is_comment_or_blank(line)) continue;
    auto toks = split_ws(line);
    if (toks.size() != 2) {
      throw ParseError(feature_path + ":" + std::to_string(line_no) +
                       ": header must be '|V| F'");
    }
    declared_nodes = parse_u64(toks[0], feature_path, line_no);
    g.feature_dim = parse_u64(toks[1], feature_path, line_no);
    break;
  }
  g.node_count = declared_nodes;
  g.features.reserve(declared_nodes * g.feature_dim);
  std::size_t rows = 0;
  while (std::getline(fin, line)) {
    ++line_no;
    if (is_comment_or_blank(line)) continue;
    auto toks = split_ws(line);
    if (toks.size() != g.feature_dim) {
      throw ShapeError(feature_path + ":" + std::to_string(line_no) + ": expected " +
                       std::to_string(g.feature_dim) + " values, got " +
                       std::to_string(toks.size()));
    }
    for (const auto& t : toks) g.features.push_back(parse_real(t, feature_path, line_no));
    ++rows;
  }
  if (rows != declared_nodes) {
    throw ShapeError(feature_path + ": declared " + std::to_string(declared_nodes) +
                     " nodes but found " + std::to_string(rows) + " feature rows");
  }

  std::ifstream ein(edge_path);
  if (!ein) throw IoError("cannot open edge file " + edge_path);
  line_no = 0;
  while (std::getline(ein, line)) {
    ++line_no;
    if (is_comment_or_blank(line)) continue;
    auto toks = split_ws(line);
    if (toks.size() != 2) {
      throw ParseError(edge_path + ":" + std::to_string(line_no) + ": expected 'u<TAB>v'");
    }
    std::uint64_t u = parse_u64(toks[0], edge_path, line_no);
    std::uint64_t v = parse_u64(toks[1], edge_path, line_no);
    if (u >= g.node_count || v >= g.node_count) {
      throw ReferenceError(edge_path + ":" + std::to_string(line_no) + ": node " +
                           std::to_string(std::max(u, v)) + " has no feature row (|V| = " +
                           std::to_string(g.node_count) + ")");
    }
    g.edges.emplace_back(static_cast<NodeId>(u), static_cast<NodeId>(v));
  }
  canonicalize_edges(g.edges, g.mode);

  if (weight_path) {
    std::ifstream win(*weight_path);
    if (!win) throw IoError("cannot open edge-weight file " + *weight_path);
    line_no = 0;
    while (std::getline(win, line)) {
      ++line_no;
      if (is_comment_or_blank(line)) continue;
      auto toks = split_ws(line);
      if (toks.size() != 4) {
        throw ParseError(*weight_path + ":" + std::to_string(line_no) +
                         ": expected 'u<TAB>v<TAB>k<TAB>w'");
      }
      std::uint64_t u = parse_u64(toks[0], *weight_path, line_no);
      std::uint64_t v = parse_u64(toks[1], *weight_path, line_no);
      std::uint64_t k = parse_u64(toks[2], *weight_path, line_no);
      Real w = parse_real(toks[3], *weight_path, line_no);
      if (k == 0) {
        throw ParseError(*weight_path + ":" + std::to_string(line_no) + ": layers are 1-based");
      }
      if (u >= g.node_count || v >= g.node_count) {
        throw ReferenceError(*weight_path + ":" + std::to_string(line_no) +
                             ": weight references unknown node");
      }
      g.edge_weights.set(k - 1, static_cast<NodeId>(u), static_cast<NodeId>(v), w);
    }
  }

  g.validate();

  if (id_map) {
    id_map->entries.clear();
    id_map->entries.reserve(g.node_count);
    for (NodeId v = 0; v < g.node_count; ++v) id_map->entries.emplace_back(v, v);
  }
  return g;
}

void write_edges_text(std::ostream& out, const FeaturedGraph& g) {
  for (const auto& [u, v] : g.edges) out << u << '\t' << v << '\n';
}

void write_features_text(std::ostream& out, const FeaturedGraph& g) {
  out << g.node_count << ' ' << g.feature_dim << '\n';
  char buf[64];
  for (NodeId v = 0; v < g.node_count; ++v) {
    auto row = g.feature_row(v);
    for (std::size_t j = 0; j < row.size(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", row[j]);
      if (j) out << ' ';
      out << buf;
    }
    out << '\n';
  }
}

void save_graph(const FeaturedGraph& g, const std::string& edge_path,
                const std::string& feature_path) {
  std::ofstream eout(edge_path);
  if (!eout) throw IoError("cannot write " + edge_path);
  write_edges_text(eout, g);

  std::ofstream fout(feature_path);
  if (!fout) throw IoError("cannot write " + feature_path);
  write_features_text(fout, g);
}

void save_id_map(const IdMap& map, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  for (const auto& [ext, in] : map.entries) out << ext << '\t' << in << '\n';
}

FeaturedGraph discretize_features(const FeaturedGraph& g, const BinSpec& bins) {
  FeaturedGraph out = g;
  const std::size_t f = g.feature_dim;
  for (const Real x : g.features) {
    if (!std::isfinite(x)) throw DataError("non-finite feature value");
  }
  auto column_edges = [&](std::size_t col) -> std::vector<Real> {
    if (!bins.edges.empty()) {
      const auto& e = bins.edges.size() == 1 ? bins.edges[0] : bins.edges.at(col);
      return e;
    }
    std::uint32_t count = bins.counts.size() == 1 ? bins.counts[0] : bins.counts.at(col);
    if (count < 1) throw ArgumentError("bin count must be >= 1");
    Real lo = g.features[col], hi = g.features[col];
    for (NodeId v = 0; v < g.node_count; ++v) {
      Real x = g.feature_row(v)[col];
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
    std::vector<Real> e;
    if (count == 1 || lo == hi) return e;  // single bin, no interior edges
    const Real width = (hi - lo) / count;
    for (std::uint32_t i = 1; i < count; ++i) e.push_back(lo + width * i);
    return e;
  };

  for (std::size_t col = 0; col < f; ++col) {
    if (g.node_count == 0) break;
    const auto e = column_edges(col);
    for (NodeId v = 0; v < g.node_count; ++v) {
      Real x = g.feature_row(v)[col];
      auto it = std::upper_bound(e.begin(), e.end(), x);
      out.feature_row(v)[col] = static_cast<Real>(it - e.begin());
    }
  }
  return out;
}

std::vector<NodeId> r_hop_neighbors(const NeighborView& nv, NodeId v, unsigned r) {
  std::vector<NodeId> found;
  std::vector<unsigned> depth(nv.node_count(), 0);
  std::vector<char> seen(nv.node_count(), 0);
  std::deque<NodeId> frontier;
  frontier.push_back(v);
  depth[v] = 0;
  // v itself is not marked seen: a cycle back into v yields a self edge
  while (!frontier.empty()) {
    NodeId cur = frontier.front();
    frontier.pop_front();
    const unsigned d = depth[cur];
    if (d == r) continue;
    for (NodeId u : nv.in(cur)) {
      if (seen[u]) continue;
      seen[u] = 1;
      found.push_back(u);
      if (u != v) {  // a cycle back into v adds a self edge but no re-expansion
        depth[u] = d + 1;
        frontier.push_back(u);
      }
    }
  }
  std::sort(found.begin(), found.end());
  return found;
}

FeaturedGraph build_r_hop_graph(const FeaturedGraph& g, unsigned r) {
  if (r < 1) throw ArgumentError("r must be >= 1");
  FeaturedGraph out = g;
  out.edges.clear();
  out.edge_weights = EdgeWeights{};
  NeighborView nv = NeighborView::build(g);
  for (NodeId v = 0; v < g.node_count; ++v) {
    for (NodeId u : r_hop_neighbors(nv, v, r)) out.edges.emplace_back(u, v);
  }
  canonicalize_edges(out.edges, out.mode);
  return out;
}

InducedSubgraph induce_l_hop_subgraph(const FeaturedGraph& g, std::span<const NodeId> anchors,
                                      unsigned l) {
  if (anchors.empty()) throw ArgumentError("anchor set must be nonempty");
  NeighborView nv = NeighborView::build(g);
  std::vector<char> keep(g.node_count, 0);
  for (NodeId a : anchors) {
    if (a >= g.node_count) {
      throw ReferenceError("anchor " + std::to_string(a) + " outside graph");
    }
    keep[a] = 1;
    for (NodeId u : r_hop_neighbors(nv, a, l)) keep[u] = 1;
  }

  InducedSubgraph out;
  out.from_original.assign(g.node_count, -1);
  for (NodeId v = 0; v < g.node_count; ++v) {
    if (keep[v]) {
      out.from_original[v] = static_cast<std::int64_t>(out.to_original.size());
      out.to_original.push_back(v);
    }
  }

  FeaturedGraph& s = out.graph;
  s.mode = g.mode;
  s.node_count = out.to_original.size();
  s.feature_dim = g.feature_dim;
  s.features.reserve(s.node_count * s.feature_dim);
  for (NodeId v : out.to_original) {
    auto row = g.feature_row(v);
    s.features.insert(s.features.end(), row.begin(), row.end());
  }
  for (const auto& [u, v] : g.edges) {
    if (keep[u] && keep[v]) {
      NodeId su = static_cast<NodeId>(out.from_original[u]);
      NodeId sv = static_cast<NodeId>(out.from_original[v]);
      s.edges.emplace_back(su, sv);
      for (std::size_t k = 0; k < g.edge_weights.layer_count; ++k) {
        if (const Real* w = g.edge_weights.find(k, u, v)) s.edge_weights.set(k, su, sv, *w);
      }
    }
  }
  std::sort(s.edges.begin(), s.edges.end());
  return out;
}

std::uint64_t fnv1a_file_hash(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[4096];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
    if (!in) break;
  }
  return h;
}

}  // namespace qgnn
