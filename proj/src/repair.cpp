#include "qgnn/repair.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_map>

#include "qgnn/compress.hpp"

namespace qgnn {

namespace {

using TokenPair = std::pair<Token, Token>;

struct PairHash {
  std::size_t operator()(const TokenPair& p) const {
    return std::hash<std::uint64_t>{}((static_cast<std::uint64_t>(p.first) << 32) | p.second);
  }
};

// non-overlapping occurrence counts, greedy left to right
std::unordered_map<TokenPair, std::uint32_t, PairHash> count_pairs(
    std::span<const Token> s) {
  std::unordered_map<TokenPair, std::uint32_t, PairHash> count;
  std::unordered_map<TokenPair, std::size_t, PairHash> last_at;
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    TokenPair p{s[i], s[i + 1]};
    auto it = last_at.find(p);
    if (it != last_at.end() && it->second + 1 == i) continue;  // overlaps previous count
    last_at[p] = i;
    ++count[p];
  }
  return count;
}

}  // namespace

std::vector<Token> repair_encode_stream(std::span<const Token> input, Token alphabet_size,
                                        std::vector<TokenPair>& rules) {
  std::vector<Token> s(input.begin(), input.end());
  std::unordered_map<TokenPair, Token, PairHash> known;
  for (std::size_t i = 0; i < rules.size(); ++i) {
    known[rules[i]] = alphabet_size + static_cast<Token>(i);
  }
  for (;;) {
    auto counts = count_pairs(s);
    TokenPair best{0, 0};
    std::uint32_t best_count = 1;
    for (const auto& [p, c] : counts) {
      if (c > best_count || (c == best_count && c >= 2 && p < best)) {
        best = p;
        best_count = c;
      }
    }
    if (best_count < 2) break;

    Token replacement;
    auto it = known.find(best);
    if (it != known.end()) {
      replacement = it->second;
    } else {
      replacement = alphabet_size + static_cast<Token>(rules.size());
      rules.push_back(best);
      known[best] = replacement;
    }

    std::vector<Token> out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size();) {
      if (i + 1 < s.size() && s[i] == best.first && s[i + 1] == best.second) {
        out.push_back(replacement);
        i += 2;
      } else {
        out.push_back(s[i]);
        ++i;
      }
    }
    s = std::move(out);
  }
  return s;
}

std::vector<Token> repair_expand_stream(std::span<const Token> stream, Token alphabet_size,
                                        std::span<const TokenPair> rules) {
  std::vector<Token> out;
  std::vector<Token> stack;
  for (std::size_t i = stream.size(); i > 0; --i) stack.push_back(stream[i - 1]);
  while (!stack.empty()) {
    Token t = stack.back();
    stack.pop_back();
    if (t < alphabet_size) {
      out.push_back(t);
    } else {
      const std::size_t r = t - alphabet_size;
      if (r >= rules.size()) throw CorruptionError("token references unknown rule");
      stack.push_back(rules[r].second);
      stack.push_back(rules[r].first);
    }
  }
  return out;
}

RePairBundle repair_encode(const std::vector<std::vector<NodeId>>& adjacency,
                           std::span<const BlockId> block_of, std::size_t block_count,
                           std::size_t node_count) {
  RePairBundle bundle;
  bundle.alphabet_size = static_cast<Token>(node_count);
  std::vector<std::vector<NodeId>> members(block_count);
  for (NodeId v = 0; v < adjacency.size(); ++v) members[block_of[v]].push_back(v);

  for (BlockId b = 0; b < block_count; ++b) {
    RePairBundle::BlockStream bs;
    bs.block = b;
    std::vector<Token> flat;
    for (NodeId v : members[b]) {
      bs.members.push_back(v);
      bs.list_sizes.push_back(static_cast<std::uint32_t>(adjacency[v].size()));
      flat.insert(flat.end(), adjacency[v].begin(), adjacency[v].end());
    }
    bs.stream = repair_encode_stream(flat, bundle.alphabet_size, bundle.rules);
    bundle.streams.push_back(std::move(bs));
  }
  return bundle;
}

std::vector<std::vector<NodeId>> repair_decode(const RePairBundle& bundle,
                                               std::size_t node_count) {
  std::vector<std::vector<NodeId>> lists(node_count);
  for (const auto& bs : bundle.streams) {
    std::vector<Token> flat = repair_expand_stream(bs.stream, bundle.alphabet_size, bundle.rules);
    std::size_t pos = 0;
    for (std::size_t i = 0; i < bs.members.size(); ++i) {
      const NodeId v = bs.members[i];
      const std::uint32_t len = bs.list_sizes[i];
      if (v >= node_count || pos + len > flat.size()) {
        throw CorruptionError("encoded stream does not match its member lists");
      }
      lists[v].assign(flat.begin() + pos, flat.begin() + pos + len);
      pos += len;
    }
    if (pos != flat.size()) throw CorruptionError("trailing tokens after member lists");
  }
  return lists;
}

namespace {

void put_u32(std::ofstream& out, std::uint32_t x) {
  unsigned char b[4] = {static_cast<unsigned char>(x), static_cast<unsigned char>(x >> 8),
                        static_cast<unsigned char>(x >> 16), static_cast<unsigned char>(x >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::ifstream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw CorruptionError("truncated repair file");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

void save_repair(const RePairBundle& bundle, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  put_u32(out, bundle.alphabet_size);
  put_u32(out, static_cast<std::uint32_t>(bundle.rules.size()));
  for (const auto& [a, b] : bundle.rules) {
    put_u32(out, a);
    put_u32(out, b);
  }
  put_u32(out, static_cast<std::uint32_t>(bundle.streams.size()));
  for (const auto& bs : bundle.streams) {
    put_u32(out, bs.block);
    put_u32(out, static_cast<std::uint32_t>(bs.members.size()));
    for (std::size_t i = 0; i < bs.members.size(); ++i) {
      put_u32(out, bs.members[i]);
      put_u32(out, bs.list_sizes[i]);
    }
    put_u32(out, static_cast<std::uint32_t>(bs.stream.size()));
    for (Token t : bs.stream) put_u32(out, t);
  }
}

RePairBundle load_repair(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  RePairBundle bundle;
  bundle.alphabet_size = get_u32(in);
  const std::uint32_t nrules = get_u32(in);
  bundle.rules.reserve(nrules);
  for (std::uint32_t i = 0; i < nrules; ++i) {
    Token a = get_u32(in);
    Token b = get_u32(in);
    bundle.rules.emplace_back(a, b);
  }
  const std::uint32_t nstreams = get_u32(in);
  for (std::uint32_t s = 0; s < nstreams; ++s) {
    RePairBundle::BlockStream bs;
    bs.block = get_u32(in);
    const std::uint32_t nmembers = get_u32(in);
    for (std::uint32_t i = 0; i < nmembers; ++i) {
      bs.members.push_back(get_u32(in));
      bs.list_sizes.push_back(get_u32(in));
    }
    const std::uint32_t len = get_u32(in);
    bs.stream.reserve(len);
    for (std::uint32_t i = 0; i < len; ++i) bs.stream.push_back(get_u32(in));
    bundle.streams.push_back(std::move(bs));
  }
  return bundle;
}

DecompressedGraph decomp_g(const CompressedGraph& gc, const RePairBundle& bundle,
                           std::span<const std::uint32_t> gr_degrees) {
  DecompressedGraph out;
  out.block_count = gc.block_count;
  auto lists = repair_decode(bundle, gc.node_count());
  std::vector<char> materialized(gc.node_count(), 0);
  std::vector<std::uint32_t> seen_epoch(gc.node_count(), 0);
  std::uint32_t epoch = 0;

  for (const auto& bs : bundle.streams) {
    std::vector<NodeId> order = bs.members;
    std::sort(order.begin(), order.end(), [&](NodeId a, NodeId b) {
      if (gr_degrees[a] != gr_degrees[b]) return gr_degrees[a] > gr_degrees[b];
      return a < b;
    });
    ++epoch;
    for (NodeId v : order) {
      for (NodeId u : lists[v]) {
        if (seen_epoch[u] == epoch) continue;  // already restored by an earlier member
        seen_epoch[u] = epoch;
        if (!materialized[u]) {
          materialized[u] = 1;
          out.added_nodes.push_back(u);
        }
        out.added_edges.emplace_back(u, bs.block);
      }
    }
  }
  return out;
}

}  // namespace qgnn
