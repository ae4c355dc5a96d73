#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qgnn/types.hpp"

namespace qgnn {

using Token = std::uint32_t;

// Grammar-compressed adjacency, grouped per partition block. Tokens below
// alphabet_size are node ids; token alphabet_size + i expands via rules[i].
struct RePairBundle {
  Token alphabet_size = 0;
  std::vector<std::pair<Token, Token>> rules;

  struct BlockStream {
    BlockId block = 0;
    std::vector<NodeId> members;            // list owners, in encoding order
    std::vector<std::uint32_t> list_sizes;  // expanded length per member list
    std::vector<Token> stream;              // encoded concatenation of the lists
  };
  std::vector<BlockStream> streams;

  bool empty() const { return streams.empty(); }
};

// Repeatedly replaces the most frequent adjacent token pair (non-overlapping
// count >= 2; ties to the lexicographically smallest pair) with a fresh rule
// token. Lossless: expansion reproduces the input lists byte-exactly.
std::vector<Token> repair_encode_stream(std::span<const Token> input, Token alphabet_size,
                                        std::vector<std::pair<Token, Token>>& rules);

std::vector<Token> repair_expand_stream(std::span<const Token> stream, Token alphabet_size,
                                        std::span<const std::pair<Token, Token>> rules);

// Encodes per-node sorted adjacency lists, grouped by block; `order` lists
// every node in its encoding order (blocks ascending, members as given).
RePairBundle repair_encode(const std::vector<std::vector<NodeId>>& adjacency,
                           std::span<const BlockId> block_of, std::size_t block_count,
                           std::size_t node_count);

// member node -> expanded adjacency list; throws CorruptionError when the
// bundle does not decode consistently
std::vector<std::vector<NodeId>> repair_decode(const RePairBundle& bundle,
                                               std::size_t node_count);

void save_repair(const RePairBundle& bundle, const std::string& path);
RePairBundle load_repair(const std::string& path);

struct CompressedGraph;  // compress.hpp

// Decompressed graph: the quotient plus restored member -> block edges.
struct DecompressedGraph {
  std::size_t block_count = 0;
  std::vector<NodeId> added_nodes;                      // materialized members
  std::vector<std::pair<NodeId, BlockId>> added_edges;  // (restored neighbor, block)
};

// Restores r-hop neighbors per block: members visited once in descending
// r-hop-degree order, each not-yet-materialized neighbor u of v is added
// with an edge (u, [v]).
DecompressedGraph decomp_g(const CompressedGraph& gc, const RePairBundle& bundle,
                           std::span<const std::uint32_t> gr_degrees);

}  // namespace qgnn
