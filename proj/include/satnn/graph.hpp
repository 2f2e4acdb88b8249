#pragma once

#include <cstdint>
#include <vector>

#include "satnn/cnf.hpp"

namespace satnn {

enum class GraphKind { LCG, VCG };

// Bipartite incidence structure of a formula. Edges are stored edge-major in
// clause order (iterating clauses, then literals within a clause), which makes
// per-clause edge lists contiguous and keeps segment reductions deterministic.
//
// LCG: one node per literal; variable v's positive literal is row v and its
// negation row v + n. All polarities are +1.
// VCG: one node per variable; the edge polarity carries the literal sign.
struct FormulaGraph {
  GraphKind kind = GraphKind::VCG;
  int num_vars = 0;
  int num_left = 0;     // 2n for LCG, n for VCG
  int num_clauses = 0;

  std::vector<int> edge_left;
  std::vector<int> edge_clause;
  std::vector<int8_t> edge_polarity;   // +1 / -1

  std::vector<int> flip;               // LCG only: complement row per left row
  std::vector<int> pos_rows;           // per variable, its readout row

  std::vector<int> clause_offsets;     // CSR over edges, size num_clauses+1
  std::vector<int> left_offsets;       // CSR of the transpose, size num_left+1
  std::vector<int> left_edges;         // edge ids grouped by left row

  int num_edges() const { return static_cast<int>(edge_left.size()); }
};

FormulaGraph build_vcg(const CnfFormula& f);
FormulaGraph build_lcg(const CnfFormula& f);

// Involutive permutation pairing each literal row with its complement.
// Throws std::invalid_argument for VCG graphs.
std::vector<int> flip_pairing(const FormulaGraph& g);

// Disjoint union of several formulas into one graph plus bookkeeping used for
// batched message passing and per-graph pooling.
struct GraphBatch {
  FormulaGraph graph;
  std::vector<int> var_offset;      // per instance, first variable row in logits
  std::vector<int> left_graph_id;   // per left row
  std::vector<int> clause_graph_id; // per clause row
  std::vector<int> n_per_graph;
  std::vector<int> m_per_graph;
  int num_graphs = 0;
  int total_vars = 0;
};

GraphBatch build_batch(const std::vector<const CnfFormula*>& formulas, GraphKind kind);

}  // namespace satnn
