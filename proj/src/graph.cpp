#include "satnn/graph.hpp"

#include <numeric>
#include <stdexcept>

namespace satnn {

namespace {

void finish_indices(FormulaGraph& g) {
  g.clause_offsets.assign(g.num_clauses + 1, 0);
  for (int c : g.edge_clause) ++g.clause_offsets[c + 1];
  for (int c = 0; c < g.num_clauses; ++c)
    g.clause_offsets[c + 1] += g.clause_offsets[c];

  g.left_offsets.assign(g.num_left + 1, 0);
  for (int l : g.edge_left) ++g.left_offsets[l + 1];
  for (int l = 0; l < g.num_left; ++l) g.left_offsets[l + 1] += g.left_offsets[l];
  g.left_edges.resize(g.edge_left.size());
  std::vector<int> cursor(g.left_offsets.begin(), g.left_offsets.end() - 1);
  for (int e = 0; e < g.num_edges(); ++e)
    g.left_edges[cursor[g.edge_left[e]]++] = e;
}

}  // namespace

FormulaGraph build_vcg(const CnfFormula& f) {
  FormulaGraph g;
  g.kind = GraphKind::VCG;
  g.num_vars = f.num_vars;
  g.num_left = f.num_vars;
  g.num_clauses = f.num_clauses();
  for (int c = 0; c < f.num_clauses(); ++c) {
    for (const Literal& l : f.clauses[c]) {
      g.edge_left.push_back(l.var);
      g.edge_clause.push_back(c);
      g.edge_polarity.push_back(l.positive ? 1 : -1);
    }
  }
  g.pos_rows.resize(f.num_vars);
  std::iota(g.pos_rows.begin(), g.pos_rows.end(), 0);
  finish_indices(g);
  return g;
}

FormulaGraph build_lcg(const CnfFormula& f) {
  FormulaGraph g;
  g.kind = GraphKind::LCG;
  g.num_vars = f.num_vars;
  g.num_left = 2 * f.num_vars;
  g.num_clauses = f.num_clauses();
  for (int c = 0; c < f.num_clauses(); ++c) {
    for (const Literal& l : f.clauses[c]) {
      g.edge_left.push_back(l.positive ? l.var : l.var + f.num_vars);
      g.edge_clause.push_back(c);
      g.edge_polarity.push_back(1);
    }
  }
  g.flip.resize(g.num_left);
  for (int v = 0; v < f.num_vars; ++v) {
    g.flip[v] = v + f.num_vars;
    g.flip[v + f.num_vars] = v;
  }
  g.pos_rows.resize(f.num_vars);
  std::iota(g.pos_rows.begin(), g.pos_rows.end(), 0);
  finish_indices(g);
  return g;
}

std::vector<int> flip_pairing(const FormulaGraph& g) {
  if (g.kind != GraphKind::LCG)
    throw std::invalid_argument("flip pairing is defined for LCG graphs only");
  return g.flip;
}

GraphBatch build_batch(const std::vector<const CnfFormula*>& formulas, GraphKind kind) {
  GraphBatch b;
  b.num_graphs = static_cast<int>(formulas.size());
  FormulaGraph& g = b.graph;
  g.kind = kind;

  int left_off = 0, clause_off = 0, var_off = 0;
  for (int i = 0; i < b.num_graphs; ++i) {
    const CnfFormula& f = *formulas[i];
    FormulaGraph part = kind == GraphKind::VCG ? build_vcg(f) : build_lcg(f);
    for (int e = 0; e < part.num_edges(); ++e) {
      g.edge_left.push_back(part.edge_left[e] + left_off);
      g.edge_clause.push_back(part.edge_clause[e] + clause_off);
      g.edge_polarity.push_back(part.edge_polarity[e]);
    }
    if (kind == GraphKind::LCG)
      for (int r = 0; r < part.num_left; ++r) g.flip.push_back(part.flip[r] + left_off);
    for (int v = 0; v < f.num_vars; ++v) g.pos_rows.push_back(part.pos_rows[v] + left_off);

    b.var_offset.push_back(var_off);
    for (int r = 0; r < part.num_left; ++r) b.left_graph_id.push_back(i);
    for (int c = 0; c < part.num_clauses; ++c) b.clause_graph_id.push_back(i);
    b.n_per_graph.push_back(f.num_vars);
    b.m_per_graph.push_back(f.num_clauses());

    left_off += part.num_left;
    clause_off += part.num_clauses;
    var_off += f.num_vars;
  }
  g.num_vars = var_off;
  g.num_left = left_off;
  g.num_clauses = clause_off;
  b.total_vars = var_off;
  finish_indices(g);
  return b;
}

}  // namespace satnn
