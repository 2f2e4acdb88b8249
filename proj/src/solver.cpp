#include "satnn/solver.hpp"

#include <algorithm>
#include <cmath>

namespace satnn {

namespace {

// Literal encoding used by the search engines: 2*var for positive,
// 2*var+1 for negative.
inline int enc(const Literal& l) { return 2 * l.var + (l.positive ? 0 : 1); }
inline int enc_neg(int lit) { return lit ^ 1; }
inline int enc_var(int lit) { return lit >> 1; }

struct ClauseDb {
  int num_vars = 0;
  std::vector<std::vector<int>> lits;  // per clause, encoded
  std::vector<std::vector<int>> occ;   // per encoded literal, clause ids

  explicit ClauseDb(const CnfFormula& f) {
    num_vars = f.num_vars;
    lits.reserve(f.clauses.size());
    occ.assign(2 * f.num_vars, {});
    for (const Clause& c : f.clauses) {
      std::vector<int> cl;
      cl.reserve(c.size());
      for (const Literal& l : c) cl.push_back(enc(l));
      int id = static_cast<int>(lits.size());
      lits.push_back(std::move(cl));
      for (int l : lits.back()) occ[l].push_back(id);
    }
  }
};

// Counter-based trail engine shared by the complete solver and the
// branch-and-bound optimizers.
struct Engine {
  const ClauseDb& db;
  std::vector<int8_t> value;       // -1 unassigned, else 0/1
  std::vector<int> n_true;         // per clause: literals currently true
  std::vector<int> n_unassigned;   // per clause: literals currently unassigned
  std::vector<int> trail;
  int falsified = 0;               // clauses with n_true==0 && n_unassigned==0
  long nodes = 0;
  long max_nodes;

  Engine(const ClauseDb& d, long budget) : db(d), max_nodes(budget) {
    value.assign(d.num_vars, -1);
    n_true.assign(d.lits.size(), 0);
    n_unassigned.assign(d.lits.size(), 0);
    for (size_t c = 0; c < d.lits.size(); ++c)
      n_unassigned[c] = static_cast<int>(d.lits[c].size());
  }

  bool lit_true(int lit) const {
    int8_t v = value[enc_var(lit)];
    return v >= 0 && v == ((lit & 1) ? 0 : 1);
  }

  void assign(int lit) {
    value[enc_var(lit)] = (lit & 1) ? 0 : 1;
    trail.push_back(lit);
    for (int c : db.occ[lit]) ++n_true[c];
    for (int c : db.occ[enc_neg(lit)]) {
      --n_unassigned[c];
      if (n_true[c] == 0 && n_unassigned[c] == 0) ++falsified;
    }
  }

  void backtrack(size_t mark) {
    while (trail.size() > mark) {
      int lit = trail.back();
      trail.pop_back();
      for (int c : db.occ[lit]) --n_true[c];
      for (int c : db.occ[enc_neg(lit)]) {
        if (n_true[c] == 0 && n_unassigned[c] == 0) --falsified;
        ++n_unassigned[c];
      }
      value[enc_var(lit)] = -1;
    }
  }

  // Propagates from trail position `qhead` to fixed point. Returns false on
  // conflict (some clause fully falsified).
  bool propagate(size_t qhead) {
    while (qhead < trail.size()) {
      int lit = trail[qhead++];
      for (int c : db.occ[enc_neg(lit)]) {
        if (n_true[c] > 0) continue;
        if (n_unassigned[c] == 0) return false;
        if (n_unassigned[c] == 1) {
          for (int l : db.lits[c]) {
            if (value[enc_var(l)] == -1) {
              assign(l);
              break;
            }
          }
        }
      }
    }
    return true;
  }

  // Unassigned variable occurring most often in active (unsatisfied,
  // undetermined) clauses; ties go to the lowest index. -1 if none.
  int pick_branch_var() const {
    std::vector<int> count(db.num_vars, 0);
    for (size_t c = 0; c < db.lits.size(); ++c) {
      if (n_true[c] > 0 || n_unassigned[c] == 0) continue;
      for (int l : db.lits[c])
        if (value[enc_var(l)] == -1) ++count[enc_var(l)];
    }
    int best = -1, best_count = 0;
    for (int v = 0; v < db.num_vars; ++v) {
      if (value[v] == -1 && count[v] > best_count) {
        best = v;
        best_count = count[v];
      }
    }
    return best;
  }

  Assignment extract(bool default_value = false) const {
    Assignment a(db.num_vars);
    for (int v = 0; v < db.num_vars; ++v)
      a[v] = value[v] == -1 ? (default_value ? 1 : 0) : static_cast<uint8_t>(value[v]);
    return a;
  }

  void bump() {
    if (++nodes > max_nodes) throw BudgetExceeded("solver node budget exceeded");
  }
};

bool dpll_search(Engine& e) {
  int v = e.pick_branch_var();
  if (v < 0) return true;  // every clause satisfied or no active clause left
  for (int val = 1; val >= 0; --val) {
    e.bump();
    size_t mark = e.trail.size();
    e.assign(2 * v + (val ? 0 : 1));
    if (e.propagate(mark) && dpll_search(e)) return true;
    e.backtrack(mark);
  }
  return false;
}

struct MaxsatSearch {
  Engine& e;
  int best_gap;
  Assignment best_witness;

  void run(int depth) {
    if (e.falsified >= best_gap) return;
    int v = e.pick_branch_var();
    if (v < 0) {
      // remaining clauses are all satisfied; value[] completion is free
      if (e.falsified < best_gap) {
        best_gap = e.falsified;
        best_witness = e.extract();
      }
      return;
    }
    for (int val = 1; val >= 0; --val) {
      e.bump();
      size_t mark = e.trail.size();
      e.assign(2 * v + (val ? 0 : 1));
      run(depth + 1);
      e.backtrack(mark);
      if (best_gap == 0) return;
    }
  }
};

struct ClosestSearch {
  Engine& e;
  const Assignment& ref;
  int mismatches = 0;
  int best_gap;
  int best_ham;
  Assignment best;

  // Fixed variable order with the true branch first makes the first strict
  // improvement the lexicographically greatest optimum (true > false).
  void run(int v) {
    if (e.falsified > best_gap ||
        (e.falsified == best_gap && mismatches >= best_ham))
      return;
    if (v == e.db.num_vars) {
      best_gap = e.falsified;
      best_ham = mismatches;
      best = e.extract();
      return;
    }
    for (int val = 1; val >= 0; --val) {
      e.bump();
      size_t mark = e.trail.size();
      e.assign(2 * v + (val ? 0 : 1));
      int miss = (val != static_cast<int>(ref[v])) ? 1 : 0;
      mismatches += miss;
      run(v + 1);
      mismatches -= miss;
      e.backtrack(mark);
    }
  }
};

}  // namespace

PropagationOutcome unit_propagate(const CnfFormula& f, const PartialAssignment& p) {
  PropagationOutcome out;
  if (p.values.empty())
    out.extended = PartialAssignment::make_empty(f.num_vars);
  else if (static_cast<int>(p.values.size()) == f.num_vars)
    out.extended = p;
  else
    throw std::invalid_argument("partial assignment length mismatch");

  auto& vals = out.extended.values;
  std::vector<char> satisfied(f.clauses.size(), 0);
  bool changed = true;
  while (changed) {
    changed = false;
    for (size_t c = 0; c < f.clauses.size(); ++c) {
      if (satisfied[c]) continue;
      int unassigned = 0;
      const Literal* unit = nullptr;
      bool sat = false;
      for (const Literal& l : f.clauses[c]) {
        TruthValue v = vals[l.var];
        if (v == TruthValue::Unassigned) {
          ++unassigned;
          unit = &l;
        } else if ((v == TruthValue::True) == l.positive) {
          sat = true;
          break;
        }
      }
      if (sat) {
        satisfied[c] = 1;
        continue;
      }
      if (unassigned == 0) {
        out.kind = PropagationKind::Conflict;
        out.residual = CnfFormula{f.num_vars, {}};
        return out;
      }
      if (unassigned == 1) {
        out.extended.set(unit->var, unit->positive);
        satisfied[c] = 1;
        changed = true;
      }
    }
  }

  out.residual.num_vars = f.num_vars;
  for (size_t c = 0; c < f.clauses.size(); ++c) {
    if (satisfied[c]) continue;
    Clause reduced;
    for (const Literal& l : f.clauses[c])
      if (vals[l.var] == TruthValue::Unassigned) reduced.push_back(l);
    out.residual.clauses.push_back(std::move(reduced));
  }
  out.kind = out.residual.clauses.empty() ? PropagationKind::Solved
                                          : PropagationKind::Simplified;
  return out;
}

DpllResult dpll_solve(const CnfFormula& f, const SolverBudget& budget) {
  ClauseDb db(f);
  Engine e(db, budget.max_nodes);

  // seed propagation with the input units
  size_t qhead = 0;
  for (size_t c = 0; c < db.lits.size(); ++c) {
    if (db.lits[c].size() == 1) {
      int lit = db.lits[c][0];
      if (e.value[enc_var(lit)] == -1)
        e.assign(lit);
      else if (!e.lit_true(lit))
        return {false, {}, e.nodes};
    }
  }
  if (!e.propagate(qhead)) return {false, {}, e.nodes};

  DpllResult r;
  r.satisfiable = dpll_search(e);
  if (r.satisfiable) r.witness = e.extract();
  r.nodes = e.nodes;
  return r;
}

MaxsatResult maxsat_optimum(const CnfFormula& f, const SolverBudget& budget) {
  ClauseDb db(f);
  Engine e(db, budget.max_nodes);
  Assignment all_true(f.num_vars, 1);
  MaxsatSearch s{e, evaluate(f, all_true).gap, all_true};
  s.run(0);
  return {s.best_gap, s.best_witness, e.nodes};
}

Assignment closest_assignment(const CnfFormula& f, const std::vector<double>& ref,
                              const SolverBudget& budget) {
  if (static_cast<int>(ref.size()) != f.num_vars)
    throw std::invalid_argument("reference length mismatch");
  Assignment rounded(f.num_vars);
  for (int v = 0; v < f.num_vars; ++v) rounded[v] = ref[v] >= 0.5 ? 1 : 0;

  ClauseDb db(f);
  Engine e(db, budget.max_nodes);
  ClosestSearch s{e, rounded, 0, f.num_clauses() + 1, f.num_vars + 1, {}};
  s.run(0);
  return s.best;
}

}  // namespace satnn
