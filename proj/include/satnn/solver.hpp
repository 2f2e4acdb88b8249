#pragma once

#include <optional>
#include <vector>

#include "satnn/cnf.hpp"

namespace satnn {

enum class TruthValue : int8_t { False = 0, True = 1, Unassigned = 2 };

struct PartialAssignment {
  std::vector<TruthValue> values;

  static PartialAssignment make_empty(int num_vars) {
    PartialAssignment p;
    p.values.assign(num_vars, TruthValue::Unassigned);
    return p;
  }
  void set(int var, bool value) {
    values[var] = value ? TruthValue::True : TruthValue::False;
  }
  bool assigned(int var) const { return values[var] != TruthValue::Unassigned; }
};

enum class PropagationKind { Solved, Conflict, Simplified };

// Result of propagating unit clauses to a fixed point. `residual` keeps the
// original variable numbering; it contains the clauses that are not yet
// satisfied, restricted to unassigned literals. Solved means the residual is
// empty; a Simplified residual has no unit and no satisfied clauses.
struct PropagationOutcome {
  PropagationKind kind = PropagationKind::Simplified;
  PartialAssignment extended;
  CnfFormula residual;
};

PropagationOutcome unit_propagate(const CnfFormula& f, const PartialAssignment& p);

struct SolverBudget {
  long max_nodes = 200'000'000;
};

class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DpllResult {
  bool satisfiable = false;
  Assignment witness;  // valid iff satisfiable
  long nodes = 0;
};

// Complete DPLL search: unit propagation plus backtracking. Branches on the
// unassigned variable with the highest occurrence count among active clauses,
// trying true first (deterministic). Throws BudgetExceeded past max_nodes.
DpllResult dpll_solve(const CnfFormula& f, const SolverBudget& budget = {});

struct MaxsatResult {
  int min_gap = 0;
  Assignment witness;
  long nodes = 0;
};

// Exact unweighted MaxSAT via branch and bound with current-best pruning.
// Intended for oracle-scale instances (n up to ~30).
MaxsatResult maxsat_optimum(const CnfFormula& f, const SolverBudget& budget = {});

// Among assignments achieving the minimum gap, returns one with minimal
// Hamming distance to round(ref); remaining ties are broken by preferring
// true at the earliest differing variable (lexicographic).
Assignment closest_assignment(const CnfFormula& f, const std::vector<double>& ref,
                              const SolverBudget& budget = {});

}  // namespace satnn
