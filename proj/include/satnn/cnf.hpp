#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace satnn {

// One signed occurrence of a variable. Variables are 0-based in memory;
// DIMACS I/O converts to/from the external 1-based convention.
struct Literal {
  int var = 0;
  bool positive = true;

  Literal() = default;
  Literal(int v, bool pos) : var(v), positive(pos) {}
  friend bool operator==(const Literal&, const Literal&) = default;
};

using Clause = std::vector<Literal>;

// CNF formula: conjunction of clauses, each a disjunction of literals.
// Clause order is preserved by I/O round trips. Duplicate literals within a
// clause are kept as parsed; evaluation ignores them. Tautological clauses
// are legal and always satisfied.
struct CnfFormula {
  int num_vars = 0;
  std::vector<Clause> clauses;

  int num_clauses() const { return static_cast<int>(clauses.size()); }
  friend bool operator==(const CnfFormula&, const CnfFormula&) = default;
};

// One boolean value per variable (0/1).
using Assignment = std::vector<uint8_t>;

struct EvalReport {
  int satisfied_count = 0;
  int gap = 0;  // number of unsatisfied clauses
  bool is_satisfying = false;
};

struct GapStats {
  double mean = 0.0;
  double stddev = 0.0;  // population standard deviation
};

class DimacsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Throws std::invalid_argument if a clause is empty or references a variable
// outside [0, num_vars).
void validate(const CnfFormula& f);

// Counts clauses with no true literal under `a`. Throws on length mismatch.
EvalReport evaluate(const CnfFormula& f, const Assignment& a);

// DIMACS CNF reader. Accepts comment lines, `p cnf n m` header and
// zero-terminated clauses; LF or CRLF. A clause-count mismatch is tolerated
// unless `strict_clause_count` is set.
CnfFormula parse_dimacs(std::istream& in, bool strict_clause_count = false);
CnfFormula parse_dimacs(const std::string& text, bool strict_clause_count = false);

void write_dimacs(std::ostream& out, const CnfFormula& f);
std::string write_dimacs(const CnfFormula& f);

// Mean and stddev of the gap over `samples` uniform random assignments.
GapStats random_gap_stats(const CnfFormula& f, int samples, uint64_t seed);

}  // namespace satnn
