#include "satnn/cnf.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "satnn/rng.hpp"

namespace satnn {

void validate(const CnfFormula& f) {
  if (f.num_vars < 0) throw std::invalid_argument("negative variable count");
  for (const Clause& c : f.clauses) {
    if (c.empty()) throw std::invalid_argument("empty clause");
    for (const Literal& l : c) {
      if (l.var < 0 || l.var >= f.num_vars)
        throw std::invalid_argument("literal variable out of range");
    }
  }
}

EvalReport evaluate(const CnfFormula& f, const Assignment& a) {
  if (static_cast<int>(a.size()) != f.num_vars)
    throw std::invalid_argument("assignment length does not match num_vars");
  EvalReport r;
  for (const Clause& c : f.clauses) {
    bool sat = false;
    for (const Literal& l : c) {
      if (static_cast<bool>(a[l.var]) == l.positive) {
        sat = true;
        break;
      }
    }
    if (sat)
      ++r.satisfied_count;
    else
      ++r.gap;
  }
  r.is_satisfying = (r.gap == 0);
  return r;
}

CnfFormula parse_dimacs(std::istream& in, bool strict_clause_count) {
  CnfFormula f;
  int declared_clauses = -1;
  bool header_seen = false;
  Clause current;
  std::string tok;

  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    size_t pos = line.find_first_not_of(" \t");
    if (pos == std::string::npos) continue;
    if (line[pos] == 'c') continue;
    if (line[pos] == 'p') {
      std::string p, fmt;
      std::istringstream hs(line);
      if (header_seen) throw DimacsError("duplicate DIMACS header");
      if (!(hs >> p >> fmt >> f.num_vars >> declared_clauses) || fmt != "cnf" ||
          f.num_vars < 0 || declared_clauses < 0)
        throw DimacsError("malformed DIMACS header");
      header_seen = true;
      continue;
    }
    if (!header_seen) throw DimacsError("clause data before DIMACS header");
    std::istringstream body(line);
    long lit;
    while (body >> lit) {
      if (lit == 0) {
        if (current.empty()) throw DimacsError("empty clause");
        f.clauses.push_back(current);
        current.clear();
        continue;
      }
      long v = lit > 0 ? lit : -lit;
      if (v > f.num_vars) throw DimacsError("literal exceeds declared variable count");
      current.emplace_back(static_cast<int>(v - 1), lit > 0);
    }
    if (!body.eof()) throw DimacsError("unexpected token in clause data");
  }
  if (!header_seen) throw DimacsError("missing DIMACS header");
  if (!current.empty()) throw DimacsError("unterminated clause at end of input");
  if (strict_clause_count && f.num_clauses() != declared_clauses)
    throw DimacsError("clause count does not match header");
  return f;
}

CnfFormula parse_dimacs(const std::string& text, bool strict_clause_count) {
  std::istringstream in(text);
  return parse_dimacs(in, strict_clause_count);
}

void write_dimacs(std::ostream& out, const CnfFormula& f) {
  out << "p cnf " << f.num_vars << ' ' << f.num_clauses() << '\n';
  for (const Clause& c : f.clauses) {
    for (const Literal& l : c) out << (l.positive ? l.var + 1 : -(l.var + 1)) << ' ';
    out << "0\n";
  }
}

std::string write_dimacs(const CnfFormula& f) {
  std::ostringstream out;
  write_dimacs(out, f);
  return out.str();
}

GapStats random_gap_stats(const CnfFormula& f, int samples, uint64_t seed) {
  if (samples < 1) throw std::invalid_argument("samples must be >= 1");
  Rng rng(seed);
  Assignment a(f.num_vars);
  double sum = 0.0, sum_sq = 0.0;
  for (int s = 0; s < samples; ++s) {
    for (int v = 0; v < f.num_vars; ++v) a[v] = rng.bernoulli(0.5) ? 1 : 0;
    double g = evaluate(f, a).gap;
    sum += g;
    sum_sq += g * g;
  }
  GapStats st;
  st.mean = sum / samples;
  double var = sum_sq / samples - st.mean * st.mean;
  st.stddev = std::sqrt(var > 0 ? var : 0.0);
  return st;
}

}  // namespace satnn
