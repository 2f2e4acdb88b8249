#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "oracle.hpp"
#include "satnn/cnf.hpp"
#include "satnn/generate.hpp"
#include "satnn/rng.hpp"

using namespace satnn;

namespace {

CnfFormula make(int n, std::vector<std::vector<int>> clauses) {
  CnfFormula f;
  f.num_vars = n;
  for (auto& c : clauses) {
    Clause cl;
    for (int lit : c) cl.emplace_back(std::abs(lit) - 1, lit > 0);
    f.clauses.push_back(cl);
  }
  return f;
}

}  // namespace

TEST_CASE("dimacs parsing basics") {
  CnfFormula f = parse_dimacs(std::string("p cnf 3 2\n1 -2 0\n2 3 0"));
  CHECK(f.num_vars == 3);
  REQUIRE(f.num_clauses() == 2);
  CHECK(f.clauses[0] == Clause{{0, true}, {1, false}});
  CHECK(f.clauses[1] == Clause{{1, true}, {2, true}});

  CnfFormula unit = parse_dimacs(std::string("p cnf 1 1\n1 0"));
  CHECK(unit.num_vars == 1);
  REQUIRE(unit.num_clauses() == 1);
  CHECK(unit.clauses[0] == Clause{{0, true}});
}

TEST_CASE("dimacs tolerates comments and CRLF, enforces errors") {
  CnfFormula f = parse_dimacs(std::string("c hello\r\np cnf 2 1\r\n1 2 0\r\n"));
  CHECK(f.num_vars == 2);
  CHECK(f.num_clauses() == 1);

  CHECK_THROWS_AS(parse_dimacs(std::string("p dnf 2 1\n1 0")), DimacsError);
  CHECK_THROWS_AS(parse_dimacs(std::string("1 0\n")), DimacsError);
  CHECK_THROWS_AS(parse_dimacs(std::string("p cnf 2 1\n3 0")), DimacsError);
  CHECK_THROWS_AS(parse_dimacs(std::string("p cnf 2 1\n1 2")), DimacsError);
  CHECK_THROWS_AS(parse_dimacs(std::string("p cnf 2 2\n1 0\n0\n")), DimacsError);
  // clause count mismatch: tolerated unless strict
  CHECK_NOTHROW(parse_dimacs(std::string("p cnf 2 5\n1 0")));
  CHECK_THROWS_AS(parse_dimacs(std::string("p cnf 2 5\n1 0"), true), DimacsError);
}

TEST_CASE("dimacs round trip is structure-exact over generated formulas") {
  Rng rng(42);
  for (int i = 0; i < 100; ++i) {
    int n = 3 + static_cast<int>(rng.below(10));
    int m = 1 + static_cast<int>(rng.below(30));
    CnfFormula f = gen_random_ksat(n, m, std::min(3, n), rng);
    CnfFormula back = parse_dimacs(write_dimacs(f));
    CHECK(back == f);
  }
}

TEST_CASE("evaluate counts unsatisfied clauses") {
  CnfFormula f = make(3, {{1, -2}, {2, 3}});
  CHECK(evaluate(f, {1, 0, 1}).gap == 0);
  CHECK(evaluate(f, {1, 0, 1}).is_satisfying);

  CnfFormula contradiction = make(1, {{1}, {-1}});
  for (uint8_t v : {0, 1}) {
    EvalReport r = evaluate(contradiction, {v});
    CHECK(r.gap == 1);
    CHECK(r.satisfied_count == 1);
  }
  CHECK_THROWS_AS(evaluate(f, {1, 0}), std::invalid_argument);
}

TEST_CASE("satisfied_count + gap = m exhaustively on small formulas") {
  Rng rng(7);
  for (int round = 0; round < 30; ++round) {
    int n = 2 + static_cast<int>(rng.below(3));
    int m = 1 + static_cast<int>(rng.below(8));
    CnfFormula f = gen_random_ksat(n, m, std::min<int>(n, 2), rng);
    for (uint32_t bits = 0; bits < (1u << n); ++bits) {
      EvalReport r = evaluate(f, oracle::bits_to_assignment(bits, n));
      CHECK(r.satisfied_count + r.gap == m);
      CHECK(r.is_satisfying == (r.gap == 0));
    }
  }
}

TEST_CASE("evaluate invariant under clause reorder and duplicate literals") {
  Rng rng(9);
  for (int round = 0; round < 20; ++round) {
    int n = 4;
    CnfFormula f = gen_random_ksat(n, 6, 3, rng);
    CnfFormula shuffled = f;
    std::reverse(shuffled.clauses.begin(), shuffled.clauses.end());
    CnfFormula doubled = f;
    for (Clause& c : doubled.clauses) c.push_back(c.front());  // duplicate literal
    for (uint32_t bits = 0; bits < (1u << n); ++bits) {
      Assignment a = oracle::bits_to_assignment(bits, n);
      int g = evaluate(f, a).gap;
      CHECK(evaluate(shuffled, a).gap == g);
      CHECK(evaluate(doubled, a).gap == g);
    }
  }
}

TEST_CASE("tautological clauses are always satisfied") {
  CnfFormula f = make(2, {{1, -1}, {2}});
  CHECK(evaluate(f, {0, 1}).gap == 0);
  CHECK(evaluate(f, {1, 0}).gap == 1);  // only the tautology holds
}

TEST_CASE("random gap stats") {
  CnfFormula contradiction = make(1, {{1}, {-1}});
  GapStats st = random_gap_stats(contradiction, 50, 3);
  CHECK(st.mean == doctest::Approx(1.0));
  CHECK(st.stddev == doctest::Approx(0.0));

  CnfFormula single = make(3, {{1, 2, 3}});
  GapStats st2 = random_gap_stats(single, 100000, 5);
  CHECK(std::abs(st2.mean - 0.125) < 0.01);

  // deterministic for a fixed seed
  GapStats a = random_gap_stats(single, 1000, 11);
  GapStats b = random_gap_stats(single, 1000, 11);
  CHECK(a.mean == b.mean);
  CHECK(a.stddev == b.stddev);
}

TEST_CASE("random gap on a phase-transition instance matches the benchmark value") {
  // one 3SAT100 instance, 10^4 uniform assignments: mean gap near 52.78
  // (analytic expectation m/8 = 53.25)
  Rng rng(77);
  CnfFormula f = gen_random_ksat(100, 426, 3, rng);
  GapStats st = random_gap_stats(f, 10000, 9);
  CHECK(std::abs(st.mean - 52.78) < 2.0);
}

TEST_CASE("validate flags malformed formulas") {
  CnfFormula empty_clause = make(2, {{1}});
  empty_clause.clauses.push_back({});
  CHECK_THROWS_AS(validate(empty_clause), std::invalid_argument);
  CnfFormula out_of_range = make(2, {{1}});
  out_of_range.clauses[0][0].var = 5;
  CHECK_THROWS_AS(validate(out_of_range), std::invalid_argument);
}
