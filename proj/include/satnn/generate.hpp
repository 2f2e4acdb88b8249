#pragma once

#include <optional>
#include <string>
#include <vector>

#include "satnn/cnf.hpp"
#include "satnn/rng.hpp"
#include "satnn/solver.hpp"

namespace satnn {

enum class Family { SR, ThreeSat };

struct LabeledInstance {
  CnfFormula formula;
  std::optional<bool> sat;         // absent when generated without labeling
  std::optional<Assignment> witness;  // present iff sat == true
};

// Clause-width distribution of the SR generator:
//   k = base + Bernoulli(bernoulli_p) + Geometric(geometric_p)
// with the geometric counting trials (>= 1), clamped to [1, n].
struct SrWidthConfig {
  int base = 1;
  double bernoulli_p = 0.7;
  double geometric_p = 0.4;
};

struct SrPair {
  LabeledInstance unsat;
  LabeledInstance sat;
};

// Adds random clauses until the formula turns unsatisfiable; the satisfiable
// twin flips the first literal of the last clause and carries the witness of
// the solver run that certifies it.
SrPair gen_sr_pair(int n, Rng& rng, const SrWidthConfig& width = {},
                   const SolverBudget& budget = {});

// m = round(ratio * n) clauses of k distinct variables, each sign fair-coin.
CnfFormula gen_random_ksat(int n, int m, int k, Rng& rng);

// Phase-transition 3-SAT instance, labeled by the complete solver.
LabeledInstance gen_3sat(int n, double ratio, Rng& rng, bool label = true,
                         const SolverBudget& budget = {});

struct DatasetSpec {
  Family family = Family::SR;
  int min_vars = 3;
  int max_vars = 40;
  int count = 100;            // instances (pair halves for SR)
  bool sat_only = false;
  bool exact_n = false;       // eval sets use exactly max_vars
  double clause_ratio = 4.26; // 3-SAT only
  bool label = true;          // 3-SAT only; SR labels are free
  uint64_t seed = 1;
  SrWidthConfig width;
};

struct ManifestRow {
  int id = 0;
  std::string family;
  int n = 0;
  int m = 0;
  std::optional<bool> sat;
  std::string witness;  // 0/1 string, empty when absent
  uint64_t seed = 0;
  std::string file;     // DIMACS path relative to the dataset directory
};

struct DatasetManifest {
  std::string dir;
  std::vector<ManifestRow> rows;
};

// Writes one DIMACS file per instance plus manifest.jsonl into out_dir.
DatasetManifest build_dataset(const DatasetSpec& spec, const std::string& out_dir);

DatasetManifest load_manifest(const std::string& manifest_path);

struct Dataset {
  std::vector<LabeledInstance> instances;
  std::vector<ManifestRow> rows;
};

// Reads the manifest and every referenced DIMACS file.
Dataset load_dataset(const std::string& manifest_path);

}  // namespace satnn
