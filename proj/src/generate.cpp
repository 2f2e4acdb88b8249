#include "satnn/generate.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>

#include <json.hpp>

namespace satnn {

namespace {

using nlohmann::json;

std::vector<int> sample_distinct_vars(int n, int k, Rng& rng) {
  std::vector<int> vars;
  vars.reserve(k);
  while (static_cast<int>(vars.size()) < k) {
    int v = static_cast<int>(rng.below(n));
    if (std::find(vars.begin(), vars.end(), v) == vars.end()) vars.push_back(v);
  }
  return vars;
}

Clause random_clause(int n, int k, Rng& rng) {
  Clause c;
  for (int v : sample_distinct_vars(n, k, rng)) c.emplace_back(v, !rng.bernoulli(0.5));
  return c;
}

std::string witness_string(const std::optional<Assignment>& w) {
  if (!w) return {};
  std::string s;
  s.reserve(w->size());
  for (uint8_t b : *w) s.push_back(b ? '1' : '0');
  return s;
}

Assignment witness_from_string(const std::string& s) {
  Assignment a;
  a.reserve(s.size());
  for (char c : s) a.push_back(c == '1' ? 1 : 0);
  return a;
}

}  // namespace

SrPair gen_sr_pair(int n, Rng& rng, const SrWidthConfig& width, const SolverBudget& budget) {
  if (n < 3) throw std::invalid_argument("SR generation needs n >= 3");
  CnfFormula f;
  f.num_vars = n;
  while (true) {
    int k = width.base + (rng.bernoulli(width.bernoulli_p) ? 1 : 0) +
            rng.geometric_trials(width.geometric_p);
    k = std::clamp(k, 1, n);
    f.clauses.push_back(random_clause(n, k, rng));
    DpllResult r = dpll_solve(f, budget);
    if (r.satisfiable) continue;

    SrPair pair;
    pair.unsat.formula = f;
    pair.unsat.sat = false;

    CnfFormula sat_f = f;
    Literal& first = sat_f.clauses.back().front();
    first.positive = !first.positive;
    DpllResult sat_r = dpll_solve(sat_f, budget);
    // flipping one literal of the clause that broke satisfiability always
    // re-admits a model of the prefix
    pair.sat.formula = std::move(sat_f);
    pair.sat.sat = true;
    pair.sat.witness = sat_r.witness;
    return pair;
  }
}

CnfFormula gen_random_ksat(int n, int m, int k, Rng& rng) {
  if (n < k) throw std::invalid_argument("need at least k variables");
  CnfFormula f;
  f.num_vars = n;
  f.clauses.reserve(m);
  for (int c = 0; c < m; ++c) f.clauses.push_back(random_clause(n, k, rng));
  return f;
}

LabeledInstance gen_3sat(int n, double ratio, Rng& rng, bool label,
                         const SolverBudget& budget) {
  if (n < 3) throw std::invalid_argument("3-SAT generation needs n >= 3");
  LabeledInstance inst;
  int m = static_cast<int>(std::llround(ratio * n));
  inst.formula = gen_random_ksat(n, m, 3, rng);
  if (label) {
    DpllResult r = dpll_solve(inst.formula, budget);
    inst.sat = r.satisfiable;
    if (r.satisfiable) inst.witness = r.witness;
  }
  return inst;
}

DatasetManifest build_dataset(const DatasetSpec& spec, const std::string& out_dir) {
  namespace fs = std::filesystem;
  if (spec.min_vars < 3) throw std::invalid_argument("min_vars must be >= 3");
  if (spec.max_vars < spec.min_vars) throw std::invalid_argument("bad variable range");
  if (spec.family == Family::SR && spec.count % 2 != 0)
    throw std::invalid_argument("SR instance count must be even (pairs)");
  if (spec.clause_ratio <= 0) throw std::invalid_argument("clause ratio must be positive");

  fs::create_directories(out_dir);
  DatasetManifest manifest;
  manifest.dir = out_dir;

  Rng root(spec.seed);
  std::vector<LabeledInstance> instances;
  if (spec.family == Family::SR) {
    int pairs = spec.count / 2;
    for (int p = 0; p < pairs; ++p) {
      Rng rng = root.split(p);
      int n = spec.exact_n ? spec.max_vars
                           : spec.min_vars +
                                 static_cast<int>(rng.below(spec.max_vars - spec.min_vars + 1));
      SrPair pair = gen_sr_pair(n, rng, spec.width);
      if (spec.sat_only) {
        instances.push_back(std::move(pair.sat));
      } else {
        instances.push_back(std::move(pair.unsat));
        instances.push_back(std::move(pair.sat));
      }
    }
  } else {
    for (int i = 0; i < spec.count; ++i) {
      Rng rng = root.split(i);
      int n = spec.exact_n ? spec.max_vars
                           : spec.min_vars +
                                 static_cast<int>(rng.below(spec.max_vars - spec.min_vars + 1));
      LabeledInstance inst = gen_3sat(n, spec.clause_ratio, rng, spec.label);
      if (spec.sat_only) {
        if (!inst.sat.has_value())
          throw std::invalid_argument("sat_only requires labeled generation");
        if (!*inst.sat) continue;
      }
      instances.push_back(std::move(inst));
    }
  }

  std::ofstream mf(fs::path(out_dir) / "manifest.jsonl");
  if (!mf) throw std::runtime_error("cannot write manifest in " + out_dir);
  for (size_t i = 0; i < instances.size(); ++i) {
    const LabeledInstance& inst = instances[i];
    ManifestRow row;
    row.id = static_cast<int>(i);
    row.family = spec.family == Family::SR ? "sr" : "3sat";
    row.n = inst.formula.num_vars;
    row.m = inst.formula.num_clauses();
    row.sat = inst.sat;
    row.witness = witness_string(inst.witness);
    row.seed = spec.seed;
    char name[32];
    std::snprintf(name, sizeof(name), "%06zu.cnf", i);
    row.file = name;

    std::ofstream cf(fs::path(out_dir) / row.file, std::ios::binary);
    if (!cf) throw std::runtime_error("cannot write instance file");
    write_dimacs(cf, inst.formula);

    json j;
    j["id"] = row.id;
    j["family"] = row.family;
    j["n"] = row.n;
    j["m"] = row.m;
    if (row.sat.has_value())
      j["sat"] = *row.sat;
    else
      j["sat"] = nullptr;
    j["witness"] = row.witness;
    j["seed"] = row.seed;
    j["file"] = row.file;
    mf << j.dump() << '\n';
    manifest.rows.push_back(std::move(row));
  }
  return manifest;
}

DatasetManifest load_manifest(const std::string& manifest_path) {
  namespace fs = std::filesystem;
  std::ifstream in(manifest_path);
  if (!in) throw std::runtime_error("cannot open manifest: " + manifest_path);
  DatasetManifest manifest;
  manifest.dir = fs::path(manifest_path).parent_path().string();
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    ManifestRow row;
    row.id = j.at("id").get<int>();
    row.family = j.at("family").get<std::string>();
    row.n = j.at("n").get<int>();
    row.m = j.at("m").get<int>();
    if (!j.at("sat").is_null()) row.sat = j.at("sat").get<bool>();
    row.witness = j.at("witness").get<std::string>();
    row.seed = j.at("seed").get<uint64_t>();
    row.file = j.at("file").get<std::string>();
    manifest.rows.push_back(std::move(row));
  }
  return manifest;
}

Dataset load_dataset(const std::string& manifest_path) {
  namespace fs = std::filesystem;
  DatasetManifest manifest = load_manifest(manifest_path);
  Dataset ds;
  ds.rows = manifest.rows;
  for (const ManifestRow& row : manifest.rows) {
    std::ifstream cf(fs::path(manifest.dir) / row.file);
    if (!cf) throw std::runtime_error("missing instance file: " + row.file);
    LabeledInstance inst;
    inst.formula = parse_dimacs(cf);
    inst.sat = row.sat;
    if (row.sat.value_or(false) && !row.witness.empty())
      inst.witness = witness_from_string(row.witness);
    ds.instances.push_back(std::move(inst));
  }
  return ds;
}

}  // namespace satnn
