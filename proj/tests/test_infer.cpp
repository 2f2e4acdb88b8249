#include <doctest.h>

#include <algorithm>
#include <filesystem>

#include "satnn/generate.hpp"
#include "satnn/infer.hpp"

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

GnnModel<float> tiny_model(uint64_t seed = 3) {
  ModelConfig cfg;
  cfg.d_model = 8;
  cfg.t_train = 4;
  return GnnModel<float>(cfg, seed);
}

Dataset tiny_dataset(int count, int n, uint64_t seed) {
  namespace fs = std::filesystem;
  std::string dir =
      (fs::temp_directory_path() / ("satnn_infer_" + std::to_string(seed))).string();
  fs::remove_all(dir);
  DatasetSpec spec;
  spec.family = Family::SR;
  spec.min_vars = 3;
  spec.max_vars = n;
  spec.count = count;
  spec.exact_n = true;
  spec.seed = seed;
  build_dataset(spec, dir);
  Dataset ds = load_dataset(dir + "/manifest.jsonl");
  fs::remove_all(dir);
  return ds;
}

}  // namespace

TEST_CASE("solve stops immediately on a tautology and reports sane trajectories") {
  CnfFormula taut = make(1, {{1, -1}});
  GnnModel<float> model = tiny_model();
  SolveResult r = solve(taut, model, 10, 5);
  CHECK(r.status == SolveStatus::SatFound);
  CHECK(r.steps_used == 1);
  CHECK(r.best_gap == 0);

  Rng rng(9);
  CnfFormula f = gen_random_ksat(6, 20, 3, rng);
  SolveResult r2 = solve(f, model, 8, 5, /*early_stop=*/false);
  CHECK(static_cast<int>(r2.gap_trajectory.size()) == 8);
  for (int g : r2.gap_trajectory) {
    CHECK(g >= 0);
    CHECK(g <= f.num_clauses());
  }
  CHECK(r2.steps_used <= 8);
  CHECK((r2.status == SolveStatus::SatFound) == (r2.best_gap == 0));
}

TEST_CASE("running-minimum semantics: best gap non-increasing in the budget") {
  Rng rng(15);
  GnnModel<float> model = tiny_model();
  for (int round = 0; round < 10; ++round) {
    CnfFormula f = gen_random_ksat(6, 22, 3, rng);
    SolveResult shorter = solve(f, model, 4, 100 + round, false);
    SolveResult longer = solve(f, model, 12, 100 + round, false);
    CHECK(longer.best_gap <= shorter.best_gap);
    // shared prefix of the trajectory
    for (int i = 0; i < 4; ++i)
      CHECK(shorter.gap_trajectory[i] == longer.gap_trajectory[i]);
  }
}

TEST_CASE("resampling: k=1 reduces to solve and the best gap improves with k") {
  Rng rng(25);
  GnnModel<float> model = tiny_model();
  for (int round = 0; round < 8; ++round) {
    CnfFormula f = gen_random_ksat(6, 20, 3, rng);
    SolveResult one = resample_solve(f, model, 6, 1, 7 + round);
    SolveResult direct = solve(f, model, 6, mix_seed(7 + round, 0));
    CHECK(one.best_gap == direct.best_gap);
    CHECK(one.assignment == direct.assignment);
    SolveResult five = resample_solve(f, model, 6, 5, 7 + round);
    CHECK(five.best_gap <= one.best_gap);
  }
}

TEST_CASE("sweep: 1x1 grid equals plain evaluation and samples are monotone") {
  Dataset ds = tiny_dataset(12, 6, 91);
  GnnModel<float> model = tiny_model(11);
  SweepGrid grid = sweep(ds, model, {3, 6}, {1, 2, 3}, 55);
  REQUIRE(grid.cells.size() == 6);

  for (size_t it = 0; it < grid.iteration_levels.size(); ++it)
    for (size_t s = 1; s < grid.sample_levels.size(); ++s) {
      CHECK(grid.at(it, s).decision_acc >= grid.at(it, s - 1).decision_acc);
      CHECK(grid.at(it, s).avg_gap <= grid.at(it, s - 1).avg_gap);
    }

  SweepGrid single = sweep(ds, model, {6}, {1}, 55);
  double gap_sum = 0;
  for (size_t i = 0; i < ds.instances.size(); ++i) {
    SolveResult r =
        solve(ds.instances[i].formula, model, 6, mix_seed(mix_seed(55, i), 0), true);
    gap_sum += r.best_gap;
  }
  CHECK(single.cells[0].avg_gap ==
        doctest::Approx(gap_sum / ds.instances.size()).epsilon(1e-9));

  std::string csv = grid.to_csv();
  CHECK(csv.rfind("iters,samples,avg_gap,sat_acc,decision_acc\n", 0) == 0);
}

TEST_CASE("kmeans separates well-separated clusters") {
  Eigen::MatrixXd pts(6, 2);
  pts << 5, 5, 5.2, 5.1, 4.9, 5.0, -5, -5, -5.1, -4.8, -4.9, -5.2;
  KmeansResult km = kmeans2(pts, 3);
  CHECK_FALSE(km.degenerate);
  CHECK(km.labels[0] == km.labels[1]);
  CHECK(km.labels[1] == km.labels[2]);
  CHECK(km.labels[3] == km.labels[4]);
  CHECK(km.labels[4] == km.labels[5]);
  CHECK(km.labels[0] != km.labels[3]);
}

TEST_CASE("cluster decode picks the lower-gap orientation") {
  // satisfying assignment (1,1,0): vars 1,2 in one cluster, 3 in the other
  CnfFormula f = make(3, {{1}, {2}, {-3}});
  Eigen::MatrixXd emb(3, 4);
  emb << 1, 0, 0, 0, 0.9, 0.1, 0, 0, -1, 0, 0, 0;
  Assignment a = cluster_decode(emb, f, 7);
  CHECK(evaluate(f, a).gap == 0);
}

TEST_CASE("cluster decode degenerate fallbacks") {
  CnfFormula f = make(2, {{1}, {2}});
  Eigen::MatrixXd same = Eigen::MatrixXd::Ones(2, 3);
  CHECK(cluster_decode(same, f, 5) == Assignment{1, 1});

  CnfFormula neg = make(2, {{-1}, {-2}});
  CHECK(cluster_decode(same, neg, 5) == Assignment{0, 0});

  CnfFormula unit = make(1, {{-1}});
  Eigen::MatrixXd one_row = Eigen::MatrixXd::Ones(1, 3);
  CHECK(cluster_decode(one_row, unit, 5) == Assignment{0});
}

TEST_CASE("trajectory export: row counts, gap column, explained variance") {
  Rng rng(35);
  CnfFormula f = gen_random_ksat(6, 18, 3, rng);
  GnnModel<float> model = tiny_model(21);
  const int t = 5;
  TrajectoryExport exp = export_trajectory(f, model, t, 77);
  REQUIRE(static_cast<int>(exp.snapshots.size()) == t);

  std::string csv = exp.to_csv();
  int lines = static_cast<int>(std::count(csv.begin(), csv.end(), '\n'));
  CHECK(lines == t * f.num_vars + 1);

  SolveResult r = solve(f, model, t, 77, /*early_stop=*/false);
  for (int i = 0; i < t; ++i) CHECK(exp.snapshots[i].gap == r.gap_trajectory[i]);

  for (const TrajectorySnapshot& s : exp.snapshots) {
    CHECK(s.explained_var1 >= s.explained_var2);
    CHECK(s.explained_var1 <= 1.0 + 1e-9);
    double v1 =
        (s.projection.col(0).array() - s.projection.col(0).mean()).square().sum();
    double v2 =
        (s.projection.col(1).array() - s.projection.col(1).mean()).square().sum();
    CHECK(v1 + 1e-9 >= v2);  // components ordered by captured variance
  }
  CHECK_THROWS_AS(export_trajectory(f, model, 1, 7), std::invalid_argument);
}

TEST_CASE("unsat instances are never declared satisfiable") {
  Dataset ds = tiny_dataset(16, 7, 131);
  GnnModel<float> model = tiny_model(31);
  for (size_t i = 0; i < ds.instances.size(); ++i) {
    if (ds.instances[i].sat.value_or(true)) continue;
    SolveResult r = solve(ds.instances[i].formula, model, 10, i);
    CHECK(r.status == SolveStatus::NoWitness);
    CHECK(r.best_gap >= 1);
  }
}
