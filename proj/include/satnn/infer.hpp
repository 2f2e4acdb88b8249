#pragma once

#include <string>
#include <vector>

#include "satnn/generate.hpp"
#include "satnn/model.hpp"

namespace satnn {

enum class SolveStatus { SatFound, NoWitness };

struct SolveResult {
  SolveStatus status = SolveStatus::NoWitness;
  Assignment assignment;           // best decode seen
  int best_gap = 0;                // running minimum over iterations
  int steps_used = 0;              // iteration achieving best_gap (first time)
  std::vector<int> gap_trajectory; // raw per-iteration gaps
};

// Decodes the hard assignment every iteration, tracks the running-minimum
// gap and stops at the first zero-gap decode when early_stop is set.
SolveResult solve(const CnfFormula& f, GnnModel<float>& model, int max_iters,
                  uint64_t seed, bool early_stop = true, bool use_ema = false);

// Best result over k random initializations (seed stream is a prefix, so
// growing k can only improve the best gap).
SolveResult resample_solve(const CnfFormula& f, GnnModel<float>& model, int max_iters,
                           int k, uint64_t seed, bool early_stop = true,
                           bool use_ema = false);

struct SweepCell {
  int iters = 0;
  int samples = 0;
  double avg_gap = 0.0;
  double sat_acc = 0.0;      // over satisfiable instances
  double decision_acc = 0.0; // assignment-based rule
};

struct SweepGrid {
  std::vector<int> iteration_levels;
  std::vector<int> sample_levels;
  std::vector<SweepCell> cells;  // row-major: iterations x samples

  const SweepCell& at(int it_idx, int s_idx) const {
    return cells[it_idx * sample_levels.size() + s_idx];
  }
  std::string to_csv() const;
};

// Full (iterations x samples) grid over a labeled dataset. Labels are
// required for the accuracy columns.
SweepGrid sweep(const Dataset& data, GnnModel<float>& model,
                const std::vector<int>& iteration_levels,
                const std::vector<int>& sample_levels, uint64_t seed);

struct KmeansResult {
  std::vector<int> labels;
  bool degenerate = false;  // an empty cluster was produced
};

// k=2 Lloyd iterations with deterministic farthest-point init.
KmeansResult kmeans2(const Eigen::MatrixXd& points, uint64_t seed, int max_iters = 50);

// Recovers an assignment by 2-means clustering of the variable embeddings;
// the cluster-to-truth mapping is resolved by evaluating both candidates.
Assignment cluster_decode(const Eigen::MatrixXd& var_embeddings, const CnfFormula& f,
                          uint64_t seed);

// Rows of the embedding matrix that represent variables (positive literals
// for LCG, variable nodes for VCG).
Eigen::MatrixXd variable_rows(const MpState<float>& state, const FormulaGraph& g);

struct TrajectorySnapshot {
  int iter = 0;
  Eigen::MatrixXd projection;      // n x 2 PCA coordinates
  std::vector<int> cluster;        // k-means labels
  int gap = 0;                     // gap of the hard decode at this iteration
  double explained_var1 = 0.0;     // top-2 PCA eigenvalue shares
  double explained_var2 = 0.0;
};

struct TrajectoryExport {
  std::vector<TrajectorySnapshot> snapshots;
  std::string to_csv() const;  // iter,node,x,y,cluster,gap
};

// Per-iteration 2D PCA projections of the variable embeddings with k-means
// labels and decode gaps.
TrajectoryExport export_trajectory(const CnfFormula& f, GnnModel<float>& model, int t,
                                   uint64_t seed);

// Periodic re-embedding inference for denoiser-style models: run s rounds
// from embed(x), round the decode, re-embed, repeat.
SolveResult periodic_rounding_solve(const CnfFormula& f, GnnModel<float>& model,
                                    int gnn_steps, int steps, uint64_t seed);

}  // namespace satnn
