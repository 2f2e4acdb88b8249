#pragma once

#include <vector>

#include "satnn/infer.hpp"
#include "satnn/model.hpp"

namespace satnn {

// Symmetric two-state corruption chain. beta[t-1] is the per-step flip
// probability at time t; cum_flip[t] the flip probability of the cumulative
// transition Q-bar_t, with cum_flip[0] = 0.
struct NoiseSchedule {
  int T = 0;
  Eigen::VectorXd beta;      // size T
  Eigen::VectorXd cum_flip;  // size T+1

  double step_flip(int t) const { return beta(t - 1); }
  double cumulative_flip(int t) const { return cum_flip(t); }
};

// Linear beta ramp; requires 0 < beta_min <= beta_max < 0.5 so every Q_t is
// strictly mixing and only the limit t -> T approaches the uniform rows.
NoiseSchedule build_schedule(int T, double beta_min, double beta_max);

// Samples x_t ~ Cat(x0 * Q-bar_t): each variable flips independently with the
// cumulative flip probability.
Assignment forward_corrupt(const Assignment& x0, int t, const NoiseSchedule& sched,
                           Rng& rng);

// Exact two-state posterior p(x_{t-1} | x_t) obtained by marginalizing the
// model's predicted p(x0) over the chain. Rows sum to one.
Eigen::MatrixXd posterior_probs(const Assignment& x_t, const Eigen::MatrixXd& p0,
                                int t, const NoiseSchedule& sched);

// Samples (or argmaxes) each variable from the posterior.
Assignment posterior_step(const Assignment& x_t, const Eigen::MatrixXd& p0, int t,
                          const NoiseSchedule& sched, Rng& rng,
                          bool deterministic = false);

struct DiffusionRun {
  int gnn_steps = 25;
  int diffusion_steps = 10;
  std::vector<double> thresholds{0.6, 0.75, 0.9};  // UP mode, strictly ascending
  int max_depth = -1;          // default: diffusion_steps
  bool deterministic = false;  // x_{t-1} = rounded x0 prediction
  double beta_min = 0.02;
  double beta_max = 0.35;

  void check() const;
};

// Denoising loop: start from uniform random bits, alternate gnn_steps of
// message passing with one posterior step, decode every step and stop early
// on a verified satisfying assignment.
SolveResult diffusion_solve(const CnfFormula& f, GnnModel<float>& model,
                            const DiffusionRun& run, uint64_t seed);

struct UpSolveResult {
  SolveResult result;
  int recursive_calls = 0;
};

// Recursive search interleaving diffusion steps with unit propagation:
// threshold the beliefs into a partial assignment, propagate, recurse on the
// simplified residual, and raise the threshold on conflict or child failure.
UpSolveResult up_guided_solve(const CnfFormula& f, GnnModel<float>& model,
                              const DiffusionRun& run, uint64_t seed);

}  // namespace satnn
