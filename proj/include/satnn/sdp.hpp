#pragma once

#include <Eigen/Dense>
#include <vector>

#include "satnn/cnf.hpp"
#include "satnn/rng.hpp"

namespace satnn {

// MAX-2-SAT objective Tr(WY) + offset over the Gram matrix Y of the lifted
// unit vectors (y_0 encodes "true"). At integral states the objective equals
// the exact satisfied-clause count.
struct SdpProblem {
  Eigen::MatrixXd W;  // symmetric (n+1) x (n+1)
  double offset = 0.0;
  int num_vars = 0;
  int num_clauses = 0;
};

// Throws std::invalid_argument on a clause wider than 2.
SdpProblem build_w(const CnfFormula& f);

// Rows are the unit vectors y_0..y_n (dimension r = n+1 by default).
struct VectorState {
  Eigen::MatrixXd Y;
};

double sdp_objective(const SdpProblem& p, const VectorState& s);

// Projected gradient ascent on the unit spheres with backtracking step
// control; the objective trajectory is non-decreasing.
VectorState optimize_vectors(const SdpProblem& p, int iters, double lr, uint64_t seed,
                             std::vector<double>* trajectory = nullptr);

enum class RoundingMode { Sign, Hyperplane };

// Sign rounding thresholds <y_0, y_i>; hyperplane rounding returns the best
// of `trials` random cuts by evaluated gap. Zero margins round to true.
Assignment sdp_round(const VectorState& s, const CnfFormula& f, RoundingMode mode,
                     int trials, uint64_t seed);

}  // namespace satnn
