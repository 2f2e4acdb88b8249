#include "satnn/sdp.hpp"

#include <stdexcept>

namespace satnn {

namespace {

// Accumulates coefficient c on the y_a . y_b product (a, b are W indices with
// 0 reserved for y_0). Diagonal terms are constants since Y_ii = 1.
void accum(SdpProblem& p, int a, int b, double c) {
  if (a == b) {
    p.offset += c;
    return;
  }
  p.W(a, b) += c / 2.0;
  p.W(b, a) += c / 2.0;
}

}  // namespace

SdpProblem build_w(const CnfFormula& f) {
  SdpProblem p;
  p.num_vars = f.num_vars;
  p.num_clauses = f.num_clauses();
  p.W = Eigen::MatrixXd::Zero(f.num_vars + 1, f.num_vars + 1);
  for (const Clause& c : f.clauses) {
    if (c.size() > 2) throw std::invalid_argument("SDP relaxation needs width <= 2");
    if (c.size() == 1) {
      // v(l) = (1 + s y0.yi) / 2
      double s = c[0].positive ? 1.0 : -1.0;
      p.offset += 0.5;
      accum(p, 0, c[0].var + 1, s / 2.0);
    } else {
      // v(la or lb) = 3/4 + sa/4 y0.yi + sb/4 y0.yj - sa sb/4 yi.yj
      double sa = c[0].positive ? 1.0 : -1.0;
      double sb = c[1].positive ? 1.0 : -1.0;
      int i = c[0].var + 1, j = c[1].var + 1;
      p.offset += 0.75;
      accum(p, 0, i, sa / 4.0);
      accum(p, 0, j, sb / 4.0);
      accum(p, i, j, -sa * sb / 4.0);
    }
  }
  return p;
}

double sdp_objective(const SdpProblem& p, const VectorState& s) {
  return (p.W.cwiseProduct(s.Y * s.Y.transpose())).sum() + p.offset;
}

namespace {

void normalize_rows(Eigen::MatrixXd& Y) {
  for (int i = 0; i < Y.rows(); ++i) {
    double n = Y.row(i).norm();
    if (n > 0) Y.row(i) /= n;
  }
}

}  // namespace

VectorState optimize_vectors(const SdpProblem& p, int iters, double lr, uint64_t seed,
                             std::vector<double>* trajectory) {
  if (iters < 1) throw std::invalid_argument("iters must be >= 1");
  const int rows = p.num_vars + 1;
  Rng rng(seed);
  VectorState s;
  s.Y.resize(rows, rows);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < rows; ++j) s.Y(i, j) = rng.normal();
  normalize_rows(s.Y);

  double obj = sdp_objective(p, s);
  if (trajectory) trajectory->push_back(obj);
  for (int it = 0; it < iters; ++it) {
    Eigen::MatrixXd grad = 2.0 * p.W * s.Y;
    double step = lr;
    bool accepted = false;
    for (int bt = 0; bt < 40; ++bt) {
      VectorState cand;
      cand.Y = s.Y + step * grad;
      normalize_rows(cand.Y);
      double cand_obj = sdp_objective(p, cand);
      if (cand_obj >= obj) {
        s = std::move(cand);
        obj = cand_obj;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (trajectory) trajectory->push_back(obj);
    if (!accepted) break;  // no ascent step left at any scale
  }
  return s;
}

Assignment sdp_round(const VectorState& s, const CnfFormula& f, RoundingMode mode,
                     int trials, uint64_t seed) {
  const int n = f.num_vars;
  if (mode == RoundingMode::Sign) {
    Assignment a(n);
    for (int v = 0; v < n; ++v)
      a[v] = s.Y.row(0).dot(s.Y.row(v + 1)) >= 0.0 ? 1 : 0;
    return a;
  }
  if (trials < 1) throw std::invalid_argument("hyperplane rounding needs trials >= 1");
  Rng rng(seed);
  Assignment best;
  int best_gap = f.num_clauses() + 1;
  const int dim = static_cast<int>(s.Y.cols());
  for (int t = 0; t < trials; ++t) {
    Eigen::VectorXd h(dim);
    for (int i = 0; i < dim; ++i) h(i) = rng.normal();
    double side0 = s.Y.row(0).dot(h);
    Assignment a(n);
    for (int v = 0; v < n; ++v)
      a[v] = s.Y.row(v + 1).dot(h) * side0 >= 0.0 ? 1 : 0;
    int gap = evaluate(f, a).gap;
    if (gap < best_gap) {
      best_gap = gap;
      best = std::move(a);
    }
  }
  return best;
}

}  // namespace satnn
