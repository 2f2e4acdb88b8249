#include "satnn/infer.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <climits>
#include <cstdio>
#include <sstream>

namespace satnn {

namespace {

FormulaGraph build_graph(const CnfFormula& f, GraphKind kind) {
  return kind == GraphKind::VCG ? build_vcg(f) : build_lcg(f);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

SolveResult solve(const CnfFormula& f, GnnModel<float>& model, int max_iters,
                  uint64_t seed, bool early_stop, bool use_ema) {
  if (max_iters < 1) throw std::invalid_argument("max_iters must be >= 1");
  FormulaGraph g = build_graph(f, model.cfg.graph_kind);
  SolveResult r;
  r.best_gap = INT_MAX;
  forward<float>(model, g, max_iters, seed,
                 [&](int it, const MpState<float>&, const Prediction<float>& pred) {
                   int gap = evaluate(f, pred.hard).gap;
                   r.gap_trajectory.push_back(gap);
                   if (gap < r.best_gap) {
                     r.best_gap = gap;
                     r.steps_used = it;
                     r.assignment = pred.hard;
                   }
                   return !(early_stop && gap == 0);
                 },
                 use_ema);
  r.status = r.best_gap == 0 ? SolveStatus::SatFound : SolveStatus::NoWitness;
  return r;
}

SolveResult resample_solve(const CnfFormula& f, GnnModel<float>& model, int max_iters,
                           int k, uint64_t seed, bool early_stop, bool use_ema) {
  if (k < 1) throw std::invalid_argument("sample count must be >= 1");
  SolveResult best;
  best.best_gap = INT_MAX;
  for (int j = 0; j < k; ++j) {
    SolveResult r = solve(f, model, max_iters, mix_seed(seed, j), early_stop, use_ema);
    if (r.best_gap < best.best_gap) best = std::move(r);
    if (best.best_gap == 0 && early_stop) break;
  }
  return best;
}

std::string SweepGrid::to_csv() const {
  std::ostringstream out;
  out << "iters,samples,avg_gap,sat_acc,decision_acc\n";
  for (const SweepCell& c : cells)
    out << c.iters << ',' << c.samples << ',' << fmt(c.avg_gap) << ','
        << fmt(c.sat_acc) << ',' << fmt(c.decision_acc) << '\n';
  return out.str();
}

SweepGrid sweep(const Dataset& data, GnnModel<float>& model,
                const std::vector<int>& iteration_levels,
                const std::vector<int>& sample_levels, uint64_t seed) {
  if (iteration_levels.empty() || sample_levels.empty())
    throw std::invalid_argument("sweep grids must be non-empty");
  const int max_iters = *std::max_element(iteration_levels.begin(), iteration_levels.end());
  const int max_samples = *std::max_element(sample_levels.begin(), sample_levels.end());
  const int n_inst = static_cast<int>(data.instances.size());
  if (n_inst == 0) throw std::invalid_argument("empty dataset");

  // running-minimum gap at every iteration level, per instance and sample
  std::vector<std::vector<std::vector<int>>> run_min(
      n_inst, std::vector<std::vector<int>>(max_samples));
  for (int i = 0; i < n_inst; ++i) {
    const CnfFormula& f = data.instances[i].formula;
    for (int s = 0; s < max_samples; ++s) {
      SolveResult r =
          solve(f, model, max_iters, mix_seed(mix_seed(seed, i), s), true);
      std::vector<int>& rm = run_min[i][s];
      rm.resize(max_iters);
      int cur = INT_MAX;
      for (int it = 0; it < max_iters; ++it) {
        if (it < static_cast<int>(r.gap_trajectory.size()))
          cur = std::min(cur, r.gap_trajectory[it]);
        rm[it] = cur;  // early-stopped tails stay at the reached zero
      }
    }
  }

  SweepGrid grid;
  grid.iteration_levels = iteration_levels;
  grid.sample_levels = sample_levels;
  for (int iters : iteration_levels) {
    for (int samples : sample_levels) {
      SweepCell cell;
      cell.iters = iters;
      cell.samples = samples;
      double gap_sum = 0.0;
      int sat_total = 0, sat_solved = 0, correct = 0;
      for (int i = 0; i < n_inst; ++i) {
        int best = INT_MAX;
        for (int s = 0; s < samples; ++s)
          best = std::min(best, run_min[i][s][iters - 1]);
        gap_sum += best;
        if (!data.rows[i].sat.has_value())
          throw std::invalid_argument("sweep requires labeled instances");
        bool is_sat = *data.rows[i].sat;
        if (is_sat) {
          ++sat_total;
          if (best == 0) ++sat_solved;
          if (best == 0) ++correct;
        } else {
          ++correct;  // SAT is only declared on a verified zero-gap decode
        }
      }
      cell.avg_gap = gap_sum / n_inst;
      cell.sat_acc = sat_total ? static_cast<double>(sat_solved) / sat_total : 0.0;
      cell.decision_acc = static_cast<double>(correct) / n_inst;
      grid.cells.push_back(cell);
    }
  }
  return grid;
}

KmeansResult kmeans2(const Eigen::MatrixXd& points, uint64_t seed, int max_iters) {
  const int n = static_cast<int>(points.rows());
  KmeansResult res;
  res.labels.assign(n, 0);
  if (n < 2) {
    res.degenerate = true;
    return res;
  }
  Rng rng(seed);
  Eigen::RowVectorXd c0 = points.row(static_cast<int>(rng.below(n)));
  int far = 0;
  double far_d = -1.0;
  for (int i = 0; i < n; ++i) {
    double d = (points.row(i) - c0).squaredNorm();
    if (d > far_d) {
      far_d = d;
      far = i;
    }
  }
  Eigen::RowVectorXd c1 = points.row(far);

  for (int it = 0; it < max_iters; ++it) {
    bool changed = false;
    int n0 = 0, n1 = 0;
    for (int i = 0; i < n; ++i) {
      double d0 = (points.row(i) - c0).squaredNorm();
      double d1 = (points.row(i) - c1).squaredNorm();
      int lab = d1 < d0 ? 1 : 0;
      if (lab != res.labels[i]) {
        res.labels[i] = lab;
        changed = true;
      }
      (lab == 0 ? n0 : n1)++;
    }
    if (n0 == 0 || n1 == 0) {
      res.degenerate = true;
      return res;
    }
    Eigen::RowVectorXd m0 = Eigen::RowVectorXd::Zero(points.cols());
    Eigen::RowVectorXd m1 = m0;
    for (int i = 0; i < n; ++i) (res.labels[i] == 0 ? m0 : m1) += points.row(i);
    c0 = m0 / n0;
    c1 = m1 / n1;
    if (!changed) break;
  }
  return res;
}

Assignment cluster_decode(const Eigen::MatrixXd& var_embeddings, const CnfFormula& f,
                          uint64_t seed) {
  const int n = f.num_vars;
  KmeansResult km = kmeans2(var_embeddings, seed);
  Assignment cand_a(n, 1), cand_b(n, 0);
  if (!km.degenerate) {
    for (int v = 0; v < n; ++v) {
      cand_a[v] = km.labels[v] == 0 ? 1 : 0;
      cand_b[v] = km.labels[v] == 0 ? 0 : 1;
    }
  }
  // degenerate cases fall back to all-true vs all-false
  return evaluate(f, cand_a).gap <= evaluate(f, cand_b).gap ? cand_a : cand_b;
}

Eigen::MatrixXd variable_rows(const MpState<float>& state, const FormulaGraph& g) {
  Eigen::MatrixXd rows(g.pos_rows.size(), state.h_left.cols());
  for (size_t v = 0; v < g.pos_rows.size(); ++v)
    rows.row(v) = state.h_left.row(g.pos_rows[v]).cast<double>();
  return rows;
}

namespace {

struct Pca2 {
  Eigen::MatrixXd projection;
  double share1 = 0.0, share2 = 0.0;
};

Pca2 pca2(const Eigen::MatrixXd& points) {
  Pca2 out;
  const int n = static_cast<int>(points.rows());
  Eigen::RowVectorXd mean = points.colwise().mean();
  Eigen::MatrixXd centered = points.rowwise() - mean;
  Eigen::MatrixXd cov =
      centered.transpose() * centered / std::max(1, n - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  const int d = static_cast<int>(cov.rows());
  Eigen::VectorXd v1 = es.eigenvectors().col(d - 1);
  Eigen::VectorXd v2 = Eigen::VectorXd::Zero(d);
  if (d >= 2) v2 = es.eigenvectors().col(d - 2);
  // deterministic sign: largest-magnitude coefficient positive
  auto fix_sign = [](Eigen::VectorXd& v) {
    int idx = 0;
    v.cwiseAbs().maxCoeff(&idx);
    if (v(idx) < 0) v = -v;
  };
  fix_sign(v1);
  fix_sign(v2);
  out.projection.resize(n, 2);
  out.projection.col(0) = centered * v1;
  out.projection.col(1) = centered * v2;
  double total = es.eigenvalues().sum();
  if (total > 0) {
    out.share1 = es.eigenvalues()(d - 1) / total;
    out.share2 = d >= 2 ? es.eigenvalues()(d - 2) / total : 0.0;
  }
  return out;
}

}  // namespace

std::string TrajectoryExport::to_csv() const {
  std::ostringstream out;
  out << "iter,node,x,y,cluster,gap\n";
  for (const TrajectorySnapshot& s : snapshots)
    for (int v = 0; v < s.projection.rows(); ++v)
      out << s.iter << ',' << v << ',' << fmt(s.projection(v, 0)) << ','
          << fmt(s.projection(v, 1)) << ',' << s.cluster[v] << ',' << s.gap << '\n';
  return out.str();
}

TrajectoryExport export_trajectory(const CnfFormula& f, GnnModel<float>& model, int t,
                                   uint64_t seed) {
  if (t < 2) throw std::invalid_argument("trajectory export needs t >= 2");
  FormulaGraph g = build_graph(f, model.cfg.graph_kind);
  TrajectoryExport exp;
  forward<float>(model, g, t, seed,
                 [&](int it, const MpState<float>& state, const Prediction<float>& pred) {
                   TrajectorySnapshot snap;
                   snap.iter = it;
                   Eigen::MatrixXd emb = variable_rows(state, g);
                   Pca2 p = pca2(emb);
                   snap.projection = std::move(p.projection);
                   snap.explained_var1 = p.share1;
                   snap.explained_var2 = p.share2;
                   snap.cluster = kmeans2(emb, mix_seed(seed, it)).labels;
                   snap.gap = evaluate(f, pred.hard).gap;
                   exp.snapshots.push_back(std::move(snap));
                   return true;
                 });
  return exp;
}

SolveResult periodic_rounding_solve(const CnfFormula& f, GnnModel<float>& model,
                                    int gnn_steps, int steps, uint64_t seed) {
  if (gnn_steps < 1 || steps < 1)
    throw std::invalid_argument("step counts must be >= 1");
  FormulaGraph g = build_graph(f, model.cfg.graph_kind);
  Rng rng(mix_seed(seed, 0xA551u));
  Assignment x(f.num_vars);
  for (int v = 0; v < f.num_vars; ++v) x[v] = rng.bernoulli(0.5) ? 1 : 0;

  SolveResult r;
  r.best_gap = INT_MAX;
  for (int step = 1; step <= steps; ++step) {
    Prediction<float> pred =
        denoise_predict(model, g, x, gnn_steps, mix_seed(seed, 0xC1A0u + step));
    x = pred.hard;
    int gap = evaluate(f, x).gap;
    r.gap_trajectory.push_back(gap);
    if (gap < r.best_gap) {
      r.best_gap = gap;
      r.steps_used = step;
      r.assignment = x;
    }
    if (gap == 0) break;
  }
  r.status = r.best_gap == 0 ? SolveStatus::SatFound : SolveStatus::NoWitness;
  return r;
}

}  // namespace satnn
