#include "satnn/diffusion.hpp"

#include <algorithm>
#include <climits>

namespace satnn {

NoiseSchedule build_schedule(int T, double beta_min, double beta_max) {
  if (T < 1) throw std::invalid_argument("schedule needs T >= 1");
  if (!(beta_min > 0.0 && beta_min <= beta_max && beta_max < 0.5))
    throw std::invalid_argument("betas must satisfy 0 < beta_min <= beta_max < 0.5");
  NoiseSchedule s;
  s.T = T;
  s.beta.resize(T);
  for (int t = 0; t < T; ++t)
    s.beta(t) = T == 1 ? beta_min : beta_min + (beta_max - beta_min) * t / (T - 1.0);
  s.cum_flip.resize(T + 1);
  s.cum_flip(0) = 0.0;
  double prod = 1.0;
  for (int t = 1; t <= T; ++t) {
    prod *= 1.0 - 2.0 * s.beta(t - 1);
    s.cum_flip(t) = 0.5 * (1.0 - prod);  // closed form for symmetric chains
  }
  return s;
}

Assignment forward_corrupt(const Assignment& x0, int t, const NoiseSchedule& sched,
                           Rng& rng) {
  if (t < 1 || t > sched.T) throw std::invalid_argument("timestep out of range");
  double flip = sched.cumulative_flip(t);
  Assignment x = x0;
  for (auto& bit : x)
    if (rng.bernoulli(flip)) bit = bit ? 0 : 1;
  return x;
}

Eigen::MatrixXd posterior_probs(const Assignment& x_t, const Eigen::MatrixXd& p0,
                                int t, const NoiseSchedule& sched) {
  if (t < 1 || t > sched.T) throw std::invalid_argument("timestep out of range");
  const int n = static_cast<int>(x_t.size());
  if (p0.rows() != n || p0.cols() != 2)
    throw std::invalid_argument("p0 must be n x 2");

  double bt = sched.step_flip(t);
  double prev = sched.cumulative_flip(t - 1);
  double cur = sched.cumulative_flip(t);
  auto q_step = [bt](int i, int j) { return i == j ? 1.0 - bt : bt; };
  auto q_prev = [prev](int i, int j) { return i == j ? 1.0 - prev : prev; };
  auto q_cur = [cur](int i, int j) { return i == j ? 1.0 - cur : cur; };

  Eigen::MatrixXd out(n, 2);
  for (int v = 0; v < n; ++v) {
    int s = x_t[v] ? 1 : 0;
    for (int j = 0; j < 2; ++j) {
      double q = 0.0;
      for (int k = 0; k < 2; ++k)
        q += p0(v, k) * q_prev(k, j) * q_step(j, s) / q_cur(k, s);
      out(v, j) = q;
    }
    double z = out(v, 0) + out(v, 1);
    out(v, 0) /= z;
    out(v, 1) /= z;
  }
  return out;
}

Assignment posterior_step(const Assignment& x_t, const Eigen::MatrixXd& p0, int t,
                          const NoiseSchedule& sched, Rng& rng, bool deterministic) {
  Eigen::MatrixXd q = posterior_probs(x_t, p0, t, sched);
  Assignment x(x_t.size());
  for (size_t v = 0; v < x_t.size(); ++v) {
    if (deterministic)
      x[v] = q(v, 1) >= q(v, 0) ? 1 : 0;
    else
      x[v] = rng.uniform() < q(v, 1) ? 1 : 0;
  }
  return x;
}

void DiffusionRun::check() const {
  if (gnn_steps < 1 || diffusion_steps < 1)
    throw std::invalid_argument("step counts must be >= 1");
  for (size_t i = 0; i < thresholds.size(); ++i) {
    if (thresholds[i] <= 0.5 || thresholds[i] >= 1.0)
      throw std::invalid_argument("thresholds must lie in (0.5, 1)");
    if (i > 0 && thresholds[i] <= thresholds[i - 1])
      throw std::invalid_argument("thresholds must be strictly ascending");
  }
}

namespace {

FormulaGraph build_graph(const CnfFormula& f, GraphKind kind) {
  return kind == GraphKind::VCG ? build_vcg(f) : build_lcg(f);
}

Assignment uniform_bits(int n, uint64_t seed) {
  Rng rng(mix_seed(seed, 0xA551u));
  Assignment x(n);
  for (int v = 0; v < n; ++v) x[v] = rng.bernoulli(0.5) ? 1 : 0;
  return x;
}

}  // namespace

SolveResult diffusion_solve(const CnfFormula& f, GnnModel<float>& model,
                            const DiffusionRun& run, uint64_t seed) {
  run.check();
  NoiseSchedule sched = build_schedule(run.diffusion_steps, run.beta_min, run.beta_max);
  FormulaGraph g = build_graph(f, model.cfg.graph_kind);
  Rng sampler(mix_seed(seed, 0x90757e51u));

  Assignment x = uniform_bits(f.num_vars, seed);
  SolveResult r;
  r.best_gap = INT_MAX;
  for (int t = sched.T; t >= 1; --t) {
    int step = sched.T - t + 1;
    Prediction<float> pred =
        denoise_predict(model, g, x, run.gnn_steps, mix_seed(seed, 0xC1A0u + step));
    int gap = evaluate(f, pred.hard).gap;
    r.gap_trajectory.push_back(gap);
    if (gap < r.best_gap) {
      r.best_gap = gap;
      r.steps_used = step;
      r.assignment = pred.hard;
    }
    if (gap == 0) break;
    if (run.deterministic) {
      x = pred.hard;
    } else {
      Eigen::MatrixXd p0 = pred.probs.cast<double>();
      x = posterior_step(x, p0, t, sched, sampler);
    }
  }
  r.status = r.best_gap == 0 ? SolveStatus::SatFound : SolveStatus::NoWitness;
  return r;
}

namespace {

// Residual restricted to the variables that still occur in it, with the
// mapping back to the parent's variable ids.
struct Restricted {
  CnfFormula formula;
  std::vector<int> parent_var;  // per new var
};

Restricted restrict_residual(const CnfFormula& residual) {
  std::vector<int> new_id(residual.num_vars, -1);
  Restricted out;
  for (const Clause& c : residual.clauses)
    for (const Literal& l : c)
      if (new_id[l.var] == -1) {
        new_id[l.var] = static_cast<int>(out.parent_var.size());
        out.parent_var.push_back(l.var);
      }
  out.formula.num_vars = static_cast<int>(out.parent_var.size());
  for (const Clause& c : residual.clauses) {
    Clause nc;
    nc.reserve(c.size());
    for (const Literal& l : c) nc.emplace_back(new_id[l.var], l.positive);
    out.formula.clauses.push_back(std::move(nc));
  }
  return out;
}

struct UpSearch {
  const CnfFormula& original;
  GnnModel<float>& model;
  const DiffusionRun& run;
  NoiseSchedule sched;
  uint64_t seed;
  int max_depth;
  Rng sampler;

  int calls = 0;
  int best_gap = INT_MAX;
  int best_step = 0;
  Assignment best;
  Assignment work;  // rolling candidate over original variables
  std::vector<int> gap_trajectory;

  bool note_candidate() {
    int gap = evaluate(original, work).gap;
    gap_trajectory.push_back(gap);
    if (gap < best_gap) {
      best_gap = gap;
      best_step = calls;
      best = work;
    }
    return gap == 0;
  }

  // `orig_ids` maps sub's variables to original ids, `x` is sub-sized.
  bool recurse(const CnfFormula& sub, const std::vector<int>& orig_ids, Assignment x,
               int t, int depth) {
    if (depth >= max_depth) return false;
    ++calls;
    FormulaGraph g = build_graph(sub, model.cfg.graph_kind);
    Prediction<float> pred =
        denoise_predict(model, g, x, run.gnn_steps, mix_seed(seed, 0xD1F0u + calls));

    for (int v = 0; v < sub.num_vars; ++v) work[orig_ids[v]] = pred.hard[v];
    if (note_candidate()) return true;

    Assignment x_next;
    if (run.deterministic) {
      x_next = pred.hard;
    } else {
      Eigen::MatrixXd p0 = pred.probs.cast<double>();
      x_next = posterior_step(x, p0, std::max(t, 1), sched, sampler);
    }

    for (double threshold : run.thresholds) {
      PartialAssignment partial = PartialAssignment::make_empty(sub.num_vars);
      for (int v = 0; v < sub.num_vars; ++v) {
        double belief = std::max(pred.probs(v, 0), pred.probs(v, 1));
        if (belief >= threshold) partial.set(v, pred.hard[v] != 0);
      }
      PropagationOutcome out = unit_propagate(sub, partial);
      if (out.kind == PropagationKind::Conflict) continue;

      // land the propagated values in the working candidate
      Assignment saved = work;
      for (int v = 0; v < sub.num_vars; ++v) {
        if (out.extended.values[v] != TruthValue::Unassigned)
          work[orig_ids[v]] = out.extended.values[v] == TruthValue::True ? 1 : 0;
      }
      if (out.kind == PropagationKind::Solved) {
        if (note_candidate()) return true;
        work = saved;  // should not happen: solved residual implies gap 0
        continue;
      }

      Restricted child = restrict_residual(out.residual);
      std::vector<int> child_orig(child.formula.num_vars);
      Assignment child_x(child.formula.num_vars);
      for (int v = 0; v < child.formula.num_vars; ++v) {
        child_orig[v] = orig_ids[child.parent_var[v]];
        child_x[v] = x_next[child.parent_var[v]];
      }
      if (recurse(child.formula, child_orig, std::move(child_x), std::max(t - 1, 1),
                  depth + 1))
        return true;
      work = saved;
    }

    // every threshold conflicted or failed below: another diffusion step on
    // the same residual
    return recurse(sub, orig_ids, std::move(x_next), std::max(t - 1, 1), depth + 1);
  }
};

}  // namespace

UpSolveResult up_guided_solve(const CnfFormula& f, GnnModel<float>& model,
                              const DiffusionRun& run, uint64_t seed) {
  run.check();
  UpSearch search{f,
                  model,
                  run,
                  build_schedule(run.diffusion_steps, run.beta_min, run.beta_max),
                  seed,
                  run.max_depth > 0 ? run.max_depth : run.diffusion_steps,
                  Rng(mix_seed(seed, 0x90757e51u)),
                  0,
                  INT_MAX,
                  0,
                  {},
                  {},
                  {}};
  search.work = uniform_bits(f.num_vars, seed);
  search.best = search.work;
  search.best_gap = evaluate(f, search.work).gap;
  search.best_step = 0;

  std::vector<int> identity(f.num_vars);
  for (int v = 0; v < f.num_vars; ++v) identity[v] = v;
  bool solved = search.recurse(f, identity, search.work, search.sched.T, 0);

  UpSolveResult out;
  out.recursive_calls = search.calls;
  out.result.status = solved ? SolveStatus::SatFound : SolveStatus::NoWitness;
  out.result.assignment = search.best;
  out.result.best_gap = search.best_gap;
  out.result.steps_used = search.best_step;
  out.result.gap_trajectory = std::move(search.gap_trajectory);
  return out;
}

}  // namespace satnn
