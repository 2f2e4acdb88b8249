#include "satnn/train.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "satnn/checkpoint.hpp"
#include "satnn/infer.hpp"

namespace satnn {

CurriculumState curriculum_init(int max_size) {
  CurriculumState s;
  s.current_size = std::min(5, max_size);
  s.max_size = max_size;
  s.rung = 0;
  s.num_rungs = 1;
  for (int size = s.current_size; size < max_size; size += 2) ++s.num_rungs;
  return s;
}

double curriculum_threshold(const CurriculumState& s, double lo, double hi) {
  if (s.num_rungs <= 1) return lo;
  return lo + (hi - lo) * s.rung / (s.num_rungs - 1);
}

CurriculumState curriculum_step(const CurriculumState& s, double val_acc, double lo,
                                double hi, int max_epochs) {
  CurriculumState next = s;
  next.epochs_at_size += 1;
  if (s.current_size >= s.max_size) return next;
  if (val_acc >= curriculum_threshold(s, lo, hi) || next.epochs_at_size >= max_epochs) {
    next.current_size = std::min(s.current_size + 2, s.max_size);
    next.epochs_at_size = 0;
    next.rung += 1;
  }
  return next;
}

namespace {

struct Sample {
  const CnfFormula* formula = nullptr;
  bool sat = false;
  Assignment target;  // supervised target when available
  int n = 0;
};

std::vector<Sample> prepare_samples(const Dataset& ds, const TrainConfig& cfg,
                                    bool need_target) {
  std::vector<Sample> out;
  for (size_t i = 0; i < ds.instances.size(); ++i) {
    const LabeledInstance& inst = ds.instances[i];
    if (!inst.sat.has_value())
      throw std::runtime_error("training requires labeled instances");
    if (cfg.sat_only && !*inst.sat) continue;
    Sample s;
    s.formula = &inst.formula;
    s.sat = *inst.sat;
    s.n = inst.formula.num_vars;
    if (need_target) {
      if (inst.witness.has_value()) {
        s.target = *inst.witness;
      } else if (cfg.mode == LossMode::Denoise) {
        throw std::runtime_error("denoiser training needs witnesses on every instance");
      } else {
        // precalculated optimal target for UNSAT instances
        s.target = maxsat_optimum(inst.formula, cfg.oracle_budget).witness;
      }
    }
    out.push_back(std::move(s));
  }
  if (out.empty()) throw std::runtime_error("empty training pool");
  return out;
}

// Brute-force check that a closest-assignment target is optimal (tests only).
void verify_closest_target(const CnfFormula& f, const Assignment& rounded_ref,
                           const Assignment& target) {
  if (f.num_vars > 12) return;
  int best_gap = f.num_clauses() + 1;
  for (uint32_t bits = 0; bits < (1u << f.num_vars); ++bits) {
    Assignment a(f.num_vars);
    for (int v = 0; v < f.num_vars; ++v) a[v] = (bits >> v) & 1u;
    best_gap = std::min(best_gap, evaluate(f, a).gap);
  }
  int best_ham = f.num_vars + 1;
  for (uint32_t bits = 0; bits < (1u << f.num_vars); ++bits) {
    Assignment a(f.num_vars);
    for (int v = 0; v < f.num_vars; ++v) a[v] = (bits >> v) & 1u;
    if (evaluate(f, a).gap != best_gap) continue;
    int ham = 0;
    for (int v = 0; v < f.num_vars; ++v) ham += a[v] != rounded_ref[v];
    best_ham = std::min(best_ham, ham);
  }
  int got_gap = evaluate(f, target).gap;
  int got_ham = 0;
  for (int v = 0; v < f.num_vars; ++v) got_ham += target[v] != rounded_ref[v];
  if (got_gap != best_gap || got_ham != best_ham)
    throw std::runtime_error("closest-assignment target failed the oracle check");
}

struct Trainer {
  const TrainConfig& cfg;
  GnnModel<float>& model;
  std::vector<Sample>& samples;
  std::vector<Sample>& val_samples;
  NoiseSchedule denoise_sched;

  double run_batch(const std::vector<int>& batch, uint64_t batch_seed) {
    std::vector<const CnfFormula*> formulas;
    formulas.reserve(batch.size());
    for (int idx : batch) formulas.push_back(samples[idx].formula);
    GraphBatch gb = build_batch(formulas, model.cfg.graph_kind);
    EdgeSets es = model.cfg.graph_kind == GraphKind::VCG ? EdgeSets::split(gb.graph)
                                                         : EdgeSets{};

    Tape<float> tape;
    Bound<float> bound = bind(model, tape);
    MpState<float> s0 =
        init_state(model, gb.graph.num_left, gb.graph.num_clauses, batch_seed);
    StateVars<float> s = lift_state(tape, s0);

    if (cfg.mode == LossMode::Denoise) {
      Rng trng(mix_seed(batch_seed, 0x7D1Fu));
      Assignment x_all(gb.total_vars);
      int off = 0;
      for (int idx : batch) {
        const Sample& sm = samples[idx];
        int t = 1 + static_cast<int>(trng.below(denoise_sched.T));
        Assignment xt = forward_corrupt(sm.target, t, denoise_sched, trng);
        for (int v = 0; v < sm.n; ++v) x_all[off + v] = xt[v];
        off += sm.n;
      }
      s.h_left = embed_state_rows(model, bound, gb.graph, x_all);
    }

    for (int it = 0; it < model.cfg.t_train; ++it) mp_round(model, bound, gb.graph, es, s);

    Var<float> loss;
    if (cfg.mode == LossMode::Sat) {
      MatX<float> labels(gb.num_graphs, 1);
      for (size_t i = 0; i < batch.size(); ++i)
        labels(static_cast<int>(i), 0) = samples[batch[i]].sat ? 1.0f : 0.0f;
      loss = loss_sat(bound, gb, s, labels);
    } else if (cfg.mode == LossMode::Unsupervised) {
      Var<float> logits = readout_logits(model, bound, gb.graph, s);
      loss = loss_unsupervised(logits, formulas);
    } else {
      Var<float> logits = readout_logits(model, bound, gb.graph, s);
      Assignment targets(gb.total_vars);
      if (cfg.mode == LossMode::Closest) {
        Prediction<float> pred = Prediction<float>::from_logits(logits.value());
        for (size_t i = 0; i < batch.size(); ++i) {
          const Sample& sm = samples[batch[i]];
          int off = gb.var_offset[i];
          std::vector<double> ref(sm.n);
          for (int v = 0; v < sm.n; ++v) ref[v] = pred.probs(off + v, 1);
          Assignment tgt = closest_assignment(*sm.formula, ref, cfg.oracle_budget);
          if (cfg.verify_closest_targets) {
            Assignment rounded(sm.n);
            for (int v = 0; v < sm.n; ++v) rounded[v] = ref[v] >= 0.5 ? 1 : 0;
            verify_closest_target(*sm.formula, rounded, tgt);
          }
          for (int v = 0; v < sm.n; ++v) targets[off + v] = tgt[v];
        }
      } else {  // Assignment / Denoise share the supervised CE against targets
        for (size_t i = 0; i < batch.size(); ++i) {
          const Sample& sm = samples[batch[i]];
          int off = gb.var_offset[i];
          for (int v = 0; v < sm.n; ++v) targets[off + v] = sm.target[v];
        }
      }
      if (cfg.mode == LossMode::Denoise) {
        Var<float> probs = softmax_rows(logits);
        loss = scale(cross_entropy_sum(probs, one_hot<float>(targets)),
                     1.0f / static_cast<float>(gb.num_graphs));
      } else if (cfg.mode == LossMode::Assignment && targets.size() > 0 &&
                 cfg.assignment_kind == AssignmentLossKind::MSE) {
        loss = loss_assignment(logits, targets, AssignmentLossKind::MSE);
      } else {
        loss = loss_assignment(logits, targets, AssignmentLossKind::CE);
      }
    }

    tape.backward(loss);
    harvest_grads(model, tape, bound);
    return static_cast<double>(loss.value()(0, 0));
  }

  // Validation metric with the chosen weight set: decision accuracy for the
  // classifier objective, SAT accuracy otherwise (denoise: bit accuracy).
  double validate(bool use_ema, uint64_t seed, int size_filter) {
    std::vector<const Sample*> pool;
    for (const Sample& s : val_samples) {
      if (size_filter > 0 && (s.n > size_filter || s.n < size_filter - 1)) continue;
      pool.push_back(&s);
      if (static_cast<int>(pool.size()) >= cfg.val_limit) break;
    }
    if (pool.empty())
      for (const Sample& s : val_samples) {
        pool.push_back(&s);
        if (static_cast<int>(pool.size()) >= cfg.val_limit) break;
      }
    if (pool.empty()) return 0.0;

    if (cfg.mode == LossMode::Sat) {
      int correct = 0;
      for (size_t i = 0; i < pool.size(); ++i) {
        const Sample& sm = *pool[i];
        std::vector<const CnfFormula*> one{sm.formula};
        GraphBatch gb = build_batch(one, model.cfg.graph_kind);
        EdgeSets es = model.cfg.graph_kind == GraphKind::VCG
                          ? EdgeSets::split(gb.graph)
                          : EdgeSets{};
        Tape<float> tape;
        tape.grad_enabled = false;
        Bound<float> bound = bind(model, tape, use_ema);
        MpState<float> s0 = init_state(model, gb.graph.num_left, gb.graph.num_clauses,
                                       mix_seed(seed, i));
        StateVars<float> sv = lift_state(tape, s0);
        for (int it = 0; it < model.cfg.t_train; ++it)
          mp_round(model, bound, gb.graph, es, sv);
        float logit = sat_logits(bound, gb, sv).value()(0, 0);
        bool pred_sat = logit >= 0.0f;
        if (pred_sat == sm.sat) ++correct;
      }
      return static_cast<double>(correct) / pool.size();
    }

    if (cfg.mode == LossMode::Denoise) {
      Rng trng(mix_seed(seed, 0x7D1Fu));
      long correct = 0, total = 0;
      for (size_t i = 0; i < pool.size(); ++i) {
        const Sample& sm = *pool[i];
        int t = 1 + static_cast<int>(trng.below(denoise_sched.T));
        Assignment xt = forward_corrupt(sm.target, t, denoise_sched, trng);
        FormulaGraph g = model.cfg.graph_kind == GraphKind::VCG
                             ? build_vcg(*sm.formula)
                             : build_lcg(*sm.formula);
        Prediction<float> pred = denoise_predict(model, g, xt, model.cfg.t_train,
                                                 mix_seed(seed, i), use_ema);
        for (int v = 0; v < sm.n; ++v) {
          correct += pred.hard[v] == sm.target[v];
          ++total;
        }
      }
      return total ? static_cast<double>(correct) / total : 0.0;
    }

    int sat_total = 0, sat_solved = 0;
    for (size_t i = 0; i < pool.size(); ++i) {
      const Sample& sm = *pool[i];
      if (!sm.sat) continue;
      ++sat_total;
      SolveResult r = solve(*sm.formula, model, cfg.val_max_iters, mix_seed(seed, i),
                            true, use_ema);
      if (r.status == SolveStatus::SatFound) ++sat_solved;
    }
    return sat_total ? static_cast<double>(sat_solved) / sat_total : 0.0;
  }
};

std::string metrics_csv_text(const std::vector<EpochLog>& log) {
  std::ostringstream out;
  out << "epoch,loss,lr,val_raw,val_ema,cur_size\n";
  char buf[128];
  for (const EpochLog& e : log) {
    std::snprintf(buf, sizeof(buf), "%d,%.6f,%.8f,%.6f,%.6f,%d\n", e.epoch, e.loss,
                  e.lr, e.val_raw, e.val_ema, e.cur_size);
    out << buf;
  }
  return out.str();
}

}  // namespace

TrainResult train(const TrainConfig& cfg) {
  Dataset train_ds = load_dataset(cfg.train_manifest);
  Dataset val_ds = load_dataset(cfg.val_manifest);

  TrainConfig effective = cfg;
  bool need_target = cfg.mode == LossMode::Assignment || cfg.mode == LossMode::Denoise;
  if (cfg.mode == LossMode::Denoise) effective.sat_only = true;
  std::vector<Sample> samples = prepare_samples(train_ds, effective, need_target);
  std::vector<Sample> val_samples =
      prepare_samples(val_ds, effective, cfg.mode == LossMode::Denoise);

  GnnModel<float> model(cfg.model, mix_seed(cfg.seed, 0x110DE1u));
  Trainer trainer{cfg, model, samples, val_samples,
                  cfg.mode == LossMode::Denoise
                      ? build_schedule(cfg.diffusion_T, cfg.beta_min, cfg.beta_max)
                      : NoiseSchedule{}};

  bool use_curriculum = cfg.curriculum.value_or(cfg.mode == LossMode::Sat);
  int max_n = 0;
  for (const Sample& s : samples) max_n = std::max(max_n, s.n);
  CurriculumState cur = curriculum_init(max_n);

  TrainResult result{GnnModel<float>(cfg.model, 0), {}, 0, -1.0,
                     static_cast<int>(samples.size()), {}};
  ParamStore<float> best_params = model.params;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::vector<int> pool;
    for (size_t i = 0; i < samples.size(); ++i) {
      if (use_curriculum && !curriculum_pool_contains(cur, samples[i].n)) continue;
      pool.push_back(static_cast<int>(i));
    }
    if (pool.empty()) {
      pool.resize(samples.size());
      std::iota(pool.begin(), pool.end(), 0);
    }

    // Fisher-Yates with the deterministic stream
    Rng shuffle_rng(mix_seed(cfg.seed, 0x5E0F1u + epoch));
    for (size_t i = pool.size(); i > 1; --i)
      std::swap(pool[i - 1], pool[shuffle_rng.below(i)]);

    double lr = lr_schedule(epoch, cfg.epochs, cfg.lr0, cfg.eta_min);
    double loss_sum = 0.0;
    int batches = 0;
    for (size_t start = 0; start < pool.size(); start += cfg.batch_size) {
      size_t end = std::min(pool.size(), start + cfg.batch_size);
      std::vector<int> batch(pool.begin() + start, pool.begin() + end);
      uint64_t bseed = mix_seed(cfg.seed, (static_cast<uint64_t>(epoch) << 24) | batches);
      loss_sum += trainer.run_batch(batch, bseed);
      AdamConfig adam;
      adam.lr = lr;
      adam_step(model.params, adam);
      ema_update(model.params, cfg.ema_beta);
      ++batches;
    }

    // fixed validation protocol: identical init states every epoch, so the
    // curves reflect weight movement only
    uint64_t vseed = mix_seed(cfg.seed, 0x7a1u);
    int size_filter = use_curriculum ? cur.current_size : 0;
    double val_ema = trainer.validate(true, vseed, size_filter);
    double val_raw = trainer.validate(false, vseed, size_filter);

    EpochLog log;
    log.epoch = epoch;
    log.loss = batches ? loss_sum / batches : 0.0;
    log.lr = lr;
    log.val_raw = val_raw;
    log.val_ema = val_ema;
    log.cur_size = use_curriculum ? cur.current_size : 0;
    result.log.push_back(log);

    if (val_ema > result.best_val) {
      result.best_val = val_ema;
      result.best_epoch = epoch;
      best_params = model.params;
    }
    if (use_curriculum)
      cur = curriculum_step(cur, val_ema, cfg.curriculum_acc_lo, cfg.curriculum_acc_hi,
                            cfg.curriculum_max_epochs);
  }

  model.params = std::move(best_params);
  // published weights are the EMA shadow of the best validation epoch
  for (const std::string& name : model.params.names())
    model.params.at(name).value = model.params.at(name).ema;
  result.model = std::move(model);
  result.metrics_csv_text = metrics_csv_text(result.log);

  if (!cfg.metrics_csv.empty()) {
    std::ofstream out(cfg.metrics_csv, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write metrics csv: " + cfg.metrics_csv);
    out << result.metrics_csv_text;
  }
  if (!cfg.checkpoint_out.empty()) save_checkpoint(cfg.checkpoint_out, result.model);
  return result;
}

TrainResult train_denoiser(TrainConfig cfg) {
  cfg.mode = LossMode::Denoise;
  cfg.model.value_embedding = true;
  return train(cfg);
}

}  // namespace satnn
