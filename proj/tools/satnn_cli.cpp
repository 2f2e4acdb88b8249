// satnn command-line front end: dataset generation, training, solving,
// evaluation, test-time scaling sweeps, diffusion-based solving, the SDP
// baseline and dataset statistics.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>

#include "satnn/checkpoint.hpp"
#include "satnn/diffusion.hpp"
#include "satnn/generate.hpp"
#include "satnn/infer.hpp"
#include "satnn/sdp.hpp"
#include "satnn/train.hpp"

using nlohmann::json;
using namespace satnn;

namespace {

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

std::string fmt(double v, int prec = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", prec, v);
  return buf;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  size_t k = v.size() / 2;
  return v.size() % 2 ? v[k] : (v[k - 1] + v[k]) / 2.0;
}

double mean(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / v.size();
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(std::stoi(tok));
  return out;
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
  return out;
}

void emit_summary(const std::string& json_path, const json& summary) {
  if (!json_path.empty()) write_file(json_path, summary.dump(2) + "\n");
}

GraphKind parse_graph(const std::string& s) {
  if (s == "vcg") return GraphKind::VCG;
  if (s == "lcg") return GraphKind::LCG;
  throw std::runtime_error("unknown graph kind: " + s);
}

// ---------------------------------------------------------------------------

struct GenerateOpts {
  std::string out, family = "sr";
  int count = 100, min_n = 3, max_n = 40;
  bool exact_n = false, sat_only = false, no_label = false;
  double ratio = 4.26;
  uint64_t seed = 1;
  int sr_base = 1;
  double sr_bern = 0.7, sr_geo = 0.4;
};

int run_generate(const GenerateOpts& o) {
  DatasetSpec spec;
  spec.family = o.family == "sr" ? Family::SR : Family::ThreeSat;
  spec.min_vars = o.min_n;
  spec.max_vars = o.max_n;
  spec.count = o.count;
  spec.sat_only = o.sat_only;
  spec.exact_n = o.exact_n;
  spec.clause_ratio = o.ratio;
  spec.label = !o.no_label;
  spec.seed = o.seed;
  spec.width = {o.sr_base, o.sr_bern, o.sr_geo};

  DatasetManifest manifest = build_dataset(spec, o.out);
  json config{{"family", o.family},   {"count", o.count},     {"min_n", o.min_n},
              {"max_n", o.max_n},     {"exact_n", o.exact_n}, {"sat_only", o.sat_only},
              {"ratio", o.ratio},     {"label", !o.no_label}, {"seed", o.seed},
              {"sr_base", o.sr_base}, {"sr_bern", o.sr_bern}, {"sr_geo", o.sr_geo},
              {"out", o.out}};
  json summary{{"command", "generate"},
               {"config", config},
               {"instances", manifest.rows.size()},
               {"manifest", o.out + "/manifest.jsonl"}};
  emit_summary(o.out + "/summary.json", summary);
  std::printf("wrote %zu instances to %s\n", manifest.rows.size(), o.out.c_str());
  return 0;
}

// ---------------------------------------------------------------------------

struct StatsOpts {
  std::string data, csv, json_path;
  int samples = 1000;
  uint64_t seed = 7;
};

int run_stats(const StatsOpts& o) {
  Dataset ds = load_dataset(o.data);
  if (ds.instances.empty()) throw std::runtime_error("dataset is empty");
  int labeled = 0, sat_count = 0;
  std::vector<double> gaps, sat_gaps, unsat_gaps, clause_counts;
  std::ostringstream csv;
  csv << "id,n,m,sat,gap_mean,gap_std\n";
  for (size_t i = 0; i < ds.instances.size(); ++i) {
    const LabeledInstance& inst = ds.instances[i];
    GapStats st = random_gap_stats(inst.formula, o.samples, mix_seed(o.seed, i));
    gaps.push_back(st.mean);
    clause_counts.push_back(inst.formula.num_clauses());
    std::string sat_str = "";
    if (inst.sat.has_value()) {
      ++labeled;
      sat_str = *inst.sat ? "1" : "0";
      if (*inst.sat) {
        ++sat_count;
        sat_gaps.push_back(st.mean);
      } else {
        unsat_gaps.push_back(st.mean);
      }
    }
    csv << ds.rows[i].id << ',' << inst.formula.num_vars << ','
        << inst.formula.num_clauses() << ',' << sat_str << ',' << fmt(st.mean, 6)
        << ',' << fmt(st.stddev, 6) << '\n';
  }
  double sat_pct = labeled ? 100.0 * sat_count / labeled : 0.0;

  std::printf("%-10s %8s %10s %10s %12s %12s\n", "Instances", "SAT%", "Avg. Gap",
              "SAT Gap", "UNSAT Gap", "Avg. Clauses");
  std::printf("%-10zu %8s %10s %10s %12s %12s\n", ds.instances.size(),
              labeled ? fmt(sat_pct, 1).c_str() : "n/a", fmt(mean(gaps), 2).c_str(),
              sat_gaps.empty() ? "n/a" : fmt(mean(sat_gaps), 2).c_str(),
              unsat_gaps.empty() ? "n/a" : fmt(mean(unsat_gaps), 2).c_str(),
              fmt(mean(clause_counts), 2).c_str());

  if (!o.csv.empty()) write_file(o.csv, csv.str());
  json summary{{"command", "stats"},
               {"config", {{"data", o.data}, {"samples", o.samples}, {"seed", o.seed}}},
               {"instances", ds.instances.size()},
               {"sat_pct", sat_pct},
               {"avg_gap", mean(gaps)},
               {"sat_gap", sat_gaps.empty() ? 0.0 : mean(sat_gaps)},
               {"unsat_gap", unsat_gaps.empty() ? 0.0 : mean(unsat_gaps)},
               {"avg_clauses", mean(clause_counts)}};
  emit_summary(o.json_path, summary);
  return 0;
}

// ---------------------------------------------------------------------------

struct TrainOpts {
  std::string data, val, mode = "assignment", graph = "vcg", cell = "rnn";
  int d_model = 64, t_train = 25, epochs = 20, batch = 32;
  double lr = 2e-4, ema_beta = 0.999;
  uint64_t seed = 1;
  bool sat_only = false;
  int curriculum = -1;  // -1 auto, 0 off, 1 on
  std::string out, metrics;
  int val_iters = 50, val_limit = 200;
  int diff_T = 50;
  double beta_min = 0.02, beta_max = 0.35;
};

int run_train(const TrainOpts& o) {
  TrainConfig cfg;
  cfg.train_manifest = o.data;
  cfg.val_manifest = o.val.empty() ? o.data : o.val;
  if (o.mode == "sat") cfg.mode = LossMode::Sat;
  else if (o.mode == "assignment") cfg.mode = LossMode::Assignment;
  else if (o.mode == "mse") {
    cfg.mode = LossMode::Assignment;
    cfg.assignment_kind = AssignmentLossKind::MSE;
  } else if (o.mode == "unsupervised") cfg.mode = LossMode::Unsupervised;
  else if (o.mode == "closest") cfg.mode = LossMode::Closest;
  else if (o.mode == "denoise") cfg.mode = LossMode::Denoise;
  else throw std::runtime_error("unknown training mode: " + o.mode);
  cfg.sat_only = o.sat_only;
  if (o.curriculum >= 0) cfg.curriculum = o.curriculum != 0;
  cfg.epochs = o.epochs;
  cfg.batch_size = o.batch;
  cfg.seed = o.seed;
  cfg.lr0 = o.lr;
  cfg.ema_beta = o.ema_beta;
  cfg.val_max_iters = o.val_iters;
  cfg.val_limit = o.val_limit;
  cfg.diffusion_T = o.diff_T;
  cfg.beta_min = o.beta_min;
  cfg.beta_max = o.beta_max;
  cfg.model.graph_kind = parse_graph(o.graph);
  cfg.model.cell = o.cell == "rnn" ? CellKind::RNN : CellKind::LSTM;
  cfg.model.d_model = o.d_model;
  cfg.model.t_train = o.t_train;
  cfg.model.value_embedding = cfg.mode == LossMode::Denoise;
  cfg.checkpoint_out = o.out;
  cfg.metrics_csv = o.metrics;

  TrainResult result = train(cfg);
  std::printf("epoch  loss      lr         val_raw  val_ema\n");
  for (const EpochLog& e : result.log)
    std::printf("%5d  %-8s  %-9s  %-7s  %-7s\n", e.epoch, fmt(e.loss).c_str(),
                fmt(e.lr, 6).c_str(), fmt(e.val_raw).c_str(), fmt(e.val_ema).c_str());
  std::printf("best epoch %d (val %s)%s%s\n", result.best_epoch,
              fmt(result.best_val).c_str(),
              o.out.empty() ? "" : (" -> " + o.out).c_str(),
              o.metrics.empty() ? "" : (" metrics: " + o.metrics).c_str());
  return 0;
}

// ---------------------------------------------------------------------------

struct EvalRecord {
  int id = 0, n = 0, m = 0;
  bool has_label = false, sat = false;
  int best_gap = 0, steps = 0;
  bool solved = false;
};

json eval_config_json(const std::string& cmd, const std::string& model,
                      const std::string& data, int iters, int samples, uint64_t seed) {
  return json{{"command", cmd}, {"model", model},     {"data", data},
              {"max_iters", iters}, {"samples", samples}, {"seed", seed}};
}

struct SolveOpts {
  std::string model, data, csv, json_path;
  std::string trajectory;  // per-iteration PCA export for one instance
  int trajectory_id = 0;
  int max_iters = 100, samples = 1;
  uint64_t seed = 11;
  bool early_stop = true;
};

int run_solve(const SolveOpts& o) {
  GnnModel<float> model = load_checkpoint(o.model);
  Dataset ds = load_dataset(o.data);
  if (ds.instances.empty()) throw std::runtime_error("dataset is empty");

  std::vector<EvalRecord> records;
  std::vector<double> sat_steps, unsat_steps;
  int sat_total = 0, sat_solved = 0, unsat_total = 0, unsat_gap1 = 0, correct = 0;
  std::ostringstream csv;
  csv << "id,n,m,sat,best_gap,steps,solved\n";
  for (size_t i = 0; i < ds.instances.size(); ++i) {
    const LabeledInstance& inst = ds.instances[i];
    SolveResult r = resample_solve(inst.formula, model, o.max_iters, o.samples,
                                   mix_seed(o.seed, i), o.early_stop);
    EvalRecord rec;
    rec.id = ds.rows[i].id;
    rec.n = inst.formula.num_vars;
    rec.m = inst.formula.num_clauses();
    rec.best_gap = r.best_gap;
    rec.steps = r.steps_used;
    rec.solved = r.status == SolveStatus::SatFound;
    rec.has_label = inst.sat.has_value();
    rec.sat = inst.sat.value_or(false);
    records.push_back(rec);
    if (rec.has_label) {
      if (rec.sat) {
        ++sat_total;
        if (rec.solved) {
          ++sat_solved;
          ++correct;
          sat_steps.push_back(rec.steps);
        }
      } else {
        ++unsat_total;
        ++correct;  // never misclassified under the assignment rule
        if (rec.best_gap == 1) ++unsat_gap1;
        unsat_steps.push_back(rec.steps);
      }
    }
    csv << rec.id << ',' << rec.n << ',' << rec.m << ','
        << (rec.has_label ? (rec.sat ? "1" : "0") : "") << ',' << rec.best_gap << ','
        << rec.steps << ',' << (rec.solved ? 1 : 0) << '\n';
  }
  int labeled = sat_total + unsat_total;
  double dec_acc = labeled ? 100.0 * correct / labeled : 0.0;
  double solved_pct = sat_total ? 100.0 * sat_solved / sat_total : 0.0;
  double gap1_pct = unsat_total ? 100.0 * unsat_gap1 / unsat_total : 0.0;

  std::printf("%-9s %-12s %-16s %-18s %-18s\n", "Decision", "SAT Solved",
              "UNSAT (gap==1)", "SAT Steps Avg/Med", "UNSAT Steps Avg/Med");
  std::printf("%-9s %-12s %-16s %s/%-10s %s/%-10s\n", fmt(dec_acc, 1).c_str(),
              fmt(solved_pct, 1).c_str(), fmt(gap1_pct, 1).c_str(),
              fmt(mean(sat_steps), 2).c_str(), fmt(median(sat_steps), 1).c_str(),
              fmt(mean(unsat_steps), 2).c_str(), fmt(median(unsat_steps), 1).c_str());

  if (!o.trajectory.empty()) {
    if (o.trajectory_id < 0 || o.trajectory_id >= static_cast<int>(ds.instances.size()))
      throw std::runtime_error("trajectory instance id out of range");
    TrajectoryExport exp = export_trajectory(ds.instances[o.trajectory_id].formula,
                                             model, std::max(2, o.max_iters),
                                             mix_seed(o.seed, o.trajectory_id));
    write_file(o.trajectory, exp.to_csv());
  }
  if (!o.csv.empty()) write_file(o.csv, csv.str());
  json summary{{"command", "solve"},
               {"config", eval_config_json("solve", o.model, o.data, o.max_iters,
                                           o.samples, o.seed)},
               {"decision_acc", dec_acc},
               {"sat_solved_pct", solved_pct},
               {"unsat_gap1_pct", gap1_pct},
               {"sat_steps_avg", mean(sat_steps)},
               {"sat_steps_med", median(sat_steps)},
               {"unsat_steps_avg", mean(unsat_steps)},
               {"unsat_steps_med", median(unsat_steps)}};
  emit_summary(o.json_path, summary);
  return 0;
}

// ---------------------------------------------------------------------------

struct EvalOpts {
  std::string model, data, csv, json_path, decode = "argmax", decision = "assignment";
  int max_iters = 100, samples = 1;
  uint64_t seed = 13;
};

int run_eval(const EvalOpts& o) {
  GnnModel<float> model = load_checkpoint(o.model);
  Dataset ds = load_dataset(o.data);
  if (ds.instances.empty()) throw std::runtime_error("dataset is empty");

  std::vector<double> gaps, sat_gaps, unsat_gaps;
  int sat_total = 0, sat_found = 0, correct = 0, labeled = 0;
  std::ostringstream csv;
  csv << "id,n,m,sat,gap,solved,decision_correct\n";
  for (size_t i = 0; i < ds.instances.size(); ++i) {
    const LabeledInstance& inst = ds.instances[i];
    const CnfFormula& f = inst.formula;
    int gap = 0;
    bool classifier_sat = false;
    if (o.decode == "cluster") {
      int best_gap = f.num_clauses() + 1;
      for (int s = 0; s < o.samples; ++s) {
        FormulaGraph g = model.cfg.graph_kind == GraphKind::VCG ? build_vcg(f)
                                                                : build_lcg(f);
        MpState<float> last;
        forward<float>(model, g, o.max_iters, mix_seed(mix_seed(o.seed, i), s),
                       [&](int, const MpState<float>& st, const Prediction<float>&) {
                         last = st;
                         return true;
                       });
        Assignment a =
            cluster_decode(variable_rows(last, g), f, mix_seed(o.seed, i + 1));
        best_gap = std::min(best_gap, evaluate(f, a).gap);
        if (best_gap == 0) break;
      }
      gap = best_gap;
    } else {
      SolveResult r =
          resample_solve(f, model, o.max_iters, o.samples, mix_seed(o.seed, i), true);
      gap = r.best_gap;
    }
    if (o.decision == "classifier") {
      std::vector<const CnfFormula*> one{&f};
      GraphBatch gb = build_batch(one, model.cfg.graph_kind);
      EdgeSets es = model.cfg.graph_kind == GraphKind::VCG ? EdgeSets::split(gb.graph)
                                                           : EdgeSets{};
      Tape<float> tape;
      tape.grad_enabled = false;
      Bound<float> bound = bind(model, tape);
      MpState<float> s0 =
          init_state(model, gb.graph.num_left, gb.graph.num_clauses, mix_seed(o.seed, i));
      StateVars<float> sv = lift_state(tape, s0);
      for (int it = 0; it < o.max_iters; ++it) mp_round(model, bound, gb.graph, es, sv);
      classifier_sat = sat_logits(bound, gb, sv).value()(0, 0) >= 0.0f;
    }

    bool solved = gap == 0;
    bool dec_correct = false;
    gaps.push_back(gap);
    if (inst.sat.has_value()) {
      ++labeled;
      if (*inst.sat) {
        ++sat_total;
        sat_gaps.push_back(gap);
        if (solved) ++sat_found;
      } else {
        unsat_gaps.push_back(gap);
      }
      if (o.decision == "classifier")
        dec_correct = classifier_sat == *inst.sat;
      else
        dec_correct = *inst.sat ? solved : true;
      if (dec_correct) ++correct;
    }
    csv << ds.rows[i].id << ',' << f.num_vars << ',' << f.num_clauses() << ','
        << (inst.sat.has_value() ? (*inst.sat ? "1" : "0") : "") << ',' << gap << ','
        << (solved ? 1 : 0) << ',' << (dec_correct ? 1 : 0) << '\n';
  }

  double avg_gap = mean(gaps);
  double sat_acc = sat_total ? 100.0 * sat_found / sat_total : 0.0;
  double dec_acc = labeled ? 100.0 * correct / labeled : 0.0;
  std::printf("decision mode: %s, decode: %s\n", o.decision.c_str(), o.decode.c_str());
  std::printf("%-10s %-10s %-12s %-10s %-10s\n", "Avg. Gap", "SAT Gap", "UNSAT Gap",
              "SAT Acc", "Dec. Acc");
  std::printf("%-10s %-10s %-12s %-10s %-10s\n", fmt(avg_gap, 2).c_str(),
              fmt(mean(sat_gaps), 2).c_str(), fmt(mean(unsat_gaps), 2).c_str(),
              fmt(sat_acc, 1).c_str(), fmt(dec_acc, 1).c_str());

  if (!o.csv.empty()) write_file(o.csv, csv.str());
  json summary{{"command", "eval"},
               {"config", eval_config_json("eval", o.model, o.data, o.max_iters,
                                           o.samples, o.seed)},
               {"decode", o.decode},
               {"decision", o.decision},
               {"avg_gap", avg_gap},
               {"sat_gap", mean(sat_gaps)},
               {"unsat_gap", mean(unsat_gaps)},
               {"sat_acc", sat_acc},
               {"decision_acc", dec_acc}};
  emit_summary(o.json_path, summary);
  return 0;
}

// ---------------------------------------------------------------------------

struct SweepOpts {
  std::string model, data, csv, json_path;
  std::string iters = "25,50,75,100,125";
  int samples = 5;
  uint64_t seed = 17;
};

int run_sweep(const SweepOpts& o) {
  GnnModel<float> model = load_checkpoint(o.model);
  Dataset ds = load_dataset(o.data);
  if (ds.instances.empty()) throw std::runtime_error("dataset is empty");
  std::vector<int> iter_levels = parse_int_list(o.iters);
  std::vector<int> sample_levels(o.samples);
  std::iota(sample_levels.begin(), sample_levels.end(), 1);

  SweepGrid grid = sweep(ds, model, iter_levels, sample_levels, o.seed);
  std::printf("decision accuracy grid (rows: samples, cols: iterations)\n%8s", "");
  for (int it : iter_levels) std::printf(" %8d", it);
  std::printf("\n");
  for (size_t s = 0; s < sample_levels.size(); ++s) {
    std::printf("%8d", sample_levels[s]);
    for (size_t it = 0; it < iter_levels.size(); ++it)
      std::printf(" %8s", fmt(grid.at(it, s).decision_acc, 4).c_str());
    std::printf("\n");
  }
  if (!o.csv.empty()) write_file(o.csv, grid.to_csv());
  json summary{{"command", "sweep"},
               {"config",
                {{"model", o.model},
                 {"data", o.data},
                 {"iters", o.iters},
                 {"samples", o.samples},
                 {"seed", o.seed}}},
               {"csv", o.csv}};
  emit_summary(o.json_path, summary);
  return 0;
}

// ---------------------------------------------------------------------------

struct DiffuseOpts {
  std::string model, data, csv, json_path, thresholds = "0.6,0.75,0.9";
  int gnn_steps = 25, diff_steps = 10, max_depth = -1;
  bool up = false, deterministic = false;
  uint64_t seed = 19;
};

int run_diffuse(const DiffuseOpts& o) {
  GnnModel<float> model = load_checkpoint(o.model);
  if (!model.cfg.value_embedding)
    throw std::runtime_error("diffuse requires a denoiser checkpoint (value embedding)");
  Dataset ds = load_dataset(o.data);
  if (ds.instances.empty()) throw std::runtime_error("dataset is empty");

  DiffusionRun run;
  run.gnn_steps = o.gnn_steps;
  run.diffusion_steps = o.diff_steps;
  run.thresholds = parse_double_list(o.thresholds);
  run.max_depth = o.max_depth;
  run.deterministic = o.deterministic;

  int labeled = 0, plain_correct = 0, up_correct = 0;
  std::vector<double> rec_total, rec_solved, rec_unsolved;
  std::ostringstream csv;
  csv << "id,n,m,sat,plain_gap,plain_solved,up_gap,up_solved,rec_calls\n";
  for (size_t i = 0; i < ds.instances.size(); ++i) {
    const LabeledInstance& inst = ds.instances[i];
    SolveResult plain = diffusion_solve(inst.formula, model, run, mix_seed(o.seed, i));
    bool plain_solved = plain.status == SolveStatus::SatFound;
    UpSolveResult ups;
    bool up_solved = false;
    if (o.up) {
      ups = up_guided_solve(inst.formula, model, run, mix_seed(o.seed, i));
      up_solved = ups.result.status == SolveStatus::SatFound;
      rec_total.push_back(ups.recursive_calls);
      (up_solved ? rec_solved : rec_unsolved).push_back(ups.recursive_calls);
    }
    if (inst.sat.has_value()) {
      ++labeled;
      if (*inst.sat ? plain_solved : true) ++plain_correct;
      if (*inst.sat ? up_solved : true) ++up_correct;
    }
    csv << ds.rows[i].id << ',' << inst.formula.num_vars << ','
        << inst.formula.num_clauses() << ','
        << (inst.sat.has_value() ? (*inst.sat ? "1" : "0") : "") << ','
        << plain.best_gap << ',' << (plain_solved ? 1 : 0) << ','
        << (o.up ? std::to_string(ups.result.best_gap) : "") << ','
        << (o.up ? std::to_string(up_solved ? 1 : 0) : "") << ','
        << (o.up ? std::to_string(ups.recursive_calls) : "") << '\n';
  }
  double dec = labeled ? 100.0 * plain_correct / labeled : 0.0;
  double up_acc = labeled ? 100.0 * up_correct / labeled : 0.0;
  if (o.up) {
    std::printf("%-12s %-12s %-16s %-18s %-18s\n", "Dec. Acc", "U.P. Acc",
                "Total Rec. Calls", "Solved Rec. Calls", "Unsolved Rec. Calls");
    std::printf("%-12s %-12s %-16s %-18s %-18s\n", fmt(dec, 1).c_str(),
                fmt(up_acc, 1).c_str(), fmt(mean(rec_total), 3).c_str(),
                fmt(mean(rec_solved), 3).c_str(), fmt(mean(rec_unsolved), 3).c_str());
  } else {
    std::printf("%-12s (gnn_steps=%d, diffusion_steps=%d)\n", "Dec. Acc", o.gnn_steps,
                o.diff_steps);
    std::printf("%-12s\n", fmt(dec, 1).c_str());
  }

  if (!o.csv.empty()) write_file(o.csv, csv.str());
  json summary{{"command", "diffuse"},
               {"config",
                {{"model", o.model},
                 {"data", o.data},
                 {"gnn_steps", o.gnn_steps},
                 {"diff_steps", o.diff_steps},
                 {"thresholds", o.thresholds},
                 {"max_depth", o.max_depth},
                 {"deterministic", o.deterministic},
                 {"up", o.up},
                 {"seed", o.seed}}},
               {"decision_acc", dec},
               {"up_acc", up_acc},
               {"rec_calls_total", mean(rec_total)},
               {"rec_calls_solved", mean(rec_solved)},
               {"rec_calls_unsolved", mean(rec_unsolved)}};
  emit_summary(o.json_path, summary);
  return 0;
}

// ---------------------------------------------------------------------------

struct SdpOpts {
  std::string data, csv, json_path, rounding = "hyperplane";
  int gen_n = 0, gen_m = 0, gen_count = 0;
  int trials = 64, iters = 2000;
  double lr = 0.1;
  uint64_t seed = 23;
  bool no_oracle = false;
};

int run_sdp(const SdpOpts& o) {
  std::vector<CnfFormula> formulas;
  if (!o.data.empty()) {
    Dataset ds = load_dataset(o.data);
    for (const LabeledInstance& inst : ds.instances) formulas.push_back(inst.formula);
  } else if (o.gen_count > 0) {
    for (int i = 0; i < o.gen_count; ++i) {
      Rng rng(mix_seed(o.seed, 0x2c7 + i));
      formulas.push_back(gen_random_ksat(o.gen_n, o.gen_m, 2, rng));
    }
  }
  if (formulas.empty()) throw std::runtime_error("no instances (use --data or --gen-count)");

  RoundingMode mode = o.rounding == "sign" ? RoundingMode::Sign : RoundingMode::Hyperplane;
  std::ostringstream csv;
  csv << "id,n,m,relaxation,rounded_satisfied,optimum,ratio\n";
  std::vector<double> ratios, relax_values;
  for (size_t i = 0; i < formulas.size(); ++i) {
    const CnfFormula& f = formulas[i];
    SdpProblem p = build_w(f);
    VectorState st = optimize_vectors(p, o.iters, o.lr, mix_seed(o.seed, i));
    double relax = sdp_objective(p, st);
    Assignment a = sdp_round(st, f, mode, o.trials, mix_seed(o.seed, i + 101));
    int satisfied = evaluate(f, a).satisfied_count;
    int optimum = -1;
    double ratio = -1.0;
    if (!o.no_oracle && f.num_vars <= 26) {
      optimum = f.num_clauses() - maxsat_optimum(f).min_gap;
      ratio = optimum > 0 ? static_cast<double>(satisfied) / optimum : 1.0;
      ratios.push_back(ratio);
    }
    relax_values.push_back(relax);
    csv << i << ',' << f.num_vars << ',' << f.num_clauses() << ',' << fmt(relax, 6)
        << ',' << satisfied << ',' << optimum << ',' << fmt(ratio, 6) << '\n';
  }
  std::printf("%-10s %-14s %-12s\n", "Instances", "Mean ratio", "Mean relax");
  std::printf("%-10zu %-14s %-12s\n", formulas.size(),
              ratios.empty() ? "n/a" : fmt(mean(ratios), 4).c_str(),
              fmt(mean(relax_values), 3).c_str());
  if (!o.csv.empty()) write_file(o.csv, csv.str());
  json summary{{"command", "sdp"},
               {"config",
                {{"data", o.data},
                 {"gen_n", o.gen_n},
                 {"gen_m", o.gen_m},
                 {"gen_count", o.gen_count},
                 {"rounding", o.rounding},
                 {"trials", o.trials},
                 {"iters", o.iters},
                 {"lr", o.lr},
                 {"seed", o.seed}}},
               {"mean_ratio", ratios.empty() ? -1.0 : mean(ratios)},
               {"mean_relaxation", mean(relax_values)}};
  emit_summary(o.json_path, summary);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"satnn: recurrent message-passing networks for SAT/MaxSAT"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value config file; command-line flags win");

  GenerateOpts gen;
  CLI::App* cg = app.add_subcommand("generate", "generate a benchmark dataset");
  cg->add_option("--out", gen.out, "output directory")->required();
  cg->add_option("--family", gen.family, "sr | 3sat");
  cg->add_option("--count", gen.count, "instance count (pair halves for SR)");
  cg->add_option("--min-n", gen.min_n, "minimum variables");
  cg->add_option("--max-n", gen.max_n, "maximum variables");
  cg->add_flag("--exact-n", gen.exact_n, "use exactly max-n variables (eval sets)");
  cg->add_flag("--sat-only", gen.sat_only, "keep satisfiable instances only");
  cg->add_flag("--no-label", gen.no_label, "skip solver labeling (3sat only)");
  cg->add_option("--ratio", gen.ratio, "clause-to-variable ratio (3sat)");
  cg->add_option("--seed", gen.seed, "generation seed");
  cg->add_option("--sr-base", gen.sr_base, "SR width base");
  cg->add_option("--sr-bern", gen.sr_bern, "SR width Bernoulli p");
  cg->add_option("--sr-geo", gen.sr_geo, "SR width geometric p");

  StatsOpts st;
  CLI::App* cs = app.add_subcommand("stats", "dataset statistics (benchmark table)");
  cs->add_option("--data", st.data, "manifest.jsonl path")->required();
  cs->add_option("--samples", st.samples, "random assignments per instance");
  cs->add_option("--seed", st.seed, "sampling seed");
  cs->add_option("--csv", st.csv, "per-instance CSV output");
  cs->add_option("--json", st.json_path, "JSON summary output");

  TrainOpts tr;
  CLI::App* ct = app.add_subcommand("train", "train a model");
  ct->add_option("--data", tr.data, "training manifest")->required();
  ct->add_option("--val", tr.val, "validation manifest (defaults to --data)");
  ct->add_option("--mode", tr.mode, "sat|assignment|mse|unsupervised|closest|denoise");
  ct->add_option("--graph", tr.graph, "vcg | lcg");
  ct->add_option("--cell", tr.cell, "rnn | lstm");
  ct->add_option("--d-model", tr.d_model, "embedding width");
  ct->add_option("--t-train", tr.t_train, "message-passing iterations");
  ct->add_option("--epochs", tr.epochs, "training epochs");
  ct->add_option("--batch", tr.batch, "formulas per batch");
  ct->add_option("--lr", tr.lr, "initial learning rate");
  ct->add_option("--ema-beta", tr.ema_beta, "EMA decay");
  ct->add_option("--seed", tr.seed, "training seed");
  ct->add_flag("--sat-only", tr.sat_only, "train on satisfiable instances only");
  ct->add_option("--curriculum", tr.curriculum, "-1 auto, 0 off, 1 on");
  ct->add_option("--out", tr.out, "checkpoint path");
  ct->add_option("--metrics", tr.metrics, "metrics CSV path");
  ct->add_option("--val-iters", tr.val_iters, "validation inference iterations");
  ct->add_option("--val-limit", tr.val_limit, "validation instance cap");
  ct->add_option("--diff-T", tr.diff_T, "denoiser training timesteps");
  ct->add_option("--beta-min", tr.beta_min, "noise schedule start");
  ct->add_option("--beta-max", tr.beta_max, "noise schedule end");

  SolveOpts so;
  CLI::App* cso = app.add_subcommand("solve", "solve instances, report step table");
  cso->add_option("--model", so.model, "checkpoint")->required();
  cso->add_option("--data", so.data, "manifest")->required();
  cso->add_option("--max-iters", so.max_iters, "iteration budget");
  cso->add_option("--samples", so.samples, "resampling attempts");
  cso->add_option("--seed", so.seed, "inference seed");
  cso->add_flag("--early-stop,!--no-early-stop", so.early_stop,
                "stop at the first verified satisfying decode (default on)");
  cso->add_option("--trajectory", so.trajectory, "per-iteration PCA CSV for one instance");
  cso->add_option("--trajectory-id", so.trajectory_id, "instance row for --trajectory");
  cso->add_option("--csv", so.csv, "per-instance CSV");
  cso->add_option("--json", so.json_path, "JSON summary");

  EvalOpts ev;
  CLI::App* cev = app.add_subcommand("eval", "evaluate the five benchmark metrics");
  cev->add_option("--model", ev.model, "checkpoint")->required();
  cev->add_option("--data", ev.data, "manifest")->required();
  cev->add_option("--max-iters", ev.max_iters, "iteration budget");
  cev->add_option("--samples", ev.samples, "resampling attempts");
  cev->add_option("--seed", ev.seed, "inference seed");
  cev->add_option("--decode", ev.decode, "argmax | cluster");
  cev->add_option("--decision", ev.decision, "assignment | classifier");
  cev->add_option("--csv", ev.csv, "per-instance CSV");
  cev->add_option("--json", ev.json_path, "JSON summary");

  SweepOpts sw;
  CLI::App* csw = app.add_subcommand("sweep", "iterations x samples scaling grid");
  csw->add_option("--model", sw.model, "checkpoint")->required();
  csw->add_option("--data", sw.data, "manifest")->required();
  csw->add_option("--iters", sw.iters, "comma-separated iteration levels");
  csw->add_option("--samples", sw.samples, "max resampling attempts");
  csw->add_option("--seed", sw.seed, "inference seed");
  csw->add_option("--csv", sw.csv, "grid CSV output");
  csw->add_option("--json", sw.json_path, "JSON summary");

  DiffuseOpts df;
  CLI::App* cdf = app.add_subcommand("diffuse", "diffusion sampling / UP search");
  cdf->add_option("--model", df.model, "denoiser checkpoint")->required();
  cdf->add_option("--data", df.data, "manifest")->required();
  cdf->add_option("--gnn-steps", df.gnn_steps, "message-passing steps per call");
  cdf->add_option("--diff-steps", df.diff_steps, "diffusion steps");
  cdf->add_option("--thresholds", df.thresholds, "UP belief thresholds");
  cdf->add_option("--max-depth", df.max_depth, "UP recursion cap");
  cdf->add_flag("--up", df.up, "also run unit-propagation-guided search");
  cdf->add_flag("--deterministic", df.deterministic, "argmax rounding instead of sampling");
  cdf->add_option("--seed", df.seed, "sampling seed");
  cdf->add_option("--csv", df.csv, "per-instance CSV");
  cdf->add_option("--json", df.json_path, "JSON summary");

  SdpOpts sd;
  CLI::App* csd = app.add_subcommand("sdp", "MAX-2-SAT SDP relaxation baseline");
  csd->add_option("--data", sd.data, "manifest of width<=2 instances");
  csd->add_option("--gen-n", sd.gen_n, "random instance variables");
  csd->add_option("--gen-m", sd.gen_m, "random instance clauses");
  csd->add_option("--gen-count", sd.gen_count, "random instance count");
  csd->add_option("--rounding", sd.rounding, "sign | hyperplane");
  csd->add_option("--trials", sd.trials, "hyperplane trials");
  csd->add_option("--iters", sd.iters, "ascent iterations");
  csd->add_option("--lr", sd.lr, "ascent step size");
  csd->add_option("--seed", sd.seed, "seed");
  csd->add_flag("--no-oracle", sd.no_oracle, "skip the exact optimum");
  csd->add_option("--csv", sd.csv, "per-instance CSV");
  csd->add_option("--json", sd.json_path, "JSON summary");

  CLI11_PARSE(app, argc, argv);

  try {
    if (cg->parsed()) return run_generate(gen);
    if (cs->parsed()) return run_stats(st);
    if (ct->parsed()) return run_train(tr);
    if (cso->parsed()) return run_solve(so);
    if (cev->parsed()) return run_eval(ev);
    if (csw->parsed()) return run_sweep(sw);
    if (cdf->parsed()) return run_diffuse(df);
    if (csd->parsed()) return run_sdp(sd);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
