#pragma once

#include <optional>
#include <string>
#include <vector>

#include "satnn/diffusion.hpp"
#include "satnn/generate.hpp"
#include "satnn/model.hpp"

namespace satnn {

enum class LossMode { Sat, Assignment, Unsupervised, Closest, Denoise };

struct TrainConfig {
  std::string train_manifest;
  std::string val_manifest;
  LossMode mode = LossMode::Assignment;
  AssignmentLossKind assignment_kind = AssignmentLossKind::CE;
  bool sat_only = false;
  std::optional<bool> curriculum;  // defaults to (mode == Sat)

  int epochs = 20;
  int batch_size = 32;
  uint64_t seed = 1;
  double lr0 = 2e-4;
  double eta_min = 1e-5;
  double ema_beta = 0.999;

  int val_max_iters = 50;  // inference budget for assignment-style validation
  int val_limit = 200;     // validation instances actually scored

  int curriculum_max_epochs = 100;
  double curriculum_acc_lo = 0.65;
  double curriculum_acc_hi = 0.85;

  int diffusion_T = 50;  // denoiser training schedule
  double beta_min = 0.02;
  double beta_max = 0.35;

  bool verify_closest_targets = false;  // oracle spot-check (tests)
  SolverBudget oracle_budget;

  ModelConfig model;
  std::string checkpoint_out;  // optional paths
  std::string metrics_csv;
};

// Size ladder of the curriculum: starts at 5 variables, advances by 2 when
// the per-size accuracy threshold (interpolated across rungs) is met or the
// epoch cap expires; the training pool keeps the four previous sizes.
struct CurriculumState {
  int current_size = 5;
  int max_size = 40;
  int epochs_at_size = 0;
  int rung = 0;
  int num_rungs = 1;
};

CurriculumState curriculum_init(int max_size);
double curriculum_threshold(const CurriculumState& s, double lo = 0.65, double hi = 0.85);
CurriculumState curriculum_step(const CurriculumState& s, double val_acc,
                                double lo = 0.65, double hi = 0.85,
                                int max_epochs = 100);

// Active pool: the current size plus the four previous ladder sizes.
inline bool curriculum_pool_contains(const CurriculumState& s, int n) {
  return n <= s.current_size && n >= s.current_size - 8;
}

struct EpochLog {
  int epoch = 0;
  double loss = 0.0;
  double lr = 0.0;
  double val_raw = 0.0;  // validation metric with current weights
  double val_ema = 0.0;  // validation metric with EMA weights
  int cur_size = 0;      // active curriculum size (0 when off)
};

struct TrainResult {
  GnnModel<float> model;  // best-EMA weights loaded into the value slots
  std::vector<EpochLog> log;
  int best_epoch = 0;
  double best_val = 0.0;
  int training_instances = 0;  // pool size after filters
  std::string metrics_csv_text;
};

TrainResult train(const TrainConfig& cfg);

// Denoiser training: samples (x0 = witness, t uniform, x_t = corruption) and
// minimizes per-variable cross entropy to x0; no timestep conditioning.
TrainResult train_denoiser(TrainConfig cfg);

}  // namespace satnn
