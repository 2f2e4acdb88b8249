#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "satnn/train.hpp"

using namespace satnn;

namespace {

std::string build_sr_set(const std::string& tag, int count, int min_n, int max_n,
                         uint64_t seed, bool exact = false, bool sat_only = false) {
  namespace fs = std::filesystem;
  std::string dir = (fs::temp_directory_path() / ("satnn_train_" + tag)).string();
  fs::remove_all(dir);
  DatasetSpec spec;
  spec.family = Family::SR;
  spec.min_vars = min_n;
  spec.max_vars = max_n;
  spec.count = count;
  spec.seed = seed;
  spec.exact_n = exact;
  spec.sat_only = sat_only;
  build_dataset(spec, dir);
  return dir + "/manifest.jsonl";
}

TrainConfig small_config(const std::string& train, const std::string& val) {
  TrainConfig cfg;
  cfg.train_manifest = train;
  cfg.val_manifest = val;
  cfg.mode = LossMode::Assignment;
  cfg.epochs = 5;
  cfg.batch_size = 16;
  cfg.seed = 3;
  cfg.lr0 = 2e-3;
  cfg.val_limit = 24;
  cfg.val_max_iters = 12;
  cfg.ema_beta = 0.8;  // tiny runs: only a handful of updates per epoch
  cfg.model.d_model = 16;
  cfg.model.t_train = 8;
  return cfg;
}

}  // namespace

TEST_CASE("curriculum ladder follows the documented schedule") {
  CurriculumState s = curriculum_init(40);
  CHECK(s.current_size == 5);
  CHECK(curriculum_threshold(s) == doctest::Approx(0.65));

  // meeting the threshold advances by two variables
  CurriculumState s2 = curriculum_step(s, 0.70);
  CHECK(s2.current_size == 7);
  CHECK(s2.epochs_at_size == 0);

  // stuck below threshold: forced advance after 100 epochs
  CurriculumState stuck = s;
  for (int e = 0; e < 99; ++e) {
    stuck = curriculum_step(stuck, 0.50);
    CHECK(stuck.current_size == 5);
  }
  stuck = curriculum_step(stuck, 0.50);
  CHECK(stuck.current_size == 7);

  // pool keeps the four previous sizes
  CurriculumState at13 = curriculum_init(40);
  while (at13.current_size < 13) at13 = curriculum_step(at13, 1.0);
  for (int n : {5, 7, 9, 11, 13}) CHECK(curriculum_pool_contains(at13, n));
  CHECK_FALSE(curriculum_pool_contains(at13, 3));
  CHECK_FALSE(curriculum_pool_contains(at13, 15));

  // threshold interpolates linearly up to 0.85 at the last rung
  CurriculumState last = curriculum_init(40);
  while (last.current_size < last.max_size) last = curriculum_step(last, 1.0);
  CHECK(curriculum_threshold(last) == doctest::Approx(0.85));

  // size caps at the dataset maximum
  CurriculumState capped = curriculum_step(last, 1.0);
  CHECK(capped.current_size == 40);
}

TEST_CASE("training smoke: loss decreases over five epochs on a small set") {
  std::string train_path = build_sr_set("smoke", 50, 3, 8, 11);
  std::string val_path = build_sr_set("smoke_val", 20, 3, 8, 12);
  TrainConfig cfg = small_config(train_path, val_path);
  TrainResult result = train(cfg);
  REQUIRE(result.log.size() == 5);
  CHECK(result.log.back().loss < result.log.front().loss);
}

TEST_CASE("sat_only drops every unsatisfiable manifest row") {
  std::string train_path = build_sr_set("satonly", 40, 3, 8, 21);
  std::string val_path = build_sr_set("satonly_val", 10, 3, 8, 22);
  TrainConfig cfg = small_config(train_path, val_path);
  cfg.epochs = 1;
  TrainResult all = train(cfg);
  CHECK(all.training_instances == 40);
  cfg.sat_only = true;
  TrainResult filtered = train(cfg);
  CHECK(filtered.training_instances == 20);
}

TEST_CASE("identical config and seed reproduce the metrics log byte for byte") {
  std::string train_path = build_sr_set("repro", 30, 3, 8, 31);
  std::string val_path = build_sr_set("repro_val", 10, 3, 8, 32);
  TrainConfig cfg = small_config(train_path, val_path);
  cfg.epochs = 3;
  TrainResult a = train(cfg);
  TrainResult b = train(cfg);
  CHECK(a.metrics_csv_text == b.metrics_csv_text);
  CHECK_FALSE(a.metrics_csv_text.empty());
}

TEST_CASE("closest-mode supervision targets pass the oracle spot check") {
  std::string train_path = build_sr_set("closest", 24, 3, 8, 41);
  std::string val_path = build_sr_set("closest_val", 8, 3, 8, 42);
  TrainConfig cfg = small_config(train_path, val_path);
  cfg.mode = LossMode::Closest;
  cfg.epochs = 2;
  cfg.verify_closest_targets = true;  // throws on a suboptimal target
  CHECK_NOTHROW(train(cfg));
}

TEST_CASE("unsupervised and classification modes run end to end") {
  std::string train_path = build_sr_set("modes", 30, 3, 8, 51);
  std::string val_path = build_sr_set("modes_val", 10, 3, 8, 52);
  TrainConfig cfg = small_config(train_path, val_path);
  cfg.epochs = 2;
  cfg.mode = LossMode::Unsupervised;
  CHECK_NOTHROW(train(cfg));
  cfg.mode = LossMode::Sat;
  cfg.model.cell = CellKind::LSTM;
  CHECK_NOTHROW(train(cfg));

  // classification defaults to curriculum training
  TrainResult r = train(cfg);
  CHECK(r.log.front().cur_size > 0);
}

TEST_CASE("denoiser training learns to reconstruct witnesses") {
  std::string train_path = build_sr_set("denoise", 60, 3, 8, 61, false, /*sat_only=*/true);
  std::string val_path = build_sr_set("denoise_val", 20, 3, 8, 62, false, true);
  TrainConfig cfg = small_config(train_path, val_path);
  cfg.epochs = 6;
  cfg.diffusion_T = 8;
  TrainResult r = train_denoiser(cfg);
  CHECK(r.model.cfg.value_embedding);
  CHECK(r.log.back().loss < r.log.front().loss);
  // bit accuracy above chance by the end
  CHECK(r.best_val > 0.5);
}

TEST_CASE("ema shadow is maintained and drives model selection") {
  std::string train_path = build_sr_set("ema", 60, 3, 8, 71);
  std::string val_path = build_sr_set("ema_val", 30, 3, 8, 72);
  TrainConfig cfg = small_config(train_path, val_path);
  cfg.epochs = 6;
  TrainResult r = train(cfg);
  REQUIRE(r.log.size() == 6);
  // both validation series are logged and the best epoch is chosen by the
  // EMA curve (the raw/EMA variance comparison runs at desk scale in the
  // acceptance suite, where the curves actually move)
  double best = -1.0;
  int best_epoch = 0;
  for (const EpochLog& e : r.log)
    if (e.val_ema > best) {
      best = e.val_ema;
      best_epoch = e.epoch;
    }
  CHECK(r.best_epoch == best_epoch);
  CHECK(r.best_val == doctest::Approx(best));
}
