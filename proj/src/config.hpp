#pragma once

#include <cstdint>
#include <string>

#include "data.hpp"
#include "search.hpp"

namespace seqnas {

// Fully typed run configuration: everything a search, random-baseline,
// gendata, or eval run needs. Loaded from flat key=value text (one pair per
// line, '#' comment lines) with CLI overrides applied on top; unknown keys
// are rejected. resolve_config() materializes every derived default so a
// config_snapshot() reproduces the run byte-for-byte with no hidden state.
struct RunConfig {
  SpaceSpec space;

  Backend backend = Backend::Surrogate;
  uint64_t seed = 1;
  std::string output_dir;  // empty: no artifacts
  int step1_epochs = 5;
  int step2_warmup_epochs = 1;
  int step2_epochs = 2;
  double reg_beta = 0.3;
  double reg_g = 0.0;         // 0: derive = budget_macs
  long long budget_macs = 0;  // 0: derive = 2x the all-mb3e1 cost
  int batch = 8;
  int random_candidates = 10;

  int surrogate_restarts = 16;
  uint64_t surrogate_seed = 0;  // defaults to seed unless set
  bool surrogate_seed_set = false;
  long long surrogate_target_macs = 0;  // 0: derive = budget_macs / 2
  // Light enough that the expensive fixed-op step-1 probes keep a usable
  // path signal instead of clamping to 0; budget pressure in step 2 comes
  // from the regularizer, not this term.
  double surrogate_w_cost = 0.02;
  double surrogate_w_path = 0.3;
  double surrogate_affinity_scale = 0.02;

  int data_classes = 10;
  int data_glyph = 4;
  int data_n = 512;
  double data_noise = 0.1;
  int data_jitter = 1;
  uint64_t data_seed = 0;  // defaults to seed unless set
  bool data_seed_set = false;

  bool resolved = false;
};

// Desk-scale defaults: an 8-layer space on 16x32 inputs collapsing height to
// 1 over four stages, 10 glyph classes, 8 frames per image.
RunConfig default_config();

// Applies one key=value pair. Error{Parse} on unknown keys or bad values.
void apply_kv(RunConfig& cfg, const std::string& key, const std::string& value);

// Applies a whole config text; `origin` names the source in errors.
void apply_config_text(RunConfig& cfg, const std::string& text, const std::string& origin);

// default_config() + file contents.
RunConfig load_config_file(const std::string& path);

// Materializes derived defaults (budget, G, surrogate target, per-module
// seeds) and validates ranges. Idempotent; snapshots round-trip through it.
void resolve_config(RunConfig& cfg);

// Canonical sorted key=value listing of a resolved config.
std::string config_snapshot(const RunConfig& cfg);

SurrogateSpec surrogate_spec(const RunConfig& cfg);

// Search parameters; the dataset pointer is left null for the caller.
SearchRun to_search_run(const RunConfig& cfg);

// Generates the synthetic dataset described by the data.* keys.
Dataset make_dataset(const RunConfig& cfg);

}  // namespace seqnas
