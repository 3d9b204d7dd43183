#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cost.hpp"
#include "data.hpp"
#include "neural.hpp"
#include "space.hpp"
#include "surrogate.hpp"

namespace seqnas {

enum class Backend { Surrogate, Neural };

std::string backend_name(Backend b);
Backend backend_from_name(const std::string& name);

// Everything one search needs. The dataset pointer is only read by the
// neural backend and must outlive the run.
struct SearchRun {
  SpaceSpec space;
  Backend backend = Backend::Surrogate;
  int step1_epochs = 5;
  int step2_warmup_epochs = 1;
  int step2_epochs = 2;
  RegularizerConfig reg;
  long long budget_macs = 0;
  uint64_t seed = 1;
  std::string output_dir;  // empty: write no artifacts

  SurrogateSpec surrogate;
  const Dataset* data = nullptr;
  int batch = 8;
  int surrogate_restarts = 16;

  void validate() const;
};

// One evaluated candidate (a path in step 1, an architecture in random
// search). objective is the minimized comparison key for both backends.
struct CandidateScore {
  int index = 0;
  Backend backend = Backend::Surrogate;
  std::string candidate;
  double objective = 0.0;
  long long total_macs = 0;
  double score = 0.0;      // surrogate backend
  double val_loss = 0.0;   // neural backend
  double frame_acc = 0.0;  // neural backend
  double seq_acc = 0.0;    // neural backend

  std::string to_json() const;
};

struct SearchResult {
  Backend backend = Backend::Surrogate;
  uint64_t seed = 0;
  StridePath best_path;
  Architecture best_arch;
  std::vector<CandidateScore> scores;
  CostReport cost;
  double best_score = 0.0;  // surrogate score, or final validation loss (neural)
  double objective = 0.0;   // backend objective of best_arch, lower is better
  double wall_time = 0.0;   // seconds; never serialized, reruns stay byte-identical

  std::string to_json() const;
};

// Regularized surrogate objective minimized by step 2 and shared with the
// exhaustive test oracles: r(total_macs) * (1 - score). Architectures whose
// cost is <= 1 MAC fall outside the regularizer's domain and count as
// unregularized.
double surrogate_objective(const Architecture& arch, const SurrogateSpec& spec,
                           const RegularizerConfig& reg);

struct Step1Result {
  int winner = -1;
  StridePath path;
  std::vector<CandidateScore> table;
  ParamStore winner_store;   // neural backend
  EvalReport winner_report;  // neural backend
};

// Evaluates every stage-aligned candidate path with the fixed default op
// (3x3 residual conv) and returns the winner: minimal final validation loss
// (neural) or maximal surrogate score. SEQNAS_THREADS caps candidate
// parallelism; aggregation is by candidate index.
Step1Result step1_path_search(const SearchRun& run);

struct Step2Result {
  Architecture arch;
  std::vector<EpochRecord> history;
  ArchParams alpha;  // neural backend
  bool has_alpha = false;
  ParamStore supernet_store;  // neural backend
  double objective = 0.0;
};

// Neural: warmup, alternating search, discretize, budget enforcement.
// Surrogate: exact enumeration of the within-budget assignments when the
// path holds at most 65536 of them (single history record); otherwise
// seeded-restart descent under single-op and pairwise exchanges (one record
// per restart).
Step2Result step2_op_search(const SearchRun& run, const StridePath& path);

// If the architecture exceeds the budget, repeatedly downgrades one layer:
// the replacement op is the strictly cheaper legal op the alpha row prefers,
// applied at the layer with the largest saving. Error{Infeasible} when no
// downgrade chain reaches the budget. alpha may be null (prefer cheapest).
Architecture enforce_budget(Architecture arch, const ArchParams* alpha, long long budget);

// One JSON object per line; the step1_scores.jsonl / step2_history.jsonl
// artifact bodies.
std::string scores_jsonl(const std::vector<CandidateScore>& rows);
std::string history_jsonl(const std::vector<EpochRecord>& rows);

// Persists whichever pieces of a run are present under run.output_dir
// (no-op when it is empty): step-1 score table, step-2 history and neural
// checkpoints, random-baseline table, final result.json. Null pointers skip
// the corresponding artifact.
void write_run_artifacts(const SearchRun& run, const Step1Result* s1, const Step2Result* s2,
                         const std::vector<CandidateScore>* random_table,
                         const SearchResult* res, const ParamStore* random_best_store);

// Step 1 then step 2; persists artifacts under output_dir when set
// (step1_scores.jsonl, step2_history.jsonl, result.json, checkpoints/).
SearchResult two_step_search(const SearchRun& run);

// Random baseline: paths uniform over the typical set, ops uniform over
// legal choices; an over-budget draw is repaired by downgrading its
// largest-saving layer to the cheapest op until it fits. Every candidate is
// evaluated with the backend's step-1 protocol; best by objective.
SearchResult random_search(const SearchRun& run, int n_candidates = 10);

}  // namespace seqnas
