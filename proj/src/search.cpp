#include "search.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <thread>

#include <json.hpp>

#include "rng.hpp"

namespace seqnas {

namespace {

int thread_cap() {
  const char* env = std::getenv("SEQNAS_THREADS");
  if (!env || !*env) return 1;
  const int v = std::atoi(env);
  return std::clamp(v, 1, 64);
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Io, "cannot write " + path);
  out << content;
  if (!out) fail(ErrorKind::Io, "short write: " + path);
}

Architecture arch_from(const SpaceSpec& space, const StridePath& path,
                       const std::vector<int>& choice) {
  Architecture arch;
  arch.space = space;
  arch.path = path;
  arch.ops.reserve(choice.size());
  for (int j : choice) arch.ops.push_back(space.op_vocab[j]);
  return arch;
}

std::vector<std::vector<int>> legal_choices(const SpaceSpec& space, const StridePath& path) {
  const ArchParams ap = ArchParams::make(space, path);
  std::vector<std::vector<int>> out(ap.layers);
  for (int l = 0; l < ap.layers; ++l)
    for (int j = 0; j < ap.choices; ++j)
      if (ap.is_legal(l, j)) out[l].push_back(j);
  return out;
}

}  // namespace

std::string backend_name(Backend b) { return b == Backend::Surrogate ? "surrogate" : "neural"; }

Backend backend_from_name(const std::string& name) {
  if (name == "surrogate") return Backend::Surrogate;
  if (name == "neural") return Backend::Neural;
  fail(ErrorKind::Invalid, "unknown backend: " + name);
}

void SearchRun::validate() const {
  space.validate();
  reg.validate();
  if (step1_epochs < 1 || step2_warmup_epochs < 1 || step2_epochs < 1)
    fail(ErrorKind::Invalid, "all epoch counts must be >= 1");
  if (budget_macs <= 0) fail(ErrorKind::Invalid, "budget_macs must be > 0");
  if (batch < 1) fail(ErrorKind::Invalid, "batch must be >= 1");
  if (surrogate_restarts < 1) fail(ErrorKind::Invalid, "surrogate restarts must be >= 1");
  if (backend == Backend::Surrogate) {
    surrogate.validate();
  } else {
    if (!data) fail(ErrorKind::Invalid, "neural backend needs a dataset");
    if (data->h != space.input_h || data->w != space.input_w || data->a != space.a)
      fail(ErrorKind::Invalid, "dataset geometry does not match the space");
  }
}

std::string CandidateScore::to_json() const {
  nlohmann::json j{{"index", index},
                   {"candidate", candidate},
                   {"objective", objective},
                   {"total_macs", total_macs}};
  if (backend == Backend::Surrogate) {
    j["score"] = score;
  } else {
    j["val_loss"] = val_loss;
    j["frame_acc"] = frame_acc;
    j["seq_acc"] = seq_acc;
  }
  return j.dump();
}

std::string SearchResult::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : scores) rows.push_back(nlohmann::json::parse(row.to_json()));
  nlohmann::json j{{"backend", backend_name(backend)},
                   {"seed", seed},
                   {"best_path", best_path.text()},
                   {"best_arch", serialize_arch(best_arch)},
                   {"best_score", best_score},
                   {"objective", objective},
                   {"cost", nlohmann::json::parse(cost.to_json())},
                   {"scores", rows}};
  return j.dump(2);
}

double surrogate_objective(const Architecture& arch, const SurrogateSpec& spec,
                           const RegularizerConfig& reg) {
  const double score = surrogate_score(arch, spec);
  const long long macs = arch_cost(arch).total_macs;
  const double r = macs > 1 ? regularizer_of(static_cast<double>(macs), reg) : 1.0;
  return r * (1.0 - score);
}

Step1Result step1_path_search(const SearchRun& run) {
  run.validate();
  const auto candidates = typical_paths(run.space);
  if (candidates.empty()) fail(ErrorKind::Infeasible, "no candidate paths");
  const int n = static_cast<int>(candidates.size());

  std::vector<CandidateScore> table(n);
  std::vector<ParamStore> stores(run.backend == Backend::Neural ? n : 0);
  std::vector<EvalReport> reports(run.backend == Backend::Neural ? n : 0);
  std::vector<std::exception_ptr> errors(n);

  const uint64_t s1seed = derive_seed(run.seed, fnv1a64("step1"));
  auto eval_candidate = [&](int i) {
    Architecture arch;
    arch.space = run.space;
    arch.path = candidates[i];
    arch.ops.assign(run.space.L, residual_conv_op());
    CandidateScore row;
    row.index = i;
    row.backend = run.backend;
    row.candidate = candidates[i].text();
    row.total_macs = arch_cost(arch).total_macs;
    if (run.backend == Backend::Surrogate) {
      row.score = surrogate_score(arch, run.surrogate);
      row.objective = -row.score;
    } else {
      ParamStore store = build_fixed(arch, run.data->classes, derive_seed(s1seed, i));
      EvalReport rep = train_fixed(arch, store, *run.data, run.step1_epochs, run.batch,
                                   derive_seed(s1seed, 0x10000u + i));
      row.val_loss = rep.val_loss;
      row.frame_acc = rep.frame_accuracy;
      row.seq_acc = rep.seq_accuracy;
      row.objective = rep.val_loss;
      stores[i] = std::move(store);
      reports[i] = std::move(rep);
    }
    table[i] = std::move(row);
  };

  const int threads = std::min(thread_cap(), n);
  if (threads <= 1) {
    for (int i = 0; i < n; ++i) {
      try {
        eval_candidate(i);
      } catch (...) {
        errors[i] = std::current_exception();
        break;
      }
    }
  } else {
    std::atomic<int> next{0};
    auto worker = [&] {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
        try {
          eval_candidate(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  for (int i = 0; i < n; ++i) {
    if (!errors[i]) continue;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const Error& e) {
      fail(e.kind(), "step-1 candidate " + std::to_string(i) + " (" + candidates[i].text() +
                         "): " + e.what());
    }
  }

  int winner = 0;
  for (int i = 1; i < n; ++i)
    if (table[i].objective < table[winner].objective) winner = i;

  Step1Result out;
  out.winner = winner;
  out.path = candidates[winner];
  out.table = std::move(table);
  if (run.backend == Backend::Neural) {
    out.winner_store = std::move(stores[winner]);
    out.winner_report = std::move(reports[winner]);
  }
  return out;
}

namespace {

// Surrogate step 2: coordinate descent over per-layer ops, restricted to
// within-budget assignments, repeated from seeded starts. Restart 0 begins
// at the all-lowest-index assignment so full ties resolve to it.
struct OpScan {
  const SearchRun& run;
  const StridePath& path;
  std::vector<std::vector<long long>> macs;
  std::vector<std::vector<int>> legal;

  long long total(const std::vector<int>& choice) const {
    long long t = 0;
    for (size_t l = 0; l < choice.size(); ++l) t += macs[l][choice[l]];
    return t;
  }

  double objective(const std::vector<int>& choice) const {
    return surrogate_objective(arch_from(run.space, path, choice), run.surrogate, run.reg);
  }

  int cheapest_at(int l) const {
    int best = legal[l][0];
    for (int j : legal[l])
      if (macs[l][j] < macs[l][best]) best = j;
    return best;
  }

  // Downgrades the largest-saving layer to its cheapest op until the
  // assignment fits the budget.
  void repair(std::vector<int>& choice) const {
    long long t = total(choice);
    while (t > run.budget_macs) {
      int pick = -1;
      long long gain = 0;
      for (size_t l = 0; l < choice.size(); ++l) {
        const long long g = macs[l][choice[l]] - macs[l][cheapest_at(static_cast<int>(l))];
        if (g > gain) {
          gain = g;
          pick = static_cast<int>(l);
        }
      }
      if (pick < 0) fail(ErrorKind::Infeasible, "no legal architecture under budget");
      t -= gain;
      choice[pick] = cheapest_at(pick);
    }
  }

  // Descends to a local optimum under single-op and pairwise exchanges,
  // strict improvements only. The pairwise moves matter under a tight
  // budget, where upgrading one layer is only affordable together with
  // downgrading another and every single-op intermediate is infeasible.
  double descend(std::vector<int>& choice) const {
    const size_t L = choice.size();
    long long t = total(choice);
    double obj = objective(choice);
    bool changed = true;
    int sweeps = 0;
    while (changed && ++sweeps <= 64) {
      changed = false;
      for (size_t l = 0; l < L; ++l) {
        for (int j : legal[l]) {
          const int cur = choice[l];
          if (j == cur) continue;
          const long long tj = t - macs[l][cur] + macs[l][j];
          if (tj > run.budget_macs) continue;
          choice[l] = j;
          const double oj = objective(choice);
          if (oj < obj) {
            obj = oj;
            t = tj;
            changed = true;
          } else {
            choice[l] = cur;
          }
        }
      }
      if (changed) continue;
      for (size_t l1 = 0; l1 + 1 < L; ++l1)
        for (size_t l2 = l1 + 1; l2 < L; ++l2)
          for (int j1 : legal[l1])
            for (int j2 : legal[l2]) {
              const int c1 = choice[l1], c2 = choice[l2];
              if (j1 == c1 && j2 == c2) continue;
              const long long tj =
                  t - macs[l1][c1] + macs[l1][j1] - macs[l2][c2] + macs[l2][j2];
              if (tj > run.budget_macs) continue;
              choice[l1] = j1;
              choice[l2] = j2;
              const double oj = objective(choice);
              if (oj < obj) {
                obj = oj;
                t = tj;
                changed = true;
              } else {
                choice[l1] = c1;
                choice[l2] = c2;
              }
            }
    }
    return obj;
  }
};

Step2Result step2_surrogate(const SearchRun& run, const StridePath& path) {
  OpScan scan{run, path, flops_table(path, run.space), legal_choices(run.space, path)};
  const int L = run.space.L;
  for (int l = 0; l < L; ++l)
    if (scan.legal[l].empty()) fail(ErrorKind::Infeasible, "layer without legal ops");

  std::vector<int> cheapest(L);
  long long cheapest_total = 0;
  for (int l = 0; l < L; ++l) {
    cheapest[l] = scan.cheapest_at(l);
    cheapest_total += scan.macs[l][cheapest[l]];
  }
  if (cheapest_total > run.budget_macs)
    fail(ErrorKind::Infeasible, "no legal architecture under budget " +
                                    std::to_string(run.budget_macs) + " (cheapest costs " +
                                    std::to_string(cheapest_total) + ")");

  // Small per-path assignment spaces are solved exactly by enumeration; the
  // first minimum in odometer order keeps the lowest-index tie convention.
  constexpr unsigned long long kExactScanLimit = 65536;
  unsigned long long combos = 1;
  for (int l = 0; l < L && combos <= kExactScanLimit; ++l) combos *= scan.legal[l].size();
  if (combos <= kExactScanLimit) {
    std::vector<int> pick(L, 0), best;
    double best_obj = 0.0;
    std::vector<int> choice(L);
    while (true) {
      for (int l = 0; l < L; ++l) choice[l] = scan.legal[l][pick[l]];
      if (scan.total(choice) <= run.budget_macs) {
        const double obj = scan.objective(choice);
        if (best.empty() || obj < best_obj) {
          best_obj = obj;
          best = choice;
        }
      }
      int l = L - 1;
      while (l >= 0 && pick[l] + 1 == static_cast<int>(scan.legal[l].size())) pick[l--] = 0;
      if (l < 0) break;
      ++pick[l];
    }
    Step2Result out;
    out.arch = arch_from(run.space, path, best);
    validate_arch(out.arch);
    out.objective = best_obj;
    EpochRecord rec;
    rec.epoch = 0;
    rec.val_loss = best_obj;
    rec.expected_flops = static_cast<double>(scan.total(best));
    out.history.push_back(rec);
    return out;
  }

  SplitMix64 rng(derive_seed(run.seed, fnv1a64("step2.surrogate")));
  Step2Result out;
  double best_obj = 0.0;
  std::vector<int> best;
  for (int restart = 0; restart < run.surrogate_restarts; ++restart) {
    std::vector<int> choice(L);
    if (restart == 0) {
      for (int l = 0; l < L; ++l) choice[l] = scan.legal[l][0];
    } else {
      for (int l = 0; l < L; ++l)
        choice[l] = scan.legal[l][rng.next_below(scan.legal[l].size())];
    }
    scan.repair(choice);
    const double obj = scan.descend(choice);
    if (best.empty() || obj < best_obj) {
      best_obj = obj;
      best = choice;
    }
    EpochRecord rec;
    rec.epoch = restart;
    rec.val_loss = obj;
    rec.expected_flops = static_cast<double>(scan.total(choice));
    out.history.push_back(rec);
  }
  out.arch = arch_from(run.space, path, best);
  validate_arch(out.arch);
  out.objective = best_obj;
  return out;
}

Step2Result step2_neural(const SearchRun& run, const StridePath& path) {
  const Dataset& ds = *run.data;
  std::vector<int> train_idx, val_idx;
  split_indices(ds.count, 0.2, derive_seed(run.seed, fnv1a64("step2.split")), train_idx, val_idx);
  SuperNet net(run.space, path, ds.classes, derive_seed(run.seed, fnv1a64("supernet")));
  net.warmup(ds, train_idx, run.step2_warmup_epochs, run.batch,
             derive_seed(run.seed, fnv1a64("step2.warmup")));
  AlternatingResult alt =
      alternating_search(net, ds, train_idx, val_idx, run.step2_epochs, run.batch, run.reg,
                         derive_seed(run.seed, fnv1a64("step2.alternate")));

  Step2Result out;
  out.arch = discretize(alt.alpha, path, run.space);
  out.arch = enforce_budget(std::move(out.arch), &alt.alpha, run.budget_macs);
  out.history = std::move(alt.history);
  out.alpha = std::move(alt.alpha);
  out.has_alpha = true;
  out.supernet_store = net.store();
  out.objective = out.history.empty() ? 0.0 : out.history.back().val_loss;
  return out;
}

}  // namespace

Architecture enforce_budget(Architecture arch, const ArchParams* alpha, long long budget) {
  if (budget <= 0) fail(ErrorKind::Invalid, "budget must be > 0");
  auto macs = flops_table(arch.path, arch.space);
  const auto legal = legal_choices(arch.space, arch.path);
  const auto& vocab = arch.space.op_vocab;

  std::vector<int> choice(arch.ops.size());
  for (size_t l = 0; l < arch.ops.size(); ++l) {
    int j = -1;
    for (size_t k = 0; k < vocab.size(); ++k)
      if (vocab[k].code == arch.ops[l].code) j = static_cast<int>(k);
    if (j < 0) fail(ErrorKind::Invalid, "architecture op not in the vocabulary");
    choice[l] = j;
  }

  long long total = 0;
  for (size_t l = 0; l < choice.size(); ++l) total += macs[l][choice[l]];
  while (total > budget) {
    // Per layer: the strictly cheaper legal op the alpha row prefers
    // (highest weight, ties to the lowest index), then the layer with the
    // largest saving.
    int pick_l = -1, pick_j = -1;
    long long best_gain = 0;
    for (size_t l = 0; l < choice.size(); ++l) {
      const long long cur = macs[l][choice[l]];
      int cand = -1;
      for (int j : legal[l]) {
        if (macs[l][j] >= cur) continue;
        if (cand < 0) {
          cand = j;
        } else if (alpha) {
          if (alpha->logits[alpha->at(static_cast<int>(l), j)] >
              alpha->logits[alpha->at(static_cast<int>(l), cand)])
            cand = j;
        } else if (macs[l][j] < macs[l][cand]) {
          cand = j;
        }
      }
      if (cand < 0) continue;
      const long long gain = cur - macs[l][cand];
      if (gain > best_gain) {
        best_gain = gain;
        pick_l = static_cast<int>(l);
        pick_j = cand;
      }
    }
    if (pick_l < 0)
      fail(ErrorKind::Infeasible,
           "architecture exceeds budget " + std::to_string(budget) + " and cannot be downgraded");
    total -= best_gain;
    choice[pick_l] = pick_j;
  }
  for (size_t l = 0; l < choice.size(); ++l) arch.ops[l] = vocab[choice[l]];
  validate_arch(arch);
  return arch;
}

Step2Result step2_op_search(const SearchRun& run, const StridePath& path) {
  run.validate();
  if (path.length() != run.space.L) fail(ErrorKind::Invalid, "path length does not match space");
  return run.backend == Backend::Surrogate ? step2_surrogate(run, path) : step2_neural(run, path);
}

std::string scores_jsonl(const std::vector<CandidateScore>& rows) {
  std::string out;
  for (const auto& row : rows) {
    out += row.to_json();
    out += '\n';
  }
  return out;
}

std::string history_jsonl(const std::vector<EpochRecord>& rows) {
  std::string out;
  for (const auto& rec : rows) {
    out += rec.to_json();
    out += '\n';
  }
  return out;
}

void write_run_artifacts(const SearchRun& run, const Step1Result* s1, const Step2Result* s2,
                         const std::vector<CandidateScore>* random_table,
                         const SearchResult* res, const ParamStore* random_best_store) {
  if (run.output_dir.empty()) return;
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(fs::path(run.output_dir) / "checkpoints", ec);
  if (ec) fail(ErrorKind::Io, "cannot create " + run.output_dir + ": " + ec.message());
  const std::string dir = run.output_dir + "/";

  if (s1) write_text(dir + "step1_scores.jsonl", scores_jsonl(s1->table));
  if (s2) write_text(dir + "step2_history.jsonl", history_jsonl(s2->history));
  if (random_table) write_text(dir + "random_scores.jsonl", scores_jsonl(*random_table));
  if (res) write_text(dir + "result.json", res->to_json() + "\n");

  if (run.backend == Backend::Neural) {
    if (s1) s1->winner_store.save(dir + "checkpoints/step1_winner");
    if (s2) {
      s2->supernet_store.save(dir + "checkpoints/supernet");
      if (s2->has_alpha) {
        nlohmann::json logits = nlohmann::json::array(), legal = nlohmann::json::array();
        const ArchParams& a = s2->alpha;
        for (int l = 0; l < a.layers; ++l) {
          nlohmann::json lrow = nlohmann::json::array(), grow = nlohmann::json::array();
          for (int j = 0; j < a.choices; ++j) {
            if (a.is_legal(l, j))
              lrow.push_back(a.logits[a.at(l, j)]);
            else
              lrow.push_back(nullptr);  // JSON cannot carry -inf
            grow.push_back(a.is_legal(l, j) ? 1 : 0);
          }
          logits.push_back(lrow);
          legal.push_back(grow);
        }
        nlohmann::json j{{"layers", a.layers},
                         {"choices", a.choices},
                         {"temperature", a.temperature},
                         {"logits", logits},
                         {"legal", legal}};
        write_text(dir + "checkpoints/alpha.json", j.dump(2) + "\n");
      }
    }
    if (random_best_store) random_best_store->save(dir + "checkpoints/random_best");
  }
}

SearchResult two_step_search(const SearchRun& run) {
  run.validate();
  const auto t0 = std::chrono::steady_clock::now();
  Step1Result s1 = step1_path_search(run);
  Step2Result s2 = step2_op_search(run, s1.path);

  SearchResult res;
  res.backend = run.backend;
  res.seed = run.seed;
  res.best_path = s1.path;
  res.best_arch = s2.arch;
  res.scores = s1.table;
  res.cost = arch_cost(res.best_arch);
  res.objective = run.backend == Backend::Surrogate
                      ? surrogate_objective(res.best_arch, run.surrogate, run.reg)
                      : s2.objective;
  res.best_score = run.backend == Backend::Surrogate
                       ? surrogate_score(res.best_arch, run.surrogate)
                       : s2.objective;
  res.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_run_artifacts(run, &s1, &s2, nullptr, &res, nullptr);
  return res;
}

SearchResult random_search(const SearchRun& run, int n_candidates) {
  run.validate();
  if (n_candidates < 1) fail(ErrorKind::Invalid, "n_candidates must be >= 1");
  const auto t0 = std::chrono::steady_clock::now();
  const auto paths = typical_paths(run.space);
  if (paths.empty()) fail(ErrorKind::Infeasible, "no candidate paths");

  std::vector<std::vector<std::vector<int>>> legal_by_path;
  std::vector<std::vector<std::vector<long long>>> macs_by_path;
  legal_by_path.reserve(paths.size());
  macs_by_path.reserve(paths.size());
  for (const auto& p : paths) {
    legal_by_path.push_back(legal_choices(run.space, p));
    macs_by_path.push_back(flops_table(p, run.space));
  }

  SplitMix64 rng(derive_seed(run.seed, fnv1a64("random")));
  const uint64_t eseed = derive_seed(run.seed, fnv1a64("random.eval"));
  std::vector<CandidateScore> table(n_candidates);
  std::vector<Architecture> archs(n_candidates);
  ParamStore best_store;
  int best = -1;
  for (int i = 0; i < n_candidates; ++i) {
    Architecture arch;
    bool ok = false;
    for (int attempt = 0; attempt < 64 && !ok; ++attempt) {
      const int pi = static_cast<int>(rng.next_below(paths.size()));
      const auto& macs = macs_by_path[pi];
      std::vector<int> choice(run.space.L);
      long long total = 0;
      for (int l = 0; l < run.space.L; ++l) {
        const auto& js = legal_by_path[pi][l];
        choice[l] = js[rng.next_below(js.size())];
        total += macs[l][choice[l]];
      }
      // Tight budgets reject almost every uniform sample, so over-budget
      // draws are repaired in place: downgrade the largest-saving layer to
      // its cheapest op until the candidate fits.
      while (total > run.budget_macs) {
        int pick = -1, pick_cheap = -1;
        long long gain = 0;
        for (int l = 0; l < run.space.L; ++l) {
          int cheap = legal_by_path[pi][l][0];
          for (int j : legal_by_path[pi][l])
            if (macs[l][j] < macs[l][cheap]) cheap = j;
          const long long g = macs[l][choice[l]] - macs[l][cheap];
          if (g > gain) {
            gain = g;
            pick = l;
            pick_cheap = cheap;
          }
        }
        if (pick < 0) break;  // even the cheapest assignment exceeds budget
        choice[pick] = pick_cheap;
        total -= gain;
      }
      if (total > run.budget_macs) continue;
      arch = arch_from(run.space, paths[pi], choice);
      ok = true;
    }
    if (!ok)
      fail(ErrorKind::Infeasible, "no sampled path admits a within-budget architecture");

    CandidateScore row;
    row.index = i;
    row.backend = run.backend;
    row.candidate = serialize_arch(arch);
    row.total_macs = arch_cost(arch).total_macs;
    if (run.backend == Backend::Surrogate) {
      row.score = surrogate_score(arch, run.surrogate);
      row.objective = surrogate_objective(arch, run.surrogate, run.reg);
    } else {
      ParamStore store = build_fixed(arch, run.data->classes, derive_seed(eseed, i));
      EvalReport rep = train_fixed(arch, store, *run.data, run.step1_epochs, run.batch,
                                   derive_seed(eseed, 0x10000u + i));
      row.val_loss = rep.val_loss;
      row.frame_acc = rep.frame_accuracy;
      row.seq_acc = rep.seq_accuracy;
      row.objective = rep.val_loss;
      if (best < 0 || row.objective < table[best].objective) best_store = std::move(store);
    }
    archs[i] = std::move(arch);
    table[i] = std::move(row);
    if (best < 0 || table[i].objective < table[best].objective) best = i;
  }

  SearchResult res;
  res.backend = run.backend;
  res.seed = run.seed;
  res.best_path = archs[best].path;
  res.best_arch = archs[best];
  res.scores = table;
  res.cost = arch_cost(res.best_arch);
  res.objective = table[best].objective;
  res.best_score = run.backend == Backend::Surrogate ? table[best].score : table[best].val_loss;
  res.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_run_artifacts(run, nullptr, nullptr, &table, &res,
                      run.backend == Backend::Neural ? &best_store : nullptr);
  return res;
}

}  // namespace seqnas
