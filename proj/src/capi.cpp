#include "seqnas/seqnas.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "config.hpp"
#include "rng.hpp"

using namespace seqnas;

struct seqnas_config {
  RunConfig cfg;
};

namespace {

thread_local std::string t_error;

int status_of(ErrorKind k) {
  switch (k) {
    case ErrorKind::Invalid: return SEQNAS_INVALID;
    case ErrorKind::Parse: return SEQNAS_PARSE;
    case ErrorKind::Infeasible: return SEQNAS_INFEASIBLE;
    case ErrorKind::Diverged: return SEQNAS_DIVERGED;
    case ErrorKind::Io: return SEQNAS_IO;
  }
  return SEQNAS_INTERNAL;
}

template <typename F>
int guard(F&& body) {
  try {
    body();
    t_error.clear();
    return SEQNAS_OK;
  } catch (const Error& e) {
    t_error = e.what();
    return status_of(e.kind());
  } catch (const std::exception& e) {
    t_error = e.what();
    return SEQNAS_INTERNAL;
  }
}

void require(bool cond, const char* what) {
  if (!cond) fail(ErrorKind::Invalid, std::string("null argument: ") + what);
}

void put_string(char** out, const std::string& s) {
  require(out != nullptr, "output pointer");
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) fail(ErrorKind::Io, "out of memory");
  std::memcpy(p, s.c_str(), s.size() + 1);
  *out = p;
}

const RunConfig& resolved(const seqnas_config* cfg) {
  require(cfg != nullptr, "config");
  if (!cfg->cfg.resolved) fail(ErrorKind::Invalid, "config has not been resolved");
  return cfg->cfg;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Io, "cannot write " + path);
  out << content;
  if (!out) fail(ErrorKind::Io, "short write: " + path);
}

// config.snapshot makes the run reproducible without the original config
// file or command line.
void persist_snapshot(const RunConfig& cfg) {
  if (cfg.output_dir.empty()) return;
  std::error_code ec;
  std::filesystem::create_directories(cfg.output_dir, ec);
  if (ec) fail(ErrorKind::Io, "cannot create " + cfg.output_dir + ": " + ec.message());
  write_file(cfg.output_dir + "/config.snapshot", config_snapshot(cfg));
}

// Loads the dataset for a neural run: an explicit file wins, otherwise the
// config's data.* recipe. The surrogate backend never touches data.
Dataset neural_dataset(const RunConfig& cfg, const char* data_path) {
  if (data_path && *data_path) return load_dataset(data_path);
  return make_dataset(cfg);
}

}  // namespace

extern "C" {

int seqnas_config_create(seqnas_config** out) {
  return guard([&] {
    require(out != nullptr, "config output");
    *out = new seqnas_config{default_config()};
  });
}

int seqnas_config_load(const char* path, seqnas_config** out) {
  return guard([&] {
    require(path != nullptr, "path");
    require(out != nullptr, "config output");
    *out = new seqnas_config{load_config_file(path)};
  });
}

void seqnas_config_free(seqnas_config* cfg) { delete cfg; }

int seqnas_config_set(seqnas_config* cfg, const char* key, const char* value) {
  return guard([&] {
    require(cfg != nullptr, "config");
    require(key != nullptr, "key");
    require(value != nullptr, "value");
    apply_kv(cfg->cfg, key, value);
  });
}

int seqnas_config_resolve(seqnas_config* cfg) {
  return guard([&] {
    require(cfg != nullptr, "config");
    resolve_config(cfg->cfg);
  });
}

int seqnas_config_snapshot(const seqnas_config* cfg, char** out) {
  return guard([&] { put_string(out, config_snapshot(resolved(cfg))); });
}

int seqnas_space_count(const seqnas_config* cfg, char** json_out) {
  return guard([&] {
    const RunConfig& c = resolved(cfg);
    const SpaceCount count = count_space(c.space);
    nlohmann::json j{{"paths", count.path_count}, {"archs", count.arch_count.str()}};
    put_string(json_out, j.dump());
  });
}

int seqnas_space_paths(const seqnas_config* cfg, int typical_only, char** text_out) {
  return guard([&] {
    const RunConfig& c = resolved(cfg);
    const auto paths = typical_only ? typical_paths(c.space) : enumerate_paths(c.space);
    std::string out;
    for (const auto& p : paths) {
      out += p.text();
      out += '\n';
    }
    put_string(text_out, out);
  });
}

int seqnas_arch_cost(const seqnas_config* cfg, const char* arch_text, char** json_out) {
  return guard([&] {
    require(arch_text != nullptr, "arch text");
    const RunConfig& c = resolved(cfg);
    const Architecture arch = parse_arch(arch_text, c.space);
    put_string(json_out, arch_cost(arch).to_json());
  });
}

int seqnas_gendata(const seqnas_config* cfg, const char* out_path, char** json_out) {
  return guard([&] {
    require(out_path != nullptr, "output path");
    const RunConfig& c = resolved(cfg);
    const Dataset ds = make_dataset(c);
    save_dataset(out_path, ds);
    nlohmann::json j{{"path", out_path}, {"h", ds.h},         {"w", ds.w},
                     {"a", ds.a},        {"classes", ds.classes}, {"count", ds.count},
                     {"frames", ds.frames()}};
    put_string(json_out, j.dump());
  });
}

int seqnas_eval(const seqnas_config* cfg, const char* arch_text, const char* data_path,
                char** json_out) {
  return guard([&] {
    require(arch_text != nullptr, "arch text");
    const RunConfig& c = resolved(cfg);
    const Architecture arch = parse_arch(arch_text, c.space);
    const Dataset ds = neural_dataset(c, data_path);
    ParamStore store = build_fixed(arch, ds.classes, derive_seed(c.seed, fnv1a64("eval.init")));
    const EvalReport report = train_fixed(arch, store, ds, c.step1_epochs, c.batch,
                                          derive_seed(c.seed, fnv1a64("eval.train")));
    put_string(json_out, report.to_json());
  });
}

int seqnas_search(const seqnas_config* cfg, int mode, const char* path_text,
                  const char* data_path, char** json_out) {
  return guard([&] {
    const RunConfig& c = resolved(cfg);
    SearchRun run = to_search_run(c);
    Dataset ds;
    if (run.backend == Backend::Neural) {
      ds = neural_dataset(c, data_path);
      run.data = &ds;
    }
    persist_snapshot(c);

    if (mode == SEQNAS_SEARCH_FULL) {
      const SearchResult res = two_step_search(run);
      put_string(json_out, res.to_json());
    } else if (mode == SEQNAS_SEARCH_STEP1) {
      const Step1Result s1 = step1_path_search(run);
      write_run_artifacts(run, &s1, nullptr, nullptr, nullptr, nullptr);
      nlohmann::json rows = nlohmann::json::array();
      for (const auto& row : s1.table) rows.push_back(nlohmann::json::parse(row.to_json()));
      nlohmann::json j{
          {"winner", s1.winner}, {"path", s1.path.text()}, {"scores", rows}};
      put_string(json_out, j.dump(2));
    } else if (mode == SEQNAS_SEARCH_STEP2) {
      require(path_text != nullptr, "path (step-2 searches need one)");
      const StridePath path = parse_path(path_text, c.space);
      const Step2Result s2 = step2_op_search(run, path);
      SearchResult res;
      res.backend = run.backend;
      res.seed = run.seed;
      res.best_path = path;
      res.best_arch = s2.arch;
      res.cost = arch_cost(s2.arch);
      res.objective = run.backend == Backend::Surrogate
                          ? surrogate_objective(s2.arch, run.surrogate, run.reg)
                          : s2.objective;
      res.best_score = run.backend == Backend::Surrogate
                           ? surrogate_score(s2.arch, run.surrogate)
                           : s2.objective;
      write_run_artifacts(run, nullptr, &s2, nullptr, &res, nullptr);
      put_string(json_out, res.to_json());
    } else {
      fail(ErrorKind::Invalid, "unknown search mode " + std::to_string(mode));
    }
  });
}

int seqnas_random(const seqnas_config* cfg, const char* data_path, char** json_out) {
  return guard([&] {
    const RunConfig& c = resolved(cfg);
    SearchRun run = to_search_run(c);
    Dataset ds;
    if (run.backend == Backend::Neural) {
      ds = neural_dataset(c, data_path);
      run.data = &ds;
    }
    persist_snapshot(c);
    const SearchResult res = random_search(run, c.random_candidates);
    put_string(json_out, res.to_json());
  });
}

const char* seqnas_last_error(void) { return t_error.c_str(); }

void seqnas_string_free(char* s) { std::free(s); }

const char* seqnas_version(void) { return "1.0.0"; }

}  // extern "C"
