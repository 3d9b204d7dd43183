// seqnas: two-step architecture search for sequence recognition, driven
// entirely through the C API. Logs go to stderr, data to stdout.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "seqnas/seqnas.h"

namespace {

// Shared by every subcommand: config file, raw key=value overrides, and the
// most common knobs as dedicated flags.
struct CommonOpts {
  std::string config_file;
  std::vector<std::string> sets;
  std::string backend;
  std::string output_dir;
  std::string seed;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("-c,--config", opts.config_file, "Config file (flat key = value lines)");
  cmd->add_option("-s,--set", opts.sets, "Override one config key, e.g. --set reg.beta=0.6");
  cmd->add_option("--backend", opts.backend, "surrogate or neural");
  cmd->add_option("--output-dir", opts.output_dir, "Artifact directory");
  cmd->add_option("--seed", opts.seed, "Master seed");
}

int exit_code_for(int status) {
  switch (status) {
    case SEQNAS_OK: return 0;
    case SEQNAS_INVALID:
    case SEQNAS_PARSE:
    case SEQNAS_IO: return 2;
    case SEQNAS_INFEASIBLE: return 3;
    case SEQNAS_DIVERGED: return 4;
    default: return 1;
  }
}

[[noreturn]] void die(int status) {
  std::cerr << "error: " << seqnas_last_error() << "\n";
  std::exit(exit_code_for(status));
}

void check(int status) {
  if (status != SEQNAS_OK) die(status);
}

using ConfigPtr = std::unique_ptr<seqnas_config, decltype(&seqnas_config_free)>;

ConfigPtr build_config(const CommonOpts& opts) {
  seqnas_config* raw = nullptr;
  if (!opts.config_file.empty())
    check(seqnas_config_load(opts.config_file.c_str(), &raw));
  else
    check(seqnas_config_create(&raw));
  ConfigPtr cfg(raw, &seqnas_config_free);

  for (const auto& kv : opts.sets) {
    const size_t eq = kv.find('=');
    if (eq == std::string::npos) {
      std::cerr << "error: --set expects key=value, got '" << kv << "'\n";
      std::exit(2);
    }
    check(seqnas_config_set(cfg.get(), kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str()));
  }
  if (!opts.backend.empty()) check(seqnas_config_set(cfg.get(), "backend", opts.backend.c_str()));
  if (!opts.output_dir.empty())
    check(seqnas_config_set(cfg.get(), "output_dir", opts.output_dir.c_str()));
  if (!opts.seed.empty()) check(seqnas_config_set(cfg.get(), "seed", opts.seed.c_str()));
  check(seqnas_config_resolve(cfg.get()));
  return cfg;
}

std::string take(char* s) {
  std::string out = s ? s : "";
  seqnas_string_free(s);
  return out;
}

// Architectures can be given inline or as @file.
std::string arch_text_from(const std::string& value) {
  if (value.empty() || value[0] != '@') return value;
  std::ifstream in(value.substr(1), std::ios::binary);
  if (!in) {
    std::cerr << "error: cannot read " << value.substr(1) << "\n";
    std::exit(2);
  }
  std::stringstream buf;
  buf << in.rdbuf();
  std::string text = buf.str();
  while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.pop_back();
  return text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-step neural architecture search for text-line recognition"};
  app.require_subcommand(1);

  // enumerate -------------------------------------------------------------
  auto* enumerate = app.add_subcommand("enumerate", "Count or list downsampling paths");
  CommonOpts enum_opts;
  int enum_L = 0, enum_a = -1, enum_b = -1;
  bool enum_list = false, enum_typical = false, enum_json = false;
  add_common(enumerate, enum_opts);
  enumerate->add_option("--L", enum_L, "Layer count");
  enumerate->add_option("--a", enum_a, "Stages that halve both height and width");
  enumerate->add_option("--b", enum_b, "Stages that halve height only");
  enumerate->add_flag("--list", enum_list, "Print every path");
  enumerate->add_flag("--typical", enum_typical, "Restrict the listing to typical paths");
  enumerate->add_flag("--json", enum_json, "Print counts as JSON (paths and architectures)");
  enumerate->callback([&] {
    CommonOpts opts = enum_opts;
    // --L/--a/--b override the space; dependent geometry keys follow so the
    // space stays well-formed without requiring the full key set.
    if (enum_a >= 0) opts.sets.push_back("space.a=" + std::to_string(enum_a));
    if (enum_b >= 0) opts.sets.push_back("space.b=" + std::to_string(enum_b));
    if (enum_L > 0) opts.sets.push_back("space.L=" + std::to_string(enum_L));
    if (enum_a >= 0 || enum_b >= 0) {
      int a = enum_a >= 0 ? enum_a : 2, b = enum_b >= 0 ? enum_b : 2;
      opts.sets.push_back("space.input_h=" + std::to_string(1 << (a + b)));
      opts.sets.push_back("space.input_w=" + std::to_string(8 << a));
      opts.sets.push_back("space.c1=1");
      opts.sets.push_back("space.c2=8");
      std::string channels;
      for (int s = 0; s < a + b; ++s) channels += (s ? "," : "") + std::to_string(8 + 4 * s);
      opts.sets.push_back("space.channels=" + channels);
      opts.sets.push_back("space.ds_positions=");
    }
    ConfigPtr cfg = build_config(opts);
    if (enum_list || enum_typical) {
      char* text = nullptr;
      check(seqnas_space_paths(cfg.get(), enum_typical ? 1 : 0, &text));
      std::cout << take(text);
      return;
    }
    char* json = nullptr;
    check(seqnas_space_count(cfg.get(), &json));
    const std::string body = take(json);
    if (enum_json) {
      std::cout << body << "\n";
    } else {
      std::cout << nlohmann::json::parse(body).at("paths").get<uint64_t>() << "\n";
    }
  });

  // cost -------------------------------------------------------------------
  auto* cost = app.add_subcommand("cost", "Analytic MAC/parameter cost of an architecture");
  CommonOpts cost_opts;
  std::string cost_arch;
  add_common(cost, cost_opts);
  cost->add_option("--arch", cost_arch, "Architecture text, or @file")->required();
  cost->callback([&] {
    ConfigPtr cfg = build_config(cost_opts);
    char* json = nullptr;
    check(seqnas_arch_cost(cfg.get(), arch_text_from(cost_arch).c_str(), &json));
    std::cout << take(json) << "\n";
  });

  // gendata ------------------------------------------------------------
  auto* gendata = app.add_subcommand("gendata", "Generate a synthetic glyph-sequence dataset");
  CommonOpts gen_opts;
  std::string gen_out, gen_n, gen_noise;
  add_common(gendata, gen_opts);
  gendata->add_option("-o,--out", gen_out, "Output dataset file")->required();
  gendata->add_option("--n", gen_n, "Sample count (shorthand for --set data.n)");
  gendata->add_option("--noise", gen_noise, "Noise amplitude (shorthand for --set data.noise)");
  gendata->callback([&] {
    CommonOpts opts = gen_opts;
    if (!gen_n.empty()) opts.sets.push_back("data.n=" + gen_n);
    if (!gen_noise.empty()) opts.sets.push_back("data.noise=" + gen_noise);
    ConfigPtr cfg = build_config(opts);
    char* json = nullptr;
    check(seqnas_gendata(cfg.get(), gen_out.c_str(), &json));
    std::cout << take(json) << "\n";
  });

  // eval -----------------------------------------------------------------
  auto* eval = app.add_subcommand("eval", "Train and evaluate one architecture");
  CommonOpts eval_opts;
  std::string eval_arch, eval_data;
  add_common(eval, eval_opts);
  eval->add_option("--arch", eval_arch, "Architecture text, or @file")->required();
  eval->add_option("--data", eval_data, "Dataset file (default: generate from config)");
  eval->callback([&] {
    ConfigPtr cfg = build_config(eval_opts);
    char* json = nullptr;
    check(seqnas_eval(cfg.get(), arch_text_from(eval_arch).c_str(),
                      eval_data.empty() ? nullptr : eval_data.c_str(), &json));
    std::cout << take(json) << "\n";
  });

  // search -----------------------------------------------------------------
  auto* search = app.add_subcommand("search", "Two-step architecture search");
  CommonOpts search_opts;
  std::string search_path, search_data;
  bool step1_only = false, step2_only = false;
  add_common(search, search_opts);
  search->add_flag("--step1-only", step1_only, "Stop after the downsampling-path search");
  search->add_flag("--step2-only", step2_only, "Operation search on --path only");
  search->add_option("--path", search_path, "Path text for --step2-only");
  search->add_option("--data", search_data, "Dataset file for the neural backend");
  search->callback([&] {
    if (step1_only && step2_only) {
      std::cerr << "error: --step1-only and --step2-only are mutually exclusive\n";
      std::exit(2);
    }
    ConfigPtr cfg = build_config(search_opts);
    const int mode = step1_only ? SEQNAS_SEARCH_STEP1
                                : (step2_only ? SEQNAS_SEARCH_STEP2 : SEQNAS_SEARCH_FULL);
    std::cerr << "search: mode="
              << (step1_only ? "step1" : (step2_only ? "step2" : "full")) << "\n";
    char* json = nullptr;
    check(seqnas_search(cfg.get(), mode, search_path.empty() ? nullptr : search_path.c_str(),
                        search_data.empty() ? nullptr : search_data.c_str(), &json));
    std::cout << take(json) << "\n";
  });

  // random ------------------------------------------------------------------
  auto* random = app.add_subcommand("random", "Random-search baseline at matched budget");
  CommonOpts random_opts;
  std::string random_data;
  add_common(random, random_opts);
  random->add_option("--data", random_data, "Dataset file for the neural backend");
  random->callback([&] {
    ConfigPtr cfg = build_config(random_opts);
    char* json = nullptr;
    check(seqnas_random(cfg.get(), random_data.empty() ? nullptr : random_data.c_str(), &json));
    std::cout << take(json) << "\n";
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }
  return 0;
}
