#include "config.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

namespace seqnas {

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value) {
  fail(ErrorKind::Parse, "bad value for " + key + ": '" + value + "'");
}

long long parse_ll(const std::string& key, const std::string& value, long long lo,
                   long long hi) {
  errno = 0;
  char* end = nullptr;
  const long long v = std::strtoll(value.c_str(), &end, 10);
  if (errno != 0 || end == value.c_str() || *end != '\0' || v < lo || v > hi)
    bad_value(key, value);
  return v;
}

int parse_int(const std::string& key, const std::string& value, int lo, int hi) {
  return static_cast<int>(parse_ll(key, value, lo, hi));
}

uint64_t parse_u64(const std::string& key, const std::string& value) {
  if (value.empty() || value[0] == '-') bad_value(key, value);
  errno = 0;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(value.c_str(), &end, 10);
  if (errno != 0 || end == value.c_str() || *end != '\0') bad_value(key, value);
  return v;
}

double parse_f64(const std::string& key, const std::string& value) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(value.c_str(), &end);
  if (errno != 0 || end == value.c_str() || *end != '\0') bad_value(key, value);
  return v;
}

std::vector<int> parse_int_list(const std::string& key, const std::string& value) {
  std::vector<int> out;
  if (trim(value).empty()) return out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ','))
    out.push_back(parse_int(key, trim(item), 0, 1 << 24));
  return out;
}

// Shortest round-trip formatting keeps snapshots byte-stable.
std::string fmt_f64(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string fmt_list(const std::vector<int>& v) {
  std::string out;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(v[i]);
  }
  return out;
}

}  // namespace

RunConfig default_config() {
  RunConfig cfg;
  cfg.space.L = 8;
  cfg.space.a = 2;
  cfg.space.b = 2;
  cfg.space.input_h = 16;
  cfg.space.input_w = 32;
  cfg.space.c1 = 1;
  cfg.space.c2 = 8;
  cfg.space.input_ch = 1;
  cfg.space.channels = {8, 12, 16, 20};
  return cfg;
}

void apply_kv(RunConfig& cfg, const std::string& rawkey, const std::string& rawvalue) {
  const std::string key = trim(rawkey);
  const std::string value = trim(rawvalue);
  auto is = [&](const char* k) { return key == k; };

  if (is("backend")) {
    if (value != "surrogate" && value != "neural") bad_value(key, value);
    cfg.backend = backend_from_name(value);
  } else if (is("seed")) {
    cfg.seed = parse_u64(key, value);
  } else if (is("output_dir")) {
    cfg.output_dir = value;
  } else if (is("step1_epochs")) {
    cfg.step1_epochs = parse_int(key, value, 1, 1 << 20);
  } else if (is("step2_warmup_epochs")) {
    cfg.step2_warmup_epochs = parse_int(key, value, 1, 1 << 20);
  } else if (is("step2_epochs")) {
    cfg.step2_epochs = parse_int(key, value, 1, 1 << 20);
  } else if (is("reg.beta")) {
    cfg.reg_beta = parse_f64(key, value);
  } else if (is("reg.G")) {
    cfg.reg_g = parse_f64(key, value);
  } else if (is("budget_macs")) {
    cfg.budget_macs = parse_ll(key, value, 0, (1LL << 62));
  } else if (is("train.batch")) {
    cfg.batch = parse_int(key, value, 1, 1 << 20);
  } else if (is("random.candidates")) {
    cfg.random_candidates = parse_int(key, value, 1, 1 << 20);
  } else if (is("surrogate.restarts")) {
    cfg.surrogate_restarts = parse_int(key, value, 1, 1 << 20);
  } else if (is("surrogate.seed")) {
    cfg.surrogate_seed = parse_u64(key, value);
    cfg.surrogate_seed_set = true;
  } else if (is("surrogate.target_macs")) {
    cfg.surrogate_target_macs = parse_ll(key, value, 0, (1LL << 62));
  } else if (is("surrogate.w_cost")) {
    cfg.surrogate_w_cost = parse_f64(key, value);
  } else if (is("surrogate.w_path")) {
    cfg.surrogate_w_path = parse_f64(key, value);
  } else if (is("surrogate.affinity_scale")) {
    cfg.surrogate_affinity_scale = parse_f64(key, value);
  } else if (is("space.L")) {
    cfg.space.L = parse_int(key, value, 1, 1 << 16);
  } else if (is("space.a")) {
    cfg.space.a = parse_int(key, value, 0, 30);
  } else if (is("space.b")) {
    cfg.space.b = parse_int(key, value, 0, 30);
  } else if (is("space.input_h")) {
    cfg.space.input_h = parse_int(key, value, 1, 1 << 20);
  } else if (is("space.input_w")) {
    cfg.space.input_w = parse_int(key, value, 1, 1 << 20);
  } else if (is("space.c1")) {
    cfg.space.c1 = parse_int(key, value, 1, 1 << 20);
  } else if (is("space.c2")) {
    cfg.space.c2 = parse_int(key, value, 1, 1 << 20);
  } else if (is("space.input_ch")) {
    cfg.space.input_ch = parse_int(key, value, 1, 1 << 16);
  } else if (is("space.channels")) {
    cfg.space.channels = parse_int_list(key, value);
  } else if (is("space.ds_positions")) {
    cfg.space.ds_positions = parse_int_list(key, value);
  } else if (is("data.classes")) {
    cfg.data_classes = parse_int(key, value, 2, 255);
  } else if (is("data.glyph")) {
    cfg.data_glyph = parse_int(key, value, 1, 1 << 12);
  } else if (is("data.n")) {
    cfg.data_n = parse_int(key, value, 1, 1 << 24);
  } else if (is("data.noise")) {
    cfg.data_noise = parse_f64(key, value);
  } else if (is("data.jitter")) {
    cfg.data_jitter = parse_int(key, value, 0, 1 << 12);
  } else if (is("data.seed")) {
    cfg.data_seed = parse_u64(key, value);
    cfg.data_seed_set = true;
  } else {
    fail(ErrorKind::Parse, "unknown config key: " + key);
  }
  cfg.resolved = false;
}

void apply_config_text(RunConfig& cfg, const std::string& text, const std::string& origin) {
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    const size_t eq = t.find('=');
    if (eq == std::string::npos)
      fail(ErrorKind::Parse, origin + ":" + std::to_string(lineno) + ": expected key = value");
    apply_kv(cfg, t.substr(0, eq), t.substr(eq + 1));
  }
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot read config: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  RunConfig cfg = default_config();
  apply_config_text(cfg, buf.str(), path);
  return cfg;
}

void resolve_config(RunConfig& cfg) {
  cfg.space.validate();
  if (!cfg.surrogate_seed_set) {
    cfg.surrogate_seed = cfg.seed;
    cfg.surrogate_seed_set = true;
  }
  if (!cfg.data_seed_set) {
    cfg.data_seed = cfg.seed;
    cfg.data_seed_set = true;
  }
  if (cfg.budget_macs == 0) {
    // Twice the cost of the canonical path filled with the cheapest
    // non-trivial choice (mb3e1).
    Architecture base;
    base.space = cfg.space;
    base.path = typical_paths(cfg.space)[0];
    base.ops.assign(cfg.space.L, *find_op("mb3e1"));
    cfg.budget_macs = 2 * arch_cost(base).total_macs;
  }
  if (cfg.budget_macs <= 0) fail(ErrorKind::Invalid, "budget_macs must be positive");
  if (cfg.reg_g == 0.0) cfg.reg_g = static_cast<double>(cfg.budget_macs);
  if (cfg.surrogate_target_macs == 0)
    cfg.surrogate_target_macs = std::max<long long>(1, cfg.budget_macs / 2);

  RegularizerConfig reg{cfg.reg_beta, cfg.reg_g};
  reg.validate();
  surrogate_spec(cfg).validate();
  if (cfg.data_noise < 0.0 || cfg.data_noise >= 1.0)
    fail(ErrorKind::Invalid, "data.noise must be in [0, 1)");
  cfg.resolved = true;
}

std::string config_snapshot(const RunConfig& cfg) {
  if (!cfg.resolved) fail(ErrorKind::Invalid, "snapshot requires a resolved config");
  std::map<std::string, std::string> kv;
  kv["backend"] = backend_name(cfg.backend);
  kv["seed"] = std::to_string(cfg.seed);
  kv["output_dir"] = cfg.output_dir;
  kv["step1_epochs"] = std::to_string(cfg.step1_epochs);
  kv["step2_warmup_epochs"] = std::to_string(cfg.step2_warmup_epochs);
  kv["step2_epochs"] = std::to_string(cfg.step2_epochs);
  kv["reg.beta"] = fmt_f64(cfg.reg_beta);
  kv["reg.G"] = fmt_f64(cfg.reg_g);
  kv["budget_macs"] = std::to_string(cfg.budget_macs);
  kv["train.batch"] = std::to_string(cfg.batch);
  kv["random.candidates"] = std::to_string(cfg.random_candidates);
  kv["surrogate.restarts"] = std::to_string(cfg.surrogate_restarts);
  kv["surrogate.seed"] = std::to_string(cfg.surrogate_seed);
  kv["surrogate.target_macs"] = std::to_string(cfg.surrogate_target_macs);
  kv["surrogate.w_cost"] = fmt_f64(cfg.surrogate_w_cost);
  kv["surrogate.w_path"] = fmt_f64(cfg.surrogate_w_path);
  kv["surrogate.affinity_scale"] = fmt_f64(cfg.surrogate_affinity_scale);
  kv["space.L"] = std::to_string(cfg.space.L);
  kv["space.a"] = std::to_string(cfg.space.a);
  kv["space.b"] = std::to_string(cfg.space.b);
  kv["space.input_h"] = std::to_string(cfg.space.input_h);
  kv["space.input_w"] = std::to_string(cfg.space.input_w);
  kv["space.c1"] = std::to_string(cfg.space.c1);
  kv["space.c2"] = std::to_string(cfg.space.c2);
  kv["space.input_ch"] = std::to_string(cfg.space.input_ch);
  kv["space.channels"] = fmt_list(cfg.space.channels);
  kv["space.ds_positions"] = fmt_list(cfg.space.ds_positions);
  kv["data.classes"] = std::to_string(cfg.data_classes);
  kv["data.glyph"] = std::to_string(cfg.data_glyph);
  kv["data.n"] = std::to_string(cfg.data_n);
  kv["data.noise"] = fmt_f64(cfg.data_noise);
  kv["data.jitter"] = std::to_string(cfg.data_jitter);
  kv["data.seed"] = std::to_string(cfg.data_seed);

  std::string out;
  for (const auto& [k, v] : kv) {
    out += k;
    out += " = ";
    out += v;
    out += '\n';
  }
  return out;
}

SurrogateSpec surrogate_spec(const RunConfig& cfg) {
  SurrogateSpec spec;
  spec.seed = cfg.surrogate_seed_set ? cfg.surrogate_seed : cfg.seed;
  spec.target_macs = cfg.surrogate_target_macs > 0 ? cfg.surrogate_target_macs : 1;
  spec.w_cost = cfg.surrogate_w_cost;
  spec.w_path = cfg.surrogate_w_path;
  spec.affinity_scale = cfg.surrogate_affinity_scale;
  return spec;
}

SearchRun to_search_run(const RunConfig& cfg) {
  if (!cfg.resolved) fail(ErrorKind::Invalid, "search needs a resolved config");
  SearchRun run;
  run.space = cfg.space;
  run.backend = cfg.backend;
  run.step1_epochs = cfg.step1_epochs;
  run.step2_warmup_epochs = cfg.step2_warmup_epochs;
  run.step2_epochs = cfg.step2_epochs;
  run.reg = RegularizerConfig{cfg.reg_beta, cfg.reg_g};
  run.budget_macs = cfg.budget_macs;
  run.seed = cfg.seed;
  run.output_dir = cfg.output_dir;
  run.surrogate = surrogate_spec(cfg);
  run.batch = cfg.batch;
  run.surrogate_restarts = cfg.surrogate_restarts;
  return run;
}

Dataset make_dataset(const RunConfig& cfg) {
  if (!cfg.resolved) fail(ErrorKind::Invalid, "dataset generation needs a resolved config");
  const GlyphSet glyphs = GlyphSet::make(cfg.data_classes, cfg.data_glyph, cfg.data_seed);
  return gen_dataset(cfg.space, glyphs, cfg.data_n, cfg.data_noise, cfg.data_jitter,
                     cfg.data_seed);
}

}  // namespace seqnas
