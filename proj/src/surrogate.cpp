#include "surrogate.hpp"

#include <algorithm>
#include <cmath>

#include "cost.hpp"
#include "rng.hpp"

namespace seqnas {

void SurrogateSpec::validate() const {
  if (target_macs <= 0) fail(ErrorKind::Invalid, "surrogate target_macs must be positive");
  if (w_cost < 0 || w_path < 0 || affinity_scale < 0)
    fail(ErrorKind::Invalid, "surrogate weights must be non-negative");
}

double op_affinity(uint64_t seed, int layer, std::string_view op_code, int stage) {
  uint64_t h = mix64(seed ^ 0xA0761D6478BD642Full);
  h = mix64(h ^ static_cast<uint64_t>(layer + 1));
  h = mix64(h ^ fnv1a64(op_code));
  h = mix64(h ^ static_cast<uint64_t>(stage + 1));
  return 2.0 * unit_double(h) - 1.0;
}

std::string ideal_stage_string(uint64_t seed, int a, int b) {
  if (a + b == 0) return "";
  // Count of arrangements, then lexicographic unranking (A < B).
  auto binom = [](int n, int k) {
    uint64_t r = 1;
    k = std::min(k, n - k);
    for (int i = 1; i <= k; ++i) r = r * static_cast<uint64_t>(n - k + i) / i;
    return r;
  };
  uint64_t index = mix64(seed ^ 0x5851F42D4C957F2Dull) % binom(a + b, a);
  std::string out;
  int rem_a = a, rem_b = b;
  while (rem_a + rem_b > 0) {
    if (rem_a == 0) {
      out += 'B';
      --rem_b;
      continue;
    }
    uint64_t with_a = binom(rem_a + rem_b - 1, rem_a - 1);  // strings starting with 'A'
    if (index < with_a) {
      out += 'A';
      --rem_a;
    } else {
      index -= with_a;
      out += 'B';
      --rem_b;
    }
  }
  return out;
}

double path_penalty(const StridePath& path, uint64_t seed) {
  std::string stage = path.stage_string();
  if (stage.empty()) return 0.0;
  std::string ideal = ideal_stage_string(
      seed, static_cast<int>(std::count(stage.begin(), stage.end(), 'A')),
      static_cast<int>(std::count(stage.begin(), stage.end(), 'B')));
  int mismatches = 0;
  for (size_t i = 0; i < stage.size(); ++i) mismatches += stage[i] != ideal[i];
  return static_cast<double>(mismatches) / static_cast<double>(stage.size());
}

double surrogate_score(const Architecture& arch, const SurrogateSpec& spec) {
  spec.validate();
  CostReport cost = arch_cost(arch);  // validates the architecture

  double score = 0.9;
  score -= spec.w_cost * std::abs(static_cast<double>(cost.total_macs - spec.target_macs)) /
           static_cast<double>(spec.target_macs);
  score -= spec.w_path * path_penalty(arch.path, spec.seed);

  int stage = 0;
  for (int l = 0; l < arch.space.L; ++l) {
    if (arch.path.steps[l].is_downsampling()) ++stage;
    score += spec.affinity_scale * op_affinity(spec.seed, l, arch.ops[l].code, stage);
  }
  return std::clamp(score, 0.0, 1.0);
}

std::vector<double> surrogate_train_curve(const Architecture& arch, const SurrogateSpec& spec,
                                          int epochs) {
  if (epochs < 1) fail(ErrorKind::Invalid, "surrogate_train_curve: epochs must be >= 1");
  const double score = surrogate_score(arch, spec);
  std::vector<double> curve;
  curve.reserve(epochs);
  for (int t = 1; t <= epochs; ++t) curve.push_back(score * (1.0 - std::pow(2.0, -t)));
  return curve;
}

}  // namespace seqnas
