#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "space.hpp"

namespace seqnas {

// Deterministic closed-form architecture scorer. Stands in for trained
// accuracy so search experiments can be verified by exhaustive scan.
struct SurrogateSpec {
  uint64_t seed = 1;
  long long target_macs = 1;   // > 0
  double w_cost = 0.0;         // >= 0, weight of the relative MAC deviation
  double w_path = 0.0;         // >= 0, weight of the stage-string penalty
  double affinity_scale = 0.0; // >= 0, weight of the per-layer op affinities

  void validate() const;
};

// Seeded per-(layer, op, stage) affinity in [-1, 1). The chain is fixed so
// independent implementations agree bit-exactly:
//
//   h = mix64(seed ^ 0xA0761D6478BD642F)
//   h = mix64(h ^ (layer + 1))          layer is the 0-based layer index
//   h = mix64(h ^ fnv1a64(code))        code is the op's text identifier
//   h = mix64(h ^ (stage + 1))          stage is the downsampling count
//                                       up to and including this layer
//   aff = 2 * ((h >> 11) * 2^-53) - 1
//
// mix64 is the splitmix64 finalizer (see rng.hpp). Frozen test vectors live
// in the surrogate test suite.
double op_affinity(uint64_t seed, int layer, std::string_view op_code, int stage);

// The seeded "ideal" stage string: the lexicographic stage-string arrangement
// (A < B) with index mix64(seed ^ 0x5851F42D4C957F2D) mod C(a+b, a).
std::string ideal_stage_string(uint64_t seed, int a, int b);

// Normalized Hamming distance between the path's stage string and the seeded
// ideal, in [0, 1]. Zero when the space has no downsampling layers.
double path_penalty(const StridePath& path, uint64_t seed);

// score = clamp(0.9 - w_cost * |total_macs - target| / target
//             - w_path * path_penalty
//             + affinity_scale * sum_l aff(l, op_l), 0, 1)
double surrogate_score(const Architecture& arch, const SurrogateSpec& spec);

// Monotone curve converging to the score: value at epoch t is
// score * (1 - 2^-t), t = 1..epochs.
std::vector<double> surrogate_train_curve(const Architecture& arch, const SurrogateSpec& spec,
                                          int epochs);

}  // namespace seqnas
