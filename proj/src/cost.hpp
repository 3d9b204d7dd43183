#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "space.hpp"

namespace seqnas {

// FLOPS means multiply-accumulate count (one MAC = 1), convolutions only:
// activations, normalization and bias are excluded.
struct LayerCost {
  long long macs = 0;
  long long params = 0;

  bool operator==(const LayerCost&) const = default;
};

struct CostReport {
  std::vector<LayerCost> per_layer;
  long long total_macs = 0;
  long long total_params = 0;

  std::string to_json() const;
};

// FLOPS regularizer constants: r = (log E / log G)^beta where E is the
// expected FLOPS under the architecture weights.
struct RegularizerConfig {
  double beta = 0.0;  // >= 0
  double G = 2.0;     // > 1 so log G > 0; typically the FLOPS budget

  void validate() const;
};

struct Stride {
  int h = 1;
  int w = 1;
};

// Analytic MAC and parameter count of one operation at the given geometry.
// out_h/out_w are post-stride sizes; the input size is out*stride.
//
// MBConv(k, e): 1x1 expansion (omitted when e == 1) at input resolution,
// depthwise kxk carrying the stride, 1x1 projection at output resolution.
// ResidualConv3x3: one 3x3 convolution plus a 1x1 projection shortcut when
// the shape changes. SkipConnect: zero cost, legal only at shape-preserving
// layers.
LayerCost op_cost(const OperationSpec& op, int in_ch, int out_ch, int out_h, int out_w,
                  Stride stride);

// Per-layer costs along the architecture's shape trace.
CostReport arch_cost(const Architecture& arch);

// MAC table of every vocabulary choice at every layer of the path.
std::vector<std::vector<long long>> flops_table(const StridePath& path, const SpaceSpec& space);

// E(alpha) = sum_l sum_j alpha[l][j] * table[l][j]. Rows of alpha must be
// probability vectors (non-negative, sum to 1 within 1e-9).
double expected_flops(const std::vector<std::vector<double>>& alpha,
                      const std::vector<std::vector<long long>>& table);

// r(alpha) = (log E / log G)^beta. Domain error when E <= 1.
double regularizer(const std::vector<std::vector<double>>& alpha,
                   const std::vector<std::vector<long long>>& table,
                   const RegularizerConfig& cfg);

// Same map applied to an already-computed expected FLOPS value.
double regularizer_of(double expected, const RegularizerConfig& cfg);

}  // namespace seqnas
