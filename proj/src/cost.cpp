#include "cost.hpp"

#include <cmath>

#include "json.hpp"

namespace seqnas {

std::string CostReport::to_json() const {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& lc : per_layer) layers.push_back({{"macs", lc.macs}, {"params", lc.params}});
  nlohmann::json j = {
      {"per_layer", layers}, {"total_macs", total_macs}, {"total_params", total_params}};
  return j.dump();
}

void RegularizerConfig::validate() const {
  if (beta < 0) fail(ErrorKind::Invalid, "regularizer beta must be >= 0");
  if (G <= 1) fail(ErrorKind::Invalid, "regularizer G must be > 1");
}

LayerCost op_cost(const OperationSpec& op, int in_ch, int out_ch, int out_h, int out_w,
                  Stride stride) {
  if (in_ch <= 0 || out_ch <= 0 || out_h <= 0 || out_w <= 0 || stride.h <= 0 || stride.w <= 0)
    fail(ErrorKind::Invalid, "op_cost: dimensions must be positive");
  const long long out_px = static_cast<long long>(out_h) * out_w;
  const long long in_px = out_px * stride.h * stride.w;

  LayerCost cost;
  switch (op.family) {
    case OpFamily::SkipConnect: {
      if (stride.h != 1 || stride.w != 1 || in_ch != out_ch)
        fail(ErrorKind::Invalid, "skip-connect requires stride (1,1) and equal channels");
      break;
    }
    case OpFamily::MBConv: {
      const long long k2 = static_cast<long long>(op.kernel) * op.kernel;
      const long long mid = static_cast<long long>(in_ch) * op.expansion;
      if (op.expansion > 1) {
        cost.macs += in_ch * mid * in_px;
        cost.params += in_ch * mid;
      }
      cost.macs += k2 * mid * out_px;       // depthwise carries the stride
      cost.params += k2 * mid;
      cost.macs += mid * out_ch * out_px;   // projection
      cost.params += mid * out_ch;
      break;
    }
    case OpFamily::ResidualConv3x3: {
      cost.macs += 9ll * in_ch * out_ch * out_px;
      cost.params += 9ll * in_ch * out_ch;
      if (stride.h != 1 || stride.w != 1 || in_ch != out_ch) {
        cost.macs += static_cast<long long>(in_ch) * out_ch * out_px;  // projection shortcut
        cost.params += static_cast<long long>(in_ch) * out_ch;
      }
      break;
    }
  }
  return cost;
}

CostReport arch_cost(const Architecture& arch) {
  validate_arch(arch);
  auto trace = shape_trace(arch.path, arch.space);
  CostReport report;
  report.per_layer.reserve(arch.space.L);
  int in_ch = arch.space.input_ch;
  for (int i = 0; i < arch.space.L; ++i) {
    const auto& step = arch.path.steps[i];
    LayerCost lc = op_cost(arch.ops[i], in_ch, trace[i].ch, trace[i].h, trace[i].w,
                           Stride{step.stride_h(), step.stride_w()});
    report.per_layer.push_back(lc);
    report.total_macs += lc.macs;
    report.total_params += lc.params;
    in_ch = trace[i].ch;
  }
  return report;
}

std::vector<std::vector<long long>> flops_table(const StridePath& path, const SpaceSpec& space) {
  auto trace = shape_trace(path, space);
  std::vector<std::vector<long long>> table(space.L);
  int in_ch = space.input_ch;
  for (int i = 0; i < space.L; ++i) {
    const auto& step = path.steps[i];
    table[i].reserve(space.op_vocab.size());
    for (const auto& op : space.op_vocab) {
      if (!op_legal_at(op, step, in_ch, trace[i].ch)) {
        table[i].push_back(0);  // masked choice, alpha stays 0 there
        continue;
      }
      table[i].push_back(op_cost(op, in_ch, trace[i].ch, trace[i].h, trace[i].w,
                                 Stride{step.stride_h(), step.stride_w()})
                             .macs);
    }
    in_ch = trace[i].ch;
  }
  return table;
}

double expected_flops(const std::vector<std::vector<double>>& alpha,
                      const std::vector<std::vector<long long>>& table) {
  if (alpha.size() != table.size())
    fail(ErrorKind::Invalid, "expected_flops: alpha and table layer counts differ");
  double total = 0.0;
  for (size_t l = 0; l < alpha.size(); ++l) {
    if (alpha[l].size() != table[l].size())
      fail(ErrorKind::Invalid, "expected_flops: choice counts differ at layer " +
                                   std::to_string(l + 1));
    double row_sum = 0.0;
    for (size_t j = 0; j < alpha[l].size(); ++j) {
      if (alpha[l][j] < 0)
        fail(ErrorKind::Invalid, "expected_flops: negative weight at layer " +
                                     std::to_string(l + 1));
      row_sum += alpha[l][j];
      total += alpha[l][j] * static_cast<double>(table[l][j]);
    }
    if (std::abs(row_sum - 1.0) > 1e-9)
      fail(ErrorKind::Invalid,
           "expected_flops: weights at layer " + std::to_string(l + 1) + " do not sum to 1");
  }
  return total;
}

double regularizer_of(double expected, const RegularizerConfig& cfg) {
  cfg.validate();
  if (expected <= 1.0)
    fail(ErrorKind::Invalid, "regularizer: expected FLOPS must exceed 1");
  return std::pow(std::log(expected) / std::log(cfg.G), cfg.beta);
}

double regularizer(const std::vector<std::vector<double>>& alpha,
                   const std::vector<std::vector<long long>>& table,
                   const RegularizerConfig& cfg) {
  return regularizer_of(expected_flops(alpha, table), cfg);
}

}  // namespace seqnas
