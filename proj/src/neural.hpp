#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cost.hpp"
#include "data.hpp"
#include "rng.hpp"
#include "space.hpp"
#include "tensor.hpp"

namespace seqnas {

// Continuous relaxation state: one logit per (layer, choice). Illegal
// choices (skip-connect where it cannot preserve shape) carry -inf logits
// permanently and never receive gradient.
struct ArchParams {
  int layers = 0;
  int choices = 0;
  double temperature = 1.0;
  std::vector<double> logits;  // layers * choices, row-major
  std::vector<uint8_t> legal;  // layers * choices

  // ADADELTA accumulators for the architecture optimizer.
  std::vector<double> acc_grad, acc_delta;

  static ArchParams make(const SpaceSpec& space, const StridePath& path);

  size_t at(int l, int j) const { return static_cast<size_t>(l) * choices + j; }
  bool is_legal(int l, int j) const { return legal[at(l, j)] != 0; }
  void set_logit(int l, int j, double v);

  // Row-wise softmax(logits / temperature); illegal entries are exactly 0,
  // each row sums to 1 within 1e-9.
  std::vector<std::vector<double>> weights() const;

  // One ADADELTA update on the logits; grad entries at illegal slots are
  // ignored. rho=0.9, eps=1e-6 by default.
  void adadelta_step(const std::vector<double>& grad, double rho = 0.9, double eps = 1e-6);
};

enum class ForwardMode { Mixture, Sampled };

// Accuracy of one forward batch (frames, and whole samples).
struct BatchMetrics {
  double frame_acc = 0.0;
  double seq_acc = 0.0;
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double frame_acc = 0.0;
  double seq_acc = 0.0;
  double expected_flops = 0.0;

  std::string to_json() const;
};

struct EvalReport {
  double val_loss = 0.0;
  double frame_accuracy = 0.0;
  double seq_accuracy = 0.0;  // all frames of a sample correct
  std::vector<EpochRecord> train_curve;

  std::string curve_jsonl() const;  // one record per line
  std::string to_json() const;
};

// Instantiates every layer's parameters per the architecture's shape trace
// plus the 1x1 classifier head ("head.w"). Backbone parameter names carry the
// "backbone." prefix so store.total_params("backbone.") matches arch_cost.
ParamStore build_fixed(const Architecture& arch, int classes, uint64_t seed);

// Inference pass. x is (batch, input_ch, H, W); output is (batch, classes,
// c1, c2). Requires c1 == 1 for the frame losses below.
Tensor4 fixed_forward(const Architecture& arch, const ParamStore& store, const Tensor4& x);

// Loss and accuracies of the fixed net over the given sample indices.
EvalReport evaluate_fixed(const Architecture& arch, const ParamStore& store, const Dataset& ds,
                          const std::vector<int>& indices, int batch);

// ADADELTA training over seeded epoch shuffles of an 80/20 train/val split.
// Reports the final validation metrics and the per-epoch curve. Non-finite
// loss raises Error{Diverged} naming the epoch.
EvalReport train_fixed(const Architecture& arch, ParamStore& store, const Dataset& ds, int epochs,
                       int batch, uint64_t seed);

// Weight-sharing supernet over one path: each layer holds one parameter set
// per legal vocabulary op ("backbone.l<i>.<code>.<part>"), never per sampled
// architecture.
class SuperNet {
 public:
  SuperNet(const SpaceSpec& space, const StridePath& path, int classes, uint64_t seed);

  const SpaceSpec& space() const { return space_; }
  const StridePath& path() const { return path_; }
  ArchParams& arch_params() { return alpha_; }
  const ArchParams& arch_params() const { return alpha_; }
  ParamStore& store() { return store_; }
  const ParamStore& store() const { return store_; }
  const std::vector<std::vector<long long>>& flops() const { return flops_; }

  // Mixture mode: output = sum_j softmax(alpha)_j op_j(x) per choice block.
  // Sampled mode: one op drawn per block from softmax(alpha) with rng.
  Tensor4 forward(const Tensor4& x, ForwardMode mode, SplitMix64* rng = nullptr) const;

  // Forward + cross-entropy + backward. Accumulates weight gradients into the
  // store. In mixture mode fills dlogits (size layers*choices) with the exact
  // cross-entropy gradient through the softmax; in sampled mode only the
  // sampled op's straight-through term contributes. choices_out records the
  // sampled op index per layer in sampled mode.
  double loss_and_grad(const Tensor4& x, const std::vector<int>& labels, ForwardMode mode,
                       SplitMix64* rng, std::vector<double>* dlogits,
                       std::vector<int>* choices_out = nullptr, BatchMetrics* metrics = nullptr);

  // Weight-only training with uniformly sampled ops; alpha untouched.
  // Returns the per-(layer, choice) sample counts.
  std::vector<std::vector<int>> warmup(const Dataset& ds, const std::vector<int>& train_idx,
                                       int epochs, int batch, uint64_t seed);

  int classes() const { return classes_; }

 private:
  double run_choices(const Tensor4& x, const std::vector<int>& labels,
                     const std::vector<int>& choice, const std::vector<std::vector<double>>& w,
                     std::vector<double>* dlogits, BatchMetrics* metrics);

  SpaceSpec space_;
  StridePath path_;
  int classes_ = 0;
  ArchParams alpha_;
  ParamStore store_;
  std::vector<std::vector<long long>> flops_;
};

struct AlternatingResult {
  ArchParams alpha;
  std::vector<EpochRecord> history;  // one record per alpha step
};

// Alternates per batch: weight step on train indices (sampled ops), then an
// alpha step on val indices minimizing r(alpha) * L_rec in mixture mode with
// the exact product-rule gradient. History records expected FLOPS and the
// step's validation loss.
AlternatingResult alternating_search(SuperNet& net, const Dataset& ds,
                                     const std::vector<int>& train_idx,
                                     const std::vector<int>& val_idx, int epochs, int batch,
                                     const RegularizerConfig& reg, uint64_t seed);

// Per-layer argmax over legal choices; exact ties break to the lowest op
// index in vocabulary order.
Architecture discretize(const ArchParams& alpha, const StridePath& path, const SpaceSpec& space);

// Seeded disjoint 80/20 split of sample indices.
void split_indices(int count, double val_fraction, uint64_t seed, std::vector<int>& train_idx,
                   std::vector<int>& val_idx);

}  // namespace seqnas
