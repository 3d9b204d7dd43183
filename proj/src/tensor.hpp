#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "error.hpp"

namespace seqnas {

// Dense NCHW tensor, 32-bit float storage. Reductions accumulate in 64-bit
// and store back in 32-bit so results are reproducible bit-for-bit.
struct Tensor4 {
  int n = 0, c = 0, h = 0, w = 0;
  std::vector<float> v;

  Tensor4() = default;
  Tensor4(int n_, int c_, int h_, int w_)
      : n(n_), c(c_), h(h_), w(w_), v(static_cast<size_t>(n_) * c_ * h_ * w_, 0.0f) {}

  size_t size() const { return v.size(); }
  bool same_shape(const Tensor4& o) const { return n == o.n && c == o.c && h == o.h && w == o.w; }

  size_t idx(int in, int ic, int ih, int iw) const {
    return ((static_cast<size_t>(in) * c + ic) * h + ih) * w + iw;
  }
  float& at(int in, int ic, int ih, int iw) { return v[idx(in, ic, ih, iw)]; }
  float at(int in, int ic, int ih, int iw) const { return v[idx(in, ic, ih, iw)]; }

  bool all_finite() const;
};

struct Conv2dSpec {
  int stride_h = 1;
  int stride_w = 1;
  int pad = 0;      // symmetric spatial zero padding
  int groups = 1;

  int out_h(int in_h, int k) const { return (in_h + 2 * pad - k) / stride_h + 1; }
  int out_w(int in_w, int k) const { return (in_w + 2 * pad - k) / stride_w + 1; }
};

// Cross-correlation. weight is (out_ch, in_ch/groups, k, k).
Tensor4 conv2d_fwd(const Tensor4& x, const Tensor4& weight, const Conv2dSpec& spec);

// Gradients w.r.t. input and weight; dw is accumulated into (not cleared).
void conv2d_bwd(const Tensor4& x, const Tensor4& weight, const Tensor4& dy,
                const Conv2dSpec& spec, Tensor4& dx, Tensor4& dw);

Tensor4 relu6_fwd(const Tensor4& x);
// x_pre is the activation input; passes gradient where 0 < x_pre < 6.
Tensor4 relu6_bwd(const Tensor4& x_pre, const Tensor4& dy);

struct CeResult {
  double loss = 0.0;
  Tensor4 dlogits;  // gradient of the mean loss
};

// Mean per-frame softmax cross-entropy. logits is (batch, classes, 1, frames);
// labels holds batch*frames class ids, frame-major within each sample.
CeResult frame_softmax_ce(const Tensor4& logits, const std::vector<int>& labels);

// Named parameter tensors with gradients and ADADELTA accumulators.
class ParamStore {
 public:
  struct Param {
    Tensor4 value, grad, acc_grad, acc_delta;
  };

  // Creates a tensor initialized uniformly in +-sqrt(1/fan_in) where fan_in
  // is c*h*w of the weight shape. The init stream is keyed by (seed, name),
  // so creation order does not matter.
  Tensor4& create(const std::string& name, int n, int c, int h, int w, uint64_t seed);

  bool has(const std::string& name) const { return params_.count(name) != 0; }
  Tensor4& value(const std::string& name);
  const Tensor4& value(const std::string& name) const;
  Tensor4& grad(const std::string& name);

  void zero_grads();

  // rho=0.9, eps=1e-6, no weight decay; the ADADELTA defaults used throughout.
  void adadelta_step(double rho = 0.9, double eps = 1e-6);

  long long total_params(const std::string& prefix = "") const;
  std::vector<std::string> names(const std::string& prefix = "") const;

  // Checkpoint: <base>.json manifest (names and shapes, in name order) and
  // <base>.bin with the raw little-endian float32 values in the same order.
  void save(const std::string& base_path) const;
  void load(const std::string& base_path);

  bool values_equal(const ParamStore& o) const;

  const std::map<std::string, Param>& entries() const { return params_; }

 private:
  std::map<std::string, Param> params_;  // ordered, deterministic iteration
};

}  // namespace seqnas
