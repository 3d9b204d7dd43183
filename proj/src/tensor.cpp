#include "tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "rng.hpp"

namespace seqnas {

bool Tensor4::all_finite() const {
  for (float f : v)
    if (!std::isfinite(f)) return false;
  return true;
}

static void check_conv_shapes(const Tensor4& x, const Tensor4& weight, const Conv2dSpec& spec) {
  if (weight.h != weight.w) fail(ErrorKind::Invalid, "conv2d: non-square kernel");
  if (spec.groups <= 0 || x.c % spec.groups != 0 || weight.n % spec.groups != 0)
    fail(ErrorKind::Invalid, "conv2d: channels not divisible by groups");
  if (weight.c != x.c / spec.groups)
    fail(ErrorKind::Invalid, "conv2d: weight in-channels mismatch");
  if (spec.out_h(x.h, weight.h) <= 0 || spec.out_w(x.w, weight.w) <= 0)
    fail(ErrorKind::Invalid, "conv2d: empty output");
}

// Each dispatch below fixes its own summation order, so results for a given
// shape are bit-reproducible. Accumulation is in double, storage in float.

static void fwd_1x1(const Tensor4& x, const Tensor4& w, const Conv2dSpec& s, Tensor4& y) {
  const int px = y.h * y.w;
  std::vector<double> acc(px);
  for (int in = 0; in < x.n; ++in)
    for (int oc = 0; oc < w.n; ++oc) {
      std::fill(acc.begin(), acc.end(), 0.0);
      for (int ic = 0; ic < x.c; ++ic) {
        const double wv = w.v[static_cast<size_t>(oc) * w.c + ic];
        const float* xp = &x.v[x.idx(in, ic, 0, 0)];
        double* ap = acc.data();
        if (s.stride_h == 1 && s.stride_w == 1) {
          for (int p = 0; p < px; ++p) ap[p] += wv * xp[p];
        } else {
          for (int i = 0; i < y.h; ++i) {
            const float* row = xp + static_cast<size_t>(i) * s.stride_h * x.w;
            for (int j = 0; j < y.w; ++j) ap[i * y.w + j] += wv * row[j * s.stride_w];
          }
        }
      }
      float* yp = &y.v[y.idx(in, oc, 0, 0)];
      for (int p = 0; p < px; ++p) yp[p] = static_cast<float>(acc[p]);
    }
}

static void fwd_generic(const Tensor4& x, const Tensor4& w, const Conv2dSpec& s, Tensor4& y) {
  const int k = w.h, icg = w.c, ocg = w.n / s.groups;
  for (int in = 0; in < x.n; ++in)
    for (int g = 0; g < s.groups; ++g)
      for (int oc = g * ocg; oc < (g + 1) * ocg; ++oc)
        for (int i = 0; i < y.h; ++i) {
          const int ih0 = i * s.stride_h - s.pad;
          const int kh_lo = std::max(0, -ih0), kh_hi = std::min(k, x.h - ih0);
          for (int j = 0; j < y.w; ++j) {
            const int iw0 = j * s.stride_w - s.pad;
            const int kw_lo = std::max(0, -iw0), kw_hi = std::min(k, x.w - iw0);
            double acc = 0.0;
            for (int ic = 0; ic < icg; ++ic) {
              const float* xc = &x.v[x.idx(in, g * icg + ic, 0, 0)];
              const float* wc = &w.v[w.idx(oc, ic, 0, 0)];
              for (int kh = kh_lo; kh < kh_hi; ++kh) {
                const float* xrow = xc + static_cast<size_t>(ih0 + kh) * x.w + iw0;
                const float* wrow = wc + static_cast<size_t>(kh) * k;
                for (int kw = kw_lo; kw < kw_hi; ++kw)
                  acc += static_cast<double>(xrow[kw]) * static_cast<double>(wrow[kw]);
              }
            }
            y.at(in, oc, i, j) = static_cast<float>(acc);
          }
        }
}

Tensor4 conv2d_fwd(const Tensor4& x, const Tensor4& weight, const Conv2dSpec& spec) {
  check_conv_shapes(x, weight, spec);
  Tensor4 y(x.n, weight.n, spec.out_h(x.h, weight.h), spec.out_w(x.w, weight.w));
  if (weight.h == 1 && spec.pad == 0 && spec.groups == 1)
    fwd_1x1(x, weight, spec, y);
  else
    fwd_generic(x, weight, spec, y);
  return y;
}

static void bwd_1x1(const Tensor4& x, const Tensor4& w, const Tensor4& dy, const Conv2dSpec& s,
                    std::vector<double>& ax, std::vector<double>& aw, const Tensor4& dxref,
                    const Tensor4& dwref) {
  const int px = dy.h * dy.w;
  for (int in = 0; in < x.n; ++in)
    for (int oc = 0; oc < w.n; ++oc) {
      const float* gp = &dy.v[dy.idx(in, oc, 0, 0)];
      for (int ic = 0; ic < x.c; ++ic) {
        const double wv = w.v[static_cast<size_t>(oc) * w.c + ic];
        const float* xp = &x.v[x.idx(in, ic, 0, 0)];
        double* axp = &ax[dxref.idx(in, ic, 0, 0)];
        double wsum = 0.0;
        if (s.stride_h == 1 && s.stride_w == 1) {
          for (int p = 0; p < px; ++p) {
            const double g = gp[p];
            axp[p] += wv * g;
            wsum += g * xp[p];
          }
        } else {
          for (int i = 0; i < dy.h; ++i)
            for (int j = 0; j < dy.w; ++j) {
              const double g = gp[i * dy.w + j];
              const size_t xoff =
                  static_cast<size_t>(i) * s.stride_h * x.w + static_cast<size_t>(j) * s.stride_w;
              axp[xoff] += wv * g;
              wsum += g * xp[xoff];
            }
        }
        aw[dwref.idx(oc, ic, 0, 0)] += wsum;
      }
    }
}

static void bwd_generic(const Tensor4& x, const Tensor4& w, const Tensor4& dy,
                        const Conv2dSpec& s, std::vector<double>& ax, std::vector<double>& aw,
                        const Tensor4& dxref, const Tensor4& dwref) {
  const int k = w.h, icg = w.c, ocg = w.n / s.groups;
  for (int in = 0; in < x.n; ++in)
    for (int g = 0; g < s.groups; ++g)
      for (int oc = g * ocg; oc < (g + 1) * ocg; ++oc)
        for (int i = 0; i < dy.h; ++i) {
          const int ih0 = i * s.stride_h - s.pad;
          const int kh_lo = std::max(0, -ih0), kh_hi = std::min(k, x.h - ih0);
          for (int j = 0; j < dy.w; ++j) {
            const double go = dy.at(in, oc, i, j);
            const int iw0 = j * s.stride_w - s.pad;
            const int kw_lo = std::max(0, -iw0), kw_hi = std::min(k, x.w - iw0);
            for (int ic = 0; ic < icg; ++ic) {
              const float* xc = &x.v[x.idx(in, g * icg + ic, 0, 0)];
              double* axc = &ax[dxref.idx(in, g * icg + ic, 0, 0)];
              for (int kh = kh_lo; kh < kh_hi; ++kh) {
                const size_t xoff = static_cast<size_t>(ih0 + kh) * x.w + iw0;
                const size_t woff = dwref.idx(oc, ic, kh, 0);
                for (int kw = kw_lo; kw < kw_hi; ++kw) {
                  axc[xoff + kw] += go * static_cast<double>(w.v[woff + kw]);
                  aw[woff + kw] += go * static_cast<double>(xc[xoff + kw]);
                }
              }
            }
          }
        }
}

void conv2d_bwd(const Tensor4& x, const Tensor4& weight, const Tensor4& dy,
                const Conv2dSpec& spec, Tensor4& dx, Tensor4& dw) {
  check_conv_shapes(x, weight, spec);
  if (dy.n != x.n || dy.c != weight.n || dy.h != spec.out_h(x.h, weight.h) ||
      dy.w != spec.out_w(x.w, weight.w))
    fail(ErrorKind::Invalid, "conv2d_bwd: dy shape mismatch");
  if (!dx.same_shape(x)) dx = Tensor4(x.n, x.c, x.h, x.w);
  if (!dw.same_shape(weight)) dw = Tensor4(weight.n, weight.c, weight.h, weight.w);

  std::vector<double> ax(dx.size()), aw(dw.size());
  for (size_t i = 0; i < dx.size(); ++i) ax[i] = dx.v[i];
  for (size_t i = 0; i < dw.size(); ++i) aw[i] = dw.v[i];

  if (weight.h == 1 && spec.pad == 0 && spec.groups == 1)
    bwd_1x1(x, weight, dy, spec, ax, aw, dx, dw);
  else
    bwd_generic(x, weight, dy, spec, ax, aw, dx, dw);

  for (size_t i = 0; i < dx.size(); ++i) dx.v[i] = static_cast<float>(ax[i]);
  for (size_t i = 0; i < dw.size(); ++i) dw.v[i] = static_cast<float>(aw[i]);
}

Tensor4 relu6_fwd(const Tensor4& x) {
  Tensor4 y = x;
  for (float& f : y.v) f = std::min(std::max(f, 0.0f), 6.0f);
  return y;
}

Tensor4 relu6_bwd(const Tensor4& x_pre, const Tensor4& dy) {
  if (!x_pre.same_shape(dy)) fail(ErrorKind::Invalid, "relu6_bwd: shape mismatch");
  Tensor4 dx(x_pre.n, x_pre.c, x_pre.h, x_pre.w);
  for (size_t i = 0; i < dx.size(); ++i)
    dx.v[i] = (x_pre.v[i] > 0.0f && x_pre.v[i] < 6.0f) ? dy.v[i] : 0.0f;
  return dx;
}

CeResult frame_softmax_ce(const Tensor4& logits, const std::vector<int>& labels) {
  if (logits.h != 1) fail(ErrorKind::Invalid, "frame_softmax_ce: logits height must be 1");
  const int classes = logits.c, frames = logits.w;
  if (labels.size() != static_cast<size_t>(logits.n) * frames)
    fail(ErrorKind::Invalid, "frame_softmax_ce: label count mismatch");

  CeResult r;
  r.dlogits = Tensor4(logits.n, logits.c, 1, logits.w);
  const double inv_count = 1.0 / (static_cast<double>(logits.n) * frames);
  double loss = 0.0;
  std::vector<double> p(classes);
  for (int in = 0; in < logits.n; ++in)
    for (int f = 0; f < frames; ++f) {
      double mx = -1e300;
      for (int c = 0; c < classes; ++c)
        mx = std::max(mx, static_cast<double>(logits.at(in, c, 0, f)));
      double denom = 0.0;
      for (int c = 0; c < classes; ++c) {
        p[c] = std::exp(static_cast<double>(logits.at(in, c, 0, f)) - mx);
        denom += p[c];
      }
      const int y = labels[static_cast<size_t>(in) * frames + f];
      if (y < 0 || y >= classes) fail(ErrorKind::Invalid, "frame_softmax_ce: label out of range");
      loss += std::log(denom) - std::log(p[y]);
      for (int c = 0; c < classes; ++c)
        r.dlogits.at(in, c, 0, f) =
            static_cast<float>((p[c] / denom - (c == y ? 1.0 : 0.0)) * inv_count);
    }
  r.loss = loss * inv_count;
  return r;
}

Tensor4& ParamStore::create(const std::string& name, int n, int c, int h, int w, uint64_t seed) {
  if (params_.count(name)) fail(ErrorKind::Invalid, "param already exists: " + name);
  Param p;
  p.value = Tensor4(n, c, h, w);
  p.grad = Tensor4(n, c, h, w);
  p.acc_grad = Tensor4(n, c, h, w);
  p.acc_delta = Tensor4(n, c, h, w);
  const int fan_in = c * h * w;
  const float scale = static_cast<float>(std::sqrt(1.0 / std::max(fan_in, 1)));
  SplitMix64 rng(derive_seed(seed, fnv1a64(name)));
  for (float& f : p.value.v) f = static_cast<float>(rng.next_sym()) * scale;
  auto [it, ok] = params_.emplace(name, std::move(p));
  (void)ok;
  return it->second.value;
}

Tensor4& ParamStore::value(const std::string& name) {
  auto it = params_.find(name);
  if (it == params_.end()) fail(ErrorKind::Invalid, "no such param: " + name);
  return it->second.value;
}

const Tensor4& ParamStore::value(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) fail(ErrorKind::Invalid, "no such param: " + name);
  return it->second.value;
}

Tensor4& ParamStore::grad(const std::string& name) {
  auto it = params_.find(name);
  if (it == params_.end()) fail(ErrorKind::Invalid, "no such param: " + name);
  return it->second.grad;
}

void ParamStore::zero_grads() {
  for (auto& [name, p] : params_) std::fill(p.grad.v.begin(), p.grad.v.end(), 0.0f);
}

void ParamStore::adadelta_step(double rho, double eps) {
  for (auto& [name, p] : params_) {
    for (size_t i = 0; i < p.value.size(); ++i) {
      const double g = p.grad.v[i];
      const double eg = rho * p.acc_grad.v[i] + (1.0 - rho) * g * g;
      const double dx = -std::sqrt((p.acc_delta.v[i] + eps) / (eg + eps)) * g;
      const double ed = rho * p.acc_delta.v[i] + (1.0 - rho) * dx * dx;
      p.acc_grad.v[i] = static_cast<float>(eg);
      p.acc_delta.v[i] = static_cast<float>(ed);
      p.value.v[i] = static_cast<float>(p.value.v[i] + dx);
    }
  }
}

long long ParamStore::total_params(const std::string& prefix) const {
  long long total = 0;
  for (const auto& [name, p] : params_)
    if (name.rfind(prefix, 0) == 0) total += static_cast<long long>(p.value.size());
  return total;
}

std::vector<std::string> ParamStore::names(const std::string& prefix) const {
  std::vector<std::string> out;
  for (const auto& [name, p] : params_)
    if (name.rfind(prefix, 0) == 0) out.push_back(name);
  return out;
}

void ParamStore::save(const std::string& base_path) const {
  nlohmann::json manifest = nlohmann::json::array();
  std::ofstream bin(base_path + ".bin", std::ios::binary);
  if (!bin) fail(ErrorKind::Io, "cannot write " + base_path + ".bin");
  for (const auto& [name, p] : params_) {
    manifest.push_back({{"name", name}, {"shape", {p.value.n, p.value.c, p.value.h, p.value.w}}});
    bin.write(reinterpret_cast<const char*>(p.value.v.data()),
              static_cast<std::streamsize>(p.value.size() * sizeof(float)));
  }
  if (!bin) fail(ErrorKind::Io, "short write: " + base_path + ".bin");
  std::ofstream mf(base_path + ".json");
  if (!mf) fail(ErrorKind::Io, "cannot write " + base_path + ".json");
  mf << manifest.dump(2) << "\n";
}

void ParamStore::load(const std::string& base_path) {
  std::ifstream mf(base_path + ".json");
  if (!mf) fail(ErrorKind::Io, "cannot read " + base_path + ".json");
  nlohmann::json manifest;
  try {
    mf >> manifest;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Parse, std::string("bad checkpoint manifest: ") + e.what());
  }
  std::ifstream bin(base_path + ".bin", std::ios::binary);
  if (!bin) fail(ErrorKind::Io, "cannot read " + base_path + ".bin");
  params_.clear();
  for (const auto& entry : manifest) {
    const std::string name = entry.at("name").get<std::string>();
    const auto shape = entry.at("shape");
    Param p;
    p.value = Tensor4(shape.at(0).get<int>(), shape.at(1).get<int>(), shape.at(2).get<int>(),
                      shape.at(3).get<int>());
    p.grad = p.value;
    p.acc_grad = p.value;
    p.acc_delta = p.value;
    bin.read(reinterpret_cast<char*>(p.value.v.data()),
             static_cast<std::streamsize>(p.value.size() * sizeof(float)));
    if (!bin) fail(ErrorKind::Io, "truncated checkpoint: " + base_path + ".bin");
    params_.emplace(name, std::move(p));
  }
}

bool ParamStore::values_equal(const ParamStore& o) const {
  if (params_.size() != o.params_.size()) return false;
  auto it = o.params_.begin();
  for (const auto& [name, p] : params_) {
    if (name != it->first || !p.value.same_shape(it->second.value)) return false;
    if (std::memcmp(p.value.v.data(), it->second.value.v.data(),
                    p.value.size() * sizeof(float)) != 0)
      return false;
    ++it;
  }
  return true;
}

}  // namespace seqnas
