#include "neural.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include <json.hpp>

#include "rng.hpp"

namespace seqnas {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct LayerGeom {
  OperationSpec op;
  int in_ch = 0, out_ch = 0;
  StrideStep step;
  int out_h = 0, out_w = 0;
};

std::vector<LayerGeom> layer_geometry(const SpaceSpec& space, const StridePath& path) {
  auto trace = shape_trace(path, space);
  std::vector<LayerGeom> out(space.L);
  int in_ch = space.input_ch;
  for (int i = 0; i < space.L; ++i) {
    out[i].in_ch = in_ch;
    out[i].out_ch = trace[i].ch;
    out[i].step = path.steps[i];
    out[i].out_h = trace[i].h;
    out[i].out_w = trace[i].w;
    in_ch = trace[i].ch;
  }
  return out;
}

bool mb_residual(const LayerGeom& g) { return !g.step.is_downsampling() && g.in_ch == g.out_ch; }
bool res3_shortcut_conv(const LayerGeom& g) {
  return g.step.is_downsampling() || g.in_ch != g.out_ch;
}

std::string layer_prefix(int layer) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "backbone.l%02d.", layer + 1);
  return buf;
}

void create_op_params(ParamStore& store, const std::string& prefix, const LayerGeom& g,
                      uint64_t seed) {
  switch (g.op.family) {
    case OpFamily::SkipConnect:
      break;
    case OpFamily::MBConv: {
      const int mid = g.in_ch * g.op.expansion;
      if (g.op.expansion > 1) store.create(prefix + "expand", mid, g.in_ch, 1, 1, seed);
      store.create(prefix + "dw", mid, 1, g.op.kernel, g.op.kernel, seed);
      store.create(prefix + "proj", g.out_ch, mid, 1, 1, seed);
      break;
    }
    case OpFamily::ResidualConv3x3:
      store.create(prefix + "conv", g.out_ch, g.in_ch, 3, 3, seed);
      if (res3_shortcut_conv(g)) store.create(prefix + "short", g.out_ch, g.in_ch, 1, 1, seed);
      break;
  }
}

void add_into(Tensor4& dst, const Tensor4& src) {
  for (size_t i = 0; i < dst.size(); ++i) dst.v[i] += src.v[i];
}

Tensor4 scaled(const Tensor4& t, double s) {
  Tensor4 y = t;
  for (float& f : y.v) f = static_cast<float>(f * s);
  return y;
}

double dot(const Tensor4& a, const Tensor4& b) {
  double acc = 0.0;
  for (size_t i = 0; i < a.size(); ++i)
    acc += static_cast<double>(a.v[i]) * static_cast<double>(b.v[i]);
  return acc;
}

// Per-op activations kept from the forward pass for the backward pass.
struct OpCache {
  Tensor4 t_pre, t;  // MBConv expansion pre/post activation (expansion > 1)
  Tensor4 d_pre, d;  // MBConv depthwise pre/post activation
  Tensor4 sum_pre;   // ResidualConv3x3 pre-activation sum
  Tensor4 y;         // op output
};

Tensor4 op_forward(const ParamStore& store, const std::string& prefix, const LayerGeom& g,
                   const Tensor4& x, OpCache* cc) {
  switch (g.op.family) {
    case OpFamily::SkipConnect: {
      if (cc) cc->y = x;
      return x;
    }
    case OpFamily::MBConv: {
      const int k = g.op.kernel;
      const int mid = g.in_ch * g.op.expansion;
      Tensor4 t_post;
      const Tensor4* t = &x;
      if (g.op.expansion > 1) {
        Tensor4 t_pre = conv2d_fwd(x, store.value(prefix + "expand"), {1, 1, 0, 1});
        t_post = relu6_fwd(t_pre);
        if (cc) cc->t_pre = std::move(t_pre);
        t = &t_post;
      }
      Conv2dSpec dws{g.step.stride_h(), g.step.stride_w(), (k - 1) / 2, mid};
      Tensor4 d_pre = conv2d_fwd(*t, store.value(prefix + "dw"), dws);
      Tensor4 d = relu6_fwd(d_pre);
      Tensor4 y = conv2d_fwd(d, store.value(prefix + "proj"), {1, 1, 0, 1});
      if (mb_residual(g)) add_into(y, x);
      if (cc) {
        cc->t = std::move(t_post);
        cc->d_pre = std::move(d_pre);
        cc->d = std::move(d);
        cc->y = y;
      }
      return y;
    }
    case OpFamily::ResidualConv3x3: {
      Tensor4 sum = conv2d_fwd(x, store.value(prefix + "conv"),
                               {g.step.stride_h(), g.step.stride_w(), 1, 1});
      if (res3_shortcut_conv(g)) {
        Tensor4 s = conv2d_fwd(x, store.value(prefix + "short"),
                               {g.step.stride_h(), g.step.stride_w(), 0, 1});
        add_into(sum, s);
      } else {
        add_into(sum, x);
      }
      Tensor4 y = relu6_fwd(sum);
      if (cc) {
        cc->sum_pre = std::move(sum);
        cc->y = y;
      }
      return y;
    }
  }
  fail(ErrorKind::Invalid, "unknown op family");
}

Tensor4 op_backward(ParamStore& store, const std::string& prefix, const LayerGeom& g,
                    const Tensor4& x, const OpCache& cc, const Tensor4& dy) {
  switch (g.op.family) {
    case OpFamily::SkipConnect:
      return dy;
    case OpFamily::MBConv: {
      const int k = g.op.kernel;
      const int mid = g.in_ch * g.op.expansion;
      Tensor4 dd;
      conv2d_bwd(cc.d, store.value(prefix + "proj"), dy, {1, 1, 0, 1}, dd,
                 store.grad(prefix + "proj"));
      Tensor4 dd_pre = relu6_bwd(cc.d_pre, dd);
      const Tensor4& t = g.op.expansion > 1 ? cc.t : x;
      Conv2dSpec dws{g.step.stride_h(), g.step.stride_w(), (k - 1) / 2, mid};
      Tensor4 dt;
      conv2d_bwd(t, store.value(prefix + "dw"), dd_pre, dws, dt, store.grad(prefix + "dw"));
      Tensor4 dx;
      if (g.op.expansion > 1) {
        Tensor4 dt_pre = relu6_bwd(cc.t_pre, dt);
        conv2d_bwd(x, store.value(prefix + "expand"), dt_pre, {1, 1, 0, 1}, dx,
                   store.grad(prefix + "expand"));
      } else {
        dx = std::move(dt);
      }
      if (mb_residual(g)) add_into(dx, dy);
      return dx;
    }
    case OpFamily::ResidualConv3x3: {
      Tensor4 dsum = relu6_bwd(cc.sum_pre, dy);
      Tensor4 dx;
      conv2d_bwd(x, store.value(prefix + "conv"), dsum,
                 {g.step.stride_h(), g.step.stride_w(), 1, 1}, dx, store.grad(prefix + "conv"));
      if (res3_shortcut_conv(g)) {
        conv2d_bwd(x, store.value(prefix + "short"), dsum,
                   {g.step.stride_h(), g.step.stride_w(), 0, 1}, dx,
                   store.grad(prefix + "short"));
      } else {
        add_into(dx, dsum);
      }
      return dx;
    }
  }
  fail(ErrorKind::Invalid, "unknown op family");
}

struct Counts {
  long long frames_ok = 0, frames = 0, seqs_ok = 0, seqs = 0;

  double frame_acc() const { return frames ? static_cast<double>(frames_ok) / frames : 0.0; }
  double seq_acc() const { return seqs ? static_cast<double>(seqs_ok) / seqs : 0.0; }
};

void accumulate_metrics(const Tensor4& logits, const std::vector<int>& labels, Counts& c) {
  for (int in = 0; in < logits.n; ++in) {
    bool all_ok = true;
    for (int f = 0; f < logits.w; ++f) {
      int best = 0;
      for (int cl = 1; cl < logits.c; ++cl)
        if (logits.at(in, cl, 0, f) > logits.at(in, best, 0, f)) best = cl;
      const bool ok = best == labels[static_cast<size_t>(in) * logits.w + f];
      c.frames_ok += ok;
      all_ok = all_ok && ok;
    }
    c.frames += logits.w;
    c.seqs_ok += all_ok;
    c.seqs += 1;
  }
}

void make_batch(const Dataset& ds, const std::vector<int>& idx, size_t lo, size_t hi, Tensor4& x,
                std::vector<int>& labels) {
  const int nb = static_cast<int>(hi - lo);
  x = Tensor4(nb, 1, ds.h, ds.w);
  labels.resize(static_cast<size_t>(nb) * ds.frames());
  for (int s = 0; s < nb; ++s) {
    const int i = idx[lo + s];
    std::copy_n(ds.sample_pixels(i), static_cast<size_t>(ds.h) * ds.w,
                x.v.begin() + static_cast<size_t>(s) * ds.h * ds.w);
    for (int f = 0; f < ds.frames(); ++f)
      labels[static_cast<size_t>(s) * ds.frames() + f] = ds.sample_labels(i)[f];
  }
}

void check_dataset_geometry(const SpaceSpec& space, const Dataset& ds) {
  if (ds.h != space.input_h || ds.w != space.input_w || ds.a != space.a)
    fail(ErrorKind::Invalid, "dataset geometry does not match the space");
}

void check_head_geometry(const SpaceSpec& space) {
  if (space.c1 != 1) fail(ErrorKind::Invalid, "frame classification requires output height 1");
}

void seeded_shuffle(std::vector<int>& v, SplitMix64& rng) {
  for (size_t i = v.size(); i > 1; --i)
    std::swap(v[i - 1], v[rng.next_below(static_cast<uint64_t>(i))]);
}

// Softmax jacobian: maps d(objective)/d(weight) into d(objective)/d(logit)
// for one layer's row.
void softmax_jacobian_row(const std::vector<double>& p, const std::vector<double>& gw,
                          double temperature, const std::vector<uint8_t>& legal, int l,
                          int choices, std::vector<double>& dlogits) {
  double s = 0.0;
  for (int j = 0; j < choices; ++j) s += p[j] * gw[j];
  for (int j = 0; j < choices; ++j) {
    const size_t k = static_cast<size_t>(l) * choices + j;
    dlogits[k] = legal[k] ? p[j] * (gw[j] - s) / temperature : 0.0;
  }
}

}  // namespace

ArchParams ArchParams::make(const SpaceSpec& space, const StridePath& path) {
  auto geos = layer_geometry(space, path);
  ArchParams ap;
  ap.layers = space.L;
  ap.choices = static_cast<int>(space.op_vocab.size());
  ap.logits.assign(static_cast<size_t>(ap.layers) * ap.choices, 0.0);
  ap.legal.assign(ap.logits.size(), 0);
  ap.acc_grad.assign(ap.logits.size(), 0.0);
  ap.acc_delta.assign(ap.logits.size(), 0.0);
  for (int l = 0; l < ap.layers; ++l)
    for (int j = 0; j < ap.choices; ++j) {
      const bool ok = op_legal_at(space.op_vocab[j], geos[l].step, geos[l].in_ch, geos[l].out_ch);
      ap.legal[ap.at(l, j)] = ok;
      if (!ok) ap.logits[ap.at(l, j)] = kNegInf;
    }
  return ap;
}

void ArchParams::set_logit(int l, int j, double v) {
  if (l < 0 || l >= layers || j < 0 || j >= choices)
    fail(ErrorKind::Invalid, "arch-param index out of range");
  if (!is_legal(l, j)) fail(ErrorKind::Invalid, "cannot set logit of an illegal choice");
  logits[at(l, j)] = v;
}

std::vector<std::vector<double>> ArchParams::weights() const {
  if (temperature <= 0.0) fail(ErrorKind::Invalid, "temperature must be positive");
  std::vector<std::vector<double>> w(layers, std::vector<double>(choices, 0.0));
  for (int l = 0; l < layers; ++l) {
    double mx = kNegInf;
    for (int j = 0; j < choices; ++j)
      if (is_legal(l, j)) mx = std::max(mx, logits[at(l, j)]);
    if (mx == kNegInf) fail(ErrorKind::Invalid, "layer with no legal choice");
    double denom = 0.0;
    for (int j = 0; j < choices; ++j)
      if (is_legal(l, j)) {
        w[l][j] = std::exp((logits[at(l, j)] - mx) / temperature);
        denom += w[l][j];
      }
    for (int j = 0; j < choices; ++j) w[l][j] /= denom;
  }
  return w;
}

void ArchParams::adadelta_step(const std::vector<double>& grad, double rho, double eps) {
  if (grad.size() != logits.size()) fail(ErrorKind::Invalid, "alpha gradient size mismatch");
  for (size_t i = 0; i < logits.size(); ++i) {
    if (!legal[i]) continue;
    const double g = grad[i];
    acc_grad[i] = rho * acc_grad[i] + (1.0 - rho) * g * g;
    const double dx = -std::sqrt((acc_delta[i] + eps) / (acc_grad[i] + eps)) * g;
    acc_delta[i] = rho * acc_delta[i] + (1.0 - rho) * dx * dx;
    logits[i] += dx;
  }
}

std::string EpochRecord::to_json() const {
  nlohmann::json j{{"epoch", epoch},
                   {"train_loss", train_loss},
                   {"val_loss", val_loss},
                   {"frame_acc", frame_acc},
                   {"seq_acc", seq_acc},
                   {"expected_flops", expected_flops}};
  return j.dump();
}

std::string EvalReport::curve_jsonl() const {
  std::string out;
  for (const auto& r : train_curve) {
    out += r.to_json();
    out += '\n';
  }
  return out;
}

std::string EvalReport::to_json() const {
  nlohmann::json curve = nlohmann::json::array();
  for (const auto& r : train_curve) curve.push_back(nlohmann::json::parse(r.to_json()));
  nlohmann::json j{{"val_loss", val_loss},
                   {"frame_accuracy", frame_accuracy},
                   {"seq_accuracy", seq_accuracy},
                   {"train_curve", curve}};
  return j.dump();
}

ParamStore build_fixed(const Architecture& arch, int classes, uint64_t seed) {
  validate_arch(arch);
  if (classes < 2) fail(ErrorKind::Invalid, "need at least 2 classes");
  auto geos = layer_geometry(arch.space, arch.path);
  ParamStore store;
  for (int l = 0; l < arch.space.L; ++l) {
    geos[l].op = arch.ops[l];
    create_op_params(store, layer_prefix(l), geos[l], seed);
  }
  const int last_ch = arch.space.L > 0 ? geos.back().out_ch : arch.space.input_ch;
  store.create("head.w", classes, last_ch, 1, 1, seed);
  return store;
}

Tensor4 fixed_forward(const Architecture& arch, const ParamStore& store, const Tensor4& x) {
  if (x.c != arch.space.input_ch || x.h != arch.space.input_h || x.w != arch.space.input_w)
    fail(ErrorKind::Invalid, "input shape does not match the space");
  auto geos = layer_geometry(arch.space, arch.path);
  Tensor4 cur = x;
  for (int l = 0; l < arch.space.L; ++l) {
    geos[l].op = arch.ops[l];
    cur = op_forward(store, layer_prefix(l), geos[l], cur, nullptr);
  }
  return conv2d_fwd(cur, store.value("head.w"), {1, 1, 0, 1});
}

namespace {

double fixed_loss_and_grad(const Architecture& arch, ParamStore& store, const Tensor4& x,
                           const std::vector<int>& labels, Counts* metrics) {
  auto geos = layer_geometry(arch.space, arch.path);
  const int L = arch.space.L;
  std::vector<Tensor4> xs(L + 1);
  std::vector<OpCache> caches(L);
  xs[0] = x;
  for (int l = 0; l < L; ++l) {
    geos[l].op = arch.ops[l];
    xs[l + 1] = op_forward(store, layer_prefix(l), geos[l], xs[l], &caches[l]);
  }
  Tensor4 logits = conv2d_fwd(xs[L], store.value("head.w"), {1, 1, 0, 1});
  CeResult ce = frame_softmax_ce(logits, labels);
  if (metrics) accumulate_metrics(logits, labels, *metrics);
  Tensor4 dy;
  conv2d_bwd(xs[L], store.value("head.w"), ce.dlogits, {1, 1, 0, 1}, dy, store.grad("head.w"));
  for (int l = L - 1; l >= 0; --l)
    dy = op_backward(store, layer_prefix(l), geos[l], xs[l], caches[l], dy);
  return ce.loss;
}

}  // namespace

EvalReport evaluate_fixed(const Architecture& arch, const ParamStore& store, const Dataset& ds,
                          const std::vector<int>& indices, int batch) {
  check_head_geometry(arch.space);
  check_dataset_geometry(arch.space, ds);
  if (batch < 1) fail(ErrorKind::Invalid, "batch must be >= 1");
  EvalReport rep;
  Counts counts;
  double loss_sum = 0.0;
  Tensor4 x;
  std::vector<int> labels;
  for (size_t lo = 0; lo < indices.size(); lo += batch) {
    const size_t hi = std::min(indices.size(), lo + static_cast<size_t>(batch));
    make_batch(ds, indices, lo, hi, x, labels);
    Tensor4 logits = fixed_forward(arch, store, x);
    CeResult ce = frame_softmax_ce(logits, labels);
    accumulate_metrics(logits, labels, counts);
    loss_sum += ce.loss * static_cast<double>(hi - lo);
  }
  rep.val_loss = indices.empty() ? 0.0 : loss_sum / static_cast<double>(indices.size());
  rep.frame_accuracy = counts.frame_acc();
  rep.seq_accuracy = counts.seq_acc();
  return rep;
}

void split_indices(int count, double val_fraction, uint64_t seed, std::vector<int>& train_idx,
                   std::vector<int>& val_idx) {
  if (count < 2) fail(ErrorKind::Invalid, "need at least 2 samples to split");
  if (val_fraction <= 0.0 || val_fraction >= 1.0)
    fail(ErrorKind::Invalid, "val fraction must be in (0,1)");
  std::vector<int> perm(count);
  for (int i = 0; i < count; ++i) perm[i] = i;
  SplitMix64 rng(seed);
  seeded_shuffle(perm, rng);
  int val_n = static_cast<int>(count * val_fraction);
  val_n = std::clamp(val_n, 1, count - 1);
  val_idx.assign(perm.begin(), perm.begin() + val_n);
  train_idx.assign(perm.begin() + val_n, perm.end());
  std::sort(val_idx.begin(), val_idx.end());
  std::sort(train_idx.begin(), train_idx.end());
}

EvalReport train_fixed(const Architecture& arch, ParamStore& store, const Dataset& ds, int epochs,
                       int batch, uint64_t seed) {
  check_dataset_geometry(arch.space, ds);
  check_head_geometry(arch.space);
  if (epochs < 1) fail(ErrorKind::Invalid, "epochs must be >= 1");
  if (batch < 1) fail(ErrorKind::Invalid, "batch must be >= 1");
  std::vector<int> train_idx, val_idx;
  split_indices(ds.count, 0.2, derive_seed(seed, fnv1a64("split")), train_idx, val_idx);

  const double total_macs = static_cast<double>(arch_cost(arch).total_macs);
  EvalReport rep;
  std::vector<int> order = train_idx;
  Tensor4 x;
  std::vector<int> labels;
  for (int e = 1; e <= epochs; ++e) {
    SplitMix64 rng(derive_seed(derive_seed(seed, fnv1a64("epoch")), static_cast<uint64_t>(e)));
    seeded_shuffle(order, rng);
    double loss_sum = 0.0;
    for (size_t lo = 0; lo < order.size(); lo += batch) {
      const size_t hi = std::min(order.size(), lo + static_cast<size_t>(batch));
      make_batch(ds, order, lo, hi, x, labels);
      store.zero_grads();
      const double loss = fixed_loss_and_grad(arch, store, x, labels, nullptr);
      if (!std::isfinite(loss))
        fail(ErrorKind::Diverged, "training diverged at epoch " + std::to_string(e));
      store.adadelta_step();
      loss_sum += loss * static_cast<double>(hi - lo);
    }
    EvalReport ev = evaluate_fixed(arch, store, ds, val_idx, batch);
    EpochRecord rec;
    rec.epoch = e;
    rec.train_loss = loss_sum / static_cast<double>(order.size());
    rec.val_loss = ev.val_loss;
    rec.frame_acc = ev.frame_accuracy;
    rec.seq_acc = ev.seq_accuracy;
    rec.expected_flops = total_macs;
    rep.train_curve.push_back(rec);
    rep.val_loss = ev.val_loss;
    rep.frame_accuracy = ev.frame_accuracy;
    rep.seq_accuracy = ev.seq_accuracy;
  }
  return rep;
}

SuperNet::SuperNet(const SpaceSpec& space, const StridePath& path, int classes, uint64_t seed)
    : space_(space), path_(path), classes_(classes) {
  if (classes < 2) fail(ErrorKind::Invalid, "need at least 2 classes");
  alpha_ = ArchParams::make(space_, path_);
  auto geos = layer_geometry(space_, path_);
  for (int l = 0; l < space_.L; ++l)
    for (int j = 0; j < alpha_.choices; ++j) {
      if (!alpha_.is_legal(l, j)) continue;
      LayerGeom g = geos[l];
      g.op = space_.op_vocab[j];
      create_op_params(store_, layer_prefix(l) + g.op.code + ".", g, seed);
    }
  const int last_ch = space_.L > 0 ? geos.back().out_ch : space_.input_ch;
  store_.create("head.w", classes_, last_ch, 1, 1, seed);
  flops_ = flops_table(path_, space_);
}

Tensor4 SuperNet::forward(const Tensor4& x, ForwardMode mode, SplitMix64* rng) const {
  auto geos = layer_geometry(space_, path_);
  const auto w = alpha_.weights();
  Tensor4 cur = x;
  for (int l = 0; l < space_.L; ++l) {
    if (mode == ForwardMode::Sampled) {
      if (!rng) fail(ErrorKind::Invalid, "sampled forward needs an rng");
      const double u = rng->next_unit();
      double cum = 0.0;
      int pick = -1;
      for (int j = 0; j < alpha_.choices; ++j) {
        if (!alpha_.is_legal(l, j)) continue;
        pick = j;
        cum += w[l][j];
        if (u < cum) break;
      }
      LayerGeom g = geos[l];
      g.op = space_.op_vocab[pick];
      cur = op_forward(store_, layer_prefix(l) + g.op.code + ".", g, cur, nullptr);
    } else {
      std::vector<double> acc;
      Tensor4 out;
      for (int j = 0; j < alpha_.choices; ++j) {
        if (!alpha_.is_legal(l, j)) continue;
        LayerGeom g = geos[l];
        g.op = space_.op_vocab[j];
        Tensor4 yj = op_forward(store_, layer_prefix(l) + g.op.code + ".", g, cur, nullptr);
        if (acc.empty()) {
          acc.assign(yj.size(), 0.0);
          out = Tensor4(yj.n, yj.c, yj.h, yj.w);
        }
        const double wj = w[l][j];
        for (size_t i = 0; i < yj.size(); ++i) acc[i] += wj * yj.v[i];
      }
      for (size_t i = 0; i < out.size(); ++i) out.v[i] = static_cast<float>(acc[i]);
      cur = std::move(out);
    }
  }
  return conv2d_fwd(cur, store_.value("head.w"), {1, 1, 0, 1});
}

double SuperNet::run_choices(const Tensor4& x, const std::vector<int>& labels,
                             const std::vector<int>& choice,
                             const std::vector<std::vector<double>>& w,
                             std::vector<double>* dlogits, BatchMetrics* metrics) {
  auto geos = layer_geometry(space_, path_);
  const int L = space_.L, C = alpha_.choices;
  std::vector<Tensor4> xs(L + 1);
  std::vector<OpCache> caches(L);
  xs[0] = x;
  for (int l = 0; l < L; ++l) {
    LayerGeom g = geos[l];
    g.op = space_.op_vocab[choice[l]];
    xs[l + 1] = op_forward(store_, layer_prefix(l) + g.op.code + ".", g, xs[l], &caches[l]);
  }
  Tensor4 logits = conv2d_fwd(xs[L], store_.value("head.w"), {1, 1, 0, 1});
  CeResult ce = frame_softmax_ce(logits, labels);
  if (metrics) {
    Counts counts;
    accumulate_metrics(logits, labels, counts);
    metrics->frame_acc = counts.frame_acc();
    metrics->seq_acc = counts.seq_acc();
  }
  Tensor4 dy;
  conv2d_bwd(xs[L], store_.value("head.w"), ce.dlogits, {1, 1, 0, 1}, dy, store_.grad("head.w"));
  for (int l = L - 1; l >= 0; --l) {
    if (dlogits) {
      // Straight-through: only the sampled op's term contributes.
      std::vector<double> gw(C, 0.0);
      gw[choice[l]] = dot(dy, caches[l].y);
      softmax_jacobian_row(w[l], gw, alpha_.temperature, alpha_.legal, l, C, *dlogits);
    }
    LayerGeom g = geos[l];
    g.op = space_.op_vocab[choice[l]];
    dy = op_backward(store_, layer_prefix(l) + g.op.code + ".", g, xs[l], caches[l], dy);
  }
  return ce.loss;
}

double SuperNet::loss_and_grad(const Tensor4& x, const std::vector<int>& labels, ForwardMode mode,
                               SplitMix64* rng, std::vector<double>* dlogits,
                               std::vector<int>* choices_out, BatchMetrics* metrics) {
  auto geos = layer_geometry(space_, path_);
  const auto w = alpha_.weights();
  const int L = space_.L, C = alpha_.choices;
  if (dlogits) dlogits->assign(static_cast<size_t>(L) * C, 0.0);

  if (mode == ForwardMode::Sampled) {
    if (!rng) fail(ErrorKind::Invalid, "sampled mode needs an rng");
    std::vector<int> choice(L, -1);
    for (int l = 0; l < L; ++l) {
      const double u = rng->next_unit();
      double cum = 0.0;
      for (int j = 0; j < C; ++j) {
        if (!alpha_.is_legal(l, j)) continue;
        choice[l] = j;
        cum += w[l][j];
        if (u < cum) break;
      }
    }
    if (choices_out) *choices_out = choice;
    return run_choices(x, labels, choice, w, dlogits, metrics);
  }

  std::vector<Tensor4> xs(L + 1);
  std::vector<std::vector<OpCache>> caches(L);
  xs[0] = x;
  for (int l = 0; l < L; ++l) {
    caches[l].resize(C);
    std::vector<double> acc;
    Tensor4 out;
    for (int j = 0; j < C; ++j) {
      if (!alpha_.is_legal(l, j)) continue;
      LayerGeom g = geos[l];
      g.op = space_.op_vocab[j];
      Tensor4 yj = op_forward(store_, layer_prefix(l) + g.op.code + ".", g, xs[l], &caches[l][j]);
      if (acc.empty()) {
        acc.assign(yj.size(), 0.0);
        out = Tensor4(yj.n, yj.c, yj.h, yj.w);
      }
      for (size_t i = 0; i < yj.size(); ++i) acc[i] += w[l][j] * yj.v[i];
    }
    for (size_t i = 0; i < out.size(); ++i) out.v[i] = static_cast<float>(acc[i]);
    xs[l + 1] = std::move(out);
  }
  Tensor4 logits = conv2d_fwd(xs[L], store_.value("head.w"), {1, 1, 0, 1});
  CeResult ce = frame_softmax_ce(logits, labels);
  if (metrics) {
    Counts counts;
    accumulate_metrics(logits, labels, counts);
    metrics->frame_acc = counts.frame_acc();
    metrics->seq_acc = counts.seq_acc();
  }
  Tensor4 dy;
  conv2d_bwd(xs[L], store_.value("head.w"), ce.dlogits, {1, 1, 0, 1}, dy, store_.grad("head.w"));

  for (int l = L - 1; l >= 0; --l) {
    std::vector<double> gw(C, 0.0);
    std::vector<double> dx_acc;
    for (int j = 0; j < C; ++j) {
      if (!alpha_.is_legal(l, j)) continue;
      gw[j] = dot(dy, caches[l][j].y);
      LayerGeom g = geos[l];
      g.op = space_.op_vocab[j];
      Tensor4 dyj = scaled(dy, w[l][j]);
      Tensor4 dxj =
          op_backward(store_, layer_prefix(l) + g.op.code + ".", g, xs[l], caches[l][j], dyj);
      if (dx_acc.empty()) dx_acc.assign(dxj.size(), 0.0);
      for (size_t i = 0; i < dxj.size(); ++i) dx_acc[i] += dxj.v[i];
    }
    if (dlogits) softmax_jacobian_row(w[l], gw, alpha_.temperature, alpha_.legal, l, C, *dlogits);
    Tensor4 dx(xs[l].n, xs[l].c, xs[l].h, xs[l].w);
    for (size_t i = 0; i < dx.size(); ++i) dx.v[i] = static_cast<float>(dx_acc[i]);
    dy = std::move(dx);
  }
  return ce.loss;
}

std::vector<std::vector<int>> SuperNet::warmup(const Dataset& ds,
                                               const std::vector<int>& train_idx, int epochs,
                                               int batch, uint64_t seed) {
  check_dataset_geometry(space_, ds);
  check_head_geometry(space_);
  if (epochs < 1 || batch < 1) fail(ErrorKind::Invalid, "epochs and batch must be >= 1");
  if (train_idx.empty()) fail(ErrorKind::Invalid, "empty train split");
  std::vector<std::vector<int>> counts(space_.L, std::vector<int>(alpha_.choices, 0));
  std::vector<std::vector<int>> legal_js(space_.L);
  for (int l = 0; l < space_.L; ++l)
    for (int j = 0; j < alpha_.choices; ++j)
      if (alpha_.is_legal(l, j)) legal_js[l].push_back(j);

  SplitMix64 pick(derive_seed(seed, fnv1a64("warmup.pick")));
  std::vector<int> order = train_idx;
  Tensor4 x;
  std::vector<int> labels;
  const auto w = alpha_.weights();
  int step = 0;
  for (int e = 1; e <= epochs; ++e) {
    SplitMix64 rng(
        derive_seed(derive_seed(seed, fnv1a64("warmup.epoch")), static_cast<uint64_t>(e)));
    seeded_shuffle(order, rng);
    for (size_t lo = 0; lo < order.size(); lo += batch) {
      const size_t hi = std::min(order.size(), lo + static_cast<size_t>(batch));
      make_batch(ds, order, lo, hi, x, labels);
      std::vector<int> choice(space_.L);
      for (int l = 0; l < space_.L; ++l) {
        choice[l] = legal_js[l][pick.next_below(legal_js[l].size())];
        ++counts[l][choice[l]];
      }
      store_.zero_grads();
      const double loss = run_choices(x, labels, choice, w, nullptr, nullptr);
      ++step;
      if (!std::isfinite(loss))
        fail(ErrorKind::Diverged, "warmup diverged at step " + std::to_string(step));
      store_.adadelta_step();
    }
  }
  return counts;
}

AlternatingResult alternating_search(SuperNet& net, const Dataset& ds,
                                     const std::vector<int>& train_idx,
                                     const std::vector<int>& val_idx, int epochs, int batch,
                                     const RegularizerConfig& reg, uint64_t seed) {
  check_dataset_geometry(net.space(), ds);
  check_head_geometry(net.space());
  reg.validate();
  if (epochs < 1 || batch < 1) fail(ErrorKind::Invalid, "epochs and batch must be >= 1");
  if (train_idx.empty() || val_idx.empty()) fail(ErrorKind::Invalid, "empty train or val split");

  ArchParams& alpha = net.arch_params();
  const int L = alpha.layers, C = alpha.choices;
  SplitMix64 wrng(derive_seed(seed, fnv1a64("alt.weights")));
  AlternatingResult out;
  std::vector<int> order = train_idx;
  size_t vpos = 0;
  Tensor4 x;
  std::vector<int> labels;
  std::vector<double> dce, dtotal(static_cast<size_t>(L) * C, 0.0);
  int step = 0;
  for (int e = 1; e <= epochs; ++e) {
    SplitMix64 rng(derive_seed(derive_seed(seed, fnv1a64("alt.epoch")), static_cast<uint64_t>(e)));
    seeded_shuffle(order, rng);
    for (size_t lo = 0; lo < order.size(); lo += batch) {
      ++step;
      // (i) weight step with ops sampled from softmax(alpha)
      const size_t hi = std::min(order.size(), lo + static_cast<size_t>(batch));
      make_batch(ds, order, lo, hi, x, labels);
      net.store().zero_grads();
      const double train_loss =
          net.loss_and_grad(x, labels, ForwardMode::Sampled, &wrng, nullptr, nullptr, nullptr);
      if (!std::isfinite(train_loss))
        fail(ErrorKind::Diverged, "weight step " + std::to_string(step) + " diverged");
      net.store().adadelta_step();

      // (ii) alpha step on the next val batch, objective r(alpha) * L_rec.
      // Gradients through both factors by the product rule.
      std::vector<int> vbatch;
      for (int i = 0; i < batch; ++i) {
        vbatch.push_back(val_idx[vpos]);
        vpos = (vpos + 1) % val_idx.size();
      }
      make_batch(ds, vbatch, 0, vbatch.size(), x, labels);
      net.store().zero_grads();
      BatchMetrics metrics;
      const double ce =
          net.loss_and_grad(x, labels, ForwardMode::Mixture, nullptr, &dce, nullptr, &metrics);
      if (!std::isfinite(ce))
        fail(ErrorKind::Diverged, "alpha step " + std::to_string(step) + " diverged");

      const auto w = alpha.weights();
      const double E = expected_flops(w, net.flops());
      const double r = regularizer_of(E, reg);
      double drdE = 0.0;  // zero when beta == 0: r is the constant 1
      if (reg.beta > 0.0) {
        const double u = std::log(E) / std::log(reg.G);
        drdE = reg.beta * std::pow(u, reg.beta - 1.0) / (E * std::log(reg.G));
      }
      for (int l = 0; l < L; ++l) {
        double rowE = 0.0;
        for (int j = 0; j < C; ++j) rowE += w[l][j] * static_cast<double>(net.flops()[l][j]);
        for (int j = 0; j < C; ++j) {
          const size_t k = static_cast<size_t>(l) * C + j;
          const double dEdlogit =
              alpha.is_legal(l, j)
                  ? w[l][j] * (static_cast<double>(net.flops()[l][j]) - rowE) / alpha.temperature
                  : 0.0;
          dtotal[k] = drdE * ce * dEdlogit + r * dce[k];
        }
      }
      alpha.adadelta_step(dtotal);
      net.store().zero_grads();  // discard weight grads of the mixture pass

      EpochRecord rec;
      rec.epoch = step;
      rec.train_loss = train_loss;
      rec.val_loss = ce;
      rec.frame_acc = metrics.frame_acc;
      rec.seq_acc = metrics.seq_acc;
      rec.expected_flops = expected_flops(alpha.weights(), net.flops());
      out.history.push_back(rec);
    }
  }
  out.alpha = alpha;
  return out;
}

Architecture discretize(const ArchParams& alpha, const StridePath& path, const SpaceSpec& space) {
  if (alpha.layers != space.L || alpha.choices != static_cast<int>(space.op_vocab.size()))
    fail(ErrorKind::Invalid, "arch params do not match the space");
  Architecture arch;
  arch.space = space;
  arch.path = path;
  arch.ops.resize(space.L);
  for (int l = 0; l < space.L; ++l) {
    int best = -1;
    for (int j = 0; j < alpha.choices; ++j) {
      if (!alpha.is_legal(l, j)) continue;
      if (best < 0 || alpha.logits[alpha.at(l, j)] > alpha.logits[alpha.at(l, best)]) best = j;
    }
    if (best < 0) fail(ErrorKind::Invalid, "layer with no legal choice");
    arch.ops[l] = space.op_vocab[best];
  }
  validate_arch(arch);
  return arch;
}

}  // namespace seqnas
