#include "tbench/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "tbench/error.hpp"

namespace tbench {

namespace {

// out[oc] = bias[oc] + sum_ic conv3x3(in[ic], w[oc][ic]), zero padding.
// Planar row sweeps keep the inner loops contiguous for the vectorizer.
void conv3x3_forward(const double* in, int cin, int h, int w_,
                     const double* weight, const double* bias, int cout,
                     double* out) {
  const int plane = h * w_;
  for (int oc = 0; oc < cout; ++oc) {
    double* o = out + oc * plane;
    std::fill(o, o + plane, bias[oc]);
    for (int ic = 0; ic < cin; ++ic) {
      const double* src = in + ic * plane;
      const double* k = weight + (oc * cin + ic) * 9;
      for (int ky = 0; ky < 3; ++ky) {
        for (int kx = 0; kx < 3; ++kx) {
          double kv = k[ky * 3 + kx];
          if (kv == 0.0) continue;
          int dy = ky - 1, dx = kx - 1;
          int y0 = std::max(0, -dy), y1 = std::min(h, h - dy);
          int x0 = std::max(0, -dx), x1 = std::min(w_, w_ - dx);
          for (int y = y0; y < y1; ++y) {
            double* orow = o + y * w_;
            const double* srow = src + (y + dy) * w_ + dx;
            for (int x = x0; x < x1; ++x) orow[x] += kv * srow[x];
          }
        }
      }
    }
  }
}

// Accumulates dWeight/dBias and (optionally) dIn for one sample.
void conv3x3_backward(const double* in, int cin, int h, int w_,
                      const double* weight, int cout, const double* dout,
                      double* dweight, double* dbias, double* din) {
  const int plane = h * w_;
  for (int oc = 0; oc < cout; ++oc) {
    const double* dd = dout + oc * plane;
    double acc = 0.0;
    for (int i = 0; i < plane; ++i) acc += dd[i];
    dbias[oc] += acc;

    for (int ic = 0; ic < cin; ++ic) {
      const double* src = in + ic * plane;
      const double* k = weight + (oc * cin + ic) * 9;
      double* dk = dweight + (oc * cin + ic) * 9;
      double* dsrc = din ? din + ic * plane : nullptr;
      for (int ky = 0; ky < 3; ++ky) {
        for (int kx = 0; kx < 3; ++kx) {
          int dy = ky - 1, dx = kx - 1;
          int y0 = std::max(0, -dy), y1 = std::min(h, h - dy);
          int x0 = std::max(0, -dx), x1 = std::min(w_, w_ - dx);
          double grad_k = 0.0;
          double kv = k[ky * 3 + kx];
          for (int y = y0; y < y1; ++y) {
            const double* drow = dd + y * w_;
            const double* srow = src + (y + dy) * w_ + dx;
            for (int x = x0; x < x1; ++x) grad_k += drow[x] * srow[x];
            if (dsrc) {
              double* dsrow = dsrc + (y + dy) * w_ + dx;
              for (int x = x0; x < x1; ++x) dsrow[x] += drow[x] * kv;
            }
          }
          dk[ky * 3 + kx] += grad_k;
        }
      }
    }
  }
}

// 2x2/2 max pool over relu(pre); arg records the winning offset within the
// per-sample pre tensor so backward can route gradients exactly.
void maxpool2_forward(const double* pre, int c, int h, int w_, double* out,
                      int* arg) {
  const int ph = h / 2, pw = w_ / 2;
  for (int ch = 0; ch < c; ++ch) {
    const double* p = pre + ch * h * w_;
    double* o = out + ch * ph * pw;
    int* a = arg + ch * ph * pw;
    for (int y = 0; y < ph; ++y) {
      for (int x = 0; x < pw; ++x) {
        int base = (2 * y) * w_ + 2 * x;
        int offs[4] = {base, base + 1, base + w_, base + w_ + 1};
        double best = -1.0;  // relu output is >= 0
        int besto = offs[0];
        for (int i = 0; i < 4; ++i) {
          double v = p[offs[i]] > 0.0 ? p[offs[i]] : 0.0;
          if (v > best) { best = v; besto = offs[i]; }
        }
        o[y * pw + x] = best;
        a[y * pw + x] = ch * h * w_ + besto;
      }
    }
  }
}

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw NumericError(std::string("non-finite ") + what);
}

}  // namespace

const char* to_string(LayerName n) {
  switch (n) {
    case LayerName::conv1: return "conv1";
    case LayerName::conv2: return "conv2";
    case LayerName::dense1: return "dense1";
    case LayerName::head: return "head";
  }
  return "?";
}

LayerName layer_name_from_string(const std::string& s) {
  for (LayerName n : kLayerOrder)
    if (s == to_string(n)) return n;
  throw ConfigError("unknown layer name: " + s);
}

const char* to_string(HeadKind k) {
  return k == HeadKind::softmax_cross_entropy ? "softmax_cross_entropy"
                                              : "linear_svm_hinge";
}

HeadKind head_kind_from_string(const std::string& s) {
  if (s == "softmax_cross_entropy") return HeadKind::softmax_cross_entropy;
  if (s == "linear_svm_hinge") return HeadKind::linear_svm_hinge;
  throw ConfigError("unknown head kind: " + s);
}

void Architecture::validate() const {
  if (input_side < 8 || input_side % 4 != 0)
    throw ConfigError("architecture: input_side must be >= 8 and divisible by 4");
  if (input_channels != 1 && input_channels != 3)
    throw ConfigError("architecture: input_channels must be 1 or 3");
  if (conv1_channels < 1 || conv2_channels < 1 || dense1_units < 1)
    throw ConfigError("architecture: layer widths must be >= 1");
  if (num_classes < 2) throw ConfigError("architecture: need >= 2 classes");
}

std::uint64_t Architecture::hash() const {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "in=%dx%dx%d;conv1=%d;conv2=%d;dense1=%d;head=%d",
                input_channels, input_side, input_side, conv1_channels,
                conv2_channels, dense1_units, num_classes);
  return fnv1a64(buf);
}

LayerParams& ModelParams::layer(LayerName n) {
  switch (n) {
    case LayerName::conv1: return conv1;
    case LayerName::conv2: return conv2;
    case LayerName::dense1: return dense1;
    case LayerName::head: return head;
  }
  throw Error("bad layer");
}

const LayerParams& ModelParams::layer(LayerName n) const {
  return const_cast<ModelParams*>(this)->layer(n);
}

bool FreezeMask::trainable(LayerName n) const {
  switch (n) {
    case LayerName::conv1: return conv1;
    case LayerName::conv2: return conv2;
    case LayerName::dense1: return dense1;
    case LayerName::head: return head;
  }
  return false;
}

void FreezeMask::set_trainable(LayerName n, bool value) {
  switch (n) {
    case LayerName::conv1: conv1 = value; return;
    case LayerName::conv2: conv2 = value; return;
    case LayerName::dense1: dense1 = value; return;
    case LayerName::head: head = value; return;
  }
}

std::string FreezeMask::describe() const {
  std::string s;
  for (LayerName n : kLayerOrder) {
    if (!trainable(n)) continue;
    if (!s.empty()) s += ',';
    s += to_string(n);
  }
  return s.empty() ? "none" : s;
}

ModelParams init_model(const Architecture& arch, RngStream& rng) {
  arch.validate();
  ModelParams p;
  p.arch = arch;

  auto kaiming = [&rng](LayerParams& lp, std::size_t n_weights, std::size_t n_out,
                        std::size_t fan_in) {
    double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
    lp.weight.resize(n_weights);
    for (double& w : lp.weight) w = rng.uniform(-bound, bound);
    lp.bias.assign(n_out, 0.0);
  };

  std::size_t c1 = static_cast<std::size_t>(arch.conv1_channels);
  std::size_t c2 = static_cast<std::size_t>(arch.conv2_channels);
  std::size_t cin = static_cast<std::size_t>(arch.input_channels);
  std::size_t d1 = static_cast<std::size_t>(arch.dense1_units);
  std::size_t flat = static_cast<std::size_t>(arch.flatten_dim());
  std::size_t cls = static_cast<std::size_t>(arch.num_classes);

  kaiming(p.conv1, c1 * cin * 9, c1, cin * 9);
  kaiming(p.conv2, c2 * c1 * 9, c2, c1 * 9);
  kaiming(p.dense1, d1 * flat, d1, flat);
  kaiming(p.head, cls * d1, cls, d1);
  return p;
}

Gradients zero_gradients(const Architecture& arch) {
  Gradients g;
  g.arch = arch;
  auto zero = [](LayerParams& lp, std::size_t nw, std::size_t nb) {
    lp.weight.assign(nw, 0.0);
    lp.bias.assign(nb, 0.0);
  };
  std::size_t c1 = static_cast<std::size_t>(arch.conv1_channels);
  std::size_t c2 = static_cast<std::size_t>(arch.conv2_channels);
  std::size_t cin = static_cast<std::size_t>(arch.input_channels);
  std::size_t d1 = static_cast<std::size_t>(arch.dense1_units);
  std::size_t flat = static_cast<std::size_t>(arch.flatten_dim());
  std::size_t cls = static_cast<std::size_t>(arch.num_classes);
  zero(g.conv1, c1 * cin * 9, c1);
  zero(g.conv2, c2 * c1 * 9, c2);
  zero(g.dense1, d1 * flat, d1);
  zero(g.head, cls * d1, cls);
  return g;
}

ForwardCache forward_cached(const ModelParams& params, const Batch& batch) {
  const Architecture& a = params.arch;
  const int b = static_cast<int>(batch.size());
  if (b == 0) throw ShapeError("forward: empty batch");
  const int h = a.input_side, w = a.input_side;
  const int cin = a.input_channels;
  const int c1 = a.conv1_channels, c2 = a.conv2_channels;
  const int p1 = a.pool1_side(), p2 = a.pool2_side();
  const int d1 = a.dense1_units, cls = a.num_classes;
  const int flat = a.flatten_dim();

  for (const Image* img : batch.images) {
    if (img->height != h || img->width != w || img->channels != cin)
      throw ShapeError("forward: image dimensions do not match architecture");
  }

  ForwardCache f;
  f.batch = b;
  f.input.resize(static_cast<std::size_t>(b) * cin * h * w);
  f.conv1_pre.resize(static_cast<std::size_t>(b) * c1 * h * w);
  f.pool1_out.resize(static_cast<std::size_t>(b) * c1 * p1 * p1);
  f.pool1_arg.resize(f.pool1_out.size());
  f.conv2_pre.resize(static_cast<std::size_t>(b) * c2 * p1 * p1);
  f.pool2_out.resize(static_cast<std::size_t>(b) * c2 * p2 * p2);
  f.pool2_arg.resize(f.pool2_out.size());
  f.dense1_pre.resize(static_cast<std::size_t>(b) * d1);
  f.logits.resize(static_cast<std::size_t>(b) * cls);

  // HWC image -> planar CHW
  for (int s = 0; s < b; ++s) {
    const Image& img = *batch.images[static_cast<std::size_t>(s)];
    double* dst = f.input.data() + static_cast<std::size_t>(s) * cin * h * w;
    for (int c = 0; c < cin; ++c)
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
          dst[(c * h + y) * w + x] = img.at(y, x, c);
  }

  for (int s = 0; s < b; ++s) {
    const double* in = f.input.data() + static_cast<std::size_t>(s) * cin * h * w;
    double* c1pre = f.conv1_pre.data() + static_cast<std::size_t>(s) * c1 * h * w;
    conv3x3_forward(in, cin, h, w, params.conv1.weight.data(),
                    params.conv1.bias.data(), c1, c1pre);

    double* p1out = f.pool1_out.data() + static_cast<std::size_t>(s) * c1 * p1 * p1;
    int* p1arg = f.pool1_arg.data() + static_cast<std::size_t>(s) * c1 * p1 * p1;
    maxpool2_forward(c1pre, c1, h, w, p1out, p1arg);

    double* c2pre = f.conv2_pre.data() + static_cast<std::size_t>(s) * c2 * p1 * p1;
    conv3x3_forward(p1out, c1, p1, p1, params.conv2.weight.data(),
                    params.conv2.bias.data(), c2, c2pre);

    double* p2out = f.pool2_out.data() + static_cast<std::size_t>(s) * c2 * p2 * p2;
    int* p2arg = f.pool2_arg.data() + static_cast<std::size_t>(s) * c2 * p2 * p2;
    maxpool2_forward(c2pre, c2, p1, p1, p2out, p2arg);

    // dense1 (pre-activation) over the flattened pool2
    double* d1pre = f.dense1_pre.data() + static_cast<std::size_t>(s) * d1;
    for (int o = 0; o < d1; ++o) {
      const double* wrow = params.dense1.weight.data() + static_cast<std::size_t>(o) * flat;
      double acc = params.dense1.bias[static_cast<std::size_t>(o)];
      for (int i = 0; i < flat; ++i) acc += wrow[i] * p2out[i];
      d1pre[o] = acc;
    }

    double* lrow = f.logits.data() + static_cast<std::size_t>(s) * cls;
    for (int o = 0; o < cls; ++o) {
      const double* wrow = params.head.weight.data() + static_cast<std::size_t>(o) * d1;
      double acc = params.head.bias[static_cast<std::size_t>(o)];
      for (int i = 0; i < d1; ++i)
        acc += wrow[i] * (d1pre[i] > 0.0 ? d1pre[i] : 0.0);
      lrow[o] = acc;
      require_finite(acc, "logit");
    }
  }
  return f;
}

std::vector<double> forward(const ModelParams& params, const Batch& batch) {
  return forward_cached(params, batch).logits;
}

HeadLoss head_loss(HeadKind kind, const std::vector<double>& logits,
                   const std::vector<int>& labels, int num_classes) {
  const int cls = num_classes;
  const int b = static_cast<int>(labels.size());
  if (logits.size() != static_cast<std::size_t>(b) * cls)
    throw ShapeError("head_loss: logits/labels size mismatch");

  HeadLoss out;
  out.dlogits.assign(logits.size(), 0.0);
  double inv_b = 1.0 / static_cast<double>(b);

  if (kind == HeadKind::softmax_cross_entropy) {
    for (int s = 0; s < b; ++s) {
      const double* row = logits.data() + static_cast<std::size_t>(s) * cls;
      double* drow = out.dlogits.data() + static_cast<std::size_t>(s) * cls;
      int y = labels[static_cast<std::size_t>(s)];
      if (y < 0 || y >= cls) throw ShapeError("head_loss: label out of range");
      double m = row[0];
      for (int j = 1; j < cls; ++j) m = std::max(m, row[j]);
      double sum = 0.0;
      for (int j = 0; j < cls; ++j) sum += std::exp(row[j] - m);
      double log_z = m + std::log(sum);
      out.loss += (log_z - row[y]) * inv_b;
      for (int j = 0; j < cls; ++j) {
        double p = std::exp(row[j] - log_z);
        drow[j] = (p - (j == y ? 1.0 : 0.0)) * inv_b;
      }
    }
  } else {
    for (int s = 0; s < b; ++s) {
      const double* row = logits.data() + static_cast<std::size_t>(s) * cls;
      double* drow = out.dlogits.data() + static_cast<std::size_t>(s) * cls;
      int y = labels[static_cast<std::size_t>(s)];
      if (y < 0 || y >= cls) throw ShapeError("head_loss: label out of range");
      for (int j = 0; j < cls; ++j) {
        if (j == y) continue;
        double margin = 1.0 + row[j] - row[y];
        if (margin > 0.0) {
          out.loss += margin * inv_b;
          drow[j] += inv_b;
          drow[y] -= inv_b;
        }
      }
    }
  }
  require_finite(out.loss, "loss");
  return out;
}

Gradients backward(const ModelParams& params, const ForwardCache& f,
                   const std::vector<double>& dlogits) {
  const Architecture& a = params.arch;
  const int b = f.batch;
  const int h = a.input_side, w = a.input_side;
  const int cin = a.input_channels;
  const int c1 = a.conv1_channels, c2 = a.conv2_channels;
  const int p1 = a.pool1_side(), p2 = a.pool2_side();
  const int d1 = a.dense1_units, cls = a.num_classes;
  const int flat = a.flatten_dim();
  if (dlogits.size() != static_cast<std::size_t>(b) * cls)
    throw ShapeError("backward: dlogits size does not match cached batch");

  Gradients g = zero_gradients(a);

  std::vector<double> d_pool2(static_cast<std::size_t>(c2) * p2 * p2);
  std::vector<double> d_conv2pre(static_cast<std::size_t>(c2) * p1 * p1);
  std::vector<double> d_pool1(static_cast<std::size_t>(c1) * p1 * p1);
  std::vector<double> d_conv1pre(static_cast<std::size_t>(c1) * h * w);
  std::vector<double> d_dense1act(static_cast<std::size_t>(d1));

  for (int s = 0; s < b; ++s) {
    const double* drow = dlogits.data() + static_cast<std::size_t>(s) * cls;
    const double* d1pre = f.dense1_pre.data() + static_cast<std::size_t>(s) * d1;
    const double* p2out = f.pool2_out.data() + static_cast<std::size_t>(s) * c2 * p2 * p2;

    // head: dW = dlogits ⊗ relu(dense1_pre), d(act) = W^T dlogits
    std::fill(d_dense1act.begin(), d_dense1act.end(), 0.0);
    for (int o = 0; o < cls; ++o) {
      double dv = drow[o];
      g.head.bias[static_cast<std::size_t>(o)] += dv;
      double* gw = g.head.weight.data() + static_cast<std::size_t>(o) * d1;
      const double* wrow = params.head.weight.data() + static_cast<std::size_t>(o) * d1;
      for (int i = 0; i < d1; ++i) {
        double act = d1pre[i] > 0.0 ? d1pre[i] : 0.0;
        gw[i] += dv * act;
        d_dense1act[static_cast<std::size_t>(i)] += dv * wrow[i];
      }
    }

    // dense1: relu gate, then dW = dpre ⊗ pool2, din = W^T dpre
    std::fill(d_pool2.begin(), d_pool2.end(), 0.0);
    for (int o = 0; o < d1; ++o) {
      double dpre = d1pre[o] > 0.0 ? d_dense1act[static_cast<std::size_t>(o)] : 0.0;
      if (dpre == 0.0) continue;
      g.dense1.bias[static_cast<std::size_t>(o)] += dpre;
      double* gw = g.dense1.weight.data() + static_cast<std::size_t>(o) * flat;
      const double* wrow = params.dense1.weight.data() + static_cast<std::size_t>(o) * flat;
      for (int i = 0; i < flat; ++i) {
        gw[i] += dpre * p2out[i];
        d_pool2[static_cast<std::size_t>(i)] += dpre * wrow[i];
      }
    }

    // pool2 -> conv2_pre (argmax routing + relu gate)
    std::fill(d_conv2pre.begin(), d_conv2pre.end(), 0.0);
    const int* p2arg = f.pool2_arg.data() + static_cast<std::size_t>(s) * c2 * p2 * p2;
    const double* c2pre = f.conv2_pre.data() + static_cast<std::size_t>(s) * c2 * p1 * p1;
    for (std::size_t i = 0; i < d_pool2.size(); ++i) {
      int src = p2arg[i];
      if (c2pre[src] > 0.0) d_conv2pre[static_cast<std::size_t>(src)] += d_pool2[i];
    }

    // conv2 params + d(pool1)
    std::fill(d_pool1.begin(), d_pool1.end(), 0.0);
    const double* p1out = f.pool1_out.data() + static_cast<std::size_t>(s) * c1 * p1 * p1;
    conv3x3_backward(p1out, c1, p1, p1, params.conv2.weight.data(), c2,
                     d_conv2pre.data(), g.conv2.weight.data(),
                     g.conv2.bias.data(), d_pool1.data());

    // pool1 -> conv1_pre
    std::fill(d_conv1pre.begin(), d_conv1pre.end(), 0.0);
    const int* p1arg = f.pool1_arg.data() + static_cast<std::size_t>(s) * c1 * p1 * p1;
    const double* c1pre = f.conv1_pre.data() + static_cast<std::size_t>(s) * c1 * h * w;
    for (std::size_t i = 0; i < d_pool1.size(); ++i) {
      int src = p1arg[i];
      if (c1pre[src] > 0.0) d_conv1pre[static_cast<std::size_t>(src)] += d_pool1[i];
    }

    // conv1 params (input gradients are not needed)
    const double* in = f.input.data() + static_cast<std::size_t>(s) * cin * h * w;
    conv3x3_backward(in, cin, h, w, params.conv1.weight.data(), c1,
                     d_conv1pre.data(), g.conv1.weight.data(),
                     g.conv1.bias.data(), nullptr);
  }
  return g;
}

void apply_freeze(Gradients& grads, const FreezeMask& mask) {
  for (LayerName n : kLayerOrder) {
    if (mask.trainable(n)) continue;
    LayerParams& lp = grads.layer(n);
    std::fill(lp.weight.begin(), lp.weight.end(), 0.0);
    std::fill(lp.bias.begin(), lp.bias.end(), 0.0);
  }
}

ModelParams reinit_head(const ModelParams& trained, int target_classes,
                        RngStream& rng) {
  ModelParams out = trained;
  out.arch.num_classes = target_classes;
  out.arch.validate();
  std::size_t d1 = static_cast<std::size_t>(out.arch.dense1_units);
  double bound = std::sqrt(6.0 / static_cast<double>(d1));
  out.head.weight.resize(static_cast<std::size_t>(target_classes) * d1);
  for (double& w : out.head.weight) w = rng.uniform(-bound, bound);
  out.head.bias.assign(static_cast<std::size_t>(target_classes), 0.0);
  return out;
}

}  // namespace tbench
