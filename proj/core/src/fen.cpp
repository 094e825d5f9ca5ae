#include "ivfe/fen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include <Eigen/Dense>

#include "ivfe/error.hpp"

namespace ivfe {
namespace {

constexpr double kBnEps = 1e-5;

struct ConvRef {
  std::size_t weight = 0;
  std::size_t in = 0, out = 0, kernel = 3, stride = 1, pad = 1;
};

struct BnRef {
  std::size_t gamma = 0, beta = 0;  // params
  std::size_t mean = 0, var = 0;    // buffers
};

struct BlockRef {
  ConvRef conv1;
  BnRef bn1;
  ConvRef conv2;
  BnRef bn2;
  bool projected = false;
  ConvRef proj;
  BnRef proj_bn;
};

struct Layout {
  ConvRef stem;
  BnRef stem_bn;
  std::vector<BlockRef> blocks;
  std::size_t head_w = 0, head_b = 0;
};

// Declares every tensor in serialization order. With null sets only the
// indices are computed.
Layout plan(const FenArchitecture& arch, TensorSet* params, TensorSet* buffers) {
  std::size_t np = 0, nb = 0;
  auto param = [&](const std::string& name, std::vector<std::size_t> shape, double fill) {
    if (params) params->add(name, Tensor(std::move(shape), fill));
    return np++;
  };
  auto buffer = [&](const std::string& name, std::vector<std::size_t> shape, double fill) {
    if (buffers) buffers->add(name, Tensor(std::move(shape), fill));
    return nb++;
  };
  auto conv = [&](const std::string& name, std::size_t in, std::size_t out, std::size_t k,
                  std::size_t stride) {
    ConvRef c;
    c.weight = param(name + ".w", {out, in, k, k}, 0.0);
    c.in = in;
    c.out = out;
    c.kernel = k;
    c.stride = stride;
    c.pad = k / 2;
    return c;
  };
  auto bn = [&](const std::string& name, std::size_t ch) {
    BnRef b;
    b.gamma = param(name + ".gamma", {ch}, 1.0);
    b.beta = param(name + ".beta", {ch}, 0.0);
    b.mean = buffer(name + ".running_mean", {ch}, 0.0);
    b.var = buffer(name + ".running_var", {ch}, 1.0);
    return b;
  };

  Layout l;
  l.stem = conv("stem.conv", 1, arch.widths.front(), 3, 1);
  l.stem_bn = bn("stem.bn", arch.widths.front());
  std::size_t channels = arch.widths.front();
  for (std::size_t s = 0; s < arch.widths.size(); ++s) {
    for (std::size_t b = 0; b < arch.blocks; ++b) {
      const std::string prefix = "stage" + std::to_string(s + 1) + ".block" + std::to_string(b + 1);
      const std::size_t stride = (s > 0 && b == 0) ? 2 : 1;
      const std::size_t width = arch.widths[s];
      BlockRef blk;
      blk.conv1 = conv(prefix + ".conv1", channels, width, 3, stride);
      blk.bn1 = bn(prefix + ".bn1", width);
      blk.conv2 = conv(prefix + ".conv2", width, width, 3, 1);
      blk.bn2 = bn(prefix + ".bn2", width);
      blk.projected = stride != 1 || channels != width;
      if (blk.projected) {
        blk.proj = conv(prefix + ".proj", channels, width, 1, stride);
        blk.proj_bn = bn(prefix + ".proj_bn", width);
      }
      l.blocks.push_back(blk);
      channels = width;
    }
  }
  l.head_w = param("head.w", {arch.classes, arch.feature_dim}, 0.0);
  l.head_b = param("head.b", {arch.classes}, 0.0);
  return l;
}

// ---- primitive layers on NCHW tensors --------------------------------------

std::size_t out_extent(std::size_t in, const ConvRef& c) {
  return (in + 2 * c.pad - c.kernel) / c.stride + 1;
}

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMatrix>;
using ConstMatMap = Eigen::Map<const RowMatrix>;

// Output columns [lo, hi) whose input column q*stride + k_off - pad is in
// range.
std::pair<std::size_t, std::size_t> valid_cols(std::size_t in_extent, std::size_t out_ext, std::size_t k_off,
                                               const ConvRef& c) {
  const auto s = static_cast<long>(c.stride);
  const auto shift = static_cast<long>(k_off) - static_cast<long>(c.pad);
  long lo = shift < 0 ? (-shift + s - 1) / s : 0;
  long hi = static_cast<long>(in_extent) - 1 - shift;
  hi = hi < 0 ? 0 : std::min(hi / s + 1, static_cast<long>(out_ext));
  lo = std::min(lo, hi);
  return {static_cast<std::size_t>(lo), static_cast<std::size_t>(hi)};
}

// Unfolds one image (ch x h x wd) into rows (i, kh, kw) and columns
// (r, q) of the output grid; out-of-range taps read as zero.
void im2col(const double* in, std::size_t ch, std::size_t h, std::size_t wd, const ConvRef& c, std::size_t oh,
            std::size_t ow, double* col) {
  const std::size_t k = c.kernel;
  for (std::size_t i = 0; i < ch; ++i) {
    for (std::size_t kh = 0; kh < k; ++kh) {
      for (std::size_t kw = 0; kw < k; ++kw) {
        double* dst = col + ((i * k + kh) * k + kw) * oh * ow;
        for (std::size_t r = 0; r < oh; ++r) {
          const long ir = static_cast<long>(r * c.stride + kh) - static_cast<long>(c.pad);
          double* drow = dst + r * ow;
          if (ir < 0 || ir >= static_cast<long>(h)) {
            std::fill(drow, drow + ow, 0.0);
            continue;
          }
          const double* src = in + (i * h + static_cast<std::size_t>(ir)) * wd;
          const auto [q0, q1] = valid_cols(wd, ow, kw, c);
          std::fill(drow, drow + q0, 0.0);
          std::fill(drow + q1, drow + ow, 0.0);
          const double* s0 = src + (q0 * c.stride + kw - c.pad);
          if (c.stride == 1) {
            std::copy(s0, s0 + (q1 - q0), drow + q0);
          } else {
            for (std::size_t q = q0; q < q1; ++q) drow[q] = s0[(q - q0) * c.stride];
          }
        }
      }
    }
  }
}

// Adjoint of im2col: scatters column gradients back onto the image.
void col2im(const double* col, std::size_t ch, std::size_t h, std::size_t wd, const ConvRef& c, std::size_t oh,
            std::size_t ow, double* out) {
  const std::size_t k = c.kernel;
  for (std::size_t i = 0; i < ch; ++i) {
    for (std::size_t kh = 0; kh < k; ++kh) {
      for (std::size_t kw = 0; kw < k; ++kw) {
        const double* src = col + ((i * k + kh) * k + kw) * oh * ow;
        for (std::size_t r = 0; r < oh; ++r) {
          const long ir = static_cast<long>(r * c.stride + kh) - static_cast<long>(c.pad);
          if (ir < 0 || ir >= static_cast<long>(h)) continue;
          double* drow = out + (i * h + static_cast<std::size_t>(ir)) * wd;
          const double* srow = src + r * ow;
          const auto [q0, q1] = valid_cols(wd, ow, kw, c);
          double* d0 = drow + (q0 * c.stride + kw - c.pad);
          for (std::size_t q = q0; q < q1; ++q) d0[(q - q0) * c.stride] += srow[q];
        }
      }
    }
  }
}

Tensor conv_forward(const Tensor& x, const Tensor& w, const ConvRef& c) {
  const std::size_t n = x.shape[0], ch = x.shape[1], h = x.shape[2], wd = x.shape[3];
  if (ch != c.in) throw Error(ErrorCode::kShapeMismatch, "convolution input channels mismatch");
  const std::size_t oh = out_extent(h, c), ow = out_extent(wd, c), kk = ch * c.kernel * c.kernel;
  const auto pixels = static_cast<Eigen::Index>(oh * ow);
  Tensor y({n, c.out, oh, ow});
  std::vector<double> col(kk * oh * ow);
  const ConstMatMap wm(w.data.data(), static_cast<Eigen::Index>(c.out), static_cast<Eigen::Index>(kk));
  for (std::size_t b = 0; b < n; ++b) {
    im2col(&x.data[b * ch * h * wd], ch, h, wd, c, oh, ow, col.data());
    MatMap ym(&y.data[b * c.out * oh * ow], static_cast<Eigen::Index>(c.out), pixels);
    ym.noalias() = wm * ConstMatMap(col.data(), static_cast<Eigen::Index>(kk), pixels);
  }
  return y;
}

// Accumulates the weight gradient into dw and, when dx is given, writes the
// input gradient.
void conv_backward(const Tensor& x, const Tensor& w, const Tensor& dy, const ConvRef& c, Tensor& dw,
                   Tensor* dx) {
  const std::size_t n = x.shape[0], ch = x.shape[1], h = x.shape[2], wd = x.shape[3];
  const std::size_t oh = dy.shape[2], ow = dy.shape[3], kk = ch * c.kernel * c.kernel;
  const auto pixels = static_cast<Eigen::Index>(oh * ow);
  const auto rows = static_cast<Eigen::Index>(kk);
  const auto outs = static_cast<Eigen::Index>(c.out);
  if (dx) *dx = Tensor(x.shape);
  std::vector<double> col(kk * oh * ow), dcol(dx ? kk * oh * ow : 0);
  const ConstMatMap wm(w.data.data(), outs, rows);
  MatMap dwm(dw.data.data(), outs, rows);
  for (std::size_t b = 0; b < n; ++b) {
    const ConstMatMap g(&dy.data[b * c.out * oh * ow], outs, pixels);
    im2col(&x.data[b * ch * h * wd], ch, h, wd, c, oh, ow, col.data());
    dwm.noalias() += g * ConstMatMap(col.data(), rows, pixels).transpose();
    if (dx) {
      MatMap(dcol.data(), rows, pixels).noalias() = wm.transpose() * g;
      col2im(dcol.data(), ch, h, wd, c, oh, ow, &dx->data[b * ch * h * wd]);
    }
  }
}

struct BnCache {
  Tensor xhat;
  std::vector<double> inv_std;
};

// Training-mode batch norm. Writes batch mean and unbiased variance.
Tensor bn_train(const Tensor& x, const Tensor& gamma, const Tensor& beta, BnCache& cache,
                Tensor& mean_out, Tensor& var_out) {
  const std::size_t n = x.shape[0], ch = x.shape[1], hw = x.shape[2] * x.shape[3];
  const double m = static_cast<double>(n * hw);
  Tensor y(x.shape);
  cache.xhat = Tensor(x.shape);
  cache.inv_std.assign(ch, 0.0);
  mean_out = Tensor({ch});
  var_out = Tensor({ch});
  for (std::size_t c = 0; c < ch; ++c) {
    double sum = 0.0;
    for (std::size_t b = 0; b < n; ++b) {
      const double* p = &x.data[(b * ch + c) * hw];
      for (std::size_t i = 0; i < hw; ++i) sum += p[i];
    }
    const double mean = sum / m;
    double sq = 0.0;
    for (std::size_t b = 0; b < n; ++b) {
      const double* p = &x.data[(b * ch + c) * hw];
      for (std::size_t i = 0; i < hw; ++i) sq += (p[i] - mean) * (p[i] - mean);
    }
    const double var = sq / m;
    const double inv = 1.0 / std::sqrt(var + kBnEps);
    cache.inv_std[c] = inv;
    mean_out.data[c] = mean;
    var_out.data[c] = m > 1.0 ? sq / (m - 1.0) : var;
    for (std::size_t b = 0; b < n; ++b) {
      const std::size_t base = (b * ch + c) * hw;
      for (std::size_t i = 0; i < hw; ++i) {
        const double xh = (x.data[base + i] - mean) * inv;
        cache.xhat.data[base + i] = xh;
        y.data[base + i] = gamma.data[c] * xh + beta.data[c];
      }
    }
  }
  return y;
}

Tensor bn_backward(const Tensor& dy, const BnCache& cache, const Tensor& gamma, Tensor& dgamma,
                   Tensor& dbeta) {
  const std::size_t n = dy.shape[0], ch = dy.shape[1], hw = dy.shape[2] * dy.shape[3];
  const double m = static_cast<double>(n * hw);
  Tensor dx(dy.shape);
  for (std::size_t c = 0; c < ch; ++c) {
    double sum_dy = 0.0, sum_dy_xhat = 0.0;
    for (std::size_t b = 0; b < n; ++b) {
      const std::size_t base = (b * ch + c) * hw;
      for (std::size_t i = 0; i < hw; ++i) {
        sum_dy += dy.data[base + i];
        sum_dy_xhat += dy.data[base + i] * cache.xhat.data[base + i];
      }
    }
    dgamma.data[c] += sum_dy_xhat;
    dbeta.data[c] += sum_dy;
    const double scale = gamma.data[c] * cache.inv_std[c] / m;
    for (std::size_t b = 0; b < n; ++b) {
      const std::size_t base = (b * ch + c) * hw;
      for (std::size_t i = 0; i < hw; ++i) {
        dx.data[base + i] =
            scale * (m * dy.data[base + i] - sum_dy - cache.xhat.data[base + i] * sum_dy_xhat);
      }
    }
  }
  return dx;
}

void bn_eval_inplace(Tensor& x, const Tensor& gamma, const Tensor& beta, const Tensor& mean,
                     const Tensor& var) {
  const std::size_t n = x.shape[0], ch = x.shape[1], hw = x.shape[2] * x.shape[3];
  for (std::size_t c = 0; c < ch; ++c) {
    const double scale = gamma.data[c] / std::sqrt(var.data[c] + kBnEps);
    const double shift = beta.data[c] - mean.data[c] * scale;
    for (std::size_t b = 0; b < n; ++b) {
      double* p = &x.data[(b * ch + c) * hw];
      for (std::size_t i = 0; i < hw; ++i) p[i] = p[i] * scale + shift;
    }
  }
}

void relu_inplace(Tensor& x) {
  for (auto& v : x.data) v = v > 0.0 ? v : 0.0;
}

void relu_backward_inplace(Tensor& grad, const Tensor& out) {
  for (std::size_t i = 0; i < grad.data.size(); ++i) {
    if (!(out.data[i] > 0.0)) grad.data[i] = 0.0;
  }
}

void add_inplace(Tensor& a, const Tensor& b) {
  for (std::size_t i = 0; i < a.data.size(); ++i) a.data[i] += b.data[i];
}

// ---- network passes ---------------------------------------------------------

struct BlockTape {
  Tensor input;
  BnCache bn1;
  Tensor r1;  // after bn1 + relu
  BnCache bn2;
  BnCache proj_bn;
  Tensor output;
};

struct Tape {
  Tensor input;
  BnCache stem_bn;
  Tensor stem_out;
  std::vector<BlockTape> blocks;
  Tensor pooled;  // [N, F]
};

// Training mode when tape != nullptr (batch statistics, recorded into stats).
Tensor apply_bn(const FenModel& m, const BnRef& ref, const Tensor& x, BnCache* cache, TensorSet* stats) {
  if (cache) {
    return bn_train(x, m.params[ref.gamma], m.params[ref.beta], *cache, (*stats)[ref.mean],
                    (*stats)[ref.var]);
  }
  Tensor y = x;
  bn_eval_inplace(y, m.params[ref.gamma], m.params[ref.beta], m.buffers[ref.mean], m.buffers[ref.var]);
  return y;
}

Tensor block_forward(const FenModel& m, const BlockRef& blk, const Tensor& x, BlockTape* tape,
                     TensorSet* stats) {
  Tensor h = conv_forward(x, m.params[blk.conv1.weight], blk.conv1);
  h = apply_bn(m, blk.bn1, h, tape ? &tape->bn1 : nullptr, stats);
  relu_inplace(h);
  Tensor y = conv_forward(h, m.params[blk.conv2.weight], blk.conv2);
  if (tape) tape->r1 = std::move(h);
  y = apply_bn(m, blk.bn2, y, tape ? &tape->bn2 : nullptr, stats);
  if (blk.projected) {
    Tensor s = conv_forward(x, m.params[blk.proj.weight], blk.proj);
    s = apply_bn(m, blk.proj_bn, s, tape ? &tape->proj_bn : nullptr, stats);
    add_inplace(y, s);
  } else {
    add_inplace(y, x);
  }
  relu_inplace(y);
  if (tape) {
    tape->input = x;
    tape->output = y;
  }
  return y;
}

// Returns pooled features [N, F].
Tensor body_forward(const FenModel& m, const Layout& l, const Tensor& x, Tape* tape, TensorSet* stats) {
  Tensor h = conv_forward(x, m.params[l.stem.weight], l.stem);
  h = apply_bn(m, l.stem_bn, h, tape ? &tape->stem_bn : nullptr, stats);
  relu_inplace(h);
  if (tape) {
    tape->input = x;
    tape->stem_out = h;
    tape->blocks.resize(l.blocks.size());
  }
  for (std::size_t i = 0; i < l.blocks.size(); ++i) {
    h = block_forward(m, l.blocks[i], h, tape ? &tape->blocks[i] : nullptr, stats);
  }
  const std::size_t n = h.shape[0], ch = h.shape[1], hw = h.shape[2] * h.shape[3];
  Tensor pooled({n, ch});
  for (std::size_t b = 0; b < n; ++b) {
    for (std::size_t c = 0; c < ch; ++c) {
      const double* p = &h.data[(b * ch + c) * hw];
      double sum = 0.0;
      for (std::size_t i = 0; i < hw; ++i) sum += p[i];
      pooled.data[b * ch + c] = sum / static_cast<double>(hw);
    }
  }
  if (tape) tape->pooled = pooled;
  return pooled;
}

Tensor head_forward(const FenModel& m, const Layout& l, const Tensor& pooled) {
  const std::size_t n = pooled.shape[0], f = pooled.shape[1], k = m.architecture.classes;
  const Tensor& w = m.params[l.head_w];
  const Tensor& bias = m.params[l.head_b];
  Tensor logits({n, k});
  for (std::size_t b = 0; b < n; ++b) {
    for (std::size_t c = 0; c < k; ++c) {
      double acc = bias.data[c];
      for (std::size_t j = 0; j < f; ++j) acc += w.data[c * f + j] * pooled.data[b * f + j];
      logits.data[b * k + c] = acc;
    }
  }
  return logits;
}

Tensor bn_backward_ref(const FenModel& m, const BnRef& ref, const Tensor& dy, const BnCache& cache,
                       TensorSet& grads) {
  return bn_backward(dy, cache, m.params[ref.gamma], grads[ref.gamma], grads[ref.beta]);
}

Tensor block_backward(const FenModel& m, const BlockRef& blk, const BlockTape& tape, Tensor grad,
                      TensorSet& grads) {
  relu_backward_inplace(grad, tape.output);
  // Residual branch.
  Tensor g = bn_backward_ref(m, blk.bn2, grad, tape.bn2, grads);
  Tensor dr1;
  conv_backward(tape.r1, m.params[blk.conv2.weight], g, blk.conv2, grads[blk.conv2.weight], &dr1);
  relu_backward_inplace(dr1, tape.r1);
  g = bn_backward_ref(m, blk.bn1, dr1, tape.bn1, grads);
  Tensor dx;
  conv_backward(tape.input, m.params[blk.conv1.weight], g, blk.conv1, grads[blk.conv1.weight], &dx);
  // Skip path.
  if (blk.projected) {
    Tensor gs = bn_backward_ref(m, blk.proj_bn, grad, tape.proj_bn, grads);
    Tensor dxs;
    conv_backward(tape.input, m.params[blk.proj.weight], gs, blk.proj, grads[blk.proj.weight], &dxs);
    add_inplace(dx, dxs);
  } else {
    add_inplace(dx, grad);
  }
  return dx;
}

Tensor images_to_batch(std::span<const GrayImage* const> images) {
  if (images.empty()) throw Error(ErrorCode::kShapeMismatch, "empty batch");
  const std::size_t side = images.front()->side;
  Tensor x({images.size(), 1, side, side});
  for (std::size_t b = 0; b < images.size(); ++b) {
    const GrayImage& img = *images[b];
    if (img.side != side) throw Error(ErrorCode::kShapeMismatch, "batch mixes image sides");
    if (img.pixels.size() != side * side || side == 0) {
      throw Error(ErrorCode::kShapeMismatch, "image pixel count does not match its side");
    }
    std::copy(img.pixels.begin(), img.pixels.end(), x.data.begin() + static_cast<std::ptrdiff_t>(b * side * side));
  }
  return x;
}

}  // namespace

void FenArchitecture::validate() const {
  if (blocks < 1) throw Error(ErrorCode::kInvalidArgument, "blocks must be >= 1");
  if (widths.empty()) throw Error(ErrorCode::kInvalidArgument, "widths must be nonempty");
  for (auto w : widths) {
    if (w == 0) throw Error(ErrorCode::kInvalidArgument, "widths must be positive");
  }
  if (feature_dim != widths.back()) {
    throw Error(ErrorCode::kInvalidArgument, "feature_dim must equal the last stage width");
  }
  if (feature_dim < 8) throw Error(ErrorCode::kInvalidArgument, "feature_dim must be >= 8");
  if (classes != 4) throw Error(ErrorCode::kInvalidArgument, "classes must be 4");
  if (min_side < 1) throw Error(ErrorCode::kInvalidArgument, "min_side must be >= 1");
}

FenArchitecture architecture_for_depth(std::size_t depth) {
  if (depth < 1 || depth > 5) throw Error(ErrorCode::kInvalidArgument, "depth index must be in 1..5");
  FenArchitecture arch;
  arch.blocks = depth;
  return arch;
}

std::size_t residual_block_count(const FenArchitecture& arch) noexcept {
  return arch.blocks * arch.widths.size();
}

FenModel init_model(const FenArchitecture& arch, std::uint64_t seed, HeadInit head) {
  arch.validate();
  FenModel model;
  model.architecture = arch;
  model.rng_seed = seed;
  const Layout l = plan(arch, &model.params, &model.buffers);

  std::mt19937_64 rng(seed);
  auto he_fill = [&](const ConvRef& c) {
    std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / static_cast<double>(c.in * c.kernel * c.kernel)));
    for (auto& v : model.params[c.weight].data) v = dist(rng);
  };
  he_fill(l.stem);
  for (const auto& blk : l.blocks) {
    he_fill(blk.conv1);
    he_fill(blk.conv2);
    if (blk.projected) he_fill(blk.proj);
  }
  if (head == HeadInit::kRandom) {
    const double limit = std::sqrt(6.0 / static_cast<double>(arch.feature_dim + arch.classes));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (auto& v : model.params[l.head_w].data) v = dist(rng);
  }
  return model;
}

std::array<double, 4> softmax(const std::array<double, 4>& logits) noexcept {
  const double mx = *std::max_element(logits.begin(), logits.end());
  std::array<double, 4> p{};
  double total = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    p[i] = std::exp(logits[i] - mx);
    total += p[i];
  }
  for (auto& v : p) v /= total;
  return p;
}

ForwardResult forward(const FenModel& model, const GrayImage& image) {
  if (image.side < model.architecture.min_side) {
    throw Error(ErrorCode::kShapeMismatch, "image side " + std::to_string(image.side) +
                                               " below minimum " +
                                               std::to_string(model.architecture.min_side));
  }
  const Layout l = plan(model.architecture, nullptr, nullptr);
  const GrayImage* ptr = &image;
  const Tensor x = images_to_batch({&ptr, 1});
  const Tensor pooled = body_forward(model, l, x, nullptr, nullptr);
  const Tensor logits = head_forward(model, l, pooled);
  ForwardResult out;
  std::copy_n(logits.data.begin(), 4, out.logits.begin());
  out.features = pooled.data;
  return out;
}

std::vector<double> extract_features(const FenModel& model, const GrayImage& image) {
  return forward(model, image).features;
}

LossAndGrad loss_and_grad(const FenModel& model, std::span<const LabeledImage> batch) {
  if (batch.empty()) throw Error(ErrorCode::kShapeMismatch, "empty batch");
  std::vector<const GrayImage*> images;
  images.reserve(batch.size());
  for (const auto& item : batch) {
    if (item.label < 1 || item.label > 4) {
      throw Error(ErrorCode::kInvalidArgument, "label " + std::to_string(item.label) + " outside 1..4");
    }
    images.push_back(&item.image);
  }
  const Layout l = plan(model.architecture, nullptr, nullptr);
  const Tensor x = images_to_batch(images);

  LossAndGrad out;
  out.grads = model.params.zeros_like();
  out.batch_stats = model.buffers.zeros_like();
  Tape tape;
  const Tensor pooled = body_forward(model, l, x, &tape, &out.batch_stats);
  const Tensor logits = head_forward(model, l, pooled);

  const std::size_t n = batch.size(), k = model.architecture.classes, f = pooled.shape[1];
  Tensor dlogits({n, k});
  double loss = 0.0;
  for (std::size_t b = 0; b < n; ++b) {
    std::array<double, 4> z{};
    std::copy_n(logits.data.begin() + static_cast<std::ptrdiff_t>(b * k), 4, z.begin());
    const auto p = softmax(z);
    const auto y = static_cast<std::size_t>(batch[b].label - 1);
    const double mx = *std::max_element(z.begin(), z.end());
    double lse = 0.0;
    for (double v : z) lse += std::exp(v - mx);
    loss += std::log(lse) + mx - z[y];
    for (std::size_t c = 0; c < k; ++c) {
      dlogits.data[b * k + c] = (p[c] - (c == y ? 1.0 : 0.0)) / static_cast<double>(n);
    }
  }
  out.loss = loss / static_cast<double>(n);

  // Head.
  const Tensor& w = model.params[l.head_w];
  Tensor& dw = out.grads[l.head_w];
  Tensor& db = out.grads[l.head_b];
  Tensor dpooled({n, f});
  for (std::size_t b = 0; b < n; ++b) {
    for (std::size_t c = 0; c < k; ++c) {
      const double g = dlogits.data[b * k + c];
      db.data[c] += g;
      for (std::size_t j = 0; j < f; ++j) {
        dw.data[c * f + j] += g * pooled.data[b * f + j];
        dpooled.data[b * f + j] += g * w.data[c * f + j];
      }
    }
  }

  // Global average pooling.
  const Tensor& last = l.blocks.empty() ? tape.stem_out : tape.blocks.back().output;
  const std::size_t hw = last.shape[2] * last.shape[3];
  Tensor grad(last.shape);
  for (std::size_t b = 0; b < n; ++b) {
    for (std::size_t c = 0; c < f; ++c) {
      const double g = dpooled.data[b * f + c] / static_cast<double>(hw);
      double* p = &grad.data[(b * f + c) * hw];
      for (std::size_t i = 0; i < hw; ++i) p[i] = g;
    }
  }

  for (std::size_t i = l.blocks.size(); i-- > 0;) {
    grad = block_backward(model, l.blocks[i], tape.blocks[i], std::move(grad), out.grads);
  }
  relu_backward_inplace(grad, tape.stem_out);
  grad = bn_backward_ref(model, l.stem_bn, grad, tape.stem_bn, out.grads);
  conv_backward(tape.input, model.params[l.stem.weight], grad, l.stem, out.grads[l.stem.weight], nullptr);
  return out;
}

void zero_residual_branches(FenModel& model) {
  const Layout l = plan(model.architecture, nullptr, nullptr);
  for (const auto& blk : l.blocks) {
    for (std::size_t idx : {blk.conv1.weight, blk.conv2.weight, blk.bn1.gamma, blk.bn1.beta,
                            blk.bn2.gamma, blk.bn2.beta}) {
      std::fill(model.params[idx].data.begin(), model.params[idx].data.end(), 0.0);
    }
  }
}

Tensor residual_block_forward(const FenModel& model, std::size_t block_index, const Tensor& input) {
  const Layout l = plan(model.architecture, nullptr, nullptr);
  if (block_index >= l.blocks.size()) throw Error(ErrorCode::kInvalidArgument, "block index out of range");
  if (input.shape.size() != 4 || !input.consistent()) {
    throw Error(ErrorCode::kShapeMismatch, "block input must be a consistent NCHW tensor");
  }
  return block_forward(model, l.blocks[block_index], input, nullptr, nullptr);
}

}  // namespace ivfe
