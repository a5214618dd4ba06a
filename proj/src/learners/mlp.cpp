// Copyright 2026 The dlflow Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "learners/mlp.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <numeric>

#include "common/error.hpp"

namespace dlflow::learners {
namespace {

constexpr char kMagic[4] = {'D', 'L', 'F', 'W'};
constexpr uint32_t kFormatVersion = 1;

struct LayerCache {
  std::vector<double> input;
  std::vector<double> normed;    // zhat
  std::vector<double> pre_relu;  // y
  std::vector<double> mask;      // dropout scale per unit (0 or 1/(1-p))
  double inv_std = 1.0;
};

void softmax_inplace(std::vector<double>& v) {
  const double mx = *std::max_element(v.begin(), v.end());
  double sum = 0.0;
  for (double& x : v) {
    x = std::exp(x - mx);
    sum += x;
  }
  for (double& x : v) x /= sum;
}

// Forward pass for a single example; fills caches when requested.
std::vector<double> forward(const Mlp& net, std::span<const double> x,
                            std::vector<LayerCache>* caches, Rng* dropout_rng) {
  const auto& spec = net.spec();
  const auto params = net.params();
  std::vector<double> act(x.begin(), x.end());
  const std::size_t n = net.layout().size();
  for (std::size_t l = 0; l < n; ++l) {
    const LayerLayout& L = net.layout()[l];
    std::vector<double> z(L.rows);
    const double* w = params.data() + L.weight;
    for (std::size_t r = 0; r < L.rows; ++r) {
      double s = params[L.bias + r];
      const double* row = w + r * L.cols;
      for (std::size_t c = 0; c < L.cols; ++c) s += row[c] * act[c];
      z[r] = s;
    }
    if (l + 1 == n) {
      if (caches) (*caches)[l].input = std::move(act);
      return z;  // logits
    }
    LayerCache cache;
    std::vector<double> y = z;
    if (L.norm) {
      double mean = 0.0;
      for (double v : z) mean += v;
      mean /= static_cast<double>(L.rows);
      double var = 0.0;
      for (double v : z) var += (v - mean) * (v - mean);
      var /= static_cast<double>(L.rows);
      cache.inv_std = 1.0 / std::sqrt(var + Mlp::kNormEpsilon);
      cache.normed.resize(L.rows);
      for (std::size_t r = 0; r < L.rows; ++r) {
        cache.normed[r] = (z[r] - mean) * cache.inv_std;
        y[r] = params[L.gain + r] * cache.normed[r] + params[L.shift + r];
      }
    }
    std::vector<double> a(L.rows);
    for (std::size_t r = 0; r < L.rows; ++r) a[r] = y[r] > 0.0 ? y[r] : 0.0;
    if (dropout_rng != nullptr && spec.dropout > 0.0) {
      const double keep_scale = 1.0 / (1.0 - spec.dropout);
      cache.mask.resize(L.rows);
      for (std::size_t r = 0; r < L.rows; ++r) {
        cache.mask[r] = dropout_rng->bernoulli(spec.dropout) ? 0.0 : keep_scale;
        a[r] *= cache.mask[r];
      }
    }
    if (caches) {
      cache.input = std::move(act);
      cache.pre_relu = std::move(y);
      (*caches)[l] = std::move(cache);
    }
    act = std::move(a);
  }
  return act;
}

void put_u32(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u64(std::string& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

class Reader {
 public:
  explicit Reader(std::string_view data) : data_(data) {}
  uint64_t u(int bytes) {
    if (pos_ + static_cast<std::size_t>(bytes) > data_.size()) {
      fail(ErrorCode::kShapeMismatch, "truncated weight record");
    }
    uint64_t v = 0;
    for (int i = 0; i < bytes; ++i) {
      v |= static_cast<uint64_t>(static_cast<uint8_t>(data_[pos_ + i])) << (8 * i);
    }
    pos_ += static_cast<std::size_t>(bytes);
    return v;
  }
  std::string_view take(std::size_t n) {
    if (pos_ + n > data_.size()) fail(ErrorCode::kShapeMismatch, "truncated weight record");
    auto s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  [[nodiscard]] bool done() const { return pos_ == data_.size(); }

 private:
  std::string_view data_;
  std::size_t pos_ = 0;
};

}  // namespace

Mlp::Mlp(MlpSpec spec) : spec_(std::move(spec)) {
  if (spec_.dims.size() < 2) fail(ErrorCode::kShapeMismatch, "an MLP needs at least two widths");
  for (auto d : spec_.dims) {
    if (d == 0) fail(ErrorCode::kShapeMismatch, "layer width must be positive");
  }
  if (!(spec_.dropout >= 0.0 && spec_.dropout < 1.0)) {
    fail(ErrorCode::kInvalidArgument, "dropout must be in [0, 1)");
  }
  std::size_t off = 0;
  const std::size_t n = spec_.dims.size() - 1;
  for (std::size_t l = 0; l < n; ++l) {
    LayerLayout L;
    L.cols = spec_.dims[l];
    L.rows = spec_.dims[l + 1];
    L.weight = off;
    off += L.rows * L.cols;
    L.bias = off;
    off += L.rows;
    L.norm = spec_.layer_norm && l + 1 < n;
    if (L.norm) {
      L.gain = off;
      off += L.rows;
      L.shift = off;
      off += L.rows;
    }
    layout_.push_back(L);
  }
  params_.assign(off, 0.0);
  frozen_.assign(off, 0);
  for (const auto& L : layout_) {
    if (L.norm) std::fill_n(params_.begin() + static_cast<long>(L.gain), L.rows, 1.0);
  }
}

void Mlp::init(Rng& rng) {
  for (const auto& L : layout_) {
    const double scale = std::sqrt(2.0 / static_cast<double>(L.cols));
    for (std::size_t i = 0; i < L.rows * L.cols; ++i) {
      params_[L.weight + i] = frozen_[L.weight + i] ? 0.0 : rng.normal() * scale;
    }
    std::fill_n(params_.begin() + static_cast<long>(L.bias), L.rows, 0.0);
    if (L.norm) {
      std::fill_n(params_.begin() + static_cast<long>(L.gain), L.rows, 1.0);
      std::fill_n(params_.begin() + static_cast<long>(L.shift), L.rows, 0.0);
    }
  }
}

bool Mlp::is_weight(std::size_t i) const {
  return std::any_of(layout_.begin(), layout_.end(), [&](const LayerLayout& L) {
    return i >= L.weight && i < L.weight + L.rows * L.cols;
  });
}

void Mlp::check_example(const Example& ex) const {
  if (ex.x.size() != input_dim()) {
    fail(ErrorCode::kShapeMismatch, "input has " + std::to_string(ex.x.size()) +
                                        " features, model expects " + std::to_string(input_dim()));
  }
  if (ex.label < 0 || static_cast<std::size_t>(ex.label) >= output_dim()) {
    fail(ErrorCode::kShapeMismatch, "label out of range");
  }
}

std::vector<double> Mlp::predict_proba(std::span<const double> x) const {
  if (x.size() != input_dim()) fail(ErrorCode::kShapeMismatch, "input width mismatch");
  std::vector<double> logits = forward(*this, x, nullptr, nullptr);
  softmax_inplace(logits);
  return logits;
}

double Mlp::loss(std::span<const Example> batch) const {
  if (batch.empty()) fail(ErrorCode::kEmptyDataset, "empty batch");
  double total = 0.0;
  for (const auto& ex : batch) {
    check_example(ex);
    const auto p = predict_proba(ex.x);
    total -= std::log(std::max(p[static_cast<std::size_t>(ex.label)], 1e-300));
  }
  return total / static_cast<double>(batch.size());
}

double Mlp::gradient(std::span<const Example> batch, std::span<double> grad,
                     Rng* dropout_rng) const {
  if (batch.empty()) fail(ErrorCode::kEmptyDataset, "empty batch");
  if (grad.size() != params_.size()) fail(ErrorCode::kShapeMismatch, "gradient buffer size");
  std::fill(grad.begin(), grad.end(), 0.0);
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  const std::size_t n = layout_.size();
  double total = 0.0;
  std::vector<LayerCache> caches(n);
  for (const auto& ex : batch) {
    check_example(ex);
    std::vector<double> p = forward(*this, ex.x, &caches, dropout_rng);
    softmax_inplace(p);
    total -= std::log(std::max(p[static_cast<std::size_t>(ex.label)], 1e-300));

    // dL/dlogits for the mean loss
    std::vector<double> delta = std::move(p);
    delta[static_cast<std::size_t>(ex.label)] -= 1.0;
    for (double& d : delta) d *= inv_b;

    for (std::size_t li = n; li-- > 0;) {
      const LayerLayout& L = layout_[li];
      LayerCache& c = caches[li];
      if (li + 1 < n) {
        // delta currently holds dL/d(activation after dropout)
        for (std::size_t r = 0; r < L.rows; ++r) {
          double d = delta[r];
          if (!c.mask.empty()) d *= c.mask[r];
          delta[r] = c.pre_relu[r] > 0.0 ? d : 0.0;  // dL/dy
        }
        if (L.norm) {
          const double m = static_cast<double>(L.rows);
          double sum_dx = 0.0;
          double sum_dx_x = 0.0;
          std::vector<double> dxhat(L.rows);
          for (std::size_t r = 0; r < L.rows; ++r) {
            grad[L.gain + r] += delta[r] * c.normed[r];
            grad[L.shift + r] += delta[r];
            dxhat[r] = delta[r] * params_[L.gain + r];
            sum_dx += dxhat[r];
            sum_dx_x += dxhat[r] * c.normed[r];
          }
          for (std::size_t r = 0; r < L.rows; ++r) {
            delta[r] = c.inv_std / m * (m * dxhat[r] - sum_dx - c.normed[r] * sum_dx_x);
          }
        }
      }
      // delta is dL/dz for this layer
      const std::vector<double>& in = c.input;
      std::vector<double> prev(L.cols, 0.0);
      const double* w = params_.data() + L.weight;
      double* gw = grad.data() + L.weight;
      for (std::size_t r = 0; r < L.rows; ++r) {
        const double d = delta[r];
        grad[L.bias + r] += d;
        if (d == 0.0) continue;
        double* grow = gw + r * L.cols;
        const double* wrow = w + r * L.cols;
        for (std::size_t col = 0; col < L.cols; ++col) {
          grow[col] += d * in[col];
          prev[col] += d * wrow[col];
        }
      }
      delta = std::move(prev);
    }
  }
  return total * inv_b;
}

double Mlp::train_step(std::span<const Example> batch, double learning_rate, Rng& rng) {
  if (!std::isfinite(learning_rate) || learning_rate < 0.0) {
    fail(ErrorCode::kInvalidArgument, "learning rate must be finite and non-negative");
  }
  std::vector<double> grad(params_.size());
  const double l = gradient(batch, grad, &rng);
  if (!std::isfinite(l)) fail(ErrorCode::kNonFiniteLoss, "non-finite training loss");
  if (learning_rate == 0.0) return l;
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (!frozen_[i]) params_[i] -= learning_rate * grad[i];
  }
  for (double v : params_) {
    if (!std::isfinite(v)) fail(ErrorCode::kNonFiniteLoss, "non-finite parameter after update");
  }
  return l;
}

std::size_t Mlp::weight_count() const {
  std::size_t n = 0;
  for (const auto& L : layout_) n += L.rows * L.cols;
  return n;
}

std::size_t Mlp::zero_weight_count() const {
  std::size_t n = 0;
  for (const auto& L : layout_) {
    for (std::size_t i = 0; i < L.rows * L.cols; ++i) n += params_[L.weight + i] == 0.0 ? 1 : 0;
  }
  return n;
}

void Mlp::prune_magnitude(double fraction) {
  if (!(fraction >= 0.0 && fraction < 1.0)) {
    fail(ErrorCode::kInvalidFraction, "prune fraction must be in [0, 1)");
  }
  std::vector<std::size_t> idx;
  idx.reserve(weight_count());
  for (const auto& L : layout_) {
    for (std::size_t i = 0; i < L.rows * L.cols; ++i) idx.push_back(L.weight + i);
  }
  const auto count = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(idx.size())));
  if (count == 0) return;
  // Stable order: magnitude, then parameter index.
  std::nth_element(idx.begin(), idx.begin() + static_cast<long>(count - 1), idx.end(),
                   [&](std::size_t a, std::size_t b) {
                     const double ma = std::fabs(params_[a]);
                     const double mb = std::fabs(params_[b]);
                     return ma < mb || (ma == mb && a < b);
                   });
  for (std::size_t k = 0; k < count; ++k) {
    params_[idx[k]] = 0.0;
    frozen_[idx[k]] = 1;
  }
}

std::string Mlp::serialize() const {
  std::string out(kMagic, 4);
  put_u32(out, kFormatVersion);
  put_u32(out, static_cast<uint32_t>(spec_.dims.size()));
  for (auto d : spec_.dims) put_u64(out, d);
  out.push_back(spec_.layer_norm ? 1 : 0);
  put_u64(out, std::bit_cast<uint64_t>(spec_.dropout));
  put_u64(out, params_.size());
  for (double v : params_) put_u64(out, std::bit_cast<uint64_t>(v));
  out.append(reinterpret_cast<const char*>(frozen_.data()), frozen_.size());
  return out;
}

Mlp Mlp::deserialize(std::string_view bytes) {
  Reader rd(bytes);
  if (rd.take(4) != std::string_view(kMagic, 4)) fail(ErrorCode::kShapeMismatch, "bad weight magic");
  const auto version = static_cast<uint32_t>(rd.u(4));
  if (version != kFormatVersion) {
    fail(ErrorCode::kShapeMismatch, "unsupported weight format version " + std::to_string(version));
  }
  MlpSpec spec;
  const auto ndims = static_cast<uint32_t>(rd.u(4));
  if (ndims < 2 || ndims > 64) fail(ErrorCode::kShapeMismatch, "bad layer count");
  for (uint32_t i = 0; i < ndims; ++i) spec.dims.push_back(static_cast<std::size_t>(rd.u(8)));
  spec.layer_norm = rd.take(1)[0] != 0;
  spec.dropout = std::bit_cast<double>(rd.u(8));
  Mlp net(spec);
  const auto count = rd.u(8);
  if (count != net.params_.size()) fail(ErrorCode::kShapeMismatch, "parameter count mismatch");
  for (auto& v : net.params_) v = std::bit_cast<double>(rd.u(8));
  const auto mask = rd.take(net.frozen_.size());
  std::memcpy(net.frozen_.data(), mask.data(), mask.size());
  if (!rd.done()) fail(ErrorCode::kShapeMismatch, "trailing bytes in weight record");
  return net;
}

bool Mlp::operator==(const Mlp& other) const {
  return spec_.dims == other.spec_.dims && spec_.layer_norm == other.spec_.layer_norm &&
         std::bit_cast<uint64_t>(spec_.dropout) == std::bit_cast<uint64_t>(other.spec_.dropout) &&
         frozen_ == other.frozen_ &&
         std::equal(params_.begin(), params_.end(), other.params_.begin(), other.params_.end(),
                    [](double a, double b) { return std::bit_cast<uint64_t>(a) == std::bit_cast<uint64_t>(b); });
}

}  // namespace dlflow::learners
