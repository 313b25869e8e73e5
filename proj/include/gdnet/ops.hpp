#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <tuple>
#include <vector>

#include "gdnet/errors.hpp"
#include "gdnet/tensor.hpp"

// Core differentiable primitives. Every forward has an explicit backward; no
// autodiff graph. Convolution is cross-correlation with zero "same" padding.

namespace gdnet {

enum class Activation { kRelu, kSigmoid };

namespace detail {

template <typename T>
inline void check_conv_shapes(const TensorT<T>& input,
                              const TensorT<T>& kernel) {
  if (input.rank() != 3 || kernel.rank() != 4) {
    throw dimension_error("conv2d_same: input must be c*H*W, kernel n*c*k*k");
  }
  if (kernel.dim(1) != input.dim(0)) {
    throw dimension_error("conv2d_same: channel mismatch " +
                          shape_str(input.shape()) + " vs " +
                          shape_str(kernel.shape()));
  }
  if (kernel.dim(2) != kernel.dim(3)) {
    throw dimension_error("conv2d_same: kernel must be square");
  }
  if (kernel.dim(2) % 2 == 0) {
    throw config_error("conv2d_same: kernel size must be odd");
  }
}

}  // namespace detail

namespace detail {

// Lowered patch matrix: row (i*k*k + ky*k + kx) holds the input channel i
// shifted by (ky-p, kx-p) with zero padding, flattened over the h*w output
// positions. Long contiguous rows keep the convolution inner loops
// vectorizable regardless of how small the spatial extent is.
template <typename T>
void im2col(const TensorT<T>& input, std::size_t k, std::vector<T>& col) {
  const std::size_t c = input.dim(0), h = input.dim(1), w = input.dim(2);
  const std::ptrdiff_t p = static_cast<std::ptrdiff_t>(k / 2);
  const std::ptrdiff_t hh = static_cast<std::ptrdiff_t>(h);
  const std::ptrdiff_t ww = static_cast<std::ptrdiff_t>(w);
  col.assign(c * k * k * h * w, T(0));
  for (std::size_t i = 0; i < c; ++i) {
    const T* iplane = input.data() + i * h * w;
    for (std::size_t ky = 0; ky < k; ++ky) {
      const std::ptrdiff_t dy = static_cast<std::ptrdiff_t>(ky) - p;
      for (std::size_t kx = 0; kx < k; ++kx) {
        const std::ptrdiff_t dx = static_cast<std::ptrdiff_t>(kx) - p;
        T* crow = col.data() + ((i * k + ky) * k + kx) * h * w;
        const std::ptrdiff_t y0 = std::max<std::ptrdiff_t>(0, -dy);
        const std::ptrdiff_t y1 = std::min<std::ptrdiff_t>(hh, hh - dy);
        const std::ptrdiff_t x0 = std::max<std::ptrdiff_t>(0, -dx);
        const std::ptrdiff_t x1 = std::min<std::ptrdiff_t>(ww, ww - dx);
        for (std::ptrdiff_t y = y0; y < y1; ++y) {
          const T* irow = iplane + (y + dy) * ww + dx;
          T* orow = crow + y * ww;
          for (std::ptrdiff_t x = x0; x < x1; ++x) orow[x] = irow[x];
        }
      }
    }
  }
}

// Scatter-add transpose of im2col.
template <typename T>
void col2im_add(const std::vector<T>& col, std::size_t c, std::size_t h,
                std::size_t w, std::size_t k, T* out) {
  const std::ptrdiff_t p = static_cast<std::ptrdiff_t>(k / 2);
  const std::ptrdiff_t hh = static_cast<std::ptrdiff_t>(h);
  const std::ptrdiff_t ww = static_cast<std::ptrdiff_t>(w);
  for (std::size_t i = 0; i < c; ++i) {
    T* oplane = out + i * h * w;
    for (std::size_t ky = 0; ky < k; ++ky) {
      const std::ptrdiff_t dy = static_cast<std::ptrdiff_t>(ky) - p;
      for (std::size_t kx = 0; kx < k; ++kx) {
        const std::ptrdiff_t dx = static_cast<std::ptrdiff_t>(kx) - p;
        const T* crow = col.data() + ((i * k + ky) * k + kx) * h * w;
        const std::ptrdiff_t y0 = std::max<std::ptrdiff_t>(0, -dy);
        const std::ptrdiff_t y1 = std::min<std::ptrdiff_t>(hh, hh - dy);
        const std::ptrdiff_t x0 = std::max<std::ptrdiff_t>(0, -dx);
        const std::ptrdiff_t x1 = std::min<std::ptrdiff_t>(ww, ww - dx);
        for (std::ptrdiff_t y = y0; y < y1; ++y) {
          T* orow = oplane + (y + dy) * ww + dx;
          const T* irow = crow + y * ww;
          for (std::ptrdiff_t x = x0; x < x1; ++x) orow[x] += irow[x];
        }
      }
    }
  }
}

}  // namespace detail

// out[o][y][x] = sum_{i,ky,kx} in[i][y+ky-p][x+kx-p] * W[o][i][ky][kx],
// zero outside the input, p = (k-1)/2. Computed as kernel * im2col(input).
template <typename T>
TensorT<T> conv2d_same(const TensorT<T>& input, const TensorT<T>& kernel) {
  detail::check_conv_shapes(input, kernel);
  const std::size_t c = input.dim(0), h = input.dim(1), w = input.dim(2);
  const std::size_t n = kernel.dim(0), k = kernel.dim(2);
  const std::size_t hw = h * w, rows = c * k * k;

  std::vector<T> col;
  detail::im2col(input, k, col);

  TensorT<T> out({n, h, w});
  const T* ker = kernel.data();
  for (std::size_t o = 0; o < n; ++o) {
    T* orow = out.data() + o * hw;
    for (std::size_t t = 0; t < rows; ++t) {
      const T wv = ker[o * rows + t];
      if (wv == T(0)) continue;
      const T* crow = col.data() + t * hw;
      for (std::size_t x = 0; x < hw; ++x) orow[x] += wv * crow[x];
    }
  }
  return out;
}

// Gradients of sum(upstream * conv2d_same(input, kernel)).
template <typename T>
std::pair<TensorT<T>, TensorT<T>> conv2d_grad(const TensorT<T>& input,
                                              const TensorT<T>& kernel,
                                              const TensorT<T>& upstream) {
  detail::check_conv_shapes(input, kernel);
  const std::size_t c = input.dim(0), h = input.dim(1), w = input.dim(2);
  const std::size_t n = kernel.dim(0), k = kernel.dim(2);
  if (upstream.rank() != 3 || upstream.dim(0) != n || upstream.dim(1) != h ||
      upstream.dim(2) != w) {
    throw dimension_error("conv2d_grad: upstream shape mismatch");
  }
  const std::size_t hw = h * w, rows = c * k * k;

  std::vector<T> col;
  detail::im2col(input, k, col);

  TensorT<T> gin({c, h, w});
  TensorT<T> gker({n, c, k, k});
  const T* ker = kernel.data();
  const T* up = upstream.data();

  // d_kernel[o][t] = <upstream[o], col[t]>.
  for (std::size_t o = 0; o < n; ++o) {
    const T* urow = up + o * hw;
    for (std::size_t t = 0; t < rows; ++t) {
      const T* crow = col.data() + t * hw;
      T acc = T(0);
      for (std::size_t x = 0; x < hw; ++x) acc += urow[x] * crow[x];
      gker[o * rows + t] = acc;
    }
  }

  // d_col[t] = sum_o kernel[o][t] * upstream[o], then fold back onto the
  // input grid.
  std::vector<T> gcol(rows * hw, T(0));
  for (std::size_t o = 0; o < n; ++o) {
    const T* urow = up + o * hw;
    for (std::size_t t = 0; t < rows; ++t) {
      const T wv = ker[o * rows + t];
      if (wv == T(0)) continue;
      T* crow = gcol.data() + t * hw;
      for (std::size_t x = 0; x < hw; ++x) crow[x] += wv * urow[x];
    }
  }
  detail::col2im_add(gcol, c, h, w, k, gin.data());
  return {std::move(gin), std::move(gker)};
}

// out = input * weight + bias, row-broadcast bias.
template <typename T>
TensorT<T> linear(const TensorT<T>& input, const TensorT<T>& weight,
                  const TensorT<T>& bias) {
  if (input.rank() != 2 || weight.rank() != 2 || bias.rank() != 1) {
    throw dimension_error("linear: expected a*b, b*d, d");
  }
  const std::size_t a = input.dim(0), b = input.dim(1), d = weight.dim(1);
  if (weight.dim(0) != b || bias.dim(0) != d) {
    throw dimension_error("linear: inner dimension mismatch " +
                          shape_str(input.shape()) + " vs " +
                          shape_str(weight.shape()));
  }
  TensorT<T> out({a, d});
  for (std::size_t r = 0; r < a; ++r) {
    T* orow = out.data() + r * d;
    for (std::size_t j = 0; j < d; ++j) orow[j] = bias[j];
    const T* irow = input.data() + r * b;
    for (std::size_t i = 0; i < b; ++i) {
      const T v = irow[i];
      if (v == T(0)) continue;
      const T* wrow = weight.data() + i * d;
      for (std::size_t j = 0; j < d; ++j) orow[j] += v * wrow[j];
    }
  }
  return out;
}

template <typename T>
std::tuple<TensorT<T>, TensorT<T>, TensorT<T>> linear_grad(
    const TensorT<T>& input, const TensorT<T>& weight,
    const TensorT<T>& upstream) {
  const std::size_t a = input.dim(0), b = input.dim(1), d = weight.dim(1);
  if (upstream.rank() != 2 || upstream.dim(0) != a || upstream.dim(1) != d) {
    throw dimension_error("linear_grad: upstream shape mismatch");
  }
  TensorT<T> gin({a, b});
  TensorT<T> gw({b, d});
  TensorT<T> gb({d});
  for (std::size_t r = 0; r < a; ++r) {
    const T* urow = upstream.data() + r * d;
    const T* irow = input.data() + r * b;
    T* grow = gin.data() + r * b;
    for (std::size_t j = 0; j < d; ++j) gb[j] += urow[j];
    for (std::size_t i = 0; i < b; ++i) {
      const T* wrow = weight.data() + i * d;
      T* gwrow = gw.data() + i * d;
      T acc = T(0);
      for (std::size_t j = 0; j < d; ++j) {
        acc += urow[j] * wrow[j];
        gwrow[j] += irow[i] * urow[j];
      }
      grow[i] = acc;
    }
  }
  return {std::move(gin), std::move(gw), std::move(gb)};
}

template <typename T>
struct RowNormCache {
  TensorT<T> xhat;             // standardized input, a*b
  std::vector<T> inv_std;      // per row
};

inline constexpr double kRowNormEps = 1e-5;

// Row-wise standardization (biased variance, divisor b) followed by a
// per-column affine.
template <typename T>
TensorT<T> row_norm(const TensorT<T>& input, const TensorT<T>& scale,
                    const TensorT<T>& shift, RowNormCache<T>* cache = nullptr) {
  if (input.rank() != 2) throw dimension_error("row_norm: input must be a*b");
  const std::size_t a = input.dim(0), b = input.dim(1);
  if (b < 2) throw config_error("row_norm: row length must be >= 2");
  if (scale.rank() != 1 || scale.dim(0) != b || shift.rank() != 1 ||
      shift.dim(0) != b) {
    throw dimension_error("row_norm: scale/shift must have row length");
  }
  TensorT<T> out({a, b});
  if (cache) {
    cache->xhat = TensorT<T>({a, b});
    cache->inv_std.assign(a, T(0));
  }
  for (std::size_t r = 0; r < a; ++r) {
    const T* x = input.data() + r * b;
    T* y = out.data() + r * b;
    T mean = T(0);
    for (std::size_t j = 0; j < b; ++j) mean += x[j];
    mean /= static_cast<T>(b);
    T var = T(0);
    for (std::size_t j = 0; j < b; ++j) {
      const T d = x[j] - mean;
      var += d * d;
    }
    var /= static_cast<T>(b);
    const T inv = T(1) / std::sqrt(var + static_cast<T>(kRowNormEps));
    for (std::size_t j = 0; j < b; ++j) {
      const T xh = (x[j] - mean) * inv;
      if (cache) cache->xhat.at2(r, j) = xh;
      y[j] = xh * scale[j] + shift[j];
    }
    if (cache) cache->inv_std[r] = inv;
  }
  return out;
}

template <typename T>
std::tuple<TensorT<T>, TensorT<T>, TensorT<T>> row_norm_grad(
    const RowNormCache<T>& cache, const TensorT<T>& scale,
    const TensorT<T>& upstream) {
  const std::size_t a = upstream.dim(0), b = upstream.dim(1);
  if (!cache.xhat.same_shape(upstream)) {
    throw dimension_error("row_norm_grad: cache/upstream mismatch");
  }
  TensorT<T> gin({a, b});
  TensorT<T> gscale({b});
  TensorT<T> gshift({b});
  for (std::size_t r = 0; r < a; ++r) {
    const T* u = upstream.data() + r * b;
    const T* xh = cache.xhat.data() + r * b;
    T* g = gin.data() + r * b;
    T sum_dxhat = T(0), sum_dxhat_xhat = T(0);
    for (std::size_t j = 0; j < b; ++j) {
      const T dxhat = u[j] * scale[j];
      sum_dxhat += dxhat;
      sum_dxhat_xhat += dxhat * xh[j];
      gscale[j] += u[j] * xh[j];
      gshift[j] += u[j];
    }
    const T inv_b = T(1) / static_cast<T>(b);
    for (std::size_t j = 0; j < b; ++j) {
      const T dxhat = u[j] * scale[j];
      g[j] = cache.inv_std[r] *
             (dxhat - sum_dxhat * inv_b - xh[j] * sum_dxhat_xhat * inv_b);
    }
  }
  return {std::move(gin), std::move(gscale), std::move(gshift)};
}

template <typename T>
TensorT<T> activation(Activation kind, const TensorT<T>& input) {
  TensorT<T> out(input.shape());
  const std::size_t n = input.size();
  if (kind == Activation::kRelu) {
    for (std::size_t i = 0; i < n; ++i)
      out[i] = input[i] > T(0) ? input[i] : T(0);
  } else {
    for (std::size_t i = 0; i < n; ++i)
      out[i] = T(1) / (T(1) + std::exp(-input[i]));
  }
  return out;
}

// For RELU, `ref` is the pre-activation input; for SIGMOID it is the forward
// output (derivative s*(1-s)).
template <typename T>
TensorT<T> activation_grad(Activation kind, const TensorT<T>& ref,
                           const TensorT<T>& upstream) {
  if (!ref.same_shape(upstream)) {
    throw dimension_error("activation_grad: shape mismatch");
  }
  TensorT<T> out(ref.shape());
  const std::size_t n = ref.size();
  if (kind == Activation::kRelu) {
    for (std::size_t i = 0; i < n; ++i)
      out[i] = ref[i] > T(0) ? upstream[i] : T(0);
  } else {
    for (std::size_t i = 0; i < n; ++i)
      out[i] = upstream[i] * ref[i] * (T(1) - ref[i]);
  }
  return out;
}

// Mean over the batch of -sum_c y_c log softmax(logits)_c. If grad_logits is
// given it receives (softmax - y) / B.
template <typename T>
T soft_cross_entropy(const TensorT<T>& logits, const TensorT<T>& soft_labels,
                     TensorT<T>* grad_logits = nullptr) {
  if (logits.rank() != 2 || !logits.same_shape(soft_labels)) {
    throw dimension_error("soft_cross_entropy: logits/labels shape mismatch");
  }
  const std::size_t batch = logits.dim(0), classes = logits.dim(1);
  for (std::size_t r = 0; r < batch; ++r) {
    T sum = T(0);
    for (std::size_t j = 0; j < classes; ++j) {
      const T y = soft_labels.at2(r, j);
      if (y < T(0)) {
        throw config_error("soft_cross_entropy: negative label entry");
      }
      sum += y;
    }
    if (std::abs(static_cast<double>(sum) - 1.0) > 1e-6) {
      throw config_error("soft_cross_entropy: label row does not sum to 1");
    }
  }
  if (grad_logits) *grad_logits = TensorT<T>(logits.shape());
  T loss = T(0);
  for (std::size_t r = 0; r < batch; ++r) {
    const T* z = logits.data() + r * classes;
    T zmax = z[0];
    for (std::size_t j = 1; j < classes; ++j) zmax = std::max(zmax, z[j]);
    T denom = T(0);
    for (std::size_t j = 0; j < classes; ++j) denom += std::exp(z[j] - zmax);
    const T log_denom = std::log(denom);
    for (std::size_t j = 0; j < classes; ++j) {
      const T log_p = z[j] - zmax - log_denom;
      loss -= soft_labels.at2(r, j) * log_p;
      if (grad_logits) {
        grad_logits->at2(r, j) =
            (std::exp(log_p) - soft_labels.at2(r, j)) / static_cast<T>(batch);
      }
    }
  }
  return loss / static_cast<T>(batch);
}

template <typename T>
struct AdamState {
  TensorT<T> first_moment;
  TensorT<T> second_moment;
  std::size_t step_count = 0;
  T learning_rate = T(1e-3);
  T beta1 = T(0.9);
  T beta2 = T(0.999);
  T epsilon = T(1e-8);

  AdamState() = default;
  explicit AdamState(const std::vector<std::size_t>& shape, T lr = T(1e-3))
      : first_moment(shape), second_moment(shape), learning_rate(lr) {}
};

template <typename T>
void adam_update(GradSlot<T>& param, AdamState<T>& state) {
  if (!param.value.same_shape(state.first_moment) ||
      !param.value.same_shape(param.grad)) {
    throw dimension_error("adam_update: state/parameter shape mismatch");
  }
  state.step_count += 1;
  const T t = static_cast<T>(state.step_count);
  const T bc1 = T(1) - std::pow(state.beta1, t);
  const T bc2 = T(1) - std::pow(state.beta2, t);
  const std::size_t n = param.value.size();
  for (std::size_t i = 0; i < n; ++i) {
    const T g = param.grad[i];
    state.first_moment[i] =
        state.beta1 * state.first_moment[i] + (T(1) - state.beta1) * g;
    state.second_moment[i] =
        state.beta2 * state.second_moment[i] + (T(1) - state.beta2) * g * g;
    const T mhat = state.first_moment[i] / bc1;
    const T vhat = state.second_moment[i] / bc2;
    param.value[i] -=
        state.learning_rate * mhat / (std::sqrt(vhat) + state.epsilon);
  }
}

// Central finite differences against the analytic gradients already stored in
// the slots. Returns max over elements of |analytic - central| / max(1, |central|).
inline double finite_diff_check(const std::function<double()>& forward,
                                std::span<GradSlot<double>*> params,
                                double h = 1e-4) {
  if (h <= 0) throw config_error("finite_diff_check: step must be positive");
  double max_err = 0.0;
  for (GradSlot<double>* slot : params) {
    for (std::size_t i = 0; i < slot->value.size(); ++i) {
      const double saved = slot->value[i];
      slot->value[i] = saved + h;
      const double fp = forward();
      slot->value[i] = saved - h;
      const double fm = forward();
      slot->value[i] = saved;
      if (!std::isfinite(fp) || !std::isfinite(fm)) {
        throw numeric_error("finite_diff_check: non-finite forward value");
      }
      const double central = (fp - fm) / (2.0 * h);
      const double err = std::abs(slot->grad[i] - central) /
                         std::max(1.0, std::abs(central));
      max_err = std::max(max_err, err);
    }
  }
  return max_err;
}

}  // namespace gdnet
