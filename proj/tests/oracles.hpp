#pragma once

// Independent reference implementations used only by tests. Deliberately
// naive; they must not share code with the library paths they check.

#include <cmath>
#include <cstddef>
#include <random>

#include "gdnet/tensor.hpp"

namespace oracles {

// Triple-loop sliding-window cross-correlation with zero padding.
template <typename T>
gdnet::TensorT<T> naive_conv2d_same(const gdnet::TensorT<T>& input,
                                    const gdnet::TensorT<T>& kernel) {
  const std::size_t c = input.dim(0), h = input.dim(1), w = input.dim(2);
  const std::size_t n = kernel.dim(0), k = kernel.dim(2);
  const std::ptrdiff_t p = static_cast<std::ptrdiff_t>(k / 2);
  gdnet::TensorT<T> out({n, h, w});
  for (std::size_t o = 0; o < n; ++o) {
    for (std::size_t y = 0; y < h; ++y) {
      for (std::size_t x = 0; x < w; ++x) {
        T acc = T(0);
        for (std::size_t i = 0; i < c; ++i) {
          for (std::size_t ky = 0; ky < k; ++ky) {
            for (std::size_t kx = 0; kx < k; ++kx) {
              const std::ptrdiff_t sy =
                  static_cast<std::ptrdiff_t>(y + ky) - p;
              const std::ptrdiff_t sx =
                  static_cast<std::ptrdiff_t>(x + kx) - p;
              if (sy < 0 || sx < 0 ||
                  sy >= static_cast<std::ptrdiff_t>(h) ||
                  sx >= static_cast<std::ptrdiff_t>(w)) {
                continue;
              }
              acc += input.at3(i, static_cast<std::size_t>(sy),
                               static_cast<std::size_t>(sx)) *
                     kernel.at4(o, i, ky, kx);
            }
          }
        }
        out.at3(o, y, x) = acc;
      }
    }
  }
  return out;
}

// Dot-product matmul plus row-broadcast bias.
template <typename T>
gdnet::TensorT<T> naive_linear(const gdnet::TensorT<T>& input,
                               const gdnet::TensorT<T>& weight,
                               const gdnet::TensorT<T>& bias) {
  const std::size_t a = input.dim(0), b = input.dim(1), d = weight.dim(1);
  gdnet::TensorT<T> out({a, d});
  for (std::size_t r = 0; r < a; ++r) {
    for (std::size_t j = 0; j < d; ++j) {
      T acc = bias[j];
      for (std::size_t i = 0; i < b; ++i) {
        acc += input.at2(r, i) * weight.at2(i, j);
      }
      out.at2(r, j) = acc;
    }
  }
  return out;
}

template <typename T>
gdnet::TensorT<T> random_tensor(std::vector<std::size_t> shape,
                                std::mt19937_64& rng, double lo = -1.0,
                                double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  gdnet::TensorT<T> t(std::move(shape));
  for (std::size_t i = 0; i < t.size(); ++i) {
    t[i] = static_cast<T>(dist(rng));
  }
  return t;
}

template <typename T>
double max_abs_diff(const gdnet::TensorT<T>& a, const gdnet::TensorT<T>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    m = std::max(m, std::abs(static_cast<double>(a[i]) -
                             static_cast<double>(b[i])));
  }
  return m;
}

}  // namespace oracles
