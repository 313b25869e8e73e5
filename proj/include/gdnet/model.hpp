#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "gdnet/ops.hpp"
#include "gdnet/tensor.hpp"

namespace gdnet {

enum class ConvMode { kGdconv, kStatic };

struct ModelConfig {
  std::size_t r = 12;
  std::size_t h1 = 16;
  std::size_t h2 = 32;
  std::size_t h3 = 6;
  std::size_t m = 4;
  std::size_t k = 3;
  ConvMode conv_mode = ConvMode::kGdconv;

  std::size_t feature_width() const { return h3 * r * r; }
};

// One forward pass worth of intermediates, kept for the exact backward.
template <typename T>
struct GDConvCache {
  TensorT<T> input;     // c,r,r
  TensorT<T> x2;        // c,r^2 (reshaped input)
  TensorT<T> a2;        // spatial branch pre-ReLU, c,m
  RowNormCache<T> s_norm;
  TensorT<T> g;         // c,m
  TensorT<T> b2;        // channel branch pre-ReLU, n,m
  RowNormCache<T> c_norm;
  TensorT<T> cfeat;     // n,m
  TensorT<T> gate;      // M, n,c,k,k
  TensorT<T> wmod;      // W' = M .* W
  bool static_mode = false;
  bool valid = false;
};

// Convolution whose kernel is gated elementwise by a sigmoid built from
// spatial (G) and channel (C) aggregations of the input patch. In static mode
// the gate is skipped entirely and the base kernel is used as-is.
template <typename T>
struct GDConvLayer {
  std::size_t in_ch = 0, out_ch = 0, k = 0, m = 0, r = 0;

  GradSlot<T> base_kernel;       // n,c,k,k
  GradSlot<T> spatial_embed_w;   // r^2, m
  GradSlot<T> spatial_embed_b;   // m
  GradSlot<T> spatial_scale;     // m
  GradSlot<T> spatial_shift;     // m
  GradSlot<T> channel_map_w;     // c,n (applied across the channel axis of G)
  GradSlot<T> channel_map_b;     // n
  GradSlot<T> channel_scale;     // m
  GradSlot<T> channel_shift;     // m
  GradSlot<T> expand_spatial_w;  // m,k^2
  GradSlot<T> expand_spatial_b;  // k^2
  GradSlot<T> expand_channel_w;  // m,k^2
  GradSlot<T> expand_channel_b;  // k^2

  static GDConvLayer make(std::size_t c, std::size_t n, std::size_t k,
                          std::size_t m, std::size_t r) {
    if (k % 2 == 0) throw config_error("GDConvLayer: kernel size must be odd");
    if (m < 1) throw config_error("GDConvLayer: m must be >= 1");
    GDConvLayer l;
    l.in_ch = c;
    l.out_ch = n;
    l.k = k;
    l.m = m;
    l.r = r;
    const std::size_t k2 = k * k, r2 = r * r;
    l.base_kernel = GradSlot<T>(TensorT<T>({n, c, k, k}));
    l.spatial_embed_w = GradSlot<T>(TensorT<T>({r2, m}));
    l.spatial_embed_b = GradSlot<T>(TensorT<T>({m}));
    l.spatial_scale = GradSlot<T>(TensorT<T>::full({m}, T(1)));
    l.spatial_shift = GradSlot<T>(TensorT<T>({m}));
    l.channel_map_w = GradSlot<T>(TensorT<T>({c, n}));
    l.channel_map_b = GradSlot<T>(TensorT<T>({n}));
    l.channel_scale = GradSlot<T>(TensorT<T>::full({m}, T(1)));
    l.channel_shift = GradSlot<T>(TensorT<T>({m}));
    l.expand_spatial_w = GradSlot<T>(TensorT<T>({m, k2}));
    l.expand_spatial_b = GradSlot<T>(TensorT<T>({k2}));
    l.expand_channel_w = GradSlot<T>(TensorT<T>({m, k2}));
    l.expand_channel_b = GradSlot<T>(TensorT<T>({k2}));
    return l;
  }

  template <typename Fn>
  void for_each_param(Fn&& fn) {
    fn("base_kernel", base_kernel);
    fn("spatial_embed_w", spatial_embed_w);
    fn("spatial_embed_b", spatial_embed_b);
    fn("spatial_scale", spatial_scale);
    fn("spatial_shift", spatial_shift);
    fn("channel_map_w", channel_map_w);
    fn("channel_map_b", channel_map_b);
    fn("channel_scale", channel_scale);
    fn("channel_shift", channel_shift);
    fn("expand_spatial_w", expand_spatial_w);
    fn("expand_spatial_b", expand_spatial_b);
    fn("expand_channel_w", expand_channel_w);
    fn("expand_channel_b", expand_channel_b);
  }

  TensorT<T> forward(const TensorT<T>& x, ConvMode mode,
                     GDConvCache<T>* cache = nullptr) const {
    if (x.rank() != 3 || x.dim(0) != in_ch || x.dim(1) != r || x.dim(2) != r) {
      throw dimension_error("GDConvLayer: input shape mismatch, got " +
                            shape_str(x.shape()));
    }
    if (mode == ConvMode::kStatic) {
      if (cache) {
        *cache = GDConvCache<T>{};
        cache->input = x;
        cache->static_mode = true;
        cache->valid = true;
      }
      return conv2d_same(x, base_kernel.value);
    }

    const std::size_t c = in_ch, n = out_ch, k2 = k * k, r2 = r * r;
    GDConvCache<T> local;
    GDConvCache<T>& cc = cache ? *cache : local;
    cc = GDConvCache<T>{};
    cc.input = x;
    cc.x2 = TensorT<T>({c, r2});
    std::copy(x.data(), x.data() + c * r2, cc.x2.data());

    // Spatial aggregation: G = ReLU(Norm(Linear(x)))
    TensorT<T> a1 =
        linear(cc.x2, spatial_embed_w.value, spatial_embed_b.value);
    cc.a2 = row_norm(a1, spatial_scale.value, spatial_shift.value, &cc.s_norm);
    cc.g = activation(Activation::kRelu, cc.a2);

    // Channel aggregation across the c axis: b1[o][u] = sum_i Wcm[i][o]*G[i][u]
    TensorT<T> b1({n, m});
    for (std::size_t o = 0; o < n; ++o) {
      for (std::size_t u = 0; u < m; ++u) b1.at2(o, u) = channel_map_b.value[o];
    }
    for (std::size_t i = 0; i < c; ++i) {
      const T* grow = cc.g.data() + i * m;
      for (std::size_t o = 0; o < n; ++o) {
        const T wv = channel_map_w.value.at2(i, o);
        T* brow = b1.data() + o * m;
        for (std::size_t u = 0; u < m; ++u) brow[u] += wv * grow[u];
      }
    }
    cc.b2 = row_norm(b1, channel_scale.value, channel_shift.value, &cc.c_norm);
    cc.cfeat = activation(Activation::kRelu, cc.b2);

    // Row-wise expansion m -> k^2, broadcast along the missing axis.
    TensorT<T> eg =
        linear(cc.g, expand_spatial_w.value, expand_spatial_b.value);  // c,k^2
    TensorT<T> ec = linear(cc.cfeat, expand_channel_w.value,
                           expand_channel_b.value);  // n,k^2

    cc.gate = TensorT<T>({n, c, k, k});
    cc.wmod = TensorT<T>({n, c, k, k});
    for (std::size_t o = 0; o < n; ++o) {
      const T* ecrow = ec.data() + o * k2;
      for (std::size_t i = 0; i < c; ++i) {
        const T* egrow = eg.data() + i * k2;
        T* gout = cc.gate.data() + (o * c + i) * k2;
        T* wout = cc.wmod.data() + (o * c + i) * k2;
        const T* wbase = base_kernel.value.data() + (o * c + i) * k2;
        for (std::size_t t = 0; t < k2; ++t) {
          const T s = T(1) / (T(1) + std::exp(-(egrow[t] + ecrow[t])));
          gout[t] = s;
          wout[t] = s * wbase[t];
        }
      }
    }
    cc.static_mode = false;
    cc.valid = true;
    return conv2d_same(x, cc.wmod);
  }

  // Accumulates parameter gradients and returns the gradient with respect to
  // the layer input (direct conv path plus the aggregation paths).
  TensorT<T> backward(const GDConvCache<T>& cache, const TensorT<T>& upstream) {
    if (!cache.valid) {
      throw error("GDConvLayer::backward: cache does not match a forward pass");
    }
    if (upstream.rank() != 3 || upstream.dim(0) != out_ch ||
        upstream.dim(1) != r || upstream.dim(2) != r) {
      throw dimension_error("GDConvLayer::backward: upstream shape mismatch");
    }
    if (cache.static_mode) {
      auto [gin, gker] = conv2d_grad(cache.input, base_kernel.value, upstream);
      accumulate(base_kernel.grad, gker);
      return gin;
    }

    const std::size_t c = in_ch, n = out_ch, k2 = k * k, r2 = r * r;
    auto [gin_conv, gwmod] = conv2d_grad(cache.input, cache.wmod, upstream);

    // Through W' = M .* W.
    TensorT<T> d_gate({n, c, k, k});
    for (std::size_t t = 0; t < gwmod.size(); ++t) {
      base_kernel.grad[t] += gwmod[t] * cache.gate[t];
      const T s = cache.gate[t];
      d_gate[t] = gwmod[t] * base_kernel.value[t] * s * (T(1) - s);
    }

    // Collapse the broadcast axes back onto the expansion outputs.
    TensorT<T> d_eg({c, k2});
    TensorT<T> d_ec({n, k2});
    for (std::size_t o = 0; o < n; ++o) {
      T* ecrow = d_ec.data() + o * k2;
      for (std::size_t i = 0; i < c; ++i) {
        const T* srow = d_gate.data() + (o * c + i) * k2;
        T* egrow = d_eg.data() + i * k2;
        for (std::size_t t = 0; t < k2; ++t) {
          egrow[t] += srow[t];
          ecrow[t] += srow[t];
        }
      }
    }

    auto [d_cfeat, gw_ec, gb_ec] =
        linear_grad(cache.cfeat, expand_channel_w.value, d_ec);
    accumulate(expand_channel_w.grad, gw_ec);
    accumulate(expand_channel_b.grad, gb_ec);

    TensorT<T> d_g_from_expand;
    {
      auto [d_g, gw_eg, gb_eg] =
          linear_grad(cache.g, expand_spatial_w.value, d_eg);
      accumulate(expand_spatial_w.grad, gw_eg);
      accumulate(expand_spatial_b.grad, gb_eg);
      d_g_from_expand = std::move(d_g);
    }

    TensorT<T> d_b2 = activation_grad(Activation::kRelu, cache.b2, d_cfeat);
    auto [d_b1, gs_c, gsh_c] =
        row_norm_grad(cache.c_norm, channel_scale.value, d_b2);
    accumulate(channel_scale.grad, gs_c);
    accumulate(channel_shift.grad, gsh_c);

    // Channel map backward: d_G[i][u] += Wcm[i][o]*d_b1[o][u].
    TensorT<T> d_g = d_g_from_expand;
    for (std::size_t i = 0; i < c; ++i) {
      const T* grow = cache.g.data() + i * m;
      T* dgrow = d_g.data() + i * m;
      for (std::size_t o = 0; o < n; ++o) {
        const T wv = channel_map_w.value.at2(i, o);
        const T* dbrow = d_b1.data() + o * m;
        T acc = T(0);
        for (std::size_t u = 0; u < m; ++u) {
          dgrow[u] += wv * dbrow[u];
          acc += grow[u] * dbrow[u];
        }
        channel_map_w.grad.at2(i, o) += acc;
      }
    }
    for (std::size_t o = 0; o < n; ++o) {
      const T* dbrow = d_b1.data() + o * m;
      for (std::size_t u = 0; u < m; ++u) channel_map_b.grad[o] += dbrow[u];
    }

    TensorT<T> d_a2 = activation_grad(Activation::kRelu, cache.a2, d_g);
    auto [d_a1, gs_s, gsh_s] =
        row_norm_grad(cache.s_norm, spatial_scale.value, d_a2);
    accumulate(spatial_scale.grad, gs_s);
    accumulate(spatial_shift.grad, gsh_s);

    auto [d_x2, gw_se, gb_se] =
        linear_grad(cache.x2, spatial_embed_w.value, d_a1);
    accumulate(spatial_embed_w.grad, gw_se);
    accumulate(spatial_embed_b.grad, gb_se);

    // Both paths read the same input.
    TensorT<T> gin({c, r, r});
    for (std::size_t t = 0; t < c * r2; ++t) {
      gin[t] = gin_conv[t] + d_x2[t];
    }
    return gin;
  }

 private:
  static void accumulate(TensorT<T>& dst, const TensorT<T>& src) {
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
  }
};

template <typename T>
struct ModelCache {
  std::vector<std::array<GDConvCache<T>, 3>> layer_caches;  // per sample
  std::vector<std::array<TensorT<T>, 2>> relu_pre;  // layer 1/2 outputs pre-ReLU
  TensorT<T> features;  // B, h3*r^2
};

template <typename T>
struct ForwardResult {
  TensorT<T> logits;    // B,2
  TensorT<T> features;  // B, h3*r^2 (flattened last GDConv output)
};

// Three GDConv layers with ReLU between them, flatten, linear classifier.
template <typename T>
struct GDNet {
  ModelConfig config;
  std::vector<GDConvLayer<T>> layers;
  GradSlot<T> fc_w;  // h3*r^2, 2
  GradSlot<T> fc_b;  // 2

  template <typename Fn>
  void for_each_param(Fn&& fn) {
    for (std::size_t l = 0; l < layers.size(); ++l) {
      const std::string prefix = "layer" + std::to_string(l) + "/";
      layers[l].for_each_param([&](const char* name, GradSlot<T>& slot) {
        fn((prefix + name).c_str(), slot);
      });
    }
    fn("fc_w", fc_w);
    fn("fc_b", fc_b);
  }

  void zero_grads() {
    for_each_param([](const char*, GradSlot<T>& s) { s.zero_grad(); });
  }

  std::size_t param_count() {
    std::size_t total = 0;
    for_each_param(
        [&](const char*, GradSlot<T>& s) { total += s.value.size(); });
    return total;
  }

  template <typename U>
  GDNet<U> cast() {
    GDNet<U> out;
    out.config = config;
    for (auto& layer : layers) {
      GDConvLayer<U> l = GDConvLayer<U>::make(layer.in_ch, layer.out_ch,
                                              layer.k, layer.m, layer.r);
      out.layers.push_back(std::move(l));
    }
    for (std::size_t l = 0; l < layers.size(); ++l) {
      std::vector<GradSlot<T>*> src;
      layers[l].for_each_param(
          [&](const char*, GradSlot<T>& s) { src.push_back(&s); });
      std::size_t idx = 0;
      out.layers[l].for_each_param([&](const char*, GradSlot<U>& d) {
        d = src[idx++]->template cast<U>();
      });
    }
    out.fc_w = fc_w.template cast<U>();
    out.fc_b = fc_b.template cast<U>();
    return out;
  }

  ForwardResult<T> forward(const TensorT<T>& batch,
                           ModelCache<T>* cache = nullptr) {
    const std::size_t r = config.r;
    if (batch.rank() != 4 || batch.dim(1) != 3 || batch.dim(2) != r ||
        batch.dim(3) != r) {
      throw dimension_error("GDNet::forward: batch must be B*3*r*r, got " +
                            shape_str(batch.shape()));
    }
    const std::size_t b = batch.dim(0);
    const std::size_t feat_w = config.feature_width();
    ForwardResult<T> result;
    result.features = TensorT<T>({b, feat_w});
    if (cache) {
      cache->layer_caches.assign(b, {});
      cache->relu_pre.assign(b, {});
    }

    TensorT<T> x({3, r, r});
    for (std::size_t s = 0; s < b; ++s) {
      std::copy(batch.data() + s * 3 * r * r, batch.data() + (s + 1) * 3 * r * r,
                x.data());
      GDConvCache<T>* c0 = cache ? &cache->layer_caches[s][0] : nullptr;
      GDConvCache<T>* c1 = cache ? &cache->layer_caches[s][1] : nullptr;
      GDConvCache<T>* c2 = cache ? &cache->layer_caches[s][2] : nullptr;

      TensorT<T> o1 = layers[0].forward(x, config.conv_mode, c0);
      TensorT<T> p1 = activation(Activation::kRelu, o1);
      TensorT<T> o2 = layers[1].forward(p1, config.conv_mode, c1);
      TensorT<T> p2 = activation(Activation::kRelu, o2);
      TensorT<T> o3 = layers[2].forward(p2, config.conv_mode, c2);

      std::copy(o3.data(), o3.data() + feat_w,
                result.features.data() + s * feat_w);
      if (cache) {
        cache->relu_pre[s][0] = std::move(o1);
        cache->relu_pre[s][1] = std::move(o2);
      }
    }
    if (cache) cache->features = result.features;
    result.logits = linear(result.features, fc_w.value, fc_b.value);
    return result;
  }

  // Accumulates parameter gradients from grad_logits; input gradients are
  // computed internally (needed to stack layers) and discarded.
  void backward(const ModelCache<T>& cache, const TensorT<T>& grad_logits) {
    const std::size_t b = grad_logits.dim(0);
    if (cache.layer_caches.size() != b) {
      throw error("GDNet::backward: cache batch size mismatch");
    }
    auto [d_feat, gw, gb] = linear_grad(cache.features, fc_w.value, grad_logits);
    for (std::size_t i = 0; i < gw.size(); ++i) fc_w.grad[i] += gw[i];
    for (std::size_t i = 0; i < gb.size(); ++i) fc_b.grad[i] += gb[i];

    const std::size_t r = config.r;
    const std::size_t feat_w = config.feature_width();
    for (std::size_t s = 0; s < b; ++s) {
      TensorT<T> d_o3({config.h3, r, r});
      std::copy(d_feat.data() + s * feat_w, d_feat.data() + (s + 1) * feat_w,
                d_o3.data());
      TensorT<T> d_p2 = layers[2].backward(cache.layer_caches[s][2], d_o3);
      TensorT<T> d_o2 =
          activation_grad(Activation::kRelu, cache.relu_pre[s][1], d_p2);
      TensorT<T> d_p1 = layers[1].backward(cache.layer_caches[s][1], d_o2);
      TensorT<T> d_o1 =
          activation_grad(Activation::kRelu, cache.relu_pre[s][0], d_p1);
      layers[0].backward(cache.layer_caches[s][0], d_o1);
    }
  }
};

template <typename T>
GDNet<T> init_model(const ModelConfig& config, std::uint64_t seed) {
  if (config.k % 2 == 0) throw config_error("init_model: k must be odd");
  if (config.r < 2 || config.m < 1 || config.h1 < 1 || config.h2 < 1 ||
      config.h3 < 1) {
    throw config_error("init_model: invalid dimensions");
  }
  GDNet<T> model;
  model.config = config;
  const std::size_t chans[4] = {3, config.h1, config.h2, config.h3};
  for (std::size_t l = 0; l < 3; ++l) {
    model.layers.push_back(GDConvLayer<T>::make(chans[l], chans[l + 1],
                                                config.k, config.m, config.r));
  }
  model.fc_w = GradSlot<T>(TensorT<T>({config.feature_width(), 2}));
  model.fc_b = GradSlot<T>(TensorT<T>({2}));

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  auto fill_uniform = [&](TensorT<T>& t, std::size_t fan_in) {
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
    for (std::size_t i = 0; i < t.size(); ++i) {
      t[i] = static_cast<T>(unit(rng) * bound);
    }
  };
  const std::size_t k2 = config.k * config.k, r2 = config.r * config.r;
  for (std::size_t l = 0; l < 3; ++l) {
    GDConvLayer<T>& layer = model.layers[l];
    fill_uniform(layer.base_kernel.value, chans[l] * k2);
    fill_uniform(layer.spatial_embed_w.value, r2);
    fill_uniform(layer.channel_map_w.value, chans[l]);
    fill_uniform(layer.expand_spatial_w.value, config.m);
    fill_uniform(layer.expand_channel_w.value, config.m);
  }
  fill_uniform(model.fc_w.value, config.feature_width());
  return model;
}

struct ModelSummary {
  std::size_t param_count = 0;
  std::size_t flops_per_sample = 0;
  std::string convention;
};

template <typename T>
ModelSummary model_summary(GDNet<T>& model) {
  ModelSummary s;
  s.param_count = model.param_count();
  const ModelConfig& c = model.config;
  const std::size_t r2 = c.r * c.r, k2 = c.k * c.k;
  const std::size_t chans[4] = {3, c.h1, c.h2, c.h3};
  std::size_t flops = 0;
  for (std::size_t l = 0; l < 3; ++l) {
    const std::size_t ci = chans[l], co = chans[l + 1];
    flops += 2 * ci * co * k2 * r2;  // convolution multiply-adds
    if (c.conv_mode == ConvMode::kGdconv) {
      flops += 2 * ci * r2 * c.m + ci * c.m;    // spatial embed
      flops += 8 * ci * c.m;                    // norm
      flops += ci * c.m;                        // relu
      flops += 2 * ci * co * c.m + co * c.m;    // channel map
      flops += 8 * co * c.m;                    // norm
      flops += co * c.m;                        // relu
      flops += 2 * ci * c.m * k2 + ci * k2;     // expand spatial
      flops += 2 * co * c.m * k2 + co * k2;     // expand channel
      flops += co * ci * k2 * 5;                // gate add + sigmoid
      flops += co * ci * k2;                    // kernel modulation
    }
    if (l < 2) flops += co * r2;  // inter-layer relu
  }
  flops += 2 * c.feature_width() * 2 + 2;  // classifier
  s.flops_per_sample = flops;
  s.convention =
      "2 FLOPs per multiply-add in convolutions and linear maps; 1 per "
      "elementwise add/mul/ReLU; 5 per sigmoid gate element; 8 per "
      "normalized element";
  return s;
}

}  // namespace gdnet
