#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "pronto/error.hpp"
#include "pronto/nn/spec.hpp"
#include "pronto/nn/tensor.hpp"
#include "pronto/rng.hpp"

namespace pronto::nn {

// Parameters for every weighted layer in plan order. Conv weights are (out_ch, in_ch, k);
// dense weights are stored input-major (in, out) so the forward inner loop is stride-1.
template <class S>
struct Params {
    std::vector<Tensor<S>> w;
    std::vector<Tensor<S>> b;

    template <class T>
    Params<T> cast() const {
        Params<T> out;
        for (const auto& t : w) out.w.push_back(t.template cast<T>());
        for (const auto& t : b) out.b.push_back(t.template cast<T>());
        return out;
    }

    bool all_finite() const {
        for (const auto& t : w)
            if (!t.all_finite()) return false;
        for (const auto& t : b)
            if (!t.all_finite()) return false;
        return true;
    }
};

// Gradients always accumulate in 64-bit, whatever the parameter storage type.
using Grads = Params<double>;

template <class S>
Params<S> zeros_like_params(const Plan& plan) {
    Params<S> p;
    for (std::size_t i = 0; i < plan.spec.layers.size(); ++i) {
        const LayerDesc& ld = plan.spec.layers[i];
        const Dim in = plan.dims[i];
        if (ld.kind == LayerKind::kConv1D) {
            p.w.push_back(Tensor<S>::zeros({ld.out_channels, in.channels, ld.kernel}));
            p.b.push_back(Tensor<S>::zeros({ld.out_channels}));
        } else if (ld.kind == LayerKind::kDense) {
            p.w.push_back(Tensor<S>::zeros({in.channels, ld.out_dim}));
            p.b.push_back(Tensor<S>::zeros({ld.out_dim}));
        }
    }
    return p;
}

// He-uniform fan-in init for hidden layers, Xavier for the head, zero biases. The draw
// order is fixed (layer order, storage order) so a seed pins every weight.
template <class S>
Params<S> init_params(const Plan& plan, std::uint64_t seed) {
    Params<S> p = zeros_like_params<S>(plan);
    Rng rng(seed);
    int last_weighted = -1;
    for (std::size_t i = 0; i < plan.weighted.size(); ++i) {
        if (plan.weighted[i] >= 0) last_weighted = plan.weighted[i];
    }
    for (std::size_t i = 0; i < plan.spec.layers.size(); ++i) {
        const int slot = plan.weighted[i];
        if (slot < 0) continue;
        const LayerDesc& ld = plan.spec.layers[i];
        const Dim in = plan.dims[i];
        const double fan_in = ld.kind == LayerKind::kConv1D
                                  ? static_cast<double>(ld.kernel) * in.channels
                                  : static_cast<double>(in.channels);
        const double fan_out = ld.kind == LayerKind::kConv1D
                                   ? static_cast<double>(ld.kernel) * ld.out_channels
                                   : static_cast<double>(ld.out_dim);
        const double limit = slot == last_weighted ? std::sqrt(6.0 / (fan_in + fan_out))
                                                   : std::sqrt(6.0 / fan_in);
        for (auto& v : p.w[slot].data) v = static_cast<S>(rng.uniform(-limit, limit));
    }
    return p;
}

// Scratch for one example: activations and boundary gradients per plan boundary, max-pool
// selections, and an accumulator row reused by the conv/dense kernels. The row carries
// the storage type: lane arithmetic runs at S precision (full SIMD width), while the
// parameter-gradient tensors collected across a batch stay 64-bit.
template <class S>
struct Workspace {
    std::vector<std::vector<S>> act;
    std::vector<std::vector<S>> grad;
    std::vector<std::vector<std::uint8_t>> pick;
    std::vector<S> acc;

    void init(const Plan& plan) {
        act.resize(plan.dims.size());
        grad.resize(plan.dims.size());
        std::size_t widest = 0;
        for (std::size_t i = 0; i < plan.dims.size(); ++i) {
            const std::size_t n =
                static_cast<std::size_t>(plan.dims[i].channels) * plan.dims[i].len;
            act[i].assign(n, S(0));
            grad[i].assign(n, S(0));
            widest = std::max(widest, n);
        }
        pick.assign(plan.num_pools, {});
        for (std::size_t i = 0; i < plan.spec.layers.size(); ++i) {
            if (plan.pools[i] >= 0) {
                const Dim out = plan.dims[i + 1];
                pick[plan.pools[i]].assign(
                    static_cast<std::size_t>(out.channels) * out.len, 0);
            }
        }
        acc.assign(widest, S(0));
    }
};

namespace detail {

// acc[t] += a * x[t]; independent elements, so the compiler can vectorize without
// reassociating anything.
template <class S>
inline void axpy(S a, const S* x, S* acc, int n) {
    for (int t = 0; t < n; ++t) acc[t] += a * x[t];
}

// Blocked 8-lane dot product: fixed association order, still SIMD-friendly. Lanes run at
// the storage type; the lane reduction is 64-bit.
template <class S, class T>
inline double dot8(const S* a, const T* b, int n) {
    S lane[8] = {0, 0, 0, 0, 0, 0, 0, 0};
    int t = 0;
    for (; t + 8 <= n; t += 8) {
        for (int l = 0; l < 8; ++l) {
            lane[l] += a[t + l] * static_cast<S>(b[t + l]);
        }
    }
    double s = (static_cast<double>(lane[0]) + lane[1]) + (static_cast<double>(lane[2]) + lane[3]) +
               ((static_cast<double>(lane[4]) + lane[5]) + (static_cast<double>(lane[6]) + lane[7]));
    for (; t < n; ++t) s += static_cast<double>(a[t]) * static_cast<double>(b[t]);
    return s;
}

}  // namespace detail

// Runs the stack on one example (input dims[0], channel-major). Returns the output
// activations; every boundary stays in ws for a following backward pass.
template <class S>
const std::vector<S>& forward_one(const Plan& plan, const Params<S>& params,
                                  std::span<const S> input, Workspace<S>& ws) {
    if (input.size() != ws.act[0].size()) throw ShapeError("input size mismatch");
    std::copy(input.begin(), input.end(), ws.act[0].begin());

    for (std::size_t li = 0; li < plan.spec.layers.size(); ++li) {
        const LayerDesc& ld = plan.spec.layers[li];
        const Dim din = plan.dims[li];
        const Dim dout = plan.dims[li + 1];
        const S* in = ws.act[li].data();
        S* out = ws.act[li + 1].data();
        switch (ld.kind) {
            case LayerKind::kConv1D: {
                const int slot = plan.weighted[li];
                const S* w = params.w[slot].data.data();
                const S* b = params.b[slot].data.data();
                const int k = ld.kernel;
                S* acc = ws.acc.data();
                for (int oc = 0; oc < dout.channels; ++oc) {
                    std::fill(acc, acc + dout.len, b[oc]);
                    for (int ic = 0; ic < din.channels; ++ic) {
                        const S* xr = in + static_cast<std::size_t>(ic) * din.len;
                        const S* wr = w + (static_cast<std::size_t>(oc) * din.channels + ic) * k;
                        for (int j = 0; j < k; ++j) {
                            detail::axpy(wr[j], xr + j, acc, dout.len);
                        }
                    }
                    S* orow = out + static_cast<std::size_t>(oc) * dout.len;
                    for (int t = 0; t < dout.len; ++t) orow[t] = acc[t];
                }
                break;
            }
            case LayerKind::kRelu: {
                const std::size_t n = ws.act[li].size();
                for (std::size_t t = 0; t < n; ++t) out[t] = in[t] > S(0) ? in[t] : S(0);
                break;
            }
            case LayerKind::kMaxPool: {
                std::uint8_t* pick = ws.pick[plan.pools[li]].data();
                for (int c = 0; c < dout.channels; ++c) {
                    const S* xr = in + static_cast<std::size_t>(c) * din.len;
                    S* orow = out + static_cast<std::size_t>(c) * dout.len;
                    std::uint8_t* prow = pick + static_cast<std::size_t>(c) * dout.len;
                    for (int t = 0; t < dout.len; ++t) {
                        const S a = xr[2 * t];
                        const S b2 = xr[2 * t + 1];
                        const bool second = b2 > a;  // ties keep the first element
                        orow[t] = second ? b2 : a;
                        prow[t] = second ? 1 : 0;
                    }
                }
                break;
            }
            case LayerKind::kFlatten:
                std::copy(ws.act[li].begin(), ws.act[li].end(), ws.act[li + 1].begin());
                break;
            case LayerKind::kDense: {
                const int slot = plan.weighted[li];
                const S* w = params.w[slot].data.data();
                const S* b = params.b[slot].data.data();
                const int o_n = dout.channels;
                S* acc = ws.acc.data();
                for (int o = 0; o < o_n; ++o) acc[o] = b[o];
                for (int i = 0; i < din.channels; ++i) {
                    detail::axpy(in[i], w + static_cast<std::size_t>(i) * o_n, acc, o_n);
                }
                for (int o = 0; o < o_n; ++o) out[o] = acc[o];
                break;
            }
            case LayerKind::kSoftmax: {
                const int n = dout.channels;
                double mx = -1e300;
                for (int i = 0; i < n; ++i) mx = std::max(mx, static_cast<double>(in[i]));
                double z = 0.0;
                for (int i = 0; i < n; ++i) {
                    const double e = std::exp(static_cast<double>(in[i]) - mx);
                    out[i] = static_cast<S>(e);
                    z += e;
                }
                const double inv = 1.0 / z;
                for (int i = 0; i < n; ++i) out[i] = static_cast<S>(out[i] * inv);
                break;
            }
            case LayerKind::kTanh: {
                const std::size_t n = ws.act[li].size();
                for (std::size_t t = 0; t < n; ++t) {
                    out[t] = static_cast<S>(std::tanh(static_cast<double>(in[t])));
                }
                break;
            }
        }
    }
    const std::vector<S>& out = ws.act.back();
    for (const S& v : out) {
        if (!std::isfinite(static_cast<double>(v))) {
            throw NumericError("non-finite activation in forward pass");
        }
    }
    return out;
}

namespace detail {

// Shared backward walk; the boundary gradient at the output must already sit in
// ws.grad[last]. Parameter gradients are accumulated (not overwritten) into g.
template <class S>
void backprop(const Plan& plan, const Params<S>& params, Workspace<S>& ws, Grads& g,
              std::size_t first_layer_exclusive) {
    for (std::size_t li = first_layer_exclusive; li-- > 0;) {
        const LayerDesc& ld = plan.spec.layers[li];
        const Dim din = plan.dims[li];
        const Dim dout = plan.dims[li + 1];
        const S* in = ws.act[li].data();
        const S* gout = ws.grad[li + 1].data();
        S* gin = ws.grad[li].data();
        switch (ld.kind) {
            case LayerKind::kConv1D: {
                const int slot = plan.weighted[li];
                const S* w = params.w[slot].data.data();
                double* gw = g.w[slot].data.data();
                double* gb = g.b[slot].data.data();
                const int k = ld.kernel;
                S* acc = ws.acc.data();
                for (int oc = 0; oc < dout.channels; ++oc) {
                    const S* grow = gout + static_cast<std::size_t>(oc) * dout.len;
                    double s = 0.0;
                    for (int t = 0; t < dout.len; ++t) s += static_cast<double>(grow[t]);
                    gb[oc] += s;
                    for (int ic = 0; ic < din.channels; ++ic) {
                        const S* xr = in + static_cast<std::size_t>(ic) * din.len;
                        double* gwr =
                            gw + (static_cast<std::size_t>(oc) * din.channels + ic) * k;
                        for (int j = 0; j < k; ++j) {
                            gwr[j] += detail::dot8(grow, xr + j, dout.len);
                        }
                    }
                }
                for (int ic = 0; ic < din.channels; ++ic) {
                    std::fill(acc, acc + din.len, S(0));
                    for (int oc = 0; oc < dout.channels; ++oc) {
                        const S* grow = gout + static_cast<std::size_t>(oc) * dout.len;
                        const S* wr = w + (static_cast<std::size_t>(oc) * din.channels + ic) * k;
                        for (int j = 0; j < k; ++j) {
                            detail::axpy(wr[j], grow, acc + j, dout.len);
                        }
                    }
                    S* grin = gin + static_cast<std::size_t>(ic) * din.len;
                    for (int t = 0; t < din.len; ++t) grin[t] = acc[t];
                }
                break;
            }
            case LayerKind::kRelu: {
                const std::size_t n = ws.grad[li].size();
                for (std::size_t t = 0; t < n; ++t) gin[t] = in[t] > S(0) ? gout[t] : S(0);
                break;
            }
            case LayerKind::kMaxPool: {
                const std::uint8_t* pick = ws.pick[plan.pools[li]].data();
                std::fill(ws.grad[li].begin(), ws.grad[li].end(), S(0));
                for (int c = 0; c < dout.channels; ++c) {
                    const S* grow = gout + static_cast<std::size_t>(c) * dout.len;
                    const std::uint8_t* prow = pick + static_cast<std::size_t>(c) * dout.len;
                    S* grin = gin + static_cast<std::size_t>(c) * din.len;
                    for (int t = 0; t < dout.len; ++t) grin[2 * t + prow[t]] = grow[t];
                }
                break;
            }
            case LayerKind::kFlatten:
                std::copy(ws.grad[li + 1].begin(), ws.grad[li + 1].end(), ws.grad[li].begin());
                break;
            case LayerKind::kDense: {
                const int slot = plan.weighted[li];
                const S* w = params.w[slot].data.data();
                double* gw = g.w[slot].data.data();
                double* gb = g.b[slot].data.data();
                const int o_n = dout.channels;
                for (int o = 0; o < o_n; ++o) gb[o] += static_cast<double>(gout[o]);
                for (int i = 0; i < din.channels; ++i) {
                    const double xi = static_cast<double>(in[i]);
                    double* gwr = gw + static_cast<std::size_t>(i) * o_n;
                    for (int o = 0; o < o_n; ++o) {
                        gwr[o] += xi * static_cast<double>(gout[o]);
                    }
                    gin[i] = static_cast<S>(
                        detail::dot8(w + static_cast<std::size_t>(i) * o_n, gout, o_n));
                }
                break;
            }
            case LayerKind::kSoftmax:
            case LayerKind::kTanh:
                throw NumericError("output activation reached in generic backprop");
        }
    }
}

}  // namespace detail

// Cross-entropy loss and backward for a softmax-terminated stack, for the example whose
// forward pass is resident in ws. Returns the (unscaled) example loss.
template <class S>
double backward_ce(const Plan& plan, const Params<S>& params, Workspace<S>& ws, int label,
                   Grads& g) {
    const std::size_t last = plan.spec.layers.size() - 1;
    if (plan.spec.layers[last].kind != LayerKind::kSoftmax) {
        throw ShapeError("cross-entropy needs a softmax head");
    }
    const std::vector<S>& p = ws.act[last + 1];
    if (label < 0 || label >= static_cast<int>(p.size())) throw ShapeError("label out of range");
    const double pl = std::max(static_cast<double>(p[label]), 1e-30);
    const double loss = -std::log(pl);

    // Fused softmax + cross-entropy: gradient at the logits is p - onehot(label).
    std::vector<S>& glog = ws.grad[last];
    for (std::size_t i = 0; i < p.size(); ++i) glog[i] = p[i];
    glog[label] -= S(1);
    detail::backprop(plan, params, ws, g, last);
    return loss;
}

// Squared-error loss and backward for a tanh-terminated single-output stack.
template <class S>
double backward_mse(const Plan& plan, const Params<S>& params, Workspace<S>& ws, double target,
                    Grads& g) {
    const std::size_t last = plan.spec.layers.size() - 1;
    if (plan.spec.layers[last].kind != LayerKind::kTanh || plan.out_dim != 1) {
        throw ShapeError("squared-error head expects tanh with one output");
    }
    const double y = static_cast<double>(ws.act[last + 1][0]);
    const double err = y - target;
    ws.grad[last][0] = static_cast<S>(2.0 * err * (1.0 - y * y));
    detail::backprop(plan, params, ws, g, last);
    return err * err;
}

inline Grads zeros_grads(const Plan& plan) { return zeros_like_params<double>(plan); }

inline void clear_grads(Grads& g) {
    for (auto& t : g.w) std::fill(t.data.begin(), t.data.end(), 0.0);
    for (auto& t : g.b) std::fill(t.data.begin(), t.data.end(), 0.0);
}

inline void add_grads(Grads& into, const Grads& from) {
    for (std::size_t i = 0; i < into.w.size(); ++i) {
        for (std::size_t j = 0; j < into.w[i].data.size(); ++j) {
            into.w[i].data[j] += from.w[i].data[j];
        }
        for (std::size_t j = 0; j < into.b[i].data.size(); ++j) {
            into.b[i].data[j] += from.b[i].data[j];
        }
    }
}

}  // namespace pronto::nn
