#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "pronto/nn/net.hpp"

namespace pronto::nn {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Standard Adam with bias correction. Moments are kept in 64-bit regardless of the
// parameter storage type; `scale` divides the accumulated gradient (use 1/batch).
class Adam {
public:
    Adam(const Plan& plan, AdamConfig cfg = {}) : cfg_(cfg) {
        Grads z = zeros_grads(plan);
        m_ = z;
        v_ = std::move(z);
    }

    template <class S>
    void step(Params<S>& p, const Grads& g, double scale) {
        ++t_;
        const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
        const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
        for (std::size_t i = 0; i < p.w.size(); ++i) {
            update(p.w[i].data, g.w[i].data, m_.w[i].data, v_.w[i].data, scale, c1, c2);
            update(p.b[i].data, g.b[i].data, m_.b[i].data, v_.b[i].data, scale, c1, c2);
        }
    }

    std::int64_t steps() const { return t_; }

    // For schedules: takes effect from the next step; moments and step count carry over.
    void set_lr(double lr) { cfg_.lr = lr; }
    double lr() const { return cfg_.lr; }

private:
    template <class S>
    void update(std::vector<S>& p, const std::vector<double>& g, std::vector<double>& m,
                std::vector<double>& v, double scale, double c1, double c2) {
        const std::size_t n = p.size();
        for (std::size_t j = 0; j < n; ++j) {
            const double gj = g[j] * scale;
            m[j] = cfg_.beta1 * m[j] + (1.0 - cfg_.beta1) * gj;
            v[j] = cfg_.beta2 * v[j] + (1.0 - cfg_.beta2) * gj * gj;
            const double mh = m[j] / c1;
            const double vh = v[j] / c2;
            p[j] = static_cast<S>(static_cast<double>(p[j]) -
                                  cfg_.lr * mh / (std::sqrt(vh) + cfg_.eps));
        }
    }

    AdamConfig cfg_;
    Grads m_;
    Grads v_;
    std::int64_t t_ = 0;
};

}  // namespace pronto::nn
