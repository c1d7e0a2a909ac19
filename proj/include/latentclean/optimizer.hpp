#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "latentclean/errors.hpp"
#include "latentclean/layers.hpp"
#include "latentclean/tensor.hpp"

namespace latentclean {

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// Adam with bias correction. State is keyed by position in the parameter
/// list, which is assumed stable for the lifetime of the optimizer.
template <typename T>
class AdamT {
public:
    explicit AdamT(AdamConfig cfg = {}) : cfg_(cfg) {}

    const AdamConfig& config() const { return cfg_; }
    long long step_count() const { return t_; }

    void step(std::vector<ParamRef<T>>& params) {
        if (slots_.empty()) {
            slots_.reserve(params.size());
            for (auto& p : params) {
                slots_.push_back({TensorT<T>(p.w->shape), TensorT<T>(p.w->shape),
                                  TensorT<T>(p.b->shape), TensorT<T>(p.b->shape)});
            }
        }
        if (slots_.size() != params.size()) {
            throw ShapeError("optimizer state tracks a different parameter list");
        }
        ++t_;
        const double corr1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
        const double corr2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
        for (size_t i = 0; i < params.size(); ++i) {
            update(*params[i].w, *params[i].gw, slots_[i].mw, slots_[i].vw, corr1, corr2, params[i].id);
            update(*params[i].b, *params[i].gb, slots_[i].mb, slots_[i].vb, corr1, corr2, params[i].id);
        }
    }

private:
    struct Slot {
        TensorT<T> mw, vw, mb, vb;
    };

    void update(TensorT<T>& w, const TensorT<T>& g, TensorT<T>& m, TensorT<T>& v,
                double corr1, double corr2, const std::string& id) {
        if (!w.same_shape(g)) throw ShapeError("gradient shape mismatch for '" + id + "'");
        const double b1 = cfg_.beta1, b2 = cfg_.beta2;
        const double lr = cfg_.learning_rate, eps = cfg_.epsilon;
        for (size_t i = 0; i < w.size(); ++i) {
            double gi = static_cast<double>(g.data[i]);
            double mi = b1 * static_cast<double>(m.data[i]) + (1.0 - b1) * gi;
            double vi = b2 * static_cast<double>(v.data[i]) + (1.0 - b2) * gi * gi;
            m.data[i] = static_cast<T>(mi);
            v.data[i] = static_cast<T>(vi);
            double mhat = mi / corr1;
            double vhat = vi / corr2;
            w.data[i] = static_cast<T>(static_cast<double>(w.data[i]) - lr * mhat / (std::sqrt(vhat) + eps));
        }
    }

    AdamConfig cfg_;
    long long t_ = 0;
    std::vector<Slot> slots_;
};

using Adam = AdamT<float>;

} // namespace latentclean
