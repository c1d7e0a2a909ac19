#pragma once

// Finite-difference verification harness for layers, run in double precision.

#include <vector>

#include "latentclean/layers.hpp"
#include "latentclean/rng.hpp"
#include "latentclean/tensor.hpp"
#include "support/oracles.hpp"

namespace gradcheck {

struct Result {
    double max_rel_err = 0.0;
    size_t checked = 0;
};

/// Loss is dot(layer(X), P) for a fixed random projection P, so every output
/// element feeds the scalar. Compares analytic parameter and input gradients
/// against central differences at `coords` random coordinates per tensor.
inline Result check_layer(latentclean::Layer<double>& layer, std::vector<size_t> in_shape,
                          uint64_t seed, int coords = 5, double h = 1e-4,
                          double input_min_abs = 0.0) {
    using latentclean::TensorT;
    latentclean::Rng rng(seed);

    TensorT<double> x(in_shape);
    for (auto& v : x.data) {
        double mag = rng.uniform(input_min_abs, 1.0);
        v = rng.uniform01() < 0.5 ? -mag : mag;
    }

    TensorT<double> y0 = layer.forward(x);
    TensorT<double> proj(y0.shape);
    for (auto& v : proj.data) v = rng.uniform(-1.0, 1.0);

    auto loss = [&]() {
        TensorT<double> y = layer.forward(x);
        double acc = 0.0;
        for (size_t i = 0; i < y.size(); ++i) acc += y.data[i] * proj.data[i];
        return acc;
    };

    layer.zero_grad();
    layer.forward(x);
    TensorT<double> dx = layer.backward(proj);

    std::vector<latentclean::ParamRef<double>> refs;
    layer.collect_params(refs);

    Result result;
    auto probe = [&](std::vector<double>& buf, const std::vector<double>& analytic) {
        if (buf.empty()) return;
        for (int c = 0; c < coords; ++c) {
            size_t i = static_cast<size_t>(rng.below(buf.size()));
            double fd = oracles::finite_difference(buf, i, loss, h);
            result.max_rel_err = std::max(result.max_rel_err, oracles::rel_err(analytic[i], fd));
            ++result.checked;
        }
    };
    for (auto& r : refs) {
        probe(r.w->data, r.gw->data);
        probe(r.b->data, r.gb->data);
    }
    probe(x.data, dx.data);
    return result;
}

} // namespace gradcheck
