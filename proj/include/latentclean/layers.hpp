#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "latentclean/errors.hpp"
#include "latentclean/gemm.hpp"
#include "latentclean/parallel.hpp"
#include "latentclean/rng.hpp"
#include "latentclean/tensor.hpp"

namespace latentclean {

enum class Activation { None, Relu, Sigmoid };

enum class LayerKind { Conv, TransposedConv, Dense, Flatten, ActivationOnly };

inline const char* activation_name(Activation a) {
    switch (a) {
        case Activation::Relu: return "relu";
        case Activation::Sigmoid: return "sigmoid";
        default: return "none";
    }
}

/// Declarative description of one layer. The architecture of a model is a
/// list of these; build_sequential() turns the list into runnable layers.
struct LayerSpec {
    LayerKind kind = LayerKind::Dense;
    std::string name;
    int kernel = 0;
    int stride = 1;
    int padding = 0;
    int output_padding = 0;
    int in_channels = 0;
    int out_channels = 0;
    int in_units = 0;
    int out_units = 0;
    std::vector<size_t> target_shape; // flatten/reshape target, per sample
    Activation activation = Activation::None;
    double l1 = 0.0;
    double l2 = 0.0;

    void validate() const {
        if (kind == LayerKind::Conv || kind == LayerKind::TransposedConv) {
            if (kernel < 1) throw ArgumentError(name + ": kernel size must be >= 1");
            if (stride < 1) throw ArgumentError(name + ": stride must be >= 1");
            if (padding < 0) throw ArgumentError(name + ": padding must be >= 0");
        }
        if (l1 < 0.0 || l2 < 0.0) throw ArgumentError(name + ": regularizer weights must be >= 0");
    }
};

/// Mutable view of one layer's parameters and gradient buffers.
template <typename T>
struct ParamRef {
    std::string id;
    TensorT<T>* w = nullptr;
    TensorT<T>* b = nullptr;
    TensorT<T>* gw = nullptr;
    TensorT<T>* gb = nullptr;
    bool regularized = true;
};

/// Value snapshot of named parameters, used for serialization and for
/// gradient results handed back to callers.
template <typename T>
struct NamedParamT {
    std::string id;
    TensorT<T> weights;
    TensorT<T> bias;
};

template <typename T>
struct ParameterSetT {
    std::vector<NamedParamT<T>> entries;

    const NamedParamT<T>* find(const std::string& id) const {
        for (const auto& e : entries) {
            if (e.id == id) return &e;
        }
        return nullptr;
    }
};

using ParameterSet = ParameterSetT<float>;

namespace detail {

/// Gathers kernel patches of `img` (the spatially larger side of a strided
/// convolution) into a [B*oh*ow, k*k*C] matrix. Out-of-image taps read 0.
template <typename T>
void im2col(const T* img, size_t B, size_t H, size_t W, size_t C,
            size_t k, size_t stride, size_t pad, size_t oh, size_t ow, T* col) {
    const size_t patch = k * k * C;
    parallel_for(0, B * oh * ow, [&](size_t r0, size_t r1) {
        for (size_t r = r0; r < r1; ++r) {
            size_t b = r / (oh * ow);
            size_t oy = (r / ow) % oh;
            size_t ox = r % ow;
            T* dst = col + r * patch;
            for (size_t ky = 0; ky < k; ++ky) {
                ptrdiff_t iy = static_cast<ptrdiff_t>(oy * stride + ky) - static_cast<ptrdiff_t>(pad);
                for (size_t kx = 0; kx < k; ++kx) {
                    ptrdiff_t ix = static_cast<ptrdiff_t>(ox * stride + kx) - static_cast<ptrdiff_t>(pad);
                    T* cell = dst + (ky * k + kx) * C;
                    if (iy < 0 || iy >= static_cast<ptrdiff_t>(H) || ix < 0 || ix >= static_cast<ptrdiff_t>(W)) {
                        for (size_t c = 0; c < C; ++c) cell[c] = T(0);
                    } else {
                        const T* src = img + ((b * H + iy) * W + ix) * C;
                        for (size_t c = 0; c < C; ++c) cell[c] = src[c];
                    }
                }
            }
        }
    }, 64);
}

/// Adjoint of im2col: scatter-adds patch values back into the image.
/// Parallel over batch items only; within one item the accumulation order is
/// a fixed loop nest.
template <typename T>
void col2im(const T* col, size_t B, size_t H, size_t W, size_t C,
            size_t k, size_t stride, size_t pad, size_t oh, size_t ow, T* img) {
    const size_t patch = k * k * C;
    for (size_t i = 0; i < B * H * W * C; ++i) img[i] = T(0);
    parallel_for(0, B, [&](size_t b0, size_t b1) {
        for (size_t b = b0; b < b1; ++b) {
            for (size_t oy = 0; oy < oh; ++oy) {
                for (size_t ox = 0; ox < ow; ++ox) {
                    const T* src = col + ((b * oh + oy) * ow + ox) * patch;
                    for (size_t ky = 0; ky < k; ++ky) {
                        ptrdiff_t iy = static_cast<ptrdiff_t>(oy * stride + ky) - static_cast<ptrdiff_t>(pad);
                        if (iy < 0 || iy >= static_cast<ptrdiff_t>(H)) continue;
                        for (size_t kx = 0; kx < k; ++kx) {
                            ptrdiff_t ix = static_cast<ptrdiff_t>(ox * stride + kx) - static_cast<ptrdiff_t>(pad);
                            if (ix < 0 || ix >= static_cast<ptrdiff_t>(W)) continue;
                            T* dst = img + ((b * H + iy) * W + ix) * C;
                            const T* cell = src + (ky * k + kx) * C;
                            for (size_t c = 0; c < C; ++c) dst[c] += cell[c];
                        }
                    }
                }
            }
        }
    }, 1);
}

template <typename T>
void add_bias_rows(T* y, size_t rows, const TensorT<T>& bias) {
    const size_t n = bias.size();
    parallel_for(0, rows, [&](size_t r0, size_t r1) {
        for (size_t r = r0; r < r1; ++r) {
            T* row = y + r * n;
            for (size_t j = 0; j < n; ++j) row[j] += bias.data[j];
        }
    }, 4096);
}

template <typename T>
void accumulate_row_sums(const T* dy, size_t rows, size_t n, TensorT<T>& gb) {
    for (size_t r = 0; r < rows; ++r) {
        const T* row = dy + r * n;
        for (size_t j = 0; j < n; ++j) gb.data[j] += row[j];
    }
}

} // namespace detail

/// One differentiable layer. forward() records what backward() needs (the
/// tape); backward() consumes the recording and throws StateError if there is
/// none. Gradients accumulate into the layer's grad buffers.
template <typename T>
class Layer {
public:
    explicit Layer(std::string name) : name_(std::move(name)) {}
    virtual ~Layer() = default;

    const std::string& name() const { return name_; }

    virtual TensorT<T> forward(const TensorT<T>& x) = 0;
    virtual TensorT<T> backward(const TensorT<T>& dy) = 0;
    virtual void collect_params(std::vector<ParamRef<T>>&) {}
    virtual void init_params(Rng&) {}
    virtual void zero_grad() {}

protected:
    void require_tape() const {
        if (!taped_) throw StateError(name_ + ": backward called without a recorded forward pass");
    }
    bool taped_ = false;
    std::string name_;
};

template <typename T>
class DenseLayer final : public Layer<T> {
public:
    DenseLayer(std::string name, size_t in_units, size_t out_units, double l1, double l2)
        : Layer<T>(std::move(name)),
          w_({in_units, out_units}), b_({out_units}),
          gw_({in_units, out_units}), gb_({out_units}),
          l1_(l1), l2_(l2) {}

    void init_params(Rng& rng) override {
        const double bound = std::sqrt(6.0 / static_cast<double>(w_.dim(0)));
        for (auto& v : w_.data) v = static_cast<T>(rng.uniform(-bound, bound));
        b_.fill(T(0));
    }

    TensorT<T> forward(const TensorT<T>& x) override {
        if (x.ndim() != 2 || x.dim(1) != w_.dim(0)) {
            throw ShapeError(this->name_ + ": expected input [B," + std::to_string(w_.dim(0)) +
                             "], got " + x.shape_str());
        }
        const size_t B = x.dim(0), U = w_.dim(1);
        TensorT<T> y({B, U});
        gemm_nn(B, w_.dim(0), U, x.ptr(), w_.ptr(), y.ptr(), false);
        detail::add_bias_rows(y.ptr(), B, b_);
        x_ = x;
        this->taped_ = true;
        return y;
    }

    TensorT<T> backward(const TensorT<T>& dy) override {
        this->require_tape();
        const size_t B = x_.dim(0), D = w_.dim(0), U = w_.dim(1);
        if (dy.ndim() != 2 || dy.dim(0) != B || dy.dim(1) != U) {
            throw ShapeError(this->name_ + ": bad upstream gradient shape " + dy.shape_str());
        }
        gemm_tn(B, D, U, x_.ptr(), dy.ptr(), gw_.ptr(), true);
        detail::accumulate_row_sums(dy.ptr(), B, U, gb_);
        TensorT<T> dx({B, D});
        gemm_nt(B, U, D, dy.ptr(), w_.ptr(), dx.ptr(), false);
        x_ = TensorT<T>();
        this->taped_ = false;
        return dx;
    }

    void collect_params(std::vector<ParamRef<T>>& out) override {
        out.push_back({this->name_, &w_, &b_, &gw_, &gb_, true});
    }

    void zero_grad() override {
        gw_.fill(T(0));
        gb_.fill(T(0));
    }

private:
    TensorT<T> w_, b_, gw_, gb_, x_;
    double l1_, l2_;
};

template <typename T>
class Conv2dLayer final : public Layer<T> {
public:
    Conv2dLayer(std::string name, size_t in_ch, size_t out_ch, size_t kernel,
                size_t stride, size_t pad, double l1, double l2)
        : Layer<T>(std::move(name)),
          w_({kernel, kernel, in_ch, out_ch}), b_({out_ch}),
          gw_({kernel, kernel, in_ch, out_ch}), gb_({out_ch}),
          k_(kernel), stride_(stride), pad_(pad), cin_(in_ch), cout_(out_ch),
          l1_(l1), l2_(l2) {
        if (kernel < 1 || stride < 1) throw ArgumentError(this->name_ + ": kernel and stride must be >= 1");
    }

    void init_params(Rng& rng) override {
        const double bound = std::sqrt(6.0 / static_cast<double>(k_ * k_ * cin_));
        for (auto& v : w_.data) v = static_cast<T>(rng.uniform(-bound, bound));
        b_.fill(T(0));
    }

    static size_t out_extent(size_t in, size_t k, size_t stride, size_t pad) {
        if (in + 2 * pad < k) throw ShapeError("convolution kernel larger than padded input");
        return (in + 2 * pad - k) / stride + 1;
    }

    TensorT<T> forward(const TensorT<T>& x) override {
        if (x.ndim() != 4 || x.dim(3) != cin_) {
            throw ShapeError(this->name_ + ": expected [B,H,W," + std::to_string(cin_) + "], got " + x.shape_str());
        }
        B_ = x.dim(0); H_ = x.dim(1); W_ = x.dim(2);
        oh_ = out_extent(H_, k_, stride_, pad_);
        ow_ = out_extent(W_, k_, stride_, pad_);
        const size_t rows = B_ * oh_ * ow_, patch = k_ * k_ * cin_;
        col_.assign(rows * patch, T(0));
        detail::im2col(x.ptr(), B_, H_, W_, cin_, k_, stride_, pad_, oh_, ow_, col_.data());
        TensorT<T> y({B_, oh_, ow_, cout_});
        gemm_nn(rows, patch, cout_, col_.data(), w_.ptr(), y.ptr(), false);
        detail::add_bias_rows(y.ptr(), rows, b_);
        this->taped_ = true;
        return y;
    }

    TensorT<T> backward(const TensorT<T>& dy) override {
        this->require_tape();
        const size_t rows = B_ * oh_ * ow_, patch = k_ * k_ * cin_;
        if (dy.size() != rows * cout_) {
            throw ShapeError(this->name_ + ": bad upstream gradient shape " + dy.shape_str());
        }
        detail::accumulate_row_sums(dy.ptr(), rows, cout_, gb_);
        gemm_tn(rows, patch, cout_, col_.data(), dy.ptr(), gw_.ptr(), true);
        std::vector<T> dcol(rows * patch);
        gemm_nt(rows, cout_, patch, dy.ptr(), w_.ptr(), dcol.data(), false);
        TensorT<T> dx({B_, H_, W_, cin_});
        detail::col2im(dcol.data(), B_, H_, W_, cin_, k_, stride_, pad_, oh_, ow_, dx.ptr());
        col_.clear();
        this->taped_ = false;
        return dx;
    }

    void collect_params(std::vector<ParamRef<T>>& out) override {
        out.push_back({this->name_, &w_, &b_, &gw_, &gb_, true});
    }

    void zero_grad() override {
        gw_.fill(T(0));
        gb_.fill(T(0));
    }

private:
    TensorT<T> w_, b_, gw_, gb_;
    std::vector<T> col_;
    size_t k_, stride_, pad_, cin_, cout_;
    size_t B_ = 0, H_ = 0, W_ = 0, oh_ = 0, ow_ = 0;
    double l1_, l2_;
};

/// Stride-s transposed convolution, the exact adjoint of Conv2dLayer's
/// spatial map. Kernel is stored [k,k,out_ch,in_ch]; output_padding grows the
/// output by up to stride-1 rows/cols so stride-2 encoders invert cleanly.
template <typename T>
class ConvTranspose2dLayer final : public Layer<T> {
public:
    ConvTranspose2dLayer(std::string name, size_t in_ch, size_t out_ch, size_t kernel,
                         size_t stride, size_t pad, size_t output_pad, double l1, double l2)
        : Layer<T>(std::move(name)),
          w_({kernel, kernel, out_ch, in_ch}), b_({out_ch}),
          gw_({kernel, kernel, out_ch, in_ch}), gb_({out_ch}),
          k_(kernel), stride_(stride), pad_(pad), opad_(output_pad),
          cin_(in_ch), cout_(out_ch), l1_(l1), l2_(l2) {
        if (kernel < 1 || stride < 1) throw ArgumentError(this->name_ + ": kernel and stride must be >= 1");
        if (output_pad >= stride) throw ArgumentError(this->name_ + ": output_padding must be < stride");
    }

    void init_params(Rng& rng) override {
        const double bound = std::sqrt(6.0 / static_cast<double>(k_ * k_ * cin_));
        for (auto& v : w_.data) v = static_cast<T>(rng.uniform(-bound, bound));
        b_.fill(T(0));
    }

    TensorT<T> forward(const TensorT<T>& x) override {
        if (x.ndim() != 4 || x.dim(3) != cin_) {
            throw ShapeError(this->name_ + ": expected [B,h,w," + std::to_string(cin_) + "], got " + x.shape_str());
        }
        B_ = x.dim(0); h_ = x.dim(1); w_in_ = x.dim(2);
        const ptrdiff_t oh = static_cast<ptrdiff_t>((h_ - 1) * stride_ + k_ + opad_) - 2 * static_cast<ptrdiff_t>(pad_);
        const ptrdiff_t ow = static_cast<ptrdiff_t>((w_in_ - 1) * stride_ + k_ + opad_) - 2 * static_cast<ptrdiff_t>(pad_);
        if (oh < 1 || ow < 1) throw ShapeError(this->name_ + ": output would be empty");
        H_ = static_cast<size_t>(oh); W_ = static_cast<size_t>(ow);
        const size_t rows = B_ * h_ * w_in_, patch = k_ * k_ * cout_;
        std::vector<T> dcol(rows * patch);
        gemm_nt(rows, cin_, patch, x.ptr(), w_.ptr(), dcol.data(), false);
        TensorT<T> y({B_, H_, W_, cout_});
        detail::col2im(dcol.data(), B_, H_, W_, cout_, k_, stride_, pad_, h_, w_in_, y.ptr());
        detail::add_bias_rows(y.ptr(), B_ * H_ * W_, b_);
        x_ = x;
        this->taped_ = true;
        return y;
    }

    TensorT<T> backward(const TensorT<T>& dy) override {
        this->require_tape();
        if (dy.size() != B_ * H_ * W_ * cout_) {
            throw ShapeError(this->name_ + ": bad upstream gradient shape " + dy.shape_str());
        }
        const size_t rows = B_ * h_ * w_in_, patch = k_ * k_ * cout_;
        detail::accumulate_row_sums(dy.ptr(), B_ * H_ * W_, cout_, gb_);
        std::vector<T> col(rows * patch);
        detail::im2col(dy.ptr(), B_, H_, W_, cout_, k_, stride_, pad_, h_, w_in_, col.data());
        gemm_tn(rows, patch, cin_, col.data(), x_.ptr(), gw_.ptr(), true);
        TensorT<T> dx({B_, h_, w_in_, cin_});
        gemm_nn(rows, patch, cin_, col.data(), w_.ptr(), dx.ptr(), false);
        x_ = TensorT<T>();
        this->taped_ = false;
        return dx;
    }

    void collect_params(std::vector<ParamRef<T>>& out) override {
        out.push_back({this->name_, &w_, &b_, &gw_, &gb_, true});
    }

    void zero_grad() override {
        gw_.fill(T(0));
        gb_.fill(T(0));
    }

private:
    TensorT<T> w_, b_, gw_, gb_, x_;
    size_t k_, stride_, pad_, opad_, cin_, cout_;
    size_t B_ = 0, h_ = 0, w_in_ = 0, H_ = 0, W_ = 0;
    double l1_, l2_;
};

/// Reshape between [B, ...] layouts without touching data. Covers both the
/// encoder flatten and the decoder's dense-to-feature-map restore.
template <typename T>
class ReshapeLayer final : public Layer<T> {
public:
    ReshapeLayer(std::string name, std::vector<size_t> per_sample_shape)
        : Layer<T>(std::move(name)), target_(std::move(per_sample_shape)) {}

    TensorT<T> forward(const TensorT<T>& x) override {
        if (x.ndim() < 1) throw ShapeError(this->name_ + ": scalar input");
        const size_t B = x.dim(0);
        size_t per = x.size() / (B ? B : 1);
        if (per != TensorT<T>::count(target_)) {
            throw ShapeError(this->name_ + ": cannot reshape " + x.shape_str());
        }
        in_shape_ = x.shape;
        std::vector<size_t> out_shape{B};
        out_shape.insert(out_shape.end(), target_.begin(), target_.end());
        TensorT<T> y = x;
        y.reshape(out_shape);
        this->taped_ = true;
        return y;
    }

    TensorT<T> backward(const TensorT<T>& dy) override {
        this->require_tape();
        TensorT<T> dx = dy;
        dx.reshape(in_shape_);
        this->taped_ = false;
        return dx;
    }

private:
    std::vector<size_t> target_, in_shape_;
};

template <typename T>
class ActivationLayer final : public Layer<T> {
public:
    ActivationLayer(std::string name, Activation act)
        : Layer<T>(std::move(name)), act_(act) {
        if (act == Activation::None) throw ArgumentError(this->name_ + ": activation kind required");
    }

    TensorT<T> forward(const TensorT<T>& x) override {
        TensorT<T> y(x.shape);
        const size_t n = x.size();
        if (act_ == Activation::Relu) {
            parallel_for(0, n, [&](size_t i0, size_t i1) {
                for (size_t i = i0; i < i1; ++i) y.data[i] = x.data[i] > T(0) ? x.data[i] : T(0);
            }, 65536);
        } else {
            parallel_for(0, n, [&](size_t i0, size_t i1) {
                for (size_t i = i0; i < i1; ++i) {
                    y.data[i] = T(1) / (T(1) + std::exp(-x.data[i]));
                }
            }, 16384);
        }
        y_ = y;
        this->taped_ = true;
        return y;
    }

    TensorT<T> backward(const TensorT<T>& dy) override {
        this->require_tape();
        require_same_shape(dy, y_, "activation backward");
        TensorT<T> dx(dy.shape);
        const size_t n = dy.size();
        if (act_ == Activation::Relu) {
            for (size_t i = 0; i < n; ++i) dx.data[i] = y_.data[i] > T(0) ? dy.data[i] : T(0);
        } else {
            for (size_t i = 0; i < n; ++i) dx.data[i] = dy.data[i] * y_.data[i] * (T(1) - y_.data[i]);
        }
        y_ = TensorT<T>();
        this->taped_ = false;
        return dx;
    }

private:
    Activation act_;
    TensorT<T> y_;
};

/// Runs layers in order; backward() replays them in reverse.
template <typename T>
class Sequential {
public:
    void add(std::unique_ptr<Layer<T>> layer) { layers_.push_back(std::move(layer)); }

    TensorT<T> forward(const TensorT<T>& x) {
        TensorT<T> cur = x;
        for (auto& l : layers_) cur = l->forward(cur);
        return cur;
    }

    TensorT<T> backward(const TensorT<T>& dy) {
        TensorT<T> cur = dy;
        for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) cur = (*it)->backward(cur);
        return cur;
    }

    void collect_params(std::vector<ParamRef<T>>& out) {
        for (auto& l : layers_) l->collect_params(out);
    }

    void init_params(Rng& rng) {
        for (auto& l : layers_) l->init_params(rng);
    }

    void zero_grad() {
        for (auto& l : layers_) l->zero_grad();
    }

    size_t size() const { return layers_.size(); }
    Layer<T>& at(size_t i) { return *layers_.at(i); }

private:
    std::vector<std::unique_ptr<Layer<T>>> layers_;
};

/// Builds one runnable layer from its spec; fused activations are appended by
/// build_sequential as separate nodes so their tape handling stays uniform.
template <typename T>
std::unique_ptr<Layer<T>> build_layer(const LayerSpec& spec) {
    spec.validate();
    switch (spec.kind) {
        case LayerKind::Conv:
            return std::make_unique<Conv2dLayer<T>>(spec.name, spec.in_channels, spec.out_channels,
                                                    spec.kernel, spec.stride, spec.padding, spec.l1, spec.l2);
        case LayerKind::TransposedConv:
            return std::make_unique<ConvTranspose2dLayer<T>>(spec.name, spec.in_channels, spec.out_channels,
                                                             spec.kernel, spec.stride, spec.padding,
                                                             spec.output_padding, spec.l1, spec.l2);
        case LayerKind::Dense:
            return std::make_unique<DenseLayer<T>>(spec.name, spec.in_units, spec.out_units, spec.l1, spec.l2);
        case LayerKind::Flatten:
            return std::make_unique<ReshapeLayer<T>>(spec.name, spec.target_shape);
        case LayerKind::ActivationOnly:
            return std::make_unique<ActivationLayer<T>>(spec.name, spec.activation);
    }
    throw ArgumentError("unknown layer kind");
}

template <typename T>
Sequential<T> build_sequential(const std::vector<LayerSpec>& specs) {
    Sequential<T> seq;
    for (const auto& spec : specs) {
        seq.add(build_layer<T>(spec));
        if (spec.kind != LayerKind::ActivationOnly && spec.activation != Activation::None) {
            seq.add(std::make_unique<ActivationLayer<T>>(spec.name + ".act", spec.activation));
        }
    }
    return seq;
}

template <typename T>
ParameterSetT<T> snapshot_params(const std::vector<ParamRef<T>>& refs) {
    ParameterSetT<T> out;
    for (const auto& r : refs) out.entries.push_back({r.id, *r.w, *r.b});
    return out;
}

template <typename T>
ParameterSetT<T> snapshot_grads(const std::vector<ParamRef<T>>& refs) {
    ParameterSetT<T> out;
    for (const auto& r : refs) out.entries.push_back({r.id, *r.gw, *r.gb});
    return out;
}

template <typename T>
void load_params(std::vector<ParamRef<T>>& refs, const ParameterSetT<T>& ps) {
    for (auto& r : refs) {
        const NamedParamT<T>* e = ps.find(r.id);
        if (!e) throw ArgumentError("parameter set is missing entry '" + r.id + "'");
        if (e->weights.shape != r.w->shape || e->bias.shape != r.b->shape) {
            throw ShapeError("parameter set entry '" + r.id + "' has incompatible shape");
        }
        *r.w = e->weights;
        *r.b = e->bias;
    }
}

/// Combined L1+L2 penalty over kernel weights (biases excluded), accumulated
/// in double.
template <typename T>
double regularizer_penalty(const ParameterSetT<T>& ps, double l1, double l2) {
    if (l1 < 0.0 || l2 < 0.0) throw ArgumentError("regularizer weights must be >= 0");
    double abs_sum = 0.0, sq_sum = 0.0;
    for (const auto& e : ps.entries) {
        for (T v : e.weights.data) {
            double d = static_cast<double>(v);
            abs_sum += std::abs(d);
            sq_sum += d * d;
        }
    }
    return l1 * abs_sum + l2 * sq_sum;
}

/// Training-path twin of regularizer_penalty: returns the penalty and adds
/// its gradient (l1*sign(w) + 2*l2*w) into each regularized weight gradient.
template <typename T>
double apply_regularizer(std::vector<ParamRef<T>>& refs, double l1, double l2) {
    if (l1 < 0.0 || l2 < 0.0) throw ArgumentError("regularizer weights must be >= 0");
    if (l1 == 0.0 && l2 == 0.0) return 0.0;
    double abs_sum = 0.0, sq_sum = 0.0;
    for (auto& r : refs) {
        if (!r.regularized) continue;
        const size_t n = r.w->size();
        for (size_t i = 0; i < n; ++i) {
            double v = static_cast<double>(r.w->data[i]);
            abs_sum += std::abs(v);
            sq_sum += v * v;
            double sign = v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
            r.gw->data[i] += static_cast<T>(l1 * sign + 2.0 * l2 * v);
        }
    }
    return l1 * abs_sum + l2 * sq_sum;
}

} // namespace latentclean
