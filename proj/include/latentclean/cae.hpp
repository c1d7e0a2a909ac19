#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "latentclean/dataset.hpp"
#include "latentclean/errors.hpp"
#include "latentclean/layers.hpp"
#include "latentclean/optimizer.hpp"
#include "latentclean/params_io.hpp"
#include "latentclean/rng.hpp"
#include "latentclean/tensor.hpp"
#include "latentclean/util.hpp"

namespace latentclean {

/// Which form of the latent penalty to train with. Standard is the Gaussian
/// KL divergence to the unit normal; PaperLiteral flips the sign of the
/// (1 + log sigma^2) term, differing from Standard by exactly
/// sum_i sum_j (1 + log sigma_ij^2).
enum class KlFormula { Standard, PaperLiteral };

inline const char* kl_formula_name(KlFormula f) {
    return f == KlFormula::Standard ? "standard" : "paper-literal";
}

inline KlFormula kl_formula_from_name(const std::string& s) {
    if (s == "standard") return KlFormula::Standard;
    if (s == "paper-literal") return KlFormula::PaperLiteral;
    throw ArgumentError("unknown kl formula '" + s + "' (standard | paper-literal)");
}

/// One sample's latent embedding: the mean head locates the point; the
/// sigma head is kept for diagnostics.
struct LatentPoint {
    size_t sample_index = 0;
    int label = 0;
    std::vector<float> mu;
    std::vector<float> sigma;
};

/// Encoder: 5 conv + flatten + 2 dense (the last one emits mu and
/// log-variance side by side). Decoder: 1 dense + restore + 6 conv, two of
/// them stride-2 transposed to undo the encoder's downsampling.
struct CaeArchitecture {
    std::vector<LayerSpec> encoder;
    std::vector<LayerSpec> decoder;
    int latent_dim = 24;
    double beta_kl = 1e-3;
    std::array<size_t, 3> input_shape{28, 28, 1}; // H, W, C
    double l1 = 1e-5;
    double l2 = 1e-5;

    static CaeArchitecture make(std::array<size_t, 3> input_shape, int latent_dim = 24,
                                double beta_kl = 1e-3, double l1 = 1e-5, double l2 = 1e-5) {
        const size_t H = input_shape[0], W = input_shape[1], C = input_shape[2];
        if (H % 4 != 0 || W % 4 != 0 || H < 4 || W < 4) {
            throw ArgumentError("input spatial dims must be multiples of 4 (two stride-2 stages)");
        }
        if (latent_dim < 1) throw ArgumentError("latent_dim must be >= 1");
        if (beta_kl < 0.0) throw ArgumentError("beta_kl must be >= 0");
        CaeArchitecture a;
        a.latent_dim = latent_dim;
        a.beta_kl = beta_kl;
        a.input_shape = input_shape;
        a.l1 = l1;
        a.l2 = l2;
        const size_t h = H / 4, w = W / 4;
        const size_t feat = h * w * 64;

        auto conv = [&](std::string name, int cin, int cout, int stride, Activation act) {
            LayerSpec s;
            s.kind = LayerKind::Conv;
            s.name = std::move(name);
            s.kernel = 3;
            s.stride = stride;
            s.padding = 1;
            s.in_channels = cin;
            s.out_channels = cout;
            s.activation = act;
            s.l1 = l1;
            s.l2 = l2;
            return s;
        };
        auto tconv = [&](std::string name, int cin, int cout, Activation act) {
            LayerSpec s;
            s.kind = LayerKind::TransposedConv;
            s.name = std::move(name);
            s.kernel = 3;
            s.stride = 2;
            s.padding = 1;
            s.output_padding = 1;
            s.in_channels = cin;
            s.out_channels = cout;
            s.activation = act;
            s.l1 = l1;
            s.l2 = l2;
            return s;
        };
        auto dense = [&](std::string name, int in, int out, Activation act) {
            LayerSpec s;
            s.kind = LayerKind::Dense;
            s.name = std::move(name);
            s.in_units = in;
            s.out_units = out;
            s.activation = act;
            s.l1 = l1;
            s.l2 = l2;
            return s;
        };
        auto reshape = [](std::string name, std::vector<size_t> target) {
            LayerSpec s;
            s.kind = LayerKind::Flatten;
            s.name = std::move(name);
            s.target_shape = std::move(target);
            return s;
        };

        a.encoder = {
            conv("enc.conv1", static_cast<int>(C), 16, 1, Activation::Relu),
            conv("enc.conv2", 16, 32, 2, Activation::Relu),
            conv("enc.conv3", 32, 32, 1, Activation::Relu),
            conv("enc.conv4", 32, 64, 2, Activation::Relu),
            conv("enc.conv5", 64, 64, 1, Activation::Relu),
            reshape("enc.flatten", {feat}),
            dense("enc.dense1", static_cast<int>(feat), 128, Activation::Relu),
            dense("enc.heads", 128, 2 * latent_dim, Activation::None),
        };
        a.decoder = {
            dense("dec.dense1", latent_dim, static_cast<int>(feat), Activation::Relu),
            reshape("dec.restore", {h, w, 64}),
            conv("dec.conv1", 64, 64, 1, Activation::Relu),
            tconv("dec.tconv1", 64, 32, Activation::Relu),
            conv("dec.conv2", 32, 32, 1, Activation::Relu),
            tconv("dec.tconv2", 32, 16, Activation::Relu),
            conv("dec.conv3", 16, 16, 1, Activation::Relu),
            conv("dec.out", 16, static_cast<int>(C), 1, Activation::Sigmoid),
        };
        return a;
    }
};

struct TrainingConfig {
    int epochs = 30;
    int batch_size = 128;
    double learning_rate = 1e-3;
    double beta_kl = 1e-3;
    uint64_t rng_seed = 0;
    KlFormula kl_formula = KlFormula::Standard;

    void validate() const {
        if (epochs < 1) throw ArgumentError("epochs must be >= 1");
        if (batch_size < 1) throw ArgumentError("batch_size must be >= 1");
        if (beta_kl < 0.0) throw ArgumentError("beta_kl must be >= 0");
        if (learning_rate <= 0.0) throw ArgumentError("learning_rate must be > 0");
    }
};

struct EpochStats {
    int epoch = 0; // 1-based cumulative epoch number
    double loss_total = 0.0;
    double loss_mse = 0.0;
    double loss_kl = 0.0;
    double mean_psnr = 0.0;
    size_t psnr_inf_count = 0;
};

// ---------------------------------------------------------------------------
// Losses and PSNR
// ---------------------------------------------------------------------------

/// Sum over the batch of squared L2 distance between reconstruction and
/// input, accumulated in double.
template <typename T>
double loss_mse(const TensorT<T>& batch_inputs, const TensorT<T>& batch_reconstructions) {
    require_same_shape(batch_inputs, batch_reconstructions, "loss_mse");
    double acc = 0.0;
    for (size_t i = 0; i < batch_inputs.size(); ++i) {
        double d = static_cast<double>(batch_reconstructions.data[i]) - static_cast<double>(batch_inputs.data[i]);
        acc += d * d;
    }
    return acc;
}

inline double kl_term(double mu, double sigma_sq, double log_sigma_sq, KlFormula formula) {
    if (formula == KlFormula::Standard) {
        return 0.5 * (mu * mu + sigma_sq - 1.0 - log_sigma_sq);
    }
    return 0.5 * (1.0 + log_sigma_sq + mu * mu + sigma_sq);
}

/// Latent penalty over a batch of points.
inline double loss_kl(const std::vector<LatentPoint>& latents, KlFormula formula = KlFormula::Standard) {
    double acc = 0.0;
    for (const auto& p : latents) {
        if (p.mu.size() != p.sigma.size()) throw ShapeError("loss_kl: mu/sigma length mismatch");
        for (size_t j = 0; j < p.mu.size(); ++j) {
            double sigma = static_cast<double>(p.sigma[j]);
            if (!(sigma > 0.0)) throw NumericError("loss_kl: sigma must be positive");
            double s2 = sigma * sigma;
            acc += kl_term(static_cast<double>(p.mu[j]), s2, std::log(s2), formula);
        }
    }
    return acc;
}

inline double loss_total(double mse, double kl, double beta_kl) { return beta_kl * kl + mse; }

/// Peak signal-to-noise ratio in dB, computed on the original integer pixel
/// scale (values rescaled by 2^d - 1 before differencing). Identical images
/// return +infinity; callers exclude the sentinel from means.
template <typename T>
double psnr(const TensorT<T>& original, const TensorT<T>& reconstruction, int bit_depth) {
    require_same_shape(original, reconstruction, "psnr");
    if (bit_depth < 1 || bit_depth > 16) throw ArgumentError("bit depth out of range");
    const double maxval = static_cast<double>((1u << bit_depth) - 1u);
    double sse = 0.0;
    for (size_t i = 0; i < original.size(); ++i) {
        double d = (static_cast<double>(original.data[i]) - static_cast<double>(reconstruction.data[i])) * maxval;
        sse += d * d;
    }
    if (sse == 0.0) return std::numeric_limits<double>::infinity();
    const double numer = maxval * maxval * static_cast<double>(original.size());
    return 10.0 * std::log10(numer / sse);
}

struct PsnrSummary {
    double mean = 0.0;         // over finite per-sample values
    size_t finite_count = 0;
    size_t inf_count = 0;      // identical pairs excluded from the mean
};

// ---------------------------------------------------------------------------
// Model
// ---------------------------------------------------------------------------

template <typename T>
class CaeModelT {
public:
    CaeModelT(const CaeArchitecture& arch, uint64_t init_seed) : arch_(arch) {
        encoder_ = build_sequential<T>(arch.encoder);
        decoder_ = build_sequential<T>(arch.decoder);
        encoder_.collect_params(refs_);
        decoder_.collect_params(refs_);
        Rng rng(derive_seed(init_seed, 0x11u));
        encoder_.init_params(rng);
        decoder_.init_params(rng);
    }

    const CaeArchitecture& arch() const { return arch_; }
    std::vector<ParamRef<T>>& params() { return refs_; }

    ParameterSetT<T> snapshot() { return snapshot_params(refs_); }
    void load(const ParameterSetT<T>& ps) { load_params(refs_, ps); }

    void zero_grad() {
        encoder_.zero_grad();
        decoder_.zero_grad();
    }

    /// Taped encoder pass; output is [B, 2L] with mu in the first L columns
    /// and log-variance in the rest.
    TensorT<T> encoder_forward(const TensorT<T>& batch) {
        check_batch(batch);
        return encoder_.forward(batch);
    }

    TensorT<T> decoder_forward(const TensorT<T>& z) { return decoder_.forward(z); }
    TensorT<T> decoder_backward(const TensorT<T>& d_recon) { return decoder_.backward(d_recon); }
    TensorT<T> encoder_backward(const TensorT<T>& d_heads) { return encoder_.backward(d_heads); }

    void split_heads(const TensorT<T>& heads, TensorT<T>& mu, TensorT<T>& logvar) const {
        const size_t L = static_cast<size_t>(arch_.latent_dim);
        const size_t B = heads.dim(0);
        if (heads.ndim() != 2 || heads.dim(1) != 2 * L) {
            throw ShapeError("encoder output has unexpected shape " + heads.shape_str());
        }
        mu = TensorT<T>({B, L});
        logvar = TensorT<T>({B, L});
        for (size_t b = 0; b < B; ++b) {
            const T* row = heads.ptr() + b * 2 * L;
            std::copy(row, row + L, mu.ptr() + b * L);
            std::copy(row + L, row + 2 * L, logvar.ptr() + b * L);
        }
    }

    TensorT<T> merge_head_grads(const TensorT<T>& d_mu, const TensorT<T>& d_logvar) const {
        const size_t L = static_cast<size_t>(arch_.latent_dim);
        const size_t B = d_mu.dim(0);
        TensorT<T> d_heads({B, 2 * L});
        for (size_t b = 0; b < B; ++b) {
            std::copy(d_mu.ptr() + b * L, d_mu.ptr() + (b + 1) * L, d_heads.ptr() + b * 2 * L);
            std::copy(d_logvar.ptr() + b * L, d_logvar.ptr() + (b + 1) * L, d_heads.ptr() + b * 2 * L + L);
        }
        return d_heads;
    }

private:
    void check_batch(const TensorT<T>& batch) const {
        if (batch.ndim() != 4 || batch.dim(1) != arch_.input_shape[0] ||
            batch.dim(2) != arch_.input_shape[1] || batch.dim(3) != arch_.input_shape[2]) {
            throw ShapeError("batch shape " + batch.shape_str() + " does not match architecture input");
        }
    }

    CaeArchitecture arch_;
    Sequential<T> encoder_, decoder_;
    std::vector<ParamRef<T>> refs_;
};

using CaeModel = CaeModelT<float>;

/// Assembles a [B,H,W,C] batch from dataset images at the given indices.
inline Tensor make_batch(const std::vector<Tensor>& images, const std::vector<size_t>& order,
                         size_t begin, size_t end) {
    const auto& shape = images.at(order.at(begin)).shape;
    const size_t per = Tensor::count(shape);
    Tensor batch({end - begin, shape[0], shape[1], shape[2]});
    for (size_t i = begin; i < end; ++i) {
        const Tensor& img = images[order[i]];
        std::copy(img.data.begin(), img.data.end(), batch.ptr() + (i - begin) * per);
    }
    return batch;
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

/// Keeps optimizer and RNG state so training can be continued in budget
/// increments (the epoch sweep depends on that). Labels never enter.
class CaeTrainer {
public:
    CaeTrainer(CaeModel& model, TrainingConfig cfg)
        : model_(model), cfg_(cfg),
          opt_(AdamConfig{cfg.learning_rate, 0.9, 0.999, 1e-8}),
          rng_(derive_seed(cfg.rng_seed, 0x22u)) {
        cfg_.validate();
    }

    void run_epochs(int epochs, const std::vector<Tensor>& images,
                    const std::function<void(const EpochStats&)>& sink = {}) {
        if (images.empty()) throw ArgumentError("training set is empty");
        const size_t N = images.size();
        const size_t L = static_cast<size_t>(model_.arch().latent_dim);
        const size_t B = static_cast<size_t>(cfg_.batch_size);
        std::vector<size_t> order(N);
        for (size_t i = 0; i < N; ++i) order[i] = i;

        for (int e = 0; e < epochs; ++e) {
            const int epoch_no = epochs_done_ + 1;
            rng_.shuffle(order);
            double sum_mse = 0.0, sum_kl = 0.0, sum_psnr = 0.0;
            size_t psnr_finite = 0, psnr_inf = 0;

            for (size_t start = 0; start < N; start += B) {
                const size_t stop = std::min(N, start + B);
                const size_t b = stop - start;
                Tensor batch = make_batch(images, order, start, stop);

                Tensor heads = model_.encoder_forward(batch);
                Tensor mu, logvar;
                model_.split_heads(heads, mu, logvar);

                // Latent penalty and its gradient w.r.t. mu and log-variance.
                double kl = 0.0;
                Tensor d_mu(mu.shape), d_lv(logvar.shape);
                for (size_t i = 0; i < mu.size(); ++i) {
                    const double m = static_cast<double>(mu.data[i]);
                    const double lv = static_cast<double>(logvar.data[i]);
                    const double s2 = std::exp(lv);
                    kl += kl_term(m, s2, lv, cfg_.kl_formula);
                    d_mu.data[i] = static_cast<float>(m);
                    d_lv.data[i] = static_cast<float>(cfg_.kl_formula == KlFormula::Standard
                                                          ? 0.5 * (s2 - 1.0)
                                                          : 0.5 * (1.0 + s2));
                }

                // Reparameterized latent sample feeds the decoder.
                Tensor eta({b, L}), z({b, L}), half_sigma({b, L});
                for (size_t i = 0; i < z.size(); ++i) {
                    float s = std::exp(0.5f * logvar.data[i]);
                    float n = static_cast<float>(rng_.normal());
                    eta.data[i] = n;
                    half_sigma.data[i] = 0.5f * s;
                    z.data[i] = mu.data[i] + s * n;
                }

                Tensor recon = model_.decoder_forward(z);
                double mse = 0.0;
                Tensor d_recon(recon.shape);
                for (size_t i = 0; i < recon.size(); ++i) {
                    double diff = static_cast<double>(recon.data[i]) - static_cast<double>(batch.data[i]);
                    mse += diff * diff;
                    d_recon.data[i] = static_cast<float>(2.0 * diff);
                }

                accumulate_psnr(batch, recon, b, sum_psnr, psnr_finite, psnr_inf);

                model_.zero_grad();
                const double reg = apply_regularizer(model_.params(), model_.arch().l1, model_.arch().l2);
                Tensor dz = model_.decoder_backward(d_recon);
                for (size_t i = 0; i < dz.size(); ++i) {
                    d_mu.data[i] = dz.data[i] + static_cast<float>(cfg_.beta_kl) * d_mu.data[i];
                    d_lv.data[i] = dz.data[i] * eta.data[i] * half_sigma.data[i] +
                                   static_cast<float>(cfg_.beta_kl) * d_lv.data[i];
                }
                model_.encoder_backward(model_.merge_head_grads(d_mu, d_lv));
                opt_.step(model_.params());

                const double objective = loss_total(mse, kl, cfg_.beta_kl) + reg;
                if (!std::isfinite(objective)) {
                    throw TrainingDivergedError("training loss became non-finite", epoch_no);
                }
                sum_mse += mse;
                sum_kl += kl;
            }

            EpochStats stats;
            stats.epoch = epoch_no;
            stats.loss_mse = sum_mse / static_cast<double>(N);
            stats.loss_kl = sum_kl / static_cast<double>(N);
            stats.loss_total = loss_total(stats.loss_mse, stats.loss_kl, cfg_.beta_kl);
            stats.mean_psnr = psnr_finite ? sum_psnr / static_cast<double>(psnr_finite)
                                          : std::numeric_limits<double>::infinity();
            stats.psnr_inf_count = psnr_inf;
            history_.push_back(stats);
            ++epochs_done_;
            if (sink) sink(stats);
        }
    }

    const std::vector<EpochStats>& history() const { return history_; }
    int epochs_done() const { return epochs_done_; }

private:
    void accumulate_psnr(const Tensor& batch, const Tensor& recon, size_t b,
                         double& sum, size_t& finite, size_t& inf) const {
        const size_t per = batch.size() / b;
        const double maxval = static_cast<double>((1u << 8) - 1u);
        for (size_t i = 0; i < b; ++i) {
            double sse = 0.0;
            const float* x = batch.ptr() + i * per;
            const float* r = recon.ptr() + i * per;
            for (size_t j = 0; j < per; ++j) {
                double d = (static_cast<double>(x[j]) - static_cast<double>(r[j])) * maxval;
                sse += d * d;
            }
            if (sse == 0.0) {
                ++inf;
            } else {
                sum += 10.0 * std::log10(maxval * maxval * static_cast<double>(per) / sse);
                ++finite;
            }
        }
    }

    CaeModel& model_;
    TrainingConfig cfg_;
    Adam opt_;
    Rng rng_;
    std::vector<EpochStats> history_;
    int epochs_done_ = 0;
};

struct TrainResult {
    ParameterSet params;
    std::vector<EpochStats> history;
};

/// One-shot training entry point. Takes only the image view of a dataset so
/// labels cannot leak into the unsupervised stage.
inline TrainResult train_cae(const std::vector<Tensor>& images, const CaeArchitecture& arch,
                             const TrainingConfig& cfg,
                             const std::function<void(const EpochStats&)>& sink = {}) {
    cfg.validate();
    if (images.empty()) throw ArgumentError("training set is empty");
    if (images.front().shape != std::vector<size_t>{arch.input_shape[0], arch.input_shape[1], arch.input_shape[2]}) {
        throw ShapeError("architecture input shape does not match dataset images");
    }
    CaeModel model(arch, cfg.rng_seed);
    CaeTrainer trainer(model, cfg);
    trainer.run_epochs(cfg.epochs, images, sink);
    return {model.snapshot(), trainer.history()};
}

// ---------------------------------------------------------------------------
// Projection and reconstruction quality
// ---------------------------------------------------------------------------

/// Deterministic latent embedding of every sample: the mu head is the point
/// location; no sampling happens here. Pure function of (images, params).
inline std::vector<LatentPoint> project(const LabeledDataset& ds, CaeModel& model,
                                        size_t batch_size = 256) {
    const size_t N = ds.size();
    const size_t L = static_cast<size_t>(model.arch().latent_dim);
    std::vector<size_t> order(N);
    for (size_t i = 0; i < N; ++i) order[i] = i;
    std::vector<LatentPoint> out(N);
    for (size_t start = 0; start < N; start += batch_size) {
        const size_t stop = std::min(N, start + batch_size);
        Tensor batch = make_batch(ds.images, order, start, stop);
        Tensor heads = model.encoder_forward(batch);
        Tensor mu, logvar;
        model.split_heads(heads, mu, logvar);
        for (size_t i = start; i < stop; ++i) {
            LatentPoint& p = out[i];
            p.sample_index = i;
            p.label = ds.labels[i];
            p.mu.assign(mu.ptr() + (i - start) * L, mu.ptr() + (i - start + 1) * L);
            p.sigma.resize(L);
            for (size_t j = 0; j < L; ++j) {
                float s = std::exp(0.5f * logvar.data[(i - start) * L + j]);
                p.sigma[j] = s > 0.0f ? s : std::numeric_limits<float>::min();
            }
        }
    }
    return out;
}

/// Mean PSNR of deterministic reconstructions (decode of mu) over a dataset.
inline PsnrSummary reconstruction_psnr(const LabeledDataset& ds, CaeModel& model,
                                       size_t batch_size = 256) {
    PsnrSummary summary;
    const size_t N = ds.size();
    const size_t L = static_cast<size_t>(model.arch().latent_dim);
    std::vector<size_t> order(N);
    for (size_t i = 0; i < N; ++i) order[i] = i;
    double sum = 0.0;
    for (size_t start = 0; start < N; start += batch_size) {
        const size_t stop = std::min(N, start + batch_size);
        Tensor batch = make_batch(ds.images, order, start, stop);
        Tensor heads = model.encoder_forward(batch);
        Tensor mu, logvar;
        model.split_heads(heads, mu, logvar);
        Tensor recon = model.decoder_forward(mu);
        const size_t per = batch.size() / (stop - start);
        for (size_t i = 0; i < stop - start; ++i) {
            Tensor x({per}), r({per});
            std::copy(batch.ptr() + i * per, batch.ptr() + (i + 1) * per, x.ptr());
            std::copy(recon.ptr() + i * per, recon.ptr() + (i + 1) * per, r.ptr());
            double v = psnr(x, r, ds.bit_depth);
            if (std::isinf(v)) {
                ++summary.inf_count;
            } else {
                sum += v;
                ++summary.finite_count;
            }
        }
    }
    summary.mean = summary.finite_count ? sum / static_cast<double>(summary.finite_count)
                                        : std::numeric_limits<double>::infinity();
    return summary;
}

// ---------------------------------------------------------------------------
// Checkpoint and history files
// ---------------------------------------------------------------------------

/// Checkpoint: structured text header describing the architecture, a '---'
/// separator, then the parameter container.
inline void save_checkpoint(const std::string& path, const CaeArchitecture& arch, const ParameterSet& ps) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write: " + path);
    out << "latentclean checkpoint v1\n";
    out << "input=" << arch.input_shape[0] << "x" << arch.input_shape[1] << "x" << arch.input_shape[2] << "\n";
    out << "latent_dim=" << arch.latent_dim << "\n";
    out << "beta_kl=" << fmt_double(arch.beta_kl) << "\n";
    out << "l1=" << fmt_double(arch.l1) << "\n";
    out << "l2=" << fmt_double(arch.l2) << "\n";
    out << "---\n";
    save_parameter_set(out, ps);
}

inline std::pair<CaeArchitecture, ParameterSet> load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path);
    std::string line;
    if (!std::getline(in, line) || line != "latentclean checkpoint v1") {
        throw FormatError(path + ": not a checkpoint file");
    }
    std::map<std::string, std::string> kv;
    while (std::getline(in, line)) {
        if (line == "---") break;
        auto pos = line.find('=');
        if (pos == std::string::npos) throw FormatError(path + ": bad header line '" + line + "'");
        kv[line.substr(0, pos)] = line.substr(pos + 1);
    }
    auto dims = split(kv.at("input"), 'x');
    if (dims.size() != 3) throw FormatError(path + ": bad input shape");
    std::array<size_t, 3> shape{static_cast<size_t>(parse_int(dims[0])),
                                static_cast<size_t>(parse_int(dims[1])),
                                static_cast<size_t>(parse_int(dims[2]))};
    CaeArchitecture arch = CaeArchitecture::make(shape, static_cast<int>(parse_int(kv.at("latent_dim"))),
                                                 parse_double(kv.at("beta_kl")), parse_double(kv.at("l1")),
                                                 parse_double(kv.at("l2")));
    ParameterSet ps = load_parameter_set(in);
    return {arch, ps};
}

inline void write_history_csv(const std::string& path, const std::vector<EpochStats>& history) {
    std::ostringstream ss;
    ss << "epoch,loss_total,loss_mse,loss_kl,mean_psnr\n";
    for (const auto& h : history) {
        ss << h.epoch << "," << fmt_double(h.loss_total) << "," << fmt_double(h.loss_mse) << ","
           << fmt_double(h.loss_kl) << "," << fmt_double(h.mean_psnr) << "\n";
    }
    write_text_file(path, ss.str());
}

} // namespace latentclean
