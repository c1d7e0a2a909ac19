// latentclean: train-data label-noise detection and removal.
//
// Subcommands cover the full pipeline: synth (fixture data), inject (label
// noise), train (autoencoder), detect (latent DBSCAN removal), evaluate,
// baseline (KNN / eigenspace relabeling), sweep (PSNR vs accuracy), report.
//
// Exit codes: 0 success, 2 validation error (bad arguments, missing upstream
// artifacts), 3 I/O or file-format error, 1 anything else.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "latentclean/latentclean.hpp"

namespace fs = std::filesystem;
using namespace latentclean;

namespace {

struct DataArgs {
    std::string format = "idx"; // idx | cifar
    std::string images;
    std::string labels;
    std::vector<std::string> batches;

    void attach(CLI::App* cmd) {
        cmd->add_option("--format", format, "Dataset file format: idx | cifar")
            ->check(CLI::IsMember({"idx", "cifar"}))
            ->capture_default_str();
        cmd->add_option("--images", images, "IDX image file");
        cmd->add_option("--labels", labels, "IDX label file");
        cmd->add_option("--batches", batches, "CIFAR binary batch files")->delimiter(',');
    }
};

/// Paths may live under $LATENTCLEAN_DATA_DIR; anything still missing is a
/// validation error that names the file.
std::string resolve_input(const std::string& path) {
    if (path.empty()) throw ArgumentError("missing required input path");
    if (fs::exists(path)) return path;
    if (const char* base = std::getenv("LATENTCLEAN_DATA_DIR")) {
        fs::path joined = fs::path(base) / path;
        if (fs::exists(joined)) return joined.string();
    }
    throw ArgumentError("missing upstream artifact: " + path);
}

LabeledDataset load_data(const DataArgs& d, const std::string& name) {
    if (d.format == "idx") {
        if (d.images.empty() || d.labels.empty()) {
            throw ArgumentError("idx format needs --images and --labels");
        }
        return read_idx(resolve_input(d.images), resolve_input(d.labels), name, 10);
    }
    if (d.batches.empty()) throw ArgumentError("cifar format needs --batches");
    std::vector<std::string> resolved;
    for (const auto& b : d.batches) resolved.push_back(resolve_input(b));
    return read_cifar10(resolved, name);
}

void write_dataset(const LabeledDataset& ds, const std::string& dir, const std::string& stem) {
    if (ds.format == SourceFormat::Idx) {
        write_idx(ds, dir + "/" + stem + "-images-idx3-ubyte", dir + "/" + stem + "-labels-idx1-ubyte");
    } else {
        write_cifar10(ds, dir + "/" + stem + ".bin");
    }
}

std::string out_dir_ready(const std::string& out) {
    if (out.empty()) throw ArgumentError("--out directory is required");
    fs::create_directories(out);
    return out;
}

/// Run manifest: config echo plus fingerprints of inputs and outputs, enough
/// to re-run the exact experiment. File names are recorded without
/// directories so identical runs in different directories match.
struct Manifest {
    std::string command;
    std::map<std::string, std::string> options;
    std::map<std::string, std::string> inputs;  // basename -> fnv64
    std::map<std::string, std::string> outputs; // basename -> fnv64

    void add_input(const std::string& path) {
        inputs[fs::path(path).filename().string()] = hex64(fnv1a64_file(path));
    }
    void add_output(const std::string& path) {
        outputs[fs::path(path).filename().string()] = hex64(fnv1a64_file(path));
    }

    void write(const std::string& dir) const {
        std::ostringstream ss;
        ss << "latentclean manifest v1\n";
        ss << "command=" << command << "\n";
        for (const auto& [k, v] : options) ss << "option." << k << "=" << v << "\n";
        for (const auto& [k, v] : inputs) ss << "input." << k << "=" << v << "\n";
        for (const auto& [k, v] : outputs) ss << "output." << k << "=" << v << "\n";
        write_text_file(dir + "/manifest-" + command + ".txt", ss.str());
    }
};

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

struct SynthCmd {
    std::string kind = "shapes28";
    size_t count = 1000;
    uint64_t seed = 0;
    std::string out;
    bool seed_set = false;

    void run() {
        std::string dir = out_dir_ready(out);
        LabeledDataset ds = make_synthetic_dataset(synth_kind_from_name(kind), count, seed);
        write_dataset(ds, dir, "data");

        Manifest m;
        m.command = "synth";
        m.options = {{"kind", kind}, {"n", std::to_string(count)}, {"seed", std::to_string(seed)}};
        if (ds.format == SourceFormat::Idx) {
            m.add_output(dir + "/data-images-idx3-ubyte");
            m.add_output(dir + "/data-labels-idx1-ubyte");
        } else {
            m.add_output(dir + "/data.bin");
        }
        m.write(dir);
    }
};

// ---------------------------------------------------------------------------
// inject
// ---------------------------------------------------------------------------

struct InjectCmd {
    DataArgs data;
    double rate = 0.15;
    uint64_t seed = 0;
    size_t subset = 0;
    std::string out;

    void run() {
        std::string dir = out_dir_ready(out);
        LabeledDataset ds = load_data(data, "source");
        if (subset > 0) ds = stratified_subset(ds, subset, seed);
        auto [noised, ledger] = inject_noise(ds, rate, seed);
        write_dataset(noised, dir, "noised");
        write_noise_ledger(dir + "/ledger.csv", ledger);

        std::printf("inject: %zu samples, %zu flipped (rate %s)\n", noised.size(),
                    ledger.flipped_indices.size(), fmt_double(rate).c_str());

        Manifest m;
        m.command = "inject";
        m.options = {{"rate", fmt_double(rate)},
                     {"seed", std::to_string(seed)},
                     {"subset", std::to_string(subset)},
                     {"format", data.format}};
        if (noised.format == SourceFormat::Idx) {
            m.add_output(dir + "/noised-images-idx3-ubyte");
            m.add_output(dir + "/noised-labels-idx1-ubyte");
        } else {
            m.add_output(dir + "/noised.bin");
        }
        m.add_output(dir + "/ledger.csv");
        m.write(dir);
    }
};

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

struct TrainCmd {
    DataArgs data;
    TrainingConfig cfg;
    int latent_dim = 24;
    double l1 = 1e-5, l2 = 1e-5;
    std::string kl_formula = "standard";
    std::string out;
    bool quiet = false;

    void run() {
        std::string dir = out_dir_ready(out);
        LabeledDataset ds = load_data(data, "train");
        auto shape = ds.image_shape();
        CaeArchitecture arch =
            CaeArchitecture::make({shape[0], shape[1], shape[2]}, latent_dim, cfg.beta_kl, l1, l2);
        cfg.kl_formula = kl_formula_from_name(kl_formula);

        auto sink = [&](const EpochStats& s) {
            if (!quiet) {
                std::printf("epoch %3d  loss %.6f  mse %.6f  kl %.6f  psnr %.2f\n", s.epoch,
                            s.loss_total, s.loss_mse, s.loss_kl, s.mean_psnr);
                std::fflush(stdout);
            }
        };
        TrainResult result = train_cae(ds.images, arch, cfg, sink);
        save_checkpoint(dir + "/checkpoint.ljt", arch, result.params);
        write_history_csv(dir + "/history.csv", result.history);

        Manifest m;
        m.command = "train";
        m.options = {{"epochs", std::to_string(cfg.epochs)},
                     {"batch", std::to_string(cfg.batch_size)},
                     {"lr", fmt_double(cfg.learning_rate)},
                     {"beta_kl", fmt_double(cfg.beta_kl)},
                     {"latent_dim", std::to_string(latent_dim)},
                     {"kl_formula", kl_formula},
                     {"l1", fmt_double(l1)},
                     {"l2", fmt_double(l2)},
                     {"seed", std::to_string(cfg.rng_seed)}};
        m.add_output(dir + "/checkpoint.ljt");
        m.add_output(dir + "/history.csv");
        m.write(dir);
    }
};

// ---------------------------------------------------------------------------
// detect
// ---------------------------------------------------------------------------

struct DetectCmd {
    DataArgs data;
    std::string checkpoint;
    std::string ledger_path;
    DetectionSettings settings;
    std::string eps_mode = "per-class";
    double eps_value = 0.0;
    std::string out;

    void run() {
        std::string dir = out_dir_ready(out);
        LabeledDataset ds = load_data(data, "detect");
        auto [arch, params] = load_checkpoint(resolve_input(checkpoint));
        CaeModel model(arch, 0);
        model.load(params);

        settings.eps_mode = eps_mode_from_name(eps_mode);
        settings.fixed_epsilon = eps_value;

        std::optional<NoiseLedger> ledger;
        if (!ledger_path.empty()) ledger = read_noise_ledger(resolve_input(ledger_path));

        std::vector<LatentPoint> latents = project(ds, model);
        DetectionResult result = detect_and_remove(ds, latents, settings);

        write_cleaned(ds, result, dir, ledger ? &*ledger : nullptr);
        write_assignment_csv(dir + "/assignments.csv", result);
        write_latent_scatter_csv(dir + "/latent_scatter.csv", latents, ledger ? &*ledger : nullptr);

        std::ostringstream summary;
        summary << "class,count,epsilon,skipped,flat_curve,clusters,outliers\n";
        for (const auto& det : result.per_class) {
            summary << det.class_id << "," << det.sample_count << "," << fmt_double(det.epsilon) << ","
                    << (det.skipped ? 1 : 0) << "," << (det.flat_curve ? 1 : 0) << ","
                    << det.cluster_count << "," << det.outlier_indices.size() << "\n";
            if (!det.kdist.empty()) {
                write_kdist_csv(dir + "/kdist_class_" + std::to_string(det.class_id) + ".csv", det.kdist);
            }
        }
        write_text_file(dir + "/detection.txt", summary.str());
        std::printf("detect: removed %zu of %zu samples\n", result.removed.size(), ds.size());

        Manifest m;
        m.command = "detect";
        m.options = {{"min_points", std::to_string(settings.min_points)},
                     {"eps_mode", eps_mode},
                     {"eps_value", fmt_double(eps_value)},
                     {"smooth_window", std::to_string(settings.smooth_window)}};
        m.add_input(resolve_input(checkpoint));
        m.add_output(dir + "/removal_manifest.csv");
        m.add_output(dir + "/assignments.csv");
        m.add_output(dir + "/latent_scatter.csv");
        m.add_output(dir + "/detection.txt");
        m.write(dir);
    }
};

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

struct EvaluateCmd {
    DataArgs data;
    std::string ledger_path;
    std::string removal_path;
    std::string checkpoint;
    std::string out;

    void run() {
        std::string dir = out_dir_ready(out);
        LabeledDataset ds = load_data(data, "evaluate");
        NoiseLedger ledger = read_noise_ledger(resolve_input(ledger_path));
        std::vector<size_t> removed = read_removal_manifest(resolve_input(removal_path));

        DetectionResult det;
        det.total = ds.size();
        det.removed = removed;
        for (size_t i = 0; i < ds.size(); ++i) {
            if (!std::binary_search(removed.begin(), removed.end(), i)) det.retained.push_back(i);
        }
        std::map<int, size_t> per_class;
        for (size_t idx : removed) {
            if (idx >= ds.size()) throw ConsistencyError("removal manifest index out of range");
            ++per_class[ds.labels[idx]];
        }
        for (const auto& [cls, count] : per_class) {
            ClassDetection cd;
            cd.class_id = cls;
            cd.outlier_indices.resize(count);
            det.per_class.push_back(cd);
        }

        auto [arch, params] = load_checkpoint(resolve_input(checkpoint));
        CaeModel model(arch, 0);
        model.load(params);
        PsnrSummary psnr_summary = reconstruction_psnr(ds, model);

        std::map<std::string, std::string> echo = {
            {"latent_dim", std::to_string(arch.latent_dim)},
            {"beta_kl", fmt_double(arch.beta_kl)},
            {"noise_rate", fmt_double(ledger.noise_rate)},
            {"noise_seed", std::to_string(ledger.rng_seed)},
        };
        EvaluationReport report = build_report(ds, ledger, det, psnr_summary, echo);
        write_report(dir + "/report.txt", report);
        std::fputs(report_to_text(report).c_str(), stdout);

        Manifest m;
        m.command = "evaluate";
        m.add_input(resolve_input(ledger_path));
        m.add_input(resolve_input(removal_path));
        m.add_input(resolve_input(checkpoint));
        m.add_output(dir + "/report.txt");
        m.write(dir);
    }
};

// ---------------------------------------------------------------------------
// baseline
// ---------------------------------------------------------------------------

struct BaselineCmd {
    DataArgs data;
    std::string method = "knn"; // knn | eigen
    std::string ledger_path;
    double fraction = 0.1;
    size_t knn_k = 11;
    size_t n_components = 24;
    uint64_t seed = 0;
    std::string out;

    void run() {
        std::string dir = out_dir_ready(out);
        LabeledDataset ds = load_data(data, "baseline");
        RepresentativeSet reps = select_representatives(ds, fraction, seed);
        LabeledDataset relabeled = method == "eigen" ? eigen_relabel(ds, reps, n_components, knn_k)
                                                     : knn_relabel(ds, reps, knn_k);
        write_dataset(relabeled, dir, "relabeled");
        write_relabel_manifest(dir + "/relabel_manifest.csv", ds, relabeled);

        std::ostringstream summary;
        summary << "method=" << method << "\n";
        summary << "representatives=" << reps.indices.size() << "\n";
        size_t agree_noisy = 0;
        for (size_t i = 0; i < ds.size(); ++i) agree_noisy += relabeled.labels[i] == ds.labels[i];
        summary << "agreement_vs_input=" << fmt_double(static_cast<double>(agree_noisy) /
                                                       static_cast<double>(ds.size()))
                << "\n";
        if (!ledger_path.empty()) {
            NoiseLedger ledger = read_noise_ledger(resolve_input(ledger_path));
            std::vector<int> truth = true_labels_from_ledger(ds.labels, ledger);
            double acc = jaccard(LabelMap::from(truth), LabelMap::from(relabeled.labels));
            summary << "accuracy_vs_true=" << fmt_double(acc) << "\n";
        }
        write_text_file(dir + "/baseline_report.txt", summary.str());
        std::fputs(read_text_file(dir + "/baseline_report.txt").c_str(), stdout);

        Manifest m;
        m.command = "baseline";
        m.options = {{"method", method},
                     {"fraction", fmt_double(fraction)},
                     {"knn_k", std::to_string(knn_k)},
                     {"n_components", std::to_string(n_components)},
                     {"seed", std::to_string(seed)}};
        m.add_output(dir + "/relabel_manifest.csv");
        m.add_output(dir + "/baseline_report.txt");
        m.write(dir);
    }
};

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

struct SweepCmd {
    DataArgs data;
    std::string ledger_path;
    std::vector<int> budgets = {5, 15, 30, 60};
    TrainingConfig cfg;
    int latent_dim = 24;
    double l1 = 1e-5, l2 = 1e-5;
    std::string kl_formula = "standard";
    DetectionSettings settings;
    std::string eps_mode = "per-class";
    double eps_value = 0.0;
    std::string out;

    void run() {
        std::string dir = out_dir_ready(out);
        LabeledDataset ds = load_data(data, "sweep");
        NoiseLedger ledger = read_noise_ledger(resolve_input(ledger_path));
        auto shape = ds.image_shape();
        CaeArchitecture arch =
            CaeArchitecture::make({shape[0], shape[1], shape[2]}, latent_dim, cfg.beta_kl, l1, l2);
        cfg.kl_formula = kl_formula_from_name(kl_formula);
        settings.eps_mode = eps_mode_from_name(eps_mode);
        settings.fixed_epsilon = eps_value;

        auto sink = [](const SweepRecord& r) {
            std::printf("budget %3d  psnr %.2f  accuracy %.4f\n", r.epoch_budget, r.mean_psnr,
                        r.retained_acc);
            std::fflush(stdout);
        };
        auto records = psnr_accuracy_sweep(ds, ledger, arch, budgets, cfg, settings, sink);
        write_sweep_csv(dir + "/sweep.csv", records);

        std::vector<double> psnrs, accs;
        for (const auto& r : records) {
            psnrs.push_back(r.mean_psnr);
            accs.push_back(r.retained_acc);
        }
        std::ostringstream summary;
        summary << "records=" << records.size() << "\n";
        if (records.size() >= 2) {
            summary << "spearman_psnr_accuracy=" << fmt_double(spearman(psnrs, accs)) << "\n";
        }
        write_text_file(dir + "/sweep_summary.txt", summary.str());

        Manifest m;
        m.command = "sweep";
        std::string blist;
        for (int b : budgets) blist += (blist.empty() ? "" : ",") + std::to_string(b);
        m.options = {{"budgets", blist},
                     {"epochs_batch", std::to_string(cfg.batch_size)},
                     {"lr", fmt_double(cfg.learning_rate)},
                     {"beta_kl", fmt_double(cfg.beta_kl)},
                     {"latent_dim", std::to_string(latent_dim)},
                     {"kl_formula", kl_formula},
                     {"min_points", std::to_string(settings.min_points)},
                     {"eps_mode", eps_mode},
                     {"seed", std::to_string(cfg.rng_seed)}};
        m.add_output(dir + "/sweep.csv");
        m.add_output(dir + "/sweep_summary.txt");
        m.write(dir);
    }
};

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

struct ReportCmd {
    std::vector<std::string> runs;

    void run() {
        if (runs.empty()) throw ArgumentError("report needs at least one run directory");
        std::vector<EvaluationReport> reports;
        for (const auto& r : runs) {
            reports.push_back(parse_report(read_text_file(resolve_input(r + "/report.txt"))));
        }
        auto stat = [&](const char* name, auto getter) {
            double sum = 0.0, lo = 1e300, hi = -1e300;
            for (const auto& rep : reports) {
                double v = getter(rep);
                sum += v;
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            std::printf("%s mean=%s min=%s max=%s\n", name,
                        fmt_double(sum / static_cast<double>(reports.size())).c_str(),
                        fmt_double(lo).c_str(), fmt_double(hi).c_str());
        };
        std::printf("runs=%zu\n", reports.size());
        stat("retained_accuracy", [](const EvaluationReport& r) { return r.retained_acc; });
        stat("performance", [](const EvaluationReport& r) { return r.performance_p; });
        stat("jaccard_denoised", [](const EvaluationReport& r) { return r.jaccard_denoised; });
        stat("jaccard_noised", [](const EvaluationReport& r) { return r.jaccard_noised; });
        stat("removal_precision", [](const EvaluationReport& r) { return r.removal_precision; });
        stat("removal_recall", [](const EvaluationReport& r) { return r.removal_recall; });
        stat("mean_psnr", [](const EvaluationReport& r) { return r.mean_psnr; });
    }
};

template <typename Cmd>
void add_train_flags(CLI::App* sub, Cmd& cmd, bool with_epochs) {
    if (with_epochs) {
        sub->add_option("--epochs", cmd.cfg.epochs, "Training epochs")->capture_default_str();
    }
    sub->add_option("--batch", cmd.cfg.batch_size, "Batch size")->capture_default_str();
    sub->add_option("--lr", cmd.cfg.learning_rate, "Adam learning rate")->capture_default_str();
    sub->add_option("--beta-kl", cmd.cfg.beta_kl, "Weight of the latent penalty")->capture_default_str();
    sub->add_option("--latent-dim", cmd.latent_dim, "Latent space dimension")->capture_default_str();
    sub->add_option("--kl-formula", cmd.kl_formula, "standard | paper-literal")
        ->check(CLI::IsMember({"standard", "paper-literal"}))
        ->capture_default_str();
    sub->add_option("--l1", cmd.l1, "Kernel L1 regularization weight")->capture_default_str();
    sub->add_option("--l2", cmd.l2, "Kernel L2 regularization weight")->capture_default_str();
}

template <typename Cmd>
void add_detect_flags(CLI::App* sub, Cmd& cmd) {
    sub->add_option("--min-points", cmd.settings.min_points, "DBSCAN minimum points")
        ->capture_default_str();
    sub->add_option("--eps-mode", cmd.eps_mode, "per-class | global | fixed")
        ->check(CLI::IsMember({"per-class", "global", "fixed"}))
        ->capture_default_str();
    sub->add_option("--eps", cmd.eps_value, "Epsilon for --eps-mode fixed");
    sub->add_option("--smooth-window", cmd.settings.smooth_window, "k-distance smoothing window")
        ->capture_default_str();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"label-noise detection via autoencoder latent clustering"};
    app.require_subcommand(1);
    int threads = 0;
    app.add_option("--threads", threads, "Cap worker threads (0 = hardware)");

    SynthCmd synth_cmd;
    auto* synth_sub = app.add_subcommand("synth", "Generate a synthetic fixture dataset");
    synth_sub->add_option("--kind", synth_cmd.kind, "shapes28 | garments28 | objects32")
        ->capture_default_str();
    synth_sub->add_option("--n", synth_cmd.count, "Sample count")->capture_default_str();
    synth_sub->add_option("--seed", synth_cmd.seed, "RNG seed")->required();
    synth_sub->add_option("--out", synth_cmd.out, "Output directory")->required();
    synth_sub->set_config("--config");

    InjectCmd inject_cmd;
    auto* inject_sub = app.add_subcommand("inject", "Inject symmetric label noise");
    inject_cmd.data.attach(inject_sub);
    inject_sub->add_option("--rate", inject_cmd.rate, "Noise rate in [0,1]")->capture_default_str();
    inject_sub->add_option("--seed", inject_cmd.seed, "RNG seed")->required();
    inject_sub->add_option("--subset", inject_cmd.subset, "Stratified subset size (0 = all)");
    inject_sub->add_option("--out", inject_cmd.out, "Output directory")->required();
    inject_sub->set_config("--config");

    TrainCmd train_cmd;
    auto* train_sub = app.add_subcommand("train", "Train the convolutional autoencoder");
    train_cmd.data.attach(train_sub);
    add_train_flags(train_sub, train_cmd, true);
    train_sub->add_option("--seed", train_cmd.cfg.rng_seed, "RNG seed")->required();
    train_sub->add_flag("--quiet", train_cmd.quiet, "Suppress per-epoch output");
    train_sub->add_option("--out", train_cmd.out, "Output directory")->required();
    train_sub->set_config("--config");

    DetectCmd detect_cmd;
    auto* detect_sub = app.add_subcommand("detect", "Detect and remove mislabeled samples");
    detect_cmd.data.attach(detect_sub);
    detect_sub->add_option("--checkpoint", detect_cmd.checkpoint, "Trained model checkpoint")->required();
    detect_sub->add_option("--ledger", detect_cmd.ledger_path, "Noise ledger (annotates outputs only)");
    add_detect_flags(detect_sub, detect_cmd);
    detect_sub->add_option("--out", detect_cmd.out, "Output directory")->required();
    detect_sub->set_config("--config");

    EvaluateCmd evaluate_cmd;
    auto* evaluate_sub = app.add_subcommand("evaluate", "Score a detection run against the ledger");
    evaluate_cmd.data.attach(evaluate_sub);
    evaluate_sub->add_option("--ledger", evaluate_cmd.ledger_path, "Noise ledger")->required();
    evaluate_sub->add_option("--removal", evaluate_cmd.removal_path, "Removal manifest from detect")
        ->required();
    evaluate_sub->add_option("--checkpoint", evaluate_cmd.checkpoint, "Checkpoint (for PSNR)")->required();
    evaluate_sub->add_option("--out", evaluate_cmd.out, "Output directory")->required();
    evaluate_sub->set_config("--config");

    BaselineCmd baseline_cmd;
    auto* baseline_sub = app.add_subcommand("baseline", "Run a relabeling baseline");
    baseline_cmd.data.attach(baseline_sub);
    baseline_sub->add_option("--method", baseline_cmd.method, "knn | eigen")
        ->check(CLI::IsMember({"knn", "eigen"}))
        ->capture_default_str();
    baseline_sub->add_option("--ledger", baseline_cmd.ledger_path, "Noise ledger (for accuracy)");
    baseline_sub->add_option("--fraction", baseline_cmd.fraction, "Representative fraction")
        ->capture_default_str();
    baseline_sub->add_option("--knn-k", baseline_cmd.knn_k, "Neighbors for the vote")->capture_default_str();
    baseline_sub->add_option("--n-components", baseline_cmd.n_components, "Eigenspace dimension")
        ->capture_default_str();
    baseline_sub->add_option("--seed", baseline_cmd.seed, "RNG seed")->required();
    baseline_sub->add_option("--out", baseline_cmd.out, "Output directory")->required();
    baseline_sub->set_config("--config");

    SweepCmd sweep_cmd;
    auto* sweep_sub = app.add_subcommand("sweep", "PSNR vs accuracy across epoch budgets");
    sweep_cmd.data.attach(sweep_sub);
    sweep_sub->add_option("--ledger", sweep_cmd.ledger_path, "Noise ledger")->required();
    sweep_sub->add_option("--budgets", sweep_cmd.budgets, "Ascending epoch budgets")->delimiter(',');
    add_train_flags(sweep_sub, sweep_cmd, false);
    add_detect_flags(sweep_sub, sweep_cmd);
    sweep_sub->add_option("--seed", sweep_cmd.cfg.rng_seed, "RNG seed")->required();
    sweep_sub->add_option("--out", sweep_cmd.out, "Output directory")->required();
    sweep_sub->set_config("--config");

    ReportCmd report_cmd;
    auto* report_sub = app.add_subcommand("report", "Aggregate evaluation reports across runs");
    report_sub->add_option("runs", report_cmd.runs, "Run directories containing report.txt");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        app.exit(e);
        return 2;
    }

    set_max_threads(threads);

    try {
        if (synth_sub->parsed()) synth_cmd.run();
        if (inject_sub->parsed()) inject_cmd.run();
        if (train_sub->parsed()) train_cmd.run();
        if (detect_sub->parsed()) detect_cmd.run();
        if (evaluate_sub->parsed()) evaluate_cmd.run();
        if (baseline_sub->parsed()) baseline_cmd.run();
        if (sweep_sub->parsed()) sweep_cmd.run();
        if (report_sub->parsed()) report_cmd.run();
    } catch (const ArgumentError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const DegenerateError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const ShapeError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const FormatError& e) {
        std::fprintf(stderr, "file error: %s\n", e.what());
        return 3;
    } catch (const TruncationError& e) {
        std::fprintf(stderr, "file error: %s\n", e.what());
        return 3;
    } catch (const ConsistencyError& e) {
        std::fprintf(stderr, "file error: %s\n", e.what());
        return 3;
    } catch (const IoError& e) {
        std::fprintf(stderr, "file error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "failed: %s\n", e.what());
        return 1;
    }
    return 0;
}
