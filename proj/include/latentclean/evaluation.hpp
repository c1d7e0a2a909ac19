#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "latentclean/cae.hpp"
#include "latentclean/dataset.hpp"
#include "latentclean/errors.hpp"
#include "latentclean/pipeline.hpp"
#include "latentclean/util.hpp"

namespace latentclean {

/// Sparse view of "sample index -> label", the set S of the Jaccard metric.
struct LabelMap {
    std::vector<size_t> indices; // ascending
    std::vector<int> labels;     // aligned with indices

    static LabelMap from(const std::vector<int>& labels) {
        LabelMap m;
        m.indices.resize(labels.size());
        for (size_t i = 0; i < labels.size(); ++i) m.indices[i] = i;
        m.labels = labels;
        return m;
    }

    static LabelMap from_subset(const std::vector<size_t>& subset, const std::vector<int>& labels) {
        LabelMap m;
        m.indices = subset;
        m.labels.reserve(subset.size());
        for (size_t i : subset) m.labels.push_back(labels.at(i));
        return m;
    }

    int label_at(size_t index) const {
        auto it = std::lower_bound(indices.begin(), indices.end(), index);
        if (it == indices.end() || *it != index) throw ArgumentError("index not present in label map");
        return labels[static_cast<size_t>(it - indices.begin())];
    }

    bool contains(size_t index) const {
        auto it = std::lower_bound(indices.begin(), indices.end(), index);
        return it != indices.end() && *it == index;
    }
};

/// Jaccard score between a source label map and a candidate whose index set
/// is contained in the source's. Elements are sample indices; an index is in
/// the intersection when the candidate's label agrees with the source's, and
/// the union is by index (hence |source|).
inline double jaccard(const LabelMap& source, const LabelMap& candidate) {
    if (source.indices.empty()) throw ArgumentError("jaccard: source is empty");
    size_t agree = 0;
    for (size_t i = 0; i < candidate.indices.size(); ++i) {
        if (!source.contains(candidate.indices[i])) {
            throw ArgumentError("jaccard: candidate index outside source");
        }
        if (source.label_at(candidate.indices[i]) == candidate.labels[i]) ++agree;
    }
    return static_cast<double>(agree) / static_cast<double>(source.indices.size());
}

/// Strict variant where elements are (index,label) pairs, so disagreeing
/// labels enlarge the union. Reported alongside the headline score.
inline double jaccard_strict(const LabelMap& source, const LabelMap& candidate) {
    if (source.indices.empty()) throw ArgumentError("jaccard: source is empty");
    size_t agree = 0;
    for (size_t i = 0; i < candidate.indices.size(); ++i) {
        if (!source.contains(candidate.indices[i])) {
            throw ArgumentError("jaccard: candidate index outside source");
        }
        if (source.label_at(candidate.indices[i]) == candidate.labels[i]) ++agree;
    }
    const size_t uni = source.indices.size() + candidate.indices.size() - agree;
    return static_cast<double>(agree) / static_cast<double>(uni);
}

/// P = J(denoised) - J(noised). Positive means the pipeline improved the
/// labels it kept; negative means it made things worse.
inline double performance(double j_denoised, double j_noised) {
    if (j_denoised < 0.0 || j_denoised > 1.0 || j_noised < 0.0 || j_noised > 1.0) {
        throw ArgumentError("performance: Jaccard scores must be in [0,1]");
    }
    return j_denoised - j_noised;
}

/// Fraction of retained samples whose current label equals ground truth.
inline double retained_accuracy(const std::vector<size_t>& retained,
                                const std::vector<int>& current_labels,
                                const std::vector<int>& true_labels) {
    if (retained.empty()) throw DegenerateError("retained_accuracy: nothing retained");
    size_t correct = 0;
    for (size_t i : retained) {
        if (current_labels.at(i) == true_labels.at(i)) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(retained.size());
}

struct RemovalQuality {
    double precision = 0.0; // removed that were actually flipped / removed
    double recall = 0.0;    // removed that were actually flipped / all flipped
    size_t true_positives = 0;
    size_t removed = 0;
    size_t flipped = 0;
};

inline RemovalQuality removal_quality(const std::vector<size_t>& removed, const NoiseLedger& ledger) {
    RemovalQuality q;
    q.removed = removed.size();
    q.flipped = ledger.flipped_indices.size();
    for (size_t i : removed) {
        if (ledger.flipped_indices.count(i)) ++q.true_positives;
    }
    q.precision = q.removed ? static_cast<double>(q.true_positives) / static_cast<double>(q.removed) : 0.0;
    q.recall = q.flipped ? static_cast<double>(q.true_positives) / static_cast<double>(q.flipped) : 1.0;
    return q;
}

/// Spearman rank correlation with average ranks on ties. Returns 0 when
/// either side has no variation.
inline double spearman(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size()) throw ArgumentError("spearman: length mismatch");
    const size_t n = xs.size();
    if (n < 2) throw ArgumentError("spearman needs at least 2 observations");
    auto ranks = [](const std::vector<double>& v) {
        const size_t n = v.size();
        std::vector<size_t> idx(n);
        for (size_t i = 0; i < n; ++i) idx[i] = i;
        std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) { return v[a] < v[b]; });
        std::vector<double> r(n);
        size_t i = 0;
        while (i < n) {
            size_t j = i;
            while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) ++j;
            const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
            for (size_t t = i; t <= j; ++t) r[idx[t]] = avg;
            i = j + 1;
        }
        return r;
    };
    std::vector<double> rx = ranks(xs), ry = ranks(ys);
    double mx = 0.0, my = 0.0;
    for (size_t i = 0; i < n; ++i) {
        mx += rx[i];
        my += ry[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double num = 0.0, dx = 0.0, dy = 0.0;
    for (size_t i = 0; i < n; ++i) {
        num += (rx[i] - mx) * (ry[i] - my);
        dx += (rx[i] - mx) * (rx[i] - mx);
        dy += (ry[i] - my) * (ry[i] - my);
    }
    if (dx == 0.0 || dy == 0.0) return 0.0;
    return num / std::sqrt(dx * dy);
}

// ---------------------------------------------------------------------------
// Report
// ---------------------------------------------------------------------------

struct EvaluationReport {
    double jaccard_noised = 0.0;
    double jaccard_denoised = 0.0;
    double jaccard_strict_noised = 0.0;
    double jaccard_strict_denoised = 0.0;
    double performance_p = 0.0;
    double retained_acc = 0.0;
    double removal_precision = 0.0;
    double removal_recall = 0.0;
    double mean_psnr = 0.0;
    size_t psnr_inf_count = 0;
    size_t total_count = 0;
    size_t retained_count = 0;
    size_t removed_count = 0;
    size_t flipped_count = 0;
    std::map<int, size_t> per_class_removed;
    std::map<std::string, std::string> config_echo; // kl formula, seeds, knobs

    void validate() const {
        auto in01 = [](double v) { return v >= 0.0 && v <= 1.0; };
        if (!in01(jaccard_noised) || !in01(jaccard_denoised) || !in01(retained_acc) ||
            !in01(removal_precision) || !in01(removal_recall)) {
            throw NumericError("report score outside [0,1]");
        }
        if (performance_p < -1.0 || performance_p > 1.0) throw NumericError("performance outside [-1,1]");
    }
};

/// Assembles the full report for one detection run. The noised score is the
/// Jaccard of the working labels against ground truth over all samples; the
/// denoised score is the same comparison restricted to the retained indices,
/// which equals retained accuracy under the index-set reading.
inline EvaluationReport build_report(const LabeledDataset& noised, const NoiseLedger& ledger,
                                     const DetectionResult& detection, const PsnrSummary& psnr_summary,
                                     std::map<std::string, std::string> config_echo = {}) {
    if (detection.total != noised.size()) throw ConsistencyError("detection result does not match dataset");
    std::vector<int> truth = true_labels_from_ledger(noised.labels, ledger);

    EvaluationReport r;
    LabelMap truth_all = LabelMap::from(truth);
    LabelMap current_all = LabelMap::from(noised.labels);
    LabelMap truth_retained = LabelMap::from_subset(detection.retained, truth);
    LabelMap current_retained = LabelMap::from_subset(detection.retained, noised.labels);

    r.jaccard_noised = jaccard(truth_all, current_all);
    r.jaccard_denoised = jaccard(truth_retained, current_retained);
    r.jaccard_strict_noised = jaccard_strict(truth_all, current_all);
    r.jaccard_strict_denoised = jaccard_strict(truth_all, current_retained);
    r.performance_p = performance(r.jaccard_denoised, r.jaccard_noised);
    r.retained_acc = retained_accuracy(detection.retained, noised.labels, truth);

    RemovalQuality q = removal_quality(detection.removed, ledger);
    r.removal_precision = q.precision;
    r.removal_recall = q.recall;
    r.flipped_count = q.flipped;

    r.mean_psnr = psnr_summary.mean;
    r.psnr_inf_count = psnr_summary.inf_count;
    r.total_count = noised.size();
    r.retained_count = detection.retained.size();
    r.removed_count = detection.removed.size();
    for (const auto& det : detection.per_class) {
        r.per_class_removed[det.class_id] = det.outlier_indices.size();
    }
    r.config_echo = std::move(config_echo);
    r.validate();
    return r;
}

/// key=value serialization; parse_report inverts it losslessly.
inline std::string report_to_text(const EvaluationReport& r) {
    std::ostringstream ss;
    ss << "latentclean report v1\n";
    ss << "jaccard_noised=" << fmt_double(r.jaccard_noised) << "\n";
    ss << "jaccard_denoised=" << fmt_double(r.jaccard_denoised) << "\n";
    ss << "jaccard_strict_noised=" << fmt_double(r.jaccard_strict_noised) << "\n";
    ss << "jaccard_strict_denoised=" << fmt_double(r.jaccard_strict_denoised) << "\n";
    ss << "performance=" << fmt_double(r.performance_p) << "\n";
    ss << "retained_accuracy=" << fmt_double(r.retained_acc) << "\n";
    ss << "removal_precision=" << fmt_double(r.removal_precision) << "\n";
    ss << "removal_recall=" << fmt_double(r.removal_recall) << "\n";
    ss << "mean_psnr=" << fmt_double(r.mean_psnr) << "\n";
    ss << "psnr_inf_count=" << r.psnr_inf_count << "\n";
    ss << "total_count=" << r.total_count << "\n";
    ss << "retained_count=" << r.retained_count << "\n";
    ss << "removed_count=" << r.removed_count << "\n";
    ss << "flipped_count=" << r.flipped_count << "\n";
    for (const auto& [cls, count] : r.per_class_removed) {
        ss << "removed_class_" << cls << "=" << count << "\n";
    }
    for (const auto& [key, value] : r.config_echo) {
        ss << "config." << key << "=" << value << "\n";
    }
    return ss.str();
}

inline void write_report(const std::string& path, const EvaluationReport& r) {
    write_text_file(path, report_to_text(r));
}

inline EvaluationReport parse_report(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "latentclean report v1") {
        throw FormatError("not a report (missing banner)");
    }
    EvaluationReport r;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty()) continue;
        auto pos = line.find('=');
        if (pos == std::string::npos) throw FormatError("bad report line '" + line + "'");
        std::string key = line.substr(0, pos), value = line.substr(pos + 1);
        if (key == "jaccard_noised") r.jaccard_noised = parse_double(value);
        else if (key == "jaccard_denoised") r.jaccard_denoised = parse_double(value);
        else if (key == "jaccard_strict_noised") r.jaccard_strict_noised = parse_double(value);
        else if (key == "jaccard_strict_denoised") r.jaccard_strict_denoised = parse_double(value);
        else if (key == "performance") r.performance_p = parse_double(value);
        else if (key == "retained_accuracy") r.retained_acc = parse_double(value);
        else if (key == "removal_precision") r.removal_precision = parse_double(value);
        else if (key == "removal_recall") r.removal_recall = parse_double(value);
        else if (key == "mean_psnr") r.mean_psnr = parse_double(value);
        else if (key == "psnr_inf_count") r.psnr_inf_count = static_cast<size_t>(parse_int(value));
        else if (key == "total_count") r.total_count = static_cast<size_t>(parse_int(value));
        else if (key == "retained_count") r.retained_count = static_cast<size_t>(parse_int(value));
        else if (key == "removed_count") r.removed_count = static_cast<size_t>(parse_int(value));
        else if (key == "flipped_count") r.flipped_count = static_cast<size_t>(parse_int(value));
        else if (key.rfind("removed_class_", 0) == 0) {
            r.per_class_removed[static_cast<int>(parse_int(key.substr(14)))] = static_cast<size_t>(parse_int(value));
        } else if (key.rfind("config.", 0) == 0) {
            r.config_echo[key.substr(7)] = value;
        } else {
            throw FormatError("unknown report key '" + key + "'");
        }
    }
    return r;
}

// ---------------------------------------------------------------------------
// PSNR vs. accuracy sweep
// ---------------------------------------------------------------------------

struct SweepRecord {
    int epoch_budget = 0;
    double mean_psnr = 0.0;
    double retained_acc = 0.0;
};

/// Trains incrementally to each epoch budget, runs detection at that point,
/// and records reconstruction quality against denoising accuracy.
inline std::vector<SweepRecord> psnr_accuracy_sweep(const LabeledDataset& noised,
                                                    const NoiseLedger& ledger,
                                                    const CaeArchitecture& arch,
                                                    const std::vector<int>& budgets,
                                                    const TrainingConfig& cfg,
                                                    const DetectionSettings& detection,
                                                    const std::function<void(const SweepRecord&)>& sink = {}) {
    if (budgets.empty()) throw ArgumentError("sweep needs at least one budget");
    for (size_t i = 0; i < budgets.size(); ++i) {
        if (budgets[i] < 1 || (i > 0 && budgets[i] <= budgets[i - 1])) {
            throw ArgumentError("budgets must be positive and strictly ascending");
        }
    }
    std::vector<int> truth = true_labels_from_ledger(noised.labels, ledger);
    CaeModel model(arch, cfg.rng_seed);
    CaeTrainer trainer(model, cfg);
    std::vector<SweepRecord> records;
    int done = 0;
    for (int budget : budgets) {
        try {
            trainer.run_epochs(budget - done, noised.images);
        } catch (const TrainingDivergedError& e) {
            throw TrainingDivergedError(std::string(e.what()) + " (budget " + std::to_string(budget) + ")",
                                        e.epoch());
        }
        done = budget;
        std::vector<LatentPoint> latents = project(noised, model);
        DetectionResult result = detect_and_remove(noised, latents, detection);
        SweepRecord rec;
        rec.epoch_budget = budget;
        rec.mean_psnr = reconstruction_psnr(noised, model).mean;
        rec.retained_acc = retained_accuracy(result.retained, noised.labels, truth);
        records.push_back(rec);
        if (sink) sink(rec);
    }
    return records;
}

inline void write_sweep_csv(const std::string& path, const std::vector<SweepRecord>& records) {
    std::ostringstream ss;
    ss << "epoch_budget,mean_psnr,retained_accuracy\n";
    for (const auto& r : records) {
        ss << r.epoch_budget << "," << fmt_double(r.mean_psnr) << "," << fmt_double(r.retained_acc) << "\n";
    }
    write_text_file(path, ss.str());
}

} // namespace latentclean
