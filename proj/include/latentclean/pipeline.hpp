#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "latentclean/cae.hpp"
#include "latentclean/dataset.hpp"
#include "latentclean/dbscan.hpp"
#include "latentclean/errors.hpp"
#include "latentclean/util.hpp"

namespace latentclean {

enum class EpsMode { PerClass, Global, Fixed };

inline const char* eps_mode_name(EpsMode m) {
    switch (m) {
        case EpsMode::PerClass: return "auto-per-class";
        case EpsMode::Global: return "auto-global";
        default: return "fixed";
    }
}

inline EpsMode eps_mode_from_name(const std::string& s) {
    if (s == "auto-per-class" || s == "per-class") return EpsMode::PerClass;
    if (s == "auto-global" || s == "global") return EpsMode::Global;
    if (s == "fixed") return EpsMode::Fixed;
    throw ArgumentError("unknown epsilon mode '" + s + "'");
}

struct DetectionSettings {
    int min_points = 5;
    EpsMode eps_mode = EpsMode::PerClass;
    double fixed_epsilon = 0.0; // used when eps_mode == Fixed
    size_t smooth_window = 11;
};

/// Per-class outcome of the detection stage.
struct ClassDetection {
    int class_id = 0;
    size_t sample_count = 0;
    double epsilon = 0.0;
    int min_points = 0;
    bool skipped = false;        // too few samples to cluster
    bool flat_curve = false;     // degenerate k-distance curve
    size_t cluster_count = 0;
    std::vector<size_t> outlier_indices;       // dataset sample indices, ascending
    std::vector<double> kdist;                 // sorted curve (empty when skipped)
    std::vector<size_t> member_indices;        // dataset sample indices in scan order
    ClusterAssignment assignment;              // aligned with member_indices
};

struct DetectionResult {
    std::vector<ClassDetection> per_class;     // ascending class id
    std::vector<size_t> removed;               // union of per-class outliers, ascending
    std::vector<size_t> retained;              // complement, ascending
    size_t total = 0;
    DetectionSettings settings;
};

namespace detail {

/// Flat double matrix of the mu vectors for the given latent indices.
inline std::vector<double> gather_mu(const std::vector<LatentPoint>& latents,
                                     const std::vector<size_t>& which, size_t dim) {
    std::vector<double> flat(which.size() * dim);
    for (size_t i = 0; i < which.size(); ++i) {
        const auto& mu = latents[which[i]].mu;
        for (size_t j = 0; j < dim; ++j) flat[i * dim + j] = static_cast<double>(mu[j]);
    }
    return flat;
}

inline ClassDetection detect_one_class(const std::vector<LatentPoint>& latents,
                                       const std::vector<size_t>& members, int class_id,
                                       const DetectionSettings& settings,
                                       std::optional<double> preset_epsilon) {
    ClassDetection det;
    det.class_id = class_id;
    det.sample_count = members.size();
    det.min_points = settings.min_points;
    det.member_indices = members;

    if (members.size() < static_cast<size_t>(settings.min_points) + 1) {
        det.skipped = true;
        return det;
    }
    const size_t dim = latents[members.front()].mu.size();
    std::vector<double> flat = gather_mu(latents, members, dim);

    if (preset_epsilon) {
        det.epsilon = *preset_epsilon;
    } else {
        det.kdist = kdist_curve(flat, dim, static_cast<size_t>(settings.min_points));
        if (det.kdist.size() <= settings.smooth_window) {
            // Tiny class: fall back to the raw curve with the smallest odd window.
            EpsilonEstimate est = estimate_epsilon(det.kdist, std::min<size_t>(1, det.kdist.size() - 1));
            det.epsilon = est.epsilon;
            det.flat_curve = est.degenerate_flat;
        } else {
            EpsilonEstimate est = estimate_epsilon(det.kdist, settings.smooth_window);
            det.epsilon = est.epsilon;
            det.flat_curve = est.degenerate_flat;
        }
    }
    if (!(det.epsilon > 0.0)) {
        // Coincident points: every pairwise distance is zero, nothing is an outlier.
        det.epsilon = std::numeric_limits<double>::min();
    }

    det.assignment = dbscan(flat, dim, {det.epsilon, settings.min_points});
    det.cluster_count = det.assignment.num_clusters;
    for (size_t i = 0; i < members.size(); ++i) {
        if (det.assignment.cluster[i] == kNoiseCluster) det.outlier_indices.push_back(members[i]);
    }
    return det;
}

} // namespace detail

/// Runs the per-class detection scheme: extract one class's latent points,
/// pick epsilon, cluster, and mark DBSCAN noise as mislabeled. Classes with
/// fewer than min_points + 1 samples are skipped (no removal). Only current
/// labels are consulted; ground truth stays in the evaluation stage.
inline DetectionResult detect_and_remove(const LabeledDataset& ds,
                                         const std::vector<LatentPoint>& latents,
                                         const DetectionSettings& settings) {
    if (latents.size() != ds.size()) {
        throw ArgumentError("latent points must cover every sample");
    }
    for (size_t i = 0; i < latents.size(); ++i) {
        if (latents[i].sample_index != i) {
            throw ArgumentError("latent points must be ordered by sample index");
        }
    }
    if (settings.min_points < 1) throw ArgumentError("min_points must be >= 1");
    if (settings.eps_mode == EpsMode::Fixed && !(settings.fixed_epsilon > 0.0)) {
        throw ArgumentError("fixed epsilon mode needs a positive epsilon");
    }

    DetectionResult result;
    result.settings = settings;
    result.total = ds.size();

    std::optional<double> shared_eps;
    if (settings.eps_mode == EpsMode::Fixed) {
        shared_eps = settings.fixed_epsilon;
    } else if (settings.eps_mode == EpsMode::Global) {
        // One curve over the whole latent set, one epsilon for every class.
        if (ds.size() > static_cast<size_t>(settings.min_points)) {
            const size_t dim = latents.front().mu.size();
            std::vector<size_t> all(ds.size());
            for (size_t i = 0; i < all.size(); ++i) all[i] = i;
            std::vector<double> flat = detail::gather_mu(latents, all, dim);
            auto curve = kdist_curve(flat, dim, static_cast<size_t>(settings.min_points));
            size_t w = curve.size() > settings.smooth_window ? settings.smooth_window : 1;
            shared_eps = estimate_epsilon(curve, w).epsilon;
        } else {
            shared_eps = std::numeric_limits<double>::min();
        }
    }

    std::map<int, std::vector<size_t>> by_class;
    for (size_t i = 0; i < ds.size(); ++i) by_class[ds.labels[i]].push_back(i);

    std::set<size_t> removed;
    for (const auto& [cls, members] : by_class) {
        ClassDetection det = detail::detect_one_class(latents, members, cls, settings, shared_eps);
        removed.insert(det.outlier_indices.begin(), det.outlier_indices.end());
        result.per_class.push_back(std::move(det));
    }
    result.removed.assign(removed.begin(), removed.end());
    result.retained.reserve(ds.size() - result.removed.size());
    for (size_t i = 0; i < ds.size(); ++i) {
        if (!removed.count(i)) result.retained.push_back(i);
    }
    return result;
}

/// Dataset restricted to the retained indices; images and labels unchanged,
/// source order preserved.
inline LabeledDataset retained_dataset(const LabeledDataset& ds, const DetectionResult& result) {
    LabeledDataset out;
    out.num_classes = ds.num_classes;
    out.bit_depth = ds.bit_depth;
    out.name = ds.name + "-cleaned";
    out.format = ds.format;
    out.images.reserve(result.retained.size());
    for (size_t i : result.retained) {
        out.images.push_back(ds.images[i]);
        out.labels.push_back(ds.labels[i]);
        out.true_labels.push_back(ds.true_labels[i]);
    }
    return out;
}

/// Removal manifest: sample_index,class,epsilon_used,was_flipped.
/// was_flipped is "na" when no ledger is supplied.
inline void write_removal_manifest(const std::string& path, const DetectionResult& result,
                                   const LabeledDataset& ds, const NoiseLedger* ledger) {
    std::map<size_t, double> eps_of;
    for (const auto& det : result.per_class) {
        for (size_t idx : det.outlier_indices) eps_of[idx] = det.epsilon;
    }
    std::ostringstream ss;
    ss << "sample_index,class,epsilon_used,was_flipped\n";
    for (size_t idx : result.removed) {
        ss << idx << "," << ds.labels[idx] << "," << fmt_double(eps_of.at(idx)) << ",";
        if (ledger) {
            ss << (ledger->flipped_indices.count(idx) ? 1 : 0);
        } else {
            ss << "na";
        }
        ss << "\n";
    }
    write_text_file(path, ss.str());
}

inline std::vector<size_t> read_removal_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open: " + path);
    std::string line;
    if (!std::getline(in, line) || trim(line) != "sample_index,class,epsilon_used,was_flipped") {
        throw FormatError(path + ": missing removal manifest header");
    }
    std::vector<size_t> removed;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty()) continue;
        auto parts = split(line, ',');
        if (parts.size() != 4) throw FormatError(path + ": bad row '" + line + "'");
        removed.push_back(static_cast<size_t>(parse_int(parts[0])));
    }
    std::sort(removed.begin(), removed.end());
    return removed;
}

/// Per-point cluster assignment across all classes:
/// sample_index,cluster,role with cluster "NOISE" for outliers. Cluster ids
/// are namespaced per class as "<class>:<id>".
inline void write_assignment_csv(const std::string& path, const DetectionResult& result) {
    std::map<size_t, std::pair<std::string, const char*>> rows;
    for (const auto& det : result.per_class) {
        for (size_t i = 0; i < det.member_indices.size(); ++i) {
            std::string cluster = "NOISE";
            const char* role = "noise";
            if (det.skipped) {
                cluster = "SKIPPED";
                role = "skipped";
            } else if (det.assignment.cluster[i] != kNoiseCluster) {
                cluster = std::to_string(det.class_id) + ":" + std::to_string(det.assignment.cluster[i]);
                role = role_name(det.assignment.role[i]);
            }
            rows[det.member_indices[i]] = {cluster, role};
        }
    }
    std::ostringstream ss;
    ss << "sample_index,cluster,role\n";
    for (const auto& [idx, row] : rows) ss << idx << "," << row.first << "," << row.second << "\n";
    write_text_file(path, ss.str());
}

/// Emits the retained dataset in the format it was read from, plus the
/// removal manifest next to it.
inline void write_cleaned(const LabeledDataset& ds, const DetectionResult& result,
                          const std::string& out_dir, const NoiseLedger* ledger = nullptr) {
    LabeledDataset kept = retained_dataset(ds, result);
    if (ds.format == SourceFormat::Idx) {
        write_idx(kept, out_dir + "/cleaned-images-idx3-ubyte", out_dir + "/cleaned-labels-idx1-ubyte");
    } else {
        write_cifar10(kept, out_dir + "/cleaned.bin");
    }
    write_removal_manifest(out_dir + "/removal_manifest.csv", result, ds, ledger);
}

} // namespace latentclean
