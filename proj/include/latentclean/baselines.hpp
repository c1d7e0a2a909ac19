#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "latentclean/dataset.hpp"
#include "latentclean/errors.hpp"
#include "latentclean/linalg.hpp"
#include "latentclean/parallel.hpp"
#include "latentclean/rng.hpp"
#include "latentclean/util.hpp"

namespace latentclean {

/// Stratified sample of the (noisy-labeled) training data that the two
/// relabeling baselines classify against.
struct RepresentativeSet {
    std::vector<size_t> indices;  // into the dataset, ascending
    MatrixD vectors;              // flattened [0,1] pixels, one row per rep
    std::vector<int> labels;      // the reps' current labels
    uint64_t seed = 0;
};

inline MatrixD flatten_images(const LabeledDataset& ds, const std::vector<size_t>& which) {
    if (which.empty()) return {};
    const size_t per = ds.images.front().size();
    MatrixD m(which.size(), per);
    for (size_t i = 0; i < which.size(); ++i) {
        const Tensor& img = ds.images[which[i]];
        for (size_t j = 0; j < per; ++j) m.at(i, j) = static_cast<double>(img.data[j]);
    }
    return m;
}

/// Uniform stratified sample: per class (by current label), round(fraction *
/// class size) members drawn without replacement. Deterministic per seed.
inline RepresentativeSet select_representatives(const LabeledDataset& ds, double fraction, uint64_t seed) {
    if (!(fraction > 0.0) || fraction > 1.0) throw ArgumentError("fraction must be in (0, 1]");
    std::map<int, std::vector<size_t>> by_class;
    for (size_t i = 0; i < ds.size(); ++i) by_class[ds.labels[i]].push_back(i);

    Rng rng(derive_seed(seed, 0x33u));
    std::vector<size_t> chosen;
    for (const auto& [cls, members] : by_class) {
        size_t want = static_cast<size_t>(std::llround(fraction * static_cast<double>(members.size())));
        want = std::min(want, members.size());
        auto sel = rng.sample_without_replacement(members.size(), want);
        for (size_t s : sel) chosen.push_back(members[s]);
    }
    if (chosen.empty()) throw ArgumentError("fraction yields an empty representative set");
    std::sort(chosen.begin(), chosen.end());

    RepresentativeSet reps;
    reps.seed = seed;
    reps.indices = chosen;
    reps.vectors = flatten_images(ds, chosen);
    reps.labels.reserve(chosen.size());
    for (size_t i : chosen) reps.labels.push_back(ds.labels[i]);
    return reps;
}

namespace detail {

/// Majority label among the K nearest rows of `reps` to `query`, excluding
/// the representative whose dataset index equals `self_index`. Distance ties
/// resolve by lower representative index; vote ties by smaller class id.
inline int knn_vote(const MatrixD& reps, const std::vector<int>& rep_labels,
                    const std::vector<size_t>& rep_indices, const double* query,
                    size_t dim, size_t K, size_t self_index) {
    std::vector<std::pair<double, size_t>> dists;
    dists.reserve(reps.rows);
    for (size_t r = 0; r < reps.rows; ++r) {
        if (rep_indices[r] == self_index) continue;
        double acc = 0.0;
        const double* row = reps.row(r);
        for (size_t j = 0; j < dim; ++j) {
            double d = query[j] - row[j];
            acc += d * d;
        }
        dists.push_back({acc, r});
    }
    const size_t take = std::min(K, dists.size());
    std::partial_sort(dists.begin(), dists.begin() + take, dists.end());
    std::map<int, size_t> votes;
    for (size_t i = 0; i < take; ++i) ++votes[rep_labels[dists[i].second]];
    int best_label = -1;
    size_t best_count = 0;
    for (const auto& [label, count] : votes) {
        if (count > best_count) { // map iterates ascending, so ties keep the smaller id
            best_count = count;
            best_label = label;
        }
    }
    return best_label;
}

inline LabeledDataset relabel_with(const LabeledDataset& ds, const MatrixD& all_vectors,
                                   const MatrixD& rep_vectors, const RepresentativeSet& reps, size_t K) {
    LabeledDataset out = ds;
    out.name = ds.name + "-relabeled";
    const size_t dim = all_vectors.cols;
    parallel_for(0, ds.size(), [&](size_t i0, size_t i1) {
        for (size_t i = i0; i < i1; ++i) {
            out.labels[i] = knn_vote(rep_vectors, reps.labels, reps.indices,
                                     all_vectors.row(i), dim, K, i);
        }
    }, 16);
    return out;
}

} // namespace detail

/// Baseline 1: every sample's label becomes the majority label of its K
/// nearest representatives, measured in flat pixel space. Images and dataset
/// size never change.
inline LabeledDataset knn_relabel(const LabeledDataset& ds, const RepresentativeSet& reps, size_t K) {
    if (K < 1 || K > reps.indices.size()) throw ArgumentError("K must be in [1, |reps|]");
    std::vector<size_t> all(ds.size());
    for (size_t i = 0; i < all.size(); ++i) all[i] = i;
    MatrixD vectors = flatten_images(ds, all);
    return detail::relabel_with(ds, vectors, reps.vectors, reps, K);
}

/// Baseline 2: build the top-n eigenbasis from the representatives, project
/// everything onto it, then apply the same KNN vote in eigenspace.
inline LabeledDataset eigen_relabel(const LabeledDataset& ds, const RepresentativeSet& reps,
                                    size_t n_components, size_t K) {
    if (K < 1 || K > reps.indices.size()) throw ArgumentError("K must be in [1, |reps|]");
    EigenBasis basis = eigen_top_n(reps.vectors, n_components);
    std::vector<size_t> all(ds.size());
    for (size_t i = 0; i < all.size(); ++i) all[i] = i;
    MatrixD vectors = flatten_images(ds, all);
    MatrixD proj_all = pca_project(vectors, basis, n_components);
    MatrixD proj_reps = pca_project(reps.vectors, basis, n_components);
    return detail::relabel_with(ds, proj_all, proj_reps, reps, K);
}

/// Relabel manifest: sample_index,old_label,new_label (changed rows only).
inline void write_relabel_manifest(const std::string& path, const LabeledDataset& before,
                                   const LabeledDataset& after) {
    if (before.size() != after.size()) throw ConsistencyError("relabel manifest: size mismatch");
    std::ostringstream ss;
    ss << "sample_index,old_label,new_label\n";
    for (size_t i = 0; i < before.size(); ++i) {
        if (before.labels[i] != after.labels[i]) {
            ss << i << "," << before.labels[i] << "," << after.labels[i] << "\n";
        }
    }
    write_text_file(path, ss.str());
}

} // namespace latentclean
