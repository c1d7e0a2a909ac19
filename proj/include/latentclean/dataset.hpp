#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "latentclean/errors.hpp"
#include "latentclean/rng.hpp"
#include "latentclean/tensor.hpp"
#include "latentclean/util.hpp"

namespace latentclean {

enum class SourceFormat { Idx, Cifar10 };

/// Image-classification training set with both the working labels and the
/// immutable ground truth they started from. Pixels are stored in [0,1];
/// the source bit depth is kept for metrics that need the integer scale.
struct LabeledDataset {
    std::vector<Tensor> images;   // each [H,W,C]
    std::vector<int> labels;      // current (possibly noised) labels
    std::vector<int> true_labels; // ground truth, never modified downstream
    int num_classes = 0;
    int bit_depth = 8;
    std::string name;
    SourceFormat format = SourceFormat::Idx;

    size_t size() const { return images.size(); }

    std::vector<size_t> image_shape() const {
        if (images.empty()) return {};
        return images.front().shape;
    }

    void validate() const {
        if (images.size() != labels.size() || labels.size() != true_labels.size()) {
            throw ConsistencyError("dataset arrays disagree in length");
        }
        const auto shape = image_shape();
        for (size_t i = 0; i < images.size(); ++i) {
            if (images[i].shape != shape) throw ConsistencyError("images disagree in shape");
            if (labels[i] < 0 || labels[i] >= num_classes || true_labels[i] < 0 || true_labels[i] >= num_classes) {
                throw ConsistencyError("label out of range at index " + std::to_string(i));
            }
        }
    }
};

/// Ground-truth record of one injection run: which indices were flipped and
/// from/to what. Only evaluation reads it.
struct NoiseLedger {
    std::set<size_t> flipped_indices;
    std::map<size_t, int> original_label;
    std::map<size_t, int> assigned_label;
    double noise_rate = 0.0;
    uint64_t rng_seed = 0;
};

namespace detail {

inline uint32_t read_be_u32(std::istream& in, const std::string& path) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw TruncationError(path + ": ended inside header");
    return (static_cast<uint32_t>(b[0]) << 24) | (static_cast<uint32_t>(b[1]) << 16) |
           (static_cast<uint32_t>(b[2]) << 8) | static_cast<uint32_t>(b[3]);
}

inline void write_be_u32(std::ostream& out, uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

inline int max_label(const std::vector<int>& labels) {
    int m = -1;
    for (int l : labels) m = std::max(m, l);
    return m;
}

} // namespace detail

inline constexpr uint32_t kIdxImagesMagic = 0x00000803; // ubyte, 3 dims
inline constexpr uint32_t kIdxLabelsMagic = 0x00000801; // ubyte, 1 dim

/// Parses an IDX image/label file pair (the MNIST distribution format).
/// Pixels come out as value / (2^d - 1) with d = 8.
inline LabeledDataset read_idx(const std::string& images_path, const std::string& labels_path,
                               const std::string& name = "idx", int num_classes = 0) {
    std::ifstream imgs(images_path, std::ios::binary);
    if (!imgs) throw IoError("cannot open: " + images_path);
    std::ifstream labs(labels_path, std::ios::binary);
    if (!labs) throw IoError("cannot open: " + labels_path);

    uint32_t img_magic = detail::read_be_u32(imgs, images_path);
    if (img_magic != kIdxImagesMagic) {
        std::ostringstream ss;
        ss << images_path << ": bad image magic 0x" << std::hex << img_magic;
        throw FormatError(ss.str());
    }
    uint32_t lab_magic = detail::read_be_u32(labs, labels_path);
    if (lab_magic != kIdxLabelsMagic) {
        std::ostringstream ss;
        ss << labels_path << ": bad label magic 0x" << std::hex << lab_magic;
        throw FormatError(ss.str());
    }

    uint32_t n_imgs = detail::read_be_u32(imgs, images_path);
    uint32_t rows = detail::read_be_u32(imgs, images_path);
    uint32_t cols = detail::read_be_u32(imgs, images_path);
    uint32_t n_labs = detail::read_be_u32(labs, labels_path);
    if (n_imgs != n_labs) {
        throw ConsistencyError(images_path + " has " + std::to_string(n_imgs) + " images but " +
                               labels_path + " has " + std::to_string(n_labs) + " labels");
    }

    LabeledDataset ds;
    ds.name = name;
    ds.format = SourceFormat::Idx;
    ds.bit_depth = 8;
    const size_t px = static_cast<size_t>(rows) * cols;
    std::vector<unsigned char> buf(px);
    ds.images.reserve(n_imgs);
    for (uint32_t i = 0; i < n_imgs; ++i) {
        imgs.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(px));
        if (!imgs) throw TruncationError(images_path + ": ended inside image " + std::to_string(i));
        Tensor img({rows, cols, 1});
        for (size_t j = 0; j < px; ++j) img.data[j] = static_cast<float>(buf[j]) / 255.0f;
        ds.images.push_back(std::move(img));
    }
    std::vector<unsigned char> lab_buf(n_labs);
    labs.read(reinterpret_cast<char*>(lab_buf.data()), static_cast<std::streamsize>(n_labs));
    if (!labs) throw TruncationError(labels_path + ": ended inside labels");
    ds.labels.assign(lab_buf.begin(), lab_buf.end());
    ds.true_labels = ds.labels;
    ds.num_classes = num_classes > 0 ? num_classes : detail::max_label(ds.labels) + 1;
    ds.validate();
    return ds;
}

/// Writes the dataset back to the IDX pair, quantizing pixels to the 8-bit
/// grid. Parsing followed by writing is byte-identical to the source.
inline void write_idx(const LabeledDataset& ds, const std::string& images_path, const std::string& labels_path) {
    const auto shape = ds.image_shape();
    if (shape.size() != 3 || shape[2] != 1) throw ShapeError("write_idx: dataset is not single-channel");
    std::ofstream imgs(images_path, std::ios::binary);
    if (!imgs) throw IoError("cannot write: " + images_path);
    std::ofstream labs(labels_path, std::ios::binary);
    if (!labs) throw IoError("cannot write: " + labels_path);

    detail::write_be_u32(imgs, kIdxImagesMagic);
    detail::write_be_u32(imgs, static_cast<uint32_t>(ds.size()));
    detail::write_be_u32(imgs, static_cast<uint32_t>(shape[0]));
    detail::write_be_u32(imgs, static_cast<uint32_t>(shape[1]));
    detail::write_be_u32(labs, kIdxLabelsMagic);
    detail::write_be_u32(labs, static_cast<uint32_t>(ds.size()));

    std::vector<unsigned char> buf;
    for (const auto& img : ds.images) {
        buf.resize(img.size());
        for (size_t j = 0; j < img.size(); ++j) {
            long v = std::lround(static_cast<double>(img.data[j]) * 255.0);
            buf[j] = static_cast<unsigned char>(std::clamp(v, 0l, 255l));
        }
        imgs.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    }
    for (int l : ds.labels) {
        unsigned char b = static_cast<unsigned char>(l);
        labs.write(reinterpret_cast<const char*>(&b), 1);
    }
    if (!imgs || !labs) throw IoError("dataset write failed");
}

inline constexpr size_t kCifarRecordBytes = 3073; // 1 label + 3*32*32 pixels
inline constexpr size_t kCifarSide = 32;

/// Parses CIFAR-10 binary batches: records of one label byte followed by
/// channel-planar RGB pixels, deinterleaved here to H x W x C.
inline LabeledDataset read_cifar10(const std::vector<std::string>& batch_paths,
                                   const std::string& name = "cifar10") {
    LabeledDataset ds;
    ds.name = name;
    ds.format = SourceFormat::Cifar10;
    ds.bit_depth = 8;
    ds.num_classes = 10;
    const size_t plane = kCifarSide * kCifarSide;
    std::vector<unsigned char> rec(kCifarRecordBytes);
    for (const auto& path : batch_paths) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw IoError("cannot open: " + path);
        in.seekg(0, std::ios::end);
        const auto len = static_cast<size_t>(in.tellg());
        in.seekg(0);
        if (len == 0 || len % kCifarRecordBytes != 0) {
            throw FormatError(path + ": length " + std::to_string(len) + " is not a multiple of 3073");
        }
        const size_t count = len / kCifarRecordBytes;
        for (size_t i = 0; i < count; ++i) {
            in.read(reinterpret_cast<char*>(rec.data()), static_cast<std::streamsize>(kCifarRecordBytes));
            if (!in) throw TruncationError(path + ": ended inside record " + std::to_string(i));
            int label = rec[0];
            if (label >= 10) throw FormatError(path + ": label byte " + std::to_string(label) + " out of range");
            Tensor img({kCifarSide, kCifarSide, 3});
            for (size_t c = 0; c < 3; ++c) {
                const unsigned char* src = rec.data() + 1 + c * plane;
                for (size_t p = 0; p < plane; ++p) img.data[p * 3 + c] = static_cast<float>(src[p]) / 255.0f;
            }
            ds.images.push_back(std::move(img));
            ds.labels.push_back(label);
        }
    }
    ds.true_labels = ds.labels;
    ds.validate();
    return ds;
}

inline void write_cifar10(const LabeledDataset& ds, const std::string& path) {
    const auto shape = ds.image_shape();
    if (shape.size() != 3 || shape[0] != kCifarSide || shape[1] != kCifarSide || shape[2] != 3) {
        throw ShapeError("write_cifar10: dataset is not 32x32x3");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write: " + path);
    const size_t plane = kCifarSide * kCifarSide;
    std::vector<unsigned char> rec(kCifarRecordBytes);
    for (size_t i = 0; i < ds.size(); ++i) {
        rec[0] = static_cast<unsigned char>(ds.labels[i]);
        const Tensor& img = ds.images[i];
        for (size_t c = 0; c < 3; ++c) {
            unsigned char* dst = rec.data() + 1 + c * plane;
            for (size_t p = 0; p < plane; ++p) {
                long v = std::lround(static_cast<double>(img.data[p * 3 + c]) * 255.0);
                dst[p] = static_cast<unsigned char>(std::clamp(v, 0l, 255l));
            }
        }
        out.write(reinterpret_cast<const char*>(rec.data()), static_cast<std::streamsize>(kCifarRecordBytes));
    }
    if (!out) throw IoError("dataset write failed: " + path);
}

/// Flips round(noise_rate * N) uniformly chosen labels to a uniform draw over
/// the other K-1 classes. Images and true_labels are untouched; the returned
/// ledger records every flip.
inline std::pair<LabeledDataset, NoiseLedger> inject_noise(const LabeledDataset& ds,
                                                           double noise_rate, uint64_t rng_seed) {
    if (noise_rate < 0.0 || noise_rate > 1.0) {
        throw ArgumentError("noise_rate must be in [0,1], got " + fmt_double(noise_rate));
    }
    if (ds.num_classes < 2 && noise_rate > 0.0) {
        throw ArgumentError("noise injection needs at least 2 classes");
    }
    LabeledDataset out = ds;
    NoiseLedger ledger;
    ledger.noise_rate = noise_rate;
    ledger.rng_seed = rng_seed;

    const size_t n_flips = static_cast<size_t>(std::llround(noise_rate * static_cast<double>(ds.size())));
    Rng rng(rng_seed);
    std::vector<size_t> picked = rng.sample_without_replacement(ds.size(), n_flips);
    std::sort(picked.begin(), picked.end());
    const int k = ds.num_classes;
    for (size_t idx : picked) {
        int orig = out.labels[idx];
        int draw = static_cast<int>(rng.below(static_cast<uint64_t>(k - 1)));
        int assigned = draw >= orig ? draw + 1 : draw;
        out.labels[idx] = assigned;
        ledger.flipped_indices.insert(idx);
        ledger.original_label[idx] = orig;
        ledger.assigned_label[idx] = assigned;
    }
    return {std::move(out), std::move(ledger)};
}

/// Seeded stratified subsample (by true label, largest-remainder allocation),
/// preserving source order. Used for desk-scale runs.
inline LabeledDataset stratified_subset(const LabeledDataset& ds, size_t n, uint64_t rng_seed) {
    if (n == 0 || n > ds.size()) throw ArgumentError("subset size must be in [1, dataset size]");
    if (n == ds.size()) return ds;
    std::map<int, std::vector<size_t>> by_class;
    for (size_t i = 0; i < ds.size(); ++i) by_class[ds.true_labels[i]].push_back(i);

    // Largest-remainder apportionment of n over classes.
    std::vector<std::pair<int, double>> rema;
    std::map<int, size_t> take;
    size_t assigned = 0;
    for (const auto& [cls, idxs] : by_class) {
        double share = static_cast<double>(n) * static_cast<double>(idxs.size()) / static_cast<double>(ds.size());
        size_t base = static_cast<size_t>(share);
        base = std::min(base, idxs.size());
        take[cls] = base;
        assigned += base;
        rema.push_back({cls, share - static_cast<double>(base)});
    }
    std::sort(rema.begin(), rema.end(), [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    for (const auto& [cls, rem] : rema) {
        if (assigned >= n) break;
        if (take[cls] < by_class[cls].size()) {
            ++take[cls];
            ++assigned;
        }
    }

    Rng rng(derive_seed(rng_seed, 0x5u));
    std::vector<size_t> chosen;
    chosen.reserve(n);
    for (const auto& [cls, idxs] : by_class) {
        auto sel = rng.sample_without_replacement(idxs.size(), take[cls]);
        for (size_t s : sel) chosen.push_back(idxs[s]);
    }
    std::sort(chosen.begin(), chosen.end());

    LabeledDataset out;
    out.num_classes = ds.num_classes;
    out.bit_depth = ds.bit_depth;
    out.name = ds.name + "-subset";
    out.format = ds.format;
    out.images.reserve(chosen.size());
    for (size_t i : chosen) {
        out.images.push_back(ds.images[i]);
        out.labels.push_back(ds.labels[i]);
        out.true_labels.push_back(ds.true_labels[i]);
    }
    return out;
}

/// Ledger text format: two key=value header lines, a column header, then one
/// `index,original,assigned` line per flip in ascending index order.
inline void write_noise_ledger(const std::string& path, const NoiseLedger& ledger) {
    std::ostringstream ss;
    ss << "seed=" << ledger.rng_seed << "\n";
    ss << "rate=" << fmt_double(ledger.noise_rate) << "\n";
    ss << "index,original,assigned\n";
    for (size_t idx : ledger.flipped_indices) {
        ss << idx << "," << ledger.original_label.at(idx) << "," << ledger.assigned_label.at(idx) << "\n";
    }
    write_text_file(path, ss.str());
}

inline NoiseLedger read_noise_ledger(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open: " + path);
    NoiseLedger ledger;
    std::string line;
    if (!std::getline(in, line) || line.rfind("seed=", 0) != 0) throw FormatError(path + ": missing seed header");
    ledger.rng_seed = static_cast<uint64_t>(std::strtoull(line.c_str() + 5, nullptr, 10));
    if (!std::getline(in, line) || line.rfind("rate=", 0) != 0) throw FormatError(path + ": missing rate header");
    ledger.noise_rate = parse_double(line.substr(5));
    if (!std::getline(in, line) || trim(line) != "index,original,assigned") {
        throw FormatError(path + ": missing column header");
    }
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty()) continue;
        auto parts = split(line, ',');
        if (parts.size() != 3) throw FormatError(path + ": bad ledger row '" + line + "'");
        size_t idx = static_cast<size_t>(parse_int(parts[0]));
        ledger.flipped_indices.insert(idx);
        ledger.original_label[idx] = static_cast<int>(parse_int(parts[1]));
        ledger.assigned_label[idx] = static_cast<int>(parse_int(parts[2]));
    }
    return ledger;
}

/// Ground truth for evaluation: ledger originals where flipped, current
/// labels elsewhere. Lets downstream tooling recover truth from noised files.
inline std::vector<int> true_labels_from_ledger(const std::vector<int>& current, const NoiseLedger& ledger) {
    std::vector<int> truth = current;
    for (const auto& [idx, orig] : ledger.original_label) {
        if (idx >= truth.size()) throw ConsistencyError("ledger index " + std::to_string(idx) + " out of range");
        truth[idx] = orig;
    }
    return truth;
}

} // namespace latentclean
