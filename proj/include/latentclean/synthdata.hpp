#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "latentclean/dataset.hpp"
#include "latentclean/rng.hpp"
#include "latentclean/tensor.hpp"

namespace latentclean {

/// Procedural 10-class image sets in the exact on-disk formats of the real
/// corpora, for desk-scale runs and tests in environments where the original
/// files are unavailable. Shapes28 and Garments28 are 28x28 grayscale (IDX);
/// Objects32 is 32x32 RGB over high-variance gradient backgrounds (CIFAR
/// records), where raw-pixel distance is deliberately dominated by the
/// background rather than the class.
enum class SynthKind { Shapes28, Garments28, Objects32 };

inline SynthKind synth_kind_from_name(const std::string& s) {
    if (s == "shapes28" || s == "mnist-like") return SynthKind::Shapes28;
    if (s == "garments28" || s == "fashion-like") return SynthKind::Garments28;
    if (s == "objects32" || s == "cifar-like") return SynthKind::Objects32;
    throw ArgumentError("unknown synthetic kind '" + s + "' (shapes28 | garments28 | objects32)");
}

namespace synth {

struct Canvas {
    size_t side;
    std::vector<float> a; // grayscale coverage [0,1]

    explicit Canvas(size_t s) : side(s), a(s * s, 0.0f) {}

    void blend(size_t y, size_t x, float v) {
        float& px = a[y * side + x];
        px = std::max(px, v);
    }
};

inline void draw_disk(Canvas& c, double cy, double cx, double r, float val) {
    for (size_t y = 0; y < c.side; ++y) {
        for (size_t x = 0; x < c.side; ++x) {
            double d = std::hypot(static_cast<double>(y) - cy, static_cast<double>(x) - cx);
            double cov = std::clamp(r - d + 0.5, 0.0, 1.0);
            if (cov > 0.0) c.blend(y, x, val * static_cast<float>(cov));
        }
    }
}

inline void draw_ring(Canvas& c, double cy, double cx, double r, double thick, float val) {
    for (size_t y = 0; y < c.side; ++y) {
        for (size_t x = 0; x < c.side; ++x) {
            double d = std::hypot(static_cast<double>(y) - cy, static_cast<double>(x) - cx);
            double cov = std::clamp(thick * 0.5 - std::abs(d - r) + 0.5, 0.0, 1.0);
            if (cov > 0.0) c.blend(y, x, val * static_cast<float>(cov));
        }
    }
}

inline void draw_rect(Canvas& c, double cy, double cx, double hh, double hw, float val) {
    for (size_t y = 0; y < c.side; ++y) {
        for (size_t x = 0; x < c.side; ++x) {
            double d = std::max(std::abs(static_cast<double>(y) - cy) - hh,
                                std::abs(static_cast<double>(x) - cx) - hw);
            double cov = std::clamp(0.5 - d, 0.0, 1.0);
            if (cov > 0.0) c.blend(y, x, val * static_cast<float>(cov));
        }
    }
}

inline void draw_rect_outline(Canvas& c, double cy, double cx, double hh, double hw,
                              double thick, float val) {
    for (size_t y = 0; y < c.side; ++y) {
        for (size_t x = 0; x < c.side; ++x) {
            double d = std::max(std::abs(static_cast<double>(y) - cy) - hh,
                                std::abs(static_cast<double>(x) - cx) - hw);
            double cov = std::clamp(thick * 0.5 - std::abs(d) + 0.5, 0.0, 1.0);
            if (cov > 0.0) c.blend(y, x, val * static_cast<float>(cov));
        }
    }
}

inline void draw_segment(Canvas& c, double y0, double x0, double y1, double x1,
                         double thick, float val) {
    const double vy = y1 - y0, vx = x1 - x0;
    const double len_sq = vy * vy + vx * vx;
    for (size_t y = 0; y < c.side; ++y) {
        for (size_t x = 0; x < c.side; ++x) {
            double t = len_sq > 0.0
                           ? std::clamp(((y - y0) * vy + (x - x0) * vx) / len_sq, 0.0, 1.0)
                           : 0.0;
            double d = std::hypot(y - (y0 + t * vy), x - (x0 + t * vx));
            double cov = std::clamp(thick * 0.5 - d + 0.5, 0.0, 1.0);
            if (cov > 0.0) c.blend(y, x, val * static_cast<float>(cov));
        }
    }
}

inline void draw_diamond(Canvas& c, double cy, double cx, double r, float val) {
    for (size_t y = 0; y < c.side; ++y) {
        for (size_t x = 0; x < c.side; ++x) {
            double d = std::abs(static_cast<double>(y) - cy) + std::abs(static_cast<double>(x) - cx);
            double cov = std::clamp(r - d + 0.5, 0.0, 1.0);
            if (cov > 0.0) c.blend(y, x, val * static_cast<float>(cov));
        }
    }
}

/// Filled shape whose half-width interpolates from hw_top at cy-hh to
/// hw_bot at cy+hh (trapezoids, triangles, hourglasses).
inline void draw_taper(Canvas& c, double cy, double cx, double hh, double hw_top,
                       double hw_bot, float val) {
    for (size_t y = 0; y < c.side; ++y) {
        double t = ((static_cast<double>(y) - (cy - hh)) / (2.0 * hh));
        if (t < -0.5 || t > 1.5) continue;
        double tc = std::clamp(t, 0.0, 1.0);
        double hw = hw_top + tc * (hw_bot - hw_top);
        double dy = std::abs(static_cast<double>(y) - cy) - hh;
        for (size_t x = 0; x < c.side; ++x) {
            double dx = std::abs(static_cast<double>(x) - cx) - hw;
            double cov = std::clamp(0.5 - std::max(dy, dx), 0.0, 1.0);
            if (cov > 0.0) c.blend(y, x, val * static_cast<float>(cov));
        }
    }
}

/// One of ten geometric glyph families with jittered pose, scale, stroke,
/// and intensity.
inline void draw_glyph(Canvas& c, int cls, Rng& rng) {
    const double mid = static_cast<double>(c.side) / 2.0 - 0.5;
    const double cy = mid + rng.uniform(-2.5, 2.5);
    const double cx = mid + rng.uniform(-2.5, 2.5);
    const double s = (static_cast<double>(c.side) / 28.0) * rng.uniform(0.82, 1.18);
    const double th = rng.uniform(2.0, 3.4) * s;
    const float val = static_cast<float>(rng.uniform(0.72, 1.0));
    const double tilt = rng.uniform(-0.22, 0.22); // radians, for stroke classes

    auto rot = [&](double dy, double dx, double& oy, double& ox) {
        oy = cy + dy * std::cos(tilt) - dx * std::sin(tilt);
        ox = cx + dy * std::sin(tilt) + dx * std::cos(tilt);
    };

    switch (cls) {
        case 0: // filled disk
            draw_disk(c, cy, cx, 6.5 * s, val);
            break;
        case 1: { // vertical stroke
            double y0, x0, y1, x1;
            rot(-8.0 * s, 0, y0, x0);
            rot(8.0 * s, 0, y1, x1);
            draw_segment(c, y0, x0, y1, x1, th, val);
            break;
        }
        case 2: { // horizontal stroke
            double y0, x0, y1, x1;
            rot(0, -8.0 * s, y0, x0);
            rot(0, 8.0 * s, y1, x1);
            draw_segment(c, y0, x0, y1, x1, th, val);
            break;
        }
        case 3: // ring
            draw_ring(c, cy, cx, 6.3 * s, rng.uniform(2.0, 3.2) * s, val);
            break;
        case 4: { // plus
            double y0, x0, y1, x1;
            rot(-7.0 * s, 0, y0, x0);
            rot(7.0 * s, 0, y1, x1);
            draw_segment(c, y0, x0, y1, x1, th, val);
            rot(0, -7.0 * s, y0, x0);
            rot(0, 7.0 * s, y1, x1);
            draw_segment(c, y0, x0, y1, x1, th, val);
            break;
        }
        case 5: { // X
            double y0, x0, y1, x1;
            rot(-6.0 * s, -6.0 * s, y0, x0);
            rot(6.0 * s, 6.0 * s, y1, x1);
            draw_segment(c, y0, x0, y1, x1, th, val);
            rot(-6.0 * s, 6.0 * s, y0, x0);
            rot(6.0 * s, -6.0 * s, y1, x1);
            draw_segment(c, y0, x0, y1, x1, th, val);
            break;
        }
        case 6: // square outline
            draw_rect_outline(c, cy, cx, 6.0 * s, 6.0 * s, rng.uniform(1.8, 3.0) * s, val);
            break;
        case 7: // filled square
            draw_rect(c, cy, cx, 5.0 * s, 5.0 * s, val);
            break;
        case 8: { // diagonal stroke
            double y0, x0, y1, x1;
            rot(-7.0 * s, -7.0 * s, y0, x0);
            rot(7.0 * s, 7.0 * s, y1, x1);
            draw_segment(c, y0, x0, y1, x1, th * 1.2, val);
            break;
        }
        default: // two stacked dots
            draw_disk(c, cy - 4.6 * s, cx, 2.9 * s, val);
            draw_disk(c, cy + 4.6 * s, cx, 2.9 * s, val);
            break;
    }
}

/// Ten solid silhouette families, larger and blobbier than the glyphs.
inline void draw_garment(Canvas& c, int cls, Rng& rng) {
    const double mid = static_cast<double>(c.side) / 2.0 - 0.5;
    const double cy = mid + rng.uniform(-2.0, 2.0);
    const double cx = mid + rng.uniform(-2.0, 2.0);
    const double s = (static_cast<double>(c.side) / 28.0) * rng.uniform(0.82, 1.15);
    const float val = static_cast<float>(rng.uniform(0.68, 1.0));

    switch (cls) {
        case 0: // tall block
            draw_rect(c, cy, cx, 9.0 * s, 4.0 * s, val);
            break;
        case 1: // wide block
            draw_rect(c, cy, cx, 4.0 * s, 9.0 * s, val);
            break;
        case 2: // tee: wide top bar + tall torso
            draw_rect(c, cy - 5.5 * s, cx, 2.6 * s, 9.0 * s, val);
            draw_rect(c, cy + 1.5 * s, cx, 6.0 * s, 4.2 * s, val);
            break;
        case 3: // H
            draw_rect(c, cy, cx - 5.5 * s, 8.0 * s, 2.0 * s, val);
            draw_rect(c, cy, cx + 5.5 * s, 8.0 * s, 2.0 * s, val);
            draw_rect(c, cy, cx, 1.8 * s, 5.5 * s, val);
            break;
        case 4: // L
            draw_rect(c, cy, cx - 4.5 * s, 8.0 * s, 2.2 * s, val);
            draw_rect(c, cy + 6.0 * s, cx + 1.0 * s, 2.2 * s, 7.0 * s, val);
            break;
        case 5: // U
            draw_rect(c, cy - 1.0 * s, cx - 5.5 * s, 7.0 * s, 2.0 * s, val);
            draw_rect(c, cy - 1.0 * s, cx + 5.5 * s, 7.0 * s, 2.0 * s, val);
            draw_rect(c, cy + 6.0 * s, cx, 2.0 * s, 7.0 * s, val);
            break;
        case 6: // gown: narrow top widening down
            draw_taper(c, cy, cx, 8.5 * s, 2.5 * s, 8.0 * s, val);
            break;
        case 7: // diamond
            draw_diamond(c, cy, cx, 8.0 * s, val);
            break;
        case 8: // hourglass
            draw_taper(c, cy - 4.0 * s, cx, 4.0 * s, 7.0 * s, 1.2 * s, val);
            draw_taper(c, cy + 4.0 * s, cx, 4.0 * s, 1.2 * s, 7.0 * s, val);
            break;
        default: // frame
            draw_rect_outline(c, cy, cx, 7.5 * s, 7.5 * s, rng.uniform(2.2, 3.4) * s, val);
            break;
    }
}

inline float quantize8(double v) {
    double clipped = std::clamp(v, 0.0, 1.0);
    return static_cast<float>(std::lround(clipped * 255.0)) / 255.0f;
}

inline Tensor gray_sample(int cls, Rng& rng, bool garments, size_t side) {
    Canvas canvas(side);
    if (garments) {
        draw_garment(canvas, cls, rng);
    } else {
        draw_glyph(canvas, cls, rng);
    }
    Tensor img({side, side, 1});
    const double noise_sd = garments ? 0.06 : 0.05;
    for (size_t i = 0; i < canvas.a.size(); ++i) {
        img.data[i] = quantize8(static_cast<double>(canvas.a[i]) + noise_sd * rng.normal());
    }
    return img;
}

/// Color sample: class glyph in a contrasting solid color over a random
/// two-color linear gradient background. Background variance is several
/// times the class signal in raw pixel distance.
inline Tensor color_sample(int cls, Rng& rng, size_t side) {
    Canvas mask(side);
    draw_glyph(mask, cls, rng);

    double a_col[3], b_col[3];
    for (double& v : a_col) v = rng.uniform(0.0, 1.0);
    for (double& v : b_col) v = rng.uniform(0.0, 1.0);
    const int dir = static_cast<int>(rng.below(3)); // 0: horizontal, 1: vertical, 2: diagonal
    double fg[3];
    for (int ch = 0; ch < 3; ++ch) {
        double midv = 0.5 * (a_col[ch] + b_col[ch]);
        fg[ch] = midv >= 0.5 ? midv - 0.5 : midv + 0.5;
    }

    Tensor img({side, side, 3});
    const double denom = static_cast<double>(side - 1);
    for (size_t y = 0; y < side; ++y) {
        for (size_t x = 0; x < side; ++x) {
            double t;
            if (dir == 0) t = static_cast<double>(x) / denom;
            else if (dir == 1) t = static_cast<double>(y) / denom;
            else t = (static_cast<double>(x) + static_cast<double>(y)) / (2.0 * denom);
            const double m = static_cast<double>(mask.a[y * side + x]) * 0.9;
            for (int ch = 0; ch < 3; ++ch) {
                double bg = a_col[ch] + t * (b_col[ch] - a_col[ch]);
                double v = bg * (1.0 - m) + fg[ch] * m + 0.03 * rng.normal();
                img.data[(y * side + x) * 3 + ch] = quantize8(v);
            }
        }
    }
    return img;
}

} // namespace synth

inline LabeledDataset make_synthetic_dataset(SynthKind kind, size_t n, uint64_t seed,
                                             const std::string& name = "") {
    if (n == 0) throw ArgumentError("synthetic dataset needs at least one sample");
    LabeledDataset ds;
    ds.num_classes = 10;
    ds.bit_depth = 8;
    Rng rng(derive_seed(seed, 0x44u));
    switch (kind) {
        case SynthKind::Shapes28:
            ds.name = name.empty() ? "shapes28" : name;
            ds.format = SourceFormat::Idx;
            break;
        case SynthKind::Garments28:
            ds.name = name.empty() ? "garments28" : name;
            ds.format = SourceFormat::Idx;
            break;
        case SynthKind::Objects32:
            ds.name = name.empty() ? "objects32" : name;
            ds.format = SourceFormat::Cifar10;
            break;
    }
    ds.images.reserve(n);
    for (size_t i = 0; i < n; ++i) {
        int cls = static_cast<int>(rng.below(10));
        ds.labels.push_back(cls);
        switch (kind) {
            case SynthKind::Shapes28:
                ds.images.push_back(synth::gray_sample(cls, rng, false, 28));
                break;
            case SynthKind::Garments28:
                ds.images.push_back(synth::gray_sample(cls, rng, true, 28));
                break;
            case SynthKind::Objects32:
                ds.images.push_back(synth::color_sample(cls, rng, 32));
                break;
        }
    }
    ds.true_labels = ds.labels;
    return ds;
}

} // namespace latentclean
