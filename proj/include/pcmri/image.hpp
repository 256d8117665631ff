#pragma once

#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "pcmri/rng.hpp"

namespace pcmri {

inline constexpr int kStandardSize = 224;

// Row-major grayscale image, intensities in [0,1].
struct ImageGray {
    int width = 0;
    int height = 0;
    std::vector<double> pixels;

    ImageGray() = default;
    ImageGray(int w, int h, double fill = 0.0)
        : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill) {}

    double& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
    double at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
};

struct AugSpec {
    double max_rotation_deg = 10.0;
    double hflip_prob = 0.5;
    double max_translate_frac = 0.05;
    double scale_lo = 0.95;
    double scale_hi = 1.05;
    double intensity_jitter = 0.05;
    double contrast_jitter = 0.1;

    void validate() const;

    // All magnitudes zero; augment() becomes the identity.
    static AugSpec identity();
    // Stronger geometric preset: rotation +/-15 deg, translate 0.08, scale [0.9,1.1].
    static AugSpec safeaug();
};

// PNG/JPEG decode; RGB inputs are collapsed by luminance.
ImageGray decode_gray(const std::filesystem::path& file);

// 8-bit grayscale PNG, for audit output.
void write_png(const ImageGray& img, const std::filesystem::path& file);

// Bilinear resample with half-pixel centers; same-size calls are exact copies.
ImageGray resize_bilinear(const ImageGray& src, int out_w, int out_h);

// Resize to 224x224 and min-max normalize (constant images map to all-0.5).
ImageGray standardize(const ImageGray& raw);

ImageGray hflip(const ImageGray& img);

// Rotation about center, then translation, then scaling about center, composed
// into one inverse-mapped bilinear pass with edge-replicate fill.
ImageGray affine_resample(const ImageGray& img, double rot_deg, double tx_px, double ty_px,
                          double scale);

// Fixed stage order: hflip, rotation, translation, scaling, intensity/contrast
// jitter; output clamped to [0,1].
ImageGray augment(const ImageGray& img, const AugSpec& spec, Rng& rng);

// n_per_image seeded variants per input; labels are copied unchanged.
std::vector<std::pair<ImageGray, int>> synthesize_variants(
    const std::vector<std::pair<ImageGray, int>>& train_fold, int n_per_image,
    const AugSpec& spec, std::uint64_t seed);

}  // namespace pcmri
