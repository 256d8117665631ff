#include "pcmri/image.hpp"

#include <algorithm>
#include <cmath>

#include "pcmri/errors.hpp"

namespace pcmri {

namespace {

constexpr double kPi = 3.14159265358979323846;

double sample_clamped(const ImageGray& img, double x, double y) {
    // edge-replicate: clamp the sampling footprint to the image
    const int x0 = std::clamp(static_cast<int>(std::floor(x)), 0, img.width - 1);
    const int y0 = std::clamp(static_cast<int>(std::floor(y)), 0, img.height - 1);
    const int x1 = std::min(x0 + 1, img.width - 1);
    const int y1 = std::min(y0 + 1, img.height - 1);
    const double fx = std::clamp(x - x0, 0.0, 1.0);
    const double fy = std::clamp(y - y0, 0.0, 1.0);
    const double top = img.at(x0, y0) * (1.0 - fx) + img.at(x1, y0) * fx;
    const double bot = img.at(x0, y1) * (1.0 - fx) + img.at(x1, y1) * fx;
    return top * (1.0 - fy) + bot * fy;
}

}  // namespace

void AugSpec::validate() const {
    if (max_rotation_deg < 0 || max_translate_frac < 0 || intensity_jitter < 0 ||
        contrast_jitter < 0)
        throw ConfigError("augmentation magnitudes must be nonnegative");
    if (hflip_prob < 0 || hflip_prob > 1) throw ConfigError("hflip_prob must be in [0,1]");
    if (scale_lo > scale_hi) throw ConfigError("scale range lo must be <= hi");
    if (scale_lo <= 0) throw ConfigError("scale range must be positive");
}

AugSpec AugSpec::identity() {
    AugSpec s;
    s.max_rotation_deg = 0;
    s.hflip_prob = 0;
    s.max_translate_frac = 0;
    s.scale_lo = s.scale_hi = 1.0;
    s.intensity_jitter = 0;
    s.contrast_jitter = 0;
    return s;
}

AugSpec AugSpec::safeaug() {
    AugSpec s;
    s.max_rotation_deg = 15.0;
    s.max_translate_frac = 0.08;
    s.scale_lo = 0.9;
    s.scale_hi = 1.1;
    return s;
}

ImageGray resize_bilinear(const ImageGray& src, int out_w, int out_h) {
    if (src.width < 1 || src.height < 1) throw DataError("cannot resize empty image");
    if (src.width == out_w && src.height == out_h) return src;
    ImageGray out(out_w, out_h);
    const double sx = static_cast<double>(src.width) / out_w;
    const double sy = static_cast<double>(src.height) / out_h;
    for (int y = 0; y < out_h; ++y) {
        const double src_y = (y + 0.5) * sy - 0.5;
        for (int x = 0; x < out_w; ++x) {
            const double src_x = (x + 0.5) * sx - 0.5;
            out.at(x, y) = sample_clamped(src, src_x, src_y);
        }
    }
    return out;
}

ImageGray standardize(const ImageGray& raw) {
    if (raw.pixels.empty()) throw DataError("cannot standardize empty image");
    ImageGray img = resize_bilinear(raw, kStandardSize, kStandardSize);
    const auto [mn_it, mx_it] = std::minmax_element(img.pixels.begin(), img.pixels.end());
    const double mn = *mn_it, mx = *mx_it;
    if (mx > mn) {
        const double range = mx - mn;
        for (double& v : img.pixels) v = (v - mn) / range;
    } else {
        std::fill(img.pixels.begin(), img.pixels.end(), 0.5);
    }
    return img;
}

ImageGray hflip(const ImageGray& img) {
    ImageGray out(img.width, img.height);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) out.at(x, y) = img.at(img.width - 1 - x, y);
    return out;
}

ImageGray affine_resample(const ImageGray& img, double rot_deg, double tx_px, double ty_px,
                          double scale) {
    if (rot_deg == 0.0 && tx_px == 0.0 && ty_px == 0.0 && scale == 1.0) return img;
    ImageGray out(img.width, img.height);
    const double cx = (img.width - 1) / 2.0;
    const double cy = (img.height - 1) / 2.0;
    const double rad = rot_deg * kPi / 180.0;
    const double c = std::cos(rad), s = std::sin(rad);
    // forward map: p' = scale * R * (p - c) + scale * t + c; invert per output pixel
    for (int y = 0; y < out.height; ++y) {
        for (int x = 0; x < out.width; ++x) {
            const double ux = (x - cx) / scale - tx_px;
            const double uy = (y - cy) / scale - ty_px;
            const double sx = c * ux + s * uy + cx;   // R^-1 = R(-rad)
            const double sy = -s * ux + c * uy + cy;
            out.at(x, y) = sample_clamped(img, sx, sy);
        }
    }
    return out;
}

ImageGray augment(const ImageGray& img, const AugSpec& spec, Rng& rng) {
    spec.validate();
    ImageGray out = img;
    if (uniform_unit(rng) < spec.hflip_prob) out = hflip(out);
    const double rot = uniform_real(rng, -spec.max_rotation_deg, spec.max_rotation_deg);
    const double tmax = spec.max_translate_frac * img.width;
    const double tx = uniform_real(rng, -tmax, tmax);
    const double ty = uniform_real(rng, -tmax, tmax);
    const double scale = uniform_real(rng, spec.scale_lo, spec.scale_hi);
    out = affine_resample(out, rot, tx, ty, scale);
    const double shift = uniform_real(rng, -spec.intensity_jitter, spec.intensity_jitter);
    const double contrast = uniform_real(rng, 1.0 - spec.contrast_jitter, 1.0 + spec.contrast_jitter);
    for (double& v : out.pixels) v = std::clamp(v * contrast + shift, 0.0, 1.0);
    return out;
}

std::vector<std::pair<ImageGray, int>> synthesize_variants(
    const std::vector<std::pair<ImageGray, int>>& train_fold, int n_per_image,
    const AugSpec& spec, std::uint64_t seed) {
    if (n_per_image < 0) throw ConfigError("n_per_image must be >= 0");
    std::vector<std::pair<ImageGray, int>> out;
    out.reserve(train_fold.size() * static_cast<std::size_t>(n_per_image));
    for (std::size_t i = 0; i < train_fold.size(); ++i) {
        Rng rng(mix_seed(seed, i));
        for (int v = 0; v < n_per_image; ++v)
            out.emplace_back(augment(train_fold[i].first, spec, rng), train_fold[i].second);
    }
    return out;
}

}  // namespace pcmri
