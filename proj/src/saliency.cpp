#include "pcmri/saliency.hpp"

#include <algorithm>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "pcmri/errors.hpp"

namespace pcmri {

Heatmap saliency_map(const LinearModel& model, const ImageGray& img, const HogParams& p) {
    p.validate();
    if (model.dim != p.dim())
        throw ConfigError("model dimension " + std::to_string(model.dim) +
                          " does not match hog dimension " + std::to_string(p.dim()));

    const FeatureVector fv = hog(img, p);
    const auto w = model.raw_weights();

    const int n_cells = p.cells_per_side();
    const int n_blocks = p.blocks_per_side();

    Heatmap hm;
    hm.cells_per_side = n_cells;
    hm.cell_scores.assign(static_cast<std::size_t>(n_cells) * n_cells, 0.0);

    // component i of block (bx,by) reads cell (bx+cx, by+cy)
    std::size_t i = 0;
    for (int by = 0; by < n_blocks; ++by)
        for (int bx = 0; bx < n_blocks; ++bx)
            for (int cy = 0; cy < p.block_cells; ++cy)
                for (int cx = 0; cx < p.block_cells; ++cx)
                    for (int b = 0; b < p.n_bins; ++b, ++i)
                        hm.cell_scores[static_cast<std::size_t>(by + cy) * n_cells + (bx + cx)] +=
                            w[i] * fv.values[i];

    // nearest-cell upsampled rendering, min-max scaled
    hm.rendering = ImageGray(kStandardSize, kStandardSize);
    const auto [mn_it, mx_it] =
        std::minmax_element(hm.cell_scores.begin(), hm.cell_scores.end());
    const double mn = *mn_it, mx = *mx_it;
    for (int y = 0; y < kStandardSize; ++y)
        for (int x = 0; x < kStandardSize; ++x) {
            const double s = hm.cell_scores[static_cast<std::size_t>(y / p.cell_px) * n_cells +
                                            (x / p.cell_px)];
            hm.rendering.at(x, y) = mx > mn ? (s - mn) / (mx - mn) : 0.0;
        }
    return hm;
}

void write_heatmap_overlay(const Heatmap& hm, const ImageGray& base,
                           const std::filesystem::path& file) {
    if (base.width != hm.rendering.width || base.height != hm.rendering.height)
        throw ConfigError("heatmap and base image sizes differ");
    cv::Mat m(base.height, base.width, CV_8UC3);
    for (int y = 0; y < base.height; ++y) {
        auto* row = m.ptr<cv::Vec3b>(y);
        for (int x = 0; x < base.width; ++x) {
            const double g = std::clamp(base.at(x, y), 0.0, 1.0);
            const double h = std::clamp(hm.rendering.at(x, y), 0.0, 1.0);
            // gray base, heat mixed into the red channel (BGR order)
            const double blend = 0.6 * g + 0.4 * h;
            row[x][0] = static_cast<std::uint8_t>(std::lround(0.6 * g * 255.0));
            row[x][1] = static_cast<std::uint8_t>(std::lround(0.6 * g * 255.0));
            row[x][2] = static_cast<std::uint8_t>(std::lround(blend * 255.0));
        }
    }
    if (!cv::imwrite(file.string(), m))
        throw DataError("cannot write heatmap overlay: " + file.string());
}

}  // namespace pcmri
