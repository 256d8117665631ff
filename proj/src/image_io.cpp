#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "pcmri/errors.hpp"
#include "pcmri/image.hpp"

namespace pcmri {

ImageGray decode_gray(const std::filesystem::path& file) {
    // IMREAD_GRAYSCALE collapses RGB to luminance and yields 8-bit
    cv::Mat m = cv::imread(file.string(), cv::IMREAD_GRAYSCALE);
    if (m.empty()) throw DataError("cannot decode image: " + file.string());
    ImageGray img(m.cols, m.rows);
    for (int y = 0; y < m.rows; ++y) {
        const auto* row = m.ptr<std::uint8_t>(y);
        for (int x = 0; x < m.cols; ++x) img.at(x, y) = row[x] / 255.0;
    }
    return img;
}

void write_png(const ImageGray& img, const std::filesystem::path& file) {
    cv::Mat m(img.height, img.width, CV_8UC1);
    for (int y = 0; y < img.height; ++y) {
        auto* row = m.ptr<std::uint8_t>(y);
        for (int x = 0; x < img.width; ++x) {
            const double v = std::clamp(img.at(x, y), 0.0, 1.0);
            row[x] = static_cast<std::uint8_t>(std::lround(v * 255.0));
        }
    }
    if (!cv::imwrite(file.string(), m))
        throw DataError("cannot write image: " + file.string());
}

}  // namespace pcmri
