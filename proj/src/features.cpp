#include "pcmri/features.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "pcmri/errors.hpp"

namespace pcmri {

namespace {

constexpr double kPi = 3.14159265358979323846;

}  // namespace

void HogParams::validate() const {
    if (cell_px < 1 || kStandardSize % cell_px != 0)
        throw ConfigError("cell_px must divide " + std::to_string(kStandardSize));
    if (block_cells < 1 || block_cells > cells_per_side())
        throw ConfigError("block_cells out of range");
    if (n_bins < 2) throw ConfigError("n_bins must be >= 2");
    if (!(clip > 0.0 && clip <= 1.0)) throw ConfigError("clip must be in (0,1]");
    if (epsilon <= 0.0) throw ConfigError("epsilon must be positive");
}

FeatureVector hog(const ImageGray& img, const HogParams& p) {
    p.validate();
    if (img.width != kStandardSize || img.height != kStandardSize)
        throw ConfigError("hog expects a standardized 224x224 image");

    const int n_cells = p.cells_per_side();
    const int n_bins = p.n_bins;
    const double bin_width = 180.0 / n_bins;

    // per-cell orientation histograms; bin centers sit at i*bin_width so an
    // axis-aligned gradient votes into a single bin
    std::vector<double> hist(static_cast<std::size_t>(n_cells) * n_cells * n_bins, 0.0);
    auto cell_hist = [&](int cx, int cy) {
        return hist.data() + (static_cast<std::size_t>(cy) * n_cells + cx) * n_bins;
    };

    for (int y = 0; y < img.height; ++y) {
        const int ym = std::max(y - 1, 0), yp = std::min(y + 1, img.height - 1);
        for (int x = 0; x < img.width; ++x) {
            const int xm = std::max(x - 1, 0), xp = std::min(x + 1, img.width - 1);
            const double gx = (img.at(xp, y) - img.at(xm, y)) / 2.0;
            const double gy = (img.at(x, yp) - img.at(x, ym)) / 2.0;
            const double mag = std::hypot(gx, gy);
            if (mag == 0.0) continue;
            double angle = std::atan2(gy, gx) * 180.0 / kPi;  // (-180, 180]
            if (angle < 0.0) angle += 180.0;                  // unsigned
            if (angle >= 180.0) angle -= 180.0;
            const double t = angle / bin_width;
            const int b0 = static_cast<int>(t) % n_bins;
            const double frac = t - std::floor(t);
            double* h = cell_hist(x / p.cell_px, y / p.cell_px);
            h[b0] += mag * (1.0 - frac);
            h[(b0 + 1) % n_bins] += mag * frac;
        }
    }

    const int n_blocks = p.blocks_per_side();
    const int bdim = p.block_dim();
    FeatureVector fv;
    fv.source = FeatureVector::Source::hog;
    fv.values.resize(static_cast<std::size_t>(p.dim()));

    std::vector<double> block(static_cast<std::size_t>(bdim));
    const double eps2 = p.epsilon * p.epsilon;
    std::size_t out = 0;
    for (int by = 0; by < n_blocks; ++by) {
        for (int bx = 0; bx < n_blocks; ++bx) {
            int j = 0;
            for (int cy = 0; cy < p.block_cells; ++cy)
                for (int cx = 0; cx < p.block_cells; ++cx) {
                    const double* h = cell_hist(bx + cx, by + cy);
                    for (int b = 0; b < n_bins; ++b) block[j++] = h[b];
                }
            // L2-Hys: normalize, clip, renormalize
            double ss = 0.0;
            for (double v : block) ss += v * v;
            double inv = 1.0 / std::sqrt(ss + eps2);
            for (double& v : block) v = std::min(v * inv, p.clip);
            ss = 0.0;
            for (double v : block) ss += v * v;
            inv = 1.0 / std::sqrt(ss + eps2);
            for (double v : block) fv.values[out++] = v * inv;
        }
    }
    return fv;
}

std::map<std::string, FeatureVector> load_embeddings(const std::filesystem::path& file,
                                                     const SampleSet& manifest) {
    std::ifstream in(file);
    if (!in) throw DataError("cannot open embedding file: " + file.string());
    std::string line;
    int row = 0;
    int dim = -1;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line.rfind("# dim=", 0) == 0) {
            dim = std::stoi(line.substr(6));
            break;
        }
        throw DataError("embedding file must start with '# dim=d' header");
    }
    if (dim < 1) throw DataError("embedding file missing '# dim=d' header");

    std::map<std::string, FeatureVector> out;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string id;
        if (!std::getline(ss, id, ',')) throw DataError("malformed embedding row " + std::to_string(row));
        FeatureVector fv;
        fv.source = FeatureVector::Source::embedding;
        fv.values.reserve(static_cast<std::size_t>(dim));
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            std::size_t pos = 0;
            double v;
            try {
                v = std::stod(tok, &pos);
            } catch (const std::exception&) {
                throw DataError("non-numeric embedding value at row " + std::to_string(row));
            }
            if (pos != tok.size())
                throw DataError("non-numeric embedding value at row " + std::to_string(row));
            if (!std::isfinite(v))
                throw DataError("non-finite embedding value at row " + std::to_string(row));
            fv.values.push_back(v);
        }
        if (fv.dim() != dim)
            throw DataError("embedding row " + std::to_string(row) + " has " +
                            std::to_string(fv.dim()) + " values, expected " + std::to_string(dim));
        if (!out.emplace(id, std::move(fv)).second)
            throw DataError("duplicate embedding id '" + id + "' at row " + std::to_string(row));
    }

    std::vector<std::string> missing;
    for (const auto& s : manifest.samples())
        if (!out.count(s.id)) missing.push_back(s.id);
    if (!missing.empty()) {
        std::string msg = "embedding file missing ids:";
        for (const auto& id : missing) msg += " " + id;
        throw DataError(msg);
    }
    return out;
}

void save_embeddings(const std::filesystem::path& file,
                     const std::map<std::string, FeatureVector>& vectors) {
    if (vectors.empty()) throw DataError("no embeddings to save");
    std::ofstream os(file);
    if (!os) throw DataError("cannot write embedding file: " + file.string());
    os.precision(17);
    os << "# dim=" << vectors.begin()->second.dim() << "\n";
    for (const auto& [id, fv] : vectors) {
        os << id;
        for (double v : fv.values) os << "," << v;
        os << "\n";
    }
}

}  // namespace pcmri
