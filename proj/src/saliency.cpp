#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

#include "sslt/rng.hpp"
#include "sslt/saliency.hpp"

namespace sslt {

const char* to_string(BinarizeMode mode) {
    return mode == BinarizeMode::literal_nonzero ? "literal-nonzero" : "relative-threshold";
}

BinarizeMode binarize_mode_from_string(const std::string& s) {
    if (s == "literal-nonzero") return BinarizeMode::literal_nonzero;
    if (s == "relative-threshold") return BinarizeMode::relative_threshold;
    throw std::invalid_argument("unknown binarize mode \"" + s + "\"");
}

void SaliencyConfig::validate() const {
    if (working_width < 16) throw std::invalid_argument("saliency.working_width must be >= 16");
    if (!(smoothing_sigma >= 0)) throw std::invalid_argument("saliency.smoothing_sigma must be >= 0");
    if (!(relative_threshold > 0 && relative_threshold < 1))
        throw std::invalid_argument("saliency.relative_threshold must be in (0, 1)");
    if (candidates < 1) throw std::invalid_argument("saliency.candidates must be >= 1");
    saliency_backend(backend);
}

namespace {

struct Registry {
    std::mutex mutex;
    std::map<std::string, SaliencyBackend> backends{{"spectral-residual", spectral_residual_saliency}};
};

Registry& registry() {
    static Registry r;
    return r;
}

}  // namespace

void register_saliency_backend(const std::string& id, SaliencyBackend backend) {
    std::lock_guard lock(registry().mutex);
    registry().backends[id] = std::move(backend);
}

const SaliencyBackend& saliency_backend(const std::string& id) {
    std::lock_guard lock(registry().mutex);
    auto it = registry().backends.find(id);
    if (it == registry().backends.end()) throw std::invalid_argument("unknown saliency backend \"" + id + "\"");
    return it->second;
}

ScalarMap spectral_residual_saliency(const Image& crop, const SaliencyConfig& cfg) {
    if (crop.width() < 16 || crop.height() < 16)
        throw std::invalid_argument("saliency_map: crop must be at least 16 px per side");
    const ScalarMap gray_full = to_grayscale(crop);
    const auto [lo, hi] = std::minmax_element(gray_full.data().begin(), gray_full.data().end());
    if (*hi - *lo <= 1e-12) return ScalarMap(crop.width(), crop.height(), 0.0);

    const int ww = cfg.working_width;
    const int wh = std::max(1, static_cast<int>(std::lround(static_cast<double>(ww) * crop.height() / crop.width())));
    const ScalarMap gray = resize(gray_full, ww, wh, Interp::bilinear);

    const ComplexGrid spectrum = dft2(gray);
    ScalarMap log_amp(ww, wh);
    for (std::size_t i = 0; i < spectrum.size(); ++i)
        log_amp.data()[i] = std::log(std::max(std::abs(spectrum.data()[i]), 1e-12));

    ComplexGrid residual(ww, wh);
    for (int y = 0; y < wh; ++y) {
        for (int x = 0; x < ww; ++x) {
            double mean = 0.0;
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx)
                    mean += log_amp(std::clamp(x + dx, 0, ww - 1), std::clamp(y + dy, 0, wh - 1));
            mean /= 9.0;
            const std::complex<double> f = spectrum(x, y);
            const double phase = std::arg(f);
            residual(x, y) = std::polar(std::exp(log_amp(x, y) - mean), phase);
        }
    }
    const ComplexGrid back = idft2_complex(residual);
    ScalarMap s(ww, wh);
    for (std::size_t i = 0; i < back.size(); ++i) s.data()[i] = std::norm(back.data()[i]);
    s = gaussian_blur(s, cfg.smoothing_sigma);

    const auto [smin, smax] = std::minmax_element(s.data().begin(), s.data().end());
    const double lo_s = *smin, range = *smax - *smin;
    if (!(range > 1e-300)) return ScalarMap(crop.width(), crop.height(), 0.0);
    for (auto& v : s.data()) v = (v - lo_s) / range;

    ScalarMap out = resize(s, crop.width(), crop.height(), Interp::bilinear);
    for (auto& v : out.data()) v = std::clamp(v, 0.0, 1.0);
    return out;
}

ScalarMap saliency_map(const Image& crop, const SaliencyConfig& cfg) { return saliency_backend(cfg.backend)(crop, cfg); }

Mask binarize(const ScalarMap& p, const SaliencyConfig& cfg) {
    Mask out(p.width(), p.height());
    if (cfg.binarize_mode == BinarizeMode::literal_nonzero) {
        for (std::size_t i = 0; i < p.size(); ++i) out.data()[i] = p.data()[i] != 0.0;
        return out;
    }
    double peak = 0.0;
    for (double v : p.data()) peak = std::max(peak, v);
    const double t = cfg.relative_threshold * peak;
    for (std::size_t i = 0; i < p.size(); ++i) out.data()[i] = p.data()[i] > t;
    return out;
}

std::size_t salient_area(const Mask& mask) { return mask.count(); }

std::vector<std::size_t> sample_candidates(std::size_t n, const SaliencyConfig& cfg) {
    Rng rng(cfg.seed);
    return rng.sample_without_replacement(n, std::min<std::size_t>(n, static_cast<std::size_t>(cfg.candidates)));
}

PseudoLabel select_pseudo_label(const std::vector<CandidateCrop>& crops, const SaliencyConfig& cfg) {
    if (crops.empty()) throw std::invalid_argument("select_pseudo_label: no crops available");
    PseudoLabel best;
    bool have = false;
    for (std::size_t idx : sample_candidates(crops.size(), cfg)) {
        const CandidateCrop& c = crops[idx];
        Mask m = binarize(saliency_map(c.crop, cfg), cfg);
        const std::size_t area = salient_area(m);
        if (area == 0) continue;
        if (!have || area > best.salient_area || (area == best.salient_area && c.frame_index < best.frame_index)) {
            best = {c.frame_index, c.crop_box, std::move(m), area};
            have = true;
        }
    }
    if (!have) throw UnsalientSequenceError("select_pseudo_label: every sampled candidate has zero salient area");
    return best;
}

}  // namespace sslt
