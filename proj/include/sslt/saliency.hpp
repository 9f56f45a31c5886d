#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "sslt/box.hpp"
#include "sslt/imaging.hpp"

namespace sslt {

enum class BinarizeMode { literal_nonzero, relative_threshold };

struct SaliencyConfig {
    std::string backend = "spectral-residual";
    int working_width = 64;
    double smoothing_sigma = 2.5;
    BinarizeMode binarize_mode = BinarizeMode::relative_threshold;
    double relative_threshold = 0.2;
    int candidates = 10;  // K crops drawn per sequence
    std::uint64_t seed = 0;

    void validate() const;
};

struct PseudoLabel {
    std::size_t frame_index = 0;
    Box crop_box;
    Mask label;
    std::size_t salient_area = 0;
};

/// A crop offered for pseudo-label selection.
struct CandidateCrop {
    std::size_t frame_index = 0;
    Box crop_box;
    Image crop;
};

/// Every sampled candidate binarized to an empty mask.
class UnsalientSequenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Map from a crop to per-pixel saliency in [0, 1].
using SaliencyBackend = std::function<ScalarMap(const Image&, const SaliencyConfig&)>;

void register_saliency_backend(const std::string& id, SaliencyBackend backend);
const SaliencyBackend& saliency_backend(const std::string& id);

/// Spectral-residual saliency:
///   gray -> resize to working width -> log amplitude minus its 3x3 box mean
///   -> inverse transform with the original phase -> squared magnitude
///   -> Gaussian smoothing -> min-max normalization -> resize to crop dims.
/// Constant crops give an all-zero map.
ScalarMap spectral_residual_saliency(const Image& crop, const SaliencyConfig& cfg);

/// Dispatches on cfg.backend.
ScalarMap saliency_map(const Image& crop, const SaliencyConfig& cfg);

Mask binarize(const ScalarMap& p, const SaliencyConfig& cfg);

std::size_t salient_area(const Mask& mask);

/// Draw min(K, N) distinct candidates with the seeded RNG and keep the one
/// with the largest salient area, earliest frame index on ties.
PseudoLabel select_pseudo_label(const std::vector<CandidateCrop>& crops, const SaliencyConfig& cfg);

/// Indices (into `crops`) that select_pseudo_label samples, in draw order.
std::vector<std::size_t> sample_candidates(std::size_t n, const SaliencyConfig& cfg);

const char* to_string(BinarizeMode mode);
BinarizeMode binarize_mode_from_string(const std::string& s);

}  // namespace sslt
