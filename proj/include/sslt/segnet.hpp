#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <vector>

#include "sslt/imaging.hpp"
#include "sslt/saliency.hpp"

namespace sslt {

/// 3x3 convolution, stride 1, zero "same" padding.
/// Weights are laid out [out][in][ky][kx].
struct ConvLayer {
    int in_channels = 0;
    int out_channels = 0;
    bool relu = true;
    std::vector<double> weights;
    std::vector<double> bias;

    std::size_t weight_index(int o, int c, int ky, int kx) const {
        return ((static_cast<std::size_t>(o) * in_channels + c) * 3 + ky) * 3 + kx;
    }
};

/// Per-sequence pixel classifier. Input planes are R, G, B and the pixel
/// coordinates normalized to [-1, 1]; output is a foreground probability.
struct SegModel {
    static constexpr int kInputChannels = 5;

    std::vector<ConvLayer> layers;
    int input_size = 96;
    std::uint64_t seed = 0;

    std::size_t parameter_count() const;
};

struct TrainConfig {
    int iterations = 300;
    double learning_rate = 1e-2;
    double momentum = 0.9;
    double flip_probability = 0.5;
    double threshold = 0.5;
    std::uint64_t seed = 0;
    int input_size = 96;  // side of the square network input

    void validate() const;
};

/// Non-finite activations or losses; carries the loss trace so far.
class SegmentationError : public std::runtime_error {
public:
    SegmentationError(const std::string& what, std::vector<double> trace = {})
        : std::runtime_error(what), loss_trace(std::move(trace)) {}
    std::vector<double> loss_trace;
};

/// Layer-shaped gradient buffers.
struct Gradients {
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> bias;
};

struct LossAndGrad {
    double loss = 0.0;
    Gradients grads;
    /// Label was all-positive or all-negative; unweighted BCE was used.
    bool unbalanced_fallback = false;
};

/// conv(5->16)+ReLU, conv(16->16)+ReLU, conv(16->1), sigmoid. Weights are
/// uniform in +-sqrt(6 / fan_in), biases zero.
SegModel init_model(std::uint64_t seed, int input_size = 96);

/// Probability map at crop dims; the network runs at input_size x input_size.
ScalarMap forward(const SegModel& model, const Image& crop);

/// Run the fully convolutional network on `img` resampled to width x height,
/// then map the probabilities back to the image dims.
ScalarMap forward_at(const SegModel& model, const Image& img, int width, int height);

/// Class-balanced binary cross-entropy, averaged over pixels, with exact
/// gradients. `crop` is resized to the input resolution and `label` resized
/// by nearest neighbor.
LossAndGrad loss_and_grad(const SegModel& model, const Image& crop, const Mask& label);

/// SGD with momentum on the single (crop, pseudo-label) pair with seeded
/// horizontal-flip augmentation.
SegModel fine_tune(const SegModel& model, const PseudoLabel& pseudo, const Image& crop, const TrainConfig& cfg,
                   std::vector<double>* loss_trace = nullptr);

/// forward() then `p > threshold`.
Mask segment_crop(const SegModel& model, const Image& crop, double threshold);

void save_model(const std::filesystem::path& path, const SegModel& model);
SegModel load_model(const std::filesystem::path& path);

}  // namespace sslt
