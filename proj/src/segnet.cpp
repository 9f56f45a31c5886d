#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "sslt/rng.hpp"
#include "sslt/segnet.hpp"

namespace sslt {

std::size_t SegModel::parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += l.weights.size() + l.bias.size();
    return n;
}

void TrainConfig::validate() const {
    if (iterations < 1) throw std::invalid_argument("train.iterations must be >= 1");
    if (!(learning_rate >= 0)) throw std::invalid_argument("train.learning_rate must be >= 0");
    if (!(momentum >= 0 && momentum < 1)) throw std::invalid_argument("train.momentum must be in [0, 1)");
    if (!(flip_probability >= 0 && flip_probability <= 1))
        throw std::invalid_argument("train.flip_probability must be in [0, 1]");
    if (!(threshold > 0 && threshold < 1)) throw std::invalid_argument("train.threshold must be in (0, 1)");
    if (input_size < 4) throw std::invalid_argument("train.input_size must be >= 4");
}

namespace {

/// Planar tensor [channels][height][width].
struct Tensor {
    int channels = 0, height = 0, width = 0;
    std::vector<double> data;

    Tensor() = default;
    Tensor(int c, int h, int w) : channels(c), height(h), width(w), data(static_cast<std::size_t>(c) * h * w, 0.0) {}
    double* plane(int c) { return data.data() + static_cast<std::size_t>(c) * height * width; }
    const double* plane(int c) const { return data.data() + static_cast<std::size_t>(c) * height * width; }
};

Tensor pad1(const Tensor& t) {
    Tensor p(t.channels, t.height + 2, t.width + 2);
    for (int c = 0; c < t.channels; ++c)
        for (int y = 0; y < t.height; ++y)
            std::memcpy(p.plane(c) + static_cast<std::size_t>(y + 1) * p.width + 1,
                        t.plane(c) + static_cast<std::size_t>(y) * t.width, sizeof(double) * t.width);
    return p;
}

// out = conv(in_padded) + bias
Tensor conv_forward(const ConvLayer& layer, const Tensor& in_pad) {
    const int H = in_pad.height - 2, W = in_pad.width - 2, PW = in_pad.width;
    Tensor out(layer.out_channels, H, W);
    for (int o = 0; o < layer.out_channels; ++o) {
        double* dst_plane = out.plane(o);
        for (int y = 0; y < H; ++y) {
            double* dst = dst_plane + static_cast<std::size_t>(y) * W;
            std::fill(dst, dst + W, layer.bias[o]);
            for (int c = 0; c < layer.in_channels; ++c) {
                const double* src_plane = in_pad.plane(c);
                for (int ky = 0; ky < 3; ++ky) {
                    const double* src = src_plane + static_cast<std::size_t>(y + ky) * PW;
                    for (int kx = 0; kx < 3; ++kx) {
                        const double w = layer.weights[layer.weight_index(o, c, ky, kx)];
                        const double* s = src + kx;
                        for (int x = 0; x < W; ++x) dst[x] += w * s[x];
                    }
                }
            }
        }
    }
    return out;
}

// Accumulates weight/bias gradients; returns d(in_padded) when wanted.
void conv_backward(const ConvLayer& layer, const Tensor& in_pad, const Tensor& grad_out, std::vector<double>& dw,
                   std::vector<double>& db, Tensor* grad_in_pad) {
    const int H = grad_out.height, W = grad_out.width, PW = in_pad.width;
    dw.assign(layer.weights.size(), 0.0);
    db.assign(layer.bias.size(), 0.0);
    if (grad_in_pad) *grad_in_pad = Tensor(in_pad.channels, in_pad.height, in_pad.width);
    for (int o = 0; o < layer.out_channels; ++o) {
        const double* g_plane = grad_out.plane(o);
        double bsum = 0.0;
        for (int y = 0; y < H; ++y) {
            const double* g = g_plane + static_cast<std::size_t>(y) * W;
            for (int x = 0; x < W; ++x) bsum += g[x];
            for (int c = 0; c < layer.in_channels; ++c) {
                for (int ky = 0; ky < 3; ++ky) {
                    const double* src = in_pad.plane(c) + static_cast<std::size_t>(y + ky) * PW;
                    double* dsrc = grad_in_pad ? grad_in_pad->plane(c) + static_cast<std::size_t>(y + ky) * PW : nullptr;
                    for (int kx = 0; kx < 3; ++kx) {
                        const std::size_t wi = layer.weight_index(o, c, ky, kx);
                        const double* s = src + kx;
                        double acc = 0.0;
                        for (int x = 0; x < W; ++x) acc += g[x] * s[x];
                        dw[wi] += acc;
                        if (dsrc) {
                            const double w = layer.weights[wi];
                            double* d = dsrc + kx;
                            for (int x = 0; x < W; ++x) d[x] += w * g[x];
                        }
                    }
                }
            }
        }
        db[o] = bsum;
    }
}

Tensor unpad1(const Tensor& p) {
    Tensor t(p.channels, p.height - 2, p.width - 2);
    for (int c = 0; c < t.channels; ++c)
        for (int y = 0; y < t.height; ++y)
            std::memcpy(t.plane(c) + static_cast<std::size_t>(y) * t.width,
                        p.plane(c) + static_cast<std::size_t>(y + 1) * p.width + 1, sizeof(double) * t.width);
    return t;
}

Tensor make_input(const Image& img) {
    const int W = img.width(), H = img.height();
    Tensor t(SegModel::kInputChannels, H, W);
    for (int y = 0; y < H; ++y) {
        const double ny = H > 1 ? 2.0 * y / (H - 1) - 1.0 : 0.0;
        for (int x = 0; x < W; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * W + x;
            for (int c = 0; c < 3; ++c) t.plane(c)[i] = img.at(x, y, img.channels() == 3 ? c : 0);
            t.plane(3)[i] = W > 1 ? 2.0 * x / (W - 1) - 1.0 : 0.0;
            t.plane(4)[i] = ny;
        }
    }
    return t;
}

struct ForwardCache {
    std::vector<Tensor> inputs_padded;  // input of each layer, padded
    std::vector<Tensor> pre;            // pre-activation of each layer
};

Tensor run_network(const SegModel& model, const Tensor& input, ForwardCache* cache) {
    Tensor act = input;
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        const ConvLayer& layer = model.layers[l];
        Tensor in_pad = pad1(act);
        Tensor pre = conv_forward(layer, in_pad);
        act = pre;
        if (layer.relu)
            for (auto& v : act.data) v = v < 0.0 ? 0.0 : v;  // NaN propagates
        if (cache) {
            cache->inputs_padded.push_back(std::move(in_pad));
            cache->pre.push_back(std::move(pre));
        }
    }
    return act;  // logits
}

double sigmoid(double z) { return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z)); }
double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

LossAndGrad loss_and_grad_tensor(const SegModel& model, const Tensor& input, const std::vector<std::uint8_t>& label) {
    ForwardCache cache;
    const Tensor logits = run_network(model, input, &cache);
    const std::size_t N = label.size();
    std::size_t pos = 0;
    for (auto v : label) pos += v != 0;
    const std::size_t neg = N - pos;

    LossAndGrad out;
    double w_pos, w_neg;
    if (pos == 0 || neg == 0) {
        out.unbalanced_fallback = true;
        w_pos = w_neg = 1.0;
    } else {
        const double beta = static_cast<double>(neg) / static_cast<double>(N);
        w_pos = beta;
        w_neg = 1.0 - beta;
    }

    Tensor grad(1, logits.height, logits.width);
    double loss = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        const double z = logits.data[i];
        const double y = sigmoid(z);
        if (label[i]) {
            loss += w_pos * softplus(-z);
            grad.data[i] = -w_pos * (1.0 - y) / static_cast<double>(N);
        } else {
            loss += w_neg * softplus(z);
            grad.data[i] = w_neg * y / static_cast<double>(N);
        }
    }
    out.loss = loss / static_cast<double>(N);

    const std::size_t L = model.layers.size();
    out.grads.weights.resize(L);
    out.grads.bias.resize(L);
    for (std::size_t l = L; l-- > 0;) {
        const ConvLayer& layer = model.layers[l];
        if (layer.relu)
            for (std::size_t i = 0; i < grad.data.size(); ++i)
                if (!(cache.pre[l].data[i] > 0.0)) grad.data[i] = 0.0;
        Tensor grad_in_pad;
        conv_backward(layer, cache.inputs_padded[l], grad, out.grads.weights[l], out.grads.bias[l],
                      l > 0 ? &grad_in_pad : nullptr);
        if (l > 0) grad = unpad1(grad_in_pad);
    }
    return out;
}

std::vector<std::uint8_t> mask_vector(const Mask& m) { return {m.data().begin(), m.data().end()}; }

}  // namespace

SegModel init_model(std::uint64_t seed, int input_size) {
    if (input_size < 1) throw std::invalid_argument("init_model: input size must be positive");
    SegModel m;
    m.seed = seed;
    m.input_size = input_size;
    Rng rng(seed);
    const int shapes[3][2] = {{SegModel::kInputChannels, 16}, {16, 16}, {16, 1}};
    for (int l = 0; l < 3; ++l) {
        ConvLayer layer;
        layer.in_channels = shapes[l][0];
        layer.out_channels = shapes[l][1];
        layer.relu = l < 2;
        const double bound = std::sqrt(6.0 / (layer.in_channels * 9.0));
        layer.weights.resize(static_cast<std::size_t>(layer.out_channels) * layer.in_channels * 9);
        for (auto& w : layer.weights) w = rng.uniform(-bound, bound);
        layer.bias.assign(static_cast<std::size_t>(layer.out_channels), 0.0);
        m.layers.push_back(std::move(layer));
    }
    return m;
}

ScalarMap forward_at(const SegModel& model, const Image& img, int width, int height) {
    if (img.empty() || width < 1 || height < 1) throw std::invalid_argument("forward: degenerate input");
    const Tensor logits = run_network(model, make_input(resize(img, width, height, Interp::bilinear)), nullptr);
    ScalarMap prob(width, height);
    for (std::size_t i = 0; i < prob.size(); ++i) {
        const double z = logits.data[i];
        if (!std::isfinite(z)) throw SegmentationError("forward: non-finite activation");
        prob.data()[i] = sigmoid(z);
    }
    return prob.same_dims(img.width(), img.height()) ? prob : resize(prob, img.width(), img.height(), Interp::bilinear);
}

ScalarMap forward(const SegModel& model, const Image& crop) {
    return forward_at(model, crop, model.input_size, model.input_size);
}

LossAndGrad loss_and_grad(const SegModel& model, const Image& crop, const Mask& label) {
    const int S = model.input_size;
    const Tensor input = make_input(resize(crop, S, S, Interp::bilinear));
    return loss_and_grad_tensor(model, input, mask_vector(resize(label, S, S)));
}

SegModel fine_tune(const SegModel& model, const PseudoLabel& pseudo, const Image& crop, const TrainConfig& cfg,
                   std::vector<double>* loss_trace) {
    cfg.validate();
    if (!pseudo.label.same_dims(crop.width(), crop.height()))
        throw std::invalid_argument("fine_tune: pseudo-label dims do not match the crop");
    const int S = model.input_size;
    const Image base = resize(crop, S, S, Interp::bilinear);
    const Mask label = resize(pseudo.label, S, S);
    const Tensor inputs[2] = {make_input(base), make_input(flip_horizontal(base))};
    // coordinate planes stay put under flipping
    const std::vector<std::uint8_t> labels[2] = {mask_vector(label), mask_vector(flip_horizontal(label))};

    SegModel out = model;
    std::vector<std::vector<double>> vel_w, vel_b;
    for (const auto& l : out.layers) {
        vel_w.emplace_back(l.weights.size(), 0.0);
        vel_b.emplace_back(l.bias.size(), 0.0);
    }
    std::vector<double> trace;
    trace.reserve(static_cast<std::size_t>(cfg.iterations));
    Rng rng(cfg.seed);
    for (int it = 0; it < cfg.iterations; ++it) {
        const int k = rng.bernoulli(cfg.flip_probability) ? 1 : 0;
        const LossAndGrad lg = loss_and_grad_tensor(out, inputs[k], labels[k]);
        trace.push_back(lg.loss);
        if (!std::isfinite(lg.loss))
            throw SegmentationError("fine_tune: non-finite loss at iteration " + std::to_string(it), trace);
        for (std::size_t l = 0; l < out.layers.size(); ++l) {
            auto& layer = out.layers[l];
            for (std::size_t i = 0; i < layer.weights.size(); ++i) {
                vel_w[l][i] = cfg.momentum * vel_w[l][i] + lg.grads.weights[l][i];
                layer.weights[i] -= cfg.learning_rate * vel_w[l][i];
            }
            for (std::size_t i = 0; i < layer.bias.size(); ++i) {
                vel_b[l][i] = cfg.momentum * vel_b[l][i] + lg.grads.bias[l][i];
                layer.bias[i] -= cfg.learning_rate * vel_b[l][i];
            }
        }
    }
    if (loss_trace) *loss_trace = std::move(trace);
    return out;
}

Mask segment_crop(const SegModel& model, const Image& crop, double threshold) {
    if (!(threshold > 0 && threshold < 1)) throw std::invalid_argument("segment_crop: threshold must be in (0, 1)");
    const ScalarMap p = forward(model, crop);
    Mask m(p.width(), p.height());
    for (std::size_t i = 0; i < p.size(); ++i) m.data()[i] = p.data()[i] > threshold;
    return m;
}

// Model file: text header, a blank line, then little-endian float64 values
// (per layer: weights then biases).
void save_model(const std::filesystem::path& path, const SegModel& model) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "sslt-segmodel 1\n";
    out << "input_size " << model.input_size << "\n";
    out << "seed " << model.seed << "\n";
    out << "layers " << model.layers.size() << "\n";
    for (const auto& l : model.layers)
        out << "conv3x3 " << l.in_channels << ' ' << l.out_channels << ' ' << (l.relu ? "relu" : "linear") << "\n";
    out << "values " << model.parameter_count() << "\n\n";
    auto put = [&](double v) {
        auto bits = std::bit_cast<std::uint64_t>(v);
        char buf[8];
        for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((bits >> (8 * i)) & 0xFF);
        out.write(buf, 8);
    };
    for (const auto& l : model.layers) {
        for (double w : l.weights) put(w);
        for (double b : l.bias) put(b);
    }
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

SegModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    auto fail = [&](const std::string& msg) -> SegModel {
        throw std::runtime_error(path.string() + ": " + msg);
    };
    std::string line, key;
    if (!std::getline(in, line) || line != "sslt-segmodel 1") return fail("unsupported model header");
    SegModel m;
    std::size_t n_layers = 0, n_values = 0;
    {
        std::getline(in, line);
        std::istringstream ss(line);
        if (!(ss >> key >> m.input_size) || key != "input_size") return fail("bad input_size line");
    }
    {
        std::getline(in, line);
        std::istringstream ss(line);
        if (!(ss >> key >> m.seed) || key != "seed") return fail("bad seed line");
    }
    {
        std::getline(in, line);
        std::istringstream ss(line);
        if (!(ss >> key >> n_layers) || key != "layers" || n_layers == 0 || n_layers > 64)
            return fail("bad layers line");
    }
    int prev_out = SegModel::kInputChannels;
    for (std::size_t i = 0; i < n_layers; ++i) {
        std::getline(in, line);
        std::istringstream ss(line);
        ConvLayer l;
        std::string act;
        if (!(ss >> key >> l.in_channels >> l.out_channels >> act) || key != "conv3x3") return fail("bad layer line");
        if (l.in_channels != prev_out || l.out_channels < 1) return fail("layer shapes do not chain");
        l.relu = act == "relu";
        l.weights.resize(static_cast<std::size_t>(l.out_channels) * l.in_channels * 9);
        l.bias.resize(static_cast<std::size_t>(l.out_channels));
        prev_out = l.out_channels;
        m.layers.push_back(std::move(l));
    }
    if (prev_out != 1) return fail("final layer must have one output channel");
    {
        std::getline(in, line);
        std::istringstream ss(line);
        if (!(ss >> key >> n_values) || key != "values" || n_values != m.parameter_count())
            return fail("value count does not match architecture");
    }
    std::getline(in, line);
    auto get = [&]() {
        unsigned char buf[8];
        if (!in.read(reinterpret_cast<char*>(buf), 8)) fail("truncated weight data");
        std::uint64_t bits = 0;
        for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
        const double v = std::bit_cast<double>(bits);
        if (!std::isfinite(v)) fail("non-finite weight");
        return v;
    };
    for (auto& l : m.layers) {
        for (auto& w : l.weights) w = get();
        for (auto& b : l.bias) b = get();
    }
    return m;
}

}  // namespace sslt
