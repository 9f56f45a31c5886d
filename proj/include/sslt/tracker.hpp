#pragma once

#include <memory>
#include <stdexcept>
#include <vector>

#include "sslt/box.hpp"
#include "sslt/imaging.hpp"

namespace sslt {

/// Per-cell unsigned orientation histograms with 2x2-block L2-Hys
/// normalization. Each cell averages its normalized values over the four
/// blocks that contain it. Returns `bins` maps of (W / cell) x (H / cell);
/// the patch is padded by replication when not divisible by `cell`.
std::vector<ScalarMap> extract_hog(const ScalarMap& patch, int cell, int bins);

struct TrackerConfig {
    double padding = 2.0;          // search window = padding x target size
    double lambda = 1e-2;          // ridge regularization
    double learning_rate = 0.025;  // model update rate
    double sigma_factor = 0.1;     // label sigma = sqrt(w h) x sigma_factor
    int cell_size = 4;
    int orientation_bins = 9;
    std::vector<double> scale_pool = {0.95, 1.0, 1.05};
    int max_model_cells = 96;      // long side of the model grid, in cells
    int min_model_cells = 8;

    void validate() const;
};

class TrackerError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Correlation filter model and target state.
struct TrackerState {
    TrackerConfig config;
    std::vector<ComplexGrid> numerator;  // per feature channel
    ComplexGrid denominator;
    ComplexGrid label_spectrum;
    ScalarMap window;                    // Hann window over the cell grid
    double target_w = 0;                 // px at scale 1
    double target_h = 0;
    double cx = 0;
    double cy = 0;
    double scale = 1.0;
    double window_w = 0;                 // search window px at scale 1
    double window_h = 0;
    int cells_x = 0;
    int cells_y = 0;
    double ratio_x = 1.0;                // patch px per source px at scale 1
    double ratio_y = 1.0;
    int frame_width = 0;
    int frame_height = 0;

    Box box() const;
};

/// Train the filter on the first frame.
TrackerState track_init(const Image& frame, const Box& box, const TrackerConfig& cfg = {});

/// Locate the target in `frame`, update scale and filter. Returns f0.
Box track_step(TrackerState& state, const Image& frame);

/// Correlation response over the cell grid for a search window of
/// `scale_ratio` x the current scale at the current center.
ScalarMap response_map(const TrackerState& state, const Image& frame, double scale_ratio = 1.0);

/// Multiplicative blend of the filter toward the sample at the current pose.
void update_filter(TrackerState& state, const Image& frame, double rate);

/// Sub-cell peak of a response map: quadratic least-squares fit over the
/// 3x3 neighborhood (circular) of the integer maximum.
std::pair<double, double> refine_peak(const ScalarMap& response, int px, int py);

/// Source of per-frame boxes for the pipeline. Lets a learned tracker
/// replace the correlation filter.
class BoxProposer {
public:
    virtual ~BoxProposer() = default;
    virtual void init(const Image& frame, const Box& box) = 0;
    virtual Box step(const Image& frame) = 0;
    /// Move the tracked center to `box` (feedback from refinement).
    virtual void recenter(const Box& box) = 0;
};

class CorrelationFilterProposer : public BoxProposer {
public:
    explicit CorrelationFilterProposer(TrackerConfig cfg = {}) : cfg_(std::move(cfg)) {}
    void init(const Image& frame, const Box& box) override;
    Box step(const Image& frame) override;
    void recenter(const Box& box) override;
    const TrackerState& state() const { return state_; }

private:
    TrackerConfig cfg_;
    TrackerState state_;
};

}  // namespace sslt
