#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sslt/box.hpp"
#include "sslt/imaging.hpp"

namespace sslt {

struct CurveReport {
    std::vector<double> thresholds;
    std::vector<double> values;
    double score_at_reference = 0.0;
    double auc = 0.0;
};

struct SegReport {
    double s_measure = 0.0;
    double j_mean = 0.0;
    double j_recall = 0.0;
    double j_decay = 0.0;
    double f_mean = 0.0;
    double f_recall = 0.0;
    double f_decay = 0.0;
    double fps = 0.0;
};

/// Mean, recall (> 0.5 rate) and decay (first temporal bin minus last).
struct TemporalStats {
    double mean = 0.0;
    double recall = 0.0;
    double decay = 0.0;
};

/// Default distance thresholds 0..100 px, step 1.
std::vector<double> default_dp_thresholds();
/// Default IoU thresholds 0..1, step 0.01.
std::vector<double> default_op_thresholds();

constexpr double kDpReferenceThreshold = 100.0;
constexpr double kDefaultBoundaryTolerance = 0.008;

/// Fraction of frames whose center distance is below each threshold.
CurveReport dp_curve(const std::vector<Box>& pred, const std::vector<Box>& gt,
                     const std::vector<double>& thresholds = default_dp_thresholds());

/// Fraction of frames whose IoU exceeds each threshold.
CurveReport op_curve(const std::vector<Box>& pred, const std::vector<Box>& gt,
                     const std::vector<double>& thresholds = default_op_thresholds());

double mask_iou(const Mask& a, const Mask& b);

/// Structure measure of a foreground map against a binary ground truth,
/// 0.5 object-aware + 0.5 region-aware, floored at 0.
double s_measure(const ScalarMap& sm, const Mask& gt);
double s_object(const ScalarMap& sm, const Mask& gt);
double s_region(const ScalarMap& sm, const Mask& gt);

/// Early-minus-late difference over 4 contiguous bins that share endpoints.
double temporal_decay(const std::vector<double>& per_frame);
TemporalStats temporal_stats(const std::vector<double>& per_frame);

TemporalStats j_stats(const std::vector<Mask>& pred, const std::vector<Mask>& gt);

/// Boundary pixels: foreground pixels with a 4-neighbor that is background
/// or outside the image.
Mask boundary(const Mask& mask);
Mask dilate_disk(const Mask& mask, int radius);

struct BoundaryScore {
    double precision = 0.0;
    double recall = 0.0;
    double f = 0.0;
};

/// Boundary F-score with matching radius ceil(tolerance x image diagonal).
BoundaryScore boundary_f(const Mask& pred, const Mask& gt, double tolerance = kDefaultBoundaryTolerance);

TemporalStats f_stats(const std::vector<Mask>& pred, const std::vector<Mask>& gt,
                      double tolerance = kDefaultBoundaryTolerance);

/// Per-sequence evaluation record.
struct SequenceEvaluation {
    std::string name;
    CurveReport precision;
    CurveReport success;
    std::optional<SegReport> segmentation;  // absent without GT masks
    double fps = 0.0;
    double fps_excluding_finetune = 0.0;
    double mean_iou = 0.0;
};

struct RunEvaluation {
    std::vector<SequenceEvaluation> sequences;
    CurveReport precision;  // macro-averaged
    CurveReport success;
    std::optional<SegReport> segmentation;
};

struct EvalConfig {
    std::vector<double> dp_thresholds = default_dp_thresholds();
    std::vector<double> op_thresholds = default_op_thresholds();
    double boundary_tolerance = kDefaultBoundaryTolerance;
    int workers = 1;  // sequences evaluated concurrently
};

class EvaluationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Evaluate a results directory (one sequence, or one subdirectory per
/// sequence) against the matching dataset directory, macro-averaging over
/// sequences. Writes metrics.json, precision_curve.csv, success_curve.csv and
/// metrics_detail.json into `out_dir`.
RunEvaluation evaluate_run(const std::filesystem::path& results_dir, const std::filesystem::path& data_dir,
                           const std::filesystem::path& out_dir, const EvalConfig& cfg = {});

void write_curve_csv(const std::filesystem::path& path, const CurveReport& curve);

}  // namespace sslt
