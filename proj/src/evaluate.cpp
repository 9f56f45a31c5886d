#include <algorithm>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "parallel.hpp"
#include "sslt/dataset.hpp"
#include "sslt/metrics.hpp"
#include "sslt/pipeline.hpp"

namespace sslt {

namespace fs = std::filesystem;
using nlohmann::json;

void write_curve_csv(const fs::path& path, const CurveReport& curve) {
    std::ofstream f(path);
    if (!f) throw EvaluationError("cannot write " + path.string());
    f << "threshold,value\n";
    char buf[96];
    for (std::size_t i = 0; i < curve.values.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.6f,%.6f\n", curve.thresholds[i], curve.values[i]);
        f << buf;
    }
}

namespace {

bool is_result_dir(const fs::path& p) { return fs::is_regular_file(p / "boxes.csv"); }

std::vector<fs::path> result_dirs(const fs::path& root) {
    if (is_result_dir(root)) return {root};
    std::vector<fs::path> out;
    if (fs::is_directory(root))
        for (const auto& e : fs::directory_iterator(root))
            if (e.is_directory() && is_result_dir(e.path())) out.push_back(e.path());
    std::sort(out.begin(), out.end());
    if (out.empty()) throw EvaluationError(root.string() + ": no boxes.csv found");
    return out;
}

fs::path data_dir_for(const fs::path& result, const fs::path& data_root, bool single) {
    if (single && fs::is_directory(data_root / "frames")) return data_root;
    const fs::path p = data_root / result.filename();
    if (!fs::is_directory(p / "frames"))
        throw EvaluationError("no dataset sequence for result " + result.string() + " under " + data_root.string());
    return p;
}

std::optional<json> read_json(const fs::path& p) {
    std::ifstream f(p);
    if (!f) return std::nullopt;
    try {
        return json::parse(f);
    } catch (const json::exception&) {
        return std::nullopt;
    }
}

CurveReport average_curves(const std::vector<const CurveReport*>& curves) {
    CurveReport r;
    r.thresholds = curves.front()->thresholds;
    r.values.assign(r.thresholds.size(), 0.0);
    for (const auto* c : curves) {
        for (std::size_t i = 0; i < r.values.size(); ++i) r.values[i] += c->values[i];
        r.score_at_reference += c->score_at_reference;
        r.auc += c->auc;
    }
    const double n = static_cast<double>(curves.size());
    for (auto& v : r.values) v /= n;
    r.score_at_reference /= n;
    r.auc /= n;
    return r;
}

SequenceEvaluation evaluate_sequence(const fs::path& result_dir, const fs::path& data_dir, const EvalConfig& cfg) {
    auto [seq, gt] = load_sequence(data_dir);
    const auto rows = read_boxes_csv(result_dir / "boxes.csv");
    if (rows.size() != gt.boxes.size())
        throw EvaluationError(result_dir.string() + ": " + std::to_string(rows.size()) + " boxes for " +
                              std::to_string(gt.boxes.size()) + " frames");
    std::vector<Box> pred;
    for (const auto& r : rows) pred.push_back(r.box);

    SequenceEvaluation ev;
    ev.name = seq.name;
    ev.precision = dp_curve(pred, gt.boxes, cfg.dp_thresholds);
    ev.success = op_curve(pred, gt.boxes, cfg.op_thresholds);
    for (std::size_t i = 0; i < pred.size(); ++i) ev.mean_iou += iou(pred[i], gt.boxes[i]);
    ev.mean_iou /= static_cast<double>(pred.size());

    if (const auto j = read_json(result_dir / "result.json")) {
        if (j->contains("fps") && (*j)["fps"].is_number()) ev.fps = (*j)["fps"].get<double>();
        if (j->contains("fps_excluding_finetune") && (*j)["fps_excluding_finetune"].is_number())
            ev.fps_excluding_finetune = (*j)["fps_excluding_finetune"].get<double>();
    }

    if (gt.masks) {
        const int W = seq.width(), H = seq.height();
        std::vector<Mask> pm;
        for (std::size_t i = 0; i < pred.size(); ++i) {
            const fs::path mp = result_dir / "masks" / frame_file_name(i + 1);
            if (fs::exists(mp)) {
                Mask m = read_mask_png(mp);
                if (!m.same_dims(W, H)) throw EvaluationError(mp.string() + ": mask dimensions differ from the frames");
                pm.push_back(std::move(m));
            } else {
                Mask m(W, H);
                const RasterRect r = rasterize_clamped(pred[i], W, H);
                for (int y = r.y; y < r.bottom(); ++y)
                    for (int x = r.x; x < r.right(); ++x) m(x, y) = 1;
                pm.push_back(std::move(m));
            }
        }
        SegReport s;
        for (std::size_t i = 0; i < pm.size(); ++i) {
            ScalarMap sm(W, H);
            for (std::size_t k = 0; k < sm.size(); ++k) sm.data()[k] = pm[i].data()[k] ? 1.0 : 0.0;
            s.s_measure += s_measure(sm, (*gt.masks)[i]);
        }
        s.s_measure /= static_cast<double>(pm.size());
        const TemporalStats j = j_stats(pm, *gt.masks);
        const TemporalStats f = f_stats(pm, *gt.masks, cfg.boundary_tolerance);
        s.j_mean = j.mean;
        s.j_recall = j.recall;
        s.j_decay = j.decay;
        s.f_mean = f.mean;
        s.f_recall = f.recall;
        s.f_decay = f.decay;
        s.fps = ev.fps;
        ev.segmentation = s;
    }
    return ev;
}

json seg_json(const std::optional<SegReport>& s) {
    auto v = [&](double SegReport::*m) { return s ? json(*s.*m) : json(nullptr); };
    return {{"s_measure", v(&SegReport::s_measure)}, {"j_mean", v(&SegReport::j_mean)},
            {"j_recall", v(&SegReport::j_recall)},   {"j_decay", v(&SegReport::j_decay)},
            {"f_mean", v(&SegReport::f_mean)},       {"f_recall", v(&SegReport::f_recall)},
            {"f_decay", v(&SegReport::f_decay)},     {"fps", v(&SegReport::fps)}};
}

json curve_summary(const CurveReport& c, const char* ref_key) {
    return {{ref_key, c.score_at_reference}, {"auc", c.auc}};
}

}  // namespace

RunEvaluation evaluate_run(const fs::path& results_dir, const fs::path& data_dir, const fs::path& out_dir,
                           const EvalConfig& cfg) {
    const auto dirs = result_dirs(results_dir);
    RunEvaluation run;
    run.sequences.resize(dirs.size());
    parallel_for(dirs.size(), cfg.workers, [&](std::size_t i) {
        const fs::path& d = dirs[i];
        try {
            run.sequences[i] = evaluate_sequence(d, data_dir_for(d, data_dir, dirs.size() == 1), cfg);
        } catch (const DatasetError& e) {
            throw EvaluationError(e.what());
        } catch (const std::invalid_argument& e) {
            throw EvaluationError(d.string() + ": " + e.what());
        } catch (const std::runtime_error& e) {
            if (dynamic_cast<const EvaluationError*>(&e)) throw;
            throw EvaluationError(e.what());
        }
    });

    std::vector<const CurveReport*> p, s;
    std::vector<const SegReport*> seg;
    for (const auto& ev : run.sequences) {
        p.push_back(&ev.precision);
        s.push_back(&ev.success);
        if (ev.segmentation) seg.push_back(&*ev.segmentation);
    }
    run.precision = average_curves(p);
    run.success = average_curves(s);
    if (!seg.empty()) {
        SegReport m;
        for (const auto* r : seg) {
            m.s_measure += r->s_measure;
            m.j_mean += r->j_mean;
            m.j_recall += r->j_recall;
            m.j_decay += r->j_decay;
            m.f_mean += r->f_mean;
            m.f_recall += r->f_recall;
            m.f_decay += r->f_decay;
            m.fps += r->fps;
        }
        const double n = static_cast<double>(seg.size());
        for (double* v : {&m.s_measure, &m.j_mean, &m.j_recall, &m.j_decay, &m.f_mean, &m.f_recall, &m.f_decay, &m.fps})
            *v /= n;
        run.segmentation = m;
    }

    fs::create_directories(out_dir);
    write_curve_csv(out_dir / "precision_curve.csv", run.precision);
    write_curve_csv(out_dir / "success_curve.csv", run.success);

    json metrics = seg_json(run.segmentation);
    metrics["precision_curve"] = "precision_curve.csv";
    metrics["success_curve"] = "success_curve.csv";
    std::ofstream(out_dir / "metrics.json") << metrics.dump(2) << "\n";

    json detail;
    detail["conventions"] = "J/F: DAVIS 2016 (decay over 4 bins sharing endpoints); boundary tolerance " +
                            format_real(cfg.boundary_tolerance) + " of the image diagonal";
    detail["precision"] = curve_summary(run.precision, "dp_at_100px");
    detail["success"] = curve_summary(run.success, "op_at_0.5");
    json per = json::array();
    for (const auto& ev : run.sequences) {
        per.push_back({{"sequence", ev.name},
                       {"precision", curve_summary(ev.precision, "dp_at_100px")},
                       {"success", curve_summary(ev.success, "op_at_0.5")},
                       {"mean_iou", ev.mean_iou},
                       {"fps", ev.fps},
                       {"fps_excluding_finetune", ev.fps_excluding_finetune},
                       {"segmentation", ev.segmentation ? seg_json(ev.segmentation) : json(nullptr)}});
    }
    detail["sequences"] = per;
    std::ofstream(out_dir / "metrics_detail.json") << detail.dump(2) << "\n";
    return run;
}

}  // namespace sslt
