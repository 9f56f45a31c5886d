#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fstream>

#include <CLI11.hpp>

#include "sslt/cli.hpp"
#include "sslt/metrics.hpp"
#include "sslt/pipeline.hpp"

namespace sslt {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    int workers = 1;
    int verbosity = 0;
    std::string data, out, results;
    bool suite = false;
    bool feedback = false;
    bool dump_saliency = false;
};

json read_json_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open config " + path);
    try {
        return json::parse(f);
    } catch (const json::parse_error& e) {
        throw ConfigError(path, std::string("invalid JSON: ") + e.what());
    }
}

std::uint64_t env_seed(std::uint64_t fallback) {
    const char* s = std::getenv("SSLT_SEED");
    if (!s || !*s) return fallback;
    char* end = nullptr;
    const unsigned long long v = std::strtoull(s, &end, 10);
    if (*end != '\0' || s[0] == '-') throw UsageError(std::string("SSLT_SEED is not an unsigned integer: ") + s);
    return v;
}

PipelineConfig load_pipeline_config(const Options& o) {
    PipelineConfig base;
    base.seed = env_seed(0);
    PipelineConfig cfg = o.config.empty() ? base : config_from_json(read_json_file(o.config), base);
    if (o.seed) cfg.seed = *o.seed;
    cfg.workers = o.workers;
    if (o.feedback) cfg.feedback = FeedbackMode::refine_feeds_tracker;
    return cfg;
}

void log(const Options& o, int level, std::ostream& err, const std::string& msg) {
    if (o.verbosity >= level) err << msg << "\n";
}

void draw_rect(Image& img, const RasterRect& r, const std::array<double, 3>& color) {
    if (r.empty()) return;
    auto put = [&](int x, int y) {
        if (x < 0 || y < 0 || x >= img.width() || y >= img.height()) return;
        for (int c = 0; c < 3; ++c) img.at(x, y, c) = color[c];
    };
    for (int x = r.x; x < r.right(); ++x) {
        put(x, r.y);
        put(x, r.bottom() - 1);
    }
    for (int y = r.y; y < r.bottom(); ++y) {
        put(r.x, y);
        put(r.right() - 1, y);
    }
}

Image to_rgb(const Image& img) {
    if (img.channels() == 3) return img;
    Image out(img.width(), img.height(), 3);
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x)
            for (int c = 0; c < 3; ++c) out.at(x, y, c) = img.at(x, y, 0);
    return out;
}

std::vector<Box> read_f0(const fs::path& dir, const std::vector<BoxRow>& rows) {
    std::vector<Box> f0;
    std::ifstream f(dir / "proposals.csv");
    if (!f) {
        for (const auto& r : rows) f0.push_back(r.box);
        return f0;
    }
    std::string line;
    std::getline(f, line);
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string field;
        std::vector<double> v;
        while (std::getline(ss, field, ',')) v.push_back(std::stod(field));
        if (v.size() < 5) throw std::runtime_error((dir / "proposals.csv").string() + ": malformed row");
        f0.push_back({v[1], v[2], v[3], v[4]});
    }
    return f0;
}

int cmd_synth(const Options& o, std::ostream& out, std::ostream& err) {
    std::vector<SynthConfig> configs;
    if (o.suite) {
        if (!o.config.empty()) throw UsageError("synth: --suite and --config are exclusive");
        configs = split_challenge_suite(o.seed ? *o.seed : env_seed(0));
    } else {
        if (o.config.empty()) throw UsageError("synth: needs --config FILE or --suite");
        SynthConfig c = synth_config_from_json(read_json_file(o.config));
        if (o.seed) c.seed = *o.seed;
        configs.push_back(c);
    }
    for (const auto& c : configs) {
        const fs::path dir = o.suite ? fs::path(o.out) / c.name : fs::path(o.out);
        generate_synthetic(c, dir);
        std::ofstream(dir / "synth_config.json") << synth_config_to_json(c).dump(2) << "\n";
        log(o, 1, err, "wrote " + dir.string());
    }
    out << "synthesized " << configs.size() << " sequence(s) under " << o.out << "\n";
    return kExitOk;
}

int cmd_track(const Options& o, std::ostream& out, std::ostream& err) {
    const PipelineConfig cfg = load_pipeline_config(o);
    const auto dirs = find_sequences(o.data);
    if (dirs.empty()) throw std::runtime_error("no sequences under " + o.data);
    for (const auto& d : dirs) {
        const auto [seq, gt] = load_sequence(d);
        const auto t0 = std::chrono::steady_clock::now();
        const auto boxes = run_tracker(seq, gt.boxes.front(), cfg.tracker);
        const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        write_tracker_result(fs::path(o.out) / seq.name, seq.name, boxes, s, cfg.tracker);
        log(o, 1, err, seq.name + ": " + std::to_string(boxes.size()) + " frames tracked");
    }
    out << "tracked " << dirs.size() << " sequence(s)\n";
    return kExitOk;
}

void dump_saliency(const fs::path& dir, const Sequence& seq, const SequenceResult& r, const PipelineConfig& cfg) {
    if (!r.pseudo_label) return;
    fs::create_directories(dir / "saliency");
    SaliencyConfig scfg = cfg.saliency;
    for (std::size_t idx : r.pseudo_label->candidates) {
        const FrameResult& f = r.frames[idx];
        const Image c = crop(seq.frames[idx], rasterize_clamped(f.ft, seq.width(), seq.height()));
        write_png(dir / "saliency" / frame_file_name(idx + 1), from_scalar_map(saliency_map(c, scfg)));
    }
}

int cmd_run(const Options& o, std::ostream& out, std::ostream& err) {
    const PipelineConfig cfg = load_pipeline_config(o);
    const auto dirs = find_sequences(o.data);
    if (dirs.empty()) throw std::runtime_error("no sequences under " + o.data);
    for (const auto& d : dirs) {
        const auto [seq, gt] = load_sequence(d);
        const SequenceResult r = run_sequence(seq, gt.boxes.front(), cfg);
        const fs::path dir = fs::path(o.out) / seq.name;
        write_sequence_result(dir, r, cfg);
        if (o.dump_saliency) dump_saliency(dir, seq, r, cfg);
        for (const auto& msg : r.diagnostics) err << seq.name << ": " << msg << "\n";
        log(o, 1, err,
            seq.name + ": salient=" + (r.salient ? "yes" : "no") + " fps=" + format_real(r.fps_including_finetune()));
    }
    out << "ran " << dirs.size() << " sequence(s)\n";
    return kExitOk;
}

int cmd_eval(const Options& o, std::ostream& out, std::ostream&) {
    EvalConfig cfg;
    cfg.workers = o.workers;
    const RunEvaluation ev = evaluate_run(o.results, o.data, o.out, cfg);
    char buf[160];
    std::snprintf(buf, sizeof buf, "DP@100 %.4f  OP@0.5 %.4f  success AUC %.4f\n", ev.precision.score_at_reference,
                  ev.success.score_at_reference, ev.success.auc);
    out << buf;
    if (ev.segmentation) {
        std::snprintf(buf, sizeof buf, "S %.4f  J %.4f  F %.4f\n", ev.segmentation->s_measure, ev.segmentation->j_mean,
                      ev.segmentation->f_mean);
        out << buf;
    }
    return kExitOk;
}

int cmd_overlay(const Options& o, std::ostream& out, std::ostream& err) {
    const std::array<double, 3> gt_color{0, 1, 0}, f0_color{0, 0.4, 1}, fn_color{1, 0, 0}, contour_color{1, 1, 0};
    const auto [seq, gt] = load_sequence(o.data);
    const fs::path rdir = fs::is_regular_file(fs::path(o.results) / "boxes.csv") ? fs::path(o.results)
                                                                                  : fs::path(o.results) / seq.name;
    const auto rows = read_boxes_csv(rdir / "boxes.csv");
    if (rows.size() != seq.size())
        throw std::runtime_error(rdir.string() + ": " + std::to_string(rows.size()) + " boxes for " +
                                 std::to_string(seq.size()) + " frames");
    const auto f0 = read_f0(rdir, rows);
    fs::create_directories(o.out);
    const int W = seq.width(), H = seq.height();
    for (std::size_t t = 0; t < seq.size(); ++t) {
        Image img = to_rgb(seq.frames[t]);
        const fs::path mp = rdir / "masks" / frame_file_name(t + 1);
        if (fs::exists(mp)) {
            const Mask b = boundary(read_mask_png(mp));
            for (int y = 0; y < std::min(H, b.height()); ++y)
                for (int x = 0; x < std::min(W, b.width()); ++x)
                    if (b(x, y))
                        for (int c = 0; c < 3; ++c) img.at(x, y, c) = contour_color[c];
        }
        draw_rect(img, rasterize_clamped(gt.boxes[t], W, H), gt_color);
        if (t < f0.size()) draw_rect(img, rasterize_clamped(f0[t], W, H), f0_color);
        draw_rect(img, rasterize_clamped(rows[t].box, W, H), fn_color);
        write_png(fs::path(o.out) / frame_file_name(t + 1), img);
    }
    log(o, 1, err, "overlay: " + std::to_string(seq.size()) + " frames");
    out << "wrote " << seq.size() << " overlay frame(s) to " << o.out << "\n";
    return kExitOk;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"sslt: tracking with online segmentation refinement", "sslt"};
    app.require_subcommand(1, 1);
    Options o;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", o.config, "JSON config file");
        sub->add_option("--seed", o.seed, "master seed (overrides config and SSLT_SEED)");
        sub->add_flag("-v,--verbose", o.verbosity, "more log output on stderr");
    };

    auto* synth = app.add_subcommand("synth", "render synthetic sequences with exact ground truth");
    common(synth);
    synth->add_option("--out", o.out, "output directory")->required();
    synth->add_flag("--suite", o.suite, "render the seven-sequence challenge suite");

    auto* track = app.add_subcommand("track", "tracker-only boxes");
    common(track);
    track->add_option("--data", o.data, "sequence directory or dataset root")->required()->check(CLI::ExistingDirectory);
    track->add_option("--out", o.out, "output directory")->required();

    auto* run = app.add_subcommand("run", "full pipeline per sequence");
    common(run);
    run->add_option("--data", o.data, "sequence directory or dataset root")->required()->check(CLI::ExistingDirectory);
    run->add_option("--out", o.out, "output directory")->required();
    run->add_option("--workers", o.workers, "segmentation threads")->check(CLI::PositiveNumber);
    run->add_flag("--feedback", o.feedback, "feed refined boxes back into the tracker");
    run->add_flag("--dump-saliency", o.dump_saliency, "write candidate saliency maps as PNG");

    auto* eval = app.add_subcommand("eval", "score results against ground truth");
    common(eval);
    eval->add_option("--results", o.results, "results directory")->required()->check(CLI::ExistingDirectory);
    eval->add_option("--data", o.data, "dataset directory")->required()->check(CLI::ExistingDirectory);
    eval->add_option("--out", o.out, "output directory")->required();
    eval->add_option("--workers", o.workers, "sequences evaluated concurrently")->check(CLI::PositiveNumber);

    auto* overlay = app.add_subcommand("overlay", "draw GT, tracker, final boxes and mask contours");
    common(overlay);
    overlay->add_option("--data", o.data, "sequence directory")->required()->check(CLI::ExistingDirectory);
    overlay->add_option("--results", o.results, "results directory")->required()->check(CLI::ExistingDirectory);
    overlay->add_option("--out", o.out, "output directory")->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n";
        return kExitUsage;
    }

    try {
        if (synth->parsed()) return cmd_synth(o, out, err);
        if (track->parsed()) return cmd_track(o, out, err);
        if (run->parsed()) return cmd_run(o, out, err);
        if (eval->parsed()) return cmd_eval(o, out, err);
        return cmd_overlay(o, out, err);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}

}  // namespace sslt
