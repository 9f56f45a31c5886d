#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "sslt/pipeline.hpp"

namespace sslt {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_real(double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

const std::vector<std::string>& timing_keys() {
    static const std::vector<std::string> keys{"timings", "fps", "fps_excluding_finetune"};
    return keys;
}

namespace {

json box_json(const Box& b) { return json::array({b.x, b.y, b.w, b.h}); }

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f << text;
    if (!f) throw std::runtime_error("write failed: " + path.string());
}

void write_boxes(const fs::path& path, const std::vector<Box>& boxes, const std::vector<std::string>& sources) {
    std::string out = "frame,x,y,w,h,source\n";
    for (std::size_t i = 0; i < boxes.size(); ++i) {
        const Box& b = boxes[i];
        out += std::to_string(i + 1) + "," + format_real(b.x) + "," + format_real(b.y) + "," + format_real(b.w) + "," +
               format_real(b.h) + "," + sources[i] + "\n";
    }
    write_text(path, out);
}

}  // namespace

void write_sequence_result(const fs::path& dir, const SequenceResult& result, const PipelineConfig& cfg) {
    fs::create_directories(dir / "masks");
    std::vector<Box> boxes;
    std::vector<std::string> sources;
    std::map<std::string, std::size_t> counts;
    for (const auto& f : result.frames) {
        boxes.push_back(f.final_box);
        sources.emplace_back(to_string(f.source));
        ++counts[sources.back()];
        write_mask_png(dir / "masks" / frame_file_name(f.frame_index + 1), f.mask);
    }
    write_boxes(dir / "boxes.csv", boxes, sources);

    std::string props = "frame,f0_x,f0_y,f0_w,f0_h,ft_x,ft_y,ft_w,ft_h\n";
    for (const auto& f : result.frames) {
        props += std::to_string(f.frame_index + 1);
        for (const Box& b : {f.f0, f.ft})
            props += "," + format_real(b.x) + "," + format_real(b.y) + "," + format_real(b.w) + "," + format_real(b.h);
        props += "\n";
    }
    write_text(dir / "proposals.csv", props);

    const StageSeeds seeds = derive_seeds(cfg.seed);
    json j;
    j["sequence"] = result.name;
    j["frame_count"] = result.frames.size();
    j["salient"] = result.salient;
    if (result.pseudo_label) {
        const auto& p = *result.pseudo_label;
        json cand = json::array();
        for (auto c : p.candidates) cand.push_back(c + 1);
        j["pseudo_label"] = {{"frame", p.frame_index + 1},
                             {"crop_box", box_json(p.crop_box)},
                             {"salient_area", p.salient_area},
                             {"candidate_frames", cand}};
    } else {
        j["pseudo_label"] = nullptr;
    }
    j["source_counts"] = counts;
    j["diagnostics"] = result.diagnostics;
    j["final_loss"] = result.loss_trace.empty() ? json(nullptr) : json(result.loss_trace.back());
    j["seed"] = cfg.seed;
    j["stage_seeds"] = {{"saliency", seeds.saliency}, {"train", seeds.train}, {"model_init", seeds.model_init}};
    j["config"] = config_to_json(cfg);
    const auto& t = result.timings;
    j["timings"] = {{"tracking", t.tracking},         {"saliency", t.saliency}, {"fine_tune", t.fine_tune},
                    {"segmentation", t.segmentation}, {"fusion", t.fusion},     {"total", t.total()}};
    j["fps"] = result.fps_including_finetune();
    j["fps_excluding_finetune"] = result.fps_excluding_finetune();
    write_text(dir / "result.json", j.dump(2) + "\n");
}

void write_tracker_result(const fs::path& dir, const std::string& name, const std::vector<Box>& boxes,
                          double seconds, const TrackerConfig& cfg) {
    fs::create_directories(dir);
    write_boxes(dir / "boxes.csv", boxes, std::vector<std::string>(boxes.size(), "tracker"));
    PipelineConfig p;
    p.tracker = cfg;
    const double fps = seconds > 0 ? static_cast<double>(boxes.size()) / seconds : 0.0;
    json j;
    j["sequence"] = name;
    j["frame_count"] = boxes.size();
    j["tracker"] = config_to_json(p)["tracker"];
    j["timings"] = {{"tracking", seconds}, {"total", seconds}};
    j["fps"] = fps;
    j["fps_excluding_finetune"] = fps;
    write_text(dir / "result.json", j.dump(2) + "\n");
}

std::vector<BoxRow> read_boxes_csv(const fs::path& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path.string());
    std::string line;
    if (!std::getline(f, line) || line.rfind("frame,x,y,w,h", 0) != 0)
        throw std::runtime_error(path.string() + ": missing header frame,x,y,w,h,source");
    std::vector<BoxRow> rows;
    std::size_t line_no = 1;
    while (std::getline(f, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (fields.size() < 5)
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": expected 6 fields");
        BoxRow row;
        double v[5];
        for (int i = 0; i < 5; ++i) {
            const auto& s = fields[i];
            const auto r = std::from_chars(s.data(), s.data() + s.size(), v[i]);
            if (r.ec != std::errc{} || r.ptr != s.data() + s.size())
                throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": bad number \"" + s + "\"");
        }
        row.frame = static_cast<std::size_t>(v[0]);
        row.box = {v[1], v[2], v[3], v[4]};
        row.source = fields.size() > 5 ? fields[5] : "";
        if (row.frame != rows.size() + 1)
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": frames must be 1, 2, ...");
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace sslt
