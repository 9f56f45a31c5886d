#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "sslt/dataset.hpp"

namespace fs = std::filesystem;

namespace sslt {

std::string frame_file_name(std::size_t index_1based) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%06zu.png", index_1based);
    return buf;
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool parse_real(const std::string& token, double& out) {
    const std::string t = trim(token);
    if (t.empty()) return false;
    const char* first = t.data();
    const char* last = t.data() + t.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last && std::isfinite(out);
}

// Indices of NNNNNN.png files in `dir`, validated contiguous from 1.
std::size_t count_indexed_pngs(const fs::path& dir, const char* what) {
    std::set<std::size_t> indices;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".png") continue;
        const std::string stem = entry.path().stem().string();
        std::size_t idx = 0;
        auto [ptr, ec] = std::from_chars(stem.data(), stem.data() + stem.size(), idx);
        if (ec != std::errc{} || ptr != stem.data() + stem.size() || stem.size() != 6)
            throw DatasetError(entry.path().string() + ": " + what + " file name is not NNNNNN.png");
        indices.insert(idx);
    }
    std::size_t expected = 1;
    for (std::size_t idx : indices) {
        if (idx != expected)
            throw DatasetError(dir.string() + ": " + what + " indices not contiguous from 000001 (missing " +
                               frame_file_name(expected) + ")");
        ++expected;
    }
    return indices.size();
}

}  // namespace

Box parse_box_line(const std::string& line, std::size_t line_no) {
    std::vector<std::string> parts;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) parts.push_back(tok);
    Box b;
    if (parts.size() != 4 || !parse_real(parts[0], b.x) || !parse_real(parts[1], b.y) || !parse_real(parts[2], b.w) ||
        !parse_real(parts[3], b.h))
        throw DatasetError("groundtruth.txt line " + std::to_string(line_no) + ": malformed box \"" + line + "\"");
    if (!b.valid())
        throw DatasetError("groundtruth.txt line " + std::to_string(line_no) + ": box must have positive size");
    return b;
}

std::pair<Sequence, GroundTruth> load_sequence(const fs::path& dir) {
    const fs::path frames_dir = dir / "frames";
    if (!fs::is_directory(frames_dir)) throw DatasetError(dir.string() + ": missing frames/ directory");
    const std::size_t n = count_indexed_pngs(frames_dir, "frame");
    if (n < 2) throw DatasetError(dir.string() + ": a sequence needs at least 2 frames");

    Sequence seq;
    seq.name = dir.filename().string();
    if (seq.name.empty()) seq.name = dir.parent_path().filename().string();
    for (std::size_t i = 1; i <= n; ++i) {
        const fs::path p = frames_dir / frame_file_name(i);
        seq.frames.push_back(read_png(p));
        seq.frame_paths.push_back(p.string());
        if (seq.frames.back().width() != seq.frames.front().width() ||
            seq.frames.back().height() != seq.frames.front().height())
            throw DatasetError(p.string() + ": frame dimensions differ from the first frame");
    }

    GroundTruth gt;
    const fs::path gt_path = dir / "groundtruth.txt";
    std::ifstream in(gt_path);
    if (!in) throw DatasetError(gt_path.string() + ": missing ground truth file");
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        gt.boxes.push_back(parse_box_line(line, line_no));
    }
    if (gt.boxes.size() != n)
        throw DatasetError(gt_path.string() + ": " + std::to_string(gt.boxes.size()) + " boxes for " +
                           std::to_string(n) + " frames");

    const fs::path masks_dir = dir / "masks";
    if (fs::is_directory(masks_dir)) {
        const std::size_t m = count_indexed_pngs(masks_dir, "mask");
        if (m != n)
            throw DatasetError(masks_dir.string() + ": " + std::to_string(m) + " masks for " + std::to_string(n) +
                               " frames");
        std::vector<Mask> masks;
        for (std::size_t i = 1; i <= n; ++i) {
            const fs::path p = masks_dir / frame_file_name(i);
            masks.push_back(read_mask_png(p));
            if (!masks.back().same_dims(seq.width(), seq.height()))
                throw DatasetError(p.string() + ": mask dimensions do not match frames");
        }
        gt.masks = std::move(masks);
    }
    return {std::move(seq), std::move(gt)};
}

std::vector<fs::path> find_sequences(const fs::path& root) {
    if (fs::is_directory(root / "frames")) return {root};
    std::vector<fs::path> out;
    if (!fs::is_directory(root)) throw DatasetError(root.string() + ": not a directory");
    for (const auto& entry : fs::directory_iterator(root))
        if (entry.is_directory() && fs::is_directory(entry.path() / "frames")) out.push_back(entry.path());
    std::sort(out.begin(), out.end());
    if (out.empty()) throw DatasetError(root.string() + ": no sequence directories found");
    return out;
}

void write_sequence(const fs::path& dir, const Sequence& seq, const GroundTruth& gt) {
    fs::create_directories(dir / "frames");
    for (std::size_t i = 0; i < seq.frames.size(); ++i) write_png(dir / "frames" / frame_file_name(i + 1), seq.frames[i]);
    if (gt.masks) {
        fs::create_directories(dir / "masks");
        for (std::size_t i = 0; i < gt.masks->size(); ++i)
            write_mask_png(dir / "masks" / frame_file_name(i + 1), (*gt.masks)[i]);
    }
    std::ofstream out(dir / "groundtruth.txt", std::ios::binary);
    char buf[128];
    for (const Box& b : gt.boxes) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", b.x, b.y, b.w, b.h);
        out << buf;
    }
    if (!out) throw DatasetError((dir / "groundtruth.txt").string() + ": write failed");
}

}  // namespace sslt
