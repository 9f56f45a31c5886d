#include <set>

#include "sslt/pipeline.hpp"

namespace sslt {

using nlohmann::json;

namespace {

const char* to_string(SalientPolicy p) { return p == SalientPolicy::any_frame ? "any-frame" : "fraction"; }
const char* to_string(FeedbackMode m) { return m == FeedbackMode::off ? "off" : "refine-feeds-tracker"; }

/// Walks one JSON object, rejecting unknown keys and mistyped values.
class Reader {
public:
    Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(path_, "expected an object");
    }

    ~Reader() noexcept(false) {
        if (std::uncaught_exceptions()) return;
        for (const auto& [key, _] : j_.items())
            if (!seen_.count(key)) throw ConfigError(child(key), "unknown field");
    }

    void real(const char* key, double& out) {
        if (const json* v = get(key)) {
            if (!v->is_number()) throw ConfigError(child(key), "expected a number");
            out = v->get<double>();
        }
    }

    void integer(const char* key, int& out) {
        if (const json* v = get(key)) {
            if (!v->is_number_integer()) throw ConfigError(child(key), "expected an integer");
            const auto x = v->get<std::int64_t>();
            if (x < INT32_MIN || x > INT32_MAX) throw ConfigError(child(key), "integer out of range");
            out = static_cast<int>(x);
        }
    }

    void unsigned_integer(const char* key, std::uint64_t& out) {
        if (const json* v = get(key)) {
            if (!v->is_number_integer() || (!v->is_number_unsigned() && v->get<std::int64_t>() < 0)) throw ConfigError(child(key), "expected a non-negative integer");
            out = v->get<std::uint64_t>();
        }
    }

    void string(const char* key, std::string& out) {
        if (const json* v = get(key)) {
            if (!v->is_string()) throw ConfigError(child(key), "expected a string");
            out = v->get<std::string>();
        }
    }

    void boolean(const char* key, bool& out) {
        if (const json* v = get(key)) {
            if (!v->is_boolean()) throw ConfigError(child(key), "expected a boolean");
            out = v->get<bool>();
        }
    }

    template <typename Enum, typename Parse>
    void enumeration(const char* key, Enum& out, Parse parse) {
        std::string s;
        if (!get(key)) return;
        string(key, s);
        try {
            out = parse(s);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(child(key), e.what());
        }
    }

    const json* object(const char* key) {
        const json* v = get(key);
        if (v && !v->is_object()) throw ConfigError(child(key), "expected an object");
        return v;
    }

    const json* array(const char* key) {
        const json* v = get(key);
        if (v && !v->is_array()) throw ConfigError(child(key), "expected an array");
        return v;
    }

    std::string child(const std::string& key) const { return path_ + "." + key; }

private:
    const json* get(const char* key) {
        seen_.insert(key);
        auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

SalientPolicy salient_policy_from_string(const std::string& s) {
    if (s == "any-frame") return SalientPolicy::any_frame;
    if (s == "fraction") return SalientPolicy::fraction;
    throw std::invalid_argument("unknown salient policy \"" + s + "\"");
}

FeedbackMode feedback_from_string(const std::string& s) {
    if (s == "off") return FeedbackMode::off;
    if (s == "refine-feeds-tracker") return FeedbackMode::refine_feeds_tracker;
    throw std::invalid_argument("unknown feedback mode \"" + s + "\"");
}

std::vector<double> real_array(const json& a, const std::string& path) {
    std::vector<double> out;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!a[i].is_number()) throw ConfigError(path + "[" + std::to_string(i) + "]", "expected a number");
        out.push_back(a[i].get<double>());
    }
    return out;
}

template <typename Fn>
void validated(const std::string& path, Fn&& fn) {
    try {
        fn();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw ConfigError(path, e.what());
    }
}

}  // namespace

json config_to_json(const PipelineConfig& cfg) {
    const auto& g = cfg.geometry;
    const auto& s = cfg.saliency;
    const auto& t = cfg.train;
    const auto& k = cfg.tracker;
    return {
        {"geometry", {{"expand_factor", g.expand_factor}, {"min_crop_side", g.min_crop_side},
                      {"salient_min_side", g.salient_min_side}}},
        {"saliency", {{"backend", s.backend}, {"working_width", s.working_width},
                      {"smoothing_sigma", s.smoothing_sigma}, {"binarize_mode", to_string(s.binarize_mode)},
                      {"relative_threshold", s.relative_threshold}, {"candidates", s.candidates}}},
        {"train", {{"iterations", t.iterations}, {"learning_rate", t.learning_rate}, {"momentum", t.momentum},
                   {"flip_probability", t.flip_probability}, {"threshold", t.threshold},
                   {"input_size", t.input_size}}},
        {"tracker", {{"padding", k.padding}, {"lambda", k.lambda}, {"learning_rate", k.learning_rate},
                     {"sigma_factor", k.sigma_factor}, {"cell_size", k.cell_size},
                     {"orientation_bins", k.orientation_bins}, {"scale_pool", k.scale_pool},
                     {"max_model_cells", k.max_model_cells}, {"min_model_cells", k.min_model_cells}}},
        {"salient_policy", to_string(cfg.salient_policy)},
        {"salient_fraction", cfg.salient_fraction},
        {"feedback", to_string(cfg.feedback)},
        {"seed", cfg.seed},
    };
}

PipelineConfig config_from_json(const json& j, PipelineConfig cfg) {
    {
        Reader r(j, "$");
        if (const json* g = r.object("geometry")) {
            Reader s(*g, "$.geometry");
            s.real("expand_factor", cfg.geometry.expand_factor);
            s.real("min_crop_side", cfg.geometry.min_crop_side);
            s.real("salient_min_side", cfg.geometry.salient_min_side);
        }
        if (const json* g = r.object("saliency")) {
            Reader s(*g, "$.saliency");
            s.string("backend", cfg.saliency.backend);
            s.integer("working_width", cfg.saliency.working_width);
            s.real("smoothing_sigma", cfg.saliency.smoothing_sigma);
            s.enumeration("binarize_mode", cfg.saliency.binarize_mode, binarize_mode_from_string);
            s.real("relative_threshold", cfg.saliency.relative_threshold);
            s.integer("candidates", cfg.saliency.candidates);
        }
        if (const json* g = r.object("train")) {
            Reader s(*g, "$.train");
            s.integer("iterations", cfg.train.iterations);
            s.real("learning_rate", cfg.train.learning_rate);
            s.real("momentum", cfg.train.momentum);
            s.real("flip_probability", cfg.train.flip_probability);
            s.real("threshold", cfg.train.threshold);
            s.integer("input_size", cfg.train.input_size);
        }
        if (const json* g = r.object("tracker")) {
            Reader s(*g, "$.tracker");
            s.real("padding", cfg.tracker.padding);
            s.real("lambda", cfg.tracker.lambda);
            s.real("learning_rate", cfg.tracker.learning_rate);
            s.real("sigma_factor", cfg.tracker.sigma_factor);
            s.integer("cell_size", cfg.tracker.cell_size);
            s.integer("orientation_bins", cfg.tracker.orientation_bins);
            if (const json* a = s.array("scale_pool")) cfg.tracker.scale_pool = real_array(*a, "$.tracker.scale_pool");
            s.integer("max_model_cells", cfg.tracker.max_model_cells);
            s.integer("min_model_cells", cfg.tracker.min_model_cells);
        }
        r.enumeration("salient_policy", cfg.salient_policy, salient_policy_from_string);
        r.real("salient_fraction", cfg.salient_fraction);
        r.enumeration("feedback", cfg.feedback, feedback_from_string);
        r.unsigned_integer("seed", cfg.seed);
    }
    validated("$.geometry", [&] { cfg.geometry.validate(); });
    validated("$.saliency", [&] { cfg.saliency.validate(); });
    validated("$.train", [&] { cfg.train.validate(); });
    validated("$.tracker", [&] { cfg.tracker.validate(); });
    validated("$", [&] { cfg.validate(); });
    return cfg;
}

json synth_config_to_json(const SynthConfig& c) {
    json polygon = json::array();
    for (const auto& [x, y] : c.polygon) polygon.push_back({x, y});
    json motion = json::array();
    for (const auto& m : c.motion)
        motion.push_back({{"dx", m.dx}, {"dy", m.dy}, {"rotation", m.rotation}, {"scale", m.scale}});
    return {
        {"name", c.name}, {"frame_count", c.frame_count}, {"width", c.width}, {"height", c.height},
        {"polygon", polygon}, {"texture_seed", c.texture_seed}, {"start_cx", c.start_cx}, {"start_cy", c.start_cy},
        {"start_rotation", c.start_rotation}, {"start_scale", c.start_scale}, {"motion", motion},
        {"deformation", c.deformation}, {"background", to_string(c.background)},
        {"background_level", c.background_level}, {"background_drift", c.background_drift},
        {"gain_start", c.gain_start}, {"gain_step", c.gain_step}, {"noise_sigma", c.noise_sigma}, {"seed", c.seed},
    };
}

SynthConfig synth_config_from_json(const json& j) {
    SynthConfig c;
    {
        Reader r(j, "$");
        r.string("name", c.name);
        r.integer("frame_count", c.frame_count);
        r.integer("width", c.width);
        r.integer("height", c.height);
        if (const json* a = r.array("polygon")) {
            c.polygon.clear();
            for (std::size_t i = 0; i < a->size(); ++i) {
                const std::string p = "$.polygon[" + std::to_string(i) + "]";
                const json& v = (*a)[i];
                if (!v.is_array() || v.size() != 2) throw ConfigError(p, "expected [x, y]");
                const auto xy = real_array(v, p);
                c.polygon.emplace_back(xy[0], xy[1]);
            }
        }
        r.unsigned_integer("texture_seed", c.texture_seed);
        r.real("start_cx", c.start_cx);
        r.real("start_cy", c.start_cy);
        r.real("start_rotation", c.start_rotation);
        r.real("start_scale", c.start_scale);
        if (const json* a = r.array("motion")) {
            c.motion.clear();
            for (std::size_t i = 0; i < a->size(); ++i) {
                Reader m((*a)[i], "$.motion[" + std::to_string(i) + "]");
                MotionStep step;
                m.real("dx", step.dx);
                m.real("dy", step.dy);
                m.real("rotation", step.rotation);
                m.real("scale", step.scale);
                c.motion.push_back(step);
            }
        }
        r.real("deformation", c.deformation);
        r.enumeration("background", c.background, background_from_string);
        r.real("background_level", c.background_level);
        r.real("background_drift", c.background_drift);
        r.real("gain_start", c.gain_start);
        r.real("gain_step", c.gain_step);
        r.real("noise_sigma", c.noise_sigma);
        r.unsigned_integer("seed", c.seed);
    }
    validated("$", [&] { c.validate(); });
    return c;
}

}  // namespace sslt
