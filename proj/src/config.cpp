#include "pgam/config.hpp"

#include <fstream>

namespace pgam {

using nlohmann::json;

namespace {

double number(const json& j, const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number()) throw ConfigError(std::string("field '") + key + "' must be a number");
    return j.at(key).get<double>();
}

double required(const json& j, const char* key) {
    if (!j.contains(key)) throw ConfigError(std::string("missing field '") + key + "'");
    return number(j, key, 0);
}

std::array<double, 6> six(const json& j, const char* what) {
    if (j.is_number()) {
        double v = j.get<double>();
        return {v, v, v, v, v, v};
    }
    if (!j.is_array() || j.size() != 6) throw ConfigError(std::string(what) + " must be a number or an array of 6 numbers");
    std::array<double, 6> out{};
    for (int i = 0; i < 6; ++i) out[i] = j.at(i).get<double>();
    return out;
}

// Meters for translation components, degrees converted to radians for rotations.
std::array<double, 6> six_si(const json& j, const char* what) {
    auto v = six(j, what);
    for (int a = 3; a < 6; ++a) v[a] = deg2rad(v[a]);
    return v;
}

ErrorVector error_from_json(const json& j) {
    auto v = six_si(j, "symmetry mode");
    ErrorVector e;
    for (int a = 0; a < 6; ++a) e[a] = v[a];
    return e;
}

geom::Rect rect_from_json(const json& j) {
    auto mn = j.at("min").get<std::vector<double>>();
    auto mx = j.at("max").get<std::vector<double>>();
    if (mn.size() != 2 || mx.size() != 2) throw ConfigError("rectangle min/max must have 2 entries");
    return {{mn[0], mn[1]}, {mx[0], mx[1]}};
}

Section section_from_json(const json& j) {
    std::string type = j.at("type").get<std::string>();
    if (type == "box") return BoxSection{required(j, "width"), required(j, "depth"), required(j, "height")};
    if (type == "cylinder") return CylinderSection{required(j, "radius"), required(j, "height")};
    if (type == "annulus") return AnnulusSection{required(j, "r_in"), required(j, "r_out"), required(j, "height")};
    if (type == "mug") {
        return MugSection{required(j, "radius"), required(j, "height"), required(j, "handle_width"), required(j, "handle_extent")};
    }
    throw ConfigError("unknown section type '" + type + "'");
}

template <typename F>
auto wrap_errors(const char* context, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const ConfigError&) {
        throw;
    } catch (const json::exception& e) {
        throw ConfigError(std::string(context) + ": " + e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string(context) + ": " + e.what());
    }
}

}  // namespace

json load_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path.string());
    try {
        return json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

void apply_override(json& config, std::string_view assignment) {
    auto eq = assignment.find('=');
    if (eq == std::string_view::npos || eq == 0) throw ConfigError("override must look like key=value: " + std::string(assignment));
    std::string key(assignment.substr(0, eq));
    std::string raw(assignment.substr(eq + 1));
    json value;
    try {
        value = json::parse(raw);
    } catch (const json::parse_error&) {
        value = raw;
    }
    json* node = &config;
    std::size_t start = 0;
    while (true) {
        auto dot = key.find('.', start);
        std::string part = key.substr(start, dot - start);
        if (part.empty()) throw ConfigError("empty key segment in override " + key);
        if (node->is_array()) {
            std::size_t idx = 0;
            try {
                idx = std::stoul(part);
            } catch (const std::logic_error&) {
                throw ConfigError("override segment '" + part + "' must index an array");
            }
            if (idx >= node->size()) throw ConfigError("override index out of range: " + key);
            node = &(*node)[idx];
        } else {
            node = &(*node)[part];
        }
        if (dot == std::string::npos) break;
        start = dot + 1;
    }
    *node = value;
}

ErrorGrid grid_from_json(const json& j) {
    return wrap_errors("grid", [&] {
        auto limits = six_si(j.at("limits"), "grid.limits");
        auto steps = six_si(j.at("steps"), "grid.steps");
        std::uint64_t cap = j.contains("cell_cap") ? j.at("cell_cap").get<std::uint64_t>() : kDefaultCellCap;
        try {
            return ErrorGrid::build(limits, steps, cap);
        } catch (const GridError& e) {
            throw ConfigError(std::string("grid: ") + e.what());
        }
    });
}

Pose pose_from_json(const json& j) {
    auto xyz = j.value("xyz", std::vector<double>{0, 0, 0});
    auto rpy = j.value("rpy_deg", std::vector<double>{0, 0, 0});
    if (xyz.size() != 3 || rpy.size() != 3) throw ConfigError("pose xyz and rpy_deg need 3 entries");
    ErrorVector e;
    e.t = Eigen::Vector3d(xyz[0], xyz[1], xyz[2]);
    e.r = Eigen::Vector3d(deg2rad(rpy[0]), deg2rad(rpy[1]), deg2rad(rpy[2]));
    return to_pose(e);
}

std::uint64_t scenario_hash(const json& scenario) {
    json key = json::object();
    key["task"] = scenario.value("task", "");
    for (const char* block : {"grasp", "ik"}) {
        if (scenario.contains(block)) key[block] = scenario.at(block);
    }
    // FNV-1a over the canonical (sorted-key) dump.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : key.dump()) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::shared_ptr<const TaskEvaluator> evaluator_from_json(const json& scenario) {
    return wrap_errors("scenario", [&]() -> std::shared_ptr<const TaskEvaluator> {
        std::string task = scenario.at("task").get<std::string>();
        if (task == "grasp") {
            const json& g = scenario.at("grasp");
            GraspScenario s;
            s.section = section_from_json(g.at("section"));
            s.opening_width = number(g, "opening_width", s.opening_width);
            s.finger_length = number(g, "finger_length", s.finger_length);
            s.finger_thickness = number(g, "finger_thickness", s.finger_thickness);
            s.palm_depth = number(g, "palm_depth", s.palm_depth);
            s.min_finger_overlap = number(g, "min_finger_overlap", s.min_finger_overlap);
            if (g.contains("friction_half_angle_deg")) s.friction_half_angle = deg2rad(g.at("friction_half_angle_deg").get<double>());
            s.stability_offset_max = number(g, "stability_offset_max", s.stability_offset_max);
            if (g.contains("grasp_pose")) {
                s.grasp_in_object = pose_from_json(g.at("grasp_pose"));
            } else {
                const json top = g.value("top_down", json::object());
                s.grasp_in_object = GraspScenario::top_down({number(top, "x", 0), number(top, "y", 0)}, number(top, "depth", 0.025),
                                                            section_height(s.section), deg2rad(number(top, "closing_yaw_deg", 0)));
            }
            return std::make_shared<GraspEvaluator>(std::move(s));
        }
        if (task == "ik") {
            const json& k = scenario.at("ik");
            IkScenario s;
            if (k.contains("object_in_world")) s.object_in_world = pose_from_json(k.at("object_in_world"));
            s.base_in_object = pose_from_json(k.at("base_in_object"));
            s.reach_min = number(k, "reach_min", s.reach_min);
            s.reach_max = number(k, "reach_max", s.reach_max);
            if (k.contains("heading_half_angle_deg")) s.heading_half_angle = deg2rad(k.at("heading_half_angle_deg").get<double>());
            if (k.contains("footprint")) {
                auto fp = k.at("footprint").get<std::vector<double>>();
                if (fp.size() != 2) throw ConfigError("ik.footprint needs [length, width]");
                s.footprint_length = fp[0];
                s.footprint_width = fp[1];
            }
            for (const auto& o : k.value("obstacles", json::array())) s.obstacles.push_back(rect_from_json(o));
            return std::make_shared<IkEvaluator>(std::move(s));
        }
        throw ConfigError("unknown task '" + task + "' (expected grasp or ik)");
    });
}

Scenario scenario_from_json(const json& j) {
    Scenario s{.name = j.value("name", std::string("scenario")),
               .grid = grid_from_json(j.at("grid")),
               .evaluator = evaluator_from_json(j),
               .truth = Pose::identity(),
               .estimator = {},
               .hash = 0};
    s.hash = scenario_hash(j);
    wrap_errors("scenario", [&] {
        if (j.contains("truth")) {
            s.truth = pose_from_json(j.at("truth"));
        } else if (auto ik = std::dynamic_pointer_cast<const IkEvaluator>(s.evaluator)) {
            s.truth = ik->scenario().object_in_world;
        }
        const json est = j.value("estimator", json::object());
        EstimatorModel& m = s.estimator;
        if (est.contains("noise")) m.noise = six_si(est.at("noise"), "estimator.noise");
        m.occlusion_noise_gain = number(est, "occlusion_noise_gain", 0);
        m.ambiguity = number(est, "ambiguity", 0);
        m.occlusion_ambiguity_gain = number(est, "occlusion_ambiguity_gain", 0);
        m.texture = number(est, "texture", 1);
        m.confusion = number(est, "confusion", 0);
        for (const auto& mode : est.value("symmetry_modes", json::array())) m.symmetry_modes.push_back(error_from_json(mode));
        if (est.contains("yaw_symmetry_step_deg")) {
            double step = est.at("yaw_symmetry_step_deg").get<double>();
            if (!(step > 0 && step < 360)) throw ConfigError("yaw_symmetry_step_deg must be in (0, 360)");
            for (double yaw = step; yaw < 360 - 1e-9; yaw += step) {
                ErrorVector e;
                e.r.z() = wrap_angle(deg2rad(yaw));
                m.symmetry_modes.push_back(e);
            }
        }
        m.validate();
    });
    return s;
}

ExperimentSpec experiment_from_json(const json& j, const std::filesystem::path& base_dir) {
    return wrap_errors("experiment", [&] {
        ExperimentSpec spec;
        ExperimentConfig& c = spec.config;
        c.task = j.value("task", std::string());
        c.seed = j.value("seed", std::uint64_t{1});
        std::filesystem::path maps_dir = base_dir / j.value("maps_dir", std::string("maps"));

        for (const auto& entry : j.at("scenarios")) {
            json sj;
            std::filesystem::path dir = base_dir;
            if (entry.is_string()) {
                std::filesystem::path p = base_dir / entry.get<std::string>();
                sj = load_json(p);
                dir = p.parent_path();
            } else {
                sj = entry;
            }
            if (!c.task.empty() && sj.value("task", std::string()) != c.task) {
                throw ConfigError("scenario " + sj.value("name", std::string("?")) + " does not belong to task " + c.task);
            }
            Scenario s = scenario_from_json(sj);
            spec.map_paths.push_back(sj.contains("map") ? dir / sj.at("map").get<std::string>() : maps_dir / (s.name + ".pgam"));
            c.scenarios.push_back(std::move(s));
        }

        if (j.contains("approach")) {
            const json& a = j.at("approach");
            int steps = a.at("steps").get<int>();
            if (steps < 1) throw ConfigError("approach.steps must be >= 1");
            auto lerp = [&](const char* from, const char* to, double dflt_from, double dflt_to, int k) {
                double t = steps == 1 ? 0.0 : static_cast<double>(k) / (steps - 1);
                return number(a, from, dflt_from) + t * (number(a, to, dflt_to) - number(a, from, dflt_from));
            };
            for (int k = 0; k < steps; ++k) {
                Viewpoint v;
                double scale = lerp("noise_scale_start", "noise_scale_end", 1, 1, k);
                v.noise_scale.fill(scale);
                v.occlusion = lerp("occlusion_start", "occlusion_end", 1, 1, k);
                v.texture_exposure = lerp("texture_exposure_start", "texture_exposure_end", 0, 0, k);
                c.schedule.viewpoints.push_back(v);
            }
        }
        for (const auto& vj : j.value("viewpoints", json::array())) {
            Viewpoint v;
            if (vj.contains("noise_scale")) v.noise_scale = six(vj.at("noise_scale"), "viewpoint.noise_scale");
            v.occlusion = number(vj, "occlusion", 1);
            v.texture_exposure = number(vj, "texture_exposure", 0);
            c.schedule.viewpoints.push_back(v);
        }
        c.schedule.max_views = j.value("max_views", 0);

        for (const auto& lj : j.at("occlusion_levels")) c.occlusion_levels.push_back({required(lj, "occlusion"), lj.value("trials", 1)});

        PolicyConfig base;
        const json pj = j.value("policy", json::object());
        base.vc_threshold = number(pj, "vc_threshold", base.vc_threshold);
        base.gu_alpha = number(pj, "gu_alpha", base.gu_alpha);
        base.ours_threshold = number(pj, "ours_threshold", base.ours_threshold);
        for (const auto& name : j.value("policies", json::array({"BE", "VC", "GU", "OURS"}))) {
            auto kind = parse_policy(name.get<std::string>());
            if (!kind) throw ConfigError("unknown policy '" + name.get<std::string>() + "'");
            PolicyConfig p = base;
            p.kind = *kind;
            c.policies.push_back(p);
        }

        c.options.particles = j.value("particles", std::size_t{500});
        c.options.p_thres = number(j, "p_thres", kDefaultPThres);
        c.options.renormalize = j.value("renormalize", false);
        const json vc = j.value("visual_confidence", json::object());
        c.options.visual_confidence.occlusion_gain = number(vc, "occlusion_gain", 1.0);
        c.options.visual_confidence.noise = number(vc, "noise", 0.05);

        c.validate();
        return spec;
    });
}

}  // namespace pgam
