#include "awareness/harness/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "awareness/error.hpp"
#include "awareness/model/canonical_json.hpp"

namespace awareness::harness {

namespace {

void reject_unknown(const nlohmann::json& j, const std::set<std::string>& known, const std::string& where)
{
    if (!j.is_object()) {
        throw InvalidConfig(where + " must be an object");
    }
    for (const auto& [key, value] : j.items()) {
        if (!known.contains(key)) {
            throw InvalidConfig("unknown key '" + key + "' in " + where);
        }
    }
}

std::string_view to_string(LiveSource s) { return s == LiveSource::tcp ? "tcp" : "in_process"; }

LiveSource live_source_from_string(const std::string& s)
{
    if (s == "in_process") {
        return LiveSource::in_process;
    }
    if (s == "tcp") {
        return LiveSource::tcp;
    }
    throw InvalidConfig("live.source must be in_process or tcp, got '" + s + "'");
}

gui::ViewConfig view_from_json(const nlohmann::json& j)
{
    reject_unknown(j, {"width", "height", "meters_per_pixel", "world_seed"}, "view");
    gui::ViewConfig v;
    v.width = j.value("width", v.width);
    v.height = j.value("height", v.height);
    v.meters_per_pixel = j.value("meters_per_pixel", v.meters_per_pixel);
    v.world_seed = j.value("world_seed", v.world_seed);
    v.hud_anchor = {v.width - 64 - 16, 16, 64, 64};
    return v;
}

}  // namespace

void validate(const HarnessConfig& cfg)
{
    model::validate(cfg.scenario);
    spec::validate(cfg.spec);
    detect::validate(cfg.detector);
    gui::validate(cfg.view);
    if (!(cfg.rates.render_fps > 0.0) || !(cfg.rates.validate_hz > 0.0)) {
        throw InvalidConfig("rates must be positive");
    }
    if (cfg.rates.validate_hz > cfg.rates.render_fps) {
        throw InvalidConfig("validate_hz must not exceed render_fps");
    }
    if (cfg.net.backend_port == cfg.net.gateway_port && cfg.net.backend_port != 0) {
        throw InvalidConfig("backend and gateway ports must differ");
    }
    if (!(cfg.render.duration_s > 0.0) || !(cfg.live.duration_s > 0.0)) {
        throw InvalidConfig("run durations must be positive");
    }
    if (!(cfg.live.time_scale > 0.0)) {
        throw InvalidConfig("live.time_scale must be positive");
    }
    if (cfg.live.connect_attempts < 1 || cfg.live.connect_backoff_ms < 0) {
        throw InvalidConfig("live connect retry settings out of range");
    }
    if (!(cfg.accuracy_floor >= 0.0 && cfg.accuracy_floor <= 1.0)) {
        throw InvalidConfig("accuracy_floor must lie in [0, 1]");
    }
    if (cfg.out_dir.empty()) {
        throw InvalidConfig("out_dir must not be empty");
    }
}

nlohmann::json to_json(const HarnessConfig& cfg)
{
    nlohmann::json j;
    j["scenario"] = model::to_json(cfg.scenario);
    j["spec"] = spec::to_json(cfg.spec);
    j["detector"] = detect::to_json(cfg.detector);
    j["filter"] = cfg.filter.paths();
    j["rates"] = {{"msg_rate_hz", cfg.scenario.msg_rate_hz},
                  {"render_fps", cfg.rates.render_fps},
                  {"validate_hz", cfg.rates.validate_hz}};
    j["fault"] = gui::to_json(cfg.fault);
    j["view"] = {{"width", cfg.view.width},
                 {"height", cfg.view.height},
                 {"meters_per_pixel", cfg.view.meters_per_pixel},
                 {"world_seed", cfg.view.world_seed}};
    j["net"] = {{"backend_host", cfg.net.backend_host},
                {"backend_port", cfg.net.backend_port},
                {"gateway_port", cfg.net.gateway_port}};
    j["render"] = {{"duration_s", cfg.render.duration_s}, {"t0_ms", cfg.render.t0_ms}};
    j["live"] = {{"duration_s", cfg.live.duration_s},
                 {"t0_ms", cfg.live.t0_ms},
                 {"time_scale", cfg.live.time_scale},
                 {"source", to_string(cfg.live.source)},
                 {"connect_attempts", cfg.live.connect_attempts},
                 {"connect_backoff_ms", cfg.live.connect_backoff_ms}};
    j["window_ms"] = cfg.window_ms ? nlohmann::json(*cfg.window_ms) : nlohmann::json(nullptr);
    j["accuracy_floor"] = cfg.accuracy_floor;
    j["out_dir"] = cfg.out_dir.string();
    return j;
}

HarnessConfig harness_config_from_json(const nlohmann::json& j)
{
    reject_unknown(j,
                   {"scenario", "spec", "detector", "filter", "rates", "fault", "view", "net", "render", "live",
                    "window_ms", "accuracy_floor", "out_dir"},
                   "harness config");
    HarnessConfig cfg;
    try {
        if (auto it = j.find("scenario"); it != j.end()) {
            cfg.scenario = model::scenario_from_json(*it);
        }
        if (auto it = j.find("spec"); it != j.end()) {
            cfg.spec = spec::spec_config_from_json(*it);
        }
        if (auto it = j.find("detector"); it != j.end()) {
            cfg.detector = detect::detector_config_from_json(*it);
        }
        if (auto it = j.find("filter"); it != j.end()) {
            cfg.filter = model::FilterSpec(it->get<std::vector<std::string>>());
        }
        if (auto it = j.find("rates"); it != j.end()) {
            reject_unknown(*it, {"msg_rate_hz", "render_fps", "validate_hz"}, "rates");
            if (auto m = it->find("msg_rate_hz"); m != it->end()) {
                const double rate = m->get<double>();
                const auto sc = j.find("scenario");
                if (sc != j.end() && sc->contains("msg_rate_hz") && (*sc)["msg_rate_hz"].get<double>() != rate) {
                    throw InvalidConfig("rates.msg_rate_hz disagrees with scenario.msg_rate_hz");
                }
                cfg.scenario.msg_rate_hz = rate;
            }
            cfg.rates.render_fps = it->value("render_fps", cfg.rates.render_fps);
            cfg.rates.validate_hz = it->value("validate_hz", cfg.rates.validate_hz);
        }
        if (auto it = j.find("fault"); it != j.end()) {
            cfg.fault = gui::fault_config_from_json(*it);
        }
        if (auto it = j.find("view"); it != j.end()) {
            cfg.view = view_from_json(*it);
        }
        if (auto it = j.find("net"); it != j.end()) {
            reject_unknown(*it, {"backend_host", "backend_port", "gateway_port"}, "net");
            cfg.net.backend_host = it->value("backend_host", cfg.net.backend_host);
            cfg.net.backend_port = it->value("backend_port", cfg.net.backend_port);
            cfg.net.gateway_port = it->value("gateway_port", cfg.net.gateway_port);
        }
        if (auto it = j.find("render"); it != j.end()) {
            reject_unknown(*it, {"duration_s", "t0_ms"}, "render");
            cfg.render.duration_s = it->value("duration_s", cfg.render.duration_s);
            cfg.render.t0_ms = it->value("t0_ms", cfg.render.t0_ms);
        }
        if (auto it = j.find("live"); it != j.end()) {
            reject_unknown(*it, {"duration_s", "t0_ms", "time_scale", "source", "connect_attempts", "connect_backoff_ms"},
                           "live");
            cfg.live.duration_s = it->value("duration_s", cfg.live.duration_s);
            cfg.live.t0_ms = it->value("t0_ms", cfg.live.t0_ms);
            cfg.live.time_scale = it->value("time_scale", cfg.live.time_scale);
            if (auto s = it->find("source"); s != it->end()) {
                cfg.live.source = live_source_from_string(s->get<std::string>());
            }
            cfg.live.connect_attempts = it->value("connect_attempts", cfg.live.connect_attempts);
            cfg.live.connect_backoff_ms = it->value("connect_backoff_ms", cfg.live.connect_backoff_ms);
        }
        if (auto it = j.find("window_ms"); it != j.end() && !it->is_null()) {
            cfg.window_ms = it->get<std::uint64_t>();
        }
        cfg.accuracy_floor = j.value("accuracy_floor", cfg.accuracy_floor);
        if (auto it = j.find("out_dir"); it != j.end()) {
            cfg.out_dir = it->get<std::string>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw InvalidConfig(e.what());
    }
    validate(cfg);
    return cfg;
}

HarnessConfig load_harness_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot read config " + path.string());
    }
    std::ostringstream text;
    text << in.rdbuf();
    try {
        return harness_config_from_json(model::parse_json(text.str()));
    } catch (const DecodeError& e) {
        throw InvalidConfig(path.string() + ": " + e.what());
    }
}

void override_seed(HarnessConfig& cfg, std::uint64_t seed)
{
    cfg.scenario.seed = seed;
    cfg.spec.seed = seed;
}

std::filesystem::path spec_dir(const HarnessConfig& cfg) { return cfg.out_dir / "spec"; }
std::filesystem::path model_dir(const HarnessConfig& cfg) { return cfg.out_dir / "model"; }
std::filesystem::path metrics_path(const HarnessConfig& cfg) { return cfg.out_dir / "metrics.json"; }
std::filesystem::path run_dir(const HarnessConfig& cfg) { return cfg.out_dir / "run"; }
std::filesystem::path live_dir(const HarnessConfig& cfg) { return cfg.out_dir / "live"; }
std::filesystem::path backend_dir(const HarnessConfig& cfg) { return cfg.out_dir / "backend"; }

}  // namespace awareness::harness
