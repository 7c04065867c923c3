#include "awareness/harness/pipeline.hpp"

#include <cmath>
#include <cstdio>
#include <set>

#include "awareness/error.hpp"
#include "awareness/model/canonical_json.hpp"
#include "awareness/raster/png_io.hpp"

namespace awareness::harness {

namespace fs = std::filesystem;

namespace {

void write_json_file(const fs::path& path, const nlohmann::json& j)
{
    const std::string text = model::canonicalize(j).text + "\n";
    raster::write_file(path, {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

nlohmann::json read_json_file(const fs::path& path)
{
    if (!fs::exists(path)) {
        throw MissingArtifact(path.string() + " not found");
    }
    const auto bytes = raster::read_file(path);
    return model::parse_json({reinterpret_cast<const char*>(bytes.data()), bytes.size()});
}

std::vector<std::string> paths_of(const std::vector<spec::LabeledImage>& images)
{
    std::vector<std::string> out;
    out.reserve(images.size());
    for (const auto& img : images) {
        out.push_back(img.path);
    }
    return out;
}

}  // namespace

SpecgenResult cmd_specgen(const HarnessConfig& cfg)
{
    SpecgenResult r;
    r.dataset = spec::generate_spec_dataset(cfg.spec, spec_dir(cfg));
    std::tie(r.train, r.test) = spec::split_dataset(r.dataset.images, kTrainFraction, cfg.spec.seed);
    write_json_file(spec_dir(cfg) / kSplitFile, {{"seed", cfg.spec.seed},
                                                 {"train_fraction", kTrainFraction},
                                                 {"train", paths_of(r.train)},
                                                 {"test", paths_of(r.test)}});
    return r;
}

SpecgenResult load_split(const HarnessConfig& cfg)
{
    SpecgenResult r;
    r.dataset = spec::read_labels(spec_dir(cfg) / spec::kLabelsFile);
    const auto split = read_json_file(spec_dir(cfg) / kSplitFile);
    std::set<std::string> train;
    std::set<std::string> test;
    try {
        for (const auto& p : split.at("train")) {
            train.insert(p.get<std::string>());
        }
        for (const auto& p : split.at("test")) {
            test.insert(p.get<std::string>());
        }
    } catch (const nlohmann::json::exception& e) {
        throw DecodeError(std::string("split.json: ") + e.what());
    }
    for (const auto& img : r.dataset.images) {
        if (train.contains(img.path)) {
            r.train.push_back(img);
        } else if (test.contains(img.path)) {
            r.test.push_back(img);
        }
    }
    if (r.train.size() != train.size() || r.test.size() != test.size()) {
        throw DecodeError("split.json names images missing from labels");
    }
    return r;
}

detect::TemplateSet cmd_train(const HarnessConfig& cfg)
{
    const SpecgenResult split = load_split(cfg);
    detect::TemplateSet ts = detect::train_templates(split.train, split.dataset.dir, cfg.detector);
    detect::save_template_set(ts, model_dir(cfg));
    return ts;
}

detect::Detector load_detector(const HarnessConfig& cfg)
{
    return detect::Detector(detect::load_template_set(model_dir(cfg)));
}

EvalResult cmd_evaldet(const HarnessConfig& cfg)
{
    const detect::Detector det = load_detector(cfg);
    const SpecgenResult split = load_split(cfg);
    EvalResult r;
    r.metrics = detect::evaluate(det, split.test, split.dataset.dir, interp::AffordanceMapping::for_detector(det.config()));
    r.pass = r.metrics.mode_accuracy.has_value() && *r.metrics.mode_accuracy >= cfg.accuracy_floor;
    write_json_file(metrics_path(cfg),
                    {{"holdout", detect::to_json(r.metrics)}, {"accuracy_floor", cfg.accuracy_floor}, {"pass", r.pass}});
    return r;
}

RenderResult cmd_render(const HarnessConfig& cfg, const std::optional<fs::path>& messages_path)
{
    std::vector<model::ModelMessage> source =
        messages_path ? model::read_message_log(*messages_path) : model::gen_scenario(cfg.scenario);
    const auto end_ms = cfg.render.t0_ms + static_cast<std::uint64_t>(std::llround(cfg.render.duration_s * 1000.0));
    RenderResult r;
    for (auto& m : source) {
        if (m.ts_ms < end_ms) {
            r.messages.push_back(std::move(m));
        }
    }
    const fs::path dir = run_dir(cfg);
    fs::remove_all(dir);
    fs::create_directories(dir);
    model::write_message_log(dir / kMessagesFile, r.messages);
    gui::DirectorySink sink(dir);
    r.frames = gui::run_render_loop(r.messages,
                                    {.fps = cfg.rates.render_fps, .duration_s = cfg.render.duration_s, .t0_ms = cfg.render.t0_ms},
                                    cfg.fault, cfg.view, sink);
    return r;
}

ValidateResult cmd_validate_offline(const HarnessConfig& cfg, const fs::path& run, const fs::path& messages_path)
{
    const detect::Detector det = load_detector(cfg);
    const auto messages = model::read_message_log(messages_path);
    ValidateResult r;
    r.offline = validate::validate_run(run, messages, cfg.filter, det,
                                       interp::AffordanceMapping::for_detector(det.config()), cfg.window_ms);
    validate::write_verdicts(run / kVerdictsFile, r.offline.verdicts);
    r.report = validate::estimate_awareness(r.offline.verdicts);
    write_json_file(run / kReportFile, validate::to_json(r.report));
    r.exit_code = r.report.failures == 0 ? 0 : 1;
    return r;
}

std::vector<validate::ViewPair> trace_from_verdicts(const std::vector<validate::VerdictRecord>& verdicts)
{
    std::vector<validate::ViewPair> trace;
    trace.reserve(verdicts.size());
    for (const auto& v : verdicts) {
        trace.push_back({v.actual, v.perceived});
    }
    return trace;
}

std::vector<std::pair<std::string, validate::AdvantageReport>> cmd_distinguish(
    const std::vector<validate::ViewPair>& trace, const std::optional<std::vector<validate::ViewPair>>& calibration,
    std::uint64_t n_trials, std::uint64_t seed)
{
    const auto table = validate::CalibrationTable::from_trace(calibration ? *calibration : trace);
    std::vector<std::pair<std::string, validate::AdvantageReport>> out;
    out.emplace_back("v_random", validate::distinguisher_game(trace, validate::v_random, n_trials, seed));
    out.emplace_back("v_equality", validate::distinguisher_game(trace, validate::v_equality, n_trials, seed));
    out.emplace_back("v_likelihood",
                     validate::distinguisher_game(trace, validate::make_v_likelihood(table), n_trials, seed));
    return out;
}

nlohmann::json advantage_json(const std::vector<std::pair<std::string, validate::AdvantageReport>>& reports)
{
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [name, r] : reports) {
        j[name] = validate::to_json(r);
    }
    return j;
}

std::string describe(const validate::AwarenessReport& r)
{
    char line[256];
    std::snprintf(line, sizeof line, "frames %llu  failures %llu  epsilon_hat %.6f  ci95 [%.6f, %.6f]\n",
                  static_cast<unsigned long long>(r.n), static_cast<unsigned long long>(r.failures), r.epsilon_hat,
                  r.ci95.lo, r.ci95.hi);
    std::string out = line;
    for (const auto& e : r.fault_episodes) {
        std::snprintf(line, sizeof line, "fault episode: ts %llu..%llu ms  frames %llu..%llu (%llu failing)\n",
                      static_cast<unsigned long long>(e.start_ts_ms), static_cast<unsigned long long>(e.end_ts_ms),
                      static_cast<unsigned long long>(e.start_frame_seq),
                      static_cast<unsigned long long>(e.end_frame_seq), static_cast<unsigned long long>(e.frames));
        out += line;
    }
    return out;
}

}  // namespace awareness::harness
