#include "awareness/validate/validator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "awareness/error.hpp"
#include "awareness/raster/png_io.hpp"

namespace awareness::validate {

Pairing pair_logs(std::span<const gui::FrameLogEntry> frames, std::span<const model::ModelMessage> messages,
                  std::optional<std::uint64_t> window_ms)
{
    for (std::size_t i = 1; i < frames.size(); ++i) {
        if (frames[i].ts_ms < frames[i - 1].ts_ms) {
            throw UnsortedLog("frame log not sorted by ts_ms at seq " + std::to_string(frames[i].seq));
        }
    }
    for (std::size_t i = 1; i < messages.size(); ++i) {
        if (messages[i].ts_ms < messages[i - 1].ts_ms) {
            throw UnsortedLog("message log not sorted by ts_ms at seq " + std::to_string(messages[i].seq));
        }
    }
    Pairing out;
    std::size_t upto = 0;  // messages[0, upto) have ts <= current frame ts
    std::size_t from = 0;  // first message inside the window
    for (const auto& f : frames) {
        while (upto < messages.size() && messages[upto].ts_ms <= f.ts_ms) {
            ++upto;
        }
        if (upto == 0) {
            ++out.skipped;
            continue;
        }
        PairedSample s{f, messages[upto - 1], f.ts_ms - messages[upto - 1].ts_ms, {}};
        if (window_ms) {
            const std::uint64_t lo = f.ts_ms >= *window_ms ? f.ts_ms - *window_ms : 0;
            while (from < upto && messages[from].ts_ms < lo) {
                ++from;
            }
            s.alternates.assign(messages.begin() + static_cast<std::ptrdiff_t>(from),
                                messages.begin() + static_cast<std::ptrdiff_t>(upto));
        }
        out.samples.push_back(std::move(s));
    }
    return out;
}

nlohmann::json to_json(const VerdictRecord& v)
{
    return {{"frame_seq", v.frame_seq},       {"ts_ms", v.ts_ms}, {"perceived", v.perceived.text},
            {"actual", v.actual.text},        {"pass", v.pass},   {"lag_ms", v.lag_ms}};
}

VerdictRecord verdict_from_json(const nlohmann::json& j)
{
    try {
        return {j.at("frame_seq").get<std::uint64_t>(),
                j.at("ts_ms").get<std::uint64_t>(),
                {j.at("perceived").get<std::string>()},
                {j.at("actual").get<std::string>()},
                j.at("pass").get<bool>(),
                j.at("lag_ms").get<std::uint64_t>()};
    } catch (const nlohmann::json::exception& e) {
        throw InvalidConfig(std::string("malformed verdict record: ") + e.what());
    }
}

void write_verdicts(const std::filesystem::path& path, std::span<const VerdictRecord> verdicts)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open " + path.string());
    }
    for (const auto& v : verdicts) {
        out << model::canonicalize(to_json(v)).text << '\n';
    }
    if (!out) {
        throw IoError("write failed: " + path.string());
    }
}

std::vector<VerdictRecord> read_verdicts(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw MissingArtifact("verdict log " + path.string());
    }
    std::vector<VerdictRecord> out;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) {
            out.push_back(verdict_from_json(model::parse_json(line)));
        }
    }
    return out;
}

VerdictRecord judge(const PairedSample& s, const model::FilterSpec& f, const nlohmann::json& perceived_tree)
{
    VerdictRecord v{s.frame.seq, s.frame.ts_ms, model::apply_filter(f, perceived_tree),
                    model::apply_filter(f, model::to_json(s.message)), false, s.lag_ms};
    v.pass = v.perceived == v.actual;
    for (std::size_t i = 0; !v.pass && i < s.alternates.size(); ++i) {
        v.pass = v.perceived == model::apply_filter(f, model::to_json(s.alternates[i]));
    }
    return v;
}

VerdictRecord validate_pair(const PairedSample& s, const model::FilterSpec& f, const std::filesystem::path& run_dir,
                            const detect::Detector& det, const interp::AffordanceMapping& mapping)
{
    const auto frame = raster::read_png(run_dir / s.frame.path);
    return judge(s, f, interp::interpret(frame, det, mapping).tree);
}

OfflineResult validate_run(const std::filesystem::path& run_dir, std::span<const model::ModelMessage> messages,
                           const model::FilterSpec& f, const detect::Detector& det,
                           const interp::AffordanceMapping& mapping, std::optional<std::uint64_t> window_ms)
{
    const auto frames = gui::read_frame_log(run_dir);
    if (frames.empty()) {
        throw EmptyInput("no frames in " + run_dir.string());
    }
    const auto pairing = pair_logs(frames, messages, window_ms);

    // unique[i]: index into `distinct` of the bytes frame i shows.
    std::vector<std::vector<std::uint8_t>> distinct;
    std::vector<std::size_t> unique(pairing.samples.size());
    for (std::size_t i = 0; i < pairing.samples.size(); ++i) {
        auto bytes = raster::read_file(run_dir / pairing.samples[i].frame.path);
        if (distinct.empty() || bytes != distinct.back()) {
            distinct.push_back(std::move(bytes));
        }
        unique[i] = distinct.size() - 1;
    }
    std::vector<nlohmann::json> perceived(distinct.size());
    std::vector<std::string> errors(distinct.size());
    const int n = static_cast<int>(distinct.size());
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < n; ++i) {
        try {
            perceived[static_cast<std::size_t>(i)] =
                interp::interpret(raster::decode_png(distinct[static_cast<std::size_t>(i)]), det, mapping).tree;
        } catch (const std::exception& e) {
            errors[static_cast<std::size_t>(i)] = e.what();
        }
    }
    for (const auto& e : errors) {
        if (!e.empty()) {
            throw DecodeError(e);
        }
    }
    OfflineResult out{{}, pairing.skipped, distinct.size()};
    for (std::size_t i = 0; i < pairing.samples.size(); ++i) {
        out.verdicts.push_back(judge(pairing.samples[i], f, perceived[unique[i]]));
    }
    return out;
}

Interval wilson_interval(std::uint64_t k, std::uint64_t n, double z)
{
    if (n == 0) {
        throw EmptyInput("Wilson interval of zero trials");
    }
    const double nn = static_cast<double>(n);
    const double p = static_cast<double>(k) / nn;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nn;
    const double center = (p + z2 / (2.0 * nn)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
    return {std::max(0.0, std::min(p, center - half)), std::min(1.0, std::max(p, center + half))};
}

AwarenessReport estimate_awareness(std::span<const VerdictRecord> verdicts)
{
    if (verdicts.empty()) {
        throw EmptyInput("no verdicts to estimate from");
    }
    AwarenessReport r;
    r.n = verdicts.size();
    for (std::size_t i = 0; i < verdicts.size(); ++i) {
        const auto& v = verdicts[i];
        if (v.pass) {
            continue;
        }
        ++r.failures;
        if (i > 0 && !verdicts[i - 1].pass) {
            auto& e = r.fault_episodes.back();
            e.end_ts_ms = v.ts_ms;
            e.end_frame_seq = v.frame_seq;
            ++e.frames;
        } else {
            r.fault_episodes.push_back({v.ts_ms, v.ts_ms, v.frame_seq, v.frame_seq, 1});
        }
    }
    r.epsilon_hat = static_cast<double>(r.failures) / static_cast<double>(r.n);
    r.ci95 = wilson_interval(r.failures, r.n);
    return r;
}

nlohmann::json to_json(const AwarenessReport& r)
{
    nlohmann::json episodes = nlohmann::json::array();
    for (const auto& e : r.fault_episodes) {
        episodes.push_back({{"start_ts_ms", e.start_ts_ms},
                            {"end_ts_ms", e.end_ts_ms},
                            {"start_frame_seq", e.start_frame_seq},
                            {"end_frame_seq", e.end_frame_seq},
                            {"frames", e.frames}});
    }
    return {{"n", r.n},
            {"failures", r.failures},
            {"epsilon_hat", r.epsilon_hat},
            {"ci95", {r.ci95.lo, r.ci95.hi}},
            {"fault_episodes", std::move(episodes)}};
}

}  // namespace awareness::validate
