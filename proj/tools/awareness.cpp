// awareness: command-line driver for the GUI awareness testbed.

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "awareness/error.hpp"
#include "awareness/harness/backend.hpp"
#include "awareness/harness/config.hpp"
#include "awareness/harness/gateway.hpp"
#include "awareness/harness/live.hpp"
#include "awareness/harness/pipeline.hpp"
#include "awareness/model/canonical_json.hpp"

namespace {

using namespace awareness;
namespace fs = std::filesystem;

std::atomic<bool> g_interrupted{false};

extern "C" void on_signal(int) { g_interrupted = true; }

/// Calls `stop` once SIGINT/SIGTERM arrives or `done` turns true.
class InterruptWatch {
public:
    template <class Stop, class Done>
    InterruptWatch(Stop stop, Done done)
        : thread_([this, stop, done] {
              while (!quit_ && !done()) {
                  if (g_interrupted) {
                      stop();
                      return;
                  }
                  std::this_thread::sleep_for(std::chrono::milliseconds(100));
              }
          })
    {
        std::signal(SIGINT, on_signal);
        std::signal(SIGTERM, on_signal);
    }
    ~InterruptWatch()
    {
        quit_ = true;
        thread_.join();
    }

private:
    std::atomic<bool> quit_{false};
    std::thread thread_;
};

void print_json(const nlohmann::json& j) { std::cout << j.dump(2) << '\n'; }

enum ExitCode { kOk = 0, kCheckFailed = 1, kUsage = 2, kRuntime = 3 };

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Awareness testbed: spec generation, detector training, rendering, validation and live checks"};
    app.require_subcommand(1);

    std::optional<std::string> config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    app.add_option("--config", config_path, "Harness config JSON")->check(CLI::ExistingFile);
    app.add_option("--seed", seed, "Override the scenario and spec dataset seeds");
    app.add_option("--out", out_dir, "Output directory for every artifact");

    auto* specgen = app.add_subcommand("specgen", "Generate the labeled spec dataset and its train/test split");
    auto* train = app.add_subcommand("train", "Extract detector templates from the train split");
    auto* evaldet = app.add_subcommand("evaldet", "Evaluate the detector on the held-out split");

    auto* serve = app.add_subcommand("serve", "Stream scenario messages as NDJSON over TCP");
    double serve_scale = 1.0;
    serve->add_option("--time-scale", serve_scale, "Simulated ms per wall ms")->check(CLI::PositiveNumber);

    auto* render = app.add_subcommand("render", "Render a run: frames, frame log and message log");
    std::optional<std::string> render_messages;
    std::optional<double> render_duration;
    std::optional<std::uint64_t> render_t0;
    render->add_option("--messages", render_messages, "Replay this message log instead of the scenario")
        ->check(CLI::ExistingFile);
    render->add_option("--duration", render_duration, "Simulated seconds")->check(CLI::PositiveNumber);
    render->add_option("--t0", render_t0, "Simulated ms of the first tick");

    auto* validate_cmd = app.add_subcommand("validate", "Validate a logged run offline; exit 0 iff no verdict fails");
    std::optional<std::string> validate_run;
    std::optional<std::string> validate_messages;
    std::optional<std::uint64_t> window_ms;
    validate_cmd->add_option("--run", validate_run, "Run directory (default OUT/run)");
    validate_cmd->add_option("--messages", validate_messages, "Message log (default RUN/messages.ndjson)");
    validate_cmd->add_option("--window-ms", window_ms, "Pairing tolerance window");

    auto* live = app.add_subcommand("live", "Run the live loop with the HTTP/WS gateway");
    std::optional<double> live_duration;
    std::optional<double> live_scale;
    std::optional<std::string> live_source;
    bool no_gateway = false;
    live->add_option("--duration", live_duration, "Simulated seconds")->check(CLI::PositiveNumber);
    live->add_option("--time-scale", live_scale, "Simulated ms per wall ms")->check(CLI::PositiveNumber);
    live->add_option("--source", live_source, "in_process or tcp")->check(CLI::IsMember({"in_process", "tcp"}));
    live->add_flag("--no-gateway", no_gateway, "Do not serve /status, /fault and /live");

    auto* distinguish = app.add_subcommand("distinguish", "Play the distinguisher game on a verdict log");
    std::optional<std::string> verdicts_path;
    std::optional<std::string> calibration_path;
    std::uint64_t trials = 1000;
    std::uint64_t game_seed = 0;
    distinguish->add_option("--verdicts", verdicts_path, "Verdict log (default OUT/run/verdicts.ndjson)");
    distinguish->add_option("--calibration", calibration_path, "Verdict log to calibrate v_likelihood on");
    distinguish->add_option("--trials", trials, "Number of trials")->check(CLI::PositiveNumber);
    distinguish->add_option("--game-seed", game_seed, "Seed of the trial draws");

    CLI11_PARSE(app, argc, argv);

    try {
        harness::HarnessConfig cfg = config_path ? harness::load_harness_config(*config_path) : harness::HarnessConfig{};
        if (seed) {
            harness::override_seed(cfg, *seed);
        }
        if (out_dir) {
            cfg.out_dir = *out_dir;
        }
        if (render_duration) {
            cfg.render.duration_s = *render_duration;
        }
        if (render_t0) {
            cfg.render.t0_ms = *render_t0;
        }
        if (window_ms) {
            cfg.window_ms = *window_ms;
        }
        if (live_duration) {
            cfg.live.duration_s = *live_duration;
        }
        if (live_scale) {
            cfg.live.time_scale = *live_scale;
        }
        if (live_source) {
            cfg.live.source = *live_source == "tcp" ? harness::LiveSource::tcp : harness::LiveSource::in_process;
        }
        harness::validate(cfg);
        fs::create_directories(cfg.out_dir);

        if (specgen->parsed()) {
            const auto r = harness::cmd_specgen(cfg);
            std::printf("spec dataset: %zu images (%zu train, %zu test) in %s\n", r.dataset.images.size(),
                        r.train.size(), r.test.size(), harness::spec_dir(cfg).c_str());
            return kOk;
        }
        if (train->parsed()) {
            const auto ts = harness::cmd_train(cfg);
            std::printf("trained %zu templates into %s\n", ts.templates.size(), harness::model_dir(cfg).c_str());
            return kOk;
        }
        if (evaldet->parsed()) {
            const auto r = harness::cmd_evaldet(cfg);
            print_json(detect::to_json(r.metrics));
            if (!r.pass) {
                std::fprintf(stderr, "holdout mode accuracy below floor %.3f\n", cfg.accuracy_floor);
                return kCheckFailed;
            }
            return kOk;
        }
        if (serve->parsed()) {
            const auto log = harness::backend_dir(cfg) / harness::kMessagesFile;
            harness::BackendServer server(model::gen_scenario(cfg.scenario), log, cfg.net.backend_host,
                                          cfg.net.backend_port, serve_scale);
            std::printf("backend on %s:%u, logging to %s\n", cfg.net.backend_host.c_str(), server.port(), log.c_str());
            std::fflush(stdout);
            server.start();
            {
                InterruptWatch watch([&] { server.stop(); }, [&] { return server.finished(); });
                server.wait();
            }
            std::printf("emitted %llu messages\n", static_cast<unsigned long long>(server.emitted()));
            return kOk;
        }
        if (render->parsed()) {
            std::optional<fs::path> messages;
            if (render_messages) {
                messages = *render_messages;
            }
            const auto r = harness::cmd_render(cfg, messages);
            std::printf("rendered %zu frames from %zu messages into %s\n", r.frames.size(), r.messages.size(),
                        harness::run_dir(cfg).c_str());
            return kOk;
        }
        if (validate_cmd->parsed()) {
            const fs::path run = validate_run ? fs::path(*validate_run) : harness::run_dir(cfg);
            const fs::path messages = validate_messages ? fs::path(*validate_messages) : run / harness::kMessagesFile;
            const auto r = harness::cmd_validate_offline(cfg, run, messages);
            std::fputs(harness::describe(r.report).c_str(), stdout);
            return r.exit_code;
        }
        if (live->parsed()) {
            auto det = std::make_shared<const detect::Detector>(harness::load_detector(cfg));
            harness::LiveSession session(cfg, det);
            std::unique_ptr<harness::Gateway> gateway;
            if (!no_gateway) {
                gateway = std::make_unique<harness::Gateway>(session, cfg.net.backend_host, cfg.net.gateway_port);
                gateway->start();
                std::printf("gateway on http://%s:%u (GET /status, POST /fault, WS /live)\n",
                            cfg.net.backend_host.c_str(), gateway->port());
                std::fflush(stdout);
            }
            session.start();
            {
                InterruptWatch watch([&] { session.stop(); }, [&] { return session.finished(); });
                session.wait();
            }
            if (gateway) {
                gateway->stop();
            }
            const auto status = session.status();
            print_json(session.status_json());
            return status->failures == 0 ? kOk : kCheckFailed;
        }
        if (distinguish->parsed()) {
            const fs::path vpath =
                verdicts_path ? fs::path(*verdicts_path) : harness::run_dir(cfg) / harness::kVerdictsFile;
            const auto trace = harness::trace_from_verdicts(validate::read_verdicts(vpath));
            std::optional<std::vector<validate::ViewPair>> calibration;
            if (calibration_path) {
                calibration = harness::trace_from_verdicts(validate::read_verdicts(*calibration_path));
            }
            const auto reports = harness::cmd_distinguish(trace, calibration, trials, game_seed);
            const auto j = harness::advantage_json(reports);
            const std::string text = model::canonicalize(j).text + "\n";
            const auto out = cfg.out_dir / "advantage.json";
            if (std::FILE* f = std::fopen(out.c_str(), "wb")) {
                std::fwrite(text.data(), 1, text.size(), f);
                std::fclose(f);
            } else {
                throw IoError("cannot write " + out.string());
            }
            print_json(j);
            return kOk;
        }
    } catch (const InvalidConfig& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return kUsage;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return kRuntime;
    }
    return kUsage;
}
