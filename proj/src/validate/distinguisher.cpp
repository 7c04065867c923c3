#include "awareness/validate/distinguisher.hpp"

#include <cmath>
#include <vector>

#include "awareness/error.hpp"

namespace awareness::validate {

int v_random(const model::CanonicalJson&, const model::CanonicalJson&, Rng& rng)
{
    return rng.bit();
}

int v_equality(const model::CanonicalJson& f0, const model::CanonicalJson& f1, Rng& rng)
{
    if (f0 == f1) {
        return rng.bit();
    }
    return f0.text > f1.text ? 0 : 1;
}

CalibrationTable CalibrationTable::from_trace(std::span<const ViewPair> trace)
{
    CalibrationTable t;
    for (const auto& p : trace) {
        ++t.real[p.real.text];
        ++t.perceived[p.perceived.text];
    }
    return t;
}

namespace {

std::uint64_t count(const std::map<std::string, std::uint64_t>& m, const std::string& k)
{
    const auto it = m.find(k);
    return it == m.end() ? 0 : it->second;
}

}  // namespace

int v_likelihood(const model::CanonicalJson& f0, const model::CanonicalJson& f1, const CalibrationTable& table,
                 Rng& rng)
{
    if (table.empty()) {
        throw MissingCalibration("v_likelihood needs a calibration table");
    }
    // real(a)/perceived(a) vs real(b)/perceived(b), cross-multiplied so zero
    // perceived counts act as infinite ratios.
    const auto lhs = static_cast<long double>(count(table.real, f0.text)) * count(table.perceived, f1.text);
    const auto rhs = static_cast<long double>(count(table.real, f1.text)) * count(table.perceived, f0.text);
    if (lhs > rhs) {
        return 0;
    }
    if (rhs > lhs) {
        return 1;
    }
    return rng.bit();
}

Distinguisher make_v_likelihood(CalibrationTable table)
{
    if (table.empty()) {
        throw MissingCalibration("v_likelihood needs a calibration table");
    }
    return [t = std::move(table)](const model::CanonicalJson& f0, const model::CanonicalJson& f1, Rng& rng) {
        return v_likelihood(f0, f1, t, rng);
    };
}

AdvantageReport distinguisher_game(std::span<const ViewPair> trace, const Distinguisher& v, std::uint64_t n_trials,
                                   std::uint64_t seed)
{
    if (n_trials == 0) {
        throw InvalidConfig("distinguisher game needs at least one trial");
    }
    if (trace.empty()) {
        throw EmptyInput("distinguisher game needs a non-empty trace");
    }
    std::vector<char> correct(n_trials, 0);
    const auto n = static_cast<long long>(n_trials);
#pragma omp parallel for schedule(static)
    for (long long t = 0; t < n; ++t) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
        const auto& pair = trace[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(trace.size()) - 1))];
        const int hidden = rng.bit();
        const auto& f0 = hidden == 0 ? pair.real : pair.perceived;
        const auto& f1 = hidden == 0 ? pair.perceived : pair.real;
        correct[static_cast<std::size_t>(t)] = v(f0, f1, rng) == hidden;
    }
    AdvantageReport r;
    r.n_trials = n_trials;
    for (char c : correct) {
        r.correct += c ? 1 : 0;
    }
    r.p_hat = static_cast<double>(r.correct) / static_cast<double>(n_trials);
    r.advantage = std::abs(r.p_hat - 0.5);
    r.ci95 = wilson_interval(r.correct, n_trials);
    return r;
}

nlohmann::json to_json(const AdvantageReport& r)
{
    return {{"n_trials", r.n_trials},
            {"correct", r.correct},
            {"p_hat", r.p_hat},
            {"advantage", r.advantage},
            {"ci95", {r.ci95.lo, r.ci95.hi}}};
}

}  // namespace awareness::validate
