#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>

#include <nlohmann/json.hpp>

#include "awareness/model/canonical_json.hpp"
#include "awareness/rng.hpp"
#include "awareness/validate/validator.hpp"

namespace awareness::validate {

/// Real and perceived filtered views of one suite sample.
struct ViewPair {
    model::CanonicalJson real;
    model::CanonicalJson perceived;
};

/// Guesses which position holds the real view. May draw from `rng`.
using Distinguisher =
    std::function<int(const model::CanonicalJson& f0, const model::CanonicalJson& f1, Rng& rng)>;

int v_random(const model::CanonicalJson& f0, const model::CanonicalJson& f1, Rng& rng);
/// Uniform on equal strings; otherwise the lexicographically greater string is called real.
int v_equality(const model::CanonicalJson& f0, const model::CanonicalJson& f1, Rng& rng);

/// Value frequencies among real and among perceived views.
struct CalibrationTable {
    std::map<std::string, std::uint64_t> real;
    std::map<std::string, std::uint64_t> perceived;

    static CalibrationTable from_trace(std::span<const ViewPair> trace);
    bool empty() const { return real.empty() && perceived.empty(); }
};

/// Calls real the position whose value has the higher real/perceived
/// frequency ratio; uniform on ties. Throws MissingCalibration on an empty table.
int v_likelihood(const model::CanonicalJson& f0, const model::CanonicalJson& f1, const CalibrationTable& table,
                 Rng& rng);
Distinguisher make_v_likelihood(CalibrationTable table);

struct AdvantageReport {
    std::uint64_t n_trials = 0;
    std::uint64_t correct = 0;
    double p_hat = 0.0;
    double advantage = 0.0;  ///< |p_hat - 1/2|
    Interval ci95;           ///< Wilson interval for p_hat
};

/// Each trial t draws from Rng(derive_seed(seed, t)): a trace index, then the
/// hidden bit i; f_i is the real view and f_{1-i} the perceived one.
AdvantageReport distinguisher_game(std::span<const ViewPair> trace, const Distinguisher& v, std::uint64_t n_trials,
                                   std::uint64_t seed);

nlohmann::json to_json(const AdvantageReport& r);

}  // namespace awareness::validate
