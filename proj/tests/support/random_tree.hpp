#pragma once

// Seeded random JSON trees for property tests.

#include <cmath>
#include <cstring>
#include <string>

#include <nlohmann/json.hpp>

#include "awareness/rng.hpp"

namespace testsupport {

inline std::string random_key(awareness::Rng& rng)
{
    static const char* kAlphabet = "abcdeXYZ_.-0\xc3\xa9";
    const int len = static_cast<int>(rng.uniform_int(1, 6));
    std::string s;
    for (int i = 0; i < len; ++i) {
        const auto c = rng.uniform_int(0, 12);
        if (c == 12) {
            s += "\xc3\xa9";  // UTF-8 e-acute
        } else {
            s += kAlphabet[c];
        }
    }
    return s;
}

inline double random_finite_double(awareness::Rng& rng)
{
    switch (rng.uniform_int(0, 3)) {
    case 0:
        return rng.uniform(-1000.0, 1000.0);
    case 1:
        return static_cast<double>(rng.uniform_int(-100000, 100000));
    case 2:
        return rng.uniform(-1.0, 1.0) * std::pow(10.0, static_cast<double>(rng.uniform_int(-30, 30)));
    default: {
        double d;
        do {
            const auto bits = rng.next();
            std::memcpy(&d, &bits, sizeof d);
        } while (!std::isfinite(d));
        return d;
    }
    }
}

inline nlohmann::json random_tree(awareness::Rng& rng, int depth = 0)
{
    const auto kind = rng.uniform_int(0, depth >= 4 ? 5 : 7);
    switch (kind) {
    case 0:
        return nullptr;
    case 1:
        return rng.bit() == 1;
    case 2:
        return rng.uniform_int(-1'000'000'000'000LL, 1'000'000'000'000LL);
    case 3:
    case 4:
        return random_finite_double(rng);
    case 5:
        return random_key(rng);
    case 6: {
        auto arr = nlohmann::json::array();
        const auto n = rng.uniform_int(0, 4);
        for (int i = 0; i < n; ++i) {
            arr.push_back(random_tree(rng, depth + 1));
        }
        return arr;
    }
    default: {
        auto obj = nlohmann::json::object();
        const auto n = rng.uniform_int(0, 5);
        for (int i = 0; i < n; ++i) {
            obj[random_key(rng)] = random_tree(rng, depth + 1);
        }
        return obj;
    }
    }
}

/// Object-rooted tree whose keys come from a small alphabet so filter paths hit.
inline nlohmann::json random_object_tree(awareness::Rng& rng, int depth = 0)
{
    static const char* kKeys[] = {"a", "b", "c", "d"};
    auto obj = nlohmann::json::object();
    const auto n = rng.uniform_int(0, 4);
    for (int i = 0; i < n; ++i) {
        const char* key = kKeys[rng.uniform_int(0, 3)];
        if (depth < 3 && rng.bit() == 1) {
            obj[key] = random_object_tree(rng, depth + 1);
        } else {
            obj[key] = rng.uniform_int(0, 9);
        }
    }
    return obj;
}

}  // namespace testsupport
