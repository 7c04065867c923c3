#pragma once

#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace awareness::model {

/// The unique text form of a JSON value: keys sorted bytewise, no whitespace,
/// integral numbers (|x| < 2^53) printed bare, other doubles printed as the
/// shortest decimal that round-trips. Equality of two trees is string equality.
struct CanonicalJson {
    std::string text;

    friend bool operator==(const CanonicalJson&, const CanonicalJson&) = default;
    friend auto operator<=>(const CanonicalJson&, const CanonicalJson&) = default;
};

/// Throws NonFiniteNumber on NaN or infinity anywhere in the tree.
CanonicalJson canonicalize(const nlohmann::json& tree);

/// Parses arbitrary JSON text; throws DecodeError when malformed.
nlohmann::json parse_json(std::string_view text);

/// Appends the canonical form of a single double to `out`.
void append_canonical_number(std::string& out, double v);

}  // namespace awareness::model
