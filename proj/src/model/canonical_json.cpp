#include "awareness/model/canonical_json.hpp"

#include <charconv>
#include <cmath>

#include "awareness/error.hpp"

namespace awareness::model {

namespace {

constexpr double kMaxExactInt = 9007199254740992.0;  // 2^53

void append_string(std::string& out, const std::string& s)
{
    out += nlohmann::json(s).dump(-1, ' ', false, nlohmann::json::error_handler_t::strict);
}

void write(std::string& out, const nlohmann::json& j)
{
    switch (j.type()) {
    case nlohmann::json::value_t::null:
        out += "null";
        break;
    case nlohmann::json::value_t::boolean:
        out += j.get<bool>() ? "true" : "false";
        break;
    case nlohmann::json::value_t::number_integer:
        out += std::to_string(j.get<std::int64_t>());
        break;
    case nlohmann::json::value_t::number_unsigned:
        out += std::to_string(j.get<std::uint64_t>());
        break;
    case nlohmann::json::value_t::number_float:
        append_canonical_number(out, j.get<double>());
        break;
    case nlohmann::json::value_t::string:
        append_string(out, j.get_ref<const std::string&>());
        break;
    case nlohmann::json::value_t::array: {
        out += '[';
        bool first = true;
        for (const auto& e : j) {
            if (!first) {
                out += ',';
            }
            first = false;
            write(out, e);
        }
        out += ']';
        break;
    }
    case nlohmann::json::value_t::object: {
        // nlohmann::json objects are std::map, already sorted bytewise.
        out += '{';
        bool first = true;
        for (const auto& [key, value] : j.items()) {
            if (!first) {
                out += ',';
            }
            first = false;
            append_string(out, key);
            out += ':';
            write(out, value);
        }
        out += '}';
        break;
    }
    case nlohmann::json::value_t::binary:
    case nlohmann::json::value_t::discarded:
        throw DecodeError("unsupported JSON value kind");
    }
}

}  // namespace

void append_canonical_number(std::string& out, double v)
{
    if (!std::isfinite(v)) {
        throw NonFiniteNumber("NaN or infinity in tree");
    }
    if (std::trunc(v) == v && std::fabs(v) < kMaxExactInt) {
        out += std::to_string(static_cast<std::int64_t>(v));
        return;
    }
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, end);
}

CanonicalJson canonicalize(const nlohmann::json& tree)
{
    CanonicalJson c;
    write(c.text, tree);
    return c;
}

nlohmann::json parse_json(std::string_view text)
{
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw DecodeError(e.what());
    }
}

}  // namespace awareness::model
