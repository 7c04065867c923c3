#pragma once

#include <initializer_list>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "awareness/model/canonical_json.hpp"

namespace awareness::model {

/// A set of dot-separated key paths selecting the part of the model the GUI
/// must be aware of. Paths are stored sorted and deduplicated.
class FilterSpec {
public:
    /// Throws InvalidConfig on an empty set or a path with an empty segment.
    explicit FilterSpec(std::vector<std::string> paths);
    FilterSpec(std::initializer_list<std::string> paths)
        : FilterSpec(std::vector<std::string>(paths)) {}

    static FilterSpec warning_mode() { return FilterSpec{"warningMode"}; }

    const std::vector<std::string>& paths() const { return paths_; }

    friend bool operator==(const FilterSpec&, const FilterSpec&) = default;

private:
    std::vector<std::string> paths_;
};

/// Sub-tree holding exactly the addressed values, nesting preserved. Absent
/// paths are omitted.
nlohmann::json project(const FilterSpec& f, const nlohmann::json& tree);

CanonicalJson apply_filter(const FilterSpec& f, const nlohmann::json& tree);

}  // namespace awareness::model
