#include "awareness/model/filter.hpp"

#include <algorithm>

#include "awareness/error.hpp"

namespace awareness::model {

namespace {

std::vector<std::string> split_path(const std::string& path)
{
    std::vector<std::string> segments;
    std::size_t start = 0;
    while (true) {
        const auto dot = path.find('.', start);
        segments.push_back(path.substr(start, dot - start));
        if (dot == std::string::npos) {
            break;
        }
        start = dot + 1;
    }
    return segments;
}

}  // namespace

FilterSpec::FilterSpec(std::vector<std::string> paths) : paths_(std::move(paths))
{
    if (paths_.empty()) {
        throw InvalidConfig("filter needs at least one path");
    }
    for (const auto& p : paths_) {
        for (const auto& seg : split_path(p)) {
            if (seg.empty()) {
                throw InvalidConfig("empty segment in filter path '" + p + "'");
            }
        }
    }
    std::ranges::sort(paths_);
    paths_.erase(std::unique(paths_.begin(), paths_.end()), paths_.end());
}

nlohmann::json project(const FilterSpec& f, const nlohmann::json& tree)
{
    nlohmann::json out = nlohmann::json::object();
    for (const auto& path : f.paths()) {
        const auto segments = split_path(path);
        const nlohmann::json* node = &tree;
        for (const auto& seg : segments) {
            if (!node->is_object()) {
                node = nullptr;
                break;
            }
            auto it = node->find(seg);
            if (it == node->end()) {
                node = nullptr;
                break;
            }
            node = &*it;
        }
        if (node == nullptr) {
            continue;
        }
        nlohmann::json* dst = &out;
        for (std::size_t i = 0; i + 1 < segments.size(); ++i) {
            auto& child = (*dst)[segments[i]];
            if (!child.is_object()) {
                child = nlohmann::json::object();
            }
            dst = &child;
        }
        (*dst)[segments.back()] = *node;
    }
    return out;
}

CanonicalJson apply_filter(const FilterSpec& f, const nlohmann::json& tree)
{
    return canonicalize(project(f, tree));
}

}  // namespace awareness::model
