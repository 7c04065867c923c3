#include "awareness/interp/interpreter.hpp"

#include "awareness/error.hpp"

namespace awareness::interp {

AffordanceMapping AffordanceMapping::for_detector(const detect::DetectorConfig& cfg)
{
    AffordanceMapping m;
    m.min_score = cfg.score_threshold;
    return m;
}

void validate(const AffordanceMapping& m)
{
    if (m.caution_mode == m.danger_mode) {
        throw InvalidConfig("affordance mapping must be injective");
    }
    if (m.absence_mode == m.caution_mode || m.absence_mode == m.danger_mode) {
        throw InvalidConfig("absence_mode collides with a class mode");
    }
}

namespace {

const detect::Detection* deciding(std::span<const detect::Detection> dets, const AffordanceMapping& m)
{
    const detect::Detection* best = nullptr;
    for (const auto& d : dets) {
        if (!raster::is_warning(d.cls) || d.score < m.min_score) {
            continue;
        }
        if (!best || d.score > best->score ||
            (d.score == best->score && (d.rect.x < best->rect.x || (d.rect.x == best->rect.x && d.rect.y < best->rect.y)))) {
            best = &d;
        }
    }
    return best;
}

}  // namespace

int perceived_mode(std::span<const detect::Detection> dets, const AffordanceMapping& m)
{
    const auto* d = deciding(dets, m);
    if (!d) {
        return m.absence_mode;
    }
    return d->cls == raster::GlyphClass::danger ? m.danger_mode : m.caution_mode;
}

SynthesizedModel interpret(const raster::Image& frame, const detect::Detector& det, const AffordanceMapping& m)
{
    const auto dets = det.detect(frame);
    SynthesizedModel out{{{"warningMode", perceived_mode(dets, m)}}, {}};
    if (const auto* d = deciding(dets, m)) {
        out.provenance.push_back(*d);
    }
    return out;
}

}  // namespace awareness::interp
