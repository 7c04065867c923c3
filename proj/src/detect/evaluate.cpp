#include "awareness/detect/evaluate.hpp"

#include <string>

#include "awareness/error.hpp"
#include "awareness/raster/png_io.hpp"

namespace awareness::detect {

namespace {

struct ImageResult {
    ClassMetrics caution, danger;
    bool correct = false;
};

ImageResult score_image(const std::vector<Detection>& dets, const spec::LabeledImage& label,
                        const interp::AffordanceMapping& mapping)
{
    ImageResult r;
    std::vector<char> used(label.boxes.size(), 0);
    // dets arrive in NMS order: descending score.
    for (const auto& d : dets) {
        if (!raster::is_warning(d.cls) || d.score < mapping.min_score) {
            continue;
        }
        auto& cm = d.cls == raster::GlyphClass::danger ? r.danger : r.caution;
        int best = -1;
        double best_iou = kMatchIou;
        for (std::size_t i = 0; i < label.boxes.size(); ++i) {
            if (used[i] || label.boxes[i].cls != d.cls) {
                continue;
            }
            const double v = iou(d.rect, label.boxes[i].rect);
            if (v >= best_iou) {
                best_iou = v;
                best = static_cast<int>(i);
            }
        }
        if (best >= 0) {
            used[static_cast<std::size_t>(best)] = 1;
            ++cm.tp;
        } else {
            ++cm.fp;
        }
    }
    for (std::size_t i = 0; i < label.boxes.size(); ++i) {
        if (!used[i]) {
            ++(label.boxes[i].cls == raster::GlyphClass::danger ? r.danger : r.caution).fn;
        }
    }
    const int expected = spec::label_mode(label) == 0   ? mapping.absence_mode
                         : spec::label_mode(label) == 1 ? mapping.caution_mode
                                                        : mapping.danger_mode;
    r.correct = interp::perceived_mode(dets, mapping) == expected;
    return r;
}

void finish(ClassMetrics& c)
{
    if (c.tp + c.fp > 0) {
        c.precision = static_cast<double>(c.tp) / (c.tp + c.fp);
    }
    if (c.tp + c.fn > 0) {
        c.recall = static_cast<double>(c.tp) / (c.tp + c.fn);
    }
}

nlohmann::json opt(const std::optional<double>& v)
{
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

nlohmann::json to_json(const ClassMetrics& c)
{
    return {{"tp", c.tp}, {"fp", c.fp}, {"fn", c.fn}, {"precision", opt(c.precision)}, {"recall", opt(c.recall)}};
}

}  // namespace

Metrics evaluate(const Detector& det, std::span<const spec::LabeledImage> holdout,
                 const std::filesystem::path& base_dir, const interp::AffordanceMapping& mapping)
{
    std::vector<ImageResult> results(holdout.size());
    std::vector<std::string> errors(holdout.size());
    const int n = static_cast<int>(holdout.size());
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < n; ++i) {
        const auto& label = holdout[static_cast<std::size_t>(i)];
        try {
            const auto img = raster::read_png(base_dir / label.path);
            results[static_cast<std::size_t>(i)] = score_image(det.detect(img), label, mapping);
        } catch (const std::exception& e) {
            errors[static_cast<std::size_t>(i)] = e.what();
        }
    }
    for (const auto& e : errors) {
        if (!e.empty()) {
            throw IoError(e);
        }
    }
    Metrics m;
    for (const auto& r : results) {
        for (auto [dst, src] : {std::pair{&m.caution, &r.caution}, std::pair{&m.danger, &r.danger}}) {
            dst->tp += src->tp;
            dst->fp += src->fp;
            dst->fn += src->fn;
        }
        ++m.frames;
        m.correct_frames += r.correct ? 1 : 0;
    }
    finish(m.caution);
    finish(m.danger);
    if (m.frames > 0) {
        m.mode_accuracy = static_cast<double>(m.correct_frames) / m.frames;
    }
    return m;
}

nlohmann::json to_json(const Metrics& m)
{
    return {{"caution", to_json(m.caution)},
            {"danger", to_json(m.danger)},
            {"frames", m.frames},
            {"correct_frames", m.correct_frames},
            {"mode_accuracy", opt(m.mode_accuracy)}};
}

}  // namespace awareness::detect
