#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "awareness/raster/glyph.hpp"
#include "awareness/raster/image.hpp"
#include "awareness/spec/dataset.hpp"

namespace awareness::detect {

struct DetectorConfig {
    std::vector<double> scales{0.75, 1.0, 1.25};
    double score_threshold = 0.6;
    double nms_iou = 0.5;
    int stride = 2;
    double color_tolerance = 80.0;
    /// Windows whose gray std is below this fraction of the template's are skipped.
    double min_contrast = 0.5;
};

void validate(const DetectorConfig& cfg);
nlohmann::json to_json(const DetectorConfig& cfg);
DetectorConfig detector_config_from_json(const nlohmann::json& j);

/// Central half of `r` in each axis; the region the color gate compares.
raster::Rect core_rect(const raster::Rect& r);

struct Template {
    raster::GlyphClass cls = raster::GlyphClass::caution;
    raster::GrayImage patch;
    raster::MeanRgb mean_rgb;  ///< over core_rect of the source crop
    std::string source_image;
    raster::Rect source_box;
};

struct TemplateSet {
    std::vector<Template> templates;
    DetectorConfig config;
};

inline constexpr raster::GlyphClass kWarningClasses[] = {raster::GlyphClass::caution, raster::GlyphClass::danger};

/// One template per box, in dataset order. Images are read relative to
/// `base_dir`. Throws MissingClass when a class in `required` has no box and
/// DegenerateCrop on a zero-variance crop.
TemplateSet train_templates(std::span<const spec::LabeledImage> train, const std::filesystem::path& base_dir,
                            const DetectorConfig& cfg,
                            std::span<const raster::GlyphClass> required = kWarningClasses);

/// Template from an in-memory crop.
Template make_template(raster::GlyphClass cls, const raster::Image& crop, std::string source_image = {},
                       raster::Rect source_box = {});

inline constexpr const char* kManifestFile = "manifest.json";

/// Writes template PNGs plus manifest.json. Output is byte-stable.
void save_template_set(const TemplateSet& ts, const std::filesystem::path& dir);
/// Throws MissingArtifact when the manifest is absent.
TemplateSet load_template_set(const std::filesystem::path& dir);

/// Zero-normalized cross-correlation, clamped to [-1, 1]; 0 when either
/// side has zero variance. Throws DimensionMismatch on unequal sizes.
double ncc_score(std::span<const double> window, std::span<const double> tpl);
double ncc_score(const raster::GrayImage& window, const raster::GrayImage& tpl);

struct Detection {
    raster::GlyphClass cls = raster::GlyphClass::caution;
    raster::Rect rect;
    double score = 0.0;
};

double iou(const raster::Rect& a, const raster::Rect& b);

/// Greedy per-class suppression. Output ordered by descending score, then x,
/// y, w, h, class.
std::vector<Detection> nms(std::vector<Detection> dets, double iou_thr);

/// A template resampled to one scale, ready for scanning.
struct ScaledTemplate {
    raster::GlyphClass cls = raster::GlyphClass::caution;
    int w = 0;
    int h = 0;
    std::vector<double> centered;  ///< patch minus its mean
    double norm = 0.0;             ///< sqrt of sum of squares of `centered`
    raster::MeanRgb mean_rgb;
};

/// Bilinear resample of a gray patch, sampled at pixel centers.
std::vector<double> resize_bilinear(const raster::GrayImage& src, int w, int h);

std::vector<ScaledTemplate> scale_templates(const TemplateSet& ts);

/// Windows that pass the color and contrast gates and reach the score threshold, ordered
/// by template, then row, then column.
std::vector<Detection> score_candidates(const raster::Image& img, std::span<const ScaledTemplate> tpls,
                                        const DetectorConfig& cfg);
/// Serial brute-force twin of score_candidates; same contract.
std::vector<Detection> score_candidates_reference(const raster::Image& img, std::span<const ScaledTemplate> tpls,
                                                  const DetectorConfig& cfg);

/// Holds the scaled templates so repeated detection skips resampling.
class Detector {
public:
    explicit Detector(TemplateSet ts);

    std::vector<Detection> detect(const raster::Image& img) const;
    const TemplateSet& templates() const { return ts_; }
    const DetectorConfig& config() const { return ts_.config; }

private:
    TemplateSet ts_;
    std::vector<ScaledTemplate> scaled_;
};

std::vector<Detection> detect(const raster::Image& img, const TemplateSet& ts);

nlohmann::json to_json(const Detection& d);

}  // namespace awareness::detect
