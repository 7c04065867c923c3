#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "awareness/model/scenario.hpp"
#include "awareness/raster/glyph.hpp"
#include "awareness/raster/image.hpp"

namespace awareness::spec {

struct BoundingBox {
    raster::GlyphClass cls = raster::GlyphClass::caution;
    raster::Rect rect;

    friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

struct LabeledImage {
    std::string path;  ///< relative to the directory holding the labels file
    int width = 0;
    int height = 0;
    std::vector<BoundingBox> boxes;  ///< empty for nominal

    friend bool operator==(const LabeledImage&, const LabeledImage&) = default;
};

/// Warning mode a label implies: 0 without boxes, else the class of the first box.
int label_mode(const LabeledImage& img);

struct SpecDatasetConfig {
    int per_class = 30;
    int width = 640;
    int height = 480;
    int icon_min = 48;
    int icon_max = 80;
    std::uint64_t seed = 7;
    double meters_per_pixel = 4.0;
    model::BoundingBox area = model::ScenarioConfig{}.bbox;  ///< where background origins are drawn
};

void validate(const SpecDatasetConfig& cfg);
nlohmann::json to_json(const SpecDatasetConfig& cfg);
/// Overlays onto the defaults; unknown keys rejected.
SpecDatasetConfig spec_config_from_json(const nlohmann::json& j);

struct SpecImage {
    raster::Image image;
    LabeledImage label;
};

/// Image `index` of the dataset: class index % 3 (nominal, caution, danger),
/// designer-style background at a seeded origin, one glyph at a seeded
/// position and size. Pure function of (cfg, index).
SpecImage render_spec_image(const SpecDatasetConfig& cfg, int index);

struct SpecDataset {
    std::filesystem::path dir;
    std::vector<LabeledImage> images;
};

inline constexpr const char* kLabelsFile = "labels.ndjson";

/// Writes 3 * per_class PNGs plus labels.ndjson into `out_dir`.
SpecDataset generate_spec_dataset(const SpecDatasetConfig& cfg, const std::filesystem::path& out_dir);

nlohmann::json to_json(const LabeledImage& img);
LabeledImage labeled_image_from_json(const nlohmann::json& j);
void write_labels(const std::filesystem::path& path, const std::vector<LabeledImage>& images);
/// Throws MissingArtifact when the file does not exist.
SpecDataset read_labels(const std::filesystem::path& labels_path);

/// Stratified by label mode; deterministic in `seed`; train and test are
/// disjoint, keep dataset order, and together cover the input.
std::pair<std::vector<LabeledImage>, std::vector<LabeledImage>> split_dataset(const std::vector<LabeledImage>& ds,
                                                                              double train_fraction,
                                                                              std::uint64_t seed);

}  // namespace awareness::spec
