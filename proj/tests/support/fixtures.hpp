#pragma once

// Shared, lazily built training fixture: the default spec dataset, its
// default split and the templates trained on it.

#include <unistd.h>

#include <filesystem>
#include <string>

#include "awareness/detect/detector.hpp"
#include "awareness/spec/dataset.hpp"

namespace testsupport {

struct TrainedFixture {
    awareness::spec::SpecDataset dataset;
    std::vector<awareness::spec::LabeledImage> train;
    std::vector<awareness::spec::LabeledImage> test;
    awareness::detect::TemplateSet templates;
};

inline const TrainedFixture& trained_fixture()
{
    static const TrainedFixture fx = [] {
        namespace fs = std::filesystem;
        const awareness::spec::SpecDatasetConfig cfg;
        const auto dir = fs::temp_directory_path() / ("awareness_fixture_spec_" + std::to_string(::getpid()));
        fs::remove_all(dir);
        TrainedFixture f{awareness::spec::generate_spec_dataset(cfg, dir), {}, {}, {}};
        std::tie(f.train, f.test) = awareness::spec::split_dataset(f.dataset.images, 2.0 / 3.0, cfg.seed);
        f.templates = awareness::detect::train_templates(f.train, dir, {});
        return f;
    }();
    return fx;
}

inline const awareness::detect::Detector& trained_detector()
{
    static const awareness::detect::Detector det(trained_fixture().templates);
    return det;
}

}  // namespace testsupport
