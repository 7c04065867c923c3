// Scoring kernel: OpenMP path vs the serial reference on one runtime-style frame.

#include <benchmark/benchmark.h>

#include "awareness/raster/glyph.hpp"
#include "awareness/raster/tiles.hpp"
#include "support/fixtures.hpp"

namespace {

using namespace awareness;

struct Scene {
    raster::Image img;
    std::vector<detect::ScaledTemplate> tpls;
    detect::DetectorConfig cfg;
};

const Scene& scene()
{
    static const Scene s = [] {
        const auto& fx = testsupport::trained_fixture();
        Scene out{raster::tile_background({raster::Style::runtime, 5}, {40.71, -74.0}, 320, 240, 4.0),
                  {}, fx.templates.config};
        raster::paint_glyph(out.img, raster::GlyphClass::caution, {24, 30, 64, 64});
        raster::paint_glyph(out.img, raster::GlyphClass::danger, {180, 104, 56, 56});
        const auto all = detect::scale_templates(fx.templates);
        // Every fourth template keeps the serial run short.
        for (std::size_t i = 0; i < all.size(); i += 4) {
            out.tpls.push_back(all[i]);
        }
        return out;
    }();
    return s;
}

void BM_score_candidates(benchmark::State& state)
{
    const auto& s = scene();
    for (auto _ : state) {
        benchmark::DoNotOptimize(detect::score_candidates(s.img, s.tpls, s.cfg));
    }
}

void BM_score_candidates_reference(benchmark::State& state)
{
    const auto& s = scene();
    for (auto _ : state) {
        benchmark::DoNotOptimize(detect::score_candidates_reference(s.img, s.tpls, s.cfg));
    }
}

BENCHMARK(BM_score_candidates)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_score_candidates_reference)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
