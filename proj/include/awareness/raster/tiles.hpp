#pragma once

#include <cstdint>

#include "awareness/model/geo.hpp"
#include "awareness/raster/image.hpp"

namespace awareness::raster {

inline constexpr int kTilePx = 256;

enum class Style {
    designer,  ///< light street-map look used for spec images
    runtime,   ///< satellite-noise look used by the GUI under test
};

struct TileStyle {
    Style style = Style::designer;
    std::uint64_t world_seed = 0;
};

/// Integer world-pixel position of a geographic point (spherical Mercator,
/// y growing southwards) at the given scale.
struct WorldPx {
    long long x = 0;
    long long y = 0;
};
WorldPx to_world_px(const model::GeoPoint& p, double meters_per_pixel);
/// Geographic point whose world-pixel position is (x, y).
model::GeoPoint from_world_px(double x, double y, double meters_per_pixel);

/// Map background whose top-left pixel is at `origin`. Pixel content depends
/// only on world-pixel coordinates, so whole-pixel origin shifts move the
/// pattern exactly.
Image tile_background(const TileStyle& style, const model::GeoPoint& origin, int width, int height,
                      double meters_per_pixel);

/// Same, addressed directly in world pixels.
Image tile_background_px(const TileStyle& style, WorldPx origin, int width, int height);

}  // namespace awareness::raster
