#include "awareness/raster/tiles.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "awareness/rng.hpp"

namespace awareness::raster {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

long long floor_div(long long a, long long b)
{
    long long q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) {
        --q;
    }
    return q;
}

long long floor_mod(long long a, long long b)
{
    return a - floor_div(a, b) * b;
}

std::uint64_t hash3(long long x, long long y, std::uint64_t salt)
{
    std::uint64_t h = splitmix64(salt);
    h = splitmix64(h ^ static_cast<std::uint64_t>(x));
    h = splitmix64(h ^ (static_cast<std::uint64_t>(y) * 0x9E3779B97F4A7C15ULL));
    return h;
}

double unit(std::uint64_t h)
{
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

// Designer style: city blocks separated by a street grid.
constexpr int kBlockPx = 64;
constexpr Rgb kLand{242, 239, 233};
constexpr Rgb kBuilding{217, 208, 201};
constexpr Rgb kPark{205, 233, 197};
constexpr Rgb kWater{170, 211, 223};
constexpr Rgb kMinorStreet{252, 252, 250};
constexpr Rgb kMajorStreet{255, 255, 255};

Rgb designer_pixel(long long wx, long long wy, std::uint64_t seed)
{
    const long long mx = floor_mod(wx, kTilePx), my = floor_mod(wy, kTilePx);
    if (mx < 8 || my < 8) {
        return kMajorStreet;
    }
    const long long bx = floor_mod(wx, kBlockPx), by = floor_mod(wy, kBlockPx);
    if (bx < 4 || by < 4) {
        return kMinorStreet;
    }
    const double kind = unit(hash3(floor_div(wx, kBlockPx), floor_div(wy, kBlockPx), seed));
    if (kind < 0.5) {
        return kLand;
    }
    if (kind < 0.8) {
        return (bx >= 12 && bx < kBlockPx - 8 && by >= 12 && by < kBlockPx - 8) ? kBuilding : kLand;
    }
    return kind < 0.93 ? kPark : kWater;
}

// Runtime style: quantized multi-octave value noise.
struct Octave {
    int spacing;
    double weight;
};
constexpr std::array<Octave, 4> kOctaves{{{96, 0.45}, {48, 0.28}, {24, 0.17}, {12, 0.10}}};
constexpr std::array<Rgb, 5> kRuntimePalette{{
    {150, 185, 120},
    {172, 200, 140},
    {190, 210, 155},
    {205, 200, 160},
    {185, 170, 135},
}};
constexpr std::array<double, 4> kRuntimeThresholds{0.40, 0.50, 0.60, 0.70};

double smoothstep(double t)
{
    return t * t * (3.0 - 2.0 * t);
}

/// Lattice values and per-pixel interpolation weights for one octave over a
/// window of world pixels.
struct OctaveGrid {
    long long lx0 = 0, ly0 = 0;
    int lw = 0;
    std::vector<double> lattice;
    std::vector<int> cell_x, cell_y;
    std::vector<double> wx, wy;

    OctaveGrid(const Octave& o, WorldPx origin, int width, int height, std::uint64_t salt)
    {
        lx0 = floor_div(origin.x, o.spacing);
        ly0 = floor_div(origin.y, o.spacing);
        const long long lx1 = floor_div(origin.x + width - 1, o.spacing) + 1;
        const long long ly1 = floor_div(origin.y + height - 1, o.spacing) + 1;
        lw = static_cast<int>(lx1 - lx0 + 1);
        const int lh = static_cast<int>(ly1 - ly0 + 1);
        lattice.resize(static_cast<std::size_t>(lw) * lh);
        for (int j = 0; j < lh; ++j) {
            for (int i = 0; i < lw; ++i) {
                lattice[static_cast<std::size_t>(j) * lw + i] = unit(hash3(lx0 + i, ly0 + j, salt));
            }
        }
        axis(origin.x, width, o.spacing, lx0, cell_x, wx);
        axis(origin.y, height, o.spacing, ly0, cell_y, wy);
    }

    static void axis(long long start, int n, int spacing, long long l0, std::vector<int>& cell, std::vector<double>& w)
    {
        cell.resize(n);
        w.resize(n);
        for (int i = 0; i < n; ++i) {
            const long long p = start + i;
            cell[i] = static_cast<int>(floor_div(p, spacing) - l0);
            w[i] = smoothstep(static_cast<double>(floor_mod(p, spacing)) / spacing);
        }
    }

    double sample(int x, int y) const
    {
        const auto* row0 = &lattice[static_cast<std::size_t>(cell_y[y]) * lw + cell_x[x]];
        const auto* row1 = row0 + lw;
        const double top = row0[0] + (row0[1] - row0[0]) * wx[x];
        const double bot = row1[0] + (row1[1] - row1[0]) * wx[x];
        return top + (bot - top) * wy[y];
    }
};

}  // namespace

WorldPx to_world_px(const model::GeoPoint& p, double meters_per_pixel)
{
    const double x_m = model::kEarthRadiusM * p.lon * kDeg;
    const double y_m = model::kEarthRadiusM * std::log(std::tan(std::numbers::pi / 4 + p.lat * kDeg / 2));
    return {std::llround(x_m / meters_per_pixel), std::llround(-y_m / meters_per_pixel)};
}

model::GeoPoint from_world_px(double x, double y, double meters_per_pixel)
{
    const double x_m = x * meters_per_pixel;
    const double y_m = -y * meters_per_pixel;
    const double lon = x_m / model::kEarthRadiusM / kDeg;
    const double lat = (2.0 * std::atan(std::exp(y_m / model::kEarthRadiusM)) - std::numbers::pi / 2) / kDeg;
    return {lat, lon};
}

Image tile_background(const TileStyle& style, const model::GeoPoint& origin, int width, int height,
                      double meters_per_pixel)
{
    return tile_background_px(style, to_world_px(origin, meters_per_pixel), width, height);
}

Image tile_background_px(const TileStyle& style, WorldPx origin, int width, int height)
{
    Image img(width, height);
    if (style.style == Style::designer) {
#pragma omp parallel for schedule(static)
        for (int y = 0; y < height; ++y) {
            for (int x = 0; x < width; ++x) {
                img.set(x, y, designer_pixel(origin.x + x, origin.y + y, style.world_seed));
            }
        }
        return img;
    }

    std::vector<OctaveGrid> grids;
    for (std::size_t o = 0; o < kOctaves.size(); ++o) {
        grids.emplace_back(kOctaves[o], origin, width, height, derive_seed(style.world_seed, 100 + o));
    }
#pragma omp parallel for schedule(static)
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            double n = 0.0;
            for (std::size_t o = 0; o < kOctaves.size(); ++o) {
                n += kOctaves[o].weight * grids[o].sample(x, y);
            }
            std::size_t idx = 0;
            while (idx < kRuntimeThresholds.size() && n >= kRuntimeThresholds[idx]) {
                ++idx;
            }
            img.set(x, y, kRuntimePalette[idx]);
        }
    }
    return img;
}

}  // namespace awareness::raster
