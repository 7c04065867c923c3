#include "awareness/raster/glyph.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "awareness/error.hpp"

namespace awareness::raster {

namespace {

constexpr Rgb kBlack{0, 0, 0};
constexpr Rgb kWhite{255, 255, 255};

struct Vec {
    double x, y;
};

double cross(Vec a, Vec b, Vec p)
{
    return (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
}

double segment_distance(Vec a, Vec b, Vec p)
{
    const double dx = b.x - a.x, dy = b.y - a.y;
    const double len2 = dx * dx + dy * dy;
    double t = len2 > 0 ? ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const double ex = a.x + t * dx - p.x, ey = a.y + t * dy - p.y;
    return std::sqrt(ex * ex + ey * ey);
}

bool in_box(double u, double v, double u0, double u1, double v0, double v1)
{
    return u >= u0 && u < u1 && v >= v0 && v < v1;
}

void require_inside(const Image& img, const Rect& r)
{
    if (!img.contains(r)) {
        throw OutOfBounds("glyph rect outside image");
    }
}

/// Calls shade(u, v, px, py) for each pixel center of `r` in local pixel
/// coordinates (px, py) and normalized (u, v).
template <class Shade>
void for_each_pixel(Image& img, const Rect& r, Shade&& shade)
{
    for (int y = 0; y < r.h; ++y) {
        for (int x = 0; x < r.w; ++x) {
            const double px = x + 0.5, py = y + 0.5;
            if (auto c = shade(px / r.w, py / r.h, px, py)) {
                img.set(r.x + x, r.y + y, *c);
            }
        }
    }
}

void paint_caution(Image& img, const Rect& r)
{
    const Vec a{0.50 * r.w, 0.02 * r.h};
    const Vec b{0.02 * r.w, 0.97 * r.h};
    const Vec c{0.98 * r.w, 0.97 * r.h};
    const double border = std::max(2.0, 0.07 * std::min(r.w, r.h));
    for_each_pixel(img, r, [&](double u, double v, double px, double py) -> std::optional<Rgb> {
        const Vec p{px, py};
        const bool inside = cross(a, b, p) <= 0 && cross(b, c, p) <= 0 && cross(c, a, p) <= 0;
        if (!inside) {
            return std::nullopt;
        }
        const double edge = std::min({segment_distance(a, b, p), segment_distance(b, c, p), segment_distance(c, a, p)});
        if (edge < border) {
            return kBlack;
        }
        if (in_box(u, v, 0.44, 0.56, 0.34, 0.70) || in_box(u, v, 0.44, 0.56, 0.76, 0.87)) {
            return kBlack;
        }
        return kCautionYellow;
    });
}

void paint_danger(Image& img, const Rect& r)
{
    for_each_pixel(img, r, [&](double u, double v, double, double) -> std::optional<Rgb> {
        const double du = std::fabs(u - 0.5), dv = std::fabs(v - 0.5);
        // Regular octagon inscribed in the rect: corners cut at 1 - 1/sqrt(2).
        if (du > 0.5 || dv > 0.5 || du + dv > 0.5 * std::numbers::sqrt2) {
            return std::nullopt;
        }
        const double su = u - 0.5, sv = v - 0.5;
        const bool on_stroke = std::fabs(su - sv) / std::numbers::sqrt2 < 0.065 ||
                               std::fabs(su + sv) / std::numbers::sqrt2 < 0.065;
        if (on_stroke && du < 0.22 && dv < 0.22) {
            return kWhite;
        }
        return kDangerRed;
    });
}

void paint_shame(Image& img, const Rect& r)
{
    for_each_pixel(img, r, [&](double u, double v, double, double) -> std::optional<Rgb> {
        if (in_box(u, v, 0.42, 0.58, 0.14, 0.62) || in_box(u, v, 0.42, 0.58, 0.72, 0.86)) {
            return kWhite;
        }
        return kShameMagenta;
    });
}

}  // namespace

std::string_view to_string(GlyphClass c)
{
    switch (c) {
    case GlyphClass::caution:
        return "caution";
    case GlyphClass::danger:
        return "danger";
    case GlyphClass::drone_marker:
        return "drone_marker";
    case GlyphClass::shame:
        return "shame";
    }
    return "unknown";
}

std::optional<GlyphClass> glyph_class_from_string(std::string_view s)
{
    for (auto c : {GlyphClass::caution, GlyphClass::danger, GlyphClass::drone_marker, GlyphClass::shame}) {
        if (to_string(c) == s) {
            return c;
        }
    }
    return std::nullopt;
}

void paint_drone_marker(Image& img, const Rect& r, double heading_deg)
{
    require_inside(img, r);
    const double theta = heading_deg * std::numbers::pi / 180.0;
    const double scale = std::min(r.w, r.h);
    const Vec center{r.w / 2.0, r.h / 2.0};
    const Vec tip{center.x + std::sin(theta) * 0.40 * scale, center.y - std::cos(theta) * 0.40 * scale};
    const double half_width = std::max(1.0, 0.06 * scale);
    for_each_pixel(img, r, [&](double, double, double px, double py) -> std::optional<Rgb> {
        const double dx = px - center.x, dy = py - center.y;
        if (std::sqrt(dx * dx + dy * dy) > 0.46 * scale) {
            return std::nullopt;
        }
        if (segment_distance(center, tip, {px, py}) < half_width) {
            return kWhite;
        }
        return kDroneBlue;
    });
}

void paint_glyph(Image& img, GlyphClass cls, const Rect& r)
{
    require_inside(img, r);
    switch (cls) {
    case GlyphClass::caution:
        paint_caution(img, r);
        break;
    case GlyphClass::danger:
        paint_danger(img, r);
        break;
    case GlyphClass::drone_marker:
        paint_drone_marker(img, r, 0.0);
        break;
    case GlyphClass::shame:
        paint_shame(img, r);
        break;
    }
}

Image draw_glyph(Image img, GlyphClass cls, const Rect& r)
{
    paint_glyph(img, cls, r);
    return img;
}

}  // namespace awareness::raster
