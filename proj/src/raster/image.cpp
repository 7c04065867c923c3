#include "awareness/raster/image.hpp"

#include <cmath>
#include <string>

#include "awareness/error.hpp"

namespace awareness::raster {

namespace {

std::string describe(const Rect& r)
{
    return "rect(" + std::to_string(r.x) + "," + std::to_string(r.y) + "," + std::to_string(r.w) + "x" +
           std::to_string(r.h) + ")";
}

}  // namespace

Image::Image(int width, int height, Rgb fill) : width_(width), height_(height)
{
    if (width <= 0 || height <= 0) {
        throw InvalidConfig("image dimensions must be positive");
    }
    pixels_.resize(static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 3);
    for (std::size_t i = 0; i < pixels_.size(); i += 3) {
        pixels_[i] = fill.r;
        pixels_[i + 1] = fill.g;
        pixels_[i + 2] = fill.b;
    }
}

bool Image::contains(const Rect& r) const
{
    return r.w > 0 && r.h > 0 && r.x >= 0 && r.y >= 0 && r.right() <= width_ && r.bottom() <= height_;
}

Image Image::crop(const Rect& r) const
{
    if (!contains(r)) {
        throw OutOfBounds(describe(r) + " outside image");
    }
    Image out(r.w, r.h);
    const std::size_t row_bytes = static_cast<std::size_t>(r.w) * 3;
    for (int y = 0; y < r.h; ++y) {
        const auto* src = &pixels_[index(r.x, r.y + y)];
        std::copy(src, src + row_bytes, &out.pixels_[out.index(0, y)]);
    }
    return out;
}

void Image::blit(const Image& src, int x, int y)
{
    if (!contains(Rect{x, y, src.width(), src.height()})) {
        throw OutOfBounds("blit target outside image");
    }
    const std::size_t row_bytes = static_cast<std::size_t>(src.width()) * 3;
    for (int row = 0; row < src.height(); ++row) {
        const auto* s = &src.pixels_[src.index(0, row)];
        std::copy(s, s + row_bytes, &pixels_[index(x, y + row)]);
    }
}

void Image::fill_rect(const Rect& r, Rgb c)
{
    if (!contains(r)) {
        throw OutOfBounds(describe(r) + " outside image");
    }
    for (int y = r.y; y < r.bottom(); ++y) {
        for (int x = r.x; x < r.right(); ++x) {
            set(x, y, c);
        }
    }
}

GrayImage to_grayscale(const Image& img)
{
    GrayImage g{img.width(), img.height(), {}};
    const auto px = img.pixels();
    g.pixels.resize(px.size() / 3);
    for (std::size_t i = 0; i < g.pixels.size(); ++i) {
        g.pixels[i] = luma({px[3 * i], px[3 * i + 1], px[3 * i + 2]});
    }
    return g;
}

Image gray_to_rgb(const GrayImage& g)
{
    Image out(g.width, g.height);
    auto px = out.pixels();
    for (std::size_t i = 0; i < g.pixels.size(); ++i) {
        px[3 * i] = px[3 * i + 1] = px[3 * i + 2] = g.pixels[i];
    }
    return out;
}

MeanRgb mean_rgb(const Image& img, const Rect& r)
{
    if (!img.contains(r)) {
        throw OutOfBounds(describe(r) + " outside image");
    }
    std::uint64_t sr = 0, sg = 0, sb = 0;
    for (int y = r.y; y < r.bottom(); ++y) {
        for (int x = r.x; x < r.right(); ++x) {
            const auto c = img.at(x, y);
            sr += c.r;
            sg += c.g;
            sb += c.b;
        }
    }
    const double n = static_cast<double>(r.area());
    return {static_cast<double>(sr) / n, static_cast<double>(sg) / n, static_cast<double>(sb) / n};
}

MeanRgb mean_rgb(const Image& img)
{
    return mean_rgb(img, Rect{0, 0, img.width(), img.height()});
}

double distance(const MeanRgb& a, const MeanRgb& b)
{
    const double dr = a.r - b.r, dg = a.g - b.g, db = a.b - b.b;
    return std::sqrt(dr * dr + dg * dg + db * db);
}

}  // namespace awareness::raster
