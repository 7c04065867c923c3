#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace awareness::raster {

struct Rgb {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;

    friend bool operator==(const Rgb&, const Rgb&) = default;
};

struct Rect {
    int x = 0;
    int y = 0;
    int w = 1;
    int h = 1;

    int right() const { return x + w; }
    int bottom() const { return y + h; }
    long long area() const { return static_cast<long long>(w) * h; }

    friend bool operator==(const Rect&, const Rect&) = default;
};

/// Row-major 8-bit RGB raster.
class Image {
public:
    Image() = default;
    /// Throws InvalidConfig unless width, height > 0.
    Image(int width, int height, Rgb fill = {});

    int width() const { return width_; }
    int height() const { return height_; }
    bool empty() const { return pixels_.empty(); }
    bool contains(const Rect& r) const;

    Rgb at(int x, int y) const
    {
        const auto* p = &pixels_[index(x, y)];
        return {p[0], p[1], p[2]};
    }
    void set(int x, int y, Rgb c)
    {
        auto* p = &pixels_[index(x, y)];
        p[0] = c.r;
        p[1] = c.g;
        p[2] = c.b;
    }

    std::span<const std::uint8_t> pixels() const { return pixels_; }
    std::span<std::uint8_t> pixels() { return pixels_; }

    /// Copy of the sub-rectangle; throws OutOfBounds when `r` is not inside.
    Image crop(const Rect& r) const;
    /// Copies `src` with its top-left at (x, y); throws OutOfBounds when it does not fit.
    void blit(const Image& src, int x, int y);
    void fill_rect(const Rect& r, Rgb c);

    friend bool operator==(const Image&, const Image&) = default;

private:
    std::size_t index(int x, int y) const
    {
        return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x)) * 3;
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> pixels_;
};

/// Single-channel 8-bit raster.
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;

    std::uint8_t at(int x, int y) const
    {
        return pixels[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)];
    }

    friend bool operator==(const GrayImage&, const GrayImage&) = default;
};

/// BT.601 luma: (299 R + 587 G + 114 B + 500) / 1000.
inline std::uint8_t luma(Rgb c)
{
    return static_cast<std::uint8_t>((299u * c.r + 587u * c.g + 114u * c.b + 500u) / 1000u);
}

GrayImage to_grayscale(const Image& img);

/// Gray replicated into three channels.
Image gray_to_rgb(const GrayImage& g);

/// Mean color over a rectangle, per channel.
struct MeanRgb {
    double r = 0;
    double g = 0;
    double b = 0;
};
MeanRgb mean_rgb(const Image& img, const Rect& r);
MeanRgb mean_rgb(const Image& img);
double distance(const MeanRgb& a, const MeanRgb& b);

}  // namespace awareness::raster
