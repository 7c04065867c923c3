#pragma once

#include <optional>
#include <string_view>

#include "awareness/raster/image.hpp"

namespace awareness::raster {

enum class GlyphClass { caution, danger, drone_marker, shame };

std::string_view to_string(GlyphClass c);
/// Inverse of to_string; nullopt for unknown names.
std::optional<GlyphClass> glyph_class_from_string(std::string_view s);

/// Only caution and danger are detectable warning glyphs.
inline bool is_warning(GlyphClass c) { return c == GlyphClass::caution || c == GlyphClass::danger; }

inline constexpr Rgb kCautionYellow{255, 204, 0};
inline constexpr Rgb kDangerRed{220, 0, 0};
inline constexpr Rgb kDroneBlue{30, 90, 230};
inline constexpr Rgb kShameMagenta{255, 0, 255};

/// Draws `cls` scaled to `r` in place. Throws OutOfBounds when `r` is not inside `img`.
void paint_glyph(Image& img, GlyphClass cls, const Rect& r);

/// Drone disc with a heading tick pointing at `heading_deg` (clockwise from up).
void paint_drone_marker(Image& img, const Rect& r, double heading_deg);

/// Value-semantics wrapper over paint_glyph.
Image draw_glyph(Image img, GlyphClass cls, const Rect& r);

}  // namespace awareness::raster
