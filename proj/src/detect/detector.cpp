#include "awareness/detect/detector.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "awareness/error.hpp"
#include "awareness/model/canonical_json.hpp"
#include "awareness/raster/png_io.hpp"

namespace awareness::detect {

using raster::GlyphClass;
using raster::GrayImage;
using raster::Image;
using raster::Rect;

void validate(const DetectorConfig& cfg)
{
    if (cfg.scales.empty()) {
        throw InvalidConfig("detector needs at least one scale");
    }
    for (double s : cfg.scales) {
        if (!(s > 0.0) || !std::isfinite(s)) {
            throw InvalidConfig("detector scales must be positive");
        }
    }
    if (!(cfg.score_threshold > 0.0 && cfg.score_threshold < 1.0)) {
        throw InvalidConfig("score_threshold must lie in (0, 1)");
    }
    if (!(cfg.nms_iou > 0.0 && cfg.nms_iou <= 1.0)) {
        throw InvalidConfig("nms_iou must lie in (0, 1]");
    }
    if (cfg.stride < 1) {
        throw InvalidConfig("stride must be at least 1");
    }
    if (!(cfg.color_tolerance > 0.0)) {
        throw InvalidConfig("color_tolerance must be positive");
    }
    if (!(cfg.min_contrast >= 0.0 && cfg.min_contrast <= 1.0)) {
        throw InvalidConfig("min_contrast must lie in [0, 1]");
    }
}

nlohmann::json to_json(const DetectorConfig& cfg)
{
    return {{"scales", cfg.scales},
            {"score_threshold", cfg.score_threshold},
            {"nms_iou", cfg.nms_iou},
            {"stride", cfg.stride},
            {"color_tolerance", cfg.color_tolerance},
            {"min_contrast", cfg.min_contrast}};
}

DetectorConfig detector_config_from_json(const nlohmann::json& j)
{
    static const std::set<std::string> known{"scales", "score_threshold", "nms_iou", "stride", "color_tolerance",
                                             "min_contrast"};
    if (!j.is_object()) {
        throw InvalidConfig("detector config must be an object");
    }
    DetectorConfig cfg;
    for (const auto& [key, value] : j.items()) {
        if (!known.contains(key)) {
            throw InvalidConfig("unknown key '" + key + "' in detector config");
        }
    }
    try {
        cfg.scales = j.value("scales", cfg.scales);
        cfg.score_threshold = j.value("score_threshold", cfg.score_threshold);
        cfg.nms_iou = j.value("nms_iou", cfg.nms_iou);
        cfg.stride = j.value("stride", cfg.stride);
        cfg.color_tolerance = j.value("color_tolerance", cfg.color_tolerance);
        cfg.min_contrast = j.value("min_contrast", cfg.min_contrast);
    } catch (const nlohmann::json::exception& e) {
        throw InvalidConfig(e.what());
    }
    validate(cfg);
    return cfg;
}

Rect core_rect(const Rect& r)
{
    return {r.x + r.w / 4, r.y + r.h / 4, std::max(1, r.w / 2), std::max(1, r.h / 2)};
}

// ---------------------------------------------------------------- training

Template make_template(GlyphClass cls, const Image& crop, std::string source_image, Rect source_box)
{
    Template t{cls, raster::to_grayscale(crop), raster::mean_rgb(crop, core_rect({0, 0, crop.width(), crop.height()})),
               std::move(source_image), source_box};
    const auto [lo, hi] = std::minmax_element(t.patch.pixels.begin(), t.patch.pixels.end());
    if (*lo == *hi) {
        throw DegenerateCrop("zero-variance crop from " + t.source_image);
    }
    return t;
}

TemplateSet train_templates(std::span<const spec::LabeledImage> train, const std::filesystem::path& base_dir,
                            const DetectorConfig& cfg, std::span<const GlyphClass> required)
{
    validate(cfg);
    TemplateSet ts{{}, cfg};
    for (const auto& label : train) {
        if (label.boxes.empty()) {
            continue;
        }
        const Image img = raster::read_png(base_dir / label.path);
        for (const auto& box : label.boxes) {
            ts.templates.push_back(make_template(box.cls, img.crop(box.rect), label.path, box.rect));
        }
    }
    for (GlyphClass cls : required) {
        const bool present = std::any_of(ts.templates.begin(), ts.templates.end(),
                                         [cls](const Template& t) { return t.cls == cls; });
        if (!present) {
            throw MissingClass(std::string("no training example for ") + std::string(raster::to_string(cls)));
        }
    }
    return ts;
}

namespace {

std::string template_name(std::size_t i)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "tpl_%04zu.png", i);
    return buf;
}

}  // namespace

void save_template_set(const TemplateSet& ts, const std::filesystem::path& dir)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw IoError("cannot create " + dir.string() + ": " + ec.message());
    }
    nlohmann::json entries = nlohmann::json::array();
    for (std::size_t i = 0; i < ts.templates.size(); ++i) {
        const auto& t = ts.templates[i];
        const auto name = template_name(i);
        raster::write_png(raster::gray_to_rgb(t.patch), dir / name);
        entries.push_back({{"cls", raster::to_string(t.cls)},
                           {"path", name},
                           {"mean_rgb", {t.mean_rgb.r, t.mean_rgb.g, t.mean_rgb.b}},
                           {"source_image", t.source_image},
                           {"source_box", {t.source_box.x, t.source_box.y, t.source_box.w, t.source_box.h}}});
    }
    const nlohmann::json manifest{{"config", to_json(ts.config)}, {"templates", std::move(entries)}};
    const auto text = model::canonicalize(manifest).text + "\n";
    raster::write_file(dir / kManifestFile, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

TemplateSet load_template_set(const std::filesystem::path& dir)
{
    const auto manifest_path = dir / kManifestFile;
    if (!std::filesystem::exists(manifest_path)) {
        throw MissingArtifact("template manifest " + manifest_path.string());
    }
    const auto bytes = raster::read_file(manifest_path);
    const auto j = model::parse_json(std::string(bytes.begin(), bytes.end()));
    TemplateSet ts;
    try {
        ts.config = detector_config_from_json(j.at("config"));
        for (const auto& e : j.at("templates")) {
            const auto cls = raster::glyph_class_from_string(e.at("cls").get<std::string>());
            if (!cls || !raster::is_warning(*cls)) {
                throw InvalidConfig("template class must be caution or danger");
            }
            Template t;
            t.cls = *cls;
            t.patch = raster::to_grayscale(raster::read_png(dir / e.at("path").get<std::string>()));
            const auto& m = e.at("mean_rgb");
            t.mean_rgb = {m.at(0).get<double>(), m.at(1).get<double>(), m.at(2).get<double>()};
            t.source_image = e.at("source_image").get<std::string>();
            const auto& b = e.at("source_box");
            t.source_box = {b.at(0).get<int>(), b.at(1).get<int>(), b.at(2).get<int>(), b.at(3).get<int>()};
            ts.templates.push_back(std::move(t));
        }
    } catch (const nlohmann::json::exception& e) {
        throw InvalidConfig(std::string("malformed template manifest: ") + e.what());
    }
    return ts;
}

// ---------------------------------------------------------------- scoring

double ncc_score(std::span<const double> window, std::span<const double> tpl)
{
    if (window.size() != tpl.size()) {
        throw DimensionMismatch("ncc_score on patches of different size");
    }
    if (window.empty()) {
        return 0.0;
    }
    const double n = static_cast<double>(window.size());
    double mw = 0, mt = 0;
    for (std::size_t i = 0; i < window.size(); ++i) {
        mw += window[i];
        mt += tpl[i];
    }
    mw /= n;
    mt /= n;
    double cross = 0, vw = 0, vt = 0;
    for (std::size_t i = 0; i < window.size(); ++i) {
        const double a = window[i] - mw, b = tpl[i] - mt;
        cross += a * b;
        vw += a * a;
        vt += b * b;
    }
    if (vw == 0.0 || vt == 0.0) {
        return 0.0;
    }
    return std::clamp(cross / std::sqrt(vw * vt), -1.0, 1.0);
}

double ncc_score(const GrayImage& window, const GrayImage& tpl)
{
    if (window.width != tpl.width || window.height != tpl.height) {
        throw DimensionMismatch("ncc_score on patches of different size");
    }
    const std::vector<double> a(window.pixels.begin(), window.pixels.end());
    const std::vector<double> b(tpl.pixels.begin(), tpl.pixels.end());
    return ncc_score(a, b);
}

double iou(const Rect& a, const Rect& b)
{
    const long long iw = std::min(a.right(), b.right()) - std::max(a.x, b.x);
    const long long ih = std::min(a.bottom(), b.bottom()) - std::max(a.y, b.y);
    if (iw <= 0 || ih <= 0) {
        return 0.0;
    }
    const long long inter = iw * ih;
    return static_cast<double>(inter) / static_cast<double>(a.area() + b.area() - inter);
}

namespace {

bool ranks_before(const Detection& a, const Detection& b)
{
    if (a.score != b.score) {
        return a.score > b.score;
    }
    if (a.rect.x != b.rect.x) {
        return a.rect.x < b.rect.x;
    }
    if (a.rect.y != b.rect.y) {
        return a.rect.y < b.rect.y;
    }
    if (a.rect.w != b.rect.w) {
        return a.rect.w < b.rect.w;
    }
    if (a.rect.h != b.rect.h) {
        return a.rect.h < b.rect.h;
    }
    return a.cls < b.cls;
}

}  // namespace

std::vector<Detection> nms(std::vector<Detection> dets, double iou_thr)
{
    std::stable_sort(dets.begin(), dets.end(), ranks_before);
    std::vector<Detection> kept;
    for (const auto& d : dets) {
        const bool suppressed = std::any_of(kept.begin(), kept.end(), [&](const Detection& k) {
            return k.cls == d.cls && iou(k.rect, d.rect) >= iou_thr;
        });
        if (!suppressed) {
            kept.push_back(d);
        }
    }
    return kept;
}

std::vector<double> resize_bilinear(const GrayImage& src, int w, int h)
{
    std::vector<double> out(static_cast<std::size_t>(w) * static_cast<std::size_t>(h));
    const double sx = static_cast<double>(src.width) / w, sy = static_cast<double>(src.height) / h;
    for (int y = 0; y < h; ++y) {
        const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, static_cast<double>(src.height - 1));
        const int y0 = static_cast<int>(fy);
        const int y1 = std::min(y0 + 1, src.height - 1);
        const double ay = fy - y0;
        for (int x = 0; x < w; ++x) {
            const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, static_cast<double>(src.width - 1));
            const int x0 = static_cast<int>(fx);
            const int x1 = std::min(x0 + 1, src.width - 1);
            const double ax = fx - x0;
            const double top = src.at(x0, y0) * (1 - ax) + src.at(x1, y0) * ax;
            const double bottom = src.at(x0, y1) * (1 - ax) + src.at(x1, y1) * ax;
            out[static_cast<std::size_t>(y) * w + x] = top * (1 - ay) + bottom * ay;
        }
    }
    return out;
}

std::vector<ScaledTemplate> scale_templates(const TemplateSet& ts)
{
    std::vector<ScaledTemplate> out;
    for (const auto& t : ts.templates) {
        for (double s : ts.config.scales) {
            const int w = std::max(2, static_cast<int>(std::lround(t.patch.width * s)));
            const int h = std::max(2, static_cast<int>(std::lround(t.patch.height * s)));
            ScaledTemplate st{t.cls, w, h, resize_bilinear(t.patch, w, h), 0.0, t.mean_rgb};
            double mean = 0;
            for (double v : st.centered) {
                mean += v;
            }
            mean /= static_cast<double>(st.centered.size());
            double ss = 0;
            for (auto& v : st.centered) {
                v -= mean;
                ss += v * v;
            }
            st.norm = std::sqrt(ss);
            if (st.norm > 0.0) {
                out.push_back(std::move(st));
            }
        }
    }
    return out;
}

namespace {

bool passes_gate(const std::uint64_t sums[3], std::uint64_t count, const raster::MeanRgb& m, double tol)
{
    const double n = static_cast<double>(count);
    const double dr = static_cast<double>(sums[0]) / n - m.r;
    const double dg = static_cast<double>(sums[1]) / n - m.g;
    const double db = static_cast<double>(sums[2]) / n - m.b;
    return dr * dr + dg * dg + db * db <= tol * tol;
}

/// Interleaved summed-area tables (gray, gray^2, r, g, b) with a zero first
/// row and column, so one window touches four cache lines.
struct Integrals {
    struct Cell {
        std::uint64_t sum, sq;
        std::uint32_t r, g, b, pad;
    };
    int stride = 0;
    std::vector<Cell> cells;

    Integrals(const Image& img, const GrayImage& gray) : stride(img.width() + 1)
    {
        cells.assign(static_cast<std::size_t>(stride) * static_cast<std::size_t>(img.height() + 1), Cell{});
        const auto px = img.pixels();
        for (int y = 0; y < img.height(); ++y) {
            Cell row{};
            for (int x = 0; x < img.width(); ++x) {
                const std::size_t p = static_cast<std::size_t>(y) * img.width() + x;
                const std::uint64_t v = gray.pixels[p];
                row.sum += v;
                row.sq += v * v;
                row.r += px[p * 3];
                row.g += px[p * 3 + 1];
                row.b += px[p * 3 + 2];
                const std::size_t i = static_cast<std::size_t>(y + 1) * stride + x + 1;
                const Cell& up = cells[i - stride];
                cells[i] = {up.sum + row.sum, up.sq + row.sq, up.r + row.r, up.g + row.g, up.b + row.b, 0};
            }
        }
    }

    const Cell& at(int x, int y) const { return cells[static_cast<std::size_t>(y) * stride + x]; }

    /// Gray sum and sum of squares over `r`.
    std::pair<std::uint64_t, std::uint64_t> gray(const Rect& r) const
    {
        const Cell &a = at(r.x, r.y), &b = at(r.right(), r.y), &c = at(r.x, r.bottom()), &d = at(r.right(), r.bottom());
        return {d.sum + a.sum - b.sum - c.sum, d.sq + a.sq - b.sq - c.sq};
    }

    void rgb(const Rect& r, std::uint64_t out[3]) const
    {
        const Cell &a = at(r.x, r.y), &b = at(r.right(), r.y), &c = at(r.x, r.bottom()), &d = at(r.right(), r.bottom());
        // uint32 wraparound cancels in the difference.
        out[0] = static_cast<std::uint32_t>(d.r + a.r - b.r - c.r);
        out[1] = static_cast<std::uint32_t>(d.g + a.g - b.g - c.g);
        out[2] = static_cast<std::uint32_t>(d.b + a.b - b.b - c.b);
    }
};

double dot(const double* a, const double* b, int n)
{
    double s0 = 0, s1 = 0, s2 = 0, s3 = 0;
    int i = 0;
    for (; i + 4 <= n; i += 4) {
        s0 += a[i] * b[i];
        s1 += a[i + 1] * b[i + 1];
        s2 += a[i + 2] * b[i + 2];
        s3 += a[i + 3] * b[i + 3];
    }
    for (; i < n; ++i) {
        s0 += a[i] * b[i];
    }
    return (s0 + s1) + (s2 + s3);
}

}  // namespace

std::vector<Detection> score_candidates(const Image& img, std::span<const ScaledTemplate> tpls,
                                        const DetectorConfig& cfg)
{
    const GrayImage g = raster::to_grayscale(img);
    const std::vector<double> gd(g.pixels.begin(), g.pixels.end());
    const Integrals in(img, g);

    // Templates of equal size share the window statistics.
    std::map<std::pair<int, int>, std::vector<std::size_t>> by_size;
    for (std::size_t j = 0; j < tpls.size(); ++j) {
        if (tpls[j].w <= img.width() && tpls[j].h <= img.height()) {
            by_size[{tpls[j].w, tpls[j].h}].push_back(j);
        }
    }
    const std::vector groups(by_size.begin(), by_size.end());
    std::vector<std::vector<Detection>> per_job(tpls.size());
    const int n_groups = static_cast<int>(groups.size());

#pragma omp parallel for schedule(dynamic)
    for (int gi = 0; gi < n_groups; ++gi) {
        const auto& [size, members] = groups[static_cast<std::size_t>(gi)];
        const auto [w, h] = size;
        const double n = static_cast<double>(w) * h;
        const auto n_int = static_cast<std::uint64_t>(w) * static_cast<std::uint64_t>(h);
        const Rect core0 = core_rect({0, 0, w, h});
        const auto core_n = static_cast<std::uint64_t>(core0.area());
        // var_w >= c^2 var_t, with var_w = var_n2 / N^2 and var_t = norm^2 / N.
        std::vector<double> min_var_n2;
        for (std::size_t j : members) {
            min_var_n2.push_back(cfg.min_contrast * cfg.min_contrast * tpls[j].norm * tpls[j].norm * n);
        }
        const double group_min = *std::min_element(min_var_n2.begin(), min_var_n2.end());
        for (int y = 0; y + h <= img.height(); y += cfg.stride) {
            for (int x = 0; x + w <= img.width(); x += cfg.stride) {
                const Rect win{x, y, w, h};
                const auto [s, sq] = in.gray(win);
                const std::uint64_t var_n2 = n_int * sq - s * s;  // N^2 * variance, exact
                if (static_cast<double>(var_n2) < group_min) {
                    continue;
                }
                std::uint64_t sums[3];
                in.rgb({x + core0.x, y + core0.y, core0.w, core0.h}, sums);
                for (std::size_t m = 0; m < members.size(); ++m) {
                    const auto& t = tpls[members[m]];
                    if (static_cast<double>(var_n2) < min_var_n2[m] ||
                        !passes_gate(sums, core_n, t.mean_rgb, cfg.color_tolerance)) {
                        continue;
                    }
                    double score = 0.0;
                    if (var_n2 != 0) {
                        double num = 0.0;
                        for (int yy = 0; yy < h; ++yy) {
                            num += dot(&gd[static_cast<std::size_t>(y + yy) * g.width + x],
                                       &t.centered[static_cast<std::size_t>(yy) * w], w);
                        }
                        score = std::clamp(num / (std::sqrt(static_cast<double>(var_n2) / n) * t.norm), -1.0, 1.0);
                    }
                    if (score >= cfg.score_threshold) {
                        per_job[members[m]].push_back({t.cls, win, score});
                    }
                }
            }
        }
    }

    std::vector<Detection> all;
    for (auto& v : per_job) {
        all.insert(all.end(), v.begin(), v.end());
    }
    return all;
}

std::vector<Detection> score_candidates_reference(const Image& img, std::span<const ScaledTemplate> tpls,
                                                  const DetectorConfig& cfg)
{
    const GrayImage g = raster::to_grayscale(img);
    std::vector<Detection> all;
    for (const auto& t : tpls) {
        // Centered values suffice: ncc ignores the template mean.
        const std::span<const double> tv(t.centered);
        const Rect core0 = core_rect({0, 0, t.w, t.h});
        for (int y = 0; y + t.h <= img.height(); y += cfg.stride) {
            for (int x = 0; x + t.w <= img.width(); x += cfg.stride) {
                std::uint64_t sums[3] = {0, 0, 0};
                for (int yy = 0; yy < core0.h; ++yy) {
                    for (int xx = 0; xx < core0.w; ++xx) {
                        const auto c = img.at(x + core0.x + xx, y + core0.y + yy);
                        sums[0] += c.r;
                        sums[1] += c.g;
                        sums[2] += c.b;
                    }
                }
                if (!passes_gate(sums, static_cast<std::uint64_t>(core0.area()), t.mean_rgb, cfg.color_tolerance)) {
                    continue;
                }
                std::vector<double> window;
                window.reserve(tv.size());
                for (int yy = 0; yy < t.h; ++yy) {
                    for (int xx = 0; xx < t.w; ++xx) {
                        window.push_back(g.at(x + xx, y + yy));
                    }
                }
                double mean = 0, var_w = 0;
                for (double v : window) {
                    mean += v;
                }
                mean /= static_cast<double>(window.size());
                for (double v : window) {
                    var_w += (v - mean) * (v - mean);
                }
                if (var_w < cfg.min_contrast * cfg.min_contrast * t.norm * t.norm) {
                    continue;
                }
                const double score = ncc_score(window, tv);
                if (score >= cfg.score_threshold) {
                    all.push_back({t.cls, {x, y, t.w, t.h}, score});
                }
            }
        }
    }
    return all;
}

Detector::Detector(TemplateSet ts) : ts_(std::move(ts)), scaled_(scale_templates(ts_)) {}

std::vector<Detection> Detector::detect(const Image& img) const
{
    return nms(score_candidates(img, scaled_, ts_.config), ts_.config.nms_iou);
}

std::vector<Detection> detect(const Image& img, const TemplateSet& ts)
{
    return Detector(ts).detect(img);
}

nlohmann::json to_json(const Detection& d)
{
    return {{"cls", raster::to_string(d.cls)},
            {"x", d.rect.x},
            {"y", d.rect.y},
            {"w", d.rect.w},
            {"h", d.rect.h},
            {"score", d.score}};
}

}  // namespace awareness::detect
