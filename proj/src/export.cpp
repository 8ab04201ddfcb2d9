#include "heprep/export.hpp"

#include "heprep/error.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace heprep {

Rgba8 to_rgba8(const Color& c)
{
    const auto q = [](double v) {
        return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
    };
    return {q(c.r), q(c.g), q(c.b), q(c.a)};
}

Rgba8 pixel_at(const RasterImage& img, int x, int y)
{
    const std::size_t i = 4 * (static_cast<std::size_t>(y) * img.width + x);
    return {img.pixels[i], img.pixels[i + 1], img.pixels[i + 2], img.pixels[i + 3]};
}

namespace {

class Canvas
{
public:
    explicit Canvas(RasterImage& img) : img_(img) {}

    void fill(Rgba8 c)
    {
        for (std::size_t i = 0; i < img_.pixels.size(); i += 4)
            put_index(i, c);
    }

    void set(int x, int y, Rgba8 c)
    {
        if (x < 0 || y < 0 || x >= img_.width || y >= img_.height)
            return;
        put_index(4 * (static_cast<std::size_t>(y) * img_.width + x), c);
    }

    /// Square of `size` pixels whose center pixel is (cx, cy).
    void square(int cx, int cy, int size, Rgba8 c)
    {
        const int x0 = cx - (size - 1) / 2;
        const int y0 = cy - (size - 1) / 2;
        for (int y = y0; y < y0 + size; ++y)
            for (int x = x0; x < x0 + size; ++x)
                set(x, y, c);
    }

    /// Integer Bresenham from (x0,y0) to (x1,y1), both endpoints included.
    void line(int x0, int y0, int x1, int y1, int brush, Rgba8 c)
    {
        const int dx = std::abs(x1 - x0);
        const int dy = -std::abs(y1 - y0);
        const int sx = x0 < x1 ? 1 : -1;
        const int sy = y0 < y1 ? 1 : -1;
        int err = dx + dy;
        while (true) {
            if (brush <= 1)
                set(x0, y0, c);
            else
                square(x0, y0, brush, c);
            if (x0 == x1 && y0 == y1)
                break;
            const int e2 = 2 * err;
            if (e2 >= dy) {
                err += dy;
                x0 += sx;
            }
            if (e2 <= dx) {
                err += dx;
                y0 += sy;
            }
        }
    }

private:
    void put_index(std::size_t i, Rgba8 c)
    {
        img_.pixels[i] = c.r;
        img_.pixels[i + 1] = c.g;
        img_.pixels[i + 2] = c.b;
        img_.pixels[i + 3] = c.a;
    }

    RasterImage& img_;
};

int to_pixel(double v, int limit)
{
    return std::clamp(static_cast<int>(std::lround(v)), 0, limit - 1);
}

bool inside_viewport(const Camera& cam, const ScreenPoint& p)
{
    return p.x >= 0.0 && p.x <= cam.width && p.y >= 0.0 && p.y <= cam.height;
}

// Fixed three decimals, never "-0.000".
std::string num(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    std::string s(buf);
    if (s == "-0.000")
        s = "0.000";
    return s;
}

struct VectorPiece
{
    std::vector<ScreenPoint> points;
};

// Visible polyline pieces of a stroked primitive; consecutive clipped
// segments that share an endpoint are merged into one piece.
std::vector<VectorPiece> stroke_pieces(const Camera& cam, const ViewFrame<double>& frame, const Primitive& prim)
{
    std::vector<VectorPiece> pieces;
    for (const auto& seg : projected_segments(cam, frame, prim)) {
        const auto clipped = clip_to_viewport(cam, seg);
        if (!clipped)
            continue;
        if (!pieces.empty()) {
            const ScreenPoint& last = pieces.back().points.back();
            if (last.x == clipped->a.x && last.y == clipped->a.y) {
                pieces.back().points.push_back(clipped->b);
                continue;
            }
        }
        pieces.push_back({{clipped->a, clipped->b}});
    }
    return pieces;
}

std::vector<ScreenPoint> visible_markers(const Camera& cam, const ViewFrame<double>& frame, const Primitive& prim)
{
    std::vector<ScreenPoint> out;
    for (const auto& seg : projected_segments(cam, frame, prim))
        if (inside_viewport(cam, seg.a))
            out.push_back(seg.a);
    return out;
}

struct MarkerBox
{
    double x0, y0, x1, y1;
};

// Marker square centered on the projected point, cut to the viewport.
MarkerBox marker_box(const Camera& cam, const ScreenPoint& m, double marker_size)
{
    const double half = std::max(1.0, marker_size) / 2;
    return {std::max(0.0, m.x - half), std::max(0.0, m.y - half), std::min<double>(cam.width, m.x + half),
            std::min<double>(cam.height, m.y + half)};
}

std::string svg_color(const Color& c)
{
    const Rgba8 q = to_rgba8(c);
    char buf[16];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", q.r, q.g, q.b);
    return buf;
}

std::string ps_color(const Color& c)
{
    const Rgba8 q = to_rgba8(c);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4f %.4f %.4f", q.r / 255.0, q.g / 255.0, q.b / 255.0);
    return buf;
}

std::string export_svg(const Camera& cam, std::span<const Primitive> ordered)
{
    const ViewFrame<double> frame(cam);
    const std::string w = std::to_string(cam.width);
    const std::string h = std::to_string(cam.height);
    std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"no\"?>\n"
                      "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" +
                      w + "\" height=\"" + h + "\" viewBox=\"0 0 " + w + " " + h + "\">\n";
    for (const auto& prim : ordered) {
        if (prim.shape == Shape::Marker) {
            const auto markers = visible_markers(cam, frame, prim);
            if (markers.empty())
                continue;
            std::string d;
            for (const auto& m : markers) {
                const MarkerBox b = marker_box(cam, m, prim.style.marker_size);
                if (!d.empty())
                    d += ' ';
                d += "M" + num(b.x0) + " " + num(b.y0) + " L" + num(b.x1) + " " + num(b.y0) + " L" + num(b.x1) +
                     " " + num(b.y1) + " L" + num(b.x0) + " " + num(b.y1) + " Z";
            }
            out += "<path d=\"" + d + "\" fill=\"" + svg_color(prim.style.color) + "\" stroke=\"none\"/>\n";
            continue;
        }
        const auto pieces = stroke_pieces(cam, frame, prim);
        if (pieces.empty())
            continue;
        std::string d;
        for (const auto& piece : pieces) {
            for (std::size_t i = 0; i < piece.points.size(); ++i) {
                if (!d.empty())
                    d += ' ';
                d += (i == 0 ? "M" : "L") + num(piece.points[i].x) + " " + num(piece.points[i].y);
            }
        }
        out += "<path d=\"" + d + "\" fill=\"none\" stroke=\"" + svg_color(prim.style.color) +
               "\" stroke-width=\"" + num(prim.style.line_width) + "\"/>\n";
    }
    out += "</svg>\n";
    return out;
}

std::string export_postscript(const Camera& cam, std::span<const Primitive> ordered)
{
    const ViewFrame<double> frame(cam);
    const double height = cam.height;
    std::string out = "%!PS-Adobe-3.0 EPSF-3.0\n"
                      "%%Creator: heprep-kit\n"
                      "%%BoundingBox: 0 0 " +
                      std::to_string(cam.width) + " " + std::to_string(cam.height) +
                      "\n"
                      "%%LanguageLevel: 2\n"
                      "%%Pages: 1\n"
                      "%%EndComments\n"
                      "%%BeginProlog\n"
                      "/m { moveto } bind def\n"
                      "/l { lineto } bind def\n"
                      "/c { setrgbcolor } bind def\n"
                      "/w { setlinewidth } bind def\n"
                      "/s { stroke } bind def\n"
                      "/sq { rectfill } bind def\n"
                      "%%EndProlog\n"
                      "%%Page: 1 1\n"
                      "0 setlinejoin 0 setlinecap\n";
    for (const auto& prim : ordered) {
        if (prim.shape == Shape::Marker) {
            const auto markers = visible_markers(cam, frame, prim);
            if (markers.empty())
                continue;
            out += ps_color(prim.style.color) + " c\n";
            for (const auto& m : markers) {
                const MarkerBox b = marker_box(cam, m, prim.style.marker_size);
                out += num(b.x0) + " " + num(height - b.y1) + " " + num(b.x1 - b.x0) + " " + num(b.y1 - b.y0) +
                       " sq\n";
            }
            continue;
        }
        const auto pieces = stroke_pieces(cam, frame, prim);
        if (pieces.empty())
            continue;
        out += ps_color(prim.style.color) + " c " + num(prim.style.line_width) + " w newpath\n";
        for (const auto& piece : pieces)
            for (std::size_t i = 0; i < piece.points.size(); ++i)
                out += num(piece.points[i].x) + " " + num(height - piece.points[i].y) + (i == 0 ? " m\n" : " l\n");
        out += "s\n";
    }
    out += "showpage\n"
           "%%Trailer\n"
           "%%EOF\n";
    return out;
}

} // namespace

RasterImage render_raster(const Camera& cam, std::span<const Primitive> ordered, const Color& background)
{
    RasterImage img(cam.width, cam.height);
    Canvas canvas(img);
    canvas.fill(to_rgba8(background));
    const ViewFrame<double> frame(cam);

    for (const auto& prim : ordered) {
        const Rgba8 color = to_rgba8(prim.style.color);
        const auto segments = projected_segments(cam, frame, prim);
        if (prim.shape == Shape::Marker) {
            const int size = std::max(1, static_cast<int>(std::lround(prim.style.marker_size)));
            for (const auto& seg : segments)
                if (inside_viewport(cam, seg.a))
                    canvas.square(to_pixel(seg.a.x, cam.width), to_pixel(seg.a.y, cam.height), size, color);
            continue;
        }
        const int brush = static_cast<int>(std::lround(prim.style.line_width));
        for (const auto& seg : segments) {
            const auto clipped = clip_to_viewport(cam, seg);
            if (!clipped)
                continue;
            canvas.line(to_pixel(clipped->a.x, cam.width), to_pixel(clipped->a.y, cam.height),
                        to_pixel(clipped->b.x, cam.width), to_pixel(clipped->b.y, cam.height), brush, color);
        }
    }
    return img;
}

VectorFormat vector_format_from_name(std::string_view name)
{
    if (name == "ps" || name == "postscript")
        return VectorFormat::PostScript;
    if (name == "svg")
        return VectorFormat::Svg;
    throw FormatError("unknown vector format '" + std::string(name) + "'");
}

std::string export_vector(const Camera& cam, std::span<const Primitive> ordered, VectorFormat format)
{
    switch (format) {
    case VectorFormat::PostScript:
        return export_postscript(cam, ordered);
    case VectorFormat::Svg:
        return export_svg(cam, ordered);
    }
    throw FormatError("unknown vector format");
}

OutputFormat output_format_from_name(std::string_view name)
{
    if (name == "png")
        return OutputFormat::Png;
    if (name == "ps" || name == "postscript")
        return OutputFormat::PostScript;
    if (name == "svg")
        return OutputFormat::Svg;
    throw FormatError("unknown output format '" + std::string(name) + "' (expected png, ps or svg)");
}

std::string_view output_format_name(OutputFormat f)
{
    switch (f) {
    case OutputFormat::Png:
        return "png";
    case OutputFormat::PostScript:
        return "ps";
    case OutputFormat::Svg:
        return "svg";
    }
    return "png";
}

SceneOutput render_primitives(std::span<const Primitive> prims, const Camera& cam,
                              std::span<const std::string> layer_order, const Color& background, OutputFormat format)
{
    std::vector<Primitive> visible = cull(cam, prims);
    SceneOutput out;
    out.flattened = prims.size();
    out.drawn = visible.size();
    const std::vector<Primitive> ordered = depth_sort(cam, std::move(visible), layer_order);
    switch (format) {
    case OutputFormat::Png:
        out.bytes = encode_png(render_raster(cam, ordered, background));
        break;
    case OutputFormat::PostScript:
        out.bytes = export_vector(cam, ordered, VectorFormat::PostScript);
        break;
    case OutputFormat::Svg:
        out.bytes = export_vector(cam, ordered, VectorFormat::Svg);
        break;
    }
    return out;
}

SceneOutput render_document(const Document& doc, const Camera& cam, std::span<const std::string> layer_order,
                            const Color& background, OutputFormat format)
{
    const FlattenResult flat = flatten(doc);
    const auto layers = layer_order.empty() ? std::span<const std::string>(doc.layer_order) : layer_order;
    return render_primitives(flat.primitives, cam, layers, background, format);
}

} // namespace heprep
