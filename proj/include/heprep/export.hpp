#pragma once

#include "heprep/camera.hpp"
#include "heprep/model.hpp"
#include "heprep/scene.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace heprep {

/// Row-major RGBA8; pixels.size() == 4 * width * height.
struct RasterImage
{
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;

    RasterImage() = default;
    RasterImage(int w, int h) : width(w), height(h), pixels(static_cast<std::size_t>(4) * w * h) {}

    bool operator==(const RasterImage&) const = default;
};

struct Rgba8
{
    std::uint8_t r, g, b, a;

    bool operator==(const Rgba8&) const = default;
};

/// Each component scaled by 255 and rounded.
Rgba8 to_rgba8(const Color& c);

Rgba8 pixel_at(const RasterImage& img, int x, int y);

/// Painter's rendering of already culled and sorted primitives. Segments
/// are near/far clipped, viewport clipped and drawn with Bresenham; markers
/// are filled squares. Later primitives overwrite earlier ones; alpha is
/// ignored.
RasterImage render_raster(const Camera& cam, std::span<const Primitive> ordered, const Color& background);

std::string encode_png(const RasterImage& img);

/// Throws FormatError on anything that is not a decodable PNG.
RasterImage decode_png(std::string_view bytes);

enum class VectorFormat { PostScript, Svg };

/// Throws FormatError for names other than "ps"/"postscript"/"svg".
VectorFormat vector_format_from_name(std::string_view name);

std::string export_vector(const Camera& cam, std::span<const Primitive> ordered, VectorFormat format);

enum class OutputFormat { Png, PostScript, Svg };

/// "png", "ps" (or "postscript"), "svg"; throws FormatError otherwise.
OutputFormat output_format_from_name(std::string_view name);
std::string_view output_format_name(OutputFormat f);

struct SceneOutput
{
    std::string bytes;
    std::size_t flattened = 0; // primitives produced by flatten
    std::size_t drawn = 0;     // primitives left after culling
};

/// Cull, depth sort and export of already flattened primitives.
SceneOutput render_primitives(std::span<const Primitive> prims, const Camera& cam,
                              std::span<const std::string> layer_order, const Color& background, OutputFormat format);

/// The whole batch pipeline: flatten, cull, depth sort, export. An empty
/// `layer_order` falls back to the document's own layer order.
SceneOutput render_document(const Document& doc, const Camera& cam, std::span<const std::string> layer_order,
                            const Color& background, OutputFormat format);

} // namespace heprep
