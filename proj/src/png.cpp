#include "heprep/error.hpp"
#include "heprep/export.hpp"

#include <png.h>

#include <memory>

namespace heprep {

std::string encode_png(const RasterImage& img)
{
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(img.width);
    image.height = static_cast<png_uint_32>(img.height);
    image.format = PNG_FORMAT_RGBA;

    const png_int_32 stride = 4 * img.width;
    png_alloc_size_t size = 0;
    if (!png_image_write_to_memory(&image, nullptr, &size, 0, img.pixels.data(), stride, nullptr))
        throw FormatError(std::string("png: ") + image.message);
    std::string out(size, '\0');
    if (!png_image_write_to_memory(&image, out.data(), &size, 0, img.pixels.data(), stride, nullptr))
        throw FormatError(std::string("png: ") + image.message);
    out.resize(size);
    return out;
}

RasterImage decode_png(std::string_view bytes)
{
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size()))
        throw FormatError(std::string("png: ") + image.message);
    std::unique_ptr<png_image, void (*)(png_imagep)> guard(&image, png_image_free);
    image.format = PNG_FORMAT_RGBA;
    RasterImage out(static_cast<int>(image.width), static_cast<int>(image.height));
    if (!png_image_finish_read(&image, nullptr, out.pixels.data(), 4 * out.width, nullptr))
        throw FormatError(std::string("png: ") + image.message);
    return out;
}

} // namespace heprep
