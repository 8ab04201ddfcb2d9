#include "heprep/gzip.hpp"

#include "heprep/error.hpp"

#include <zlib.h>

#include <memory>

namespace heprep::gzip {

namespace {

constexpr int gzip_window_bits = 15 + 16;

} // namespace

bool is_gzip(std::string_view bytes)
{
    return bytes.size() >= 2 && static_cast<unsigned char>(bytes[0]) == 0x1F &&
           static_cast<unsigned char>(bytes[1]) == 0x8B;
}

std::string compress(std::string_view raw)
{
    z_stream zs{};
    if (deflateInit2(&zs, 6, Z_DEFLATED, gzip_window_bits, 8, Z_DEFAULT_STRATEGY) != Z_OK)
        throw CompressionError("deflateInit2 failed");
    std::unique_ptr<z_stream, int (*)(z_stream*)> guard(&zs, deflateEnd);

    std::string out;
    out.resize(deflateBound(&zs, static_cast<uLong>(raw.size())) + 32);
    zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(raw.data()));
    zs.avail_in = static_cast<uInt>(raw.size());
    zs.next_out = reinterpret_cast<Bytef*>(out.data());
    zs.avail_out = static_cast<uInt>(out.size());
    if (deflate(&zs, Z_FINISH) != Z_STREAM_END)
        throw CompressionError("deflate did not finish");
    out.resize(zs.total_out);
    return out;
}

std::string decompress(std::string_view compressed, std::size_t max_size)
{
    z_stream zs{};
    if (inflateInit2(&zs, gzip_window_bits) != Z_OK)
        throw CompressionError("inflateInit2 failed");
    std::unique_ptr<z_stream, int (*)(z_stream*)> guard(&zs, inflateEnd);

    zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(compressed.data()));
    zs.avail_in = static_cast<uInt>(compressed.size());

    std::string out;
    char chunk[1 << 16];
    int rc = Z_OK;
    while (rc != Z_STREAM_END) {
        zs.next_out = reinterpret_cast<Bytef*>(chunk);
        zs.avail_out = sizeof(chunk);
        rc = inflate(&zs, Z_NO_FLUSH);
        if (rc != Z_OK && rc != Z_STREAM_END) {
            const char* msg = zs.msg ? zs.msg : "corrupt stream";
            throw CompressionError(std::string("gzip: ") + (rc == Z_BUF_ERROR ? "truncated stream" : msg));
        }
        const std::size_t produced = sizeof(chunk) - zs.avail_out;
        if (out.size() + produced > max_size)
            throw CompressionError("gzip: decompressed size exceeds limit");
        out.append(chunk, produced);
        if (rc == Z_OK && produced == 0 && zs.avail_in == 0)
            throw CompressionError("gzip: truncated stream");
    }
    if (zs.avail_in != 0)
        throw CompressionError("gzip: trailing data after stream end");
    return out;
}

} // namespace heprep::gzip
