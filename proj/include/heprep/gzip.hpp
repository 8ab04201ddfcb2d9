#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace heprep::gzip {

/// True when the buffer starts with the gzip magic bytes 0x1F 0x8B.
bool is_gzip(std::string_view bytes);

/// RFC 1952 container, zero mtime, deterministic for a given zlib build.
std::string compress(std::string_view raw);

/// Throws CompressionError on a corrupt or truncated stream, or when the
/// output would exceed `max_size` bytes.
std::string decompress(std::string_view compressed, std::size_t max_size = std::size_t{1} << 30);

} // namespace heprep::gzip
