#pragma once

#include "heprep/model.hpp"

#include <cstddef>
#include <string>
#include <string_view>

namespace heprep::xmlio {

inline constexpr std::string_view format_version = "heprep-kit/1";

/// Parses the heprep XML grammar; gzip input (leading 0x1F 0x8B) is
/// decompressed first. Throws ParseError, CompressionError or SchemaError.
/// The returned document always validates clean.
Document parse(std::string_view bytes);

/// Canonical, deterministic serialization. Throws ValidationError when
/// validate(doc) is not empty.
std::string serialize(const Document& doc, bool compress);

struct FileStats
{
    std::size_t byte_size = 0;
    bool compressed = false;
    std::size_t type_count = 0;
    std::size_t instance_count = 0;
    std::size_t point_count = 0;

    bool operator==(const FileStats&) const = default;
};

FileStats stats(std::string_view bytes);

} // namespace heprep::xmlio
