#pragma once

#include "heprep/model.hpp"

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

namespace heprep {

struct SourceUri
{
    std::string scheme;    // file, http, https or hep
    std::string authority; // host[:port]; empty for file
    std::string path;

    std::string to_string() const;

    bool operator==(const SourceUri&) const = default;
};

/// Accepts scheme://authority/path for the network schemes, file:///path,
/// file:path and plain filesystem paths. Throws OpenError when the scheme is
/// unknown or a network scheme has no authority.
SourceUri parse_uri(std::string_view text);

class EventSource
{
public:
    virtual ~EventSource() = default;

    virtual const SourceUri& uri() const = 0;
    virtual std::size_t count() const = 0;

    /// Throws RangeError when index >= count(), TransportError when the
    /// transfer fails. Never returns a partial document.
    virtual Document get_event(std::size_t index) = 0;
};

/// Throws OpenError for a missing file or unreachable host, TransportError
/// with the status for a non-2xx HTTP reply, and parse errors for bad data.
std::unique_ptr<EventSource> open_source(const SourceUri& uri);

struct EventCursor
{
    std::string source_id;
    std::size_t index = 0;
    std::optional<std::size_t> count;

    bool operator==(const EventCursor&) const = default;
};

/// Clamped navigation: next at the last index and prev at 0 are identities.
EventCursor next(const EventCursor& cursor);
EventCursor prev(const EventCursor& cursor);

} // namespace heprep
