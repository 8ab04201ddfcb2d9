#pragma once

#include "heprep/net.hpp"
#include "heprep/wire.hpp"

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

namespace heprep {

inline constexpr std::uint16_t default_event_port = 7544;

/// The events a server exposes: *.heprep and *.heprep.gz files of one
/// directory in lexicographic filename order, scanned once.
class EventCatalog
{
public:
    /// Throws StartupError when the directory cannot be read.
    static EventCatalog scan(const std::filesystem::path& directory);

    const std::vector<std::filesystem::path>& files() const { return files_; }
    std::size_t size() const { return files_.size(); }

private:
    std::vector<std::filesystem::path> files_;
};

/// Stateless request handler. Methods: hello, list_events, get_event.
WireMessage handle(const EventCatalog& catalog, const WireMessage& request);

class EventServer
{
public:
    /// Scans the directory and binds; throws StartupError on failure.
    EventServer(const std::filesystem::path& directory, const net::Endpoint& bind, std::size_t threads = 2);
    ~EventServer();

    void start();
    void stop();

    std::uint16_t port() const;
    const EventCatalog& catalog() const { return *catalog_; }

private:
    std::shared_ptr<const EventCatalog> catalog_;
    net::IoPool pool_;
    std::unique_ptr<net::FrameListener> listener_;
};

} // namespace heprep
