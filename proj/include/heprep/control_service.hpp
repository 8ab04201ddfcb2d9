#pragma once

#include "heprep/control.hpp"
#include "heprep/net.hpp"

#include <filesystem>
#include <memory>
#include <optional>

namespace heprep {

inline constexpr std::uint16_t default_control_port = 7545;

/// Tracks attached clients and fans notifications out to them.
class ClientHub
{
public:
    void attach(const std::shared_ptr<net::MessageSink>& sink);
    void detach(const net::MessageSink* sink);
    void broadcast(const WireMessage& msg);
    std::size_t size();

private:
    std::mutex mutex_;
    std::vector<std::weak_ptr<net::MessageSink>> sinks_;
};

/// Serves a Controller over HTTP: WebSocket at /ws, static files under
/// /ui/, the current render of a view at /render/{viewId}.png, and
/// optionally the length-prefixed TCP framing on a second port.
class ControlService
{
public:
    /// Binds immediately; throws StartupError when an address is unusable.
    ControlService(std::shared_ptr<Controller> controller, const net::Endpoint& http_bind,
                   std::filesystem::path ui_dir, std::optional<net::Endpoint> tcp_bind = std::nullopt,
                   std::size_t threads = 4);
    ~ControlService();

    void start();
    void stop();

    std::uint16_t port() const;
    std::optional<std::uint16_t> tcp_port() const;

private:
    struct HttpListener;

    std::shared_ptr<Controller> controller_;
    std::shared_ptr<ClientHub> hub_;
    net::IoPool pool_;
    std::unique_ptr<HttpListener> http_;
    std::unique_ptr<net::FrameListener> tcp_;
};

} // namespace heprep
