#pragma once

#include "heprep/wire.hpp"

#include <boost/asio.hpp>

#include <chrono>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace heprep::net {

struct Endpoint
{
    std::string host;
    std::uint16_t port = 0;

    bool operator==(const Endpoint&) const = default;
};

/// "host:port" (or "[v6]:port"). A bare host gets `default_port`.
/// Throws ConfigError on malformed input.
Endpoint parse_endpoint(std::string_view text, std::uint16_t default_port);

/// io_context driven by a fixed set of threads until stop().
class IoPool
{
public:
    explicit IoPool(std::size_t threads = 2);
    ~IoPool();

    IoPool(const IoPool&) = delete;
    IoPool& operator=(const IoPool&) = delete;

    boost::asio::io_context& context() { return io_; }
    void start();
    void stop();

private:
    std::size_t thread_count_;
    boost::asio::io_context io_;
    boost::asio::executor_work_guard<boost::asio::io_context::executor_type> work_;
    std::vector<std::thread> threads_;
};

/// A peer that can receive pushed messages. Implemented by both framed
/// TCP connections and WebSocket sessions.
class MessageSink
{
public:
    virtual ~MessageSink() = default;
    virtual void send(const WireMessage& msg) = 0;
    virtual void close() = 0;
};

/// Length-prefixed frame session over TCP. Messages are handed to the
/// callback in arrival order; sends are queued and written in call order.
class FrameConnection : public MessageSink, public std::enable_shared_from_this<FrameConnection>
{
public:
    using OnMessage = std::function<void(const std::shared_ptr<FrameConnection>&, WireMessage)>;
    using OnClose = std::function<void(const std::shared_ptr<FrameConnection>&)>;

    FrameConnection(boost::asio::ip::tcp::socket socket, OnMessage on_message, OnClose on_close = {});

    void start();
    void send(const WireMessage& msg) override;
    void close() override;

private:
    void read_header();
    void read_body(std::uint32_t length);
    void write_next();
    void fail(const std::string& why);

    boost::asio::ip::tcp::socket socket_;
    boost::asio::strand<boost::asio::any_io_executor> strand_;
    OnMessage on_message_;
    OnClose on_close_;
    unsigned char header_[4] = {};
    std::string body_;
    std::deque<std::string> outbox_;
    bool closed_ = false;
};

/// Accepts TCP connections and wraps each in a FrameConnection.
class FrameListener
{
public:
    /// Binds immediately; throws StartupError when the address is unusable.
    /// `on_open` runs for each accepted connection before it starts reading.
    FrameListener(boost::asio::io_context& io, const Endpoint& bind, FrameConnection::OnMessage on_message,
                  FrameConnection::OnClose on_close = {}, FrameConnection::OnClose on_open = {});

    void start();
    void stop();
    std::uint16_t port() const;

private:
    void accept_next();

    boost::asio::ip::tcp::acceptor acceptor_;
    FrameConnection::OnMessage on_message_;
    FrameConnection::OnClose on_close_;
    FrameConnection::OnClose on_open_;
    std::mutex mutex_;
    std::vector<std::weak_ptr<FrameConnection>> connections_;
};

boost::asio::ip::tcp::acceptor bind_acceptor(boost::asio::io_context& io, const Endpoint& bind);

/// Blocking client for the framed protocol. Notifications that arrive while
/// waiting for a reply are kept and can be drained with next_notification().
class FrameClient
{
public:
    /// Throws OpenError when the server cannot be reached.
    FrameClient(const Endpoint& server, std::chrono::milliseconds timeout = std::chrono::seconds(30));

    /// Sends a request and waits for the reply or error with the same id.
    /// Throws TransportError on disconnect or timeout.
    WireMessage call(const std::string& method, nlohmann::json payload = nlohmann::json::object());

    /// Waits for the next notification.
    WireMessage next_notification();

    void send_raw(std::string_view bytes);
    WireMessage read_message();

private:
    boost::asio::io_context io_;
    boost::asio::ip::tcp::socket socket_;
    std::chrono::milliseconds timeout_;
    std::int64_t next_id_ = 1;
    std::deque<WireMessage> notifications_;
};

} // namespace heprep::net
