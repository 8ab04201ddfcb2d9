#include "heprep/net.hpp"

#include "heprep/error.hpp"
#include "heprep/text.hpp"

#include <iostream>

namespace heprep::net {

namespace asio = boost::asio;
using tcp = asio::ip::tcp;

Endpoint parse_endpoint(std::string_view text, std::uint16_t default_port)
{
    Endpoint ep;
    std::string_view port_text;
    if (!text.empty() && text.front() == '[') {
        const auto close = text.find(']');
        if (close == std::string_view::npos)
            throw ConfigError("malformed address '" + std::string(text) + "'");
        ep.host = std::string(text.substr(1, close - 1));
        const auto rest = text.substr(close + 1);
        if (!rest.empty()) {
            if (rest.front() != ':')
                throw ConfigError("malformed address '" + std::string(text) + "'");
            port_text = rest.substr(1);
        }
    } else {
        const auto colon = text.rfind(':');
        if (colon == std::string_view::npos) {
            ep.host = std::string(text);
        } else {
            ep.host = std::string(text.substr(0, colon));
            port_text = text.substr(colon + 1);
            if (port_text.empty())
                throw ConfigError("missing port in '" + std::string(text) + "'");
        }
    }
    if (ep.host.empty())
        throw ConfigError("missing host in '" + std::string(text) + "'");
    ep.port = default_port;
    if (!port_text.empty()) {
        const auto port = text::parse_int(port_text);
        if (!port || *port < 0 || *port > 65535)
            throw ConfigError("invalid port in '" + std::string(text) + "'");
        ep.port = static_cast<std::uint16_t>(*port);
    }
    return ep;
}

// ------------------------------------------------------------------ IoPool

IoPool::IoPool(std::size_t threads) : thread_count_(threads), work_(asio::make_work_guard(io_)) {}

IoPool::~IoPool()
{
    stop();
}

void IoPool::start()
{
    for (std::size_t i = 0; i < thread_count_; ++i)
        threads_.emplace_back([this] { io_.run(); });
}

void IoPool::stop()
{
    work_.reset();
    io_.stop();
    for (auto& t : threads_)
        if (t.joinable())
            t.join();
    threads_.clear();
}

// --------------------------------------------------------- FrameConnection

FrameConnection::FrameConnection(tcp::socket socket, OnMessage on_message, OnClose on_close)
    : socket_(std::move(socket)), strand_(socket_.get_executor()), on_message_(std::move(on_message)),
      on_close_(std::move(on_close))
{
}

void FrameConnection::start()
{
    asio::dispatch(strand_, [self = shared_from_this()] { self->read_header(); });
}

void FrameConnection::read_header()
{
    asio::async_read(socket_, asio::buffer(header_, 4),
                     asio::bind_executor(strand_, [self = shared_from_this()](boost::system::error_code ec, std::size_t) {
                         if (ec)
                             return self->close();
                         const std::uint32_t length = read_length_prefix(self->header_);
                         if (length > max_frame_size)
                             return self->fail("frame length " + std::to_string(length) + " exceeds limit");
                         self->read_body(length);
                     }));
}

void FrameConnection::read_body(std::uint32_t length)
{
    body_.assign(length, '\0');
    asio::async_read(socket_, asio::buffer(body_),
                     asio::bind_executor(strand_, [self = shared_from_this()](boost::system::error_code ec, std::size_t) {
                         if (ec)
                             return self->close();
                         WireMessage msg;
                         try {
                             msg = decode_body(self->body_);
                         } catch (const FrameError& e) {
                             return self->fail(e.what());
                         } catch (const Error& e) {
                             // Well-formed frame with a bad message: answer and keep going.
                             std::int64_t id = 0;
                             const auto j = nlohmann::json::parse(self->body_, nullptr, false);
                             if (j.is_object() && j.contains("id") && j["id"].is_number_integer())
                                 id = j["id"].get<std::int64_t>();
                             self->send(make_error(id, e.code(), e.what()));
                             return self->read_header();
                         }
                         if (self->on_message_) {
                             const std::int64_t id = msg.id;
                             try {
                                 self->on_message_(self, std::move(msg));
                             } catch (const std::exception& e) {
                                 self->send(make_error(id, "internal", e.what()));
                             }
                         }
                         self->read_header();
                     }));
}

void FrameConnection::send(const WireMessage& msg)
{
    std::string frame;
    try {
        frame = encode_frame(msg);
    } catch (const Error& e) {
        frame = encode_frame(make_error(msg.id, "internal", e.what()));
    }
    asio::post(strand_, [self = shared_from_this(), frame = std::move(frame)]() mutable {
        if (self->closed_)
            return;
        self->outbox_.push_back(std::move(frame));
        if (self->outbox_.size() == 1)
            self->write_next();
    });
}

void FrameConnection::write_next()
{
    asio::async_write(socket_, asio::buffer(outbox_.front()),
                      asio::bind_executor(strand_, [self = shared_from_this()](boost::system::error_code ec, std::size_t) {
                          if (ec || self->closed_)
                              return self->close();
                          self->outbox_.pop_front();
                          if (!self->outbox_.empty())
                              self->write_next();
                      }));
}

void FrameConnection::fail(const std::string& why)
{
    std::cerr << "heprep: closing connection: " << why << '\n';
    close();
}

void FrameConnection::close()
{
    asio::dispatch(strand_, [self = shared_from_this()] {
        if (self->closed_)
            return;
        self->closed_ = true;
        boost::system::error_code ignored;
        self->socket_.shutdown(tcp::socket::shutdown_both, ignored);
        self->socket_.close(ignored);
        if (self->on_close_)
            self->on_close_(self);
    });
}

// ----------------------------------------------------------- FrameListener

tcp::acceptor bind_acceptor(asio::io_context& io, const Endpoint& bind)
{
    boost::system::error_code ec;
    tcp::resolver resolver(io);
    const auto results = resolver.resolve(bind.host, std::to_string(bind.port), ec);
    if (ec || results.empty())
        throw StartupError("cannot resolve bind address '" + bind.host + "': " + ec.message());
    const tcp::endpoint endpoint = *results.begin();
    tcp::acceptor acceptor(io);
    acceptor.open(endpoint.protocol(), ec);
    if (!ec)
        acceptor.set_option(asio::socket_base::reuse_address(true), ec);
    if (!ec)
        acceptor.bind(endpoint, ec);
    if (!ec)
        acceptor.listen(asio::socket_base::max_listen_connections, ec);
    if (ec)
        throw StartupError("cannot listen on " + bind.host + ":" + std::to_string(bind.port) + ": " + ec.message());
    return acceptor;
}

FrameListener::FrameListener(asio::io_context& io, const Endpoint& bind, FrameConnection::OnMessage on_message,
                             FrameConnection::OnClose on_close, FrameConnection::OnClose on_open)
    : acceptor_(bind_acceptor(io, bind)), on_message_(std::move(on_message)), on_close_(std::move(on_close)),
      on_open_(std::move(on_open))
{
}

void FrameListener::start()
{
    accept_next();
}

void FrameListener::stop()
{
    asio::post(acceptor_.get_executor(), [this] {
        boost::system::error_code ignored;
        acceptor_.close(ignored);
    });
    std::lock_guard lock(mutex_);
    for (auto& weak : connections_)
        if (auto c = weak.lock())
            c->close();
    connections_.clear();
}

std::uint16_t FrameListener::port() const
{
    return acceptor_.local_endpoint().port();
}

void FrameListener::accept_next()
{
    acceptor_.async_accept(asio::make_strand(acceptor_.get_executor()),
                           [this](boost::system::error_code ec, tcp::socket socket) {
                               if (ec == asio::error::operation_aborted || !acceptor_.is_open())
                                   return;
                               if (!ec) {
                                   auto conn = std::make_shared<FrameConnection>(std::move(socket), on_message_,
                                                                                 on_close_);
                                   {
                                       std::lock_guard lock(mutex_);
                                       std::erase_if(connections_, [](const auto& w) { return w.expired(); });
                                       connections_.push_back(conn);
                                   }
                                   if (on_open_)
                                       on_open_(conn);
                                   conn->start();
                               }
                               accept_next();
                           });
}

// ------------------------------------------------------------- FrameClient

namespace {

template <typename Op>
void run_with_timeout(asio::io_context& io, tcp::socket& socket, std::chrono::milliseconds timeout, Op&& op,
                      boost::system::error_code& ec)
{
    bool done = false;
    op([&](boost::system::error_code e, auto&&...) {
        ec = e;
        done = true;
    });
    io.restart();
    io.run_for(timeout);
    if (!done) {
        boost::system::error_code ignored;
        socket.close(ignored);
        io.restart();
        io.run();
        ec = asio::error::timed_out;
    }
}

} // namespace

FrameClient::FrameClient(const Endpoint& server, std::chrono::milliseconds timeout) : socket_(io_), timeout_(timeout)
{
    boost::system::error_code ec;
    tcp::resolver resolver(io_);
    const auto results = resolver.resolve(server.host, std::to_string(server.port), ec);
    if (ec)
        throw OpenError("cannot resolve " + server.host + ": " + ec.message());
    run_with_timeout(io_, socket_, timeout_,
                     [&](auto handler) { asio::async_connect(socket_, results, handler); }, ec);
    if (ec)
        throw OpenError("cannot connect to " + server.host + ":" + std::to_string(server.port) + ": " + ec.message());
}

void FrameClient::send_raw(std::string_view bytes)
{
    boost::system::error_code ec;
    run_with_timeout(io_, socket_, timeout_,
                     [&](auto handler) { asio::async_write(socket_, asio::buffer(bytes.data(), bytes.size()), handler); },
                     ec);
    if (ec)
        throw TransportError("send failed: " + ec.message());
}

WireMessage FrameClient::read_message()
{
    unsigned char header[4];
    boost::system::error_code ec;
    run_with_timeout(io_, socket_, timeout_,
                     [&](auto handler) { asio::async_read(socket_, asio::buffer(header, 4), handler); }, ec);
    if (ec)
        throw TransportError("connection lost: " + ec.message());
    const std::uint32_t length = read_length_prefix(header);
    if (length > max_frame_size)
        throw TransportError("server sent an oversize frame");
    std::string body(length, '\0');
    run_with_timeout(io_, socket_, timeout_,
                     [&](auto handler) { asio::async_read(socket_, asio::buffer(body), handler); }, ec);
    if (ec)
        throw TransportError("connection lost: " + ec.message());
    try {
        return decode_body(body);
    } catch (const Error& e) {
        throw TransportError(std::string("malformed message from server: ") + e.what());
    }
}

WireMessage FrameClient::call(const std::string& method, nlohmann::json payload)
{
    const std::int64_t id = next_id_++;
    send_raw(encode_frame(make_request(id, method, std::move(payload))));
    while (true) {
        WireMessage msg = read_message();
        if (msg.kind == MessageKind::Notification) {
            notifications_.push_back(std::move(msg));
            continue;
        }
        if (msg.id == id)
            return msg;
    }
}

WireMessage FrameClient::next_notification()
{
    while (notifications_.empty()) {
        WireMessage msg = read_message();
        if (msg.kind == MessageKind::Notification)
            notifications_.push_back(std::move(msg));
    }
    WireMessage msg = std::move(notifications_.front());
    notifications_.pop_front();
    return msg;
}

} // namespace heprep::net
