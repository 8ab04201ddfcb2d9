#include "heprep/control_service.hpp"

#include "heprep/error.hpp"
#include "heprep/text.hpp"

#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include <algorithm>
#include <deque>
#include <fstream>
#include <iostream>
#include <sstream>

namespace heprep {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace fs = std::filesystem;
using tcp = asio::ip::tcp;

// --------------------------------------------------------------- ClientHub

void ClientHub::attach(const std::shared_ptr<net::MessageSink>& sink)
{
    std::lock_guard lock(mutex_);
    std::erase_if(sinks_, [](const auto& w) { return w.expired(); });
    sinks_.push_back(sink);
}

void ClientHub::detach(const net::MessageSink* sink)
{
    std::lock_guard lock(mutex_);
    std::erase_if(sinks_, [&](const auto& w) {
        const auto s = w.lock();
        return !s || s.get() == sink;
    });
}

void ClientHub::broadcast(const WireMessage& msg)
{
    std::lock_guard lock(mutex_);
    for (const auto& w : sinks_)
        if (const auto s = w.lock())
            s->send(msg);
}

std::size_t ClientHub::size()
{
    std::lock_guard lock(mutex_);
    std::erase_if(sinks_, [](const auto& w) { return w.expired(); });
    return sinks_.size();
}

namespace {

struct ServiceContext
{
    std::shared_ptr<Controller> controller;
    std::shared_ptr<ClientHub> hub;
    fs::path ui_dir;
};

/// Parses one text message and dispatches it; malformed input gets an
/// error reply carrying whatever id could be recovered.
WireMessage answer(Controller& controller, std::string_view text)
{
    WireMessage msg;
    try {
        msg = decode_body(text);
    } catch (const Error& e) {
        std::int64_t id = 0;
        const auto j = nlohmann::json::parse(text, nullptr, false);
        if (j.is_object() && j.contains("id") && j["id"].is_number_integer())
            id = j["id"].get<std::int64_t>();
        return make_error(id, "bad_request", e.what());
    }
    return controller.dispatch(msg);
}

// --------------------------------------------------------------- WsSession

class WsSession : public net::MessageSink, public std::enable_shared_from_this<WsSession>
{
public:
    WsSession(tcp::socket&& socket, std::shared_ptr<ServiceContext> ctx)
        : ws_(std::move(socket)), ctx_(std::move(ctx))
    {
    }

    void run(http::request<http::string_body> req)
    {
        ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
        ws_.text(true);
        ws_.read_message_max(max_frame_size);
        ws_.async_accept(req, [self = shared_from_this()](beast::error_code ec) {
            if (ec)
                return;
            self->ctx_->hub->attach(self);
            self->read();
        });
    }

    void send(const WireMessage& msg) override
    {
        asio::post(ws_.get_executor(), [self = shared_from_this(), text = encode_body(msg)]() mutable {
            if (self->closed_)
                return;
            self->outbox_.push_back(std::move(text));
            if (self->outbox_.size() == 1)
                self->write_next();
        });
    }

    void close() override
    {
        asio::post(ws_.get_executor(), [self = shared_from_this()] { self->shutdown(); });
    }

private:
    void read()
    {
        ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
            if (ec)
                return self->shutdown();
            const std::string text = beast::buffers_to_string(self->buffer_.data());
            self->buffer_.consume(self->buffer_.size());
            self->send(answer(*self->ctx_->controller, text));
            self->read();
        });
    }

    void write_next()
    {
        ws_.async_write(asio::buffer(outbox_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
            if (ec || self->closed_)
                return self->shutdown();
            self->outbox_.pop_front();
            if (!self->outbox_.empty())
                self->write_next();
        });
    }

    void shutdown()
    {
        if (closed_)
            return;
        closed_ = true;
        ctx_->hub->detach(this);
        beast::error_code ignored;
        beast::get_lowest_layer(ws_).socket().shutdown(tcp::socket::shutdown_both, ignored);
        beast::get_lowest_layer(ws_).socket().close(ignored);
    }

    websocket::stream<beast::tcp_stream> ws_;
    std::shared_ptr<ServiceContext> ctx_;
    beast::flat_buffer buffer_;
    std::deque<std::string> outbox_;
    bool closed_ = false;
};

// ------------------------------------------------------------- HttpSession

std::string_view mime_type(const fs::path& p)
{
    const std::string ext = p.extension().string();
    if (ext == ".html" || ext == ".htm")
        return "text/html; charset=utf-8";
    if (ext == ".js" || ext == ".mjs")
        return "text/javascript; charset=utf-8";
    if (ext == ".css")
        return "text/css; charset=utf-8";
    if (ext == ".json" || ext == ".map")
        return "application/json";
    if (ext == ".png")
        return "image/png";
    if (ext == ".svg")
        return "image/svg+xml";
    if (ext == ".wasm")
        return "application/wasm";
    return "application/octet-stream";
}

using Response = http::response<http::string_body>;

Response make_response(const http::request<http::string_body>& req, http::status status, std::string body,
                       std::string_view content_type)
{
    Response res{status, req.version()};
    res.set(http::field::server, "heprep-kit");
    res.set(http::field::content_type, std::string(content_type));
    res.keep_alive(req.keep_alive());
    res.body() = std::move(body);
    res.prepare_payload();
    return res;
}

Response error_response(const http::request<http::string_body>& req, http::status status, const std::string& why)
{
    return make_response(req, status, why + "\n", "text/plain; charset=utf-8");
}

bool safe_relative(std::string_view rel)
{
    if (rel.find('\\') != std::string_view::npos || rel.find('\0') != std::string_view::npos)
        return false;
    for (const auto segment : text::split(rel, '/'))
        if (segment == "..")
            return false;
    return true;
}

Response serve_static(const ServiceContext& ctx, const http::request<http::string_body>& req, std::string_view rel)
{
    std::string name(rel);
    if (name.empty() || name.back() == '/')
        name += "index.html";
    if (!safe_relative(name))
        return error_response(req, http::status::bad_request, "bad path");
    const fs::path file = ctx.ui_dir / name;
    std::ifstream in(file, std::ios::binary);
    std::error_code ec;
    if (!in || !fs::is_regular_file(file, ec))
        return error_response(req, http::status::not_found, "not found");
    std::ostringstream buf;
    buf << in.rdbuf();
    return make_response(req, http::status::ok, std::move(buf).str(), mime_type(file));
}

Response serve_render(const ServiceContext& ctx, const http::request<http::string_body>& req, std::string_view id_text)
{
    const auto id = text::parse_int(id_text);
    if (!id || *id < 0 || *id > std::numeric_limits<int>::max())
        return error_response(req, http::status::not_found, "no such view");
    try {
        return make_response(req, http::status::ok, ctx.controller->render_png(static_cast<int>(*id)), "image/png");
    } catch (const Error& e) {
        if (e.code() == "bad_view")
            return error_response(req, http::status::not_found, e.what());
        if (e.code() == "no_event")
            return error_response(req, http::status::conflict, e.what());
        return error_response(req, http::status::internal_server_error, e.what());
    }
}

Response route(const ServiceContext& ctx, const http::request<http::string_body>& req)
{
    if (req.method() != http::verb::get && req.method() != http::verb::head)
        return error_response(req, http::status::method_not_allowed, "only GET is supported");
    std::string_view target(req.target().data(), req.target().size());
    target = target.substr(0, target.find('?'));
    Response res;
    if (target == "/" || target == "/ui") {
        res = make_response(req, http::status::found, "", "text/plain");
        res.set(http::field::location, "/ui/");
    } else if (target.starts_with("/ui/")) {
        res = serve_static(ctx, req, target.substr(4));
    } else if (target.starts_with("/render/") && target.ends_with(".png")) {
        res = serve_render(ctx, req, target.substr(8, target.size() - 12));
    } else {
        res = error_response(req, http::status::not_found, "not found");
    }
    if (req.method() == http::verb::head)
        res.body().clear();
    return res;
}

class HttpSession : public std::enable_shared_from_this<HttpSession>
{
public:
    HttpSession(tcp::socket&& socket, std::shared_ptr<ServiceContext> ctx)
        : stream_(std::move(socket)), ctx_(std::move(ctx))
    {
    }

    void run()
    {
        asio::dispatch(stream_.get_executor(), [self = shared_from_this()] { self->read(); });
    }

private:
    void read()
    {
        parser_.emplace();
        parser_->body_limit(1 << 20);
        stream_.expires_after(std::chrono::seconds(60));
        http::async_read(stream_, buffer_, *parser_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
            self->on_read(ec);
        });
    }

    void on_read(beast::error_code ec)
    {
        if (ec)
            return shutdown();
        auto req = parser_->release();
        if (websocket::is_upgrade(req)) {
            if (std::string_view(req.target().data(), req.target().size()) != "/ws")
                return shutdown();
            stream_.expires_never();
            std::make_shared<WsSession>(stream_.release_socket(), ctx_)->run(std::move(req));
            return;
        }
        auto res = std::make_shared<Response>(route(*ctx_, req));
        http::async_write(stream_, *res, [self = shared_from_this(), res](beast::error_code ec, std::size_t) {
            if (ec || res->need_eof())
                return self->shutdown();
            self->read();
        });
    }

    void shutdown()
    {
        beast::error_code ignored;
        stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
        stream_.socket().close(ignored);
    }

    beast::tcp_stream stream_;
    std::shared_ptr<ServiceContext> ctx_;
    beast::flat_buffer buffer_;
    std::optional<http::request_parser<http::string_body>> parser_;
};

} // namespace

// ------------------------------------------------------------ HttpListener

struct ControlService::HttpListener
{
    HttpListener(asio::io_context& io, const net::Endpoint& bind, std::shared_ptr<ServiceContext> c)
        : acceptor(net::bind_acceptor(io, bind)), ctx(std::move(c))
    {
    }

    void accept_next()
    {
        acceptor.async_accept(asio::make_strand(acceptor.get_executor()),
                              [this](beast::error_code ec, tcp::socket socket) {
                                  if (ec == asio::error::operation_aborted || !acceptor.is_open())
                                      return;
                                  if (!ec)
                                      std::make_shared<HttpSession>(std::move(socket), ctx)->run();
                                  accept_next();
                              });
    }

    tcp::acceptor acceptor;
    std::shared_ptr<ServiceContext> ctx;
};

ControlService::ControlService(std::shared_ptr<Controller> controller, const net::Endpoint& http_bind,
                               fs::path ui_dir, std::optional<net::Endpoint> tcp_bind, std::size_t threads)
    : controller_(std::move(controller)), hub_(std::make_shared<ClientHub>()), pool_(threads)
{
    auto ctx = std::make_shared<ServiceContext>(ServiceContext{controller_, hub_, std::move(ui_dir)});
    http_ = std::make_unique<HttpListener>(pool_.context(), http_bind, ctx);
    if (tcp_bind) {
        auto hub = hub_;
        auto controller_ref = controller_;
        tcp_ = std::make_unique<net::FrameListener>(
            pool_.context(), *tcp_bind,
            [controller_ref](const std::shared_ptr<net::FrameConnection>& conn, WireMessage msg) {
                conn->send(controller_ref->dispatch(msg));
            },
            [hub](const std::shared_ptr<net::FrameConnection>& conn) { hub->detach(conn.get()); },
            [hub](const std::shared_ptr<net::FrameConnection>& conn) { hub->attach(conn); });
    }
    controller_->set_notify([hub = hub_](const WireMessage& msg) { hub->broadcast(msg); });
}

ControlService::~ControlService()
{
    stop();
    controller_->set_notify({});
}

void ControlService::start()
{
    http_->accept_next();
    if (tcp_)
        tcp_->start();
    pool_.start();
}

void ControlService::stop()
{
    if (http_)
        asio::post(http_->acceptor.get_executor(), [acc = &http_->acceptor] {
            beast::error_code ignored;
            acc->close(ignored);
        });
    if (tcp_)
        tcp_->stop();
    pool_.stop();
}

std::uint16_t ControlService::port() const
{
    return http_->acceptor.local_endpoint().port();
}

std::optional<std::uint16_t> ControlService::tcp_port() const
{
    if (!tcp_)
        return std::nullopt;
    return tcp_->port();
}

} // namespace heprep
