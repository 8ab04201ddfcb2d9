#include "heprep/source.hpp"

#include "heprep/error.hpp"
#include "heprep/net.hpp"
#include "heprep/server.hpp"
#include "heprep/xmlio.hpp"

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

#include <fstream>
#include <sstream>

namespace heprep {

namespace {

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw OpenError("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad())
        throw OpenError("cannot read " + path);
    return std::move(buf).str();
}

void require_index(std::size_t index, std::size_t count)
{
    if (index >= count)
        throw RangeError("event " + std::to_string(index) + " out of range (count " + std::to_string(count) + ")");
}

/// A source holding one already parsed document.
class SingleEventSource : public EventSource
{
public:
    SingleEventSource(SourceUri uri, Document doc) : uri_(std::move(uri)), doc_(std::move(doc)) {}

    const SourceUri& uri() const override { return uri_; }
    std::size_t count() const override { return 1; }

    Document get_event(std::size_t index) override
    {
        require_index(index, 1);
        return doc_;
    }

private:
    SourceUri uri_;
    Document doc_;
};

std::unique_ptr<EventSource> open_file(const SourceUri& uri)
{
    return std::make_unique<SingleEventSource>(uri, xmlio::parse(read_file(uri.path)));
}

std::unique_ptr<EventSource> open_http(const SourceUri& uri)
{
    httplib::Client client(uri.scheme + "://" + uri.authority);
    client.set_connection_timeout(10);
    client.set_read_timeout(30);
    const std::string path = uri.path.empty() ? "/" : uri.path;
    const auto res = client.Get(path, httplib::Headers{{"Accept-Encoding", "identity"}});
    if (!res) {
        const auto err = res.error();
        const std::string what = httplib::to_string(err);
        if (err == httplib::Error::Connection || err == httplib::Error::SSLConnection ||
            err == httplib::Error::ConnectionTimeout)
            throw OpenError("cannot reach " + uri.to_string() + ": " + what);
        throw TransportError("GET " + uri.to_string() + " failed: " + what);
    }
    if (res->status < 200 || res->status >= 300)
        throw TransportError("GET " + uri.to_string() + " returned HTTP " + std::to_string(res->status),
                             res->status);
    return std::make_unique<SingleEventSource>(uri, xmlio::parse(res->body));
}

class HepSource : public EventSource
{
public:
    HepSource(SourceUri uri, const net::Endpoint& server) : uri_(std::move(uri)), client_(server)
    {
        const WireMessage hello = call("hello");
        if (hello.payload.value("protocol", std::string{}) != protocol_name)
            throw OpenError(uri_.to_string() + " does not speak " + std::string(protocol_name));
        const WireMessage list = call("list_events");
        if (!list.payload.contains("count") || !list.payload["count"].is_number_unsigned())
            throw TransportError("malformed list_events reply");
        count_ = list.payload["count"].get<std::size_t>();
    }

    const SourceUri& uri() const override { return uri_; }
    std::size_t count() const override { return count_; }

    Document get_event(std::size_t index) override
    {
        require_index(index, count_);
        const WireMessage reply = call("get_event", {{"index", index}});
        const auto& p = reply.payload;
        if (!p.contains("heprep") || !p["heprep"].is_string())
            throw TransportError("malformed get_event reply");
        const auto bytes = base64_decode(p["heprep"].get_ref<const std::string&>());
        if (!bytes)
            throw TransportError("get_event reply is not valid base64");
        return xmlio::parse(*bytes);
    }

private:
    WireMessage call(const std::string& method, nlohmann::json payload = nlohmann::json::object())
    {
        WireMessage reply = client_.call(method, std::move(payload));
        if (reply.kind == MessageKind::Error) {
            const std::string code = reply.payload.value("code", std::string{});
            const std::string message = reply.payload.value("message", std::string{});
            if (code == "range")
                throw RangeError(message);
            throw TransportError("server error " + code + ": " + message);
        }
        return reply;
    }

    SourceUri uri_;
    net::FrameClient client_;
    std::size_t count_ = 0;
};

} // namespace

std::string SourceUri::to_string() const
{
    if (scheme == "file")
        return "file://" + path;
    return scheme + "://" + authority + path;
}

SourceUri parse_uri(std::string_view text)
{
    SourceUri uri;
    const auto sep = text.find("://");
    if (sep == std::string_view::npos) {
        uri.scheme = "file";
        uri.path = std::string(text.starts_with("file:") ? text.substr(5) : text);
        if (uri.path.empty())
            throw OpenError("empty file path");
        return uri;
    }
    uri.scheme = std::string(text.substr(0, sep));
    for (auto& c : uri.scheme)
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    const std::string_view rest = text.substr(sep + 3);
    const auto slash = rest.find('/');
    uri.authority = std::string(rest.substr(0, slash));
    uri.path = slash == std::string_view::npos ? std::string() : std::string(rest.substr(slash));
    if (uri.scheme == "file") {
        if (!uri.authority.empty() && uri.authority != "localhost")
            throw OpenError("file uri with remote host '" + uri.authority + "'");
        uri.authority.clear();
        if (uri.path.empty())
            throw OpenError("empty file path");
        return uri;
    }
    if (uri.scheme != "http" && uri.scheme != "https" && uri.scheme != "hep")
        throw OpenError("unsupported scheme '" + uri.scheme + "'");
    if (uri.authority.empty())
        throw OpenError(uri.scheme + " uri needs a host");
    return uri;
}

std::unique_ptr<EventSource> open_source(const SourceUri& uri)
{
    if (uri.scheme == "file")
        return open_file(uri);
    if (uri.scheme == "http" || uri.scheme == "https")
        return open_http(uri);
    if (uri.scheme == "hep") {
        net::Endpoint server;
        try {
            server = net::parse_endpoint(uri.authority, default_event_port);
        } catch (const Error& e) {
            throw OpenError(e.what());
        }
        return std::make_unique<HepSource>(uri, server);
    }
    throw OpenError("unsupported scheme '" + uri.scheme + "'");
}

EventCursor next(const EventCursor& cursor)
{
    EventCursor out = cursor;
    if (!cursor.count || cursor.index + 1 < *cursor.count)
        ++out.index;
    return out;
}

EventCursor prev(const EventCursor& cursor)
{
    EventCursor out = cursor;
    if (out.index > 0)
        --out.index;
    return out;
}

} // namespace heprep
