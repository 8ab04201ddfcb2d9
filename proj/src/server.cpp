#include "heprep/server.hpp"

#include "heprep/error.hpp"
#include "heprep/xmlio.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace heprep {

namespace fs = std::filesystem;

namespace {

bool is_event_file(const fs::path& p)
{
    const std::string name = p.filename().string();
    const auto ends_with = [&](std::string_view suffix) {
        return name.size() > suffix.size() && name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0;
    };
    return ends_with(".heprep") || ends_with(".heprep.gz");
}

std::string read_file(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    if (!in)
        throw OpenError("cannot open " + p.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return std::move(buf).str();
}

} // namespace

EventCatalog EventCatalog::scan(const fs::path& directory)
{
    std::error_code ec;
    fs::directory_iterator it(directory, ec);
    if (ec)
        throw StartupError("cannot read directory " + directory.string() + ": " + ec.message());
    EventCatalog catalog;
    for (const auto& entry : it) {
        std::error_code type_ec;
        if (entry.is_regular_file(type_ec) && is_event_file(entry.path()))
            catalog.files_.push_back(entry.path());
    }
    std::sort(catalog.files_.begin(), catalog.files_.end(),
              [](const fs::path& a, const fs::path& b) { return a.filename().string() < b.filename().string(); });
    return catalog;
}

WireMessage handle(const EventCatalog& catalog, const WireMessage& request)
{
    if (request.kind != MessageKind::Request)
        return make_error(request.id, "bad_request", "expected a request");
    if (request.method == "hello")
        return make_reply(request, {{"protocol", protocol_name}});
    if (request.method == "list_events") {
        nlohmann::json names = nlohmann::json::array();
        for (const auto& f : catalog.files())
            names.push_back(f.filename().string());
        return make_reply(request, {{"count", catalog.size()}, {"names", std::move(names)}});
    }
    if (request.method == "get_event") {
        const auto& p = request.payload;
        if (!p.is_object() || !p.contains("index") || !p["index"].is_number_integer())
            return make_error(request.id, "bad_request", "get_event needs an integer index");
        const auto index = p["index"].get<std::int64_t>();
        if (index < 0 || static_cast<std::uint64_t>(index) >= catalog.size())
            return make_error(request.id, "range",
                              "event " + std::to_string(index) + " out of range (count " +
                                  std::to_string(catalog.size()) + ")");
        const fs::path& file = catalog.files()[static_cast<std::size_t>(index)];
        try {
            const std::string canonical = xmlio::serialize(xmlio::parse(read_file(file)), false);
            return make_reply(request, {{"name", file.filename().string()}, {"heprep", base64_encode(canonical)}});
        } catch (const Error& e) {
            return make_error(request.id, "io_error", file.filename().string() + ": " + e.what());
        }
    }
    return make_error(request.id, "unknown_method", "unknown method '" + request.method + "'");
}

EventServer::EventServer(const fs::path& directory, const net::Endpoint& bind, std::size_t threads)
    : catalog_(std::make_shared<const EventCatalog>(EventCatalog::scan(directory))), pool_(threads)
{
    auto catalog = catalog_;
    listener_ = std::make_unique<net::FrameListener>(
        pool_.context(), bind, [catalog](const std::shared_ptr<net::FrameConnection>& conn, WireMessage msg) {
            conn->send(handle(*catalog, msg));
        });
}

EventServer::~EventServer()
{
    stop();
}

void EventServer::start()
{
    listener_->start();
    pool_.start();
}

void EventServer::stop()
{
    if (listener_)
        listener_->stop();
    pool_.stop();
}

std::uint16_t EventServer::port() const
{
    return listener_->port();
}

} // namespace heprep
