#include "heprep/wire.hpp"

#include "heprep/error.hpp"
#include "heprep/text.hpp"

#include <openssl/evp.h>

namespace heprep {

std::string_view to_string(MessageKind kind)
{
    switch (kind) {
    case MessageKind::Request:
        return "request";
    case MessageKind::Reply:
        return "reply";
    case MessageKind::Error:
        return "error";
    case MessageKind::Notification:
        return "notification";
    }
    return "request";
}

nlohmann::json to_json(const WireMessage& msg)
{
    nlohmann::json j = {{"id", msg.id}, {"kind", to_string(msg.kind)}};
    if (!msg.method.empty())
        j["method"] = msg.method;
    j["payload"] = msg.payload;
    return j;
}

WireMessage message_from_json(const nlohmann::json& j)
{
    const auto bad = [](const std::string& why) { return Error("bad_request", why); };
    if (!j.is_object())
        throw bad("message must be a JSON object");
    WireMessage msg;
    const auto id = j.find("id");
    if (id == j.end() || !id->is_number_integer())
        throw bad("message needs an integer id");
    msg.id = id->get<std::int64_t>();
    const auto kind = j.find("kind");
    if (kind == j.end() || !kind->is_string())
        throw bad("message needs a kind");
    const auto k = kind->get<std::string>();
    if (k == "request")
        msg.kind = MessageKind::Request;
    else if (k == "reply")
        msg.kind = MessageKind::Reply;
    else if (k == "error")
        msg.kind = MessageKind::Error;
    else if (k == "notification")
        msg.kind = MessageKind::Notification;
    else
        throw bad("unknown message kind '" + k + "'");
    if (const auto method = j.find("method"); method != j.end()) {
        if (!method->is_string())
            throw bad("method must be a string");
        msg.method = method->get<std::string>();
    }
    if (msg.kind == MessageKind::Request && msg.method.empty())
        throw bad("request needs a method");
    if (const auto payload = j.find("payload"); payload != j.end())
        msg.payload = *payload;
    for (const auto& [key, value] : j.items())
        if (key != "id" && key != "kind" && key != "method" && key != "payload")
            throw bad("unknown message field '" + key + "'");
    return msg;
}

WireMessage make_request(std::int64_t id, std::string method, nlohmann::json payload)
{
    return {id, MessageKind::Request, std::move(method), std::move(payload)};
}

WireMessage make_reply(const WireMessage& request, nlohmann::json payload)
{
    return {request.id, MessageKind::Reply, request.method, std::move(payload)};
}

WireMessage make_error(std::int64_t id, std::string code, std::string message)
{
    return {id, MessageKind::Error, {}, {{"code", std::move(code)}, {"message", std::move(message)}}};
}

WireMessage make_notification(std::string method, nlohmann::json payload)
{
    return {0, MessageKind::Notification, std::move(method), std::move(payload)};
}

std::string encode_body(const WireMessage& msg)
{
    return to_json(msg).dump();
}

WireMessage decode_body(std::string_view body)
{
    if (!text::is_valid_utf8(body))
        throw FrameError("frame body is not valid UTF-8");
    nlohmann::json j = nlohmann::json::parse(body, nullptr, false);
    if (j.is_discarded())
        throw Error("bad_request", "frame body is not valid JSON");
    return message_from_json(j);
}

std::string encode_frame(const WireMessage& msg)
{
    const std::string body = encode_body(msg);
    if (body.size() > max_frame_size)
        throw FrameError("message exceeds the frame size limit");
    const auto n = static_cast<std::uint32_t>(body.size());
    std::string out;
    out.reserve(4 + body.size());
    out += static_cast<char>((n >> 24) & 0xFF);
    out += static_cast<char>((n >> 16) & 0xFF);
    out += static_cast<char>((n >> 8) & 0xFF);
    out += static_cast<char>(n & 0xFF);
    out += body;
    return out;
}

std::uint32_t read_length_prefix(const unsigned char* p)
{
    return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) | (std::uint32_t{p[2]} << 8) |
           std::uint32_t{p[3]};
}

void FrameDecoder::feed(std::string_view bytes)
{
    buffer_.append(bytes);
    std::size_t offset = 0;
    while (buffer_.size() - offset >= 4) {
        const std::uint32_t n = read_length_prefix(reinterpret_cast<const unsigned char*>(buffer_.data() + offset));
        if (n > max_frame_size)
            throw FrameError("frame length " + std::to_string(n) + " exceeds limit");
        if (buffer_.size() - offset - 4 < n)
            break;
        ready_.push_back(buffer_.substr(offset + 4, n));
        offset += 4 + n;
    }
    buffer_.erase(0, offset);
}

std::optional<std::string> FrameDecoder::next()
{
    if (ready_.empty())
        return std::nullopt;
    std::string body = std::move(ready_.front());
    ready_.pop_front();
    return body;
}

std::string base64_encode(std::string_view bytes)
{
    std::string out(4 * ((bytes.size() + 2) / 3) + 1, '\0');
    const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                  reinterpret_cast<const unsigned char*>(bytes.data()), static_cast<int>(bytes.size()));
    out.resize(static_cast<std::size_t>(n));
    return out;
}

std::optional<std::string> base64_decode(std::string_view text)
{
    if (text.size() % 4 != 0)
        return std::nullopt;
    for (char c : text) {
        const bool ok = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '+' ||
                        c == '/' || c == '=';
        if (!ok)
            return std::nullopt;
    }
    std::size_t padding = 0;
    if (!text.empty() && text.back() == '=')
        ++padding;
    if (text.size() >= 2 && text[text.size() - 2] == '=')
        ++padding;
    if (text.substr(0, text.size() - padding).find('=') != std::string_view::npos)
        return std::nullopt;
    std::string out(3 * (text.size() / 4) + 1, '\0');
    const int n = EVP_DecodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                  reinterpret_cast<const unsigned char*>(text.data()), static_cast<int>(text.size()));
    if (n < 0)
        return std::nullopt;
    out.resize(static_cast<std::size_t>(n) - padding);
    return out;
}

} // namespace heprep
