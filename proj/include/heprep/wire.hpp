#pragma once

#include "json.hpp"

#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <string_view>

namespace heprep {

inline constexpr std::string_view protocol_name = "heprep-kit/1";

/// Largest frame body accepted on either side of a connection.
inline constexpr std::size_t max_frame_size = std::size_t{64} << 20;

enum class MessageKind { Request, Reply, Error, Notification };

std::string_view to_string(MessageKind kind);

/// One request/reply/error on the event-server and control protocols.
/// Errors carry {code, message} as payload. Notifications are
/// server-initiated pushes with id 0.
struct WireMessage
{
    std::int64_t id = 0;
    MessageKind kind = MessageKind::Request;
    std::string method;
    nlohmann::json payload = nlohmann::json::object();

    bool operator==(const WireMessage&) const = default;
};

nlohmann::json to_json(const WireMessage& msg);

/// Throws Error("bad_request") when the value is not a message object.
WireMessage message_from_json(const nlohmann::json& j);

WireMessage make_request(std::int64_t id, std::string method, nlohmann::json payload = nlohmann::json::object());
WireMessage make_reply(const WireMessage& request, nlohmann::json payload = nlohmann::json::object());
WireMessage make_error(std::int64_t id, std::string code, std::string message);
WireMessage make_notification(std::string method, nlohmann::json payload);

/// Serialized body (compact JSON, UTF-8).
std::string encode_body(const WireMessage& msg);

/// Throws FrameError for invalid UTF-8 and Error("bad_request") for JSON
/// that is not a message.
WireMessage decode_body(std::string_view body);

/// 4-byte big-endian length prefix followed by the body.
std::string encode_frame(const WireMessage& msg);

/// Incremental splitter for a byte stream of frames.
class FrameDecoder
{
public:
    /// Throws FrameError as soon as a length prefix exceeds max_frame_size.
    void feed(std::string_view bytes);

    /// Next complete frame body, if one has arrived.
    std::optional<std::string> next();

private:
    std::string buffer_;
    std::deque<std::string> ready_;
};

std::uint32_t read_length_prefix(const unsigned char* p);

std::string base64_encode(std::string_view bytes);
std::optional<std::string> base64_decode(std::string_view text);

} // namespace heprep
