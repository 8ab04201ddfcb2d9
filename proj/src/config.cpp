#include "heprep/config.hpp"

#include "heprep/error.hpp"
#include "heprep/text.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace heprep {

namespace {

double parse_finite(std::string_view key, std::string_view value)
{
    const auto v = text::parse_real(text::trim(value));
    if (!v || !std::isfinite(*v))
        throw ConfigError("invalid number for " + std::string(key) + ": '" + std::string(value) + "'");
    return *v;
}

int hex_digit(char c)
{
    if (c >= '0' && c <= '9')
        return c - '0';
    if (c >= 'a' && c <= 'f')
        return c - 'a' + 10;
    if (c >= 'A' && c <= 'F')
        return c - 'A' + 10;
    return -1;
}

std::string format_vector(const Eigen::Vector3d& v)
{
    return text::format_real(v.x()) + "," + text::format_real(v.y()) + "," + text::format_real(v.z());
}

} // namespace

Camera RenderConfig::to_camera() const
{
    Camera cam;
    cam.eye = eye;
    cam.target = target;
    cam.up = up;
    if (ortho_height)
        cam.projection = Orthographic<double>{*ortho_height};
    else
        cam.projection = Perspective<double>{fov_degrees * std::numbers::pi / 180.0};
    cam.width = width;
    cam.height = height;
    cam.near_plane = near_plane;
    cam.far_plane = far_plane;
    return cam;
}

Color RenderConfig::background_color() const
{
    return Color{background.r / 255.0, background.g / 255.0, background.b / 255.0, background.a / 255.0};
}

void validate(const RenderConfig& config)
{
    if (const auto problem = camera_problem(config.to_camera()))
        throw ConfigError("invalid camera: " + *problem);
    for (const auto& layer : config.layers)
        if (layer.empty() || layer.find_first_of(",\n") != std::string::npos || text::trim(layer) != layer)
            throw ConfigError("invalid layer name '" + layer + "'");
}

Eigen::Vector3d parse_vector(std::string_view text)
{
    const auto parts = text::split(text, ',');
    if (parts.size() != 3)
        throw ConfigError("expected x,y,z but got '" + std::string(text) + "'");
    Eigen::Vector3d v;
    for (int i = 0; i < 3; ++i)
        v[i] = parse_finite("vector", parts[static_cast<std::size_t>(i)]);
    return v;
}

std::pair<int, int> parse_size(std::string_view text)
{
    const auto x = text.find('x');
    if (x == std::string_view::npos)
        throw ConfigError("expected WxH but got '" + std::string(text) + "'");
    const auto w = text::parse_int(text::trim(text.substr(0, x)));
    const auto h = text::parse_int(text::trim(text.substr(x + 1)));
    if (!w || !h || *w < 1 || *h < 1 || *w > 16384 || *h > 16384)
        throw ConfigError("invalid size '" + std::string(text) + "'");
    return {static_cast<int>(*w), static_cast<int>(*h)};
}

Rgba8 parse_rgba(std::string_view text)
{
    text = text::trim(text);
    if (text.starts_with('#'))
        text.remove_prefix(1);
    if (text.size() != 6 && text.size() != 8)
        throw ConfigError("expected rrggbbaa but got '" + std::string(text) + "'");
    std::uint8_t bytes[4] = {0, 0, 0, 255};
    for (std::size_t i = 0; i < text.size() / 2; ++i) {
        const int hi = hex_digit(text[2 * i]);
        const int lo = hex_digit(text[2 * i + 1]);
        if (hi < 0 || lo < 0)
            throw ConfigError("invalid color '" + std::string(text) + "'");
        bytes[i] = static_cast<std::uint8_t>(hi * 16 + lo);
    }
    return Rgba8{bytes[0], bytes[1], bytes[2], bytes[3]};
}

std::string format_rgba(const Rgba8& c)
{
    char buf[9];
    std::snprintf(buf, sizeof buf, "%02x%02x%02x%02x", c.r, c.g, c.b, c.a);
    return buf;
}

void set_option(RenderConfig& config, std::string_view key, std::string_view value)
{
    value = text::trim(value);
    if (key == "eye")
        config.eye = parse_vector(value);
    else if (key == "target")
        config.target = parse_vector(value);
    else if (key == "up")
        config.up = parse_vector(value);
    else if (key == "fov")
        config.fov_degrees = parse_finite(key, value);
    else if (key == "ortho")
        config.ortho_height = value.empty() ? std::nullopt : std::optional(parse_finite(key, value));
    else if (key == "near")
        config.near_plane = parse_finite(key, value);
    else if (key == "far")
        config.far_plane = parse_finite(key, value);
    else if (key == "size")
        std::tie(config.width, config.height) = parse_size(value);
    else if (key == "background")
        config.background = parse_rgba(value);
    else if (key == "format") {
        try {
            config.format = output_format_from_name(value);
        } catch (const Error& e) {
            throw ConfigError(e.what());
        }
    } else if (key == "layers") {
        config.layers.clear();
        if (!value.empty())
            for (const auto& part : text::split(value, ','))
                config.layers.emplace_back(text::trim(part));
    } else
        throw ConfigError("unknown config key '" + std::string(key) + "'");
}

RenderConfig parse_config(std::string_view input, RenderConfig base)
{
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= input.size()) {
        const auto end = std::min(input.find('\n', pos), input.size());
        const std::string_view line = text::trim(input.substr(pos, end - pos));
        pos = end + 1;
        ++line_no;
        if (line.empty() || line.front() == '#')
            continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
        try {
            set_option(base, text::trim(line.substr(0, eq)), line.substr(eq + 1));
        } catch (const ConfigError& e) {
            throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return base;
}

std::string format_config(const RenderConfig& config)
{
    std::ostringstream out;
    out << "eye = " << format_vector(config.eye) << '\n';
    out << "target = " << format_vector(config.target) << '\n';
    out << "up = " << format_vector(config.up) << '\n';
    out << "fov = " << text::format_real(config.fov_degrees) << '\n';
    if (config.ortho_height)
        out << "ortho = " << text::format_real(*config.ortho_height) << '\n';
    out << "near = " << text::format_real(config.near_plane) << '\n';
    out << "far = " << text::format_real(config.far_plane) << '\n';
    out << "size = " << config.width << 'x' << config.height << '\n';
    out << "background = " << format_rgba(config.background) << '\n';
    out << "format = " << output_format_name(config.format) << '\n';
    out << "layers = ";
    for (std::size_t i = 0; i < config.layers.size(); ++i)
        out << (i ? "," : "") << config.layers[i];
    out << '\n';
    return out.str();
}

RenderConfig load_config(const std::filesystem::path& path, RenderConfig base)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError("cannot open config " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_config(buf.str(), std::move(base));
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

void save_config(const RenderConfig& config, const std::filesystem::path& path)
{
    std::error_code ec;
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << format_config(config);
    out.close();
    if (!out)
        throw ConfigError("cannot write config " + path.string());
}

std::filesystem::path default_config_path()
{
    std::filesystem::path base;
    if (const char* xdg = std::getenv("XDG_CONFIG_HOME"); xdg && *xdg)
        base = xdg;
    else if (const char* home = std::getenv("HOME"); home && *home)
        base = std::filesystem::path(home) / ".config";
    else
        base = ".config";
    return base / "heprep-kit" / "render.conf";
}

} // namespace heprep
