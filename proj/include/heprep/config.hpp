#pragma once

#include "heprep/camera.hpp"
#include "heprep/export.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace heprep {

/// Batch rendering options, persisted as a flat key=value file:
///
///   eye = 1800,1200,2400
///   target = 0,0,0
///   up = 0,1,0
///   fov = 45            (degrees; ignored when ortho is set)
///   ortho = 3000        (optional; orthographic viewport height)
///   near = 1
///   far = 10000
///   size = 800x800
///   background = 000000ff
///   format = png        (png, ps or svg)
///   layers = a,b,c      (back to front)
struct RenderConfig
{
    Eigen::Vector3d eye{1800, 1200, 2400};
    Eigen::Vector3d target{0, 0, 0};
    Eigen::Vector3d up{0, 1, 0};
    double fov_degrees = 45;
    std::optional<double> ortho_height;
    double near_plane = 1;
    double far_plane = 10000;
    int width = 800;
    int height = 800;
    Rgba8 background{0, 0, 0, 255};
    OutputFormat format = OutputFormat::Png;
    std::vector<std::string> layers;

    bool operator==(const RenderConfig&) const = default;

    Camera to_camera() const;
    Color background_color() const;
};

/// Throws ConfigError naming the first violated camera or viewport rule.
void validate(const RenderConfig& config);

/// Applies one key to the config; throws ConfigError for unknown keys or
/// malformed values.
void set_option(RenderConfig& config, std::string_view key, std::string_view value);

/// Parses config text on top of `base`. Blank lines and lines starting with
/// '#' are skipped.
RenderConfig parse_config(std::string_view text, RenderConfig base = {});
std::string format_config(const RenderConfig& config);

RenderConfig load_config(const std::filesystem::path& path, RenderConfig base = {});
void save_config(const RenderConfig& config, const std::filesystem::path& path);

/// ${XDG_CONFIG_HOME:-$HOME/.config}/heprep-kit/render.conf
std::filesystem::path default_config_path();

/// "x,y,z" with finite reals.
Eigen::Vector3d parse_vector(std::string_view text);
/// "WxH", both at least 1.
std::pair<int, int> parse_size(std::string_view text);
/// "rrggbbaa" or "rrggbb" hex.
Rgba8 parse_rgba(std::string_view text);
std::string format_rgba(const Rgba8& c);

} // namespace heprep
