#include "doctest.h"

#include "heprep/config.hpp"
#include "heprep/error.hpp"

#include <cstdlib>
#include <filesystem>
#include <random>

using namespace heprep;
namespace fs = std::filesystem;

namespace {

RenderConfig random_config(std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> coord(-5000, 5000);
    RenderConfig c;
    c.eye = {coord(rng), coord(rng), coord(rng)};
    c.target = {coord(rng), coord(rng), coord(rng)};
    c.up = {coord(rng), coord(rng), coord(rng)};
    c.fov_degrees = std::uniform_real_distribution<double>(1, 170)(rng);
    if (rng() % 2)
        c.ortho_height = std::uniform_real_distribution<double>(1, 9000)(rng);
    c.near_plane = std::uniform_real_distribution<double>(0.01, 10)(rng);
    c.far_plane = c.near_plane + std::uniform_real_distribution<double>(1, 1e5)(rng);
    c.width = 1 + static_cast<int>(rng() % 4000);
    c.height = 1 + static_cast<int>(rng() % 4000);
    c.background = {static_cast<std::uint8_t>(rng()), static_cast<std::uint8_t>(rng()),
                    static_cast<std::uint8_t>(rng()), static_cast<std::uint8_t>(rng())};
    c.format = static_cast<OutputFormat>(rng() % 3);
    const char* names[] = {"acd", "cal", "tracker", "hits", "event", "my layer"};
    for (std::size_t n = rng() % 4; n > 0; --n)
        c.layers.emplace_back(names[rng() % 6]);
    return c;
}

struct TempDir
{
    fs::path path = fs::temp_directory_path() / ("heprep-config-" + std::to_string(::getpid()));
    TempDir() { fs::create_directories(path); }
    ~TempDir() { fs::remove_all(path); }
};

} // namespace

TEST_CASE("defaults")
{
    const RenderConfig c;
    CHECK(c.eye == Eigen::Vector3d(1800, 1200, 2400));
    CHECK(c.width == 800);
    CHECK(c.height == 800);
    CHECK(c.format == OutputFormat::Png);
    CHECK_NOTHROW(validate(c));
    const Camera cam = c.to_camera();
    CHECK(std::get<Perspective<double>>(cam.projection).fov_y == doctest::Approx(std::numbers::pi / 4));
    CHECK(c.background_color() == Color{0, 0, 0, 1});
}

TEST_CASE("format and parse round-trip exactly")
{
    std::mt19937_64 rng(42);
    for (int i = 0; i < 300; ++i) {
        const RenderConfig c = random_config(rng);
        CHECK(parse_config(format_config(c)) == c);
    }
}

TEST_CASE("save and load round-trip through a file")
{
    TempDir dir;
    std::mt19937_64 rng(7);
    const fs::path file = dir.path / "nested" / "render.conf";
    for (int i = 0; i < 20; ++i) {
        const RenderConfig c = random_config(rng);
        save_config(c, file);
        CHECK(load_config(file) == c);
    }
    CHECK_THROWS_AS(load_config(dir.path / "absent.conf"), ConfigError);
}

TEST_CASE("parsing overlays a base and tolerates comments")
{
    RenderConfig base;
    base.width = 320;
    const RenderConfig c = parse_config("# camera\n\n  fov = 30  \nlayers = cal , tracker\northo=1500\n", base);
    CHECK(c.width == 320);
    CHECK(c.fov_degrees == 30);
    CHECK(c.ortho_height == 1500);
    CHECK(c.layers == std::vector<std::string>{"cal", "tracker"});
    CHECK(std::holds_alternative<Orthographic<double>>(c.to_camera().projection));
    CHECK_FALSE(parse_config("ortho =", c).ortho_height.has_value());
}

TEST_CASE("malformed values are config errors")
{
    for (const char* text : {"eye = 1,2", "eye = 1,2,x", "fov = nan", "near = inf", "size = 0x10", "size = 10",
                             "size = 20000x10", "background = 12345", "background = gg0000", "format = jpg",
                             "zoom = 2", "just a line"})
        CHECK_THROWS_AS(parse_config(text), ConfigError);
    try {
        parse_config("fov = 30\nnear = -\n");
        FAIL("expected an error");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
}

TEST_CASE("colors")
{
    CHECK(parse_rgba("ff8000") == Rgba8{255, 128, 0, 255});
    CHECK(parse_rgba("#10203040") == Rgba8{16, 32, 48, 64});
    CHECK(format_rgba({1, 2, 3, 4}) == "01020304");
}

TEST_CASE("validate rejects unusable cameras and layer names")
{
    RenderConfig c;
    c.fov_degrees = 0;
    CHECK_THROWS_AS(validate(c), ConfigError);
    c = {};
    c.fov_degrees = 180;
    CHECK_THROWS_AS(validate(c), ConfigError);
    c = {};
    c.near_plane = 0;
    CHECK_THROWS_AS(validate(c), ConfigError);
    c = {};
    c.far_plane = c.near_plane;
    CHECK_THROWS_AS(validate(c), ConfigError);
    c = {};
    c.target = c.eye;
    CHECK_THROWS_AS(validate(c), ConfigError);
    c = {};
    c.up = c.eye - c.target;
    CHECK_THROWS_AS(validate(c), ConfigError);
    c = {};
    c.ortho_height = 0;
    CHECK_THROWS_AS(validate(c), ConfigError);
    c = {};
    c.layers = {"ok", ""};
    CHECK_THROWS_AS(validate(c), ConfigError);
    c.layers = {" padded"};
    CHECK_THROWS_AS(validate(c), ConfigError);
}

TEST_CASE("the default path follows XDG_CONFIG_HOME, then HOME")
{
    const std::string saved_xdg = std::getenv("XDG_CONFIG_HOME") ? std::getenv("XDG_CONFIG_HOME") : "";
    const std::string saved_home = std::getenv("HOME") ? std::getenv("HOME") : "";
    ::setenv("XDG_CONFIG_HOME", "/tmp/xdg", 1);
    CHECK(default_config_path() == fs::path("/tmp/xdg/heprep-kit/render.conf"));
    ::unsetenv("XDG_CONFIG_HOME");
    ::setenv("HOME", "/home/someone", 1);
    CHECK(default_config_path() == fs::path("/home/someone/.config/heprep-kit/render.conf"));
    if (saved_xdg.empty())
        ::unsetenv("XDG_CONFIG_HOME");
    else
        ::setenv("XDG_CONFIG_HOME", saved_xdg.c_str(), 1);
    ::setenv("HOME", saved_home.c_str(), 1);
}
