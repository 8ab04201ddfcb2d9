#include "heprep/config.hpp"
#include "heprep/control_service.hpp"
#include "heprep/error.hpp"
#include "heprep/gzip.hpp"
#include "heprep/server.hpp"
#include "heprep/source.hpp"
#include "heprep/xmlio.hpp"

#include "CLI11.hpp"

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <pthread.h>
#include <unistd.h>

namespace fs = std::filesystem;
using namespace heprep;

namespace {

std::string read_input(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw OpenError("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return std::move(buf).str();
}

/// Writes through a temporary sibling and renames, so a failed run never
/// leaves a partial file behind.
void write_atomically(const fs::path& target, std::string_view bytes)
{
    const fs::path tmp = target.string() + ".tmp-" + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        out.close();
        if (!out) {
            std::error_code ignored;
            fs::remove(tmp, ignored);
            throw OpenError("cannot write " + target.string());
        }
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        std::error_code ignored;
        fs::remove(tmp, ignored);
        throw OpenError("cannot write " + target.string() + ": " + ec.message());
    }
}

void outline(std::ostream& out, const TypeNode& node, int depth)
{
    out << std::string(static_cast<std::size_t>(2 * depth), ' ') << node.name << '\n';
    for (const auto& c : node.children)
        outline(out, c, depth + 1);
}

/// Blocks SIGINT and SIGTERM for this thread and every thread started
/// afterwards, then returns a waiter for them.
sigset_t block_stop_signals()
{
    sigset_t set;
    sigemptyset(&set);
    sigaddset(&set, SIGINT);
    sigaddset(&set, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &set, nullptr);
    return set;
}

void wait_for_stop(const sigset_t& set)
{
    int sig = 0;
    sigwait(&set, &sig);
}

// ------------------------------------------------------------------ inspect

int cmd_inspect(const std::string& path)
{
    const std::string bytes = read_input(path);
    const Document doc = xmlio::parse(bytes);
    const TreeCounts counts = count_nodes(doc);
    std::cout << "file: " << path << '\n'
              << "bytes: " << bytes.size() << '\n'
              << "compressed: " << (gzip::is_gzip(bytes) ? "yes" : "no") << "\n\n";
    std::cout << "types: " << counts.types << '\n'
              << "instances: " << counts.instances << '\n'
              << "points: " << counts.points << '\n';
    if (!doc.layer_order.empty()) {
        std::cout << "layers:";
        for (const auto& l : doc.layer_order)
            std::cout << ' ' << l;
        std::cout << '\n';
    }
    for (const auto& t : doc.type_trees) {
        std::cout << "typetree " << t.name;
        if (!t.version.empty())
            std::cout << " (" << t.version << ')';
        std::cout << '\n';
        outline(std::cout, t.root, 1);
    }
    for (const auto& t : doc.instance_trees)
        std::cout << "instancetree " << t.name << " -> " << t.type_tree_name << '\n';
    return 0;
}

// ----------------------------------------------------------------- validate

int cmd_validate(const std::string& path)
{
    const Document doc = xmlio::parse(read_input(path));
    const FlattenResult flat = flatten(doc);
    for (const auto& v : flat.violations)
        std::cerr << "heprep: warning: " << to_string(v) << '\n';
    const TreeCounts counts = count_nodes(doc);
    std::cout << path << ": valid (" << counts.types << " types, " << counts.instances << " instances, "
              << flat.primitives.size() << " primitives)\n";
    return 0;
}

// ------------------------------------------------------------------ convert

int cmd_convert(const std::string& input, const std::string& output, bool compress)
{
    std::error_code ec;
    if (fs::path(input).lexically_normal() == fs::path(output).lexically_normal() ||
        (fs::exists(output, ec) && fs::equivalent(input, output, ec)))
        throw Error("usage", "input and output are the same file");
    const Document doc = xmlio::parse(read_input(input));
    write_atomically(output, xmlio::serialize(doc, compress));
    return 0;
}

// ------------------------------------------------------------------- render

struct CameraFlags
{
    std::string eye, target, up, size, background, layers, format;
    std::optional<double> fov, ortho;
    std::string config;
};

void add_camera_flags(CLI::App* app, CameraFlags& f)
{
    app->add_option("--eye", f.eye, "Camera position x,y,z");
    app->add_option("--target", f.target, "Point looked at x,y,z");
    app->add_option("--up", f.up, "Up direction x,y,z");
    app->add_option("--fov", f.fov, "Vertical field of view in degrees");
    app->add_option("--ortho", f.ortho, "Orthographic projection with this viewport height");
    app->add_option("--size", f.size, "Viewport WxH in pixels");
    app->add_option("--background", f.background, "Background color rrggbbaa");
    app->add_option("--layers", f.layers, "Layer order a,b,c (back to front)");
    app->add_option("--config", f.config, "Config file (default " + default_config_path().string() + ")");
}

/// defaults < config file < flags
RenderConfig resolve_config(const CameraFlags& f)
{
    RenderConfig config;
    if (!f.config.empty())
        config = load_config(f.config);
    else if (std::error_code ec; fs::exists(default_config_path(), ec))
        config = load_config(default_config_path());
    const auto apply = [&](std::string_view key, const std::string& value) {
        if (!value.empty())
            set_option(config, key, value);
    };
    apply("eye", f.eye);
    apply("target", f.target);
    apply("up", f.up);
    apply("size", f.size);
    apply("background", f.background);
    apply("layers", f.layers);
    apply("format", f.format);
    if (f.fov) {
        config.fov_degrees = *f.fov;
        config.ortho_height.reset();
    }
    if (f.ortho)
        config.ortho_height = *f.ortho;
    return config;
}

std::optional<OutputFormat> format_from_extension(const fs::path& p)
{
    const std::string ext = p.extension().string();
    if (ext == ".png")
        return OutputFormat::Png;
    if (ext == ".ps" || ext == ".eps")
        return OutputFormat::PostScript;
    if (ext == ".svg")
        return OutputFormat::Svg;
    return std::nullopt;
}

int cmd_render(const std::string& input, std::string output, const CameraFlags& flags, std::size_t event,
               const std::optional<std::string>& save_path)
{
    RenderConfig config = resolve_config(flags);
    if (flags.format.empty() && !output.empty())
        if (const auto f = format_from_extension(output))
            config.format = *f;
    validate(config);
    if (save_path)
        save_config(config, save_path->empty() ? default_config_path() : fs::path(*save_path));

    if (output.empty()) {
        const std::string ext = config.format == OutputFormat::Png ? ".png"
                                : config.format == OutputFormat::Svg ? ".svg"
                                                                     : ".ps";
        std::string stem = fs::path(input).filename().string();
        for (const char* suffix : {".gz", ".heprep", ".xml"})
            if (stem.ends_with(suffix))
                stem.resize(stem.size() - std::strlen(suffix));
        output = stem + ext;
    }

    auto source = open_source(parse_uri(input));
    const Document doc = source->get_event(event);
    const SceneOutput result =
        render_document(doc, config.to_camera(), config.layers, config.background_color(), config.format);
    write_atomically(output, result.bytes);
    std::cout << "primitives: " << result.flattened << " (drawn " << result.drawn << ") -> " << output << '\n';
    return 0;
}

// -------------------------------------------------------------------- serve

int cmd_serve(const std::string& dir, const std::string& bind)
{
    const net::Endpoint endpoint = net::parse_endpoint(bind, default_event_port);
    const sigset_t signals = block_stop_signals();
    EventServer server(dir, endpoint);
    server.start();
    std::cout << "serving " << server.catalog().size() << " events on " << endpoint.host << ':' << server.port()
              << std::endl;
    wait_for_stop(signals);
    server.stop();
    std::cout << "stopped" << std::endl;
    return 0;
}

// --------------------------------------------------------------------- view

fs::path default_ui_dir(const char* argv0)
{
    std::error_code ec;
    const fs::path exe = fs::weakly_canonical(fs::path(argv0), ec);
    return exe.parent_path() / ".." / "share" / "heprep-kit" / "ui";
}

int cmd_view(const std::string& input, const std::string& bind, const std::string& tcp, const CameraFlags& flags,
             const std::string& ui_dir)
{
    RenderConfig config = resolve_config(flags);
    validate(config);
    const net::Endpoint http_endpoint = net::parse_endpoint(bind, default_control_port);
    std::optional<net::Endpoint> tcp_endpoint;
    if (!tcp.empty())
        tcp_endpoint = net::parse_endpoint(tcp, default_control_port + 1);

    auto controller = std::make_shared<Controller>(config);
    if (!input.empty()) {
        const WireMessage reply = controller->dispatch(make_request(0, "open_source", {{"uri", input}}));
        if (reply.kind == MessageKind::Error)
            throw Error(reply.payload.value("code", "open"), reply.payload.value("message", "cannot open source"));
    }
    const sigset_t signals = block_stop_signals();
    ControlService service(controller, http_endpoint, ui_dir, tcp_endpoint);
    service.start();
    const auto state = controller->state();
    std::cout << "control service on http://" << http_endpoint.host << ':' << service.port() << "/ui/";
    if (service.tcp_port())
        std::cout << " (tcp " << *service.tcp_port() << ')';
    if (!state["cursor"].is_null())
        std::cout << ", " << state["cursor"]["count"].get<std::size_t>() << " events";
    std::cout << std::endl;
    wait_for_stop(signals);
    service.stop();
    std::cout << "stopped" << std::endl;
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"HepRep event display toolkit"};
    app.require_subcommand(1);

    std::string input, output;
    bool compress = false;
    std::size_t event = 0;
    std::optional<std::string> save_path;
    std::string dir = ".", bind, tcp, ui_dir = default_ui_dir(argv[0]).string();
    CameraFlags flags;

    auto* inspect = app.add_subcommand("inspect", "Print file statistics and the type-tree outline");
    inspect->add_option("input", input, "HepRep file (.heprep or .heprep.gz)")->required();

    auto* validate_cmd = app.add_subcommand("validate", "Check a file against the grammar and model invariants");
    validate_cmd->add_option("input", input, "HepRep file")->required();

    auto* convert = app.add_subcommand("convert", "Re-serialize a file canonically");
    convert->add_option("input", input, "Source file")->required();
    convert->add_option("output", output, "Destination file")->required();
    convert->add_flag("--compress", compress, "Write gzip (default when output ends in .gz)");

    auto* render = app.add_subcommand("render", "Render one event to PNG, PostScript or SVG");
    render->add_option("input", input, "File path or file://, http(s)://, hep:// uri")->required();
    render->add_option("--output,-o", output, "Output file (format inferred from .png/.ps/.svg)");
    render->add_option("--format", flags.format, "png, ps or svg");
    render->add_option("--event", event, "Event index for multi-event sources");
    render->add_option("--save-config", save_path, "Save the effective options (default path when empty)")
        ->expected(0, 1);
    add_camera_flags(render, flags);

    auto* serve = app.add_subcommand("serve", "Serve a directory of events over the framed protocol");
    serve->add_option("--dir", dir, "Directory of .heprep/.heprep.gz files");
    serve->add_option("--bind", bind, "host:port (default 127.0.0.1:7544)");

    auto* view = app.add_subcommand("view", "Start the control service and the browser viewer");
    view->add_option("input", input, "File path or uri to open at startup");
    view->add_option("--bind", bind, "HTTP/WebSocket host:port (default 127.0.0.1:7545)");
    view->add_option("--tcp", tcp, "Also accept framed TCP control clients on host:port");
    view->add_option("--ui-dir", ui_dir, "Directory served under /ui/");
    add_camera_flags(view, flags);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*inspect)
            return cmd_inspect(input);
        if (*validate_cmd)
            return cmd_validate(input);
        if (*convert)
            return cmd_convert(input, output, compress || output.ends_with(".gz"));
        if (*render)
            return cmd_render(input, output, flags, event, save_path);
        if (*serve)
            return cmd_serve(dir, bind.empty() ? "127.0.0.1" : bind);
        if (*view)
            return cmd_view(input, bind.empty() ? "127.0.0.1" : bind, tcp, flags, ui_dir);
    } catch (const Error& e) {
        std::cerr << "heprep: " << e.code() << ": " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "heprep: internal: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
