#include "session.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace heprep::testing {

namespace {

void replace_all(std::string& s, std::string_view from, std::string_view to)
{
    for (auto pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size()))
        s.replace(pos, from.size(), to);
}

nlohmann::json rewrite_strings(nlohmann::json j, std::string_view from, std::string_view to)
{
    if (j.is_string()) {
        auto s = j.get<std::string>();
        replace_all(s, from, to);
        return s;
    }
    if (j.is_structured())
        for (auto& item : j)
            item = rewrite_strings(item, from, to);
    return j;
}

} // namespace

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return std::move(buf).str();
}

void write_file(const std::filesystem::path& path, std::string_view bytes)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

std::vector<WireMessage> load_session(const std::filesystem::path& path)
{
    std::vector<WireMessage> out;
    std::istringstream in(read_file(path));
    for (std::string line; std::getline(in, line);)
        if (!line.empty())
            out.push_back(message_from_json(nlohmann::json::parse(line)));
    return out;
}

void save_session(const std::filesystem::path& path, const std::vector<WireMessage>& commands)
{
    std::string text;
    for (const auto& c : commands)
        text += to_json(c).dump() + "\n";
    write_file(path, text);
}

ReplayResult replay(const std::vector<WireMessage>& commands, const std::string& data_dir)
{
    Controller controller;
    ReplayResult result;
    for (const auto& c : commands) {
        WireMessage cmd = c;
        cmd.payload = rewrite_strings(cmd.payload, data_placeholder, data_dir);
        result.replies.push_back(controller.dispatch(cmd));
    }
    const nlohmann::json state = controller.state();
    result.final_state = rewrite_strings(state, data_dir, data_placeholder);
    for (const auto& view : state["views"]) {
        const int id = view["viewId"].get<int>();
        result.renders[id] = controller.render_png(id);
    }
    return result;
}

} // namespace heprep::testing
