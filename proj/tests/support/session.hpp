#pragma once

#include "heprep/control.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace heprep::testing {

/// "${DATA}" in recorded uris stands for the test data directory.
inline constexpr std::string_view data_placeholder = "${DATA}";

std::vector<WireMessage> load_session(const std::filesystem::path& path);
void save_session(const std::filesystem::path& path, const std::vector<WireMessage>& commands);

struct ReplayResult
{
    std::vector<WireMessage> replies;
    nlohmann::json final_state;          // uris re-expressed with the placeholder
    std::map<int, std::string> renders;  // PNG per view of the final state
};

/// Replays the commands on a fresh Controller built from default options.
ReplayResult replay(const std::vector<WireMessage>& commands, const std::string& data_dir);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

} // namespace heprep::testing
