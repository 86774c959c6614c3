#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace supersim {

inline constexpr const char* toolkit_version = "0.1.0";

using Json = nlohmann::ordered_json;

// Fixed-format floating point for CSV cells: shortest exact round trip.
std::string format_double(double x);

void write_text_file(const std::filesystem::path& path, const std::string& content);
void write_json_file(const std::filesystem::path& path, const Json& value);

// One CSV row from preformatted cells.
std::string csv_row(const std::vector<std::string>& cells);

// Run manifest: experiment name, version, full configuration echo, master
// seed, and the derived per-replicate seeds.
Json make_manifest(const std::string& experiment, const Json& config_echo,
                   std::uint64_t master_seed, const std::vector<std::uint64_t>& replicate_seeds);

// "[PASS] label: detail" / "[FAIL] label: detail" summary line.
std::string summary_line(bool pass, const std::string& label, const std::string& detail);

} // namespace supersim
