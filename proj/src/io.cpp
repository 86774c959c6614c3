#include "supersim/io.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace supersim {

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << content;
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

void write_json_file(const std::filesystem::path& path, const Json& value) {
    write_text_file(path, value.dump(2) + "\n");
}

std::string csv_row(const std::vector<std::string>& cells) {
    std::string row;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i > 0) row += ',';
        row += cells[i];
    }
    row += '\n';
    return row;
}

Json make_manifest(const std::string& experiment, const Json& config_echo,
                   std::uint64_t master_seed, const std::vector<std::uint64_t>& replicate_seeds) {
    Json manifest;
    manifest["experiment"] = experiment;
    manifest["version"] = toolkit_version;
    manifest["config"] = config_echo;
    manifest["master_seed"] = master_seed;
    manifest["generator"] = "mt19937_64";
    manifest["seed_scheme"] =
        "replicate seed = splitmix64(splitmix64(splitmix64(master) ^ module) ^ index)";
    manifest["replicate_seeds"] = replicate_seeds;
    return manifest;
}

std::string summary_line(bool pass, const std::string& label, const std::string& detail) {
    std::string line = pass ? "[PASS] " : "[FAIL] ";
    line += label;
    if (!detail.empty()) {
        line += ": ";
        line += detail;
    }
    line += '\n';
    return line;
}

} // namespace supersim
