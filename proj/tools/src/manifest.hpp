#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace caselab::cli {

struct RunManifest {
    std::string command;
    std::vector<std::string> command_line;
    std::string config_fingerprint;
    std::vector<std::filesystem::path> inputs;
    std::vector<std::filesystem::path> outputs;

    /// Hash over the contents of every input (directories: their regular files, sorted).
    std::string dataset_fingerprint() const;
    std::string to_json(const std::string& tool_version, const std::string& timestamp) const;
};

/// `<primary_output>.manifest.json`
std::filesystem::path manifest_path(const std::filesystem::path& primary_output);

void write_manifest(const RunManifest& manifest, const std::filesystem::path& primary_output,
                    const std::string& tool_version);

} // namespace caselab::cli
