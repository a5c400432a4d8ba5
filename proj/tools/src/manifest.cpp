#include "manifest.hpp"

#include <algorithm>

#include <json.hpp>

#include "caselab/util.hpp"

namespace caselab::cli {

namespace fs = std::filesystem;

std::string RunManifest::dataset_fingerprint() const {
    std::uint64_t h = fnv1a64("");
    const auto mix = [&h](const fs::path& file) {
        h = fnv1a64(file.filename().string(), h);
        h = fnv1a64(read_file(file), h);
    };
    for (const auto& in : inputs) {
        if (fs::is_directory(in)) {
            std::vector<fs::path> files;
            for (const auto& e : fs::recursive_directory_iterator(in)) {
                if (e.is_regular_file()) {
                    files.push_back(e.path());
                }
            }
            std::sort(files.begin(), files.end());
            for (const auto& f : files) {
                mix(f);
            }
        } else if (fs::is_regular_file(in)) {
            mix(in);
        }
    }
    return hex64(h);
}

std::string RunManifest::to_json(const std::string& tool_version, const std::string& timestamp) const {
    nlohmann::ordered_json j;
    j["tool"] = "caselab";
    j["tool_version"] = tool_version;
    j["command"] = command;
    j["command_line"] = command_line;
    j["config_fingerprint"] = config_fingerprint;
    j["dataset_fingerprint"] = dataset_fingerprint();
    std::vector<std::string> in;
    for (const auto& p : inputs) {
        in.push_back(p.string());
    }
    std::vector<std::string> out;
    for (const auto& p : outputs) {
        out.push_back(p.string());
    }
    j["inputs"] = in;
    j["outputs"] = out;
    j["timestamp"] = timestamp;
    return j.dump(2) + "\n";
}

fs::path manifest_path(const fs::path& primary_output) {
    return fs::path(primary_output.string() + ".manifest.json");
}

void write_manifest(const RunManifest& manifest, const fs::path& primary_output, const std::string& tool_version) {
    write_file_atomic(manifest_path(primary_output), manifest.to_json(tool_version, utc_timestamp()));
}

} // namespace caselab::cli
