#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace wavecluster {

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

// Collects a command's outputs: each artifact is written to the output
// directory and its digest recorded; finish() writes manifest.json last.
class RunManifest {
public:
    RunManifest(std::string command, std::filesystem::path output_dir);

    void set_config(nlohmann::json config) { config_ = std::move(config); }
    void add_input(const std::filesystem::path& path);
    // Writes `content` to output_dir/name and records it.
    void write_artifact(const std::string& name, const std::string& content);
    void set(const std::string& key, nlohmann::json value) { extra_[key] = std::move(value); }

    const std::filesystem::path& output_dir() const { return dir_; }
    nlohmann::json to_json() const;
    void finish() const;

private:
    std::string command_;
    std::filesystem::path dir_;
    nlohmann::json config_ = nlohmann::json::object();
    nlohmann::json inputs_ = nlohmann::json::array();
    nlohmann::json outputs_ = nlohmann::json::array();
    nlohmann::json extra_ = nlohmann::json::object();
};

constexpr std::string_view kVersion = "1.0.0";

}  // namespace wavecluster
