#pragma once

// Batch front end: JSON run configs, the walk / measure / geometry commands,
// and the on-disk layout of a run (manifest, config echo, summary, CSVs).

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "convwalk/annuli.hpp"
#include "convwalk/walks.hpp"

namespace convwalk::cli {

inline constexpr const char* kToolName = "convwalk";
inline constexpr const char* kToolVersion = "0.1.0";

/// A validated run configuration. Every field has been parsed and checked
/// before any computation starts; `section` holds the command-specific block.
struct RunConfig {
    std::string command;
    Model model = Model::free_group;
    std::uint64_t seed = 0;
    std::size_t ball_radius = 2;
    nlohmann::json annulus;        ///< null: the model's default generator
    nlohmann::json mu = "uniform"; ///< "uniform" or {"support": [...], "generation_override": "..."}
    std::size_t n = 200;
    std::size_t trials = 1000;
    std::size_t depth = 6;
    std::size_t arc_bins = 1024;
    LimitOptions limit;
    std::optional<std::array<std::string, 3>> basepoint;
    std::string cache_dir;
    nlohmann::json section = nlohmann::json::object();

    /// Fully resolved form; feeding it back reproduces the run.
    nlohmann::json to_json() const;
};

/// Throws Error(ErrorCode::config) on unknown fields, bad types, a missing
/// seed or values the modules would reject.
RunConfig parse_config(const nlohmann::json& raw, const std::string& command,
                       std::optional<std::uint64_t> seed_override = std::nullopt);

StepDistribution step_law(const RunConfig& cfg);
Annulus generator_annulus(const RunConfig& cfg);
Triple basepoint(const RunConfig& cfg);
AnnulusSystem annulus_system(const RunConfig& cfg);

struct Table {
    std::string name;  ///< file stem
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

std::string to_csv(const Table& t);
/// Shortest round-trip decimal form.
std::string format_number(double v);

struct RunOutput {
    nlohmann::json summary = nlohmann::json::object();
    std::vector<Table> tables;
};

RunOutput run_walk(const RunConfig& cfg, int workers);
RunOutput run_measure(const RunConfig& cfg, int workers);
RunOutput run_geometry(const RunConfig& cfg, int workers);
RunOutput run_command(const RunConfig& cfg, int workers);

/// Writes manifest.json, config.json, summary.json and one CSV per table.
void write_run(const std::filesystem::path& dir, const RunConfig& cfg, int workers, const RunOutput& out);

/// Entry point of the command-line tool. Returns the process exit status:
/// 0 on success, the ErrorCode value on failure, 1 if selftest has failures.
int main(int argc, char** argv);

}  // namespace convwalk::cli
