#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dpnes/game.hpp"
#include "dpnes/graph.hpp"
#include "dpnes/schedules.hpp"
#include "dpnes/seeker.hpp"

namespace dpnes {

struct RunConfig {
    std::string name;           // preset name or config file stem
    std::string game_path;      // resolved absolute-ish path
    std::string topology_path;  // resolved
    ScheduleSet schedules;
    std::vector<uint64_t> seeds{1};
    long horizon = 300;
    bool zero_noise = false;
    bool freeze_actions = false;
    bool override_assumptions = false;
    SensitivityConvention convention = SensitivityConvention::empirical;
    double m3 = 1.0;
    double threshold = 0.5;
    Vec q0;                     // broadcast from a scalar when the file gives one
    std::string out_dir;

    bool operator==(const RunConfig&) const = default;
};

// Data directory resolution, in order: explicit argument, DPNES_DATA_DIR
// environment variable, compiled-in default (the repo's data/ directory).
std::string resolve_data_dir(const std::string& explicit_dir = "");

// Loads a run config from a file path, or from a named preset under
// <data>/presets/<name>.json. Validates field ranges and that the referenced
// game and topology files exist. Parse errors carry file/field diagnostics.
RunConfig load_config(const std::string& path_or_preset, const std::string& data_dir = "");

// Serialises a config back to JSON text; load_config(write_config(c)) == c.
std::string write_config(const RunConfig& c);
void write_config_file(const RunConfig& c, const std::string& path);

GameSpec load_game_file(const std::string& path);

// Descriptor grammar: {"family": <name>, "params": {...}}.
ScheduleDescriptor descriptor_from_json_text(const std::string& text);

}  // namespace dpnes
