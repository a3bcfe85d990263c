#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace gaplab {

inline constexpr const char* kArtifactVersion = "1.0.0";

// One run request. Every field has an embedded default, can be loaded from a
// JSON document, and can be overridden by a command-line flag. The tolerances
// map carries the per-concern thresholds:
//   flow          convergence target on sup|u| for the evolution
//   oracle        closed-form comparison tolerance for the eigen stages
//   margin        accepted negative slack on gap-chain margins
//   logconcavity  accepted negative slack on two-point margins
struct RunConfig {
    int n = 2;
    double D = 2.0;
    std::vector<int> k_list = {2};
    int grid_nodes = 1001;
    double t_end = 8.0;
    std::map<std::string, double> tolerances = {
        {"flow", 1e-6}, {"oracle", 1e-8}, {"margin", 1e-4}, {"logconcavity", 1e-6}};
    std::uint64_t seed = 42;
    int pairs = 2000;
    std::string output_dir = "gaplab_out";
    bool explicit_case = false;  // --n/--D given explicitly: narrows sweeps

    double tol(const std::string& key) const;  // throws "invalid system" on unknown key
    void validate() const;

    std::string to_json() const;  // stable key order, round-trips through from_json
    static RunConfig from_json(const std::string& text);
    static RunConfig from_json_file(const std::string& path);
};

struct StageVerdict {
    std::string stage;
    bool pass = false;
    std::string detail;
};

// Written to output_dir/manifest.json after every subcommand. Lists every
// file found under output_dir (except the manifest itself) with an FNV-1a 64
// content checksum; data files are byte-reproducible for identical configs,
// the manifest differs only in its timestamps.
struct RunManifest {
    std::string command;
    std::string version = kArtifactVersion;
    std::string started_utc;
    std::string finished_utc;
    RunConfig config;
    std::vector<StageVerdict> verdicts;
    std::vector<std::pair<std::string, std::string>> files;  // rel path -> checksum hex

    bool all_pass() const;
    std::string to_json() const;
};

std::uint64_t fnv1a64(const void* data, std::size_t size);
std::uint64_t fnv1a64_file(const std::filesystem::path& path);
std::string checksum_hex(std::uint64_t value);

// Subcommand drivers. Each computes its pipeline, writes data files under
// config.output_dir, appends one log line per stage verdict, writes the
// manifest, and returns 0 iff every verdict passed.
int run_eigen(const RunConfig& cfg, std::ostream& log);
int run_robin(const RunConfig& cfg, std::ostream& log);
int run_modulus(const RunConfig& cfg, std::ostream& log);
int run_flow(const RunConfig& cfg, std::ostream& log);
int run_verify_gap(const RunConfig& cfg, std::ostream& log);
int run_sweep(const RunConfig& cfg, std::ostream& log);

}  // namespace gaplab
