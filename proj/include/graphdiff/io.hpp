#pragma once

// Output plumbing: CSV writers for paths/ledgers/clocks and the run
// manifest.  Everything written here is deterministic — fixed float
// formatting, sorted JSON keys, no timestamps — so a rerun with the same
// manifest reproduces every file byte for byte.

#include <string>
#include <vector>

#include <json.hpp>

#include "graphdiff/assembler.hpp"
#include "graphdiff/bandit_clock.hpp"
#include "graphdiff/edge_dynamics.hpp"

namespace graphdiff {

inline constexpr const char* kToolVersion = "graphdiff 1.0.0";

// (t, value) rows.
void write_series_csv(const std::string& path, const std::vector<double>& times,
                      const std::vector<double>& values);
// (t, edge_id, coord) rows.
void write_graph_path_csv(const std::string& path, const GraphPath& gp);
// (t, T_1, ..., T_N) rows, one clock column per edge.
void write_clocks_csv(const std::string& path, const std::vector<double>& times,
                      const std::vector<std::vector<double>>& clocks);

void write_json(const std::string& path, const nlohmann::json& doc);

// Everything needed to replay a run: no implicit defaults survive into it.
struct RunManifest {
    std::string command;
    std::string graph_file;
    nlohmann::json params;  // every resolved flag value
    std::string out_dir;

    nlohmann::json to_json() const;
};

void write_manifest(const std::string& out_dir, const RunManifest& m);

}  // namespace graphdiff
