#include "graphdiff/io.hpp"

#include <cstdio>
#include <fstream>

#include "graphdiff/errors.hpp"

namespace graphdiff {

namespace {

std::FILE* open_or_throw(const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw ConfigError(path + ": cannot open for writing");
    return f;
}

// %.17g round-trips doubles exactly and prints identically across runs.
void put(std::FILE* f, double x) { std::fprintf(f, "%.17g", x); }

}  // namespace

void write_series_csv(const std::string& path, const std::vector<double>& times,
                      const std::vector<double>& values) {
    std::FILE* f = open_or_throw(path);
    std::fprintf(f, "t,value\n");
    for (size_t k = 0; k < times.size(); ++k) {
        put(f, times[k]);
        std::fputc(',', f);
        put(f, values[k]);
        std::fputc('\n', f);
    }
    std::fclose(f);
}

void write_graph_path_csv(const std::string& path, const GraphPath& gp) {
    std::FILE* f = open_or_throw(path);
    std::fprintf(f, "t,edge_id,coord\n");
    for (size_t k = 0; k < gp.times.size(); ++k) {
        put(f, gp.times[k]);
        std::fprintf(f, ",%d,", gp.points[k].edge);
        put(f, gp.points[k].coord);
        std::fputc('\n', f);
    }
    std::fclose(f);
}

void write_clocks_csv(const std::string& path, const std::vector<double>& times,
                      const std::vector<std::vector<double>>& clocks) {
    std::FILE* f = open_or_throw(path);
    std::fprintf(f, "t");
    for (size_t i = 0; i < clocks.size(); ++i) std::fprintf(f, ",T_%zu", i + 1);
    std::fputc('\n', f);
    for (size_t k = 0; k < times.size(); ++k) {
        put(f, times[k]);
        for (const auto& c : clocks) {
            std::fputc(',', f);
            put(f, c[k]);
        }
        std::fputc('\n', f);
    }
    std::fclose(f);
}

void write_json(const std::string& path, const nlohmann::json& doc) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError(path + ": cannot open for writing");
    out << doc.dump(2) << "\n";
}

nlohmann::json RunManifest::to_json() const {
    nlohmann::json j;
    j["tool"] = kToolVersion;
    j["command"] = command;
    j["graph"] = graph_file;
    j["params"] = params;
    j["out"] = out_dir;
    return j;
}

void write_manifest(const std::string& out_dir, const RunManifest& m) {
    write_json(out_dir + "/manifest.json", m.to_json());
}

}  // namespace graphdiff
