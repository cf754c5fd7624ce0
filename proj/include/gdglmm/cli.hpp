#pragma once

#include "gdglmm/postprocess.hpp"
#include "gdglmm/simulate.hpp"

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace gdglmm::cli {

struct RunManifest {
    std::string spec_path;
    std::string data_path;
    std::string centroids_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<int> chains;
    std::optional<int> burnin;
    std::optional<int> kept;
    std::optional<int> thin;
    int threads = 0;
    bool dump_draws = false;
    bool dump_design = false;
    CurveScale scale = CurveScale::link;
};

/// Each command writes its files and returns an exit status. Errors are
/// reported as one line on `err`: `error module=<m> code=<c>: <message>`.
int cmd_fit(const RunManifest& manifest, std::ostream& err);

struct SimulateRequest {
    std::string scenario;
    std::uint64_t seed = 1;
    std::string out_dir;
    SimulationSize size;
};
int cmd_simulate(const SimulateRequest& request, std::ostream& err);

int cmd_sensitivity(const RunManifest& manifest, const std::vector<std::string>& roster,
                    std::ostream& err);

/// Recomputes diagnostics from --dump-draws files.
int cmd_diagnose(const std::vector<std::string>& draw_files, const std::string& out_dir,
                 std::ostream& err);

int run(int argc, char** argv);

}  // namespace gdglmm::cli
