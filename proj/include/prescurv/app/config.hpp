#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "prescurv/coefficients.hpp"
#include "prescurv/grid.hpp"
#include "prescurv/problem.hpp"
#include "prescurv/warping.hpp"

namespace prescurv::app {

using ojson = nlohmann::ordered_json;

struct GridConfig {
    std::string manifold = "flat_torus"; // flat_torus | sphere2
    std::vector<int> counts;             // flat_torus
    std::vector<double> periods;         // flat_torus
    int n_theta = 0;                     // sphere2
    int n_phi = 0;                       // sphere2
    bool operator==(const GridConfig&) const = default;
};

struct WarpingConfig {
    std::string kind = "space_form"; // space_form | power | table
    double K = 0.0;
    double p = 1.0;
    std::vector<double> t, f;
    bool operator==(const WarpingConfig&) const = default;
};

struct RunConfig {
    GridConfig grid;
    WarpingConfig warping;
    int k = 2;
    std::vector<CoefficientSpec> coefficients;
    double r1 = 0.0;
    double r2 = 0.0;
    PhiFunction phi;
    double epsilon_max = 0.05;
    SolverControls controls;
    std::string output; // absolute after loading
    std::uint64_t seed = 0;
    bool export_csv = false;
    bool export_mesh = false;
    bool operator==(const RunConfig&) const = default;
};

/// Strict parse: unknown keys and wrong types are rejected with
/// "source:line: message". Relative paths are resolved against base_dir.
RunConfig parse_config(const std::string& text, const std::string& source, const std::filesystem::path& base_dir);

/// Reads and parses a config file; paths resolve relative to its directory.
RunConfig load_config(const std::filesystem::path& path);

ojson to_json(const RunConfig& cfg);
std::string serialize_config(const RunConfig& cfg);

/// Line of every JSON pointer in text ("" for the root, "/grid/counts/0", ...).
std::map<std::string, int> json_pointer_lines(const std::string& text);

BaseGrid build_grid(const GridConfig& g);
WarpingFunction build_warping(const WarpingConfig& w);
Problem build_problem(const RunConfig& cfg);

const char* jacobian_mode_name(JacobianMode m);

} // namespace prescurv::app
