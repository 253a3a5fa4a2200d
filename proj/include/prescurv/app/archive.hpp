#pragma once

// On-disk layout of a solve:
//   solution.csv          node, coordinates, u   (17 significant digits)
//   metadata.json         config echo, version, status, hypotheses, diagnostics
//   log.jsonl             one record per accepted continuation step
//   last_good_state.csv   written instead of solution.csv when continuation fails

#include <filesystem>
#include <iosfwd>
#include <string>

#include "prescurv/app/config.hpp"
#include "prescurv/grid.hpp"
#include "prescurv/problem.hpp"
#include "prescurv/solver.hpp"

namespace prescurv::app {

inline constexpr const char* solution_file = "solution.csv";
inline constexpr const char* metadata_file = "metadata.json";
inline constexpr const char* log_file = "log.jsonl";
inline constexpr const char* last_good_file = "last_good_state.csv";

/// "%.17g"
std::string format_double(double x);

void write_field_csv(const std::filesystem::path& path, const BaseGrid& grid, const GridFunction& u);

/// Reads the u column of a field CSV; the node count must match.
GridFunction read_field_csv(const std::filesystem::path& path, std::size_t expected_nodes);

/// JSON value with non-finite doubles rendered as null.
ojson number_json(double x);
ojson diagnostics_json(const DiagnosticsReport& d);
ojson hypotheses_json(const problem::HypothesisReport& r);

/// {t, newton_iters, residual_norm, u_min, u_max, tau_min, lambda_abs_max}
std::string log_line(const StepRecord& rec);

struct LoadedArchive {
    std::filesystem::path dir;
    ojson metadata;
    RunConfig config;
    GridFunction u;
    bool final_solution = true; // false when only last_good_state.csv exists
};

/// Loads an archive using only its own files.
LoadedArchive load_archive(const std::filesystem::path& dir);

} // namespace prescurv::app
