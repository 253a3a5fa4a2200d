#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace prescurv::app {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int failure = 1;        // I/O, validation, usage
inline constexpr int continuation = 2;   // path-following gave up
inline constexpr int hypothesis = 3;     // structural hypotheses rejected
inline constexpr int verification = 4;   // a verify property failed
} // namespace exit_code

std::string version();

/// Runs check_hypotheses and continuation for a config file and writes the archive.
int cmd_solve(const std::filesystem::path& config, bool force, std::ostream& out, std::ostream& err);

struct VerifyOptions {
    std::vector<std::string> filters;  // empty: every family
    std::string mutate;                // "" or "h-sign"
    std::uint64_t seed = 20240917;
    std::filesystem::path failure_out = "verify_failure.json";
};

/// Families: sigma-brute, newton-maclaurin, leaf-identity, jacobian-fd, radial-e2e.
const std::vector<std::string>& verify_families();

int cmd_verify(const VerifyOptions& opts, std::ostream& out, std::ostream& err);

/// format: csv | mesh. Output goes to out_dir, default <archive>/export.
int cmd_export(const std::filesystem::path& archive, const std::string& format,
               const std::optional<std::filesystem::path>& out_dir, std::ostream& out, std::ostream& err);

} // namespace prescurv::app
