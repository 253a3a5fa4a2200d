#include <CLI11.hpp>

#include <iostream>

#include "prescurv/app/commands.hpp"

namespace app = prescurv::app;

int main(int argc, char** argv) {
    CLI::App cli{"Closed graphic hypersurfaces of prescribed Weingarten curvature in warped products"};
    cli.set_version_flag("--version", app::version());
    cli.require_subcommand(1);

    std::string config;
    bool force = false;
    auto* solve = cli.add_subcommand("solve", "continue from the constant leaf to t = 1 and write an archive");
    solve->add_option("config", config, "JSON run configuration")->required();
    solve->add_flag("--force", force, "solve even if a structural hypothesis fails");

    app::VerifyOptions vopts;
    std::string failure_out = vopts.failure_out.string();
    auto* verify = cli.add_subcommand("verify", "run the oracle and property suite");
    verify->add_option("--filter", vopts.filters, "run only these families (repeatable)");
    verify->add_option("--mutate", vopts.mutate, "inject a known fault (h-sign)");
    verify->add_option("--seed", vopts.seed, "random seed");
    verify->add_option("--failure-out", failure_out, "where to write failing cases");

    std::string archive, format, out_dir;
    auto* exp = cli.add_subcommand("export", "write plot data from a solution archive");
    exp->add_option("archive", archive, "archive directory")->required();
    exp->add_option("--format", format, "csv or mesh")->required();
    exp->add_option("--out", out_dir, "output directory (default <archive>/export)");

    try {
        cli.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = cli.exit(e);
        return code == 0 ? 0 : app::exit_code::failure;
    }

    if (*solve) return app::cmd_solve(config, force, std::cout, std::cerr);
    if (*verify) {
        vopts.failure_out = failure_out;
        return app::cmd_verify(vopts, std::cout, std::cerr);
    }
    std::optional<std::filesystem::path> out;
    if (!out_dir.empty()) out = out_dir;
    return app::cmd_export(archive, format, out, std::cout, std::cerr);
}
