#include "prescurv/app/commands.hpp"

#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <ostream>

#include "prescurv/app/archive.hpp"
#include "prescurv/app/config.hpp"
#include "prescurv/errors.hpp"
#include "prescurv/geometry.hpp"
#include "prescurv/solver.hpp"

#ifndef PRESCURV_VERSION
#define PRESCURV_VERSION "0.0.0"
#endif

namespace prescurv::app {

namespace fs = std::filesystem;

std::string version() { return PRESCURV_VERSION; }

namespace {

ojson base_metadata(const RunConfig& cfg) {
    ojson m;
    m["software"] = ojson{{"name", "prescurv"}, {"version", version()}};
    m["config"] = to_json(cfg);
    return m;
}

void write_json(const fs::path& path, const ojson& j) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << j.dump(2) << '\n';
}

} // namespace

int cmd_solve(const fs::path& config_path, bool force, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    std::optional<Problem> pb;
    try {
        cfg = load_config(config_path);
        pb.emplace(build_problem(cfg));
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code::failure;
    }

    const fs::path dir = cfg.output;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        err << "error: cannot create output directory '" << dir.string() << "': " << ec.message() << '\n';
        return exit_code::failure;
    }
    for (const char* stale : {solution_file, last_good_file, log_file}) fs::remove(dir / stale, ec);

    ojson meta = base_metadata(cfg);
    try {
        const auto report = problem::check_hypotheses(*pb);
        meta["hypotheses"] = hypotheses_json(report);
        meta["forced"] = force;
        if (!report.passed()) {
            try {
                problem::enforce_hypotheses(report);
            } catch (const HypothesisError& e) {
                if (!force) {
                    meta["status"] = "hypothesis_rejected";
                    meta["rejected_hypothesis"] = e.hypothesis();
                    write_json(dir / metadata_file, meta);
                    err << "error: " << e.what() << '\n';
                    for (const auto& c : report.checks)
                        if (!c.passed)
                            err << fmt::format("  failed {}: margin {:.4g} at u = {:.6g}, node {}{}\n", c.name,
                                               c.worst_margin, c.worst_u, c.worst_node,
                                               c.worst_l >= 0 ? fmt::format(", l = {}", c.worst_l) : "");
                    return exit_code::hypothesis;
                }
                err << "warning: --force given, continuing although " << e.what() << '\n';
            }
        }

        std::ofstream log(dir / log_file);
        if (!log) throw Error("cannot write '" + (dir / log_file).string() + "'");
        auto observer = [&](const StepRecord& rec, const GridFunction&) {
            log << log_line(rec) << '\n';
            log.flush();
            out << fmt::format("t = {:<10.6g} newton {:>2}  |F| = {:.3e}  u in [{:.9f}, {:.9f}]\n", rec.t,
                               rec.newton_iters, rec.residual_norm, rec.diag.u_min, rec.diag.u_max);
        };

        ContinuationState state;
        try {
            state = continuation(*pb, observer);
        } catch (const ContinuationFailure& f) {
            const auto& last = f.last_good();
            write_field_csv(dir / last_good_file, pb->grid(), last.u);
            meta["status"] = "continuation_failure";
            meta["message"] = f.what();
            meta["last_good_t"] = last.t;
            meta["diagnostics"] = diagnostics_json(last.diagnostics);
            write_json(dir / metadata_file, meta);
            err << "error: " << f.what() << "\n  last good state (t = " << last.t << ") written to "
                << (dir / last_good_file).string() << '\n';
            return exit_code::continuation;
        }

        write_field_csv(dir / solution_file, pb->grid(), state.u);
        meta["status"] = "converged";
        meta["t"] = state.t;
        meta["accepted_steps"] = state.steps.size() - 1;
        meta["rejected_steps"] = state.rejected_steps;
        meta["newton_iterations"] = state.total_newton_iterations;
        meta["diagnostics"] = diagnostics_json(state.diagnostics);
        write_json(dir / metadata_file, meta);
        out << fmt::format("converged at t = {}; solution written to {}\n", state.t, (dir / solution_file).string());
    } catch (const Error& e) {
        meta["status"] = "error";
        meta["message"] = e.what();
        try {
            write_json(dir / metadata_file, meta);
        } catch (const Error&) {
        }
        err << "error: " << e.what() << '\n';
        return exit_code::failure;
    }

    if (cfg.export_csv && cmd_export(dir, "csv", std::nullopt, out, err) != exit_code::ok) return exit_code::failure;
    if (cfg.export_mesh && cmd_export(dir, "mesh", std::nullopt, out, err) != exit_code::ok) return exit_code::failure;
    return exit_code::ok;
}

namespace {

void export_sphere_csv(const fs::path& out_dir, const BaseGrid& grid, const WarpingFunction& warp,
                       const GridFunction& u) {
    const auto recs = geometry::fundamental_forms(u, grid, warp);
    std::ofstream out(out_dir / "latlong.csv");
    if (!out) throw Error("cannot write latlong.csv");
    out << "theta,phi,u,lambda_max\n";
    for (std::size_t p = 0; p < grid.size(); ++p) {
        const auto x = grid.coords(p);
        const auto& lam = recs[p].lam;
        out << format_double(x[0]) << ',' << format_double(x[1]) << ',' << format_double(u[p]) << ','
            << format_double(lam(lam.size() - 1)) << '\n';
    }
}

void export_torus_slices(const fs::path& out_dir, const BaseGrid& grid, const GridFunction& u) {
    const int n = grid.dim();
    const auto& counts = grid.counts();
    for (int fixed = 0; fixed < n; ++fixed) {
        const fs::path path = out_dir / fmt::format("slice_x{}.csv", fixed + 1);
        std::ofstream out(path);
        if (!out) throw Error("cannot write " + path.string());
        std::vector<int> free;
        for (int a = 0; a < n; ++a)
            if (a != fixed) free.push_back(a);
        for (int a : free) out << 'x' << (a + 1) << ',';
        out << "u\n";
        std::vector<int> mi(static_cast<std::size_t>(n), 0);
        mi[fixed] = counts[fixed] / 2;
        const int n0 = counts[free[0]];
        const int n1 = free.size() > 1 ? counts[free[1]] : 1;
        for (int i = 0; i < n0; ++i)
            for (int j = 0; j < n1; ++j) {
                mi[free[0]] = i;
                if (free.size() > 1) mi[free[1]] = j;
                const std::size_t p = grid.index(mi);
                const auto x = grid.coords(p);
                for (int a : free) out << format_double(x[a]) << ',';
                out << format_double(u[p]) << '\n';
            }
    }
}

void export_sphere_mesh(const fs::path& out_dir, const BaseGrid& grid, const GridFunction& u) {
    std::ofstream out(out_dir / "surface.obj");
    if (!out) throw Error("cannot write surface.obj");
    const int nt = grid.counts()[0], np = grid.counts()[1];
    out << "# radial graph r = u(theta, phi) over the unit sphere\n";
    auto vertex = [&](const std::array<double, 3>& e, double r) {
        out << "v " << format_double(r * e[0]) << ' ' << format_double(r * e[1]) << ' ' << format_double(r * e[2]) << '\n';
    };
    for (std::size_t p = 0; p < grid.size(); ++p) vertex(grid.embedding(p), u[p]);
    double north = 0.0, south = 0.0;
    for (int j = 0; j < np; ++j) {
        const int top[2] = {0, j}, bottom[2] = {nt - 1, j};
        north += u[grid.index(top)];
        south += u[grid.index(bottom)];
    }
    vertex({0.0, 0.0, 1.0}, north / np);
    vertex({0.0, 0.0, -1.0}, south / np);
    const std::size_t vn = grid.size() + 1, vs = grid.size() + 2; // 1-based
    auto id = [&](int i, int j) {
        const int m[2] = {i, (j + np) % np};
        return grid.index(m) + 1;
    };
    for (int j = 0; j < np; ++j) out << "f " << vn << ' ' << id(0, j) << ' ' << id(0, j + 1) << '\n';
    for (int i = 0; i + 1 < nt; ++i)
        for (int j = 0; j < np; ++j) {
            out << "f " << id(i, j) << ' ' << id(i + 1, j) << ' ' << id(i + 1, j + 1) << '\n';
            out << "f " << id(i, j) << ' ' << id(i + 1, j + 1) << ' ' << id(i, j + 1) << '\n';
        }
    for (int j = 0; j < np; ++j) out << "f " << vs << ' ' << id(nt - 1, j + 1) << ' ' << id(nt - 1, j) << '\n';
}

} // namespace

int cmd_export(const fs::path& archive, const std::string& format, const std::optional<fs::path>& out_dir,
               std::ostream& out, std::ostream& err) {
    if (format != "csv" && format != "mesh") {
        err << "error: unknown export format '" << format << "' (expected csv or mesh)\n";
        return exit_code::failure;
    }
    try {
        const auto a = load_archive(archive);
        const auto grid = build_grid(a.config.grid);
        const fs::path dir = out_dir.value_or(archive / "export");
        fs::create_directories(dir);
        if (!a.final_solution) err << "warning: archive holds only a last good state; exporting it\n";
        const bool sphere = grid.manifold() == BaseGrid::Manifold::Sphere2;
        if (format == "csv") {
            if (sphere) export_sphere_csv(dir, grid, build_warping(a.config.warping), a.u);
            else export_torus_slices(dir, grid, a.u);
        } else {
            if (!sphere) {
                err << "error: mesh export needs a sphere2 archive\n";
                return exit_code::failure;
            }
            export_sphere_mesh(dir, grid, a.u);
        }
        out << "exported " << format << " to " << dir.string() << '\n';
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_code::failure;
    }
    return exit_code::ok;
}

} // namespace prescurv::app
