#include "prescurv/app/archive.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "prescurv/errors.hpp"

namespace prescurv::app {

namespace fs = std::filesystem;

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void write_field_csv(const fs::path& path, const BaseGrid& grid, const GridFunction& u) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << "node";
    if (grid.manifold() == BaseGrid::Manifold::Sphere2) out << ",theta,phi";
    else
        for (int a = 0; a < grid.dim(); ++a) out << ",x" << (a + 1);
    out << ",u\n";
    for (std::size_t p = 0; p < grid.size(); ++p) {
        out << p;
        for (double x : grid.coords(p)) out << ',' << format_double(x);
        out << ',' << format_double(u[p]) << '\n';
    }
    if (!out) throw Error("failed writing '" + path.string() + "'");
}

GridFunction read_field_csv(const fs::path& path, std::size_t expected_nodes) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open '" + path.string() + "'");
    std::string line;
    std::getline(in, line);
    GridFunction u(expected_nodes, 0.0);
    std::vector<char> seen(expected_nodes, 0);
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        const auto first = line.find(',');
        const auto last = line.rfind(',');
        if (first == std::string::npos) throw Error(path.string() + ":" + std::to_string(row) + ": malformed row");
        std::size_t node = 0;
        double value = 0.0;
        try {
            node = std::stoul(line.substr(0, first));
            value = std::stod(line.substr(last + 1));
        } catch (const std::exception&) {
            throw Error(path.string() + ":" + std::to_string(row) + ": non-numeric field");
        }
        if (node >= expected_nodes) throw Error(path.string() + ":" + std::to_string(row) + ": node index out of range");
        u[node] = value;
        seen[node] = 1;
    }
    for (std::size_t p = 0; p < expected_nodes; ++p)
        if (!seen[p]) throw Error(path.string() + ": node " + std::to_string(p) + " missing");
    return u;
}

ojson number_json(double x) {
    return std::isfinite(x) ? ojson(x) : ojson(nullptr);
}

ojson diagnostics_json(const DiagnosticsReport& d) {
    return ojson{{"t", number_json(d.t)},
                 {"residual_norm", number_json(d.residual_norm)},
                 {"u_min", number_json(d.u_min)},
                 {"u_max", number_json(d.u_max)},
                 {"u_spread", number_json(d.u_max - d.u_min)},
                 {"tau_min", number_json(d.tau_min)},
                 {"lambda_abs_max", number_json(d.lambda_abs_max)},
                 {"cone_margin_min", number_json(d.cone_margin_min)},
                 {"newton_maclaurin_min", number_json(d.newton_maclaurin_min)},
                 {"nodes_in_gamma_k", d.nodes_in_gamma_k},
                 {"operator_grad_min", number_json(d.operator_grad_min)},
                 {"quotient_grad_sum_min", number_json(d.quotient_grad_sum_min)},
                 {"operator_grad_sum_min", number_json(d.operator_grad_sum_min)},
                 {"box_violation", d.box_violation},
                 {"tau_nonpositive", d.tau_nonpositive},
                 {"cone_exit", d.cone_exit},
                 {"message", d.message}};
}

ojson hypotheses_json(const problem::HypothesisReport& r) {
    ojson arr = ojson::array();
    for (const auto& c : r.checks)
        arr.push_back(ojson{{"name", c.name},
                            {"description", c.description},
                            {"passed", c.passed},
                            {"worst_margin", number_json(c.worst_margin)},
                            {"worst_u", c.worst_u},
                            {"worst_node", c.worst_node},
                            {"worst_l", c.worst_l},
                            {"range", {number_json(c.range_lo), number_json(c.range_hi)}}});
    return arr;
}

std::string log_line(const StepRecord& rec) {
    return ojson{{"t", number_json(rec.t)},
                 {"newton_iters", rec.newton_iters},
                 {"residual_norm", number_json(rec.residual_norm)},
                 {"u_min", number_json(rec.diag.u_min)},
                 {"u_max", number_json(rec.diag.u_max)},
                 {"tau_min", number_json(rec.diag.tau_min)},
                 {"lambda_abs_max", number_json(rec.diag.lambda_abs_max)}}
        .dump();
}

LoadedArchive load_archive(const fs::path& dir) {
    LoadedArchive a;
    a.dir = dir;
    const fs::path meta = dir / metadata_file;
    std::ifstream in(meta);
    if (!in) throw Error("'" + dir.string() + "' is not an archive (no " + metadata_file + ")");
    try {
        a.metadata = ojson::parse(in);
    } catch (const ojson::parse_error& e) {
        throw Error(meta.string() + ": " + e.what());
    }
    if (!a.metadata.contains("config")) throw Error(meta.string() + ": missing config echo");
    a.config = parse_config(a.metadata["config"].dump(2), meta.string() + "#config", dir);
    const auto grid = build_grid(a.config.grid);
    if (fs::exists(dir / solution_file)) {
        a.u = read_field_csv(dir / solution_file, grid.size());
    } else if (fs::exists(dir / last_good_file)) {
        a.u = read_field_csv(dir / last_good_file, grid.size());
        a.final_solution = false;
    } else {
        throw Error("'" + dir.string() + "' holds no field file");
    }
    return a;
}

} // namespace prescurv::app
