#include "prescurv/coefficients.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "prescurv/errors.hpp"

namespace prescurv {

double Profile::eval(const BaseGrid& grid, std::size_t node) const {
    const auto x = grid.coords(node);
    double v = 0.0;
    for (const auto& term : terms) {
        double arg = term.phase;
        for (std::size_t a = 0; a < term.wave.size() && a < x.size(); ++a) arg += term.wave[a] * x[a];
        v += term.coef * std::cos(arg);
    }
    if (grid.manifold() == BaseGrid::Manifold::Sphere2) {
        const auto e = grid.embedding(node);
        v += linear[0] * e[0] + linear[1] * e[1] + linear[2] * e[2];
    }
    return v;
}

bool Profile::empty() const noexcept {
    return terms.empty() && linear == std::array<double, 3>{0.0, 0.0, 0.0};
}

CoefficientTable::CoefficientTable(std::vector<double> u_samples, std::size_t nodes, std::vector<double> values)
    : u_(std::move(u_samples)), nodes_(nodes), values_(std::move(values)) {
    if (u_.size() < 2) throw ConfigError("coefficient table needs at least two u samples");
    if (values_.size() != u_.size() * nodes_) throw ConfigError("coefficient table is not a full (u x node) grid");
    for (std::size_t i = 1; i < u_.size(); ++i)
        if (!(u_[i] > u_[i - 1])) throw ConfigError("coefficient table u samples must increase");
}

CoefficientTable CoefficientTable::read_csv(const std::string& path, std::size_t expected_nodes) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open coefficient table '" + path + "'");

    auto fail = [&](std::size_t row, const std::string& msg) -> ConfigError {
        return ConfigError(path + ":" + std::to_string(row) + ": " + msg);
    };

    std::string line;
    std::size_t row = 0;
    if (!std::getline(in, line)) throw fail(1, "empty file, expected header 'u,node,value'");
    ++row;
    {
        std::string h = line;
        h.erase(std::remove_if(h.begin(), h.end(), [](unsigned char c) { return std::isspace(c); }), h.end());
        if (h != "u,node,value" && h != "u,node-index,value" && h != "u,node_index,value")
            throw fail(row, "expected header 'u,node,value', got '" + line + "'");
    }

    std::map<double, std::map<std::size_t, double>> cells;
    while (std::getline(in, line)) {
        ++row;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::stringstream ss(line);
        std::string fu, fn, fv, extra;
        if (!std::getline(ss, fu, ',') || !std::getline(ss, fn, ',') || !std::getline(ss, fv, ','))
            throw fail(row, "expected 3 columns");
        if (std::getline(ss, extra, ',')) throw fail(row, "more than 3 columns");
        double u = 0.0, v = 0.0;
        long long node = 0;
        try {
            std::size_t pos = 0;
            u = std::stod(fu, &pos);
            node = std::stoll(fn);
            v = std::stod(fv);
        } catch (const std::exception&) {
            throw fail(row, "non-numeric field");
        }
        if (!std::isfinite(u) || !std::isfinite(v)) throw fail(row, "non-finite value");
        if (node < 0 || static_cast<std::size_t>(node) >= expected_nodes)
            throw fail(row, "node index " + std::to_string(node) + " outside [0, " + std::to_string(expected_nodes) + ")");
        auto [it, inserted] = cells[u].emplace(static_cast<std::size_t>(node), v);
        if (!inserted) throw fail(row, "duplicate (u, node) entry");
    }
    if (cells.size() < 2) throw ConfigError(path + ": coefficient table needs at least two distinct u samples");

    std::vector<double> us;
    std::vector<double> values;
    values.reserve(cells.size() * expected_nodes);
    for (const auto& [u, byNode] : cells) {
        if (byNode.size() != expected_nodes)
            throw ConfigError(path + ": u = " + std::to_string(u) + " has " + std::to_string(byNode.size()) +
                              " nodes, expected " + std::to_string(expected_nodes));
        us.push_back(u);
        for (const auto& [node, v] : byNode) values.push_back(v);
    }
    return CoefficientTable(std::move(us), expected_nodes, std::move(values));
}

double CoefficientTable::slope(std::size_t i, std::size_t node) const {
    const std::size_t n = u_.size();
    if (i == 0) return (at(1, node) - at(0, node)) / (u_[1] - u_[0]);
    if (i == n - 1) return (at(n - 1, node) - at(n - 2, node)) / (u_[n - 1] - u_[n - 2]);
    return (at(i + 1, node) - at(i - 1, node)) / (u_[i + 1] - u_[i - 1]);
}

CoefficientTable::Sample CoefficientTable::eval(double u, std::size_t node) const {
    if (!(u >= u_.front() && u <= u_.back())) {
        std::ostringstream os;
        os << "u = " << u << " outside coefficient table range [" << u_.front() << ", " << u_.back() << "]";
        throw DomainError(os.str());
    }
    auto it = std::upper_bound(u_.begin(), u_.end(), u);
    std::size_t i = it == u_.begin() ? 0 : static_cast<std::size_t>(it - u_.begin()) - 1;
    if (i >= u_.size() - 1) i = u_.size() - 2;
    const double h = u_[i + 1] - u_[i];
    const double s = (u - u_[i]) / h;
    const double y0 = at(i, node), y1 = at(i + 1, node);
    const double m0 = slope(i, node) * h, m1 = slope(i + 1, node) * h;
    const double s2 = s * s, s3 = s2 * s;
    const double value = (2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * m0 + (-2 * s3 + 3 * s2) * y1 + (s3 - s2) * m1;
    const double ds = (6 * s2 - 6 * s) * y0 + (3 * s2 - 4 * s + 1) * m0 + (-6 * s2 + 6 * s) * y1 + (3 * s2 - 2 * s) * m1;
    return {value, ds / h};
}

CoefficientFamily::CoefficientFamily(std::vector<CoefficientSpec> specs, const BaseGrid& grid, int k)
    : k_(k), nodes_(grid.size()), specs_(std::move(specs)) {
    if (static_cast<int>(specs_.size()) != k_)
        throw ConfigError("expected " + std::to_string(k_) + " coefficients alpha_0..alpha_" + std::to_string(k_ - 1) +
                          ", got " + std::to_string(specs_.size()));
    psi_.assign(specs_.size() * nodes_, 0.0);
    tables_.resize(specs_.size());
    for (std::size_t l = 0; l < specs_.size(); ++l) {
        const auto& s = specs_[l];
        if (s.table_path) {
            tables_[l] = CoefficientTable::read_csv(*s.table_path, nodes_);
            continue;
        }
        if (!(s.amplitude > 0.0)) throw ConfigError("alpha_" + std::to_string(l) + " amplitude must be positive");
        if (!(s.epsilon >= 0.0)) throw ConfigError("alpha_" + std::to_string(l) + " epsilon must be nonnegative");
        for (const auto& term : s.profile.terms)
            if (term.wave.size() != static_cast<std::size_t>(grid.dim()))
                throw ConfigError("alpha_" + std::to_string(l) + " profile wave vector must have " +
                                  std::to_string(grid.dim()) + " entries");
        for (std::size_t p = 0; p < nodes_; ++p) psi_[l * nodes_ + p] = s.profile.eval(grid, p);
    }
}

CoefficientFamily::Value CoefficientFamily::eval(int l, double u, std::size_t node, const WarpingFunction::Values& w) const {
    if (const auto& table = tables_[l]) {
        const auto s = table->eval(u, node);
        return {s.value, s.du};
    }
    const auto& s = specs_[l];
    const double power = s.f_power.value_or(-(k_ - l));
    const double value = s.amplitude * std::pow(w.f, power) * (1.0 + s.epsilon * profile_at(l, node));
    return {value, power * w.df / w.f * value};
}

double CoefficientFamily::scaled(int l, double u, std::size_t node, const WarpingFunction& warp) const {
    const auto& s = specs_[l];
    if (!tables_[l]) {
        const double base = s.amplitude * (1.0 + s.epsilon * profile_at(l, node));
        const double power = s.f_power.value_or(-(k_ - l));
        if (power == -(k_ - l)) return base;
        return base * std::pow(warp.eval(u).f, k_ - l + power);
    }
    const auto w = warp.eval(u);
    return std::pow(w.f, k_ - l) * tables_[l]->eval(u, node).value;
}

} // namespace prescurv
