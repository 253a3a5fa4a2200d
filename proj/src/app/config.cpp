#include "prescurv/app/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include "prescurv/errors.hpp"

namespace prescurv::app {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::map<std::string, int> json_pointer_lines(const std::string& text) {
    struct Frame {
        bool object;
        std::string path;
        int index = 0;
        std::string key;
        bool expect_key = true;
    };
    std::map<std::string, int> lines;
    std::vector<Frame> stack;
    int line = 1;

    auto value_start = [&]() -> std::string {
        if (stack.empty()) {
            lines.emplace("", line);
            return "";
        }
        auto& top = stack.back();
        const std::string p = top.object ? top.path + "/" + top.key : top.path + "/" + std::to_string(top.index);
        lines.emplace(p, line);
        return p;
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (c == '\n') {
            ++line;
        } else if (c == '"') {
            std::string s;
            for (++i; i < text.size() && text[i] != '"'; ++i) {
                if (text[i] == '\\' && i + 1 < text.size()) ++i;
                s += text[i];
            }
            if (!stack.empty() && stack.back().object && stack.back().expect_key) {
                stack.back().key = s;
                stack.back().expect_key = false;
                lines.emplace(stack.back().path + "/" + s, line);
            } else {
                value_start();
            }
        } else if (c == '{' || c == '[') {
            const std::string p = value_start();
            stack.push_back(Frame{c == '{', p, 0, {}, true});
        } else if (c == '}' || c == ']') {
            if (!stack.empty()) stack.pop_back();
        } else if (c == ',') {
            if (!stack.empty()) {
                if (stack.back().object) stack.back().expect_key = true;
                else ++stack.back().index;
            }
        } else if (c == ':' || std::isspace(static_cast<unsigned char>(c))) {
        } else {
            value_start();
            while (i + 1 < text.size() && !std::strchr(",]}\n \t\r", text[i + 1])) ++i;
        }
    }
    return lines;
}

namespace {

class Reader {
public:
    Reader(const std::string& text, std::string source, fs::path base)
        : lines_(json_pointer_lines(text)), source_(std::move(source)), base_(std::move(base)) {}

    [[noreturn]] void fail(const std::string& path, const std::string& msg) const {
        std::string p = path;
        int line = 1;
        for (;;) {
            auto it = lines_.find(p);
            if (it != lines_.end()) {
                line = it->second;
                break;
            }
            if (p.empty()) break;
            p = p.substr(0, p.rfind('/'));
        }
        const std::string where = path.empty() ? "config" : path;
        throw ConfigError(source_ + ":" + std::to_string(line) + ": " + where + ": " + msg);
    }

    void object(const json& j, const std::string& path, std::initializer_list<const char*> allowed,
                std::initializer_list<const char*> required) const {
        if (!j.is_object()) fail(path, "expected an object");
        std::set<std::string> ok(allowed.begin(), allowed.end());
        for (const auto& [key, v] : j.items())
            if (!ok.count(key)) fail(path + "/" + key, "unknown key '" + key + "'");
        for (const char* r : required)
            if (!j.contains(r)) fail(path, std::string("missing required key '") + r + "'");
    }

    double number(const json& j, const std::string& path) const {
        if (!j.is_number()) fail(path, "expected a number");
        const double v = j.get<double>();
        if (!std::isfinite(v)) fail(path, "expected a finite number");
        return v;
    }

    long long integer(const json& j, const std::string& path) const {
        if (!j.is_number_integer()) fail(path, "expected an integer");
        return j.get<long long>();
    }

    bool boolean(const json& j, const std::string& path) const {
        if (!j.is_boolean()) fail(path, "expected true or false");
        return j.get<bool>();
    }

    std::string string(const json& j, const std::string& path) const {
        if (!j.is_string()) fail(path, "expected a string");
        return j.get<std::string>();
    }

    std::vector<double> numbers(const json& j, const std::string& path) const {
        if (!j.is_array()) fail(path, "expected an array of numbers");
        std::vector<double> v;
        for (std::size_t i = 0; i < j.size(); ++i) v.push_back(number(j[i], path + "/" + std::to_string(i)));
        return v;
    }

    std::string resolve(const std::string& p) const {
        fs::path q(p);
        if (q.is_relative()) q = base_ / q;
        return q.lexically_normal().string();
    }

private:
    std::map<std::string, int> lines_;
    std::string source_;
    fs::path base_;
};

JacobianMode parse_mode(const Reader& r, const json& j, const std::string& path) {
    const auto s = r.string(j, path);
    if (s == "colored_fd") return JacobianMode::ColoredFiniteDifference;
    if (s == "analytic") return JacobianMode::Analytic;
    r.fail(path, "jacobian must be 'colored_fd' or 'analytic', got '" + s + "'");
}

} // namespace

const char* jacobian_mode_name(JacobianMode m) {
    return m == JacobianMode::Analytic ? "analytic" : "colored_fd";
}

RunConfig parse_config(const std::string& text, const std::string& source, const fs::path& base_dir) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        // byte offset -> line
        const std::size_t at = std::min(e.byte, text.size());
        const int line = 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(at ? at - 1 : 0), '\n'));
        std::string msg = e.what();
        if (auto pos = msg.find("syntax error"); pos != std::string::npos) msg = msg.substr(pos);
        throw ConfigError(source + ":" + std::to_string(line) + ": invalid JSON: " + msg);
    }
    const Reader r(text, source, base_dir);
    r.object(j, "", {"grid", "warping", "k", "coefficients", "annulus", "phi", "epsilon_max", "controls", "output", "seed", "export"},
             {"grid", "warping", "k", "coefficients", "annulus", "phi", "output"});

    RunConfig c;

    {
        const auto& g = j["grid"];
        r.object(g, "/grid", {"manifold", "counts", "periods", "n_theta", "n_phi"}, {"manifold"});
        c.grid.manifold = r.string(g["manifold"], "/grid/manifold");
        if (c.grid.manifold == "flat_torus") {
            r.object(g, "/grid", {"manifold", "counts", "periods"}, {"counts"});
            const auto& counts = g["counts"];
            if (!counts.is_array() || counts.size() < 2 || counts.size() > 3) r.fail("/grid/counts", "expected 2 or 3 node counts");
            for (std::size_t i = 0; i < counts.size(); ++i) {
                const auto v = r.integer(counts[i], "/grid/counts/" + std::to_string(i));
                if (v < 4) r.fail("/grid/counts/" + std::to_string(i), "at least 4 nodes per axis are required");
                c.grid.counts.push_back(static_cast<int>(v));
            }
            if (g.contains("periods")) {
                c.grid.periods = r.numbers(g["periods"], "/grid/periods");
                if (c.grid.periods.size() != c.grid.counts.size()) r.fail("/grid/periods", "needs one period per axis");
                for (std::size_t i = 0; i < c.grid.periods.size(); ++i)
                    if (!(c.grid.periods[i] > 0.0)) r.fail("/grid/periods/" + std::to_string(i), "periods must be positive");
            } else {
                c.grid.periods.assign(c.grid.counts.size(), 2.0 * M_PI);
            }
        } else if (c.grid.manifold == "sphere2") {
            r.object(g, "/grid", {"manifold", "n_theta", "n_phi"}, {"n_theta", "n_phi"});
            const auto nt = r.integer(g["n_theta"], "/grid/n_theta");
            const auto np = r.integer(g["n_phi"], "/grid/n_phi");
            if (nt < 4) r.fail("/grid/n_theta", "at least 4 colatitude nodes are required");
            if (np < 4 || np % 2) r.fail("/grid/n_phi", "n_phi must be even and at least 4");
            c.grid.n_theta = static_cast<int>(nt);
            c.grid.n_phi = static_cast<int>(np);
        } else {
            r.fail("/grid/manifold", "manifold must be 'flat_torus' or 'sphere2', got '" + c.grid.manifold + "'");
        }
    }

    {
        const auto& w = j["warping"];
        r.object(w, "/warping", {"kind", "K", "p", "t", "f"}, {"kind"});
        c.warping.kind = r.string(w["kind"], "/warping/kind");
        if (c.warping.kind == "space_form") {
            r.object(w, "/warping", {"kind", "K"}, {"K"});
            c.warping.K = r.number(w["K"], "/warping/K");
        } else if (c.warping.kind == "power") {
            r.object(w, "/warping", {"kind", "p"}, {"p"});
            c.warping.p = r.number(w["p"], "/warping/p");
            if (!(c.warping.p > 0.0)) r.fail("/warping/p", "power must be positive");
        } else if (c.warping.kind == "table") {
            r.object(w, "/warping", {"kind", "t", "f"}, {"t", "f"});
            c.warping.t = r.numbers(w["t"], "/warping/t");
            c.warping.f = r.numbers(w["f"], "/warping/f");
            if (c.warping.t.size() != c.warping.f.size()) r.fail("/warping/f", "t and f must have equal length");
            if (c.warping.t.size() < 4) r.fail("/warping/t", "a warping table needs at least 4 samples");
        } else {
            r.fail("/warping/kind", "kind must be 'space_form', 'power' or 'table', got '" + c.warping.kind + "'");
        }
    }

    {
        const auto k = r.integer(j["k"], "/k");
        if (k < 2 || k > 3) r.fail("/k", "k must be 2 or 3");
        c.k = static_cast<int>(k);
    }

    {
        const auto& arr = j["coefficients"];
        if (!arr.is_array()) r.fail("/coefficients", "expected an array of coefficient objects");
        if (static_cast<int>(arr.size()) != c.k)
            r.fail("/coefficients", "expected " + std::to_string(c.k) + " coefficients alpha_0..alpha_" + std::to_string(c.k - 1));
        for (std::size_t l = 0; l < arr.size(); ++l) {
            const std::string base = "/coefficients/" + std::to_string(l);
            const auto& a = arr[l];
            r.object(a, base, {"amplitude", "epsilon", "f_power", "profile", "table"}, {});
            CoefficientSpec s;
            if (a.contains("table")) {
                r.object(a, base, {"table"}, {"table"});
                s.table_path = r.resolve(r.string(a["table"], base + "/table"));
                c.coefficients.push_back(s);
                continue;
            }
            if (!a.contains("amplitude")) r.fail(base, "missing required key 'amplitude' (or give 'table')");
            s.amplitude = r.number(a["amplitude"], base + "/amplitude");
            if (!(s.amplitude > 0.0)) r.fail(base + "/amplitude", "amplitude must be positive");
            if (a.contains("epsilon")) {
                s.epsilon = r.number(a["epsilon"], base + "/epsilon");
                if (s.epsilon < 0.0) r.fail(base + "/epsilon", "epsilon must be nonnegative");
            }
            if (a.contains("f_power")) s.f_power = r.number(a["f_power"], base + "/f_power");
            if (a.contains("profile")) {
                const auto& p = a["profile"];
                const std::string pb = base + "/profile";
                r.object(p, pb, {"terms", "linear"}, {});
                if (p.contains("terms")) {
                    if (!p["terms"].is_array()) r.fail(pb + "/terms", "expected an array");
                    for (std::size_t i = 0; i < p["terms"].size(); ++i) {
                        const std::string tb = pb + "/terms/" + std::to_string(i);
                        const auto& t = p["terms"][i];
                        r.object(t, tb, {"coef", "wave", "phase"}, {"wave"});
                        FourierTerm term;
                        if (t.contains("coef")) term.coef = r.number(t["coef"], tb + "/coef");
                        term.wave = r.numbers(t["wave"], tb + "/wave");
                        if (t.contains("phase")) term.phase = r.number(t["phase"], tb + "/phase");
                        const std::size_t dim = c.grid.manifold == "sphere2" ? 2 : c.grid.counts.size();
                        if (term.wave.size() != dim) r.fail(tb + "/wave", "wave vector needs " + std::to_string(dim) + " entries");
                        s.profile.terms.push_back(term);
                    }
                }
                if (p.contains("linear")) {
                    const auto v = r.numbers(p["linear"], pb + "/linear");
                    if (v.size() != 3) r.fail(pb + "/linear", "expected 3 entries");
                    if (c.grid.manifold != "sphere2" && (v[0] != 0.0 || v[1] != 0.0 || v[2] != 0.0))
                        r.fail(pb + "/linear", "linear profiles are only defined on sphere2");
                    s.profile.linear = {v[0], v[1], v[2]};
                }
            }
            c.coefficients.push_back(s);
        }
    }

    {
        const auto& a = j["annulus"];
        r.object(a, "/annulus", {"r1", "r2"}, {"r1", "r2"});
        c.r1 = r.number(a["r1"], "/annulus/r1");
        c.r2 = r.number(a["r2"], "/annulus/r2");
        if (!(c.r1 < c.r2)) r.fail("/annulus", "r1 must be smaller than r2");
    }

    {
        const auto& p = j["phi"];
        r.object(p, "/phi", {"pivot", "steepness"}, {"pivot"});
        c.phi.pivot = r.number(p["pivot"], "/phi/pivot");
        if (p.contains("steepness")) c.phi.steepness = r.number(p["steepness"], "/phi/steepness");
        if (!(c.phi.steepness > 0.0)) r.fail("/phi/steepness", "steepness must be positive");
        if (!(c.phi.pivot > c.r1 && c.phi.pivot < c.r2)) r.fail("/phi/pivot", "pivot must lie strictly inside (r1, r2)");
    }

    if (j.contains("epsilon_max")) {
        c.epsilon_max = r.number(j["epsilon_max"], "/epsilon_max");
        if (c.epsilon_max < 0.0) r.fail("/epsilon_max", "must be nonnegative");
    }

    if (j.contains("controls")) {
        const auto& s = j["controls"];
        const std::string b = "/controls";
        r.object(s, b, {"newton_tol", "max_newton", "max_backtracks", "armijo", "dt_initial", "dt_min", "dt_growth",
                        "easy_newton_iterations", "t_end", "jacobian", "direct_solver_max_nodes", "hypothesis_samples"}, {});
        auto& k = c.controls;
        auto pos = [&](const char* key, double& dst) {
            if (!s.contains(key)) return;
            dst = r.number(s[key], b + "/" + key);
            if (!(dst > 0.0)) r.fail(b + "/" + key, "must be positive");
        };
        auto count = [&](const char* key, int& dst, int lo) {
            if (!s.contains(key)) return;
            const auto v = r.integer(s[key], b + "/" + key);
            if (v < lo) r.fail(b + "/" + key, "must be at least " + std::to_string(lo));
            dst = static_cast<int>(v);
        };
        pos("newton_tol", k.newton_tol);
        count("max_newton", k.max_newton, 1);
        count("max_backtracks", k.max_backtracks, 0);
        pos("armijo", k.armijo);
        pos("dt_initial", k.dt_initial);
        pos("dt_min", k.dt_min);
        pos("dt_growth", k.dt_growth);
        count("easy_newton_iterations", k.easy_newton_iterations, 0);
        count("hypothesis_samples", k.hypothesis_samples, 2);
        if (s.contains("t_end")) {
            k.t_end = r.number(s["t_end"], b + "/t_end");
            if (k.t_end < 0.0 || k.t_end > 1.0) r.fail(b + "/t_end", "must lie in [0, 1]");
        }
        if (s.contains("jacobian")) k.jacobian = parse_mode(r, s["jacobian"], b + "/jacobian");
        if (s.contains("direct_solver_max_nodes")) {
            const auto v = r.integer(s["direct_solver_max_nodes"], b + "/direct_solver_max_nodes");
            if (v < 0) r.fail(b + "/direct_solver_max_nodes", "must be nonnegative");
            k.direct_solver_max_nodes = static_cast<std::size_t>(v);
        }
        if (k.armijo >= 0.5) r.fail(b + "/armijo", "must be below 0.5");
        if (k.dt_growth < 1.0) r.fail(b + "/dt_growth", "must be at least 1");
        if (k.dt_min > k.dt_initial) r.fail(b + "/dt_min", "must not exceed dt_initial");
    }

    c.output = r.resolve(r.string(j["output"], "/output"));
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned()) r.fail("/seed", "expected a nonnegative integer");
        c.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("export")) {
        const auto& e = j["export"];
        r.object(e, "/export", {"csv", "mesh"}, {});
        if (e.contains("csv")) c.export_csv = r.boolean(e["csv"], "/export/csv");
        if (e.contains("mesh")) c.export_mesh = r.boolean(e["mesh"], "/export/mesh");
    }
    return c;
}

RunConfig load_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    fs::path base = fs::absolute(path).parent_path();
    return parse_config(ss.str(), path.string(), base);
}

ojson to_json(const RunConfig& c) {
    ojson j;
    ojson g;
    g["manifold"] = c.grid.manifold;
    if (c.grid.manifold == "sphere2") {
        g["n_theta"] = c.grid.n_theta;
        g["n_phi"] = c.grid.n_phi;
    } else {
        g["counts"] = c.grid.counts;
        g["periods"] = c.grid.periods;
    }
    j["grid"] = g;

    ojson w;
    w["kind"] = c.warping.kind;
    if (c.warping.kind == "space_form") w["K"] = c.warping.K;
    else if (c.warping.kind == "power") w["p"] = c.warping.p;
    else {
        w["t"] = c.warping.t;
        w["f"] = c.warping.f;
    }
    j["warping"] = w;
    j["k"] = c.k;

    ojson coeffs = ojson::array();
    for (const auto& s : c.coefficients) {
        ojson a;
        if (s.table_path) {
            a["table"] = *s.table_path;
            coeffs.push_back(a);
            continue;
        }
        a["amplitude"] = s.amplitude;
        a["epsilon"] = s.epsilon;
        if (s.f_power) a["f_power"] = *s.f_power;
        ojson p;
        ojson terms = ojson::array();
        for (const auto& t : s.profile.terms) terms.push_back(ojson{{"coef", t.coef}, {"wave", t.wave}, {"phase", t.phase}});
        p["terms"] = terms;
        p["linear"] = s.profile.linear;
        a["profile"] = p;
        coeffs.push_back(a);
    }
    j["coefficients"] = coeffs;
    j["annulus"] = ojson{{"r1", c.r1}, {"r2", c.r2}};
    j["phi"] = ojson{{"pivot", c.phi.pivot}, {"steepness", c.phi.steepness}};
    j["epsilon_max"] = c.epsilon_max;

    const auto& k = c.controls;
    j["controls"] = ojson{{"newton_tol", k.newton_tol},
                          {"max_newton", k.max_newton},
                          {"max_backtracks", k.max_backtracks},
                          {"armijo", k.armijo},
                          {"dt_initial", k.dt_initial},
                          {"dt_min", k.dt_min},
                          {"dt_growth", k.dt_growth},
                          {"easy_newton_iterations", k.easy_newton_iterations},
                          {"t_end", k.t_end},
                          {"jacobian", jacobian_mode_name(k.jacobian)},
                          {"direct_solver_max_nodes", k.direct_solver_max_nodes},
                          {"hypothesis_samples", k.hypothesis_samples}};
    j["output"] = c.output;
    j["seed"] = c.seed;
    j["export"] = ojson{{"csv", c.export_csv}, {"mesh", c.export_mesh}};
    return j;
}

std::string serialize_config(const RunConfig& c) {
    return to_json(c).dump(2) + "\n";
}

BaseGrid build_grid(const GridConfig& g) {
    if (g.manifold == "sphere2") return BaseGrid::sphere2(g.n_theta, g.n_phi);
    return BaseGrid::flat_torus(g.counts, g.periods);
}

WarpingFunction build_warping(const WarpingConfig& w) {
    if (w.kind == "power") return WarpingFunction::power(w.p);
    if (w.kind == "table") return WarpingFunction::table(w.t, w.f);
    return WarpingFunction::space_form(w.K);
}

Problem build_problem(const RunConfig& c) {
    return Problem(build_grid(c.grid), build_warping(c.warping), c.k, c.coefficients, c.phi, c.r1, c.r2, c.controls,
                   c.epsilon_max);
}

} // namespace prescurv::app
