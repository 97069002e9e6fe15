/*
 Copyright 2026 The adptrack Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
#ifndef ADPTRACK_CONFIG_HPP
#define ADPTRACK_CONFIG_HPP

// Strict JSON scenario configuration. Every scenario has a complete default
// document; a user file may only override keys that exist in it.

#include "adptrack/gains.hpp"
#include "adptrack/scenarios.hpp"
#include "adptrack/sim.hpp"

#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace adptrack::config {

using Json = nlohmann::ordered_json;

inline const std::vector<std::string>& scenario_names()
{
    static const std::vector<std::string> names = {"scalar_lq", "twostate_lq", "twostate_nl"};
    return names;
}

/// Complete default document for a registered scenario. Keys whose default
/// is null are optional and have no value unless the user sets one.
inline Json default_config(const std::string& scenario)
{
    Json j;
    j["scenario"] = scenario;
    if (scenario == "scalar_lq") {
        j["plant"] = {{"a", -1.0}, {"b", 1.0}, {"x0", {3.0}}};
        j["desired"] = {{"x_d0", {2.0}}, {"d", nullptr}};
        j["cost"] = {{"Q", 1.0}, {"R", 1.0}};
    } else if (scenario == "twostate_lq") {
        j["plant"] = {{"a21", -0.5}, {"a22", -0.5}, {"b2", 1.0}, {"x0", {1.0, 1.0}}};
        j["desired"] = {{"x_d0", {0.0, 1.0}}, {"d", nullptr}};
        j["cost"] = {{"Q", 1.0}, {"R", 1.0}};
    } else if (scenario == "twostate_nl") {
        j["plant"] = {{"x0", {1.0, 1.0}}};
        j["desired"] = {{"x_d0", {0.0, 1.0}}, {"d", nullptr}};
        j["cost"] = {{"Q", 10.0}, {"R", 1.0}};
    } else {
        throw ConfigError("scenario: unknown scenario '" + scenario + "'");
    }
    const bool nl = scenario == "twostate_nl";
    const std::size_t n = scenario == "scalar_lq" ? 1 : 2;

    j["identifier"] = {{"basis", nl ? "random" : "pass_through"},
                       {"activation", nl ? "tanh" : "identity"},
                       {"bias", nl || n > 1},
                       {"p", nl ? Json(12) : Json(nullptr)},
                       {"Y", nullptr},
                       {"Y_seed", nullptr},
                       {"k", 10.0},
                       {"k_theta", nl ? 1.0 : 100.0},
                       {"Gamma_theta", nl ? 0.5 : 0.0005},
                       {"M", nl ? 30 : 10},
                       {"w", 3},
                       {"record_stride", 10},
                       {"excitation_threshold", 0.1},
                       {"d_bar", 0.0},
                       {"theta0", nullptr}};

    Json bounds = Json::array();
    for (std::size_t i = 0; i < n; ++i) {
        bounds.push_back({-1.0, 1.0});
    }
    j["adp"] = {{"basis", {{"kind", "error_quadratic"}, {"exponents", nullptr}}},
                {"gains",
                 {{"eta_c1", 1.0},
                  {"eta_c2", 1.0},
                  {"eta_a1", n == 1 ? 5.0 : 1.0},
                  {"eta_a2", 0.01},
                  {"nu", 1.0},
                  {"beta", 0.0},
                  {"Gamma_bar", 1.0}}},
                {"gamma0", 1.0},
                {"weights0", 0.4},
                {"cbar_floor", 1e-6},
                {"grid",
                 {{"N", n == 1 ? 5 : 9},
                  {"bounds", bounds},
                  {"strategy", "tracking"},
                  {"layout", "lattice"},
                  {"seed", 0}}}};
    j["sim"] = {{"T", nl ? 60.0 : 50.0}, {"dt", 0.001}, {"seed", 1}, {"output_stride", 1}};

    Json chi = bounds;
    for (std::size_t i = 0; i < n; ++i) {
        chi.push_back(n == 1 ? Json{2.0, 2.0} : Json{-2.0, 2.0});
    }
    j["check"] = {{"chi", chi},
                  {"n_samples", 512},
                  {"eps_bar", 0.0},
                  {"eps_prime_bar", 0.0},
                  {"eps_theta_bar", 0.0},
                  {"W_bar", nullptr},
                  {"cbar", nullptr},
                  {"gamma_lb", nullptr},
                  {"sigma_theta_lb", nullptr}};
    j["output"] = {{"dir", "out"}};
    return j;
}

namespace detail {

inline std::string join(const std::string& path, const std::string& key)
{
    return path.empty() ? key : path + "." + key;
}

/// Rejects keys absent from the defaults, recursing into objects.
inline void check_keys(const Json& user, const Json& defaults, const std::string& path)
{
    if (!user.is_object()) {
        throw ConfigError((path.empty() ? std::string("config") : path) + ": expected an object");
    }
    for (const auto& [key, value] : user.items()) {
        const std::string p = join(path, key);
        if (!defaults.contains(key)) {
            throw ConfigError(p + ": unknown key");
        }
        const Json& d = defaults.at(key);
        if (d.is_object()) {
            check_keys(value, d, p);
        }
    }
}

inline void merge_into(Json& base, const Json& user)
{
    for (const auto& [key, value] : user.items()) {
        if (base[key].is_object() && value.is_object()) {
            merge_into(base[key], value);
        } else {
            base[key] = value;
        }
    }
}

/// Typed field access that reports the dotted path on failure.
class Reader {
public:
    explicit Reader(const Json& root) : root_(root) {}

    [[nodiscard]] const Json& at(const std::string& path) const
    {
        const Json* node = &root_;
        std::size_t start = 0;
        while (start <= path.size()) {
            const std::size_t dot = path.find('.', start);
            const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos
                                                                               : dot - start);
            if (!node->is_object() || !node->contains(key)) {
                throw ConfigError(path + ": missing");
            }
            node = &node->at(key);
            if (dot == std::string::npos) {
                break;
            }
            start = dot + 1;
        }
        return *node;
    }

    [[nodiscard]] bool is_null(const std::string& path) const { return at(path).is_null(); }

    [[nodiscard]] double number(const std::string& path) const
    {
        const Json& v = at(path);
        if (!v.is_number()) {
            throw ConfigError(path + ": expected a number");
        }
        const double x = v.get<double>();
        if (!std::isfinite(x)) {
            throw ConfigError(path + ": must be finite");
        }
        return x;
    }

    [[nodiscard]] double positive(const std::string& path) const
    {
        const double x = number(path);
        if (!(x > 0.0)) {
            throw ConfigError(path + ": must be positive");
        }
        return x;
    }

    [[nodiscard]] double nonnegative(const std::string& path) const
    {
        const double x = number(path);
        if (x < 0.0) {
            throw ConfigError(path + ": must be non-negative");
        }
        return x;
    }

    [[nodiscard]] std::uint64_t count(const std::string& path, std::uint64_t min_value) const
    {
        const Json& v = at(path);
        if (!v.is_number_integer() || v.get<std::int64_t>() < static_cast<std::int64_t>(min_value)) {
            throw ConfigError(path + ": expected an integer >= " + std::to_string(min_value));
        }
        return v.get<std::uint64_t>();
    }

    [[nodiscard]] bool boolean(const std::string& path) const
    {
        const Json& v = at(path);
        if (!v.is_boolean()) {
            throw ConfigError(path + ": expected true or false");
        }
        return v.get<bool>();
    }

    [[nodiscard]] std::string string(const std::string& path) const
    {
        const Json& v = at(path);
        if (!v.is_string()) {
            throw ConfigError(path + ": expected a string");
        }
        return v.get<std::string>();
    }

    [[nodiscard]] Vector vector(const std::string& path, Eigen::Index size) const
    {
        const Json& v = at(path);
        if (v.is_number() && size >= 0) {
            return Vector::Constant(size, number(path));
        }
        if (!v.is_array() || (size >= 0 && static_cast<Eigen::Index>(v.size()) != size)) {
            throw ConfigError(path + ": expected an array of " + std::to_string(size) + " numbers");
        }
        Vector out(static_cast<Eigen::Index>(v.size()));
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_number()) {
                throw ConfigError(path + "[" + std::to_string(i) + "]: expected a number");
            }
            out(static_cast<Eigen::Index>(i)) = v[i].get<double>();
        }
        if (!out.allFinite()) {
            throw ConfigError(path + ": must be finite");
        }
        return out;
    }

    /// Rows x cols matrix given as nested arrays; a scalar means scalar * I.
    [[nodiscard]] Matrix matrix(const std::string& path, Eigen::Index rows, Eigen::Index cols) const
    {
        const Json& v = at(path);
        if (v.is_number()) {
            if (rows != cols) {
                throw ConfigError(path + ": a scalar is only allowed for square matrices");
            }
            return number(path) * Matrix::Identity(rows, cols);
        }
        if (!v.is_array() || static_cast<Eigen::Index>(v.size()) != rows) {
            throw ConfigError(path + ": expected " + std::to_string(rows) + " rows");
        }
        Matrix out(rows, cols);
        for (Eigen::Index r = 0; r < rows; ++r) {
            const Json& row = v[static_cast<std::size_t>(r)];
            if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
                throw ConfigError(path + "[" + std::to_string(r) + "]: expected "
                                  + std::to_string(cols) + " columns");
            }
            for (Eigen::Index c = 0; c < cols; ++c) {
                const Json& x = row[static_cast<std::size_t>(c)];
                if (!x.is_number()) {
                    throw ConfigError(path + "[" + std::to_string(r) + "][" + std::to_string(c)
                                      + "]: expected a number");
                }
                out(r, c) = x.get<double>();
            }
        }
        if (!out.allFinite()) {
            throw ConfigError(path + ": must be finite");
        }
        return out;
    }

    [[nodiscard]] std::vector<std::pair<double, double>> bounds(const std::string& path,
                                                                std::size_t size) const
    {
        const Json& v = at(path);
        if (!v.is_array() || v.size() != size) {
            throw ConfigError(path + ": expected " + std::to_string(size) + " [lo, hi] pairs");
        }
        std::vector<std::pair<double, double>> out;
        for (std::size_t i = 0; i < size; ++i) {
            const Json& b = v[i];
            const std::string p = path + "[" + std::to_string(i) + "]";
            if (!b.is_array() || b.size() != 2 || !b[0].is_number() || !b[1].is_number()) {
                throw ConfigError(p + ": expected [lo, hi]");
            }
            const double lo = b[0].get<double>();
            const double hi = b[1].get<double>();
            if (!std::isfinite(lo) || !std::isfinite(hi) || hi < lo) {
                throw ConfigError(p + ": need finite lo <= hi");
            }
            out.emplace_back(lo, hi);
        }
        return out;
    }

private:
    const Json& root_;
};

} // namespace detail

/// Inputs of the check-gains report beyond the scenario itself.
struct CheckSettings {
    std::vector<std::pair<double, double>> chi;
    std::size_t n_samples = 512;
    gains::ReconstructionBounds eps;
    std::optional<double> W_bar;
    std::optional<double> cbar;
    std::optional<double> gamma_lb;
    std::optional<double> sigma_theta_lb;
};

struct RunConfig {
    /// Defaults merged with the user document, after environment overrides.
    Json effective;
    sim::Scenario scenario;
    CheckSettings check;
    std::string output_dir;
    std::size_t output_stride = 1;
    std::uint64_t seed = 0;
    /// Running-minimum cbar below this level triggers a warning.
    double cbar_floor = 0.0;
    /// Riccati oracle weights when the scenario is linear-quadratic.
    std::optional<Vector> W_ideal;
    std::optional<oracle::RiccatiSolution> riccati;
};

/// Builds the validated scenario from a complete (merged) document.
inline RunConfig build(const Json& effective)
{
    const detail::Reader rd(effective);
    RunConfig rc;
    rc.effective = effective;
    const std::string name = rd.string("scenario");

    std::optional<Vector> x_d0_check;
    scenarios::PlantDefinition def;
    Eigen::Index n = 0;
    if (name == "scalar_lq") {
        n = 1;
        const double b = rd.number("plant.b");
        if (b == 0.0) {
            throw ConfigError("plant.b: must be nonzero");
        }
        def = scenarios::scalar_lq(rd.number("plant.a"), b, rd.vector("desired.x_d0", 1)(0));
    } else if (name == "twostate_lq") {
        n = 2;
        const double b2 = rd.number("plant.b2");
        if (b2 == 0.0) {
            throw ConfigError("plant.b2: must be nonzero");
        }
        def = scenarios::twostate_lq(rd.number("plant.a21"), rd.number("plant.a22"), b2,
                                     rd.vector("desired.x_d0", 2));
    } else if (name == "twostate_nl") {
        n = 2;
        def = scenarios::twostate_nl(rd.vector("desired.x_d0", 2));
    } else {
        throw ConfigError("scenario: unknown scenario '" + name + "'");
    }
    if (!rd.is_null("desired.d")) {
        def.problem.desired.d = rd.positive("desired.d");
    }

    sim::Scenario& sc = rc.scenario;
    sc.name = name;
    sc.problem = def.problem;
    sc.x0 = rd.vector("plant.x0", n);

    const Matrix Q = rd.matrix("cost.Q", n, n);
    const Matrix R = rd.matrix("cost.R", sc.problem.plant.m, sc.problem.plant.m);
    if ((Q - Q.transpose()).cwiseAbs().maxCoeff() > 1e-12 || linalg::min_eigenvalue(Q) <= 0.0) {
        throw ConfigError("cost.Q: must be symmetric positive definite");
    }
    if ((R - R.transpose()).cwiseAbs().maxCoeff() > 1e-12 || linalg::min_eigenvalue(R) <= 0.0) {
        throw ConfigError("cost.R: must be symmetric positive definite");
    }
    sc.problem.cost = CostSpec::quadratic(Q, R);

    // Simulation settings first: the seed feeds the identifier basis.
    sc.T = rd.positive("sim.T");
    sc.dt = rd.positive("sim.dt");
    rc.seed = rd.count("sim.seed", 0);
    rc.output_stride = rd.count("sim.output_stride", 1);
    rc.output_dir = rd.string("output.dir");

    // Identifier.
    const std::string id_kind = rd.string("identifier.basis");
    const bool bias = rd.boolean("identifier.bias");
    sysid::Activation act{};
    try {
        act = sysid::parse_activation(rd.string("identifier.activation"));
    } catch (const ConfigError& ex) {
        throw ConfigError(std::string("identifier.activation: ") + ex.what());
    }
    if (id_kind == "pass_through") {
        if (!rd.is_null("identifier.p") || !rd.is_null("identifier.Y")) {
            throw ConfigError("identifier.p: pass_through basis takes no p or Y");
        }
        if (act != sysid::Activation::identity) {
            throw ConfigError("identifier.activation: pass_through basis requires identity");
        }
        sc.identifier_basis = sysid::IdentifierBasis::pass_through(n, bias);
    } else if (id_kind == "random") {
        if (rd.is_null("identifier.p")) {
            throw ConfigError("identifier.p: required for a random basis");
        }
        const auto p = static_cast<int>(rd.count("identifier.p", 1));
        if (!rd.is_null("identifier.Y")) {
            sc.identifier_basis.p = p;
            sc.identifier_basis.Y = rd.matrix("identifier.Y", n + 1, p);
            sc.identifier_basis.activation = act;
            sc.identifier_basis.bias = bias;
        } else {
            const std::uint64_t y_seed =
                rd.is_null("identifier.Y_seed") ? rc.seed : rd.count("identifier.Y_seed", 0);
            sc.identifier_basis = sysid::IdentifierBasis::random(n, p, act, y_seed, bias);
        }
    } else {
        throw ConfigError("identifier.basis: expected pass_through or random");
    }
    const Eigen::Index p1 = sc.identifier_basis.dim();
    if (p1 == 0) {
        throw ConfigError("identifier.p: basis has no outputs");
    }
    auto& id = sc.identifier;
    id.k = rd.positive("identifier.k");
    id.k_theta = rd.positive("identifier.k_theta");
    id.gamma_theta = rd.vector("identifier.Gamma_theta", p1);
    if ((id.gamma_theta.array() <= 0.0).any()) {
        throw ConfigError("identifier.Gamma_theta: entries must be positive");
    }
    id.M = rd.count("identifier.M", 1);
    id.window = rd.count("identifier.w", 3);
    if (id.window % 2 == 0) {
        throw ConfigError("identifier.w: window must be odd");
    }
    id.record_stride = rd.count("identifier.record_stride", 1);
    id.excitation_threshold = rd.nonnegative("identifier.excitation_threshold");
    id.d_bar = rd.nonnegative("identifier.d_bar");
    if (!rd.is_null("identifier.theta0")) {
        id.theta0 = rd.matrix("identifier.theta0", p1, n);
    }
    if (def.A && id_kind == "pass_through") {
        sc.problem.plant.true_theta = scenarios::linear_theta(*def.A, bias);
    }

    // Value basis and gains.
    const std::string vb_kind = rd.string("adp.basis.kind");
    if (vb_kind == "error_quadratic") {
        if (!rd.is_null("adp.basis.exponents")) {
            throw ConfigError("adp.basis.exponents: only used with kind zeta_polynomial");
        }
        sc.basis = adp::ValueBasis::error_quadratic(n);
    } else if (vb_kind == "zeta_polynomial") {
        if (rd.is_null("adp.basis.exponents")) {
            sc.basis = adp::ValueBasis::zeta_polynomial_default(n);
        } else {
            const Json& ex = rd.at("adp.basis.exponents");
            if (!ex.is_array() || ex.empty()) {
                throw ConfigError("adp.basis.exponents: expected a non-empty array of rows");
            }
            Eigen::MatrixXi table(static_cast<Eigen::Index>(ex.size()), 2 * n);
            for (std::size_t r = 0; r < ex.size(); ++r) {
                const std::string p = "adp.basis.exponents[" + std::to_string(r) + "]";
                if (!ex[r].is_array() || static_cast<Eigen::Index>(ex[r].size()) != 2 * n) {
                    throw ConfigError(p + ": expected " + std::to_string(2 * n) + " exponents");
                }
                for (Eigen::Index c = 0; c < 2 * n; ++c) {
                    const Json& v = ex[r][static_cast<std::size_t>(c)];
                    if (!v.is_number_integer() || v.get<int>() < 0) {
                        throw ConfigError(p + ": exponents must be non-negative integers");
                    }
                    table(static_cast<Eigen::Index>(r), c) = v.get<int>();
                }
            }
            sc.basis = adp::ValueBasis::zeta_polynomial(n, table);
        }
    } else {
        throw ConfigError("adp.basis.kind: expected error_quadratic or zeta_polynomial");
    }
    const Eigen::Index L = sc.basis.size();

    auto& g = sc.adp.gains;
    g.eta_c1 = rd.positive("adp.gains.eta_c1");
    g.eta_c2 = rd.positive("adp.gains.eta_c2");
    g.eta_a1 = rd.positive("adp.gains.eta_a1");
    g.eta_a2 = rd.positive("adp.gains.eta_a2");
    g.nu = rd.positive("adp.gains.nu");
    g.beta = rd.nonnegative("adp.gains.beta");
    g.Gamma_bar = rd.positive("adp.gains.Gamma_bar");
    sc.adp.gamma0 = rd.positive("adp.gamma0");
    if (sc.adp.gamma0 > g.Gamma_bar) {
        throw ConfigError("adp.gamma0: initial gain norm must not exceed adp.gains.Gamma_bar");
    }
    rc.cbar_floor = rd.nonnegative("adp.cbar_floor");
    sc.adp.W_c0 = rd.vector("adp.weights0", L);
    sc.adp.W_a0 = sc.adp.W_c0;

    auto& grid = sc.adp.grid;
    const std::string strategy = rd.string("adp.grid.strategy");
    if (strategy == "tracking") {
        grid.strategy = adp::GridStrategy::tracking;
    } else if (strategy == "fixed_zeta") {
        grid.strategy = adp::GridStrategy::fixed_zeta;
    } else {
        throw ConfigError("adp.grid.strategy: expected tracking or fixed_zeta");
    }
    const std::string layout = rd.string("adp.grid.layout");
    if (layout == "lattice") {
        grid.layout = adp::GridLayout::lattice;
    } else if (layout == "halton") {
        grid.layout = adp::GridLayout::halton;
    } else {
        throw ConfigError("adp.grid.layout: expected lattice or halton");
    }
    grid.N = rd.count("adp.grid.N", 1);
    grid.seed = rd.count("adp.grid.seed", 0);
    grid.bounds = rd.bounds("adp.grid.bounds", static_cast<std::size_t>(
                                                   grid.strategy == adp::GridStrategy::tracking
                                                       ? n
                                                       : 2 * n));
    try {
        (void)adp::make_grid(grid);
    } catch (const ConfigError& ex) {
        throw ConfigError(std::string("adp.grid.N: ") + ex.what());
    }

    // Gain-check settings.
    auto& ck = rc.check;
    ck.chi = rd.bounds("check.chi", static_cast<std::size_t>(2 * n));
    ck.n_samples = rd.count("check.n_samples", 1);
    ck.eps.eps_bar = rd.nonnegative("check.eps_bar");
    ck.eps.eps_prime_bar = rd.nonnegative("check.eps_prime_bar");
    ck.eps.eps_theta_bar = rd.nonnegative("check.eps_theta_bar");
    const auto opt = [&rd](const std::string& path) -> std::optional<double> {
        if (rd.is_null(path)) {
            return std::nullopt;
        }
        return rd.nonnegative(path);
    };
    ck.W_bar = opt("check.W_bar");
    ck.cbar = opt("check.cbar");
    ck.gamma_lb = opt("check.gamma_lb");
    ck.sigma_theta_lb = opt("check.sigma_theta_lb");

    // Riccati oracle for linear plants.
    if (def.A && def.B) {
        sc.lq = oracle::LqSpec{*def.A, *def.B, Q, R};
        try {
            rc.riccati = oracle::solve_are(*sc.lq);
            rc.W_ideal = oracle::ideal_quadratic_weights(rc.riccati->P, sc.basis);
        } catch (const NoConvergence&) {
            rc.riccati.reset();
        } catch (const BasisMismatch&) {
            rc.W_ideal.reset();
        }
    }

    // Fail early on plants that violate the standing assumptions.
    try {
        const double r = matching_residual(sc.problem, sc.problem.desired.x_d0);
        if (r > 1e-9) {
            throw ConfigError("desired.x_d0: matching condition fails (residual "
                              + std::to_string(r) + ")");
        }
    } catch (const RankDeficient& ex) {
        throw ConfigError(std::string("desired.x_d0: ") + ex.what());
    }
    return rc;
}

/// Parses a configuration document. Unknown keys are rejected; syntax errors
/// carry the line and column reported by the JSON parser.
inline RunConfig parse_config_text(const std::string& text, const std::string& origin = "config")
{
    Json user;
    try {
        user = Json::parse(text);
    } catch (const Json::parse_error& ex) {
        throw ConfigError(origin + ": " + ex.what());
    }
    if (!user.is_object()) {
        throw ConfigError(origin + ": top level must be an object");
    }
    if (!user.contains("scenario") || !user.at("scenario").is_string()) {
        throw ConfigError("scenario: required string");
    }
    Json effective = default_config(user.at("scenario").get<std::string>());
    detail::check_keys(user, effective, "");
    detail::merge_into(effective, user);
    if (const char* env = std::getenv("ADPTRACK_SEED")) {
        char* end = nullptr;
        const unsigned long long s = std::strtoull(env, &end, 10);
        if (end == env || *end != '\0') {
            throw ConfigError("ADPTRACK_SEED: expected a non-negative integer");
        }
        effective["sim"]["seed"] = s;
    }
    return build(effective);
}

inline RunConfig parse_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError(path + ": cannot open");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), path);
}

} // namespace adptrack::config

#endif // ADPTRACK_CONFIG_HPP
