#include "genfrac/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "genfrac/errors.hpp"
#include "genfrac/hierarchy.hpp"
#include "genfrac/kernel_io.hpp"
#include "genfrac/kernel_symbols.hpp"
#include "genfrac/mittag_leffler.hpp"
#include "genfrac/numerics.hpp"
#include "genfrac/relaxation.hpp"
#include "genfrac/subordination.hpp"

namespace genfrac::cli {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string num(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

// JSON has no inf/nan; they become null.
json jnum(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

std::string timestamp() {
    std::time_t now = std::time(nullptr);
    if (const char* env = std::getenv("SOURCE_DATE_EPOCH")) {
        char* end = nullptr;
        const long long v = std::strtoll(env, &end, 10);
        if (end != env && *end == '\0') now = static_cast<std::time_t>(v);
    }
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

/// Log time grid. With points > 0 the grid has exactly that many points;
/// otherwise per_decade points per decade, anchored at tmin so that decades
/// (t = 1 from tmin = 0.01, say) land on exact powers of ten.
std::vector<double> time_grid(double tmin, double tmax, int per_decade, int points) {
    if (!(tmin > 0.0) || !(tmax > tmin)) throw std::invalid_argument("time grid needs 0 < tmin < tmax");
    if (points > 0) {
        if (points < 2) throw std::invalid_argument("time grid needs at least two points");
        return numerics::log_grid(tmin, tmax, static_cast<std::size_t>(points));
    }
    if (per_decade < 1) throw std::invalid_argument("points per decade must be positive");
    const double a = std::log10(tmin);
    const long long n = std::max(1LL, std::llround(per_decade * std::log10(tmax / tmin)));
    std::vector<double> g(static_cast<std::size_t>(n) + 1);
    for (long long i = 0; i < n; ++i) g[i] = std::pow(10.0, a + static_cast<double>(i) / per_decade);
    g.front() = tmin;
    g.back() = tmax;
    return g;
}

struct Artifact {
    std::string name;
    std::string content;
};
using Artifacts = std::vector<Artifact>;

class Table {
public:
    explicit Table(std::string header) : text_(std::move(header) + "\n") {}
    void row(std::initializer_list<std::string> cells) {
        bool first = true;
        for (const auto& c : cells) {
            if (!first) text_ += ',';
            text_ += c;
            first = false;
        }
        text_ += '\n';
    }
    void footer(const json& j) { text_ += "# " + j.dump() + "\n"; }
    const std::string& str() const { return text_; }

private:
    std::string text_;
};

std::string pretty(const json& j) { return j.dump(2) + "\n"; }

/// Writes the artifacts and the directory's manifest.
void emit(const fs::path& dir, const std::string& command, const json& kernel_hash, const json& parameters,
          const Artifacts& files) {
    fs::create_directories(dir);
    json names = json::array();
    for (const auto& f : files) {
        std::ofstream out(dir / f.name, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + (dir / f.name).string());
        out << f.content;
        names.push_back(f.name);
    }
    json manifest;
    manifest["command"] = command;
    manifest["kernel_hash"] = kernel_hash;
    manifest["parameters"] = parameters;
    manifest["tool_version"] = tool_version;
    manifest["timestamp"] = timestamp();
    manifest["files"] = names;
    std::ofstream out(dir / "manifest.json", std::ios::binary);
    out << pretty(manifest);
}

// ---- JSON views of library results ----

json to_json(const CmSignTest& t) {
    return {{"passed", t.passed},       {"max_order", t.max_order}, {"points", t.points},
            {"worst_margin", jnum(t.worst_margin)}, {"worst_p", jnum(t.worst_p)},
            {"worst_order", t.worst_order}, {"failures", t.failures}};
}

json to_json(const AdmissibilityReport& a) {
    return {{"admissible", a.admissible()},
            {"K_to_infinity_at_0", to_string(a.K_to_infinity_at_0)},
            {"K_to_0_at_infinity", to_string(a.K_to_0_at_infinity)},
            {"L_to_0_at_0", to_string(a.L_to_0_at_0)},
            {"L_to_infinity_at_infinity", to_string(a.L_to_infinity_at_infinity)},
            {"stieltjes_witness", to_json(a.stieltjes_witness)},
            {"reciprocal_L_witness", to_json(a.reciprocal_L_witness)},
            {"evaluation_failed", a.evaluation_failed},
            {"diagnostic", a.diagnostic}};
}

json to_json(const IntegrabilityResult& c) {
    json j = {{"verdict", to_string(c.verdict)}, {"reason", c.reason}};
    j["limit"] = c.limit ? jnum(*c.limit) : json(nullptr);
    j["I_at_largest_T"] = c.partial.empty() ? json(nullptr) : jnum(c.partial.back());
    json incs = json::array();
    for (std::size_t i = 0; i < c.T.size(); ++i)
        incs.push_back({{"T", jnum(c.T[i])}, {"partial", jnum(c.partial[i])}, {"increment", jnum(c.increments[i])}});
    j["dyadic"] = incs;
    return j;
}

json to_json(const TauberianProfile& t) {
    return {{"gamma", jnum(t.gamma)},
            {"q_exponent", jnum(t.q_exponent)},
            {"q_description", t.q_description},
            {"residual", jnum(t.residual)},
            {"power_only_gamma", jnum(t.power_only_gamma)},
            {"power_only_residual", jnum(t.power_only_residual)}};
}

json to_json(const DecayClass& d) {
    return {{"kind", to_string(d.kind)},
            {"exponent", jnum(d.exponent)},
            {"power_residual", jnum(d.power_residual)},
            {"log_residual", jnum(d.log_residual)},
            {"reason", d.reason}};
}

json to_json(const SuperadditivityMargin& m) {
    return {{"n", m.n}, {"partition", to_string(m.parts)}, {"margin", jnum(m.margin)}};
}

json to_json(const IntermittencyReport& r) {
    json j;
    j["regime"] = to_string(r.regime);
    j["beta"] = r.beta;
    j["degenerate"] = r.degenerate;
    j["hypothesis_met"] = r.hypothesis_met;
    j["integrability"] = r.integrability ? to_json(*r.integrability) : json(nullptr);
    json sa = json::array();
    for (const auto& m : r.superadditivity) sa.push_back(to_json(m));
    j["superadditivity"] = sa;
    json ratios = json::array();
    for (const auto& rs : r.ratios) {
        json x = {{"n", rs.n},
                  {"partition", to_string(rs.parts)},
                  {"fitted_slope", jnum(rs.fitted_slope)},
                  {"relative_error", jnum(rs.relative_error)},
                  {"strictly_increasing", rs.strictly_increasing}};
        x["predicted_slope"] = rs.predicted ? jnum(*rs.predicted) : json(nullptr);
        ratios.push_back(x);
    }
    j["ratios"] = ratios;
    j["tauberian"] = r.tauberian ? to_json(*r.tauberian) : json(nullptr);
    j["fitted_gamma"] = r.fitted_gamma ? jnum(*r.fitted_gamma) : json(nullptr);
    j["fit_window"] = {r.fit_window.first, r.fit_window.second};
    j["notes"] = r.notes;
    return j;
}

// ---- subcommand bodies; each returns its files ----

json kernel_info(const KernelSpec& kernel) {
    json j;
    j["kernel"] = kernel_to_json(kernel);
    j["hash"] = kernel_hash(kernel);
    j["family"] = kernel.family_name();
    j["label"] = kernel.label();
    j["analytic_continuation"] = kernel.has_analytic_continuation();
    json samples = json::array();
    for (double p : {1e-8, 1e-4, 1e-2, 1.0, 1e2, 1e4, 1e8})
        samples.push_back({{"p", p}, {"K", jnum(eval_K(kernel, p))}, {"L", jnum(eval_L(kernel, p))}});
    j["samples"] = samples;
    j["admissibility"] = to_json(check_admissibility(kernel));
    try {
        j["integrability"] = to_json(check_integrability(kernel));
    } catch (const NumericError& e) {
        j["integrability"] = {{"error", e.kind()}, {"message", e.what()}};
    }
    try {
        j["tauberian"] = to_json(tauberian_profile(kernel));
    } catch (const NumericError& e) {
        j["tauberian"] = {{"error", e.kind()}, {"message", e.what()}};
    }
    if (kernel.has_analytic_continuation()) {
        const LevyTriplet tr = levy_triplet(kernel);
        j["levy_triplet"] = {{"a", tr.a}, {"b", tr.b}, {"description", tr.description}};
    } else {
        j["levy_triplet"] = nullptr;
    }
    return j;
}

json check_report(const KernelSpec& kernel, double beta, int n_max, bool& ok) {
    json j;
    const IntegrabilityResult c10 = check_integrability(kernel);
    const AdmissibilityReport adm = check_admissibility(kernel);
    std::vector<Partition> parts;
    for (int n = 2; n <= n_max; ++n)
        for (auto& p : partitions_of(n)) parts.push_back(std::move(p));
    const auto margins = check_superadditivity(kernel, beta, parts);
    double min_margin = std::numeric_limits<double>::infinity();
    json sa = json::array();
    for (const auto& m : margins) {
        sa.push_back(to_json(m));
        min_margin = std::min(min_margin, m.margin);
    }
    j["kernel"] = kernel_to_json(kernel);
    j["hash"] = kernel_hash(kernel);
    j["integrability"] = to_json(c10);
    j["admissibility"] = to_json(adm);
    j["beta"] = beta;
    j["superadditivity"] = sa;
    j["min_margin"] = jnum(min_margin);
    try {
        j["tauberian"] = to_json(tauberian_profile(kernel));
    } catch (const FitError& e) {
        j["tauberian"] = {{"error", e.kind()}, {"message", e.what()}};
    }
    json failed = json::array();
    if (!adm.admissible()) failed.push_back("admissibility");
    if (c10.verdict != Verdict::converges) failed.push_back("integrability");
    if (!(min_margin > 0.0)) failed.push_back("superadditivity");
    ok = failed.empty();
    j["growing_hypotheses_met"] = ok;
    j["failed"] = failed;
    return j;
}

Artifacts relax_files(const KernelSpec& kernel, double lambda, const std::vector<double>& grid,
                      const RelaxationOptions& options, const char* name) {
    const RelaxationSolution sol = solve_relaxation({kernel, lambda}, grid, options);
    Table csv("t [time],u [dimensionless],error_estimate [dimensionless],flagged [0/1],method");
    for (std::size_t i = 0; i < grid.size(); ++i)
        csv.row({num(grid[i]), num(sol.values[i]), num(sol.error_estimates[i]), sol.flagged[i] ? "1" : "0",
                 laplace::to_string(sol.methods[i])});
    std::size_t flagged = 0;
    for (char f : sol.flagged) flagged += f ? 1 : 0;
    csv.footer({{"lambda", lambda},
                {"decay_class", to_json(sol.decay_class)},
                {"max_clipped", jnum(sol.max_clipped)},
                {"flagged", flagged}});
    return {{name, csv.str()}};
}

json subordination_summary(const SubordinationKernelGrid& g) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    json rows = json::array();
    for (std::size_t j = 0; j < g.t_grid.size(); ++j) {
        lo = std::min(lo, g.row_mass[j]);
        hi = std::max(hi, g.row_mass[j]);
        rows.push_back({{"t", g.t_grid[j]},
                        {"row_mass", jnum(g.row_mass[j])},
                        {"error", jnum(g.row_mass_error[j])},
                        {"s_cutoff", jnum(g.mass_cutoff[j])}});
    }
    return {{"row_mass_min", jnum(lo)},
            {"row_mass_max", jnum(hi)},
            {"max_mass_deviation", jnum(g.max_mass_deviation())},
            {"min_pre_clip", jnum(g.min_pre_clip)},
            {"clipped", g.clipped},
            {"flagged", g.flagged},
            {"rows", rows},
            {"diagnostics", g.diagnostics}};
}

Artifacts subordinate_files(const KernelSpec& kernel, const std::vector<double>& s_grid,
                            const std::vector<double>& t_grid, const SubordinationOptions& options) {
    const SubordinationKernelGrid g = compute_G(kernel, s_grid, t_grid, options);
    Table csv("s [dimensionless operational time],t [time],G [density per unit s]");
    for (std::size_t i = 0; i < s_grid.size(); ++i)
        for (std::size_t j = 0; j < t_grid.size(); ++j) csv.row({num(s_grid[i]), num(t_grid[j]), num(g.at(i, j))});
    return {{"kernel_grid.csv", csv.str()}, {"summary.json", pretty(subordination_summary(g))}};
}

Artifacts heat_files(const KernelSpec& kernel, const SpectralHeatDemo& demo, const SubordinationOptions& options,
                     json* summary_out = nullptr) {
    const HeatDemoResult r = run_heat_demo(demo, kernel, options);
    Table detail(
        "mode [integer],lambda [1/space^2],coefficient [dimensionless],t [time],relaxation [dimensionless],"
        "subordinated [dimensionless],abs_discrepancy [dimensionless]");
    Table modes("mode [integer],lambda [1/space^2],coefficient [dimensionless],max_discrepancy [dimensionless]");
    for (const auto& m : r.modes) {
        for (std::size_t j = 0; j < r.t_grid.size(); ++j)
            detail.row({std::to_string(m.mode), num(m.lambda), num(m.coefficient), num(r.t_grid[j]),
                        num(m.relaxation[j]), num(m.subordinated[j]),
                        num(std::abs(m.relaxation[j] - m.subordinated[j]))});
        modes.row({std::to_string(m.mode), num(m.lambda), num(m.coefficient), num(m.max_discrepancy)});
    }
    json summary = {{"mode_count", demo.mode_count},
                    {"max_discrepancy", jnum(r.max_discrepancy)},
                    {"max_mass_deviation", jnum(r.max_mass_deviation)},
                    {"t_grid", r.t_grid}};
    if (summary_out) *summary_out = summary;
    return {{"heat_demo.csv", detail.str()}, {"modes.csv", modes.str()}, {"summary.json", pretty(summary)}};
}

Artifacts hierarchy_files(const HierarchyParams& params, json* report_out = nullptr) {
    const HierarchyResult res = build_report(params);
    const auto& tab = res.table;
    Table corr(
        "n [order],t [time],kappa [dimensionless],log_kappa [dimensionless],method,error [dimensionless],"
        "flagged [0/1]");
    for (int n = 1; n <= tab.n_max; ++n)
        for (std::size_t j = 0; j < tab.t_grid.size(); ++j) {
            const std::size_t k = tab.index(n, j);
            corr.row({std::to_string(n), num(tab.t_grid[j]), num(tab.kappa[k]), num(tab.log_kappa[k]),
                      to_string(tab.method[k]), num(tab.error[k]), tab.flagged[k] ? "1" : "0"});
        }
    Table ratios("partition,t [time],ratio [dimensionless],log_ratio [dimensionless]");
    for (const auto& rs : res.report.ratios)
        for (std::size_t j = 0; j < tab.t_grid.size(); ++j)
            ratios.row({to_string(rs.parts), num(tab.t_grid[j]), num(std::exp(rs.log_ratio[j])), num(rs.log_ratio[j])});
    json report = to_json(res.report);
    if (report_out) *report_out = report;
    return {{"correlation_table.csv", corr.str()}, {"report.json", pretty(report)}, {"ratios.csv", ratios.str()}};
}

// ---- the canned suite ----

HierarchyParams params_for(const KernelSpec& kernel) {
    return {kernel, 1.0, Regime::growing, 2, {}, std::nullopt, HierarchyOptions{}};
}

struct NamedKernel {
    std::string name;
    KernelSpec kernel;
};

std::vector<NamedKernel> shipped_kernels() {
    return {{"caputo03", KernelSpec::caputo(0.3, "caputo alpha=0.3")},
            {"caputo05", KernelSpec::caputo(0.5, "caputo alpha=0.5")},
            {"caputo08", KernelSpec::caputo(0.8, "caputo alpha=0.8")},
            {"distributed_order", KernelSpec::distributed_order(WeightFunction::constant(1.0),
                                                                "distributed order, uniform weight")}};
}

// L(p) = log(1 + p) sampled on log p in [-30, 30]; its 1/(s L(s)) integral diverges.
KernelSpec log1p_control() {
    std::vector<double> lp, lk;
    for (int i = 0; i <= 240; ++i) {
        const double x = -30.0 + 0.25 * i;
        lp.push_back(x);
        lk.push_back(std::log(std::log1p(std::exp(x))) - x);
    }
    return KernelSpec::tabulated(lp, lk, "L(p) = log(1+p), tabulated");
}

json hashes(const std::vector<NamedKernel>& ks) {
    json j = json::object();
    for (const auto& k : ks) j[k.name] = kernel_hash(k.kernel);
    return j;
}

int reproduce(const fs::path& out) {
    const auto kernels = shipped_kernels();
    const KernelSpec control = log1p_control();
    json summary;

    {   // kernel descriptions, integrability and Tauberian profiles
        Artifacts files;
        auto all = kernels;
        all.push_back({"log1p_tabulated", control});
        for (const auto& k : all) files.push_back({k.name + ".json", pretty(kernel_info(k.kernel))});
        emit(out / "kernels", "kernel-info", hashes(all), json::object(), files);
    }

    {   // relaxation against Mittag-Leffler, and long-time tails
        const auto grid = time_grid(0.01, 100.0, 30, 0);
        Table ml_csv("alpha [dimensionless],lambda [1/time^alpha],t [time],u [dimensionless],"
                     "mittag_leffler [dimensionless],abs_error [dimensionless]");
        double worst = 0.0;
        for (double alpha : {0.3, 0.5, 0.8})
            for (double lambda : {0.5, 1.0, 2.0}) {
                const auto sol = solve_relaxation({KernelSpec::caputo(alpha), lambda}, grid);
                for (std::size_t i = 0; i < grid.size(); ++i) {
                    const double ref = ml(alpha, -lambda * std::pow(grid[i], alpha));
                    const double err = std::abs(sol.values[i] - ref);
                    worst = std::max(worst, err);
                    ml_csv.row({num(alpha), num(lambda), num(grid[i]), num(sol.values[i]), num(ref), num(err)});
                }
            }
        const auto tail_grid = time_grid(0.01, 1e4, 10, 0);
        Table tails("kernel,t [time],u [dimensionless],error_estimate [dimensionless]");
        json classes = json::object();
        for (const auto& k : kernels) {
            const auto sol = solve_relaxation({k.kernel, 1.0}, tail_grid);
            for (std::size_t i = 0; i < tail_grid.size(); ++i)
                tails.row({k.name, num(tail_grid[i]), num(sol.values[i]), num(sol.error_estimates[i])});
            classes[k.name] = to_json(sol.decay_class);
        }
        summary["relaxation_max_abs_error_vs_mittag_leffler"] = jnum(worst);
        summary["decay_classes"] = classes;
        emit(out / "relaxation", "relax", hashes(kernels),
             {{"ml_grid", {{"tmin", 0.01}, {"tmax", 100.0}, {"per_decade", 30}}},
              {"alphas", {0.3, 0.5, 0.8}},
              {"lambdas", {0.5, 1.0, 2.0}},
              {"tail_grid", {{"tmin", 0.01}, {"tmax", 1e4}, {"per_decade", 10}}},
              {"tail_lambda", 1.0}},
             {{"ml_comparison.csv", ml_csv.str()}, {"tails.csv", tails.str()}, {"decay_classes.json", pretty(classes)}});
    }

    {   // subordination kernel: golden case and row masses
        const auto s_grid = numerics::linear_grid(0.0, 6.0, 61);
        const auto t_grid = time_grid(0.1, 10.0, 10, 0);
        const auto golden = compute_G(KernelSpec::caputo(0.5), s_grid, t_grid);
        Table g_csv("s [dimensionless operational time],t [time],G [density per unit s],exact [density per unit s],"
                    "rel_error [dimensionless]");
        double worst = 0.0;
        for (std::size_t i = 0; i < s_grid.size(); ++i)
            for (std::size_t j = 0; j < t_grid.size(); ++j) {
                const double s = s_grid[i], t = t_grid[j];
                const double exact = std::exp(-s * s / (4.0 * t)) / std::sqrt(M_PI * t);
                const double rel = std::abs(golden.at(i, j) - exact) / exact;
                worst = std::max(worst, rel);
                g_csv.row({num(s), num(t), num(golden.at(i, j)), num(exact), num(rel)});
            }
        const auto mass_s = numerics::linear_grid(0.0, 6.0, 7);
        const auto mass_t = time_grid(0.1, 10.0, 5, 0);
        Table masses("kernel,t [time],row_mass [dimensionless],error [dimensionless]");
        json mass_summary = json::object();
        for (const auto& k : kernels) {
            const auto g = compute_G(k.kernel, mass_s, mass_t);
            for (std::size_t j = 0; j < mass_t.size(); ++j)
                masses.row({k.name, num(mass_t[j]), num(g.row_mass[j]), num(g.row_mass_error[j])});
            mass_summary[k.name] = subordination_summary(g);
            mass_summary[k.name].erase("rows");
        }
        summary["golden_max_rel_error"] = jnum(worst);
        summary["golden_flagged"] = golden.flagged;
        summary["row_mass"] = mass_summary;
        json gs = subordination_summary(golden);
        gs["max_rel_error_vs_closed_form"] = jnum(worst);
        emit(out / "subordination", "subordinate", hashes(kernels),
             {{"golden", {{"s_max", 6.0}, {"s_points", 61}, {"tmin", 0.1}, {"tmax", 10.0}, {"per_decade", 10}}},
              {"mass", {{"s_max", 6.0}, {"s_points", 7}, {"tmin", 0.1}, {"tmax", 10.0}, {"per_decade", 5}}}},
             {{"golden.csv", g_csv.str()},
              {"golden_summary.json", pretty(gs)},
              {"row_masses.csv", masses.str()},
              {"row_mass_summary.json", pretty(mass_summary)}});
    }

    {   // heat demo on the torus
        Artifacts files;
        std::vector<NamedKernel> used = {kernels[1], kernels[3]};
        json heat = json::object();
        for (const auto& k : used) {
            SpectralHeatDemo demo;
            demo.mode_count = 16;
            demo.t_grid = time_grid(0.1, 10.0, 0, 5);
            json s;
            for (auto& f : heat_files(k.kernel, demo, {}, &s)) files.push_back({k.name + "_" + f.name, f.content});
            heat[k.name] = s["max_discrepancy"];
        }
        summary["heat_demo_max_discrepancy"] = heat;
        emit(out / "heat_demo", "heat-demo", hashes(used),
             {{"modes", 16}, {"tmin", 0.1}, {"tmax", 10.0}, {"tpoints", 5}}, files);
    }

    {   // growing regime
        const fs::path dir = out / "growing";
        const KernelSpec c05 = KernelSpec::caputo(0.5);
        Table a_csv("t [time],A [dimensionless],A_exp_minus_t [dimensionless],quadrature [dimensionless],"
                    "contour [dimensionless],route_rel_diff [dimensionless],method");
        HierarchyOptions both;
        both.policy = RoutePolicy::both;
        double route_worst = 0.0, a20 = 0.0;
        for (double t : {0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0}) {
            HierarchyOptions o = t <= 5.0 ? both : HierarchyOptions{};
            const GrowingValue v = A_growing(c05, t, 1.0, o);
            double diff = std::nan("");
            if (v.quadrature && v.contour) {
                diff = std::abs(*v.quadrature - *v.contour) / std::abs(*v.contour);
                route_worst = std::max(route_worst, diff);
            }
            if (t == 20.0) a20 = v.value * std::exp(-t);
            a_csv.row({num(t), num(v.value), num(v.value * std::exp(-t)), v.quadrature ? num(*v.quadrature) : "",
                       v.contour ? num(*v.contour) : "", num(diff), to_string(v.method)});
        }
        summary["caputo05_A_exp_minus_t_at_20"] = jnum(a20);
        summary["caputo05_route_rel_diff_t_le_5"] = jnum(route_worst);

        auto all = kernels;
        all.push_back({"log1p_tabulated", control});
        json c10 = json::object();
        for (const auto& k : all) {
            const auto r = check_integrability(k.kernel);
            c10[k.name] = {{"verdict", to_string(r.verdict)}, {"limit", r.limit ? jnum(*r.limit) : json(nullptr)},
                           {"reason", r.reason}};
        }
        summary["integrability"] = c10;

        std::vector<Partition> parts;
        for (int n = 2; n <= 4; ++n)
            for (auto& p : partitions_of(n)) parts.push_back(std::move(p));
        Table sa_csv("kernel,n [order],partition,margin [1/time]");
        json min_margin = json::object();
        for (const auto& k : kernels) {
            double mm = std::numeric_limits<double>::infinity();
            for (const auto& m : check_superadditivity(k.kernel, 1.0, parts)) {
                sa_csv.row({k.name, std::to_string(m.n), to_string(m.parts), num(m.margin)});
                mm = std::min(mm, m.margin);
            }
            min_margin[k.name] = jnum(mm);
        }
        summary["superadditivity_min_margin_n_le_4"] = min_margin;
        summary["caputo05_margin_n2"] = jnum(check_superadditivity(c05, 1.0, {{1, 1}}).front().margin);

        json slopes = json::object();
        for (const auto& k : kernels) {
            HierarchyParams hp = params_for(k.kernel);
            hp.beta = 1.0;
            hp.regime = Regime::growing;
            const bool is_do = k.name == "distributed_order";
            hp.n_max = is_do ? 2 : 3;
            hp.t_grid = is_do ? time_grid(1.0, 20.0, 5, 0) : time_grid(0.1, 20.0, 10, 0);
            hp.fit_window = std::make_pair(is_do ? 5.0 : 2.0, 20.0);
            if (is_do) hp.options.policy = RoutePolicy::contour_only;
            json report;
            auto files = hierarchy_files(hp, &report);
            emit(dir / k.name, "hierarchy", kernel_hash(k.kernel),
                 {{"beta", 1.0}, {"regime", "growing"}, {"nmax", hp.n_max}, {"tmin", hp.t_grid.front()},
                  {"tmax", hp.t_grid.back()}, {"tpoints", hp.t_grid.size()},
                  {"fit_window", {hp.fit_window->first, hp.fit_window->second}},
                  {"policy", is_do ? "contour" : "automatic"}},
                 files);
            slopes[k.name] = report["ratios"];
        }
        summary["growing_ratio_slopes"] = slopes;
        emit(dir, "hierarchy", hashes(all), {{"beta", 1.0}, {"z", 1.0}, {"partitions_up_to", 4}},
             {{"A_caputo05.csv", a_csv.str()},
              {"integrability.json", pretty(c10)},
              {"superadditivity.csv", sa_csv.str()}});
    }

    {   // decaying regime
        const fs::path dir = out / "decaying";
        json taub = json::object();
        for (const auto& k : kernels) taub[k.name] = to_json(tauberian_profile(k.kernel));
        summary["tauberian"] = taub;
        const auto grid = time_grid(0.1, 1e4, 10, 0);
        const auto dec = A_decaying(KernelSpec::caputo(0.5), grid, 1.0);
        Table tail("t [time],A [dimensionless],A_gamma_half_sqrt_t [dimensionless]");
        for (std::size_t i = 0; i < grid.size(); ++i)
            tail.row({num(grid[i]), num(dec.solution.values[i]),
                      num(dec.solution.values[i] * std::sqrt(M_PI) * std::sqrt(grid[i]))});
        summary["caputo05_A_gamma_half_sqrt_t_at_1e4"] = jnum(dec.solution.values.back() * std::sqrt(M_PI * 1e4));
        json ratios = json::object();
        for (const auto& k : kernels) {
            HierarchyParams hp = params_for(k.kernel);
            hp.beta = 1.0;
            hp.regime = Regime::decaying;
            hp.n_max = 3;
            hp.t_grid = grid;
            hp.fit_window = std::make_pair(1e2, 1e4);
            json report;
            auto files = hierarchy_files(hp, &report);
            emit(dir / k.name, "hierarchy", kernel_hash(k.kernel),
                 {{"beta", 1.0}, {"regime", "decaying"}, {"nmax", 3}, {"tmin", 0.1}, {"tmax", 1e4},
                  {"tpoints", grid.size()}, {"fit_window", {1e2, 1e4}}},
                 files);
            ratios[k.name] = {{"fitted_gamma", report["fitted_gamma"]}, {"ratios", report["ratios"]}};
        }
        summary["decaying"] = ratios;
        emit(dir, "hierarchy", hashes(kernels), {{"z", 1.0}, {"tmin", 0.1}, {"tmax", 1e4}, {"per_decade", 10}},
             {{"tauberian.json", pretty(taub)}, {"A_caputo05_tail.csv", tail.str()}});
    }

    emit(out, "reproduce-paper", hashes(kernels),
         {{"suites", {"kernels", "relaxation", "subordination", "heat_demo", "growing", "decaying"}}},
         {{"summary.json", pretty(summary)}});
    std::cout << pretty(summary);
    return 0;
}

int numeric_failure(const std::string& command, const char* kind, const std::string& message,
                    const std::optional<fs::path>& out) {
    const json diag = {{"status", "numeric_failure"}, {"command", command}, {"error", kind}, {"message", message}};
    std::cout << pretty(diag);
    if (out) {
        std::error_code ec;
        fs::create_directories(*out, ec);
        std::ofstream f(*out / "diagnostic.json", std::ios::binary);
        f << pretty(diag);
    }
    return 1;
}

struct Args {
    std::string kernel;
    std::string out;
    double lambda = 1.0;
    double tmin = 0.0, tmax = 0.0;
    int per_decade = 30;
    int tpoints = 0;
    int talbot_nodes = 32;
    int gaver_order = 16;
    bool robust = false;
    double s_max = 6.0;
    int s_points = 61;
    int modes = 16;
    std::vector<double> coefficients;
    double beta = 1.0;
    std::string regime = "growing";
    int n_max = 2;
    double fit_tmin = 0.0, fit_tmax = 0.0;
    std::string policy = "automatic";
};

void add_grid(CLI::App* sub, Args& a, bool points_per_decade) {
    sub->add_option("--tmin", a.tmin, "Smallest time of the log grid")->check(CLI::PositiveNumber);
    sub->add_option("--tmax", a.tmax, "Largest time of the log grid")->check(CLI::PositiveNumber);
    sub->add_option("--tpoints", a.tpoints, "Number of grid points (default: 30 per decade)")->check(CLI::Range(2, 100000));
    if (points_per_decade)
        sub->add_option("--per-decade", a.per_decade, "Grid points per decade when --tpoints is not given")
            ->check(CLI::Range(1, 1000));
}

std::vector<double> grid_of(const Args& a, double tmin, double tmax) {
    return time_grid(a.tmin > 0 ? a.tmin : tmin, a.tmax > 0 ? a.tmax : tmax, a.per_decade, a.tpoints);
}

} // namespace

int dispatch(int argc, char** argv) {
    CLI::App app{"genfrac: relaxation, subordination and correlation hierarchies for general fractional derivatives"};
    app.name("genfrac");
    app.require_subcommand(1);
    app.set_version_flag("--version", tool_version);
    Args a;

    auto* info = app.add_subcommand("kernel-info", "Describe a kernel: symbol samples, admissibility, diagnostics");
    auto* relax = app.add_subcommand("relax", "Solve D u = -lambda u, u(0) = 1; CSV of u(t)");
    auto* sub = app.add_subcommand("subordinate", "Tabulate the subordination kernel G(s, t)");
    auto* heat = app.add_subcommand("heat-demo", "Compare relaxation and subordination for torus heat modes");
    auto* hier = app.add_subcommand("hierarchy", "Correlation hierarchy and intermittency report");
    auto* check = app.add_subcommand("check", "Integrability, superadditivity and Tauberian diagnostics");
    auto* repro = app.add_subcommand("reproduce-paper", "Run the canned suite of reference experiments");

    for (auto* s : {info, relax, sub, heat, hier, check})
        s->add_option("--kernel", a.kernel, "Kernel spec: JSON file, or inline JSON object")->required();
    for (auto* s : {info, relax, check}) s->add_option("--out", a.out, "Also write results into this directory");
    for (auto* s : {sub, heat, hier, repro}) s->add_option("--out", a.out, "Output directory")->required();

    relax->add_option("--lambda", a.lambda, "Relaxation rate")->check(CLI::PositiveNumber);
    add_grid(relax, a, true);
    relax->add_option("--talbot-nodes", a.talbot_nodes, "Talbot contour nodes")->check(CLI::Range(4, 4096));
    relax->add_option("--gaver-order", a.gaver_order, "Gaver-Stehfest order (even)")->check(CLI::Range(6, 40));
    relax->add_flag("--robust", a.robust, "Theil-Sen fits for the decay classification");

    sub->add_option("--smax", a.s_max, "Largest s of the grid")->check(CLI::PositiveNumber);
    sub->add_option("--spoints", a.s_points, "Points of the uniform s grid on [0, smax]")->check(CLI::Range(2, 100000));
    add_grid(sub, a, true);
    sub->add_option("--talbot-nodes", a.talbot_nodes, "Talbot contour nodes")->check(CLI::Range(4, 4096));

    heat->add_option("--modes", a.modes, "Number of Fourier modes m = 0..modes-1")->check(CLI::Range(1, 256));
    heat->add_option("--coefficients", a.coefficients, "Mode coefficients (default: all ones)");
    add_grid(heat, a, true);

    hier->add_option("--beta", a.beta, "Intensity beta")->check(CLI::NonNegativeNumber);
    hier->add_option("--regime", a.regime, "growing or decaying")->check(CLI::IsMember({"growing", "decaying"}));
    hier->add_option("--nmax", a.n_max, "Highest correlation order")->check(CLI::Range(2, 12));
    add_grid(hier, a, true);
    hier->add_option("--fit-tmin", a.fit_tmin, "Start of the slope-fit window (default tmax/10)")
        ->check(CLI::PositiveNumber);
    hier->add_option("--fit-tmax", a.fit_tmax, "End of the slope-fit window (default tmax)")->check(CLI::PositiveNumber);
    hier->add_option("--policy", a.policy, "Growing-regime route: automatic, both, contour, quadrature")
        ->check(CLI::IsMember({"automatic", "both", "contour", "quadrature"}));

    check->add_option("--beta", a.beta, "Intensity beta for the superadditivity margins")->check(CLI::PositiveNumber);
    check->add_option("--nmax", a.n_max, "Partitions of n = 2..nmax")->check(CLI::Range(2, 12));
    a.n_max = 2;

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
        return 2;
    }

    CLI::App* chosen = app.get_subcommands().front();
    const std::string command = chosen->get_name();
    std::optional<fs::path> out;
    if (!a.out.empty()) out = fs::path(a.out);
    if (command == "check" && chosen->count("--nmax") == 0) a.n_max = 4;

    try {
        if (command == "reproduce-paper") return reproduce(*out);

        const KernelSpec kernel = load_kernel(a.kernel);
        const std::string hash = kernel_hash(kernel);
        json params = {{"kernel", kernel_to_json(kernel)}};

        if (command == "kernel-info") {
            const json j = kernel_info(kernel);
            std::cout << pretty(j);
            if (out) emit(*out, command, hash, params, {{"kernel_info.json", pretty(j)}});
            return 0;
        }
        if (command == "check") {
            bool ok = false;
            const json j = check_report(kernel, a.beta, a.n_max, ok);
            std::cout << pretty(j);
            params["beta"] = a.beta;
            params["nmax"] = a.n_max;
            if (out) emit(*out, command, hash, params, {{"check.json", pretty(j)}});
            return ok ? 0 : 1;
        }
        if (command == "relax") {
            RelaxationOptions o;
            o.talbot_nodes = a.talbot_nodes;
            if (a.gaver_order % 2 != 0) throw std::invalid_argument("--gaver-order must be even");
            o.gaver_order = a.gaver_order;
            o.robust_fit = a.robust;
            const auto grid = grid_of(a, 0.01, 1e4);
            const auto files = relax_files(kernel, a.lambda, grid, o, "relaxation.csv");
            std::cout << files.front().content;
            params.update({{"lambda", a.lambda}, {"tmin", grid.front()}, {"tmax", grid.back()},
                           {"tpoints", grid.size()}, {"talbot_nodes", a.talbot_nodes},
                           {"gaver_order", a.gaver_order}, {"robust", a.robust}});
            if (out) emit(*out, command, hash, params, files);
            // u must stay in [0, 1]; a large clipped excursion means the
            // inversion itself broke down.
            const std::string& text = files.front().content;
            const json footer = json::parse(text.substr(text.rfind("# ") + 2));
            if (!(footer["max_clipped"].is_number() && footer["max_clipped"].get<double>() <= 1e-6))
                return numeric_failure(command, "invariant_violation",
                                       "inversion left [0, 1] by " + footer["max_clipped"].dump() + " at " +
                                           footer["flagged"].dump() + " flagged points",
                                       out);
            return 0;
        }
        if (command == "subordinate") {
            SubordinationOptions o;
            o.talbot_nodes = a.talbot_nodes;
            const auto s_grid = numerics::linear_grid(0.0, a.s_max, static_cast<std::size_t>(a.s_points));
            const auto t_grid = grid_of(a, 0.1, 10.0);
            const auto files = subordinate_files(kernel, s_grid, t_grid, o);
            params.update({{"smax", a.s_max}, {"spoints", a.s_points}, {"tmin", t_grid.front()},
                           {"tmax", t_grid.back()}, {"tpoints", t_grid.size()}, {"talbot_nodes", a.talbot_nodes}});
            emit(*out, command, hash, params, files);
            std::cout << files.back().content;
            const json summary = json::parse(files.back().content);
            if (summary["max_mass_deviation"].get<double>() > o.mass_tolerance ||
                summary["min_pre_clip"].get<double>() < -1e-8)
                return numeric_failure(command, "invariant_violation",
                                       "grid written, but G breaks the density invariants: " +
                                           summary["diagnostics"].dump(),
                                       out);
            return 0;
        }
        if (command == "heat-demo") {
            SpectralHeatDemo demo;
            demo.mode_count = a.modes;
            demo.coefficients = a.coefficients;
            if (chosen->count("--tpoints") == 0 && chosen->count("--per-decade") == 0) a.per_decade = 5;
            demo.t_grid = grid_of(a, 0.1, 10.0);
            json summary;
            const auto files = heat_files(kernel, demo, {}, &summary);
            params.update({{"modes", a.modes}, {"coefficients", a.coefficients}, {"tmin", demo.t_grid.front()},
                           {"tmax", demo.t_grid.back()}, {"tpoints", demo.t_grid.size()}});
            emit(*out, command, hash, params, files);
            std::cout << pretty(summary);
            return 0;
        }
        if (command == "hierarchy") {
            HierarchyParams hp = params_for(kernel);
            hp.beta = a.beta;
            hp.regime = a.regime == "growing" ? Regime::growing : Regime::decaying;
            hp.n_max = a.n_max;
            hp.t_grid = hp.regime == Regime::growing ? grid_of(a, 0.1, 20.0) : grid_of(a, 0.1, 1e4);
            if (a.fit_tmin > 0 || a.fit_tmax > 0)
                hp.fit_window = std::make_pair(a.fit_tmin > 0 ? a.fit_tmin : hp.t_grid.back() / 10.0,
                                               a.fit_tmax > 0 ? a.fit_tmax : hp.t_grid.back());
            static const std::map<std::string, RoutePolicy> policies = {{"automatic", RoutePolicy::automatic},
                                                                        {"both", RoutePolicy::both},
                                                                        {"contour", RoutePolicy::contour_only},
                                                                        {"quadrature", RoutePolicy::quadrature_only}};
            hp.options.policy = policies.at(a.policy);
            hp.validate();
            json report;
            const auto files = hierarchy_files(hp, &report);
            params.update({{"beta", a.beta}, {"regime", a.regime}, {"nmax", a.n_max}, {"tmin", hp.t_grid.front()},
                           {"tmax", hp.t_grid.back()}, {"tpoints", hp.t_grid.size()}, {"policy", a.policy}});
            if (hp.fit_window) params["fit_window"] = {hp.fit_window->first, hp.fit_window->second};
            emit(*out, command, hash, params, files);
            std::cout << pretty(report);
            return 0;
        }
    } catch (const NumericError& e) {
        return numeric_failure(command, e.kind(), e.what(), out);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        return numeric_failure(command, "internal_error", e.what(), out);
    }
    return 2;
}

int dispatch(const std::vector<std::string>& args) {
    std::vector<std::string> storage;
    storage.reserve(args.size() + 1);
    storage.emplace_back("genfrac");
    storage.insert(storage.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& s : storage) argv.push_back(s.data());
    argv.push_back(nullptr);
    return dispatch(static_cast<int>(storage.size()), argv.data());
}

} // namespace genfrac::cli
