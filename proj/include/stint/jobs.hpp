#pragma once

// Batch front-end: a JSON job description selects a verification suite; the
// runner emits CSV/JSON reports and CI-friendly exit codes (0 pass, 1
// threshold exceeded, 2 error).

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "stint/common.hpp"
#include "stint/identities.hpp"
#include "stint/lattice.hpp"

namespace stint::jobs {

using nlohmann::json;

struct GridSpec {
    int nodes = 256;              // circle node count M
    int order = 12;               // line Gauss-Legendre order
    double panels_per_unit = 6.0; // line panel density
    double x0 = 4.5;              // line half-width before adaptive retries

    quadrature::Grid make(const weights::TetWeight& w) const {
        if (w.state_space().kind == quadrature::SpaceKind::UnitCircle)
            return quadrature::circle_grid(nodes);
        const int panels = std::max(4, static_cast<int>(std::ceil(x0 * panels_per_unit)));
        return quadrature::line_grid(x0, panels, order);
    }
};

struct Job {
    int schema = 1;
    std::string command;
    json model;  // {"model": "3dindex", "q": ...} / {"model": "klv", "b": ...}
    std::uint64_t seed = kSuiteSeed;
    int instances = 10;
    double threshold = 1e-6;
    double min_angle = 0.3;
    bool transpose = true;  // verify-pentagon: also run the transpose variant
    GridSpec grid;
    std::optional<shapes::RhoSix> rho;            // verify-te6
    std::optional<shapes::SpectralQuad> spectral; // verify-te4 / sweep-eps
    double eps = 0.02, delta = 0.01;              // verify-te4
    std::vector<double> deltas{0.04, 0.02, 0.01, 0.005};  // sweep-eps, eps = 2 delta
    json lattice;                                 // transfer-commute / partition / gauge-probe
    std::vector<int> nodes_list{8, 16, 32};       // transfer-commute
    std::vector<double> u_pair{1.4, 2.1};         // transfer-commute
    double shift = 0.5;                           // gauge-probe
    std::string out = "reports";

    static Job from_json(const json& j);
};

inline const std::vector<std::string>& known_commands() {
    static const std::vector<std::string> cmds = {
        "verify-pentagon", "verify-te6", "verify-te4",      "sweep-eps",
        "transfer-commute", "partition",  "gauge-probe",     "selftest"};
    return cmds;
}

inline Job Job::from_json(const json& j) {
    Job job;
    if (!j.is_object()) throw ConfigError("job: top-level JSON must be an object");
    job.schema = j.value("schema", 1);
    if (job.schema != 1) throw ConfigError("job: unsupported schema version");
    if (!j.contains("command")) throw ConfigError("job: missing \"command\"");
    job.command = j.at("command").get<std::string>();
    const auto& cmds = known_commands();
    if (std::find(cmds.begin(), cmds.end(), job.command) == cmds.end())
        throw ConfigError("job: unknown command '" + job.command + "'");
    if (j.contains("model")) job.model = j.at("model");
    job.seed = j.value("seed", kSuiteSeed);
    job.instances = j.value("instances", job.instances);
    if (job.instances < 1) throw ConfigError("job: instances must be >= 1");
    job.threshold = j.value("threshold", job.threshold);
    if (!(job.threshold > 0.0)) throw ConfigError("job: threshold must be > 0");
    job.min_angle = j.value("min_angle", job.min_angle);
    job.transpose = j.value("transpose", job.transpose);
    if (j.contains("grid")) {
        const json& g = j.at("grid");
        job.grid.nodes = g.value("nodes", job.grid.nodes);
        job.grid.order = g.value("order", job.grid.order);
        job.grid.panels_per_unit = g.value("panels_per_unit", job.grid.panels_per_unit);
        job.grid.x0 = g.value("x", job.grid.x0);
    }
    if (j.contains("rho")) job.rho = shapes::rho_from_json(j.at("rho"));
    if (j.contains("r")) job.spectral = shapes::spectral_from_json(j.at("r"));
    job.eps = j.value("eps", job.eps);
    job.delta = j.value("delta", job.delta);
    if (j.contains("deltas")) job.deltas = j.at("deltas").get<std::vector<double>>();
    if (j.contains("lattice")) job.lattice = j.at("lattice");
    if (j.contains("nodes_list")) job.nodes_list = j.at("nodes_list").get<std::vector<int>>();
    if (j.contains("u_pair")) job.u_pair = j.at("u_pair").get<std::vector<double>>();
    job.shift = j.value("shift", job.shift);
    job.out = j.value("out", job.out);
    return job;
}

// Parse a job file, reporting line/column on malformed JSON.
inline Job load_job(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open job file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ConfigError("malformed JSON at line " + std::to_string(line) + ", column " +
                          std::to_string(col) + ": " + e.what());
    }
    return Job::from_json(j);
}

// ---------------------------------------------------------------------------
// Report rows.  CSV columns are fixed; rows are sorted by a stable key
// before writing.  wall_ms is the only run-dependent column.
// ---------------------------------------------------------------------------
struct ReportRow {
    std::string command, model, digest, grid_meta;
    double rel = 0.0, abs = 0.0;
    cplx lhs{0.0}, rhs{0.0};
    std::uint64_t seed = 0;
    long wall_ms = 0;
};

inline std::string csv_header() {
    return "command,model,param_digest,rel_residual,abs_residual,grid,seed,wall_ms";
}

inline std::string csv_row(const ReportRow& r) {
    std::ostringstream os;
    os << r.command << ',' << r.model << ',' << short_digest(r.digest) << ','
       << fmt_g17(r.rel) << ',' << fmt_g17(r.abs) << ',' << r.grid_meta << ',' << r.seed
       << ',' << r.wall_ms;
    return os.str();
}

inline json row_json(const ReportRow& r) {
    return {{"command", r.command}, {"model", r.model},
            {"digest", r.digest},   {"grid", r.grid_meta},
            {"rel_residual", r.rel}, {"abs_residual", r.abs},
            {"lhs_re", r.lhs.real()}, {"lhs_im", r.lhs.imag()},
            {"rhs_re", r.rhs.real()}, {"rhs_im", r.rhs.imag()},
            {"seed", r.seed},       {"wall_ms", r.wall_ms}};
}

inline void sort_rows(std::vector<ReportRow>& rows) {
    std::stable_sort(rows.begin(), rows.end(), [](const ReportRow& a, const ReportRow& b) {
        if (a.command != b.command) return a.command < b.command;
        if (a.digest != b.digest) return a.digest < b.digest;
        return a.grid_meta < b.grid_meta;
    });
}

inline void write_reports(std::vector<ReportRow> rows, const std::filesystem::path& outdir) {
    sort_rows(rows);
    std::filesystem::create_directories(outdir);
    std::ofstream csv(outdir / "report.csv");
    csv << csv_header() << '\n';
    for (const auto& r : rows) csv << csv_row(r) << '\n';
    json arr = json::array();
    for (const auto& r : rows) arr.push_back(row_json(r));
    std::ofstream js(outdir / "report.json");
    js << arr.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// Command implementations.
// ---------------------------------------------------------------------------
namespace detail {

using identities::ResidualReport;

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    long ms() const {
        return std::chrono::duration_cast<std::chrono::milliseconds>(
                   std::chrono::steady_clock::now() - t0)
            .count();
    }
};

inline ReportRow row_from_report(const Job& job, const std::string& model,
                                 const ResidualReport& rep, long wall_ms) {
    ReportRow r;
    r.command = job.command;
    r.model = model;
    r.digest = rep.inputs_digest;
    r.grid_meta = rep.quad_meta;
    r.rel = rep.rel_residual;
    r.abs = rep.abs_residual;
    r.lhs = rep.lhs;
    r.rhs = rep.rhs;
    r.seed = job.seed;
    r.wall_ms = wall_ms;
    return r;
}

inline weights::TetWeight model_of(const Job& job) {
    if (job.model.is_null()) throw ConfigError(job.command + ": job needs a \"model\"");
    return weights::TetWeight::from_json(job.model);
}

inline void run_pentagon(const Job& job, std::vector<ReportRow>& rows) {
    const auto w = model_of(job);
    const auto grid = job.grid.make(w);
    Rng rng(job.seed);
    for (int k = 0; k < job.instances; ++k) {
        const auto inst = identities::sample_pentagon_instance(w, rng, job.min_angle, k);
        Timer t;
        rows.push_back(row_from_report(job, weights::model_name(w.model()),
                                       identities::verify_pentagon(w, inst, grid), t.ms()));
        if (job.transpose) {
            Timer t2;
            rows.push_back(
                row_from_report(job, weights::model_name(w.model()),
                                identities::verify_pentagon_transpose(w, inst, grid), t2.ms()));
        }
    }
}

inline void run_te6(const Job& job, std::vector<ReportRow>& rows) {
    const auto w = model_of(job);
    const auto grid = job.grid.make(w);
    const shapes::RhoSix rho =
        job.rho.value_or(shapes::RhoSix{0.0, 0.1, 0.2, 0.6, 0.65, 0.7});
    Rng rng(job.seed);
    for (int k = 0; k < job.instances; ++k) {
        const auto inst = identities::sample_te6_instance(w, rng, rho, k);
        Timer t;
        rows.push_back(row_from_report(job, weights::model_name(w.model()),
                                       identities::verify_te6(w, inst, grid), t.ms()));
    }
}

inline void run_te4(const Job& job, std::vector<ReportRow>& rows) {
    const auto w = model_of(job);
    const auto grid = job.grid.make(w);
    const shapes::SpectralQuad r = job.spectral.value_or(shapes::SpectralQuad{0.0, 0.1, 0.3, 0.6});
    Rng rng(job.seed);
    const shapes::RhoSix rho = shapes::rho_regularized(r, job.eps, job.delta);
    for (int k = 0; k < job.instances; ++k) {
        const auto inst = identities::sample_te6_instance(w, rng, rho, k);
        Timer t;
        rows.push_back(row_from_report(
            job, weights::model_name(w.model()),
            identities::verify_te4(w, r, inst.ext, grid, job.eps, job.delta, inst.digest),
            t.ms()));
    }
}

// Circle resolution needed near the flat limit: the integrand's analyticity
// annulus shrinks with the smallest dihedral angle, here delta.
inline int sweep_circle_nodes(int base, double delta, cplx q) {
    const double rate = (delta / kPi) * std::log(1.0 / std::abs(q));
    const int need = static_cast<int>(std::ceil(40.0 / std::max(rate, 1e-8)));
    const int m = std::max(base, need);
    return ((m + 63) / 64) * 64;
}

inline void run_sweep(const Job& job, std::vector<ReportRow>& rows) {
    const auto w = model_of(job);
    const shapes::SpectralQuad r = job.spectral.value_or(shapes::SpectralQuad{0.0, 0.1, 0.3, 0.6});
    Rng rng(job.seed);
    for (double delta : job.deltas) {
        const double eps = 2.0 * delta;
        GridSpec gs = job.grid;
        if (w.state_space().kind == quadrature::SpaceKind::UnitCircle)
            gs.nodes = sweep_circle_nodes(job.grid.nodes, delta, w.q());
        const auto grid = gs.make(w);
        const shapes::RhoSix rho = shapes::rho_regularized(r, eps, delta);
        const auto inst = identities::sample_te6_instance(w, rng, rho, 0);
        Timer t;
        rows.push_back(row_from_report(job, weights::model_name(w.model()),
                                       identities::verify_te4(w, r, inst.ext, grid, eps,
                                                              delta, inst.digest),
                                       t.ms()));
    }
}

inline lattice::LatticeSpec lattice_of(const Job& job, bool needs_u) {
    if (job.lattice.is_null()) throw ConfigError(job.command + ": job needs a \"lattice\"");
    json j = job.lattice;
    if (!needs_u && !j.contains("u")) j["u"] = json::array();
    if (!j.contains("N")) j["N"] = needs_u ? 1 : 0;
    lattice::LatticeSpec sp;
    sp.L = j.at("L").get<int>();
    sp.M = j.at("M").get<int>();
    sp.s = j.at("s").get<std::vector<double>>();
    sp.t = j.at("t").get<std::vector<double>>();
    if (needs_u) {
        sp.u = j.at("u").get<std::vector<double>>();
        sp.N = static_cast<int>(sp.u.size());
        sp.validate();
    }
    return sp;
}

inline void run_commute(const Job& job, std::vector<ReportRow>& rows) {
    const auto w = model_of(job);
    if (job.u_pair.size() != 2) throw ConfigError("transfer-commute: u_pair needs 2 entries");
    lattice::LatticeSpec sp = lattice_of(job, false);
    sp.N = 1;
    for (int nodes : job.nodes_list) {
        quadrature::Grid grid =
            (w.state_space().kind == quadrature::SpaceKind::UnitCircle)
                ? quadrature::circle_grid(nodes)
                : quadrature::line_grid(job.grid.x0,
                                        std::max(1, nodes / job.grid.order), job.grid.order);
        Timer t;
        sp.u = {job.u_pair[0]};
        const auto t1 = lattice::build_layer_transfer(w, sp, job.u_pair[0], grid);
        sp.u = {job.u_pair[1]};
        const auto t2 = lattice::build_layer_transfer(w, sp, job.u_pair[1], grid);
        const double c = lattice::commutator_norm(t1, t2);
        ReportRow r;
        r.command = job.command;
        r.model = weights::model_name(w.model());
        r.digest = "commute;" + w.digest() + ";" + sp.digest() + ";u=" +
                   fmt_g17(job.u_pair[0]) + "," + fmt_g17(job.u_pair[1]);
        r.grid_meta = grid.meta();
        r.rel = c;
        r.abs = c;
        r.seed = job.seed;
        r.wall_ms = t.ms();
        rows.push_back(r);
    }
}

inline void run_partition(const Job& job, std::vector<ReportRow>& rows) {
    const auto w = model_of(job);
    const lattice::LatticeSpec sp = lattice_of(job, true);
    quadrature::Grid grid =
        (w.state_space().kind == quadrature::SpaceKind::UnitCircle)
            ? quadrature::circle_grid(job.grid.nodes)
            : quadrature::line_grid(job.grid.x0,
                                    std::max(1, job.grid.nodes / job.grid.order),
                                    job.grid.order);
    Timer t;
    const cplx zt = lattice::partition_trace(w, sp, grid);
    const cplx zb = lattice::partition_bruteforce(w, sp, grid);
    ReportRow r;
    r.command = job.command;
    r.model = weights::model_name(w.model());
    r.digest = "partition;" + w.digest() + ";" + sp.digest();
    r.grid_meta = grid.meta();
    r.lhs = zt;
    r.rhs = zb;
    r.abs = std::abs(zt - zb);
    r.rel = r.abs / (std::abs(zt) + std::abs(zb));
    r.seed = job.seed;
    r.wall_ms = t.ms();
    rows.push_back(r);
}

inline void run_gauge(const Job& job, std::vector<ReportRow>& rows) {
    const auto w = model_of(job);
    const lattice::LatticeSpec sp = lattice_of(job, true);
    quadrature::Grid grid =
        (w.state_space().kind == quadrature::SpaceKind::UnitCircle)
            ? quadrature::circle_grid(job.grid.nodes)
            : quadrature::line_grid(job.grid.x0,
                                    std::max(1, job.grid.nodes / job.grid.order),
                                    job.grid.order);
    Timer t;
    const auto [z0, z1] = lattice::gauge_probe(w, sp, grid, job.shift);
    ReportRow r;
    r.command = job.command;
    r.model = weights::model_name(w.model());
    r.digest = "gauge;" + w.digest() + ";" + sp.digest() + ";c=" + fmt_g17(job.shift);
    r.grid_meta = grid.meta();
    r.lhs = z0;
    r.rhs = z1;
    r.abs = std::abs(z0 - z1);
    r.rel = r.abs / (std::abs(z0) + std::abs(z1));
    r.seed = job.seed;
    r.wall_ms = t.ms();
    rows.push_back(r);
}

inline void run_selftest(const Job& job, std::vector<ReportRow>& rows,
                         std::vector<std::string>& fails);

}  // namespace detail

struct RunOutcome {
    int exit_code = 0;
    std::vector<ReportRow> rows;
    std::vector<std::string> failures;
};

// Execute a job; rows are produced in a deterministic order, the exit code
// is a pure function of the rows and the threshold.
inline RunOutcome run_job(const Job& job) {
    RunOutcome out;
    try {
        if (job.command == "verify-pentagon") detail::run_pentagon(job, out.rows);
        else if (job.command == "verify-te6") detail::run_te6(job, out.rows);
        else if (job.command == "verify-te4") detail::run_te4(job, out.rows);
        else if (job.command == "sweep-eps") detail::run_sweep(job, out.rows);
        else if (job.command == "transfer-commute") detail::run_commute(job, out.rows);
        else if (job.command == "partition") detail::run_partition(job, out.rows);
        else if (job.command == "gauge-probe") detail::run_gauge(job, out.rows);
        else if (job.command == "selftest") {
            detail::run_selftest(job, out.rows, out.failures);
            out.exit_code = out.failures.empty() ? 0 : 1;
            return out;
        } else {
            throw ConfigError("unknown command '" + job.command + "'");
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        out.exit_code = 2;
        out.failures.push_back(e.what());
        return out;
    }
    for (const auto& r : out.rows) {
        if (!(r.rel < job.threshold))
            out.failures.push_back(r.command + " " + short_digest(r.digest) +
                                   ": rel_residual " + fmt_g17(r.rel) + " >= threshold " +
                                   fmt_g17(job.threshold));
    }
    out.exit_code = out.failures.empty() ? 0 : 1;
    return out;
}

namespace detail {

// Canned mini-suite with pinned thresholds; exit 0 on a healthy build.
inline void run_selftest(const Job& job, std::vector<ReportRow>& rows,
                         std::vector<std::string>& fails) {
    const auto check = [&](const std::string& what, const Job& sub) {
        RunOutcome o = run_job(sub);
        rows.insert(rows.end(), o.rows.begin(), o.rows.end());
        for (const auto& f : o.failures) fails.push_back(what + ": " + f);
        if (o.exit_code == 2) fails.push_back(what + ": error");
    };

    Job pent;
    pent.command = "verify-pentagon";
    pent.model = {{"model", "3dindex"}, {"q", 0.3}};
    pent.instances = 2;
    pent.min_angle = 0.35;
    pent.grid.nodes = 128;
    pent.threshold = 1e-7;
    pent.seed = job.seed;
    check("pentagon-3dindex", pent);

    Job pk = pent;
    pk.model = {{"model", "klv"}, {"b", 1.0}};
    pk.instances = 1;
    pk.threshold = 1e-6;
    check("pentagon-klv", pk);

    Job te6;
    te6.command = "verify-te6";
    te6.model = {{"model", "3dindex"}, {"q", 0.3}};
    te6.rho = shapes::RhoSix{0.0, 0.9, 1.8, 1.9, 2.4, 2.8};
    te6.instances = 2;
    te6.grid.nodes = 256;
    te6.threshold = 1e-8;
    te6.seed = job.seed;
    check("te6-3dindex", te6);

    Job te4;
    te4.command = "verify-te4";
    te4.model = {{"model", "3dindex"}, {"q", 0.3}};
    te4.spectral = shapes::SpectralQuad{0.0, 0.1, 0.3, 0.6};
    te4.eps = 0.04;
    te4.delta = 0.02;
    te4.instances = 1;
    te4.grid.nodes = 2048;
    te4.threshold = 1e-5;
    te4.seed = job.seed;
    check("te4-3dindex", te4);

    Job cm;
    cm.command = "transfer-commute";
    cm.model = {{"model", "3dindex"}, {"q", 0.3}};
    cm.lattice = {{"L", 1}, {"M", 1}, {"s", {0.3}}, {"t", {0.8}}};
    cm.nodes_list = {8, 16};
    cm.u_pair = {1.4, 2.1};
    cm.threshold = 1e-10;
    check("commute-3dindex", cm);

    Job pa;
    pa.command = "partition";
    pa.model = {{"model", "3dindex"}, {"q", 0.3}};
    pa.lattice = {{"L", 1}, {"M", 1}, {"N", 2}, {"s", {0.3}}, {"t", {0.8}},
                  {"u", {1.4, 2.1}}};
    pa.grid.nodes = 8;
    pa.threshold = 1e-10;
    check("partition-3dindex", pa);

    Job ga = pa;
    ga.command = "gauge-probe";
    ga.shift = 0.5;
    ga.threshold = 1e-12;
    check("gauge-3dindex", ga);
}

}  // namespace detail

}  // namespace stint::jobs
