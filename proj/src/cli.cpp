#include "conecert/cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "conecert/cones.hpp"
#include "conecert/dynamics.hpp"
#include "conecert/parallel.hpp"
#include "conecert/rng.hpp"
#include "conecert/transfer.hpp"
#include "conecert/verify.hpp"

namespace conecert::cli {

using report::Json;
using verify::CheckReport;
using cplx = std::complex<double>;

void RunConfig::validate() const {
    auto fail = [](const std::string& msg) { throw config_error("config: " + msg); };
    if (map != "doubling" && map != "gauss" && map != "custom")
        fail("unknown map preset '" + map + "'");
    if (map == "custom") {
        if (!custom_map.present) fail("map 'custom' needs a custom_map section");
        if (!(custom_map.gamma > 1.0)) fail("custom_map gamma must exceed 1");
        if (custom_map.G < 0.0) fail("custom_map G must be nonnegative");
        if (custom_map.branches.empty()) fail("custom_map needs at least one branch");
    }
    if (obs != "cos1" && obs != "sin1" && obs != "cocycle" && obs != "table")
        fail("unknown observable preset '" + obs + "'");
    if (obs == "table") {
        if (!obs_table.present) fail("obs 'table' needs an obs_table section");
        if (obs_table.x.size() < 2 || obs_table.x.size() != obs_table.y.size())
            fail("obs_table needs matching x/y arrays with >= 2 entries");
    }
    if (!(alpha > 0.0 && alpha < 0.5)) fail("alpha must lie in (0, 1/2)");
    if (obs_sup_norm < 0.0 || obs_lip_seminorm < 0.0)
        fail("observable norm overrides must be positive when given");
    if (j_max < 1) fail("j_max must be >= 1");
    if (grid_n != 0 && grid_n < 16) fail("grid_n must be 0 (default) or >= 16");
    if (samples < 1) fail("samples must be positive");
    if (n_list.empty()) fail("n_list must not be empty");
    for (int n : n_list)
        if (n < 1) fail("n_list entries must be positive");
    if (validation_grid < 2) fail("validation_grid must be >= 2");
    for (int v : {z_points, ring_points, ring_n, refined_n, refined_t_points, eps_z_count,
                  eps_u_samples, eps_pairs_per_u, diameter_pairs, lab_count,
                  lab_comparison_count})
        if (v < 1) fail("sweep sizes must be positive");
    if (lab_dim < 2) fail("lab_dim must be >= 2");
    for (double t : {abs_tol, rel_tol})
        if (!(t >= 1e-14 && t <= 1e-2)) fail("tolerance overrides must lie in [1e-14, 1e-2]");
    if (has_nonmarkov) {
        if (!(nonmarkov.gamma > 2.0)) fail("nonmarkov gamma must exceed 2");
        if (nonmarkov.N_star < 1) fail("nonmarkov Nstar must be >= 1");
    }
}

Json config_json(const RunConfig& c) {
    Json j = Json::object();
    j.set("map", Json::str(c.map));
    j.set("alpha", Json::number(c.alpha));
    j.set("j_max", Json::integer(c.j_max));
    j.set("obs", Json::str(c.obs));
    if (c.custom_map.present) {
        Json cm = Json::object();
        cm.set("gamma", Json::number(c.custom_map.gamma));
        cm.set("G", Json::number(c.custom_map.G));
        Json branches = Json::array();
        for (const auto& b : c.custom_map.branches) {
            Json jb = Json::object();
            jb.set("lo", Json::number(b.lo));
            jb.set("hi", Json::number(b.hi));
            Json xs = Json::array(), sv = Json::array(), lw = Json::array();
            for (double v : b.x) xs.push(Json::number(v));
            for (double v : b.sigma) sv.push(Json::number(v));
            for (double v : b.log_weight) lw.push(Json::number(v));
            jb.set("x", std::move(xs));
            jb.set("sigma", std::move(sv));
            jb.set("log_weight", std::move(lw));
            branches.push(std::move(jb));
        }
        cm.set("branches", std::move(branches));
        j.set("custom_map", std::move(cm));
    }
    if (c.obs_table.present) {
        Json ot = Json::object();
        Json xs = Json::array(), ys = Json::array();
        for (double v : c.obs_table.x) xs.push(Json::number(v));
        for (double v : c.obs_table.y) ys.push(Json::number(v));
        ot.set("x", std::move(xs));
        ot.set("y", std::move(ys));
        j.set("obs_table", std::move(ot));
    }
    j.set("obs_sup_norm", Json::number(c.obs_sup_norm));
    j.set("obs_lip_seminorm", Json::number(c.obs_lip_seminorm));
    j.set("grid_n", Json::integer(c.grid_n));
    j.set("samples", Json::integer(static_cast<long long>(c.samples)));
    j.set("seed", Json::integer(static_cast<long long>(c.seed)));
    Json nl = Json::array();
    for (int n : c.n_list) nl.push(Json::integer(n));
    j.set("n_list", std::move(nl));
    j.set("validation_grid", Json::integer(c.validation_grid));
    j.set("z_points", Json::integer(c.z_points));
    j.set("ring_points", Json::integer(c.ring_points));
    j.set("ring_n", Json::integer(c.ring_n));
    j.set("refined_n", Json::integer(c.refined_n));
    j.set("refined_t_points", Json::integer(c.refined_t_points));
    j.set("eps_z_count", Json::integer(c.eps_z_count));
    j.set("eps_u_samples", Json::integer(c.eps_u_samples));
    j.set("eps_pairs_per_u", Json::integer(c.eps_pairs_per_u));
    j.set("diameter_pairs", Json::integer(c.diameter_pairs));
    j.set("lab_dim", Json::integer(c.lab_dim));
    j.set("lab_count", Json::integer(c.lab_count));
    j.set("lab_comparison_count", Json::integer(c.lab_comparison_count));
    j.set("abs_tol", Json::number(c.abs_tol));
    j.set("rel_tol", Json::number(c.rel_tol));
    j.set("only", Json::str(c.only));
    if (c.has_nonmarkov) {
        Json nm = Json::object();
        nm.set("gamma", Json::number(c.nonmarkov.gamma));
        nm.set("A", Json::number(c.nonmarkov.A_LY));
        nm.set("varf", Json::number(c.nonmarkov.variation_f));
        nm.set("supf", Json::number(c.nonmarkov.sup_f));
        nm.set("cardA0", Json::number(c.nonmarkov.card_A0));
        nm.set("Nstar", Json::integer(c.nonmarkov.N_star));
        nm.set("DR", Json::number(c.nonmarkov.D_R));
        nm.set("sigma", Json::number(c.nonmarkov.sigma));
        nm.set("n", Json::number(c.nonmarkov.n));
        j.set("nonmarkov", std::move(nm));
    }
    return j;
}

std::string config_hash(const RunConfig& cfg) {
    return report::fnv1a_hex(config_json(cfg).dump());
}

RunConfig config_from_json_text(const std::string& text, RunConfig base) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const std::exception& e) {
        throw config_error(std::string("config parse failure: ") + e.what());
    }
    if (!doc.is_object()) throw config_error("config must be a JSON object");
    RunConfig c = std::move(base);
    for (const auto& [key, val] : doc.items()) {
        try {
            if (key == "map") c.map = val.get<std::string>();
            else if (key == "alpha") c.alpha = val.get<double>();
            else if (key == "j_max") c.j_max = val.get<int>();
            else if (key == "obs") c.obs = val.get<std::string>();
            else if (key == "obs_sup_norm") c.obs_sup_norm = val.get<double>();
            else if (key == "obs_lip_seminorm") c.obs_lip_seminorm = val.get<double>();
            else if (key == "grid_n") c.grid_n = val.get<int>();
            else if (key == "samples") c.samples = val.get<std::uint64_t>();
            else if (key == "seed") c.seed = val.get<std::uint64_t>();
            else if (key == "n_list") c.n_list = val.get<std::vector<int>>();
            else if (key == "validation_grid") c.validation_grid = val.get<int>();
            else if (key == "z_points") c.z_points = val.get<int>();
            else if (key == "ring_points") c.ring_points = val.get<int>();
            else if (key == "ring_n") c.ring_n = val.get<int>();
            else if (key == "refined_n") c.refined_n = val.get<int>();
            else if (key == "refined_t_points") c.refined_t_points = val.get<int>();
            else if (key == "eps_z_count") c.eps_z_count = val.get<int>();
            else if (key == "eps_u_samples") c.eps_u_samples = val.get<int>();
            else if (key == "eps_pairs_per_u") c.eps_pairs_per_u = val.get<int>();
            else if (key == "diameter_pairs") c.diameter_pairs = val.get<int>();
            else if (key == "lab_dim") c.lab_dim = val.get<int>();
            else if (key == "lab_count") c.lab_count = val.get<int>();
            else if (key == "lab_comparison_count") c.lab_comparison_count = val.get<int>();
            else if (key == "abs_tol") c.abs_tol = val.get<double>();
            else if (key == "rel_tol") c.rel_tol = val.get<double>();
            else if (key == "only") c.only = val.get<std::string>();
            else if (key == "out_dir") c.out_dir = val.get<std::string>();
            else if (key == "custom_map") {
                c.custom_map.present = true;
                c.custom_map.gamma = val.value("gamma", 0.0);
                c.custom_map.G = val.value("G", 0.0);
                c.custom_map.branches.clear();
                for (const auto& jb : val.value("branches", nlohmann::json::array())) {
                    CustomBranch b;
                    b.lo = jb.value("lo", 0.0);
                    b.hi = jb.value("hi", 1.0);
                    b.x = jb.value("x", std::vector<double>{});
                    b.sigma = jb.value("sigma", std::vector<double>{});
                    b.log_weight = jb.value("log_weight", std::vector<double>{});
                    c.custom_map.branches.push_back(std::move(b));
                }
            } else if (key == "obs_table") {
                c.obs_table.present = true;
                c.obs_table.x = val.value("x", std::vector<double>{});
                c.obs_table.y = val.value("y", std::vector<double>{});
            } else if (key == "nonmarkov") {
                c.has_nonmarkov = true;
                c.nonmarkov.gamma = val.value("gamma", 0.0);
                c.nonmarkov.A_LY = val.value("A", 1.0);
                c.nonmarkov.variation_f = val.value("varf", 0.0);
                c.nonmarkov.sup_f = val.value("supf", 0.0);
                c.nonmarkov.card_A0 = val.value("cardA0", 0.0);
                c.nonmarkov.N_star = val.value("Nstar", 0);
                c.nonmarkov.D_R = val.value("DR", 0.0);
                c.nonmarkov.sigma = val.value("sigma", 0.0);
                c.nonmarkov.n = val.value("n", 0.0);
            } else {
                throw config_error("config: unknown key '" + key + "'");
            }
        } catch (const config_error&) {
            throw;
        } catch (const std::exception& e) {
            throw config_error("config: bad value for '" + key + "': " + e.what());
        }
    }
    return c;
}

RunConfig config_from_json_file(const std::string& path, RunConfig base) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return config_from_json_text(buf.str(), std::move(base));
}

namespace {

struct Model {
    dynamics::MapSpec map;
    dynamics::ObservableSpec obs;
    transfer::GridScheme grid;
};

Model build_model(const RunConfig& cfg) {
    cfg.validate();
    Model m;
    if (cfg.map == "doubling") {
        m.map = dynamics::doubling_map();
    } else if (cfg.map == "gauss") {
        m.map = dynamics::gauss_map(cfg.alpha, cfg.j_max);
    } else {
        m.map.name = "custom";
        m.map.gamma = cfg.custom_map.gamma;
        m.map.G = cfg.custom_map.G;
        m.map.metric = dynamics::Metric{dynamics::Metric::Kind::euclidean, 0.0};
        for (const auto& b : cfg.custom_map.branches)
            m.map.branches.push_back(
                dynamics::table_branch(b.lo, b.hi, b.x, b.sigma, b.log_weight));
    }
    if (cfg.obs == "table") {
        dynamics::ObservableSpec o;
        o.name = "table";
        auto xs = std::make_shared<std::vector<double>>(cfg.obs_table.x);
        auto ys = std::make_shared<std::vector<double>>(cfg.obs_table.y);
        o.f = [xs, ys](double x) { return dynamics::piecewise_linear(*xs, *ys, x); };
        // exact norms of a piecewise-linear table: node extrema and cell slopes
        for (double v : *ys) o.sup_norm = std::max(o.sup_norm, std::abs(v));
        for (std::size_t i = 0; i + 1 < xs->size(); ++i) {
            const double mu = std::min(m.map.metric.density((*xs)[i]),
                                       m.map.metric.density((*xs)[i + 1]));
            o.lip_seminorm = std::max(o.lip_seminorm, std::abs((*ys)[i + 1] - (*ys)[i]) /
                                                          (((*xs)[i + 1] - (*xs)[i]) * mu));
        }
        m.obs = std::move(o);
    } else {
        m.obs = dynamics::make_observable(cfg.obs, m.map);
    }
    if (cfg.obs_sup_norm > 0.0) m.obs.sup_norm = cfg.obs_sup_norm;
    if (cfg.obs_lip_seminorm > 0.0) m.obs.lip_seminorm = cfg.obs_lip_seminorm;
    const int n = cfg.grid_n > 0 ? cfg.grid_n : (cfg.map == "doubling" ? 4096 : 2048);
    m.grid = transfer::GridScheme::uniform(n);
    return m;
}

std::unique_ptr<transfer::TransferOperator> build_operator(const Model& m,
                                                           const RunConfig& cfg) {
    transfer::OperatorOptions opts;
    (void)cfg;
    return std::make_unique<transfer::TransferOperator>(m.map, m.obs, m.grid, opts);
}

// Degenerate-variance gate: a vanishing asymptotic variance (the observable
// is a cocycle within numeric resolution) invalidates the certificate.
void require_nondegenerate_variance(const transfer::TransferOperator& op,
                                    const transfer::GreenKuboResult& gk) {
    // Certificates behave like F(F+L)^2/sigma^3; once sigma^2 falls below
    // 1e-4 of the squared norm scale the observable is a cocycle within
    // numeric resolution and the chain is meaningless.
    const double scale = op.observable().sup_norm + op.observable().lip_seminorm;
    if (gk.value && *gk.value < 1e-4 * scale * scale)
        throw domain_error(
            "degenerate variance: sigma^2 vanishes within tolerance (cocycle observable)");
}

Json report_header(const RunConfig& cfg) {
    Json j = Json::object();
    j.set("tool_version", Json::str(report::kToolVersion));
    j.set("config_hash", Json::str(config_hash(cfg)));
    j.set("config", config_json(cfg));
    return j;
}

Json validation_json(const dynamics::ValidationReport& v) {
    Json j = Json::object();
    j.set("grid_size", Json::integer(v.grid_size));
    j.set("worst_contraction_ratio", Json::number(v.worst_contraction_ratio));
    j.set("declared_gamma_inv", Json::number(v.declared_gamma_inv));
    j.set("worst_lip_quotient", Json::number(v.worst_lip_quotient));
    j.set("declared_G", Json::number(v.declared_G));
    j.set("weight_sum_sup", Json::number(v.weight_sum_sup));
    j.set("weight_sum_inf", Json::number(v.weight_sum_inf));
    j.set("tail_bound", Json::number(v.tail_bound));
    j.set("contraction_ok", Json::boolean(v.contraction_ok));
    j.set("lipschitz_ok", Json::boolean(v.lipschitz_ok));
    Json flags = Json::array();
    for (const auto& f : v.flags) flags.push(Json::str(f));
    j.set("flags", std::move(flags));
    return j;
}

Json observable_validation_json(const dynamics::ObservableValidation& v,
                                const dynamics::ObservableSpec& obs) {
    Json j = Json::object();
    j.set("grid_sup", Json::number(v.grid_sup));
    j.set("declared_sup", Json::number(obs.sup_norm));
    j.set("grid_lip", Json::number(v.grid_lip));
    j.set("declared_lip", Json::number(obs.lip_seminorm));
    j.set("sup_ok", Json::boolean(v.sup_ok));
    j.set("lip_ok", Json::boolean(v.lip_ok));
    return j;
}

Json check_json(const CheckReport& c) {
    Json j = Json::object();
    j.set("id", Json::str(c.id));
    j.set("sweep", Json::str(c.sweep));
    j.set("points", Json::integer(c.points));
    j.set("violations", Json::integer(c.violations));
    j.set("worst_margin", Json::number(c.worst_margin));
    j.set("abs_tol", Json::number(c.abs_tol));
    j.set("rel_tol", Json::number(c.rel_tol));
    Json notes = Json::array();
    for (const auto& n : c.notes) notes.push(Json::str(n));
    j.set("notes", std::move(notes));
    return j;
}

Json green_kubo_json(const transfer::GreenKuboResult& gk) {
    Json j = Json::object();
    j.set("value", gk.value ? Json::number(*gk.value) : Json());
    j.set("e_f2", Json::number(gk.e_f2));
    j.set("tail_estimate", Json::number(gk.tail_estimate));
    j.set("decaying", Json::boolean(gk.decaying));
    j.set("k_max", Json::integer(static_cast<long long>(gk.correlations.size()) - 1));
    if (!gk.warning.empty()) j.set("warning", Json::str(gk.warning));
    return j;
}

Json nonmarkov_json(const certify::NonMarkovReport& r) {
    Json j = Json::object();
    j.set("a_cone", Json::number(r.a_cone));
    j.set("delta0", Json::number(r.delta0));
    j.set("Delta0", Json::number(r.Delta0));
    j.set("M_N_star", Json::number(r.M_N_star));
    Json table = Json::array();
    for (const auto& [k, mk] : r.M_table) {
        Json row = Json::object();
        row.set("n", Json::integer(k));
        row.set("M_n", Json::number(mk));
        table.push(std::move(row));
    }
    j.set("M_table", std::move(table));
    j.set("final_constant", Json::number(r.final_constant));
    j.set("bound_at_n", Json::number(r.bound_at_n));
    j.set("exp_bound_ok", Json::boolean(r.exp_bound_ok));
    return j;
}

Json certificate_json(const certify::CertificateReport& cert) {
    Json fields = Json::object();
    for (const auto& [name, field] : cert.fields) {
        Json f = Json::object();
        f.set("value", Json::number(field.value));
        f.set("formula", Json::str(field.formula));
        if (!field.note.empty()) f.set("note", Json::str(field.note));
        fields.set(name, std::move(f));
    }
    Json per_n = Json::array();
    for (std::size_t i = 0; i < cert.n_list.size(); ++i) {
        Json row = Json::object();
        row.set("n", Json::number(cert.n_list[i]));
        row.set("bound", Json::number(cert.bounds[i]));
        row.set("intermediate", Json::number(cert.intermediate[i]));
        per_n.push(std::move(row));
    }
    Json j = Json::object();
    j.set("fields", std::move(fields));
    j.set("per_n", std::move(per_n));
    return j;
}

template <typename Fn>
CommandResult guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const config_error& e) {
        return CommandResult{1, {}, e.what()};
    } catch (const domain_error& e) {
        return CommandResult{2, {}, e.what()};
    } catch (const convergence_error& e) {
        return CommandResult{3, {}, e.what()};
    } catch (const estimate_unavailable& e) {
        return CommandResult{3, {}, e.what()};
    } catch (const verification_failure& e) {
        return CommandResult{4, {}, e.what()};
    }
}

std::vector<cplx> radial_z_grid(double radius, int rays, int per_ray) {
    std::vector<cplx> zs;
    zs.reserve(static_cast<std::size_t>(rays) * per_ray);
    for (int a = 0; a < rays; ++a) {
        const double theta = 2.0 * std::numbers::pi * a / rays;
        for (int m = 1; m <= per_ray; ++m) {
            const double r = radius * static_cast<double>(m) / per_ray;
            zs.push_back(std::polar(r, theta));
        }
    }
    return zs;
}

std::vector<cplx> spiral_z_grid(double radius, int count) {
    std::vector<cplx> zs;
    zs.reserve(count);
    const double golden = 0.6180339887498949;
    for (int k = 0; k < count; ++k) {
        const double r = radius * static_cast<double>(k + 1) / count;
        zs.push_back(std::polar(r, 2.0 * std::numbers::pi * golden * k));
    }
    return zs;
}

}  // namespace

CommandResult run_certify(const RunConfig& cfg) {
    return guarded([&]() -> CommandResult {
        const Model model = build_model(cfg);
        const auto validation = dynamics::validate_assumptions(model.map, cfg.validation_grid);
        const auto op = build_operator(model, cfg);
        const double sigma2 = op->sigma2_spectral();
        const auto gk = op->sigma2_green_kubo(64);
        require_nondegenerate_variance(*op, gk);

        std::vector<double> n_list(cfg.n_list.begin(), cfg.n_list.end());
        const auto cert = certify::build_certificate(
            model.map.gamma, model.map.G, op->observable().sup_norm,
            op->observable().lip_seminorm, sigma2, n_list);

        Json j = report_header(cfg);
        j.set("map", Json::str(model.map.name));
        j.set("observable", Json::str(op->observable().name));
        j.set("validation", validation_json(validation));
        j.set("observable_validation",
              observable_validation_json(
                  dynamics::validate_observable(model.map, op->observable(),
                                                cfg.validation_grid),
                  op->observable()));
        j.set("certificate", certificate_json(cert));
        j.set("sigma2_green_kubo", green_kubo_json(gk));
        j.set("observable_mean_before_centering", Json::number(op->observable_mean()));
        if (cfg.has_nonmarkov)
            j.set("nonmarkov", nonmarkov_json(certify::nonmarkov_certificate(cfg.nonmarkov)));

        CommandResult res;
        res.artifacts.emplace_back("certificate.json", j.dump());
        res.message = "certificate computed";
        return res;
    });
}

CommandResult run_spectrum(const RunConfig& cfg) {
    return guarded([&]() -> CommandResult {
        const Model model = build_model(cfg);
        const auto op = build_operator(model, cfg);
        const double sigma2 = op->sigma2_spectral();
        const auto gk = op->sigma2_green_kubo(64);
        const auto p3 = op->p3();

        // imaginary-axis ladder with conjugate pairs
        transfer::PressureTable table;
        table.phi_order = cfg.ring_n;
        table.sigma2 = sigma2;
        table.p3 = p3.value;
        const double cap = 0.9 * op->delta0();
        for (int k = -8; k <= 8; ++k) table.z.push_back(cplx(0.0, cap * k / 8.0));
        table.P.resize(table.z.size());
        table.phi_abs.resize(table.z.size());
        parallel_for(table.z.size(), [&](std::size_t i) {
            table.P[i] = op->pressure(table.z[i]);
            table.phi_abs[i] = std::abs(op->phi_n(table.z[i], table.phi_order));
        }, 1);

        std::vector<std::vector<double>> rows;
        for (std::size_t i = 0; i < table.z.size(); ++i)
            rows.push_back({table.z[i].real(), table.z[i].imag(), table.P[i].real(),
                            table.P[i].imag(), table.phi_abs[i]});
        const std::string csv =
            report::csv_table({"re_z", "im_z", "re_P", "im_P", "abs_phi_n"}, rows);

        Json j = report_header(cfg);
        j.set("map", Json::str(model.map.name));
        j.set("observable", Json::str(op->observable().name));
        j.set("lambda0", Json::number(op->lambda0()));
        j.set("residual", Json::number(op->spectrum0().residual));
        j.set("iterations", Json::integer(op->spectrum0().iterations));
        j.set("sigma2_spectral", Json::number(sigma2));
        j.set("sigma2_green_kubo", green_kubo_json(gk));
        Json p3j = Json::object();
        p3j.set("value", Json::number(p3.value));
        p3j.set("bound", Json::number(p3.bound));
        p3j.set("within_bound", Json::boolean(p3.within_bound));
        j.set("p3", std::move(p3j));
        j.set("delta0", Json::number(op->delta0()));
        j.set("D_R", Json::number(op->D_R()));
        j.set("B", Json::number(op->B()));
        Json gibbs = Json::object();
        gibbs.set("min", Json::number(op->gibbs().minCoeff()));
        gibbs.set("max", Json::number(op->gibbs().maxCoeff()));
        gibbs.set("sum", Json::number(op->gibbs().sum()));
        j.set("gibbs", std::move(gibbs));
        j.set("phi_n_order", Json::integer(cfg.ring_n));

        CommandResult res;
        res.artifacts.emplace_back("spectrum.csv", csv);
        res.artifacts.emplace_back("spectrum.json", j.dump());
        res.message = "spectral data computed";
        return res;
    });
}

CommandResult run_check_lemmas(const RunConfig& cfg) {
    return guarded([&]() -> CommandResult {
        const Model model = build_model(cfg);
        const auto op = build_operator(model, cfg);
        const verify::Tolerances tol{cfg.abs_tol, cfg.rel_tol};
        const auto wants = [&](const std::string& id) {
            return cfg.only.empty() || cfg.only == id;
        };
        std::vector<CheckReport> checks;

        if (wants("5.1")) {
            CheckReport c;
            c.id = "5.1";
            std::ostringstream os;
            os << "ratio deviation of the perturbed operator over " << cfg.eps_z_count
               << " z values x " << cfg.eps_u_samples * cfg.eps_pairs_per_u << " triples";
            c.sweep = os.str();
            c.abs_tol = tol.abs_tol;
            c.rel_tol = tol.rel_tol;
            const auto zs = spiral_z_grid(op->delta0(), cfg.eps_z_count);
            std::vector<transfer::EpsilonZReport> reps(zs.size());
            parallel_for(zs.size(), [&](std::size_t i) {
                reps[i] = op->epsilon_z_check(zs[i], cfg.eps_u_samples, cfg.eps_pairs_per_u,
                                              rng::derive_key(cfg.seed, 51, i), tol.abs_tol,
                                              tol.rel_tol);
            }, 1);
            int cone_viol = 0;
            for (const auto& r : reps) {
                c.points += r.samples;
                c.violations += r.violations;
                cone_viol += r.cone_violations;
                c.worst_margin = std::min(c.worst_margin, r.epsilon_bound - r.max_deviation);
            }
            if (cone_viol > 0) {
                c.violations += cone_viol;
                c.notes.push_back("nonpositive denominators <l_xy, L u> observed");
            }
            checks.push_back(std::move(c));
        }
        if (wants("5.2")) {
            const auto r = op->cone_diameter_check(
                cfg.diameter_pairs, rng::derive_key(cfg.seed, 52), tol.abs_tol, tol.rel_tol);
            CheckReport c;
            c.id = "5.2";
            c.sweep = "Hilbert diameter of the image of the discrete Lipschitz cone";
            c.abs_tol = tol.abs_tol;
            c.rel_tol = tol.rel_tol;
            c.points = r.samples;
            c.violations = r.violations + r.membership_flags;
            c.worst_margin = r.bound - r.max_distance;
            if (r.membership_flags > 0)
                c.notes.push_back("images failed discrete cone membership");
            checks.push_back(std::move(c));
        }
        if (wants("6.3"))
            checks.push_back(verify::ring_lemma_check(
                *op, cfg.ring_n,
                radial_z_grid(0.9 * op->delta0() * (1.0 - 1e-12), 4,
                              std::max(1, cfg.ring_points / 4)),
                0.9, tol));
        const auto z_grid =
            radial_z_grid(0.9 * op->delta0(), 8, std::max(1, cfg.z_points / 8));
        if (wants("6.4")) checks.push_back(verify::pressure_domination_check(*op, z_grid, tol));
        if (wants("6.5")) checks.push_back(verify::pressure_taylor_check(*op, z_grid, tol));
        if (wants("6.6"))
            checks.push_back(verify::variance_rate_check(*op, {1, 2, 4, 8, 16, 32, 64}, tol));
        if (wants("7.1"))
            checks.push_back(
                verify::refined_fourier_bound(*op, cfg.refined_n, cfg.refined_t_points, tol)
                    .check);

        int total = 0;
        Json arr = Json::array();
        for (const auto& c : checks) {
            total += c.violations;
            arr.push(check_json(c));
        }
        Json j = report_header(cfg);
        j.set("map", Json::str(model.map.name));
        j.set("observable", Json::str(op->observable().name));
        j.set("checks", std::move(arr));
        j.set("total_violations", Json::integer(total));

        CommandResult res;
        res.exit_code = total == 0 ? 0 : 4;
        res.artifacts.emplace_back("checks.json", j.dump());
        std::ostringstream os;
        os << checks.size() << " sweeps, " << total << " violations";
        res.message = os.str();
        return res;
    });
}

CommandResult run_cone_lab(const RunConfig& cfg) {
    return guarded([&]() -> CommandResult {
        cfg.validate();
        const auto spec = cones::ConeSpec::standard_positive(cfg.lab_dim);
        const int d = cfg.lab_dim;
        rng::Stream s(rng::derive_key(cfg.seed, 0x1ABull), 0);

        auto rand_vec = [&](rng::Stream& st) {
            Eigen::VectorXd v(d);
            for (int i = 0; i < d; ++i) v[i] = st.uniform(0.05, 1.0);
            return v;
        };
        auto rand_cone_complex = [&](rng::Stream& st) {
            const Eigen::VectorXd x = rand_vec(st), y = rand_vec(st);
            const double phase = st.uniform(0.0, 2.0 * std::numbers::pi);
            return Eigen::VectorXcd(std::exp(cplx(0, phase)) *
                                    (x.cast<cplx>() + cplx(0, 1) * y.cast<cplx>()));
        };

        CheckReport iso;
        iso.id = "4.3-isometry";
        iso.sweep = "delta estimates equal the Hilbert metric on real pairs";
        CheckReport contr;
        contr.id = "3.1-contraction";
        contr.sweep = "tanh(diameter/4) Birkhoff factor on random positive matrices";
        CheckReport disk;
        disk.id = "4.2-disk";
        disk.sweep = "delta(x, x+iy) <= h(x,y)";
        CheckReport sand;
        sand.id = "sandwich";
        sand.sweep = "delta_lower <= delta_upper on random complex cone pairs";

        for (int trial = 0; trial < cfg.lab_count; ++trial) {
            const Eigen::VectorXd x = rand_vec(s), y = rand_vec(s);
            const double h = cones::hilbert_distance(spec, x, y);
            const double up = cones::delta_upper(spec, x.cast<cplx>(), y.cast<cplx>());
            const double lo = cones::delta_lower(spec, x.cast<cplx>(), y.cast<cplx>());
            iso.record(0.0, std::abs(up - h), 1e-9);
            iso.record(0.0, std::abs(lo - h), 1e-9);

            Eigen::MatrixXd M(d, d);
            for (int i = 0; i < d; ++i)
                for (int k = 0; k < d; ++k) M(i, k) = s.uniform(0.05, 1.0);
            const auto rep = cones::contraction_check(spec, M, x, y, 1e-12);
            contr.record(rep.bound, rep.image_distance, 0.0);

            disk.record(h, cones::delta_x_plus_iy(spec, x, y), 1e-12);

            const Eigen::VectorXcd w1 = rand_cone_complex(s), w2 = rand_cone_complex(s);
            sand.record(cones::delta_upper(spec, w1, w2) + 1e-9,
                        cones::delta_lower(spec, w1, w2), 0.0);
        }

        CheckReport comp;
        comp.id = "4.5-comparison";
        comp.sweep = "dominated complex perturbations stay in the cone within the bound";
        rng::Stream cs(rng::derive_key(cfg.seed, 0xC0Dull), 0);
        for (int inst = 0; inst < cfg.lab_comparison_count; ++inst) {
            Eigen::MatrixXd P(d, d);
            for (int i = 0; i < d; ++i)
                for (int k = 0; k < d; ++k) P(i, k) = cs.uniform(0.05, 1.0);
            const double diam = cones::birkhoff_diameter(spec, P);
            const double eps =
                cs.uniform(0.1, 0.9) / (2.0 * (1.0 + std::cosh(diam / 2.0)));
            Eigen::MatrixXcd A(d, d);
            for (int i = 0; i < d; ++i)
                for (int k = 0; k < d; ++k) {
                    const double mag = eps * cs.uniform(0.0, 1.0);
                    const double ph = cs.uniform(0.0, 2.0 * std::numbers::pi);
                    A(i, k) = P(i, k) * (1.0 + std::polar(mag, ph));
                }
            cones::ComparisonOptions copts;
            copts.samples = 16;
            copts.seed = rng::derive_key(cfg.seed, 0x45ull, inst);
            const auto rep = cones::comparison_check(spec, P, A, eps, copts);
            if (rep.status != cones::ComparisonStatus::certified) {
                ++comp.violations;
                comp.notes.push_back("threshold unexpectedly not met");
                continue;
            }
            comp.points += rep.samples;
            comp.violations += rep.membership_failures + rep.distance_violations;
            comp.worst_margin = std::min(comp.worst_margin, -rep.worst_margin);
        }

        int total = 0;
        Json arr = Json::array();
        for (const auto& c : {iso, contr, disk, sand, comp}) {
            total += c.violations;
            arr.push(check_json(c));
        }
        Json j = report_header(cfg);
        j.set("checks", std::move(arr));
        j.set("total_violations", Json::integer(total));

        CommandResult res;
        res.exit_code = total == 0 ? 0 : 4;
        res.artifacts.emplace_back("checks.json", j.dump());
        std::ostringstream os;
        os << "cone lab: " << total << " violations over " << cfg.lab_count << " trials";
        res.message = os.str();
        return res;
    });
}

CommandResult run_experiment(const RunConfig& cfg) {
    return guarded([&]() -> CommandResult {
        const Model model = build_model(cfg);
        const auto op = build_operator(model, cfg);
        const double sigma2 = op->sigma2_spectral();
        const auto gk = op->sigma2_green_kubo(64);
        require_nondegenerate_variance(*op, gk);
        std::vector<double> n_list(cfg.n_list.begin(), cfg.n_list.end());
        const auto cert = certify::build_certificate(
            model.map.gamma, model.map.G, op->observable().sup_norm,
            op->observable().lip_seminorm, sigma2, n_list);

        verify::ExperimentOptions opts;
        opts.samples = cfg.samples;
        opts.seed = cfg.seed;
        opts.tol = verify::Tolerances{cfg.abs_tol, cfg.rel_tol};
        const auto rep = verify::be_experiment(*op, cert, cfg.n_list, opts);

        std::vector<std::vector<double>> rows;
        Json jrows = Json::array();
        for (const auto& r : rep.rows) {
            rows.push_back({static_cast<double>(r.n), r.distance, r.slack, r.feller,
                            r.certificate});
            Json jr = Json::object();
            jr.set("n", Json::integer(r.n));
            jr.set("distance", Json::number(r.distance));
            jr.set("dkw_slack", Json::number(r.slack));
            jr.set("feller", Json::number(r.feller));
            jr.set("feller_quad_error", Json::number(r.feller_quad_error));
            jr.set("certificate", Json::number(r.certificate));
            jr.set("slack_ratio", Json::number(r.slack_ratio));
            jrows.push(std::move(jr));
        }
        Json j = report_header(cfg);
        j.set("map", Json::str(model.map.name));
        j.set("observable", Json::str(op->observable().name));
        j.set("sigma", Json::number(cert.value("sigma")));
        j.set("rows", std::move(jrows));
        j.set("beta", Json::number(rep.beta));
        j.set("beta_in_band", Json::boolean(rep.beta_in_band));
        j.set("violations", Json::integer(rep.violations));
        j.set("jitter_events", Json::integer(rep.jitter_events));
        Json notes = Json::array();
        for (const auto& n : rep.notes) notes.push(Json::str(n));
        j.set("notes", std::move(notes));

        CommandResult res;
        res.exit_code = rep.violations == 0 ? 0 : 4;
        res.artifacts.emplace_back("experiment.json", j.dump());
        res.artifacts.emplace_back(
            "curves.csv",
            report::csv_table({"n", "distance", "slack", "feller", "certificate"}, rows));
        std::ostringstream os;
        os << "experiment: " << rep.violations << " violations, beta = " << rep.beta;
        res.message = os.str();
        return res;
    });
}

int emit(const CommandResult& result, const RunConfig& cfg) {
    if (cfg.out_dir.empty()) {
        for (const auto& [name, content] : result.artifacts) {
            std::cout << "=== " << name << " ===\n" << content;
        }
    } else {
        std::filesystem::create_directories(cfg.out_dir);
        for (const auto& [name, content] : result.artifacts) {
            std::ofstream out(std::filesystem::path(cfg.out_dir) / name, std::ios::binary);
            out << content;
        }
    }
    if (!result.message.empty()) std::cerr << result.message << "\n";
    return result.exit_code;
}

}  // namespace conecert::cli
