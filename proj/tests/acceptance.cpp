// Acceptance suite: one pass/fail line per criterion, exit 0 iff all pass.
// Budgeted for a two-core desk machine; the heaviest run is the end-to-end
// Monte Carlo experiment.

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "conecert/certify.hpp"
#include "conecert/cli.hpp"
#include "conecert/cones.hpp"
#include "conecert/dynamics.hpp"
#include "conecert/rng.hpp"
#include "conecert/transfer.hpp"
#include "conecert/verify.hpp"

using namespace conecert;
using cplx = std::complex<double>;

namespace {

int failures = 0;

void criterion(int id, const std::string& name, const std::function<std::string()>& body) {
    const auto start = std::chrono::steady_clock::now();
    bool pass = true;
    std::string detail;
    try {
        detail = body();
    } catch (const std::exception& e) {
        pass = false;
        detail = e.what();
    }
    if (detail.rfind("FAIL", 0) == 0) pass = false;
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!pass) ++failures;
    std::printf("%s criterion %2d: %s (%s) [%.1fs]\n", pass ? "PASS" : "FAIL", id,
                name.c_str(), detail.c_str(), secs);
    std::fflush(stdout);
}

std::string okfail(bool ok, const std::string& detail) {
    return ok ? detail : "FAIL " + detail;
}

Eigen::VectorXd random_positive(rng::Stream& s, int d) {
    Eigen::VectorXd v(d);
    for (int i = 0; i < d; ++i) v[i] = s.uniform(0.05, 1.0);
    return v;
}

Eigen::MatrixXd random_positive_matrix(rng::Stream& s, int d) {
    Eigen::MatrixXd m(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) m(i, j) = s.uniform(0.05, 1.0);
    return m;
}

}  // namespace

int main() {
    using dynamics::doubling_map;
    using dynamics::gauss_map;
    using dynamics::make_observable;
    using transfer::GridScheme;
    using transfer::TransferOperator;

    criterion(1, "golden constants", [] {
        const auto th = certify::delta0_threshold(1.0);
        bool ok = th.Delta0 >= 4.60 && th.Delta0 <= 4.65;
        ok = ok && certify::c_alpha(4.0 / 25.0) <= 2.0 / 9.0;
        ok = ok && 2.0 * std::sqrt(std::numbers::pi) * std::exp(2.0 * th.Delta0 / 9.0) <= 10.0;
        certify::NonMarkovInputs in;
        in.gamma = 3.0;
        in.A_LY = 2.0;
        in.variation_f = 1.0;
        in.sup_f = 1.0;
        in.card_A0 = 3.0;
        in.N_star = 4;
        in.D_R = 5.0;
        in.sigma = 0.5;
        in.n = 16.0;
        const auto nm = certify::nonmarkov_certificate(in);
        ok = ok && nm.Delta0 == 3.51;
        const double c6 = std::pow(std::cosh(in.D_R / 4.0), 6);
        const double expect = 9168.0 * c6 * in.sup_f * nm.M_N_star * nm.M_N_star / 0.125;
        ok = ok && std::abs(nm.final_constant - expect) <= 1e-12 * expect;
        std::ostringstream os;
        os << "Delta0 = " << th.Delta0 << ", C(4/25) = " << certify::c_alpha(4.0 / 25.0)
           << ", nonmarkov Delta0 = " << nm.Delta0 << ", coefficient 9168";
        return okfail(ok, os.str());
    });

    criterion(2, "D_R dual-form identity on a 400-point grid", [] {
        double worst = 0.0;
        for (int i = 0; i < 20; ++i)
            for (int j = 0; j < 20; ++j) {
                const double gamma = 1.01 + (10.0 - 1.01) * i / 19.0;
                const double G = 5.0 * j / 19.0;
                const double a = certify::constant_DR(gamma, G);
                const double b = certify::constant_DR_via_B(gamma, G);
                worst = std::max(worst, std::abs(a - b) / std::max(1.0, std::abs(a)));
            }
        std::ostringstream os;
        os << "worst relative gap " << worst;
        return okfail(worst <= 1e-12, os.str());
    });

    criterion(3, "sigma^2 cross-validation, doubling + cos, N = 4096", [] {
        const auto map = doubling_map();
        TransferOperator op(map, make_observable("cos1", map), GridScheme::uniform(4096));
        const double s_sp = op.sigma2_spectral();
        const auto gk = op.sigma2_green_kubo(64);
        if (!gk.value) return std::string("FAIL green-kubo produced no value");
        const bool ok = std::abs(s_sp - 0.5) <= 1e-3 && std::abs(*gk.value - 0.5) <= 1e-3 &&
                        std::abs(s_sp - *gk.value) <= 1e-3;
        std::ostringstream os;
        os << "spectral " << s_sp << ", green-kubo " << *gk.value;
        return okfail(ok, os.str());
    });

    criterion(4, "normalization: doubling triple and gauss density", [] {
        const auto map = doubling_map();
        TransferOperator op(map, make_observable("cos1", map), GridScheme::uniform(4096));
        bool ok = std::abs(op.lambda0() - 1.0) <= 1e-10;
        double h_err = 0.0;
        for (int i = 0; i < 4096; ++i)
            h_err = std::max(h_err, std::abs(op.spectrum0().h[i].real() - 1.0));
        ok = ok && h_err <= 1e-8;

        const auto gmap = gauss_map(0.2, 64);
        TransferOperator gop(gmap, make_observable("cos1", gmap), GridScheme::uniform(2048));
        const Eigen::VectorXd h = gop.spectrum0().h.real();
        const auto w = gop.grid().lebesgue_weights();
        const double mass = (w.array() * h.array()).sum();
        double sup_err = 0.0;
        for (int i = 0; i < gop.grid().node_count; ++i) {
            const double x = gop.grid().nodes[i];
            sup_err = std::max(sup_err,
                               std::abs(h[i] / mass - 1.0 / ((1.0 + x) * std::log(2.0))));
        }
        ok = ok && sup_err <= 1e-3;
        std::ostringstream os;
        os << "lambda0 - 1 = " << op.lambda0() - 1.0 << ", sup|h0 - 1| = " << h_err
           << ", gauss density sup error = " << sup_err;
        return okfail(ok, os.str());
    });

    criterion(5, "cone isometry, contraction, disk inequality, sandwich (1e3 draws)", [] {
        const auto spec = cones::ConeSpec::standard_positive(5);
        rng::Stream s(rng::derive_key(2026, 5), 0);
        int viol = 0;
        double worst_iso = 0.0;
        for (int trial = 0; trial < 1000; ++trial) {
            const Eigen::VectorXd x = random_positive(s, 5), y = random_positive(s, 5);
            const double h = cones::hilbert_distance(spec, x, y);
            const double up = cones::delta_upper(spec, x.cast<cplx>(), y.cast<cplx>());
            const double lo = cones::delta_lower(spec, x.cast<cplx>(), y.cast<cplx>());
            worst_iso = std::max({worst_iso, std::abs(up - h), std::abs(lo - h)});
            if (std::abs(up - h) > 1e-9 || std::abs(lo - h) > 1e-9) ++viol;

            const Eigen::MatrixXd m = random_positive_matrix(s, 5);
            const auto rep = cones::contraction_check(spec, m, x, y, 1e-12);
            if (!rep.ok) ++viol;

            if (cones::delta_x_plus_iy(spec, x, y) > h + 1e-12) ++viol;

            const Eigen::VectorXcd w1 =
                std::exp(cplx(0, s.uniform(0, 6.28))) *
                (random_positive(s, 5).cast<cplx>() + cplx(0, 1) * random_positive(s, 5).cast<cplx>());
            const Eigen::VectorXcd w2 =
                std::exp(cplx(0, s.uniform(0, 6.28))) *
                (random_positive(s, 5).cast<cplx>() + cplx(0, 1) * random_positive(s, 5).cast<cplx>());
            if (cones::delta_lower(spec, w1, w2) > cones::delta_upper(spec, w1, w2) + 1e-9)
                ++viol;
        }
        std::ostringstream os;
        os << viol << " violations, worst isometry gap " << worst_iso;
        return okfail(viol == 0, os.str());
    });

    criterion(6, "dominated-comparison sweep (1e2 instances)", [] {
        const auto spec = cones::ConeSpec::standard_positive(5);
        rng::Stream s(rng::derive_key(2026, 6), 0);
        int bad = 0;
        for (int inst = 0; inst < 100; ++inst) {
            const Eigen::MatrixXd p = random_positive_matrix(s, 5);
            const double diam = cones::birkhoff_diameter(spec, p);
            const double eps = s.uniform(0.1, 0.9) / (2.0 * (1.0 + std::cosh(diam / 2.0)));
            Eigen::MatrixXcd a(5, 5);
            for (int i = 0; i < 5; ++i)
                for (int j = 0; j < 5; ++j)
                    a(i, j) = p(i, j) * (1.0 + std::polar(eps * s.uniform(0.0, 1.0),
                                                          s.uniform(0.0, 6.28)));
            cones::ComparisonOptions opts;
            opts.samples = 32;
            opts.seed = rng::derive_key(2026, 600 + inst);
            opts.tol = 1e-9;
            const auto rep = cones::comparison_check(spec, p, a, eps, opts);
            if (rep.status != cones::ComparisonStatus::certified || !rep.ok()) ++bad;
        }
        std::ostringstream os;
        os << bad << " failed instances";
        return okfail(bad == 0, os.str());
    });

    criterion(7, "ratio and diameter sweeps (both presets)", [] {
        int violations = 0;
        std::ostringstream os;
        for (const std::string preset : {"doubling", "gauss"}) {
            cli::RunConfig cfg;
            cfg.map = preset;
            cfg.seed = 7;
            for (const char* id : {"5.1", "5.2"}) {
                cfg.only = id;
                const auto res = cli::run_check_lemmas(cfg);
                if (res.exit_code != 0) ++violations;
            }
            os << preset << " ok; ";
        }
        return okfail(violations == 0, os.str());
    });

    criterion(8, "analytic-lemma sweeps (both presets)", [] {
        int violations = 0;
        std::ostringstream os;
        for (const std::string preset : {"doubling", "gauss"}) {
            cli::RunConfig cfg;
            cfg.map = preset;
            cfg.seed = 8;
            for (const char* id : {"6.3", "6.4", "6.5", "6.6", "7.1"}) {
                cfg.only = id;
                const auto res = cli::run_check_lemmas(cfg);
                if (res.exit_code != 0) {
                    ++violations;
                    os << preset << " " << id << " failed: " << res.message << "; ";
                }
            }
        }
        if (violations == 0) os << "all sweeps clean on both presets";
        return okfail(violations == 0, os.str());
    });

    criterion(9, "end-to-end Berry-Esseen experiment (1e6 samples)", [] {
        const auto map = doubling_map();
        TransferOperator op(map, make_observable("cos1", map), GridScheme::uniform(4096));
        const auto cert = certify::build_certificate(
            map.gamma, map.G, op.observable().sup_norm, op.observable().lip_seminorm,
            op.sigma2_spectral(), {256.0, 1024.0, 4096.0});
        verify::ExperimentOptions opts;
        opts.samples = 1000000;
        opts.seed = 9;
        const auto rep = verify::be_experiment(op, cert, {256, 1024, 4096}, opts);
        bool ok = rep.ok() && rep.beta_in_band;
        double min_ratio = 1e300;
        for (const auto& r : rep.rows) {
            ok = ok && (r.distance - r.slack <= r.feller + r.feller_quad_error + 1e-6);
            ok = ok && (r.distance - r.slack <= r.certificate);
            min_ratio = std::min(min_ratio, r.slack_ratio);
        }
        ok = ok && min_ratio >= 1e3;
        std::ostringstream os;
        os << "beta = " << rep.beta << ", min slack ratio = " << min_ratio << ", distances";
        for (const auto& r : rep.rows) os << " " << r.distance;
        return okfail(ok, os.str());
    });

    criterion(10, "byte-identical reruns", [] {
        cli::RunConfig cfg;
        cfg.grid_n = 512;
        cfg.samples = 20000;
        cfg.n_list = {64, 256};
        cfg.eps_z_count = 8;
        cfg.eps_u_samples = 3;
        cfg.eps_pairs_per_u = 40;
        cfg.diameter_pairs = 32;
        cfg.z_points = 16;
        cfg.ring_points = 8;
        cfg.ring_n = 32;
        cfg.refined_n = 64;
        cfg.refined_t_points = 24;
        cfg.lab_count = 64;
        cfg.lab_comparison_count = 8;
        auto same = [](const cli::CommandResult& a, const cli::CommandResult& b) {
            if (a.artifacts.size() != b.artifacts.size()) return false;
            for (std::size_t i = 0; i < a.artifacts.size(); ++i)
                if (a.artifacts[i] != b.artifacts[i]) return false;
            return true;
        };
        bool ok = same(cli::run_certify(cfg), cli::run_certify(cfg));
        ok = ok && same(cli::run_spectrum(cfg), cli::run_spectrum(cfg));
        ok = ok && same(cli::run_cone_lab(cfg), cli::run_cone_lab(cfg));
        ok = ok && same(cli::run_experiment(cfg), cli::run_experiment(cfg));
        cli::RunConfig lem = cfg;
        lem.only = "6.4";
        ok = ok && same(cli::run_check_lemmas(lem), cli::run_check_lemmas(lem));
        return okfail(ok, ok ? "all command reruns byte-identical" : "artifact mismatch");
    });

    if (failures == 0) {
        std::printf("acceptance: all criteria passed\n");
        return 0;
    }
    std::printf("acceptance: %d criteria failed\n", failures);
    return 1;
}
