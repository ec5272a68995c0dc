#include "conecert/certify.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace conecert::certify {

namespace {
void require_admissible(double gamma, double G, const char* who) {
    if (!(gamma > 1.0)) {
        std::ostringstream os;
        os << who << ": gamma must exceed 1 (got " << gamma << ")";
        throw domain_error(os.str());
    }
    if (!(G >= 0.0)) throw domain_error(std::string(who) + ": G must be nonnegative");
}
}  // namespace

double constant_B(double gamma, double G) {
    require_admissible(gamma, G, "constant_B");
    return (gamma * G + 1.0) / (gamma - 1.0);
}

double constant_DR(double gamma, double G) {
    require_admissible(gamma, G, "constant_DR");
    return 2.0 * (gamma * gamma * G + 1.0) / (gamma * (gamma - 1.0)) +
           2.0 * std::log((2.0 * gamma * gamma * G + gamma + 1.0) / (gamma - 1.0));
}

double constant_DR_via_B(double gamma, double G) {
    const double B = constant_B(gamma, G);
    const double t = G + B / gamma;
    if (!(B > t)) throw domain_error("constant_DR_via_B: cone opening too small");
    return 2.0 * std::log((B + t) / (B - t)) + 2.0 * t;
}

double delta0(double D_R, double sup_norm, double lip_seminorm) {
    const double total = sup_norm + lip_seminorm;
    if (!(total > 0.0)) throw domain_error("delta0: observable norms must not both vanish");
    const double c = std::cosh(D_R / 4.0);
    return 1.0 / (6.0 * c * c * total);
}

Threshold delta0_threshold(double D_R) {
    if (D_R < 0.0) throw domain_error("delta0_threshold: D_R must be nonnegative");
    Threshold t;
    const double e16 = std::exp(1.0 / 6.0);
    t.eps0 = e16 / (3.0 * (1.0 + std::cosh(D_R / 2.0)));
    t.threshold_value = 2.0 * t.eps0 * (1.0 + std::cosh(D_R / 2.0));  // = (2/3)e^{1/6}
    t.Delta0 = 3.0 * std::log(1.0 / (1.0 - (2.0 / 3.0) * e16));
    return t;
}

double big_delta(double D_R, double Delta0) { return 2.0 * D_R + Delta0; }

double alpha_of(double delta0_value, double sigma2, double sup_norm) {
    if (!(sigma2 > 0.0)) throw domain_error("alpha_of: sigma^2 must be positive");
    if (!(sup_norm > 0.0)) throw domain_error("alpha_of: sup norm must be positive");
    const double a = delta0_value * sigma2 / (25.0 * sup_norm);
    if (a > 4.0 / 25.0 + 1e-9)
        throw domain_error(
            "alpha_of: alpha exceeds 4/25; sigma^2 breaks its a priori bound "
            "(discretization suspect)");
    return a;
}

double c_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw domain_error("c_alpha: alpha must lie in (0,1)");
    return (2.0 / std::numbers::pi) * std::log((1.0 + alpha) / (1.0 - alpha));
}

ApertureConstants aperture_constants(double B) {
    if (!(B > 0.0)) throw domain_error("aperture_constants: B must be positive");
    ApertureConstants a;
    const double eb = std::exp(B);
    a.K = std::numbers::sqrt2 * (B + 1.0) * eb;
    a.C1 = std::max(1.0, B * eb);
    // positive root of C1^2 r^2 + 2 C1^2 r - B^2, in cancellation-free form
    const double q = (B / a.C1) * (B / a.C1);
    a.r_star = q / (std::sqrt(1.0 + q) + 1.0);
    a.K_prime = 1.0 / a.r_star;
    return a;
}

BeBound be_bound(double D_R, double delta0_value, double alpha, double sigma,
                 double sup_norm, double lip_seminorm, double n) {
    if (!(sigma > 0.0))
        throw domain_error("be_bound: sigma = 0 is degenerate (cocycle observable)");
    if (!(n >= 1.0)) throw domain_error("be_bound: n must be >= 1");
    BeBound b;
    const double c4 = std::cosh(D_R / 4.0);
    const double c6 = std::pow(c4, 6);
    const double total = sup_norm + lip_seminorm;
    b.final_constant = 11460.0 * c6 * sup_norm * total * total / (sigma * sigma * sigma);
    b.bound_at_n = b.final_constant / std::sqrt(n);
    b.intermediate_at_n = 40.0 * c4 * c4 /
                          (std::numbers::pi * alpha * delta0_value * sigma * std::sqrt(n));
    return b;
}

double CertificateReport::bound_at(double n) const {
    return value("final_constant") / std::sqrt(n);
}

double CertificateReport::value(const std::string& key) const {
    const auto it = fields.find(key);
    if (it == fields.end()) throw domain_error("certificate field not present: " + key);
    return it->second.value;
}

CertificateReport build_certificate(double gamma, double G, double sup_norm,
                                    double lip_seminorm, double sigma2,
                                    const std::vector<double>& n_list) {
    if (!(sigma2 > 0.0))
        throw domain_error("build_certificate: sigma^2 = 0 is degenerate (cocycle)");
    CertificateReport rep;
    auto put = [&rep](const std::string& key, double v, const std::string& formula,
                      const std::string& note = "") {
        rep.fields[key] = Field{v, formula, note};
    };
    put("gamma", gamma, "input");
    put("G", G, "input", G == 0.0 ? "G=0 accepted (degenerate Lipschitz bound)" : "");
    put("sup_norm", sup_norm, "input");
    put("lip_seminorm", lip_seminorm, "input");
    put("sigma2", sigma2, "input");

    const double B = constant_B(gamma, G);
    put("B", B, "B=(gamma*G+1)/(gamma-1)");
    const double D_R = constant_DR(gamma, G);
    const double D_R2 = constant_DR_via_B(gamma, G);
    if (std::abs(D_R - D_R2) > 1e-12 * std::max(1.0, std::abs(D_R)))
        throw verification_failure("build_certificate: D_R closed forms disagree");
    put("D_R", D_R, "D_R=2(g^2 G+1)/(g(g-1))+2 log((2g^2 G+g+1)/(g-1))");

    const auto ap = aperture_constants(B);
    put("K_aperture", ap.K, "K=sqrt(2)(B+1)e^B");
    put("C1", ap.C1, "C1=max(1,B e^B)");
    put("r_star", ap.r_star, "r*=sqrt(1+B^2/C1^2)-1");
    put("K_prime", ap.K_prime, "K'=1/r*", "implementation-derived candidate");

    const double d0 = delta0(D_R, sup_norm, lip_seminorm);
    put("delta0", d0, "delta0=1/(6 cosh^2(D_R/4) (F+L))");
    const auto th = delta0_threshold(D_R);
    put("eps0", th.eps0, "eps0=e^{1/6}/(3(1+cosh(D_R/2)))");
    put("Delta0", th.Delta0, "Delta0=3 log(1/(1-(2/3)e^{1/6}))");
    put("threshold", th.threshold_value, "2 eps0 (1+cosh(D_R/2))");
    if (!(th.threshold_value < 1.0))
        throw verification_failure("build_certificate: comparison threshold not below 1");
    put("Delta", big_delta(D_R, th.Delta0), "Delta=2 D_R+Delta0");

    const double sigma = std::sqrt(sigma2);
    put("sigma", sigma, "sigma=sqrt(sigma2)");
    const double alpha = alpha_of(d0, sigma2, sup_norm);
    put("alpha", alpha, "alpha=delta0 sigma^2/(25 F)");
    put("C_alpha", c_alpha(alpha), "C(a)=(2/pi) log((1+a)/(1-a))");

    const auto b1 = be_bound(D_R, d0, alpha, sigma, sup_norm, lip_seminorm, 1.0);
    put("final_constant", b1.final_constant,
        "C=11460 cosh^6(D_R/4) F (F+L)^2/sigma^3");
    if (b1.intermediate_at_n > b1.final_constant * (1.0 + 1e-12))
        throw verification_failure("build_certificate: intermediate chain exceeds final form");

    rep.n_list = n_list;
    for (double n : n_list) {
        const auto b = be_bound(D_R, d0, alpha, sigma, sup_norm, lip_seminorm, n);
        rep.bounds.push_back(b.bound_at_n);
        rep.intermediate.push_back(b.intermediate_at_n);
    }
    return rep;
}

double nonmarkov_M(double gamma, double sup_f, double variation_f, double card_A0, int k) {
    if (!(gamma > 2.0)) throw domain_error("nonmarkov_M: gamma must exceed 2");
    if (k < 1) throw domain_error("nonmarkov_M: k must be >= 1");
    const double r = std::pow(2.0 / gamma, k);
    return 5.0 / (1.0 - r) * (k * sup_f + r * std::pow(card_A0, k) * variation_f);
}

NonMarkovReport nonmarkov_certificate(const NonMarkovInputs& in) {
    if (!(in.gamma > 2.0))
        throw domain_error("nonmarkov_certificate: needs inf|T'| >= gamma > 2");
    if (in.N_star < 1) throw domain_error("nonmarkov_certificate: N_star must be >= 1");
    if (!(in.D_R > 0.0))
        throw domain_error("nonmarkov_certificate: D_R must be supplied positive");
    if (!(in.sigma > 0.0)) throw domain_error("nonmarkov_certificate: sigma must be positive");
    if (!(in.n >= 2.0 * in.N_star))
        throw domain_error("nonmarkov_certificate: bound only claimed for n >= 2 N_star");
    if (!(in.A_LY >= 1.0))
        throw domain_error("nonmarkov_certificate: Lasota-Yorke constant A is always >= 1");

    NonMarkovReport rep;
    rep.a_cone = 2.0 * in.A_LY / (1.0 - 2.0 / in.gamma);
    double max_M = 0.0;
    for (int k = in.N_star; k < 2 * in.N_star; ++k) {
        const double mk = nonmarkov_M(in.gamma, in.sup_f, in.variation_f, in.card_A0, k);
        rep.M_table.emplace_back(k, mk);
        max_M = std::max(max_M, mk);
    }
    rep.M_N_star = rep.M_table.front().second;
    rep.delta0 = 1.0 / (3.0 * (1.0 + std::cosh(in.D_R / 2.0)) * max_M);
    rep.Delta0 = 3.51;
    rep.exp_bound_ok = true;
    for (const auto& [k, mk] : rep.M_table) {
        (void)mk;
        if (k * rep.delta0 * in.sup_f > 1.0 / 30.0 + 1e-15) rep.exp_bound_ok = false;
    }
    const double c4 = std::cosh(in.D_R / 4.0);
    rep.final_constant = 9168.0 * std::pow(c4, 6) * in.sup_f * rep.M_N_star * rep.M_N_star /
                         (in.sigma * in.sigma * in.sigma);
    rep.bound_at_n = rep.final_constant / std::sqrt(in.n);
    return rep;
}

}  // namespace conecert::certify
