#ifndef CONECERT_CERTIFY_HPP
#define CONECERT_CERTIFY_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "conecert/errors.hpp"

namespace conecert::certify {

// Explicit constant chain for the Berry-Esseen certificate of a uniformly
// expanding Markov interval map with expansion gamma and weight-Lipschitz
// bound G, evaluated for an observable with sup norm F and Lipschitz
// seminorm L. All formulas are closed-form; each certificate field carries
// its formula id and inputs so reports are recomputable bit-for-bit.

// Cone opening constant B = (gamma*G + 1)/(gamma - 1); any value above
// gamma*G/(gamma-1) would do, this one keeps epsilon(z) simple.
double constant_B(double gamma, double G);

// Hilbert diameter bound of the transfer-operator image of the cone:
//   D_R = 2(gamma^2 G + 1)/(gamma(gamma-1)) + 2 log((2 gamma^2 G + gamma + 1)/(gamma - 1)).
double constant_DR(double gamma, double G);

// The same diameter composed through B as in the cone-contraction proof:
//   2 log((B + G + B/gamma)/(B - G - B/gamma)) + 2(G + B/gamma).
// Agrees with constant_DR identically; kept as an independent route.
double constant_DR_via_B(double gamma, double G);

// Perturbation radius: delta0*(F+L) = 1/(6 cosh^2(D_R/4)).
double delta0(double D_R, double sup_norm, double lip_seminorm);

struct Threshold {
    double eps0;    // e^{1/6} / (3(1+cosh(D_R/2)))
    double Delta0;  // 3 log(1/(1 - (2/3)e^{1/6})), a pure number <= 4.65
    double threshold_value;  // 2*eps0*(1+cosh(D_R/2)) = (2/3)e^{1/6}
};
Threshold delta0_threshold(double D_R);

// Delta = 2 D_R + Delta0.
double big_delta(double D_R, double Delta0);

// alpha = delta0*sigma^2/(25*F); at most 4/25 when sigma^2 obeys its a
// priori bound. A larger value signals an inconsistent variance estimate.
double alpha_of(double delta0_value, double sigma2, double sup_norm);

// C(alpha) = (2/pi) log((1+alpha)/(1-alpha)).
double c_alpha(double alpha);

struct ApertureConstants {
    double K;       // sqrt(2)(B+1)e^B: cone aperture
    double C1;      // max(1, B e^B)
    double r_star;  // sqrt(1 + B^2/C1^2) - 1: certified interior radius at 1
    double K_prime; // 1/r_star (implementation-derived dual-aperture candidate)
};
ApertureConstants aperture_constants(double B);

struct BeBound {
    double final_constant;      // 11460 cosh^6(D_R/4) F (F+L)^2 / sigma^3
    double bound_at_n;          // final_constant / sqrt(n)
    double intermediate_at_n;   // 40 cosh^2(D_R/4)/(pi alpha delta0 sigma sqrt(n))
};
// Headline per-n bound; the intermediate form must not exceed the final
// form (the substitution only loses a factor 11460/(36000/pi)).
BeBound be_bound(double D_R, double delta0_value, double alpha, double sigma,
                 double sup_norm, double lip_seminorm, double n);

// One certificate field with recomputable provenance.
struct Field {
    double value = 0;
    std::string formula;  // formula id, e.g. "B=(gamma*G+1)/(gamma-1)"
    std::string note;     // optional flag, e.g. "G=0 accepted"
};

struct CertificateReport {
    std::map<std::string, Field> fields;  // gamma, G, B, D_R, K, delta0, ...
    std::vector<double> n_list;
    std::vector<double> bounds;        // final bound at each n
    std::vector<double> intermediate;  // sharper intermediate chain value
    double bound_at(double n) const;
    double value(const std::string& key) const;
};

// Assemble the full chain from (gamma, G), observable norms and sigma^2.
// sigma2 <= 0 is a degenerate-variance error (the observable is a cocycle).
CertificateReport build_certificate(double gamma, double G, double sup_norm,
                                    double lip_seminorm, double sigma2,
                                    const std::vector<double>& n_list);

struct NonMarkovInputs {
    double gamma = 0;        // inf |T'|, must exceed 2
    double A_LY = 0;         // Lasota-Yorke inhomogeneity
    double variation_f = 0;  // total variation v(f)
    double sup_f = 0;
    double card_A0 = 0;      // number of monotonicity intervals
    int N_star = 0;          // user-supplied contraction time
    double D_R = 0;          // user-supplied Hilbert diameter
    double sigma = 0;
    double n = 0;            // must be >= 2*N_star
};

struct NonMarkovReport {
    double a_cone = 0;    // 2*A/(1 - 2/gamma)
    double delta0 = 0;    // from max_{N*<=k<2N*} M_k(f)
    double Delta0 = 3.51; // projective displacement constant of the BV cone
    double M_N_star = 0;
    std::vector<std::pair<int, double>> M_table;  // (k, M_k(f)) for N*<=k<2N*
    double final_constant = 0;  // 9168 cosh^6(D_R/4) sup_f M_{N*}^2 / sigma^3
    double bound_at_n = 0;
    bool exp_bound_ok = false;  // exp(k delta0 sup_f) <= e^{1/30} on the window
};

// M_k(f) = 5/(1-(2/gamma)^k) * (k*sup_f + (2/gamma)^k * card_A0^k * variation_f).
double nonmarkov_M(double gamma, double sup_f, double variation_f, double card_A0, int k);

NonMarkovReport nonmarkov_certificate(const NonMarkovInputs& in);

}  // namespace conecert::certify

#endif
