#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "conecert/certify.hpp"

using namespace conecert;
using namespace conecert::certify;

TEST_CASE("cone opening constant B") {
    CHECK(constant_B(2.0, 0.0) == doctest::Approx(1.0));
    CHECK(constant_B(2.0, 1.0) == doctest::Approx(3.0));
    // B(gamma-1) - gamma G = 1 identically
    for (double g : {1.5, 2.0, 3.7, 9.0})
        for (double G : {0.0, 0.3, 2.0, 5.0})
            CHECK(constant_B(g, G) * (g - 1.0) - g * G == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(constant_B(1.0, 0.5), domain_error);
}

TEST_CASE("diameter D_R and its dual closed form") {
    // doubling with G = 0: 1 + 2 log 3
    CHECK(constant_DR(2.0, 0.0) ==
          doctest::Approx(1.0 + 2.0 * std::log(3.0)).epsilon(1e-15));
    // the proof-side composition B - G - B/gamma = 1/gamma
    const double B = constant_B(2.0, 0.0);
    CHECK(B - 0.0 - B / 2.0 == doctest::Approx(0.5).epsilon(1e-15));
    // dual forms agree to 1e-12 over the admissible grid
    for (int i = 0; i < 20; ++i) {
        for (int j = 0; j < 20; ++j) {
            const double gamma = 1.01 + (10.0 - 1.01) * i / 19.0;
            const double G = 5.0 * j / 19.0;
            const double a = constant_DR(gamma, G);
            const double b = constant_DR_via_B(gamma, G);
            CHECK(std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a)));
            CHECK(a > 0.0);
        }
    }
}

TEST_CASE("delta0 and the threshold constants") {
    CHECK(delta0(0.0, 1.0, 0.0) == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
    // homogeneity: doubling the norms halves delta0
    CHECK(delta0(1.3, 2.0, 4.0) == doctest::Approx(0.5 * delta0(1.3, 1.0, 2.0)).epsilon(1e-14));
    // composed value for the doubling map with the cos observable
    const double D = constant_DR(2.0, 0.0);
    const double expected = 1.0 / (6.0 * std::cosh(D / 4.0) * std::cosh(D / 4.0) *
                                   (1.0 + 2.0 * std::numbers::pi));
    CHECK(delta0(D, 1.0, 2.0 * std::numbers::pi) == doctest::Approx(expected).epsilon(1e-15));
    CHECK_THROWS_AS(delta0(1.0, 0.0, 0.0), domain_error);

    const auto th = delta0_threshold(D);
    CHECK(th.Delta0 >= 4.60);
    CHECK(th.Delta0 <= 4.65);
    // threshold is the pure number (2/3)e^{1/6} for every D_R
    for (double d : {0.0, 1.0, 3.2, 17.0}) {
        const auto t = delta0_threshold(d);
        CHECK(t.threshold_value == doctest::Approx((2.0 / 3.0) * std::exp(1.0 / 6.0))
                                       .epsilon(1e-15));
        CHECK(t.threshold_value < 1.0);
        CHECK(t.eps0 * 3.0 * (1.0 + std::cosh(d / 2.0)) ==
              doctest::Approx(std::exp(1.0 / 6.0)).epsilon(1e-13));
    }
    // the closing numeric fact of the chain
    CHECK(2.0 * std::sqrt(std::numbers::pi) * std::exp(2.0 * th.Delta0 / 9.0) <= 10.0);
}

TEST_CASE("big_delta, alpha and C(alpha)") {
    CHECK(big_delta(0.0, 4.6) == doctest::Approx(4.6));
    CHECK(big_delta(3.0, 4.6) == doctest::Approx(10.6));
    CHECK(alpha_of(0.01, 1e-9, 1.0) == doctest::Approx(4e-13));
    CHECK_THROWS_AS(alpha_of(0.01, 0.0, 1.0), domain_error);
    // alpha stays below 4/25 whenever sigma^2 obeys its a priori bound
    const double d0 = 0.0128;
    const double sigma2_max = 4.0 * 1.0 / d0;
    CHECK(alpha_of(d0, sigma2_max, 1.0) == doctest::Approx(4.0 / 25.0).epsilon(1e-12));
    CHECK(c_alpha(4.0 / 25.0) <= 2.0 / 9.0);
    CHECK(c_alpha(0.5) == doctest::Approx((2.0 / std::numbers::pi) * std::log(3.0)).epsilon(1e-15));
    CHECK(c_alpha(1e-9) == doctest::Approx(0.0).epsilon(1e-8));
    CHECK_THROWS_AS(c_alpha(1.0), domain_error);
}

TEST_CASE("aperture constants") {
    const auto a = aperture_constants(1.0);
    CHECK(a.K == doctest::Approx(2.0 * std::numbers::sqrt2 * std::numbers::e).epsilon(1e-15));
    CHECK(a.C1 == doctest::Approx(std::numbers::e).epsilon(1e-15));
    for (double B : {0.1, 0.5, 1.0, 3.0, 10.0}) {
        const auto ap = aperture_constants(B);
        CHECK(ap.r_star > 0.0);
        // r_star solves C1^2 r^2 + 2 C1^2 r - B^2 = 0
        const double c2 = ap.C1 * ap.C1;
        CHECK(std::abs(c2 * ap.r_star * ap.r_star + 2.0 * c2 * ap.r_star - B * B) <=
              1e-11 * (c2 * ap.r_star + B * B));
        CHECK((ap.C1 == 1.0) == (B * std::exp(B) <= 1.0));
    }
}

TEST_CASE("per-n bound and the substitution chain") {
    const double D = constant_DR(2.0, 0.0);
    const double F = 1.0, L = 2.0 * std::numbers::pi;
    const double sigma2 = 0.5, sigma = std::sqrt(sigma2);
    const double d0 = delta0(D, F, L);
    const double alpha = alpha_of(d0, sigma2, F);
    const auto b1 = be_bound(D, d0, alpha, sigma, F, L, 1.0);
    const auto b4 = be_bound(D, d0, alpha, sigma, F, L, 4.0);
    CHECK(b4.bound_at_n == doctest::Approx(b1.bound_at_n / 2.0).epsilon(1e-13));
    // the substituted headline form dominates the intermediate chain value:
    // their ratio is exactly 11460/(36000/pi) when alpha is the certificate value
    CHECK(b1.intermediate_at_n <= b1.final_constant);
    CHECK(b1.final_constant / b1.intermediate_at_n ==
          doctest::Approx(11460.0 * std::numbers::pi / 36000.0).epsilon(1e-12));
    CHECK_THROWS_AS(be_bound(D, d0, alpha, 0.0, F, L, 16.0), domain_error);

    // homogeneity of the final form under f -> c f (sigma scales with |c|)
    for (double c : {0.5, 2.0, 7.0}) {
        const double d0c = delta0(D, c * F, c * L);
        const double ac = alpha_of(d0c, c * c * sigma2, c * F);
        const auto bc = be_bound(D, d0c, ac, c * sigma, c * F, c * L, 64.0);
        const auto b = be_bound(D, d0, alpha, sigma, F, L, 64.0);
        CHECK(bc.bound_at_n == doctest::Approx(b.bound_at_n).epsilon(1e-12));
    }
}

TEST_CASE("build_certificate wires the chain together") {
    const auto cert = build_certificate(2.0, 0.0, 1.0, 2.0 * std::numbers::pi, 0.5,
                                        {256.0, 1024.0, 4096.0});
    CHECK(cert.value("B") == doctest::Approx(1.0));
    CHECK(cert.value("D_R") == doctest::Approx(1.0 + 2.0 * std::log(3.0)));
    CHECK(cert.value("alpha") <= 4.0 / 25.0);
    CHECK(cert.fields.at("G").note.find("G=0") != std::string::npos);
    CHECK(cert.bounds.size() == 3);
    CHECK(cert.bounds[0] == doctest::Approx(cert.bound_at(256.0)));
    for (std::size_t i = 0; i < 3; ++i) CHECK(cert.intermediate[i] <= cert.bounds[i]);
    CHECK_THROWS_AS(build_certificate(2.0, 0.0, 1.0, 1.0, 0.0, {16.0}), domain_error);
}

TEST_CASE("non-Markov certificate") {
    NonMarkovInputs in;
    in.gamma = 3.0;
    in.A_LY = 2.0;
    in.variation_f = 1.0;
    in.sup_f = 1.0;
    in.card_A0 = 3.0;
    in.N_star = 4;
    in.D_R = 5.0;
    in.sigma = 0.5;
    in.n = 16.0;
    const auto rep = nonmarkov_certificate(in);
    CHECK(rep.Delta0 == doctest::Approx(3.51));
    CHECK(rep.a_cone == doctest::Approx(2.0 * 2.0 / (1.0 - 2.0 / 3.0)).epsilon(1e-14));
    CHECK(rep.a_cone > in.A_LY / (1.0 - 2.0 / in.gamma));
    CHECK(rep.M_table.size() == 4);  // N* <= n < 2N*
    CHECK(rep.exp_bound_ok);
    // the final constant uses the 9168 coefficient
    const double c4 = std::cosh(in.D_R / 4.0);
    const double expect = 9168.0 * std::pow(c4, 6) * in.sup_f * rep.M_N_star * rep.M_N_star /
                          (in.sigma * in.sigma * in.sigma);
    CHECK(rep.final_constant == doctest::Approx(expect).epsilon(1e-13));
    CHECK(rep.bound_at_n == doctest::Approx(expect / 4.0).epsilon(1e-13));

    // M_n is monotone in v(f) and sup_f, and tends to 5 n sup_f as gamma grows
    CHECK(nonmarkov_M(3.0, 1.0, 2.0, 3.0, 4) > nonmarkov_M(3.0, 1.0, 1.0, 3.0, 4));
    CHECK(nonmarkov_M(3.0, 2.0, 1.0, 3.0, 4) > nonmarkov_M(3.0, 1.0, 1.0, 3.0, 4));
    CHECK(nonmarkov_M(1e9, 1.0, 1.0, 3.0, 7) == doctest::Approx(35.0).epsilon(1e-6));

    NonMarkovInputs bad = in;
    bad.gamma = 2.0;
    CHECK_THROWS_AS(nonmarkov_certificate(bad), domain_error);
    bad = in;
    bad.n = 7.0;  // below 2 N_star
    CHECK_THROWS_AS(nonmarkov_certificate(bad), domain_error);
}
