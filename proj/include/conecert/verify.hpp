#ifndef CONECERT_VERIFY_HPP
#define CONECERT_VERIFY_HPP

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "conecert/certify.hpp"
#include "conecert/transfer.hpp"

namespace conecert::verify {

using cplx = std::complex<double>;

double normal_cdf(double x);

// Sorted Monte-Carlo sample of the normalized Birkhoff sums together with
// its Dvoretzky-Kiefer-Wolfowitz envelope.
struct EmpiricalCDF {
    std::vector<double> sorted;
    std::uint64_t seed = 0;
    double dkw_delta = 1e-3;

    static EmpiricalCDF from_samples(std::vector<double> values, std::uint64_t seed,
                                     double dkw_delta = 1e-3);
    std::size_t count() const { return sorted.size(); }
    double dkw_slack() const;
};

// One-pass sup |ECDF - Phi| over the sorted sample.
double kolmogorov_distance(const EmpiricalCDF& ecdf);

// Characteristic-function values on a uniform t-grid [0, T]; the integrands
// built from them are even, so the negative half is implicit.
struct CharGrid {
    std::vector<double> t;
    std::vector<cplx> phi;
    double dt = 0;
    double T = 0;
};

CharGrid compute_char_grid(const transfer::TransferOperator& op, int n, double sigma,
                           double T, double dt);

struct FellerBound {
    double value = 0;       // integral part + tail: an upper Kolmogorov bound
    double integral = 0;    // (1/pi) int_{-T}^{T} |(phi(t)-e^{-t^2/2})/t| dt
    double tail = 0;        // 24/(pi T sqrt(2 pi))
    double quad_error = 0;  // trapezoid error estimate
    double T = 0;
};

// Esseen smoothing bound for the law behind the characteristic values; the
// t -> 0 integrand is the analytic limit 0 for centered observables.
// Throws estimate_unavailable when the grid is too coarse for a 1% estimate.
FellerBound feller_bound(const CharGrid& grid);

struct CheckReport {
    std::string id;
    std::string sweep;
    double worst_margin = std::numeric_limits<double>::infinity();  // min(bound-observed)
    int violations = 0;
    int points = 0;
    double abs_tol = 1e-6;
    double rel_tol = 1e-4;
    std::vector<std::string> notes;
    bool ok() const { return violations == 0; }
    void record(double bound, double observed, double slack) {
        ++points;
        worst_margin = std::min(worst_margin, bound - observed);
        if (observed > bound + slack) ++violations;
    }
};

struct Tolerances {
    double abs_tol = 1e-6;
    double rel_tol = 1e-4;
    double slack(double bound) const { return abs_tol + rel_tol * std::abs(bound); }
};

// Re P(z) <= |Re z| * F over the z sweep.
CheckReport pressure_domination_check(const transfer::TransferOperator& op,
                                      const std::vector<cplx>& z_grid, Tolerances tol = {});

// sigma^2 and P'''(0) a-priori bounds plus the cubic/quartic Taylor
// remainders of the pressure on |z| <= 0.9 delta0.
CheckReport pressure_taylor_check(const transfer::TransferOperator& op,
                                  const std::vector<cplx>& z_grid, Tolerances tol = {});

// Convenience aggregation of the two pressure sweeps.
std::vector<CheckReport> pressure_lemma_checks(const transfer::TransferOperator& op,
                                               const std::vector<cplx>& z_grid,
                                               Tolerances tol = {});

// |phi_n(z)-1| <= (e^{C(a)Delta}-1)/(a^2 delta0^2) |z|^2, the annulus bounds
// e^{-Delta} <= |phi_n| <= e^{Delta}, phi_n(0) = 1 and phi_n'(0) ~ 0.
CheckReport ring_lemma_check(const transfer::TransferOperator& op, int n,
                             const std::vector<cplx>& z_grid, double alpha,
                             Tolerances tol = {});

// |E[(S_n f)^2] - n sigma^2| <= 2 (e^{C(a)Delta}-1)/(a^2 delta0^2).
CheckReport variance_rate_check(const transfer::TransferOperator& op,
                                const std::vector<int>& n_list, Tolerances tol = {});

struct RefinedBoundReport {
    double lhs = 0;
    double rhs = 0;
    double quad_error = 0;
    double T = 0;
    bool aux_ok = false;  // 18 a/(25(1-a^4)) <= 1/8 at the certificate alpha
    CheckReport check;
};

// Third-order Fourier comparison: integral of
// |E exp(it S_n/(sigma sqrt n)) - e^{-t^2/2}(1 - i t^3 P'''(0)/(6 sigma^3 sqrt n))|/|t|
// over |t| <= alpha delta0 sigma sqrt(n) against its closed-form bound.
RefinedBoundReport refined_fourier_bound(const transfer::TransferOperator& op, int n,
                                         int t_points = 64, Tolerances tol = {});

struct ExperimentRow {
    int n = 0;
    double distance = 0;
    double slack = 0;
    double feller = 0;
    double feller_quad_error = 0;
    double certificate = 0;
    double slack_ratio = 0;  // certificate / distance
};

struct ExperimentOptions {
    std::size_t samples = 1000000;
    std::uint64_t seed = 1;
    double dkw_delta = 1e-3;
    double feller_z_cap = 1.0;   // integrate |t| <= z_cap * sigma * sqrt(n)
    double feller_dt = 0.125;
    Tolerances tol;
};

struct ExperimentReport {
    std::vector<ExperimentRow> rows;
    double beta = 0;  // fitted decay exponent of the distances
    bool beta_in_band = false;
    int violations = 0;
    long jitter_events = 0;
    std::size_t samples = 0;
    std::uint64_t seed = 0;
    std::vector<std::string> notes;
    bool ok() const { return violations == 0; }
};

// Monte-Carlo CDF distances against the Esseen bound and the certificate,
// with the decay-rate regression over n_list.
ExperimentReport be_experiment(const transfer::TransferOperator& op,
                               const certify::CertificateReport& cert,
                               const std::vector<int>& n_list,
                               const ExperimentOptions& opts = {});

// Normalized Birkhoff-sum sample S_n f/(sigma sqrt n) for one block size.
std::vector<double> sample_normalized_sums(const transfer::TransferOperator& op, int n,
                                           std::size_t count, std::uint64_t seed,
                                           double sigma, long* jitter_events = nullptr);

}  // namespace conecert::verify

#endif
