#ifndef CONECERT_DYNAMICS_HPP
#define CONECERT_DYNAMICS_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "conecert/errors.hpp"
#include "conecert/rng.hpp"

namespace conecert::dynamics {

// Metric on [0,1] of diameter at most 1. The gauss_alpha family is
// d(x,y) = |x-y| * (1 - alpha - alpha*(x+y)/2), the length metric of the
// density 1 - alpha - alpha*s.
struct Metric {
    enum class Kind { euclidean, gauss_alpha };
    Kind kind = Kind::euclidean;
    double alpha = 0.0;

    double operator()(double x, double y) const;
    double density(double s) const;  // local length density
    std::string describe() const;
};

double gauss_metric_distance(double alpha, double x, double y);

// One inverse branch of the map together with its weight g(sigma_j(x)).
struct Branch {
    std::function<double(double)> inverse;     // sigma_j : [0,1] -> [lo,hi]
    std::function<double(double)> log_weight;  // x -> g(sigma_j(x))
    double domain_lo = 0.0;                    // forward-map domain of this branch
    double domain_hi = 1.0;
    std::function<double(double)> forward;     // optional closed form of T on the domain
};

struct MapSpec {
    std::string name;
    std::vector<Branch> branches;
    double gamma = 2.0;    // expansion: every branch is gamma^{-1}-Lipschitz
    double G = 0.0;        // Lipschitz bound of the branch weights
    Metric metric;
    double tail_bound = 0.0;        // certified weight of truncated branches
    bool binary_shift_orbits = false;  // orbits advance by an exact bit shift
};

// Doubling map x -> 2x mod 1 with weight -log 2 per branch. The Lipschitz
// seminorm of the weights is exactly 0; G = 0 is kept and flagged downstream.
MapSpec doubling_map();

// Gauss map x -> 1/x mod 1 with weight 2*log x, truncated at j_max branches.
// The exact branch-weight tail sum_{j>j_max} (j+x)^{-2} is lumped into one
// final branch at sigma(x) = 1/(j_max+1+x), so assumptions and weight sums
// stay those of the full map; the lumping displacement is <= 1/(j_max+1).
MapSpec gauss_map(double alpha, int j_max = 64);

// Branch built from piecewise-linear tables over shared breakpoints xs
// (strictly increasing, spanning [0,1]): the inverse branch sigma and its
// weight g(sigma(x)). The forward map comes from monotone inversion.
Branch table_branch(double domain_lo, double domain_hi, std::vector<double> xs,
                    std::vector<double> sigma_vals, std::vector<double> log_weight_vals);

// Clamped piecewise-linear interpolation over strictly increasing nodes.
double piecewise_linear(const std::vector<double>& xs, const std::vector<double>& ys,
                        double x);

struct ObservableSpec {
    std::string name;
    std::function<double(double)> f;
    double sup_norm = 0.0;       // valid upper bound for |f|
    double lip_seminorm = 0.0;   // valid upper bound for |f|_lip in the map metric
    bool centered = false;

    double operator()(double x) const { return f(x); }
    // Shift by the given mean; the sup bound grows by |mean|.
    ObservableSpec centered_copy(double mean) const;
};

// Preset observables ("cos1", "sin1", "cocycle"), with Lipschitz seminorms
// stated for the map's metric.
ObservableSpec make_observable(const std::string& name, const MapSpec& map);

struct ValidationReport {
    int grid_size = 0;
    double worst_contraction_ratio = 0;  // sup over pairs/branches of d(sx,sy)/d(x,y)
    double worst_lip_quotient = 0;       // sup of |g(sx)-g(sy)|/d(x,y)
    double weight_sum_sup = 0;           // sup of sum_j exp(g(sigma_j x))
    double weight_sum_inf = 0;
    double declared_gamma_inv = 0;
    double declared_G = 0;
    double tail_bound = 0;
    bool contraction_ok = false;
    bool lipschitz_ok = false;
    std::vector<std::string> flags;
};

// Report-only grid validation of the expansion/Lipschitz/summability
// assumptions behind the declared (gamma, G).
ValidationReport validate_assumptions(const MapSpec& map, int grid_size);

struct ObservableValidation {
    double grid_sup = 0;   // max |f| over the grid
    double grid_lip = 0;   // max difference quotient in the map metric
    bool sup_ok = false;   // declared sup_norm dominates the grid estimate
    bool lip_ok = false;
};

// Report-only check that the declared norms are valid upper bounds for what
// the grid sees; deliberately not enforced so under-declared norms can be
// used as negative controls downstream.
ObservableValidation validate_observable(const MapSpec& map, const ObservableSpec& f,
                                         int grid_size);

struct JitterLog {
    long events = 0;
};

// Forward map reconstructed from the branch domains; points within 1e-14 of
// a partition endpoint are nudged by +1e-12 and logged.
double forward_map(const MapSpec& map, double x, JitterLog* log = nullptr);

// Birkhoff sum of f along the forward orbit of x0; n = 0 gives 0.
double birkhoff_sum(const MapSpec& map, const ObservableSpec& f, double x0, int n,
                    JitterLog* log = nullptr);

// Exact stationary orbit stream for binary-shift maps: the point sequence is
// T^k(x0) for an x0 whose binary digits are drawn i.i.d. from the stream key,
// so long orbits do not collapse onto the fixed point the way plain doubles
// do (each doubling step would discard one mantissa bit).
class BinaryShiftOrbit {
public:
    BinaryShiftOrbit(std::uint64_t seed, std::uint64_t sample_index);
    // Current point, then advance one step.
    double next();

private:
    std::uint64_t key_;
    std::uint64_t window_;
    std::uint64_t buffer_;
    int buffer_used_;
    std::uint64_t block_;
};

// Inverse-CDF sampling of a piecewise-linear probability density given on
// grid nodes. Deterministic per (seed, sample index); bit-for-bit stable
// under sharding.
std::vector<double> sample_gibbs(const std::vector<double>& nodes,
                                 const std::vector<double>& density, std::size_t count,
                                 std::uint64_t seed);

// Upper bound sum_{j > j_max} j^{-2} for the truncated branch-weight tail.
double gauss_tail_bound(int j_max);

// Trigamma psi'(x) for x >= 1 (recurrence + asymptotic series).
double trigamma(double x);

}  // namespace conecert::dynamics

#endif
