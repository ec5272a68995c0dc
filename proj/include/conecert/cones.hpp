#ifndef CONECERT_CONES_HPP
#define CONECERT_CONES_HPP

#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "conecert/errors.hpp"

namespace conecert::cones {

using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;
using cplx = std::complex<double>;

inline constexpr double kMembershipTol = 1e-12;  // relative, scaled by norms

// A closed convex cone in R^d described by a finite generating family of
// dual functionals: C = { v : <l,v> >= 0 for every l }. Generators are kept
// in sparse form so grids with many pairwise functionals stay cheap.
class ConeSpec {
public:
    enum class Preset { standard_positive, lipschitz_grid };

    // Coordinate functionals e_i; extreme rays are the coordinate axes.
    static ConeSpec standard_positive(int dim);

    // Cone of positive grid functions with log-Lipschitz constant B:
    // generators are the point evaluations u -> u(x_i) together with
    // u -> exp(B*d(x_i,x_j))*u(x_j) - u(x_i) over ordered node pairs.
    // pair_stride > 1 subsamples the pair family (distances computed over a
    // generator subset are then lower estimates).
    static ConeSpec lipschitz_grid(std::vector<double> nodes, double B,
                                   std::function<double(double, double)> metric,
                                   std::size_t pair_stride = 1);

    Preset preset() const { return preset_; }
    int dimension() const { return dim_; }
    std::size_t generator_count() const { return gen_count_; }
    double lipschitz_B() const { return B_; }

    double apply_generator(std::size_t k, const VectorXd& v) const;
    cplx apply_generator(std::size_t k, const VectorXcd& v) const;
    double generator_norm(std::size_t k) const;
    std::string describe_generator(std::size_t k) const;

    // Extreme rays when they are known (standard cone); empty otherwise.
    const std::vector<VectorXd>& extreme_rays() const { return rays_; }

private:
    Preset preset_ = Preset::standard_positive;
    int dim_ = 0;
    std::size_t gen_count_ = 0;
    // lipschitz_grid data: sampled ordered pairs (i,j) with coefficient
    // exp(B*d(x_i,x_j)); generator k < dim_ is the point evaluation at k.
    std::vector<double> nodes_;
    double B_ = 0;
    std::vector<std::pair<std::int32_t, std::int32_t>> pairs_;
    std::vector<double> pair_coeff_;
    std::vector<VectorXd> rays_;
};

struct MembershipWitness {
    bool ok = true;
    std::size_t generator_a = 0;  // violating generator (pair for complex)
    std::size_t generator_b = 0;
    double value = 0;             // the offending (scaled) evaluation
};

// Real-cone membership: <l,v> >= -tol*|l|*|v| for every generator.
MembershipWitness real_membership(const ConeSpec& spec, const VectorXd& v,
                                  double tol = kMembershipTol);

// Canonical-complexification membership:
// Re(<l1,w> * conj(<l2,w>)) >= -tol*|l1|*|l2|*|w|^2 over generator pairs.
MembershipWitness complex_membership(const ConeSpec& spec, const VectorXcd& w,
                                     double tol = kMembershipTol);

// Extremal functional ratios <m,y>/<m,x> over the dual generators: the
// section E(x,y) of the complexified cone is the open disk of diameter (a,b).
struct RatioBounds {
    double a = 0, b = 0;
    bool a_zero = false;  // some generator kills y but not x
    bool b_infinite = false;
    bool degenerate = false;  // no generator separates the pair
};
RatioBounds ratio_bounds(const ConeSpec& spec, const VectorXd& x, const VectorXd& y,
                         double tol = kMembershipTol);

// Hilbert projective distance log(b/a); +infinity on boundary pairs.
// Throws domain_error naming the generator if x or y leaves the cone.
double hilbert_distance(const ConeSpec& spec, const VectorXd& x, const VectorXd& y,
                        double tol = kMembershipTol);

// Exact projective distance between x and x+iy from the disk geometry of
// E(x,y):  log((|1+i(b+a)/2| + (b-a)/2) / (|1+i(b+a)/2| - (b-a)/2)).
// Returns +infinity when the Hilbert distance of (x,y) is infinite.
double delta_x_plus_iy(const ConeSpec& spec, const VectorXd& x, const VectorXd& y,
                       double tol = kMembershipTol);

// Phase decomposition w = e^{i theta} (x + i y) with x,y in the real cone,
// found by a deterministic 2048-point grid search over theta.
struct PhaseDecomposition {
    double theta = 0;
    VectorXd real_part;
    VectorXd imag_part;
};
std::optional<PhaseDecomposition> decompose_phase(const ConeSpec& spec, const VectorXcd& w,
                                                  double tol = 1e-9);

// One disk (or half-plane) of a sampled covering of E(w1,w2).
struct DiskFamily {
    struct Disk {
        cplx center;
        double radius;
    };
    std::vector<Disk> disks;
    bool unbounded = false;       // a half-plane member was detected
    double sup_modulus = 0;       // over disks and sampled boundary ratios
    double inf_modulus = std::numeric_limits<double>::infinity();
};
DiskFamily projective_disks(const ConeSpec& spec, const VectorXcd& w1, const VectorXcd& w2,
                            double tol = kMembershipTol);

// Certified lower bound on delta_C(w1,w2): log of the modulus spread of the
// sampled disk family (a subset of E under-covers it).
double delta_lower(const ConeSpec& spec, const VectorXcd& w1, const VectorXcd& w2,
                   double tol = kMembershipTol);

// Upper bound via the triangle route through real representatives; exact
// (equal to the Hilbert distance) when both arguments are real rays.
double delta_upper(const ConeSpec& spec, const VectorXcd& w1, const VectorXcd& w2,
                   double tol = 1e-9);

// Hilbert diameter of M applied to the cone: max pairwise distance of the
// images of the extreme rays. Requires the rays to be enumerated.
double birkhoff_diameter(const ConeSpec& spec, const MatrixXd& M,
                         double tol = kMembershipTol);

struct ContractionReport {
    double diameter = 0;          // Birkhoff diameter of M(C)
    double factor = 0;            // tanh(diameter/4)
    double base_distance = 0;     // h(x,y)
    double image_distance = 0;    // h(Mx,My)
    double bound = 0;             // factor*base + tol
    bool ok = false;
};
ContractionReport contraction_check(const ConeSpec& spec, const MatrixXd& M,
                                    const VectorXd& x, const VectorXd& y,
                                    double tol = 1e-12);

enum class ComparisonStatus { certified, threshold_not_met };

struct ComparisonReport {
    ComparisonStatus status = ComparisonStatus::threshold_not_met;
    double eps = 0;
    double diameter = 0;     // Birkhoff diameter of P(C)
    double threshold = 0;    // 2*eps*(1+cosh(diameter/2)), must be < 1
    double bound = 0;        // 3*log(1/(1-threshold))
    int samples = 0;
    int membership_failures = 0;
    int distance_violations = 0;
    double worst_margin = 0;  // max over samples of delta_lower - bound
    bool ok() const {
        return status == ComparisonStatus::certified && membership_failures == 0 &&
               distance_violations == 0;
    }
};

struct ComparisonOptions {
    int samples = 32;
    std::uint64_t seed = 1;
    double tol = 1e-9;
};

// Dominated-comparison certificate: P positive with finite diameter,
// |<m,Au> - <m,Pu>| <= eps*<m,Pu> on generators x extreme rays. Below the
// threshold 2*eps*(1+cosh(D/2)) < 1 every A-image of the complex cone must
// stay in the cone within projective distance 3*log(1/(1-threshold)) of the
// P-image; the report carries the sampled verification.
ComparisonReport comparison_check(const ConeSpec& spec, const MatrixXd& P,
                                  const Eigen::MatrixXcd& A, double eps,
                                  const ComparisonOptions& opts = {});

// 3*log((1+tau)/(1-tau)) for tau in [0,1).
double tau_comparison_bound(double tau);

}  // namespace conecert::cones

#endif
