#ifndef CONECERT_TRANSFER_HPP
#define CONECERT_TRANSFER_HPP

#include <complex>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "conecert/dynamics.hpp"
#include "conecert/errors.hpp"

namespace conecert::transfer {

using cplx = std::complex<double>;
using Eigen::VectorXcd;
using Eigen::VectorXd;

// Uniform collocation grid on [0,1] with piecewise-linear (hat) weights.
// The weights are nonnegative and sum to one, so positivity survives
// discretization and the discrete operator maps the discrete cone into
// itself.
struct GridScheme {
    int node_count = 0;
    VectorXd nodes;

    static GridScheme uniform(int n);
    double spacing() const { return nodes[1] - nodes[0]; }
    // Hat weights of y: contributes w0 at cell k and 1-w0 at k+1.
    void locate(double y, int& k, double& w0) const;
    VectorXd lebesgue_weights() const;  // trapezoid quadrature weights
};

// Sparse collocation matrix of the weighted pullback at parameter z:
// entry (i,k) = sum_j exp(g(s_j x_i) + z f(s_j x_i)) w_k(s_j x_i).
class TransferMatrix {
public:
    TransferMatrix() = default;
    TransferMatrix(cplx z, Eigen::SparseMatrix<cplx, Eigen::RowMajor> m)
        : z_(z), m_(std::move(m)) {}

    cplx z() const { return z_; }
    int size() const { return static_cast<int>(m_.rows()); }
    VectorXcd apply(const VectorXcd& u) const { return m_ * u; }
    VectorXcd apply_adjoint(const VectorXcd& nu) const { return m_.transpose() * nu; }
    cplx entry(int i, int k) const { return m_.coeff(i, k); }
    const Eigen::SparseMatrix<cplx, Eigen::RowMajor>& matrix() const { return m_; }

private:
    cplx z_{0, 0};
    Eigen::SparseMatrix<cplx, Eigen::RowMajor> m_;
};

TransferMatrix assemble(const dynamics::MapSpec& map, const dynamics::ObservableSpec& f,
                        cplx z, const GridScheme& grid);

// Leading eigen-triple of a transfer matrix: M h = lambda h, M' nu = lambda nu,
// normalized <nu,1> = 1 and <nu,h> = 1.
struct SpectralData {
    cplx lambda{0, 0};
    VectorXcd h;
    VectorXcd nu;
    double residual = 0;
    int iterations = 0;
    bool certified = true;  // |z| within the certified perturbation disk
};

SpectralData leading_triple(const TransferMatrix& M, const GridScheme& grid, double tol,
                            int max_iter, const VectorXcd* h_warm = nullptr);

struct PressureTable {
    std::vector<cplx> z;
    std::vector<cplx> P;
    std::vector<double> phi_abs;  // |phi_n(z)| on the same grid
    int phi_order = 0;
    double sigma2 = 0;
    double p3 = 0;
};

struct GreenKuboResult {
    std::optional<double> value;  // empty when correlations fail to decay
    double e_f2 = 0;              // plain second moment under the Gibbs weights
    std::vector<double> correlations;
    double tail_estimate = 0;
    bool decaying = true;
    std::string warning;
};

struct P3Report {
    double value = 0;
    double bound = 0;  // 36 F / delta0^2
    bool within_bound = true;
};

struct EpsilonZReport {
    cplx z;
    double epsilon_bound = 0;  // e^{|Re z| F} |z| (F + L)
    double max_deviation = 0;
    int samples = 0;
    int violations = 0;
    int cone_violations = 0;  // nonpositive denominators <l, L u>
    bool ok() const { return violations == 0 && cone_violations == 0; }
};

struct ConeDiameterReport {
    double max_distance = 0;
    double bound = 0;  // D_R
    int samples = 0;
    int violations = 0;
    int membership_flags = 0;  // images failing the discrete cone inequalities
    bool ok() const { return violations == 0 && membership_flags == 0; }
};

struct OperatorOptions {
    double tol = 1e-12;
    int max_iter = 10000;
    bool auto_center = true;
    // Finite-difference steps stay above fd_floor/(F+L) so eigenvalue noise
    // does not dominate; below that the certified radius would force steps
    // of order 1e-10 for stiff cones.
    double fd_floor = 0.005;
};

struct AssemblyPlan;  // per (node, branch) collocation data

// Discretized perturbed transfer operator bound to one map, observable and
// grid. Caches the unperturbed spectral triple, Gibbs weights and constants.
class TransferOperator {
public:
    TransferOperator(dynamics::MapSpec map, dynamics::ObservableSpec f, GridScheme grid,
                     OperatorOptions opts = {});

    const dynamics::MapSpec& map() const { return map_; }
    const dynamics::ObservableSpec& observable() const { return f_; }
    const GridScheme& grid() const { return grid_; }
    const OperatorOptions& options() const { return opts_; }

    TransferMatrix matrix(cplx z) const;
    const TransferMatrix& matrix0() const { return m0_; }

    const SpectralData& spectrum0() const { return spec0_; }
    double lambda0() const { return spec0_.lambda.real(); }
    const VectorXd& gibbs() const { return gibbs_; }
    double observable_mean() const { return mean_; }  // mean before centering

    double B() const { return B_; }
    double D_R() const { return D_R_; }
    double delta0() const { return delta0_; }

    // Fresh leading triple at z (certified flag set from |z| vs delta0).
    SpectralData leading(cplx z) const;

    // Pressure log(lambda(z)/lambda(0)) tracked continuously along the ray
    // from 0, starting from P(0) = 0.
    cplx pressure(cplx z) const;

    // Variance of the normalized Birkhoff sums, three routes:
    double sigma2_spectral() const;        // Richardson differences of P on iR
    GreenKuboResult sigma2_green_kubo(int k_max) const;
    P3Report p3() const;                   // third derivative of P at 0

    // phi_n(z) = <nu0, (L(z)/lambda(z))^n h0>.
    cplx phi_n(cplx z, int n) const;
    // E[exp(i t S_n/(sigma sqrt n))] = <nu0, (L(it/(sigma sqrt n))/lambda0)^n h0>.
    cplx char_fn(int n, double t, double sigma) const;
    cplx moment_generating(cplx z, int n) const;  // E[exp(z S_n)]

    // Ratio deviation |<l_xy, L(z)u>/<l_xy, L u> - 1| over sampled cone
    // elements and node pairs, against the closed-form epsilon(z).
    EpsilonZReport epsilon_z_check(cplx z, int u_samples, int pairs_per_u,
                                   std::uint64_t seed, double abs_tol = 1e-6,
                                   double rel_tol = 1e-4) const;

    // Hilbert-diameter check of the image of the discrete Lipschitz cone.
    ConeDiameterReport cone_diameter_check(int pair_samples, std::uint64_t seed,
                                           double abs_tol = 1e-6,
                                           double rel_tol = 1e-4) const;

    // Random element of the discrete Lipschitz cone (log-slope below B).
    VectorXd sample_cone_vector(std::uint64_t seed, std::uint64_t index) const;

    double centering_tolerance() const { return 1e-8 * std::max(1.0, f_.sup_norm); }

private:
    cplx lambda_at(cplx z) const;  // cached scalar eigenvalues

    dynamics::MapSpec map_;
    dynamics::ObservableSpec f_;
    GridScheme grid_;
    OperatorOptions opts_;
    std::shared_ptr<const AssemblyPlan> plan_;
    TransferMatrix m0_;
    SpectralData spec0_;
    VectorXd gibbs_;
    double mean_ = 0;
    double B_ = 0, D_R_ = 0, delta0_ = 0;
    mutable std::mutex cache_mutex_;
    mutable std::map<std::pair<double, double>, cplx> lambda_cache_;
};

}  // namespace conecert::transfer

#endif
