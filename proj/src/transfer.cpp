#include "conecert/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "conecert/certify.hpp"
#include "conecert/cones.hpp"
#include "conecert/rng.hpp"

namespace conecert::transfer {

namespace {

constexpr double kPi = std::numbers::pi;

cplx bilinear(const VectorXcd& a, const VectorXcd& b) {
    return (a.array() * b.array()).sum();
}

double sup_norm(const VectorXcd& v) { return v.cwiseAbs().maxCoeff(); }

}  // namespace

GridScheme GridScheme::uniform(int n) {
    if (n < 2) throw domain_error("GridScheme: need at least two nodes");
    GridScheme g;
    g.node_count = n;
    g.nodes = VectorXd::LinSpaced(n, 0.0, 1.0);
    return g;
}

void GridScheme::locate(double y, int& k, double& w0) const {
    const double h = spacing();
    k = std::clamp(static_cast<int>(y / h), 0, node_count - 2);
    const double t = std::clamp((y - nodes[k]) / h, 0.0, 1.0);
    w0 = 1.0 - t;
}

VectorXd GridScheme::lebesgue_weights() const {
    const double h = spacing();
    VectorXd w = VectorXd::Constant(node_count, h);
    w[0] = 0.5 * h;
    w[node_count - 1] = 0.5 * h;
    return w;
}

// Per (node, branch) assembly data: branch image cell, hat weight, weight
// exponent g(s_j x_i) and observable value f(s_j x_i).
struct AssemblyPlan {
    int rows = 0;
    int branches = 0;
    std::vector<int> cell;
    std::vector<double> w0;
    std::vector<double> g;
    std::vector<double> fv;
};

namespace {

std::shared_ptr<AssemblyPlan> build_plan(const dynamics::MapSpec& map,
                                         const dynamics::ObservableSpec& f,
                                         const GridScheme& grid) {
    auto plan = std::make_shared<AssemblyPlan>();
    plan->rows = grid.node_count;
    plan->branches = static_cast<int>(map.branches.size());
    const std::size_t total = static_cast<std::size_t>(plan->rows) * plan->branches;
    plan->cell.resize(total);
    plan->w0.resize(total);
    plan->g.resize(total);
    plan->fv.resize(total);
    for (int i = 0; i < plan->rows; ++i) {
        const double x = grid.nodes[i];
        for (int j = 0; j < plan->branches; ++j) {
            const auto& b = map.branches[j];
            double y = b.inverse(x);
            if (y < -1e-12 || y > 1.0 + 1e-12) {
                std::ostringstream os;
                os << "assemble: branch " << j << " maps node " << x << " to " << y
                   << ", outside [0,1]";
                throw domain_error(os.str());
            }
            y = std::clamp(y, 0.0, 1.0);
            const std::size_t idx = static_cast<std::size_t>(i) * plan->branches + j;
            grid.locate(y, plan->cell[idx], plan->w0[idx]);
            plan->g[idx] = b.log_weight(x);
            plan->fv[idx] = f(y);
        }
    }
    return plan;
}

TransferMatrix assemble_from_plan(const AssemblyPlan& plan, cplx z,
                                  int node_count) {
    std::vector<Eigen::Triplet<cplx>> trips;
    trips.reserve(plan.cell.size() * 2);
    const bool z_zero = z == cplx(0, 0);
    for (int i = 0; i < plan.rows; ++i) {
        for (int j = 0; j < plan.branches; ++j) {
            const std::size_t idx = static_cast<std::size_t>(i) * plan.branches + j;
            const cplx w = z_zero ? cplx(std::exp(plan.g[idx]), 0.0)
                                  : std::exp(cplx(plan.g[idx], 0.0) + z * plan.fv[idx]);
            const double w0 = plan.w0[idx];
            const int k = plan.cell[idx];
            if (w0 > 0.0) trips.emplace_back(i, k, w * w0);
            if (w0 < 1.0) trips.emplace_back(i, k + 1, w * (1.0 - w0));
        }
    }
    Eigen::SparseMatrix<cplx, Eigen::RowMajor> m(node_count, node_count);
    m.setFromTriplets(trips.begin(), trips.end());
    return TransferMatrix(z, std::move(m));
}

}  // namespace

TransferMatrix assemble(const dynamics::MapSpec& map, const dynamics::ObservableSpec& f,
                        cplx z, const GridScheme& grid) {
    const auto plan = build_plan(map, f, grid);
    return assemble_from_plan(*plan, z, grid.node_count);
}

namespace {

struct PowerResult {
    cplx lambda;
    VectorXcd h;
    double residual;
    int iterations;
};

// Power iteration normalized against the quadrature weights; the cone
// contraction of the unperturbed operator makes the leading eigenvalue
// simple, so plain iteration converges geometrically.
PowerResult power_eigen(const TransferMatrix& M, const VectorXcd& weights, double tol,
                        int max_iter, const VectorXcd* warm) {
    const int n = M.size();
    VectorXcd h = warm && warm->size() == n ? *warm : VectorXcd::Ones(n);
    cplx denom = bilinear(weights, h);
    if (std::abs(denom) < 1e-300) h = VectorXcd::Ones(n), denom = bilinear(weights, h);
    h /= denom;
    PowerResult out{cplx(0, 0), h, std::numeric_limits<double>::infinity(), 0};
    for (int it = 1; it <= max_iter; ++it) {
        const VectorXcd v = M.apply(h);
        const cplx lambda = bilinear(weights, v);  // <w,h> = 1
        if (std::abs(lambda) < 1e-300)
            throw convergence_error("power iteration: eigenvalue estimate collapsed", 1.0, it);
        const double resid = sup_norm(v - lambda * h) / std::max(sup_norm(h), 1e-300);
        out.lambda = lambda;
        out.h = v / lambda;  // keeps <w,h> = 1
        out.residual = resid;
        out.iterations = it;
        if (resid <= tol) return out;
        h = out.h;
    }
    throw convergence_error("power iteration did not reach tolerance", out.residual,
                            out.iterations);
}

}  // namespace

SpectralData leading_triple(const TransferMatrix& M, const GridScheme& grid, double tol,
                            int max_iter, const VectorXcd* h_warm) {
    const VectorXcd w = grid.lebesgue_weights().cast<cplx>();
    const PowerResult pr = power_eigen(M, w, tol, max_iter, h_warm);

    SpectralData out;
    out.lambda = pr.lambda;
    out.h = pr.h;
    out.iterations = pr.iterations;

    // Adjoint iteration for the left eigenvector, normalized <nu,1> = 1.
    VectorXcd nu = grid.lebesgue_weights().cast<cplx>();
    double resid_nu = std::numeric_limits<double>::infinity();
    for (int it = 1; it <= max_iter; ++it) {
        const VectorXcd v = M.apply_adjoint(nu);
        const cplx s = v.sum();
        if (std::abs(s) < 1e-300)
            throw convergence_error("adjoint iteration: normalization collapsed", 1.0, it);
        const VectorXcd next = v / s;
        resid_nu = sup_norm(M.apply_adjoint(next) - pr.lambda * next) /
                   std::max(sup_norm(next), 1e-300);
        nu = next;
        out.iterations = pr.iterations + it;
        if (resid_nu <= tol) break;
    }
    if (resid_nu > tol)
        throw convergence_error("adjoint iteration did not reach tolerance", resid_nu,
                                out.iterations);

    const cplx pairing = bilinear(nu, out.h);
    if (std::abs(pairing) < 1e-300)
        throw convergence_error("leading triple: <nu,h> degenerate", resid_nu, out.iterations);
    out.h /= pairing;  // now <nu,h> = 1 alongside <nu,1> = 1
    out.nu = nu;
    out.residual = std::max(pr.residual, resid_nu);
    return out;
}

TransferOperator::TransferOperator(dynamics::MapSpec map, dynamics::ObservableSpec f,
                                   GridScheme grid, OperatorOptions opts)
    : map_(std::move(map)), f_(std::move(f)), grid_(std::move(grid)), opts_(opts) {
    auto plan = build_plan(map_, f_, grid_);
    m0_ = assemble_from_plan(*plan, cplx(0, 0), grid_.node_count);
    spec0_ = leading_triple(m0_, grid_, opts_.tol, opts_.max_iter);
    if (std::abs(spec0_.lambda.imag()) > 1e-10 * std::abs(spec0_.lambda))
        throw convergence_error("unperturbed eigenvalue came out non-real",
                                spec0_.residual, spec0_.iterations);

    gibbs_ = (spec0_.nu.array() * spec0_.h.array()).real();
    mean_ = 0.0;
    for (int i = 0; i < grid_.node_count; ++i) mean_ += gibbs_[i] * f_(grid_.nodes[i]);
    if (opts_.auto_center && std::abs(mean_) > centering_tolerance()) {
        f_ = f_.centered_copy(mean_);
        for (double& v : plan->fv) v -= mean_;
    }
    plan_ = std::move(plan);

    B_ = certify::constant_B(map_.gamma, map_.G);
    D_R_ = certify::constant_DR(map_.gamma, map_.G);
    // the zero observable perturbs nothing: its certified disk is the plane
    const double total = f_.sup_norm + f_.lip_seminorm;
    delta0_ = total > 0 ? certify::delta0(D_R_, f_.sup_norm, f_.lip_seminorm)
                        : std::numeric_limits<double>::infinity();
}

TransferMatrix TransferOperator::matrix(cplx z) const {
    return assemble_from_plan(*plan_, z, grid_.node_count);
}

SpectralData TransferOperator::leading(cplx z) const {
    if (z == cplx(0, 0)) return spec0_;
    SpectralData out = leading_triple(matrix(z), grid_, opts_.tol, opts_.max_iter);
    out.certified = std::abs(z) <= delta0_ * (1.0 + 1e-12);
    return out;
}

cplx TransferOperator::lambda_at(cplx z) const {
    if (z == cplx(0, 0)) return spec0_.lambda;
    {
        std::lock_guard<std::mutex> g(cache_mutex_);
        const auto it = lambda_cache_.find({z.real(), z.imag()});
        if (it != lambda_cache_.end()) return it->second;
    }
    const cplx lam = leading(z).lambda;
    std::lock_guard<std::mutex> g(cache_mutex_);
    lambda_cache_[{z.real(), z.imag()}] = lam;
    return lam;
}

cplx TransferOperator::pressure(cplx z) const {
    if (z == cplx(0, 0)) return cplx(0, 0);
    const VectorXcd w = grid_.lebesgue_weights().cast<cplx>();
    const double lambda0 = spec0_.lambda.real();
    for (int segments = 16; segments <= 512; segments *= 2) {
        double theta = 0.0;
        cplx prev = spec0_.lambda;
        VectorXcd warm = spec0_.h;
        cplx lam_end;
        bool jump = false;
        for (int k = 1; k <= segments; ++k) {
            const cplx zk = z * (static_cast<double>(k) / segments);
            const PowerResult pr =
                power_eigen(matrix(zk), w, opts_.tol, opts_.max_iter, &warm);
            const double dtheta = std::arg(pr.lambda / prev);
            if (std::abs(dtheta) > kPi / 2.0) {
                jump = true;  // too coarse to track the branch; refine the ray
                break;
            }
            theta += dtheta;
            warm = pr.h;
            prev = pr.lambda;
            lam_end = pr.lambda;
        }
        if (!jump) return cplx(std::log(std::abs(lam_end) / lambda0), theta);
    }
    throw estimate_unavailable("pressure: branch tracking stayed ambiguous after refinement");
}

namespace {
double require_centered(const TransferOperator& op) {
    double mean = 0.0;
    for (int i = 0; i < op.grid().node_count; ++i)
        mean += op.gibbs()[i] * op.observable()(op.grid().nodes[i]);
    if (std::abs(mean) > op.centering_tolerance()) {
        std::ostringstream os;
        os << "observable is not centered: measured mean " << mean;
        throw domain_error(os.str());
    }
    return mean;
}
}  // namespace

double TransferOperator::sigma2_spectral() const {
    require_centered(*this);
    const double total = f_.sup_norm + f_.lip_seminorm;
    const double h = total > 0 ? std::max(delta0_ / 8.0, opts_.fd_floor / total) : 0.125;
    const auto estimate = [&](double step) {
        return -2.0 * pressure(cplx(0, step)).real() / (step * step);
    };
    const double e1 = estimate(h);
    const double e2 = estimate(h / 2.0);
    return (4.0 * e2 - e1) / 3.0;
}

GreenKuboResult TransferOperator::sigma2_green_kubo(int k_max) const {
    require_centered(*this);
    if (k_max < 0) throw domain_error("sigma2_green_kubo: k_max must be >= 0");
    GreenKuboResult out;
    VectorXd fn(grid_.node_count);
    for (int i = 0; i < grid_.node_count; ++i) fn[i] = f_(grid_.nodes[i]);
    out.e_f2 = (gibbs_.array() * fn.array() * fn.array()).sum();
    out.correlations.assign(k_max + 1, 0.0);
    out.correlations[0] = out.e_f2;

    const double lambda0 = spec0_.lambda.real();
    VectorXcd u = (fn.array() * spec0_.h.real().array()).matrix().cast<cplx>();
    double acc = 0.0;
    for (int k = 1; k <= k_max; ++k) {
        u = m0_.apply(u) / lambda0;
        const double ck =
            (spec0_.nu.real().array() * fn.array() * u.real().array()).sum();
        out.correlations[k] = ck;
        acc += ck;
    }
    const double value = out.e_f2 + 2.0 * acc;

    const double floor = 1e-9 * (std::abs(out.e_f2) + 1.0);
    if (k_max >= 8) {
        auto window_max = [&](int lo, int hi) {
            double m = 0;
            for (int k = lo; k <= hi; ++k) m = std::max(m, std::abs(out.correlations[k]));
            return m;
        };
        const int q = std::max(1, k_max / 4);
        const double recent = window_max(k_max - q + 1, k_max);
        const double earlier = window_max(std::max(1, k_max - 2 * q + 1), k_max - q);
        if (recent <= floor) {
            out.tail_estimate = 4.0 * floor;
        } else if (earlier > floor && recent < earlier) {
            const double rho = std::min(recent / earlier, 0.96);
            out.tail_estimate = 2.0 * recent * rho / (1.0 - rho);
        } else {
            out.decaying = false;
            out.warning = "correlation estimates do not decay; no variance value";
            return out;
        }
    } else {
        out.tail_estimate = 0.0;  // truncation value by definition
    }
    out.value = value;
    return out;
}

P3Report TransferOperator::p3() const {
    require_centered(*this);
    const double total = f_.sup_norm + f_.lip_seminorm;
    const double h = total > 0 ? std::max(delta0_ / 8.0, opts_.fd_floor / total) : 0.125;
    const auto g = [&](double t) { return pressure(cplx(0, t)).imag(); };
    const double a1 = g(h) / (h * h * h);
    const double a2 = g(2.0 * h) / (8.0 * h * h * h);
    const double a = (4.0 * a1 - a2) / 3.0;
    P3Report rep;
    rep.value = -6.0 * a;
    rep.bound = 36.0 * f_.sup_norm / (delta0_ * delta0_);
    rep.within_bound = std::abs(rep.value) <= rep.bound * (1.0 + 1e-4) + 1e-6;
    return rep;
}

namespace {
// Scaled repeated application v <- M v / divisor with overflow bookkeeping.
struct ScaledPower {
    VectorXcd v;
    double log_scale = 0.0;
    void step(const TransferMatrix& M, cplx divisor) {
        v = M.apply(v) / divisor;
        const double m = v.cwiseAbs().maxCoeff();
        if (m > 1e100 || (m > 0 && m < 1e-100)) {
            v /= m;
            log_scale += std::log(m);
        }
        if (std::abs(log_scale) > 700.0)
            throw convergence_error(
                "iterated operator product overflowed scaling; z outside evaluable region",
                log_scale, 0);
    }
};
}  // namespace

cplx TransferOperator::phi_n(cplx z, int n) const {
    if (n < 0) throw domain_error("phi_n: n must be >= 0");
    const cplx lambda_z = lambda_at(z);
    const TransferMatrix Mz = matrix(z);
    ScaledPower sp{spec0_.h, 0.0};
    for (int k = 0; k < n; ++k) sp.step(Mz, lambda_z);
    return bilinear(spec0_.nu, sp.v) * std::exp(sp.log_scale);
}

cplx TransferOperator::moment_generating(cplx z, int n) const {
    if (n < 0) throw domain_error("moment_generating: n must be >= 0");
    const TransferMatrix Mz = matrix(z);
    ScaledPower sp{spec0_.h, 0.0};
    const cplx lam0(spec0_.lambda.real(), 0.0);
    for (int k = 0; k < n; ++k) sp.step(Mz, lam0);
    return bilinear(spec0_.nu, sp.v) * std::exp(sp.log_scale);
}

cplx TransferOperator::char_fn(int n, double t, double sigma) const {
    if (!(sigma > 0)) throw domain_error("char_fn: sigma must be positive");
    if (n < 1) throw domain_error("char_fn: n must be >= 1");
    const cplx z(0.0, t / (sigma * std::sqrt(static_cast<double>(n))));
    return moment_generating(z, n);
}

VectorXd TransferOperator::sample_cone_vector(std::uint64_t seed, std::uint64_t index) const {
    rng::Stream s(rng::derive_key(seed, 0xC09Eull, index), 0);
    const int n = grid_.node_count;
    VectorXd logu(n);
    logu[0] = 0.0;
    double wmax = 0.0;
    for (int i = 0; i + 1 < n; ++i) {
        const double h = grid_.nodes[i + 1] - grid_.nodes[i];
        const double mu = std::min(map_.metric.density(grid_.nodes[i]),
                                   map_.metric.density(grid_.nodes[i + 1]));
        logu[i + 1] = logu[i] + B_ * h * mu * s.uniform(-0.95, 0.95);
        wmax = std::max(wmax, logu[i + 1]);
    }
    return (logu.array() - wmax).exp();
}

EpsilonZReport TransferOperator::epsilon_z_check(cplx z, int u_samples, int pairs_per_u,
                                                 std::uint64_t seed, double abs_tol,
                                                 double rel_tol) const {
    EpsilonZReport rep;
    rep.z = z;
    rep.epsilon_bound = std::exp(std::abs(z.real()) * f_.sup_norm) * std::abs(z) *
                        (f_.sup_norm + f_.lip_seminorm);
    const TransferMatrix Mz = matrix(z);
    const double slack = abs_tol + rel_tol * rep.epsilon_bound;
    const int n = grid_.node_count;
    for (int su = 0; su < u_samples; ++su) {
        const VectorXd u = su == 0 ? VectorXd(spec0_.h.real()) : sample_cone_vector(seed, su);
        const VectorXd v0 = m0_.apply(u.cast<cplx>()).real();
        const VectorXcd vz = Mz.apply(u.cast<cplx>());
        rng::Stream ps(rng::derive_key(seed, 0xFA17ull, su), 0);
        for (int p = 0; p < pairs_per_u; ++p) {
            const int i = static_cast<int>(ps.uniform() * n) % n;
            int j = static_cast<int>(ps.uniform() * (n - 1)) % (n - 1);
            if (j >= i) ++j;
            const double coeff = std::exp(B_ * map_.metric(grid_.nodes[i], grid_.nodes[j]));
            const double den = coeff * v0[j] - v0[i];
            ++rep.samples;
            if (den <= 0.0) {
                ++rep.cone_violations;  // contradicts the positivity of <l, L u>
                continue;
            }
            const cplx num = coeff * vz[j] - vz[i];
            const double dev = std::abs(num / den - 1.0);
            rep.max_deviation = std::max(rep.max_deviation, dev);
            if (dev > rep.epsilon_bound + slack) ++rep.violations;
        }
    }
    return rep;
}

ConeDiameterReport TransferOperator::cone_diameter_check(int pair_samples, std::uint64_t seed,
                                                         double abs_tol, double rel_tol) const {
    ConeDiameterReport rep;
    rep.bound = D_R_;
    const double slack = abs_tol + rel_tol * D_R_;
    const std::size_t n = static_cast<std::size_t>(grid_.node_count);
    const std::size_t all_pairs = n * (n - 1);
    const std::size_t stride = std::max<std::size_t>(1, all_pairs / 20000);
    std::vector<double> nodes(grid_.nodes.data(), grid_.nodes.data() + grid_.node_count);
    const auto metric = map_.metric;
    const auto spec = cones::ConeSpec::lipschitz_grid(
        nodes, B_, [metric](double a, double b) { return metric(a, b); }, stride);
    for (int sp = 0; sp < pair_samples; ++sp) {
        const VectorXd u =
            sp == 0 ? VectorXd(spec0_.h.real()) : sample_cone_vector(seed, 2 * sp);
        const VectorXd v = sample_cone_vector(seed, 2 * sp + 1);
        const VectorXd lu = m0_.apply(u.cast<cplx>()).real();
        const VectorXd lv = m0_.apply(v.cast<cplx>()).real();
        ++rep.samples;
        double dist;
        try {
            dist = cones::hilbert_distance(spec, lu, lv, 1e-6);
        } catch (const domain_error&) {
            ++rep.membership_flags;  // image failed the discrete cone inequalities
            continue;
        }
        rep.max_distance = std::max(rep.max_distance, dist);
        if (!(dist <= rep.bound + slack)) ++rep.violations;
    }
    return rep;
}

}  // namespace conecert::transfer
