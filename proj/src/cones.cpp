#include "conecert/cones.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "conecert/rng.hpp"

namespace conecert::cones {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

ConeSpec ConeSpec::standard_positive(int dim) {
    if (dim < 1) throw domain_error("standard_positive: dimension must be >= 1");
    ConeSpec s;
    s.preset_ = Preset::standard_positive;
    s.dim_ = dim;
    s.gen_count_ = static_cast<std::size_t>(dim);
    s.rays_.reserve(dim);
    for (int i = 0; i < dim; ++i) {
        VectorXd e = VectorXd::Zero(dim);
        e[i] = 1.0;
        s.rays_.push_back(std::move(e));
    }
    return s;
}

ConeSpec ConeSpec::lipschitz_grid(std::vector<double> nodes, double B,
                                  std::function<double(double, double)> metric,
                                  std::size_t pair_stride) {
    const int n = static_cast<int>(nodes.size());
    if (n < 2) throw domain_error("lipschitz_grid: need at least two nodes");
    if (!(B > 0)) throw domain_error("lipschitz_grid: B must be positive");
    if (pair_stride == 0) pair_stride = 1;
    ConeSpec s;
    s.preset_ = Preset::lipschitz_grid;
    s.dim_ = n;
    s.nodes_ = std::move(nodes);
    s.B_ = B;
    std::size_t id = 0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            if (id++ % pair_stride != 0) continue;
            s.pairs_.emplace_back(i, j);
            s.pair_coeff_.push_back(std::exp(B * metric(s.nodes_[i], s.nodes_[j])));
        }
    }
    s.gen_count_ = static_cast<std::size_t>(n) + s.pairs_.size();
    return s;
}

double ConeSpec::apply_generator(std::size_t k, const VectorXd& v) const {
    if (preset_ == Preset::standard_positive) return v[static_cast<int>(k)];
    const std::size_t n = static_cast<std::size_t>(dim_);
    if (k < n) return v[static_cast<int>(k)];
    const auto& [i, j] = pairs_[k - n];
    return pair_coeff_[k - n] * v[j] - v[i];
}

cplx ConeSpec::apply_generator(std::size_t k, const VectorXcd& v) const {
    if (preset_ == Preset::standard_positive) return v[static_cast<int>(k)];
    const std::size_t n = static_cast<std::size_t>(dim_);
    if (k < n) return v[static_cast<int>(k)];
    const auto& [i, j] = pairs_[k - n];
    return pair_coeff_[k - n] * v[j] - v[i];
}

double ConeSpec::generator_norm(std::size_t k) const {
    if (preset_ == Preset::standard_positive) return 1.0;
    const std::size_t n = static_cast<std::size_t>(dim_);
    if (k < n) return 1.0;
    const double c = pair_coeff_[k - n];
    return std::sqrt(c * c + 1.0);
}

std::string ConeSpec::describe_generator(std::size_t k) const {
    std::ostringstream os;
    if (preset_ == Preset::standard_positive) {
        os << "coordinate " << k;
        return os.str();
    }
    const std::size_t n = static_cast<std::size_t>(dim_);
    if (k < n) {
        os << "point evaluation at node " << k;
    } else {
        const auto& [i, j] = pairs_[k - n];
        os << "pair functional (x_" << i << ", x_" << j << ")";
    }
    return os.str();
}

MembershipWitness real_membership(const ConeSpec& spec, const VectorXd& v, double tol) {
    const double vn = v.norm();
    MembershipWitness w;
    double worst = 0;
    for (std::size_t k = 0; k < spec.generator_count(); ++k) {
        const double val = spec.apply_generator(k, v);
        const double slack = tol * spec.generator_norm(k) * vn;
        if (val < -slack && val < worst) {
            worst = val;
            w.ok = false;
            w.generator_a = k;
            w.value = val;
        }
    }
    return w;
}

MembershipWitness complex_membership(const ConeSpec& spec, const VectorXcd& w, double tol) {
    if (w.norm() == 0) throw domain_error("complex_membership: zero vector");
    const double wn2 = w.squaredNorm();
    const std::size_t m = spec.generator_count();
    std::vector<cplx> vals(m);
    for (std::size_t k = 0; k < m; ++k) vals[k] = spec.apply_generator(k, w);
    MembershipWitness out;
    double worst = 0;
    for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t b = a; b < m; ++b) {
            const double re = std::real(vals[a] * std::conj(vals[b]));
            const double slack = tol * spec.generator_norm(a) * spec.generator_norm(b) * wn2;
            if (re < -slack && re < worst) {
                worst = re;
                out.ok = false;
                out.generator_a = a;
                out.generator_b = b;
                out.value = re;
            }
        }
    }
    return out;
}

RatioBounds ratio_bounds(const ConeSpec& spec, const VectorXd& x, const VectorXd& y,
                         double tol) {
    if (x.norm() == 0 || y.norm() == 0)
        throw domain_error("ratio_bounds: zero vector is not a cone ray");
    for (const auto* v : {&x, &y}) {
        const auto w = real_membership(spec, *v, tol);
        if (!w.ok) {
            std::ostringstream os;
            os << "ratio_bounds: vector outside the cone, generator "
               << spec.describe_generator(w.generator_a) << " evaluates to " << w.value;
            throw domain_error(os.str());
        }
    }
    RatioBounds rb;
    rb.degenerate = true;
    const double xn = x.norm(), yn = y.norm();
    double rmin = kInf, rmax = 0;
    for (std::size_t k = 0; k < spec.generator_count(); ++k) {
        const double slack = tol * spec.generator_norm(k);
        const double px = spec.apply_generator(k, x);
        const double py = spec.apply_generator(k, y);
        const bool zx = px <= slack * xn;
        const bool zy = py <= slack * yn;
        if (zx && zy) continue;
        rb.degenerate = false;
        if (zx) {
            rb.b_infinite = true;  // sup of <m,y>/<m,x> blows up
        } else if (zy) {
            rb.a_zero = true;
        } else {
            const double r = py / px;
            rmin = std::min(rmin, r);
            rmax = std::max(rmax, r);
        }
    }
    rb.a = rb.a_zero ? 0.0 : rmin;
    rb.b = rb.b_infinite ? kInf : rmax;
    if (!rb.a_zero && !(rmin < kInf)) rb.degenerate = true;
    return rb;
}

double hilbert_distance(const ConeSpec& spec, const VectorXd& x, const VectorXd& y,
                        double tol) {
    const RatioBounds rb = ratio_bounds(spec, x, y, tol);
    if (rb.degenerate) throw domain_error("hilbert_distance: no generator separates the pair");
    if (rb.a_zero || rb.b_infinite) return kInf;
    return std::log(rb.b / rb.a);
}

double delta_x_plus_iy(const ConeSpec& spec, const VectorXd& x, const VectorXd& y,
                       double tol) {
    const RatioBounds rb = ratio_bounds(spec, x, y, tol);
    if (rb.degenerate) throw domain_error("delta_x_plus_iy: no generator separates the pair");
    if (rb.a_zero || rb.b_infinite) return kInf;
    // E(x, x+iy) = 1 + i*E(x,y): disk of center 1 + i(a+b)/2, radius (b-a)/2.
    const double c = std::hypot(1.0, 0.5 * (rb.a + rb.b));
    const double r = 0.5 * (rb.b - rb.a);
    return std::log((c + r) / (c - r));
}

std::optional<PhaseDecomposition> decompose_phase(const ConeSpec& spec, const VectorXcd& w,
                                                  double tol) {
    const double wn = w.norm();
    if (wn == 0) return std::nullopt;
    constexpr int kGrid = 2048;
    for (int k = 0; k < kGrid; ++k) {
        const double theta = 2.0 * std::numbers::pi * k / kGrid;
        const VectorXcd v = std::exp(cplx(0, -theta)) * w;
        VectorXd re = v.real(), im = v.imag();
        if (re.norm() <= tol * wn) continue;  // need a usable real anchor
        if (!real_membership(spec, re, tol).ok) continue;
        if (im.norm() > tol * wn && !real_membership(spec, im, tol).ok) continue;
        PhaseDecomposition d;
        d.theta = theta;
        d.real_part = std::move(re);
        d.imag_part = std::move(im);
        return d;
    }
    return std::nullopt;
}

DiskFamily projective_disks(const ConeSpec& spec, const VectorXcd& w1, const VectorXcd& w2,
                            double tol) {
    for (const auto* v : {&w1, &w2}) {
        const auto mw = complex_membership(spec, *v, std::max(tol, kMembershipTol));
        if (!mw.ok) {
            std::ostringstream os;
            os << "projective_disks: argument outside the complex cone, generators ("
               << spec.describe_generator(mw.generator_a) << ", "
               << spec.describe_generator(mw.generator_b) << "), value " << mw.value;
            throw domain_error(os.str());
        }
    }
    const std::size_t m = spec.generator_count();
    std::vector<cplx> v1(m), v2(m);
    for (std::size_t k = 0; k < m; ++k) {
        v1[k] = spec.apply_generator(k, w1);
        v2[k] = spec.apply_generator(k, w2);
    }
    const double n1 = w1.norm(), n2 = w2.norm();
    DiskFamily fam;
    bool any = false;
    auto include = [&](double mod) {
        any = true;
        fam.sup_modulus = std::max(fam.sup_modulus, mod);
        fam.inf_modulus = std::min(fam.inf_modulus, mod);
    };
    // Boundary ratios <l,w2>/<l,w1> lie in the closure of E(w1,w2).
    for (std::size_t k = 0; k < m; ++k) {
        const double slack = tol * spec.generator_norm(k) * n1;
        if (std::abs(v1[k]) > slack) include(std::abs(v2[k] / v1[k]));
    }
    // Moebius images of the right half-plane through generator pairs.
    for (std::size_t ka = 0; ka < m; ++ka) {
        const cplx a = v1[ka], b = v2[ka];
        for (std::size_t kb = 0; kb < m; ++kb) {
            if (ka == kb) continue;
            const cplx c = v1[kb], d = v2[kb];
            const double scale =
                spec.generator_norm(ka) * spec.generator_norm(kb) * n1 * n2;
            const cplx det = a * d - b * c;
            if (std::abs(det) <= tol * scale) continue;  // degenerate: point ratio
            const double re_ac = std::real(std::conj(a) * c);
            if (re_ac <= tol * scale * 1e3) {
                // image degenerates to a half-plane: modulus unbounded above
                if (std::abs(det) > 1e3 * tol * scale) fam.unbounded = true;
                continue;
            }
            DiskFamily::Disk disk;
            disk.center = (std::conj(a) * d + std::conj(c) * b) / (2.0 * re_ac);
            disk.radius = std::abs(det) / (2.0 * re_ac);
            fam.disks.push_back(disk);
            any = true;
            fam.sup_modulus = std::max(fam.sup_modulus, std::abs(disk.center) + disk.radius);
            fam.inf_modulus =
                std::min(fam.inf_modulus, std::max(0.0, std::abs(disk.center) - disk.radius));
        }
    }
    if (!any) throw estimate_unavailable("projective_disks: all sampled functionals vanish");
    if (fam.unbounded) fam.sup_modulus = kInf;
    return fam;
}

double delta_lower(const ConeSpec& spec, const VectorXcd& w1, const VectorXcd& w2,
                   double tol) {
    const DiskFamily fam = projective_disks(spec, w1, w2, tol);
    if (fam.sup_modulus == kInf || fam.inf_modulus <= 0.0) return kInf;
    if (fam.sup_modulus <= fam.inf_modulus) return 0.0;  // single ratio point
    return std::log(fam.sup_modulus / fam.inf_modulus);
}

double delta_upper(const ConeSpec& spec, const VectorXcd& w1, const VectorXcd& w2,
                   double tol) {
    const auto d1 = decompose_phase(spec, w1, tol);
    const auto d2 = decompose_phase(spec, w2, tol);
    if (!d1 || !d2)
        throw estimate_unavailable("delta_upper: no phase puts both parts in the real cone");
    double total = 0;
    const double s1 = w1.norm(), s2 = w2.norm();
    // legs delta(x_j, x_j + i y_j), dropped when the imaginary part vanishes
    if (d1->imag_part.norm() > tol * s1) {
        const double leg = delta_x_plus_iy(spec, d1->real_part, d1->imag_part, tol);
        if (leg == kInf) return kInf;
        total += leg;
    }
    if (d2->imag_part.norm() > tol * s2) {
        const double leg = delta_x_plus_iy(spec, d2->real_part, d2->imag_part, tol);
        if (leg == kInf) return kInf;
        total += leg;
    }
    const double mid = hilbert_distance(spec, d1->real_part, d2->real_part, tol);
    return total + mid;  // absorbing infinity
}

double birkhoff_diameter(const ConeSpec& spec, const MatrixXd& M, double tol) {
    const auto& rays = spec.extreme_rays();
    if (rays.empty())
        throw estimate_unavailable("birkhoff_diameter: cone has no enumerated extreme rays");
    std::vector<VectorXd> images;
    images.reserve(rays.size());
    for (std::size_t i = 0; i < rays.size(); ++i) {
        VectorXd im = M * rays[i];
        const auto w = real_membership(spec, im, tol);
        if (!w.ok || im.norm() == 0) {
            std::ostringstream os;
            os << "birkhoff_diameter: cone not preserved, extreme ray " << i
               << " maps outside (generator " << spec.describe_generator(w.generator_a) << ")";
            throw domain_error(os.str());
        }
        images.push_back(std::move(im));
    }
    double diam = 0;
    for (std::size_t i = 0; i < images.size() && diam < kInf; ++i)
        for (std::size_t j = i + 1; j < images.size(); ++j) {
            diam = std::max(diam, hilbert_distance(spec, images[i], images[j], tol));
            if (diam == kInf) break;
        }
    return diam;
}

ContractionReport contraction_check(const ConeSpec& spec, const MatrixXd& M,
                                    const VectorXd& x, const VectorXd& y, double tol) {
    ContractionReport rep;
    rep.diameter = birkhoff_diameter(spec, M);
    if (rep.diameter == kInf)
        throw domain_error("contraction_check: image diameter is infinite");
    rep.factor = std::tanh(rep.diameter / 4.0);
    rep.base_distance = hilbert_distance(spec, x, y);
    rep.image_distance = hilbert_distance(spec, M * x, M * y);
    rep.bound = rep.factor * rep.base_distance + tol;
    rep.ok = rep.image_distance <= rep.bound;
    return rep;
}

namespace {
ComparisonReport run_comparison_samples(const ConeSpec& spec, const MatrixXd& P,
                                        const Eigen::MatrixXcd& A,
                                        const ComparisonOptions& opts, ComparisonReport rep) {
    const auto& rays = spec.extreme_rays();
    const int dim = spec.dimension();
    rng::Stream stream(rng::derive_key(opts.seed, 0xC0DEull), 0);
    rep.samples = opts.samples;
    for (int s = 0; s < opts.samples; ++s) {
        VectorXd u = VectorXd::Zero(dim), v = VectorXd::Zero(dim);
        for (const auto& r : rays) {
            u += stream.uniform() * r;
            v += stream.uniform() * r;
        }
        const double phase = stream.uniform(0.0, 2.0 * std::numbers::pi);
        VectorXcd w = std::exp(cplx(0, phase)) * (u.cast<cplx>() + cplx(0, 1) * v.cast<cplx>());
        if (w.norm() == 0) continue;
        const VectorXcd aw = A * w;
        const VectorXcd pw = P * w;
        if (!complex_membership(spec, aw, std::max(opts.tol, kMembershipTol)).ok) {
            ++rep.membership_failures;
            continue;
        }
        const double dl = delta_lower(spec, aw, pw);
        rep.worst_margin = std::max(rep.worst_margin, dl - rep.bound);
        if (dl > rep.bound + opts.tol) ++rep.distance_violations;
    }
    return rep;
}
}  // namespace

ComparisonReport comparison_check(const ConeSpec& spec, const MatrixXd& P,
                                  const Eigen::MatrixXcd& A, double eps,
                                  const ComparisonOptions& opts) {
    if (eps < 0) throw domain_error("comparison_check: eps must be nonnegative");
    ComparisonReport rep;
    rep.eps = eps;
    rep.diameter = birkhoff_diameter(spec, P);
    if (rep.diameter == kInf)
        throw domain_error("comparison_check: P image has infinite diameter");
    // Domination |<m,Au> - <m,Pu>| <= eps*<m,Pu> on generators x extreme rays;
    // convex-combination stability extends it to the whole cone.
    const auto& rays = spec.extreme_rays();
    for (std::size_t k = 0; k < spec.generator_count(); ++k) {
        for (std::size_t j = 0; j < rays.size(); ++j) {
            const VectorXd pu = P * rays[j];
            const VectorXcd au = A * rays[j].cast<cplx>();
            const double mp = spec.apply_generator(k, pu);
            const cplx ma = spec.apply_generator(k, au);
            const double slack = 1e-12 * spec.generator_norm(k) * (pu.norm() + au.norm());
            if (std::abs(ma - mp) > eps * mp + slack) {
                std::ostringstream os;
                os << "comparison_check: domination violated at (" << spec.describe_generator(k)
                   << ", ray " << j << "): |<m,Au>-<m,Pu>| = " << std::abs(ma - mp)
                   << " > eps*<m,Pu> = " << eps * mp;
                throw domain_error(os.str());
            }
        }
    }
    rep.threshold = 2.0 * eps * (1.0 + std::cosh(rep.diameter / 2.0));
    if (!(rep.threshold < 1.0)) {
        rep.status = ComparisonStatus::threshold_not_met;
        return rep;  // no claim either way
    }
    rep.status = ComparisonStatus::certified;
    rep.bound = 3.0 * std::log(1.0 / (1.0 - rep.threshold));
    return run_comparison_samples(spec, P, A, opts, rep);
}

double tau_comparison_bound(double tau) {
    if (!(tau >= 0.0 && tau < 1.0))
        throw domain_error("tau_comparison_bound: tau must lie in [0,1)");
    return 3.0 * std::log((1.0 + tau) / (1.0 - tau));
}

}  // namespace conecert::cones
