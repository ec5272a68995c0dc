#include "conecert/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <sstream>

namespace conecert::dynamics {

namespace {
constexpr double kEndpointSnap = 1e-14;
constexpr double kEndpointJitter = 1e-12;
}  // namespace

double Metric::operator()(double x, double y) const {
    if (kind == Kind::euclidean) return std::abs(x - y);
    return gauss_metric_distance(alpha, x, y);
}

double Metric::density(double s) const {
    if (kind == Kind::euclidean) return 1.0;
    return 1.0 - alpha - alpha * s;
}

std::string Metric::describe() const {
    if (kind == Kind::euclidean) return "euclidean";
    std::ostringstream os;
    os << "gauss_alpha(" << alpha << ")";
    return os.str();
}

double gauss_metric_distance(double alpha, double x, double y) {
    if (!(alpha > 0.0 && alpha < 0.5))
        throw domain_error("gauss_metric_distance: alpha must lie in (0, 1/2)");
    if (x < 0.0 || x > 1.0 || y < 0.0 || y > 1.0)
        throw domain_error("gauss_metric_distance: points must lie in [0,1]");
    return std::abs(x - y) * (1.0 - alpha - alpha * (x + y) / 2.0);
}

MapSpec doubling_map() {
    MapSpec m;
    m.name = "doubling";
    m.gamma = 2.0;
    m.G = 0.0;
    m.metric = Metric{Metric::Kind::euclidean, 0.0};
    m.binary_shift_orbits = true;
    const double logw = -std::log(2.0);
    m.branches.push_back(Branch{
        [](double x) { return 0.5 * x; },
        [logw](double) { return logw; },
        0.0, 0.5,
        [](double x) { return 2.0 * x; },
    });
    m.branches.push_back(Branch{
        [](double x) { return 0.5 * (x + 1.0); },
        [logw](double) { return logw; },
        0.5, 1.0,
        [](double x) { return 2.0 * x - 1.0; },
    });
    return m;
}

MapSpec gauss_map(double alpha, int j_max) {
    if (!(alpha > 0.0 && alpha < 0.5))
        throw domain_error("gauss_map: alpha must lie in (0, 1/2)");
    if (j_max < 1) throw domain_error("gauss_map: j_max must be >= 1");
    MapSpec m;
    std::ostringstream os;
    os << "gauss(alpha=" << alpha << ",J=" << j_max << ")";
    m.name = os.str();
    m.gamma = 1.0 / (1.0 - 1.25 * alpha);
    m.G = 2.0 / (1.0 - 2.0 * alpha);
    m.metric = Metric{Metric::Kind::gauss_alpha, alpha};
    m.tail_bound = gauss_tail_bound(j_max);

    auto gauss_forward = [](double x) {
        if (x <= 1e-300) return 0.0;  // fixed point at the origin
        const double inv = 1.0 / x;
        return inv - std::floor(inv);
    };
    for (int j = 1; j <= j_max; ++j) {
        m.branches.push_back(Branch{
            [j](double x) { return 1.0 / (j + x); },
            [j](double x) { return -2.0 * std::log(j + x); },
            1.0 / (j + 1.0), j == 1 ? 1.0 : 1.0 / j,
            gauss_forward,
        });
    }
    // Lumped tail branch: exact remaining weight at the (j_max+1)-st branch
    // point. Weight sums then equal the untruncated ones.
    const int jt = j_max + 1;
    m.branches.push_back(Branch{
        [jt](double x) { return 1.0 / (jt + x); },
        [jt](double x) { return std::log(trigamma(jt + x)); },
        0.0, 1.0 / jt,
        gauss_forward,
    });
    return m;
}

double piecewise_linear(const std::vector<double>& xs, const std::vector<double>& ys,
                        double x) {
    const auto it = std::upper_bound(xs.begin(), xs.end(), x);
    std::size_t k = it == xs.begin() ? 0 : static_cast<std::size_t>(it - xs.begin()) - 1;
    k = std::min(k, xs.size() - 2);
    const double t = std::clamp((x - xs[k]) / (xs[k + 1] - xs[k]), 0.0, 1.0);
    return ys[k] + t * (ys[k + 1] - ys[k]);
}

Branch table_branch(double domain_lo, double domain_hi, std::vector<double> xs,
                    std::vector<double> sigma_vals, std::vector<double> log_weight_vals) {
    const std::size_t n = xs.size();
    if (n < 2 || sigma_vals.size() != n || log_weight_vals.size() != n)
        throw domain_error("table_branch: need matching tables with >= 2 breakpoints");
    if (std::abs(xs.front()) > 1e-12 || std::abs(xs.back() - 1.0) > 1e-12)
        throw domain_error("table_branch: breakpoints must span [0,1]");
    for (std::size_t i = 0; i + 1 < n; ++i)
        if (!(xs[i] < xs[i + 1]))
            throw domain_error("table_branch: breakpoints must be strictly increasing");
    Branch b;
    b.domain_lo = domain_lo;
    b.domain_hi = domain_hi;
    auto xs_p = std::make_shared<std::vector<double>>(std::move(xs));
    auto sv_p = std::make_shared<std::vector<double>>(std::move(sigma_vals));
    auto lw_p = std::make_shared<std::vector<double>>(std::move(log_weight_vals));
    b.inverse = [xs_p, sv_p](double x) { return piecewise_linear(*xs_p, *sv_p, x); };
    b.log_weight = [xs_p, lw_p](double x) { return piecewise_linear(*xs_p, *lw_p, x); };
    return b;  // forward map falls back to monotone bisection
}

ObservableSpec ObservableSpec::centered_copy(double mean) const {
    ObservableSpec out = *this;
    auto base = f;
    out.f = [base, mean](double x) { return base(x) - mean; };
    out.sup_norm = sup_norm + std::abs(mean);
    out.centered = true;
    out.name = name + "-centered";
    return out;
}

ObservableSpec make_observable(const std::string& name, const MapSpec& map) {
    // Euclidean Lipschitz constants divide by the minimal metric density.
    const double density_floor =
        map.metric.kind == Metric::Kind::euclidean ? 1.0 : 1.0 - 2.0 * map.metric.alpha;
    const double two_pi = 2.0 * std::numbers::pi;
    ObservableSpec o;
    o.name = name;
    if (name == "cos1") {
        o.f = [two_pi](double x) { return std::cos(two_pi * x); };
        o.sup_norm = 1.0;
        o.lip_seminorm = two_pi / density_floor;
    } else if (name == "sin1") {
        o.f = [two_pi](double x) { return std::sin(two_pi * x); };
        o.sup_norm = 1.0;
        o.lip_seminorm = two_pi / density_floor;
    } else if (name == "cocycle") {
        // u o T - u with u = sin(2 pi x) over the doubling map
        o.f = [two_pi](double x) { return std::sin(2 * two_pi * x) - std::sin(two_pi * x); };
        o.sup_norm = 2.0;
        o.lip_seminorm = 3.0 * two_pi / density_floor;
    } else {
        throw config_error("unknown observable preset: " + name);
    }
    return o;
}

ValidationReport validate_assumptions(const MapSpec& map, int grid_size) {
    if (grid_size < 2) throw domain_error("validate_assumptions: grid_size must be >= 2");
    ValidationReport rep;
    rep.grid_size = grid_size;
    rep.declared_gamma_inv = 1.0 / map.gamma;
    rep.declared_G = map.G;
    rep.tail_bound = map.tail_bound;

    std::vector<double> grid(grid_size);
    for (int i = 0; i < grid_size; ++i) grid[i] = static_cast<double>(i) / (grid_size - 1);

    rep.weight_sum_sup = 0;
    rep.weight_sum_inf = std::numeric_limits<double>::infinity();
    for (double x : grid) {
        double sum = 0;
        for (const auto& b : map.branches) sum += std::exp(b.log_weight(x));
        rep.weight_sum_sup = std::max(rep.weight_sum_sup, sum);
        rep.weight_sum_inf = std::min(rep.weight_sum_inf, sum);
    }

    for (const auto& b : map.branches) {
        for (int i = 0; i < grid_size; ++i) {
            for (int j = i + 1; j < grid_size; ++j) {
                const double d = map.metric(grid[i], grid[j]);
                if (d == 0) continue;
                const double ds = map.metric(b.inverse(grid[i]), b.inverse(grid[j]));
                rep.worst_contraction_ratio = std::max(rep.worst_contraction_ratio, ds / d);
                const double dg = std::abs(b.log_weight(grid[i]) - b.log_weight(grid[j]));
                rep.worst_lip_quotient = std::max(rep.worst_lip_quotient, dg / d);
            }
        }
    }
    rep.contraction_ok = rep.worst_contraction_ratio <= rep.declared_gamma_inv + 1e-12;
    rep.lipschitz_ok = rep.worst_lip_quotient <= rep.declared_G + 1e-12;
    if (!rep.contraction_ok) rep.flags.push_back("declared gamma exceeded on grid");
    if (!rep.lipschitz_ok) rep.flags.push_back("declared G exceeded on grid");
    if (map.G == 0.0) rep.flags.push_back("G = 0 (degenerate Lipschitz bound) accepted");
    if (map.tail_bound > 0) rep.flags.push_back("branch family truncated; tail lumped");
    return rep;
}

ObservableValidation validate_observable(const MapSpec& map, const ObservableSpec& f,
                                         int grid_size) {
    if (grid_size < 2) throw domain_error("validate_observable: grid_size must be >= 2");
    ObservableValidation rep;
    std::vector<double> grid(grid_size), values(grid_size);
    for (int i = 0; i < grid_size; ++i) {
        grid[i] = static_cast<double>(i) / (grid_size - 1);
        values[i] = f(grid[i]);
        rep.grid_sup = std::max(rep.grid_sup, std::abs(values[i]));
    }
    for (int i = 0; i < grid_size; ++i)
        for (int j = i + 1; j < grid_size; ++j) {
            const double d = map.metric(grid[i], grid[j]);
            if (d > 0)
                rep.grid_lip = std::max(rep.grid_lip, std::abs(values[i] - values[j]) / d);
        }
    rep.sup_ok = rep.grid_sup <= f.sup_norm + 1e-12;
    rep.lip_ok = rep.grid_lip <= f.lip_seminorm + 1e-12;
    return rep;
}

namespace {
const Branch& branch_at(const MapSpec& map, double& x, JitterLog* log) {
    for (const auto& b : map.branches) {
        const bool near_lo = std::abs(x - b.domain_lo) < kEndpointSnap;
        const bool near_hi = std::abs(x - b.domain_hi) < kEndpointSnap;
        if ((near_lo || near_hi) && !(b.domain_lo == 0.0 && near_lo) &&
            !(b.domain_hi == 1.0 && near_hi)) {
            x += kEndpointJitter;
            if (log) ++log->events;
            break;
        }
    }
    for (const auto& b : map.branches)
        if (x >= b.domain_lo && x <= b.domain_hi) return b;
    throw domain_error("forward_map: point not covered by any branch domain");
}
}  // namespace

double forward_map(const MapSpec& map, double x, JitterLog* log) {
    if (x < 0.0 || x > 1.0) throw domain_error("forward_map: point outside [0,1]");
    const Branch& b = branch_at(map, x, log);
    if (b.forward) {
        const double t = b.forward(x);
        return std::clamp(t, 0.0, 1.0);
    }
    // invert the monotone inverse branch by bisection
    double lo = 0.0, hi = 1.0;
    const bool increasing = b.inverse(1.0) > b.inverse(0.0);
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const bool below = increasing ? (b.inverse(mid) < x) : (b.inverse(mid) > x);
        (below ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double birkhoff_sum(const MapSpec& map, const ObservableSpec& f, double x0, int n,
                    JitterLog* log) {
    if (n < 0) throw domain_error("birkhoff_sum: n must be >= 0");
    double sum = 0.0, x = x0;
    for (int k = 0; k < n; ++k) {
        sum += f(x);
        x = forward_map(map, x, log);
    }
    return sum;
}

BinaryShiftOrbit::BinaryShiftOrbit(std::uint64_t seed, std::uint64_t sample_index)
    : key_(rng::derive_key(seed, sample_index)),
      window_(rng::bits_at(key_, 0)),
      buffer_(rng::bits_at(key_, 1)),
      buffer_used_(0),
      block_(2) {}

double BinaryShiftOrbit::next() {
    const double x = static_cast<double>(window_) * 0x1.0p-64;
    const std::uint64_t bit = buffer_ >> 63;
    buffer_ <<= 1;
    if (++buffer_used_ == 64) {
        buffer_ = rng::bits_at(key_, block_++);
        buffer_used_ = 0;
    }
    window_ = (window_ << 1) | bit;
    return x;
}

std::vector<double> sample_gibbs(const std::vector<double>& nodes,
                                 const std::vector<double>& density, std::size_t count,
                                 std::uint64_t seed) {
    const std::size_t n = nodes.size();
    if (n < 2 || density.size() != n)
        throw domain_error("sample_gibbs: need a density value per node");
    double mass = 0;
    std::vector<double> cdf(n, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (density[i] < -1e-12 || density[i + 1] < -1e-12)
            throw domain_error("sample_gibbs: density must be nonnegative");
        mass += 0.5 * (density[i] + density[i + 1]) * (nodes[i + 1] - nodes[i]);
        cdf[i + 1] = mass;
    }
    if (std::abs(mass - 1.0) > 1e-8)
        throw domain_error("sample_gibbs: density does not integrate to 1");

    const std::uint64_t key = rng::derive_key(seed, 0x61BB5ull);
    std::vector<double> out(count);
    for (std::size_t s = 0; s < count; ++s) {
        const double u = rng::uniform_at(key, s) * mass;
        const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        std::size_t cell = it == cdf.begin() ? 0 : (it - cdf.begin() - 1);
        cell = std::min(cell, n - 2);
        const double h = nodes[cell + 1] - nodes[cell];
        const double r0 = std::max(density[cell], 0.0);
        const double slope = (std::max(density[cell + 1], 0.0) - r0) / h;
        const double target = u - cdf[cell];
        double t;
        if (std::abs(slope) * h < 1e-12 * (r0 + 1e-300)) {
            t = r0 > 0 ? target / r0 : 0.5 * h;
        } else {
            const double disc = std::max(r0 * r0 + 2.0 * slope * target, 0.0);
            t = (std::sqrt(disc) - r0) / slope;
        }
        out[s] = nodes[cell] + std::clamp(t, 0.0, h);
    }
    return out;
}

double gauss_tail_bound(int j_max) {
    if (j_max < 1) throw domain_error("gauss_tail_bound: j_max must be >= 1");
    return trigamma(static_cast<double>(j_max) + 1.0);
}

double trigamma(double x) {
    if (!(x > 0))
        throw domain_error("trigamma: argument must be positive");
    double acc = 0.0;
    while (x < 10.0) {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    // asymptotic series with Bernoulli coefficients
    const double inv = 1.0 / x, inv2 = inv * inv;
    double series = inv * (1.0 + 0.5 * inv + inv2 * (1.0 / 6.0));
    series += inv2 * inv2 * inv * (-1.0 / 30.0);
    series += inv2 * inv2 * inv2 * inv * (1.0 / 42.0);
    series += inv2 * inv2 * inv2 * inv2 * inv * (-1.0 / 30.0);
    return acc + series;
}

}  // namespace conecert::dynamics
