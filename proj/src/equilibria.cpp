#include "ffmap/equilibria.hpp"

#include <algorithm>
#include <cmath>

namespace ffmap {

const char* to_string(Stability s) {
    switch (s) {
        case Stability::saddle: return "saddle";
        case Stability::source: return "source";
        case Stability::sink: return "sink";
        case Stability::spiral_sink: return "spiral-sink";
        case Stability::spiral_source: return "spiral-source";
        case Stability::neutral: return "neutral";
        case Stability::non_hyperbolic_real: return "non-hyperbolic-real";
    }
    return "?";
}

const char* to_string(FixedPointFamily f) {
    switch (f) {
        case FixedPointFamily::axis_unit: return "axis-unit";
        case FixedPointFamily::axis_reciprocal: return "axis-reciprocal";
        case FixedPointFamily::interior: return "interior";
        case FixedPointFamily::exterior: return "exterior";
    }
    return "?";
}

namespace {

constexpr double kUnitCircleBand = 1e-9;

std::array<std::complex<double>, 2> eigenvalues_of(const Jacobian& j) {
    const double tr = j.trace(), det = j.det();
    const double disc = tr * tr - 4.0 * det;
    std::array<std::complex<double>, 2> eig;
    if (disc < 0.0) {
        const double im = std::sqrt(-disc) / 2.0;
        eig = {std::complex<double>(tr / 2.0, im), std::complex<double>(tr / 2.0, -im)};
    } else {
        // split the quadratic without cancellation
        const double s = tr >= 0.0 ? (tr + std::sqrt(disc)) / 2.0 : (tr - std::sqrt(disc)) / 2.0;
        double r1 = s, r2 = s != 0.0 ? det / s : 0.0;
        if (std::fabs(r1) < std::fabs(r2)) std::swap(r1, r2);
        eig = {std::complex<double>(r1, 0.0), std::complex<double>(r2, 0.0)};
    }
    return eig;
}

Stability classify_eigenvalues(const std::array<std::complex<double>, 2>& eig) {
    const double m1 = std::abs(eig[0]), m2 = std::abs(eig[1]);
    if (eig[0].imag() != 0.0) {
        if (std::fabs(m1 - 1.0) < kUnitCircleBand) return Stability::neutral;
        return m1 < 1.0 ? Stability::spiral_sink : Stability::spiral_source;
    }
    if (std::fabs(m1 - 1.0) < kUnitCircleBand || std::fabs(m2 - 1.0) < kUnitCircleBand)
        return Stability::non_hyperbolic_real;
    if (m1 > 1.0 && m2 > 1.0) return Stability::source;
    if (m1 < 1.0 && m2 < 1.0) return Stability::sink;
    return Stability::saddle;
}

// off-axis roots of (1-lambda) x^2 + (1+lambda-1/mu) x - 1 = 0, + sign first
struct OffAxisRoots {
    bool exist = false;
    bool single = false;  // lambda == 1 collapses the quadratic to a line
    double x_plus = 0.0, x_minus = 0.0;
};

OffAxisRoots off_axis_roots(const Params& prm) {
    OffAxisRoots r;
    const double lam = prm.lambda, mu = prm.mu;
    const double b = 1.0 + lam - 1.0 / mu;
    if (lam == 1.0) {
        if (b == 0.0) return r;
        r.exist = r.single = true;
        r.x_plus = 1.0 / b;
        return r;
    }
    const double a = 1.0 - lam;
    const double disc = b * b + 4.0 * a;
    if (disc < 0.0) return r;
    const double s = b >= 0.0 ? -(b + std::sqrt(disc)) / 2.0 : -(b - std::sqrt(disc)) / 2.0;
    const double r1 = s / a, r2 = -1.0 / s;
    r.exist = true;
    r.x_plus = a > 0.0 ? std::max(r1, r2) : std::min(r1, r2);
    r.x_minus = r.x_plus == r1 ? r2 : r1;
    return r;
}

// one Newton step of F(p) = p sharpens the closed-form root to full precision
Point polish_fixed(const Params& prm, Point p) {
    const Point f = step(prm, p) - p;
    Jacobian j = jacobian(prm, p);
    j.j11 -= 1.0;
    j.j22 -= 1.0;
    const double det = j.det();
    if (std::fabs(det) < 1e-14) return p;
    const Point q = p - (1.0 / det) * Point{j.j22 * f.x - j.j12 * f.y, -j.j21 * f.x + j.j11 * f.y};
    return norm(step(prm, q) - q) <= norm(f) ? q : p;
}

FixedPoint make_fixed_point(const Params& prm, Point p, FixedPointFamily family) {
    FixedPoint fp;
    fp.location = p;
    fp.family = family;
    fp.eigenvalues = eigenvalues_of(jacobian(prm, p));
    fp.classification = classify_eigenvalues(fp.eigenvalues);
    fp.residual = norm(step(prm, p) - p);
    return fp;
}

}  // namespace

std::vector<FixedPoint> fixed_points(const Params& prm) {
    std::vector<FixedPoint> out;
    out.push_back(make_fixed_point(prm, {1.0, 0.0}, FixedPointFamily::axis_unit));
    if (prm.lambda != 1.0)
        out.push_back(make_fixed_point(prm, {1.0 / prm.lambda, 0.0}, FixedPointFamily::axis_reciprocal));

    const OffAxisRoots r = off_axis_roots(prm);
    if (r.exist) {
        const Point plus = polish_fixed(prm, {r.x_plus, r.x_plus - 1.0 / prm.mu});
        out.push_back(make_fixed_point(prm, plus, FixedPointFamily::interior));
        if (!r.single) {
            const Point minus = polish_fixed(prm, {r.x_minus, r.x_minus - 1.0 / prm.mu});
            out.push_back(make_fixed_point(prm, minus, FixedPointFamily::exterior));
        }
    }
    return out;
}

FixedPoint classify(const Params& prm, Point location) {
    if (norm(step(prm, location) - location) > 1e-10)
        throw std::invalid_argument("classify: location is not a fixed point");
    FixedPointFamily family = FixedPointFamily::interior;
    double best = std::numeric_limits<double>::infinity();
    for (const FixedPoint& fp : fixed_points(prm)) {
        const double d = distance(fp.location, location);
        if (d < best) {
            best = d;
            family = fp.family;
        }
    }
    FixedPoint fp = make_fixed_point(prm, location, family);
    return fp;
}

Point interior_fixed_point(const Params& prm) {
    const OffAxisRoots r = off_axis_roots(prm);
    if (!r.exist)
        throw std::invalid_argument("interior_fixed_point: no off-axis fixed point at these parameters");
    return polish_fixed(prm, {r.x_plus, r.x_plus - 1.0 / prm.mu});
}

HopfCoefficients hopf_coefficients(const Params& prm) {
    const double lam = prm.lambda, mu = prm.mu;
    const OffAxisRoots roots = off_axis_roots(prm);
    if (!roots.exist)
        throw std::invalid_argument("hopf_coefficients: no interior fixed point at these parameters");
    const double xs = roots.x_plus;

    HopfCoefficients h;
    h.a = (2.0 * lam - mu - 1.0) * xs + (2.0 - lam + 1.0 / mu);
    h.b = mu * ((lam * (4.0 / mu - 1.0) - 2.0 * (1.0 + 1.0 / mu)) * xs +
                2.0 * (1.0 - (lam - 1.0 / mu) / mu));
    const double disc = 4.0 * h.b - h.a * h.a;
    if (disc > 0.0) h.sigma = std::complex<double>(h.a / 2.0, std::sqrt(disc) / 2.0);
    return h;
}

double mu_h(double lambda, double tol) {
    if (!(lambda > 0.0) || lambda > 1.0)
        throw std::invalid_argument("mu_h: lambda must lie in (0, 1]");
    if (!(tol > 0.0)) throw std::invalid_argument("mu_h: tol must be positive");

    const auto b_of = [lambda](double mu) { return hopf_coefficients(Params(lambda, mu)).b; };

    double lo = 1.0 + 1e-6;
    while (b_of(lo) >= 1.0) {
        lo = 1.0 + (lo - 1.0) / 10.0;
        if (lo - 1.0 < 1e-15) throw analysis_error("mu_h: no subcritical bracket found");
    }
    double hi = 2.0;
    while (b_of(hi) <= 1.0) {
        hi *= 2.0;
        if (hi > 64.0) throw analysis_error("mu_h: no supercritical bracket found");
    }

    const double width = std::max(tol, 1e-12);
    for (int it = 0; it < 200 && hi - lo > width; ++it) {
        const double mid = (lo + hi) / 2.0;
        (b_of(mid) < 1.0 ? lo : hi) = mid;
    }
    return (lo + hi) / 2.0;
}

std::pair<ManifoldDescriptor, ManifoldDescriptor> manifolds_at_unit_fixed_point(const Params& prm) {
    if (!(prm.lambda < 1.0 && prm.mu > 1.0))
        throw std::invalid_argument(
            "manifolds_at_unit_fixed_point: requires lambda < 1 < mu (saddle regime)");
    const Point base{1.0, 0.0};
    ManifoldDescriptor stable{base, ManifoldKind::stable_segment, 1.0 / prm.lambda, 0.0};
    ManifoldDescriptor unstable{base, ManifoldKind::unstable_line,
                                std::numeric_limits<double>::infinity(), prm.lambda - prm.mu};
    return {stable, unstable};
}

}  // namespace ffmap
