#include "ffmap/core.hpp"

namespace ffmap {

Point step(const Params& prm, Point p) {
    const double x = p.x, y = p.y;
    return {1.0 - x * (prm.lambda * (1.0 - x) + y), prm.mu * y * (x - y)};
}

IterateResult iterate(const Params& prm, Point p, std::size_t n) {
    IterateResult res{p, false, 0};
    for (std::size_t k = 0; k < n; ++k) {
        Point q = step(prm, res.point);
        if (!finite_in_range(q)) {
            res.escaped = true;
            return res;
        }
        res.point = q;
        res.steps_taken = k + 1;
    }
    return res;
}

Orbit orbit(const Params& prm, Point p, std::size_t n) {
    Orbit orb;
    if (!finite_in_range(p)) {
        orb.escaped = true;
        return orb;
    }
    orb.points.reserve(n + 1);
    orb.points.push_back(p);
    for (std::size_t k = 0; k < n; ++k) {
        Point q = step(prm, orb.points.back());
        if (!finite_in_range(q)) {
            orb.escaped = true;
            break;
        }
        orb.points.push_back(q);
    }
    return orb;
}

Jacobian jacobian(const Params& prm, Point p) {
    const double x = p.x, y = p.y;
    return {prm.lambda * (2.0 * x - 1.0) - y, -x, prm.mu * y, prm.mu * (x - 2.0 * y)};
}

double singular_curve_value(const Params& prm, Point p) {
    const double x = p.x, y = p.y;
    return prm.lambda * (2.0 * x - 1.0) * (x - 2.0 * y) + 2.0 * y * y;
}

namespace {

void require_fixed(const Params& prm, Point pstar, const char* who) {
    if (distance(step(prm, pstar), pstar) > 1e-10)
        throw std::invalid_argument(std::string(who) + ": pstar is not a fixed point");
}

}  // namespace

Point translated_step(const Params& prm, Point pstar, Point q) {
    require_fixed(prm, pstar, "translated_step");
    return step(prm, pstar + q) - pstar;
}

double branch_angle(double prev_theta, double raw_angle) {
    const double two_pi = 2.0 * M_PI;
    const double k = std::floor((prev_theta + M_PI - raw_angle) / two_pi + 0.5);
    return raw_angle + two_pi * k;
}

PolarPoint polar_step(const Params& prm, Point pstar, PolarPoint pp) {
    require_fixed(prm, pstar, "polar_step");
    if (pp.r == 0.0) return {0.0, pp.theta + M_PI};
    const Point q{pp.r * std::cos(pp.theta), pp.r * std::sin(pp.theta)};
    const Point img = step(prm, pstar + q) - pstar;
    const double R = norm(img);
    const double theta = branch_angle(pp.theta, std::atan2(img.y, img.x));
    return {R, theta};
}

PolarPoint paradigm_step(double nu, double a, double k, PolarPoint pp) {
    if (a + nu == 0.0)
        throw std::invalid_argument("paradigm_step: a + nu must be nonzero");
    const double two_pi = 2.0 * M_PI;
    const double R = (nu + 1.0) * pp.r * (1.0 - pp.r);
    double theta = pp.theta + two_pi / (a + nu) * (1.0 + k * pp.r * std::sin(pp.theta));
    theta = std::fmod(theta, two_pi);
    if (theta < 0.0) theta += two_pi;
    return {R, theta};
}

}  // namespace ffmap
