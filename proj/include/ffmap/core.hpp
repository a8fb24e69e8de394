#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

// Planar quadratic map
//
//   F(x, y) = (1 - x*(lambda*(1-x) + y),  mu*y*(x - y)),   lambda, mu > 0
//
// modelling the settling dynamics of an R-S flip-flop: (x, y) near (1, 0)
// or (0, 1) are the two stable logic states, (1, 1) is the forbidden input.
// This header holds the map itself, its Jacobian, the translated form about
// an interior fixed point, and polar variants used by the curve solver.

namespace ffmap {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator*(double s, Point p) { return {s * p.x, s * p.y}; }
inline double norm(Point p) { return std::hypot(p.x, p.y); }
inline double distance(Point a, Point b) { return norm(a - b); }

struct Params {
    double lambda;
    double mu;

    Params(double lambda_, double mu_) : lambda(lambda_), mu(mu_) {
        if (!(lambda > 0.0) || !(mu > 0.0))
            throw std::invalid_argument("Params: lambda and mu must be positive");
    }

    // 0 < lambda <= 1 < mu <= 5, the regime all quantitative results assume
    bool standard_regime() const {
        return lambda > 0.0 && lambda <= 1.0 && mu > 1.0 && mu <= 5.0;
    }
};

struct Jacobian {
    double j11, j12, j21, j22;

    double trace() const { return j11 + j22; }
    double det() const { return j11 * j22 - j12 * j21; }
    Point apply(Point v) const { return {j11 * v.x + j12 * v.y, j21 * v.x + j22 * v.y}; }
};

struct PolarPoint {
    double r = 0.0;
    double theta = 0.0;
};

// orbits are treated as escaped once a coordinate passes this magnitude
inline constexpr double kEscapeThreshold = 1e12;

inline bool finite_in_range(Point p) {
    return std::isfinite(p.x) && std::isfinite(p.y) &&
           std::fabs(p.x) <= kEscapeThreshold && std::fabs(p.y) <= kEscapeThreshold;
}

// orbit left the working range (or overflowed) before finishing
class escape_error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// a computation ran but its geometric claim failed (no curve found, ...)
class analysis_error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

Point step(const Params& prm, Point p);

struct IterateResult {
    Point point;
    bool escaped = false;
    std::size_t steps_taken = 0;
};

// applies `step` n times; stops at the first escaped iterate
IterateResult iterate(const Params& prm, Point p, std::size_t n);

struct Orbit {
    std::vector<Point> points;  // p, F(p), ..., truncated on escape
    bool escaped = false;
};

Orbit orbit(const Params& prm, Point p, std::size_t n);

Jacobian jacobian(const Params& prm, Point p);

// lambda*(2x-1)*(x-2y) + 2y^2; det J = mu * this value, so its zero set is
// the fold curve where the map stops being locally invertible
double singular_curve_value(const Params& prm, Point p);

// F conjugated by the translation taking the fixed point pstar to the origin.
// pstar must be fixed to within 1e-10.
Point translated_step(const Params& prm, Point pstar, Point q);

// representative of `raw_angle + 2*pi*k` nearest prev_theta + pi; the map
// advances points near the interior fixed point by an angle in
// (pi/2, 3*pi/2) per application, which this lift convention tracks
double branch_angle(double prev_theta, double raw_angle);

// translated map in polar coordinates about pstar; r = 0 continues the
// angle by a half turn
PolarPoint polar_step(const Params& prm, Point pstar, PolarPoint pp);

// radial logistic paradigm map: R = (nu+1) r (1-r),
// Theta = theta + 2*pi/(a+nu) * (1 + k r sin theta), reduced mod 2*pi
PolarPoint paradigm_step(double nu, double a, double k, PolarPoint pp);

}  // namespace ffmap
