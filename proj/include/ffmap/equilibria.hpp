#pragma once

#include <array>
#include <complex>
#include <optional>
#include <utility>
#include <vector>

#include "ffmap/core.hpp"

namespace ffmap {

enum class Stability {
    saddle,
    source,
    sink,  // real pair strictly inside the unit circle
    spiral_sink,
    spiral_source,
    neutral,              // complex pair on the unit circle (within 1e-9)
    non_hyperbolic_real,  // a real eigenvalue on the unit circle (within 1e-9)
};

enum class FixedPointFamily {
    axis_unit,        // (1, 0)
    axis_reciprocal,  // (1/lambda, 0)
    interior,         // off-axis root with the + discriminant sign
    exterior,         // the conjugate root, far from the unit triangle
};

const char* to_string(Stability s);
const char* to_string(FixedPointFamily f);

struct FixedPoint {
    Point location;
    std::array<std::complex<double>, 2> eigenvalues;  // descending modulus
    Stability classification;
    FixedPointFamily family;
    double residual = 0.0;  // |F(location) - location|
};

// all fixed points: (1,0), (1/lambda,0), and up to two off-axis roots of
// (1-lambda) x^2 + (1+lambda-1/mu) x - 1 = 0 with y = x - 1/mu.
// For lambda = 1 the axis points coincide and the off-axis root is
// x = mu/(2 mu - 1) (absent when mu = 1/2).
std::vector<FixedPoint> fixed_points(const Params& prm);

// classification of a point already known to be fixed (to 1e-10)
FixedPoint classify(const Params& prm, Point location);

// x-coordinate of the interior fixed point; throws when none exists
Point interior_fixed_point(const Params& prm);

struct HopfCoefficients {
    double a;  // trace of the Jacobian at the interior fixed point
    double b;  // determinant of the same; the complex pair crosses |.|=1 at b=1
    std::optional<std::complex<double>> sigma;  // eigenvalue with imag > 0, when 4b > a^2
};

HopfCoefficients hopf_coefficients(const Params& prm);

// threshold value of mu where b(lambda, mu) = 1, found by bisection.
// b dips below 1 just past mu = 1 and rises through 1 exactly once, so
// the crossing is unique. Stops when the bracket width drops below
// max(tol, 1e-12) or after 200 halvings.
double mu_h(double lambda, double tol = 1e-12);

enum class ManifoldKind { stable_segment, unstable_line };

struct ManifoldDescriptor {
    Point base;
    ManifoldKind kind;
    double upper_x;  // stable segment: {(x, 0) : x < upper_x}
    double slope;    // unstable line: y = slope * (x - base.x)
};

// invariant manifolds of the saddle at (1, 0): the stable set is the piece
// of the x-axis left of 1/lambda, the unstable set leaves along the line of
// slope lambda - mu. Requires 0 < lambda < 1 < mu.
std::pair<ManifoldDescriptor, ManifoldDescriptor> manifolds_at_unit_fixed_point(const Params& prm);

}  // namespace ffmap
