#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ffmap/core.hpp"

namespace ffmap {

// closed curve r = rho(theta) around `center`, sampled on a uniform
// angular grid; intermediate angles use periodic cubic interpolation
struct PolarCurve {
    double nu = 0.0;  // distance of mu above the oscillation threshold
    Point center;
    std::vector<double> thetas;  // ascending, uniform, thetas[0] in [0, 2*pi/M)
    std::vector<double> rhos;
    double residual = 0.0;  // max invariance defect, see invariance_residual
    std::vector<double> iteration_diffs;  // max-norm change per solver sweep
    bool converged = false;

    double rho_at(double theta) const;
    Point world_point(std::size_t i) const;  // center + rho_i * unit(theta_i)
};

// Solves the invariance equation rho(Theta(theta)) = rho(theta) * U(theta),
// where the translated map sends (rho(theta), theta) to radius rho*U and
// angle Theta, by forward graph-transform sweeps starting from the constant
// curve rho = nu: each sweep maps the sampled graph and re-interpolates the
// images onto the uniform grid. The forward direction is the dynamically
// stable one about an attracting loop. Requires mu above the threshold
// mu_h(lambda) and M >= 64. Sweeps stop when the max-norm update drops below
// tol; radii above 1 abort with analysis_error (no curve of small radius
// exists there).
PolarCurve picard_solve(const Params& prm, Point pstar, std::size_t M = 512,
                        std::size_t max_iter = 1'000'000, double tol = 1e-10);

// max over grid angles of |image of curve point - curve point at the image
// angle|, measured in the translated plane
double invariance_residual(const Params& prm, const PolarCurve& curve);

struct PointCloud {
    std::vector<Point> points;
    bool escaped = false;
};

// iterates `transient` steps from seed, then returns the next `samples` points
PointCloud attracting_set(const Params& prm, Point seed, std::size_t transient,
                          std::size_t samples);

struct RotationEstimate {
    double value = 0.0;  // mean angular advance per step, in turns, in [0, 1)
    std::size_t n_iterates = 0;
    double std_error = 0.0;  // standard error of the per-step advance
};

// average winding of the orbit of `seed` about pstar, lifted with the same
// branch convention as polar_step. Needs n >= 1000; orbits that escape or
// fall into pstar (radius < 1e-12) are errors.
RotationEstimate rotation_number(const Params& prm, Point pstar, Point seed, std::size_t n);

// smallest q <= max_period with |p[i+q] - p[i]| < tol across the whole tail;
// the tail must hold at least 3 * max_period points
std::optional<std::size_t> detect_cycle(const std::vector<Point>& tail, std::size_t max_period,
                                        double tol);

struct LoopCount {
    int loops = 0;
    bool conclusive = false;
};

// counts closed-loop components of the cloud. Single-linkage clusters are
// tracked while the link scale doubles from the median nearest-neighbour
// spacing up to the cloud diameter; a component count only qualifies when it
// survives at least three doublings (quasiperiodic sampling covers a loop in
// clumps, so counts tied to one scale are artifacts). The finest qualifying
// count whose clusters all close into loops (radius at least 10x the link
// scale, every angular gap about the cluster centroid under 10x the median
// gap or the link scale) is reported; inconclusive when no qualifying count
// passes.
LoopCount count_loops(const std::vector<Point>& cloud);

struct CascadeOptions {
    std::size_t transient = 10'000;  // floor; each scan point also discards at least 40/nu steps
    std::size_t samples = 10'000;
};

struct CascadeScanPoint {
    double nu = 0.0;
    int components = 0;
    bool conclusive = false;
};

struct CascadeReport {
    double lambda = 0.0;
    std::vector<CascadeScanPoint> scan;          // full grid, for auditing
    std::vector<double> nu_breaks;               // nu where the count doubled
    std::vector<int> cycle_multiplicities;       // conclusive counts, in order seen
    std::vector<std::string> notes;              // non-doubling or skipped transitions
};

// sweeps nu over [nu_lo, nu_hi] on `steps` points (mu = mu_h + nu), counts
// loop components of the attracting set at each, and records doublings
CascadeReport cascade_scan(double lambda, double nu_lo, double nu_hi, std::size_t steps,
                           const CascadeOptions& opts = {});

}  // namespace ffmap
