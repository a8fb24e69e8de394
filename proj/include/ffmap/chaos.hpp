#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "ffmap/core.hpp"

namespace ffmap {

struct LyapunovResult {
    std::array<double, 2> exponents{};  // descending
    std::size_t n = 0;
    std::size_t transient = 0;
    Point seed;
    double mean_log_det = 0.0;  // orbit average of ln|det J|; equals the sum
};

// tangent-frame (Benettin) estimate with Gram-Schmidt renormalisation every
// step; escaping orbits raise escape_error
LyapunovResult lyapunov(const Params& prm, Point seed, std::size_t n, std::size_t transient);

struct EllipseRegion {
    Point center;
    double semi_major = 0.0;
    double semi_minor = 0.0;
    bool major_axis_vertical = true;

    // distance from center in units of the boundary (1 = on the ellipse)
    double normalized_radius(Point p) const;
    bool contains(Point p) const { return normalized_radius(p) <= 1.0; }
};

struct KeyPointCheck {
    Point input, expected, observed;
    bool pass = false;
};

struct HorseshoeOptions {
    std::size_t resolution = 1'000'000;  // total sample budget for the disk
    int grid = 512;                      // pixel grid for component counting
    double hull_half_height = 0.05;      // strip |y| <= this around the bottom edge
    double hull_x_margin = 0.05;         // strip x range is [-margin, 1+margin]
    int dilation = 1;                    // pixel dilation before labelling
    std::size_t min_component_pixels = 10;
};

struct HorseshoeWitness {
    EllipseRegion domain;
    std::size_t resolution = 0;
    std::vector<KeyPointCheck> key_points;
    std::array<double, 2> containment_radii{};  // of (1,0) and (1,0.2) in D
    bool containment_ok = false;                // both within 5% of the boundary
    bool diagonal_crossing = false;  // image of D meets both sides of y = x near (0.8, 0.8)
    double max_parabola_distance = 0.0;  // of the first image from y = mu x (1-x)
    int component_count = 0;             // of the second image inside the bottom strip
    std::vector<int> component_sizes;    // pixels, descending
    bool inconclusive = false;
    std::string note;
    std::vector<Point> domain_sample, image1_sample, image2_sample;  // decimated, for plots
};

// Checks the ingredients of the folding argument at lambda = 0.99, mu = 5:
// an elliptical disk D at (0.95, 0.1) maps to a thin strip crossing the
// diagonal near (0.8, 0.8), and its second image meets a strip around the
// bottom edge in at least two pieces. Requires those exact parameters.
HorseshoeWitness horseshoe_witness(const Params& prm = Params(0.99, 5.0),
                                   const HorseshoeOptions& opts = {});

// (1/n) ln(|F^n(p + delta) - F^n(p)| / delta0) with delta of length delta0
// along `direction` (normalised internally)
double sensitivity(const Params& prm, Point p, double delta0, std::size_t n, Point direction);

// same, with the direction drawn uniformly from the seeded generator
double sensitivity(const Params& prm, Point p, double delta0, std::size_t n,
                   std::uint64_t rng_seed);

struct SplatterHistogram {
    int bins = 0;
    std::vector<std::uint64_t> counts;  // row-major, cell (ix, iy) at iy*bins+ix
    std::uint64_t total_binned = 0;
    std::uint64_t excluded_samples = 0;  // outside [0,1]^2 or after an escape
    std::size_t escaped_orbits = 0;

    std::uint64_t at(int ix, int iy) const { return counts[static_cast<std::size_t>(iy) * bins + ix]; }
    Point cell_center(int ix, int iy) const;
    // 90th percentile of the nonzero cell counts; 0 when the histogram is empty
    std::uint64_t top_decile_threshold() const;
    bool top_decile_cell_within(Point p, double radius) const;
};

// visit-count histogram over [0,1]^2 accumulated across all seed orbits;
// total_binned + excluded_samples == seeds * n always holds
SplatterHistogram splatter_stats(const Params& prm, const std::vector<Point>& seeds,
                                 std::size_t n, int bins);

}  // namespace ffmap
