#pragma once

#include <vector>

#include "ffmap/core.hpp"

namespace ffmap {

namespace poly {

// real roots of c[0] + c[1] x + ... + c[n] x^n via the companion matrix;
// roots are kept when |imag| < imag_tol, returned sorted ascending
std::vector<double> real_roots(std::vector<double> coeffs, double imag_tol = 1e-8);

// smallest pairwise gap between all (complex) roots, scaled by max(1, |root|);
// used to spot near-multiple roots
double min_root_separation(std::vector<double> coeffs);

}  // namespace poly

struct PreimageResult {
    std::vector<Point> points;     // every p here satisfies |F(p) - target| < 1e-9
    bool ill_conditioned = false;  // the solved quartic had near-multiple roots
};

// all solutions of F(p) = target. Eliminating y gives a quartic in x, solved
// by companion-matrix eigenvalues and polished with Newton steps on the full
// 2-d system; the line x = 0 is handled separately (it only reaches x' = 1).
// At most four solutions exist.
PreimageResult preimages(const Params& prm, Point target);

}  // namespace ffmap
