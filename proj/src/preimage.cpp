#include "ffmap/preimage.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <complex>

namespace ffmap {

namespace poly {

namespace {

std::vector<std::complex<double>> all_roots(std::vector<double> c) {
    double maxabs = 0.0;
    for (double v : c) maxabs = std::max(maxabs, std::fabs(v));
    if (maxabs == 0.0) return {};
    while (c.size() > 1 && std::fabs(c.back()) <= 1e-14 * maxabs) c.pop_back();
    const int n = static_cast<int>(c.size()) - 1;
    if (n < 1) return {};
    Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(n, n);
    for (int i = 1; i < n; ++i) comp(i, i - 1) = 1.0;
    for (int i = 0; i < n; ++i) comp(i, n - 1) = -c[i] / c[n];
    Eigen::EigenSolver<Eigen::MatrixXd> es(comp, /*computeEigenvectors=*/false);
    std::vector<std::complex<double>> roots(n);
    for (int i = 0; i < n; ++i) roots[i] = es.eigenvalues()[i];
    return roots;
}

}  // namespace

std::vector<double> real_roots(std::vector<double> coeffs, double imag_tol) {
    std::vector<double> out;
    for (const auto& z : all_roots(std::move(coeffs)))
        if (std::fabs(z.imag()) < imag_tol) out.push_back(z.real());
    std::sort(out.begin(), out.end());
    return out;
}

double min_root_separation(std::vector<double> coeffs) {
    const auto roots = all_roots(std::move(coeffs));
    double sep = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < roots.size(); ++i)
        for (std::size_t j = i + 1; j < roots.size(); ++j) {
            const double scale = std::max(1.0, std::max(std::abs(roots[i]), std::abs(roots[j])));
            sep = std::min(sep, std::abs(roots[i] - roots[j]) / scale);
        }
    return sep;
}

}  // namespace poly

namespace {

// Newton refinement of F(p) = target on the full 2-d system
bool polish(const Params& prm, Point target, Point& p) {
    for (int it = 0; it < 12; ++it) {
        const Point f = step(prm, p) - target;
        if (norm(f) < 1e-13) break;
        const Jacobian j = jacobian(prm, p);
        const double det = j.det();
        if (std::fabs(det) < 1e-14) break;
        p = p - (1.0 / det) * Point{j.j22 * f.x - j.j12 * f.y, -j.j21 * f.x + j.j11 * f.y};
        if (!std::isfinite(p.x) || !std::isfinite(p.y)) return false;
    }
    return norm(step(prm, p) - target) < 1e-9;
}

void push_unique(std::vector<Point>& pts, Point p) {
    for (const Point& q : pts) {
        const double scale = std::max(1.0, std::max(norm(p), norm(q)));
        if (distance(p, q) < 1e-7 * scale) return;
    }
    pts.push_back(p);
}

}  // namespace

PreimageResult preimages(const Params& prm, Point target) {
    const double lam = prm.lambda, mu = prm.mu;
    const double c0 = 1.0 - target.x;
    PreimageResult res;

    // x = 0 maps the whole line onto x' = 1, y' = -mu y^2
    if (std::fabs(target.x - 1.0) <= 1e-12) {
        const double ysq = -target.y / mu;
        if (std::fabs(ysq) <= 1e-18) {
            Point p{0.0, 0.0};
            if (polish(prm, target, p)) push_unique(res.points, p);
        } else if (ysq > 0.0) {
            for (double y : {std::sqrt(ysq), -std::sqrt(ysq)}) {
                Point p{0.0, y};
                if (polish(prm, target, p)) push_unique(res.points, p);
            }
        }
    }

    // with w = x y determined by the first component, the second component
    // becomes mu w (x^2 - w) = ty x^2, a quartic in x
    const std::vector<double> quartic{
        -mu * c0 * c0,
        2.0 * mu * lam * c0,
        mu * (c0 * (1.0 - 2.0 * lam) - lam * lam) - target.y,
        mu * lam * (2.0 * lam - 1.0),
        mu * lam * (1.0 - lam),
    };

    for (double x : poly::real_roots(quartic)) {
        if (std::fabs(x) < 1e-9) continue;  // x = 0 handled above
        const double w = lam * x * x - lam * x + c0;
        Point p{x, w / x};
        if (polish(prm, target, p)) push_unique(res.points, p);
    }

    res.ill_conditioned = poly::min_root_separation(quartic) < 1e-6;

    std::sort(res.points.begin(), res.points.end(), [](Point a, Point b) {
        return a.x != b.x ? a.x < b.x : a.y < b.y;
    });
    if (res.points.size() > 4)
        throw analysis_error("preimages: more than four candidates survived polishing");
    return res;
}

}  // namespace ffmap
