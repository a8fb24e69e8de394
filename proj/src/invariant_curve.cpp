#include "ffmap/invariant_curve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include "ffmap/equilibria.hpp"

namespace ffmap {

namespace {

double wrap_two_pi(double t) {
    const double two_pi = 2.0 * M_PI;
    t = std::fmod(t, two_pi);
    if (t < 0.0) t += two_pi;
    return t;
}

// periodic cubic (4-point Lagrange) interpolation on a uniform ascending
// grid; linear interpolation leaves an O(h^2) bias that the slow normal
// contraction near the threshold amplifies into a visible radial offset
double interp_rho(const std::vector<double>& thetas, const std::vector<double>& rhos,
                  double theta) {
    const std::size_t m = thetas.size();
    const double h = 2.0 * M_PI / static_cast<double>(m);
    double u = (wrap_two_pi(theta) - thetas[0]) / h;
    if (u < 0.0) u += static_cast<double>(m);
    std::size_t i = static_cast<std::size_t>(u);
    if (i >= m) i -= m;
    const double t = u - std::floor(u);
    const std::size_t i0 = (i + m - 1) % m, i2 = (i + 1) % m, i3 = (i + 2) % m;
    const double w0 = -t * (t - 1.0) * (t - 2.0) / 6.0;
    const double w1 = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
    const double w2 = -(t + 1.0) * t * (t - 2.0) / 2.0;
    const double w3 = (t + 1.0) * t * (t - 1.0) / 6.0;
    return w0 * rhos[i0] + w1 * rhos[i] + w2 * rhos[i2] + w3 * rhos[i3];
}

// stored arrays may arrive cyclically rotated; put them in ascending order
void canonicalize(std::vector<double>& thetas, std::vector<double>& rhos) {
    const auto first =
        std::min_element(thetas.begin(), thetas.end()) - thetas.begin();
    if (first != 0) {
        std::rotate(thetas.begin(), thetas.begin() + first, thetas.end());
        std::rotate(rhos.begin(), rhos.begin() + first, rhos.end());
    }
}

struct TranslatedMap {
    double j11, j12, j21, j22, lam, mu;

    explicit TranslatedMap(const Params& prm, Point pstar) {
        const Jacobian j = jacobian(prm, pstar);
        j11 = j.j11;
        j12 = j.j12;
        j21 = j.j21;
        j22 = j.j22;
        lam = prm.lambda;
        mu = prm.mu;
    }

    // exact quadratic expansion about the fixed point; avoids the
    // cancellation of step(pstar + q) - pstar at small radii
    Point apply(double xi, double eta) const {
        return {j11 * xi + j12 * eta + xi * (lam * xi - eta),
                j21 * xi + j22 * eta + mu * eta * (xi - eta)};
    }
};

void require_fixed_center(const Params& prm, Point pstar, const char* who) {
    if (distance(step(prm, pstar), pstar) > 1e-10)
        throw std::invalid_argument(std::string(who) + ": pstar is not a fixed point");
}

}  // namespace

double PolarCurve::rho_at(double theta) const { return interp_rho(thetas, rhos, theta); }

Point PolarCurve::world_point(std::size_t i) const {
    return center + rhos[i] * Point{std::cos(thetas[i]), std::sin(thetas[i])};
}

PolarCurve picard_solve(const Params& prm, Point pstar, std::size_t M, std::size_t max_iter,
                        double tol) {
    require_fixed_center(prm, pstar, "picard_solve");
    if (M < 64) throw std::invalid_argument("picard_solve: need at least 64 grid angles");
    if (!(tol > 0.0)) throw std::invalid_argument("picard_solve: tol must be positive");
    if (!(prm.lambda > 0.0) || prm.lambda > 1.0)
        throw std::invalid_argument("picard_solve: lambda must lie in (0, 1]");
    const double nu = prm.mu - mu_h(prm.lambda);
    if (!(nu > 0.0))
        throw std::invalid_argument("picard_solve: mu must exceed the oscillation threshold");

    const TranslatedMap map(prm, pstar);
    const double h = 2.0 * M_PI / static_cast<double>(M);
    std::vector<double> thetas(M), cs(M), sn(M);
    for (std::size_t i = 0; i < M; ++i) {
        thetas[i] = h * static_cast<double>(i);
        cs[i] = std::cos(thetas[i]);
        sn[i] = std::sin(thetas[i]);
    }

    PolarCurve curve;
    curve.nu = nu;
    curve.center = pstar;
    curve.thetas = thetas;
    curve.rhos.assign(M, nu);

    // One forward sweep: map every graph sample (theta_i, rho_i) to its
    // image (Theta_i, R_i), then re-interpolate the image samples onto the
    // uniform grid. The forward direction is the dynamically stable one for
    // an attracting loop; sweeping the rearranged form rho = rho(Theta)/U
    // instead contracts every graph to the center.
    std::vector<double> ang(M), val(M), next(M);
    std::vector<std::size_t> order(M);
    for (std::size_t it = 0; it < max_iter; ++it) {
        double peak = 0.0;
        for (std::size_t i = 0; i < M; ++i) {
            const double r = curve.rhos[i];
            if (!(r > 0.0)) throw analysis_error("picard_solve: curve collapsed to the center");
            const Point img = map.apply(r * cs[i], r * sn[i]);
            const double R = norm(img);
            if (!(R > 0.0)) throw analysis_error("picard_solve: curve collapsed to the center");
            ang[i] = wrap_two_pi(branch_angle(thetas[i], std::atan2(img.y, img.x)));
            val[i] = R;
            peak = std::max(peak, R);
        }
        if (!std::isfinite(peak) || peak > 1.0)
            throw analysis_error("picard_solve: no invariant curve of small radius found");

        // the image angles of a closed graph are cyclically ascending, so a
        // rotation usually suffices; fall back to a sort if the sweep has
        // distorted them out of order
        std::size_t drops = 0, start = 0;
        for (std::size_t i = 0; i < M; ++i) {
            const std::size_t j = i + 1 == M ? 0 : i + 1;
            if (ang[j] < ang[i]) {
                ++drops;
                start = j;
            }
        }
        for (std::size_t i = 0; i < M; ++i) order[i] = (start + i) % M;
        if (drops > 1)
            std::sort(order.begin(), order.end(),
                      [&](std::size_t a, std::size_t b) { return ang[a] < ang[b]; });

        // cubic Lagrange through the four image samples around each grid
        // angle; the sample angles are offset into (-pi, pi] about the target
        // so the wrap never enters the node differences
        double diff = 0.0;
        std::size_t k = 0;
        for (std::size_t jj = 0; jj < M; ++jj) {
            const double phi = thetas[jj];
            while (k + 1 < M && ang[order[k + 1]] <= phi) ++k;
            std::size_t base = k;
            if (ang[order[k]] > phi) base = M - 1;  // before the first sample: wrap
            double d[4], v[4];
            bool degenerate = false;
            for (int s = 0; s < 4; ++s) {
                const std::size_t idx = order[(base + M - 1 + s) % M];
                double off = ang[idx] - phi;
                if (off <= -M_PI) off += 2.0 * M_PI;
                if (off > M_PI) off -= 2.0 * M_PI;
                d[s] = off;
                v[s] = val[idx];
            }
            double acc = 0.0;
            for (int s = 0; s < 4 && !degenerate; ++s) {
                double w = v[s];
                for (int m2 = 0; m2 < 4; ++m2) {
                    if (m2 == s) continue;
                    const double den = d[s] - d[m2];
                    if (std::fabs(den) < 1e-15) {
                        degenerate = true;
                        break;
                    }
                    w *= -d[m2] / den;
                }
                acc += w;
            }
            if (degenerate) {  // coincident samples: fall back to the nearest
                int best = 0;
                for (int s = 1; s < 4; ++s)
                    if (std::fabs(d[s]) < std::fabs(d[best])) best = s;
                acc = v[best];
            }
            next[jj] = acc;
            diff = std::max(diff, std::fabs(next[jj] - curve.rhos[jj]));
        }
        curve.rhos.swap(next);
        curve.iteration_diffs.push_back(diff);
        if (!std::isfinite(diff))
            throw analysis_error("picard_solve: no invariant curve of small radius found");
        if (diff < tol) {
            curve.converged = true;
            break;
        }
    }

    curve.residual = invariance_residual(prm, curve);
    return curve;
}

double invariance_residual(const Params& prm, const PolarCurve& curve) {
    require_fixed_center(prm, curve.center, "invariance_residual");
    if (curve.thetas.size() != curve.rhos.size() || curve.thetas.size() < 3)
        throw std::invalid_argument("invariance_residual: malformed curve");

    std::vector<double> thetas = curve.thetas, rhos = curve.rhos;
    canonicalize(thetas, rhos);

    const TranslatedMap map(prm, curve.center);
    double worst = 0.0;
    for (std::size_t i = 0; i < thetas.size(); ++i) {
        const Point img = map.apply(rhos[i] * std::cos(thetas[i]), rhos[i] * std::sin(thetas[i]));
        const double theta_img = branch_angle(thetas[i], std::atan2(img.y, img.x));
        const double rho_img = interp_rho(thetas, rhos, theta_img);
        const Point on_curve{rho_img * std::cos(theta_img), rho_img * std::sin(theta_img)};
        worst = std::max(worst, distance(img, on_curve));
    }
    return worst;
}

PointCloud attracting_set(const Params& prm, Point seed, std::size_t transient,
                          std::size_t samples) {
    PointCloud cloud;
    Point p = seed;
    for (std::size_t k = 0; k < transient; ++k) {
        p = step(prm, p);
        if (!finite_in_range(p)) {
            cloud.escaped = true;
            return cloud;
        }
    }
    cloud.points.reserve(samples);
    for (std::size_t k = 0; k < samples; ++k) {
        p = step(prm, p);
        if (!finite_in_range(p)) {
            cloud.escaped = true;
            return cloud;
        }
        cloud.points.push_back(p);
    }
    return cloud;
}

RotationEstimate rotation_number(const Params& prm, Point pstar, Point seed, std::size_t n) {
    require_fixed_center(prm, pstar, "rotation_number");
    if (n < 1000) throw std::invalid_argument("rotation_number: need at least 1000 iterates");

    Point p = seed;
    Point v = p - pstar;
    if (norm(v) < 1e-12) throw analysis_error("rotation_number: seed coincides with the center");
    double theta = std::atan2(v.y, v.x);

    double sum = 0.0, sumsq = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        p = step(prm, p);
        if (!finite_in_range(p)) throw escape_error("rotation_number: orbit escaped");
        v = p - pstar;
        if (norm(v) < 1e-12)
            throw analysis_error("rotation_number: orbit collapsed into the center");
        const double lifted = branch_angle(theta, std::atan2(v.y, v.x));
        const double inc = (lifted - theta) / (2.0 * M_PI);
        sum += inc;
        sumsq += inc * inc;
        theta = lifted;
    }

    RotationEstimate est;
    est.n_iterates = n;
    const double mean = sum / static_cast<double>(n);
    est.value = mean - std::floor(mean);
    const double var = std::max(0.0, sumsq / static_cast<double>(n) - mean * mean);
    est.std_error = std::sqrt(var / static_cast<double>(n));
    return est;
}

std::optional<std::size_t> detect_cycle(const std::vector<Point>& tail, std::size_t max_period,
                                        double tol) {
    if (max_period < 1) throw std::invalid_argument("detect_cycle: max_period must be positive");
    if (tail.size() < 3 * max_period)
        throw std::invalid_argument("detect_cycle: tail shorter than 3 * max_period");
    for (std::size_t q = 1; q <= max_period; ++q) {
        bool ok = true;
        for (std::size_t i = 0; i + q < tail.size() && ok; ++i)
            ok = distance(tail[i + q], tail[i]) < tol;
        if (ok) return q;
    }
    return std::nullopt;
}

namespace {

// uniform-cell spatial index over the cloud for neighbour queries
class GridIndex {
  public:
    GridIndex(const std::vector<Point>& pts, double cell) : cell_(cell) {
        for (std::size_t i = 0; i < pts.size(); ++i) cells_[key(pts[i])].push_back(i);
    }

    // all points in the 3x3 block of cells around p
    template <typename F>
    void for_neighbourhood(Point p, F&& f) const {
        const auto [cx, cy] = coords(p);
        for (long dx = -1; dx <= 1; ++dx)
            for (long dy = -1; dy <= 1; ++dy) visit(cx + dx, cy + dy, f);
    }

    // points in cells at Chebyshev distance exactly d from p's cell; once
    // shells 0..d are scanned, any unscanned point is at least d*cell away
    template <typename F>
    void for_shell(Point p, long d, F&& f) const {
        const auto [cx, cy] = coords(p);
        if (d == 0) {
            visit(cx, cy, f);
            return;
        }
        for (long dx = -d; dx <= d; ++dx) {
            visit(cx + dx, cy - d, f);
            visit(cx + dx, cy + d, f);
        }
        for (long dy = -d + 1; dy <= d - 1; ++dy) {
            visit(cx - d, cy + dy, f);
            visit(cx + d, cy + dy, f);
        }
    }

    double cell() const { return cell_; }
    std::uint64_t key_of(Point p) const { return key(p); }

  private:
    template <typename F>
    void visit(long x, long y, F&& f) const {
        const auto it = cells_.find(pack(x, y));
        if (it == cells_.end()) return;
        for (std::size_t i : it->second) f(i);
    }
    std::pair<long, long> coords(Point p) const {
        return {static_cast<long>(std::floor(p.x / cell_)),
                static_cast<long>(std::floor(p.y / cell_))};
    }
    static std::uint64_t pack(long x, long y) {
        return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(x)) << 32) |
               static_cast<std::uint64_t>(static_cast<std::uint32_t>(y));
    }
    std::uint64_t key(Point p) const {
        const auto [x, y] = coords(p);
        return pack(x, y);
    }

    double cell_;
    std::unordered_map<std::uint64_t, std::vector<std::size_t>> cells_;
};

double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + mid, v.end());
    return v[mid];
}

struct UnionFind {
    std::vector<std::size_t> parent;
    explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    std::size_t find(std::size_t i) {
        while (parent[i] != i) i = parent[i] = parent[parent[i]];
        return i;
    }
    void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

// a cluster closes into a loop when no angular gap about its centroid exceeds
// 10x the baseline; the baseline is the median gap relaxed by the link scale
// that formed the cluster, because a connected chain can only leave chord
// gaps up to that scale
bool cluster_is_loop(const std::vector<Point>& pts, double link) {
    if (pts.size() < 8) return false;
    Point centroid{0.0, 0.0};
    for (const Point& p : pts) centroid = centroid + p;
    centroid = (1.0 / static_cast<double>(pts.size())) * centroid;

    std::vector<double> angles, radii;
    angles.reserve(pts.size());
    radii.reserve(pts.size());
    for (const Point& p : pts) {
        angles.push_back(std::atan2(p.y - centroid.y, p.x - centroid.x));
        radii.push_back(distance(p, centroid));
    }
    std::sort(angles.begin(), angles.end());
    // a loop's radius dwarfs the scale that linked it; short arclets and
    // compact blobs have radii comparable to the link and are rejected here
    const double r_med = median_of(radii);
    if (!(r_med >= 10.0 * link)) return false;

    std::vector<double> gaps;
    gaps.reserve(angles.size());
    for (std::size_t i = 0; i + 1 < angles.size(); ++i) gaps.push_back(angles[i + 1] - angles[i]);
    gaps.push_back(angles.front() + 2.0 * M_PI - angles.back());

    const double baseline = std::max(median_of(gaps), link / r_med);
    const double worst = *std::max_element(gaps.begin(), gaps.end());
    return baseline > 0.0 && worst < 10.0 * baseline;
}

// single-linkage component labels at the given link scale
std::vector<std::size_t> cluster_labels(const std::vector<Point>& pts, double link) {
    const std::size_t m = pts.size();
    GridIndex grid(pts, link);
    UnionFind uf(m);
    for (std::size_t i = 0; i < m; ++i)
        grid.for_neighbourhood(pts[i], [&](std::size_t j) {
            if (j > i && distance(pts[i], pts[j]) <= link) uf.unite(i, j);
        });
    std::vector<std::size_t> label(m);
    for (std::size_t i = 0; i < m; ++i) label[i] = uf.find(i);
    return label;
}

std::size_t distinct_count(const std::vector<std::size_t>& label) {
    std::unordered_set<std::size_t> roots(label.begin(), label.end());
    return roots.size();
}

}  // namespace

LoopCount count_loops(const std::vector<Point>& cloud) {
    LoopCount lc;
    if (cloud.size() < 200) return lc;
    const std::size_t n = cloud.size();

    double min_x = cloud[0].x, max_x = cloud[0].x, min_y = cloud[0].y, max_y = cloud[0].y;
    for (const Point& p : cloud) {
        min_x = std::min(min_x, p.x);
        max_x = std::max(max_x, p.x);
        min_y = std::min(min_y, p.y);
        max_y = std::max(max_y, p.y);
    }
    const double diag = std::hypot(max_x - min_x, max_y - min_y);
    if (diag < 1e-8) {
        lc.conclusive = true;  // the cloud is numerical dust around one
        return lc;             // location: a point attractor, no loops
    }

    // collapse near-coincident samples first: an orbit locked onto a short
    // periodic cycle piles thousands of copies onto a handful of sites and
    // would otherwise drag the nearest-neighbour spacing to zero
    std::vector<Point> pts;
    {
        const double cell = diag * 1e-6;
        GridIndex bucket(cloud, cell);
        std::unordered_set<std::uint64_t> taken;
        for (const Point& p : cloud) {
            const auto k = bucket.key_of(p);
            if (taken.insert(k).second) pts.push_back(p);
        }
    }
    if (pts.size() < 8) {
        lc.conclusive = true;  // collapsed onto a handful of sites: a finite
        return lc;             // attractor, no loops
    }
    if (pts.size() < 200) return lc;  // too few distinct sites to judge either way
    const std::size_t m = pts.size();

    // nearest-neighbour spacing via an expanding shell search
    const double seed_cell = std::max(diag / std::sqrt(static_cast<double>(m)), 1e-300);
    GridIndex coarse(pts, seed_cell);
    std::vector<double> nn(m, std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < m; ++i) {
        for (long d = 0; d <= 4096; ++d) {
            coarse.for_shell(pts[i], d, [&](std::size_t j) {
                if (j != i) nn[i] = std::min(nn[i], distance(pts[i], pts[j]));
            });
            if (nn[i] <= seed_cell * static_cast<double>(d)) break;
        }
    }
    const double spacing = median_of(nn);
    if (!(spacing > 0.0)) return lc;

    // sweep the link scale upward by doublings and record the component
    // count at each; merging is monotone, so each count occupies one run
    struct Run {
        std::size_t count;
        double link;   // scale at which the count first appears
        int length;    // doublings survived
    };
    std::vector<Run> runs;
    for (double link = spacing; link <= diag; link *= 2.0) {
        const std::size_t c = distinct_count(cluster_labels(pts, link));
        if (!runs.empty() && runs.back().count == c) {
            ++runs.back().length;
        } else {
            runs.push_back({c, link, 1});
        }
        if (c == 1) {
            // one component stays one at every larger scale
            runs.back().length += static_cast<int>(std::floor(std::log2(diag / link)));
            break;
        }
    }

    // a count tied to a narrow scale band is a sampling artifact; demand
    // three doublings, then take the finest qualifying count whose clusters
    // all close into loops
    for (const Run& run : runs) {
        if (run.length < 3) continue;
        const std::vector<std::size_t> label = cluster_labels(pts, run.link);
        std::unordered_map<std::size_t, std::vector<Point>> clusters;
        for (std::size_t i = 0; i < m; ++i) clusters[label[i]].push_back(pts[i]);
        bool all_loops = true;
        for (const auto& [root, members] : clusters)
            if (!cluster_is_loop(members, run.link)) all_loops = false;
        if (all_loops) {
            lc.loops = static_cast<int>(clusters.size());
            lc.conclusive = true;
            return lc;
        }
    }

    // nothing qualified; report the most persistent count without vouching
    const auto best = std::max_element(runs.begin(), runs.end(),
                                       [](const Run& a, const Run& b) { return a.length < b.length; });
    if (best != runs.end()) lc.loops = static_cast<int>(best->count);
    return lc;
}

CascadeReport cascade_scan(double lambda, double nu_lo, double nu_hi, std::size_t steps,
                           const CascadeOptions& opts) {
    if (!(nu_lo > 0.0) || !(nu_hi >= nu_lo))
        throw std::invalid_argument("cascade_scan: need 0 < nu_lo <= nu_hi");
    if (steps < 2) throw std::invalid_argument("cascade_scan: need at least 2 steps");

    CascadeReport report;
    report.lambda = lambda;
    const double threshold = mu_h(lambda);

    int prev = 0;
    for (std::size_t k = 0; k < steps; ++k) {
        const double nu =
            nu_lo + (nu_hi - nu_lo) * static_cast<double>(k) / static_cast<double>(steps - 1);
        const Params prm(lambda, threshold + nu);
        const Point pstar = interior_fixed_point(prm);
        const Point seed = pstar + Point{std::max(2.0 * nu, 1e-4), 0.0};

        CascadeScanPoint sp;
        sp.nu = nu;
        // the normal contraction rate toward the attractor scales with nu,
        // so the settle time scales with 1/nu; grow the discard window
        // accordingly or slow scans near the threshold sample the approach
        // spiral instead of the attractor
        const auto settle = static_cast<std::size_t>(std::min(1e7, std::ceil(40.0 / nu)));
        const std::size_t transient = std::max(opts.transient, settle);
        const PointCloud cloud = attracting_set(prm, seed, transient, opts.samples);
        if (!cloud.escaped) {
            const LoopCount lc = count_loops(cloud.points);
            sp.components = lc.loops;
            sp.conclusive = lc.conclusive;
        }
        report.scan.push_back(sp);

        if (!sp.conclusive) continue;
        if (prev == 0) {
            report.cycle_multiplicities.push_back(sp.components);
        } else if (sp.components != prev) {
            if (sp.components == 2 * prev) {
                report.nu_breaks.push_back(nu);
                report.cycle_multiplicities.push_back(sp.components);
            } else {
                report.notes.push_back("non-doubling transition " + std::to_string(prev) + " -> " +
                                       std::to_string(sp.components) +
                                       " at nu = " + std::to_string(nu));
            }
        }
        prev = sp.components;
    }
    return report;
}

}  // namespace ffmap
