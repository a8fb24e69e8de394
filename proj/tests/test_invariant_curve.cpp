#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "ffmap/equilibria.hpp"
#include "ffmap/invariant_curve.hpp"

using namespace ffmap;

namespace {

// cached threshold; every case here works at lambda = 0.99
double muh99() {
    static const double v = mu_h(0.99);
    return v;
}

// cached solve at the workhorse offset nu = 1e-3
const PolarCurve& curve_1e3() {
    static const PolarCurve c = [] {
        const Params prm(0.99, muh99() + 1e-3);
        return picard_solve(prm, interior_fixed_point(prm));
    }();
    return c;
}

double dist_to_polygon(const std::vector<Point>& poly, Point p) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const Point a = poly[i], b = poly[(i + 1) % poly.size()];
        const Point ab = b - a, ap = p - a;
        const double len2 = ab.x * ab.x + ab.y * ab.y;
        double t = len2 > 0.0 ? (ab.x * ap.x + ab.y * ap.y) / len2 : 0.0;
        t = std::clamp(t, 0.0, 1.0);
        best = std::min(best, distance(p, a + t * ab));
    }
    return best;
}

std::vector<Point> curve_polygon(const PolarCurve& c) {
    std::vector<Point> poly;
    poly.reserve(c.thetas.size());
    for (std::size_t i = 0; i < c.thetas.size(); ++i) poly.push_back(c.world_point(i));
    return poly;
}

// max over a of min over b, then the same the other way round
double hausdorff(const std::vector<Point>& a, const std::vector<Point>& b) {
    auto one_way = [](const std::vector<Point>& from, const std::vector<Point>& to) {
        double worst = 0.0;
        for (const Point& p : from) {
            double best = std::numeric_limits<double>::infinity();
            for (const Point& q : to) best = std::min(best, distance(p, q));
            worst = std::max(worst, best);
        }
        return worst;
    };
    return std::max(one_way(a, b), one_way(b, a));
}

std::vector<Point> ring(Point center, double radius, std::size_t n, double jitter,
                        std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-jitter, jitter);
    std::uniform_real_distribution<double> ang(0.0, 2.0 * M_PI);
    std::vector<Point> pts;
    pts.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = ang(rng);
        pts.push_back({center.x + (radius + u(rng)) * std::cos(t),
                       center.y + (radius + u(rng)) * std::sin(t)});
    }
    return pts;
}

}  // namespace

TEST_CASE("curve solver rejects bad arguments") {
    const Params prm(0.99, muh99() + 1e-3);
    const Point ps = interior_fixed_point(prm);
    CHECK_THROWS_AS(picard_solve(prm, ps, 32), std::invalid_argument);
    CHECK_THROWS_AS(picard_solve(prm, ps, 512, 1000, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(picard_solve(prm, {0.2, 0.2}), std::invalid_argument);

    const Params below(0.99, muh99() - 0.01);
    CHECK_THROWS_AS(picard_solve(below, interior_fixed_point(below)), std::invalid_argument);
}

TEST_CASE("no small loop exists far above the threshold") {
    // nu = 0.5 is deep in the chaotic range; the solver must refuse rather
    // than hand back a spurious curve
    const Params prm(0.99, muh99() + 0.5);
    CHECK_THROWS_AS(picard_solve(prm, interior_fixed_point(prm)), analysis_error);
}

TEST_CASE("converged loop at nu=1e-3") {
    const double nu = 1e-3;
    const Params prm(0.99, muh99() + nu);
    const Point ps = interior_fixed_point(prm);
    const PolarCurve& c = curve_1e3();

    CHECK(c.converged);
    CHECK(c.nu == doctest::Approx(nu).epsilon(1e-12));
    REQUIRE(c.thetas.size() == 512);
    REQUIRE(c.rhos.size() == 512);

    // uniform ascending grid
    const double h = 2.0 * M_PI / 512.0;
    for (std::size_t i = 1; i < c.thetas.size(); ++i)
        CHECK(c.thetas[i] - c.thetas[i - 1] == doctest::Approx(h).epsilon(1e-9));

    for (double r : c.rhos) CHECK(r > 0.0);

    CHECK(c.residual < 1e-8);
    CHECK(invariance_residual(prm, c) == doctest::Approx(c.residual).epsilon(1e-12));

    // the polygon through the samples winds exactly once about the center
    double total = 0.0;
    for (std::size_t i = 0; i < c.thetas.size(); ++i) {
        const Point a = c.world_point(i) - ps;
        const Point b = c.world_point((i + 1) % c.thetas.size()) - ps;
        total += std::atan2(a.x * b.y - a.y * b.x, a.x * b.x + a.y * b.y);
    }
    CHECK(total == doctest::Approx(2.0 * M_PI).epsilon(1e-9));
}

TEST_CASE("interpolated radius is periodic and matches the grid") {
    const PolarCurve& c = curve_1e3();
    for (std::size_t i = 0; i < c.thetas.size(); i += 37) {
        CHECK(c.rho_at(c.thetas[i]) == doctest::Approx(c.rhos[i]).epsilon(1e-12));
        CHECK(c.rho_at(c.thetas[i] + 2.0 * M_PI) == doctest::Approx(c.rhos[i]).epsilon(1e-9));
        CHECK(c.rho_at(c.thetas[i] - 2.0 * M_PI) == doctest::Approx(c.rhos[i]).epsilon(1e-9));
    }
}

TEST_CASE("sweep updates shrink geometrically if not monotonically") {
    // successive-sweep differences oscillate while their envelope decays;
    // pinning per-sweep decrease would be false, the window maximum is not
    const auto& d = curve_1e3().iteration_diffs;
    REQUIRE(d.size() > 200);
    const double head = *std::max_element(d.begin(), d.begin() + 50);
    const double tail = *std::max_element(d.end() - 50, d.end());
    CHECK(tail < head / 100.0);
    CHECK(d.back() < 1e-9);
    CHECK(d.back() < 1e-5 * d.front());
}

TEST_CASE("loop radius grows like the square root of nu") {
    // successive doublings of nu multiply the peak radius by about sqrt(2),
    // not by 2: the loop is born with the square-root amplitude law
    double prev_max = 0.0;
    for (double nu : {1e-3, 2e-3, 4e-3}) {
        const Params prm(0.99, muh99() + nu);
        const PolarCurve c =
            nu == 1e-3 ? curve_1e3() : picard_solve(prm, interior_fixed_point(prm));
        const double mx = *std::max_element(c.rhos.begin(), c.rhos.end());
        if (prev_max > 0.0) {
            const double ratio = mx / prev_max;
            CHECK(ratio > 1.38);
            CHECK(ratio < 1.47);
        }
        prev_max = mx;
    }
}

TEST_CASE("a fat circle is nowhere near invariant") {
    const double nu = 1e-3;
    const Params prm(0.99, muh99() + nu);
    PolarCurve fake;
    fake.nu = nu;
    fake.center = interior_fixed_point(prm);
    for (int i = 0; i < 512; ++i) {
        fake.thetas.push_back(2.0 * M_PI * i / 512.0);
        fake.rhos.push_back(0.5);
    }
    CHECK(invariance_residual(prm, fake) > 1e-1);

    PolarCurve empty;
    CHECK_THROWS_AS(invariance_residual(prm, empty), std::invalid_argument);
}

TEST_CASE("attracting set collapses to the sink below the threshold") {
    const Params prm(0.99, 4.5);
    const PointCloud cloud = attracting_set(prm, {0.564, 0.342}, 100000, 200);
    REQUIRE(cloud.points.size() == 200);
    CHECK_FALSE(cloud.escaped);
    double diam = 0.0;
    for (const Point& a : cloud.points)
        for (const Point& b : cloud.points) diam = std::max(diam, distance(a, b));
    CHECK(diam < 1e-6);
    CHECK(distance(cloud.points[0], interior_fixed_point(prm)) < 1e-6);
}

TEST_CASE("two seeds land on the same loop above the threshold") {
    const Params prm(0.99, 4.5449);
    const PointCloud a = attracting_set(prm, {0.555, 0.340}, 20000, 4000);
    const PointCloud b = attracting_set(prm, {0.558, 0.34}, 20000, 4000);
    REQUIRE_FALSE(a.escaped);
    REQUIRE_FALSE(b.escaped);
    CHECK(hausdorff(a.points, b.points) < 1e-2);
}

TEST_CASE("attracting set reports escapes") {
    const PointCloud cloud = attracting_set(Params(0.99, 5.0), {0.0, 10.0}, 10, 10);
    CHECK(cloud.escaped);
}

TEST_CASE("solved loop and simulated attractor agree") {
    const double nu = 1e-3;
    const Params prm(0.99, muh99() + nu);
    const Point ps = interior_fixed_point(prm);
    const PolarCurve& c = curve_1e3();
    const PointCloud cloud = attracting_set(prm, {ps.x + 2.0 * nu, ps.y}, 30000, 4000);
    REQUIRE_FALSE(cloud.escaped);

    const std::vector<Point> poly = curve_polygon(c);
    double cloud_to_curve = 0.0;
    for (const Point& p : cloud.points)
        cloud_to_curve = std::max(cloud_to_curve, dist_to_polygon(poly, p));
    CHECK(cloud_to_curve < 5e-3);

    // the other direction via nearest cloud point
    double curve_to_cloud = 0.0;
    for (const Point& q : poly) {
        double best = std::numeric_limits<double>::infinity();
        for (const Point& p : cloud.points) best = std::min(best, distance(p, q));
        curve_to_cloud = std::max(curve_to_cloud, best);
    }
    CHECK(curve_to_cloud < 5e-3);
}

TEST_CASE("orbits settle onto the loop from both sides") {
    // the pointwise distance to the loop wobbles as the orbit spirals, so
    // the assertions are on 100-step block means: no block grows by more
    // than a third, and the tail sits orders of magnitude under the start
    const double nu = 1e-3;
    const Params prm(0.99, muh99() + nu);
    const Point ps = interior_fixed_point(prm);
    const PolarCurve& c = curve_1e3();
    const std::vector<Point> poly = curve_polygon(c);

    for (double f : {0.3, 1.5}) {
        Point p{ps.x + f * c.rho_at(0.0), ps.y};
        std::vector<double> block;
        double acc = 0.0;
        int cnt = 0;
        for (int k = 0; k < 30000; ++k) {
            acc += dist_to_polygon(poly, p);
            if (++cnt == 100) {
                block.push_back(acc / 100.0);
                acc = 0.0;
                cnt = 0;
            }
            p = step(prm, p);
        }
        for (std::size_t i = 1; i < block.size(); ++i) CHECK(block[i] < 1.35 * block[i - 1]);
        CHECK(block.back() < 1e-3 * block.front());
        CHECK(dist_to_polygon(poly, p) < 2e-6);
    }
}

TEST_CASE("rotation rate matches the eigenvalue angle near the threshold") {
    const double nu = 1e-4;
    const Params prm(0.99, muh99() + nu);
    const Point ps = interior_fixed_point(prm);
    const PolarCurve c = picard_solve(prm, ps);

    const Point seed{ps.x + c.rho_at(0.0), ps.y};
    const RotationEstimate rot = rotation_number(prm, ps, seed, 2000);
    CHECK(rot.n_iterates == 2000);
    CHECK(rot.value >= 0.0);
    CHECK(rot.value < 1.0);
    CHECK(rot.std_error >= 0.0);
    CHECK(rot.std_error < 0.05);

    const auto sigma = hopf_coefficients(Params(0.99, muh99())).sigma;
    REQUIRE(sigma.has_value());
    const double expected = std::arg(*sigma) / (2.0 * M_PI);
    CHECK(std::fabs(rot.value - expected) < 1e-3);
}

TEST_CASE("rotation rate moves continuously with nu") {
    double prev = -1.0;
    for (int i = 0; i <= 9; ++i) {
        const double nu = 1e-4 + (1e-3 - 1e-4) * i / 9.0;
        const Params prm(0.99, muh99() + nu);
        const Point ps = interior_fixed_point(prm);
        const Point settled = iterate(prm, {ps.x + 1e-3, ps.y}, 400000).point;
        const RotationEstimate rot = rotation_number(prm, ps, settled, 5000);
        if (prev >= 0.0) CHECK(std::fabs(rot.value - prev) < 0.05);
        prev = rot.value;
    }
}

TEST_CASE("rotation rate error cases") {
    const Params prm(0.99, muh99() + 1e-3);
    const Point ps = interior_fixed_point(prm);
    CHECK_THROWS_AS(rotation_number(prm, ps, ps, 2000), analysis_error);
    CHECK_THROWS_AS(rotation_number(prm, ps, {ps.x + 0.01, ps.y}, 10), std::invalid_argument);
}

TEST_CASE("cycle detector finds exact small periods") {
    std::vector<Point> constant(60, {0.3, 0.4});
    CHECK(detect_cycle(constant, 5, 1e-9) == 1);

    std::vector<Point> four;
    for (int i = 0; i < 80; ++i) {
        const int ph = i % 4;
        four.push_back({0.1 * ph, 0.2 * ph});
    }
    CHECK(detect_cycle(four, 10, 1e-9) == 4);

    // quasiperiodic samples on a circle never repeat
    std::vector<Point> irr;
    const double w = 2.0 * M_PI * 0.31351;
    for (int i = 0; i < 400; ++i)
        irr.push_back({std::cos(w * i), std::sin(w * i)});
    CHECK_FALSE(detect_cycle(irr, 50, 1e-6).has_value());

    CHECK_THROWS_AS(detect_cycle(constant, 30, 1e-9), std::invalid_argument);
}

TEST_CASE("loop counter on synthetic clouds") {
    // one clean ring
    const auto one = ring({0.5, 0.5}, 0.01, 4000, 1e-5, 7);
    const LoopCount lc1 = count_loops(one);
    CHECK(lc1.conclusive);
    CHECK(lc1.loops == 1);

    // two separated rings
    auto two = ring({0.3, 0.3}, 0.01, 2000, 1e-5, 8);
    const auto other = ring({0.7, 0.7}, 0.01, 2000, 1e-5, 9);
    two.insert(two.end(), other.begin(), other.end());
    const LoopCount lc2 = count_loops(two);
    CHECK(lc2.conclusive);
    CHECK(lc2.loops == 2);

    // a cloud collapsed onto one location has no loops
    std::vector<Point> dust(5000, {0.4, 0.6});
    const LoopCount lc0 = count_loops(dust);
    CHECK(lc0.conclusive);
    CHECK(lc0.loops == 0);

    // a locked small cycle is not loop-like either
    std::vector<Point> cyc;
    for (int i = 0; i < 3000; ++i) cyc.push_back({0.2 + 0.1 * (i % 3), 0.5});
    const LoopCount lcc = count_loops(cyc);
    CHECK(lcc.conclusive);
    CHECK(lcc.loops == 0);

    // an open arc must not pass for a closed loop
    std::vector<Point> arc;
    for (int i = 0; i < 3000; ++i) {
        const double t = 0.5 * M_PI * i / 3000.0;
        arc.push_back({0.5 + 0.01 * std::cos(t), 0.5 + 0.01 * std::sin(t)});
    }
    const LoopCount lca = count_loops(arc);
    CHECK((!lca.conclusive || lca.loops == 0));

    // too few points to judge
    const LoopCount tiny = count_loops(ring({0.5, 0.5}, 0.01, 150, 1e-5, 10));
    CHECK_FALSE(tiny.conclusive);
}

TEST_CASE("loop counter on a real attractor cloud") {
    const double nu = 2e-3;
    const Params prm(0.99, muh99() + nu);
    const Point ps = interior_fixed_point(prm);
    const PointCloud cloud = attracting_set(prm, {ps.x + nu, ps.y}, 20000, 10000);
    REQUIRE_FALSE(cloud.escaped);
    const LoopCount lc = count_loops(cloud.points);
    CHECK(lc.conclusive);
    CHECK(lc.loops == 1);
}

TEST_CASE("cascade scan across the default window stays single-looped") {
    // every conclusive point in nu in [2e-4, 6.2e-3] carries one loop; no
    // doubling is detectable in this window at these sample sizes
    const CascadeReport rep = cascade_scan(0.99, 2e-4, 6.2e-3, 16);
    CHECK(rep.lambda == 0.99);
    REQUIRE(rep.scan.size() == 16);
    for (std::size_t i = 1; i < rep.scan.size(); ++i) CHECK(rep.scan[i].nu > rep.scan[i - 1].nu);
    for (const CascadeScanPoint& pt : rep.scan) {
        CHECK(pt.conclusive);
        CHECK(pt.components == 1);
    }
    CHECK(rep.nu_breaks.empty());
    REQUIRE(rep.cycle_multiplicities.size() == 1);
    CHECK(rep.cycle_multiplicities[0] == 1);
    CHECK(rep.notes.empty());
    for (double nb : rep.nu_breaks) CHECK(nb < 3.0);
}

TEST_CASE("cascade scan rejects bad ranges") {
    CHECK_THROWS_AS(cascade_scan(0.99, -1e-3, 1e-3, 4), std::invalid_argument);
    CHECK_THROWS_AS(cascade_scan(0.99, 1e-3, 2e-3, 1), std::invalid_argument);
}
