#include "ffmap/chaos.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace ffmap {

LyapunovResult lyapunov(const Params& prm, Point seed, std::size_t n, std::size_t transient) {
    if (n == 0) throw std::invalid_argument("lyapunov: need at least one step");

    LyapunovResult res;
    res.n = n;
    res.transient = transient;
    res.seed = seed;

    const IterateResult settled = iterate(prm, seed, transient);
    if (settled.escaped) throw escape_error("lyapunov: orbit escaped during transient");
    Point p = settled.point;

    Point v1{1.0, 0.0}, v2{0.0, 1.0};
    double sum1 = 0.0, sum2 = 0.0, sum_det = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const Jacobian j = jacobian(prm, p);
        Point w1 = j.apply(v1), w2 = j.apply(v2);
        const double r1 = norm(w1);
        if (!(r1 > 0.0)) throw analysis_error("lyapunov: tangent frame degenerated");
        v1 = (1.0 / r1) * w1;
        const double proj = w2.x * v1.x + w2.y * v1.y;
        w2 = w2 - proj * v1;
        const double r2 = norm(w2);
        if (!(r2 > 0.0)) throw analysis_error("lyapunov: tangent frame degenerated");
        v2 = (1.0 / r2) * w2;
        sum1 += std::log(r1);
        sum2 += std::log(r2);
        sum_det += std::log(std::fabs(j.det()));

        p = step(prm, p);
        if (!finite_in_range(p)) throw escape_error("lyapunov: orbit escaped");
    }

    res.exponents = {sum1 / static_cast<double>(n), sum2 / static_cast<double>(n)};
    if (res.exponents[0] < res.exponents[1]) std::swap(res.exponents[0], res.exponents[1]);
    res.mean_log_det = sum_det / static_cast<double>(n);
    return res;
}

double EllipseRegion::normalized_radius(Point p) const {
    const double dx = p.x - center.x, dy = p.y - center.y;
    const double rx = major_axis_vertical ? semi_minor : semi_major;
    const double ry = major_axis_vertical ? semi_major : semi_minor;
    const double q = (dx / rx) * (dx / rx) + (dy / ry) * (dy / ry);
    return std::sqrt(q);
}

namespace {

constexpr double kContainmentSlack = 1.05;  // the named witness points sit ~1.8% outside

// distance from p to the segment (0,0)-(1,1), plus which side p lies on
double diagonal_distance(Point p, int& side) {
    side = p.y > p.x ? 1 : (p.y < p.x ? -1 : 0);
    const double t = std::clamp((p.x + p.y) / 2.0, 0.0, 1.0);
    return distance(p, {t, t});
}

std::vector<Point> decimate(const std::vector<Point>& pts, std::size_t cap) {
    if (pts.size() <= cap) return pts;
    std::vector<Point> out;
    out.reserve(cap);
    const std::size_t stride = (pts.size() + cap - 1) / cap;
    for (std::size_t i = 0; i < pts.size(); i += stride) out.push_back(pts[i]);
    return out;
}

// 8-connected component sizes of the marked pixels, after binary dilation
std::vector<int> component_sizes(std::vector<std::uint8_t>& mask, int w, int h, int dilation) {
    if (dilation > 0) {
        std::vector<std::uint8_t> grown(mask.size(), 0);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                if (!mask[static_cast<std::size_t>(y) * w + x]) continue;
                for (int dy = -dilation; dy <= dilation; ++dy)
                    for (int dx = -dilation; dx <= dilation; ++dx) {
                        const int nx = x + dx, ny = y + dy;
                        if (nx >= 0 && nx < w && ny >= 0 && ny < h)
                            grown[static_cast<std::size_t>(ny) * w + nx] = 1;
                    }
            }
        mask.swap(grown);
    }

    std::vector<int> sizes;
    std::vector<std::int32_t> stack;
    for (int y0 = 0; y0 < h; ++y0)
        for (int x0 = 0; x0 < w; ++x0) {
            if (!mask[static_cast<std::size_t>(y0) * w + x0]) continue;
            int count = 0;
            stack.push_back(y0 * w + x0);
            mask[static_cast<std::size_t>(y0) * w + x0] = 0;
            while (!stack.empty()) {
                const int idx = stack.back();
                stack.pop_back();
                ++count;
                const int x = idx % w, y = idx / w;
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) {
                        const int nx = x + dx, ny = y + dy;
                        if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
                        if (mask[static_cast<std::size_t>(ny) * w + nx]) {
                            mask[static_cast<std::size_t>(ny) * w + nx] = 0;
                            stack.push_back(ny * w + nx);
                        }
                    }
            }
            sizes.push_back(count);
        }
    std::sort(sizes.rbegin(), sizes.rend());
    return sizes;
}

}  // namespace

namespace {

HorseshoeWitness witness_impl(const Params& prm, const HorseshoeOptions& opts) {
    HorseshoeWitness w;
    w.domain = EllipseRegion{{0.95, 0.1}, 0.13, 0.075, true};
    w.resolution = opts.resolution;

    // the two forward images the folding argument hinges on
    const struct {
        Point in, out;
    } anchors[] = {{{1.0, 0.2}, {0.8, 0.8}}, {{0.8, 0.8}, {0.2016, 0.0}}};
    for (const auto& a : anchors) {
        KeyPointCheck chk;
        chk.input = a.in;
        chk.expected = a.out;
        chk.observed = step(prm, a.in);
        chk.pass = std::fabs(chk.observed.x - a.out.x) < 1e-12 &&
                   std::fabs(chk.observed.y - a.out.y) < 1e-12;
        w.key_points.push_back(chk);
    }

    w.containment_radii = {w.domain.normalized_radius({1.0, 0.0}),
                           w.domain.normalized_radius({1.0, 0.2})};
    w.containment_ok = w.containment_radii[0] <= kContainmentSlack &&
                       w.containment_radii[1] <= kContainmentSlack;

    if (opts.resolution < 200) {
        w.inconclusive = true;
        w.note = "resolution below 200 samples; geometric stages skipped";
        return w;
    }

    // sample the disk: a boundary ring plus a filled grid over the bounding box
    const double rx = w.domain.major_axis_vertical ? w.domain.semi_minor : w.domain.semi_major;
    const double ry = w.domain.major_axis_vertical ? w.domain.semi_major : w.domain.semi_minor;
    std::vector<Point> disk;
    disk.reserve(opts.resolution + 1024);
    const std::size_t nb = std::max<std::size_t>(256, opts.resolution / 100);
    for (std::size_t k = 0; k < nb; ++k) {
        const double t = 2.0 * M_PI * static_cast<double>(k) / static_cast<double>(nb);
        disk.push_back({w.domain.center.x + rx * std::cos(t), w.domain.center.y + ry * std::sin(t)});
    }
    const std::size_t fill = opts.resolution > nb ? opts.resolution - nb : 0;
    // pi/4 of the bounding box lies inside the ellipse
    const std::size_t side = std::max<std::size_t>(
        2, static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(fill) * 4.0 / M_PI))));
    for (std::size_t iy = 0; iy < side; ++iy)
        for (std::size_t ix = 0; ix < side; ++ix) {
            const Point p{
                w.domain.center.x + rx * (2.0 * static_cast<double>(ix) / (side - 1) - 1.0),
                w.domain.center.y + ry * (2.0 * static_cast<double>(iy) / (side - 1) - 1.0)};
            if (w.domain.normalized_radius(p) <= 1.0) disk.push_back(p);
        }

    std::vector<Point> image1(disk.size()), image2(disk.size());
    for (std::size_t i = 0; i < disk.size(); ++i) {
        image1[i] = step(prm, disk[i]);
        image2[i] = step(prm, image1[i]);
    }

    // first image: a thin sliver along y = mu x (1 - x) that crosses the
    // diagonal near (0.8, 0.8)
    bool above = false, below = false;
    double parab = 0.0;
    for (const Point& p : image1) {
        parab = std::max(parab, std::fabs(p.y - prm.mu * p.x * (1.0 - p.x)));
        int side_flag = 0;
        const double d = diagonal_distance(p, side_flag);
        if (d < 1e-2 && distance(p, {0.8, 0.8}) < 0.15) {
            if (side_flag > 0) above = true;
            if (side_flag < 0) below = true;
        }
    }
    w.diagonal_crossing = above && below;
    w.max_parabola_distance = parab;

    // second image: count pieces inside the strip around the bottom edge
    const double x_lo = -opts.hull_x_margin, x_hi = 1.0 + opts.hull_x_margin;
    const double y_lo = -opts.hull_half_height, y_hi = opts.hull_half_height;
    const int g = opts.grid;
    std::vector<std::uint8_t> mask(static_cast<std::size_t>(g) * g, 0);
    std::size_t marked = 0;
    for (const Point& p : image2) {
        if (p.x < x_lo || p.x > x_hi || p.y < y_lo || p.y > y_hi) continue;
        int ix = static_cast<int>((p.x - x_lo) / (x_hi - x_lo) * g);
        int iy = static_cast<int>((p.y - y_lo) / (y_hi - y_lo) * g);
        ix = std::clamp(ix, 0, g - 1);
        iy = std::clamp(iy, 0, g - 1);
        auto& cell = mask[static_cast<std::size_t>(iy) * g + ix];
        marked += cell == 0;
        cell = 1;
    }
    if (marked == 0) {
        w.inconclusive = true;
        w.note = "second image missed the bottom strip entirely";
    } else {
        const std::vector<int> sizes = component_sizes(mask, g, g, opts.dilation);
        for (int s : sizes)
            if (static_cast<std::size_t>(s) >= opts.min_component_pixels) {
                w.component_sizes.push_back(s);
                ++w.component_count;
            }
    }

    w.domain_sample = decimate(disk, 4000);
    w.image1_sample = decimate(image1, 20000);
    w.image2_sample = decimate(image2, 20000);
    return w;
}

}  // namespace

HorseshoeWitness horseshoe_witness(const Params& prm, const HorseshoeOptions& opts) {
    if (prm.lambda != 0.99 || prm.mu != 5.0)
        throw std::invalid_argument("horseshoe_witness: argument applies to lambda=0.99, mu=5 only");
    if (opts.grid < 16) throw std::invalid_argument("horseshoe_witness: grid too coarse");
    return witness_impl(prm, opts);
}

double sensitivity(const Params& prm, Point p, double delta0, std::size_t n, Point direction) {
    if (!(delta0 > 0.0)) throw std::invalid_argument("sensitivity: delta0 must be positive");
    if (n == 0) throw std::invalid_argument("sensitivity: need at least one step");
    const double len = norm(direction);
    if (!(len > 0.0)) throw std::invalid_argument("sensitivity: direction must be nonzero");

    Point a = p, b = p + (delta0 / len) * direction;
    for (std::size_t k = 0; k < n; ++k) {
        a = step(prm, a);
        b = step(prm, b);
        if (!finite_in_range(a) || !finite_in_range(b))
            throw escape_error("sensitivity: orbit escaped");
    }
    return std::log(distance(a, b) / delta0) / static_cast<double>(n);
}

double sensitivity(const Params& prm, Point p, double delta0, std::size_t n,
                   std::uint64_t rng_seed) {
    std::mt19937_64 rng(rng_seed);
    // 53 high bits give a uniform double in [0, 1) identically on every platform
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    const double ang = 2.0 * M_PI * u;
    return sensitivity(prm, p, delta0, n, Point{std::cos(ang), std::sin(ang)});
}

Point SplatterHistogram::cell_center(int ix, int iy) const {
    return {(static_cast<double>(ix) + 0.5) / bins, (static_cast<double>(iy) + 0.5) / bins};
}

std::uint64_t SplatterHistogram::top_decile_threshold() const {
    std::vector<std::uint64_t> nz;
    for (std::uint64_t c : counts)
        if (c > 0) nz.push_back(c);
    if (nz.empty()) return 0;
    const std::size_t idx = nz.size() * 9 / 10;
    std::nth_element(nz.begin(), nz.begin() + std::min(idx, nz.size() - 1), nz.end());
    return nz[std::min(idx, nz.size() - 1)];
}

bool SplatterHistogram::top_decile_cell_within(Point p, double radius) const {
    const std::uint64_t thresh = top_decile_threshold();
    if (thresh == 0) return false;
    for (int iy = 0; iy < bins; ++iy)
        for (int ix = 0; ix < bins; ++ix)
            if (at(ix, iy) >= thresh && distance(cell_center(ix, iy), p) <= radius) return true;
    return false;
}

SplatterHistogram splatter_stats(const Params& prm, const std::vector<Point>& seeds,
                                 std::size_t n, int bins) {
    if (bins < 2) throw std::invalid_argument("splatter_stats: need at least 2 bins");
    if (seeds.empty()) throw std::invalid_argument("splatter_stats: need at least one seed");
    if (n == 0) throw std::invalid_argument("splatter_stats: need at least one step");

    SplatterHistogram h;
    h.bins = bins;
    h.counts.assign(static_cast<std::size_t>(bins) * bins, 0);

    for (const Point& seed : seeds) {
        Point p = seed;
        for (std::size_t k = 0; k < n; ++k) {
            p = step(prm, p);
            if (!finite_in_range(p)) {
                h.excluded_samples += n - k;  // this and all remaining samples
                ++h.escaped_orbits;
                break;
            }
            if (p.x < 0.0 || p.x > 1.0 || p.y < 0.0 || p.y > 1.0) {
                ++h.excluded_samples;
                continue;
            }
            const int ix = std::min(bins - 1, static_cast<int>(p.x * bins));
            const int iy = std::min(bins - 1, static_cast<int>(p.y * bins));
            ++h.counts[static_cast<std::size_t>(iy) * bins + ix];
            ++h.total_binned;
        }
    }
    return h;
}

}  // namespace ffmap
