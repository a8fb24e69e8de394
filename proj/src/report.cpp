#include "ffmap/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace ffmap::report {

std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    // drop digits while the value still reads back exactly
    for (int prec = 1; prec < 17; ++prec) {
        char shorter[40];
        std::snprintf(shorter, sizeof shorter, "%.*g", prec, v);
        double back = 0.0;
        std::sscanf(shorter, "%lf", &back);
        if (back == v) return shorter;
    }
    return buf;
}

void CsvWriter::comment(const std::string& line) { os_ << "# " << line << '\n'; }

void CsvWriter::columns(const std::vector<std::string>& names) {
    for (std::size_t i = 0; i < names.size(); ++i) os_ << (i ? "," : "") << names[i];
    os_ << '\n';
}

void CsvWriter::row(const std::vector<double>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) os_ << (i ? "," : "") << g17(values[i]);
    os_ << '\n';
}

void SvgPlot::add_header(const std::string& line) { header_lines_.push_back(line); }

void SvgPlot::add_points(const std::vector<Point>& pts, const std::string& color, double radius) {
    point_sets_.push_back({pts, color, radius});
}

void SvgPlot::add_polyline(const std::vector<Point>& pts, const std::string& color, double width) {
    polylines_.push_back({pts, color, width});
}

void SvgPlot::add_marker(Point p, const std::string& color) {
    markers_.push_back(p);
    marker_colors_.push_back(color);
}

namespace {

std::string px(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

}  // namespace

void SvgPlot::write(std::ostream& os) const {
    double x_lo = 0.0, x_hi = 1.0, y_lo = 0.0, y_hi = 1.0;
    auto grow = [&](const std::vector<Point>& pts) {
        for (const Point& p : pts) {
            x_lo = std::min(x_lo, p.x);
            x_hi = std::max(x_hi, p.x);
            y_lo = std::min(y_lo, p.y);
            y_hi = std::max(y_hi, p.y);
        }
    };
    for (const auto& s : point_sets_) grow(s.pts);
    for (const auto& l : polylines_) grow(l.pts);
    grow(markers_);

    const double mx = 0.05 * (x_hi - x_lo), my = 0.05 * (y_hi - y_lo);
    x_lo -= mx;
    x_hi += mx;
    y_lo -= my;
    y_hi += my;

    auto X = [&](double x) { return (x - x_lo) / (x_hi - x_lo) * kCanvas; };
    auto Y = [&](double y) { return kCanvas - (y - y_lo) / (y_hi - y_lo) * kCanvas; };

    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kCanvas << "\" height=\""
       << kCanvas << "\" viewBox=\"0 0 " << kCanvas << ' ' << kCanvas << "\">\n";
    for (const std::string& line : header_lines_) os << "<!-- " << line << " -->\n";
    os << "<rect width=\"" << kCanvas << "\" height=\"" << kCanvas << "\" fill=\"white\"/>\n";

    // frame of the unit square for orientation
    os << "<rect x=\"" << px(X(0)) << "\" y=\"" << px(Y(1)) << "\" width=\"" << px(X(1) - X(0))
       << "\" height=\"" << px(Y(0) - Y(1))
       << "\" fill=\"none\" stroke=\"#cccccc\" stroke-width=\"1\"/>\n";

    for (const auto& l : polylines_) {
        if (l.pts.empty()) continue;
        os << "<polyline fill=\"none\" stroke=\"" << l.color << "\" stroke-width=\"" << px(l.width)
           << "\" points=\"";
        for (std::size_t i = 0; i < l.pts.size(); ++i)
            os << (i ? " " : "") << px(X(l.pts[i].x)) << ',' << px(Y(l.pts[i].y));
        os << "\"/>\n";
    }
    for (const auto& s : point_sets_) {
        for (const Point& p : s.pts)
            os << "<circle cx=\"" << px(X(p.x)) << "\" cy=\"" << px(Y(p.y)) << "\" r=\""
               << px(s.radius) << "\" fill=\"" << s.color << "\"/>\n";
    }
    for (std::size_t i = 0; i < markers_.size(); ++i) {
        const double cx = X(markers_[i].x), cy = Y(markers_[i].y);
        os << "<path d=\"M " << px(cx - 6) << ' ' << px(cy) << " L " << px(cx + 6) << ' ' << px(cy)
           << " M " << px(cx) << ' ' << px(cy - 6) << " L " << px(cx) << ' ' << px(cy + 6)
           << "\" stroke=\"" << marker_colors_[i] << "\" stroke-width=\"1.5\"/>\n";
    }
    os << "</svg>\n";
}

}  // namespace ffmap::report
