#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "ffmap/core.hpp"

namespace ffmap::report {

// shortest decimal that round-trips a double through %.17g
std::string g17(double v);

// rows of doubles under a '#'-comment preamble and a column-name header;
// output is byte-for-byte reproducible across runs
class CsvWriter {
  public:
    explicit CsvWriter(std::ostream& os) : os_(os) {}

    void comment(const std::string& line);
    void columns(const std::vector<std::string>& names);
    void row(const std::vector<double>& values);

  private:
    std::ostream& os_;
};

// fixed 800x800 canvas; world box is [0,1]^2 widened to the data with a 5%
// margin, y axis pointing up
class SvgPlot {
  public:
    void add_header(const std::string& line);  // emitted as an XML comment after the open tag
    void add_points(const std::vector<Point>& pts, const std::string& color, double radius);
    void add_polyline(const std::vector<Point>& pts, const std::string& color, double width);
    void add_marker(Point p, const std::string& color);

    void write(std::ostream& os) const;

    static constexpr int kCanvas = 800;

  private:
    struct PointSet {
        std::vector<Point> pts;
        std::string color;
        double radius;
    };
    struct Polyline {
        std::vector<Point> pts;
        std::string color;
        double width;
    };
    std::vector<std::string> header_lines_;
    std::vector<PointSet> point_sets_;
    std::vector<Polyline> polylines_;
    std::vector<Point> markers_;
    std::vector<std::string> marker_colors_;
};

}  // namespace ffmap::report
