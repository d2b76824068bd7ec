#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

namespace srb {

// Built-in SVG plotting: axes plus polylines, nothing more. Keeps the CLI
// free of plotting dependencies.
class SvgPlot {
public:
    SvgPlot(int width = 720, int height = 480, std::string title = "")
        : w_(width), h_(height), title_(std::move(title)) {}

    void add_line(const std::vector<double>& x, const std::vector<double>& y,
                  const std::string& color, double stroke_width = 1.5,
                  const std::string& dash = "") {
        Line l{x, y, color, stroke_width, dash};
        for (double v : x) {
            xmin_ = std::min(xmin_, v);
            xmax_ = std::max(xmax_, v);
        }
        for (double v : y) {
            ymin_ = std::min(ymin_, v);
            ymax_ = std::max(ymax_, v);
        }
        lines_.push_back(std::move(l));
    }

    std::string render() const {
        const double ml = 58, mr = 16, mt = title_.empty() ? 16 : 34, mb = 40;
        double xmin = xmin_, xmax = xmax_, ymin = ymin_, ymax = ymax_;
        if (!(xmax > xmin)) xmax = xmin + 1;
        if (!(ymax > ymin)) {
            ymin -= 0.5;
            ymax += 0.5;
        }
        const double px = (w_ - ml - mr) / (xmax - xmin);
        const double py = (h_ - mt - mb) / (ymax - ymin);
        auto X = [&](double v) { return ml + (v - xmin) * px; };
        auto Y = [&](double v) { return h_ - mb - (v - ymin) * py; };

        std::ostringstream s;
        s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w_ << "\" height=\"" << h_
          << "\" viewBox=\"0 0 " << w_ << " " << h_ << "\">\n";
        s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
        if (!title_.empty())
            s << "<text x=\"" << w_ / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\" "
              << "font-family=\"sans-serif\">" << title_ << "</text>\n";
        // axes
        s << "<line x1=\"" << ml << "\" y1=\"" << h_ - mb << "\" x2=\"" << w_ - mr << "\" y2=\""
          << h_ - mb << "\" stroke=\"black\"/>\n";
        s << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << h_ - mb
          << "\" stroke=\"black\"/>\n";
        for (int i = 0; i <= 4; ++i) {
            const double fx = xmin + (xmax - xmin) * i / 4.0;
            const double fy = ymin + (ymax - ymin) * i / 4.0;
            s << "<text x=\"" << X(fx) << "\" y=\"" << h_ - mb + 16
              << "\" text-anchor=\"middle\" font-size=\"10\" font-family=\"sans-serif\">"
              << fmt(fx) << "</text>\n";
            s << "<text x=\"" << ml - 6 << "\" y=\"" << Y(fy) + 3
              << "\" text-anchor=\"end\" font-size=\"10\" font-family=\"sans-serif\">" << fmt(fy)
              << "</text>\n";
        }
        for (const Line& l : lines_) {
            s << "<polyline fill=\"none\" stroke=\"" << l.color << "\" stroke-width=\""
              << l.stroke_width << "\"";
            if (!l.dash.empty()) s << " stroke-dasharray=\"" << l.dash << "\"";
            s << " points=\"";
            for (std::size_t i = 0; i < l.x.size(); ++i) {
                if (i) s << ' ';
                s << fmt(X(l.x[i])) << ',' << fmt(Y(l.y[i]));
            }
            s << "\"/>\n";
        }
        s << "</svg>\n";
        return s.str();
    }

private:
    struct Line {
        std::vector<double> x, y;
        std::string color;
        double stroke_width;
        std::string dash;
    };

    static std::string fmt(double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.6g", v);
        return buf;
    }

    int w_, h_;
    std::string title_;
    std::vector<Line> lines_;
    double xmin_ = std::numeric_limits<double>::infinity();
    double xmax_ = -std::numeric_limits<double>::infinity();
    double ymin_ = std::numeric_limits<double>::infinity();
    double ymax_ = -std::numeric_limits<double>::infinity();
};

}  // namespace srb
