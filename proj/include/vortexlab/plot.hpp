#pragma once

// Static SVG output: log-log line plots for sweep quantities and block-averaged
// heatmaps for fields. No external renderer, one file per figure.

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "grid.hpp"
#include "io.hpp"

namespace vortexlab {

struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

namespace detail {

inline std::string color_cycle(std::size_t k) {
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                    "#9467bd", "#8c564b", "#17becf"};
    return palette[k % 7];
}

inline double plot_map(double v, double lo, double hi, double a, double b, bool logscale) {
    if (logscale) {
        v = std::log10(std::max(v, 1e-300));
        lo = std::log10(std::max(lo, 1e-300));
        hi = std::log10(std::max(hi, 1e-300));
    }
    if (hi <= lo) hi = lo + 1.0;
    return a + (v - lo) / (hi - lo) * (b - a);
}

// five-stop blue->green->yellow gradient
inline std::string heat_color(double t) {
    static const double stops[5][3] = {{68, 1, 84}, {59, 82, 139}, {33, 145, 140},
                                       {94, 201, 98}, {253, 231, 37}};
    t = std::clamp(t, 0.0, 1.0) * 4.0;
    const int k = std::min(3, static_cast<int>(t));
    const double f = t - k;
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x",
                  int(stops[k][0] + f * (stops[k + 1][0] - stops[k][0])),
                  int(stops[k][1] + f * (stops[k + 1][1] - stops[k][1])),
                  int(stops[k][2] + f * (stops[k + 1][2] - stops[k][2])));
    return buf;
}

}  // namespace detail

inline void svg_line_plot(const std::string& path, const std::string& title,
                          const std::vector<PlotSeries>& series, bool logx = false,
                          bool logy = false) {
    const double W = 640, H = 440, ml = 70, mr = 20, mt = 40, mb = 50;
    double xlo = 1e300, xhi = -1e300, ylo = 1e300, yhi = -1e300;
    for (const PlotSeries& s : series)
        for (std::size_t k = 0; k < s.x.size(); ++k) {
            xlo = std::min(xlo, s.x[k]);
            xhi = std::max(xhi, s.x[k]);
            ylo = std::min(ylo, s.y[k]);
            yhi = std::max(yhi, s.y[k]);
        }
    if (xlo > xhi) { xlo = 0; xhi = 1; ylo = 0; yhi = 1; }

    std::ostringstream o;
    o.precision(8);
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" viewBox=\"0 0 " << W << ' ' << H << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"15\">" << title << "</text>\n"
      << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << W - ml - mr << "\" height=\""
      << H - mt - mb << "\" fill=\"none\" stroke=\"#888\"/>\n";

    for (std::size_t si = 0; si < series.size(); ++si) {
        const PlotSeries& s = series[si];
        o << "<polyline fill=\"none\" stroke=\"" << detail::color_cycle(si)
          << "\" stroke-width=\"1.6\" points=\"";
        for (std::size_t k = 0; k < s.x.size(); ++k) {
            const double px = detail::plot_map(s.x[k], xlo, xhi, ml, W - mr, logx);
            const double py = detail::plot_map(s.y[k], ylo, yhi, H - mb, mt, logy);
            o << px << ',' << py << ' ';
        }
        o << "\"/>\n";
        for (std::size_t k = 0; k < s.x.size(); ++k) {
            const double px = detail::plot_map(s.x[k], xlo, xhi, ml, W - mr, logx);
            const double py = detail::plot_map(s.y[k], ylo, yhi, H - mb, mt, logy);
            o << "<circle cx=\"" << px << "\" cy=\"" << py << "\" r=\"2.5\" fill=\""
              << detail::color_cycle(si) << "\"/>\n";
        }
        o << "<text x=\"" << ml + 12 << "\" y=\"" << mt + 18 + 16 * si
          << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"" << detail::color_cycle(si)
          << "\">" << s.label << "</text>\n";
    }

    std::ostringstream lo_s, hi_s;
    lo_s.precision(4); hi_s.precision(4);
    lo_s << xlo; hi_s << xhi;
    o << "<text x=\"" << ml << "\" y=\"" << H - mb + 20
      << "\" font-family=\"sans-serif\" font-size=\"11\">" << lo_s.str() << "</text>\n"
      << "<text x=\"" << W - mr << "\" y=\"" << H - mb + 20
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << hi_s.str()
      << "</text>\n";
    std::ostringstream ylo_s, yhi_s;
    ylo_s.precision(4); yhi_s.precision(4);
    ylo_s << ylo; yhi_s << yhi;
    o << "<text x=\"" << ml - 6 << "\" y=\"" << H - mb
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << ylo_s.str()
      << "</text>\n"
      << "<text x=\"" << ml - 6 << "\" y=\"" << mt + 10
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << yhi_s.str()
      << "</text>\n</svg>\n";
    write_text_file(path, o.str());
}

inline void svg_heatmap(const std::string& path, const std::string& title, const ScalarField& f,
                        int max_cells = 96) {
    const TorusGrid& g = f.grid();
    const int bx = std::max(1, g.nx / max_cells);
    const int by = std::max(1, g.ny / max_cells);
    const int cx = g.nx / bx, cy = g.ny / by;
    std::vector<double> cells(std::size_t(cx) * cy, 0.0);
    for (int J = 0; J < cy; ++J)
        for (int I = 0; I < cx; ++I) {
            double s = 0.0;
            for (int j = J * by; j < (J + 1) * by; ++j)
                for (int i = I * bx; i < (I + 1) * bx; ++i) s += f.at(i, j);
            cells[std::size_t(J) * cx + I] = s / (bx * by);
        }
    const double lo = *std::min_element(cells.begin(), cells.end());
    const double hi = *std::max_element(cells.begin(), cells.end());
    const double span = hi > lo ? hi - lo : 1.0;

    const double W = 560, H = 600, mt = 40;
    const double pw = W / cx, ph = (H - mt - 40) / cy;
    std::ostringstream o;
    o.precision(6);
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" viewBox=\"0 0 " << W << ' ' << H << "\">\n"
      << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"15\">" << title << "</text>\n";
    for (int J = 0; J < cy; ++J)
        for (int I = 0; I < cx; ++I) {
            // flip j so increasing y points up in the figure
            const double t = (cells[std::size_t(J) * cx + I] - lo) / span;
            o << "<rect x=\"" << I * pw << "\" y=\"" << mt + (cy - 1 - J) * ph << "\" width=\""
              << pw + 0.5 << "\" height=\"" << ph + 0.5 << "\" fill=\"" << detail::heat_color(t)
              << "\"/>\n";
        }
    std::ostringstream lo_s, hi_s;
    lo_s.precision(5); hi_s.precision(5);
    lo_s << lo; hi_s << hi;
    o << "<text x=\"8\" y=\"" << H - 12
      << "\" font-family=\"sans-serif\" font-size=\"12\">min " << lo_s.str() << "  max "
      << hi_s.str() << "</text>\n</svg>\n";
    write_text_file(path, o.str());
}

}  // namespace vortexlab
