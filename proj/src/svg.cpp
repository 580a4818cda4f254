#include "divgov/svg.hpp"

#include "divgov/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace divgov {

namespace {

class SvgWriter {
public:
    SvgWriter(const std::string& path, int w, int h) : out_(path), w_(w), h_(h) {
        if (!out_) throw std::runtime_error("cannot write svg: " + path);
        out_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
             << "\" viewBox=\"0 0 " << w << " " << h << "\">\n";
        out_ << "<rect width=\"" << w << "\" height=\"" << h << "\" fill=\"white\"/>\n";
    }
    ~SvgWriter() { out_ << "</svg>\n"; }

    void rect(double x, double y, double w, double h, const std::string& fill) {
        out_ << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << w << "\" height=\"" << h
             << "\" fill=\"" << fill << "\"/>\n";
    }
    void line(double x1, double y1, double x2, double y2, const std::string& stroke,
              double width = 1.0) {
        out_ << "<line x1=\"" << x1 << "\" y1=\"" << y1 << "\" x2=\"" << x2 << "\" y2=\"" << y2
             << "\" stroke=\"" << stroke << "\" stroke-width=\"" << width << "\"/>\n";
    }
    void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& stroke,
                  double width = 1.0) {
        if (pts.empty()) return;
        out_ << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"" << width
             << "\" points=\"";
        for (const auto& [x, y] : pts) out_ << x << "," << y << " ";
        out_ << "\"/>\n";
    }
    void text(double x, double y, const std::string& s, int size = 12) {
        out_ << "<text x=\"" << x << "\" y=\"" << y << "\" font-size=\"" << size
             << "\" font-family=\"monospace\">" << s << "</text>\n";
    }

private:
    std::ofstream out_;
    int w_, h_;
};

struct Panel {
    double x0, y0, w, h;        // pixel rect
    double vx0, vx1, vy0, vy1;  // value ranges

    double px(double v) const { return x0 + (v - vx0) / (vx1 - vx0) * w; }
    double py(double v) const { return y0 + h - (v - vy0) / (vy1 - vy0) * h; }
};

Panel make_panel(double x0, double y0, double w, double h, double vx0, double vx1, double vy0,
                 double vy1) {
    auto widen = [](double& a, double& b) {
        if (b - a < 1e-12) {
            a -= 0.5;
            b += 0.5;
        } else {
            const double m = 0.05 * (b - a);
            a -= m;
            b += m;
        }
    };
    widen(vx0, vx1);
    widen(vy0, vy1);
    return Panel{x0, y0, w, h, vx0, vx1, vy0, vy1};
}

void draw_frame(SvgWriter& svg, const Panel& p, const std::string& xlabel,
                const std::string& ylabel) {
    svg.line(p.x0, p.y0, p.x0, p.y0 + p.h, "black");
    svg.line(p.x0, p.y0 + p.h, p.x0 + p.w, p.y0 + p.h, "black");
    svg.text(p.x0 + p.w / 2 - 10, p.y0 + p.h + 16, xlabel);
    svg.text(p.x0 - 28, p.y0 + 12, ylabel);
    if (p.vx0 < 0 && p.vx1 > 0) svg.line(p.px(0), p.y0, p.px(0), p.y0 + p.h, "#dddddd");
    if (p.vy0 < 0 && p.vy1 > 0) svg.line(p.x0, p.py(0), p.x0 + p.w, p.py(0), "#dddddd");
}

}  // namespace

void render_phase_svg(const std::string& trajectory_csv, const GovernorParams& params,
                      const std::string& out_svg) {
    const CsvTable t = read_csv(trajectory_csv);
    std::vector<Vec3> xs;
    xs.reserve(t.rows.size());
    for (const auto& r : t.rows) {
        if (r.size() < 4) continue;
        xs.emplace_back(std::stod(r[1]), std::stod(r[2]), std::stod(r[3]));
    }
    if (xs.empty()) throw std::runtime_error("render_phase_svg: empty trajectory");

    double x1lo = xs[0][0], x1hi = xs[0][0];
    double x2lo = xs[0][1], x2hi = xs[0][1];
    double x3lo = xs[0][2], x3hi = xs[0][2];
    for (const auto& x : xs) {
        x1lo = std::min(x1lo, x[0]); x1hi = std::max(x1hi, x[0]);
        x2lo = std::min(x2lo, x[1]); x2hi = std::max(x2hi, x[1]);
        x3lo = std::min(x3lo, x[2]); x3hi = std::max(x3hi, x[2]);
    }
    const StationarySet set = stationary_set(params);
    const double m = set.x3_extent();
    x1lo = std::min(x1lo, -params.C * m); x1hi = std::max(x1hi, params.C * m);
    x3lo = std::min(x3lo, -m); x3hi = std::max(x3hi, m);
    x2lo = std::min(x2lo, 0.0); x2hi = std::max(x2hi, 0.0);

    SvgWriter svg(out_svg, 880, 440);
    const Panel p12 = make_panel(60, 30, 340, 340, x1lo, x1hi, x2lo, x2hi);
    const Panel p13 = make_panel(500, 30, 340, 340, x1lo, x1hi, x3lo, x3hi);
    draw_frame(svg, p12, "x1", "x2");
    draw_frame(svg, p13, "x1", "x3");

    std::vector<std::pair<double, double>> poly12, poly13;
    poly12.reserve(xs.size());
    poly13.reserve(xs.size());
    for (const auto& x : xs) {
        poly12.emplace_back(p12.px(x[0]), p12.py(x[1]));
        poly13.emplace_back(p13.px(x[0]), p13.py(x[2]));
    }
    svg.polyline(poly12, "#1f6fb2", 1.0);
    svg.polyline(poly13, "#1f6fb2", 1.0);

    // stationary segment: x1 = -C x3, x2 = 0, |x3| <= m
    svg.line(p12.px(-params.C * -m), p12.py(0.0), p12.px(-params.C * m), p12.py(0.0), "#c0392b",
             3.0);
    svg.line(p13.px(-params.C * -m), p13.py(-m), p13.px(-params.C * m), p13.py(m), "#c0392b",
             3.0);
    svg.text(20, 415, "x1-x2 and x1-x3 projections; red segment: stationary set");
}

void render_region_svg(const std::string& region_csv, const std::string& out_svg) {
    const CsvTable t = read_csv(region_csv);
    int col_fused = -1;
    for (std::size_t i = 0; i < t.header.size(); ++i)
        if (t.header[i] == "fused") col_fused = static_cast<int>(i);
    if (col_fused < 0) throw std::runtime_error("render_region_svg: no 'fused' column");

    struct Cell {
        double A, B;
        std::string cls;
    };
    std::vector<Cell> cells;
    double Alo = 1e300, Ahi = -1e300, Blo = 1e300, Bhi = -1e300;
    std::vector<double> As, Bs;
    for (const auto& r : t.rows) {
        Cell c{std::stod(r[0]), std::stod(r[1]), r[col_fused]};
        cells.push_back(c);
        Alo = std::min(Alo, c.A); Ahi = std::max(Ahi, c.A);
        Blo = std::min(Blo, c.B); Bhi = std::max(Bhi, c.B);
        As.push_back(c.A);
        Bs.push_back(c.B);
    }
    if (cells.empty()) throw std::runtime_error("render_region_svg: empty grid");
    std::sort(As.begin(), As.end());
    As.erase(std::unique(As.begin(), As.end()), As.end());
    double stepA = As.size() > 1 ? As[1] - As[0] : 0.1;
    std::sort(Bs.begin(), Bs.end());
    Bs.erase(std::unique(Bs.begin(), Bs.end()), Bs.end());
    double stepB = Bs.size() > 1 ? Bs[1] - Bs[0] : 0.1;

    SvgWriter svg(out_svg, 640, 600);
    const Panel p = make_panel(70, 30, 500, 480, Alo, Ahi + stepA, Blo, Bhi + stepB);
    const std::map<std::string, std::string> color = {
        {"GloballyStable", "#2e8b57"},
        {"LocallyStableWithOscillation", "#e6b422"},
        {"Unstable", "#b03a2e"},
        {"Undetermined", "#b0b0b0"}};
    for (const auto& c : cells) {
        auto it = color.find(c.cls);
        const std::string fill = it == color.end() ? "#b0b0b0" : it->second;
        const double x = p.px(c.A - 0.0);
        const double y = p.py(c.B + stepB);
        svg.rect(x, y, p.px(c.A + stepA) - x, p.py(c.B) - p.py(c.B + stepB), fill);
    }
    draw_frame(svg, p, "A", "B");
    // reference curve A*B = 1
    std::vector<std::pair<double, double>> curve;
    for (double A = std::max(Alo, 1.0 / (Bhi + stepB)); A <= Ahi + stepA; A += stepA / 8.0) {
        const double B = 1.0 / A;
        if (B < Blo || B > Bhi + stepB) continue;
        curve.emplace_back(p.px(A), p.py(B));
    }
    svg.polyline(curve, "black", 2.0);
    svg.text(70, 545, "green: globally stable, yellow: local+oscillation, red: unstable,");
    svg.text(70, 560, "gray: undetermined; black curve: AB=1");
}

}  // namespace divgov
