#include "svstab/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include <json.hpp>

namespace svstab {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_steady_csv(std::ostream& os, const SteadyState& s) {
    os << "x,H,V,Vx,Vxx,Hx\n";
    for (std::size_t i = 0; i < s.grid.n; ++i) {
        os << format_double(s.grid.x[i]) << ',' << format_double(s.Hs[i]) << ','
           << format_double(s.Vs[i]) << ',' << format_double(s.Vsx[i]) << ','
           << format_double(s.Vsxx[i]) << ',' << format_double(s.Hsx[i]) << '\n';
    }
}

void write_trace_csv(std::ostream& os, const SimulationTrace& trace) {
    os << "t,l2,W\n";
    for (std::size_t i = 0; i < trace.times.size(); ++i) {
        os << format_double(trace.times[i]) << ',' << format_double(trace.l2[i]) << ','
           << format_double(trace.W[i]) << '\n';
    }
}

void write_snapshot_csv(std::ostream& os, const Grid& grid, const StateVector& y) {
    os << "x,h,v\n";
    for (std::size_t i = 0; i < grid.n; ++i) {
        os << format_double(grid.x[i]) << ',' << format_double(y.h[i]) << ','
           << format_double(y.v[i]) << '\n';
    }
}

void write_spectrum_csv(std::ostream& os, const SpectrumReport& rep) {
    os << "re,im\n";
    for (const auto& ev : rep.eigenvalues)
        os << format_double(ev.real()) << ',' << format_double(ev.imag()) << '\n';
}

std::string stability_report_json(const StabilityReport& rep) {
    nlohmann::json j;
    j["b0_lo"] = rep.intervals.b0_lo;
    j["b0_hi"] = rep.intervals.b0_hi;
    j["b1_lo"] = rep.intervals.b1_lo;
    j["b1_hi"] = rep.intervals.b1_hi;
    j["c1_lo"] = rep.intervals.c1_lo;
    j["c1_hi"] = rep.intervals.c1_hi;
    j["c1mu_lo"] = rep.intervals.c1mu_lo;
    j["c1mu_hi"] = rep.intervals.c1mu_hi;
    if (rep.gamma_cert) j["gamma_cert"] = *rep.gamma_cert;
    j["detD_min"] = rep.detD_min;
    j["a1"] = rep.boundary.a1;
    j["a2"] = rep.boundary.a2;
    j["a3"] = rep.boundary.a3;
    j["a4"] = rep.boundary.a4;
    j["delta_h"] = rep.boundary.delta_h;
    j["delta_d"] = rep.boundary.delta_d;
    j["subcritical_margin"] = rep.subcritical_margin;
    j["bc"] = {{"b0", rep.bc.b0}, {"b1", rep.bc.b1}, {"c1", rep.bc.c1}};
    j["flags"] = {{"subcritical", rep.flags.subcritical},
                  {"assumption15", rep.flags.assumption15},
                  {"b0_in_range", rep.flags.b0_in_range},
                  {"b1_admissible", rep.flags.b1_admissible},
                  {"c1_in_range", rep.flags.c1_in_range},
                  {"interior_negdef", rep.flags.interior_negdef},
                  {"boundary_negdef", rep.flags.boundary_negdef},
                  {"certified", rep.flags.certified}};
    return j.dump(2) + "\n";
}

namespace {

struct Panel {
    double x0, y0, w, h;  // plot area inside the panel
};

void polyline(std::ostream& os, const Panel& p, const std::vector<double>& xs,
              const std::vector<double>& ys, double xmin, double xmax, double ymin, double ymax,
              const char* color) {
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.2\" points=\"";
    const double xr = (xmax > xmin) ? xmax - xmin : 1.0;
    const double yr = (ymax > ymin) ? ymax - ymin : 1.0;
    char buf[64];
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double px = p.x0 + (xs[i] - xmin) / xr * p.w;
        const double py = p.y0 + p.h - (ys[i] - ymin) / yr * p.h;
        std::snprintf(buf, sizeof(buf), "%.6g,%.6g ", px, py);
        os << buf;
    }
    os << "\"/>\n";
}

void axes(std::ostream& os, const Panel& p, const std::string& title) {
    os << "<rect x=\"" << p.x0 << "\" y=\"" << p.y0 << "\" width=\"" << p.w << "\" height=\""
       << p.h << "\" fill=\"none\" stroke=\"black\"/>\n";
    os << "<text x=\"" << p.x0 + p.w / 2 << "\" y=\"" << p.y0 - 10
       << "\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n";
}

const char* kColors[] = {"#1b6ca8", "#c0392b", "#27ae60", "#8e44ad", "#e67e22", "#16a085"};

}  // namespace

void write_decay_svg(std::ostream& os, const std::vector<LabelledTrace>& traces) {
    const Panel lin{70, 40, 680, 420};
    const Panel log{870, 40, 680, 420};
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 1600 500\" "
          "width=\"1600\" height=\"500\">\n<rect width=\"1600\" height=\"500\" fill=\"white\"/>\n";
    axes(os, lin, "L2 norm (linear)");
    axes(os, log, "L2 norm (log10)");

    double tmin = 0.0, tmax = 0.0, lmax = 0.0, gmin = 0.0, gmax = -16.0;
    bool first = true;
    for (const auto& lt : traces) {
        if (!lt.trace || lt.trace->times.empty()) continue;
        tmax = std::max(tmax, lt.trace->times.back());
        for (double v : lt.trace->l2) {
            lmax = std::max(lmax, v);
            const double lg = std::log10(std::max(v, 1e-16));
            if (first) {
                gmin = gmax = lg;
                first = false;
            } else {
                gmin = std::min(gmin, lg);
                gmax = std::max(gmax, lg);
            }
        }
    }
    if (lmax <= 0.0) lmax = 1.0;
    if (gmax <= gmin) gmax = gmin + 1.0;

    int ci = 0;
    for (const auto& lt : traces) {
        if (!lt.trace || lt.trace->times.empty()) continue;
        const char* color = kColors[ci % 6];
        polyline(os, lin, lt.trace->times, lt.trace->l2, tmin, tmax, 0.0, lmax, color);
        std::vector<double> lg(lt.trace->l2.size());
        std::transform(lt.trace->l2.begin(), lt.trace->l2.end(), lg.begin(),
                       [](double v) { return std::log10(std::max(v, 1e-16)); });
        polyline(os, log, lt.trace->times, lg, tmin, tmax, gmin, gmax, color);
        os << "<text x=\"" << log.x0 + log.w + 8 << "\" y=\"" << log.y0 + 16 + 18 * ci
           << "\" font-size=\"12\" fill=\"" << color << "\">" << lt.label << "</text>\n";
        ++ci;
    }
    os << "</svg>\n";
}

}  // namespace svstab
