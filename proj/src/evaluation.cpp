#include "nrdc/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace nrdc {
namespace eval {

double psnr_rgb(const Frame& x, const Frame& x_hat) {
    if (x.pixels.shape != x_hat.pixels.shape) throw ArgumentError("psnr_rgb: dimension mismatch");
    double se = 0;
    for (std::size_t i = 0; i < x.pixels.d.size(); ++i) {
        double e = (x.pixels.d[i] - x_hat.pixels.d[i]) * 255.0;
        se += e * e;
    }
    double mse = se / double(x.pixels.d.size());
    if (mse <= 0) return 100.0;
    return std::min(100.0, 10.0 * std::log10(255.0 * 255.0 / mse));
}

double bpp(double total_bits, int width, int height) {
    if (width <= 0 || height <= 0) throw ArgumentError("bpp: bad dimensions");
    return total_bits / (double(width) * height);
}

bool RDCurve::normalize() {
    std::sort(points.begin(), points.end(),
              [](const RDPoint& a, const RDPoint& b) { return a.bpp < b.bpp; });
    for (std::size_t i = 1; i < points.size(); ++i)
        if (points[i].bpp <= points[i - 1].bpp)
            throw ArgumentError("RD curve '" + label + "' has duplicate rates");
    for (std::size_t i = 1; i < points.size(); ++i)
        if (points[i].psnr <= points[i - 1].psnr) return false;
    return true;
}

// --- PCHIP ------------------------------------------------------------

Pchip Pchip::fit(const std::vector<double>& xs, const std::vector<double>& ys) {
    const std::size_t n = xs.size();
    if (n < 2 || ys.size() != n) throw ArgumentError("pchip: need >= 2 matching knots");
    for (std::size_t i = 1; i < n; ++i)
        if (xs[i] <= xs[i - 1]) throw ArgumentError("pchip: knots must be strictly increasing");

    std::vector<double> h(n - 1), delta(n - 1), d(n);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        h[i] = xs[i + 1] - xs[i];
        delta[i] = (ys[i + 1] - ys[i]) / h[i];
    }
    if (n == 2) {
        d[0] = d[1] = delta[0];
    } else {
        for (std::size_t i = 1; i + 1 < n; ++i) {
            if (delta[i - 1] * delta[i] <= 0) {
                d[i] = 0;
            } else {
                // weighted harmonic mean (Fritsch-Carlson)
                double w1 = 2 * h[i] + h[i - 1];
                double w2 = h[i] + 2 * h[i - 1];
                d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
            }
        }
        auto end_slope = [](double h0, double h1, double d0, double d1) {
            double d_ = ((2 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
            if (d_ * d0 <= 0)
                d_ = 0;
            else if (d0 * d1 <= 0 && std::abs(d_) > 3 * std::abs(d0))
                d_ = 3 * d0;
            return d_;
        };
        d[0] = end_slope(h[0], h[1], delta[0], delta[1]);
        d[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    }
    Pchip p;
    p.x = xs;
    p.y = ys;
    p.d = d;
    return p;
}

namespace {

// cubic Hermite on [x0, x1] evaluated at t in [0, h]
double hermite(double t, double h, double y0, double y1, double d0, double d1) {
    double delta = (y1 - y0) / h;
    double c2 = (3 * delta - 2 * d0 - d1) / h;
    double c3 = (d0 - 2 * delta + d1) / (h * h);
    return y0 + t * (d0 + t * (c2 + t * c3));
}

// exact antiderivative of the same cubic at offset t
double hermite_int(double t, double h, double y0, double y1, double d0, double d1) {
    double delta = (y1 - y0) / h;
    double c2 = (3 * delta - 2 * d0 - d1) / h;
    double c3 = (d0 - 2 * delta + d1) / (h * h);
    return t * (y0 + t * (d0 / 2 + t * (c2 / 3 + t * c3 / 4)));
}

}  // namespace

double Pchip::operator()(double at) const {
    const std::size_t n = x.size();
    double t = std::clamp(at, x.front(), x.back());
    std::size_t i = std::upper_bound(x.begin(), x.end() - 1, t) - x.begin();
    if (i > 0) --i;
    if (i >= n - 1) i = n - 2;
    double h = x[i + 1] - x[i];
    return hermite(t - x[i], h, y[i], y[i + 1], d[i], d[i + 1]);
}

double Pchip::integral(double a, double b) const {
    if (b < a) return -integral(b, a);
    a = std::clamp(a, x.front(), x.back());
    b = std::clamp(b, x.front(), x.back());
    double total = 0;
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
        double lo = std::max(a, x[i]);
        double hi = std::min(b, x[i + 1]);
        if (hi <= lo) continue;
        double h = x[i + 1] - x[i];
        total += hermite_int(hi - x[i], h, y[i], y[i + 1], d[i], d[i + 1]) -
                 hermite_int(lo - x[i], h, y[i], y[i + 1], d[i], d[i + 1]);
    }
    return total;
}

double bd_rate(const RDCurve& anchor, const RDCurve& test) {
    if (anchor.points.size() < 4 || test.points.size() < 4)
        throw ArgumentError("bd_rate: need at least 4 points per curve");

    auto fit_curve = [](const RDCurve& c) {
        std::vector<double> psnr, lograte;
        for (const RDPoint& p : c.points) {
            if (p.bpp <= 0) throw ArgumentError("bd_rate: non-positive bpp on '" + c.label + "'");
            psnr.push_back(p.psnr);
            lograte.push_back(std::log10(p.bpp));
        }
        // interpolate log-rate as a function of PSNR
        std::vector<std::size_t> idx(psnr.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return psnr[a] < psnr[b]; });
        std::vector<double> px, py;
        for (auto i : idx) {
            if (!px.empty() && psnr[i] <= px.back()) continue;  // drop PSNR inversions
            px.push_back(psnr[i]);
            py.push_back(lograte[i]);
        }
        if (px.size() < 2) throw ComputationError("bd_rate: degenerate curve '" + c.label + "'");
        return Pchip::fit(px, py);
    };

    Pchip fa = fit_curve(anchor);
    Pchip ft = fit_curve(test);
    double lo = std::max(fa.x.front(), ft.x.front());
    double hi = std::min(fa.x.back(), ft.x.back());
    if (hi <= lo) {
        std::ostringstream msg;
        msg << "bd_rate: PSNR ranges do not overlap (anchor '" << anchor.label << "' ["
            << fa.x.front() << ", " << fa.x.back() << "] vs test '" << test.label << "' ["
            << ft.x.front() << ", " << ft.x.back() << "])";
        throw ComputationError(msg.str());
    }
    double avg_diff = (ft.integral(lo, hi) - fa.integral(lo, hi)) / (hi - lo);
    return (std::pow(10.0, avg_diff) - 1.0) * 100.0;
}

BdReport average_per_sequence(const std::map<std::string, double>& reports) {
    if (reports.empty()) throw ArgumentError("average_per_sequence: no sequences");
    BdReport r;
    r.per_sequence = reports;
    double sum = 0;
    for (auto& [k, v] : reports) sum += v;
    r.dataset_average = sum / double(reports.size());
    return r;
}

EntropyTriple empirical_entropy_check(const std::vector<int>& x_vals, const std::vector<int>& c_vals,
                                      const std::vector<std::vector<double>>& joint) {
    if (joint.size() != x_vals.size()) throw ArgumentError("entropy check: joint rows != |x alphabet|");
    double total = 0;
    for (const auto& row : joint) {
        if (row.size() != c_vals.size())
            throw ArgumentError("entropy check: joint cols != |x_c alphabet|");
        for (double p : row) {
            if (p < 0) throw ArgumentError("entropy check: negative probability");
            total += p;
        }
    }
    if (std::abs(total - 1.0) > 1e-12) throw ArgumentError("entropy check: joint does not sum to 1");

    auto h_of = [](const std::map<int, double>& dist) {
        double h = 0;
        for (auto& [v, p] : dist)
            if (p > 0) h -= p * std::log2(p);
        return h;
    };

    std::map<int, double> px, pres;
    std::map<int, double> pc;
    double h_joint = 0;
    for (std::size_t i = 0; i < x_vals.size(); ++i)
        for (std::size_t j = 0; j < c_vals.size(); ++j) {
            double p = joint[i][j];
            px[x_vals[i]] += p;
            pc[c_vals[j]] += p;
            pres[x_vals[i] - c_vals[j]] += p;
            if (p > 0) h_joint -= p * std::log2(p);
        }

    EntropyTriple t;
    t.h_x = h_of(px);
    t.h_residual = h_of(pres);
    t.h_conditional = h_joint - h_of(pc);  // H(x|c) = H(x,c) - H(c)
    if (t.h_conditional < 0) t.h_conditional = 0;  // numeric guard
    return t;
}

// --- interchange ----------------------------------------------------------

std::string rd_csv(const std::vector<RDRecord>& records) {
    std::ostringstream s;
    s << "label,sequence_id,lambda,bpp,psnr\n";
    s.precision(12);
    for (const auto& r : records)
        s << r.label << "," << r.sequence_id << "," << r.lambda << "," << r.bpp << "," << r.psnr
          << "\n";
    return s.str();
}

std::vector<RDRecord> parse_rd_csv(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    std::vector<RDRecord> out;
    bool first = true;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (first) {
            first = false;
            if (line.rfind("label,", 0) == 0) continue;
        }
        std::istringstream ls(line);
        RDRecord r;
        std::string f;
        try {
            std::getline(ls, r.label, ',');
            std::getline(ls, r.sequence_id, ',');
            std::getline(ls, f, ',');
            r.lambda = std::stod(f);
            std::getline(ls, f, ',');
            r.bpp = std::stod(f);
            std::getline(ls, f, ',');
            r.psnr = std::stod(f);
        } catch (const std::exception&) {
            throw FormatError("bad RD csv line: " + line);
        }
        out.push_back(std::move(r));
    }
    return out;
}

std::string bd_report_json(const BdReport& report, const std::string& anchor_label,
                           const std::string& test_label) {
    nlohmann::json j;
    j["anchor"] = anchor_label;
    j["test"] = test_label;
    j["dataset_average_pct"] = report.dataset_average;
    for (auto& [k, v] : report.per_sequence) j["per_sequence_pct"][k] = v;
    return j.dump(2);
}

std::string bd_report_table(const std::map<std::string, BdReport>& by_label,
                            const std::string& anchor_label) {
    std::ostringstream s;
    s << "BD-rate vs anchor '" << anchor_label << "' (positive = more rate)\n";
    for (auto& [label, rep] : by_label) {
        s << "  " << label << ": avg " << rep.dataset_average << "%  [";
        bool first = true;
        for (auto& [seq, v] : rep.per_sequence) {
            if (!first) s << ", ";
            s << seq << " " << v << "%";
            first = false;
        }
        s << "]\n";
    }
    return s.str();
}

// --- plots ------------------------------------------------------------

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string svg_header(int w, int h) {
    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
      << "\" viewBox=\"0 0 " << w << " " << h << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    return s.str();
}

}  // namespace

std::string rd_plot_svg(const std::vector<RDCurve>& curves) {
    const int W = 640, H = 480, M = 60;
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& c : curves)
        for (const auto& p : c.points) {
            double lx = std::log10(std::max(p.bpp, 1e-9));
            xmin = std::min(xmin, lx);
            xmax = std::max(xmax, lx);
            ymin = std::min(ymin, p.psnr);
            ymax = std::max(ymax, p.psnr);
        }
    if (xmax <= xmin) xmax = xmin + 1;
    if (ymax <= ymin) ymax = ymin + 1;
    auto sx = [&](double lx) { return M + (lx - xmin) / (xmax - xmin) * (W - 2 * M); };
    auto sy = [&](double y) { return H - M - (y - ymin) / (ymax - ymin) * (H - 2 * M); };

    std::ostringstream s;
    s << svg_header(W, H);
    s << "<line x1=\"" << M << "\" y1=\"" << H - M << "\" x2=\"" << W - M << "\" y2=\"" << H - M
      << "\" stroke=\"black\"/>\n";
    s << "<line x1=\"" << M << "\" y1=\"" << M << "\" x2=\"" << M << "\" y2=\"" << H - M
      << "\" stroke=\"black\"/>\n";
    s << "<text x=\"" << W / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">bpp (log)</text>\n";
    s << "<text x=\"16\" y=\"" << H / 2 << "\" transform=\"rotate(-90 16 " << H / 2
      << ")\" text-anchor=\"middle\">PSNR-RGB (dB)</text>\n";
    int ci = 0;
    for (const auto& c : curves) {
        const char* col = kPalette[ci % 6];
        std::ostringstream pts;
        for (const auto& p : c.points)
            pts << sx(std::log10(std::max(p.bpp, 1e-9))) << "," << sy(p.psnr) << " ";
        s << "<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"2\" points=\""
          << pts.str() << "\"/>\n";
        for (const auto& p : c.points)
            s << "<circle cx=\"" << sx(std::log10(std::max(p.bpp, 1e-9))) << "\" cy=\"" << sy(p.psnr)
              << "\" r=\"3\" fill=\"" << col << "\"/>\n";
        s << "<text x=\"" << W - M + 4 << "\" y=\"" << M + 16 * ci << "\" fill=\"" << col
          << "\" font-size=\"12\">" << c.label << "</text>\n";
        ++ci;
    }
    s << "</svg>\n";
    return s.str();
}

std::string scatter_plot_svg(const std::vector<ScatterPoint>& pts, const std::string& x_label,
                             const std::string& y_label) {
    const int W = 640, H = 480, M = 60;
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& p : pts) {
        xmin = std::min(xmin, p.x);
        xmax = std::max(xmax, p.x);
        ymin = std::min(ymin, p.y);
        ymax = std::max(ymax, p.y);
    }
    if (pts.empty()) xmin = ymin = 0, xmax = ymax = 1;
    if (xmax <= xmin) xmax = xmin + 1;
    if (ymax <= ymin) ymax = ymin + 1;
    auto sx = [&](double x) { return M + (x - xmin) / (xmax - xmin) * (W - 2 * M); };
    auto sy = [&](double y) { return H - M - (y - ymin) / (ymax - ymin) * (H - 2 * M); };
    std::ostringstream s;
    s << svg_header(W, H);
    s << "<line x1=\"" << M << "\" y1=\"" << H - M << "\" x2=\"" << W - M << "\" y2=\"" << H - M
      << "\" stroke=\"black\"/>\n";
    s << "<line x1=\"" << M << "\" y1=\"" << M << "\" x2=\"" << M << "\" y2=\"" << H - M
      << "\" stroke=\"black\"/>\n";
    s << "<text x=\"" << W / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">" << x_label
      << "</text>\n";
    s << "<text x=\"16\" y=\"" << H / 2 << "\" transform=\"rotate(-90 16 " << H / 2
      << ")\" text-anchor=\"middle\">" << y_label << "</text>\n";
    int ci = 0;
    for (const auto& p : pts) {
        const char* col = kPalette[ci % 6];
        s << "<circle cx=\"" << sx(p.x) << "\" cy=\"" << sy(p.y) << "\" r=\"5\" fill=\"" << col
          << "\"/>\n";
        s << "<text x=\"" << sx(p.x) + 7 << "\" y=\"" << sy(p.y) - 7 << "\" font-size=\"12\">"
          << p.label << "</text>\n";
        ++ci;
    }
    s << "</svg>\n";
    return s.str();
}

}  // namespace eval
}  // namespace nrdc
