#pragma once

#include <map>
#include <string>
#include <vector>

#include "nrdc/data_pipeline.hpp"
#include "nrdc/errors.hpp"

namespace nrdc {
namespace eval {

struct RDPoint {
    double bpp = 0;
    double psnr = 0;
};

struct RDCurve {
    std::vector<RDPoint> points;  // sorted by bpp strictly increasing
    std::string label;

    // sorts by bpp, rejects duplicate rates, warns (returns false) when
    // psnr is not strictly increasing
    bool normalize();
};

struct BdReport {
    std::map<std::string, double> per_sequence;  // sequence id -> BD-rate %
    double dataset_average = 0;
};

struct EntropyTriple {
    double h_x = 0;
    double h_residual = 0;
    double h_conditional = 0;
};

// MSE on the 0-255 scale; 10*log10(255^2/mse), capped at 100 dB.
double psnr_rgb(const Frame& x, const Frame& x_hat);

double bpp(double total_bits, int width, int height);

// Fritsch-Carlson monotone piecewise cubic through (x, y); evaluation
// clamps to the data range endpoints.
struct Pchip {
    std::vector<double> x, y, d;  // knots and endpoint-corrected slopes

    static Pchip fit(const std::vector<double>& x, const std::vector<double>& y);
    double operator()(double at) const;
    // exact integral of the cubic pieces over [a, b] (a, b inside range)
    double integral(double a, double b) const;
};

// Bjontegaard delta rate, log10(bpp) interpolated against PSNR over the
// overlapping PSNR interval. Positive = test spends more rate.
double bd_rate(const RDCurve& anchor, const RDCurve& test);

BdReport average_per_sequence(const std::map<std::string, double>& reports);

// Exact entropies from a discrete joint over (x, x_c) integer alphabets.
// joint[i][j] = P(x = x_vals[i], x_c = c_vals[j]).
EntropyTriple empirical_entropy_check(const std::vector<int>& x_vals, const std::vector<int>& c_vals,
                                      const std::vector<std::vector<double>>& joint);

// --- interchange ----------------------------------------------------------

struct RDRecord {
    std::string label, sequence_id;
    double lambda = 0, bpp = 0, psnr = 0;
};

std::string rd_csv(const std::vector<RDRecord>& records);
std::vector<RDRecord> parse_rd_csv(const std::string& text);

std::string bd_report_json(const BdReport& report, const std::string& anchor_label,
                           const std::string& test_label);
std::string bd_report_table(const std::map<std::string, BdReport>& by_label,
                            const std::string& anchor_label);

// Minimal SVG line plot of RD curves (log-x rate axis).
std::string rd_plot_svg(const std::vector<RDCurve>& curves);
// BD-rate (y) vs decoder kMACs/pixel (x) scatter.
struct ScatterPoint {
    std::string label;
    double x = 0, y = 0;
};
std::string scatter_plot_svg(const std::vector<ScatterPoint>& pts, const std::string& x_label,
                             const std::string& y_label);

}  // namespace eval
}  // namespace nrdc
