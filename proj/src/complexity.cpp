#include "nrdc/complexity.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

#include <nlohmann/json.hpp>

namespace nrdc {
namespace complexity {

void GraphBuilder::conv(const std::string& name, int cin, int cout, int k, int stride, int pad,
                        Side side) {
    LayerSpec l;
    l.kind = LayerKind::conv;
    l.name = name;
    l.c_in = cin;
    l.c_out = cout;
    l.kh = l.kw = k;
    l.stride = stride;
    l.padding = pad;
    l.side = side;
    l.in_h = h;
    l.in_w = w;
    graph.layers.push_back(l);
    h = (h + 2 * pad - k) / stride + 1;
    w = (w + 2 * pad - k) / stride + 1;
}

void GraphBuilder::deconv(const std::string& name, int cin, int cout, int k, int stride, int pad,
                          Side side) {
    LayerSpec l;
    l.kind = LayerKind::transposed_conv;
    l.name = name;
    l.c_in = cin;
    l.c_out = cout;
    l.kh = l.kw = k;
    l.stride = stride;
    l.padding = pad;
    l.side = side;
    l.in_h = h;
    l.in_w = w;
    graph.layers.push_back(l);
    h = (h - 1) * stride - 2 * pad + k;
    w = (w - 1) * stride - 2 * pad + k;
}

void GraphBuilder::warp(const std::string& name, int channels, Side side) {
    LayerSpec l;
    l.kind = LayerKind::warp;
    l.name = name;
    l.c_in = l.c_out = channels;
    l.in_h = h;
    l.in_w = w;
    l.side = side;
    graph.layers.push_back(l);
}

void GraphBuilder::elementwise(const std::string& name, int channels, Side side) {
    LayerSpec l;
    l.kind = LayerKind::elementwise;
    l.name = name;
    l.c_in = l.c_out = channels;
    l.in_h = h;
    l.in_w = w;
    l.side = side;
    graph.layers.push_back(l);
}

MacSplit count_macs(const ComputeGraphSummary& graph) {
    MacSplit s;
    const double pixels = double(graph.input_h) * graph.input_w;
    for (const LayerSpec& l : graph.layers) {
        std::uint64_t macs = 0;
        bool is_conv = false;
        switch (l.kind) {
            case LayerKind::conv: {
                if (l.stride < 1) throw GraphError("layer '" + l.name + "': invalid stride");
                if (l.stride > 1 && (l.in_h % l.stride || l.in_w % l.stride))
                    throw GraphError("layer '" + l.name + "': stride chain does not close (" +
                                     std::to_string(l.in_h) + "x" + std::to_string(l.in_w) +
                                     " input, stride " + std::to_string(l.stride) + ")");
                const int oh = (l.in_h + 2 * l.padding - l.kh) / l.stride + 1;
                const int ow = (l.in_w + 2 * l.padding - l.kw) / l.stride + 1;
                if (oh <= 0 || ow <= 0)
                    throw GraphError("layer '" + l.name + "': stride chain does not close (" +
                                     std::to_string(l.in_h) + "x" + std::to_string(l.in_w) + " input)");
                macs = std::uint64_t(oh) * ow * l.c_out * l.kh * l.kw * l.c_in;
                is_conv = true;
                break;
            }
            case LayerKind::transposed_conv: {
                if (l.in_h <= 0 || l.in_w <= 0)
                    throw GraphError("layer '" + l.name + "': stride chain does not close");
                macs = std::uint64_t(l.in_h) * l.in_w * l.c_in * l.kh * l.kw * l.c_out;
                is_conv = true;
                break;
            }
            case LayerKind::warp:
                macs = std::uint64_t(4) * l.c_in * l.in_h * l.in_w;
                break;
            case LayerKind::elementwise:
            case LayerKind::resample: macs = 0; break;
        }
        const bool enc = l.side != Side::decoder_only;
        const bool dec = l.side != Side::encoder_only;
        if (enc) {
            s.enc_macs_per_pixel += macs / pixels;
            (is_conv ? s.enc_conv_macs_total : s.enc_warp_macs_total) += macs;
        }
        if (dec) {
            s.dec_macs_per_pixel += macs / pixels;
            (is_conv ? s.dec_conv_macs_total : s.dec_warp_macs_total) += macs;
        }
    }
    return s;
}

std::int64_t count_params(const ComputeGraphSummary& graph) {
    std::int64_t n = 0;
    for (const LayerSpec& l : graph.layers)
        if (l.kind == LayerKind::conv || l.kind == LayerKind::transposed_conv)
            n += std::int64_t(l.kh) * l.kw * l.c_in * l.c_out + l.c_out;
    return n;
}

namespace {

std::string pct_delta(double v, double anchor) {
    std::ostringstream s;
    if (anchor == 0) return "(n/a)";
    s << "(" << std::showpos << std::fixed << std::setprecision(1) << (v / anchor - 1.0) * 100.0
      << "%)";
    return s.str();
}

}  // namespace

std::string render_complexity_table(const std::vector<ComplexityReport>& reports, int anchor_index) {
    if (reports.empty()) return "";
    if (anchor_index < 0 || anchor_index >= int(reports.size()))
        throw ArgumentError("complexity table: anchor index out of range");
    const ComplexityReport& a = reports[anchor_index];
    std::ostringstream s;
    s << std::left << std::setw(14) << "config" << std::setw(6) << "mode" << std::setw(5) << "C"
      << std::setw(26) << "enc kMACs/px" << std::setw(26) << "dec kMACs/px" << std::setw(26)
      << "params" << "\n";
    for (const auto& r : reports) {
        std::ostringstream enc, dec, par;
        enc << std::fixed << std::setprecision(2) << r.enc_kmacs_per_pixel << " "
            << pct_delta(r.enc_kmacs_per_pixel, a.enc_kmacs_per_pixel);
        dec << std::fixed << std::setprecision(2) << r.dec_kmacs_per_pixel << " "
            << pct_delta(r.dec_kmacs_per_pixel, a.dec_kmacs_per_pixel);
        par << r.model_size_params << " "
            << pct_delta(double(r.model_size_params), double(a.model_size_params));
        s << std::left << std::setw(14) << r.label << std::setw(6) << mode_name(r.mode) << std::setw(5)
          << r.condition_channel_size << std::setw(26) << enc.str() << std::setw(26) << dec.str()
          << std::setw(26) << par.str() << "\n";
    }
    return s.str();
}

std::string complexity_csv(const std::vector<ComplexityReport>& reports) {
    std::ostringstream s;
    s << "label,mode,cond_channels,enc_kmacs_per_pixel,dec_kmacs_per_pixel,model_size_params\n";
    for (const auto& r : reports) {
        s << r.label << "," << mode_name(r.mode) << "," << r.condition_channel_size << ","
          << std::setprecision(12) << r.enc_kmacs_per_pixel << "," << r.dec_kmacs_per_pixel << ","
          << r.model_size_params << "\n";
    }
    return s.str();
}

std::string complexity_json(const std::vector<ComplexityReport>& reports, int anchor_index) {
    if (anchor_index < 0 || anchor_index >= int(reports.size()))
        throw ArgumentError("complexity json: anchor index out of range");
    const ComplexityReport& a = reports[anchor_index];
    nlohmann::json out = nlohmann::json::array();
    for (const auto& r : reports) {
        nlohmann::json j;
        j["label"] = r.label;
        j["mode"] = mode_name(r.mode);
        j["cond_channels"] = r.condition_channel_size;
        j["enc_kmacs_per_pixel"] = r.enc_kmacs_per_pixel;
        j["dec_kmacs_per_pixel"] = r.dec_kmacs_per_pixel;
        j["model_size_params"] = r.model_size_params;
        j["enc_delta_pct"] =
            a.enc_kmacs_per_pixel ? (r.enc_kmacs_per_pixel / a.enc_kmacs_per_pixel - 1.0) * 100.0 : 0.0;
        j["dec_delta_pct"] =
            a.dec_kmacs_per_pixel ? (r.dec_kmacs_per_pixel / a.dec_kmacs_per_pixel - 1.0) * 100.0 : 0.0;
        j["params_delta_pct"] =
            a.model_size_params ? (double(r.model_size_params) / double(a.model_size_params) - 1.0) * 100.0
                                : 0.0;
        out.push_back(j);
    }
    return out.dump(2);
}

}  // namespace complexity
}  // namespace nrdc
