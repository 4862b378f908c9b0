#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nrdc/config.hpp"
#include "nrdc/errors.hpp"

namespace nrdc {
namespace complexity {

enum class LayerKind { conv, transposed_conv, elementwise, resample, warp };
enum class Side { encoder_only, decoder_only, both };

struct LayerSpec {
    LayerKind kind = LayerKind::conv;
    std::string name;
    int c_in = 0, c_out = 0;
    int kh = 0, kw = 0;
    int stride = 1, padding = 0;
    Side side = Side::both;
    int in_h = 0, in_w = 0;  // resolved while building the graph
};

struct ComputeGraphSummary {
    std::vector<LayerSpec> layers;
    int input_h = 0, input_w = 0;
};

// Tracks the current spatial dims of one branch while a model enumerates
// its layers. `at(h, w)` rebases the branch (after a warp joins another
// resolution, etc.).
struct GraphBuilder {
    ComputeGraphSummary graph;
    int h = 0, w = 0;

    GraphBuilder(int input_h, int input_w) : h(input_h), w(input_w) {
        graph.input_h = input_h;
        graph.input_w = input_w;
    }
    void at(int hh, int ww) {
        h = hh;
        w = ww;
    }
    void conv(const std::string& name, int cin, int cout, int k, int stride, int pad, Side side);
    void deconv(const std::string& name, int cin, int cout, int k, int stride, int pad, Side side);
    void warp(const std::string& name, int channels, Side side);
    void elementwise(const std::string& name, int channels, Side side);
};

struct MacSplit {
    double enc_macs_per_pixel = 0;
    double dec_macs_per_pixel = 0;
    // conv + transposed_conv subtotal (total MACs, not per pixel), used by
    // the instrumented-execution cross-check
    std::uint64_t enc_conv_macs_total = 0;
    std::uint64_t dec_conv_macs_total = 0;
    std::uint64_t enc_warp_macs_total = 0;
    std::uint64_t dec_warp_macs_total = 0;
};

// conv: Hout*Wout*c_out*(kh*kw*c_in); transposed conv symmetric
// (Hin*Win*c_in*kh*kw*c_out); warp 4*C per pixel; elementwise/resample 0.
// Throws GraphError naming the layer when the stride chain does not close.
MacSplit count_macs(const ComputeGraphSummary& graph);

// conv params = kh*kw*c_in*c_out + c_out; elementwise/resample/warp = 0.
std::int64_t count_params(const ComputeGraphSummary& graph);

struct ComplexityReport {
    double enc_kmacs_per_pixel = 0;
    double dec_kmacs_per_pixel = 0;
    std::int64_t model_size_params = 0;
    int condition_channel_size = 0;
    CodingMode mode = CodingMode::CC;
    std::string label;
};

// Per-frame inter-coding compute graph of a codec configuration (the
// layers executed once per inter frame; intra coder excluded).
ComputeGraphSummary build_codec_graph(const CodecConfig& cfg, int input_h, int input_w);

ComplexityReport report_for(const CodecConfig& cfg, int input_h = 64, int input_w = 64);

// One row per config plus percentage deltas against configs[anchor_index].
std::string render_complexity_table(const std::vector<ComplexityReport>& reports, int anchor_index);
std::string complexity_csv(const std::vector<ComplexityReport>& reports);
std::string complexity_json(const std::vector<ComplexityReport>& reports, int anchor_index);

}  // namespace complexity
}  // namespace nrdc
