#pragma once

#include <optional>
#include <random>
#include <tuple>

#include "nrdc/bitstream.hpp"
#include "nrdc/complexity.hpp"
#include "nrdc/config.hpp"
#include "nrdc/data_pipeline.hpp"
#include "nrdc/entropy.hpp"
#include "nrdc/nn.hpp"

namespace nrdc {

// ---------------------------------------------------------------- motion

// Dense optical flow, channel 0 horizontal / 1 vertical, in pixels.
struct FlowField {
    Tensor vectors;  // 2 x H x W
};

struct MotionBitstreamSegment {
    std::vector<std::uint8_t> payload;
    int latent_channels = 0, latent_h = 0, latent_w = 0;
    double estimated_bits = 0;
};

// 3-level coarse-to-fine flow estimator.
struct FlowNet {
    struct Level {
        nn::Conv2d c1, c2, c3;
    };
    std::vector<Level> levels;
    Var forward(const Var& x_t, const Var& x_ref) const;
    void describe(complexity::GraphBuilder& g) const;
};

// 4x stride-2 autoencoder over the flow field with a factorized
// per-channel Gaussian prior on the /16 latent.
struct MotionCodec {
    nn::Conv2d e1, e2, e3, e4;
    nn::ConvTranspose2d d1, d2, d3, d4;
    Var prior_mu, prior_sigma_raw;  // {latent_channels}

    Var encode(const Var& flow) const;
    Var decode(const Var& latent) const;
    // broadcast per-channel (mu, sigma) to the latent shape
    std::pair<Tensor, Tensor> prior_tensors(int h, int w) const;
    void describe(complexity::GraphBuilder& g) const;
};

// ------------------------------------------------------------- condition

struct FeatureExtractor {
    nn::Conv2d in;
    nn::ResBlock rb;
    Var operator()(const Var& frame) const { return rb(ops::leaky_relu(in(frame))); }
    void describe(complexity::GraphBuilder& g, complexity::Side side) const;
};

// Two width-C residual blocks; final conv zero-initialized so refinement
// starts as the identity.
struct RefineNet {
    nn::ResBlock rb1, rb2;
    Var operator()(const Var& x_c) const { return rb2(rb1(x_c)); }
    void describe(complexity::GraphBuilder& g, complexity::Side side) const;
};

// Single 3x3 conv, C -> 3, no nonlinearity, unclamped.
struct PixelProjection {
    nn::Conv2d conv;
    Var operator()(const Var& x_c) const { return conv(x_c); }
    void describe(complexity::GraphBuilder& g, complexity::Side side) const;
};

struct ConditionBundle {
    Var ref_features;     // x_tilde_{t-1}, C x H x W
    Var predictor;        // x_c = warp(ref_features, flow)
    Var refined;          // x_dot_c
    Var pixel_predictor;  // x_ddot_c, 3 x H x W (CR/MCR only, else null)
    int channel_size = 0;
};

// ------------------------------------------------------------------ mask

struct MaskGenerator {
    nn::Conv2d in, out;
    nn::ResBlock rb1, rb2;
    // mask in [0,1]^{1 x H x W} from concat(flow, pixel_predictor)
    Var operator()(const Var& decoded_flow, const Var& pixel_predictor) const;
    void describe(complexity::GraphBuilder& g, complexity::Side side) const;
};

// ----------------------------------------------------------- inter codec

struct InterCodecNets {
    // G_enc: 4 stride-2 stages, condition concatenated at the input and
    // (optionally) again at /4
    nn::Conv2d ge1, ge2, ge3, ge4;
    nn::Conv2d cond4a, cond4b;  // condition reducer to /4 (multi-scale only)
    // hyperprior
    nn::Conv2d he1, he2;
    nn::ConvTranspose2d hd1, hd2;
    Var z_mu, z_sigma_raw;  // factorized prior on z, per channel
    // temporal prior: condition to /16
    nn::Conv2d tp1, tp2, tp3, tp4;
    // prior fusion -> (mu, sigma_raw) for y
    nn::Conv2d fu1, fu2;
    // decoder-side condition reducer to /16
    nn::Conv2d dc1, dc2, dc3, dc4;
    // G_dec: 4 stride-2 transposed stages to dec_features channels
    nn::ConvTranspose2d gd1, gd2, gd3, gd4;
    // frame generator: 2 resblocks on concat(dec_features, x_dot_c), conv to 3
    nn::ResBlock fg1, fg2;
    nn::Conv2d fg_out;
};

struct ReconstructionRecord {
    Frame reconstruction;  // x_hat_t, clamped to [0,1]
    double total_bits = 0;
    double motion_bits = 0;
    double inter_bits = 0;
    CodingMode mode = CodingMode::CC;
    std::optional<double> mask_mean;
};

// --------------------------------------------------------------- intra

struct IntraAE {
    nn::Conv2d e1, e2, e3;
    nn::ConvTranspose2d d1, d2, d3;
    Var prior_mu, prior_sigma_raw;
};

enum class IntraMethod { learned_ae, lossless_passthrough };

struct IntraResult {
    Frame reconstruction;
    double bits = 0;
    IntraMethod method = IntraMethod::lossless_passthrough;
};

// ----------------------------------------------------------- full model

struct CodecModel {
    CodecConfig cfg;
    nn::ParamRegistry reg;

    FlowNet flownet;              // "menet."
    MotionCodec mcodec;           // "mcodec."
    FeatureExtractor fe;          // "fe."
    RefineNet refine;             // "refine."   (inter-codec group)
    PixelProjection proj;         // "proj."     (CR/MCR only)
    MaskGenerator maskgen;        // "maskgen."  (MCR only)
    InterCodecNets inter;         // "inter."
    IntraAE intra;                // "intra."    (outside Table-1 training)

    explicit CodecModel(const CodecConfig& config);
};

struct CodecState {
    Frame reference_frame;  // x_hat_{t-1}
    int frame_index = 0;
};

// --------------------------------------------------- per-frame operations

Var extract_features(const CodecModel& model, const Var& ref_frame);
Var build_temporal_predictor(const Var& ref_features, const Var& decoded_flow);
ConditionBundle build_condition(const CodecModel& model, const Var& ref_frame, const Var& decoded_flow);

// CC -> x_t; CR -> x_t - xddot; MCR -> x_t - m (.) xddot.
// m must be present iff mode == MCR; xddot must be present unless CC.
Var form_codec_input(const Var& x_t, const Var& pixel_predictor, const std::optional<Var>& mask,
                     CodingMode mode);
Var generate_frame(const CodecModel& model, const Var& dec_features, const Var& refined_cond,
                   const Var& pixel_predictor, const std::optional<Var>& mask, CodingMode mode);

Var inter_encode(const CodecModel& model, const Var& input_signal, const Var& refined_cond);
Var inter_decode(const CodecModel& model, const Var& y_hat, const Var& refined_cond);

// (mu, sigma) for y from hyper-decoded features + temporal prior.
std::pair<Var, Var> build_priors(const CodecModel& model, const Var& z_hat, const Var& refined_cond);

// Tensor-level spec surface -----------------------------------------------

FlowField estimate_flow(const CodecModel& model, const Frame& x_t, const Frame& x_ref);
std::pair<MotionBitstreamSegment, FlowField> encode_motion(const CodecModel& model, const FlowField& flow);
FlowField decode_motion(const CodecModel& model, const MotionBitstreamSegment& segment);

// Full eval-mode inter frame: returns the record and the two payloads.
struct CodedFrame {
    ReconstructionRecord record;
    std::vector<std::uint8_t> motion_payload;
    std::vector<std::uint8_t> inter_payload;
    // encoder-side taps kept for visualization
    Tensor codec_input;
    Tensor pixel_predictor_map;          // empty shape when CC
    std::optional<Tensor> mask_map;      // MCR only
};
CodedFrame encode_inter_frame(const CodecModel& model, const Frame& x_t, const CodecState& state);
Frame decode_inter_frame(const CodecModel& model, const std::vector<std::uint8_t>& motion_payload,
                         const std::vector<std::uint8_t>& inter_payload, const CodecState& state);

IntraResult code_intra(const CodecModel& model, const Frame& x, IntraMethod method);
Frame decode_intra(const CodecModel& model, const FrameRecord& record, int height, int width);
// payload + reconstruction + frame type for the container
std::tuple<std::vector<std::uint8_t>, Frame, FrameType> intra_code_payload(const CodecModel& model,
                                                                           const Frame& x,
                                                                           IntraMethod method);

Var hyper_encode(const CodecModel& model, const Var& y);

// Optional per-frame debug dumps (x_t, pixel predictor, codec input, mask).
struct DebugSink {
    std::string dir;  // empty = disabled
};

struct SequenceCodingResult {
    std::vector<Frame> reconstructions;  // padded-domain, bitwise decoder-identical
    std::vector<double> frame_bits;      // payload bits incl. frame record header
    Bitstream bitstream;
};

// Encode a sequence under a GOP schedule (frames padded internally to
// multiples of 64; reconstructions returned unpadded).
SequenceCodingResult encode_sequence(const CodecModel& model, const FrameSequence& seq,
                                     const GopSchedule& gop, IntraMethod intra_method,
                                     const DebugSink& dbg = {});
std::vector<Frame> decode_sequence(const CodecModel& model, const Bitstream& bs, int height, int width);

// ---------------------------------------------------------------- training path

// One coded frame inside a training graph: additive-noise quantization,
// estimated rates only, everything differentiable.
struct TrainFrameResult {
    Var reconstruction;  // clamped, 3 x H x W
    Var total_bits;      // scalar, motion + inter estimated bits
    Var motion_bits;     // scalar
    Var pixel_predictor; // null for CC
};
TrainFrameResult code_frame_train(const CodecModel& model, const Var& x_t, const Var& reference,
                                  std::mt19937_64& rng);

namespace complexity {
// Graph built from an existing model instance (same layer dims the
// instrumented execution will see).
ComputeGraphSummary build_codec_graph_for(const CodecModel& model, int input_h, int input_w);
}  // namespace complexity

}  // namespace nrdc
