#include <cmath>

#include "nrdc/model.hpp"

namespace nrdc {

using namespace ops;

Var FlowNet::forward(const Var& x_t, const Var& x_ref) const {
    if (!x_t->val.same_shape(x_ref->val))
        throw ArgumentError("estimate_flow: frame dimension mismatch");
    int nlvl = static_cast<int>(levels.size());
    std::vector<Var> tgt{x_t}, ref{x_ref};
    for (int l = 1; l < nlvl; ++l) {
        tgt.push_back(avg_pool2(tgt.back()));
        ref.push_back(avg_pool2(ref.back()));
    }
    Var flow;
    for (int l = nlvl - 1; l >= 0; --l) {
        Var up;
        if (flow)
            up = scale(upsample2_nearest(flow), 2.0);
        else
            up = make_leaf(Tensor::zeros({2, tgt[l]->val.shape[1], tgt[l]->val.shape[2]}));
        Var warped = warp(ref[l], up);
        Var in = concat_channels({tgt[l], warped, up});
        const Level& lv = levels[l];
        Var h = leaky_relu(lv.c1(in));
        h = leaky_relu(lv.c2(h));
        flow = add(up, lv.c3(h));
    }
    return flow;
}

void FlowNet::describe(complexity::GraphBuilder& g) const {
    int h0 = g.graph.input_h, w0 = g.graph.input_w;
    int nlvl = static_cast<int>(levels.size());
    for (int l = nlvl - 1; l >= 0; --l) {
        int h = h0 >> l, w = w0 >> l;
        g.at(h, w);
        std::string p = "menet.lvl" + std::to_string(l);
        g.warp(p + ".warp", 3, complexity::Side::encoder_only);
        g.conv(p + ".c1", 8, levels[l].c1.cout, 3, 1, 1, complexity::Side::encoder_only);
        g.conv(p + ".c2", levels[l].c2.cin, levels[l].c2.cout, 3, 1, 1, complexity::Side::encoder_only);
        g.conv(p + ".c3", levels[l].c3.cin, 2, 3, 1, 1, complexity::Side::encoder_only);
    }
}

Var MotionCodec::encode(const Var& flow) const {
    if (flow->val.shape[1] % 16 || flow->val.shape[2] % 16)
        throw ArgumentError("encode_motion: dimensions must be divisible by 16");
    Var h = leaky_relu(e1(flow));
    h = leaky_relu(e2(h));
    h = leaky_relu(e3(h));
    return e4(h);
}

Var MotionCodec::decode(const Var& latent) const {
    Var h = leaky_relu(d1(latent));
    h = leaky_relu(d2(h));
    h = leaky_relu(d3(h));
    return d4(h);
}

std::pair<Tensor, Tensor> MotionCodec::prior_tensors(int h, int w) const {
    NoGradGuard ng;
    Var mu = broadcast_channel_param(prior_mu, h, w);
    Var sigma = add_scalar(softplus(broadcast_channel_param(prior_sigma_raw, h, w)), entropy::kSigmaMin);
    return {mu->val, sigma->val};
}

void MotionCodec::describe(complexity::GraphBuilder& g) const {
    namespace cx = complexity;
    g.at(g.graph.input_h, g.graph.input_w);
    g.conv("mcodec.e1", 2, e1.cout, 3, 2, 1, cx::Side::encoder_only);
    g.conv("mcodec.e2", e2.cin, e2.cout, 3, 2, 1, cx::Side::encoder_only);
    g.conv("mcodec.e3", e3.cin, e3.cout, 3, 2, 1, cx::Side::encoder_only);
    g.conv("mcodec.e4", e4.cin, e4.cout, 3, 2, 1, cx::Side::encoder_only);
    // motion decoder runs on both sides (the encoder reconstructs f_hat)
    g.deconv("mcodec.d1", d1.cin, d1.cout, 4, 2, 1, cx::Side::both);
    g.deconv("mcodec.d2", d2.cin, d2.cout, 4, 2, 1, cx::Side::both);
    g.deconv("mcodec.d3", d3.cin, d3.cout, 4, 2, 1, cx::Side::both);
    g.deconv("mcodec.d4", d4.cin, 2, 4, 2, 1, cx::Side::both);
}

FlowField estimate_flow(const CodecModel& model, const Frame& x_t, const Frame& x_ref) {
    NoGradGuard ng;
    Var f = model.flownet.forward(make_leaf(x_t.pixels), make_leaf(x_ref.pixels));
    return FlowField{f->val};
}

std::pair<MotionBitstreamSegment, FlowField> encode_motion(const CodecModel& model,
                                                           const FlowField& flow) {
    NoGradGuard ng;
    Var y = model.mcodec.encode(make_leaf(flow.vectors));
    auto [mu, sigma] = model.mcodec.prior_tensors(y->val.shape[1], y->val.shape[2]);
    MotionBitstreamSegment seg;
    seg.latent_channels = y->val.shape[0];
    seg.latent_h = y->val.shape[1];
    seg.latent_w = y->val.shape[2];
    seg.payload = entropy::encode_latent(y->val, mu, sigma);
    Tensor y_hat = entropy::dequantize_symbols(entropy::quantize_symbols(y->val, mu), mu);
    seg.estimated_bits = entropy::estimate_rate(y_hat, mu, sigma);
    Var f_hat = model.mcodec.decode(make_leaf(y_hat));
    return {std::move(seg), FlowField{f_hat->val}};
}

FlowField decode_motion(const CodecModel& model, const MotionBitstreamSegment& segment) {
    NoGradGuard ng;
    auto [mu, sigma] = model.mcodec.prior_tensors(segment.latent_h, segment.latent_w);
    Tensor y_hat = entropy::decode_latent(segment.payload, mu, sigma);
    Var f_hat = model.mcodec.decode(make_leaf(y_hat));
    return FlowField{f_hat->val};
}

}  // namespace nrdc
