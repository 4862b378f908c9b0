#include "nrdc/model.hpp"

namespace nrdc {

using namespace ops;

void FeatureExtractor::describe(complexity::GraphBuilder& g, complexity::Side side) const {
    g.at(g.graph.input_h, g.graph.input_w);
    g.conv("fe.in", 3, in.cout, 3, 1, 1, side);
    g.conv("fe.rb.c1", rb.c1.cin, rb.c1.cout, 3, 1, 1, side);
    g.conv("fe.rb.c2", rb.c2.cin, rb.c2.cout, 3, 1, 1, side);
}

void RefineNet::describe(complexity::GraphBuilder& g, complexity::Side side) const {
    g.at(g.graph.input_h, g.graph.input_w);
    for (const auto* rb : {&rb1, &rb2}) {
        std::string p = rb == &rb1 ? "refine.rb1" : "refine.rb2";
        g.conv(p + ".c1", rb->c1.cin, rb->c1.cout, 3, 1, 1, side);
        g.conv(p + ".c2", rb->c2.cin, rb->c2.cout, 3, 1, 1, side);
    }
}

void PixelProjection::describe(complexity::GraphBuilder& g, complexity::Side side) const {
    g.at(g.graph.input_h, g.graph.input_w);
    g.conv("proj.conv", conv.cin, 3, 3, 1, 1, side);
}

Var extract_features(const CodecModel& model, const Var& ref_frame) {
    return model.fe(ref_frame);
}

Var build_temporal_predictor(const Var& ref_features, const Var& decoded_flow) {
    return warp(ref_features, decoded_flow);
}

ConditionBundle build_condition(const CodecModel& model, const Var& ref_frame, const Var& decoded_flow) {
    ConditionBundle b;
    b.channel_size = model.cfg.cond_channels;
    b.ref_features = extract_features(model, ref_frame);
    b.predictor = build_temporal_predictor(b.ref_features, decoded_flow);
    b.refined = model.refine(b.predictor);
    // x_ddot_c comes from the raw x_c, never the refined condition
    if (model.cfg.mode != CodingMode::CC) b.pixel_predictor = model.proj(b.predictor);
    return b;
}

}  // namespace nrdc
