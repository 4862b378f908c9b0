#include "nrdc/model.hpp"

namespace nrdc {

Var MaskGenerator::operator()(const Var& decoded_flow, const Var& pixel_predictor) const {
    if (decoded_flow->val.shape[1] != pixel_predictor->val.shape[1] ||
        decoded_flow->val.shape[2] != pixel_predictor->val.shape[2])
        throw ArgumentError("generate_mask: spatial dimension mismatch");
    Var h = ops::leaky_relu(in(ops::concat_channels({decoded_flow, pixel_predictor})));
    h = rb2(rb1(h));
    return ops::sigmoid(out(h));
}

void MaskGenerator::describe(complexity::GraphBuilder& g, complexity::Side side) const {
    g.at(g.graph.input_h, g.graph.input_w);
    g.conv("maskgen.in", 5, in.cout, 3, 1, 1, side);
    g.conv("maskgen.rb1.c1", rb1.c1.cin, rb1.c1.cout, 3, 1, 1, side);
    g.conv("maskgen.rb1.c2", rb1.c2.cin, rb1.c2.cout, 3, 1, 1, side);
    g.conv("maskgen.rb2.c1", rb2.c1.cin, rb2.c1.cout, 3, 1, 1, side);
    g.conv("maskgen.rb2.c2", rb2.c2.cin, rb2.c2.cout, 3, 1, 1, side);
    g.conv("maskgen.out", out.cin, 1, 3, 1, 1, side);
}

}  // namespace nrdc
