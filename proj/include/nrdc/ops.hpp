#pragma once

#include <cstdint>
#include <random>

#include "nrdc/autograd.hpp"

namespace nrdc {

// MAC accounting hook for the complexity cross-check. When enabled, conv /
// transposed-conv / warp kernels add their analytic MAC count (padding taps
// included) to the counter as they execute.
struct MacCounter {
    static bool enabled;
    static std::uint64_t conv_macs;
    static std::uint64_t warp_macs;
    static void reset() { conv_macs = warp_macs = 0; }
};

namespace ops {

// elementwise / arithmetic
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, double k);
Var add_scalar(const Var& a, double k);
Var leaky_relu(const Var& x, double slope = 0.1);
Var sigmoid(const Var& x);
Var softplus(const Var& x);
Var clamp01(const Var& x);

// reductions
Var sum(const Var& x);
Var mean(const Var& x);
Var mse(const Var& a, const Var& b);

// shape / channel plumbing
Var concat_channels(const std::vector<Var>& xs);
Var slice_channels(const Var& x, int from, int to);  // [from, to)
Var replicate_channels(const Var& x, int times);
Var broadcast_channel_param(const Var& p, int h, int w);  // {C} -> C x h x w

// spatial
Var conv2d(const Var& x, const Var& w, const Var& b, int stride, int pad);
Var conv_transpose2d(const Var& x, const Var& w, const Var& b, int stride, int pad);
Var avg_pool2(const Var& x);
Var upsample2_nearest(const Var& x);

// Backward warp: out(p) = in(p + flow(p)), bilinear, clamp-to-edge.
// Differentiable in both the features and the flow.
Var warp(const Var& features, const Var& flow);

// Additive-uniform-noise quantization proxy (training phase). Gradient is
// the identity.
Var quantize_noise(const Var& y, std::mt19937_64& rng);

// Total coding cost in bits under the per-element Gaussian model:
//   p = Phi((y - mu + .5)/sigma) - Phi((y - mu - .5)/sigma), floored at 2^-16.
// Returns a scalar; differentiable in y, mu, sigma (zero grad where floored).
Var gaussian_bits(const Var& y, const Var& mu, const Var& sigma);

// Non-autograd helpers shared with the entropy coder.
double gaussian_symbol_prob(double centered, double sigma);  // un-floored
double normal_cdf(double x);

}  // namespace ops
}  // namespace nrdc
