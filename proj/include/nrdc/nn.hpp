#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>

#include "nrdc/ops.hpp"

namespace nrdc {
namespace nn {

// Owns every learnable tensor of a model, keyed by hierarchical name
// ("menet.lvl0.c1.w", ...). Checkpointing, freezing and the optimizer all
// work off this map.
struct ParamRegistry {
    std::map<std::string, Var> params;
    std::mt19937_64 rng;

    explicit ParamRegistry(std::uint64_t seed) : rng(seed) {}

    Var param(const std::string& name, std::vector<int> shape, double stddev);
    Var zeros_param(const std::string& name, std::vector<int> shape);

    void set_trainable_prefixes(const std::vector<std::string>& prefixes);
    void zero_grads();
    std::uint64_t hash_prefix(const std::string& prefix) const;  // FNV-1a over raw bytes
};

struct Conv2d {
    Var w, b;
    int cin = 0, cout = 0, k = 0, stride = 1, pad = 0;
    Var operator()(const Var& x) const { return ops::conv2d(x, w, b, stride, pad); }
};

struct ConvTranspose2d {
    Var w, b;
    int cin = 0, cout = 0, k = 0, stride = 1, pad = 0;
    Var operator()(const Var& x) const { return ops::conv_transpose2d(x, w, b, stride, pad); }
};

// He-style fan-in init; zero_out makes the layer start as a zero map.
Conv2d make_conv(ParamRegistry& reg, const std::string& name, int cin, int cout, int k, int stride,
                 int pad, bool zero_out = false);
ConvTranspose2d make_deconv(ParamRegistry& reg, const std::string& name, int cin, int cout, int k,
                            int stride, int pad);

// x + c2(lrelu(c1(x))), width-preserving. zero_out zero-inits c2 so the
// block starts as identity.
struct ResBlock {
    Conv2d c1, c2;
    Var operator()(const Var& x) const { return ops::add(x, c2(ops::leaky_relu(c1(x)))); }
};
ResBlock make_resblock(ParamRegistry& reg, const std::string& name, int width, bool zero_out = false);

struct Adam {
    double lr = 1e-4;
    double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    std::int64_t t = 0;
    std::map<std::string, std::pair<Tensor, Tensor>> state;  // m, v per param

    void step(ParamRegistry& reg);
};

}  // namespace nn
}  // namespace nrdc
