#include "nrdc/nn.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

namespace nrdc {
namespace nn {

Var ParamRegistry::param(const std::string& name, std::vector<int> shape, double stddev) {
    if (params.count(name)) throw std::logic_error("duplicate parameter name: " + name);
    Tensor t(shape);
    std::normal_distribution<double> dist(0.0, stddev);
    if (stddev > 0)
        for (auto& v : t.d) v = dist(rng);
    Var p = make_leaf(std::move(t), true);
    p->name = name;
    params[name] = p;
    return p;
}

Var ParamRegistry::zeros_param(const std::string& name, std::vector<int> shape) {
    return param(name, std::move(shape), 0.0);
}

void ParamRegistry::set_trainable_prefixes(const std::vector<std::string>& prefixes) {
    for (auto& [name, p] : params) {
        bool train = false;
        for (const auto& pre : prefixes)
            if (name.rfind(pre, 0) == 0) train = true;
        p->requires_grad = train;
    }
}

void ParamRegistry::zero_grads() {
    for (auto& [name, p] : params) {
        p->ensure_grad();
        p->zero_grad();
    }
}

std::uint64_t ParamRegistry::hash_prefix(const std::string& prefix) const {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](const void* data, std::size_t len) {
        const unsigned char* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < len; ++i) {
            h ^= p[i];
            h *= 1099511628211ull;
        }
    };
    for (const auto& [name, p] : params) {
        if (name.rfind(prefix, 0) != 0) continue;
        mix(name.data(), name.size());
        mix(p->val.d.data(), p->val.d.size() * sizeof(double));
    }
    return h;
}

Conv2d make_conv(ParamRegistry& reg, const std::string& name, int cin, int cout, int k, int stride,
                 int pad, bool zero_out) {
    Conv2d c;
    c.cin = cin;
    c.cout = cout;
    c.k = k;
    c.stride = stride;
    c.pad = pad;
    double stddev = zero_out ? 0.0 : std::sqrt(2.0 / (cin * k * k));
    c.w = reg.param(name + ".w", {cout, cin, k, k}, stddev);
    c.b = reg.zeros_param(name + ".b", {cout});
    return c;
}

ConvTranspose2d make_deconv(ParamRegistry& reg, const std::string& name, int cin, int cout, int k,
                            int stride, int pad) {
    ConvTranspose2d c;
    c.cin = cin;
    c.cout = cout;
    c.k = k;
    c.stride = stride;
    c.pad = pad;
    c.w = reg.param(name + ".w", {cin, cout, k, k}, std::sqrt(2.0 / (cin * k * k)));
    c.b = reg.zeros_param(name + ".b", {cout});
    return c;
}

ResBlock make_resblock(ParamRegistry& reg, const std::string& name, int width, bool zero_out) {
    ResBlock r;
    r.c1 = make_conv(reg, name + ".c1", width, width, 3, 1, 1);
    r.c2 = make_conv(reg, name + ".c2", width, width, 3, 1, 1, zero_out);
    return r;
}

void Adam::step(ParamRegistry& reg) {
    ++t;
    double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
    for (auto& [name, p] : reg.params) {
        if (!p->requires_grad) continue;
        p->ensure_grad();
        auto it = state.find(name);
        if (it == state.end())
            it = state.emplace(name, std::make_pair(Tensor::zeros(p->val.shape), Tensor::zeros(p->val.shape))).first;
        Tensor& m = it->second.first;
        Tensor& v = it->second.second;
        for (std::size_t i = 0; i < p->val.numel(); ++i) {
            double g = p->grad.d[i];
            m.d[i] = beta1 * m.d[i] + (1 - beta1) * g;
            v.d[i] = beta2 * v.d[i] + (1 - beta2) * g * g;
            p->val.d[i] -= lr * (m.d[i] / bc1) / (std::sqrt(v.d[i] / bc2) + eps);
        }
    }
}

}  // namespace nn
}  // namespace nrdc
