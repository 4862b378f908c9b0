#pragma once

#include <cassert>
#include <cstdint>
#include <vector>

namespace nrdc {

// Dense row-major tensor of doubles. Shapes are small (<= 4 dims); the
// codec mostly works with (C, H, W) feature maps and {1} scalars.
struct Tensor {
    std::vector<int> shape;
    std::vector<double> d;

    Tensor() = default;
    explicit Tensor(std::vector<int> s) : shape(std::move(s)), d(numel_of(shape), 0.0) {}

    static std::size_t numel_of(const std::vector<int>& s) {
        std::size_t n = 1;
        for (int x : s) n *= static_cast<std::size_t>(x);
        return n;
    }
    static Tensor zeros(std::vector<int> s) { return Tensor(std::move(s)); }
    static Tensor full(std::vector<int> s, double v) {
        Tensor t(std::move(s));
        for (auto& x : t.d) x = v;
        return t;
    }
    static Tensor scalar(double v) { return full({1}, v); }

    std::size_t numel() const { return d.size(); }
    bool same_shape(const Tensor& o) const { return shape == o.shape; }

    // (C,H,W) accessors
    int channels() const { return shape.size() == 3 ? shape[0] : 1; }
    int height() const { return shape.size() == 3 ? shape[1] : (shape.size() == 2 ? shape[0] : 1); }
    int width() const { return shape.size() == 3 ? shape[2] : (shape.size() == 2 ? shape[1] : 1); }

    double& at(int c, int y, int x) {
        return d[(static_cast<std::size_t>(c) * shape[1] + y) * shape[2] + x];
    }
    double at(int c, int y, int x) const {
        return d[(static_cast<std::size_t>(c) * shape[1] + y) * shape[2] + x];
    }

    double item() const {
        assert(numel() == 1);
        return d[0];
    }

    double max_abs() const {
        double m = 0;
        for (double v : d) m = v < 0 ? (m < -v ? -v : m) : (m < v ? v : m);
        return m;
    }
};

}  // namespace nrdc
