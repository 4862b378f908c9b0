#include "nrdc/ops.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nrdc {

bool MacCounter::enabled = false;
std::uint64_t MacCounter::conv_macs = 0;
std::uint64_t MacCounter::warp_macs = 0;

namespace ops {

namespace {

void check_same_shape(const Var& a, const Var& b, const char* what) {
    if (!a->val.same_shape(b->val)) throw std::invalid_argument(std::string(what) + ": shape mismatch");
}

Var elementwise_binary(const Var& a, const Var& b, double (*f)(double, double),
                       void (*bw)(double, double, double, double&, double&)) {
    check_same_shape(a, b, "elementwise");
    Tensor out(a->val.shape);
    for (std::size_t i = 0; i < out.numel(); ++i) out.d[i] = f(a->val.d[i], b->val.d[i]);
    return make_node(std::move(out), {a, b}, [a, b, bw](Node& n) {
        for (std::size_t i = 0; i < n.val.numel(); ++i) {
            double da = 0, db = 0;
            bw(a->val.d[i], b->val.d[i], n.grad.d[i], da, db);
            if (a->requires_grad) a->grad.d[i] += da;
            if (b->requires_grad) b->grad.d[i] += db;
        }
    });
}

}  // namespace

Var add(const Var& a, const Var& b) {
    return elementwise_binary(
        a, b, [](double x, double y) { return x + y; },
        [](double, double, double g, double& da, double& db) { da = g; db = g; });
}

Var sub(const Var& a, const Var& b) {
    return elementwise_binary(
        a, b, [](double x, double y) { return x - y; },
        [](double, double, double g, double& da, double& db) { da = g; db = -g; });
}

Var mul(const Var& a, const Var& b) {
    return elementwise_binary(
        a, b, [](double x, double y) { return x * y; },
        [](double x, double y, double g, double& da, double& db) { da = g * y; db = g * x; });
}

Var scale(const Var& a, double k) {
    Tensor out(a->val.shape);
    for (std::size_t i = 0; i < out.numel(); ++i) out.d[i] = a->val.d[i] * k;
    return make_node(std::move(out), {a}, [a, k](Node& n) {
        for (std::size_t i = 0; i < n.val.numel(); ++i) a->grad.d[i] += n.grad.d[i] * k;
    });
}

Var add_scalar(const Var& a, double k) {
    Tensor out(a->val.shape);
    for (std::size_t i = 0; i < out.numel(); ++i) out.d[i] = a->val.d[i] + k;
    return make_node(std::move(out), {a}, [a](Node& n) {
        for (std::size_t i = 0; i < n.val.numel(); ++i) a->grad.d[i] += n.grad.d[i];
    });
}

Var leaky_relu(const Var& x, double slope) {
    Tensor out(x->val.shape);
    for (std::size_t i = 0; i < out.numel(); ++i) {
        double v = x->val.d[i];
        out.d[i] = v >= 0 ? v : slope * v;
    }
    return make_node(std::move(out), {x}, [x, slope](Node& n) {
        for (std::size_t i = 0; i < n.val.numel(); ++i)
            x->grad.d[i] += n.grad.d[i] * (x->val.d[i] >= 0 ? 1.0 : slope);
    });
}

Var sigmoid(const Var& x) {
    Tensor out(x->val.shape);
    for (std::size_t i = 0; i < out.numel(); ++i) out.d[i] = 1.0 / (1.0 + std::exp(-x->val.d[i]));
    return make_node(std::move(out), {x}, [x](Node& n) {
        for (std::size_t i = 0; i < n.val.numel(); ++i) {
            double s = n.val.d[i];
            x->grad.d[i] += n.grad.d[i] * s * (1.0 - s);
        }
    });
}

Var softplus(const Var& x) {
    Tensor out(x->val.shape);
    for (std::size_t i = 0; i < out.numel(); ++i) {
        double v = x->val.d[i];
        out.d[i] = v > 30 ? v : std::log1p(std::exp(v));
    }
    return make_node(std::move(out), {x}, [x](Node& n) {
        for (std::size_t i = 0; i < n.val.numel(); ++i)
            x->grad.d[i] += n.grad.d[i] / (1.0 + std::exp(-x->val.d[i]));
    });
}

Var clamp01(const Var& x) {
    Tensor out(x->val.shape);
    for (std::size_t i = 0; i < out.numel(); ++i) out.d[i] = std::clamp(x->val.d[i], 0.0, 1.0);
    return make_node(std::move(out), {x}, [x](Node& n) {
        for (std::size_t i = 0; i < n.val.numel(); ++i) {
            double v = x->val.d[i];
            if (v > 0.0 && v < 1.0) x->grad.d[i] += n.grad.d[i];
        }
    });
}

Var sum(const Var& x) {
    double s = 0;
    for (double v : x->val.d) s += v;
    return make_node(Tensor::scalar(s), {x}, [x](Node& n) {
        double g = n.grad.d[0];
        for (std::size_t i = 0; i < x->val.numel(); ++i) x->grad.d[i] += g;
    });
}

Var mean(const Var& x) { return scale(sum(x), 1.0 / static_cast<double>(x->val.numel())); }

Var mse(const Var& a, const Var& b) {
    Var d = sub(a, b);
    return mean(mul(d, d));
}

Var concat_channels(const std::vector<Var>& xs) {
    if (xs.empty()) throw std::invalid_argument("concat: empty input");
    int h = xs[0]->val.shape[1], w = xs[0]->val.shape[2];
    int ctot = 0;
    for (const auto& x : xs) {
        if (x->val.shape.size() != 3 || x->val.shape[1] != h || x->val.shape[2] != w)
            throw std::invalid_argument("concat: spatial mismatch");
        ctot += x->val.shape[0];
    }
    Tensor out({ctot, h, w});
    std::size_t off = 0;
    for (const auto& x : xs) {
        std::copy(x->val.d.begin(), x->val.d.end(), out.d.begin() + off);
        off += x->val.numel();
    }
    return make_node(std::move(out), xs, [xs](Node& n) {
        std::size_t off = 0;
        for (const auto& x : xs) {
            if (x->requires_grad)
                for (std::size_t i = 0; i < x->val.numel(); ++i) x->grad.d[i] += n.grad.d[off + i];
            off += x->val.numel();
        }
    });
}

Var slice_channels(const Var& x, int from, int to) {
    int h = x->val.shape[1], w = x->val.shape[2];
    Tensor out({to - from, h, w});
    std::size_t off = static_cast<std::size_t>(from) * h * w;
    std::copy(x->val.d.begin() + off, x->val.d.begin() + off + out.numel(), out.d.begin());
    return make_node(std::move(out), {x}, [x, off](Node& n) {
        for (std::size_t i = 0; i < n.val.numel(); ++i) x->grad.d[off + i] += n.grad.d[i];
    });
}

Var replicate_channels(const Var& x, int times) {
    int h = x->val.shape[1], w = x->val.shape[2];
    if (x->val.shape[0] != 1) throw std::invalid_argument("replicate: expects 1 channel");
    Tensor out({times, h, w});
    std::size_t plane = static_cast<std::size_t>(h) * w;
    for (int c = 0; c < times; ++c)
        std::copy(x->val.d.begin(), x->val.d.end(), out.d.begin() + c * plane);
    return make_node(std::move(out), {x}, [x, times, plane](Node& n) {
        for (int c = 0; c < times; ++c)
            for (std::size_t i = 0; i < plane; ++i) x->grad.d[i] += n.grad.d[c * plane + i];
    });
}

Var broadcast_channel_param(const Var& p, int h, int w) {
    int c = p->val.shape[0];
    Tensor out({c, h, w});
    std::size_t plane = static_cast<std::size_t>(h) * w;
    for (int i = 0; i < c; ++i)
        std::fill(out.d.begin() + i * plane, out.d.begin() + (i + 1) * plane, p->val.d[i]);
    return make_node(std::move(out), {p}, [p, plane](Node& n) {
        for (int i = 0; i < p->val.shape[0]; ++i) {
            double s = 0;
            for (std::size_t j = 0; j < plane; ++j) s += n.grad.d[i * plane + j];
            p->grad.d[i] += s;
        }
    });
}

namespace {

inline int conv_out_dim(int in, int k, int stride, int pad) { return (in + 2 * pad - k) / stride + 1; }

// out(co,oh,ow) = b(co) + sum_{ci,ky,kx} w(co,ci,ky,kx) * x(ci, oh*s-p+ky, ow*s-p+kx)
// Zero-padding taps contribute nothing and are skipped; the MAC convention
// still counts them (full k*k*cin per output element).
void conv2d_forward(const Tensor& x, const Tensor& w, const Tensor& b, int stride, int pad, Tensor& out) {
    int cin = x.shape[0], hin = x.shape[1], win = x.shape[2];
    int cout = w.shape[0], kh = w.shape[2], kw = w.shape[3];
    int hout = out.shape[1], wout = out.shape[2];
    for (int co = 0; co < cout; ++co) {
        double* op = &out.d[static_cast<std::size_t>(co) * hout * wout];
        std::fill(op, op + static_cast<std::size_t>(hout) * wout, b.d[co]);
    }
    for (int co = 0; co < cout; ++co)
        for (int ci = 0; ci < cin; ++ci)
            for (int ky = 0; ky < kh; ++ky)
                for (int kx = 0; kx < kw; ++kx) {
                    double wv = w.d[((static_cast<std::size_t>(co) * cin + ci) * kh + ky) * kw + kx];
                    for (int oh = 0; oh < hout; ++oh) {
                        int ih = oh * stride - pad + ky;
                        if (ih < 0 || ih >= hin) continue;
                        const double* xrow = &x.d[(static_cast<std::size_t>(ci) * hin + ih) * win];
                        double* orow = &out.d[(static_cast<std::size_t>(co) * hout + oh) * wout];
                        int ow0 = 0, ow1 = wout;
                        while (ow0 < wout && ow0 * stride - pad + kx < 0) ++ow0;
                        while (ow1 > ow0 && (ow1 - 1) * stride - pad + kx >= win) --ow1;
                        int base = -pad + kx;
                        for (int ow = ow0; ow < ow1; ++ow) orow[ow] += wv * xrow[ow * stride + base];
                    }
                }
    if (MacCounter::enabled)
        MacCounter::conv_macs += static_cast<std::uint64_t>(hout) * wout * cout * kh * kw * cin;
}

}  // namespace

Var conv2d(const Var& x, const Var& w, const Var& b, int stride, int pad) {
    int cin = x->val.shape[0], hin = x->val.shape[1], win = x->val.shape[2];
    int cout = w->val.shape[0], kh = w->val.shape[2], kw = w->val.shape[3];
    if (w->val.shape[1] != cin) throw std::invalid_argument("conv2d: channel mismatch");
    Tensor out({cout, conv_out_dim(hin, kh, stride, pad), conv_out_dim(win, kw, stride, pad)});
    conv2d_forward(x->val, w->val, b->val, stride, pad, out);
    return make_node(std::move(out), {x, w, b}, [x, w, b, stride, pad](Node& n) {
        int cin = x->val.shape[0], hin = x->val.shape[1], win = x->val.shape[2];
        int cout = w->val.shape[0], kh = w->val.shape[2], kw = w->val.shape[3];
        int hout = n.val.shape[1], wout = n.val.shape[2];
        if (b->requires_grad)
            for (int co = 0; co < cout; ++co) {
                double s = 0;
                const double* gp = &n.grad.d[static_cast<std::size_t>(co) * hout * wout];
                for (int i = 0; i < hout * wout; ++i) s += gp[i];
                b->grad.d[co] += s;
            }
        for (int co = 0; co < cout; ++co)
            for (int ci = 0; ci < cin; ++ci)
                for (int ky = 0; ky < kh; ++ky)
                    for (int kx = 0; kx < kw; ++kx) {
                        std::size_t widx = ((static_cast<std::size_t>(co) * cin + ci) * kh + ky) * kw + kx;
                        double wv = w->val.d[widx];
                        double dw = 0;
                        for (int oh = 0; oh < hout; ++oh) {
                            int ih = oh * stride - pad + ky;
                            if (ih < 0 || ih >= hin) continue;
                            const double* xrow = &x->val.d[(static_cast<std::size_t>(ci) * hin + ih) * win];
                            double* dxrow = x->requires_grad
                                                ? &x->grad.d[(static_cast<std::size_t>(ci) * hin + ih) * win]
                                                : nullptr;
                            const double* grow = &n.grad.d[(static_cast<std::size_t>(co) * hout + oh) * wout];
                            int ow0 = 0, ow1 = wout;
                            while (ow0 < wout && ow0 * stride - pad + kx < 0) ++ow0;
                            while (ow1 > ow0 && (ow1 - 1) * stride - pad + kx >= win) --ow1;
                            int base = -pad + kx;
                            for (int ow = ow0; ow < ow1; ++ow) {
                                double g = grow[ow];
                                dw += g * xrow[ow * stride + base];
                                if (dxrow) dxrow[ow * stride + base] += g * wv;
                            }
                        }
                        if (w->requires_grad) w->grad.d[widx] += dw;
                    }
    });
}

// Weight layout (cin, cout, kh, kw); out dim = (in-1)*stride - 2*pad + k.
Var conv_transpose2d(const Var& x, const Var& w, const Var& b, int stride, int pad) {
    int cin = x->val.shape[0], hin = x->val.shape[1], win = x->val.shape[2];
    if (w->val.shape[0] != cin) throw std::invalid_argument("conv_transpose2d: channel mismatch");
    int cout = w->val.shape[1], kh = w->val.shape[2], kw = w->val.shape[3];
    int hout = (hin - 1) * stride - 2 * pad + kh;
    int wout = (win - 1) * stride - 2 * pad + kw;
    Tensor out({cout, hout, wout});
    for (int co = 0; co < cout; ++co) {
        double* op = &out.d[static_cast<std::size_t>(co) * hout * wout];
        std::fill(op, op + static_cast<std::size_t>(hout) * wout, b->val.d[co]);
    }
    for (int ci = 0; ci < cin; ++ci)
        for (int co = 0; co < cout; ++co)
            for (int ky = 0; ky < kh; ++ky)
                for (int kx = 0; kx < kw; ++kx) {
                    double wv = w->val.d[((static_cast<std::size_t>(ci) * cout + co) * kh + ky) * kw + kx];
                    for (int ih = 0; ih < hin; ++ih) {
                        int oh = ih * stride - pad + ky;
                        if (oh < 0 || oh >= hout) continue;
                        const double* xrow = &x->val.d[(static_cast<std::size_t>(ci) * hin + ih) * win];
                        double* orow = &out.d[(static_cast<std::size_t>(co) * hout + oh) * wout];
                        for (int iw = 0; iw < win; ++iw) {
                            int ow = iw * stride - pad + kx;
                            if (ow < 0 || ow >= wout) continue;
                            orow[ow] += wv * xrow[iw];
                        }
                    }
                }
    if (MacCounter::enabled)
        MacCounter::conv_macs += static_cast<std::uint64_t>(hin) * win * cin * kh * kw * cout;
    return make_node(std::move(out), {x, w, b}, [x, w, b, stride, pad](Node& n) {
        int cin = x->val.shape[0], hin = x->val.shape[1], win = x->val.shape[2];
        int cout = w->val.shape[1], kh = w->val.shape[2], kw = w->val.shape[3];
        int hout = n.val.shape[1], wout = n.val.shape[2];
        if (b->requires_grad)
            for (int co = 0; co < cout; ++co) {
                double s = 0;
                const double* gp = &n.grad.d[static_cast<std::size_t>(co) * hout * wout];
                for (int i = 0; i < hout * wout; ++i) s += gp[i];
                b->grad.d[co] += s;
            }
        for (int ci = 0; ci < cin; ++ci)
            for (int co = 0; co < cout; ++co)
                for (int ky = 0; ky < kh; ++ky)
                    for (int kx = 0; kx < kw; ++kx) {
                        std::size_t widx = ((static_cast<std::size_t>(ci) * cout + co) * kh + ky) * kw + kx;
                        double wv = w->val.d[widx];
                        double dw = 0;
                        for (int ih = 0; ih < hin; ++ih) {
                            int oh = ih * stride - pad + ky;
                            if (oh < 0 || oh >= hout) continue;
                            const double* xrow = &x->val.d[(static_cast<std::size_t>(ci) * hin + ih) * win];
                            double* dxrow = x->requires_grad
                                                ? &x->grad.d[(static_cast<std::size_t>(ci) * hin + ih) * win]
                                                : nullptr;
                            const double* grow = &n.grad.d[(static_cast<std::size_t>(co) * hout + oh) * wout];
                            for (int iw = 0; iw < win; ++iw) {
                                int ow = iw * stride - pad + kx;
                                if (ow < 0 || ow >= wout) continue;
                                double g = grow[ow];
                                dw += g * xrow[iw];
                                if (dxrow) dxrow[iw] += g * wv;
                            }
                        }
                        if (w->requires_grad) w->grad.d[widx] += dw;
                    }
    });
}

Var avg_pool2(const Var& x) {
    int c = x->val.shape[0], h = x->val.shape[1], w = x->val.shape[2];
    int ho = h / 2, wo = w / 2;
    Tensor out({c, ho, wo});
    for (int ci = 0; ci < c; ++ci)
        for (int y = 0; y < ho; ++y)
            for (int xx = 0; xx < wo; ++xx)
                out.at(ci, y, xx) = 0.25 * (x->val.at(ci, 2 * y, 2 * xx) + x->val.at(ci, 2 * y, 2 * xx + 1) +
                                            x->val.at(ci, 2 * y + 1, 2 * xx) + x->val.at(ci, 2 * y + 1, 2 * xx + 1));
    return make_node(std::move(out), {x}, [x](Node& n) {
        int c = n.val.shape[0], ho = n.val.shape[1], wo = n.val.shape[2];
        for (int ci = 0; ci < c; ++ci)
            for (int y = 0; y < ho; ++y)
                for (int xx = 0; xx < wo; ++xx) {
                    double g = 0.25 * n.grad.d[(static_cast<std::size_t>(ci) * ho + y) * wo + xx];
                    x->grad.at(ci, 2 * y, 2 * xx) += g;
                    x->grad.at(ci, 2 * y, 2 * xx + 1) += g;
                    x->grad.at(ci, 2 * y + 1, 2 * xx) += g;
                    x->grad.at(ci, 2 * y + 1, 2 * xx + 1) += g;
                }
    });
}

Var upsample2_nearest(const Var& x) {
    int c = x->val.shape[0], h = x->val.shape[1], w = x->val.shape[2];
    Tensor out({c, 2 * h, 2 * w});
    for (int ci = 0; ci < c; ++ci)
        for (int y = 0; y < 2 * h; ++y)
            for (int xx = 0; xx < 2 * w; ++xx) out.at(ci, y, xx) = x->val.at(ci, y / 2, xx / 2);
    return make_node(std::move(out), {x}, [x](Node& n) {
        int c = x->val.shape[0], h = x->val.shape[1], w = x->val.shape[2];
        for (int ci = 0; ci < c; ++ci)
            for (int y = 0; y < 2 * h; ++y)
                for (int xx = 0; xx < 2 * w; ++xx)
                    x->grad.at(ci, y / 2, xx / 2) += n.grad.at(ci, y, xx);
    });
}

Var warp(const Var& features, const Var& flow) {
    const Tensor& f = features->val;
    const Tensor& fl = flow->val;
    int c = f.shape[0], h = f.shape[1], w = f.shape[2];
    if (fl.shape[0] != 2 || fl.shape[1] != h || fl.shape[2] != w)
        throw std::invalid_argument("warp: flow must be 2 x H x W matching features");
    Tensor out({c, h, w});
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double sx = std::clamp(x + fl.at(0, y, x), 0.0, static_cast<double>(w - 1));
            double sy = std::clamp(y + fl.at(1, y, x), 0.0, static_cast<double>(h - 1));
            int x0 = static_cast<int>(sx), y0 = static_cast<int>(sy);
            int x1 = std::min(x0 + 1, w - 1), y1 = std::min(y0 + 1, h - 1);
            double fx = sx - x0, fy = sy - y0;
            for (int ci = 0; ci < c; ++ci) {
                double v = (1 - fx) * (1 - fy) * f.at(ci, y0, x0) + fx * (1 - fy) * f.at(ci, y0, x1) +
                           (1 - fx) * fy * f.at(ci, y1, x0) + fx * fy * f.at(ci, y1, x1);
                out.at(ci, y, x) = v;
            }
        }
    if (MacCounter::enabled) MacCounter::warp_macs += static_cast<std::uint64_t>(4) * c * h * w;
    return make_node(std::move(out), {features, flow}, [features, flow](Node& n) {
        const Tensor& f = features->val;
        const Tensor& fl = flow->val;
        int c = f.shape[0], h = f.shape[1], w = f.shape[2];
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                double rx = x + fl.at(0, y, x), ry = y + fl.at(1, y, x);
                bool cx = rx <= 0.0 || rx >= w - 1;  // clamped: zero positional gradient
                bool cy = ry <= 0.0 || ry >= h - 1;
                double sx = std::clamp(rx, 0.0, static_cast<double>(w - 1));
                double sy = std::clamp(ry, 0.0, static_cast<double>(h - 1));
                int x0 = static_cast<int>(sx), y0 = static_cast<int>(sy);
                int x1 = std::min(x0 + 1, w - 1), y1 = std::min(y0 + 1, h - 1);
                double fx = sx - x0, fy = sy - y0;
                double gx = 0, gy = 0;
                for (int ci = 0; ci < c; ++ci) {
                    double g = n.grad.at(ci, y, x);
                    if (features->requires_grad) {
                        features->grad.at(ci, y0, x0) += g * (1 - fx) * (1 - fy);
                        features->grad.at(ci, y0, x1) += g * fx * (1 - fy);
                        features->grad.at(ci, y1, x0) += g * (1 - fx) * fy;
                        features->grad.at(ci, y1, x1) += g * fx * fy;
                    }
                    if (flow->requires_grad) {
                        double v00 = f.at(ci, y0, x0), v01 = f.at(ci, y0, x1);
                        double v10 = f.at(ci, y1, x0), v11 = f.at(ci, y1, x1);
                        gx += g * ((1 - fy) * (v01 - v00) + fy * (v11 - v10));
                        gy += g * ((1 - fx) * (v10 - v00) + fx * (v11 - v01));
                    }
                }
                if (flow->requires_grad) {
                    if (!cx) flow->grad.at(0, y, x) += gx;
                    if (!cy) flow->grad.at(1, y, x) += gy;
                }
            }
    });
}

Var quantize_noise(const Var& y, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    Tensor out(y->val.shape);
    for (std::size_t i = 0; i < out.numel(); ++i) out.d[i] = y->val.d[i] + u(rng);
    return make_node(std::move(out), {y}, [y](Node& n) {
        for (std::size_t i = 0; i < n.val.numel(); ++i) y->grad.d[i] += n.grad.d[i];
    });
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double gaussian_symbol_prob(double centered, double sigma) {
    return normal_cdf((centered + 0.5) / sigma) - normal_cdf((centered - 0.5) / sigma);
}

namespace {
constexpr double kProbFloor = 1.0 / 65536.0;  // 2^-16
constexpr double kLn2 = 0.6931471805599453;
inline double normal_pdf(double x) { return 0.3989422804014327 * std::exp(-0.5 * x * x); }
}  // namespace

Var gaussian_bits(const Var& y, const Var& mu, const Var& sigma) {
    check_same_shape(y, mu, "gaussian_bits");
    check_same_shape(y, sigma, "gaussian_bits");
    double total = 0;
    for (std::size_t i = 0; i < y->val.numel(); ++i) {
        double p = gaussian_symbol_prob(y->val.d[i] - mu->val.d[i], sigma->val.d[i]);
        total += -std::log2(std::max(p, kProbFloor));
    }
    return make_node(Tensor::scalar(total), {y, mu, sigma}, [y, mu, sigma](Node& n) {
        double g = n.grad.d[0];
        for (std::size_t i = 0; i < y->val.numel(); ++i) {
            double s = sigma->val.d[i];
            double a = (y->val.d[i] - mu->val.d[i] + 0.5) / s;
            double b = (y->val.d[i] - mu->val.d[i] - 0.5) / s;
            double p = normal_cdf(a) - normal_cdf(b);
            if (p <= kProbFloor) continue;  // floored region: constant cost
            double common = -g / (p * kLn2);
            double dp_dy = (normal_pdf(a) - normal_pdf(b)) / s;
            double dp_ds = -(a * normal_pdf(a) - b * normal_pdf(b)) / s;
            if (y->requires_grad) y->grad.d[i] += common * dp_dy;
            if (mu->requires_grad) mu->grad.d[i] += -common * dp_dy;
            if (sigma->requires_grad) sigma->grad.d[i] += common * dp_ds;
        }
    });
}

}  // namespace ops
}  // namespace nrdc
