#include <cmath>

#include "nrdc/model.hpp"

namespace nrdc {

using namespace ops;

static std::pair<Tensor, Tensor> intra_prior(const CodecModel& model, int h, int w) {
    NoGradGuard ng;
    Var mu = broadcast_channel_param(model.intra.prior_mu, h, w);
    Var sg = add_scalar(softplus(broadcast_channel_param(model.intra.prior_sigma_raw, h, w)),
                        entropy::kSigmaMin);
    return {mu->val, sg->val};
}

static Var intra_ae_encode(const CodecModel& model, const Var& x) {
    const IntraAE& n = model.intra;
    return n.e3(leaky_relu(n.e2(leaky_relu(n.e1(x)))));
}

static Var intra_ae_decode(const CodecModel& model, const Var& y_hat) {
    const IntraAE& n = model.intra;
    return clamp01(n.d3(leaky_relu(n.d2(leaky_relu(n.d1(y_hat))))));
}

static std::vector<std::uint8_t> pack_rgb8(const Frame& f) {
    const int h = f.height(), w = f.width();
    std::vector<std::uint8_t> bytes;
    bytes.reserve(std::size_t(3) * h * w);
    for (int c = 0; c < 3; ++c)
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                double v = f.pixels.at(c, y, x);
                long q = std::lround(std::min(1.0, std::max(0.0, v)) * 255.0);
                bytes.push_back(static_cast<std::uint8_t>(q));
            }
    return bytes;
}

std::tuple<std::vector<std::uint8_t>, Frame, FrameType> intra_code_payload(const CodecModel& model,
                                                                           const Frame& x,
                                                                           IntraMethod method) {
    if (method == IntraMethod::lossless_passthrough) {
        std::vector<std::uint8_t> payload = pack_rgb8(x);
        Tensor rec = x.pixels;
        for (auto& v : rec.d) v = std::lround(std::min(1.0, std::max(0.0, v)) * 255.0) / 255.0;
        return {std::move(payload), Frame{std::move(rec), ColorSpace::RGB444}, FrameType::intra_passthrough};
    }
    NoGradGuard ng;
    Tensor padded = data::pad_tensor_to_multiple(x.pixels, 64);
    Var y = intra_ae_encode(model, make_leaf(padded));
    auto [mu, sg] = intra_prior(model, y->val.shape[1], y->val.shape[2]);
    std::vector<std::uint8_t> payload = entropy::encode_latent(y->val, mu, sg);
    Tensor y_hat = entropy::dequantize_symbols(entropy::quantize_symbols(y->val, mu), mu);
    Var rec = intra_ae_decode(model, make_leaf(y_hat));
    Frame recon = data::crop_to(Frame{rec->val, ColorSpace::RGB444}, x.height(), x.width());
    return {std::move(payload), std::move(recon), FrameType::intra_learned};
}

IntraResult code_intra(const CodecModel& model, const Frame& x, IntraMethod method) {
    auto [payload, recon, ftype] = intra_code_payload(model, x, method);
    IntraResult r;
    r.reconstruction = std::move(recon);
    r.method = method;
    if (ftype == FrameType::intra_passthrough) {
        r.bits = 24.0 * x.height() * x.width();
    } else {
        r.bits = 8.0 * payload.size();
    }
    return r;
}

Frame decode_intra(const CodecModel& model, const FrameRecord& record, int height, int width) {
    if (record.frame_type == FrameType::intra_passthrough) {
        const std::size_t need = std::size_t(3) * height * width;
        if (record.inter_payload.size() != need)
            throw DecodeError("intra passthrough payload has wrong size");
        Tensor t = Tensor::zeros({3, height, width});
        std::size_t i = 0;
        for (int c = 0; c < 3; ++c)
            for (int y = 0; y < height; ++y)
                for (int x = 0; x < width; ++x) t.at(c, y, x) = record.inter_payload[i++] / 255.0;
        return Frame{std::move(t), ColorSpace::RGB444};
    }
    if (record.frame_type != FrameType::intra_learned)
        throw DecodeError("decode_intra: record is not an intra frame");
    NoGradGuard ng;
    const int ph = (height + 63) / 64 * 64, pw = (width + 63) / 64 * 64;
    auto [mu, sg] = intra_prior(model, ph / 8, pw / 8);
    Tensor y_hat = entropy::decode_latent(record.inter_payload, mu, sg);
    Var rec = intra_ae_decode(model, make_leaf(y_hat));
    return data::crop_to(Frame{rec->val, ColorSpace::RGB444}, height, width);
}

}  // namespace nrdc
