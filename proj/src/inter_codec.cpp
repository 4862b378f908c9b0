#include <cmath>
#include <cstring>

#include "nrdc/model.hpp"

namespace nrdc {

using namespace ops;

Var form_codec_input(const Var& x_t, const Var& pixel_predictor, const std::optional<Var>& mask,
                     CodingMode mode) {
    if (mode == CodingMode::CC) {
        if (mask) throw ArgumentError("form_codec_input: mask supplied in CC mode");
        return x_t;
    }
    if (!pixel_predictor) throw ArgumentError("form_codec_input: pixel predictor required");
    if (mode == CodingMode::CR) {
        if (mask) throw ArgumentError("form_codec_input: mask supplied in CR mode");
        return sub(x_t, pixel_predictor);
    }
    if (!mask) throw ArgumentError("form_codec_input: mask required in MCR mode");
    return sub(x_t, mul(replicate_channels(*mask, 3), pixel_predictor));
}

Var inter_encode(const CodecModel& model, const Var& input_signal, const Var& refined_cond) {
    const InterCodecNets& n = model.inter;
    Var h = leaky_relu(n.ge1(concat_channels({input_signal, refined_cond})));
    h = leaky_relu(n.ge2(h));
    if (model.cfg.multi_scale_condition) {
        Var c4 = leaky_relu(n.cond4b(leaky_relu(n.cond4a(refined_cond))));
        h = concat_channels({h, c4});
    }
    h = leaky_relu(n.ge3(h));
    return n.ge4(h);
}

static Var decoder_condition(const CodecModel& model, const Var& refined_cond) {
    const InterCodecNets& n = model.inter;
    Var c = leaky_relu(n.dc1(refined_cond));
    c = leaky_relu(n.dc2(c));
    c = leaky_relu(n.dc3(c));
    return leaky_relu(n.dc4(c));
}

Var inter_decode(const CodecModel& model, const Var& y_hat, const Var& refined_cond) {
    const InterCodecNets& n = model.inter;
    Var h = leaky_relu(n.gd1(concat_channels({y_hat, decoder_condition(model, refined_cond)})));
    h = leaky_relu(n.gd2(h));
    h = leaky_relu(n.gd3(h));
    return n.gd4(h);
}

Var hyper_encode(const CodecModel& model, const Var& y) {
    return model.inter.he2(leaky_relu(model.inter.he1(y)));
}

std::pair<Var, Var> build_priors(const CodecModel& model, const Var& z_hat, const Var& refined_cond) {
    const InterCodecNets& n = model.inter;
    Var f = leaky_relu(n.hd2(leaky_relu(n.hd1(z_hat))));
    if (model.cfg.use_temporal_prior) {
        Var t = leaky_relu(n.tp1(refined_cond));
        t = leaky_relu(n.tp2(t));
        t = leaky_relu(n.tp3(t));
        t = leaky_relu(n.tp4(t));
        f = concat_channels({f, t});
    }
    Var p = n.fu2(leaky_relu(n.fu1(f)));
    const int cy = model.cfg.latent_channels;
    Var mu = slice_channels(p, 0, cy);
    Var sigma = add_scalar(softplus(slice_channels(p, cy, 2 * cy)), entropy::kSigmaMin);
    return {mu, sigma};
}

Var generate_frame(const CodecModel& model, const Var& dec_features, const Var& refined_cond,
                   const Var& pixel_predictor, const std::optional<Var>& mask, CodingMode mode) {
    const InterCodecNets& n = model.inter;
    Var g = n.fg_out(n.fg2(n.fg1(concat_channels({dec_features, refined_cond}))));
    if (mode == CodingMode::CC) return clamp01(g);
    if (!pixel_predictor) throw ArgumentError("generate_frame: pixel predictor required");
    if (mode == CodingMode::CR) return clamp01(add(g, pixel_predictor));
    if (!mask) throw ArgumentError("generate_frame: mask required in MCR mode");
    return clamp01(add(g, mul(replicate_channels(*mask, 3), pixel_predictor)));
}

// per-channel factorized prior on z, broadcast to the latent shape
static std::pair<Tensor, Tensor> z_prior_tensors(const CodecModel& model, int h, int w) {
    NoGradGuard ng;
    Var mu = broadcast_channel_param(model.inter.z_mu, h, w);
    Var sg = add_scalar(softplus(broadcast_channel_param(model.inter.z_sigma_raw, h, w)),
                        entropy::kSigmaMin);
    return {mu->val, sg->val};
}

static void require_padded(const Frame& f, const char* where) {
    if (f.height() % 64 != 0 || f.width() % 64 != 0)
        throw ArgumentError(std::string(where) + ": frame dimensions must be multiples of 64");
}

static std::optional<Var> maybe_mask(const CodecModel& model, const Var& flow,
                                     const ConditionBundle& cond) {
    if (model.cfg.mode != CodingMode::MCR) return std::nullopt;
    return model.maskgen(flow, cond.pixel_predictor);
}

CodedFrame encode_inter_frame(const CodecModel& model, const Frame& x_t, const CodecState& state) {
    NoGradGuard ng;
    require_padded(x_t, "encode_inter_frame");
    if (x_t.height() != state.reference_frame.height() || x_t.width() != state.reference_frame.width())
        throw ArgumentError("encode_inter_frame: reference dimension mismatch");

    FlowField flow = estimate_flow(model, x_t, state.reference_frame);
    auto [mseg, f_hat] = encode_motion(model, flow);

    Var ref = make_leaf(state.reference_frame.pixels);
    Var fhat = make_leaf(f_hat.vectors);
    ConditionBundle cond = build_condition(model, ref, fhat);
    std::optional<Var> mask = maybe_mask(model, fhat, cond);

    Var input = form_codec_input(make_leaf(x_t.pixels), cond.pixel_predictor, mask, model.cfg.mode);
    Var y = inter_encode(model, input, cond.refined);
    Var z = hyper_encode(model, y);

    auto [zmu, zsg] = z_prior_tensors(model, z->val.shape[1], z->val.shape[2]);
    std::vector<std::uint8_t> z_payload = entropy::encode_latent(z->val, zmu, zsg);
    Tensor z_hat = entropy::dequantize_symbols(entropy::quantize_symbols(z->val, zmu), zmu);
    double z_bits = entropy::estimate_rate(z_hat, zmu, zsg);

    auto [mu, sigma] = build_priors(model, make_leaf(z_hat), cond.refined);
    std::vector<std::uint8_t> y_payload = entropy::encode_latent(y->val, mu->val, sigma->val);
    Tensor y_hat = entropy::dequantize_symbols(entropy::quantize_symbols(y->val, mu->val), mu->val);
    double y_bits = entropy::estimate_rate(y_hat, mu->val, sigma->val);

    Var feat = inter_decode(model, make_leaf(y_hat), cond.refined);
    Var xhat = generate_frame(model, feat, cond.refined, cond.pixel_predictor, mask, model.cfg.mode);

    CodedFrame out;
    out.record.reconstruction = Frame{xhat->val, ColorSpace::RGB444};
    out.record.motion_bits = mseg.estimated_bits;
    out.record.inter_bits = z_bits + y_bits;
    out.record.total_bits = out.record.motion_bits + out.record.inter_bits;
    out.record.mode = model.cfg.mode;
    if (mask) {
        out.record.mask_mean = mean(*mask)->val.item();
        out.mask_map = (*mask)->val;
    }
    out.codec_input = input->val;
    if (cond.pixel_predictor) out.pixel_predictor_map = cond.pixel_predictor->val;
    out.motion_payload = std::move(mseg.payload);

    // inter payload: u32be z length, z bytes, y bytes
    std::uint32_t zl = static_cast<std::uint32_t>(z_payload.size());
    out.inter_payload.reserve(4 + z_payload.size() + y_payload.size());
    out.inter_payload.push_back(static_cast<std::uint8_t>(zl >> 24));
    out.inter_payload.push_back(static_cast<std::uint8_t>(zl >> 16));
    out.inter_payload.push_back(static_cast<std::uint8_t>(zl >> 8));
    out.inter_payload.push_back(static_cast<std::uint8_t>(zl));
    out.inter_payload.insert(out.inter_payload.end(), z_payload.begin(), z_payload.end());
    out.inter_payload.insert(out.inter_payload.end(), y_payload.begin(), y_payload.end());
    return out;
}

Frame decode_inter_frame(const CodecModel& model, const std::vector<std::uint8_t>& motion_payload,
                         const std::vector<std::uint8_t>& inter_payload, const CodecState& state) {
    NoGradGuard ng;
    require_padded(state.reference_frame, "decode_inter_frame");
    const int h = state.reference_frame.height();
    const int w = state.reference_frame.width();

    MotionBitstreamSegment mseg;
    mseg.payload = motion_payload;
    mseg.latent_channels = model.cfg.motion_latent_channels;
    mseg.latent_h = h / 16;
    mseg.latent_w = w / 16;
    FlowField f_hat = decode_motion(model, mseg);

    Var ref = make_leaf(state.reference_frame.pixels);
    Var fhat = make_leaf(f_hat.vectors);
    ConditionBundle cond = build_condition(model, ref, fhat);
    std::optional<Var> mask = maybe_mask(model, fhat, cond);

    if (inter_payload.size() < 4) throw DecodeError("inter payload truncated before z length");
    std::uint32_t zl = (std::uint32_t(inter_payload[0]) << 24) | (std::uint32_t(inter_payload[1]) << 16) |
                       (std::uint32_t(inter_payload[2]) << 8) | std::uint32_t(inter_payload[3]);
    if (inter_payload.size() < 4 + std::size_t(zl)) throw DecodeError("inter payload truncated inside z");
    std::vector<std::uint8_t> z_payload(inter_payload.begin() + 4, inter_payload.begin() + 4 + zl);
    std::vector<std::uint8_t> y_payload(inter_payload.begin() + 4 + zl, inter_payload.end());

    auto [zmu, zsg] = z_prior_tensors(model, h / 64, w / 64);
    Tensor z_hat = entropy::decode_latent(z_payload, zmu, zsg);

    auto [mu, sigma] = build_priors(model, make_leaf(z_hat), cond.refined);
    Tensor y_hat = entropy::decode_latent(y_payload, mu->val, sigma->val);

    Var feat = inter_decode(model, make_leaf(y_hat), cond.refined);
    Var xhat = generate_frame(model, feat, cond.refined, cond.pixel_predictor, mask, model.cfg.mode);
    return Frame{xhat->val, ColorSpace::RGB444};
}

SequenceCodingResult encode_sequence(const CodecModel& model, const FrameSequence& seq,
                                     const GopSchedule& gop, IntraMethod intra_method,
                                     const DebugSink& dbg) {
    if (gop.roles.size() != seq.frames.size())
        throw ArgumentError("encode_sequence: schedule/frame count mismatch");
    if (seq.frames.empty() || gop.roles[0] != FrameRole::INTRA)
        throw ArgumentError("encode_sequence: sequence must start with an intra frame");

    SequenceCodingResult out;
    out.bitstream.header.mode = model.cfg.mode;
    out.bitstream.header.condition_channels = static_cast<std::uint8_t>(model.cfg.cond_channels);
    out.bitstream.header.config_digest = model.cfg.digest();

    const int h = seq.height();
    const int w = seq.width();
    CodecState state;
    for (std::size_t i = 0; i < seq.frames.size(); ++i) {
        Frame padded{data::pad_tensor_to_multiple(seq.frames[i].pixels, 64), ColorSpace::RGB444};
        FrameRecord rec;
        if (gop.roles[i] == FrameRole::INTRA) {
            auto [payload, recon, ftype] = intra_code_payload(model, seq.frames[i], intra_method);
            rec.frame_type = ftype;
            rec.inter_payload = std::move(payload);
            state.reference_frame = Frame{data::pad_tensor_to_multiple(recon.pixels, 64), ColorSpace::RGB444};
            out.reconstructions.push_back(std::move(recon));
        } else {
            CodedFrame cf = encode_inter_frame(model, padded, state);
            rec.frame_type = FrameType::inter;
            rec.motion_payload = std::move(cf.motion_payload);
            rec.inter_payload = std::move(cf.inter_payload);
            state.reference_frame = cf.record.reconstruction;
            out.reconstructions.push_back(data::crop_to(cf.record.reconstruction, h, w));
            if (!dbg.dir.empty()) {
                std::string stem = dbg.dir + "/frame" + std::to_string(i);
                data::write_png(stem + "_input.png", seq.frames[i]);
                data::write_png(stem + "_recon.png", out.reconstructions.back());
                if (cf.pixel_predictor_map.shape.size() == 3)
                    data::write_png(stem + "_predictor.png",
                              Frame{clamp01(make_leaf(cf.pixel_predictor_map))->val, ColorSpace::RGB444});
                if (cf.mask_map) data::write_png_gray(stem + "_mask.png", *cf.mask_map);
                // residual-ish signals re-centered around mid-gray for viewing
                Var ci = make_leaf(cf.codec_input);
                data::write_png(stem + "_codec_input.png",
                          Frame{clamp01(add_scalar(scale(ci, 0.5), 0.5))->val, ColorSpace::RGB444});
            }
        }
        out.frame_bits.push_back(8.0 * rec.byte_size());
        out.bitstream.frames.push_back(std::move(rec));
        state.frame_index = static_cast<int>(i) + 1;
    }
    return out;
}

std::vector<Frame> decode_sequence(const CodecModel& model, const Bitstream& bs, int height, int width) {
    if (bs.header.mode != model.cfg.mode || bs.header.config_digest != model.cfg.digest())
        throw DecodeError("decode_sequence: bitstream does not match this model configuration");
    std::vector<Frame> out;
    CodecState state;
    for (std::size_t i = 0; i < bs.frames.size(); ++i) {
        const FrameRecord& rec = bs.frames[i];
        Frame recon;
        if (rec.frame_type == FrameType::inter) {
            if (i == 0) throw DecodeError("decode_sequence: first frame is not intra");
            Frame padded = decode_inter_frame(model, rec.motion_payload, rec.inter_payload, state);
            state.reference_frame = padded;
            recon = data::crop_to(padded, height, width);
        } else {
            recon = decode_intra(model, rec, height, width);
            state.reference_frame = Frame{data::pad_tensor_to_multiple(recon.pixels, 64), ColorSpace::RGB444};
        }
        out.push_back(std::move(recon));
        state.frame_index = static_cast<int>(i) + 1;
    }
    return out;
}

TrainFrameResult code_frame_train(const CodecModel& model, const Var& x_t, const Var& reference,
                                  std::mt19937_64& rng) {
    const int h = x_t->val.shape[1];
    const int w = x_t->val.shape[2];
    if (h % 64 != 0 || w % 64 != 0)
        throw ArgumentError("code_frame_train: dimensions must be multiples of 64");

    Var flow = model.flownet.forward(x_t, reference);
    Var y_m = model.mcodec.encode(flow);
    Var y_m_hat = quantize_noise(y_m, rng);
    Var mmu = broadcast_channel_param(model.mcodec.prior_mu, y_m->val.shape[1], y_m->val.shape[2]);
    Var msg = add_scalar(softplus(broadcast_channel_param(model.mcodec.prior_sigma_raw,
                                                          y_m->val.shape[1], y_m->val.shape[2])),
                         entropy::kSigmaMin);
    Var motion_bits = gaussian_bits(y_m_hat, mmu, msg);
    Var f_hat = model.mcodec.decode(y_m_hat);

    ConditionBundle cond = build_condition(model, reference, f_hat);
    std::optional<Var> mask = maybe_mask(model, f_hat, cond);

    Var input = form_codec_input(x_t, cond.pixel_predictor, mask, model.cfg.mode);
    Var y = inter_encode(model, input, cond.refined);
    Var z = hyper_encode(model, y);
    Var z_hat = quantize_noise(z, rng);
    Var zmu = broadcast_channel_param(model.inter.z_mu, z->val.shape[1], z->val.shape[2]);
    Var zsg = add_scalar(softplus(broadcast_channel_param(model.inter.z_sigma_raw, z->val.shape[1],
                                                          z->val.shape[2])),
                         entropy::kSigmaMin);
    Var z_bits = gaussian_bits(z_hat, zmu, zsg);

    auto [mu, sigma] = build_priors(model, z_hat, cond.refined);
    Var y_hat = quantize_noise(y, rng);
    Var y_bits = gaussian_bits(y_hat, mu, sigma);

    Var feat = inter_decode(model, y_hat, cond.refined);
    Var xhat = generate_frame(model, feat, cond.refined, cond.pixel_predictor, mask, model.cfg.mode);

    TrainFrameResult r;
    r.reconstruction = xhat;
    r.motion_bits = motion_bits;
    r.total_bits = add(motion_bits, add(z_bits, y_bits));
    r.pixel_predictor = cond.pixel_predictor;
    return r;
}

}  // namespace nrdc
