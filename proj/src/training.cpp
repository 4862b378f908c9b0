#include "nrdc/training.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

namespace nrdc {
namespace training {

using namespace ops;

std::vector<TrainPhaseSpec> phase_table(CodingMode mode) {
    using M = Module;
    const bool mg = mode == CodingMode::MCR;
    auto with_mask = [mg](std::set<M> s) {
        if (mg) s.insert(M::mask_gen);
        return s;
    };
    std::vector<TrainPhaseSpec> t(7);
    t[0] = {1, {M::fe_and_proj}, Objective::MOTION_COMP, 3, 2, false};
    t[1] = {2, with_mask({M::inter_codec, M::fe_and_proj}), Objective::FULL_RD, 3, 4, false};
    t[2] = {3, with_mask({M::inter_codec, M::fe_and_proj}), Objective::FULL_RD, 5, 4, false};
    t[3] = {4, with_mask({M::inter_codec, M::motion_codec, M::fe_and_proj}), Objective::FULL_RD, 3, 3,
            false};
    t[4] = {5, with_mask({M::inter_codec, M::motion_codec, M::fe_and_proj}), Objective::FULL_RD, 5, 3,
            false};
    t[5] = {6, with_mask({M::inter_codec, M::motion_codec, M::fe_and_proj}), Objective::FULL_RD, 5, 2,
            true};
    t[6] = {7, with_mask({M::inter_codec, M::menet, M::motion_codec, M::fe_and_proj}),
            Objective::FULL_RD, 5, 2, true};
    return t;
}

std::vector<std::string> module_prefixes(Module m) {
    switch (m) {
        case Module::inter_codec: return {"inter.", "refine."};
        case Module::menet: return {"menet."};
        case Module::motion_codec: return {"mcodec."};
        case Module::fe_and_proj: return {"fe.", "proj."};
        case Module::mask_gen: return {"maskgen."};
    }
    throw ArgumentError("unknown module");
}

std::vector<std::string> trainable_prefixes(const std::set<Module>& mods) {
    std::vector<std::string> out;
    for (Module m : mods)
        for (auto& p : module_prefixes(m)) out.push_back(p);
    return out;
}

Var compute_loss(Objective objective, const TrainFrameResult& coded, const Var& x_t, double lambda,
                 int height, int width) {
    const double inv_px = 1.0 / (double(height) * width);
    if (objective == Objective::MOTION_COMP) {
        if (!coded.pixel_predictor)
            throw ArgumentError("MOTION_COMP objective needs a pixel predictor (CR/MCR only)");
        return add(scale(coded.motion_bits, inv_px), scale(mse(x_t, coded.pixel_predictor), lambda));
    }
    return add(scale(coded.total_bits, inv_px), scale(mse(x_t, coded.reconstruction), lambda));
}

Var rollout_loss(const CodecModel& model, const std::vector<Var>& clip, int num_frames,
                 Objective objective, bool epa, double lambda, std::mt19937_64& rng,
                 double* rate_out, double* dist_out) {
    if (num_frames < 2 || num_frames > int(clip.size()))
        throw ArgumentError("rollout: clip shorter than requested frame count");
    const int h = clip[0]->val.shape[1], w = clip[0]->val.shape[2];
    Var reference = clip[0];
    Var total;
    double rate = 0, dist = 0;
    for (int t = 1; t < num_frames; ++t) {
        TrainFrameResult coded = code_frame_train(model, clip[t], reference, rng);
        Var l = compute_loss(objective, coded, clip[t], lambda, h, w);
        rate += coded.total_bits->val.item() / (double(h) * w);
        dist += mse(clip[t], coded.reconstruction)->val.item();
        total = total ? add(total, l) : l;
        reference = epa ? coded.reconstruction : detach(coded.reconstruction);
    }
    if (rate_out) *rate_out = rate / (num_frames - 1);
    if (dist_out) *dist_out = dist / (num_frames - 1);
    return scale(total, 1.0 / (num_frames - 1));
}

Var epa_rollout(const CodecModel& model, const std::vector<Var>& clip, int num_frames, double lambda,
                std::mt19937_64& rng) {
    return rollout_loss(model, clip, num_frames, Objective::FULL_RD, true, lambda, rng);
}

std::vector<Var> sample_clip(const DatasetSpec& data, int num_frames, std::uint64_t seed) {
    std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ull + 0xa5a5a5a5ull);
    data::SynthSpec s;
    s.pattern = (rng() & 1) ? data::SynthPattern::SINES : data::SynthPattern::CHECKER;
    std::uniform_real_distribution<double> shift(-data.max_shift, data.max_shift);
    s.dx = shift(rng);
    s.dy = shift(rng);
    s.noise_sigma = data.noise_sigma;
    s.frames = num_frames;
    s.height = s.width = data.patch;
    s.seed = rng();
    FrameSequence seq = data::synth_sequence(s);
    std::vector<Var> clip;
    for (auto& f : seq.frames) clip.push_back(make_leaf(f.pixels));
    return clip;
}

void warmup_motion(CodecModel& model, const TrainConfig& cfg, int iters) {
    model.reg.set_trainable_prefixes({"menet.", "mcodec."});
    nn::Adam opt;
    opt.lr = cfg.learning_rate;
    std::mt19937_64 rng(cfg.codec.seed ^ 0x5ee0u);
    const double inv_px = 1.0 / (double(cfg.data.patch) * cfg.data.patch);
    for (int it = 0; it < iters; ++it) {
        model.reg.zero_grads();
        Var batch_loss;
        for (int b = 0; b < cfg.batch_size; ++b) {
            std::vector<Var> clip = sample_clip(cfg.data, 2, rng());
            Var flow = model.flownet.forward(clip[1], clip[0]);
            // flow quality: warped reference should match the target
            Var warp_loss = mse(warp(clip[0], flow), clip[1]);
            // codec fidelity + rate on the estimated flow
            Var y = model.mcodec.encode(flow);
            Var y_hat = quantize_noise(y, rng);
            Var mu = broadcast_channel_param(model.mcodec.prior_mu, y->val.shape[1], y->val.shape[2]);
            Var sg = add_scalar(
                softplus(broadcast_channel_param(model.mcodec.prior_sigma_raw, y->val.shape[1],
                                                 y->val.shape[2])),
                entropy::kSigmaMin);
            Var bits = gaussian_bits(y_hat, mu, sg);
            Var f_hat = model.mcodec.decode(y_hat);
            Var l = add(add(warp_loss, mse(warp(clip[0], f_hat), clip[1])),
                        scale(bits, 0.01 * inv_px));
            batch_loss = batch_loss ? add(batch_loss, l) : l;
        }
        batch_loss = scale(batch_loss, 1.0 / cfg.batch_size);
        backward(batch_loss);
        opt.step(model.reg);
    }
}

ScheduleResult run_schedule(CodecModel& model, const TrainConfig& cfg) {
    namespace fs = std::filesystem;
    if (cfg.out_dir.empty()) throw ConfigError("run_schedule: out_dir required");
    fs::create_directories(cfg.out_dir);

    const CodingMode mode = model.cfg.mode;
    if (mode != CodingMode::CC) {
        if (cfg.init_checkpoint.empty())
            throw ConfigError(std::string(mode_name(mode)) +
                              " training requires an init checkpoint from the previous mode");
        checkpoint::Meta init = checkpoint::peek(cfg.init_checkpoint);
        if (init.config.cond_channels != model.cfg.cond_channels)
            throw ConfigError("init checkpoint has a different condition channel size");
        checkpoint::load(cfg.init_checkpoint, model.reg, /*allow_missing=*/true);
    }

    ScheduleResult result;
    result.curve_csv_path = cfg.out_dir + "/train_curve.csv";
    std::ofstream curve(result.curve_csv_path);
    curve << "step,iteration,loss,rate_bpp,distortion\n";

    std::mt19937_64 rng(model.cfg.seed ^ 0x7261696eull);
    std::uint64_t clip_counter = 0;

    for (const TrainPhaseSpec& phase : phase_table(mode)) {
        // CC has no pixel predictor, so the step-1 objective is undefined
        // for it; CC training starts at step 2.
        if (mode == CodingMode::CC && phase.step == 1) continue;

        model.reg.set_trainable_prefixes(trainable_prefixes(phase.trainable));
        nn::Adam opt;
        opt.lr = phase.epa ? cfg.epa_learning_rate : cfg.learning_rate;

        double last_loss = 0;
        const int iters = phase.epochs * cfg.iters_per_epoch;
        for (int it = 0; it < iters; ++it) {
            model.reg.zero_grads();
            Var batch_loss;
            double rate_acc = 0, dist_acc = 0;
            for (int b = 0; b < cfg.batch_size; ++b) {
                std::uint64_t clip_seed = (clip_counter++ % std::uint64_t(cfg.data.clips)) +
                                          model.cfg.seed * 1000003ull;
                std::vector<Var> clip = sample_clip(cfg.data, phase.num_frames, clip_seed);
                double r = 0, d = 0;
                Var l = rollout_loss(model, clip, phase.num_frames, phase.objective, phase.epa,
                                     model.cfg.lambda, rng, &r, &d);
                rate_acc += r;
                dist_acc += d;
                batch_loss = batch_loss ? add(batch_loss, l) : l;
            }
            batch_loss = scale(batch_loss, 1.0 / cfg.batch_size);
            backward(batch_loss);
            opt.step(model.reg);
            last_loss = batch_loss->val.item();
            curve << phase.step << "," << it << "," << last_loss << ","
                  << rate_acc / cfg.batch_size << "," << dist_acc / cfg.batch_size << "\n";
        }

        std::string path = cfg.out_dir + "/step" + std::to_string(phase.step) + ".ckpt";
        checkpoint::Meta meta;
        meta.config = model.cfg;
        meta.schedule_step = phase.step;
        checkpoint::save(path, model.reg, meta);
        result.steps.push_back({phase.step, last_loss, path});
        if (!cfg.quiet)
            std::cerr << "[train " << mode_name(mode) << " C=" << model.cfg.cond_channels << "] step "
                      << phase.step << " done, loss " << last_loss << "\n";
    }
    return result;
}

double validation_loss(const CodecModel& model, const TrainConfig& cfg, int clips) {
    std::mt19937_64 rng(12345);
    double total = 0;
    for (int i = 0; i < clips; ++i) {
        std::vector<Var> clip = sample_clip(cfg.data, 3, 900 + i);
        Var l = rollout_loss(model, clip, 3, Objective::FULL_RD, false, model.cfg.lambda, rng);
        total += l->val.item();
    }
    return total / clips;
}

}  // namespace training
}  // namespace nrdc
