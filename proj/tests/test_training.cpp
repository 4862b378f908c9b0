#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <random>

#include "nrdc/training.hpp"

using namespace nrdc;
using namespace nrdc::training;

namespace {

CodecConfig tiny_cfg(CodingMode mode, std::uint64_t seed = 1) {
    CodecConfig cfg;
    cfg.mode = mode;
    cfg.cond_channels = 4;
    cfg.base_width = 4;
    cfg.latent_channels = 4;
    cfg.z_channels = 2;
    cfg.dec_features = 4;
    cfg.flow_width = 4;
    cfg.motion_width = 4;
    cfg.motion_latent_channels = 2;
    cfg.mask_width = 4;
    cfg.seed = seed;
    return cfg;
}

bool has(const std::set<Module>& s, Module m) { return s.count(m) == 1; }

std::string tmp_dir(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / name;
    std::filesystem::create_directories(p);
    return p.string();
}

}  // namespace

TEST_CASE("phase table matches the progressive schedule row by row") {
    for (auto mode : {CodingMode::CR, CodingMode::MCR}) {
        auto t = phase_table(mode);
        REQUIRE(t.size() == 7);
        bool mask = mode == CodingMode::MCR;

        CHECK(t[0].step == 1);
        CHECK(t[0].trainable == std::set<Module>{Module::fe_and_proj});
        CHECK(t[0].objective == Objective::MOTION_COMP);
        CHECK(t[0].num_frames == 3);
        CHECK(t[0].epochs == 2);
        CHECK_FALSE(t[0].epa);

        // steps 2-3: inter codec + fe/proj (+ mask for MCR), full RD
        for (int i : {1, 2}) {
            std::set<Module> want{Module::inter_codec, Module::fe_and_proj};
            if (mask) want.insert(Module::mask_gen);
            CHECK(t[i].trainable == want);
            CHECK(t[i].objective == Objective::FULL_RD);
            CHECK(t[i].epochs == 4);
            CHECK_FALSE(t[i].epa);
        }
        CHECK(t[1].num_frames == 3);
        CHECK(t[2].num_frames == 5);

        // steps 4-5: + motion codec
        for (int i : {3, 4}) {
            CHECK(has(t[i].trainable, Module::motion_codec));
            CHECK(has(t[i].trainable, Module::inter_codec));
            CHECK_FALSE(has(t[i].trainable, Module::menet));
            CHECK(t[i].epochs == 3);
            CHECK_FALSE(t[i].epa);
        }
        CHECK(t[3].num_frames == 3);
        CHECK(t[4].num_frames == 5);

        // steps 6-7: error-propagation-aware, 5 frames; MENet joins last
        for (int i : {5, 6}) {
            CHECK(t[i].epa);
            CHECK(t[i].num_frames == 5);
            CHECK(t[i].epochs == 2);
        }
        CHECK_FALSE(has(t[5].trainable, Module::menet));
        CHECK(has(t[6].trainable, Module::menet));
        CHECK(has(t[6].trainable, Module::motion_codec));
        CHECK(has(t[6].trainable, Module::inter_codec));
        CHECK(has(t[6].trainable, Module::fe_and_proj));
        CHECK(has(t[6].trainable, Module::mask_gen) == mask);
    }
    // CC never trains a mask generator
    for (const auto& phase : phase_table(CodingMode::CC))
        CHECK_FALSE(has(phase.trainable, Module::mask_gen));
}

TEST_CASE("module prefixes cover the registry exactly once") {
    CHECK(trainable_prefixes({Module::inter_codec}) ==
          std::vector<std::string>{"inter.", "refine."});
    CHECK(trainable_prefixes({Module::menet}) == std::vector<std::string>{"menet."});
    CHECK(trainable_prefixes({Module::motion_codec}) == std::vector<std::string>{"mcodec."});
    CHECK(trainable_prefixes({Module::fe_and_proj}) == std::vector<std::string>{"fe.", "proj."});
    CHECK(trainable_prefixes({Module::mask_gen}) == std::vector<std::string>{"maskgen."});
}

TEST_CASE("compute_loss arithmetic: bpp + lambda * mse") {
    TrainFrameResult r;
    r.reconstruction = make_leaf(Tensor::full({3, 8, 8}, 0.5));
    r.total_bits = make_leaf(Tensor::scalar(6.4));  // 0.1 bpp at 8x8
    r.motion_bits = make_leaf(Tensor::scalar(6.4));
    Var x = make_leaf(Tensor::full({3, 8, 8}, 0.5 + 0.0316227766016838));  // mse ~ 0.001
    Var loss = compute_loss(Objective::FULL_RD, r, x, 256.0, 8, 8);
    CHECK(loss->val.item() == doctest::Approx(0.1 + 256 * 0.001).epsilon(1e-9));
    // lambda scales only the distortion term
    Var loss2 = compute_loss(Objective::FULL_RD, r, x, 512.0, 8, 8);
    CHECK(loss2->val.item() == doctest::Approx(0.1 + 512 * 0.001).epsilon(1e-9));

    // motion-comp objective needs the pixel predictor
    CHECK_THROWS_AS(compute_loss(Objective::MOTION_COMP, r, x, 256.0, 8, 8), ArgumentError);
    r.pixel_predictor = make_leaf(Tensor::full({3, 8, 8}, 0.5));
    Var mc = compute_loss(Objective::MOTION_COMP, r, x, 256.0, 8, 8);
    CHECK(mc->val.item() == doctest::Approx(0.1 + 256 * 0.001).epsilon(1e-9));
}

TEST_CASE("sample_clip is seed-deterministic with the requested geometry") {
    DatasetSpec data;
    auto a = sample_clip(data, 3, 42);
    auto b = sample_clip(data, 3, 42);
    auto c = sample_clip(data, 3, 43);
    REQUIRE(a.size() == 3);
    CHECK(a[0]->val.shape == std::vector<int>{3, 64, 64});
    for (int i = 0; i < 3; ++i) CHECK(a[i]->val.d == b[i]->val.d);
    bool differs = false;
    for (std::size_t i = 0; i < a[0]->val.d.size(); ++i) differs |= a[0]->val.d[i] != c[0]->val.d[i];
    CHECK(differs);
}

TEST_CASE("freeze audit: only scheduled prefixes change during a step") {
    CodecModel model(tiny_cfg(CodingMode::MCR));
    std::vector<std::string> all = {"menet.", "mcodec.", "fe.", "proj.", "maskgen.",
                                    "inter.", "refine.", "intra."};
    auto phases = phase_table(CodingMode::MCR);
    DatasetSpec data;
    std::mt19937_64 rng(7);
    nn::Adam opt;
    opt.lr = 1e-3;
    for (const auto& phase : phases) {
        auto prefixes = trainable_prefixes(phase.trainable);
        model.reg.set_trainable_prefixes(prefixes);
        std::map<std::string, std::uint64_t> before;
        for (const auto& p : all) before[p] = model.reg.hash_prefix(p);

        auto clip = sample_clip(data, phase.num_frames, 100 + phase.step);
        model.reg.zero_grads();
        Var loss = rollout_loss(model, clip, phase.num_frames, phase.objective, phase.epa,
                                model.cfg.lambda, rng);
        backward(loss);
        opt.step(model.reg);

        for (const auto& p : all) {
            bool scheduled = false;
            for (const auto& tp : prefixes) scheduled |= (p == tp);
            CAPTURE(phase.step);
            CAPTURE(p);
            if (scheduled)
                CHECK(model.reg.hash_prefix(p) != before[p]);
            else
                CHECK(model.reg.hash_prefix(p) == before[p]);
        }
    }
}

TEST_CASE("EPA keeps the temporal cascade differentiable; non-EPA cuts it") {
    CodecModel model(tiny_cfg(CodingMode::CR));
    model.reg.set_trainable_prefixes({""});
    DatasetSpec data;
    auto clip = sample_clip(data, 3, 55);
    // make the middle frame a differentiable leaf: its gradient is only
    // reachable through the frame-2 reference, i.e. across the cascade
    Tensor mid = clip[1]->val;
    clip[1] = make_leaf(mid, /*requires_grad=*/true);

    auto final_frame_loss = [&](bool epa) {
        std::mt19937_64 rng(9);
        Var ref = clip[0];
        Var total;
        for (int t = 1; t < 3; ++t) {
            TrainFrameResult r = code_frame_train(model, clip[t], ref, rng);
            if (t == 2)
                total = compute_loss(Objective::FULL_RD, r, clip[t], model.cfg.lambda, 64, 64);
            ref = epa ? r.reconstruction : detach(r.reconstruction);
        }
        return total;
    };

    backward(final_frame_loss(true));
    double g_epa = 0;
    for (double g : clip[1]->grad.d) g_epa += g * g;
    // reset and repeat without EPA
    clip[1]->grad = Tensor::zeros(clip[1]->grad.shape);
    model.reg.zero_grads();
    backward(final_frame_loss(false));
    double g_detached = 0;
    for (double g : clip[1]->grad.d) g_detached += g * g;

    CHECK(g_epa > 0.0);
    CHECK(g_detached == 0.0);
}

TEST_CASE("one optimizer step descends on a replayed batch (majority of seeds)") {
    int wins = 0;
    for (std::uint64_t seed : {11ull, 22ull, 33ull}) {
        CodecModel model(tiny_cfg(CodingMode::CC, seed));
        model.reg.set_trainable_prefixes({"inter.", "refine.", "fe."});
        DatasetSpec data;
        auto clip = sample_clip(data, 2, seed);
        auto loss_now = [&] {
            std::mt19937_64 rng(seed);  // replay identical quantization noise
            return rollout_loss(model, clip, 2, Objective::FULL_RD, false, model.cfg.lambda, rng);
        };
        Var l0 = loss_now();
        model.reg.zero_grads();
        backward(l0);
        nn::Adam opt;
        opt.lr = 1e-4;
        opt.step(model.reg);
        Var l1 = loss_now();
        wins += l1->val.item() < l0->val.item();
    }
    CHECK(wins >= 2);
}

TEST_CASE("rollout_loss reports rate and distortion components") {
    CodecModel model(tiny_cfg(CodingMode::CR));
    DatasetSpec data;
    auto clip = sample_clip(data, 3, 77);
    std::mt19937_64 rng(3);
    double rate = 0, dist = 0;
    Var loss = rollout_loss(model, clip, 3, Objective::FULL_RD, false, model.cfg.lambda, rng, &rate,
                            &dist);
    CHECK(rate > 0);
    CHECK(dist > 0);
    CHECK(loss->val.item() == doctest::Approx(rate + model.cfg.lambda * dist).epsilon(1e-6));
}

TEST_CASE("schedule plumbing: checkpoints per step, curve csv, init rules") {
    std::string dir = tmp_dir("nrdc_train_test");
    TrainConfig cfg;
    cfg.codec = tiny_cfg(CodingMode::CC, 5);
    cfg.batch_size = 1;
    cfg.iters_per_epoch = 1;
    cfg.out_dir = dir + "/cc";
    cfg.quiet = true;
    CodecModel cc(cfg.codec);
    ScheduleResult res = run_schedule(cc, cfg);
    // CC skips step 1 (its objective needs the pixel predictor)
    REQUIRE(res.steps.size() == 6);
    CHECK(res.steps.front().step == 2);
    for (const auto& s : res.steps) CHECK(std::filesystem::exists(s.checkpoint_path));
    CHECK(std::filesystem::exists(res.curve_csv_path));

    // CR requires an init checkpoint...
    TrainConfig crcfg = cfg;
    crcfg.codec = tiny_cfg(CodingMode::CR, 5);
    crcfg.out_dir = dir + "/cr";
    crcfg.init_checkpoint.clear();
    CodecModel cr(crcfg.codec);
    CHECK_THROWS_AS(run_schedule(cr, crcfg), ConfigError);
    // ...and inherits the CC backbone when given one
    crcfg.init_checkpoint = res.steps.back().checkpoint_path;
    ScheduleResult cr_res = run_schedule(cr, crcfg);
    REQUIRE(cr_res.steps.size() == 7);
    CHECK(cr_res.steps.front().step == 1);

    // channel-size mismatch between init checkpoint and target is rejected
    TrainConfig bad = crcfg;
    bad.codec.cond_channels = 8;
    bad.out_dir = dir + "/bad";
    CodecModel bad_model(bad.codec);
    CHECK_THROWS_AS(run_schedule(bad_model, bad), ConfigError);

    double val = validation_loss(cr, crcfg, 2);
    CHECK(val > 0);
    CHECK(std::isfinite(val));
    std::filesystem::remove_all(dir);
}

TEST_CASE("checkpoint save/load round trip preserves weights and config") {
    std::string dir = tmp_dir("nrdc_ckpt_test");
    std::string path = dir + "/m.ckpt";
    CodecConfig cfg = tiny_cfg(CodingMode::MCR, 9);
    CodecModel a(cfg);
    checkpoint::Meta meta;
    meta.config = cfg;
    meta.schedule_step = 4;
    checkpoint::save(path, a.reg, meta);

    CodecModel b(cfg);
    // registries share names; after load every tensor must match bitwise
    checkpoint::Meta back = checkpoint::load(path, b.reg, /*allow_missing=*/false);
    CHECK(back.schedule_step == 4);
    CHECK(back.config.digest() == cfg.digest());
    for (const auto& [name, p] : a.reg.params) REQUIRE(b.reg.params.at(name)->val.d == p->val.d);

    // a CC registry is a strict subset: loading the MCR checkpoint into it
    // must fail strict mode and pass with allow_missing
    CodecConfig cc_cfg = tiny_cfg(CodingMode::CC, 9);
    CodecModel c(cc_cfg);
    CHECK_THROWS_AS(checkpoint::load(path, c.reg, false), FormatError);
    // the other direction: checkpoint missing params the registry has
    std::string cc_path = dir + "/cc.ckpt";
    checkpoint::Meta cc_meta;
    cc_meta.config = cc_cfg;
    checkpoint::save(cc_path, c.reg, cc_meta);
    CodecModel d(cfg);
    CHECK_THROWS_AS(checkpoint::load(cc_path, d.reg, false), FormatError);
    checkpoint::load(cc_path, d.reg, true);
    for (const auto& [name, p] : c.reg.params) REQUIRE(d.reg.params.at(name)->val.d == p->val.d);

    CHECK(checkpoint::peek(path).config.mode == CodingMode::MCR);
    std::filesystem::remove_all(dir);
}

TEST_CASE("motion warm-up improves flow on a known global shift") {
    CodecModel model(tiny_cfg(CodingMode::CC, 2));
    TrainConfig cfg;
    cfg.codec = model.cfg;
    cfg.quiet = true;
    cfg.data.max_shift = 1.0;

    auto flow_error = [&] {
        data::SynthSpec spec;
        spec.dx = 1.0;
        spec.dy = -0.5;
        spec.frames = 2;
        spec.seed = 321;
        FrameSequence seq = data::synth_sequence(spec);
        FlowField f = estimate_flow(model, seq.frames[1], seq.frames[0]);
        double err = 0;
        int n = 0;
        for (int y = 8; y < 56; ++y)
            for (int x = 8; x < 56; ++x) {
                err += std::abs(f.vectors.at(0, y, x) - (-spec.dx)) +
                       std::abs(f.vectors.at(1, y, x) - (-spec.dy));
                n += 2;
            }
        return err / n;
    };

    double before = flow_error();
    warmup_motion(model, cfg, 30);
    double after = flow_error();
    CHECK(after < before);
}
