// Acceptance gate: one test case per criterion, each printing a single
// [PASS]/[FAIL] line. Run via ctest or directly.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "nrdc/cli.hpp"
#include "nrdc/evaluation.hpp"
#include "nrdc/training.hpp"

using namespace nrdc;

namespace {

struct Gate {
    int id;
    const char* what;
    bool passed = false;
    ~Gate() { std::printf("[%s] criterion %d: %s\n", passed ? "PASS" : "FAIL", id, what); }
};

CodecConfig tiny_cfg(CodingMode mode, int C, std::uint64_t seed = 1) {
    CodecConfig cfg;
    cfg.mode = mode;
    cfg.cond_channels = C;
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

Tensor random_tensor(std::vector<int> shape, std::mt19937_64& rng, double lo, double hi) {
    Tensor t(shape);
    std::uniform_real_distribution<double> u(lo, hi);
    for (auto& v : t.d) v = u(rng);
    return t;
}

std::string work_dir(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / "nrdc_acceptance" / name;
    std::filesystem::create_directories(p);
    return p.string();
}

}  // namespace

TEST_CASE("criterion 1: blend identity") {
    Gate gate{1, "MCR blend identity, m=1 -> CR and m=0 -> CC"};
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 1000; ++trial) {
        Tensor x = random_tensor({3, 4, 4}, rng, 0.0, 1.0);
        Tensor pred = random_tensor({3, 4, 4}, rng, -0.2, 1.2);
        Tensor m1 = random_tensor({1, 4, 4}, rng, 0.0, 1.0);
        Var xv = make_leaf(x), pv = make_leaf(pred), mv = make_leaf(m1);
        Var mcr = form_codec_input(xv, pv, mv, CodingMode::MCR);
        // algebraic identity: x - m.pred == (1-m).x + m.(x - pred)
        for (int c = 0; c < 3; ++c)
            for (int y = 0; y < 4; ++y)
                for (int xx = 0; xx < 4; ++xx) {
                    double m = m1.at(0, y, xx);
                    double rhs = (1 - m) * x.at(c, y, xx) + m * (x.at(c, y, xx) - pred.at(c, y, xx));
                    REQUIRE(std::abs(mcr->val.at(c, y, xx) - rhs) <= 1e-6);
                }
        // endpoints collapse to the sibling schemes bit-for-bit
        Var ones = make_leaf(Tensor::full({1, 4, 4}, 1.0));
        Var zeros = make_leaf(Tensor::zeros({1, 4, 4}));
        Var as_cr = form_codec_input(xv, pv, ones, CodingMode::MCR);
        Var cr = form_codec_input(xv, pv, std::nullopt, CodingMode::CR);
        Var as_cc = form_codec_input(xv, pv, zeros, CodingMode::MCR);
        Var cc = form_codec_input(xv, Var{}, std::nullopt, CodingMode::CC);
        REQUIRE(as_cr->val.d == cr->val.d);
        REQUIRE(as_cc->val.d == cc->val.d);
    }
    gate.passed = true;
}

TEST_CASE("criterion 2: lossless entropy backbone") {
    Gate gate{2, "range coder exact on 10^4 fuzzed streams; payload within 2% + 256 bits"};
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 10000; ++trial) {
        int L = 1 + static_cast<int>(rng() % 15);
        entropy::CdfTable t = entropy::build_gaussian_cdf(0.05 + (trial % 97) * 0.05, L);
        std::size_t n = rng() % 64;
        std::vector<std::int32_t> syms(n);
        for (auto& s : syms) s = static_cast<std::int32_t>(rng() % (2 * L + 1)) - L;
        auto payload = entropy::range_encode_uniform(syms, t);
        REQUIRE(entropy::range_decode_uniform(payload, n, t) == syms);
    }
    // per-frame payload-vs-estimate bound over a coded sequence, all modes
    data::SynthSpec spec;
    spec.frames = 5;
    spec.dx = 0.6;
    spec.dy = -0.3;
    spec.noise_sigma = 0.004;
    spec.seed = 7;
    FrameSequence seq = data::synth_sequence(spec);
    for (auto mode : {CodingMode::CC, CodingMode::CR, CodingMode::MCR}) {
        CodecModel model(tiny_cfg(mode, 4));
        CodecState state{seq.frames[0], 1};
        for (int i = 1; i < 5; ++i) {
            CodedFrame coded = encode_inter_frame(model, seq.frames[i], state);
            double actual = 8.0 * (coded.motion_payload.size() + coded.inter_payload.size());
            REQUIRE(std::abs(actual - coded.record.total_bits) <=
                    0.02 * coded.record.total_bits + 256.0);
            state.reference_frame = coded.record.reconstruction;
            state.frame_index = i + 1;
        }
    }
    gate.passed = true;
}

TEST_CASE("criterion 3: BD-rate correctness") {
    Gate gate{3, "BD-rate identity/scaling exact, PCHIP matches numeric oracle"};
    std::mt19937_64 rng(3);
    auto random_curve = [&](int n) {
        std::uniform_real_distribution<double> u(0.0, 1.0);
        eval::RDCurve c;
        c.label = "fuzz";
        double bpp = 0.02 + 0.05 * u(rng), psnr = 28 + 4 * u(rng);
        for (int i = 0; i < n; ++i) {
            c.points.push_back({bpp, psnr});
            bpp *= 1.5 + u(rng);
            psnr += 0.5 + 2.5 * u(rng);
        }
        REQUIRE(c.normalize());
        return c;
    };
    for (int trial = 0; trial < 100; ++trial) {
        eval::RDCurve a = random_curve(4 + static_cast<int>(rng() % 3));
        REQUIRE(std::abs(eval::bd_rate(a, a)) <= 1e-9);
        double k = 1.1 + 2.0 * (trial % 7) / 7.0;
        eval::RDCurve b = a;
        for (auto& p : b.points) p.bpp *= k;
        REQUIRE(std::abs(eval::bd_rate(a, b) - (k - 1.0) * 100.0) <= 1e-9 * 100 * k + 1e-9);

        // PCHIP integral vs dense numeric integration
        std::vector<double> xs, ys;
        for (const auto& p : a.points) {
            xs.push_back(p.psnr);
            ys.push_back(std::log10(p.bpp));
        }
        eval::Pchip f = eval::Pchip::fit(xs, ys);
        double lo = xs.front(), hi = xs.back();
        const int n = 40000;
        double acc = 0;
        for (int i = 0; i < n; ++i) {
            double x0 = lo + (hi - lo) * i / n, x1 = lo + (hi - lo) * (i + 1) / n;
            acc += 0.5 * (f(x0) + f(x1)) * (x1 - x0);
        }
        double exact = f.integral(lo, hi);
        double avg_gap_pct = std::abs(std::pow(10.0, (exact - acc) / (hi - lo)) - 1.0) * 100.0;
        REQUIRE(avg_gap_pct <= 0.01);
    }
    gate.passed = true;
}

TEST_CASE("criterion 4: entropy-theory checker") {
    Gate gate{4, "H(x|c) <= min(H(x), H(x-c)) on 10^4 joints; uniform case 2.6556"};
    std::vector<int> xs4{0, 1, 2, 3};
    std::vector<std::vector<double>> uniform(4, std::vector<double>(4, 1.0 / 16));
    eval::EntropyTriple u = eval::empirical_entropy_check(xs4, xs4, uniform);
    REQUIRE(std::abs(u.h_residual - 2.6556) <= 1e-4);

    std::mt19937_64 rng(4);
    std::exponential_distribution<double> ex(1.0);
    for (int trial = 0; trial < 10000; ++trial) {
        int nx = 2 + static_cast<int>(rng() % 5), nc = 2 + static_cast<int>(rng() % 5);
        std::vector<int> x(nx), c(nc);
        for (int i = 0; i < nx; ++i) x[i] = i - 1;
        for (int j = 0; j < nc; ++j) c[j] = j - 2;
        std::vector<std::vector<double>> joint(nx, std::vector<double>(nc));
        double total = 0;
        for (auto& row : joint)
            for (auto& p : row) total += (p = ex(rng));
        for (auto& row : joint)
            for (auto& p : row) p /= total;
        eval::EntropyTriple t = eval::empirical_entropy_check(x, c, joint);
        REQUIRE(t.h_conditional <= t.h_x + 1e-9);
        REQUIRE(t.h_conditional <= t.h_residual + 1e-9);
    }
    gate.passed = true;
}

TEST_CASE("criterion 5: complexity counter") {
    Gate gate{5, "analytic MACs == instrumented; resolution invariant; CR-CC == projection"};
    namespace cx = complexity;
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        nn::ParamRegistry reg(trial);
        cx::GraphBuilder g(16, 16);
        int cin = 1 + static_cast<int>(rng() % 5);
        Tensor xt = Tensor::full({cin, 16, 16}, 0.2);
        Var x = make_leaf(xt);
        MacCounter::enabled = true;
        MacCounter::reset();
        int cur = 16;
        for (int layer = 0; layer < 3; ++layer) {
            int cout = 1 + static_cast<int>(rng() % 6);
            std::string name = "l" + std::to_string(layer);
            if (rng() % 3 == 0 && cur % 2 == 0) {
                auto d = nn::make_deconv(reg, name, cin, cout, 4, 2, 1);
                x = d(x);
                g.deconv(name, cin, cout, 4, 2, 1, cx::Side::both);
                cur *= 2;
            } else if (rng() % 2 && cur % 2 == 0) {
                auto c = nn::make_conv(reg, name, cin, cout, 3, 2, 1);
                x = c(x);
                g.conv(name, cin, cout, 3, 2, 1, cx::Side::both);
                cur /= 2;
            } else {
                auto c = nn::make_conv(reg, name, cin, cout, 3, 1, 1);
                x = c(x);
                g.conv(name, cin, cout, 3, 1, 1, cx::Side::both);
            }
            cin = cout;
        }
        MacCounter::enabled = false;
        REQUIRE(MacCounter::conv_macs == cx::count_macs(g.graph).enc_conv_macs_total);
    }
    for (auto mode : {CodingMode::CC, CodingMode::CR, CodingMode::MCR}) {
        CodecConfig cfg = tiny_cfg(mode, 8);
        cx::ComplexityReport a = cx::report_for(cfg, 64, 64);
        cx::ComplexityReport b = cx::report_for(cfg, 128, 128);
        REQUIRE(a.enc_kmacs_per_pixel == doctest::Approx(b.enc_kmacs_per_pixel).epsilon(1e-12));
        REQUIRE(a.dec_kmacs_per_pixel == doctest::Approx(b.dec_kmacs_per_pixel).epsilon(1e-12));
    }
    for (int C : {4, 8, 16}) {
        cx::ComplexityReport cc = cx::report_for(tiny_cfg(CodingMode::CC, C));
        cx::ComplexityReport cr = cx::report_for(tiny_cfg(CodingMode::CR, C));
        REQUIRE((cr.dec_kmacs_per_pixel - cc.dec_kmacs_per_pixel) * 1000.0 ==
                doctest::Approx(27.0 * C).epsilon(1e-9));
        REQUIRE(cr.model_size_params - cc.model_size_params == 27 * C + 3);
    }
    gate.passed = true;
}

TEST_CASE("criterion 6: end-to-end decodability, 33 frames, GOP 32, three modes") {
    Gate gate{6, "33-frame GOP-32 encode/decode bitwise identical across runs, all modes at C=8"};
    data::SynthSpec spec;
    spec.frames = 33;
    spec.dx = 0.7;
    spec.dy = 0.3;
    spec.noise_sigma = 0.005;
    spec.seed = 11;
    FrameSequence seq = data::synth_sequence(spec);
    GopSchedule gop = data::make_gop_schedule(33, 32);
    for (auto mode : {CodingMode::CC, CodingMode::CR, CodingMode::MCR}) {
        CodecModel model(tiny_cfg(mode, 8));
        SequenceCodingResult res =
            encode_sequence(model, seq, gop, IntraMethod::lossless_passthrough);
        REQUIRE(res.bitstream.frames.size() == 33);
        auto bytes = res.bitstream.serialize();
        Bitstream reloaded = Bitstream::deserialize(bytes);
        std::vector<Frame> once = decode_sequence(model, reloaded, 64, 64);
        std::vector<Frame> twice = decode_sequence(model, reloaded, 64, 64);
        REQUIRE(once.size() == 33);
        for (int i = 0; i < 33; ++i) {
            REQUIRE(once[i].pixels.d == res.reconstructions[i].pixels.d);
            REQUIRE(once[i].pixels.d == twice[i].pixels.d);
        }
    }
    gate.passed = true;
}

TEST_CASE("criterion 7: bottleneck sensitivity trend, CC vs CR") {
    Gate gate{7, "C=16 -> C=4 validation degradation larger for CC than CR in >= 2/3 seeds"};
    auto trained_val = [&](CodingMode mode, int C, std::uint64_t seed,
                           const std::string& init) -> std::pair<double, std::string> {
        training::TrainConfig cfg;
        cfg.codec = tiny_cfg(mode, C, seed);
        cfg.codec.lambda = 512.0;
        cfg.batch_size = 1;
        cfg.iters_per_epoch = 12;
        cfg.learning_rate = 5e-4;
        cfg.epa_learning_rate = 5e-5;
        cfg.quiet = true;
        cfg.init_checkpoint = init;
        cfg.out_dir = work_dir("c7_" + mode_name(mode) + "_C" + std::to_string(C) + "_s" +
                               std::to_string(seed));
        CodecModel model(cfg.codec);
        if (mode == CodingMode::CC) training::warmup_motion(model, cfg, 8);
        training::ScheduleResult res = training::run_schedule(model, cfg);
        return {training::validation_loss(model, cfg, 8), res.steps.back().checkpoint_path};
    };
    int wins = 0;
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
        auto [cc16, ck16] = trained_val(CodingMode::CC, 16, seed, "");
        auto [cc4, ck4] = trained_val(CodingMode::CC, 4, seed, "");
        auto [cr16, _a] = trained_val(CodingMode::CR, 16, seed, ck16);
        auto [cr4, _b] = trained_val(CodingMode::CR, 4, seed, ck4);
        double deg_cc = cc4 - cc16, deg_cr = cr4 - cr16;
        std::cerr << "[c7] seed " << seed << ": cc16=" << cc16 << " cc4=" << cc4
                  << " cr16=" << cr16 << " cr4=" << cr4 << " deg_cc=" << deg_cc
                  << " deg_cr=" << deg_cr << "\n";
        wins += deg_cc > deg_cr;
    }
    REQUIRE(wins >= 2);
    gate.passed = true;
}

TEST_CASE("criterion 8: training-schedule conformance") {
    Gate gate{8, "7-step freeze audit clean; EPA gradient reaches frame-1 parameters"};
    CodecModel model(tiny_cfg(CodingMode::MCR, 4));
    auto phases = training::phase_table(CodingMode::MCR);
    REQUIRE(phases.size() == 7);
    std::vector<std::string> all = {"menet.", "mcodec.", "fe.", "proj.",
                                    "maskgen.", "inter.", "refine.", "intra."};
    training::DatasetSpec data;
    std::mt19937_64 rng(8);
    nn::Adam opt;
    opt.lr = 1e-3;
    for (const auto& phase : phases) {
        auto prefixes = training::trainable_prefixes(phase.trainable);
        model.reg.set_trainable_prefixes(prefixes);
        std::map<std::string, std::uint64_t> before;
        for (const auto& p : all) before[p] = model.reg.hash_prefix(p);
        auto clip = training::sample_clip(data, phase.num_frames, 400 + phase.step);
        model.reg.zero_grads();
        backward(training::rollout_loss(model, clip, phase.num_frames, phase.objective, phase.epa,
                                        512.0, rng));
        opt.step(model.reg);
        for (const auto& p : all) {
            bool scheduled = false;
            for (const auto& tp : prefixes) scheduled |= (p == tp);
            if (scheduled)
                REQUIRE(model.reg.hash_prefix(p) != before[p]);
            else
                REQUIRE(model.reg.hash_prefix(p) == before[p]);
        }
    }
    // EPA: last-frame loss must produce gradients in parameters through the
    // frame-1 coding path (the cascade is differentiable end to end)
    CodecModel fresh(tiny_cfg(CodingMode::CR, 4));
    fresh.reg.set_trainable_prefixes({""});
    auto clip = training::sample_clip(data, 3, 900);
    Tensor mid = clip[1]->val;
    clip[1] = make_leaf(mid, true);  // reachable only across the cascade
    std::mt19937_64 rng2(9);
    Var ref = clip[0];
    Var last_loss;
    for (int t = 1; t < 3; ++t) {
        TrainFrameResult r = code_frame_train(fresh, clip[t], ref, rng2);
        if (t == 2)
            last_loss = training::compute_loss(training::Objective::FULL_RD, r, clip[t], 512.0, 64, 64);
        ref = r.reconstruction;  // EPA: no detach
    }
    backward(last_loss);
    double reach = 0;
    for (double g : clip[1]->grad.d) reach += g * g;
    REQUIRE(reach > 0.0);
    gate.passed = true;
}

TEST_CASE("criterion 9: sweep report regeneration") {
    Gate gate{9, "sweep emits BD table, complexity table with deltas, scatter; anchor deltas 0"};
    std::string dir = work_dir("c9");
    std::filesystem::remove_all(dir);  // stale checkpoints would skip training
    std::string data_dir = dir + "/data";
    std::filesystem::create_directories(data_dir);
    REQUIRE(cli::run_command({"prepare-data", "--out", data_dir, "--frames", "5"}) == 0);
    std::string cfg_path = dir + "/tiny.json";
    {
        std::ofstream cfg(cfg_path);
        cfg << tiny_cfg(CodingMode::CC, 4).to_json_string();
    }
    std::string out = dir + "/report";
    REQUIRE(cli::run_command({"sweep", "--config", cfg_path, "--data", data_dir, "--out", out,
                              "--checkpoints", dir + "/ckpts", "--train", "--channel-set", "4",
                              "--lambda-set", "256", "--lambda-set", "512", "--lambda-set", "1024",
                              "--lambda-set", "2048", "--iters-per-epoch", "1", "--frames", "3",
                              "--gop", "32"}) == 0);
    auto slurp = [](const std::string& p) {
        REQUIRE(std::filesystem::exists(p));
        std::ifstream in(p);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    std::string rd = slurp(out + "/rd_points.csv");
    REQUIRE(rd.rfind("label,sequence_id,lambda,bpp,psnr", 0) == 0);
    std::string bd_json = slurp(out + "/bdrate.json");
    REQUIRE(bd_json.find("\"anchor\": \"cc_C4\"") != std::string::npos);
    // anchor against itself is exactly zero
    auto j = nlohmann::json::parse(bd_json);
    REQUIRE(j["tests"].contains("cc_C4"));
    REQUIRE(std::abs(j["tests"]["cc_C4"]["dataset_average_pct"].get<double>()) <= 1e-9);
    std::string cx_txt = slurp(out + "/complexity.txt");
    REQUIRE(cx_txt.find("cc_C4") != std::string::npos);
    REQUIRE(cx_txt.find("(+") != std::string::npos);  // parenthesized deltas
    std::string scatter = slurp(out + "/bd_vs_complexity.svg");
    REQUIRE(scatter.rfind("<svg", 0) == 0);
    std::string curves = slurp(out + "/rd_curves.svg");
    REQUIRE(curves.rfind("<svg", 0) == 0);
    gate.passed = true;
}
