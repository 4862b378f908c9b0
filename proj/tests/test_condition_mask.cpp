#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "nrdc/model.hpp"

using namespace nrdc;

namespace {

CodecConfig tiny_cfg(CodingMode mode) {
    CodecConfig cfg;
    cfg.mode = mode;
    cfg.cond_channels = 8;
    cfg.base_width = 4;
    cfg.latent_channels = 4;
    cfg.z_channels = 2;
    cfg.dec_features = 4;
    cfg.flow_width = 4;
    cfg.motion_width = 4;
    cfg.motion_latent_channels = 2;
    cfg.mask_width = 4;
    return cfg;
}

Var random_var(std::vector<int> shape, std::uint64_t seed, double scale = 1.0) {
    Tensor t(shape);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-scale, scale);
    for (auto& v : t.d) v = u(rng);
    return make_leaf(t);
}

std::size_t prefix_param_count(const CodecModel& model, const std::string& prefix) {
    std::size_t n = 0;
    for (const auto& [name, p] : model.reg.params)
        if (name.rfind(prefix, 0) == 0) n += p->val.numel();
    return n;
}

}  // namespace

TEST_CASE("condition bundle shapes: C feature channels, 3-channel projection") {
    for (auto mode : {CodingMode::CC, CodingMode::CR, CodingMode::MCR}) {
        CodecModel model(tiny_cfg(mode));
        Var ref = random_var({3, 64, 64}, 1, 0.5);
        Var flow = random_var({2, 64, 64}, 2, 1.0);
        ConditionBundle b = build_condition(model, ref, flow);
        CHECK(b.channel_size == 8);
        CHECK(b.ref_features->val.shape == std::vector<int>{8, 64, 64});
        CHECK(b.predictor->val.shape == std::vector<int>{8, 64, 64});
        CHECK(b.refined->val.shape == std::vector<int>{8, 64, 64});
        if (mode == CodingMode::CC)
            CHECK_FALSE(b.pixel_predictor);
        else
            CHECK(b.pixel_predictor->val.shape == std::vector<int>{3, 64, 64});
    }
}

TEST_CASE("refinement starts as the identity (zero-initialized last convs)") {
    CodecModel model(tiny_cfg(CodingMode::CR));
    Var ref = random_var({3, 64, 64}, 3, 0.5);
    Var flow = random_var({2, 64, 64}, 4, 1.0);
    ConditionBundle b = build_condition(model, ref, flow);
    for (std::size_t i = 0; i < b.refined->val.d.size(); ++i)
        REQUIRE(b.refined->val.d[i] == b.predictor->val.d[i]);
}

TEST_CASE("pixel predictor is built from the raw warped condition, not the refined one") {
    CodecModel model(tiny_cfg(CodingMode::CR));
    Var ref = random_var({3, 64, 64}, 5, 0.5);
    Var flow = random_var({2, 64, 64}, 6, 1.0);
    Tensor before = build_condition(model, ref, flow).pixel_predictor->val;
    // perturbing the refinement net must leave x_ddot_c untouched
    for (auto& [name, p] : model.reg.params)
        if (name.rfind("refine.", 0) == 0)
            for (auto& v : p->val.d) v += 0.37;
    Tensor after = build_condition(model, ref, flow).pixel_predictor->val;
    CHECK(before.d == after.d);
    // ...while perturbing the projection must change it
    for (auto& [name, p] : model.reg.params)
        if (name.rfind("proj.", 0) == 0)
            for (auto& v : p->val.d) v += 0.11;
    Tensor proj_after = build_condition(model, ref, flow).pixel_predictor->val;
    CHECK(proj_after.d != before.d);
}

TEST_CASE("projection cost formulas: 9C+3... params = 27C+3, MACs/px = 27C") {
    for (int C : {4, 8, 16}) {
        CodecConfig cfg = tiny_cfg(CodingMode::CR);
        cfg.cond_channels = C;
        CodecModel model(cfg);
        CHECK(prefix_param_count(model, "proj.") == static_cast<std::size_t>(27 * C + 3));
        complexity::GraphBuilder g(64, 64);
        model.proj.describe(g, complexity::Side::both);
        CHECK(g.graph.layers.size() == 1);
        complexity::MacSplit split = complexity::count_macs(g.graph);
        CHECK(split.enc_conv_macs_total == static_cast<std::uint64_t>(27 * C) * 64 * 64);
        CHECK(split.dec_conv_macs_total == split.enc_conv_macs_total);
        CHECK(split.enc_macs_per_pixel == doctest::Approx(27.0 * C));
        CHECK(complexity::count_params(g.graph) == 27 * C + 3);
    }
}

TEST_CASE("mode purity: CC has no projection, only MCR has a mask generator") {
    CodecModel cc(tiny_cfg(CodingMode::CC));
    CodecModel cr(tiny_cfg(CodingMode::CR));
    CodecModel mcr(tiny_cfg(CodingMode::MCR));
    CHECK(prefix_param_count(cc, "proj.") == 0);
    CHECK(prefix_param_count(cc, "maskgen.") == 0);
    CHECK(prefix_param_count(cr, "proj.") > 0);
    CHECK(prefix_param_count(cr, "maskgen.") == 0);
    CHECK(prefix_param_count(mcr, "proj.") > 0);
    CHECK(prefix_param_count(mcr, "maskgen.") > 0);
    // CR and MCR share every non-mask parameter name with CC plus the extras
    for (const auto& [name, p] : cc.reg.params) {
        CHECK(cr.reg.params.count(name) == 1);
        CHECK(mcr.reg.params.count(name) == 1);
    }
}

TEST_CASE("mask generator: one sigmoid channel in [0,1], full resolution") {
    CodecModel model(tiny_cfg(CodingMode::MCR));
    Var flow = random_var({2, 64, 96}, 7, 2.0);
    Var xddot = random_var({3, 64, 96}, 8, 0.5);
    Var m = model.maskgen(flow, xddot);
    REQUIRE(m->val.shape == std::vector<int>{1, 64, 96});
    for (double v : m->val.d) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
    // deterministic
    Var m2 = model.maskgen(flow, xddot);
    CHECK(m->val.d == m2->val.d);
}

TEST_CASE("form_codec_input: the three schemes and their argument contracts") {
    Var x = random_var({3, 8, 8}, 9, 0.5);
    Var xddot = random_var({3, 8, 8}, 10, 0.5);
    Tensor mt({1, 8, 8});
    std::mt19937_64 rng(11);
    for (auto& v : mt.d) v = static_cast<double>(rng() % 1000) / 1000.0;
    Var mask = make_leaf(mt);

    Var cc = form_codec_input(x, Var{}, std::nullopt, CodingMode::CC);
    CHECK(cc->val.d == x->val.d);

    Var cr = form_codec_input(x, xddot, std::nullopt, CodingMode::CR);
    for (std::size_t i = 0; i < cr->val.d.size(); ++i)
        CHECK(cr->val.d[i] == doctest::Approx(x->val.d[i] - xddot->val.d[i]));

    Var mcr = form_codec_input(x, xddot, mask, CodingMode::MCR);
    for (int c = 0; c < 3; ++c)
        for (int y = 0; y < 8; ++y)
            for (int xx = 0; xx < 8; ++xx)
                CHECK(mcr->val.at(c, y, xx) ==
                      doctest::Approx(x->val.at(c, y, xx) - mt.at(0, y, xx) * xddot->val.at(c, y, xx)));

    // mask presence must match the mode exactly
    CHECK_THROWS_AS(form_codec_input(x, xddot, mask, CodingMode::CR), ArgumentError);
    CHECK_THROWS_AS(form_codec_input(x, xddot, std::nullopt, CodingMode::MCR), ArgumentError);
    CHECK_THROWS_AS(form_codec_input(x, xddot, mask, CodingMode::CC), ArgumentError);
    CHECK_THROWS_AS(form_codec_input(x, Var{}, std::nullopt, CodingMode::CR), ArgumentError);
}

TEST_CASE("MCR blend endpoints: m=1 reduces to CR, m=0 reduces to CC") {
    Var x = random_var({3, 8, 8}, 12, 0.5);
    Var xddot = random_var({3, 8, 8}, 13, 0.5);
    Var ones = make_leaf(Tensor::full({1, 8, 8}, 1.0));
    Var zeros = make_leaf(Tensor::zeros({1, 8, 8}));

    Var mcr1 = form_codec_input(x, xddot, ones, CodingMode::MCR);
    Var cr = form_codec_input(x, xddot, std::nullopt, CodingMode::CR);
    Var mcr0 = form_codec_input(x, xddot, zeros, CodingMode::MCR);
    Var cc = form_codec_input(x, Var{}, std::nullopt, CodingMode::CC);
    double d1 = 0, d0 = 0;
    for (std::size_t i = 0; i < x->val.d.size(); ++i) {
        d1 = std::max(d1, std::abs(mcr1->val.d[i] - cr->val.d[i]));
        d0 = std::max(d0, std::abs(mcr0->val.d[i] - cc->val.d[i]));
    }
    CHECK(d1 <= 1e-6);
    CHECK(d0 <= 1e-6);
}

TEST_CASE("feature extractor cost scales linearly in resolution") {
    CodecModel model(tiny_cfg(CodingMode::CC));
    complexity::GraphBuilder g64(64, 64), g128(128, 128);
    model.fe.describe(g64, complexity::Side::both);
    model.fe.describe(g128, complexity::Side::both);
    std::uint64_t m64 = complexity::count_macs(g64.graph).enc_conv_macs_total;
    std::uint64_t m128 = complexity::count_macs(g128.graph).enc_conv_macs_total;
    CHECK(m128 == 4 * m64);
}
