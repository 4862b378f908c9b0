#include "nrdc/model.hpp"

namespace nrdc {

CodecModel::CodecModel(const CodecConfig& config) : cfg(config), reg(config.seed) {
    cfg.validate();
    const int C = cfg.cond_channels;
    const int w = cfg.base_width;
    const int cy = cfg.latent_channels;
    const int cz = cfg.z_channels;
    const int fw = cfg.flow_width;
    const int mw = cfg.motion_width;
    const int cm = cfg.motion_latent_channels;

    // motion estimation pyramid (3 levels)
    for (int l = 0; l < 3; ++l) {
        FlowNet::Level lv;
        std::string p = "menet.lvl" + std::to_string(l);
        lv.c1 = nn::make_conv(reg, p + ".c1", 8, fw, 3, 1, 1);
        lv.c2 = nn::make_conv(reg, p + ".c2", fw, fw, 3, 1, 1);
        lv.c3 = nn::make_conv(reg, p + ".c3", fw, 2, 3, 1, 1);
        flownet.levels.push_back(std::move(lv));
    }

    mcodec.e1 = nn::make_conv(reg, "mcodec.e1", 2, mw, 3, 2, 1);
    mcodec.e2 = nn::make_conv(reg, "mcodec.e2", mw, mw, 3, 2, 1);
    mcodec.e3 = nn::make_conv(reg, "mcodec.e3", mw, mw, 3, 2, 1);
    mcodec.e4 = nn::make_conv(reg, "mcodec.e4", mw, cm, 3, 2, 1);
    mcodec.d1 = nn::make_deconv(reg, "mcodec.d1", cm, mw, 4, 2, 1);
    mcodec.d2 = nn::make_deconv(reg, "mcodec.d2", mw, mw, 4, 2, 1);
    mcodec.d3 = nn::make_deconv(reg, "mcodec.d3", mw, mw, 4, 2, 1);
    mcodec.d4 = nn::make_deconv(reg, "mcodec.d4", mw, 2, 4, 2, 1);
    mcodec.prior_mu = reg.zeros_param("mcodec.prior.mu", {cm});
    // softplus(0.5413) ~= 1.0 starting scale
    mcodec.prior_sigma_raw = reg.param("mcodec.prior.sigma_raw", {cm}, 0.0);
    for (auto& v : mcodec.prior_sigma_raw->val.d) v = 0.5413;

    fe.in = nn::make_conv(reg, "fe.in", 3, C, 3, 1, 1);
    fe.rb = nn::make_resblock(reg, "fe.rb", C);

    refine.rb1 = nn::make_resblock(reg, "refine.rb1", C, /*zero_out=*/true);
    refine.rb2 = nn::make_resblock(reg, "refine.rb2", C, /*zero_out=*/true);

    if (cfg.mode != CodingMode::CC) proj.conv = nn::make_conv(reg, "proj.conv", C, 3, 3, 1, 1);

    if (cfg.mode == CodingMode::MCR) {
        const int k = cfg.mask_width;
        maskgen.in = nn::make_conv(reg, "maskgen.in", 5, k, 3, 1, 1);
        maskgen.rb1 = nn::make_resblock(reg, "maskgen.rb1", k);
        maskgen.rb2 = nn::make_resblock(reg, "maskgen.rb2", k);
        maskgen.out = nn::make_conv(reg, "maskgen.out", k, 1, 3, 1, 1);
    }

    inter.ge1 = nn::make_conv(reg, "inter.ge1", 3 + C, w, 3, 2, 1);
    inter.ge2 = nn::make_conv(reg, "inter.ge2", w, w, 3, 2, 1);
    if (cfg.multi_scale_condition) {
        inter.cond4a = nn::make_conv(reg, "inter.cond4a", C, w, 3, 2, 1);
        inter.cond4b = nn::make_conv(reg, "inter.cond4b", w, w, 3, 2, 1);
    }
    inter.ge3 = nn::make_conv(reg, "inter.ge3", w + (cfg.multi_scale_condition ? w : 0), w, 3, 2, 1);
    inter.ge4 = nn::make_conv(reg, "inter.ge4", w, cy, 3, 2, 1);

    inter.he1 = nn::make_conv(reg, "inter.he1", cy, w, 3, 2, 1);
    inter.he2 = nn::make_conv(reg, "inter.he2", w, cz, 3, 2, 1);
    inter.hd1 = nn::make_deconv(reg, "inter.hd1", cz, w, 4, 2, 1);
    inter.hd2 = nn::make_deconv(reg, "inter.hd2", w, w, 4, 2, 1);
    inter.z_mu = reg.zeros_param("inter.zprior.mu", {cz});
    inter.z_sigma_raw = reg.param("inter.zprior.sigma_raw", {cz}, 0.0);
    for (auto& v : inter.z_sigma_raw->val.d) v = 0.5413;

    if (cfg.use_temporal_prior) {
        inter.tp1 = nn::make_conv(reg, "inter.tp1", C, w, 3, 2, 1);
        inter.tp2 = nn::make_conv(reg, "inter.tp2", w, w, 3, 2, 1);
        inter.tp3 = nn::make_conv(reg, "inter.tp3", w, w, 3, 2, 1);
        inter.tp4 = nn::make_conv(reg, "inter.tp4", w, w, 3, 2, 1);
    }
    inter.fu1 = nn::make_conv(reg, "inter.fu1", w + (cfg.use_temporal_prior ? w : 0), w, 1, 1, 0);
    inter.fu2 = nn::make_conv(reg, "inter.fu2", w, 2 * cy, 1, 1, 0);

    inter.dc1 = nn::make_conv(reg, "inter.dc1", C, w, 3, 2, 1);
    inter.dc2 = nn::make_conv(reg, "inter.dc2", w, w, 3, 2, 1);
    inter.dc3 = nn::make_conv(reg, "inter.dc3", w, w, 3, 2, 1);
    inter.dc4 = nn::make_conv(reg, "inter.dc4", w, w, 3, 2, 1);

    inter.gd1 = nn::make_deconv(reg, "inter.gd1", cy + w, w, 4, 2, 1);
    inter.gd2 = nn::make_deconv(reg, "inter.gd2", w, w, 4, 2, 1);
    inter.gd3 = nn::make_deconv(reg, "inter.gd3", w, w, 4, 2, 1);
    inter.gd4 = nn::make_deconv(reg, "inter.gd4", w, cfg.dec_features, 4, 2, 1);

    const int fgw = cfg.dec_features + C;
    inter.fg1 = nn::make_resblock(reg, "inter.fg1", fgw);
    inter.fg2 = nn::make_resblock(reg, "inter.fg2", fgw);
    inter.fg_out = nn::make_conv(reg, "inter.fgout", fgw, 3, 3, 1, 1);

    intra.e1 = nn::make_conv(reg, "intra.e1", 3, mw, 3, 2, 1);
    intra.e2 = nn::make_conv(reg, "intra.e2", mw, mw, 3, 2, 1);
    intra.e3 = nn::make_conv(reg, "intra.e3", mw, cm, 3, 2, 1);
    intra.d1 = nn::make_deconv(reg, "intra.d1", cm, mw, 4, 2, 1);
    intra.d2 = nn::make_deconv(reg, "intra.d2", mw, mw, 4, 2, 1);
    intra.d3 = nn::make_deconv(reg, "intra.d3", mw, 3, 4, 2, 1);
    intra.prior_mu = reg.zeros_param("intra.prior.mu", {cm});
    intra.prior_sigma_raw = reg.param("intra.prior.sigma_raw", {cm}, 0.0);
    for (auto& v : intra.prior_sigma_raw->val.d) v = 0.5413;
}

namespace complexity {

ComputeGraphSummary build_codec_graph_for(const CodecModel& m, int input_h, int input_w) {
    const CodecConfig& cfg = m.cfg;
    const int C = cfg.cond_channels;
    GraphBuilder g(input_h, input_w);
    const Side enc = Side::encoder_only;
    const Side both = Side::both;

    m.flownet.describe(g);
    m.mcodec.describe(g);

    m.fe.describe(g, both);
    g.at(input_h, input_w);
    g.warp("cond.warp_xc", C, both);
    m.refine.describe(g, both);
    if (cfg.mode != CodingMode::CC) m.proj.describe(g, both);
    if (cfg.mode == CodingMode::MCR) {
        m.maskgen.describe(g, both);
        g.at(input_h, input_w);
        g.elementwise("blend.mask_mul", 3, both);
    }

    g.at(input_h, input_w);
    g.conv("inter.ge1", m.inter.ge1.cin, m.inter.ge1.cout, 3, 2, 1, enc);
    g.conv("inter.ge2", m.inter.ge2.cin, m.inter.ge2.cout, 3, 2, 1, enc);
    if (cfg.multi_scale_condition) {
        g.at(input_h, input_w);
        g.conv("inter.cond4a", m.inter.cond4a.cin, m.inter.cond4a.cout, 3, 2, 1, enc);
        g.conv("inter.cond4b", m.inter.cond4b.cin, m.inter.cond4b.cout, 3, 2, 1, enc);
    }
    g.at(input_h / 4, input_w / 4);
    g.conv("inter.ge3", m.inter.ge3.cin, m.inter.ge3.cout, 3, 2, 1, enc);
    g.conv("inter.ge4", m.inter.ge4.cin, m.inter.ge4.cout, 3, 2, 1, enc);

    g.at(input_h / 16, input_w / 16);
    g.conv("inter.he1", m.inter.he1.cin, m.inter.he1.cout, 3, 2, 1, enc);
    g.conv("inter.he2", m.inter.he2.cin, m.inter.he2.cout, 3, 2, 1, enc);
    g.at(input_h / 64, input_w / 64);
    g.deconv("inter.hd1", m.inter.hd1.cin, m.inter.hd1.cout, 4, 2, 1, both);
    g.deconv("inter.hd2", m.inter.hd2.cin, m.inter.hd2.cout, 4, 2, 1, both);
    if (cfg.use_temporal_prior) {
        g.at(input_h, input_w);
        g.conv("inter.tp1", m.inter.tp1.cin, m.inter.tp1.cout, 3, 2, 1, both);
        g.conv("inter.tp2", m.inter.tp2.cin, m.inter.tp2.cout, 3, 2, 1, both);
        g.conv("inter.tp3", m.inter.tp3.cin, m.inter.tp3.cout, 3, 2, 1, both);
        g.conv("inter.tp4", m.inter.tp4.cin, m.inter.tp4.cout, 3, 2, 1, both);
    }
    g.at(input_h / 16, input_w / 16);
    g.conv("inter.fu1", m.inter.fu1.cin, m.inter.fu1.cout, 1, 1, 0, both);
    g.conv("inter.fu2", m.inter.fu2.cin, m.inter.fu2.cout, 1, 1, 0, both);

    g.at(input_h, input_w);
    g.conv("inter.dc1", m.inter.dc1.cin, m.inter.dc1.cout, 3, 2, 1, both);
    g.conv("inter.dc2", m.inter.dc2.cin, m.inter.dc2.cout, 3, 2, 1, both);
    g.conv("inter.dc3", m.inter.dc3.cin, m.inter.dc3.cout, 3, 2, 1, both);
    g.conv("inter.dc4", m.inter.dc4.cin, m.inter.dc4.cout, 3, 2, 1, both);

    g.at(input_h / 16, input_w / 16);
    g.deconv("inter.gd1", m.inter.gd1.cin, m.inter.gd1.cout, 4, 2, 1, both);
    g.deconv("inter.gd2", m.inter.gd2.cin, m.inter.gd2.cout, 4, 2, 1, both);
    g.deconv("inter.gd3", m.inter.gd3.cin, m.inter.gd3.cout, 4, 2, 1, both);
    g.deconv("inter.gd4", m.inter.gd4.cin, m.inter.gd4.cout, 4, 2, 1, both);

    g.at(input_h, input_w);
    g.conv("inter.fg1.c1", m.inter.fg1.c1.cin, m.inter.fg1.c1.cout, 3, 1, 1, both);
    g.conv("inter.fg1.c2", m.inter.fg1.c2.cin, m.inter.fg1.c2.cout, 3, 1, 1, both);
    g.conv("inter.fg2.c1", m.inter.fg2.c1.cin, m.inter.fg2.c1.cout, 3, 1, 1, both);
    g.conv("inter.fg2.c2", m.inter.fg2.c2.cin, m.inter.fg2.c2.cout, 3, 1, 1, both);
    g.conv("inter.fgout", m.inter.fg_out.cin, 3, 3, 1, 1, both);
    if (cfg.mode != CodingMode::CC) g.elementwise("recon.addback", 3, both);
    return g.graph;
}

ComputeGraphSummary build_codec_graph(const CodecConfig& cfg, int input_h, int input_w) {
    CodecModel m(cfg);
    return build_codec_graph_for(m, input_h, input_w);
}

ComplexityReport report_for(const CodecConfig& cfg, int input_h, int input_w) {
    ComputeGraphSummary g = build_codec_graph(cfg, input_h, input_w);
    MacSplit macs = count_macs(g);
    ComplexityReport r;
    r.enc_kmacs_per_pixel = macs.enc_macs_per_pixel / 1000.0;
    r.dec_kmacs_per_pixel = macs.dec_macs_per_pixel / 1000.0;
    r.model_size_params = count_params(g);
    r.condition_channel_size = cfg.cond_channels;
    r.mode = cfg.mode;
    r.label = mode_name(cfg.mode) + "_C" + std::to_string(cfg.cond_channels);
    return r;
}

}  // namespace complexity
}  // namespace nrdc
