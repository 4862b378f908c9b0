#include "nrdc/cli.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "nrdc/checkpoint.hpp"
#include "nrdc/evaluation.hpp"
#include "nrdc/model.hpp"
#include "nrdc/training.hpp"

namespace nrdc {
namespace cli {

namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "nrdc 1.0.0";

std::string read_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path);
    std::ostringstream s;
    s << is.rdbuf();
    return s.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot write " + path);
    os << text;
}

void write_manifest(const std::string& dir, const std::string& command, const nlohmann::json& extra) {
    nlohmann::json j;
    j["command"] = command;
    j["version"] = kVersion;
    auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[64];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    j["timestamp"] = buf;
    j["params"] = extra;
    fs::create_directories(dir);
    write_file(dir + "/manifest.json", j.dump(2));
}

// config file first, then flag overrides
struct ConfigFlags {
    std::string config_path;
    std::string mode;
    int channels = -1;
    double lambda = -1;
    std::int64_t seed = -1;

    CodecConfig resolve() const {
        CodecConfig c;
        if (!config_path.empty()) c = CodecConfig::from_json_string(read_file(config_path));
        if (!mode.empty()) c.mode = mode_from_name(mode);
        if (channels > 0) c.cond_channels = channels;
        if (lambda > 0) c.lambda = lambda;
        if (seed >= 0) c.seed = static_cast<std::uint64_t>(seed);
        c.validate();
        return c;
    }

    void attach(CLI::App* app) {
        app->add_option("--config", config_path, "JSON codec config file");
        app->add_option("--mode", mode, "coding mode: cc, cr, mcr");
        app->add_option("--channels", channels, "condition channel size C");
        app->add_option("--lambda", lambda, "rate-distortion lambda");
        app->add_option("--seed", seed, "master seed");
    }
};

FrameSequence load_input(const std::string& path, int max_frames) {
    SequenceDescriptor desc;
    if (fs::is_directory(path)) {
        desc.path = path;
        desc.pixel_format = PixelFormat::png_dir;
    } else {
        desc = data::read_descriptor(path);
    }
    return data::load_sequence(desc, max_frames);
}

CodecModel load_model(const std::string& ckpt_path) {
    checkpoint::Meta meta = checkpoint::peek(ckpt_path);
    CodecModel model(meta.config);
    checkpoint::load(ckpt_path, model.reg, /*allow_missing=*/false);
    return model;
}

double sequence_bpp(const SequenceCodingResult& r, int width, int height, int frames) {
    return eval::bpp(8.0 * double(r.bitstream.total_bytes()), width, height) / frames;
}

// ---------------------------------------------------------------- commands

int cmd_prepare_data(const std::string& out_dir, int frames, int size, std::uint64_t seed) {
    fs::create_directories(out_dir);
    struct Spec {
        const char* name;
        data::SynthPattern pattern;
        double dx, dy, noise;
    };
    const Spec specs[] = {
        {"sines_pan", data::SynthPattern::SINES, 0.7, 0.3, 0.0},
        {"sines_noisy", data::SynthPattern::SINES, -0.4, 0.6, 0.01},
        {"checker_slide", data::SynthPattern::CHECKER, 1.0, -0.5, 0.005},
    };
    for (const Spec& sp : specs) {
        data::SynthSpec s;
        s.pattern = sp.pattern;
        s.dx = sp.dx;
        s.dy = sp.dy;
        s.noise_sigma = sp.noise;
        s.frames = frames;
        s.height = s.width = size;
        s.seed = seed++;
        FrameSequence seq = data::synth_sequence(s);
        seq.source_id = sp.name;
        std::string yuv = out_dir + "/" + sp.name + ".yuv";
        data::write_yuv_sequence(seq, yuv);
        std::cout << "wrote " << yuv << " (" << frames << " frames, " << size << "x" << size << ")\n";
    }
    write_manifest(out_dir, "prepare-data",
                   {{"frames", frames}, {"size", size}, {"seed", seed}});
    return 0;
}

int cmd_train(const ConfigFlags& cf, const std::string& out_dir, const std::string& init_ckpt,
              int iters_per_epoch, int patch, int batch, int warmup_iters, bool quiet) {
    training::TrainConfig tc;
    tc.codec = cf.resolve();
    tc.iters_per_epoch = iters_per_epoch;
    tc.data.patch = patch;
    tc.batch_size = batch;
    tc.init_checkpoint = init_ckpt;
    tc.out_dir = out_dir;
    tc.quiet = quiet;

    CodecModel model(tc.codec);
    if (warmup_iters > 0 && tc.codec.mode == CodingMode::CC)
        training::warmup_motion(model, tc, warmup_iters);
    training::ScheduleResult res = training::run_schedule(model, tc);

    std::string final_path = out_dir + "/final.ckpt";
    checkpoint::Meta meta;
    meta.config = model.cfg;
    meta.schedule_step = res.steps.empty() ? 0 : res.steps.back().step;
    checkpoint::save(final_path, model.reg, meta);
    write_manifest(out_dir, "train",
                   {{"config", nlohmann::json::parse(tc.codec.to_json_string())},
                    {"iters_per_epoch", iters_per_epoch},
                    {"patch", patch},
                    {"batch", batch},
                    {"warmup_iters", warmup_iters},
                    {"init", init_ckpt}});
    std::cout << "final checkpoint: " << final_path << "\n";
    std::cout << "validation loss: " << training::validation_loss(model, tc) << "\n";
    return 0;
}

int cmd_encode(const std::string& ckpt, const std::string& input, int frames, int gop,
               const std::string& out_path, const std::string& recon_dir) {
    CodecModel model = load_model(ckpt);
    FrameSequence seq = load_input(input, frames);
    GopSchedule sched = data::make_gop_schedule(int(seq.frames.size()), gop);
    DebugSink dbg;
    if (!recon_dir.empty()) {
        fs::create_directories(recon_dir);
        dbg.dir = recon_dir;
    }
    SequenceCodingResult r = encode_sequence(model, seq, sched, IntraMethod::lossless_passthrough, dbg);
    r.bitstream.save(out_path);

    double psnr = 0;
    for (std::size_t i = 0; i < seq.frames.size(); ++i)
        psnr += eval::psnr_rgb(seq.frames[i], r.reconstructions[i]);
    psnr /= double(seq.frames.size());
    double rate = sequence_bpp(r, seq.width(), seq.height(), int(seq.frames.size()));
    std::cout << "encoded " << seq.frames.size() << " frames -> " << out_path << "\n"
              << "bpp " << rate << "  psnr_rgb " << psnr << " dB\n";
    return 0;
}

int cmd_decode(const std::string& ckpt, const std::string& bs_path, int width, int height,
               const std::string& out_dir) {
    CodecModel model = load_model(ckpt);
    Bitstream bs = Bitstream::load(bs_path);
    std::vector<Frame> frames = decode_sequence(model, bs, height, width);
    fs::create_directories(out_dir);
    for (std::size_t i = 0; i < frames.size(); ++i)
        data::write_png(out_dir + "/frame" + std::to_string(i) + ".png", frames[i]);
    FrameSequence seq;
    seq.frames = frames;
    data::write_yuv_sequence(seq, out_dir + "/decoded.yuv");
    std::cout << "decoded " << frames.size() << " frames -> " << out_dir << "\n";
    return 0;
}

int cmd_eval(const std::string& ckpt, const std::string& input, int frames, int gop,
             const std::string& label, const std::string& out_csv) {
    CodecModel model = load_model(ckpt);
    FrameSequence seq = load_input(input, frames);
    GopSchedule sched = data::make_gop_schedule(int(seq.frames.size()), gop);
    SequenceCodingResult r = encode_sequence(model, seq, sched, IntraMethod::lossless_passthrough);

    double psnr = 0;
    for (std::size_t i = 0; i < seq.frames.size(); ++i)
        psnr += eval::psnr_rgb(seq.frames[i], r.reconstructions[i]);
    psnr /= double(seq.frames.size());

    eval::RDRecord rec;
    rec.label = label.empty() ? (mode_name(model.cfg.mode) + "_C" + std::to_string(model.cfg.cond_channels))
                              : label;
    rec.sequence_id = seq.source_id.empty() ? fs::path(input).stem().string() : seq.source_id;
    rec.lambda = model.cfg.lambda;
    rec.bpp = sequence_bpp(r, seq.width(), seq.height(), int(seq.frames.size()));
    rec.psnr = psnr;

    std::vector<eval::RDRecord> all;
    if (fs::exists(out_csv)) all = eval::parse_rd_csv(read_file(out_csv));
    all.push_back(rec);
    write_file(out_csv, eval::rd_csv(all));
    std::cout << rec.label << "," << rec.sequence_id << "," << rec.lambda << "," << rec.bpp << ","
              << rec.psnr << "\n";
    return 0;
}

// groups RD records into per-(label, sequence) curves and reports BD-rate
// of every label against the anchor, averaged per sequence
std::map<std::string, eval::BdReport> bd_from_records(const std::vector<eval::RDRecord>& records,
                                                      const std::string& anchor) {
    std::map<std::string, std::map<std::string, eval::RDCurve>> curves;  // label -> seq -> curve
    for (const auto& r : records) {
        eval::RDCurve& c = curves[r.label][r.sequence_id];
        c.label = r.label;
        c.points.push_back({r.bpp, r.psnr});
    }
    if (!curves.count(anchor)) throw ArgumentError("anchor label '" + anchor + "' not in RD data");
    for (auto& [label, by_seq] : curves)
        for (auto it = by_seq.begin(); it != by_seq.end();) {
            try {
                if (!it->second.normalize())
                    std::cerr << "warning: non-monotone RD curve " << label << "/" << it->first
                              << "\n";
                ++it;
            } catch (const ArgumentError& e) {
                std::cerr << "warning: dropping RD curve " << label << "/" << it->first << ": "
                          << e.what() << "\n";
                it = by_seq.erase(it);
            }
        }

    std::map<std::string, eval::BdReport> out;
    for (auto& [label, by_seq] : curves) {
        std::map<std::string, double> per_seq;
        for (auto& [seq, c] : by_seq) {
            auto it = curves[anchor].find(seq);
            if (it == curves[anchor].end()) continue;
            try {
                per_seq[seq] = eval::bd_rate(it->second, c);
            } catch (const ComputationError& e) {
                // degenerate toy curve (no overlap / too few monotone points)
                std::cerr << "warning: skipping BD cell " << label << "/" << seq << ": " << e.what()
                          << "\n";
            }
        }
        if (!per_seq.empty()) out[label] = eval::average_per_sequence(per_seq);
    }
    return out;
}

int cmd_bdrate(const std::string& csv_path, const std::string& anchor, const std::string& out_json) {
    auto records = eval::parse_rd_csv(read_file(csv_path));
    auto reports = bd_from_records(records, anchor);
    std::cout << eval::bd_report_table(reports, anchor);
    if (!out_json.empty()) {
        nlohmann::json j;
        j["anchor"] = anchor;
        for (auto& [label, rep] : reports) {
            j["tests"][label]["dataset_average_pct"] = rep.dataset_average;
            for (auto& [seq, v] : rep.per_sequence) j["tests"][label]["per_sequence_pct"][seq] = v;
        }
        write_file(out_json, j.dump(2));
    }
    return 0;
}

std::vector<complexity::ComplexityReport> reports_for(const std::vector<int>& channel_set,
                                                      const ConfigFlags& cf) {
    std::vector<complexity::ComplexityReport> reports;
    for (CodingMode mode : {CodingMode::CC, CodingMode::CR, CodingMode::MCR})
        for (int c : channel_set) {
            CodecConfig cfg = cf.resolve();
            cfg.mode = mode;
            cfg.cond_channels = c;
            reports.push_back(complexity::report_for(cfg));
        }
    return reports;
}

int find_anchor(const std::vector<complexity::ComplexityReport>& reports, const std::string& anchor) {
    for (std::size_t i = 0; i < reports.size(); ++i)
        if (reports[i].label == anchor) return int(i);
    throw ArgumentError("anchor label '" + anchor + "' not among reports");
}

int cmd_complexity(const ConfigFlags& cf, std::vector<int> channel_set, std::string anchor,
                   const std::string& out_dir) {
    if (channel_set.empty()) channel_set = {4, 8, 16, 32, 64};
    auto reports = reports_for(channel_set, cf);
    if (anchor.empty()) anchor = mode_name(CodingMode::CC) + "_C" + std::to_string(channel_set.back());
    int ai = find_anchor(reports, anchor);
    std::cout << complexity::render_complexity_table(reports, ai);
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        write_file(out_dir + "/complexity.csv", complexity::complexity_csv(reports));
        write_file(out_dir + "/complexity.json", complexity::complexity_json(reports, ai));
        write_file(out_dir + "/complexity.txt", complexity::render_complexity_table(reports, ai));
        write_manifest(out_dir, "complexity", {{"anchor", anchor}});
    }
    return 0;
}

int cmd_entropy_check() {
    // independent uniform pair on {0..3}: the residual histogram spreads to
    // 7 bins while conditioning buys nothing
    std::vector<int> vals = {0, 1, 2, 3};
    std::vector<std::vector<double>> joint(4, std::vector<double>(4, 1.0 / 16.0));
    eval::EntropyTriple t = eval::empirical_entropy_check(vals, vals, joint);
    nlohmann::json j;
    j["independent_uniform"] = {
        {"h_x", t.h_x}, {"h_residual", t.h_residual}, {"h_conditional", t.h_conditional}};

    // strong predictor: x_c = x + {-1,0,1} noise
    std::vector<int> xv = {0, 1, 2, 3}, cv = {-1, 0, 1, 2, 3, 4};
    std::vector<std::vector<double>> noisy(4, std::vector<double>(6, 0.0));
    for (int i = 0; i < 4; ++i)
        for (int dn = -1; dn <= 1; ++dn) noisy[i][i + dn + 1] = 1.0 / 12.0;
    eval::EntropyTriple t2 = eval::empirical_entropy_check(xv, cv, noisy);
    j["noisy_predictor"] = {
        {"h_x", t2.h_x}, {"h_residual", t2.h_residual}, {"h_conditional", t2.h_conditional}};
    std::cout << j.dump(2) << "\n";
    return 0;
}

int cmd_visualize(const std::string& ckpt, const std::string& input, int frames, int gop,
                  const std::string& out_dir) {
    CodecModel model = load_model(ckpt);
    FrameSequence seq = load_input(input, frames);
    GopSchedule sched = data::make_gop_schedule(int(seq.frames.size()), gop);
    fs::create_directories(out_dir);
    DebugSink dbg{out_dir};
    encode_sequence(model, seq, sched, IntraMethod::lossless_passthrough, dbg);
    write_manifest(out_dir, "visualize", {{"input", input}, {"frames", frames}});
    std::cout << "frame dumps in " << out_dir << "\n";
    return 0;
}

int cmd_sweep(const ConfigFlags& cf, const std::string& ckpt_dir, const std::string& data_dir,
              const std::string& out_dir, std::vector<int> channel_set, std::vector<double> lambdas,
              bool do_train, int iters_per_epoch, int frames, int gop) {
    if (channel_set.empty()) channel_set = {4, 16};
    if (lambdas.empty()) lambdas = {256, 512, 1024, 2048};
    fs::create_directories(out_dir);
    fs::create_directories(ckpt_dir);

    // benchmark sequences
    std::vector<std::string> inputs;
    for (auto& e : fs::directory_iterator(data_dir))
        if (e.path().extension() == ".yuv") inputs.push_back(e.path().string());
    std::sort(inputs.begin(), inputs.end());
    if (inputs.empty()) throw ArgumentError("sweep: no .yuv sequences in " + data_dir);

    const CodingMode modes[] = {CodingMode::CC, CodingMode::CR, CodingMode::MCR};
    std::vector<eval::RDRecord> records;

    for (int c : channel_set) {
        for (CodingMode mode : modes) {
            for (double lambda : lambdas) {
                CodecConfig cfg = cf.resolve();
                cfg.mode = mode;
                cfg.cond_channels = c;
                cfg.lambda = lambda;
                // distinct init per lambda cell so short training runs still
                // yield distinct operating points
                cfg.seed += static_cast<std::uint64_t>(lambda);
                std::string label = mode_name(mode) + "_C" + std::to_string(c);
                std::string cell = mode_name(mode) + "_C" + std::to_string(c) + "_l" +
                                   std::to_string(int(lambda));
                std::string ckpt = ckpt_dir + "/" + cell + ".ckpt";

                if (!fs::exists(ckpt)) {
                    if (!do_train) throw ConfigError("sweep: missing checkpoint " + ckpt);
                    training::TrainConfig tc;
                    tc.codec = cfg;
                    tc.iters_per_epoch = iters_per_epoch;
                    tc.out_dir = out_dir + "/train_" + cell;
                    tc.quiet = true;
                    if (mode == CodingMode::CR)
                        tc.init_checkpoint = ckpt_dir + "/" + mode_name(CodingMode::CC) + "_C" +
                                             std::to_string(c) + "_l" + std::to_string(int(lambda)) +
                                             ".ckpt";
                    if (mode == CodingMode::MCR)
                        tc.init_checkpoint = ckpt_dir + "/" + mode_name(CodingMode::CR) + "_C" +
                                             std::to_string(c) + "_l" + std::to_string(int(lambda)) +
                                             ".ckpt";
                    CodecModel model(cfg);
                    if (mode == CodingMode::CC) training::warmup_motion(model, tc, 8);
                    training::run_schedule(model, tc);
                    checkpoint::Meta meta;
                    meta.config = cfg;
                    meta.schedule_step = 7;
                    checkpoint::save(ckpt, model.reg, meta);
                }

                CodecModel model = load_model(ckpt);
                for (const std::string& input : inputs) {
                    FrameSequence seq = load_input(input, frames);
                    GopSchedule sched = data::make_gop_schedule(int(seq.frames.size()), gop);
                    SequenceCodingResult r =
                        encode_sequence(model, seq, sched, IntraMethod::lossless_passthrough);
                    double psnr = 0;
                    for (std::size_t i = 0; i < seq.frames.size(); ++i)
                        psnr += eval::psnr_rgb(seq.frames[i], r.reconstructions[i]);
                    eval::RDRecord rec;
                    rec.label = label;
                    rec.sequence_id = fs::path(input).stem().string();
                    rec.lambda = lambda;
                    rec.bpp = sequence_bpp(r, seq.width(), seq.height(), int(seq.frames.size()));
                    rec.psnr = psnr / double(seq.frames.size());
                    records.push_back(rec);
                }
                std::cerr << "[sweep] " << cell << " evaluated\n";
            }
        }
    }

    write_file(out_dir + "/rd_points.csv", eval::rd_csv(records));

    // Table-2-style BD-rate report, anchor = CC at the largest C
    std::string anchor = mode_name(CodingMode::CC) + "_C" + std::to_string(channel_set.back());
    std::map<std::string, eval::BdReport> bd;
    std::map<std::string, std::string> bd_errors;
    auto all_reports = bd_from_records(records, anchor);
    nlohmann::json bdj;
    bdj["anchor"] = anchor;
    for (auto& [label, rep] : all_reports) {
        bdj["tests"][label]["dataset_average_pct"] = rep.dataset_average;
        for (auto& [seq, v] : rep.per_sequence) bdj["tests"][label]["per_sequence_pct"][seq] = v;
    }
    write_file(out_dir + "/bdrate.json", bdj.dump(2));
    write_file(out_dir + "/bdrate.txt", eval::bd_report_table(all_reports, anchor));

    // Table-3-style complexity report over the same grid
    std::vector<complexity::ComplexityReport> reports;
    for (CodingMode mode : modes)
        for (int c : channel_set) {
            CodecConfig cfg = cf.resolve();
            cfg.mode = mode;
            cfg.cond_channels = c;
            reports.push_back(complexity::report_for(cfg));
        }
    int ai = find_anchor(reports, anchor);
    write_file(out_dir + "/complexity.txt", complexity::render_complexity_table(reports, ai));
    write_file(out_dir + "/complexity.json", complexity::complexity_json(reports, ai));

    // Fig.-1-style scatter: BD-rate vs decoding kMACs/pixel
    std::vector<eval::ScatterPoint> pts;
    for (auto& r : reports) {
        auto it = all_reports.find(r.label);
        if (it == all_reports.end()) continue;
        pts.push_back({r.label, r.dec_kmacs_per_pixel, it->second.dataset_average});
    }
    write_file(out_dir + "/bd_vs_complexity.svg",
               eval::scatter_plot_svg(pts, "decoding kMACs/pixel", "BD-rate % vs " + anchor));

    // RD curves per sequence (first sequence shown)
    std::vector<eval::RDCurve> curves;
    {
        std::map<std::string, eval::RDCurve> by_label;
        std::string seq0 = fs::path(inputs[0]).stem().string();
        for (auto& r : records)
            if (r.sequence_id == seq0) {
                by_label[r.label].label = r.label;
                by_label[r.label].points.push_back({r.bpp, r.psnr});
            }
        for (auto& [l, c] : by_label) {
            c.normalize();
            curves.push_back(c);
        }
    }
    write_file(out_dir + "/rd_curves.svg", eval::rd_plot_svg(curves));
    write_manifest(out_dir, "sweep",
                   {{"anchor", anchor}, {"channels", channel_set}, {"lambdas", lambdas}});
    (void)bd;
    (void)bd_errors;
    std::cout << "sweep artifacts in " << out_dir << "\n";
    return 0;
}

}  // namespace

int run_command(const std::vector<std::string>& args) {
    CLI::App app{"neural video codec laboratory: conditional (residual) coding at desk scale"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    // prepare-data
    auto* prep = app.add_subcommand("prepare-data", "generate synthetic benchmark sequences");
    std::string prep_out = "data";
    int prep_frames = 33, prep_size = 64;
    std::int64_t prep_seed = 7;
    prep->add_option("--out", prep_out);
    prep->add_option("--frames", prep_frames);
    prep->add_option("--size", prep_size);
    prep->add_option("--seed", prep_seed);

    // train
    auto* train = app.add_subcommand("train", "run the 7-step training schedule");
    ConfigFlags train_cf;
    train_cf.attach(train);
    std::string train_out = "runs/train", train_init;
    int train_ipe = 8, train_patch = 64, train_batch = 2, train_warmup = 8;
    bool train_quiet = false;
    train->add_option("--out", train_out);
    train->add_option("--init", train_init, "checkpoint from the previous coding mode");
    train->add_option("--iters-per-epoch", train_ipe);
    train->add_option("--patch", train_patch);
    train->add_option("--batch", train_batch);
    train->add_option("--warmup-iters", train_warmup);
    train->add_flag("--quiet", train_quiet);

    // encode
    auto* enc = app.add_subcommand("encode", "encode a sequence to a bitstream");
    std::string enc_ckpt, enc_input, enc_out = "out.nrdc", enc_recon;
    int enc_frames = 33, enc_gop = 32;
    enc->add_option("--checkpoint", enc_ckpt)->required();
    enc->add_option("--input", enc_input)->required();
    enc->add_option("--frames", enc_frames);
    enc->add_option("--gop", enc_gop);
    enc->add_option("--out", enc_out);
    enc->add_option("--recon-dir", enc_recon);

    // decode
    auto* dec = app.add_subcommand("decode", "decode a bitstream");
    std::string dec_ckpt, dec_bs, dec_out = "decoded";
    int dec_w = 0, dec_h = 0;
    dec->add_option("--checkpoint", dec_ckpt)->required();
    dec->add_option("--bitstream", dec_bs)->required();
    dec->add_option("--width", dec_w)->required();
    dec->add_option("--height", dec_h)->required();
    dec->add_option("--out", dec_out);

    // eval
    auto* ev = app.add_subcommand("eval", "encode and append an RD point to a CSV");
    std::string ev_ckpt, ev_input, ev_label, ev_csv = "rd_points.csv";
    int ev_frames = 33, ev_gop = 32;
    ev->add_option("--checkpoint", ev_ckpt)->required();
    ev->add_option("--input", ev_input)->required();
    ev->add_option("--frames", ev_frames);
    ev->add_option("--gop", ev_gop);
    ev->add_option("--label", ev_label);
    ev->add_option("--out", ev_csv);

    // bdrate
    auto* bd = app.add_subcommand("bdrate", "BD-rate report from an RD CSV");
    std::string bd_csv, bd_anchor, bd_json;
    bd->add_option("--csv", bd_csv)->required();
    bd->add_option("--anchor", bd_anchor)->required();
    bd->add_option("--out", bd_json);

    // complexity
    auto* cx = app.add_subcommand("complexity", "analytic kMACs/pixel and parameter report");
    ConfigFlags cx_cf;
    cx_cf.attach(cx);
    std::vector<int> cx_channels;
    std::string cx_anchor, cx_out;
    cx->add_option("--channel-set", cx_channels, "C values to tabulate");
    cx->add_option("--anchor", cx_anchor);
    cx->add_option("--out", cx_out);

    // sweep
    auto* sw = app.add_subcommand("sweep", "train/evaluate the mode x C x lambda grid");
    ConfigFlags sw_cf;
    sw_cf.attach(sw);
    std::string sw_ckpts = "runs/checkpoints", sw_data = "data", sw_out = "runs/sweep";
    std::vector<int> sw_channels;
    std::vector<double> sw_lambdas;
    bool sw_train = false;
    int sw_ipe = 2, sw_frames = 9, sw_gop = 32;
    sw->add_option("--checkpoints", sw_ckpts);
    sw->add_option("--data", sw_data);
    sw->add_option("--out", sw_out);
    sw->add_option("--channel-set", sw_channels);
    sw->add_option("--lambda-set", sw_lambdas);
    sw->add_flag("--train", sw_train, "train missing cells at a tiny budget");
    sw->add_option("--iters-per-epoch", sw_ipe);
    sw->add_option("--frames", sw_frames);
    sw->add_option("--gop", sw_gop);

    // entropy-check
    app.add_subcommand("entropy-check", "exact discrete-source entropy inequalities");

    // visualize
    auto* vis = app.add_subcommand("visualize", "dump per-frame signals as PNGs");
    std::string vis_ckpt, vis_input, vis_out = "viz";
    int vis_frames = 5, vis_gop = 32;
    vis->add_option("--checkpoint", vis_ckpt)->required();
    vis->add_option("--input", vis_input)->required();
    vis->add_option("--frames", vis_frames);
    vis->add_option("--gop", vis_gop);
    vis->add_option("--out", vis_out);

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    std::string stage = app.get_subcommands().empty() ? "cli" : app.get_subcommands()[0]->get_name();
    try {
        if (prep->parsed())
            return cmd_prepare_data(prep_out, prep_frames, prep_size, std::uint64_t(prep_seed));
        if (train->parsed())
            return cmd_train(train_cf, train_out, train_init, train_ipe, train_patch, train_batch,
                             train_warmup, train_quiet);
        if (enc->parsed()) return cmd_encode(enc_ckpt, enc_input, enc_frames, enc_gop, enc_out, enc_recon);
        if (dec->parsed()) return cmd_decode(dec_ckpt, dec_bs, dec_w, dec_h, dec_out);
        if (ev->parsed()) return cmd_eval(ev_ckpt, ev_input, ev_frames, ev_gop, ev_label, ev_csv);
        if (bd->parsed()) return cmd_bdrate(bd_csv, bd_anchor, bd_json);
        if (cx->parsed()) return cmd_complexity(cx_cf, cx_channels, cx_anchor, cx_out);
        if (sw->parsed())
            return cmd_sweep(sw_cf, sw_ckpts, sw_data, sw_out, sw_channels, sw_lambdas, sw_train,
                             sw_ipe, sw_frames, sw_gop);
        if (app.get_subcommand("entropy-check")->parsed()) return cmd_entropy_check();
        if (vis->parsed()) return cmd_visualize(vis_ckpt, vis_input, vis_frames, vis_gop, vis_out);
    } catch (const std::exception& e) {
        std::cerr << "[" << stage << "] error: " << e.what() << "\n";
        return 1;
    }
    std::cerr << "unknown command\n";
    return 2;
}

int run_command(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run_command(args);
}

}  // namespace cli
}  // namespace nrdc
