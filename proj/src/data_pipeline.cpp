#include "nrdc/data_pipeline.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "json.hpp"

namespace fs = std::filesystem;

namespace nrdc {
namespace data {

namespace {

inline double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }
inline double snap8(double v) { return std::round(clamp01(v) * 255.0) / 255.0; }

// BT.709 limited-range matrix (Y in [16,235], chroma in [16,240]).
constexpr double kKr = 0.2126, kKb = 0.0722;
constexpr double kKg = 1.0 - kKr - kKb;
constexpr double kCbScale = 1.8556;  // 2*(1-Kb)
constexpr double kCrScale = 1.5748;  // 2*(1-Kr)

}  // namespace

SequenceDescriptor read_descriptor(const std::string& yuv_path) {
    std::ifstream in(yuv_path + ".json");
    if (!in) throw IoError("missing sidecar descriptor: " + yuv_path + ".json");
    nlohmann::json j;
    in >> j;
    SequenceDescriptor d;
    d.path = yuv_path;
    d.pixel_format = PixelFormat::yuv420p8;
    d.width = j.at("width").get<int>();
    d.height = j.at("height").get<int>();
    d.frame_count = j.at("frame_count").get<int>();
    d.fps = j.value("fps", 30.0);
    return d;
}

void write_descriptor(const SequenceDescriptor& desc) {
    nlohmann::json j{{"width", desc.width},
                     {"height", desc.height},
                     {"frame_count", desc.frame_count},
                     {"fps", desc.fps}};
    std::ofstream out(desc.path + ".json");
    out << j.dump(2) << "\n";
}

Frame yuv420_to_rgb444(const Plane8& y, const Plane8& u, const Plane8& v) {
    int h = y.height, w = y.width;
    if (u.height != h / 2 || u.width != w / 2 || v.height != h / 2 || v.width != w / 2)
        throw FormatError("yuv420_to_rgb444: chroma planes must be half resolution");
    auto chroma_at = [&](const Plane8& p, double cy, double cx) {
        // bilinear with clamp; chroma sample (i,j) sits at luma (2i+0.5, 2j+0.5)
        cy = std::clamp(cy, 0.0, static_cast<double>(p.height - 1));
        cx = std::clamp(cx, 0.0, static_cast<double>(p.width - 1));
        int y0 = static_cast<int>(cy), x0 = static_cast<int>(cx);
        int y1 = std::min(y0 + 1, p.height - 1), x1 = std::min(x0 + 1, p.width - 1);
        double fy = cy - y0, fx = cx - x0;
        auto s = [&](int yy, int xx) { return static_cast<double>(p.samples[yy * p.width + xx]); };
        return (1 - fy) * ((1 - fx) * s(y0, x0) + fx * s(y0, x1)) +
               fy * ((1 - fx) * s(y1, x0) + fx * s(y1, x1));
    };
    Frame f;
    f.color_space = ColorSpace::RGB444;
    f.pixels = Tensor({3, h, w});
    for (int yy = 0; yy < h; ++yy)
        for (int xx = 0; xx < w; ++xx) {
            double Y = y.samples[yy * w + xx];
            double cy = (yy - 0.5) / 2.0, cx = (xx - 0.5) / 2.0;
            double Cb = chroma_at(u, cy, cx);
            double Cr = chroma_at(v, cy, cx);
            double yn = (Y - 16.0) / 219.0;
            double pb = (Cb - 128.0) / 224.0;
            double pr = (Cr - 128.0) / 224.0;
            double r = yn + kCrScale * pr;
            double g = yn - (kKb * kCbScale / kKg) * pb - (kKr * kCrScale / kKg) * pr;
            double b = yn + kCbScale * pb;
            f.pixels.at(0, yy, xx) = clamp01(r);
            f.pixels.at(1, yy, xx) = clamp01(g);
            f.pixels.at(2, yy, xx) = clamp01(b);
        }
    return f;
}

void rgb444_to_yuv420(const Frame& f, Plane8& y, Plane8& u, Plane8& v) {
    int h = f.height(), w = f.width();
    if (h % 2 || w % 2) throw FormatError("rgb444_to_yuv420: odd dimensions");
    y = {h, w, std::vector<std::uint8_t>(static_cast<std::size_t>(h) * w)};
    u = {h / 2, w / 2, std::vector<std::uint8_t>(static_cast<std::size_t>(h / 2) * (w / 2))};
    v = u;
    std::vector<double> pb(static_cast<std::size_t>(h) * w), pr(pb.size());
    for (int yy = 0; yy < h; ++yy)
        for (int xx = 0; xx < w; ++xx) {
            double r = f.pixels.at(0, yy, xx), g = f.pixels.at(1, yy, xx), b = f.pixels.at(2, yy, xx);
            double yn = kKr * r + kKg * g + kKb * b;
            y.samples[yy * w + xx] =
                static_cast<std::uint8_t>(std::clamp(std::round(16.0 + 219.0 * yn), 0.0, 255.0));
            pb[yy * w + xx] = (b - yn) / kCbScale;
            pr[yy * w + xx] = (r - yn) / kCrScale;
        }
    for (int cy = 0; cy < h / 2; ++cy)
        for (int cx = 0; cx < w / 2; ++cx) {
            double sb = 0, sr = 0;
            for (int dy = 0; dy < 2; ++dy)
                for (int dx = 0; dx < 2; ++dx) {
                    sb += pb[(2 * cy + dy) * w + 2 * cx + dx];
                    sr += pr[(2 * cy + dy) * w + 2 * cx + dx];
                }
            u.samples[cy * (w / 2) + cx] =
                static_cast<std::uint8_t>(std::clamp(std::round(128.0 + 224.0 * sb / 4.0), 0.0, 255.0));
            v.samples[cy * (w / 2) + cx] =
                static_cast<std::uint8_t>(std::clamp(std::round(128.0 + 224.0 * sr / 4.0), 0.0, 255.0));
        }
}

namespace {

FrameSequence load_yuv(const SequenceDescriptor& desc, int max_frames) {
    if (desc.width % 2 || desc.height % 2)
        throw FormatError("yuv420p8 requires even dimensions, got " + std::to_string(desc.width) + "x" +
                          std::to_string(desc.height));
    std::ifstream in(desc.path, std::ios::binary);
    if (!in) throw IoError("cannot open " + desc.path);
    in.seekg(0, std::ios::end);
    std::uint64_t size = static_cast<std::uint64_t>(in.tellg());
    std::uint64_t frame_bytes =
        static_cast<std::uint64_t>(desc.width) * desc.height * 3 / 2;
    int n = std::min(max_frames, desc.frame_count);
    if (size < static_cast<std::uint64_t>(n) * frame_bytes)
        throw IoError("truncated yuv file " + desc.path + ": need byte offset " +
                      std::to_string(static_cast<std::uint64_t>(n) * frame_bytes) + ", file has " +
                      std::to_string(size));
    in.seekg(0);
    FrameSequence seq;
    seq.source_id = fs::path(desc.path).stem().string();
    seq.fps = desc.fps;
    int w = desc.width, h = desc.height;
    Plane8 y{h, w, std::vector<std::uint8_t>(static_cast<std::size_t>(h) * w)};
    Plane8 u{h / 2, w / 2, std::vector<std::uint8_t>(static_cast<std::size_t>(h / 2) * (w / 2))};
    Plane8 v = u;
    for (int i = 0; i < n; ++i) {
        in.read(reinterpret_cast<char*>(y.samples.data()), y.samples.size());
        in.read(reinterpret_cast<char*>(u.samples.data()), u.samples.size());
        in.read(reinterpret_cast<char*>(v.samples.data()), v.samples.size());
        if (!in)
            throw IoError("read failure in " + desc.path + " at byte offset " +
                          std::to_string(static_cast<std::uint64_t>(i) * frame_bytes));
        seq.frames.push_back(yuv420_to_rgb444(y, u, v));
    }
    return seq;
}

FrameSequence load_png_dir(const SequenceDescriptor& desc, int max_frames) {
    std::vector<std::string> files;
    for (const auto& e : fs::directory_iterator(desc.path))
        if (e.path().extension() == ".png") files.push_back(e.path().string());
    if (files.empty()) throw IoError("no .png files in " + desc.path);
    std::sort(files.begin(), files.end());
    FrameSequence seq;
    seq.source_id = fs::path(desc.path).filename().string();
    seq.fps = desc.fps;
    int limit = desc.frame_count > 0 ? std::min<int>(desc.frame_count, files.size())
                                     : static_cast<int>(files.size());
    limit = std::min(limit, max_frames);
    for (int i = 0; i < limit; ++i) {
        seq.frames.push_back(read_png(files[i]));
        if (i > 0 && (seq.frames[i].height() != seq.frames[0].height() ||
                      seq.frames[i].width() != seq.frames[0].width()))
            throw FormatError("frame size mismatch in " + desc.path);
    }
    return seq;
}

}  // namespace

FrameSequence load_sequence(const SequenceDescriptor& desc, int max_frames) {
    if (max_frames < 1) throw ArgumentError("load_sequence: max_frames must be >= 1");
    if (desc.pixel_format == PixelFormat::yuv420p8) return load_yuv(desc, max_frames);
    return load_png_dir(desc, max_frames);
}

FrameSequence crop_random_patch(const FrameSequence& seq, int size, std::uint64_t seed) {
    int h = seq.height(), w = seq.width();
    if (size > std::min(h, w))
        throw ArgumentError("crop_random_patch: size " + std::to_string(size) + " exceeds " +
                            std::to_string(std::min(h, w)));
    std::mt19937_64 rng(seed);
    int y0 = h == size ? 0 : static_cast<int>(rng() % static_cast<std::uint64_t>(h - size + 1));
    int x0 = w == size ? 0 : static_cast<int>(rng() % static_cast<std::uint64_t>(w - size + 1));
    FrameSequence out;
    out.source_id = seq.source_id + "_crop";
    out.fps = seq.fps;
    for (const auto& f : seq.frames) {
        Frame g;
        g.color_space = f.color_space;
        g.pixels = Tensor({3, size, size});
        for (int c = 0; c < 3; ++c)
            for (int y = 0; y < size; ++y)
                for (int x = 0; x < size; ++x) g.pixels.at(c, y, x) = f.pixels.at(c, y0 + y, x0 + x);
        out.frames.push_back(std::move(g));
    }
    return out;
}

GopSchedule make_gop_schedule(int num_frames, int gop_size) {
    if (num_frames < 1 || gop_size < 1) throw ArgumentError("make_gop_schedule: positive args required");
    GopSchedule s;
    s.roles.resize(num_frames);
    for (int i = 0; i < num_frames; ++i)
        s.roles[i] = (i % gop_size == 0) ? FrameRole::INTRA : FrameRole::INTER;
    return s;
}

FrameSequence synth_sequence(const SynthSpec& spec) {
    if (spec.height < 64 || spec.width < 64) throw ArgumentError("synth_sequence: H, W must be >= 64");
    std::mt19937_64 rng(spec.seed);
    // Periodic texture parameters (integer frequencies keep the pattern
    // periodic in both dimensions, so integer motion is a circular shift).
    struct Wave {
        int fx, fy;
        double amp, phase;
    };
    std::vector<std::array<Wave, 4>> waves(3);
    std::uniform_real_distribution<double> uphase(0.0, 2.0 * M_PI);
    for (int c = 0; c < 3; ++c)
        for (int k = 0; k < 4; ++k) {
            waves[c][k] = {1 + static_cast<int>(rng() % 5), 1 + static_cast<int>(rng() % 5),
                           0.08 + 0.05 * static_cast<double>(rng() % 100) / 100.0, uphase(rng)};
        }
    int checker = 4 + static_cast<int>(rng() % 5) * 2;
    std::normal_distribution<double> noise(0.0, spec.noise_sigma);
    FrameSequence seq;
    seq.source_id = "synth_" + std::to_string(spec.seed);
    auto texture = [&](int c, double X, double Y) {
        if (spec.pattern == SynthPattern::CHECKER) {
            double xx = std::fmod(std::fmod(X, spec.width) + spec.width, spec.width);
            double yy = std::fmod(std::fmod(Y, spec.height) + spec.height, spec.height);
            int b = (static_cast<int>(xx) / checker + static_cast<int>(yy) / checker) % 2;
            return b ? 0.25 + 0.15 * c : 0.75 - 0.1 * c;
        }
        double v = 0.5;
        for (const auto& wv : waves[c])
            v += wv.amp * std::sin(2.0 * M_PI * (wv.fx * X / spec.width + wv.fy * Y / spec.height) + wv.phase);
        return v;
    };
    for (int k = 0; k < spec.frames; ++k) {
        Frame f;
        f.color_space = ColorSpace::RGB444;
        f.pixels = Tensor({3, spec.height, spec.width});
        for (int c = 0; c < 3; ++c)
            for (int y = 0; y < spec.height; ++y)
                for (int x = 0; x < spec.width; ++x) {
                    double v = texture(c, x - k * spec.dx, y - k * spec.dy);
                    if (spec.noise_sigma > 0) v += noise(rng);
                    f.pixels.at(c, y, x) = snap8(v);
                }
        seq.frames.push_back(std::move(f));
    }
    return seq;
}

Tensor pad_tensor_to_multiple(const Tensor& t, int mult) {
    int c = t.shape[0], h = t.shape[1], w = t.shape[2];
    int hp = (h + mult - 1) / mult * mult;
    int wp = (w + mult - 1) / mult * mult;
    if (hp == h && wp == w) return t;
    Tensor out({c, hp, wp});
    auto reflect = [](int i, int n) {
        // reflect without repeating the edge sample
        if (i < n) return i;
        int j = 2 * n - 2 - i;
        return j < 0 ? 0 : j;
    };
    for (int ci = 0; ci < c; ++ci)
        for (int y = 0; y < hp; ++y)
            for (int x = 0; x < wp; ++x) out.at(ci, y, x) = t.at(ci, reflect(y, h), reflect(x, w));
    return out;
}

Frame pad_to_multiple(const Frame& f, int mult) {
    Frame out;
    out.color_space = f.color_space;
    out.pixels = pad_tensor_to_multiple(f.pixels, mult);
    return out;
}

Frame crop_to(const Frame& f, int height, int width) {
    Frame out;
    out.color_space = f.color_space;
    out.pixels = Tensor({3, height, width});
    for (int c = 0; c < 3; ++c)
        for (int y = 0; y < height; ++y)
            for (int x = 0; x < width; ++x) out.pixels.at(c, y, x) = f.pixels.at(c, y, x);
    return out;
}

Frame read_png(const std::string& path) {
    FILE* fp = std::fopen(path.c_str(), "rb");
    if (!fp) throw IoError("cannot open " + path);
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        std::fclose(fp);
        throw FormatError("png decode failure: " + path);
    }
    png_init_io(png, fp);
    png_read_info(png, info);
    png_set_expand(png);
    png_set_strip_16(png);
    png_set_strip_alpha(png);
    png_set_gray_to_rgb(png);
    png_read_update_info(png, info);
    int w = png_get_image_width(png, info), h = png_get_image_height(png, info);
    std::vector<std::uint8_t> row(static_cast<std::size_t>(w) * 3);
    Frame f;
    f.color_space = ColorSpace::RGB444;
    f.pixels = Tensor({3, h, w});
    for (int y = 0; y < h; ++y) {
        png_read_row(png, row.data(), nullptr);
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < 3; ++c) f.pixels.at(c, y, x) = row[x * 3 + c] / 255.0;
    }
    png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    return f;
}

void write_png(const std::string& path, const Frame& f) {
    FILE* fp = std::fopen(path.c_str(), "wb");
    if (!fp) throw IoError("cannot open for write: " + path);
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        std::fclose(fp);
        throw IoError("png encode failure: " + path);
    }
    int h = f.height(), w = f.width();
    png_init_io(png, fp);
    png_set_IHDR(png, info, w, h, 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    std::vector<std::uint8_t> row(static_cast<std::size_t>(w) * 3);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < 3; ++c)
                row[x * 3 + c] = static_cast<std::uint8_t>(
                    std::clamp(std::round(f.pixels.at(c, y, x) * 255.0), 0.0, 255.0));
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
}

void write_png_gray(const std::string& path, const Tensor& plane) {
    int h = plane.shape.size() == 3 ? plane.shape[1] : plane.shape[0];
    int w = plane.shape.size() == 3 ? plane.shape[2] : plane.shape[1];
    FILE* fp = std::fopen(path.c_str(), "wb");
    if (!fp) throw IoError("cannot open for write: " + path);
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        std::fclose(fp);
        throw IoError("png encode failure: " + path);
    }
    png_init_io(png, fp);
    png_set_IHDR(png, info, w, h, 8, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    std::vector<std::uint8_t> row(w);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x)
            row[x] = static_cast<std::uint8_t>(std::clamp(std::round(plane.d[y * w + x] * 255.0), 0.0, 255.0));
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
}

void write_yuv_sequence(const FrameSequence& seq, const std::string& yuv_path) {
    std::ofstream out(yuv_path, std::ios::binary);
    if (!out) throw IoError("cannot open for write: " + yuv_path);
    Plane8 y, u, v;
    for (const auto& f : seq.frames) {
        rgb444_to_yuv420(f, y, u, v);
        out.write(reinterpret_cast<const char*>(y.samples.data()), y.samples.size());
        out.write(reinterpret_cast<const char*>(u.samples.data()), u.samples.size());
        out.write(reinterpret_cast<const char*>(v.samples.data()), v.samples.size());
    }
    SequenceDescriptor d;
    d.path = yuv_path;
    d.width = seq.width();
    d.height = seq.height();
    d.frame_count = static_cast<int>(seq.frames.size());
    d.fps = seq.fps;
    write_descriptor(d);
}

}  // namespace data
}  // namespace nrdc
