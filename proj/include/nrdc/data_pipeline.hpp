#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nrdc/errors.hpp"
#include "nrdc/tensor.hpp"

namespace nrdc {

enum class ColorSpace { RGB444, YUV420 };

struct Frame {
    Tensor pixels;  // 3 x H x W in [0,1]
    ColorSpace color_space = ColorSpace::RGB444;

    int height() const { return pixels.shape[1]; }
    int width() const { return pixels.shape[2]; }
};

struct FrameSequence {
    std::vector<Frame> frames;
    std::string source_id;
    double fps = 30.0;

    int height() const { return frames.at(0).height(); }
    int width() const { return frames.at(0).width(); }
};

enum class FrameRole : std::uint8_t { INTRA, INTER };

struct GopSchedule {
    std::vector<FrameRole> roles;
};

enum class PixelFormat { yuv420p8, png_dir };

struct SequenceDescriptor {
    std::string path;
    PixelFormat pixel_format = PixelFormat::yuv420p8;
    int width = 0, height = 0, frame_count = 0;
    double fps = 30.0;
};

// Plane of 8-bit samples, row-major.
struct Plane8 {
    int height = 0, width = 0;
    std::vector<std::uint8_t> samples;
};

namespace data {

// Sidecar descriptor (JSON: width, height, frame_count, fps) next to a .yuv
// file; `path` points at the .yuv, sidecar is path + ".json".
SequenceDescriptor read_descriptor(const std::string& yuv_path);
void write_descriptor(const SequenceDescriptor& desc);

FrameSequence load_sequence(const SequenceDescriptor& desc, int max_frames);

// BT.709 limited range, bilinear chroma upsampling, output clamped to [0,1].
Frame yuv420_to_rgb444(const Plane8& y, const Plane8& u, const Plane8& v);
// Forward conversion (BT.709 limited range, box chroma subsampling).
void rgb444_to_yuv420(const Frame& f, Plane8& y, Plane8& u, Plane8& v);

FrameSequence crop_random_patch(const FrameSequence& seq, int size, std::uint64_t seed);

GopSchedule make_gop_schedule(int num_frames, int gop_size);

enum class SynthPattern { SINES, CHECKER };

struct SynthSpec {
    SynthPattern pattern = SynthPattern::SINES;
    double dx = 0.0, dy = 0.0;  // pixels/frame
    double noise_sigma = 0.0;
    int frames = 2, height = 64, width = 64;
    std::uint64_t seed = 0;
};

// Deterministic periodic texture translated (dx,dy) per frame, optional
// additive noise, clamped and snapped to the 8-bit grid.
FrameSequence synth_sequence(const SynthSpec& spec);

// Reflect-pad to the next multiple of `mult` (codec constraint); crop undoes it.
Frame pad_to_multiple(const Frame& f, int mult);
Frame crop_to(const Frame& f, int height, int width);
Tensor pad_tensor_to_multiple(const Tensor& t, int mult);

// 8-bit RGB PNG helpers for png_dir sequences and debug dumps.
Frame read_png(const std::string& path);
void write_png(const std::string& path, const Frame& f);
void write_png_gray(const std::string& path, const Tensor& plane);  // 1xHxW or HxW in [0,1]

void write_yuv_sequence(const FrameSequence& seq, const std::string& yuv_path);

}  // namespace data
}  // namespace nrdc
