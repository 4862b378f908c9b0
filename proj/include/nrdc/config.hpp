#pragma once

#include <cstdint>
#include <string>

#include "nrdc/bitstream.hpp"
#include "nrdc/errors.hpp"

namespace nrdc {

// Architecture + rate point identity of one trained model. Everything that
// affects decodability feeds the config digest carried in bitstream headers
// and checkpoints.
struct CodecConfig {
    CodingMode mode = CodingMode::CC;
    int cond_channels = 16;  // C, channel size of x_c / x_dot_c

    // scaled-down backbone knobs
    int base_width = 8;        // inter codec conv width
    int latent_channels = 8;   // y channels at /16
    int z_channels = 4;        // hyper latent channels at /64
    int dec_features = 8;      // decoded-signal channels fed to the frame generator
    int flow_width = 6;        // motion estimation conv width
    int motion_width = 8;      // motion codec conv width
    int motion_latent_channels = 4;
    int mask_width = 8;
    bool multi_scale_condition = true;  // concat condition features again at /4 in G_enc
    bool use_temporal_prior = true;

    double lambda = 512.0;
    std::uint64_t seed = 1;

    void validate() const;
    std::string canonical_string() const;
    std::uint64_t digest() const;  // FNV-1a 64 over canonical_string()

    std::string to_json_string() const;
    static CodecConfig from_json_string(const std::string& text);
};

}  // namespace nrdc
