#include "nrdc/config.hpp"

#include <sstream>

#include <nlohmann/json.hpp>

namespace nrdc {

void CodecConfig::validate() const {
    switch (cond_channels) {
        case 4:
        case 8:
        case 16:
        case 32:
        case 64: break;
        default:
            throw ConfigError("unsupported condition channel size C=" + std::to_string(cond_channels) +
                              " (supported: 4, 8, 16, 32, 64)");
    }
    if (base_width < 2 || latent_channels < 1 || z_channels < 1 || dec_features < 1 ||
        motion_latent_channels < 1 || mask_width < 1 || flow_width < 2 || motion_width < 2)
        throw ConfigError("invalid codec width configuration");
    if (lambda <= 0) throw ConfigError("lambda must be positive");
}

std::string CodecConfig::canonical_string() const {
    std::ostringstream s;
    s << "mode=" << mode_name(mode) << ";C=" << cond_channels << ";w=" << base_width
      << ";cy=" << latent_channels << ";cz=" << z_channels << ";ddec=" << dec_features
      << ";fw=" << flow_width << ";mw=" << motion_width << ";cm=" << motion_latent_channels
      << ";maskw=" << mask_width << ";ms=" << (multi_scale_condition ? 1 : 0)
      << ";tp=" << (use_temporal_prior ? 1 : 0) << ";lambda=" << lambda;
    return s.str();
}

std::uint64_t CodecConfig::digest() const {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : canonical_string()) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string CodecConfig::to_json_string() const {
    nlohmann::json j;
    j["mode"] = mode_name(mode);
    j["cond_channels"] = cond_channels;
    j["base_width"] = base_width;
    j["latent_channels"] = latent_channels;
    j["z_channels"] = z_channels;
    j["dec_features"] = dec_features;
    j["flow_width"] = flow_width;
    j["motion_width"] = motion_width;
    j["motion_latent_channels"] = motion_latent_channels;
    j["mask_width"] = mask_width;
    j["multi_scale_condition"] = multi_scale_condition;
    j["use_temporal_prior"] = use_temporal_prior;
    j["lambda"] = lambda;
    j["seed"] = seed;
    return j.dump(2);
}

CodecConfig CodecConfig::from_json_string(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    CodecConfig c;
    try {
        if (j.contains("mode")) c.mode = mode_from_name(j["mode"].get<std::string>());
        if (j.contains("cond_channels")) c.cond_channels = j["cond_channels"].get<int>();
        if (j.contains("base_width")) c.base_width = j["base_width"].get<int>();
        if (j.contains("latent_channels")) c.latent_channels = j["latent_channels"].get<int>();
        if (j.contains("z_channels")) c.z_channels = j["z_channels"].get<int>();
        if (j.contains("dec_features")) c.dec_features = j["dec_features"].get<int>();
        if (j.contains("flow_width")) c.flow_width = j["flow_width"].get<int>();
        if (j.contains("motion_width")) c.motion_width = j["motion_width"].get<int>();
        if (j.contains("motion_latent_channels"))
            c.motion_latent_channels = j["motion_latent_channels"].get<int>();
        if (j.contains("mask_width")) c.mask_width = j["mask_width"].get<int>();
        if (j.contains("multi_scale_condition"))
            c.multi_scale_condition = j["multi_scale_condition"].get<bool>();
        if (j.contains("use_temporal_prior")) c.use_temporal_prior = j["use_temporal_prior"].get<bool>();
        if (j.contains("lambda")) c.lambda = j["lambda"].get<double>();
        if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad config field type: ") + e.what());
    }
    c.validate();
    return c;
}

}  // namespace nrdc
