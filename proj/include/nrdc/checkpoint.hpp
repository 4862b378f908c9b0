#pragma once

#include <optional>
#include <string>

#include "nrdc/config.hpp"
#include "nrdc/nn.hpp"

namespace nrdc {
namespace checkpoint {

struct Meta {
    CodecConfig config;
    int schedule_step = 0;  // last completed training step (0 = untrained)
};

// Binary snapshot of every registry tensor (+ optional Adam moments).
void save(const std::string& path, const nn::ParamRegistry& reg, const Meta& meta,
          const nn::Adam* opt = nullptr);

// Loads matching tensors into `reg`. With allow_missing, registry params
// absent from the file keep their current values (used when a CR/MCR model
// inherits a checkpoint from the previous coding mode); tensors in the file
// that the registry does not know are always an error.
Meta load(const std::string& path, nn::ParamRegistry& reg, bool allow_missing,
          nn::Adam* opt = nullptr);

Meta peek(const std::string& path);  // header only

}  // namespace checkpoint
}  // namespace nrdc
