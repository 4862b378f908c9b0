#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nrdc/errors.hpp"

namespace nrdc {

enum class CodingMode : std::uint8_t { CC = 0, CR = 1, MCR = 2 };

std::string mode_name(CodingMode m);
CodingMode mode_from_name(const std::string& s);

// Frame type byte in the container.
enum class FrameType : std::uint8_t { intra_passthrough = 0, intra_learned = 1, inter = 2 };

struct BitstreamHeader {
    // magic "NRDC"
    std::uint8_t version = 1;
    CodingMode mode = CodingMode::CC;
    std::uint8_t condition_channels = 0;
    std::uint64_t config_digest = 0;  // truncated hash of model/config identity

    static constexpr std::size_t kByteSize = 4 + 1 + 1 + 1 + 8;
};

struct FrameRecord {
    FrameType frame_type = FrameType::inter;
    std::vector<std::uint8_t> motion_payload;
    std::vector<std::uint8_t> inter_payload;

    // frame_type u8 + motion_len u32be + inter_len u32be + payloads
    std::size_t byte_size() const { return 9 + motion_payload.size() + inter_payload.size(); }
};

struct Bitstream {
    BitstreamHeader header;
    std::vector<FrameRecord> frames;

    std::size_t total_bytes() const;
    std::vector<std::uint8_t> serialize() const;
    static Bitstream deserialize(const std::vector<std::uint8_t>& bytes);

    void save(const std::string& path) const;
    static Bitstream load(const std::string& path);
};

}  // namespace nrdc
