#include "nrdc/bitstream.hpp"

#include <fstream>

namespace nrdc {

std::string mode_name(CodingMode m) {
    switch (m) {
        case CodingMode::CC: return "cc";
        case CodingMode::CR: return "cr";
        case CodingMode::MCR: return "mcr";
    }
    return "?";
}

CodingMode mode_from_name(const std::string& s) {
    if (s == "cc") return CodingMode::CC;
    if (s == "cr") return CodingMode::CR;
    if (s == "mcr") return CodingMode::MCR;
    throw ArgumentError("unknown coding mode: " + s);
}

namespace {

void put_u32_be(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

struct Reader {
    const std::vector<std::uint8_t>& b;
    std::size_t pos = 0;
    std::uint8_t u8() {
        if (pos >= b.size()) throw DecodeError("bitstream truncated at byte " + std::to_string(pos));
        return b[pos++];
    }
    std::uint32_t u32_be() {
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v = (v << 8) | u8();
        return v;
    }
    std::vector<std::uint8_t> bytes(std::size_t n) {
        if (pos + n > b.size()) throw DecodeError("bitstream truncated at byte " + std::to_string(pos));
        std::vector<std::uint8_t> out(b.begin() + pos, b.begin() + pos + n);
        pos += n;
        return out;
    }
};

}  // namespace

std::size_t Bitstream::total_bytes() const {
    std::size_t n = BitstreamHeader::kByteSize;
    for (const auto& f : frames) n += f.byte_size();
    return n;
}

std::vector<std::uint8_t> Bitstream::serialize() const {
    std::vector<std::uint8_t> out;
    out.reserve(total_bytes());
    out.insert(out.end(), {'N', 'R', 'D', 'C'});
    out.push_back(header.version);
    out.push_back(static_cast<std::uint8_t>(header.mode));
    out.push_back(header.condition_channels);
    for (int i = 7; i >= 0; --i) out.push_back(static_cast<std::uint8_t>(header.config_digest >> (8 * i)));
    for (const auto& f : frames) {
        out.push_back(static_cast<std::uint8_t>(f.frame_type));
        put_u32_be(out, static_cast<std::uint32_t>(f.motion_payload.size()));
        put_u32_be(out, static_cast<std::uint32_t>(f.inter_payload.size()));
        out.insert(out.end(), f.motion_payload.begin(), f.motion_payload.end());
        out.insert(out.end(), f.inter_payload.begin(), f.inter_payload.end());
    }
    return out;
}

Bitstream Bitstream::deserialize(const std::vector<std::uint8_t>& bytes) {
    Reader r{bytes};
    if (r.bytes(4) != std::vector<std::uint8_t>{'N', 'R', 'D', 'C'})
        throw DecodeError("bad magic, not an NRDC bitstream");
    Bitstream bs;
    bs.header.version = r.u8();
    if (bs.header.version != 1) throw DecodeError("unsupported bitstream version");
    std::uint8_t m = r.u8();
    if (m > 2) throw DecodeError("invalid mode byte");
    bs.header.mode = static_cast<CodingMode>(m);
    bs.header.condition_channels = r.u8();
    bs.header.config_digest = 0;
    for (int i = 0; i < 8; ++i) bs.header.config_digest = (bs.header.config_digest << 8) | r.u8();
    while (r.pos < bytes.size()) {
        FrameRecord f;
        std::uint8_t ft = r.u8();
        if (ft > 2) throw DecodeError("invalid frame_type byte");
        f.frame_type = static_cast<FrameType>(ft);
        std::uint32_t mlen = r.u32_be();
        std::uint32_t ilen = r.u32_be();
        f.motion_payload = r.bytes(mlen);
        f.inter_payload = r.bytes(ilen);
        bs.frames.push_back(std::move(f));
    }
    return bs;
}

void Bitstream::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for write: " + path);
    auto bytes = serialize();
    out.write(reinterpret_cast<const char*>(bytes.data()), bytes.size());
}

Bitstream Bitstream::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return deserialize(bytes);
}

}  // namespace nrdc
