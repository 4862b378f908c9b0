#include "nrdc/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "nrdc/errors.hpp"

namespace nrdc {
namespace checkpoint {

namespace {

constexpr char kMagic[4] = {'N', 'R', 'C', 'K'};
constexpr std::uint8_t kVersion = 1;

void put_u32(std::ostream& os, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    if (!is) throw IoError("checkpoint truncated");
    return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) | (std::uint32_t(b[2]) << 8) |
           std::uint32_t(b[3]);
}

void put_string(std::ostream& os, const std::string& s) {
    put_u32(os, static_cast<std::uint32_t>(s.size()));
    os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::istream& is) {
    std::uint32_t n = get_u32(is);
    std::string s(n, '\0');
    is.read(s.data(), n);
    if (!is) throw IoError("checkpoint truncated");
    return s;
}

void put_doubles(std::ostream& os, const std::vector<double>& d) {
    put_u32(os, static_cast<std::uint32_t>(d.size()));
    os.write(reinterpret_cast<const char*>(d.data()), static_cast<std::streamsize>(d.size() * 8));
}

std::vector<double> get_doubles(std::istream& is) {
    std::uint32_t n = get_u32(is);
    std::vector<double> d(n);
    is.read(reinterpret_cast<char*>(d.data()), static_cast<std::streamsize>(n) * 8);
    if (!is) throw IoError("checkpoint truncated");
    return d;
}

Meta read_header(std::istream& is) {
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0) throw FormatError("not a checkpoint file");
    char ver;
    is.read(&ver, 1);
    if (!is || static_cast<std::uint8_t>(ver) != kVersion)
        throw FormatError("unsupported checkpoint version");
    Meta meta;
    meta.config = CodecConfig::from_json_string(get_string(is));
    meta.schedule_step = static_cast<int>(get_u32(is));
    return meta;
}

}  // namespace

void save(const std::string& path, const nn::ParamRegistry& reg, const Meta& meta, const nn::Adam* opt) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot write checkpoint: " + path);
    os.write(kMagic, 4);
    char ver = static_cast<char>(kVersion);
    os.write(&ver, 1);
    put_string(os, meta.config.to_json_string());
    put_u32(os, static_cast<std::uint32_t>(meta.schedule_step));

    put_u32(os, static_cast<std::uint32_t>(reg.params.size()));
    for (const auto& [name, p] : reg.params) {
        put_string(os, name);
        put_u32(os, static_cast<std::uint32_t>(p->val.shape.size()));
        for (int d : p->val.shape) put_u32(os, static_cast<std::uint32_t>(d));
        put_doubles(os, p->val.d);
    }

    const std::uint8_t has_opt = opt ? 1 : 0;
    os.write(reinterpret_cast<const char*>(&has_opt), 1);
    if (opt) {
        put_u32(os, static_cast<std::uint32_t>(opt->t));
        put_u32(os, static_cast<std::uint32_t>(opt->state.size()));
        for (const auto& [name, mv] : opt->state) {
            put_string(os, name);
            put_doubles(os, mv.first.d);
            put_doubles(os, mv.second.d);
        }
    }
    if (!os) throw IoError("failed while writing checkpoint: " + path);
}

Meta load(const std::string& path, nn::ParamRegistry& reg, bool allow_missing, nn::Adam* opt) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open checkpoint: " + path);
    Meta meta = read_header(is);

    std::uint32_t count = get_u32(is);
    std::size_t matched = 0;
    std::map<std::string, bool> seen;
    for (std::uint32_t i = 0; i < count; ++i) {
        std::string name = get_string(is);
        std::uint32_t nd = get_u32(is);
        std::vector<int> shape(nd);
        for (auto& d : shape) d = static_cast<int>(get_u32(is));
        std::vector<double> data = get_doubles(is);
        auto it = reg.params.find(name);
        if (it == reg.params.end())
            throw FormatError("checkpoint tensor '" + name + "' has no matching model parameter");
        if (it->second->val.shape != shape)
            throw FormatError("checkpoint tensor '" + name + "' has mismatched shape");
        if (it->second->val.d.size() != data.size())
            throw FormatError("checkpoint tensor '" + name + "' has mismatched size");
        it->second->val.d = std::move(data);
        seen[name] = true;
        ++matched;
    }
    if (!allow_missing && matched != reg.params.size()) {
        for (const auto& [name, p] : reg.params)
            if (!seen.count(name)) throw FormatError("checkpoint is missing parameter '" + name + "'");
    }

    char has_opt = 0;
    is.read(&has_opt, 1);
    if (is && has_opt == 1 && opt) {
        opt->t = static_cast<std::int64_t>(get_u32(is));
        std::uint32_t n = get_u32(is);
        for (std::uint32_t i = 0; i < n; ++i) {
            std::string name = get_string(is);
            std::vector<double> m = get_doubles(is);
            std::vector<double> v = get_doubles(is);
            auto it = reg.params.find(name);
            if (it == reg.params.end()) continue;
            Tensor mt = it->second->val, vt = it->second->val;
            mt.d = std::move(m);
            vt.d = std::move(v);
            opt->state[name] = {std::move(mt), std::move(vt)};
        }
    }
    return meta;
}

Meta peek(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open checkpoint: " + path);
    return read_header(is);
}

}  // namespace checkpoint
}  // namespace nrdc
