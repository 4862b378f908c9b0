#include "nrdc/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace nrdc {
namespace entropy {

std::vector<std::int32_t> quantize_symbols(const Tensor& y, const Tensor& mu) {
    std::vector<std::int32_t> out(y.numel());
    for (std::size_t i = 0; i < y.numel(); ++i)
        out[i] = static_cast<std::int32_t>(std::llround(y.d[i] - mu.d[i]));
    return out;
}

Tensor dequantize_symbols(const std::vector<std::int32_t>& symbols, const Tensor& mu) {
    Tensor out(mu.shape);
    for (std::size_t i = 0; i < out.numel(); ++i) out.d[i] = symbols[i] + mu.d[i];
    return out;
}

double estimate_rate(const Tensor& yhat, const Tensor& mu, const Tensor& sigma) {
    double bits = 0;
    for (std::size_t i = 0; i < yhat.numel(); ++i) {
        double p = ops::gaussian_symbol_prob(yhat.d[i] - mu.d[i], sigma.d[i]);
        bits += -std::log2(std::max(p, 1.0 / 65536.0));
    }
    return bits;
}

CdfTable build_gaussian_cdf(double sigma, int L) {
    int n = 2 * L + 1;
    std::vector<double> p(n);
    double total = 0;
    for (int s = -L; s <= L; ++s) {
        p[s + L] = std::max(ops::gaussian_symbol_prob(static_cast<double>(s), sigma), 1e-300);
        total += p[s + L];
    }
    // Largest-remainder allocation of (65536 - n) on top of 1 count each.
    const std::uint32_t budget = 65536 - static_cast<std::uint32_t>(n);
    std::vector<std::uint32_t> counts(n, 1);
    std::vector<std::pair<double, int>> rem(n);
    std::uint32_t assigned = 0;
    for (int i = 0; i < n; ++i) {
        double raw = p[i] / total * budget;
        std::uint32_t f = static_cast<std::uint32_t>(raw);
        counts[i] += f;
        assigned += f;
        rem[i] = {raw - f, i};
    }
    std::sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    for (std::uint32_t k = 0; k < budget - assigned; ++k) counts[rem[k].second] += 1;
    CdfTable t;
    t.L = L;
    t.cdf.resize(n + 1);
    t.cdf[0] = 0;
    for (int i = 0; i < n; ++i) t.cdf[i + 1] = t.cdf[i] + counts[i];
    return t;
}

int symbol_bound(const std::vector<std::int32_t>& symbols) {
    std::int64_t m = 0;
    for (auto s : symbols) m = std::max<std::int64_t>(m, std::abs(static_cast<std::int64_t>(s)));
    return static_cast<int>(m) + 2;
}

namespace {

constexpr std::uint32_t kTop = 1u << 24;
constexpr std::uint32_t kTotal = 1u << 16;

class RangeEncoder {
  public:
    void encode(std::uint32_t cum, std::uint32_t freq) {
        range_ /= kTotal;
        low_ += static_cast<std::uint64_t>(cum) * range_;
        range_ *= freq;
        while (range_ < kTop) {
            shift_low();
            range_ <<= 8;
        }
    }
    std::vector<std::uint8_t> finish() {
        for (int i = 0; i < 5; ++i) shift_low();
        return std::move(out_);
    }

  private:
    void shift_low() {
        if (static_cast<std::uint32_t>(low_) < 0xFF000000u || (low_ >> 32) != 0) {
            std::uint8_t carry = static_cast<std::uint8_t>(low_ >> 32);
            std::uint8_t b = cache_;
            do {
                out_.push_back(static_cast<std::uint8_t>(b + carry));
                b = 0xFF;
            } while (--cache_size_ != 0);
            cache_ = static_cast<std::uint8_t>(static_cast<std::uint32_t>(low_) >> 24);
        }
        ++cache_size_;
        low_ = static_cast<std::uint32_t>(low_) << 8;
    }

    std::uint64_t low_ = 0;
    std::uint32_t range_ = 0xFFFFFFFFu;
    std::uint8_t cache_ = 0;
    std::uint64_t cache_size_ = 1;
    std::vector<std::uint8_t> out_;
};

class RangeDecoder {
  public:
    explicit RangeDecoder(const std::vector<std::uint8_t>& payload) : payload_(payload) {
        for (int i = 0; i < 5; ++i) code_ = (code_ << 8) | next_byte();
    }
    std::uint32_t decode_target() {
        range_ /= kTotal;
        std::uint32_t t = static_cast<std::uint32_t>(code_ / range_);
        if (t >= kTotal) throw DecodeError("range decoder state violation");
        return t;
    }
    void consume(std::uint32_t cum, std::uint32_t freq) {
        code_ -= static_cast<std::uint64_t>(cum) * range_;
        range_ *= freq;
        while (range_ < kTop) {
            code_ = (code_ << 8) | next_byte();
            range_ <<= 8;
        }
    }

  private:
    std::uint8_t next_byte() {
        if (pos_ >= payload_.size()) throw DecodeError("range decoder exhausted payload");
        return payload_[pos_++];
    }
    const std::vector<std::uint8_t>& payload_;
    std::size_t pos_ = 0;
    std::uint64_t code_ = 0;
    std::uint32_t range_ = 0xFFFFFFFFu;
};

}  // namespace

std::vector<std::uint8_t> range_encode(const std::vector<std::int32_t>& symbols,
                                       const std::vector<const CdfTable*>& cdfs) {
    if (symbols.size() != cdfs.size()) throw CodingError("range_encode: symbol/table count mismatch");
    RangeEncoder enc;
    for (std::size_t i = 0; i < symbols.size(); ++i) {
        const CdfTable& t = *cdfs[i];
        if (symbols[i] < -t.L || symbols[i] > t.L)
            throw CodingError("range_encode: symbol " + std::to_string(symbols[i]) +
                              " outside table bound L=" + std::to_string(t.L));
        enc.encode(t.cum(symbols[i]), t.freq(symbols[i]));
    }
    return enc.finish();
}

std::vector<std::int32_t> range_decode(const std::vector<std::uint8_t>& payload,
                                       const std::vector<const CdfTable*>& cdfs) {
    RangeDecoder dec(payload);
    std::vector<std::int32_t> out(cdfs.size());
    for (std::size_t i = 0; i < cdfs.size(); ++i) {
        const CdfTable& t = *cdfs[i];
        std::uint32_t target = dec.decode_target();
        // binary search for symbol with cdf[s] <= target < cdf[s+1]
        auto it = std::upper_bound(t.cdf.begin(), t.cdf.end(), target);
        int idx = static_cast<int>(it - t.cdf.begin()) - 1;
        if (idx < 0 || idx >= t.num_symbols()) throw DecodeError("range_decode: target out of table");
        out[i] = idx - t.L;
        dec.consume(t.cdf[idx], t.cdf[idx + 1] - t.cdf[idx]);
    }
    return out;
}

std::vector<std::uint8_t> range_encode_uniform(const std::vector<std::int32_t>& symbols,
                                               const CdfTable& cdf) {
    std::vector<const CdfTable*> cdfs(symbols.size(), &cdf);
    return range_encode(symbols, cdfs);
}

std::vector<std::int32_t> range_decode_uniform(const std::vector<std::uint8_t>& payload,
                                               std::size_t count, const CdfTable& cdf) {
    std::vector<const CdfTable*> cdfs(count, &cdf);
    return range_decode(payload, cdfs);
}

std::vector<std::uint8_t> encode_latent(const Tensor& y, const Tensor& mu, const Tensor& sigma) {
    auto symbols = quantize_symbols(y, mu);
    int L = symbol_bound(symbols);
    if (L > 255) throw CodingError("encode_latent: symbol bound exceeds 1-byte field");
    std::vector<CdfTable> tables(symbols.size());
    std::vector<const CdfTable*> ptrs(symbols.size());
    for (std::size_t i = 0; i < symbols.size(); ++i) {
        tables[i] = build_gaussian_cdf(sigma.d[i], L);
        ptrs[i] = &tables[i];
    }
    auto body = range_encode(symbols, ptrs);
    std::vector<std::uint8_t> out;
    out.reserve(body.size() + 1);
    out.push_back(static_cast<std::uint8_t>(L));
    out.insert(out.end(), body.begin(), body.end());
    return out;
}

Tensor decode_latent(const std::vector<std::uint8_t>& payload, const Tensor& mu, const Tensor& sigma) {
    if (payload.empty()) throw DecodeError("decode_latent: empty payload");
    int L = payload[0];
    std::vector<CdfTable> tables(mu.numel());
    std::vector<const CdfTable*> ptrs(mu.numel());
    for (std::size_t i = 0; i < mu.numel(); ++i) {
        tables[i] = build_gaussian_cdf(sigma.d[i], L);
        ptrs[i] = &tables[i];
    }
    std::vector<std::uint8_t> body(payload.begin() + 1, payload.end());
    auto symbols = range_decode(body, ptrs);
    return dequantize_symbols(symbols, mu);
}

}  // namespace entropy
}  // namespace nrdc
