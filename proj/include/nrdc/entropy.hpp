#pragma once

#include <cstdint>
#include <vector>

#include "nrdc/errors.hpp"
#include "nrdc/ops.hpp"

namespace nrdc {
namespace entropy {

enum class PriorSource { factorized, hyperprior, hyperprior_temporal };

struct EntropyParams {
    Tensor mu;
    Tensor sigma;  // clamped to >= kSigmaMin by the producing network
    PriorSource source = PriorSource::factorized;
};

constexpr double kSigmaMin = 1e-2;

// --- quantization ------------------------------------------------------

enum class Phase { train, eval };

// eval: symbols = round(y - mu), yhat = symbols + mu.
std::vector<std::int32_t> quantize_symbols(const Tensor& y, const Tensor& mu);
Tensor dequantize_symbols(const std::vector<std::int32_t>& symbols, const Tensor& mu);

// --- rate model --------------------------------------------------------

// Total bits = sum of -log2 p(yhat), p floored at 2^-16.
double estimate_rate(const Tensor& yhat, const Tensor& mu, const Tensor& sigma);

// --- quantized CDF tables ----------------------------------------------

// 16-bit CDF over the symbol range [-L, L]; cdf has 2L+2 entries with
// cdf[0] = 0 and cdf[2L+1] = 65536, strictly increasing.
struct CdfTable {
    int L = 0;
    std::vector<std::uint32_t> cdf;

    int num_symbols() const { return 2 * L + 1; }
    std::uint32_t freq(int sym) const { return cdf[sym + L + 1] - cdf[sym + L]; }
    std::uint32_t cum(int sym) const { return cdf[sym + L]; }
};

CdfTable build_gaussian_cdf(double sigma, int L);

// Per-tensor symbol bound: ceil(max |symbol|) + 2 (transmitted, 1 byte).
int symbol_bound(const std::vector<std::int32_t>& symbols);

// --- range coder --------------------------------------------------------

// Deterministic 32-bit renormalizing range coder (carry-propagating,
// byte-oriented). cdfs[i] codes symbols[i].
std::vector<std::uint8_t> range_encode(const std::vector<std::int32_t>& symbols,
                                       const std::vector<const CdfTable*>& cdfs);
std::vector<std::int32_t> range_decode(const std::vector<std::uint8_t>& payload,
                                       const std::vector<const CdfTable*>& cdfs);

// Convenience: every element coded with the same table.
std::vector<std::uint8_t> range_encode_uniform(const std::vector<std::int32_t>& symbols,
                                               const CdfTable& cdf);
std::vector<std::int32_t> range_decode_uniform(const std::vector<std::uint8_t>& payload,
                                               std::size_t count, const CdfTable& cdf);

// Encode a latent tensor: per-element Gaussian tables from sigma, symbol
// bound prefix byte. mu/sigma must be reproducible bit-exactly on the
// decoder side.
std::vector<std::uint8_t> encode_latent(const Tensor& y, const Tensor& mu, const Tensor& sigma);
// Returns yhat (= symbols + mu).
Tensor decode_latent(const std::vector<std::uint8_t>& payload, const Tensor& mu, const Tensor& sigma);

}  // namespace entropy
}  // namespace nrdc
