#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fieno {

// Error kinds mirror the C API status codes.
enum class ErrorKind {
    Validation,
    Numeric,
    Io,
    Version,
    Corrupt,
    Internal,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& msg)
        : std::runtime_error(msg), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& msg) {
    throw Error(kind, msg);
}

// splitmix64 finalizer; the standard way to spread seed bits.
uint64_t mix64(uint64_t x);

// Derives an independent sub-seed from a base seed, a purpose tag, and
// optional indices. Same inputs always give the same seed.
uint64_t derive_seed(uint64_t base, std::string_view tag,
                     std::initializer_list<uint64_t> indices = {});

// Deterministic random source: 64-bit Mersenne Twister underneath,
// uniform doubles from the top 53 bits, normals via Box-Muller. The
// sequence is fixed by the seed alone, independent of platform.
class Rng {
public:
    explicit Rng(uint64_t seed) : gen_(seed) {}

    uint64_t next_u64() { return gen_(); }

    // [0, 1)
    double uniform() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // [0, n), unbiased via rejection
    uint64_t uniform_index(uint64_t n);

    double normal();
    double normal(double mean, double stddev) {
        return mean + stddev * normal();
    }

private:
    std::mt19937_64 gen_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

// Shortest exact decimal form (17 significant digits) of a double.
std::string fmt_g17(double v);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace fieno
