#ifndef POLITELENS_COMMON_HPP
#define POLITELENS_COMMON_HPP

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace politelens {

/// Raised for bad command-line usage or bad configuration. Maps to exit code 1.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Raised for malformed data files, model mismatches, or I/O failures. Maps to exit code 2.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Hashing

inline std::uint64_t fnv1a64(const void* data, std::size_t len,
                             std::uint64_t h = 0xcbf29ce484222325ULL) {
    const auto* p = static_cast<const unsigned char*>(data);
    // 8-byte strides keep hashing cheap for megabyte-sized tensors.
    std::size_t n8 = len / 8;
    for (std::size_t i = 0; i < n8; ++i) {
        std::uint64_t chunk;
        std::memcpy(&chunk, p + i * 8, 8);
        h = (h ^ chunk) * 0x100000001b3ULL;
    }
    for (std::size_t i = n8 * 8; i < len; ++i) {
        h = (h ^ p[i]) * 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t fnv1a64(std::string_view s,
                             std::uint64_t h = 0xcbf29ce484222325ULL) {
    // Byte-wise over strings so the value does not depend on alignment tricks.
    for (unsigned char c : s) h = (h ^ c) * 0x100000001b3ULL;
    return h;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// ---------------------------------------------------------------------------
// Deterministic RNG
//
// std::mt19937 output is fully specified by the standard; all derived draws
// below avoid std::uniform_*_distribution (whose algorithms are
// implementation-defined) so that runs reproduce bit-for-bit everywhere.

class Rng {
public:
    explicit Rng(std::uint64_t seed)
        : gen_(static_cast<std::uint32_t>(splitmix64(seed) >> 32)) {}

    std::uint32_t next_u32() { return gen_(); }

    /// Uniform in [0, 1) with 32 bits of resolution.
    double uniform01() { return gen_() * (1.0 / 4294967296.0); }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Uniform index in [0, n). n must be > 0.
    std::size_t index(std::size_t n) {
        return static_cast<std::size_t>(gen_()) % n;
    }

private:
    std::mt19937 gen_;
};

template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
    // Fisher-Yates with explicit index draws (see Rng note).
    for (std::size_t i = v.size(); i > 1; --i) {
        std::size_t j = rng.index(i);
        std::swap(v[i - 1], v[j]);
    }
}

// ---------------------------------------------------------------------------
// Matrix: dense row-major storage. Rows are contiguous, so a window of t
// consecutive rows is one contiguous block of t*cols scalars.

template <typename T>
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, T fill = T{})
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }

    T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    T* row(std::size_t r) { return data_.data() + r * cols_; }
    const T* row(std::size_t r) const { return data_.data() + r * cols_; }

    std::vector<T>& values() { return data_; }
    const std::vector<T>& values() const { return data_; }

    void fill(T v) { data_.assign(data_.size(), v); }

    bool all_finite() const {
        for (T v : data_)
            if (!std::isfinite(static_cast<double>(v))) return false;
        return true;
    }

    bool operator==(const Matrix& o) const {
        return rows_ == o.rows_ && cols_ == o.cols_ && data_ == o.data_;
    }

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<T> data_;
};

/// Dot product with four independent accumulators. The fixed summation order
/// keeps results deterministic while breaking the serial FP dependency chain
/// that otherwise dominates convolution time.
template <typename T>
T dot(const T* a, const T* b, std::size_t n) {
    T s0 = T{}, s1 = T{}, s2 = T{}, s3 = T{};
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        s0 += a[i] * b[i];
        s1 += a[i + 1] * b[i + 1];
        s2 += a[i + 2] * b[i + 2];
        s3 += a[i + 3] * b[i + 3];
    }
    for (; i < n; ++i) s0 += a[i] * b[i];
    return ((s0 + s1) + (s2 + s3));
}

// ---------------------------------------------------------------------------
// Text helpers (ASCII-only classification; UTF-8 continuation bytes are
// treated as word characters so multibyte words survive intact).

inline bool is_space_ascii(unsigned char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

inline bool is_punct_ascii(unsigned char c) {
    return (c >= '!' && c <= '/') || (c >= ':' && c <= '@') ||
           (c >= '[' && c <= '`') || (c >= '{' && c <= '~');
}

inline char lower_ascii(char c) {
    return (c >= 'A' && c <= 'Z') ? static_cast<char>(c + 32) : c;
}

inline std::string lower_ascii(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = lower_ascii(c);
    return out;
}

inline std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && is_space_ascii(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && is_space_ascii(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

/// Fixed-point decimal formatting, locale-independent.
inline std::string format_fixed(double v, int precision) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
    return buf;
}

inline std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

}  // namespace politelens

#endif  // POLITELENS_COMMON_HPP
