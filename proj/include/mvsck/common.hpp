#pragma once

#include <Eigen/Dense>

#include <chrono>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace mvsck {

using Index = Eigen::Index;

/// Dense row-major storage used for every n x (d|f|m) matrix in the pipeline.
using DenseMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

enum class ErrorKind { config, data, timeout, numeric };

/// Base error. The kind maps one-to-one onto CLI exit codes.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(ErrorKind::config, what) {}
};

class NumericError : public Error {
public:
    explicit NumericError(const std::string& what) : Error(ErrorKind::numeric, what) {}
};

class TimeoutError : public Error {
public:
    explicit TimeoutError(const std::string& what) : Error(ErrorKind::timeout, what) {}
};

inline int exit_code(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::config: return 2;
    case ErrorKind::data: return 3;
    case ErrorKind::timeout: return 4;
    case ErrorKind::numeric: return 5;
    }
    return 1;
}

inline void require(bool condition, const std::string& message) {
    if (!condition) throw ConfigError(message);
}

/// Cooperative wall-clock limit. Long-running loops call check() between steps.
class Deadline {
public:
    using Clock = std::chrono::steady_clock;

    Deadline() = default;
    explicit Deadline(std::chrono::duration<double> budget)
        : end_(Clock::now() + std::chrono::duration_cast<Clock::duration>(budget)) {}

    bool expired() const { return end_ && Clock::now() >= *end_; }

    void check(const char* stage) const {
        if (expired()) throw TimeoutError(std::string("time limit exceeded during ") + stage);
    }

private:
    std::optional<Clock::time_point> end_;
};

inline void check_deadline(const Deadline* deadline, const char* stage) {
    if (deadline != nullptr) deadline->check(stage);
}

/// splitmix64 finalizer; used to derive independent stream seeds from one run seed.
inline std::uint64_t mix_seed(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index = 0) {
    return mix_seed(mix_seed(mix_seed(seed) ^ stream) ^ index);
}

/// FNV-1a 64-bit, used for cache keys and config fingerprints.
class Fnv1a {
public:
    void update(const void* data, std::size_t size) {
        const auto* bytes = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < size; ++i) {
            state_ ^= bytes[i];
            state_ *= 0x100000001b3ULL;
        }
    }
    void update(const std::string& s) { update(s.data(), s.size()); }
    template <class T>
    void update_value(const T& value) { update(&value, sizeof(T)); }

    std::uint64_t digest() const { return state_; }

    std::string hex() const {
        static constexpr char digits[] = "0123456789abcdef";
        std::string out(16, '0');
        std::uint64_t v = state_;
        for (int i = 15; i >= 0; --i) {
            out[static_cast<std::size_t>(i)] = digits[v & 0xf];
            v >>= 4;
        }
        return out;
    }

private:
    std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

inline bool all_finite(const DenseMatrix& m) { return m.allFinite(); }

} // namespace mvsck
