#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace freephish {

using Timestamp = std::chrono::sys_seconds;
using Seconds = std::chrono::seconds;

/// Base class for every error this library raises on purpose.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}

    /// Short machine-readable tag, e.g. "parse", "duplicate", "io".
    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

class ParseError : public Error {
public:
    explicit ParseError(const std::string& message) : Error("parse", message) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& message) : Error("io", message) {}
};

class PreconditionError : public Error {
public:
    explicit PreconditionError(const std::string& message) : Error("precondition", message) {}
};

// ISO-8601 UTC, second resolution: 2022-02-15T10:00:00Z
std::string format_timestamp(Timestamp t);
Timestamp parse_timestamp(std::string_view text);

// "hh:mm", hours unbounded, rounded to the nearest minute.
std::string format_hhmm(Seconds d);

// Durations like "168h", "90m", "600s", "7d" or a bare number of seconds.
Seconds parse_duration(std::string_view text);

std::string sha256_hex(std::string_view data);
std::string base64_encode(std::string_view data);
std::string base64_decode(std::string_view text);

bool is_valid_utf8(std::string_view text);

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);
bool icontains(std::string_view haystack, std::string_view needle);
bool starts_with_icase(std::string_view s, std::string_view prefix);
std::vector<std::string> split(std::string_view s, char sep);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view data);

/// Deterministic generator whose output sequence does not depend on the
/// standard library implementation (std distributions are unspecified).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next();
    /// Uniform integer in [0, n). n must be positive.
    std::uint64_t below(std::uint64_t n);
    /// Uniform real in [0, 1).
    double uniform();
    bool coin() { return (next() >> 63) != 0; }

private:
    std::uint64_t state_;
};

/// splitmix64 finalizer; used to derive independent per-item seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index);

/// Time source. Everything that schedules or stamps goes through one of these
/// so tests can drive time by hand.
class Clock {
public:
    virtual ~Clock() = default;
    virtual Timestamp now() const = 0;
    virtual void sleep_until(Timestamp t) = 0;
};

class SystemClock final : public Clock {
public:
    Timestamp now() const override;
    void sleep_until(Timestamp t) override;
};

/// Stands still until advanced; sleep_until jumps forward. Safe to read from
/// other threads while a test advances it.
class ManualClock final : public Clock {
public:
    explicit ManualClock(Timestamp start) : now_(start.time_since_epoch().count()) {}
    Timestamp now() const override { return Timestamp{Seconds{now_.load()}}; }
    void sleep_until(Timestamp t) override {
        const auto target = t.time_since_epoch().count();
        auto cur = now_.load();
        while (cur < target && !now_.compare_exchange_weak(cur, target)) {}
    }
    void advance(Seconds d) { now_ += d.count(); }
    void set(Timestamp t) { now_ = t.time_since_epoch().count(); }

private:
    std::atomic<Seconds::rep> now_;
};

/// Median with the mean-of-middles rule for even counts. Input must be non-empty.
double median(std::vector<double> values);

}  // namespace freephish
