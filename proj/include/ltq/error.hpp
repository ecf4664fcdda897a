#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace ltq {

enum class errc {
    bad_reduction,
    ambiguous,
    non_integral,
    unsupported,
    too_large,
    missing_empirical,
    not_converged,
    out_of_range,
    degenerate,
    invalid_argument,
    parse_error,
    io_error,
};

class error : public std::runtime_error {
public:
    error(errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
    errc code() const noexcept { return code_; }

private:
    errc code_;
};

class bad_reduction : public error {
public:
    explicit bad_reduction(std::uint64_t p)
        : error(errc::bad_reduction, "bad reduction at p = " + std::to_string(p)), p_(p) {}
    std::uint64_t prime() const noexcept { return p_; }

private:
    std::uint64_t p_;
};

class ambiguous : public error {
public:
    ambiguous(std::uint64_t p, std::size_t candidates)
        : error(errc::ambiguous, "group order at p = " + std::to_string(p) + " not isolated (" +
                                     std::to_string(candidates) + " candidates)"),
          p_(p) {}
    std::uint64_t prime() const noexcept { return p_; }

private:
    std::uint64_t p_;
};

class missing_empirical : public error {
public:
    explicit missing_empirical(std::vector<std::uint64_t> primes)
        : error(errc::missing_empirical, message(primes)), primes_(std::move(primes)) {}
    const std::vector<std::uint64_t>& primes() const noexcept { return primes_; }

private:
    static std::string message(const std::vector<std::uint64_t>& ps) {
        std::string s = "missing empirical factor for";
        for (auto p : ps) s += " " + std::to_string(p);
        return s;
    }
    std::vector<std::uint64_t> primes_;
};

}  // namespace ltq
