#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <mutex>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace segsynth {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct io_error : error { using error::error; };         // file missing, disk failure
struct parse_error : error { using error::error; };      // malformed container bytes
struct format_error : error { using error::error; };     // valid bytes, unsupported layout
struct range_error : error { using error::error; };      // value outside the contract range
struct shape_error : error { using error::error; };      // dimension mismatch
struct value_error : error { using error::error; };      // bad argument / degenerate input
struct state_error : error { using error::error; };      // call sequence violated

// ---------------------------------------------------------------------------
// Random numbers
//
// All randomness in the project flows through this wrapper so that results
// are reproducible bit-for-bit: the engine is the standardized mt19937_64 and
// the distributions are spelled out here instead of relying on the
// implementation-defined std::*_distribution transforms.
// ---------------------------------------------------------------------------

// splitmix64 finalizer; used to derive independent substreams from (seed, index...).
inline std::uint64_t mix_seed(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed) { return mix_seed(seed); }

template <class... Rest>
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t next, Rest... rest) {
    return derive_seed(mix_seed(seed ^ mix_seed(next)), rest...);
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t bits() { return engine_(); }

    // uniform double in [0, 1), 53 significant bits
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // unbiased integer in [0, n)
    std::uint64_t below(std::uint64_t n) {
        if (n == 0) throw value_error("Rng::below: n must be positive");
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
        std::uint64_t r;
        do { r = engine_(); } while (r >= limit);
        return r % n;
    }

    std::int64_t between(std::int64_t lo, std::int64_t hi) {  // inclusive
        return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo + 1)));
    }

    // standard normal via Box-Muller; second value cached
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1, u2;
        do { u1 = uniform(); } while (u1 <= 0.0);
        u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * M_PI * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    // Fisher-Yates
    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i)
            std::swap(v[i - 1], v[below(i)]);
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

// ---------------------------------------------------------------------------
// Reductions and parallel helpers
// ---------------------------------------------------------------------------

// Pairwise tree summation: deterministic for a given input order and much
// better conditioned than a running sum.
inline double pairwise_sum(std::span<const double> v) {
    if (v.size() <= 8) {
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    }
    const std::size_t half = v.size() / 2;
    return pairwise_sum(v.subspan(0, half)) + pairwise_sum(v.subspan(half));
}

// Runs fn(i) for i in [0, n). Work is split into contiguous chunks, one per
// thread; every index is processed exactly once so results must not depend on
// which thread ran it.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn, unsigned max_threads = 0) {
    if (n == 0) return;
    unsigned hw = max_threads ? max_threads : std::thread::hardware_concurrency();
    if (hw < 2 || n == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(hw, n));
    std::vector<std::thread> pool;
    pool.reserve(workers);
    std::exception_ptr eptr;
    std::mutex eptr_mu;
    for (unsigned t = 0; t < workers; ++t) {
        const std::size_t lo = n * t / workers;
        const std::size_t hi = n * (t + 1) / workers;
        pool.emplace_back([&, lo, hi] {
            try {
                for (std::size_t i = lo; i < hi; ++i) fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lk(eptr_mu);
                if (!eptr) eptr = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (eptr) std::rethrow_exception(eptr);
}

// ---------------------------------------------------------------------------
// Content hashing (64-bit FNV-1a) for audit fields in reports
// ---------------------------------------------------------------------------

inline std::uint64_t fnv1a64(const void* data, std::size_t len, std::uint64_t h = 0xcbf29ce484222325ull) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::string to_hex(std::uint64_t h) {
    static const char* digits = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i) {
        s[static_cast<std::size_t>(i)] = digits[h & 0xf];
        h >>= 4;
    }
    return s;
}

inline std::string hash_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open for hashing: " + path);
    std::uint64_t h = 0xcbf29ce484222325ull;
    char buf[1 << 16];
    while (in.read(buf, sizeof buf) || in.gcount() > 0)
        h = fnv1a64(buf, static_cast<std::size_t>(in.gcount()), h);
    return to_hex(h);
}

// ---------------------------------------------------------------------------
// Misc
// ---------------------------------------------------------------------------

inline int next_pow2(int v) {
    if (v < 1) throw value_error("next_pow2: argument must be >= 1");
    int p = 1;
    while (p < v) p <<= 1;
    return p;
}

}  // namespace segsynth
