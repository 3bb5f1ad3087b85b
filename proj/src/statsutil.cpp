#include "cmcs/statsutil.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace cmcs {

namespace {

constexpr std::uint64_t kPcgMult = 6364136223846793005ULL;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

RandomStream RandomStream::child(std::uint64_t k) const {
    return RandomStream{seed, splitmix64(stream_id ^ (0xd1b54a32d192ed03ULL + k * 0x9e3779b97f4a7c15ULL))};
}

Pcg32::Pcg32(RandomStream s) {
    // Canonical PCG seeding with both halves hashed so that nearby
    // (seed, stream_id) pairs land far apart in state space.
    inc_ = (splitmix64(s.stream_id) << 1u) | 1u;
    state_ = 0u;
    next_u32();
    state_ += splitmix64(s.seed);
    next_u32();
}

std::uint32_t Pcg32::next_u32() {
    const std::uint64_t old = state_;
    state_ = old * kPcgMult + inc_;
    const auto xorshifted = static_cast<std::uint32_t>(((old >> 18u) ^ old) >> 27u);
    const auto rot = static_cast<std::uint32_t>(old >> 59u);
    return (xorshifted >> rot) | (xorshifted << ((32u - rot) & 31u));
}

std::uint64_t Pcg32::next_u64() {
    const std::uint64_t hi = next_u32();
    return (hi << 32) | next_u32();
}

double Pcg32::uniform01() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

std::int64_t Pcg32::uniform_int(std::int64_t lo, std::int64_t hi) {
    if (lo > hi) {
        throw std::invalid_argument("uniform_int: lo > hi");
    }
    const auto range = static_cast<std::uint64_t>(hi - lo) + 1u;
    if (range == 0) {  // full 64-bit span
        return static_cast<std::int64_t>(next_u64());
    }
    // Rejection sampling over the largest multiple of range, so every value
    // in {lo..hi} has exactly the same probability.
    const std::uint64_t threshold = (0u - range) % range;
    for (;;) {
        const std::uint64_t x = next_u64();
        if (x >= threshold) {
            return lo + static_cast<std::int64_t>(x % range);
        }
    }
}

double Pcg32::normal() {
    return normal_quantile(uniform01());
}

std::vector<double> std_normal_draws(RandomStream stream, std::size_t count) {
    Pcg32 rng(stream);
    std::vector<double> out(count);
    for (auto& v : out) {
        v = rng.normal();
    }
    return out;
}

double normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

double normal_quantile(double prob) {
    if (!(prob > 0.0) || !(prob < 1.0)) {
        throw std::invalid_argument("normal_quantile: prob must lie in (0,1), got " + std::to_string(prob));
    }
    // Wichura's algorithm AS 241 (PPND16): maximum absolute error ~1e-16.
    const double q = prob - 0.5;
    double r;
    if (std::fabs(q) <= 0.425) {
        r = 0.180625 - q * q;
        const double num = q * (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                                     6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
                                   1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
                                 1.3314166789178437745e2) * r + 3.3871328727963666080e0);
        const double den = (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                                 3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
                               5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
                             4.2313330701600911252e1) * r + 1.0);
        return num / den;
    }
    r = (q < 0.0) ? prob : 1.0 - prob;
    r = std::sqrt(-std::log(r));
    double x;
    if (r <= 5.0) {
        r -= 1.6;
        const double num = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                                 2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
                               3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
                             4.63033784615654529590e0) * r + 1.42343711074968357734e0);
        const double den = (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                                 1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                               6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
                             2.05319162663775882187e0) * r + 1.0);
        x = num / den;
    } else {
        r -= 5.0;
        const double num = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                                 1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                               2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
                             5.46378491116411436990e0) * r + 6.65790464350110377720e0);
        const double den = (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                                 1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                               1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
                             5.99832206555887937690e-1) * r + 1.0);
        x = num / den;
    }
    return (q < 0.0) ? -x : x;
}

namespace {

// Regularized lower incomplete gamma P(a, x), series expansion (x < a + 1).
double gamma_p_series(double a, double x) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int i = 0; i < 1000; ++i) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::fabs(del) < std::fabs(sum) * 1e-16) {
            break;
        }
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Regularized upper incomplete gamma Q(a, x), Lentz continued fraction (x >= a + 1).
double gamma_q_contfrac(double a, double x) {
    constexpr double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 1000; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-16) {
            break;
        }
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double chi2_upper_tail(double x, int df) {
    if (x < 0.0) {
        throw std::invalid_argument("chi2_upper_tail: x must be nonnegative");
    }
    if (df < 1) {
        throw std::invalid_argument("chi2_upper_tail: df must be >= 1");
    }
    if (x == 0.0) {
        return 1.0;
    }
    const double a = 0.5 * df;
    const double xx = 0.5 * x;
    if (xx < a + 1.0) {
        return 1.0 - gamma_p_series(a, xx);
    }
    return gamma_q_contfrac(a, xx);
}

double chi2_quantile(double alpha_upper, int df) {
    if (!(alpha_upper > 0.0) || !(alpha_upper < 1.0)) {
        throw std::invalid_argument("chi2_quantile: alpha must lie in (0,1)");
    }
    if (df < 1) {
        throw std::invalid_argument("chi2_quantile: df must be >= 1");
    }
    // chi2_upper_tail is strictly decreasing in x; bisect.
    double lo = 0.0;
    double hi = 1.0;
    while (chi2_upper_tail(hi, df) > alpha_upper) {
        hi *= 2.0;
        if (hi > 1e8) {
            throw std::runtime_error("chi2_quantile: failed to bracket");
        }
    }
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (chi2_upper_tail(mid, df) > alpha_upper) {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo < 1e-13 * (1.0 + hi)) {
            break;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace cmcs
