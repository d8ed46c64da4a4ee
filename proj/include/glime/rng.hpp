#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace glime::rng {

// Counter-based deterministic stream: every draw is a pure function of
// (seed, counter...) so consumers may evaluate entries in any order, or in
// parallel, and still reproduce the serial result bit for bit.

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t key2(std::uint64_t seed, std::uint64_t a) {
  return splitmix64(splitmix64(seed) ^ a);
}

inline std::uint64_t key3(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  return splitmix64(key2(seed, a) ^ b);
}

// Uniform in the open interval (0,1); never returns an exact 0 or 1.
inline double to_uniform01(std::uint64_t h) {
  return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
}

inline double uniform(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  return to_uniform01(key3(seed, a, b));
}

// Inverse standard-normal CDF, Wichura's AS 241 (PPND16 precision).
inline double normal_icdf(double p) {
  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                 6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
               1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
             1.3314166789178437745e2) * r + 3.3871328727963666080e0) /
           (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                 3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
               5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
             4.2313330701600911252e1) * r + 1.0);
  }
  double r = (q < 0.0) ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double x;
  if (r <= 5.0) {
    r -= 1.6;
    x = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
              2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
            3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
          4.63033784615654529590e0) * r + 1.42343711074968357734e0) /
        (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
              1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
            6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
          2.05319162663775882187e0) * r + 1.0);
  } else {
    r -= 5.0;
    x = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
              1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
            2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
          5.46378491116411436990e0) * r + 6.65790464350110377720e0) /
        (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
              1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
            1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
          5.99832206555887937690e-1) * r + 1.0);
  }
  return (q < 0.0) ? -x : x;
}

inline double normal(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  return normal_icdf(uniform(seed, a, b));
}

// Sequential convenience stream on top of the counter scheme.
class Stream {
 public:
  explicit Stream(std::uint64_t seed, std::uint64_t channel = 0)
      : seed_(seed), channel_(channel) {}

  double uniform01() { return rng::uniform(seed_, channel_, counter_++); }
  double normal() { return rng::normal(seed_, channel_, counter_++); }

  // Unbiased integer in [0, bound) via rejection on the top bits.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t h;
    do {
      h = key3(seed_, channel_, counter_++);
    } while (h >= limit);
    return h % bound;
  }

 private:
  std::uint64_t seed_;
  std::uint64_t channel_;
  std::uint64_t counter_ = 0;
};

// In-place Fisher-Yates; fully specified (no std::shuffle, whose stream of
// index draws is implementation-defined).
template <typename T>
void shuffle(std::vector<T>& items, Stream& stream) {
  if (items.size() < 2) return;
  for (std::size_t i = items.size() - 1; i > 0; --i) {
    const std::size_t j = static_cast<std::size_t>(stream.below(i + 1));
    std::swap(items[i], items[j]);
  }
}

}  // namespace glime::rng
