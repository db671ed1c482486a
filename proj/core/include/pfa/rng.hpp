#pragma once

#include <complex>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

namespace pfa {

// FNV-1a over raw bytes. Used to key solver RNG streams to the problem
// instance so that results do not depend on call order or thread layout.
class Hasher {
 public:
  Hasher& bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      state_ ^= p[i];
      state_ *= 0x100000001b3ULL;
    }
    return *this;
  }
  Hasher& u64(std::uint64_t v) { return bytes(&v, sizeof v); }
  Hasher& i32(std::int32_t v) { return bytes(&v, sizeof v); }
  Hasher& f64(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    return u64(bits);
  }
  Hasher& c128(std::complex<double> v) { return f64(v.real()).f64(v.imag()); }
  Hasher& str(const std::string& s) { return bytes(s.data(), s.size()); }
  template <typename T>
  Hasher& span(const std::vector<T>& v);

  std::uint64_t digest() const { return state_; }
  std::string hex() const;

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

template <>
inline Hasher& Hasher::span(const std::vector<int>& v) {
  for (int x : v) i32(x);
  return *this;
}
template <>
inline Hasher& Hasher::span(const std::vector<double>& v) {
  for (double x : v) f64(x);
  return *this;
}
template <>
inline Hasher& Hasher::span(const std::vector<std::complex<double>>& v) {
  for (auto x : v) c128(x);
  return *this;
}

inline std::string Hasher::hex() const {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  std::uint64_t v = state_;
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[v & 0xf];
    v >>= 4;
  }
  return out;
}

// Counter-based splittable generator. A stream is identified by
// (seed, key, stream index); draws are a pure function of that triple and
// the draw counter, so parallel evaluation cannot perturb the sequence.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t key, std::uint64_t stream = 0) {
    state_ = mix(mix(mix(0x9e3779b97f4a7c15ULL ^ seed) + key) + stream);
  }

  CounterRng split(std::uint64_t stream) const {
    CounterRng r = *this;
    r.state_ = mix(state_ + 0x9e3779b97f4a7c15ULL * (stream + 1));
    r.counter_ = 0;
    return r;
  }

  std::uint64_t next_u64() {
    std::uint64_t z = state_ + 0x9e3779b97f4a7c15ULL * (++counter_);
    return mix(z);
  }

  // Uniform in [0, 1).
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform in [0, n).
  std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

  // Standard normal via Box-Muller.
  double next_normal() {
    double u1 = next_double();
    double u2 = next_double();
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(6.283185307179586476925286766559 * u2);
  }

  std::complex<double> next_cnormal() {
    double re = next_normal();
    double im = next_normal();
    return {re, im};
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return z;
  }

  std::uint64_t state_ = 0;
  std::uint64_t counter_ = 0;
};

}  // namespace pfa
