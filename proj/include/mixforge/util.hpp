#ifndef MIXFORGE_UTIL_HPP_
#define MIXFORGE_UTIL_HPP_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace mixforge {

// 64-bit FNV-1a. Stable across platforms, unlike std::hash.
inline uint64_t fnv1a64(std::string_view s) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

// splitmix64 finalizer; used to derive independent seeds from (seed, tag) pairs.
inline uint64_t mix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline uint64_t mix64(uint64_t a, uint64_t b) { return mix64(a ^ mix64(b)); }

// Fixed-width float formatting. Every float persisted to plans, manifests and
// CSVs goes through this so that parse -> re-emit is byte-identical.
std::string fmt_f6(double v);

std::vector<std::string> split(std::string_view s, char sep);
std::string_view trim(std::string_view s);

}  // namespace mixforge

#endif  // MIXFORGE_UTIL_HPP_
