#include "jive/random.hpp"

#include "jive/errors.hpp"

#include <algorithm>
#include <cmath>

namespace jive {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t stream)
    : engine_(derive_seed(seed, stream)) {}

double RandomStream::uniform() {
  return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

std::uint64_t RandomStream::below(std::uint64_t bound) {
  if (bound == 0) {
    throw InputError("RandomStream::below: bound must be positive");
  }
  // Reject the low values that would make the modulo biased.
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const std::uint64_t r = next();
    if (r >= threshold) {
      return r % bound;
    }
  }
}

double RandomStream::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u = 0.0;
  double v = 0.0;
  double s = 0.0;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * f;
  has_spare_ = true;
  return u * f;
}

std::vector<std::int64_t> RandomStream::sample_without_replacement(std::int64_t population,
                                                                   std::int64_t count) {
  if (population < 0 || count < 0 || count > population) {
    throw InputError("sample_without_replacement: need 0 <= count <= population");
  }
  std::vector<std::int64_t> out;
  out.reserve(static_cast<std::size_t>(count));
  if (count * 4 <= population) {
    // Sparse draw: rejection keeps memory at O(count).
    while (static_cast<std::int64_t>(out.size()) < count) {
      const auto candidate = static_cast<std::int64_t>(below(static_cast<std::uint64_t>(population)));
      if (std::find(out.begin(), out.end(), candidate) == out.end()) {
        out.push_back(candidate);
      }
    }
    return out;
  }
  std::vector<std::int64_t> pool(static_cast<std::size_t>(population));
  for (std::int64_t i = 0; i < population; ++i) pool[static_cast<std::size_t>(i)] = i;
  for (std::int64_t i = 0; i < count; ++i) {
    const auto j = i + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(population - i)));
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
    out.push_back(pool[static_cast<std::size_t>(i)]);
  }
  return out;
}

}  // namespace jive
