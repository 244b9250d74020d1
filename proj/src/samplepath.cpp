#include "lossnet/samplepath.hpp"

#include <algorithm>
#include <cmath>

namespace lossnet {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// splitmix64 finalizer
std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

SamplePath::SamplePath(std::uint64_t seed) : seed_(seed) {
  for (int s = 0; s < kNumStreams; ++s) {
    stream_key_[s] = mix64(seed + kGolden * static_cast<std::uint64_t>(s + 1));
  }
}

double SamplePath::generate(StreamId stream, std::size_t index) const {
  const std::uint64_t key = stream_key_[static_cast<int>(stream)];
  const std::uint64_t x = mix64(key + kGolden * (static_cast<std::uint64_t>(index) + 1));
  // 53-bit uniform on (0,1); the +0.5 offset keeps u away from 0 and 1,
  // so -log(u) is finite and strictly positive.
  const double u = (static_cast<double>(x >> 11) + 0.5) * 0x1.0p-53;
  return -std::log(u);
}

double SamplePath::value_at(StreamId stream, std::size_t index) const {
  if (probe_) probe_(stream, index);
  auto& memo = memo_[static_cast<int>(stream)];
  if (index >= memo.size()) {
    if (index + 1 > memo.capacity())
      memo.reserve(std::max(index + 1, memo.capacity() + memo.capacity() / 2 + 16));
    for (std::size_t j = memo.size(); j <= index; ++j) memo.push_back(generate(stream, j));
  }
  return memo[index];
}

}  // namespace lossnet
