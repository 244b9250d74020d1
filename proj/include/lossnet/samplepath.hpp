#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

namespace lossnet {

// The four baseline unit-rate processes: H/L inter-arrival and H/L service
// variates. Each entry is an i.i.d. Exp(1) draw.
enum class StreamId : int { AH = 0, AL = 1, SH = 2, SL = 3 };

inline constexpr int kNumStreams = 4;

inline const char* to_string(StreamId s) {
  switch (s) {
    case StreamId::AH: return "AH";
    case StreamId::AL: return "AL";
    case StreamId::SH: return "SH";
    case StreamId::SL: return "SL";
  }
  return "?";
}

// Replayable, lazily extended randomness. value_at(stream, j) is a pure
// function of (seed, stream, j): generation is counter-based, so lookahead
// can materialize arbitrarily far ahead of the live cursors without
// perturbing later draws. Realized prefixes are memoized per stream.
class SamplePath {
 public:
  explicit SamplePath(std::uint64_t seed);

  double value_at(StreamId stream, std::size_t index) const;

  std::uint64_t seed() const { return seed_; }
  std::size_t realized_len(StreamId stream) const {
    return memo_[static_cast<int>(stream)].size();
  }

  // Test instrumentation: invoked on every variate access when set.
  using AccessProbe = std::function<void(StreamId, std::size_t)>;
  void set_access_probe(AccessProbe probe) const { probe_ = std::move(probe); }
  void clear_access_probe() const { probe_ = nullptr; }

 private:
  double generate(StreamId stream, std::size_t index) const;

  std::uint64_t seed_;
  std::array<std::uint64_t, kNumStreams> stream_key_;
  mutable std::array<std::vector<double>, kNumStreams> memo_;
  mutable AccessProbe probe_;
};

// Per-stream next-unconsumed index. Copying a Cursor snapshots it; draws on
// the copy never move the original.
struct Cursor {
  std::array<std::size_t, kNumStreams> next{};

  std::size_t& operator[](StreamId s) { return next[static_cast<int>(s)]; }
  std::size_t operator[](StreamId s) const { return next[static_cast<int>(s)]; }
};

// Returns the stream's next unconsumed variate and advances the cursor.
inline double draw_next(Cursor& cursor, const SamplePath& path, StreamId stream) {
  return path.value_at(stream, cursor[stream]++);
}

}  // namespace lossnet
