#ifndef MEME_RANDOM_HPP
#define MEME_RANDOM_HPP

#include <cstdint>
#include <cstdlib>
#include <random>
#include <string>
#include <thread>

namespace meme {

using Engine = std::mt19937_64;

/// SplitMix64 finaliser.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed of the index-th independent substream of a master seed. Depends only
/// on (master, stream, index), never on the order streams are consumed in.
constexpr std::uint64_t substream_seed(std::uint64_t master, std::uint64_t stream,
                                       std::uint64_t index) {
  return splitmix64(splitmix64(splitmix64(master) ^ stream) + index);
}

inline Engine make_engine(std::uint64_t master, std::uint64_t stream, std::uint64_t index = 0) {
  return Engine(substream_seed(master, stream, index));
}

/// Worker count: explicit request, else $MEME_THREADS, else hardware threads.
inline unsigned resolve_threads(int requested = 0) {
  if (requested > 0) return static_cast<unsigned>(requested);
  if (const char* env = std::getenv("MEME_THREADS")) {
    try {
      const int v = std::stoi(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (...) {
    }
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1u : hw;
}

}  // namespace meme

#endif  // MEME_RANDOM_HPP
