#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace vqa {

// Error taxonomy. The CLI maps these onto its exit-code contract:
// config/validation -> 2, I/O -> 3, numeric failure -> 4.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidArgument : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

// A component received inputs that violate a declared contract
// (adapter dimension mismatch, feature width mismatch, ...).
struct ContractViolation : Error {
  using Error::Error;
};

struct ValidationError : Error {
  explicit ValidationError(const std::string& what, std::vector<std::string> issues = {})
      : Error(what), issues(std::move(issues)) {}
  std::vector<std::string> issues;
};

struct NumericError : Error {
  using Error::Error;
};

// Correlation of a constant vector, logistic fit with degenerate data, ...
struct UndefinedCorrelation : NumericError {
  using NumericError::NumericError;
};

// Input outside a function's mathematical domain (e.g. non-positive score
// under geometric fusion).
struct DomainError : NumericError {
  using NumericError::NumericError;
};

// splitmix64: stateless seed mixer. Used to derive per-(epoch, video, chunk)
// seeds so decode-side randomness is independent of thread scheduling.
inline uint64_t mix_seed(uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline uint64_t mix_seed(uint64_t a, uint64_t b) { return mix_seed(a ^ mix_seed(b)); }

inline uint64_t mix_seed(uint64_t a, uint64_t b, uint64_t c) {
  return mix_seed(mix_seed(a, b), c);
}

// Runs fn(i) for i in [0, n). Results must be written to index-addressed
// slots; the schedule carries no ordering guarantees.
inline void parallel_for(int64_t n, int threads, const std::function<void(int64_t)>& fn) {
  if (n <= 0) return;
  if (threads <= 1 || n == 1) {
    for (int64_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const int n_workers = static_cast<int>(std::min<int64_t>(threads, n));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(n_workers));
  std::atomic<int64_t> next{0};
  for (int w = 0; w < n_workers; ++w) {
    pool.emplace_back([&]() {
      for (;;) {
        const int64_t i = next.fetch_add(1);
        if (i >= n) return;
        fn(i);
      }
    });
  }
  for (auto& t : pool) t.join();
}

inline int default_threads() {
  const unsigned hw = std::thread::hardware_concurrency();
  return static_cast<int>(hw == 0 ? 1 : (hw > 4 ? 4 : hw));
}

}  // namespace vqa
