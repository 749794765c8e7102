// Copyright 2026 The hyfermi Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace hyfermi {

/// Neumaier compensated accumulator.
template <typename Real = double>
class StableSum {
 public:
  StableSum() = default;
  explicit StableSum(Real init) : sum_(init) {}

  void add(Real x) {
    Real t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      c_ += (sum_ - t) + x;
    else
      c_ += (x - t) + sum_;
    sum_ = t;
  }

  /// Merge another accumulator, keeping both compensation terms.
  void merge(const StableSum& o) {
    add(o.sum_);
    c_ += o.c_;
  }

  StableSum& operator+=(Real x) {
    add(x);
    return *this;
  }

  Real get() const { return sum_ + c_; }

 private:
  Real sum_ = 0;
  Real c_ = 0;
};

inline unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1u : hw;
}

/// Runs body(i) for i in [0, n) on up to `threads` workers. Work items must
/// write only to their own slot; scheduling never affects results.
template <typename Body>
void parallel_for(std::size_t n, unsigned threads, Body&& body) {
  threads = std::min<std::size_t>(resolve_threads(threads), std::max<std::size_t>(n, 1));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::mutex err_mu;
  auto worker = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lk(err_mu);
        if (!err) err = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

/// Pairwise reduction over a fixed binary tree: the shape depends only on
/// the number of leaves.
template <typename Real>
StableSum<Real> tree_reduce(std::vector<StableSum<Real>> parts) {
  if (parts.empty()) return {};
  std::size_t n = parts.size();
  while (n > 1) {
    std::size_t half = (n + 1) / 2;
    for (std::size_t i = 0; i < n / 2; ++i) parts[i].merge(parts[i + half]);
    n = half;
  }
  return parts[0];
}

/// Deterministic chunked map-reduce. chunk_fn(begin, end, acc) accumulates
/// items [begin, end) into acc. Chunk boundaries are fixed by `chunk`, so the
/// result is bitwise identical for any thread count.
template <typename ChunkFn>
double chunked_sum(std::size_t n_items, std::size_t chunk, unsigned threads, ChunkFn&& chunk_fn) {
  if (n_items == 0) return 0.0;
  chunk = std::max<std::size_t>(chunk, 1);
  std::size_t n_chunks = (n_items + chunk - 1) / chunk;
  std::vector<StableSum<double>> parts(n_chunks);
  parallel_for(n_chunks, threads, [&](std::size_t c) {
    std::size_t b = c * chunk;
    std::size_t e = std::min(n_items, b + chunk);
    chunk_fn(b, e, parts[c]);
  });
  return tree_reduce(std::move(parts)).get();
}

}  // namespace hyfermi
