// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include <Eigen/Dense>

namespace gifilter {

/// Fixed block size for reductions. Results depend on it, never on the
/// thread count.
inline constexpr std::size_t kReduceBlock = 1024;

inline int resolve_threads(int threads) {
  if (threads > 0) return threads;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Runs body(block, begin, end) for every block of [0, n) on up to
/// `threads` workers. The first exception thrown by any block is rethrown
/// (the one from the lowest block index, for reproducible error messages).
template <class Body>
void for_blocks(std::size_t n, std::size_t block, int threads, Body&& body) {
  const std::size_t nb = (n + block - 1) / block;
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::exception_ptr err;
  std::size_t err_block = nb;
  auto worker = [&] {
    for (;;) {
      const std::size_t b = next.fetch_add(1);
      if (b >= nb) return;
      try {
        body(b, b * block, std::min(n, (b + 1) * block));
      } catch (...) {
        std::lock_guard<std::mutex> lk(mu);
        if (b < err_block) {
          err_block = b;
          err = std::current_exception();
        }
      }
    }
  };
  const int t = std::max(1, std::min<int>(resolve_threads(threads), static_cast<int>(std::max<std::size_t>(nb, 1))));
  if (t == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(t));
    for (int i = 0; i < t; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (err) std::rethrow_exception(err);
}

/// Pairwise (tree) sum of per-block partial results, in block order.
template <class T>
T pairwise_sum(std::vector<T> parts) {
  if (parts.empty()) return T{};
  while (parts.size() > 1) {
    std::vector<T> next;
    next.reserve((parts.size() + 1) / 2);
    for (std::size_t i = 0; i + 1 < parts.size(); i += 2) {
      T s = parts[i];
      s += parts[i + 1];
      next.push_back(std::move(s));
    }
    if (parts.size() % 2) next.push_back(std::move(parts.back()));
    parts = std::move(next);
  }
  return std::move(parts.front());
}

/// Sum over i in [0, n) of f(i) (each an Eigen vector of length dim),
/// deterministic for any thread count.
template <class F>
Eigen::VectorXd deterministic_sum(std::size_t n, long dim, int threads, F&& f) {
  const std::size_t nb = (n + kReduceBlock - 1) / kReduceBlock;
  std::vector<Eigen::VectorXd> parts(nb, Eigen::VectorXd::Zero(dim));
  for_blocks(n, kReduceBlock, threads, [&](std::size_t b, std::size_t lo, std::size_t hi) {
    Eigen::VectorXd s = Eigen::VectorXd::Zero(dim);
    for (std::size_t i = lo; i < hi; ++i) s += f(i);
    parts[b] = std::move(s);
  });
  if (parts.empty()) return Eigen::VectorXd::Zero(dim);
  return pairwise_sum(std::move(parts));
}

/// Generic form: acc(i, T&) folds item i into a block accumulator; block
/// accumulators start as copies of `zero` and are combined pairwise with +=.
template <class T, class Acc>
T deterministic_reduce(std::size_t n, int threads, const T& zero, Acc&& acc) {
  const std::size_t nb = (n + kReduceBlock - 1) / kReduceBlock;
  std::vector<T> parts(nb, zero);
  for_blocks(n, kReduceBlock, threads, [&](std::size_t b, std::size_t lo, std::size_t hi) {
    T s = zero;
    for (std::size_t i = lo; i < hi; ++i) acc(i, s);
    parts[b] = std::move(s);
  });
  if (parts.empty()) return zero;
  return pairwise_sum(std::move(parts));
}

}  // namespace gifilter
