#pragma once

#include <algorithm>
#include <functional>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace patch_triage {

/// Length of the longest common subsequence of `a` and `b`. Uses two rolling
/// rows of size |b| + 1.
template <typename T, typename Eq = std::equal_to<>>
std::size_t lcs_length(std::span<const T> a, std::span<const T> b, Eq eq = {}) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = eq(a[i - 1], b[j - 1]) ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

/// One longest common subsequence as index pairs (i into `a`, j into `b`),
/// ascending. Ties prefer the earliest match in `a`.
template <typename A, typename B, typename Eq>
std::vector<std::pair<std::size_t, std::size_t>> lcs_alignment(std::span<const A> a,
                                                               std::span<const B> b, Eq eq) {
  const std::size_t n = a.size(), m = b.size();
  // table[i][j] = LCS of a[i..] and b[j..]
  std::vector<std::size_t> table((n + 1) * (m + 1), 0);
  auto at = [&](std::size_t i, std::size_t j) -> std::size_t& { return table[i * (m + 1) + j]; };
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t j = m; j-- > 0;) {
      at(i, j) = eq(a[i], b[j]) ? at(i + 1, j + 1) + 1 : std::max(at(i + 1, j), at(i, j + 1));
    }
  }
  std::vector<std::pair<std::size_t, std::size_t>> out;
  std::size_t i = 0, j = 0;
  while (i < n && j < m) {
    if (eq(a[i], b[j]) && at(i, j) == at(i + 1, j + 1) + 1) {
      out.emplace_back(i++, j++);
    } else if (at(i + 1, j) >= at(i, j + 1)) {
      ++i;
    } else {
      ++j;
    }
  }
  return out;
}

}  // namespace patch_triage
