#pragma once

#include "dbar/core.hpp"

#include <compare>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace dbar {

/// Strictly ascending list of coordinate indices. Stored 0-based; the text
/// form ("1,3") is 1-based, matching how coordinates are named in files.
class MultiIndex {
 public:
  MultiIndex() = default;

  explicit MultiIndex(std::vector<int> entries) : idx_(std::move(entries)) {
    for (std::size_t i = 0; i < idx_.size(); ++i) {
      if (idx_[i] < 0) fail(Errc::InvalidArgument, "negative index in multi-index");
      if (i > 0 && idx_[i] <= idx_[i - 1])
        fail(Errc::InvalidArgument, "multi-index entries must be strictly ascending");
    }
  }

  MultiIndex(std::initializer_list<int> entries) : MultiIndex(std::vector<int>(entries)) {}

  /// Parses "1,3" (1-based). The empty string is the empty index.
  static MultiIndex parse(std::string_view text) {
    std::vector<int> out;
    std::string item;
    std::stringstream ss{std::string(text)};
    while (std::getline(ss, item, ',')) {
      if (item.find_first_not_of(" \t") == std::string::npos) continue;
      try {
        std::size_t used = 0;
        int v = std::stoi(item, &used);
        out.push_back(v - 1);
      } catch (const std::exception&) {
        fail(Errc::ParseError, "bad multi-index key '" + std::string(text) + "'");
      }
    }
    return MultiIndex(std::move(out));
  }

  std::size_t size() const { return idx_.size(); }
  bool empty() const { return idx_.empty(); }
  int operator[](std::size_t i) const { return idx_[i]; }
  auto begin() const { return idx_.begin(); }
  auto end() const { return idx_.end(); }
  const std::vector<int>& entries() const { return idx_; }

  bool contains(int j) const { return std::binary_search(idx_.begin(), idx_.end(), j); }

  MultiIndex without(int j) const {
    std::vector<int> out;
    out.reserve(idx_.size());
    for (int v : idx_)
      if (v != j) out.push_back(v);
    return MultiIndex(std::move(out));
  }

  MultiIndex with(int j) const {
    if (contains(j)) fail(Errc::DuplicateIndex, "index already present");
    std::vector<int> out = idx_;
    out.insert(std::upper_bound(out.begin(), out.end(), j), j);
    return MultiIndex(std::move(out));
  }

  std::string to_string() const {
    std::string s;
    for (std::size_t i = 0; i < idx_.size(); ++i) {
      if (i) s += ',';
      s += std::to_string(idx_[i] + 1);
    }
    return s;
  }

  auto operator<=>(const MultiIndex&) const = default;
  bool operator==(const MultiIndex&) const = default;

 private:
  std::vector<int> idx_;
};

/// Sign of the permutation sorting (j, K) ascending: (-1)^{#{k in K : k < j}}.
inline int sign_perm(int j, const MultiIndex& K) {
  int below = 0;
  for (int k : K) {
    if (k == j) fail(Errc::DuplicateIndex, "sign_perm: index already in multi-index");
    if (k < j) ++below;
  }
  return (below % 2 == 0) ? 1 : -1;
}

/// Sign of the permutation sorting an arbitrary tuple of distinct entries.
inline int tuple_sign(std::vector<int> t) {
  int sign = 1;
  for (std::size_t i = 0; i < t.size(); ++i)
    for (std::size_t j = i + 1; j < t.size(); ++j) {
      if (t[i] == t[j]) fail(Errc::DuplicateIndex, "repeated entry in tuple");
      if (t[i] > t[j]) sign = -sign;
    }
  return sign;
}

inline int beta_sum(const MultiIndex& J, const std::vector<int>& beta) {
  int s = 0;
  for (int j : J) s += beta.at(static_cast<std::size_t>(j));
  return s;
}

/// All ascending multi-indices of length q drawn from {0, ..., n-1}.
inline std::vector<MultiIndex> all_multi_indices(int n, int q) {
  std::vector<MultiIndex> out;
  if (q < 0 || q > n) return out;
  std::vector<int> cur(static_cast<std::size_t>(q));
  for (int i = 0; i < q; ++i) cur[static_cast<std::size_t>(i)] = i;
  while (true) {
    out.emplace_back(cur);
    int i = q - 1;
    while (i >= 0 && cur[static_cast<std::size_t>(i)] == n - q + i) --i;
    if (i < 0) break;
    ++cur[static_cast<std::size_t>(i)];
    for (int k = i + 1; k < q; ++k) cur[static_cast<std::size_t>(k)] = cur[static_cast<std::size_t>(k - 1)] + 1;
  }
  return out;
}

/// Coefficients of a (0,q)-covector at one point, keyed by ascending multi-index.
using Covector = std::map<MultiIndex, cdouble>;

inline double max_abs(const Covector& c) {
  double m = 0.0;
  for (const auto& [k, v] : c) m = std::max(m, std::abs(v));
  return m;
}

inline Covector scaled(const Covector& c, cdouble a) {
  Covector out;
  for (const auto& [k, v] : c) out[k] = a * v;
  return out;
}

inline Covector difference(const Covector& a, const Covector& b) {
  Covector out = a;
  for (const auto& [k, v] : b) out[k] -= v;
  return out;
}

}  // namespace dbar
