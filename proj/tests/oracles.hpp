#pragma once
// Independent reference implementations used as test oracles. Nothing here
// calls into the library.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace oracle {

inline std::uint64_t ipow(std::uint64_t b, unsigned e)
{
  std::uint64_t r = 1;
  while (e--)
    r *= b;
  return r;
}

inline std::vector<int> trim(std::vector<int> a)
{
  while (!a.empty() && a.back() == 0)
    a.pop_back();
  return a;
}

inline std::vector<int> mul(int p, const std::vector<int>& a, const std::vector<int>& b)
{
  if (a.empty() || b.empty())
    return {};
  std::vector<int> c(a.size() + b.size() - 1, 0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j)
      c[i + j] = (c[i + j] + a[i] * b[j]) % p;
  return trim(c);
}

inline std::vector<int> monic(int p, unsigned d, std::uint64_t index)
{
  std::vector<int> c(d + 1, 0);
  for (unsigned i = 0; i < d; ++i) {
    c[i] = static_cast<int>(index % p);
    index /= p;
  }
  c[d] = 1;
  return c;
}

inline std::uint64_t code(int p, const std::vector<int>& a)
{
  std::uint64_t c = 0;
  for (auto it = a.rbegin(); it != a.rend(); ++it)
    c = c * p + *it;
  return c;
}

/// Remainder of a modulo monic b.
inline std::vector<int> rem_monic(int p, std::vector<int> a, const std::vector<int>& b)
{
  a = trim(a);
  while (a.size() >= b.size()) {
    int lead = a.back();
    std::size_t shift = a.size() - b.size();
    for (std::size_t i = 0; i < b.size(); ++i)
      a[i + shift] = ((a[i + shift] - lead * b[i]) % p + p) % p;
    a = trim(a);
  }
  return a;
}

/// Trial division of a monic f by every monic polynomial of degree 1..deg/2.
inline bool irreducible_by_trial_division(int p, const std::vector<int>& f)
{
  const unsigned d = static_cast<unsigned>(f.size() - 1);
  for (unsigned e = 1; 2 * e <= d; ++e)
    for (std::uint64_t i = 0; i < ipow(p, e); ++i)
      if (rem_monic(p, f, monic(p, e, i)).empty())
        return false;
  return d >= 1;
}

/// Counts monic irreducibles of degree d by marking every product of two
/// monic polynomials of positive degree.
inline std::uint64_t count_irreducibles_by_sieve(int p, unsigned d)
{
  const std::uint64_t n = ipow(p, d);
  std::vector<bool> reducible(n, false);
  for (unsigned a = 1; 2 * a <= d; ++a)
    for (std::uint64_t i = 0; i < ipow(p, a); ++i) {
      auto u = monic(p, a, i);
      for (std::uint64_t j = 0; j < ipow(p, d - a); ++j) {
        auto w = mul(p, u, monic(p, d - a, j));
        reducible[code(p, w) - n] = true;
      }
    }
  std::uint64_t count = 0;
  for (bool r : reducible)
    count += !r;
  return count;
}

/// |SL_2(F_q)|
inline std::uint64_t sl2_order(std::uint64_t q) { return q * (q * q - 1); }

// Number of walks of the given length on the free group on M letters that
// reduce to the empty word, by enumeration of all letter sequences.
inline std::uint64_t returning_walks_by_enumeration(unsigned M, unsigned steps)
{
  std::uint64_t total = 1, hits = 0;
  for (unsigned i = 0; i < steps; ++i)
    total *= 2 * M;
  for (std::uint64_t code = 0; code < total; ++code) {
    std::vector<unsigned> stack;
    std::uint64_t c = code;
    for (unsigned i = 0; i < steps; ++i) {
      unsigned letter = c % (2 * M);
      c /= 2 * M;
      if (!stack.empty() && (stack.back() ^ 1u) == letter)
        stack.pop_back();
      else
        stack.push_back(letter);
    }
    hits += stack.empty();
  }
  return hits;
}

inline std::uint64_t reduced_words_by_dfs(unsigned M, unsigned len, int last = -1)
{
  if (len == 0)
    return 1;
  std::uint64_t n = 0;
  for (unsigned l = 0; l < 2 * M; ++l)
    if (last < 0 || (unsigned(last) ^ 1u) != l)
      n += reduced_words_by_dfs(M, len - 1, int(l));
  return n;
}

/// Walks of `steps` steps on the 2M-regular tree that end at the root, by
/// dynamic programming on the distance to the root.
inline boost::multiprecision::cpp_int returning_walks_by_distance(unsigned M, unsigned steps)
{
  std::vector<boost::multiprecision::cpp_int> count(steps + 2, 0);
  count[0] = 1;
  for (unsigned s = 0; s < steps; ++s) {
    std::vector<boost::multiprecision::cpp_int> next(steps + 2, 0);
    for (unsigned d = 0; d <= s && d + 1 < count.size(); ++d) {
      if (count[d] == 0)
        continue;
      next[d + 1] += count[d] * (d == 0 ? 2 * M : 2 * M - 1);
      if (d > 0)
        next[d - 1] += count[d];
    }
    count.swap(next);
  }
  return count[0];
}

/// Size of the largest (D_0..D_{n-1})-regular subset of `points` (coordinate
/// tuples, factor 0 first) over all profiles with each D_i = 1 or
/// D_i > orders[i]^delta, by trying every profile.
inline std::size_t max_regular_subset(std::vector<std::vector<unsigned>> points, const std::vector<unsigned>& orders,
                                      double delta)
{
  std::sort(points.begin(), points.end());
  const std::size_t n = orders.size();
  std::vector<unsigned> D(n, 1);
  // feasible(lo, hi, level): the points in [lo, hi) share a prefix of length level.
  std::function<bool(std::size_t, std::size_t, std::size_t)> feasible = [&](std::size_t lo, std::size_t hi,
                                                                           std::size_t level) {
    if (level == n)
      return true;
    unsigned good = 0;
    for (std::size_t i = lo; i < hi && good < D[level];) {
      std::size_t j = i;
      while (j < hi && points[j][level] == points[i][level])
        ++j;
      good += feasible(i, j, level + 1);
      i = j;
    }
    return good >= D[level];
  };
  std::size_t best = 0;
  std::function<void(std::size_t, std::size_t)> sweep = [&](std::size_t level, std::size_t size) {
    if (level == n) {
      if (size > best && feasible(0, points.size(), 0))
        best = size;
      return;
    }
    for (unsigned d = 1; d <= orders[level]; ++d)
      if (d == 1 || d > std::pow(double(orders[level]), delta)) {
        D[level] = d;
        sweep(level + 1, size * d);
      }
    D[level] = 1;
  };
  sweep(0, 1);
  return best;
}

}  // namespace oracle
