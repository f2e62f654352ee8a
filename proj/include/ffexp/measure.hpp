#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>
#include <nlohmann/json_fwd.hpp>

#include "ffexp/group.hpp"

namespace ffexp {

using Rational = boost::multiprecision::cpp_rational;

inline double to_double(double x) { return x; }
inline double to_double(const Rational& x) { return x.convert_to<double>(); }

/// Probability measure with finite support on a finite group. Stored densely
/// when at least 5% of the group is in the support, sparsely otherwise.
template <class P>
class Measure {
 public:
  using Entry = std::pair<Id, P>;

  explicit Measure(std::shared_ptr<const FiniteGroup> parent) : parent_(std::move(parent)) {}

  static Measure point(std::shared_ptr<const FiniteGroup> g, Id x) { return from_entries(std::move(g), {{x, P(1)}}); }

  /// Uniform over the list; repeated ids carry proportionally more mass.
  static Measure uniform(std::shared_ptr<const FiniteGroup> g, const std::vector<Id>& xs)
  {
    if (xs.empty())
      throw std::invalid_argument("uniform measure on an empty list");
    std::vector<Entry> e;
    const P w = P(1) / P(static_cast<long long>(xs.size()));
    for (Id x : xs)
      e.emplace_back(x, w);
    return from_entries(std::move(g), std::move(e));
  }

  /// Merges repeated ids; drops zero weights.
  static Measure from_entries(std::shared_ptr<const FiniteGroup> g, std::vector<Entry> e)
  {
    std::vector<P> d(g->order(), P(0));
    for (auto& [x, w] : e) {
      if (x >= g->order())
        throw std::out_of_range("element id outside the group");
      d[x] += w;
    }
    Measure m(std::move(g));
    m.adopt(std::move(d));
    return m;
  }

  static Measure from_dense(std::shared_ptr<const FiniteGroup> g, std::vector<P> d)
  {
    if (d.size() != g->order())
      throw std::invalid_argument("dense vector has the wrong length");
    Measure m(std::move(g));
    m.adopt(std::move(d));
    return m;
  }

  const FiniteGroup& parent() const { return *parent_; }
  const std::shared_ptr<const FiniteGroup>& parent_ptr() const { return parent_; }
  bool is_dense() const { return dense_; }
  std::size_t support_size() const { return support_; }

  P at(Id x) const
  {
    if (dense_)
      return d_[x];
    auto it = std::lower_bound(s_.begin(), s_.end(), x, [](const Entry& e, Id v) { return e.first < v; });
    return it != s_.end() && it->first == x ? it->second : P(0);
  }

  /// Calls f(id, mass) on the support in increasing id order.
  template <class F>
  void for_each(F&& f) const
  {
    if (dense_) {
      for (Id x = 0; x < d_.size(); ++x)
        if (d_[x] != 0)
          f(x, d_[x]);
    } else {
      for (const auto& [x, w] : s_)
        f(x, w);
    }
  }

  std::vector<Entry> entries() const
  {
    std::vector<Entry> out;
    for_each([&](Id x, const P& w) { out.emplace_back(x, w); });
    return out;
  }

  std::vector<P> dense() const
  {
    if (dense_)
      return d_;
    std::vector<P> d(parent_->order(), P(0));
    for (const auto& [x, w] : s_)
      d[x] = w;
    return d;
  }

  P total() const
  {
    P t(0);
    for_each([&](Id, const P& w) { t += w; });
    return t;
  }

  P mass(const std::vector<Id>& set) const
  {
    P t(0);
    for (Id x : set)
      t += at(x);
    return t;
  }

  friend bool operator==(const Measure& a, const Measure& b)
  {
    return a.parent_->hash() == b.parent_->hash() && a.entries() == b.entries();
  }

 private:
  void adopt(std::vector<P> d)
  {
    support_ = 0;
    for (const P& w : d) {
      if (w < 0)
        throw std::invalid_argument("negative mass");
      support_ += w != 0;
    }
    dense_ = support_ * 20 >= d.size();
    if (dense_) {
      d_ = std::move(d);
      s_.clear();
    } else {
      s_.clear();
      for (Id x = 0; x < d.size(); ++x)
        if (d[x] != 0)
          s_.emplace_back(x, std::move(d[x]));
      d_.clear();
    }
  }

  std::shared_ptr<const FiniteGroup> parent_;
  bool dense_ = false;
  std::size_t support_ = 0;
  std::vector<P> d_;
  std::vector<Entry> s_;
};

template <class P>
void require_same_parent(const Measure<P>& a, const Measure<P>& b)
{
  if (a.parent_ptr() != b.parent_ptr() && a.parent().hash() != b.parent().hash())
    throw std::invalid_argument("measures live on different groups");
}

/// (mu * nu)(g) = sum over ab = g of mu(a) nu(b).
template <class P>
Measure<P> convolve(const Measure<P>& mu, const Measure<P>& nu)
{
  require_same_parent(mu, nu);
  const FiniteGroup& g = mu.parent();
  std::vector<P> acc(g.order(), P(0));
  auto nu_e = nu.entries();
  mu.for_each([&](Id a, const P& pa) {
    for (const auto& [b, pb] : nu_e)
      acc[g.mul(a, b)] += pa * pb;
  });
  return Measure<P>::from_dense(mu.parent_ptr(), std::move(acc));
}

/// mu^(l) by repeated squaring.
template <class P>
Measure<P> k_fold(const Measure<P>& mu, std::uint64_t l)
{
  if (l == 0)
    throw std::invalid_argument("k_fold needs l >= 1");
  std::optional<Measure<P>> result;
  Measure<P> base = mu;
  while (true) {
    if (l & 1)
      result = result ? convolve(*result, base) : base;
    l >>= 1;
    if (!l)
      break;
    base = convolve(base, base);
  }
  return *result;
}

/// x -> mu(x^-1).
template <class P>
Measure<P> tilde(const Measure<P>& mu)
{
  std::vector<typename Measure<P>::Entry> e;
  mu.for_each([&](Id x, const P& w) { e.emplace_back(mu.parent().inv(x), w); });
  return Measure<P>::from_entries(mu.parent_ptr(), std::move(e));
}

/// Push-forward along a map into `target`; throws when the map is undefined
/// on the support.
template <class P>
Measure<P> pushforward(const Measure<P>& mu, std::shared_ptr<const FiniteGroup> target,
                       const std::function<std::optional<Id>(Id)>& pi)
{
  std::vector<typename Measure<P>::Entry> e;
  mu.for_each([&](Id x, const P& w) {
    auto y = pi(x);
    if (!y)
      throw std::invalid_argument("map undefined on the support");
    e.emplace_back(*y, w);
  });
  return Measure<P>::from_entries(std::move(target), std::move(e));
}

template <class P>
P l2_squared(const Measure<P>& mu)
{
  P s(0);
  mu.for_each([&](Id, const P& w) { s += w * w; });
  return s;
}

template <class P>
double l2_norm(const Measure<P>& mu)
{
  return std::sqrt(to_double(l2_squared(mu)));
}

/// Right convolution by a fixed measure nu, with one multiplication table
/// per support element of nu.
template <class P>
class StepOperator {
 public:
  explicit StepOperator(const Measure<P>& nu) : parent_(nu.parent_ptr())
  {
    nu.for_each([&](Id b, const P& w) {
      tables_.push_back(parent_->right_mul_table(b));
      weights_.push_back(w);
    });
  }

  Measure<P> apply(const Measure<P>& mu) const
  {
    if (mu.parent_ptr() != parent_ && mu.parent().hash() != parent_->hash())
      throw std::invalid_argument("measures live on different groups");
    std::vector<P> acc(parent_->order(), P(0));
    mu.for_each([&](Id a, const P& pa) {
      for (std::size_t i = 0; i < tables_.size(); ++i)
        acc[tables_[i][a]] += pa * weights_[i];
    });
    return Measure<P>::from_dense(parent_, std::move(acc));
  }

 private:
  std::shared_ptr<const FiniteGroup> parent_;
  std::vector<std::vector<Id>> tables_;
  std::vector<P> weights_;
};

/// {"parent": hash, "masses": {id: probability}}; rationals as "a/b" strings.
void to_json(nlohmann::json& j, const Measure<double>& mu);
void to_json(nlohmann::json& j, const Measure<Rational>& mu);

}  // namespace ffexp
