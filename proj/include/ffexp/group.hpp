#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "ffexp/matrix.hpp"
#include "ffexp/modulus.hpp"

namespace ffexp {

/// Dense element id; 0 is always the identity.
using Id = std::uint32_t;

/// A finite group with elements labelled 0..order()-1.
class FiniteGroup {
 public:
  virtual ~FiniteGroup() = default;
  virtual std::size_t order() const = 0;
  virtual Id mul(Id a, Id b) const = 0;
  virtual Id inv(Id a) const = 0;
  static constexpr Id identity() { return 0; }
  /// Content hash of the group together with its labelling.
  virtual std::string hash() const = 0;
  virtual std::string describe() const = 0;

  /// s*x for every x.
  std::vector<Id> left_mul_table(Id s) const;
  /// x*s for every x.
  std::vector<Id> right_mul_table(Id s) const;
  Id pow(Id a, std::uint64_t e) const;
  Id element_order(Id a) const;
  Id conj(Id g, Id x) const { return mul(mul(g, x), inv(g)); }
};

/// Group with a full multiplication table (small orders only).
class TabulatedGroup : public FiniteGroup {
 public:
  /// Tabulates any group of order <= 20000.
  static TabulatedGroup from(const FiniteGroup& g);
  /// Z/n with id k representing k.
  static TabulatedGroup cyclic(std::uint32_t n);

  std::size_t order() const override { return n_; }
  Id mul(Id a, Id b) const override { return table_[std::size_t{a} * n_ + b]; }
  Id inv(Id a) const override { return inv_[a]; }
  std::string hash() const override { return hash_; }
  std::string describe() const override { return describe_; }

 private:
  TabulatedGroup() = default;
  void finish();

  std::uint32_t n_ = 0;
  std::vector<Id> table_;
  std::vector<Id> inv_;
  std::string hash_;
  std::string describe_;
};

/// Direct product of finite groups; ids are mixed-radix with factor 0 least significant.
class ProductGroup : public FiniteGroup {
 public:
  explicit ProductGroup(std::vector<std::shared_ptr<const FiniteGroup>> factors);

  std::size_t order() const override { return order_; }
  Id mul(Id a, Id b) const override;
  Id inv(Id a) const override;
  std::string hash() const override;
  std::string describe() const override;

  std::size_t num_factors() const { return factors_.size(); }
  const FiniteGroup& factor(std::size_t i) const { return *factors_[i]; }
  std::shared_ptr<const FiniteGroup> factor_ptr(std::size_t i) const { return factors_[i]; }
  Id encode(const std::vector<Id>& parts) const;
  std::vector<Id> decode(Id a) const;
  Id project(Id a, std::size_t i) const { return static_cast<Id>((a / stride_[i]) % factors_[i]->order()); }

 private:
  std::vector<std::shared_ptr<const FiniteGroup>> factors_;
  std::vector<std::size_t> stride_;
  std::size_t order_ = 1;
};

struct BudgetExceeded : std::runtime_error {
  BudgetExceeded(const std::string& what, std::size_t reached_size)
      : std::runtime_error(what), reached(reached_size)
  {
  }
  std::size_t reached;
};

constexpr std::size_t kDefaultGroupCap = 20'000'000;

/// A matrix group enumerated by breadth-first closure. Multiplication is
/// computed on demand from the canonical forms.
class GroupEnum : public FiniteGroup {
 public:
  /// Closure of the generators under right multiplication. Throws
  /// BudgetExceeded when more than `cap` elements are reached.
  static GroupEnum generate(std::shared_ptr<const MatAlgebra> algebra, const std::vector<Mat>& gens, Quotient q,
                            std::size_t cap = kDefaultGroupCap);
  /// Rebuilds an enumeration from stored canonical keys (identity first).
  static GroupEnum from_keys(std::shared_ptr<const MatAlgebra> algebra, std::vector<std::uint64_t> keys,
                             std::vector<Mat> gens, Quotient q);

  std::size_t order() const override { return keys_.size(); }
  Id mul(Id a, Id b) const override;
  Id inv(Id a) const override { return inv_[a]; }
  std::string hash() const override { return hash_; }
  std::string describe() const override;

  const MatAlgebra& algebra() const { return *alg_; }
  std::shared_ptr<const MatAlgebra> algebra_ptr() const { return alg_; }
  const QuotientRing& ring() const { return alg_->ring(); }
  Quotient quotient() const { return q_; }
  Mat element(Id a) const { return alg_->decode(keys_[a]); }
  std::uint64_t key(Id a) const { return keys_[a]; }
  const std::vector<std::uint64_t>& keys() const { return keys_; }
  /// Looks up the class of m (canonicalized first).
  std::optional<Id> find(const Mat& m) const;
  Id id_of(const Mat& m) const;
  const std::vector<Mat>& generators() const { return gens_; }
  std::vector<Id> generator_ids() const;

 private:
  GroupEnum() = default;
  void index();

  std::shared_ptr<const MatAlgebra> alg_;
  Quotient q_ = Quotient::Linear;
  std::vector<Mat> gens_;
  std::vector<std::uint64_t> keys_;
  std::unordered_map<std::uint64_t, Id> ids_;
  std::vector<Id> inv_;
  std::string hash_;
};

/// prod over factors l of N(l)(N(l)^2 - 1).
std::uint64_t sl2_order(const Modulus& f);

}  // namespace ffexp
