#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "ffexp/group.hpp"
#include "ffexp/subgroup.hpp"

namespace ffexp {

/// Points of P^1 over a field ring: codes 0..N-1 for affine points and N for infinity.
class ProjectiveLine {
 public:
  explicit ProjectiveLine(const QuotientRing& field) : f_(&field) {}
  std::uint32_t size() const { return f_->size() + 1; }
  std::uint32_t infinity() const { return f_->size(); }
  /// z -> (az + b)/(cz + d) for the matrix [[a,b],[c,d]] with entries in this field.
  std::uint32_t act(Code a, Code b, Code c, Code d, std::uint32_t z) const;

 private:
  const QuotientRing* f_;
};

/// A 2x2 matrix over the field, not necessarily in the parent group.
struct Conjugator {
  Mat g;
  Mat g_inv;
};

struct Classification {
  SubgroupTag tag;
  /// For Structural and Subfield tags: g with g H g^-1 inside the standard model.
  std::optional<Conjugator> conjugator;
};

/// Subgroup classification inside SL_2(F_Q), PSL_2(F_Q) or PGL_2(F_Q) given
/// as a GroupEnum over the field F_Q = F_p[t]/<l>.
class Sl2Classifier {
 public:
  explicit Sl2Classifier(std::shared_ptr<const GroupEnum> parent);

  const GroupEnum& parent() const { return *g_; }
  std::uint64_t field_size() const { return g_->ring().size(); }
  /// Sizes q' < Q of the proper subfields of F_Q.
  std::vector<std::uint64_t> proper_subfields() const;
  /// The fixed non-square used for the non-split torus {[[x, eps y],[y, x]]}.
  Code nonsquare() const { return eps_; }

  /// Standard menu: Borel, split and non-split torus normalizers, center.
  std::vector<SubgroupDesc> structural_menu() const;
  /// Elements with all entries (projectively normalized) in F_q'.
  SubgroupDesc subfield_subgroup(std::uint64_t q_sub) const;

  bool in_borel(const Mat& m) const { return m(1, 0) == 0; }
  bool in_split_normalizer(const Mat& m) const;
  bool in_nonsplit_normalizer(const Mat& m) const;
  /// Normalized class representative has every entry in F_q'.
  bool entries_in_subfield(const Mat& m, std::uint64_t q_sub) const;
  bool is_scalar(const Mat& m) const;

  Classification classify(const SubgroupDesc& h) const;

  /// Orbits of <gens> on P^1(F_{Q^2}); each orbit sorted, list sorted by size.
  std::vector<std::vector<std::uint32_t>> orbits(const std::vector<Id>& gens) const;

  /// Independent check of [PGL_2(F_q'), PGL_2(F_q')] <= Ad(g H g^-1) <= PGL_2(F_q')
  /// by enumerating PGL_2(F_q') and its commutator subgroup.
  bool sandwich_holds(const SubgroupDesc& h, const Conjugator& c, std::uint64_t q_sub) const;

  Mat conjugate(const Conjugator& c, const Mat& m) const;

 private:
  std::optional<Conjugator> subfield_conjugator(const SubgroupDesc& h, std::uint64_t q_sub,
                                                const std::vector<std::vector<std::uint32_t>>& orbs) const;
  std::optional<Conjugator> structural_conjugator(const SubgroupDesc& h, StructuralKind kind,
                                                  const std::vector<std::vector<std::uint32_t>>& orbs) const;
  bool all_conjugates(const SubgroupDesc& h, const Conjugator& c, bool (Sl2Classifier::*pred)(const Mat&) const) const;
  Conjugator from_matrix(const Mat& g) const;
  Mat normalized(const Mat& m) const;
  /// Conjugator in GL_2(F_Q) sending the distinct rational points x, y, z to infinity, 0, 1.
  Mat cross_ratio_map(std::uint32_t x, std::uint32_t y, std::uint32_t z) const;

  std::shared_ptr<const GroupEnum> g_;
  std::shared_ptr<const QuotientRing> big_;
  std::unique_ptr<FieldEmbedding> embed_;
  std::unique_ptr<ProjectiveLine> line_;
  Code eps_ = 0;
  std::size_t center_order_ = 1;
};

/// The subgroup of matrices with entries in F_q' (q' a subfield size of the
/// parent's field); Full tag when q' = Q. Throws std::invalid_argument when
/// F_q' is not a subfield.
SubgroupDesc subfield_subgroup(const Sl2Classifier& c, std::uint64_t q_sub);

}  // namespace ffexp
