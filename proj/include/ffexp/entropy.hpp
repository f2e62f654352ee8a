#pragma once

#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ffexp/measure.hpp"

namespace ffexp {

/// Entropies in nats.
struct EntropyReport {
  double h0 = 0, h = 0, h2 = 0, hinf = 0;
};

/// Entropies of a probability vector (zeros are ignored).
EntropyReport entropy(const std::vector<double>& probs);

template <class P>
EntropyReport entropy(const Measure<P>& mu)
{
  std::vector<double> p;
  mu.for_each([&](Id, const P& w) { p.push_back(to_double(w)); });
  return entropy(p);
}

/// Joint law of (X, Y): p[x][y].
struct JointLaw {
  std::vector<std::vector<double>> p;

  std::size_t rows() const { return p.size(); }
  std::size_t cols() const { return p.empty() ? 0 : p.front().size(); }
  std::vector<double> marginal_x() const;
  std::vector<double> marginal_y() const;
  std::vector<double> flat() const;
  JointLaw transposed() const;
};

/// Joint law of the two coordinates of a measure on G1 x G2.
JointLaw joint_from_product(const Measure<double>& mu, const ProductGroup& g);

struct ConditionalEntropy {
  double h = 0, h2 = 0;
};

/// H(X|Y) and H_2(X|Y), both averaged over P(Y = y).
ConditionalEntropy conditional_entropy_x_given_y(const JointLaw& j);

/// Randomized check of the basic entropy inequalities.
struct EntropyLawsReport {
  std::size_t trials = 0;
  double tolerance = 0;
  /// Failure counts by law name.
  std::map<std::string, std::size_t> failures;
  /// Smallest slack seen per law (negative means violated).
  std::map<std::string, double> min_slack;
  bool passed() const;
};

/// Random joints on supports up to max_side x max_side; the product bound
/// uses independent X, Y on `group` with supports of size <= max_side.
EntropyLawsReport entropy_laws(std::shared_ptr<const FiniteGroup> group, std::size_t trials, std::size_t max_side,
                               std::mt19937_64& rng, double tolerance = 1e-9);

void to_json(nlohmann::json& j, const EntropyReport& r);
void to_json(nlohmann::json& j, const EntropyLawsReport& r);

}  // namespace ffexp
