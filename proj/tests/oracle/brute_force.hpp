#pragma once

// Brute-force reference implementations and randomized equivalence suites.
// Nothing here calls the selection or matching code it is checked against.

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>

#include "iatr/iatr.hpp"

namespace iatr::oracle {

/// d̄ straight from the definition: a list of per-class means, averaged.
MeanDistances mean_distance(const TrainingSet& train);

/// Exact rational d̄ (integer-valued inputs only) as numerator / denominator.
double exact_mean_distance(const TrainingSet& train, std::size_t n, std::size_t i, std::size_t l);

/// Rank-counting selection: element i lands at position #{j ranked before i}.
IntermediateTemplateSet phase1(const TrainingSet& train, std::size_t k);
Phase2Pair phase2(const IntermediateTemplateSet& tpl, const QuerySet& query, std::size_t n, std::size_t f,
                  std::size_t s);
ClassificationResult classify(const IntermediateTemplateSet& tpl, const QuerySet& query, std::size_t f,
                              std::size_t s);

struct RandomCase {
  TrainingSet train;
  QuerySet query;
  std::size_t k = 1;
  std::size_t f = 1;
  std::size_t s = 1;
};

/// N in [2, max_classes], I(n) in [1, max_instances], L in [1, max_dim].
/// Integer-valued cases (values 0..4) exercise ties; the others draw from a
/// fine dyadic grid.
RandomCase random_case(std::mt19937_64& rng, std::size_t max_classes, std::size_t max_instances,
                       std::size_t max_dim, bool integer_values);

struct SuiteReport {
  std::string name;
  std::size_t trials = 0;
  std::size_t failures = 0;
  std::size_t checked = 0;  // sub-checks run (per suite meaning)
  std::size_t skipped = 0;  // sub-checks not applicable
  double seconds = 0.0;
  std::string first_failure;

  bool passed() const noexcept { return trials > 0 && failures == 0; }
};

SuiteReport phase1_equivalence(std::size_t trials, std::uint64_t seed);
/// Also checks per-dimension |T''[0][l] - Q'[0][l]| against the global pairwise
/// minimum wherever a single pair attains it (`checked` / `skipped` count those).
SuiteReport phase2_equivalence(std::size_t trials, std::uint64_t seed);
/// Bounding box and element provenance of every phase-1 and phase-2 output.
SuiteReport bounding_and_provenance(std::size_t trials, std::uint64_t seed);
/// Per-dimension x -> a_l x + b_l on train and query; compares votes and label.
SuiteReport affine_invariance(std::size_t trials, std::uint64_t seed, bool shared_scale);
/// Phase-1/phase-2 provenance indices under the same transform.
SuiteReport affine_selection_invariance(std::size_t trials, std::uint64_t seed);

}  // namespace iatr::oracle
