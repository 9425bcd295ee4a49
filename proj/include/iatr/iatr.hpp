#pragma once

// Instance-based adaptive template reconstruction.
//
// Training (phase 1) rebuilds each class's instances dimension by dimension,
// keeping the K elements that lie farthest (mean L1) from the other classes.
// Matching (phase 2) couples the intermediate templates of one candidate class
// with the query vectors, keeping per dimension the F template elements and S
// query elements that lie closest to each other. Decisions use Euclidean
// distance between the reconstructed vectors and a majority vote over the S
// reconstructed queries.
//
// All class, instance and dimension indices are zero-based.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "iatr/matrix.hpp"
#include "iatr/training_set.hpp"

namespace iatr {

/// d̄[n] is an I(n) x L matrix of mean between-class element distances.
using MeanDistances = std::vector<Matrix>;

/// Mean over other classes m != n of the mean |T[n][i][l] - T[m][j][l]| over j.
/// Throws InsufficientClasses when N < 2.
MeanDistances elementwise_mean_distance(const TrainingSet& train);

struct IntermediateTemplateSet {
  std::vector<std::string> labels;
  std::size_t k = 0;
  std::vector<Matrix> templates;                      // [n]: rows x L
  std::vector<std::vector<std::size_t>> provenance;   // [n]: rows x L, source instance index
  std::optional<MeanDistances> score_cache;

  std::size_t num_classes() const noexcept { return templates.size(); }
  std::size_t dim() const noexcept { return templates.empty() ? 0 : templates.front().cols(); }
  std::size_t template_count(std::size_t n) const { return templates.at(n).rows(); }
  std::size_t source_index(std::size_t n, std::size_t row, std::size_t l) const {
    return provenance[n][row * dim() + l];
  }

  /// Structural checks: shapes agree, provenance within a (class, dim) is distinct.
  void validate() const;
};

/// Throws InsufficientClasses (N < 2) or BadK (K outside [1, min I(n)]).
IntermediateTemplateSet phase1_reconstruct(const TrainingSet& train, std::size_t k);

/// Same as above, reusing precomputed mean distances (e.g. across a K sweep).
IntermediateTemplateSet phase1_reconstruct(const TrainingSet& train, const MeanDistances& mean_distances,
                                           std::size_t k);

/// Wraps the raw instances as templates (identity provenance). Used to run
/// phase 2 without phase 1.
IntermediateTemplateSet identity_templates(const TrainingSet& train);

/// K = round(p / 100 * min I(n)), clamped to [1, min I(n)].
std::size_t k_from_percent(double p_percent, std::size_t min_instances);

/// Default retention: two thirds of the smallest class.
std::size_t default_k(std::size_t min_instances);

struct Phase2Pair {
  std::size_t candidate_class = 0;
  Matrix templates;                          // F x L
  Matrix queries;                            // S x L
  std::vector<std::size_t> template_source;  // F x L, row of the intermediate template set
  std::vector<std::size_t> query_source;     // S x L, row of the query set
};

/// Throws BadF / BadS when F or S is out of range, UnknownClass for a bad n.
Phase2Pair phase2_reconstruct(const IntermediateTemplateSet& tpl, const QuerySet& query, std::size_t n,
                              std::size_t f, std::size_t s);

struct ClassificationResult {
  std::size_t predicted = 0;
  std::vector<std::size_t> votes;   // one winning class per reconstructed query
  std::vector<double> class_scores; // min over s of the class's match distance
  std::vector<double> mean_scores;  // mean over s, used for vote tie-breaks
};

ClassificationResult classify(const IntermediateTemplateSet& tpl, const QuerySet& query, std::size_t f,
                              std::size_t s);

/// Distance of the query to the claimed class after phase 2; lower is more genuine.
double verification_score(const IntermediateTemplateSet& tpl, const QuerySet& query, std::size_t claimed,
                          std::size_t f, std::size_t s);

/// Most frequent label. Ties go to the smaller tie_scores entry, then the
/// smaller index. Throws EmptyVotes / UnknownClass.
std::size_t majority_vote(std::span<const std::size_t> votes, std::span<const double> tie_scores);

}  // namespace iatr
