#pragma once

// Evaluation protocols and biometric metrics: contiguous cross-validation,
// identification (CMC), verification (DET/EER), the k-NN baseline, the
// retention sweep and the cross-session ageing experiment.

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "iatr/iatr.hpp"
#include "iatr/training_set.hpp"

namespace iatr {

enum class Metric { L1, L2 };

/// Identification methods compared throughout. Phase2Only runs phase 2 over
/// the raw instances; Phase1Only matches query vectors to the nearest
/// intermediate template.
enum class Method { OneNN, Phase1Only, Phase2Only, Full };

const char* to_string(Method m) noexcept;
Method method_from_string(const std::string& name);
inline constexpr Method kAllMethods[] = {Method::OneNN, Method::Phase1Only, Method::Phase2Only, Method::Full};

struct MethodParams {
  std::optional<std::size_t> k;       // explicit K wins over p_percent
  std::optional<double> p_percent;
  std::size_t f = 4;
  std::size_t s = 4;
  std::size_t knn_k = 1;
  Metric knn_metric = Metric::L2;

  std::size_t resolve_k(const TrainingSet& train) const;
};

struct Decision {
  std::size_t predicted = 0;
  std::vector<double> class_scores;  // lower = better match
};

/// Majority label of the k nearest training vectors for every query vector,
/// then a majority over query vectors. class_scores[n] is the smallest
/// distance from any query vector to class n.
Decision knn_classify(const TrainingSet& train, const QuerySet& query, std::size_t k, Metric metric);

/// A method trained on one training set.
class Identifier {
 public:
  Identifier(Method method, const MethodParams& params, const TrainingSet& train);
  /// Reuses phase-1 mean distances computed for `train`.
  Identifier(Method method, const MethodParams& params, const TrainingSet& train, const MeanDistances& cache);

  Decision decide(const QuerySet& query) const;
  Method method() const noexcept { return method_; }
  const IntermediateTemplateSet& templates() const noexcept { return templates_; }

 private:
  void build(const MeanDistances* cache);

  Method method_;
  MethodParams params_;
  TrainingSet train_;
  IntermediateTemplateSet templates_;
  TrainingSet template_train_;
};

struct Fold {
  TrainingSet train;
  std::vector<Matrix> held_out;  // per class, contiguous block
};

/// Splits each class into `folds` contiguous blocks of (near) equal length;
/// fold f holds out block f. Throws TooFewWindows when a class has fewer
/// instances than folds.
std::vector<Fold> contiguous_folds(const TrainingSet& data, std::size_t folds);
std::vector<Fold> three_fold_cv(const TrainingSet& data);

struct Query {
  std::size_t true_class = 0;
  QuerySet vectors;
};

/// Consecutive non-overlapping chunks of query_size vectors per class; a
/// trailing partial chunk is dropped. Throws TooFewWindows if a class yields none.
std::vector<Query> chunk_queries(const std::vector<Matrix>& per_class, std::size_t query_size);

/// Same over a session, mapping its labels onto the class indices of `enrolled`.
std::vector<Query> chunk_queries(const TrainingSet& session, const TrainingSet& enrolled, std::size_t query_size);

struct IdentificationRun {
  std::vector<std::size_t> truth;
  std::vector<std::size_t> predicted;
  std::vector<std::vector<double>> scores;  // [query][class]

  double accuracy() const;
  void append(const IdentificationRun& other);
};

IdentificationRun run_identification(const Identifier& model, const std::vector<Query>& queries);

IdentificationRun cross_validate(const TrainingSet& data, std::size_t folds, std::size_t query_size, Method method,
                                 const MethodParams& params);

struct CmcCurve {
  std::vector<double> hit_rate;  // hit_rate[k - 1] is the rank-k rate
};

/// Rank of the true class counts classes with a strictly smaller score, or an
/// equal score and smaller index, ahead of it.
CmcCurve cmc_curve(const std::vector<std::vector<double>>& scores, std::span<const std::size_t> truth);

struct DetReport {
  std::vector<double> thresholds;  // ascending
  std::vector<double> far;
  std::vector<double> frr;
  double eer = 0.0;
};

/// Accept iff score <= threshold. Sweeps min - eps, every unique score and
/// max + eps. The EER interpolates linearly where FAR - FRR changes sign.
/// Throws EmptyScores.
DetReport det_and_eer(std::span<const double> genuine, std::span<const double> impostor);

struct VerificationTrials {
  std::vector<double> genuine;
  std::vector<double> impostor;
};

/// Closed-set all-vs-all: each query gives one genuine and N-1 impostor scores.
VerificationTrials verification_trials(const IdentificationRun& run);

struct SweepTable {
  std::vector<double> p_percent;
  std::vector<std::size_t> k;
  std::vector<double> accuracy;
};

struct SweepOptions {
  std::size_t folds = 3;
  std::size_t query_size = 1;
};

/// Phase-1-only accuracy under contiguous cross-validation for each retention
/// percentage; K = round(P/100 * min I(n)) of each fold's training set.
SweepTable sweep_p(const TrainingSet& data, std::span<const double> grid, const SweepOptions& opts);

struct AgeingParams {
  MethodParams method;
  std::size_t single_session_folds = 5;
  std::size_t query_size = 5;
};

struct AgeingRow {
  Method method = Method::OneNN;
  double single_session = 0.0;  // within-session CV, averaged over both sessions
  double multi_session = 0.0;   // train on one session, query the other, both orders averaged
};

struct AgeingTable {
  std::vector<AgeingRow> rows;
};

/// Throws InvalidInput unless both sessions hold the same class labels.
AgeingTable ageing_experiment(const TrainingSet& session1, const TrainingSet& session2, const AgeingParams& params);

void write_cmc_csv(std::ostream& out, const CmcCurve& cmc);
void write_det_csv(std::ostream& out, const DetReport& det);
void write_sweep_csv(std::ostream& out, const SweepTable& sweep);
void write_ageing_csv(std::ostream& out, const AgeingTable& table);

}  // namespace iatr
