#include "iatr/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <set>

#include "iatr/error.hpp"
#include "iatr/text_io.hpp"

namespace iatr {

const char* to_string(Method m) noexcept {
  switch (m) {
    case Method::OneNN: return "1nn";
    case Method::Phase1Only: return "phase1";
    case Method::Phase2Only: return "phase2";
    case Method::Full: return "iatr";
  }
  return "unknown";
}

Method method_from_string(const std::string& name) {
  for (Method m : kAllMethods)
    if (name == to_string(m)) return m;
  throw Error(ErrorCode::BadConfig, "unknown method '" + name + "' (expected 1nn, phase1, phase2 or iatr)");
}

std::size_t MethodParams::resolve_k(const TrainingSet& train) const {
  const std::size_t max_k = train.min_instances();
  if (k) {
    if (*k < 1 || *k > max_k)
      throw Error(ErrorCode::BadK, "K=" + std::to_string(*k) + " outside [1, " + std::to_string(max_k) + "]");
    return *k;
  }
  if (p_percent) return k_from_percent(*p_percent, max_k);
  return default_k(max_k);
}

Decision knn_classify(const TrainingSet& train, const QuerySet& query, std::size_t k, Metric metric) {
  train.validate();
  query.validate(train.dim());
  const std::size_t total = train.total_instances();
  if (k < 1 || k > total)
    throw Error(ErrorCode::BadConfig, "k=" + std::to_string(k) + " outside [1, " + std::to_string(total) + "]");
  const std::size_t classes = train.num_classes();
  const auto dist = [metric](std::span<const double> a, std::span<const double> b) {
    return metric == Metric::L1 ? l1_distance(a, b) : l2_distance(a, b);
  };

  Decision out;
  out.class_scores.assign(classes, std::numeric_limits<double>::infinity());
  std::vector<std::size_t> per_vector;
  std::vector<double> d(total);
  std::vector<std::size_t> owner(total);
  for (std::size_t r = 0; r < query.size(); ++r) {
    std::vector<double> nearest(classes, std::numeric_limits<double>::infinity());
    std::size_t e = 0;
    for (std::size_t n = 0; n < classes; ++n) {
      const Matrix& c = train.classes[n];
      for (std::size_t i = 0; i < c.rows(); ++i, ++e) {
        d[e] = dist(c.row(i), query.vectors.row(r));
        owner[e] = n;
        nearest[n] = std::min(nearest[n], d[e]);
      }
    }
    std::vector<std::size_t> order(total);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return d[a] < d[b]; });
    std::vector<std::size_t> votes(k);
    for (std::size_t j = 0; j < k; ++j) votes[j] = owner[order[j]];
    per_vector.push_back(majority_vote(votes, nearest));
    for (std::size_t n = 0; n < classes; ++n) out.class_scores[n] = std::min(out.class_scores[n], nearest[n]);
  }
  out.predicted = majority_vote(per_vector, out.class_scores);
  return out;
}

Identifier::Identifier(Method method, const MethodParams& params, const TrainingSet& train)
    : method_(method), params_(params), train_(train) {
  build(nullptr);
}

Identifier::Identifier(Method method, const MethodParams& params, const TrainingSet& train,
                       const MeanDistances& cache)
    : method_(method), params_(params), train_(train) {
  build(&cache);
}

void Identifier::build(const MeanDistances* cache) {
  train_.validate();
  switch (method_) {
    case Method::OneNN:
      break;
    case Method::Phase2Only:
      templates_ = identity_templates(train_);
      break;
    case Method::Phase1Only:
    case Method::Full: {
      const std::size_t k = params_.resolve_k(train_);
      templates_ = cache ? phase1_reconstruct(train_, *cache, k) : phase1_reconstruct(train_, k);
      templates_.score_cache.reset();
      if (method_ == Method::Phase1Only) template_train_ = TrainingSet{templates_.labels, templates_.templates};
      break;
    }
  }
}

Decision Identifier::decide(const QuerySet& query) const {
  switch (method_) {
    case Method::OneNN:
      return knn_classify(train_, query, params_.knn_k, params_.knn_metric);
    case Method::Phase1Only:
      return knn_classify(template_train_, query, 1, Metric::L2);
    case Method::Phase2Only:
    case Method::Full: {
      auto r = classify(templates_, query, params_.f, params_.s);
      return {r.predicted, std::move(r.class_scores)};
    }
  }
  throw Error(ErrorCode::InvariantViolation, "unhandled method");
}

std::vector<Fold> contiguous_folds(const TrainingSet& data, std::size_t folds) {
  data.validate();
  if (folds < 2) throw Error(ErrorCode::BadConfig, "cross-validation needs at least 2 folds");
  for (std::size_t n = 0; n < data.num_classes(); ++n)
    if (data.instances(n) < folds)
      throw Error(ErrorCode::TooFewWindows, "class '" + data.labels[n] + "' has " +
                                                std::to_string(data.instances(n)) + " windows, need >= " +
                                                std::to_string(folds));
  std::vector<Fold> out(folds);
  for (std::size_t f = 0; f < folds; ++f) {
    Fold& fold = out[f];
    fold.train.labels = data.labels;
    for (const Matrix& c : data.classes) {
      const std::size_t lo = f * c.rows() / folds;
      const std::size_t hi = (f + 1) * c.rows() / folds;
      Matrix train;
      Matrix held;
      for (std::size_t i = 0; i < c.rows(); ++i) (i >= lo && i < hi ? held : train).append_row(c.row(i));
      fold.train.classes.push_back(std::move(train));
      fold.held_out.push_back(std::move(held));
    }
  }
  return out;
}

std::vector<Fold> three_fold_cv(const TrainingSet& data) { return contiguous_folds(data, 3); }

std::vector<Query> chunk_queries(const std::vector<Matrix>& per_class, std::size_t query_size) {
  if (query_size < 1) throw Error(ErrorCode::BadConfig, "query size must be >= 1");
  std::vector<Query> out;
  for (std::size_t n = 0; n < per_class.size(); ++n) {
    const Matrix& c = per_class[n];
    const std::size_t chunks = c.rows() / query_size;
    if (chunks == 0)
      throw Error(ErrorCode::TooFewWindows, "class index " + std::to_string(n) + " has " +
                                                std::to_string(c.rows()) + " query windows, need " +
                                                std::to_string(query_size));
    for (std::size_t q = 0; q < chunks; ++q) {
      Query query{n, {}};
      for (std::size_t r = 0; r < query_size; ++r) query.vectors.vectors.append_row(c.row(q * query_size + r));
      out.push_back(std::move(query));
    }
  }
  return out;
}

std::vector<Query> chunk_queries(const TrainingSet& session, const TrainingSet& enrolled, std::size_t query_size) {
  std::vector<Matrix> per_class(enrolled.num_classes());
  for (std::size_t n = 0; n < session.num_classes(); ++n) {
    const auto target = enrolled.find_class(session.labels[n]);
    if (!target) throw Error(ErrorCode::UnknownClass, "query class '" + session.labels[n] + "' is not enrolled");
    per_class[*target] = session.classes[n];
  }
  std::vector<Matrix> present;
  std::vector<std::size_t> index;
  for (std::size_t n = 0; n < per_class.size(); ++n) {
    if (per_class[n].empty()) continue;
    present.push_back(per_class[n]);
    index.push_back(n);
  }
  auto out = chunk_queries(present, query_size);
  for (auto& q : out) q.true_class = index[q.true_class];
  return out;
}

double IdentificationRun::accuracy() const {
  if (truth.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t q = 0; q < truth.size(); ++q) hits += truth[q] == predicted[q];
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

void IdentificationRun::append(const IdentificationRun& other) {
  truth.insert(truth.end(), other.truth.begin(), other.truth.end());
  predicted.insert(predicted.end(), other.predicted.begin(), other.predicted.end());
  scores.insert(scores.end(), other.scores.begin(), other.scores.end());
}

IdentificationRun run_identification(const Identifier& model, const std::vector<Query>& queries) {
  IdentificationRun run;
  for (const auto& q : queries) {
    auto d = model.decide(q.vectors);
    run.truth.push_back(q.true_class);
    run.predicted.push_back(d.predicted);
    run.scores.push_back(std::move(d.class_scores));
  }
  return run;
}

IdentificationRun cross_validate(const TrainingSet& data, std::size_t folds, std::size_t query_size, Method method,
                                 const MethodParams& params) {
  IdentificationRun all;
  for (const auto& fold : contiguous_folds(data, folds)) {
    const Identifier model(method, params, fold.train);
    all.append(run_identification(model, chunk_queries(fold.held_out, query_size)));
  }
  return all;
}

CmcCurve cmc_curve(const std::vector<std::vector<double>>& scores, std::span<const std::size_t> truth) {
  if (scores.empty() || scores.size() != truth.size())
    throw Error(ErrorCode::EmptyScores, "CMC needs one score list per query");
  const std::size_t classes = scores.front().size();
  std::vector<std::size_t> rank_counts(classes, 0);
  for (std::size_t q = 0; q < scores.size(); ++q) {
    const auto& s = scores[q];
    if (s.size() != classes || truth[q] >= classes)
      throw Error(ErrorCode::InvalidInput, "CMC score lists must cover every class");
    const double own = s[truth[q]];
    std::size_t ahead = 0;
    for (std::size_t n = 0; n < classes; ++n)
      if (s[n] < own || (s[n] == own && n < truth[q])) ++ahead;
    ++rank_counts[ahead];
  }
  CmcCurve cmc;
  std::size_t cumulative = 0;
  for (std::size_t r = 0; r < classes; ++r) {
    cumulative += rank_counts[r];
    cmc.hit_rate.push_back(static_cast<double>(cumulative) / static_cast<double>(scores.size()));
  }
  return cmc;
}

DetReport det_and_eer(std::span<const double> genuine, std::span<const double> impostor) {
  if (genuine.empty() || impostor.empty())
    throw Error(ErrorCode::EmptyScores, "DET needs genuine and impostor scores");
  std::vector<double> g(genuine.begin(), genuine.end());
  std::vector<double> im(impostor.begin(), impostor.end());
  for (double v : g)
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidInput, "non-finite genuine score");
  for (double v : im)
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidInput, "non-finite impostor score");
  std::sort(g.begin(), g.end());
  std::sort(im.begin(), im.end());

  std::vector<double> unique;
  std::merge(g.begin(), g.end(), im.begin(), im.end(), std::back_inserter(unique));
  unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
  const double lo = unique.front();
  const double hi = unique.back();
  const double eps = 1e-9 * std::max({1.0, std::abs(lo), std::abs(hi), hi - lo});

  DetReport det;
  det.thresholds.push_back(lo - eps);
  det.thresholds.insert(det.thresholds.end(), unique.begin(), unique.end());
  det.thresholds.push_back(hi + eps);
  for (double t : det.thresholds) {
    const auto accepted_impostors = std::upper_bound(im.begin(), im.end(), t) - im.begin();
    const auto accepted_genuine = std::upper_bound(g.begin(), g.end(), t) - g.begin();
    det.far.push_back(static_cast<double>(accepted_impostors) / static_cast<double>(im.size()));
    det.frr.push_back(1.0 - static_cast<double>(accepted_genuine) / static_cast<double>(g.size()));
  }

  // FAR - FRR is non-decreasing in the threshold, from -1 to +1.
  for (std::size_t j = 0; j < det.thresholds.size(); ++j) {
    const double diff = det.far[j] - det.frr[j];
    if (diff < 0.0) continue;
    if (diff == 0.0 || j == 0) {
      det.eer = det.far[j];
    } else {
      const double prev = det.far[j - 1] - det.frr[j - 1];
      const double alpha = -prev / (diff - prev);
      det.eer = det.far[j - 1] + alpha * (det.far[j] - det.far[j - 1]);
    }
    break;
  }
  return det;
}

VerificationTrials verification_trials(const IdentificationRun& run) {
  VerificationTrials trials;
  for (std::size_t q = 0; q < run.truth.size(); ++q) {
    const auto& s = run.scores[q];
    for (std::size_t n = 0; n < s.size(); ++n) (n == run.truth[q] ? trials.genuine : trials.impostor).push_back(s[n]);
  }
  return trials;
}

SweepTable sweep_p(const TrainingSet& data, std::span<const double> grid, const SweepOptions& opts) {
  if (grid.empty()) throw Error(ErrorCode::BadConfig, "retention grid is empty");
  for (double p : grid)
    if (!(p > 0.0 && p <= 100.0)) throw Error(ErrorCode::BadConfig, "retention percentages must lie in (0, 100]");
  SweepTable table;
  table.p_percent.assign(grid.begin(), grid.end());
  std::vector<std::size_t> hits(grid.size(), 0);
  std::size_t total = 0;
  bool first = true;
  for (const auto& fold : contiguous_folds(data, opts.folds)) {
    const auto cache = elementwise_mean_distance(fold.train);
    const auto queries = chunk_queries(fold.held_out, opts.query_size);
    total += queries.size();
    for (std::size_t g = 0; g < grid.size(); ++g) {
      MethodParams params;
      params.k = k_from_percent(grid[g], fold.train.min_instances());
      if (first) table.k.push_back(*params.k);
      const Identifier model(Method::Phase1Only, params, fold.train, cache);
      const auto run = run_identification(model, queries);
      for (std::size_t q = 0; q < run.truth.size(); ++q) hits[g] += run.truth[q] == run.predicted[q];
    }
    first = false;
  }
  for (std::size_t h : hits) table.accuracy.push_back(static_cast<double>(h) / static_cast<double>(total));
  return table;
}

AgeingTable ageing_experiment(const TrainingSet& session1, const TrainingSet& session2, const AgeingParams& params) {
  session1.validate();
  session2.validate();
  const std::set<std::string> a(session1.labels.begin(), session1.labels.end());
  const std::set<std::string> b(session2.labels.begin(), session2.labels.end());
  if (a != b) throw Error(ErrorCode::InvalidInput, "sessions must enroll the same classes");

  AgeingTable table;
  for (Method m : kAllMethods) {
    AgeingRow row{m, 0.0, 0.0};
    row.single_session =
        0.5 * (cross_validate(session1, params.single_session_folds, params.query_size, m, params.method).accuracy() +
               cross_validate(session2, params.single_session_folds, params.query_size, m, params.method).accuracy());
    const auto cross = [&](const TrainingSet& enrol, const TrainingSet& probe) {
      const Identifier model(m, params.method, enrol);
      return run_identification(model, chunk_queries(probe, enrol, params.query_size)).accuracy();
    };
    row.multi_session = 0.5 * (cross(session1, session2) + cross(session2, session1));
    table.rows.push_back(row);
  }
  return table;
}

void write_cmc_csv(std::ostream& out, const CmcCurve& cmc) {
  out << "rank,hit_rate\n";
  for (std::size_t r = 0; r < cmc.hit_rate.size(); ++r)
    out << r + 1 << ',' << text::format_double(cmc.hit_rate[r]) << '\n';
}

void write_det_csv(std::ostream& out, const DetReport& det) {
  out << "threshold,far,frr\n";
  for (std::size_t j = 0; j < det.thresholds.size(); ++j)
    out << text::format_double(det.thresholds[j]) << ',' << text::format_double(det.far[j]) << ','
        << text::format_double(det.frr[j]) << '\n';
}

void write_sweep_csv(std::ostream& out, const SweepTable& sweep) {
  out << "p_percent,accuracy\n";
  for (std::size_t g = 0; g < sweep.p_percent.size(); ++g)
    out << text::format_double(sweep.p_percent[g]) << ',' << text::format_double(sweep.accuracy[g]) << '\n';
}

void write_ageing_csv(std::ostream& out, const AgeingTable& table) {
  out << "method,single_session,multi_session\n";
  for (const auto& row : table.rows)
    out << to_string(row.method) << ',' << text::format_double(row.single_session) << ','
        << text::format_double(row.multi_session) << '\n';
}

}  // namespace iatr
