#include "iatr/iatr.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <set>

#include "iatr/error.hpp"

namespace iatr {
namespace {

void require_two_classes(const TrainingSet& train) {
  if (train.num_classes() < 2)
    throw Error(ErrorCode::InsufficientClasses,
                "phase 1 needs at least two classes, got " + std::to_string(train.num_classes()));
}

// Indices 0..count-1 ordered by key, stable so equal keys keep index order.
template <typename Less>
std::vector<std::size_t> stable_order(std::span<const double> key, Less less) {
  std::vector<std::size_t> idx(key.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return less(key[a], key[b]); });
  return idx;
}

}  // namespace

MeanDistances elementwise_mean_distance(const TrainingSet& train) {
  train.validate();
  require_two_classes(train);
  const std::size_t classes = train.num_classes();
  const std::size_t dims = train.dim();

  // Work with key = d̄ * (N - 1) * W, W a common multiple of the class sizes:
  //   key(x) = sum_m (W / I(m)) * sum_j |x - v_mj| = A * x + B,
  // where A = sum_m (W / I(m)) * (2 p_m - I(m)) is an exact integer and p_m
  // counts values <= x. Where the distance profile is flat A is exactly zero,
  // so mathematically equal distances stay bitwise equal and ties resolve by index.
  std::uint64_t weight = 1;
  for (const auto& c : train.classes) {
    weight = std::lcm(weight, static_cast<std::uint64_t>(c.rows()));
    if (weight > (std::uint64_t{1} << 20)) break;
  }
  const bool exact_weights = weight <= (std::uint64_t{1} << 20);

  struct Column {
    std::vector<double> sorted;
    std::vector<double> prefix;  // prefix[p] = sum of the p smallest
    std::vector<double> suffix;  // suffix[p] = sum of the rest
  };
  std::vector<std::vector<Column>> columns(classes, std::vector<Column>(dims));
  for (std::size_t m = 0; m < classes; ++m) {
    const Matrix& c = train.classes[m];
    for (std::size_t l = 0; l < dims; ++l) {
      Column& col = columns[m][l];
      for (std::size_t j = 0; j < c.rows(); ++j) col.sorted.push_back(c(j, l));
      std::sort(col.sorted.begin(), col.sorted.end());
      const std::size_t count = col.sorted.size();
      col.prefix.assign(count + 1, 0.0);
      col.suffix.assign(count + 1, 0.0);
      for (std::size_t p = 0; p < count; ++p) col.prefix[p + 1] = col.prefix[p] + col.sorted[p];
      for (std::size_t p = count; p-- > 0;) col.suffix[p] = col.suffix[p + 1] + col.sorted[p];
    }
  }

  MeanDistances out;
  out.reserve(classes);
  const double others = static_cast<double>(classes - 1);
  for (std::size_t n = 0; n < classes; ++n) {
    const Matrix& own = train.classes[n];
    Matrix dbar(own.rows(), dims, 0.0);
    for (std::size_t i = 0; i < own.rows(); ++i) {
      for (std::size_t l = 0; l < dims; ++l) {
        const double x = own(i, l);
        std::int64_t slope = 0;
        double offset = 0.0;
        double inexact = 0.0;
        for (std::size_t m = 0; m < classes; ++m) {
          if (m == n) continue;
          const Column& col = columns[m][l];
          const auto count = static_cast<std::int64_t>(col.sorted.size());
          const auto p = std::upper_bound(col.sorted.begin(), col.sorted.end(), x) - col.sorted.begin();
          const double rest = col.suffix[static_cast<std::size_t>(p)] - col.prefix[static_cast<std::size_t>(p)];
          if (exact_weights) {
            const auto w = static_cast<std::int64_t>(weight) / count;
            slope += w * (2 * p - count);
            offset += static_cast<double>(w) * rest;
          } else {
            inexact += (static_cast<double>(2 * p - count) * x + rest) / static_cast<double>(count);
          }
        }
        dbar(i, l) = exact_weights
                         ? (static_cast<double>(slope) * x + offset) / (static_cast<double>(weight) * others)
                         : inexact / others;
      }
    }
    out.push_back(std::move(dbar));
  }
  return out;
}

void IntermediateTemplateSet::validate() const {
  if (templates.empty()) throw Error(ErrorCode::InvalidInput, "template set has no classes");
  if (labels.size() != templates.size() || provenance.size() != templates.size())
    throw Error(ErrorCode::InvalidInput, "template set label/provenance count mismatch");
  const std::size_t l = dim();
  for (std::size_t n = 0; n < templates.size(); ++n) {
    const Matrix& t = templates[n];
    if (t.rows() == 0 || t.cols() != l)
      throw Error(ErrorCode::InvalidInput, "template block for class '" + labels[n] + "' is malformed");
    if (provenance[n].size() != t.rows() * l)
      throw Error(ErrorCode::InvalidInput, "provenance block for class '" + labels[n] + "' is malformed");
    if (!t.all_finite()) throw Error(ErrorCode::InvalidInput, "non-finite template values");
    for (std::size_t d = 0; d < l; ++d) {
      std::set<std::size_t> seen;
      for (std::size_t r = 0; r < t.rows(); ++r)
        if (!seen.insert(source_index(n, r, d)).second)
          throw Error(ErrorCode::InvalidInput, "repeated provenance index in class '" + labels[n] + "'");
    }
  }
}

IntermediateTemplateSet phase1_reconstruct(const TrainingSet& train, std::size_t k) {
  return phase1_reconstruct(train, elementwise_mean_distance(train), k);
}

IntermediateTemplateSet phase1_reconstruct(const TrainingSet& train, const MeanDistances& mean_distances,
                                           std::size_t k) {
  train.validate();
  require_two_classes(train);
  const std::size_t max_k = train.min_instances();
  if (k < 1 || k > max_k)
    throw Error(ErrorCode::BadK, "K=" + std::to_string(k) + " outside [1, " + std::to_string(max_k) + "]");
  if (mean_distances.size() != train.num_classes())
    throw Error(ErrorCode::InvalidInput, "mean distance cache does not match training set");

  const std::size_t dims = train.dim();
  IntermediateTemplateSet out;
  out.labels = train.labels;
  out.k = k;
  out.score_cache = mean_distances;
  for (std::size_t n = 0; n < train.num_classes(); ++n) {
    const Matrix& own = train.classes[n];
    const Matrix& dbar = mean_distances[n];
    if (dbar.rows() != own.rows() || dbar.cols() != dims)
      throw Error(ErrorCode::InvalidInput, "mean distance cache shape mismatch");
    Matrix kept(k, dims);
    std::vector<std::size_t> source(k * dims);
    std::vector<double> column(own.rows());
    for (std::size_t l = 0; l < dims; ++l) {
      for (std::size_t i = 0; i < own.rows(); ++i) column[i] = dbar(i, l);
      const auto order = stable_order(column, std::greater<>{});
      for (std::size_t r = 0; r < k; ++r) {
        kept(r, l) = own(order[r], l);
        source[r * dims + l] = order[r];
      }
    }
    out.templates.push_back(std::move(kept));
    out.provenance.push_back(std::move(source));
  }
  return out;
}

IntermediateTemplateSet identity_templates(const TrainingSet& train) {
  train.validate();
  IntermediateTemplateSet out;
  out.labels = train.labels;
  out.k = train.min_instances();
  const std::size_t dims = train.dim();
  for (const auto& c : train.classes) {
    std::vector<std::size_t> source(c.rows() * dims);
    for (std::size_t r = 0; r < c.rows(); ++r)
      for (std::size_t l = 0; l < dims; ++l) source[r * dims + l] = r;
    out.templates.push_back(c);
    out.provenance.push_back(std::move(source));
  }
  return out;
}

std::size_t k_from_percent(double p_percent, std::size_t min_instances) {
  if (!(p_percent > 0.0) || p_percent > 100.0)
    throw Error(ErrorCode::BadK, "retention percentage must lie in (0, 100]");
  const auto k = static_cast<std::size_t>(std::llround(p_percent / 100.0 * static_cast<double>(min_instances)));
  return std::clamp<std::size_t>(k, 1, std::max<std::size_t>(min_instances, 1));
}

std::size_t default_k(std::size_t min_instances) { return k_from_percent(200.0 / 3.0, min_instances); }

Phase2Pair phase2_reconstruct(const IntermediateTemplateSet& tpl, const QuerySet& query, std::size_t n,
                              std::size_t f, std::size_t s) {
  if (n >= tpl.num_classes()) throw Error(ErrorCode::UnknownClass, "class index " + std::to_string(n));
  const std::size_t dims = tpl.dim();
  query.validate(dims);
  const Matrix& t = tpl.templates[n];
  const Matrix& q = query.vectors;
  if (f < 1 || f > t.rows())
    throw Error(ErrorCode::BadF, "F=" + std::to_string(f) + " outside [1, " + std::to_string(t.rows()) + "]");
  if (s < 1 || s > q.rows())
    throw Error(ErrorCode::BadS, "S=" + std::to_string(s) + " outside [1, " + std::to_string(q.rows()) + "]");

  Phase2Pair pair;
  pair.candidate_class = n;
  pair.templates = Matrix(f, dims);
  pair.queries = Matrix(s, dims);
  pair.template_source.resize(f * dims);
  pair.query_source.resize(s * dims);

  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> to_query(t.rows());   // min over r
  std::vector<double> to_template(q.rows()); // min over i
  for (std::size_t l = 0; l < dims; ++l) {
    std::fill(to_query.begin(), to_query.end(), inf);
    std::fill(to_template.begin(), to_template.end(), inf);
    for (std::size_t i = 0; i < t.rows(); ++i) {
      for (std::size_t r = 0; r < q.rows(); ++r) {
        const double d = std::abs(t(i, l) - q(r, l));
        to_query[i] = std::min(to_query[i], d);
        to_template[r] = std::min(to_template[r], d);
      }
    }
    const auto tpl_order = stable_order(to_query, std::less<>{});
    const auto qry_order = stable_order(to_template, std::less<>{});
    for (std::size_t row = 0; row < f; ++row) {
      pair.templates(row, l) = t(tpl_order[row], l);
      pair.template_source[row * dims + l] = tpl_order[row];
    }
    for (std::size_t row = 0; row < s; ++row) {
      pair.queries(row, l) = q(qry_order[row], l);
      pair.query_source[row * dims + l] = qry_order[row];
    }
  }
  return pair;
}

namespace {

// m(s) = min_f ||T''[f] - Q'[s]||_2 for every reconstructed query s.
std::vector<double> match_distances(const Phase2Pair& pair) {
  std::vector<double> out(pair.queries.rows(), std::numeric_limits<double>::infinity());
  for (std::size_t s = 0; s < pair.queries.rows(); ++s)
    for (std::size_t f = 0; f < pair.templates.rows(); ++f)
      out[s] = std::min(out[s], l2_distance(pair.templates.row(f), pair.queries.row(s)));
  return out;
}

}  // namespace

ClassificationResult classify(const IntermediateTemplateSet& tpl, const QuerySet& query, std::size_t f,
                              std::size_t s) {
  const std::size_t classes = tpl.num_classes();
  if (classes == 0) throw Error(ErrorCode::InvalidInput, "template set has no classes");

  // distances[n][s]
  std::vector<std::vector<double>> distances(classes);
  for (std::size_t n = 0; n < classes; ++n)
    distances[n] = match_distances(phase2_reconstruct(tpl, query, n, f, s));

  ClassificationResult result;
  result.class_scores.resize(classes);
  result.mean_scores.resize(classes);
  for (std::size_t n = 0; n < classes; ++n) {
    const auto& d = distances[n];
    result.class_scores[n] = *std::min_element(d.begin(), d.end());
    result.mean_scores[n] = std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(d.size());
  }
  result.votes.resize(s);
  for (std::size_t q = 0; q < s; ++q) {
    std::size_t best = 0;
    for (std::size_t n = 1; n < classes; ++n)
      if (distances[n][q] < distances[best][q]) best = n;
    result.votes[q] = best;
  }
  result.predicted = majority_vote(result.votes, result.mean_scores);
  return result;
}

double verification_score(const IntermediateTemplateSet& tpl, const QuerySet& query, std::size_t claimed,
                          std::size_t f, std::size_t s) {
  if (claimed >= tpl.num_classes())
    throw Error(ErrorCode::UnknownClass, "claimed class index " + std::to_string(claimed));
  const auto d = match_distances(phase2_reconstruct(tpl, query, claimed, f, s));
  return *std::min_element(d.begin(), d.end());
}

std::size_t majority_vote(std::span<const std::size_t> votes, std::span<const double> tie_scores) {
  if (votes.empty()) throw Error(ErrorCode::EmptyVotes, "no votes to count");
  std::vector<std::size_t> counts(tie_scores.size(), 0);
  for (std::size_t v : votes) {
    if (v >= counts.size()) throw Error(ErrorCode::UnknownClass, "vote for class " + std::to_string(v));
    ++counts[v];
  }
  std::size_t best = votes.front();
  for (std::size_t n = 0; n < counts.size(); ++n) {
    if (counts[n] > counts[best] || (counts[n] == counts[best] && counts[n] > 0 &&
                                     (tie_scores[n] < tie_scores[best] ||
                                      (tie_scores[n] == tie_scores[best] && n < best))))
      best = n;
  }
  return best;
}

}  // namespace iatr
