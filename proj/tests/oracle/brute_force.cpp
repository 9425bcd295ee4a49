#include "brute_force.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "iatr/error.hpp"

namespace iatr::oracle {
namespace {

// position of element i when ordering by key with "before(a, b)" and index tie-break
template <typename Before>
std::vector<std::size_t> rank_positions(const std::vector<double>& key, Before before) {
  std::vector<std::size_t> order(key.size());
  for (std::size_t i = 0; i < key.size(); ++i) {
    std::size_t rank = 0;
    for (std::size_t j = 0; j < key.size(); ++j)
      if (before(key[j], key[i]) || (key[j] == key[i] && j < i)) ++rank;
    order[rank] = i;
  }
  return order;
}

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void fail(SuiteReport& r, std::size_t trial, const std::string& what) {
  if (r.failures++ == 0) r.first_failure = "trial " + std::to_string(trial) + ": " + what;
}

bool same(const Matrix& a, const Matrix& b) { return a == b; }

}  // namespace

MeanDistances mean_distance(const TrainingSet& train) {
  MeanDistances out;
  for (std::size_t n = 0; n < train.num_classes(); ++n) {
    const Matrix& own = train.classes[n];
    Matrix dbar(own.rows(), own.cols());
    for (std::size_t i = 0; i < own.rows(); ++i) {
      for (std::size_t l = 0; l < own.cols(); ++l) {
        std::vector<double> per_class;
        for (std::size_t m = 0; m < train.num_classes(); ++m) {
          if (m == n) continue;
          std::vector<double> d;
          for (std::size_t j = 0; j < train.instances(m); ++j) d.push_back(std::abs(own(i, l) - train.classes[m](j, l)));
          per_class.push_back(std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(d.size()));
        }
        dbar(i, l) = std::accumulate(per_class.begin(), per_class.end(), 0.0) / static_cast<double>(per_class.size());
      }
    }
    out.push_back(std::move(dbar));
  }
  return out;
}

double exact_mean_distance(const TrainingSet& train, std::size_t n, std::size_t i, std::size_t l) {
  // sum_m S_m / I(m) over (N-1): scale every term by the product of class sizes
  long long denom = 1;
  for (std::size_t m = 0; m < train.num_classes(); ++m)
    if (m != n) denom *= static_cast<long long>(train.instances(m));
  long long numer = 0;
  const auto x = static_cast<long long>(train.classes[n](i, l));
  for (std::size_t m = 0; m < train.num_classes(); ++m) {
    if (m == n) continue;
    long long sum = 0;
    for (std::size_t j = 0; j < train.instances(m); ++j) sum += std::llabs(x - static_cast<long long>(train.classes[m](j, l)));
    numer += sum * (denom / static_cast<long long>(train.instances(m)));
  }
  return static_cast<double>(numer) / static_cast<double>(denom * static_cast<long long>(train.num_classes() - 1));
}

namespace {

// Grid values as exact integers (value * 2^20).
long long grid_units(double v) {
  const double scaled = std::ldexp(v, 20);
  if (scaled != std::floor(scaled) || std::abs(scaled) > 1e15)
    throw Error(ErrorCode::InvalidInput, "oracle phase 1 needs values on the 2^-20 grid");
  return static_cast<long long>(scaled);
}

}  // namespace

IntermediateTemplateSet phase1(const TrainingSet& train, std::size_t k) {
  // Rank on the exact integer d̄ * (N - 1) * prod I(m); the common positive
  // factor does not change the order.
  long long product = 1;
  for (const auto& c : train.classes) product *= static_cast<long long>(c.rows());
  IntermediateTemplateSet out;
  out.labels = train.labels;
  out.k = k;
  const std::size_t dims = train.dim();
  for (std::size_t n = 0; n < train.num_classes(); ++n) {
    Matrix kept(k, dims);
    std::vector<std::size_t> source(k * dims);
    for (std::size_t l = 0; l < dims; ++l) {
      std::vector<double> key(train.instances(n));
      for (std::size_t i = 0; i < key.size(); ++i) {
        const long long x = grid_units(train.classes[n](i, l));
        long long total = 0;
        for (std::size_t m = 0; m < train.num_classes(); ++m) {
          if (m == n) continue;
          long long sum = 0;
          for (std::size_t j = 0; j < train.instances(m); ++j) sum += std::llabs(x - grid_units(train.classes[m](j, l)));
          total += sum * (product / static_cast<long long>(train.instances(m)));
        }
        key[i] = static_cast<double>(total);  // < 2^53 for the oracle's case sizes
      }
      const auto order = rank_positions(key, [](double a, double b) { return a > b; });
      for (std::size_t r = 0; r < k; ++r) {
        kept(r, l) = train.classes[n](order[r], l);
        source[r * dims + l] = order[r];
      }
    }
    out.templates.push_back(std::move(kept));
    out.provenance.push_back(std::move(source));
  }
  return out;
}

Phase2Pair phase2(const IntermediateTemplateSet& tpl, const QuerySet& query, std::size_t n, std::size_t f,
                  std::size_t s) {
  const Matrix& t = tpl.templates[n];
  const Matrix& q = query.vectors;
  const std::size_t dims = t.cols();
  Phase2Pair pair;
  pair.candidate_class = n;
  pair.templates = Matrix(f, dims);
  pair.queries = Matrix(s, dims);
  pair.template_source.resize(f * dims);
  pair.query_source.resize(s * dims);
  for (std::size_t l = 0; l < dims; ++l) {
    std::vector<std::vector<double>> table(t.rows(), std::vector<double>(q.rows()));
    for (std::size_t i = 0; i < t.rows(); ++i)
      for (std::size_t r = 0; r < q.rows(); ++r) table[i][r] = std::abs(t(i, l) - q(r, l));
    std::vector<double> a(t.rows()), b(q.rows());
    for (std::size_t i = 0; i < t.rows(); ++i) a[i] = *std::min_element(table[i].begin(), table[i].end());
    for (std::size_t r = 0; r < q.rows(); ++r) {
      b[r] = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < t.rows(); ++i) b[r] = std::min(b[r], table[i][r]);
    }
    const auto less = [](double x, double y) { return x < y; };
    const auto ta = rank_positions(a, less);
    const auto qb = rank_positions(b, less);
    for (std::size_t row = 0; row < f; ++row) {
      pair.templates(row, l) = t(ta[row], l);
      pair.template_source[row * dims + l] = ta[row];
    }
    for (std::size_t row = 0; row < s; ++row) {
      pair.queries(row, l) = q(qb[row], l);
      pair.query_source[row * dims + l] = qb[row];
    }
  }
  return pair;
}

ClassificationResult classify(const IntermediateTemplateSet& tpl, const QuerySet& query, std::size_t f,
                              std::size_t s) {
  const std::size_t classes = tpl.num_classes();
  std::vector<std::vector<double>> m(classes, std::vector<double>(s));
  for (std::size_t n = 0; n < classes; ++n) {
    const auto pair = phase2(tpl, query, n, f, s);
    for (std::size_t q = 0; q < s; ++q) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t t = 0; t < f; ++t) {
        double sq = 0.0;
        for (std::size_t l = 0; l < pair.templates.cols(); ++l) {
          const double d = pair.templates(t, l) - pair.queries(q, l);
          sq += d * d;
        }
        best = std::min(best, std::sqrt(sq));
      }
      m[n][q] = best;
    }
  }
  ClassificationResult res;
  std::vector<std::size_t> counts(classes, 0);
  for (std::size_t q = 0; q < s; ++q) {
    std::size_t best = 0;
    for (std::size_t n = 0; n < classes; ++n)
      if (m[n][q] < m[best][q]) best = n;
    res.votes.push_back(best);
    ++counts[best];
  }
  for (std::size_t n = 0; n < classes; ++n) {
    res.class_scores.push_back(*std::min_element(m[n].begin(), m[n].end()));
    res.mean_scores.push_back(std::accumulate(m[n].begin(), m[n].end(), 0.0) / static_cast<double>(s));
  }
  const std::size_t top = *std::max_element(counts.begin(), counts.end());
  std::size_t winner = classes;
  for (std::size_t n = 0; n < classes; ++n) {
    if (counts[n] != top) continue;
    if (winner == classes || res.mean_scores[n] < res.mean_scores[winner]) winner = n;
  }
  res.predicted = winner;
  return res;
}

RandomCase random_case(std::mt19937_64& rng, std::size_t max_classes, std::size_t max_instances,
                       std::size_t max_dim, bool integer_values) {
  const auto pick = [&](std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
  };
  // "continuous" values sit on a 2^-20 grid in [-10, 10] so every sum of
  // distances is exact in double precision for both the oracle and the library
  std::uniform_int_distribution<long long> grid(-10LL << 20, 10LL << 20);
  std::uniform_int_distribution<int> small(0, 4);
  const auto value = [&] {
    return integer_values ? static_cast<double>(small(rng)) : std::ldexp(static_cast<double>(grid(rng)), -20);
  };

  RandomCase c;
  const std::size_t classes = pick(2, max_classes);
  const std::size_t dims = pick(1, max_dim);
  for (std::size_t n = 0; n < classes; ++n) {
    Matrix block(pick(1, max_instances), dims);
    for (double& v : block.values()) v = value();
    c.train.labels.push_back("c" + std::to_string(n));
    c.train.classes.push_back(std::move(block));
  }
  c.query.vectors = Matrix(pick(1, 5), dims);
  for (double& v : c.query.vectors.values()) v = value();
  c.k = pick(1, c.train.min_instances());
  c.f = pick(1, c.k);
  c.s = pick(1, c.query.size());
  return c;
}

SuiteReport phase1_equivalence(std::size_t trials, std::uint64_t seed) {
  SuiteReport r;
  r.name = "phase1 oracle equivalence";
  const Timer timer;
  std::mt19937_64 rng(seed);
  for (std::size_t t = 0; t < trials; ++t, ++r.trials) {
    const auto c = random_case(rng, 4, 6, 5, t % 2 == 0);
    const auto got = phase1_reconstruct(c.train, c.k);
    const auto want = phase1(c.train, c.k);
    for (std::size_t n = 0; n < c.train.num_classes(); ++n) {
      if (!same(got.templates[n], want.templates[n]) || got.provenance[n] != want.provenance[n]) {
        fail(r, t, "class " + std::to_string(n) + " differs from brute force");
        break;
      }
    }
  }
  r.seconds = timer.seconds();
  return r;
}

SuiteReport phase2_equivalence(std::size_t trials, std::uint64_t seed) {
  SuiteReport r;
  r.name = "phase2 oracle equivalence + first-pair minimality";
  const Timer timer;
  std::mt19937_64 rng(seed);
  for (std::size_t t = 0; t < trials; ++t, ++r.trials) {
    const auto c = random_case(rng, 4, 6, 5, t % 2 == 0);
    const auto tpl = phase1(c.train, c.k);
    bool ok = true;
    for (std::size_t n = 0; n < tpl.num_classes() && ok; ++n) {
      const auto got = phase2_reconstruct(tpl, c.query, n, c.f, c.s);
      const auto want = phase2(tpl, c.query, n, c.f, c.s);
      if (!same(got.templates, want.templates) || !same(got.queries, want.queries) ||
          got.template_source != want.template_source || got.query_source != want.query_source) {
        fail(r, t, "class " + std::to_string(n) + " pair differs from brute force");
        ok = false;
        break;
      }
      const auto first = phase2_reconstruct(tpl, c.query, n, 1, 1);
      for (std::size_t l = 0; l < tpl.dim(); ++l) {
        double global = std::numeric_limits<double>::infinity();
        std::size_t minimisers = 0;
        for (std::size_t i = 0; i < tpl.template_count(n); ++i) {
          for (std::size_t q = 0; q < c.query.size(); ++q) {
            const double d = std::abs(tpl.templates[n](i, l) - c.query.vectors(q, l));
            if (d < global) global = d, minimisers = 0;
            if (d == global) ++minimisers;
          }
        }
        // With several minimising pairs the per-axis index tie-breaks may pick
        // a template and a query that are not each other's partner.
        if (minimisers > 1) {
          ++r.skipped;
          continue;
        }
        ++r.checked;
        if (std::abs(first.templates(0, l) - first.queries(0, l)) != global) {
          fail(r, t, "first pair is not the global minimum in dim " + std::to_string(l));
          ok = false;
          break;
        }
      }
    }
    if (ok) {
      const auto got = iatr::classify(tpl, c.query, c.f, c.s);
      const auto want = oracle::classify(tpl, c.query, c.f, c.s);
      if (got.votes != want.votes || got.predicted != want.predicted || got.class_scores != want.class_scores)
        fail(r, t, "classification differs from brute force");
    }
  }
  r.seconds = timer.seconds();
  return r;
}

SuiteReport bounding_and_provenance(std::size_t trials, std::uint64_t seed) {
  SuiteReport r;
  r.name = "bounding box and provenance";
  const Timer timer;
  std::mt19937_64 rng(seed);
  for (std::size_t t = 0; t < trials; ++t, ++r.trials) {
    const auto c = random_case(rng, 4, 6, 5, t % 2 == 0);
    const auto tpl = phase1_reconstruct(c.train, c.k);
    std::string problem;
    try {
      tpl.validate();
    } catch (const Error& e) {
      problem = e.what();
    }
    for (std::size_t n = 0; n < tpl.num_classes() && problem.empty(); ++n) {
      const Matrix& src = c.train.classes[n];
      for (std::size_t l = 0; l < tpl.dim() && problem.empty(); ++l) {
        double lo = src(0, l), hi = src(0, l);
        for (std::size_t i = 0; i < src.rows(); ++i) lo = std::min(lo, src(i, l)), hi = std::max(hi, src(i, l));
        for (std::size_t k = 0; k < tpl.template_count(n); ++k) {
          const double v = tpl.templates[n](k, l);
          if (v < lo || v > hi) problem = "phase-1 element outside class bounding box";
          if (v != src(tpl.source_index(n, k, l), l)) problem = "phase-1 element is not its source element";
        }
      }
      const auto pair = phase2_reconstruct(tpl, c.query, n, c.f, c.s);
      for (std::size_t l = 0; l < tpl.dim() && problem.empty(); ++l) {
        for (std::size_t f = 0; f < c.f; ++f)
          if (pair.templates(f, l) != tpl.templates[n](pair.template_source[f * tpl.dim() + l], l))
            problem = "phase-2 template element is not a copy of T'";
        for (std::size_t s = 0; s < c.s; ++s)
          if (pair.queries(s, l) != c.query.vectors(pair.query_source[s * tpl.dim() + l], l))
            problem = "phase-2 query element is not a copy of Q";
        std::vector<std::size_t> ts, qs;
        for (std::size_t f = 0; f < c.f; ++f) ts.push_back(pair.template_source[f * tpl.dim() + l]);
        for (std::size_t s = 0; s < c.s; ++s) qs.push_back(pair.query_source[s * tpl.dim() + l]);
        std::sort(ts.begin(), ts.end());
        std::sort(qs.begin(), qs.end());
        if (std::adjacent_find(ts.begin(), ts.end()) != ts.end() ||
            std::adjacent_find(qs.begin(), qs.end()) != qs.end())
          problem = "phase-2 provenance repeats an element";
      }
    }
    if (!problem.empty()) fail(r, t, problem);
  }
  r.seconds = timer.seconds();
  return r;
}

namespace {

struct Affine {
  std::vector<double> scale, shift;
};

Affine random_affine(std::mt19937_64& rng, std::size_t dims, bool shared_scale) {
  std::uniform_real_distribution<double> a(0.25, 4.0), b(-20.0, 20.0);
  Affine t;
  const double common = a(rng);
  for (std::size_t l = 0; l < dims; ++l) {
    t.scale.push_back(shared_scale ? common : a(rng));
    t.shift.push_back(b(rng));
  }
  return t;
}

void apply(Matrix& m, const Affine& t) {
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t l = 0; l < m.cols(); ++l) m(r, l) = t.scale[l] * m(r, l) + t.shift[l];
}

RandomCase transformed(const RandomCase& c, const Affine& t) {
  RandomCase out = c;
  for (auto& m : out.train.classes) apply(m, t);
  apply(out.query.vectors, t);
  return out;
}

}  // namespace

SuiteReport affine_invariance(std::size_t trials, std::uint64_t seed, bool shared_scale) {
  SuiteReport r;
  r.name = shared_scale ? "affine invariance (shared scale)" : "affine invariance (per-dimension scale)";
  const Timer timer;
  std::mt19937_64 rng(seed);
  for (std::size_t t = 0; t < trials; ++t, ++r.trials) {
    const auto c = random_case(rng, 4, 6, 5, false);
    const auto moved = transformed(c, random_affine(rng, c.train.dim(), shared_scale));
    const auto before = iatr::classify(phase1_reconstruct(c.train, c.k), c.query, c.f, c.s);
    const auto after = iatr::classify(phase1_reconstruct(moved.train, moved.k), moved.query, moved.f, moved.s);
    if (before.votes != after.votes || before.predicted != after.predicted)
      fail(r, t, "votes or label changed under the transform");
  }
  r.seconds = timer.seconds();
  return r;
}

SuiteReport affine_selection_invariance(std::size_t trials, std::uint64_t seed) {
  SuiteReport r;
  r.name = "affine invariance of selections (per-dimension scale)";
  const Timer timer;
  std::mt19937_64 rng(seed);
  for (std::size_t t = 0; t < trials; ++t, ++r.trials) {
    const auto c = random_case(rng, 4, 6, 5, false);
    const auto moved = transformed(c, random_affine(rng, c.train.dim(), false));
    const auto a = phase1_reconstruct(c.train, c.k);
    const auto b = phase1_reconstruct(moved.train, moved.k);
    bool ok = a.provenance == b.provenance;
    for (std::size_t n = 0; ok && n < a.num_classes(); ++n) {
      const auto pa = phase2_reconstruct(a, c.query, n, c.f, c.s);
      const auto pb = phase2_reconstruct(b, moved.query, n, c.f, c.s);
      ok = pa.template_source == pb.template_source && pa.query_source == pb.query_source;
    }
    if (!ok) fail(r, t, "selection indices changed under the transform");
  }
  r.seconds = timer.seconds();
  return r;
}

}  // namespace iatr::oracle
