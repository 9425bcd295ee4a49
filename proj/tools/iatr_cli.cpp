#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "iatr/edf.hpp"
#include "iatr/error.hpp"
#include "iatr/eval.hpp"
#include "iatr/feature_csv.hpp"
#include "iatr/iatr.hpp"
#include "iatr/signals.hpp"
#include "iatr/synth.hpp"
#include "iatr/template_store.hpp"
#include "iatr/text_io.hpp"
#include "iatr/wpd.hpp"
#include "json.hpp"
#include "oracle/brute_force.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace iatr;

namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::MissingFile, "cannot write " + path.string());
  out << text;
}

template <typename Fn>
void write_with(const fs::path& path, Fn&& fn) {
  std::ostringstream out;
  fn(out);
  write_text(path, out.str());
}

struct Report {
  std::string report_path;

  void emit(const std::string& command, const json& config, json results) const {
    json doc;
    doc["command"] = command;
    doc["config"] = config;
    doc["config_hash"] = hex64(fnv1a(config.dump()));
    doc["results"] = std::move(results);
    const std::string text = doc.dump(2) + "\n";
    if (report_path.empty())
      std::cout << text;
    else
      write_text(report_path, text);
  }
};

// ---------------------------------------------------------------- options

struct MethodOpts {
  std::optional<std::size_t> k;
  std::optional<double> p;
  std::size_t f = 4;
  std::size_t s = 4;
  std::size_t knn_k = 1;
  std::string metric = "l2";

  void add(CLI::App* app, bool with_knn) {
    app->add_option("--k", k, "templates kept per class in phase 1");
    app->add_option("--p", p, "retention percentage, K = round(P/100 * min I)")->excludes("--k");
    app->add_option("--f", f, "template elements kept in phase 2")->capture_default_str();
    app->add_option("--s", s, "query elements kept in phase 2")->capture_default_str();
    if (with_knn) {
      app->add_option("--knn-k", knn_k, "neighbours for the k-NN baseline")->capture_default_str();
      app->add_option("--metric", metric, "k-NN distance")->check(CLI::IsMember({"l1", "l2"}))->capture_default_str();
    }
  }

  MethodParams params() const {
    MethodParams m;
    m.k = k;
    m.p_percent = p;
    m.f = f;
    m.s = s;
    m.knn_k = knn_k;
    m.knn_metric = metric == "l1" ? Metric::L1 : Metric::L2;
    return m;
  }

  json to_json() const {
    json j;
    j["k"] = k ? json(*k) : json(nullptr);
    j["p_percent"] = p ? json(*p) : json(nullptr);
    j["f"] = f;
    j["s"] = s;
    j["knn_k"] = knn_k;
    j["metric"] = metric;
    return j;
  }
};

struct FeatureOpts {
  double window_s = 4.0;
  double overlap = 0.5;
  std::size_t max_windows = 0;
  std::size_t level = 3;
  std::string wavelet = "db4";
  double band_low = 0.0;
  double band_high = 60.0;

  void add(CLI::App* app) {
    app->add_option("--window-s", window_s, "epoch length in seconds")->capture_default_str();
    app->add_option("--overlap", overlap, "epoch overlap fraction in [0, 1)")->capture_default_str();
    app->add_option("--max-windows", max_windows, "keep at most this many epochs per recording, 0 = all")
        ->capture_default_str();
    app->add_option("--level", level, "wavelet packet depth")->capture_default_str();
    app->add_option("--wavelet", wavelet, "haar, db2 ... db6, db8")->capture_default_str();
    app->add_option("--band-low", band_low, "lower band edge in Hz")->capture_default_str();
    app->add_option("--band-high", band_high, "upper band edge in Hz")->capture_default_str();
  }

  json to_json() const {
    return {{"window_s", window_s}, {"overlap", overlap},     {"max_windows", max_windows},
            {"level", level},       {"wavelet", wavelet},     {"band_low_hz", band_low},
            {"band_high_hz", band_high}};
  }
};

struct SynthOpts {
  SynthConfig cfg;

  void add(CLI::App* app) {
    app->add_option("--classes", cfg.num_classes)->capture_default_str();
    app->add_option("--instances", cfg.instances_per_class)->capture_default_str();
    app->add_option("--dim", cfg.dim)->capture_default_str();
    app->add_option("--spread", cfg.class_mean_spread)->capture_default_str();
    app->add_option("--within", cfg.within_class_std)->capture_default_str();
    app->add_option("--drift", cfg.session_drift_std)->capture_default_str();
    app->add_option("--heavy-tail", cfg.heavy_tail_fraction)->capture_default_str();
    app->add_option("--inflation", cfg.covariance_inflation)->capture_default_str();
    app->add_option("--seed", cfg.seed)->capture_default_str();
  }

  json to_json() const {
    return {{"classes", cfg.num_classes},
            {"instances", cfg.instances_per_class},
            {"dim", cfg.dim},
            {"spread", cfg.class_mean_spread},
            {"within", cfg.within_class_std},
            {"drift", cfg.session_drift_std},
            {"heavy_tail", cfg.heavy_tail_fraction},
            {"inflation", cfg.covariance_inflation},
            {"seed", cfg.seed},
            {"model", "synthetic emulation: Gaussian class means, per-class session translation"}};
  }
};

// ---------------------------------------------------------------- helpers

FeatureTable features_for(const LabeledSignalSet& signals, const FeatureOpts& o) {
  FeatureTable table;
  WpdConfig wpd;
  wpd.level = o.level;
  wpd.wavelet = o.wavelet;
  wpd.band_low_hz = o.band_low;
  wpd.band_high_hz = o.band_high;
  for (const auto& sig : signals.entries) {
    EpochConfig epoch{o.window_s, o.overlap, sig.sample_rate_hz};
    auto rows = extract_features(sig.samples, epoch, wpd);
    if (o.max_windows > 0 && rows.size() > o.max_windows) rows.resize(o.max_windows);
    for (std::size_t w = 0; w < rows.size(); ++w)
      table.rows.push_back({sig.class_label, sig.task_label, w, std::move(rows[w])});
  }
  return table;
}

struct QueryGroup {
  std::string class_id;
  std::string recording_id;
  std::size_t first_window = 0;
  QuerySet vectors;
};

// Rows are grouped by (class_id, recording_id); each group is cut into
// consecutive chunks of query_size rows (0 keeps the whole group).
std::vector<QueryGroup> group_queries(const FeatureTable& table, std::size_t query_size) {
  std::vector<std::pair<std::string, std::string>> order;
  std::map<std::pair<std::string, std::string>, std::vector<const FeatureRow*>> groups;
  for (const auto& row : table.rows) {
    auto key = std::make_pair(row.class_id, row.recording_id);
    auto [it, inserted] = groups.try_emplace(key);
    if (inserted) order.push_back(key);
    it->second.push_back(&row);
  }
  std::vector<QueryGroup> out;
  for (const auto& key : order) {
    const auto& rows = groups[key];
    const std::size_t size = query_size == 0 ? rows.size() : query_size;
    for (std::size_t start = 0; start + size <= rows.size(); start += size) {
      QueryGroup g{key.first, key.second, rows[start]->window_index, {Matrix(0, rows.front()->values.size())}};
      for (std::size_t r = start; r < start + size; ++r) g.vectors.vectors.append_row(rows[r]->values);
      out.push_back(std::move(g));
    }
  }
  if (out.empty()) throw Error(ErrorCode::TooFewWindows, "no complete query chunk in the query file");
  return out;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  for (auto& f : text::split_csv(s)) {
    auto t = std::string(text::trim(f));
    if (!t.empty()) out.push_back(t);
  }
  return out;
}

// "1-10", "S001,S004" or "3,7,11"
std::vector<std::string> expand_subjects(const std::vector<std::string>& specs) {
  std::vector<std::string> out;
  for (const auto& spec : specs)
    for (const auto& item : split_list(spec)) {
      const auto dash = item.find('-');
      if (dash == std::string::npos) {
        out.push_back(mmi_subject_id(item));
        continue;
      }
      const auto lo = std::stoul(mmi_subject_id(item.substr(0, dash)).substr(1));
      const auto hi = std::stoul(mmi_subject_id(item.substr(dash + 1)).substr(1));
      if (lo > hi) throw Error(ErrorCode::BadConfig, "empty subject range '" + item + "'");
      for (auto s = lo; s <= hi; ++s) out.push_back(mmi_subject_id(std::to_string(s)));
    }
  return out;
}

std::vector<double> parse_grid(const std::string& s) {
  std::vector<double> out;
  for (const auto& f : split_list(s)) out.push_back(text::parse_double(f, "retention grid"));
  return out;
}

json run_json(const IdentificationRun& run) {
  return {{"queries", run.truth.size()}, {"rank1_accuracy", run.accuracy()}};
}

// ---------------------------------------------------------------- commands

struct ExtractCmd {
  std::string edf_dir, signals_csv, out;
  std::vector<std::string> subjects;
  std::vector<int> runs = {3, 7, 11};
  std::string channel = "Oz";
  FeatureOpts feat;

  void add(CLI::App& app, std::function<void()>& action, Report& rep) {
    auto* c = app.add_subcommand("extract", "signals -> wavelet packet variance features (CSV)");
    auto* edf = c->add_option("--edf-dir", edf_dir, "MM/I root holding S###/S###R##.edf");
    c->add_option("--signals-csv", signals_csv, "labelled signal CSV instead of EDF")->excludes(edf);
    c->add_option("--subject", subjects, "subjects, e.g. S001 or 1-10 (repeatable)");
    c->add_option("--runs", runs, "run numbers")->delimiter(',')->capture_default_str();
    c->add_option("--channel", channel, "channel label (case and trailing dots ignored)")->capture_default_str();
    c->add_option("--out", out, "feature CSV to write")->required();
    feat.add(c);
    c->callback([this, &action, &rep] { action = [this, &rep] { run(rep); }; });
  }

  void run(const Report& rep) const {
    LabeledSignalSet signals;
    json src;
    if (!signals_csv.empty()) {
      signals = load_csv_signals(signals_csv);
      src = {{"signals_csv", signals_csv}};
    } else {
      if (edf_dir.empty()) throw Error(ErrorCode::BadConfig, "extract needs --edf-dir or --signals-csv");
      if (!fs::is_directory(edf_dir)) throw Error(ErrorCode::MissingFile, "no such directory: " + edf_dir);
      const auto ids = expand_subjects(subjects);
      if (ids.empty()) throw Error(ErrorCode::BadConfig, "extract --edf-dir needs --subject");
      for (const auto& id : ids) {
        auto s = load_mmi_subject(edf_dir, id, runs, channel);
        for (auto& e : s.entries) signals.entries.push_back(std::move(e));
      }
      src = {{"edf_dir", edf_dir}, {"subjects", ids}, {"runs", runs}, {"channel", channel}};
    }
    const auto table = features_for(signals, feat);
    save_feature_csv(out, table);
    json cfg = {{"source", src}, {"features", feat.to_json()}, {"out", out}};
    rep.emit("extract", cfg, {{"recordings", signals.entries.size()}, {"rows", table.rows.size()}, {"dim", table.dim()}});
  }
};

struct TrainCmd {
  std::string features, out;
  MethodOpts m;

  void add(CLI::App& app, std::function<void()>& action, Report& rep) {
    auto* c = app.add_subcommand("train", "phase 1: build the intermediate template store");
    c->add_option("--features", features, "feature CSV")->required();
    c->add_option("--out", out, "template store (.json or .csv)")->required();
    c->add_option("--k", m.k, "templates kept per class");
    c->add_option("--p", m.p, "retention percentage")->excludes("--k");
    c->callback([this, &action, &rep] { action = [this, &rep] { run(rep); }; });
  }

  void run(const Report& rep) const {
    const auto train = to_training_set(load_feature_csv(features));
    const std::size_t k = m.params().resolve_k(train);
    const auto tpl = phase1_reconstruct(train, k);
    save_template_store(out, tpl);
    json cfg = {{"features", features}, {"out", out}, {"k", m.k ? json(*m.k) : json(nullptr)},
                {"p_percent", m.p ? json(*m.p) : json(nullptr)}};
    rep.emit("train", cfg,
             {{"k", k}, {"classes", train.num_classes()}, {"min_instances", train.min_instances()}, {"dim", train.dim()}});
  }
};

struct MatchCmd {
  bool verify = false;
  std::string store, queries, emit_det, emit_cmc, claimed;
  std::size_t query_size = 0;
  std::optional<double> threshold;
  MethodOpts m;

  void add(CLI::App& app, std::function<void()>& action, Report& rep, bool is_verify) {
    verify = is_verify;
    auto* c = verify ? app.add_subcommand("verify", "phase 2: score queries against a claimed class")
                     : app.add_subcommand("identify", "phase 2: assign queries to an enrolled class");
    c->add_option("--store", store, "template store from `train`")->required();
    c->add_option("--queries", queries, "query feature CSV")->required();
    c->add_option("--query-size", query_size, "feature vectors per query, 0 = whole recording")->capture_default_str();
    c->add_option("--f", m.f, "template elements kept")->capture_default_str();
    c->add_option("--s", m.s, "query elements kept")->capture_default_str();
    c->add_option("--emit", emit_det, "write the DET table (threshold,far,frr) here");
    if (verify) {
      c->add_option("--claimed", claimed, "claimed class, default: each query's own class_id");
      c->add_option("--threshold", threshold, "accept iff score <= threshold");
    } else {
      c->add_option("--emit-cmc", emit_cmc, "write the CMC table (rank,hit_rate) here");
    }
    c->callback([this, &action, &rep] { action = [this, &rep] { run(rep); }; });
  }

  void run(const Report& rep) const {
    const auto tpl = load_template_store(store);
    const auto groups = group_queries(load_feature_csv(queries), query_size);
    const auto find = [&](const std::string& label) -> std::optional<std::size_t> {
      for (std::size_t n = 0; n < tpl.labels.size(); ++n)
        if (tpl.labels[n] == label) return n;
      return std::nullopt;
    };

    json results = json::array();
    IdentificationRun run;
    for (const auto& g : groups) {
      json q = {{"class_id", g.class_id}, {"recording_id", g.recording_id}, {"first_window", g.first_window},
                {"vectors", g.vectors.size()}};
      const auto truth = find(g.class_id);
      std::optional<ClassificationResult> r;
      if (!verify || (truth && !emit_det.empty())) r = classify(tpl, g.vectors, m.f, m.s);
      if (verify) {
        const std::string& claim = claimed.empty() ? g.class_id : claimed;
        const auto n = find(claim);
        if (!n) throw Error(ErrorCode::UnknownClass, "claimed class '" + claim + "' is not enrolled");
        const double score = verification_score(tpl, g.vectors, *n, m.f, m.s);
        q["claimed"] = claim;
        q["score"] = score;
        if (threshold) q["accepted"] = score <= *threshold;
      } else {
        q["predicted"] = tpl.labels[r->predicted];
        q["votes"] = r->votes;
        q["class_scores"] = r->class_scores;
      }
      if (truth && r) {
        run.truth.push_back(*truth);
        run.predicted.push_back(r->predicted);
        run.scores.push_back(r->class_scores);
      }
      results.push_back(std::move(q));
    }

    json summary = {{"queries", results}};
    if (!run.truth.empty()) {
      summary["enrolled_queries"] = run.truth.size();
      summary["rank1_accuracy"] = run.accuracy();
    }
    if (!emit_det.empty()) {
      if (run.truth.empty()) throw Error(ErrorCode::EmptyScores, "no query belongs to an enrolled class");
      const auto trials = verification_trials(run);
      const auto det = det_and_eer(trials.genuine, trials.impostor);
      write_with(emit_det, [&](std::ostream& o) { write_det_csv(o, det); });
      summary["eer"] = det.eer;
    }
    if (!emit_cmc.empty()) {
      if (run.truth.empty()) throw Error(ErrorCode::EmptyScores, "no query belongs to an enrolled class");
      write_with(emit_cmc, [&](std::ostream& o) { write_cmc_csv(o, cmc_curve(run.scores, run.truth)); });
    }
    json cfg = {{"store", store},       {"queries", queries}, {"query_size", query_size}, {"f", m.f},
                {"s", m.s},             {"emit", emit_det},   {"emit_cmc", emit_cmc},
                {"claimed", claimed},   {"threshold", threshold ? json(*threshold) : json(nullptr)}};
    rep.emit(verify ? "verify" : "identify", cfg, summary);
  }
};

struct EvalCmd {
  enum Kind { Cmc, Det } kind = Cmc;
  std::string features, method = "iatr", out;
  std::size_t folds = 3, query_size = 4;
  MethodOpts m;

  void add(CLI::App& app, std::function<void()>& action, Report& rep, Kind which) {
    kind = which;
    auto* c = app.add_subcommand(kind == Cmc ? "eval-cmc" : "eval-det",
                                 kind == Cmc ? "cross-validated identification, CMC table"
                                             : "cross-validated verification, DET table and EER");
    c->add_option("--features", features, "feature CSV")->required();
    c->add_option("--method", method, "iatr, phase1, phase2 or 1nn")
        ->check(CLI::IsMember({"iatr", "phase1", "phase2", "1nn"}))
        ->capture_default_str();
    c->add_option("--folds", folds, "contiguous folds per class")->capture_default_str();
    c->add_option("--query-size", query_size, "feature vectors per query")->capture_default_str();
    c->add_option("--out", out, kind == Cmc ? "rank,hit_rate CSV" : "threshold,far,frr CSV")->required();
    m.add(c, true);
    c->callback([this, &action, &rep] { action = [this, &rep] { run(rep); }; });
  }

  void run(const Report& rep) const {
    const auto data = to_training_set(load_feature_csv(features));
    const auto r = cross_validate(data, folds, query_size, method_from_string(method), m.params());
    json results = run_json(r);
    if (kind == Cmc) {
      const auto cmc = cmc_curve(r.scores, r.truth);
      write_with(out, [&](std::ostream& o) { write_cmc_csv(o, cmc); });
      results["cmc"] = cmc.hit_rate;
    } else {
      const auto trials = verification_trials(r);
      const auto det = det_and_eer(trials.genuine, trials.impostor);
      write_with(out, [&](std::ostream& o) { write_det_csv(o, det); });
      results["eer"] = det.eer;
      results["genuine_trials"] = trials.genuine.size();
      results["impostor_trials"] = trials.impostor.size();
    }
    json cfg = {{"features", features}, {"method", method},         {"folds", folds},
                {"query_size", query_size}, {"params", m.to_json()}, {"out", out}};
    rep.emit(kind == Cmc ? "eval-cmc" : "eval-det", cfg, results);
  }
};

struct SweepCmd {
  std::string features, out, grid = "10,20,30,40,50,60,70,80,90,100";
  std::size_t folds = 3, query_size = 1;

  void add(CLI::App& app, std::function<void()>& action, Report& rep) {
    auto* c = app.add_subcommand("sweep-p", "phase-1-only accuracy over retention percentages");
    c->add_option("--features", features, "feature CSV")->required();
    c->add_option("--grid", grid, "comma-separated percentages")->capture_default_str();
    c->add_option("--folds", folds)->capture_default_str();
    c->add_option("--query-size", query_size)->capture_default_str();
    c->add_option("--out", out, "p_percent,accuracy CSV")->required();
    c->callback([this, &action, &rep] { action = [this, &rep] { run(rep); }; });
  }

  void run(const Report& rep) const {
    const auto data = to_training_set(load_feature_csv(features));
    const auto g = parse_grid(grid);
    const auto table = sweep_p(data, g, SweepOptions{folds, query_size});
    write_with(out, [&](std::ostream& o) { write_sweep_csv(o, table); });
    json rows = json::array();
    for (std::size_t i = 0; i < g.size(); ++i)
      rows.push_back({{"p_percent", table.p_percent[i]}, {"k", table.k[i]}, {"accuracy", table.accuracy[i]}});
    json cfg = {{"features", features}, {"grid", g}, {"folds", folds}, {"query_size", query_size}, {"out", out}};
    rep.emit("sweep-p", cfg, {{"rows", rows}});
  }
};

struct AgeingCmd {
  std::string session1, session2, out;
  bool synthetic = false;
  SynthOpts synth;
  std::size_t folds = 5, query_size = 5;
  MethodOpts m;

  void add(CLI::App& app, std::function<void()>& action, Report& rep) {
    auto* c = app.add_subcommand("ageing", "single- vs cross-session accuracy for every method");
    auto* s1 = c->add_option("--session1", session1, "session 1 feature CSV");
    auto* s2 = c->add_option("--session2", session2, "session 2 feature CSV");
    c->add_flag("--synthetic", synthetic, "generate both sessions instead")->excludes(s1)->excludes(s2);
    c->add_option("--folds", folds, "within-session folds")->capture_default_str();
    c->add_option("--query-size", query_size, "feature vectors per query")->capture_default_str();
    c->add_option("--out", out, "method,single_session,multi_session CSV");
    m.add(c, true);
    synth.add(c);
    c->callback([this, &action, &rep] { action = [this, &rep] { run(rep); }; });
  }

  void run(const Report& rep) const {
    TrainingSet a, b;
    json src;
    if (synthetic) {
      const auto s = generate_sessions(synth.cfg);
      a = s.session1;
      b = s.session2;
      src = {{"synthetic", synth.to_json()}};
    } else {
      if (session1.empty() || session2.empty())
        throw Error(ErrorCode::BadConfig, "ageing needs --session1 and --session2, or --synthetic");
      a = to_training_set(load_feature_csv(session1));
      b = to_training_set(load_feature_csv(session2));
      src = {{"session1", session1}, {"session2", session2}};
    }
    AgeingParams p;
    p.method = m.params();
    p.single_session_folds = folds;
    p.query_size = query_size;
    const auto table = ageing_experiment(a, b, p);
    if (!out.empty()) write_with(out, [&](std::ostream& o) { write_ageing_csv(o, table); });
    json rows = json::array();
    for (const auto& r : table.rows)
      rows.push_back({{"method", to_string(r.method)}, {"single_session", r.single_session},
                      {"multi_session", r.multi_session}});
    json cfg = {{"source", src}, {"folds", folds}, {"query_size", query_size}, {"params", m.to_json()}, {"out", out}};
    rep.emit("ageing", cfg, {{"rows", rows}});
  }
};

struct SynthCmd {
  SynthOpts synth;
  std::string out_dir;

  void add(CLI::App& app, std::function<void()>& action, Report& rep) {
    auto* c = app.add_subcommand("synth", "write two synthetic feature sessions");
    c->add_option("--out-dir", out_dir, "writes session1.csv and session2.csv")->required();
    synth.add(c);
    c->callback([this, &action, &rep] { action = [this, &rep] { run(rep); }; });
  }

  void run(const Report& rep) const {
    const auto s = generate_sessions(synth.cfg);
    const fs::path dir(out_dir);
    fs::create_directories(dir);
    save_feature_csv(dir / "session1.csv", from_training_set(s.session1, "session1"));
    save_feature_csv(dir / "session2.csv", from_training_set(s.session2, "session2"));
    json cfg = {{"synthetic", synth.to_json()}, {"out_dir", out_dir}};
    rep.emit("synth", cfg,
             {{"files", {(dir / "session1.csv").string(), (dir / "session2.csv").string()}},
              {"classes", s.session1.num_classes()},
              {"instances_per_session", s.session1.total_instances()}});
  }
};

struct SelftestCmd {
  std::size_t trials = 1000;
  std::uint64_t seed = 1;

  void add(CLI::App& app, std::function<void()>& action, Report& rep) {
    auto* c = app.add_subcommand("selftest", "run the brute-force oracle suites");
    c->add_option("--trials", trials)->capture_default_str();
    c->add_option("--seed", seed)->capture_default_str();
    c->callback([this, &action, &rep] { action = [this, &rep] { run(rep); }; });
  }

  void run(const Report& rep) const {
    const std::vector<oracle::SuiteReport> required = {
        oracle::phase1_equivalence(trials, seed), oracle::phase2_equivalence(trials, seed + 1),
        oracle::bounding_and_provenance(trials, seed + 2), oracle::affine_selection_invariance(trials, seed + 3)};
    // reported only: per-dimension scaling does not preserve vector distances
    const auto votes = oracle::affine_invariance(trials, seed + 4, false);
    json suites = json::array();
    bool ok = true;
    for (const auto* r : {&required[0], &required[1], &required[2], &required[3], &votes}) {
      const bool informational = r == &votes;
      suites.push_back({{"name", r->name},
                        {"trials", r->trials},
                        {"failures", r->failures},
                        {"checked", r->checked},
                        {"skipped", r->skipped},
                        {"seconds", r->seconds},
                        {"required", !informational},
                        {"first_failure", r->first_failure}});
      if (!informational) ok = ok && r->passed();
    }
    rep.emit("selftest", {{"trials", trials}, {"seed", seed}}, {{"passed", ok}, {"suites", suites}});
    if (!ok) throw Error(ErrorCode::InvariantViolation, "oracle suite failed");
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"I-ATR template reconstruction classifier and EEG biometric evaluation"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key = value file; command-line flags take precedence");
  Report rep;
  app.add_option("--report", rep.report_path, "write the JSON report here instead of stdout");

  std::function<void()> action;
  ExtractCmd extract;
  TrainCmd train;
  MatchCmd identify, verify;
  EvalCmd cmc, det;
  SweepCmd sweep;
  AgeingCmd ageing;
  SynthCmd synth;
  SelftestCmd selftest;
  extract.add(app, action, rep);
  train.add(app, action, rep);
  identify.add(app, action, rep, false);
  verify.add(app, action, rep, true);
  cmc.add(app, action, rep, EvalCmd::Cmc);
  det.add(app, action, rep, EvalCmd::Det);
  sweep.add(app, action, rep);
  ageing.add(app, action, rep);
  synth.add(app, action, rep);
  selftest.add(app, action, rep);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (action) action();
    return 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  }
}
