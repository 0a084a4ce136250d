#include "lip/experiment.hpp"

#include "lip/errors.hpp"
#include "lip/json_io.hpp"
#include "lip/lip.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

namespace lip {

namespace fs = std::filesystem;
using nlohmann::json;

void validate(const ExperimentPlan& plan) {
  if (plan.trials < 1) throw ValidationError("config", "plan: trials must be at least 1");
  if (plan.noise_levels.empty()) throw ValidationError("config", "plan: noise_levels is empty");
  if (!(plan.ridge.lambda >= 0.0)) throw ValidationError("config", "plan: lambda must be nonnegative");
  for (const auto& n : plan.noise_levels) validate(n);
  if (plan.k_mode == KMode::fixed && plan.k < 1)
    throw ValidationError("config", "plan: k must be at least 1");
  if (const auto* s = std::get_if<SyntheticSpec>(&plan.dataset)) validate(*s);
  if (const auto* m = std::get_if<ManifestSource>(&plan.dataset))
    if (!(m->train_fraction > 0.0 && m->train_fraction < 1.0))
      throw ValidationError("config", "plan: train_fraction must lie in (0, 1)");
}

ExperimentPlan plan_from_json(const json& j, const fs::path& base_dir) {
  ExperimentPlan p;
  auto resolve = [&](const fs::path& f) { return f.is_absolute() || base_dir.empty() ? f : base_dir / f; };
  try {
    const json& d = j.at("dataset");
    if (d.contains("synthetic")) {
      p.dataset = synthetic_spec_from_json(d.at("synthetic"));
    } else if (d.contains("manifest")) {
      ManifestSource m;
      m.manifest = load_manifest(resolve(d.at("manifest").get<std::string>()));
      m.train_fraction = d.value("train_fraction", 0.8);
      m.split_seed = d.value("split_seed", std::uint64_t(0));
      p.dataset = m;
    } else {
      throw ValidationError("config", "plan: dataset needs a 'synthetic' or 'manifest' entry");
    }
    for (const auto& n : j.at("noise_levels")) p.noise_levels.push_back(noise_spec_from_json(n));
    if (j.contains("ridge")) p.ridge.lambda = j.at("ridge").value("lambda", 1.0);
    if (j.contains("lip") && !j.at("lip").is_null()) {
      const json& l = j.at("lip");
      if (l.is_string()) {
        const auto s = l.get<std::string>();
        if (s == "grid") p.k_mode = KMode::grid;
        else if (s == "default") p.k_mode = KMode::default_rule;
        else throw ValidationError("config", "plan: lip must be \"grid\", \"default\" or {\"k\": n}");
      } else {
        p.k_mode = KMode::fixed;
        p.k = l.at("k").get<Index>();
      }
    }
    if (j.contains("grid_candidates"))
      p.grid_candidates = j.at("grid_candidates").get<std::vector<Index>>();
    p.trials = j.value("trials", Index(1));
    if (j.contains("output_dir")) p.output_dir = resolve(j.at("output_dir").get<std::string>());
  } catch (const json::exception& e) {
    throw ValidationError("parse", std::string("plan: ") + e.what());
  }
  validate(p);
  return p;
}

ExperimentPlan load_plan(const fs::path& path) {
  return plan_from_json(parse_json(read_text(path), path.string()), path.parent_path());
}

json to_json(const ExperimentPlan& p) {
  json j;
  if (const auto* s = std::get_if<SyntheticSpec>(&p.dataset)) {
    j["dataset"] = {{"synthetic", to_json(*s)}};
  } else {
    const auto& m = std::get<ManifestSource>(p.dataset);
    j["dataset"] = {{"manifest",
                     {{"features_path", m.manifest.features_path.generic_string()},
                      {"labels_path", m.manifest.labels_path.generic_string()},
                      {"n", m.manifest.n},
                      {"q", m.manifest.q},
                      {"l", m.manifest.l}}},
                    {"train_fraction", m.train_fraction},
                    {"split_seed", m.split_seed}};
  }
  j["noise_levels"] = json::array();
  for (const auto& n : p.noise_levels) j["noise_levels"].push_back(to_json(n));
  j["ridge"] = {{"lambda", p.ridge.lambda}};
  switch (p.k_mode) {
    case KMode::default_rule: j["lip"] = "default"; break;
    case KMode::grid: j["lip"] = "grid"; break;
    case KMode::fixed: j["lip"] = {{"k", p.k}}; break;
  }
  j["grid_candidates"] = p.grid_candidates;
  j["trials"] = p.trials;
  return j;
}

namespace {

struct Split {
  ValidatedDataset train;
  ValidatedDataset test;
};

Split trial_data(const ExperimentPlan& plan, Index trial) {
  if (const auto* s = std::get_if<SyntheticSpec>(&plan.dataset)) {
    SyntheticSpec t = *s;
    t.seed = s->seed + static_cast<std::uint64_t>(trial);
    auto d = gen_synthetic(t);
    return {std::move(d.train), std::move(d.test)};
  }
  const auto& m = std::get<ManifestSource>(plan.dataset);
  auto full = validate_manifest(m.manifest);
  if (full.label_kind != LabelKind::one_hot_truth)
    throw ValidationError("config", "experiment datasets need one_hot_truth labels");
  auto [a, b] = stratified_split(full.labels, m.train_fraction,
                                 m.split_seed + static_cast<std::uint64_t>(trial));
  return {validate_dataset(take_rows(full.X, a), take_rows(full.labels, a), LabelKind::one_hot_truth),
          validate_dataset(take_rows(full.X, b), take_rows(full.labels, b), LabelKind::one_hot_truth)};
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string level_dir(Index level, Index trial) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "level_%02ld/trial_%03ld", static_cast<long>(level),
                static_cast<long>(trial));
  return buf;
}

Index choose_k(const ExperimentPlan& plan, const ValidatedDataset& train, const Eigen::MatrixXd& Y,
               std::uint64_t seed) {
  const Index q = train.q();
  const Index l = train.l();
  switch (plan.k_mode) {
    case KMode::fixed: validate_k(plan.k, q, l); return plan.k;
    case KMode::default_rule: return default_k(q, l);
    case KMode::grid: break;
  }
  std::vector<Index> cands = plan.grid_candidates;
  if (cands.empty()) {
    cands.resize(static_cast<std::size_t>(std::min(q, l)));
    std::iota(cands.begin(), cands.end(), Index(1));
  }
  // half the training portion refits, the other half validates
  auto [a, b] = stratified_split(train.labels, 0.5, seed);
  Eigen::MatrixXd Xa = take_rows(train.X, a);
  Eigen::MatrixXd Ya = take_rows(Y, a);
  Eigen::MatrixXd Wa = ridge_fit(Xa, Ya, plan.ridge).weights;
  return select_k(Xa, Ya, take_rows(train.X, b), take_rows(train.labels, b), Wa, cands);
}

ArmSummary summarize(const std::vector<double>& v) {
  ArmSummary s;
  if (v.empty()) return s;
  s.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return s;
}

void write_artifacts(const fs::path& dir, TrialRecord& rec, const SpectrumReport& spec,
                     const SimilarityGrid& grid) {
  fs::create_directories(dir);
  write_text(dir / "spectrum.csv", format_spectrum_csv(spec));
  write_text(dir / "grid.csv", format_similarity_grid(grid));
  write_text(dir / "bounds.json", dump(to_json(rec.bounds)));
}

}  // namespace

ExperimentReport run_experiment(const ExperimentPlan& plan) {
  validate(plan);
  const Index levels = static_cast<Index>(plan.noise_levels.size());
  ExperimentReport report;
  report.records.resize(static_cast<std::size_t>(levels * plan.trials));
  auto rec_at = [&](Index level, Index trial) -> TrialRecord& {
    return report.records[static_cast<std::size_t>(level * plan.trials + trial)];
  };
  const bool write = !plan.output_dir.empty();
  if (write) {
    std::error_code ec;
    fs::create_directories(plan.output_dir, ec);
    if (ec) throw IoError("cannot create " + plan.output_dir.string() + ": " + ec.message());
  }

  auto fail = [](TrialRecord& rec, const std::string& kind, const std::string& msg) {
    rec.ok = false;
    rec.error_kind = kind;
    rec.error_message = msg;
  };

  for (Index t = 0; t < plan.trials; ++t) {
    for (Index lv = 0; lv < levels; ++lv) {
      auto& rec = rec_at(lv, t);
      rec.level = lv;
      rec.trial = t;
      rec.noise = plan.noise_levels[static_cast<std::size_t>(lv)];
      rec.noise.seed += static_cast<std::uint64_t>(t);
    }
    Split data;
    Eigen::MatrixXd W;
    Eigen::VectorXd s_clean;
    SvdFactors<double> f_clean;
    double acc_clean = 0;
    double clean_seconds = 0;
    try {
      data = trial_data(plan, t);
      auto t0 = std::chrono::steady_clock::now();
      W = ridge_fit(data.train.X, data.train.labels, plan.ridge).weights;
      clean_seconds = seconds_since(t0);
      f_clean = svd_thin(W);
      s_clean = f_clean.S;
      acc_clean = accuracy(predict(data.test.X, W), data.test.labels);
    } catch (const Error& e) {
      for (Index lv = 0; lv < levels; ++lv) fail(rec_at(lv, t), e.kind(), e.what());
      continue;
    } catch (const std::exception& e) {
      for (Index lv = 0; lv < levels; ++lv) fail(rec_at(lv, t), "internal", e.what());
      continue;
    }

    for (Index lv = 0; lv < levels; ++lv) {
      auto& rec = rec_at(lv, t);
      try {
        const auto& train = data.train;
        auto cr = corrupt(train.labels, rec.noise);
        rec.realized_flip_rate = cr.realized_flip_rate;
        rec.accuracy_clean_W = acc_clean;

        auto t0 = std::chrono::steady_clock::now();
        Eigen::MatrixXd Wp = ridge_fit(train.X, cr.Y, plan.ridge).weights;
        rec.train_seconds = clean_seconds + seconds_since(t0);
        rec.accuracy_noisy_W = accuracy(predict(data.test.X, Wp), data.test.labels);

        rec.k = choose_k(plan, train, cr.Y, rec.noise.seed ^ 0x5eedULL);
        t0 = std::chrono::steady_clock::now();
        auto res = lip_apply(train.X, cr.Y, Wp, LipConfig{rec.k});
        rec.lip_seconds = seconds_since(t0);
        rec.skipped_indices = res.skipped_indices;
        rec.accuracy_psp_only = accuracy(predict(data.test.X, res.W_k), data.test.labels);
        rec.accuracy_lip = accuracy(predict(data.test.X, res.W_star), data.test.labels);

        rec.bounds = bound_report(train.X, train.labels, cr.M, plan.ridge.lambda, rec.k,
                                  rec.realized_flip_rate);
        const auto& f_noisy = res.factors;
        rec.spectrum_clean = s_clean;
        rec.spectrum_noisy = f_noisy.S;
        const Index r = f_clean.rank();
        SimilarityGrid grid = similarity_grid(f_clean.V, f_noisy.V, r, r);
        rec.phi_11 = grid.phi(0, 0);

        if (write) {
          SpectrumReport spec;
          spec.labels = {"clean", "noisy", "psp_only", "lip"};
          spec.spectra = {s_clean, f_noisy.S, spectrum(res.W_k), spectrum(res.W_star)};
          spec.accuracies = {rec.accuracy_clean_W, rec.accuracy_noisy_W, rec.accuracy_psp_only,
                             rec.accuracy_lip};
          const std::string rel = level_dir(lv, t);
          rec.spectrum_path = rel + "/spectrum.csv";
          rec.grid_path = rel + "/grid.csv";
          rec.bounds_path = rel + "/bounds.json";
          write_artifacts(plan.output_dir / rel, rec, spec, grid);
        }
        rec.ok = true;
      } catch (const Error& e) {
        fail(rec, e.kind(), e.what());
      } catch (const std::exception& e) {
        fail(rec, "internal", e.what());
      }
    }
  }

  for (Index lv = 0; lv < levels; ++lv) {
    LevelAggregate a;
    a.level = lv;
    a.noise = plan.noise_levels[static_cast<std::size_t>(lv)];
    std::vector<double> c, n, p, l;
    for (Index t = 0; t < plan.trials; ++t) {
      const auto& rec = rec_at(lv, t);
      if (!rec.ok) {
        ++a.failed;
        continue;
      }
      ++a.completed;
      c.push_back(rec.accuracy_clean_W);
      n.push_back(rec.accuracy_noisy_W);
      p.push_back(rec.accuracy_psp_only);
      l.push_back(rec.accuracy_lip);
    }
    a.clean = summarize(c);
    a.noisy = summarize(n);
    a.psp_only = summarize(p);
    a.lip = summarize(l);
    report.aggregates.push_back(a);
  }

  if (write) {
    write_text(plan.output_dir / "report.json", dump(to_json(report, plan)));
    std::ostringstream log;
    for (const auto& rec : report.records) {
      if (!rec.ok) continue;
      char buf[160];
      std::snprintf(buf, sizeof buf, "level=%ld trial=%ld train_ms=%.3f lip_apply_ms=%.3f\n",
                    static_cast<long>(rec.level), static_cast<long>(rec.trial),
                    rec.train_seconds * 1e3, rec.lip_seconds * 1e3);
      log << buf;
    }
    write_text(plan.output_dir / "timing.log", log.str());
  }
  return report;
}

json to_json(const ExperimentReport& r, const ExperimentPlan& plan) {
  auto arm = [](const ArmSummary& s) { return json{{"mean", s.mean}, {"stddev", s.stddev}}; };
  json entries = json::array();
  for (const auto& rec : r.records) {
    json e{{"level", rec.level}, {"trial", rec.trial}, {"noise", to_json(rec.noise)}};
    if (!rec.ok) {
      e["status"] = "failed";
      e["error"] = {{"kind", rec.error_kind}, {"message", rec.error_message}};
    } else {
      e["status"] = "ok";
      e["realized_flip_rate"] = rec.realized_flip_rate;
      e["accuracy_clean_W"] = rec.accuracy_clean_W;
      e["accuracy_noisy_W"] = rec.accuracy_noisy_W;
      e["accuracy_psp_only"] = rec.accuracy_psp_only;
      e["accuracy_lip"] = rec.accuracy_lip;
      e["k"] = rec.k;
      e["skipped_indices"] = rec.skipped_indices;
      e["phi_11"] = rec.phi_11;
      e["bound_report"] = to_json(rec.bounds);
      e["spectrum_path"] = rec.spectrum_path;
      e["grid_path"] = rec.grid_path;
      e["bounds_path"] = rec.bounds_path;
    }
    entries.push_back(std::move(e));
  }
  json aggs = json::array();
  for (const auto& a : r.aggregates)
    aggs.push_back({{"level", a.level},
                    {"noise", to_json(a.noise)},
                    {"completed", a.completed},
                    {"failed", a.failed},
                    {"accuracy_clean_W", arm(a.clean)},
                    {"accuracy_noisy_W", arm(a.noisy)},
                    {"accuracy_psp_only", arm(a.psp_only)},
                    {"accuracy_lip", arm(a.lip)}});
  return json{{"plan", to_json(plan)}, {"entries", entries}, {"aggregates", aggs}};
}

}  // namespace lip
