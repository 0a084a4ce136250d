#include "cli.hpp"

#include "lip/analysis.hpp"
#include "lip/errors.hpp"
#include "lip/experiment.hpp"
#include "lip/json_io.hpp"
#include "lip/lip.hpp"
#include "lip/matio.hpp"
#include "lip/noise.hpp"
#include "lip/synthetic.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <optional>

namespace lip {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Options {
  // shared
  std::string out;
  std::string format = "csv";
  std::optional<std::uint64_t> seed;
  std::optional<double> lambda;
  std::optional<Index> k;
  std::optional<double> p;
  std::string noise_kind = "candidate_flip";
  double removal_fraction = 0.0;
  // inputs
  std::string plan, spec, features, labels, truth, weights, weights_prime, mask;
  std::vector<std::string> weight_list, names;
  std::optional<Index> i_max, j_max;
  std::optional<double> gap;
  // gen-data
  std::optional<Index> n, q, l;
  std::optional<double> separation, sigma, train_fraction;
  std::optional<std::vector<double>> axis_scales;
};

void emit(std::ostream& out, const json& j) { out << dump(j); }

void write_or_print(const Options& o, std::ostream& out, const std::string& text) {
  if (o.out.empty()) out << text;
  else write_text(o.out, text);
}

void require_format(const std::string& f) {
  if (f != "csv" && f != "json") throw ValidationError("config", "--format must be csv or json");
}

int cmd_gen_data(const Options& o, std::ostream& out) {
  SyntheticSpec s;
  if (!o.spec.empty()) s = synthetic_spec_from_json(parse_json(read_text(o.spec), o.spec));
  if (o.n) s.n = *o.n;
  if (o.q) s.q = *o.q;
  if (o.l) s.l = *o.l;
  if (o.separation) s.cluster_separation = *o.separation;
  if (o.sigma) s.within_class_sigma = *o.sigma;
  if (o.train_fraction) s.train_fraction = *o.train_fraction;
  if (o.axis_scales) s.axis_scales = *o.axis_scales;
  if (o.seed) s.seed = *o.seed;
  if (o.out.empty()) throw ValidationError("config", "gen-data needs --out <dir>");
  auto d = gen_synthetic(s);
  fs::path dir(o.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  auto save = [&](const ValidatedDataset& ds, const std::string& name) {
    save_matrix(ds.X, dir / (name + "_features.csv"));
    save_matrix(ds.labels, dir / (name + "_labels.csv"));
    DatasetManifest m{name + "_features.csv", name + "_labels.csv", ds.n(), ds.q(), ds.l(),
                      LabelKind::one_hot_truth};
    save_manifest(m, dir / (name + ".json"));
  };
  save(d.train, "train");
  save(d.test, "test");
  write_text(dir / "spec.json", dump(to_json(s)));
  emit(out, {{"train", {{"n", d.train.n()}, {"manifest", (dir / "train.json").generic_string()}}},
             {"test", {{"n", d.test.n()}, {"manifest", (dir / "test.json").generic_string()}}},
             {"spec", to_json(s)}});
  return 0;
}

int cmd_corrupt(const Options& o, std::ostream& out) {
  if (o.labels.empty() || o.out.empty())
    throw ValidationError("config", "corrupt needs --labels and --out");
  NoiseSpec s;
  s.kind = noise_kind_from_string(o.noise_kind);
  s.p = o.p.value_or(0.0);
  s.removal_fraction = o.removal_fraction;
  s.seed = o.seed.value_or(0);
  validate(s);
  auto G = load_matrix(o.labels);
  auto r = corrupt(G, s);
  save_matrix(r.Y, o.out);
  if (!o.mask.empty()) save_matrix(r.M, o.mask);
  emit(out, {{"noise", to_json(s)},
             {"realized_flip_rate", r.realized_flip_rate},
             {"mask_frobenius", mask_frobenius(r.M)},
             {"labels_out", o.out}});
  return 0;
}

int cmd_fit(const Options& o, std::ostream& out) {
  if (o.features.empty() || o.labels.empty() || o.out.empty())
    throw ValidationError("config", "fit needs --features, --labels and --out");
  auto X = load_matrix(o.features);
  auto Y = load_matrix(o.labels);
  RidgeConfig cfg{o.lambda.value_or(1.0)};
  auto fit = ridge_fit(X, Y, cfg);
  save_matrix(fit.weights, o.out);
  const double rel = normal_equation_residual(X, Y, fit.weights, cfg.lambda) /
                     std::max(1e-300, (X.transpose() * Y).norm());
  emit(out, {{"q", fit.weights.rows()},
             {"l", fit.weights.cols()},
             {"lambda", cfg.lambda},
             {"normal_equation_relative_residual", rel},
             {"weights_out", o.out}});
  return 0;
}

int cmd_apply(const Options& o, std::ostream& out) {
  if (o.weights.empty() || o.features.empty() || o.labels.empty() || o.out.empty())
    throw ValidationError("config", "apply needs --weights, --features, --labels and --out");
  auto W = load_matrix(o.weights);
  auto X = load_matrix(o.features);
  auto Y = load_matrix(o.labels);
  const Index k = o.k ? *o.k : default_k(W.rows(), W.cols());
  auto res = lip_apply(X, Y, W, LipConfig{k});
  save_matrix(res.W_star, o.out);
  emit(out, {{"k", k},
             {"k_source", o.k ? "flag" : "default"},
             {"tail_size", res.refit_tail.size()},
             {"skipped_indices", res.skipped_indices},
             {"refit_tail", std::vector<double>(res.refit_tail.data(),
                                                res.refit_tail.data() + res.refit_tail.size())},
             {"objective_input", (X * W - Y).norm()},
             {"objective_before", (X * res.W_k - Y).norm()},
             {"objective_after", (X * res.W_star - Y).norm()},
             {"weights_out", o.out}});
  return 0;
}

int cmd_spectrum(const Options& o, std::ostream& out) {
  require_format(o.format);
  std::vector<std::string> files = o.weight_list;
  if (!o.weights.empty()) files.insert(files.begin(), o.weights);
  if (files.empty()) throw ValidationError("config", "spectrum needs at least one --weights");
  SpectrumReport r;
  for (std::size_t i = 0; i < files.size(); ++i) {
    r.labels.push_back(i < o.names.size() ? o.names[i] : fs::path(files[i]).stem().string());
    r.spectra.push_back(spectrum(load_matrix(files[i])));
  }
  write_or_print(o, out, o.format == "csv" ? format_spectrum_csv(r) : dump(to_json(r)));
  return 0;
}

int cmd_subspace(const Options& o, std::ostream& out) {
  require_format(o.format);
  if (o.weights.empty() || o.weights_prime.empty())
    throw ValidationError("config", "subspace needs --weights and --weights-prime");
  auto f = svd_thin(load_matrix(o.weights));
  auto fp = svd_thin(load_matrix(o.weights_prime));
  const Index im = o.i_max.value_or(f.rank());
  const Index jm = o.j_max.value_or(fp.rank());
  auto g = similarity_grid(f.V, fp.V, im, jm);
  if (o.format == "csv") {
    write_or_print(o, out, format_similarity_grid(g));
  } else {
    json rows = json::array();
    for (Index i = 0; i < g.i_max; ++i) {
      std::vector<double> row(static_cast<std::size_t>(g.j_max));
      for (Index j = 0; j < g.j_max; ++j) row[static_cast<std::size_t>(j)] = g.phi(i, j);
      rows.push_back(row);
    }
    write_or_print(o, out, dump({{"i_max", g.i_max}, {"j_max", g.j_max}, {"phi", rows}}));
  }
  return 0;
}

int cmd_bounds(const Options& o, std::ostream& out) {
  if (o.format != "json" && o.format != "csv") require_format(o.format);
  if (o.features.empty() || o.truth.empty() || (o.labels.empty() && o.mask.empty()))
    throw ValidationError("config", "bounds needs --features, --truth and --labels or --mask");
  auto X = load_matrix(o.features);
  auto G = load_matrix(o.truth);
  require_one_hot(G, "truth");
  Eigen::MatrixXd M;
  if (!o.mask.empty()) {
    M = load_matrix(o.mask);
  } else {
    auto Y = load_matrix(o.labels);
    if (Y.rows() != G.rows() || Y.cols() != G.cols())
      throw ValidationError("shape", "bounds: labels and truth differ in shape");
    M = Y - G;
  }
  mask_frobenius(M);
  const double p = static_cast<double>((M.array() != 0.0).count()) /
                   static_cast<double>(M.size());
  const Index k = o.k ? *o.k : default_k(X.cols(), G.cols());
  auto b = bound_report(X, G, M, o.lambda.value_or(1.0), k, p,
                        o.gap.value_or(std::numeric_limits<double>::quiet_NaN()));
  json j = to_json(b);
  if (o.format == "csv") {
    std::string text = "field,value\n";
    for (const auto& [key, v] : j.items())
      text += key + "," + (v.is_null() ? std::string("nan") : format_double(v.get<double>())) + "\n";
    write_or_print(o, out, text);
  } else {
    write_or_print(o, out, dump(j));
  }
  return 0;
}

int cmd_experiment(const Options& o, std::ostream& out) {
  if (o.plan.empty()) throw ValidationError("config", "experiment needs --plan <json>");
  ExperimentPlan plan = load_plan(o.plan);
  if (!o.out.empty()) plan.output_dir = o.out;
  if (o.lambda) plan.ridge.lambda = *o.lambda;
  if (o.k) {
    plan.k_mode = KMode::fixed;
    plan.k = *o.k;
  }
  if (o.seed) {
    if (auto* s = std::get_if<SyntheticSpec>(&plan.dataset)) s->seed = *o.seed;
  }
  if (plan.output_dir.empty()) throw ValidationError("config", "experiment needs an output_dir or --out");
  validate(plan);
  auto rep = run_experiment(plan);
  json j = to_json(rep, plan);
  Index failed = 0;
  for (const auto& r : rep.records) failed += r.ok ? 0 : 1;
  emit(out, {{"report", (plan.output_dir / "report.json").generic_string()},
             {"aggregates", j["aggregates"]},
             {"failed_trials", failed}});
  return 0;
}

void error_json(std::ostream& out, const std::string& kind, const std::string& msg, int code) {
  emit(out, {{"error", {{"kind", kind}, {"message", msg}, {"exit_code", code}}}});
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"lipctl: label-noise weight analysis and repair"};
  app.require_subcommand(1);
  Options o;

  auto* gen = app.add_subcommand("gen-data", "generate a synthetic Gaussian-cluster dataset");
  gen->add_option("--spec", o.spec, "synthetic spec JSON");
  gen->add_option("--n", o.n);
  gen->add_option("--q", o.q);
  gen->add_option("--l", o.l);
  gen->add_option("--separation", o.separation, "mean pairwise centroid distance");
  gen->add_option("--sigma", o.sigma, "within-class standard deviation");
  gen->add_option("--train-fraction", o.train_fraction);
  gen->add_option("--axis-scales", o.axis_scales);
  gen->add_option("--seed", o.seed);
  gen->add_option("--out", o.out, "output directory");

  auto* cor = app.add_subcommand("corrupt", "corrupt a one-hot label matrix");
  cor->add_option("--labels", o.labels, "ground-truth CSV");
  cor->add_option("--noise-kind", o.noise_kind)
      ->check(CLI::IsMember({"candidate_flip", "candidate_flip_with_truth_removal", "symmetric",
                             "asymmetric"}));
  cor->add_option("--p", o.p);
  cor->add_option("--removal-fraction", o.removal_fraction);
  cor->add_option("--seed", o.seed);
  cor->add_option("--out", o.out, "corrupted labels CSV");
  cor->add_option("--mask", o.mask, "optional mask CSV");

  auto* fit = app.add_subcommand("fit", "closed-form ridge classifier");
  fit->add_option("--features", o.features);
  fit->add_option("--labels", o.labels);
  fit->add_option("--lambda", o.lambda);
  fit->add_option("--out", o.out);

  auto* app_cmd = app.add_subcommand("apply", "repair a weight matrix with LIP");
  app_cmd->add_option("--weights", o.weights);
  app_cmd->add_option("--features", o.features);
  app_cmd->add_option("--labels", o.labels);
  app_cmd->add_option("--k", o.k);
  app_cmd->add_option("--out", o.out);

  auto* spec = app.add_subcommand("spectrum", "singular values of weight matrices");
  spec->add_option("--weights", o.weight_list, "weight CSV, repeatable");
  spec->add_option("--name", o.names, "run label, repeatable");
  spec->add_option("--format", o.format);
  spec->add_option("--out", o.out);

  auto* sub = app.add_subcommand("subspace", "similarity grid of right singular subspaces");
  sub->add_option("--weights", o.weights);
  sub->add_option("--weights-prime", o.weights_prime);
  sub->add_option("--i-max", o.i_max);
  sub->add_option("--j-max", o.j_max);
  sub->add_option("--format", o.format);
  sub->add_option("--out", o.out);

  auto* bnd = app.add_subcommand("bounds", "perturbation bounds for a corruption");
  bnd->add_option("--features", o.features);
  bnd->add_option("--truth", o.truth);
  bnd->add_option("--labels", o.labels, "corrupted labels");
  bnd->add_option("--mask", o.mask, "mask instead of labels");
  bnd->add_option("--lambda", o.lambda);
  bnd->add_option("--k", o.k);
  bnd->add_option("--gap", o.gap, "override the spectral gap");
  bnd->add_option("--format", o.format);
  bnd->add_option("--out", o.out);

  auto* exp = app.add_subcommand("experiment", "run a noise sweep");
  exp->add_option("--plan", o.plan);
  exp->add_option("--out", o.out, "output directory, overrides the plan");
  exp->add_option("--seed", o.seed, "synthetic dataset seed override");
  exp->add_option("--lambda", o.lambda);
  exp->add_option("--k", o.k);

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    error_json(out, "usage", e.what(), 2);
    err << app.help();
    return 2;
  }

  try {
    if (gen->parsed()) return cmd_gen_data(o, out);
    if (bnd->parsed()) {
      Options b = o;
      if (!bnd->count("--format")) b.format = "json";
      return cmd_bounds(b, out);
    }
    if (cor->parsed()) return cmd_corrupt(o, out);
    if (fit->parsed()) return cmd_fit(o, out);
    if (app_cmd->parsed()) return cmd_apply(o, out);
    if (spec->parsed()) return cmd_spectrum(o, out);
    if (sub->parsed()) return cmd_subspace(o, out);
    if (exp->parsed()) return cmd_experiment(o, out);
  } catch (const Error& e) {
    error_json(out, e.kind(), e.what(), e.exit_code());
    return e.exit_code();
  } catch (const fs::filesystem_error& e) {
    error_json(out, "io", e.what(), 4);
    return 4;
  } catch (const std::exception& e) {
    error_json(out, "internal", e.what(), 3);
    return 3;
  }
  return 2;
}

}  // namespace lip
