#include "lip/json_io.hpp"

#include "lip/errors.hpp"
#include "lip/matio.hpp"

namespace lip {

using nlohmann::json;

namespace {

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  return it->get<T>();
}

template <typename F>
auto guarded(const char* what, F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw ValidationError("parse", std::string(what) + ": " + e.what());
  }
}

}  // namespace

json to_json(const NoiseSpec& s) {
  return {{"kind", to_string(s.kind)},
          {"p", s.p},
          {"removal_fraction", s.removal_fraction},
          {"seed", s.seed}};
}

NoiseSpec noise_spec_from_json(const json& j) {
  return guarded("noise spec", [&] {
    NoiseSpec s;
    s.kind = noise_kind_from_string(get_or<std::string>(j, "kind", "candidate_flip"));
    s.p = j.at("p").get<double>();
    s.removal_fraction = get_or<double>(j, "removal_fraction", 0.0);
    s.seed = get_or<std::uint64_t>(j, "seed", 0);
    validate(s);
    return s;
  });
}

json to_json(const SyntheticSpec& s) {
  return {{"n", s.n},
          {"q", s.q},
          {"l", s.l},
          {"cluster_separation", s.cluster_separation},
          {"within_class_sigma", s.within_class_sigma},
          {"seed", s.seed},
          {"train_fraction", s.train_fraction},
          {"axis_scales", s.axis_scales}};
}

SyntheticSpec synthetic_spec_from_json(const json& j) {
  return guarded("synthetic spec", [&] {
    SyntheticSpec d;
    SyntheticSpec s;
    s.n = get_or<Index>(j, "n", d.n);
    s.q = get_or<Index>(j, "q", d.q);
    s.l = get_or<Index>(j, "l", d.l);
    s.cluster_separation = get_or<double>(j, "cluster_separation", d.cluster_separation);
    s.within_class_sigma = get_or<double>(j, "within_class_sigma", d.within_class_sigma);
    s.seed = get_or<std::uint64_t>(j, "seed", d.seed);
    s.train_fraction = get_or<double>(j, "train_fraction", d.train_fraction);
    s.axis_scales = get_or<std::vector<double>>(j, "axis_scales", d.axis_scales);
    validate(s);
    return s;
  });
}

json to_json(const BoundReport& b) {
  return {{"delta_w_frob", b.delta_w_frob},
          {"delta_w_spec", b.delta_w_spec},
          {"frob_bound", b.frob_bound},
          {"sin_theta_measured", b.sin_theta_measured},
          {"sin_theta_bound", b.sin_theta_bound},
          {"spectral_sin_theta_bound", b.spectral_sin_theta_bound},
          {"delta_gap", b.delta_gap},
          {"p_used", b.p_used},
          {"sigma_max_X", b.sigma_max_X},
          {"lambda_min_gram", b.lambda_min_gram},
          {"k", b.k}};
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json parse_json(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError("parse", source + ": " + e.what());
  }
}

std::string format_similarity_grid(const SimilarityGrid& g) { return format_matrix(g.phi); }

std::string format_spectrum_csv(const SpectrumReport& r) {
  if (r.spectra.empty()) throw ValidationError("shape", "spectrum report has no runs");
  const Index len = r.spectra.front().size();
  Eigen::MatrixXd m(len, static_cast<Index>(r.spectra.size()));
  for (std::size_t c = 0; c < r.spectra.size(); ++c) {
    if (r.spectra[c].size() != len)
      throw ValidationError("shape", "spectrum report runs have different lengths");
    m.col(static_cast<Index>(c)) = r.spectra[c];
  }
  return format_matrix(m);
}

json to_json(const SpectrumReport& r) {
  json runs = json::array();
  for (std::size_t c = 0; c < r.spectra.size(); ++c) {
    json run;
    run["label"] = c < r.labels.size() ? r.labels[c] : "run" + std::to_string(c);
    run["singular_values"] =
        std::vector<double>(r.spectra[c].data(), r.spectra[c].data() + r.spectra[c].size());
    if (c < r.accuracies.size()) run["accuracy"] = r.accuracies[c];
    runs.push_back(std::move(run));
  }
  return json{{"runs", runs}};
}

}  // namespace lip
