#pragma once

#include "lip/analysis.hpp"
#include "lip/noise.hpp"
#include "lip/synthetic.hpp"

#include <json.hpp>

#include <string>

namespace lip {

nlohmann::json to_json(const NoiseSpec& s);
NoiseSpec noise_spec_from_json(const nlohmann::json& j);

nlohmann::json to_json(const SyntheticSpec& s);
SyntheticSpec synthetic_spec_from_json(const nlohmann::json& j);

nlohmann::json to_json(const BoundReport& b);

// Pretty-printed with a trailing newline; NaN becomes null.
std::string dump(const nlohmann::json& j);

// Wraps nlohmann errors in ValidationError("parse").
nlohmann::json parse_json(const std::string& text, const std::string& source);

std::string format_similarity_grid(const SimilarityGrid& g);
// One column per run, row r holds the (r+1)-th singular value. All spectra
// must have the same length.
std::string format_spectrum_csv(const SpectrumReport& r);
nlohmann::json to_json(const SpectrumReport& r);

}  // namespace lip
