#pragma once

#include "extrapolmv/convergence.hpp"
#include "extrapolmv/sampler.hpp"

#include "json.hpp"

#include <filesystem>
#include <string>

namespace extrapolmv {

/// Long-format draws: header `draw,chain,param,value`, where draw is the
/// retained index within its chain and param is B[r,c], Sigma[r,c] or
/// Z[row,resp] (0-based; Z rows index the dataset). Values use the shortest
/// round-trip decimal form, so reading back is exact.
std::string draws_to_csv(const PosteriorDraws& p);

/// Layout and provenance needed to read a draws CSV back.
nlohmann::json draws_meta(const PosteriorDraws& p, const std::vector<std::string>& response_names,
                          const std::vector<std::string>& covariate_names, const ConvergenceSummary* summary);

PosteriorDraws draws_from_csv(const std::string& csv_text, const nlohmann::json& meta);

inline constexpr const char* kDrawsFile = "draws.csv";
inline constexpr const char* kMetaFile = "meta.json";

/// Writes draws.csv and meta.json into `dir` (created if needed).
void write_draws(const PosteriorDraws& p, const std::filesystem::path& dir, const nlohmann::json& meta);

struct LoadedDraws {
  PosteriorDraws draws;
  nlohmann::json meta;
};

LoadedDraws read_draws(const std::filesystem::path& dir);

}  // namespace extrapolmv
