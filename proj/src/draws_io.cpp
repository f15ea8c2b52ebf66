#include "extrapolmv/draws_io.hpp"

#include "extrapolmv/csv.hpp"

#include <cstdio>
#include <limits>
#include <map>

namespace extrapolmv {

namespace {

constexpr const char* kFormat = "extrapolmv-draws/1";

void append_line(std::string& out, int draw, int chain, const std::string& param, double value) {
  out += std::to_string(draw);
  out.push_back(',');
  out += std::to_string(chain);
  out.push_back(',');
  out += csv::escape(param);
  out.push_back(',');
  out += format_double(value);
  out.push_back('\n');
}

std::string cell(const char* prefix, Index r, Index c) {
  return std::string(prefix) + "[" + std::to_string(r) + "," + std::to_string(c) + "]";
}

}  // namespace

std::string draws_to_csv(const PosteriorDraws& p) {
  std::map<std::pair<int, int>, const ZDraw*> z_by_draw;
  for (const auto& z : p.Z) z_by_draw[{z.chain, z.draw}] = &z;
  std::vector<std::string> b_names, s_names, z_names;
  for (Index r = 0; r < p.n; ++r)
    for (Index c = 0; c < p.q; ++c) b_names.push_back(cell("B", r, c));
  for (Index r = 0; r < p.n; ++r)
    for (Index c = 0; c < p.n; ++c) s_names.push_back(cell("Sigma", r, c));
  for (const auto& [row, resp] : p.missing_cells) z_names.push_back(cell("Z", row, resp));

  std::string out = "draw,chain,param,value\n";
  out.reserve(p.size() * static_cast<std::size_t>(p.n * (p.q + p.n)) * 32);
  for (std::size_t a = 0; a < p.size(); ++a) {
    const int d = p.draw[a];
    const int ch = p.chain[a];
    std::size_t k = 0;
    for (Index r = 0; r < p.n; ++r)
      for (Index c = 0; c < p.q; ++c) append_line(out, d, ch, b_names[k++], p.B[a](r, c));
    k = 0;
    for (Index r = 0; r < p.n; ++r)
      for (Index c = 0; c < p.n; ++c) append_line(out, d, ch, s_names[k++], p.Sigma[a](r, c));
    if (auto it = z_by_draw.find({ch, d}); it != z_by_draw.end()) {
      for (std::size_t m = 0; m < z_names.size(); ++m) append_line(out, d, ch, z_names[m], it->second->values(static_cast<Index>(m)));
    }
  }
  return out;
}

nlohmann::json draws_meta(const PosteriorDraws& p, const std::vector<std::string>& response_names,
                          const std::vector<std::string>& covariate_names, const ConvergenceSummary* summary) {
  nlohmann::json j;
  j["format"] = kFormat;
  j["n"] = p.n;
  j["q"] = p.q;
  j["chains"] = p.chains;
  j["draws_per_chain"] = p.draws_per_chain;
  j["response_names"] = response_names;
  j["covariate_names"] = covariate_names;
  j["spec"] = to_json(p.spec);
  j["seed"] = p.spec.seed;
  j["dataset_hash"] = p.dataset_hash;
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& [row, resp] : p.missing_cells) cells.push_back({row, resp});
  j["missing_cells"] = cells;
  j["z_draws"] = p.Z.size();
  if (summary) j["convergence"] = to_json(*summary);
  return j;
}

PosteriorDraws draws_from_csv(const std::string& csv_text, const nlohmann::json& meta) {
  if (meta.value("format", std::string()) != kFormat) throw DataError("draws meta has an unknown format tag");
  PosteriorDraws p;
  p.n = meta.at("n").get<Index>();
  p.q = meta.at("q").get<Index>();
  p.chains = meta.at("chains").get<int>();
  p.draws_per_chain = meta.at("draws_per_chain").get<int>();
  p.spec = model_spec_from_json(meta.at("spec"));
  p.dataset_hash = meta.value("dataset_hash", std::string());
  for (const auto& c : meta.value("missing_cells", nlohmann::json::array())) {
    p.missing_cells.emplace_back(c[0].get<Index>(), c[1].get<Index>());
  }
  std::map<std::pair<Index, Index>, Index> z_slot;
  for (std::size_t k = 0; k < p.missing_cells.size(); ++k) z_slot[p.missing_cells[k]] = static_cast<Index>(k);

  const std::size_t total = static_cast<std::size_t>(p.chains) * static_cast<std::size_t>(p.draws_per_chain);
  p.B.assign(total, Matrix::Constant(p.n, p.q, std::numeric_limits<double>::quiet_NaN()));
  p.Sigma.assign(total, Matrix::Constant(p.n, p.n, std::numeric_limits<double>::quiet_NaN()));
  p.chain.resize(total);
  p.draw.resize(total);
  for (std::size_t a = 0; a < total; ++a) {
    p.chain[a] = static_cast<int>(a / static_cast<std::size_t>(p.draws_per_chain));
    p.draw[a] = static_cast<int>(a % static_cast<std::size_t>(p.draws_per_chain));
  }
  std::map<std::pair<int, int>, std::size_t> z_index;

  const csv::Table table = csv::parse(csv_text);
  if (table.header != std::vector<std::string>{"draw", "chain", "param", "value"}) {
    throw DataError("draws file header must be draw,chain,param,value", 1);
  }
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    const long line = table.line_numbers[i];
    const auto d = csv::parse_double(row[0]);
    const auto ch = csv::parse_double(row[1]);
    const auto v = csv::parse_double(row[3]);
    if (!d || !ch || !v) throw DataError("malformed draws row", line);
    const int draw = static_cast<int>(*d);
    const int chain = static_cast<int>(*ch);
    if (draw < 0 || draw >= p.draws_per_chain || chain < 0 || chain >= p.chains) {
      throw DataError("draw/chain index out of range", line);
    }
    const std::size_t a = static_cast<std::size_t>(chain) * static_cast<std::size_t>(p.draws_per_chain) + static_cast<std::size_t>(draw);
    long r = -1, c = -1;
    const std::string& param = row[2];
    if (std::sscanf(param.c_str(), "B[%ld,%ld]", &r, &c) == 2) {
      if (r < 0 || r >= p.n || c < 0 || c >= p.q) throw DataError("B index out of range", line);
      p.B[a](r, c) = *v;
    } else if (std::sscanf(param.c_str(), "Sigma[%ld,%ld]", &r, &c) == 2) {
      if (r < 0 || r >= p.n || c < 0 || c >= p.n) throw DataError("Sigma index out of range", line);
      p.Sigma[a](r, c) = *v;
    } else if (std::sscanf(param.c_str(), "Z[%ld,%ld]", &r, &c) == 2) {
      auto slot = z_slot.find({r, c});
      if (slot == z_slot.end()) throw DataError("Z cell not listed in meta missing_cells", line);
      auto [it, inserted] = z_index.try_emplace({chain, draw}, p.Z.size());
      if (inserted) {
        p.Z.push_back({chain, draw, Vector::Constant(static_cast<Index>(p.missing_cells.size()), std::numeric_limits<double>::quiet_NaN())});
      }
      p.Z[it->second].values(slot->second) = *v;
    } else {
      throw DataError("unknown parameter '" + param + "'", line);
    }
  }
  for (std::size_t a = 0; a < total; ++a) {
    if (p.B[a].hasNaN() || p.Sigma[a].hasNaN()) {
      throw DataError("draws file is incomplete: draw " + std::to_string(p.draw[a]) + " of chain " +
                      std::to_string(p.chain[a]) + " lacks parameters");
    }
  }
  return p;
}

void write_draws(const PosteriorDraws& p, const std::filesystem::path& dir, const nlohmann::json& meta) {
  std::filesystem::create_directories(dir);
  csv::write_atomic(dir / kDrawsFile, draws_to_csv(p));
  csv::write_atomic(dir / kMetaFile, meta.dump(2) + "\n");
}

LoadedDraws read_draws(const std::filesystem::path& dir) {
  LoadedDraws out;
  try {
    out.meta = nlohmann::json::parse(csv::read_text(dir / kMetaFile));
  } catch (const nlohmann::json::exception& e) {
    throw DataError("cannot parse " + (dir / kMetaFile).string() + ": " + e.what());
  }
  out.draws = draws_from_csv(csv::read_text(dir / kDrawsFile), out.meta);
  return out;
}

}  // namespace extrapolmv
