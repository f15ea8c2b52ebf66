#include "extrapolmv/cli.hpp"

#include "extrapolmv/cart.hpp"
#include "extrapolmv/convergence.hpp"
#include "extrapolmv/csv.hpp"
#include "extrapolmv/dataset.hpp"
#include "extrapolmv/draws_io.hpp"
#include "extrapolmv/extrapolation.hpp"
#include "extrapolmv/sampler.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <ostream>
#include <set>

namespace extrapolmv {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kRhatWarning = 1.1;

struct Context {
  std::vector<std::string> args;
  std::ostream& out;
  std::ostream& err;
};

struct LoadedConfig {
  json doc = json::object();
  std::string hash = "none";
};

LoadedConfig load_config(const std::string& path) {
  LoadedConfig c;
  if (path.empty()) return c;
  const std::string text = csv::read_text(path);
  try {
    c.doc = json::parse(text);
  } catch (const json::exception& e) {
    throw DataError("cannot parse config " + path + ": " + e.what());
  }
  if (!c.doc.is_object()) throw DataError("config " + path + " must be a JSON object");
  c.hash = fnv1a_hex(text);
  return c;
}

json section(const json& doc, const char* key) {
  if (doc.contains(key) && doc[key].is_object()) return doc[key];
  return json::object();
}

IngestConfig ingest_from(const LoadedConfig& config) {
  if (!config.doc.contains("data")) throw DataError("config lacks a 'data' section describing the input columns");
  return ingest_config_from_json(config.doc["data"]);
}

/// The dataset exactly as the model sees it: ingested, then transformed.
Dataset model_dataset(const std::string& data_path, const IngestConfig& ingest) {
  return apply_transforms(load_csv(data_path, ingest), ingest.transform_spec()).data;
}

int resolve_threads(int flag) {
  if (flag > 0) return flag;
  if (const char* env = std::getenv("EXTRAPOLMV_THREADS")) {
    if (auto v = csv::parse_double(env); v && *v >= 1) return static_cast<int>(*v);
  }
  return 1;
}

/// Command-line arguments minus the output location, so manifests of two
/// runs into different directories compare equal.
std::vector<std::string> replay_args(const std::vector<std::string>& args) {
  std::vector<std::string> kept;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--out") {
      ++i;
      continue;
    }
    if (args[i].rfind("--out=", 0) == 0) continue;
    kept.push_back(args[i]);
  }
  return kept;
}

void write_manifest(const Context& ctx, const fs::path& dir, const std::string& command, const std::string& config_hash,
                    const std::string& data_hash, const json& seed, const std::vector<std::string>& outputs,
                    json extra = json::object()) {
  json m;
  m["command"] = command;
  m["args"] = replay_args(ctx.args);
  m["config_hash"] = config_hash;
  m["dataset_hash"] = data_hash;
  m["seed"] = seed;
  m["version"] = kVersion;
  m["outputs"] = outputs;
  for (auto& [k, v] : extra.items()) m[k] = v;
  csv::write_atomic(dir / "manifest.json", m.dump(2) + "\n");
}

// -- fit -------------------------------------------------------------------------

struct FitArgs {
  std::string data, config, out;
  int iters = 0, burnin = 0, thin = 0, chains = 0, threads = 0;
  std::uint64_t seed = 0;
  CLI::Option *iters_opt = nullptr, *burnin_opt = nullptr, *thin_opt = nullptr, *chains_opt = nullptr,
              *seed_opt = nullptr;
};

int cmd_fit(const Context& ctx, const FitArgs& a) {
  const LoadedConfig config = load_config(a.config);
  const IngestConfig ingest = ingest_from(config);
  ModelSpec spec = model_spec_from_json(section(config.doc, "model"));
  if (a.iters_opt->count()) spec.iterations = a.iters;
  if (a.burnin_opt->count()) spec.burn_in = a.burnin;
  if (a.thin_opt->count()) spec.thin = a.thin;
  if (a.chains_opt->count()) spec.chains = a.chains;
  if (a.seed_opt->count()) spec.seed = a.seed;

  const Dataset d = model_dataset(a.data, ingest);
  spec.validate(d.num_responses(), d.num_covariates());
  const PosteriorDraws p = gibbs_fit(d, spec, resolve_threads(a.threads));

  int code = kExitOk;
  std::optional<ConvergenceSummary> summary;
  try {
    summary = convergence_summary(p);
  } catch (const std::invalid_argument& e) {
    ctx.err << "warning: convergence diagnostics skipped: " << e.what() << "\n";
    code = kExitWarning;
  }
  const fs::path out(a.out);
  fs::create_directories(out);
  write_draws(p, out, draws_meta(p, d.response_names, d.covariate_names, summary ? &*summary : nullptr));
  std::vector<std::string> outputs{kDrawsFile, kMetaFile};
  if (summary) {
    csv::write_atomic(out / "convergence.json", to_json(*summary).dump(2) + "\n");
    outputs.emplace_back("convergence.json");
    if (summary->max_rhat() > kRhatWarning) {
      ctx.err << "warning: max split R-hat " << format_double(summary->max_rhat()) << " exceeds "
              << kRhatWarning << "; run longer chains\n";
      code = kExitWarning;
    }
  }
  write_manifest(ctx, out, "fit", config.hash, p.dataset_hash, spec.seed, outputs, {{"model", to_json(spec)}});
  ctx.out << "fit: " << p.size() << " draws (" << p.chains << " chains) written to " << out.string() << "\n";
  return code;
}

// -- score -----------------------------------------------------------------------

struct ScoreArgs {
  std::string draws, data, config, out, divisor = "A", variant = "total";
  std::vector<std::string> measures, cutoffs;
  double lev_factor = 3.0;
  int threads = 0;
  bool force = false;
  CLI::Option *measure_opt = nullptr, *cutoff_opt = nullptr, *lev_opt = nullptr;
};

int cmd_score(const Context& ctx, const ScoreArgs& a) {
  const LoadedConfig config = load_config(a.config);
  const IngestConfig ingest = ingest_from(config);
  const json score_cfg = section(config.doc, "score");
  const Dataset d = model_dataset(a.data, ingest);
  const LoadedDraws loaded = read_draws(a.draws);
  const std::string data_hash = dataset_hash(d);
  if (loaded.draws.dataset_hash != data_hash) {
    if (!a.force) {
      throw DataError("draws were fitted on a different dataset (hash " + loaded.draws.dataset_hash + ", data " +
                      data_hash + "); refit or pass --force");
    }
    ctx.err << "warning: dataset hash differs from the draws; continuing because of --force\n";
  }

  std::vector<std::string> measure_names = a.measures;
  if (!a.measure_opt->count()) measure_names = score_cfg.value("measures", std::vector<std::string>{"det", "trace"});
  std::vector<Measure> measures;
  for (const auto& m : measure_names) measures.push_back(Measure::parse(m, d.response_names));

  std::vector<std::string> cutoff_names = a.cutoffs;
  if (!a.cutoff_opt->count()) cutoff_names = score_cfg.value("cutoffs", std::vector<std::string>{"max", "lev", "q99", "q95"});
  const double lev_factor = a.lev_opt->count() ? a.lev_factor : score_cfg.value("lev_factor", 3.0);
  std::vector<CutoffSpec> cutoffs;
  for (const auto& c : cutoff_names) {
    CutoffSpec spec = CutoffSpec::parse(c);
    spec.rule.factor = lev_factor;
    cutoffs.push_back(spec);
  }

  ScoreOptions options;
  if (a.divisor == "A-1") options.divisor = VarianceDivisor::draws_minus_one;
  else if (a.divisor != "A") throw std::invalid_argument("--divisor must be A or A-1");
  if (a.variant == "mean") options.cmvpv_variant = CmvpvVariant::mean_only;
  else if (a.variant != "total") throw std::invalid_argument("--cmvpv-variant must be total or mean");
  options.threads = resolve_threads(a.threads);

  const ExtrapolationReport report = score_locations(loaded.draws, d, measures, cutoffs, options);
  const fs::path out(a.out);
  fs::create_directories(out);
  csv::write_atomic(out / "scores.csv", scores_csv(report));
  csv::write_atomic(out / "plotdata.csv", plotdata_csv(report));
  std::vector<std::string> keys;
  for (const auto& m : measures) keys.push_back(m.key());
  std::vector<std::string> cutoff_labels;
  for (const auto& c : cutoffs) cutoff_labels.push_back(c.name());
  write_manifest(ctx, out, "score", config.hash, data_hash, loaded.draws.spec.seed, {"scores.csv", "plotdata.csv"},
                 {{"measures", keys}, {"cutoffs", cutoff_labels}, {"lev_factor", lev_factor}});
  for (const auto& m : report.measures) {
    ctx.out << m.measure.label() << ":";
    for (std::size_t c = 0; c < m.cutoffs.size(); ++c) ctx.out << " " << m.cutoffs[c].spec.name() << "=" << m.flag_count(c);
    ctx.out << "\n";
  }
  return kExitOk;
}

// -- tree ------------------------------------------------------------------------

struct TreeArgs {
  std::string scores, data, config, out, label = "e_q95";
  int max_depth = 5;
  long min_leaf = 20;
  CLI::Option *label_opt = nullptr, *depth_opt = nullptr, *leaf_opt = nullptr;
};

bool is_ratio_column(const std::string& name) {
  return name.rfind("r_", 0) == 0 || name.find("_r_") != std::string::npos;
}

int cmd_tree(const Context& ctx, const TreeArgs& a) {
  const LoadedConfig config = load_config(a.config);
  const IngestConfig ingest = ingest_from(config);
  const json tree_cfg = section(config.doc, "tree");
  const std::string label = a.label_opt->count() ? a.label : tree_cfg.value("label", a.label);
  TreeParams params;
  params.max_depth = a.depth_opt->count() ? a.max_depth : tree_cfg.value("max_depth", params.max_depth);
  params.min_leaf = a.leaf_opt->count() ? a.min_leaf : tree_cfg.value("min_leaf", params.min_leaf);

  const Dataset raw = load_csv(a.data, ingest);
  const csv::Table scores = csv::read_file(a.scores);
  const std::size_t id_col = scores.require_column("id");
  const auto label_col = scores.column(label);
  if (!label_col) throw DataError("scores file has no column '" + label + "'");
  const bool ratio = is_ratio_column(label);

  std::map<std::string, std::size_t> row_of;
  for (std::size_t i = 0; i < scores.rows.size(); ++i) row_of[scores.rows[i][id_col]] = i;
  std::vector<int> labels;
  labels.reserve(raw.ids.size());
  for (const auto& id : raw.ids) {
    auto it = row_of.find(id);
    if (it == row_of.end()) throw DataError("id '" + id + "' is missing from the scores file");
    const std::string& cell = scores.rows[it->second][*label_col];
    const auto v = csv::parse_double(cell);
    const long line = scores.line_numbers[it->second];
    if (!v || std::isnan(*v)) throw DataError("label '" + cell + "' is not numeric", line, static_cast<long>(*label_col) + 1);
    if (ratio) {
      labels.push_back(*v > 1.0 ? 1 : 0);
    } else {
      if (*v != 0.0 && *v != 1.0) throw DataError("binary label must be 0 or 1, got '" + cell + "'", line);
      labels.push_back(static_cast<int>(*v));
    }
  }
  const Matrix features = raw.X.rightCols(raw.X.cols() - 1);
  const std::vector<std::string> names(raw.covariate_names.begin() + 1, raw.covariate_names.end());
  const TreeNode tree = grow_tree(features, labels, names, params);
  if (std::all_of(labels.begin(), labels.end(), [&](int v) { return v == labels.front(); })) {
    ctx.err << "warning: label column '" << label << "' is constant; the tree is a single leaf\n";
  }
  const fs::path out(a.out);
  fs::create_directories(out);
  csv::write_atomic(out / "tree.json", tree_to_json(tree).dump(2) + "\n");
  csv::write_atomic(out / "tree.txt", tree_to_text(tree));
  write_manifest(ctx, out, "tree", config.hash, dataset_hash(raw), nullptr, {"tree.json", "tree.txt"},
                 {{"label", label}, {"max_depth", params.max_depth}, {"min_leaf", params.min_leaf}});
  ctx.out << "tree: " << tree.leaf_count() << " leaves, depth " << tree.depth() << "\n";
  return kExitOk;
}

// -- simulate --------------------------------------------------------------------

struct SimulateArgs {
  std::string spec, out;
  std::uint64_t seed = 0;
};

int cmd_simulate(const Context& ctx, const SimulateArgs& a) {
  const LoadedConfig spec_doc = load_config(a.spec);
  const json gen_json = spec_doc.doc.contains("generator") ? spec_doc.doc["generator"] : spec_doc.doc;
  const GeneratorConfig gen = generator_config_from_json(gen_json);
  const auto [d, truth] = synthesize(gen, a.seed);
  const IngestConfig ingest = synthetic_ingest_config(d);

  json config;
  config["data"] = to_json(ingest);
  config["model"] = spec_doc.doc.contains("model") ? spec_doc.doc["model"] : json::object();
  config["model"]["seed"] = a.seed;
  if (spec_doc.doc.contains("score")) config["score"] = spec_doc.doc["score"];
  if (spec_doc.doc.contains("tree")) config["tree"] = spec_doc.doc["tree"];

  const fs::path out(a.out);
  fs::create_directories(out);
  write_csv(d, out / "data.csv", ingest);
  csv::write_atomic(out / "truth.json", to_json(truth).dump(2) + "\n");
  csv::write_atomic(out / "config.json", config.dump(2) + "\n");
  write_manifest(ctx, out, "simulate", spec_doc.hash, dataset_hash(d), a.seed, {"data.csv", "truth.json", "config.json"});
  ctx.out << "simulate: " << d.rows() << " rows written to " << (out / "data.csv").string() << "\n";
  return kExitOk;
}

// -- report ----------------------------------------------------------------------

struct ReportArgs {
  std::string scores, tree, out;
};

struct FlagColumn {
  std::string measure;
  std::string cutoff;
  std::size_t e_col = 0;
  std::optional<std::size_t> k_col;
};

std::vector<FlagColumn> flag_columns(const csv::Table& t, const std::vector<std::string>& measure_keys) {
  std::vector<FlagColumn> cols;
  for (std::size_t c = 0; c < t.header.size(); ++c) {
    const std::string& h = t.header[c];
    std::string prefix, cutoff;
    if (h.rfind("e_", 0) == 0) {
      cutoff = h.substr(2);
    } else if (auto pos = h.rfind("_e_"); pos != std::string::npos) {
      prefix = h.substr(0, pos);
      cutoff = h.substr(pos + 3);
    } else {
      continue;
    }
    FlagColumn f;
    f.measure = prefix.empty() ? (measure_keys.empty() ? "first measure" : measure_keys.front()) : prefix;
    f.cutoff = cutoff;
    f.e_col = c;
    f.k_col = t.column((prefix.empty() ? "" : prefix + "_") + "k_" + cutoff);
    cols.push_back(f);
  }
  return cols;
}

void describe_splits(const TreeNode& t, int depth, int max_depth, std::string& md) {
  if (t.is_leaf() || depth >= max_depth) return;
  md += std::string(static_cast<std::size_t>(2 * depth), ' ') + "- " + t.feature_name + " < " +
        format_double(t.threshold) + " (" + std::to_string(t.records) + " records)\n";
  for (const auto& c : t.children) describe_splits(c, depth + 1, max_depth, md);
}

int cmd_report(const Context& ctx, const ReportArgs& a) {
  const csv::Table scores = csv::read_file(a.scores);
  std::vector<std::string> keys;
  const fs::path manifest = fs::path(a.scores).parent_path() / "manifest.json";
  if (fs::exists(manifest)) {
    try {
      keys = json::parse(csv::read_text(manifest)).value("measures", std::vector<std::string>{});
    } catch (const json::exception&) {
      ctx.err << "warning: ignoring unreadable " << manifest.string() << "\n";
    }
  }
  const auto status_col = scores.column("status");
  std::string md = "# Extrapolation report\n\n";
  md += "Locations scored: " + std::to_string(scores.rows.size()) + "\n\n";
  md += "## Flag counts per cutoff\n\n";
  md += "| measure | cutoff | k | flagged | flagged (observed) | flagged (unobserved) |\n";
  md += "|---|---|---|---|---|---|\n";
  for (const auto& f : flag_columns(scores, keys)) {
    long total = 0, obs = 0, unobs = 0;
    for (const auto& row : scores.rows) {
      if (row[f.e_col] != "1") continue;
      ++total;
      if (status_col && row[*status_col] == "missing") ++unobs;
      else ++obs;
    }
    const std::string k = f.k_col && !scores.rows.empty() ? scores.rows.front()[*f.k_col] : "NA";
    md += "| " + f.measure + " | " + f.cutoff + " | " + k + " | " + std::to_string(total) + " | " + std::to_string(obs) +
          " | " + std::to_string(unobs) + " |\n";
  }
  std::vector<std::string> outputs{"report.md"};
  if (!a.tree.empty() && fs::exists(a.tree)) {
    const TreeNode tree = tree_from_json(json::parse(csv::read_text(a.tree)));
    md += "\n## Classification tree\n\n";
    md += "Leaves: " + std::to_string(tree.leaf_count()) + ", depth: " + std::to_string(tree.depth()) + "\n\n";
    md += "Top splits:\n\n";
    describe_splits(tree, 0, 2, md);
    md += "\n```\n" + tree_to_text(tree) + "```\n";
  } else if (!a.tree.empty()) {
    ctx.err << "warning: tree file " << a.tree << " not found; omitting the tree section\n";
  }
  const fs::path out(a.out);
  fs::create_directories(out);
  csv::write_atomic(out / "report.md", md);
  write_manifest(ctx, out, "report", "none", "none", nullptr, outputs);
  ctx.out << "report written to " << (out / "report.md").string() << "\n";
  return kExitOk;
}

std::string error_context(const DataError& e) {
  std::string s;
  if (e.row() >= 0) s += " (line " + std::to_string(e.row());
  if (e.col() >= 0) s += (s.empty() ? " (" : ", ") + std::string("column ") + std::to_string(e.col());
  if (!s.empty()) s += ")";
  return s;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Extrapolation diagnostics for multivariate Bayesian linear regression", "extrapolmv"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  Context ctx{args, out, err};

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "Run the Gibbs sampler and write posterior draws");
  fit_cmd->add_option("--data", fit.data, "Input CSV")->required()->check(CLI::ExistingFile);
  fit_cmd->add_option("--config", fit.config, "JSON config with data and model sections")->required()->check(CLI::ExistingFile);
  fit.iters_opt = fit_cmd->add_option("--iters", fit.iters, "Total iterations per chain (default 20000)")->check(CLI::PositiveNumber);
  fit.burnin_opt = fit_cmd->add_option("--burnin", fit.burnin, "Burn-in iterations (default 10000)")->check(CLI::NonNegativeNumber);
  fit.thin_opt = fit_cmd->add_option("--thin", fit.thin, "Keep every thin-th draw after burn-in")->check(CLI::PositiveNumber);
  fit.chains_opt = fit_cmd->add_option("--chains", fit.chains, "Number of chains (default 2)")->check(CLI::PositiveNumber);
  fit.seed_opt = fit_cmd->add_option("--seed", fit.seed, "Random seed");
  fit_cmd->add_option("--threads", fit.threads, "Worker threads (falls back to EXTRAPOLMV_THREADS)");
  fit_cmd->add_option("--out", fit.out, "Output directory")->required();

  ScoreArgs score;
  auto* score_cmd = app.add_subcommand("score", "Compute predictive-variance measures, cutoffs and indices");
  score_cmd->add_option("--draws", score.draws, "Directory written by fit")->required()->check(CLI::ExistingDirectory);
  score_cmd->add_option("--data", score.data, "Input CSV")->required()->check(CLI::ExistingFile);
  score_cmd->add_option("--config", score.config, "JSON config used for fit")->required()->check(CLI::ExistingFile);
  score.measure_opt = score_cmd->add_option("--measure", score.measures, "trace, det or cmvpv:<response>; repeatable");
  score.cutoff_opt = score_cmd->add_option("--cutoffs", score.cutoffs, "Comma list of max, lev, q99, q95, q:<r>")->delimiter(',');
  score.lev_opt = score_cmd->add_option("--lev-factor", score.lev_factor, "High leverage when h > factor * mean(h)")->check(CLI::PositiveNumber);
  score_cmd->add_option("--divisor", score.divisor, "Across-draw variance divisor: A or A-1");
  score_cmd->add_option("--cmvpv-variant", score.variant, "total or mean");
  score_cmd->add_option("--threads", score.threads, "Worker threads (falls back to EXTRAPOLMV_THREADS)");
  score_cmd->add_flag("--force", score.force, "Score even if the dataset hash differs from the draws");
  score_cmd->add_option("--out", score.out, "Output directory")->required();

  TreeArgs tree;
  auto* tree_cmd = app.add_subcommand("tree", "Grow a classification tree on an extrapolation index");
  tree_cmd->add_option("--scores", tree.scores, "scores.csv written by score")->required()->check(CLI::ExistingFile);
  tree_cmd->add_option("--data", tree.data, "Input CSV")->required()->check(CLI::ExistingFile);
  tree_cmd->add_option("--config", tree.config, "JSON config with a data section")->required()->check(CLI::ExistingFile);
  tree.label_opt = tree_cmd->add_option("--label", tree.label, "Label column (e_* binary, r_* thresholded at 1)");
  tree.depth_opt = tree_cmd->add_option("--max-depth", tree.max_depth, "Maximum depth")->check(CLI::PositiveNumber);
  tree.leaf_opt = tree_cmd->add_option("--min-leaf", tree.min_leaf, "Minimum records per leaf")->check(CLI::PositiveNumber);
  tree_cmd->add_option("--out", tree.out, "Output directory")->required();

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Write a synthetic dataset with known truth");
  sim_cmd->add_option("--spec", sim.spec, "Generator JSON")->required()->check(CLI::ExistingFile);
  sim_cmd->add_option("--seed", sim.seed, "Random seed");
  sim_cmd->add_option("--out", sim.out, "Output directory")->required();

  ReportArgs report;
  auto* report_cmd = app.add_subcommand("report", "Summarize flag counts and tree splits as markdown");
  report_cmd->add_option("--scores", report.scores, "scores.csv written by score")->required()->check(CLI::ExistingFile);
  report_cmd->add_option("--tree", report.tree, "tree.json written by tree (optional)");
  report_cmd->add_option("--out", report.out, "Output directory")->required();

  std::vector<std::string> argv_store{"extrapolmv"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : argv_store) argv.push_back(s.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitError;
  }

  try {
    if (*fit_cmd) return cmd_fit(ctx, fit);
    if (*score_cmd) return cmd_score(ctx, score);
    if (*tree_cmd) return cmd_tree(ctx, tree);
    if (*sim_cmd) return cmd_simulate(ctx, sim);
    if (*report_cmd) return cmd_report(ctx, report);
  } catch (const DataError& e) {
    err << "error: " << e.what() << error_context(e) << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}

}  // namespace extrapolmv
