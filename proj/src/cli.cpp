#include "rsm/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "rsm/csv.hpp"
#include "rsm/error.hpp"
#include "rsm/evaluation.hpp"
#include "rsm/kernels.hpp"
#include "rsm/random.hpp"
#include "rsm/synthetic.hpp"

namespace rsm {
namespace {

namespace fs = std::filesystem;

std::size_t grid_index(const DoseGrid& grid, const std::vector<int>& codes) {
  std::size_t idx = 0;
  for (std::size_t f = 0; f < grid.factors(); ++f) idx = idx * grid.level_count(f) + static_cast<std::size_t>(codes[f]);
  return idx;
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  for (const auto& part : split(value, ',')) {
    const auto t = trim(part);
    if (!t.empty()) out.emplace_back(t);
  }
  return out;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? "," : "") + items[i];
  return out;
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

// ---------------------------------------------------------------- commands

struct Context {
  RunConfig cfg;
  DoseGrid grid = DoseGrid::lung_cancer();
  std::ostream& log;
  fs::path out_dir;
};

DoseGrid load_grid(const RunConfig& cfg) {
  return cfg.grid.empty() ? DoseGrid::lung_cancer() : DoseGrid::from_csv_file(cfg.grid);
}

std::vector<NamedDataset> load_data(const RunConfig& cfg, const DoseGrid& grid) {
  if (!cfg.data.starts_with("synthetic:")) return ingest_file(cfg.data, grid);
  const std::string kind = cfg.data.substr(10);
  auto normal = [&] {
    return NamedDataset{"normal", hill_surface_dataset(grid, HillSurface::normal_like(), cfg.noise,
                                                       derive_seed(cfg.data_seed, 0))};
  };
  auto cancer = [&] {
    return NamedDataset{"cancer", hill_surface_dataset(grid, HillSurface::cancer_like(), cfg.noise,
                                                       derive_seed(cfg.data_seed, 1))};
  };
  if (kind == "cancer") return {cancer()};
  if (kind == "normal") return {normal()};
  if (kind == "cells") return {normal(), cancer()};
  if (kind == "gp") {
    if (grid.factors() != 3) throw ConfigError("synthetic:gp needs a 3-factor grid");
    const std::vector<double> thetas{1.24, 2.0, 1.24};
    return {{"gp", gp_dataset(grid, KernelSpec::matern52(), thetas, 0.04, 0.5, cfg.noise * cfg.noise,
                              derive_seed(cfg.data_seed, 2))}};
  }
  throw ConfigError("unknown synthetic data '" + kind + "' (expected cancer, normal, cells or gp)");
}

ModelSettings model_settings(const RunConfig& cfg) {
  ModelSettings s;
  try {
    s.kernel = KernelSpec::parse(cfg.kernel);
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  s.kriging.tau2 = cfg.tau2;
  s.kriging.n_restarts = cfg.kriging_restarts;
  s.mlp.restarts = cfg.restarts;
  s.mlp.epochs = cfg.epochs;
  s.hill.n_starts = cfg.hill_starts;
  return s;
}

std::vector<ModelKind> model_kinds(const RunConfig& cfg) {
  std::vector<ModelKind> out;
  for (const auto& m : cfg.models) out.push_back(parse_model_kind(m));
  if (out.empty()) throw ConfigError("no models selected");
  return out;
}

std::vector<DesignFamily> design_families(const RunConfig& cfg) {
  std::vector<DesignFamily> out;
  for (const auto& d : cfg.designs) out.push_back(DesignFamily::parse(d, cfg.replicates));
  if (out.empty()) throw ConfigError("no designs selected");
  return out;
}

void write_file(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IngestionError("cannot write '" + path.string() + "'");
  body(out);
  if (!out) throw IngestionError("error writing '" + path.string() + "'");
}

std::string stem(const std::string& dataset, ModelKind kind, const DesignFamily& family) {
  return dataset + "_" + model_id(kind) + "_" + family.name;
}

/// The model of replicate 0 of `family`, fitted exactly as the comparison fits it.
AnyModel fit_first_replicate(const Context& ctx, const Dataset& data, ModelKind kind, const DesignFamily& family,
                             const ModelSettings& settings) {
  const std::uint64_t seed = replicate_seed(ctx.cfg.seed, family, 0);
  const Design design = family.realize(ctx.grid, full_factorial(ctx.grid), seed);
  const Dataset train = select_runs(data, design);
  auto outcome = fit_model(kind, train, ctx.grid, settings, fit_seed(seed, kind));
  if (!outcome.model) throw FitFailedError(model_label(kind) + " on " + family.name + ": " + outcome.failure, {});
  return std::move(*outcome.model);
}

void cmd_fit(Context& ctx) {
  const auto settings = model_settings(ctx.cfg);
  for (const auto& ds : load_data(ctx.cfg, ctx.grid)) {
    for (const auto& family : design_families(ctx.cfg)) {
      for (ModelKind kind : model_kinds(ctx.cfg)) {
        const AnyModel model = fit_first_replicate(ctx, ds.data, kind, family, settings);
        const std::string base = stem(ds.name, kind, family);
        write_file(ctx.out_dir / (base + ".model"), [&](std::ostream& o) { save_model(o, model); });
        if (const auto* k = std::get_if<KrigingModel>(&model)) {
          FitConfig boot = settings.kriging;
          boot.seed = ctx.cfg.seed;
          const auto report = parameter_report(*k, ctx.cfg.bootstrap, boot);
          write_file(ctx.out_dir / (base + "_params.txt"), [&](std::ostream& o) { o << report.to_text(); });
          ctx.log << base << ":\n" << report.to_text();
        } else {
          ctx.log << base << ": fitted\n";
        }
      }
    }
  }
}

void cmd_compare(Context& ctx) {
  const auto settings = model_settings(ctx.cfg);
  const auto models = model_kinds(ctx.cfg);
  const auto families = design_families(ctx.cfg);
  for (const auto& ds : load_data(ctx.cfg, ctx.grid)) {
    const auto report = run_comparison(ds.data, ctx.grid, families, models, settings, ctx.cfg.seed, ctx.cfg.threads);
    const std::string table = report.comparison_table();
    write_file(ctx.out_dir / (ds.name + "_comparison.txt"), [&](std::ostream& o) { o << table; });
    write_file(ctx.out_dir / (ds.name + "_comparison.csv"), [&](std::ostream& o) { report.write_csv(o); });
    ctx.log << ds.name << "\n" << table;
  }
}

void cmd_scatter(Context& ctx) {
  const auto settings = model_settings(ctx.cfg);
  for (const auto& ds : load_data(ctx.cfg, ctx.grid)) {
    for (const auto& family : design_families(ctx.cfg)) {
      for (ModelKind kind : model_kinds(ctx.cfg)) {
        const AnyModel model = fit_first_replicate(ctx, ds.data, kind, family, settings);
        const auto sc = scatter_data(model, ds.data);
        const std::string base = stem(ds.name, kind, family);
        write_file(ctx.out_dir / (base + "_scatter.csv"), [&](std::ostream& o) { sc.write_csv(o); });
        ctx.log << base << ": " << format_cell(mse(sc.predicted, sc.observed), pearson(sc.predicted, sc.observed))
                << "\n";
      }
    }
  }
}

void cmd_contour(Context& ctx) {
  const auto settings = model_settings(ctx.cfg);
  const auto& names = ctx.grid.factor_names();
  std::size_t fixed = names.size();
  for (std::size_t f = 0; f < names.size(); ++f) {
    if (names[f] == ctx.cfg.fixed_factor || factor_letter(f) == ctx.cfg.fixed_factor) fixed = f;
  }
  if (fixed == names.size()) throw ConfigError("unknown fixed factor '" + ctx.cfg.fixed_factor + "'");
  for (const auto& ds : load_data(ctx.cfg, ctx.grid)) {
    for (const auto& family : design_families(ctx.cfg)) {
      for (ModelKind kind : model_kinds(ctx.cfg)) {
        const AnyModel model = fit_first_replicate(ctx, ds.data, kind, family, settings);
        const auto grid = contour_grid(model, fixed, ctx.cfg.fixed_value, ctx.cfg.resolution);
        const std::string file = stem(ds.name, kind, family) + "_contour_" + factor_letter(fixed) + ".csv";
        write_file(ctx.out_dir / file, [&](std::ostream& o) { grid.write_csv(o); });
        ctx.log << file << "\n";
      }
    }
  }
}

void cmd_kernel_curve(Context& ctx) {
  KernelSpec spec;
  try {
    spec = KernelSpec::parse(ctx.cfg.kernel);
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  const auto curve = kernel_curve(spec, ctx.cfg.thetas, ctx.cfg.h_max, ctx.cfg.points);
  const std::string file = "kernel_curve_" + spec.name() + ".csv";
  write_file(ctx.out_dir / file, [&](std::ostream& o) { curve.write_csv(o); });
  ctx.log << file << "\n";
}

void cmd_gen_synthetic(Context& ctx) {
  const auto sets = load_data(ctx.cfg, ctx.grid);
  write_file(ctx.out_dir / "grid.csv", [&](std::ostream& o) { ctx.grid.write_csv(o); });
  write_file(ctx.out_dir / "data.csv", [&](std::ostream& o) {
    std::vector<std::string> header;
    for (std::size_t f = 0; f < ctx.grid.factors(); ++f) header.push_back("code" + factor_letter(f));
    for (const auto& s : sets) header.push_back(s.name);
    write_csv_row(o, header);
    const auto& design = sets.front().data.design;
    for (Eigen::Index r = 0; r < design.runs(); ++r) {
      std::vector<std::string> row;
      for (Eigen::Index f = 0; f < design.dims(); ++f) row.push_back(std::to_string(design.coded_rows(r, f)));
      for (const auto& s : sets) row.push_back(format_double(s.data.responses(r)));
      write_csv_row(o, row);
    }
  });
  ctx.log << "data.csv: " << sets.size() << " response column(s), " << sets.front().data.size() << " runs\n";
}

const std::map<std::string, void (*)(Context&)>& commands() {
  static const std::map<std::string, void (*)(Context&)> table{
      {"fit", cmd_fit},         {"compare", cmd_compare},           {"scatter", cmd_scatter},
      {"contour", cmd_contour}, {"kernel-curve", cmd_kernel_curve}, {"gen-synthetic", cmd_gen_synthetic}};
  return table;
}

void execute(RunConfig cfg, std::ostream& log) {
  const auto it = commands().find(cfg.command);
  if (it == commands().end()) throw ConfigError("unknown command '" + cfg.command + "'");
  // absolute paths keep the manifest replayable from any directory
  if (!cfg.data.starts_with("synthetic:")) cfg.data = fs::absolute(cfg.data).lexically_normal().string();
  if (!cfg.grid.empty()) cfg.grid = fs::absolute(cfg.grid).lexically_normal().string();
  Context ctx{cfg, load_grid(cfg), log, fs::path(cfg.out)};
  fs::create_directories(ctx.out_dir);
  write_file(ctx.out_dir / "manifest.txt", [&](std::ostream& o) { o << cfg.to_text(); });
  it->second(ctx);
}

// ---------------------------------------------------------------- parsing

std::string describe_command(const std::string& name) {
  if (name == "fit") return "fit models on a design and write model documents and Kriging parameters";
  if (name == "compare") return "compare models over design families (table and per-replicate CSV)";
  if (name == "scatter") return "observed versus predicted responses over the full grid";
  if (name == "contour") return "prediction grid over two factors with the third held fixed";
  if (name == "kernel-curve") return "correlation against distance for a kernel and ranges";
  return "write a synthetic dose grid and data file";
}

struct FlagSpec {
  const char* key;
  const char* help;
};

constexpr FlagSpec kFlags[] = {
    {"data", "data CSV path or synthetic:<cancer|normal|cells|gp>"},
    {"grid", "dose-grid CSV (default: built-in lung-cancer grid)"},
    {"models", "comma-separated models: kriging,mlp,poly,hill"},
    {"designs", "comma-separated design families: full, rd<n>[x<reps>], d<codes>"},
    {"kernel", "gauss, matern12, matern32, matern52 or matern(p=N)"},
    {"tau2", "Kriging noise variance"},
    {"seed", "master seed"},
    {"replicates", "replicates per random design family"},
    {"restarts", "network restarts (best of k)"},
    {"epochs", "network training epochs"},
    {"kriging-restarts", "likelihood optimizer restarts"},
    {"hill-starts", "Hill-based least-squares starts"},
    {"noise", "synthetic data noise standard deviation"},
    {"data-seed", "synthetic data seed"},
    {"fixed-factor", "contour: factor held fixed"},
    {"fixed-value", "contour: standardized value of the fixed factor"},
    {"resolution", "contour: points per axis"},
    {"thetas", "kernel-curve: comma-separated ranges"},
    {"h-max", "kernel-curve: largest distance"},
    {"points", "kernel-curve: number of distances"},
    {"bootstrap", "fit: parametric bootstrap resamples for parameter SDs"},
    {"threads", "worker threads (results do not depend on it)"},
    {"out", "output directory"},
};

std::string key_of(const std::string& flag) {
  std::string k = flag;
  std::replace(k.begin(), k.end(), '-', '_');
  return k;
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  try {
    if constexpr (std::is_floating_point_v<T>) {
      return parse_double(value);
    } else {
      const long v = parse_long(value);
      if (v < 0 && std::is_unsigned_v<T>) throw DomainError("negative");
      return static_cast<T>(v);
    }
  } catch (const DomainError&) {
    throw ConfigError("'" + key + "': bad value '" + value + "'");
  }
}

}  // namespace

// ---------------------------------------------------------------- ingestion

std::vector<NamedDataset> ingest(std::istream& in, const DoseGrid& grid) {
  const auto table = read_csv(in);
  const std::size_t nf = grid.factors();
  std::vector<int> factor_col(nf, -1);
  bool coded = true;
  for (std::size_t f = 0; f < nf; ++f) factor_col[f] = table.column("code" + factor_letter(f));
  if (std::find(factor_col.begin(), factor_col.end(), -1) != factor_col.end()) {
    coded = false;
    for (std::size_t f = 0; f < nf; ++f) factor_col[f] = table.column(grid.factor_names()[f]);
    if (std::find(factor_col.begin(), factor_col.end(), -1) != factor_col.end()) {
      throw IngestionError("data needs columns code" + factor_letter(0) + ".. (coded levels) or " +
                           grid.factor_names()[0] + ".. (actual doses)");
    }
  }
  std::vector<std::size_t> response_cols;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (std::find(factor_col.begin(), factor_col.end(), static_cast<int>(c)) == factor_col.end()) {
      response_cols.push_back(c);
    }
  }
  if (response_cols.empty()) throw IngestionError("data has no response column");
  if (table.rows.empty()) throw IngestionError("data has no rows");

  const Design full = full_factorial(grid);
  std::vector<std::size_t> order;  // grid index of each data row
  std::vector<std::size_t> seen(grid.grid_size(), 0);
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::size_t rowno = r + 1;
    std::vector<int> codes(nf);
    for (std::size_t f = 0; f < nf; ++f) {
      const std::string& cell = row[static_cast<std::size_t>(factor_col[f])];
      int code = -1;
      try {
        code = coded ? static_cast<int>(parse_long(cell)) : grid.code_of_dose(f, parse_double(cell));
      } catch (const DomainError&) {
        throw IngestionError("row " + std::to_string(rowno) + ": unreadable level '" + cell + "'", rowno);
      }
      if (code < 0 || static_cast<std::size_t>(code) >= grid.level_count(f)) {
        throw IngestionError("row " + std::to_string(rowno) + ": unknown level '" + cell + "' for factor " +
                                 grid.factor_names()[f],
                             rowno);
      }
      codes[f] = code;
    }
    const std::size_t idx = grid_index(grid, codes);
    if (seen[idx]) {
      throw IngestionError("row " + std::to_string(rowno) + ": duplicate run (same levels as row " +
                               std::to_string(seen[idx]) + ")",
                           rowno);
    }
    seen[idx] = rowno;
    order.push_back(idx);
  }

  std::vector<std::size_t> sorted(order.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) sorted[i] = i;
  std::sort(sorted.begin(), sorted.end(), [&](std::size_t a, std::size_t b) { return order[a] < order[b]; });

  Design design;
  const auto n = static_cast<Eigen::Index>(order.size());
  design.rows.resize(n, static_cast<Eigen::Index>(nf));
  design.coded_rows.resize(n, static_cast<Eigen::Index>(nf));
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto src = static_cast<Eigen::Index>(order[sorted[static_cast<std::size_t>(i)]]);
    design.rows.row(i) = full.rows.row(src);
    design.coded_rows.row(i) = full.coded_rows.row(src);
  }
  design.provenance = full.provenance;

  std::vector<NamedDataset> out;
  for (std::size_t c : response_cols) {
    NamedDataset ds{table.header[c], {design, Eigen::VectorXd(n)}};
    for (Eigen::Index i = 0; i < n; ++i) {
      const std::size_t r = sorted[static_cast<std::size_t>(i)];
      const std::string& cell = table.rows[r][c];
      double y = 0.0;
      try {
        y = parse_double(cell);
      } catch (const DomainError&) {
        throw IngestionError("row " + std::to_string(r + 1) + ": unreadable response '" + cell + "'", r + 1);
      }
      if (!(y >= 0.0 && y <= 1.0)) {
        throw IngestionError("row " + std::to_string(r + 1) + ": response " + cell + " in column " + table.header[c] +
                                 " is outside [0, 1]",
                             r + 1);
      }
      ds.data.responses(i) = y;
    }
    out.push_back(std::move(ds));
  }
  return out;
}

std::vector<NamedDataset> ingest_file(const std::string& path, const DoseGrid& grid) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open '" + path + "'");
  return ingest(in, grid);
}

Dataset select_runs(const Dataset& data, const Design& sub) {
  std::map<std::vector<int>, Eigen::Index> where;
  for (Eigen::Index r = 0; r < data.design.runs(); ++r) {
    const Eigen::VectorXi c = data.design.coded_rows.row(r);
    where[std::vector<int>(c.begin(), c.end())] = r;
  }
  Dataset out;
  out.design = sub;
  out.responses.resize(sub.runs());
  for (Eigen::Index r = 0; r < sub.runs(); ++r) {
    const Eigen::VectorXi c = sub.coded_rows.row(r);
    const auto it = where.find(std::vector<int>(c.begin(), c.end()));
    if (it == where.end()) throw ConfigError("the data lacks design run " + std::to_string(r + 1));
    out.responses(r) = data.responses(it->second);
  }
  return out;
}

// ---------------------------------------------------------------- RunConfig

void RunConfig::set(const std::string& raw_key, const std::string& raw_value) {
  const std::string key = key_of(std::string(trim(raw_key)));
  const std::string value(trim(raw_value));
  if (key == "command") command = value;
  else if (key == "data") data = value;
  else if (key == "grid") grid = value;
  else if (key == "models") models = split_list(lower(value));
  else if (key == "designs") designs = split_list(value);
  else if (key == "kernel") kernel = value;
  else if (key == "tau2") tau2 = parse_number<double>(key, value);
  else if (key == "seed") seed = parse_number<std::uint64_t>(key, value);
  else if (key == "replicates") replicates = parse_number<int>(key, value);
  else if (key == "restarts") restarts = parse_number<int>(key, value);
  else if (key == "epochs") epochs = parse_number<int>(key, value);
  else if (key == "kriging_restarts") kriging_restarts = parse_number<int>(key, value);
  else if (key == "hill_starts") hill_starts = parse_number<int>(key, value);
  else if (key == "noise") noise = parse_number<double>(key, value);
  else if (key == "data_seed") data_seed = parse_number<std::uint64_t>(key, value);
  else if (key == "fixed_factor") fixed_factor = value;
  else if (key == "fixed_value") fixed_value = parse_number<double>(key, value);
  else if (key == "resolution") resolution = parse_number<int>(key, value);
  else if (key == "thetas") {
    thetas.clear();
    for (const auto& t : split_list(value)) thetas.push_back(parse_number<double>(key, t));
  } else if (key == "h_max") h_max = parse_number<double>(key, value);
  else if (key == "points") points = parse_number<int>(key, value);
  else if (key == "bootstrap") bootstrap = parse_number<int>(key, value);
  else if (key == "threads") threads = parse_number<unsigned>(key, value);
  else if (key == "out") out = value;
  else throw ConfigError("unknown configuration key '" + raw_key + "'");
  if (tau2 < 0.0 || noise < 0.0 || replicates < 1 || restarts < 1 || epochs < 0 || kriging_restarts < 1 ||
      hill_starts < 1 || bootstrap < 0) {
    throw ConfigError("'" + key + "': value out of range: " + value);
  }
}

void RunConfig::apply_text(std::istream& in) {
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("configuration line " + std::to_string(lineno) + ": expected key = value");
    }
    set(std::string(t.substr(0, eq)), std::string(t.substr(eq + 1)));
  }
}

std::string RunConfig::to_text() const {
  std::vector<std::string> th;
  for (double t : thetas) th.push_back(format_double(t));
  std::ostringstream o;
  o << "command = " << command << '\n'
    << "data = " << data << '\n'
    << "grid = " << grid << '\n'
    << "models = " << join(models) << '\n'
    << "designs = " << join(designs) << '\n'
    << "kernel = " << kernel << '\n'
    << "tau2 = " << format_double(tau2) << '\n'
    << "seed = " << seed << '\n'
    << "replicates = " << replicates << '\n'
    << "restarts = " << restarts << '\n'
    << "epochs = " << epochs << '\n'
    << "kriging_restarts = " << kriging_restarts << '\n'
    << "hill_starts = " << hill_starts << '\n'
    << "noise = " << format_double(noise) << '\n'
    << "data_seed = " << data_seed << '\n'
    << "fixed_factor = " << fixed_factor << '\n'
    << "fixed_value = " << format_double(fixed_value) << '\n'
    << "resolution = " << resolution << '\n'
    << "thetas = " << join(th) << '\n'
    << "h_max = " << format_double(h_max) << '\n'
    << "points = " << points << '\n'
    << "bootstrap = " << bootstrap << '\n';
  return o.str();
}

// ---------------------------------------------------------------- entry point

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Response-surface comparison of Kriging and baseline models on factorial dose designs", "rsm"};
  app.require_subcommand(1);

  struct Bound {
    std::string key;
    std::string value;
    CLI::Option* option = nullptr;
  };
  std::map<std::string, std::vector<Bound>> bound;  // per subcommand
  std::map<std::string, std::string> config_path, replay_out;

  for (const auto& [name, fn] : commands()) {
    (void)fn;
    auto* sub = app.add_subcommand(name, describe_command(name));
    auto& list = bound[name];
    list.reserve(std::size(kFlags));
    for (const auto& f : kFlags) {
      list.push_back({f.key, "", nullptr});
      list.back().option = sub->add_option(std::string("--") + f.key, list.back().value, f.help);
    }
    sub->add_option("--config", config_path[name], "key = value configuration file (flags win)");
  }
  auto* replay = app.add_subcommand("replay", "rerun a command from its manifest");
  std::string manifest;
  replay->add_option("manifest", manifest, "manifest.txt written by an earlier run")->required();
  replay->add_option("--out", replay_out["replay"], "output directory (default: the manifest's directory)");
  std::string threads;
  replay->add_option("--threads", threads, "worker threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return ConfigError("").code();
  }

  try {
    RunConfig cfg;
    if (replay->parsed()) {
      std::ifstream in(manifest);
      if (!in) throw IngestionError("cannot open '" + manifest + "'");
      cfg.apply_text(in);
      cfg.out = replay_out["replay"].empty() ? fs::absolute(manifest).parent_path().string() : replay_out["replay"];
      if (!threads.empty()) cfg.set("threads", threads);
    } else {
      for (const auto& [name, list] : bound) {
        if (!app.got_subcommand(name)) continue;
        cfg.command = name;
        if (!config_path[name].empty()) {
          std::ifstream in(config_path[name]);
          if (!in) throw IngestionError("cannot open '" + config_path[name] + "'");
          cfg.apply_text(in);
          cfg.command = name;
        }
        for (const auto& b : list) {
          if (b.option->count() > 0) cfg.set(b.key, b.value);
        }
      }
    }
    execute(cfg, out);
    return 0;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.code();
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return IngestionError("").code();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace rsm
