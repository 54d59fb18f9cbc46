#include "satflow/cli.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <sstream>

#include <CLI11.hpp>
#include <Eigen/Core>
#include <json.hpp>

#include "satflow/config.hpp"
#include "satflow/io.hpp"

namespace satflow {

using nlohmann::json;

namespace {

struct Usage : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

std::string compiler() {
#if defined(__clang__)
  return std::string("clang ") + __clang_version__;
#elif defined(__GNUC__)
  return std::string("gcc ") + __VERSION__;
#else
  return "unknown";
#endif
}

json versions() {
  return {{"satflow", kVersion},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION)},
          {"compiler", compiler()},
          {"cxx_standard", static_cast<long>(__cplusplus)}};
}

json read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot read config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

json nullable(const std::optional<double>& x) { return x ? json(*x) : json(nullptr); }

std::string envelope_name(EnvelopeStatus s) {
  switch (s) {
    case EnvelopeStatus::Holds:
      return "holds";
    case EnvelopeStatus::Violated:
      return "violated";
    case EnvelopeStatus::NotAsserted:
      break;
  }
  return "not_asserted";
}

json level_stats(const LevelResult& level) {
  const Trajectory& t = level.trajectory;
  const auto& first = t.records.front();
  const auto& last = t.records.back();
  int newton_max = 0, picard_total = 0, clamped = 0;
  for (const SolveReport& r : t.reports) {
    newton_max = std::max(newton_max, r.newton_iterations);
    picard_total += r.picard_iterations;
    clamped += r.clamped_iterates;
  }
  json j{{"h", t.h},
         {"tau", t.tau},
         {"steps", t.steps()},
         {"cells", t.disc->cells.size()},
         {"mass_initial", first.mass},
         {"mass_final", last.mass},
         {"free_energy_initial", first.free_energy},
         {"free_energy_final", last.free_energy},
         {"min_density", last.min_density},
         {"max_density", last.max_density},
         {"newton_max_iterations", newton_max},
         {"picard_total_iterations", picard_total},
         {"clamped_iterates", clamped},
         {"retries", level.retries},
         {"eps1", nullable(level.eps1)},
         {"eps2", nullable(level.eps2)},
         {"rate", nullable(level.rate)}};
  if (level.envelope) {
    j["envelope"] = envelope_name(level.envelope->status);
    j["envelope_first_violation"] =
        level.envelope->first_violation ? json(*level.envelope->first_violation) : json(nullptr);
  }
  return j;
}

struct Common {
  std::string config_path;
  std::string output;
  bool quiet = false;
};

ExperimentSpec load_spec(const Common& c, json& config) {
  if (c.config_path.empty()) throw Usage("--config is required");
  config = read_config_file(c.config_path);
  ExperimentSpec spec = parse_config(config);
  if (!c.output.empty()) spec.output_dir = c.output;
  return spec;
}

int execute(const Common& c, bool convergence, std::ostream& out, std::ostream& err) {
  json config;
  ExperimentSpec spec = load_spec(c, config);
  if (spec.output_dir.empty()) throw Usage("an output directory is required (--output or output_dir)");
  if (convergence) {
    if (spec.estimator == Estimator::None) throw ConfigError("/estimator", "convergence needs eps1 or eps2");
  } else {
    spec.spacings.resize(1);
    spec.estimator = Estimator::None;
  }

  const auto start = std::chrono::steady_clock::now();
  ArtifactBundle bundle = run_preset(spec);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  std::vector<std::string> warnings = bundle.warnings;
  json levels = json::array();
  for (std::size_t k = 0; k < bundle.levels.size(); ++k) {
    json stats = level_stats(bundle.levels[k]);
    const int clamped = stats["clamped_iterates"].get<int>();
    if (clamped > 0) {
      warnings.push_back("level " + std::to_string(k) + ": " + std::to_string(clamped) +
                         " Newton iterates were clamped into the admissible range");
    }
    levels.push_back(std::move(stats));
  }
  if (!c.quiet) {
    for (const std::string& w : warnings) err << "warning: " << w << '\n';
  }

  json files = json::array();
  for (const auto& f : bundle.files) files.push_back(std::filesystem::relative(f, spec.output_dir).generic_string());
  files.push_back("manifest.json");
  const json manifest{{"command", convergence ? "convergence" : "run"},
                      {"config", config},
                      {"spec", to_json(spec)},
                      {"versions", versions()},
                      {"wall_seconds", wall},
                      {"files", files},
                      {"warnings", warnings},
                      {"levels", levels}};
  const auto path = spec.output_dir / "manifest.json";
  std::ofstream mf(path);
  if (!mf) throw io::IoError("cannot write " + path.string());
  mf << manifest.dump(2) << '\n';

  if (!c.quiet) {
    for (const json& l : levels) {
      out << "h=" << l["h"].get<double>() << " tau=" << l["tau"].get<double>() << " steps=" << l["steps"]
          << " mass=" << l["mass_final"].get<double>();
      if (!l["eps1"].is_null()) out << " eps1=" << l["eps1"].get<double>();
      if (!l["eps2"].is_null()) out << " eps2=" << l["eps2"].get<double>();
      if (!l["rate"].is_null()) out << " rate=" << l["rate"].get<double>();
      out << '\n';
    }
    out << "wrote " << path.string() << '\n';
  }
  return 0;
}

int norms(const Common& c, const std::string& field, std::ostream& out) {
  json config;
  const ExperimentSpec spec = load_spec(c, config);
  const DomainShape domain = spec.domain.build();
  const CellIndexSet cells = build_index_set(MeshSpec::uniform(domain.dimension(), spec.spacings.front()), domain);
  const Eigen::VectorXd p = io::field_on_grid(io::read_snapshot_csv(field), cells);
  json result{{"mass", cells.cell_volume() * p.sum()},
              {"h1_seminorm", h1_seminorm(p, cells)},
              {"wm11_upper_bound", wm11_upper_bound(p, cells)}};
  if (cells.dimension() == 1) result["wm11_exact"] = wm11_exact_1d(p, cells);
  out << result.dump(2) << '\n';
  return 0;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Finite-volume solver for aggregation-diffusion equations with saturating mobility", "satflow"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  Common common;
  std::string field;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config_path, "JSON experiment file")->check(CLI::ExistingFile);
    sub->add_flag("--quiet", common.quiet, "suppress progress and warnings");
  };
  CLI::App* run = app.add_subcommand("run", "solve on the first grid spacing and write snapshots");
  add_common(run);
  run->add_option("--output", common.output, "output directory (overrides output_dir)");
  CLI::App* conv = app.add_subcommand("convergence", "solve every spacing and write errors.csv");
  add_common(conv);
  conv->add_option("--output", common.output, "output directory (overrides output_dir)");
  CLI::App* norm = app.add_subcommand("norms", "discrete norms of a snapshot field on the configured grid");
  add_common(norm);
  norm->add_option("--field", field, "snapshot CSV")->required();
  CLI::App* presets = app.add_subcommand("presets", "list named experiments");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (presets->parsed()) {
      for (const std::string& name : preset_names()) out << name << "  " << preset_description(name) << '\n';
      return 0;
    }
    if (run->parsed()) return execute(common, false, out, err);
    if (conv->parsed()) return execute(common, true, out, err);
    return norms(common, field, out);
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace satflow
