#include "nlsplit/cli_io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

namespace nlsplit {

namespace fs = std::filesystem;

Gridd default_grid(int dimension, double t_final) {
  if (dimension == 2) return Gridd(2, 512, 32.0);
  double half_width = 64;
  if (t_final > 5) half_width = 64 * std::exp2(std::ceil(std::log2(t_final / 5) - 1e-12));
  const auto points = static_cast<Eigen::Index>(std::min(64.0 * half_width, 16384.0));
  return Gridd(dimension, points, half_width);
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const std::string t = trim(text);
  const auto res = std::from_chars(t.data(), t.data() + t.size(), value);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size())
    throw ParseError("config key '" + key + "': cannot read '" + text + "' as a number");
  return value;
}

std::vector<double> parse_list(const std::string& key, const std::string& text) {
  std::string body = trim(text);
  if (body.size() >= 2 && body.front() == '[' && body.back() == ']') body = body.substr(1, body.size() - 2);
  std::vector<double> out;
  if (trim(body).empty()) return out;
  std::stringstream ss(body);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number<double>(key, item));
  return out;
}

bool parse_flag(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t == "on" || t == "true" || t == "1") return true;
  if (t == "off" || t == "false" || t == "0") return false;
  throw ParseError("config key '" + key + "': expected on/off, got '" + text + "'");
}

std::string format_list(const std::vector<double>& values) {
  std::string out = "[";
  for (std::size_t i = 0; i < values.size(); ++i) out += (i ? ", " : "") + format_double(values[i]);
  return out + "]";
}

std::vector<std::pair<std::string, std::string>> config_entries(const StudyConfig& cfg) {
  std::vector<std::pair<std::string, std::string>> out{
      {"dimension", std::to_string(cfg.grid.dimension())},
      {"points", std::to_string(cfg.grid.points())},
      {"half_width", format_double(cfg.grid.half_width())},
      {"sigma", format_double(cfg.scheme.sigma)},
      {"tau_list", format_list(cfg.tau_list)},
      {"t_final", format_double(cfg.t_final)},
      {"datum", to_string(cfg.datum)},
      {"seed", std::to_string(cfg.seed)},
      {"filter", cfg.scheme.filter_enabled ? "on" : "off"},
      {"reference_refinement", std::to_string(cfg.reference_refinement)},
      {"checkpoint_stride", std::to_string(cfg.checkpoint_stride)},
      {"rough_exponent", format_double(cfg.datum_params.rough_exponent)},
      {"modulation", format_double(cfg.datum_params.modulation)},
      {"linear_only", cfg.linear_only ? "on" : "off"},
      {"tolerance_scale", format_double(cfg.tolerance_scale)},
  };
  if (!cfg.horizons.empty()) out.emplace_back("horizons", format_list(cfg.horizons));
  if (!cfg.sample_times.empty()) out.emplace_back("sample_times", format_list(cfg.sample_times));
  return out;
}

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << content;
  out.close();
  if (!out) throw IoError("failed writing " + path.string());
}

// Rows are rendered by `cells`, one vector of already formatted fields each.
template <typename Row>
void write_csv(const fs::path& path, const std::vector<std::string>& header, const std::vector<Row>& rows,
               const std::function<std::vector<std::string>(const Row&)>& cells) {
  std::string text;
  auto line = [&](const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) text += (i ? "," : "") + fields[i];
    text += '\n';
  };
  line(header);
  for (const auto& r : rows) line(cells(r));
  write_text(path, text);
}

}  // namespace

StudyConfig parse_config_text(const std::string& text) {
  std::map<std::string, std::string> entries;
  std::istringstream in(text);
  std::string raw;
  int line_number = 0;
  while (std::getline(in, raw)) {
    ++line_number;
    const std::string line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError("config line " + std::to_string(line_number) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ParseError("config line " + std::to_string(line_number) + ": empty key");
    if (!entries.emplace(key, trim(line.substr(eq + 1))).second)
      throw ParseError("config key '" + key + "' given twice");
  }

  static const std::set<std::string> known{
      "dimension",         "points",         "half_width", "sigma",       "tau_list",     "tau",
      "t_final",           "datum",          "seed",       "filter",      "reference_refinement",
      "checkpoint_stride", "rough_exponent", "modulation", "horizons",    "sample_times", "linear_only",
      "tolerance_scale"};
  for (const auto& [key, value] : entries)
    if (!known.count(key)) throw ParseError("unknown config key '" + key + "'");
  if (entries.count("tau") && entries.count("tau_list")) throw ParseError("config keys 'tau' and 'tau_list' both given");

  auto get = [&](const std::string& key) -> const std::string* {
    const auto it = entries.find(key);
    return it == entries.end() ? nullptr : &it->second;
  };

  StudyConfig cfg;
  if (auto v = get("t_final")) cfg.t_final = parse_number<double>("t_final", *v);
  const int dimension = get("dimension") ? parse_number<int>("dimension", *get("dimension")) : 1;
  if (dimension != 1 && dimension != 2) throw ConstraintError("dimension", "must be 1 or 2");
  if (!(cfg.t_final > 0) || !std::isfinite(cfg.t_final)) throw ConstraintError("t_final", "must be positive");
  const Gridd fallback = default_grid(dimension, cfg.t_final);
  const auto points = get("points") ? parse_number<long long>("points", *get("points")) : fallback.points();
  const double half_width = get("half_width") ? parse_number<double>("half_width", *get("half_width")) : fallback.half_width();
  cfg.grid = Gridd(dimension, points, half_width);

  if (auto v = get("sigma")) cfg.scheme.sigma = parse_number<double>("sigma", *v);
  if (auto v = get("tau_list")) cfg.tau_list = parse_list("tau_list", *v);
  if (auto v = get("tau")) cfg.tau_list = {parse_number<double>("tau", *v)};
  if (auto v = get("datum")) {
    try {
      cfg.datum = parse_datum_kind(*v);
    } catch (const UnknownKindError& e) {
      throw ConstraintError("datum", e.what());
    }
  }
  if (auto v = get("seed")) cfg.seed = parse_number<std::uint64_t>("seed", *v);
  if (auto v = get("filter")) cfg.scheme.filter_enabled = parse_flag("filter", *v);
  if (auto v = get("reference_refinement")) cfg.reference_refinement = parse_number<int>("reference_refinement", *v);
  if (auto v = get("checkpoint_stride")) cfg.checkpoint_stride = parse_number<std::int64_t>("checkpoint_stride", *v);
  if (auto v = get("rough_exponent")) cfg.datum_params.rough_exponent = parse_number<double>("rough_exponent", *v);
  if (auto v = get("modulation")) cfg.datum_params.modulation = parse_number<double>("modulation", *v);
  if (auto v = get("horizons")) cfg.horizons = parse_list("horizons", *v);
  if (auto v = get("sample_times")) cfg.sample_times = parse_list("sample_times", *v);
  if (auto v = get("linear_only")) cfg.linear_only = parse_flag("linear_only", *v);
  if (auto v = get("tolerance_scale")) cfg.tolerance_scale = parse_number<double>("tolerance_scale", *v);

  if (get("tau") && !(cfg.tau_list.front() > 0 && cfg.tau_list.front() < 1))
    throw ConstraintError("tau", "must lie in (0, 1)");
  cfg.validate();
  return cfg;
}

StudyConfig parse_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::string serialize_config(const StudyConfig& cfg) {
  std::string out;
  for (const auto& [key, value] : config_entries(cfg)) out += key + " = " + value + "\n";
  return out;
}

void write_convergence_csv(const std::vector<ConvergenceRow>& rows, const fs::path& path) {
  std::vector<ConvergenceRow> sorted = rows;
  std::stable_sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.tau > b.tau; });
  write_csv<ConvergenceRow>(path, {"tau", "n_steps", "sup_error_l2", "final_error_l2"}, sorted, [](const auto& r) {
    return std::vector<std::string>{format_double(r.tau), std::to_string(r.n_steps), format_double(r.sup_error_l2),
                                    format_double(r.final_error_l2)};
  });
}

void write_uniformity_csv(const std::vector<UniformityRow>& rows, const fs::path& path) {
  write_csv<UniformityRow>(path, {"horizon", "sup_error_filtered", "sup_error_unfiltered"}, rows, [](const auto& r) {
    return std::vector<std::string>{format_double(r.horizon), format_double(r.sup_error_filtered),
                                    format_double(r.sup_error_unfiltered)};
  });
}

void write_trajectory_csv(const std::vector<TrajectoryRow>& rows, const fs::path& path) {
  write_csv<TrajectoryRow>(
      path, {"t", "mass", "energy", "pseudoconf_total", "j_norm_sq", "l_r0_norm", "compensated_decay"}, rows,
      [](const auto& r) {
        return std::vector<std::string>{format_double(r.t),         format_double(r.mass),
                                        format_double(r.energy),    format_double(r.pseudoconf_total),
                                        format_double(r.j_norm_sq), format_double(r.l_r0_norm),
                                        format_double(r.compensated_decay)};
      });
}

void write_scattering_csv(const std::vector<ScatteringRow>& rows, const fs::path& path) {
  write_csv<ScatteringRow>(path, {"t", "cauchy_l2", "sigma_diff"}, rows, [](const auto& r) {
    return std::vector<std::string>{format_double(r.t), format_double(r.cauchy_l2), format_double(r.sigma_diff)};
  });
}

void write_invariants_csv(const std::vector<InvariantResult>& rows, const fs::path& path) {
  write_csv<InvariantResult>(path, {"name", "measured", "bound", "pass"}, rows, [](const auto& r) {
    return std::vector<std::string>{r.name, format_double(r.measured), format_double(r.bound), r.pass ? "1" : "0"};
  });
}

std::string RunManifest::to_json() const {
  nlohmann::ordered_json j;
  j["version"] = version;
  j["study"] = study;
  j["timestamp"] = timestamp;
  j["output_dir"] = output_dir.string();
  nlohmann::ordered_json c = nlohmann::ordered_json::object();
  for (const auto& [key, value] : config_entries(config)) c[key] = value;
  j["config"] = c;
  j["config_text"] = serialize_config(config);
  j["files"] = files;
  nlohmann::ordered_json s = nlohmann::ordered_json::object();
  for (const auto& [key, value] : summary) s[key] = std::isfinite(value) ? nlohmann::ordered_json(value) : nlohmann::ordered_json(format_double(value));
  j["summary"] = s;
  return j.dump(2) + "\n";
}

void write_manifest(const RunManifest& manifest) { write_text(manifest.output_dir / "manifest.json", manifest.to_json()); }

namespace {

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

int run_study(const std::string& study, const StudyConfig& cfg, const fs::path& out_dir, bool quiet) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory " + out_dir.string() + ": " + ec.message());

  RunManifest manifest;
  manifest.config = cfg;
  manifest.output_dir = out_dir;
  manifest.study = study;
  manifest.timestamp = utc_timestamp();
  int code = exit_ok;

  auto emit = [&](const std::string& name, auto&& writer) {
    writer(out_dir / name);
    manifest.files.push_back(name);
  };

  if (study == "converge") {
    const ConvergenceResult r = run_convergence_study(cfg);
    emit("convergence.csv", [&](const fs::path& p) { write_convergence_csv(r.rows, p); });
    manifest.summary = {{"fitted_order", r.fitted_order},
                        {"largest_tau_excluded", double(r.largest_tau_excluded)},
                        {"strictly_decreasing", double(r.strictly_decreasing)}};
  } else if (study == "uniformity") {
    const UniformityResult r = run_uniformity_study(cfg);
    emit("uniformity.csv", [&](const fs::path& p) { write_uniformity_csv(r.rows, p); });
    manifest.summary = {{"tau", r.tau}, {"growth_ratio", r.growth_ratio}};
  } else if (study == "decay") {
    const DecayResult r = run_decay_study(cfg);
    emit("trajectory.csv", [&](const fs::path& p) { write_trajectory_csv(r.reference, p); });
    emit("trajectory_numerical.csv", [&](const fs::path& p) { write_trajectory_csv(r.numerical, p); });
    manifest.summary = {{"delta_r0", r.delta_r0},
                        {"window_start", r.window_start},
                        {"reference_spread", r.reference_spread},
                        {"numerical_spread", r.numerical_spread},
                        {"reference_raw_decreasing", double(r.reference_raw_decreasing)}};
  } else if (study == "scatter") {
    const ScatteringResult r = run_scattering_study(cfg);
    emit("scattering.csv", [&](const fs::path& p) { write_scattering_csv(r.reference, p); });
    emit("scattering_numerical.csv", [&](const fs::path& p) { write_scattering_csv(r.numerical, p); });
    manifest.summary = {{"tau", r.tau},
                        {"u_plus_error_tau", r.u_plus_error_tau},
                        {"u_plus_error_quarter_tau", r.u_plus_error_quarter_tau},
                        {"u_plus_shrink", r.u_plus_shrink},
                        {"reference_cauchy_decreasing", double(r.reference_cauchy_decreasing)}};
  } else if (study == "invariants") {
    const std::vector<InvariantResult> r = run_invariant_suite(cfg);
    emit("invariants.csv", [&](const fs::path& p) { write_invariants_csv(r, p); });
    double failed = 0;
    for (const auto& entry : r) failed += entry.pass ? 0 : 1;
    manifest.summary = {{"checks", double(r.size())}, {"failed", failed}};
    if (failed > 0) code = exit_invariant;
  } else {
    const std::vector<TrajectoryRow> r = run_single(cfg);
    emit("trajectory.csv", [&](const fs::path& p) { write_trajectory_csv(r, p); });
    manifest.summary = {{"rows", double(r.size())}};
  }

  write_manifest(manifest);
  if (!quiet) {
    std::cout << study << ": wrote";
    for (const auto& f : manifest.files) std::cout << ' ' << (out_dir / f).string();
    std::cout << '\n';
    for (const auto& [key, value] : manifest.summary) std::cout << "  " << key << " = " << format_double(value) << '\n';
  }
  return code;
}

}  // namespace

int cli_main(int argc, char** argv) {
  CLI::App app{"Filtered Lie-Trotter splitting for the defocusing NLS: studies and checks", "nlsplit"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "./out";
  bool quiet = false;
  const std::vector<std::pair<std::string, std::string>> studies{
      {"converge", "convergence order over a dyadic tau list"},
      {"uniformity", "error growth over increasing horizons at fixed tau"},
      {"decay", "dispersive decay of the L^{2s+2} norm"},
      {"scatter", "Cauchy differences of the scattering profile"},
      {"invariants", "pass/fail report of every invariant"},
      {"single-run", "diagnostics along one filtered run"}};
  for (const auto& [name, help] : studies) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "config file (key = value lines)")->required();
    sub->add_option("--out", out_dir, "output directory")->capture_default_str();
    sub->add_flag("--quiet", quiet, "no summary on stdout");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return exit_ok;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    CLI::App* failing = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    std::cerr << failing->help();
    return exit_config;
  }

  const std::string study = app.get_subcommands().front()->get_name();
  try {
    return run_study(study, parse_config(config_path), out_dir, quiet);
  } catch (const NonFiniteError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_numerical;
  } catch (const BoundaryLeakError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_numerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_config;
  }
}

}  // namespace nlsplit
