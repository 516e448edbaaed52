#include "cli.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iomanip>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

#include "cohdisc/bounds.hpp"
#include "cohdisc/emulator.hpp"
#include "cohdisc/qkd.hpp"
#include "cohdisc/receivers.hpp"
#include "cohdisc/tradeoff.hpp"

namespace cohdisc::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

/// Raised when an optimizer or oracle fails to converge.
struct NumericalFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) parts.push_back(trim(item));
  if (!s.empty() && s.back() == sep) parts.emplace_back();
  return parts;
}

double parse_double(const std::string& text) {
  double v = 0.0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  const auto res = std::from_chars(first, last, v);
  if (text.empty() || res.ec != std::errc() || res.ptr != last || !std::isfinite(v)) {
    throw std::invalid_argument("not a number: '" + text + "'");
  }
  return v;
}

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int{digest[i]};
  return hex.str();
}

void write_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + tmp.string());
    f << content;
    if (!f.flush()) throw std::runtime_error("cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::optional<fs::path> env_output_dir() {
  if (const char* dir = std::getenv(kOutputDirEnv); dir != nullptr && *dir != '\0') return fs::path(dir);
  return std::nullopt;
}

struct Emitted {
  std::string name;
  std::string content;
};

json manifest_for(const std::string& command, const json& parameters, const std::vector<Emitted>& files) {
  json outputs = json::array();
  for (const auto& f : files) outputs.push_back({{"file", f.name}, {"sha256", sha256_hex(f.content)}});
  json m{{"command", command}, {"tool_version", kToolVersion}, {"parameters", parameters}, {"outputs", outputs}};
  if (parameters.contains("seed")) m["seed"] = parameters["seed"];
  return m;
}

// Single-table commands: --out, else the env directory, else stdout.
void emit_table(const std::string& command, const std::string& out_option, const json& parameters,
                const std::string& csv, std::ostream& out) {
  std::optional<fs::path> target;
  if (!out_option.empty()) {
    target = fs::path(out_option);
  } else if (auto dir = env_output_dir()) {
    target = *dir / (command + ".csv");
  }
  if (!target) {
    out << csv;
    return;
  }
  const Emitted table{target->filename().string(), csv};
  write_atomic(*target, csv);
  fs::path manifest = *target;
  manifest += ".manifest.json";
  write_atomic(manifest, manifest_for(command, parameters, {table}).dump(2) + "\n");
}

std::string cell(double v) { return format_number(v); }
std::string cell(unsigned v) { return std::to_string(v); }

struct ErrorRatesArgs {
  std::string alpha2;
  std::string m = "0,1,2";
  bool experimental = false;
  bool kennedy = false;
  std::string out;
};

std::string error_rates_csv(const ErrorRatesArgs& a, json& params) {
  const auto grid = parse_grid(a.alpha2);
  const auto ms = parse_count_list(a.m);
  SweepOptions opt;
  if (a.experimental) {
    opt.pnr_base.efficiency = kApparatusPnrEfficiency;
    opt.pnr_base.mode_match = kApparatusModeMatch;
  }
  params = {{"alpha2", grid}, {"m", ms}, {"detector", a.experimental ? "experimental" : "ideal"},
            {"kennedy", a.kennedy}};

  std::vector<std::uint32_t> thresholds(ms.begin(), ms.end());
  const auto pnr = pnr_rows(grid, thresholds, opt);
  const auto kennedy = a.kennedy ? kennedy_rows(grid, opt) : std::vector<AmplitudeRow>{};

  std::ostringstream csv;
  csv << "alpha_sq,receiver,m,beta_opt,p_err,p_inc\n";
  auto put = [&](const AmplitudeRow& r, const char* receiver) {
    csv << cell(r.alpha_sq) << ',' << receiver << ',' << cell(unsigned{r.threshold}) << ',' << cell(r.displacement)
        << ',' << cell(r.rates.p_err) << ',' << cell(r.rates.p_inc) << '\n';
  };
  std::size_t k = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (std::size_t j = 0; j < ms.size(); ++j) put(pnr[k++], "pnr");
    if (a.kennedy) put(kennedy[i], "kennedy");
  }
  return csv.str();
}

struct TradeoffArgs {
  std::string alpha2;
  std::string m = "1,2";
  std::optional<double> beta;
  bool bound = true;
  std::string out;
};

std::string tradeoff_csv(const TradeoffArgs& a, json& params) {
  const auto grid = parse_grid(a.alpha2);
  const auto ms = parse_count_list(a.m);
  params = {{"alpha2", grid}, {"m", ms}, {"optimal_id", a.bound}};
  SweepOptions opt;
  opt.with_optimal_id = a.bound;
  if (a.beta) {
    if (!(*a.beta >= 0.0)) throw std::invalid_argument("--beta must be >= 0");
    opt.fixed_displacement = *a.beta;
    params["beta"] = *a.beta;
  }
  const auto rows = comparison_rows(grid, std::vector<std::uint32_t>(ms.begin(), ms.end()), opt);

  std::ostringstream csv;
  csv << "alpha_sq,m,p_inc,p_err_pnr,p_err_hd,p_err_optimal_id,acceptance,beta_opt,threshold_B\n";
  for (const auto& r : rows) {
    if (!r.optimal_id_certified) {
      throw NumericalFailure("optimal intermediate bound not certified at alpha_sq=" + cell(r.alpha_sq));
    }
    csv << cell(r.alpha_sq) << ',' << r.threshold << ',' << cell(r.p_inc) << ',' << cell(r.p_err_pnr) << ','
        << cell(r.p_err_homodyne) << ',' << (a.bound ? cell(r.p_err_optimal_id) : std::string()) << ','
        << cell(1.0 - r.p_inc) << ',' << cell(r.displacement) << ',' << cell(r.homodyne_threshold) << '\n';
  }
  return csv.str();
}

struct KeyRateArgs {
  std::string eta = "0.01,0.05,0.1,0.5,0.9,1";
  std::string receivers = "pnr,homodyne";
  unsigned m_cap = 10;
  std::string out;
};

std::string keyrate_csv(const KeyRateArgs& a, json& params) {
  const auto etas = parse_grid(a.eta);
  std::vector<ReceiverKind> kinds;
  for (const auto& name : split(a.receivers, ',')) {
    if (name == "pnr") kinds.push_back(ReceiverKind::pnr);
    else if (name == "homodyne" || name == "hd") kinds.push_back(ReceiverKind::homodyne);
    else throw std::invalid_argument("unknown receiver '" + name + "'");
  }
  if (kinds.empty()) throw std::invalid_argument("no receivers selected");
  for (double e : etas) {
    if (!(e > 0.0 && e <= 1.0)) throw std::invalid_argument("transmittance must lie in (0,1]");
  }
  if (a.m_cap > 30) throw std::invalid_argument("--m-cap must be at most 30");
  params = {{"eta", etas}, {"receivers", a.receivers}, {"m_cap", a.m_cap}};

  KeyRateSearch search;
  search.m_cap = a.m_cap;
  std::vector<std::future<KeyRatePoint>> jobs;
  for (double e : etas) {
    for (auto k : kinds) {
      jobs.push_back(std::async(std::launch::async, [=] { return optimize_key_rate(ChannelModel{e}, k, search); }));
    }
  }

  std::ostringstream csv;
  csv << "eta,receiver,G,alpha_opt,beta_opt,m_opt,p_err,p_inc,G_raw,threshold_B,I_B,I_E\n";
  for (auto& job : jobs) {
    const auto p = job.get();
    const bool pnr = p.receiver == ReceiverKind::pnr;
    csv << cell(p.transmittance) << ',' << to_string(p.receiver) << ',' << cell(p.reported_key_rate()) << ','
        << cell(p.alpha_opt) << ',' << (pnr ? cell(p.beta_opt) : "") << ',' << (pnr ? cell(p.m_opt) : "") << ','
        << cell(p.p_err) << ',' << cell(p.p_inc) << ',' << cell(p.key_rate) << ','
        << (pnr ? "" : cell(p.threshold_opt)) << ',' << cell(p.bob_information) << ',' << cell(p.eve_information)
        << '\n';
  }
  return csv.str();
}

struct MonteCarloArgs {
  std::string config;
  long long trials = -1;
  long long seed = -1;
  std::optional<double> alpha2;
  std::optional<double> homodyne_threshold;
  std::optional<double> displacement;
  std::optional<long long> pnr_threshold;
  bool ideal = false;
  unsigned threads = 0;
  std::string out_dir;
};

json predicted(const DiscriminationResult& r) {
  return {{"p_err", r.error_defined ? json(r.p_err) : json(nullptr)}, {"p_inc", r.p_inc}};
}

int montecarlo(const MonteCarloArgs& a, std::ostream& out) {
  json cfg_json = json::object();
  if (!a.config.empty()) {
    std::ifstream f(a.config);
    if (!f) throw std::invalid_argument("cannot open config file " + a.config);
    try {
      cfg_json = json::parse(f);
    } catch (const json::parse_error& e) {
      throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
    }
  }
  if (a.trials != -1) {
    if (a.trials < 1) throw std::invalid_argument("--trials must be >= 1");
    cfg_json["trials"] = a.trials;
  }
  if (a.seed != -1) {
    if (a.seed < 0) throw std::invalid_argument("--seed must be >= 0");
    cfg_json["seed"] = a.seed;
  }
  if (a.alpha2) {
    cfg_json.erase("alpha");
    cfg_json["alpha_sq"] = *a.alpha2;
  }
  if (a.homodyne_threshold) cfg_json["homodyne"]["threshold"] = *a.homodyne_threshold;
  if (a.displacement) cfg_json["pnr"]["displacement"] = *a.displacement;
  if (a.pnr_threshold) {
    if (*a.pnr_threshold < 0) throw std::invalid_argument("--m must be >= 0");
    cfg_json["pnr"]["threshold"] = *a.pnr_threshold;
  }
  if (a.ideal) {
    cfg_json["homodyne"]["efficiency"] = 1.0;
    cfg_json["homodyne"]["electronic_noise_variance"] = 0.0;
    cfg_json["pnr"]["efficiency"] = 1.0;
    cfg_json["pnr"]["mode_match"] = 1.0;
    cfg_json["pnr"]["dark_count_mean"] = 0.0;
  }
  const ExperimentConfig cfg = experiment_config_from_json(cfg_json);

  const unsigned threads = a.threads > 0 ? a.threads : std::max(1u, std::thread::hardware_concurrency());
  const auto records = simulate(cfg, threads);

  const ComparisonAxis hd_axis{cfg.ensemble.alpha, 1.0};
  const ComparisonAxis pnr_axis{cfg.ensemble.alpha, 1.0};
  const auto hd = estimate_rates(records, ReceiverChannel::homodyne, hd_axis);
  const auto pnr = estimate_rates(records, ReceiverChannel::pnr, pnr_axis);

  json report{
      {"trials", cfg.trials},
      {"seed", cfg.seed},
      {"interval", "wilson_95"},
      {"homodyne",
       {{"estimate", to_json(hd)},
        {"corrected", to_json(inefficiency_correct(hd, cfg.homodyne.efficiency))},
        {"predicted", predicted(homodyne_receiver(cfg.ensemble, cfg.homodyne))}}},
      {"pnr",
       {{"estimate", to_json(pnr)},
        {"corrected", to_json(inefficiency_correct(pnr, cfg.pnr.efficiency))},
        {"predicted", predicted(pnr_receiver(cfg.ensemble, cfg.pnr))}}},
  };

  std::ostringstream records_csv;
  write_records_csv(records_csv, records);
  const fs::path dir = !a.out_dir.empty() ? fs::path(a.out_dir) : env_output_dir().value_or(fs::path("."));
  const std::vector<Emitted> files{
      {"records.csv", records_csv.str()},
      {"config.json", to_json(cfg).dump(2) + "\n"},
      {"report.json", report.dump(2) + "\n"},
  };
  for (const auto& f : files) write_atomic(dir / f.name, f.content);
  json params = to_json(cfg);
  const auto manifest = manifest_for("montecarlo", params, files);
  write_atomic(dir / "manifest.json", manifest.dump(2) + "\n");

  out << "trials " << cfg.trials << ", seed " << cfg.seed << "\n";
  auto summary = [&](const char* name, const RateEstimate& e) {
    out << name << ": p_inc " << format_number(e.p_inc_hat) << " [" << format_number(e.p_inc_ci.low) << ", "
        << format_number(e.p_inc_ci.high) << "]";
    if (e.error_defined) {
      out << ", p_err " << format_number(e.p_err_hat) << " [" << format_number(e.p_err_ci.low) << ", "
          << format_number(e.p_err_ci.high) << "]";
    } else {
      out << ", p_err undefined (no conclusive records)";
    }
    out << "\n";
  };
  summary("homodyne", hd);
  summary("pnr", pnr);
  out << "records checksum " << manifest["outputs"][0]["sha256"].get<std::string>() << "\n";
  return kExitOk;
}

}  // namespace

std::vector<double> parse_grid(const std::string& raw) {
  const std::string text = trim(raw);
  if (text.empty()) throw std::invalid_argument("empty grid");
  if (text.find(':') != std::string::npos) {
    const auto parts = split(text, ':');
    if (parts.size() != 3) throw std::invalid_argument("grid must look like start:stop:step");
    const double start = parse_double(parts[0]);
    const double stop = parse_double(parts[1]);
    const double step = parse_double(parts[2]);
    if (!(step > 0.0)) throw std::invalid_argument("grid step must be > 0");
    if (stop < start) throw std::invalid_argument("grid stop must be >= start");
    const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 0.5)) + 1;
    if (count > 100000) throw std::invalid_argument("grid has too many points");
    std::vector<double> grid(count);
    for (std::size_t i = 0; i < count; ++i) grid[i] = start + step * static_cast<double>(i);
    return grid;
  }
  std::vector<double> grid;
  for (const auto& p : split(text, ',')) grid.push_back(parse_double(p));
  return grid;
}

std::vector<unsigned> parse_count_list(const std::string& raw) {
  const std::string text = trim(raw);
  if (text.empty()) throw std::invalid_argument("empty list");
  std::vector<unsigned> out;
  for (const auto& p : split(text, ',')) {
    unsigned v = 0;
    const auto res = std::from_chars(p.data(), p.data() + p.size(), v);
    if (p.empty() || res.ec != std::errc() || res.ptr != p.data() + p.size()) {
      throw std::invalid_argument("not a non-negative integer: '" + p + "'");
    }
    out.push_back(v);
  }
  return out;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Binary coherent-state discrimination: receivers, bounds, key rates and Monte Carlo."};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  ErrorRatesArgs er;
  auto* cmd_er = app.add_subcommand("error-rates", "PNR error rates with optimized displacement per amplitude and m");
  cmd_er->add_option("--alpha2", er.alpha2, "mean photon grid, start:stop:step or comma list")->required();
  cmd_er->add_option("--m", er.m, "comma list of PNR thresholds");
  auto* ideal_flag = cmd_er->add_flag("--ideal", "perfect detectors (default)");
  cmd_er->add_flag("--experimental-defaults", er.experimental, "apparatus efficiency and mode matching")
      ->excludes(ideal_flag);
  cmd_er->add_flag("--kennedy", er.kennedy, "append a Kennedy-receiver row per amplitude");
  cmd_er->add_option("--out", er.out, "output CSV path");

  TradeoffArgs tr;
  auto* cmd_tr = app.add_subcommand("tradeoff", "PNR vs matched-inconclusive homodyne vs optimal intermediate bound");
  cmd_tr->add_option("--alpha2", tr.alpha2, "mean photon grid")->required();
  cmd_tr->add_option("--m", tr.m, "comma list of PNR thresholds");
  cmd_tr->add_option("--beta", tr.beta, "fixed PNR displacement instead of the optimum");
  bool no_bound = false;
  cmd_tr->add_flag("--no-bound", no_bound, "skip the optimal intermediate oracle");
  cmd_tr->add_option("--out", tr.out, "output CSV path");

  KeyRateArgs kr;
  auto* cmd_kr = app.add_subcommand("keyrate", "optimized key rate versus channel transmittance");
  cmd_kr->add_option("--eta", kr.eta, "transmittance grid");
  cmd_kr->add_option("--receivers", kr.receivers, "comma list of pnr, homodyne");
  cmd_kr->add_option("--m-cap", kr.m_cap, "largest PNR threshold considered");
  cmd_kr->add_option("--out", kr.out, "output CSV path");

  MonteCarloArgs mc;
  auto* cmd_mc = app.add_subcommand("montecarlo", "emulate the two-receiver experiment");
  cmd_mc->add_option("--config", mc.config, "JSON experiment config");
  cmd_mc->add_option("--trials", mc.trials, "number of pulses (overrides config)");
  cmd_mc->add_option("--seed", mc.seed, "RNG seed (overrides config)");
  cmd_mc->add_option("--alpha2", mc.alpha2, "mean photon number (overrides config)");
  cmd_mc->add_option("--threshold-b", mc.homodyne_threshold, "homodyne quadrature threshold B");
  cmd_mc->add_option("--beta", mc.displacement, "PNR displacement");
  cmd_mc->add_option("--m", mc.pnr_threshold, "PNR inconclusive threshold");
  cmd_mc->add_flag("--ideal", mc.ideal, "perfect detectors instead of the apparatus defaults");
  cmd_mc->add_option("--threads", mc.threads, "worker threads (0 = hardware)");
  cmd_mc->add_option("--out-dir", mc.out_dir, "output directory");

  std::vector<std::string> reversed(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    json params;
    if (cmd_er->parsed()) {
      const auto csv = error_rates_csv(er, params);
      emit_table("error-rates", er.out, params, csv, out);
    } else if (cmd_tr->parsed()) {
      tr.bound = !no_bound;
      const auto csv = tradeoff_csv(tr, params);
      emit_table("tradeoff", tr.out, params, csv, out);
    } else if (cmd_kr->parsed()) {
      const auto csv = keyrate_csv(kr, params);
      emit_table("keyrate", kr.out, params, csv, out);
    } else if (cmd_mc->parsed()) {
      return montecarlo(mc, out);
    }
  } catch (const NumericalFailure& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::runtime_error& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitOk;
}

}  // namespace cohdisc::cli
