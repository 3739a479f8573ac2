// ramansim: delay sweeps, heralded-state timelines, spectrum fits and
// validation for the two-isotope Raman coherence model.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "raman/config.hpp"
#include "raman/error.hpp"
#include "raman/experiments.hpp"
#include "raman/spectra.hpp"
#include "raman/svg_plot.hpp"

namespace fs = std::filesystem;
using namespace raman;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kNumerical = 2, kValidation = 3 };

struct Common {
  std::string config_path;
  std::string out_dir;
  int jobs = 0;
  bool svg = true;
};

RunConfig load(const Common& c) {
  RunConfig cfg = c.config_path.empty() ? RunConfig{} : load_run_config(c.config_path);
  if (!c.out_dir.empty()) cfg.output.dir = c.out_dir;
  cfg.output.svg = cfg.output.svg && c.svg;
  return cfg;
}

void write_file(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path().empty() ? fs::path(".") : path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << text;
  std::cout << "wrote " << path.string() << "\n";
}

const char* color_of(Variant v) {
  switch (v) {
    case Variant::noisy: return "#c0392b";
    case Variant::ideal: return "#000000";
    case Variant::mixture: return "#c0392b";
  }
  return "#000000";
}

int cmd_sweep(const Common& common, const std::string& variant) {
  const RunConfig cfg = load(common);
  std::vector<Variant> variants;
  if (variant == "all")
    variants = {Variant::noisy, Variant::ideal, Variant::mixture};
  else
    variants = {parse_variant(variant)};
  const auto records = run_sweep(cfg, variants, common.jobs);
  write_file(cfg.output.dir / "sweep.csv", sweep_csv(records));
  if (cfg.output.svg) {
    std::vector<PlotSeries> series;
    for (Variant v : variants) {
      PlotSeries s{variant_name(v), {}, {}, color_of(v), v == Variant::mixture};
      for (const auto& r : records)
        if (r.variant == v) {
          s.x.push_back(r.delta_t_ps);
          s.y.push_back(r.g2);
        }
      series.push_back(std::move(s));
    }
    write_file(cfg.output.dir / "sweep.svg",
               render_svg({"Stokes / anti-Stokes correlation", "delay (ps)", "g2_SA"}, series));
  }
  return kOk;
}

int cmd_herald(const Common& common) {
  const RunConfig cfg = load(common);
  const auto records = run_herald(cfg);
  write_file(cfg.output.dir / "herald.csv", herald_csv(records));
  if (cfg.output.svg) {
    PlotSeries p1b1{"P(1) b1", {}, {}, "#1f77b4"}, p1b2{"P(1) b2", {}, {}, "#ff7f0e"};
    PlotSeries p2b1{"P(2) b1", {}, {}, "#1f77b4", true}, p2b2{"P(2) b2", {}, {}, "#ff7f0e", true};
    PlotSeries en{"E_N", {}, {}, "#000000"};
    for (const auto& r : records) {
      for (PlotSeries* s : {&p1b1, &p1b2, &p2b1, &p2b2, &en}) s->x.push_back(r.t_ps);
      p1b1.y.push_back(r.pop_b1[1]);
      p1b2.y.push_back(r.pop_b2[1]);
      p2b1.y.push_back(r.pop_b1[2]);
      p2b2.y.push_back(r.pop_b2[2]);
      en.y.push_back(r.e_n);
    }
    write_file(cfg.output.dir / "herald.svg",
               render_svg({"Heralded phonon state", "time after write pulse (ps)",
                           "population / E_N"},
                          {p1b1, p1b2, p2b1, p2b2, en}));
  }
  std::cout << "herald probability " << records.front().herald_prob << ", E_N(0) "
            << records.front().e_n << "\n";
  return kOk;
}

int cmd_fit(const std::string& spectrum_path, const std::string& guesses_path,
            const std::vector<std::string>& peak_args, bool independent_sigma,
            const std::string& out_dir) {
  if (!fs::exists(spectrum_path)) {
    std::cerr << "error: spectrum file '" << spectrum_path << "' does not exist\n";
    return kUsage;
  }
  const Spectrum spectrum = read_spectrum(spectrum_path);
  std::vector<VoigtPeak> guesses;
  if (!guesses_path.empty()) guesses = read_peak_guesses(guesses_path);
  for (const auto& arg : peak_args) {
    std::istringstream is(arg);
    VoigtPeak p;
    char c1 = 0, c2 = 0, c3 = 0;
    if (!(is >> p.center >> c1 >> p.gamma_l >> c2 >> p.sigma_g >> c3 >> p.area) || c1 != ',' ||
        c2 != ',' || c3 != ',')
      throw ConfigError("--peak expects center,gamma_l,sigma_g,area; got '" + arg + "'");
    guesses.push_back(p);
  }
  if (guesses.empty()) {
    // The two symmetric-stretch lines of the CS2 isotopologues.
    guesses = {{646.7, 2.0, 0.5, 1.0}, {655.3, 1.0, 0.5, 0.5}};
  }
  FitOptions opt;
  opt.shared_sigma_g = !independent_sigma;
  const FitResult fit = fit_voigt_peaks(spectrum, guesses, opt);
  std::optional<DerivedParams> derived;
  if (fit.peaks.size() >= 2) {
    // The two largest lines define the phonon pair.
    std::vector<VoigtPeak> by_area = fit.peaks;
    std::sort(by_area.begin(), by_area.end(),
              [](const VoigtPeak& a, const VoigtPeak& b) { return a.area > b.area; });
    derived = derive_model_params({by_area[0], by_area[1]});
  }
  const std::string report = format_fit_report(fit, derived);
  std::cout << report;
  const fs::path dir = out_dir.empty() ? fs::path("out") : fs::path(out_dir);
  write_file(dir / "report.txt", report);
  if (derived) write_file(dir / "config_fragment.toml", format_config_fragment(*derived));
  return kOk;
}

int cmd_validate(const Common& common) {
  const RunConfig cfg = load(common);
  const auto checks = run_validation(cfg, common.jobs);
  bool ok = true;
  for (const auto& c : checks) {
    std::printf("%-4s %-30s deviation %-12.4g tolerance %-10.3g %s\n", c.passed ? "PASS" : "FAIL",
                c.name.c_str(), c.deviation, c.tolerance, c.detail.c_str());
    ok = ok && c.passed;
  }
  if (!ok) {
    std::cout << "failed:";
    for (const auto& c : checks)
      if (!c.passed) std::cout << " " << c.name;
    std::cout << "\n";
  }
  return ok ? kOk : kValidation;
}

int cmd_synth(const std::string& path, double noise, unsigned long seed) {
  // Lines at the CS2 isotope positions with lifetime-limited widths of 8.4 ps and 1.7 ps.
  const auto fwhm_cm = [](double tau_ps) { return 1.0 / (2.0 * std::numbers::pi * tau_ps) / kSpeedOfLightCmPerPs; };
  const std::vector<VoigtPeak> peaks = {{646.7, fwhm_cm(1.7), 0.3, 1.0}, {655.3, fwhm_cm(8.4), 0.3, 0.5}};
  const Spectrum s = synthesize_spectrum(peaks, uniform_grid(630.0, 670.0, 0.05), 0.01, noise, seed);
  std::ostringstream os;
  os << "# shift_cm  counts\n";
  for (std::size_t i = 0; i < s.shift.size(); ++i) os << s.shift[i] << " " << s.counts[i] << "\n";
  write_file(path, os.str());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-isotope Raman coherence simulator"};
  app.require_subcommand(1);

  Common common;
  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config_path, "run configuration file")->check(CLI::ExistingFile);
    sub->add_option("--out", common.out_dir, "output directory (overrides output.dir)");
    sub->add_option("--jobs", common.jobs, "worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
    sub->add_flag("--svg,!--no-svg", common.svg, "write SVG plots next to the CSV");
  };

  std::string variant = "all";
  auto* sweep = app.add_subcommand("sweep", "g2 versus write-read delay");
  add_common(sweep);
  sweep->add_option("--variant", variant, "noisy|ideal|mixture|all")
      ->check(CLI::IsMember({"noisy", "ideal", "mixture", "all"}));

  auto* herald = app.add_subcommand("herald", "heralded phonon populations and entanglement");
  add_common(herald);

  auto* validate = app.add_subcommand("validate", "run the invariant and oracle checks");
  add_common(validate);

  std::string spectrum_path, guesses_path, fit_out;
  std::vector<std::string> peak_args;
  bool independent_sigma = false;
  auto* fit = app.add_subcommand("fit", "fit Voigt lines to a cw Raman spectrum");
  fit->add_option("spectrum", spectrum_path, "two-column spectrum file")->required();
  fit->add_option("--guesses", guesses_path, "file with 'center gamma_l sigma_g area' rows");
  fit->add_option("--peak", peak_args, "inline guess center,gamma_l,sigma_g,area (repeatable)");
  fit->add_flag("--independent-sigma", independent_sigma, "fit one instrument width per line");
  fit->add_option("--out", fit_out, "output directory");

  std::string synth_path = "spectrum.txt";
  double synth_noise = 0.01;
  unsigned long synth_seed = 1;
  auto* synth = app.add_subcommand("synth-spectrum", "write a synthetic two-line CS2 spectrum");
  synth->add_option("path", synth_path, "output file");
  synth->add_option("--noise", synth_noise, "noise std as a fraction of the maximum");
  synth->add_option("--seed", synth_seed, "random seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  try {
    if (*sweep) return cmd_sweep(common, variant);
    if (*herald) return cmd_herald(common);
    if (*validate) return cmd_validate(common);
    if (*fit) return cmd_fit(spectrum_path, guesses_path, peak_args, independent_sigma, fit_out);
    if (*synth) return cmd_synth(synth_path, synth_noise, synth_seed);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kUsage;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kUsage;
  } catch (const InvalidArgument& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kUsage;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
