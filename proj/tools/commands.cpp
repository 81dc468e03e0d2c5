#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <limits>
#include <stdexcept>

#include <CLI11.hpp>

#include "gplp/io.hpp"

namespace gplp::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Decorrelates the noise stream from the subsampling stream.
std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Linear interpolation of a time series at t (exact on sample times).
double interpolate(const TimeSeries& ts, double t) {
  const auto it = std::lower_bound(ts.times.begin(), ts.times.end(), t);
  if (it == ts.times.end()) {
    return ts.values.back();
  }
  const auto k = static_cast<std::size_t>(it - ts.times.begin());
  if (*it == t || k == 0) {
    return ts.values[k];
  }
  const double w = (t - ts.times[k - 1]) / (ts.times[k] - ts.times[k - 1]);
  return ts.values[k - 1] * (1.0 - w) + ts.values[k] * w;
}

void ensure_parent(const fs::path& p) {
  if (p.has_parent_path()) {
    fs::create_directories(p.parent_path());
  }
}

class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace

SynthData synthesize(const SynthOptions& options) {
  options.spec.validate();
  SynthData d;
  d.clean = synth_line_spectra(options.spec);
  d.truth = synth_low_component(options.spec);
  const TimeSeries kept = subsample(d.clean, options.fraction, options.mode, options.seed);
  d.observations = add_noise(kept, options.noise_sigma, splitmix64(options.seed));
  return d;
}

SynthPaths cmd_synth(const SynthOptions& options, const fs::path& out_dir) {
  const SynthData d = synthesize(options);
  fs::create_directories(out_dir);
  SynthPaths paths{out_dir / "clean.csv", out_dir / "observations.csv", out_dir / "truth.csv"};
  write_timeseries_csv(paths.clean, d.clean);
  write_timeseries_csv(paths.observations, d.observations);
  write_timeseries_csv(paths.truth, d.truth);
  return paths;
}

FitResult cmd_fit(const fs::path& observations, const fs::path& model, const FitConfig& config) {
  const TimeSeries ts = read_timeseries_csv(observations);
  const FitResult r = fit(ts, config);
  ensure_parent(model);
  json j = r;
  j["seed"] = config.seed;
  j["source"] = observations.string();
  write_json(model, j);
  return r;
}

std::vector<double> default_query_grid(const TimeSeries& observations) {
  const std::size_t n = observations.size();
  if (n < 2) {
    return observations.times;
  }
  return uniform_grid(observations.times.front(), observations.times.back(), 4 * (n - 1) + 1);
}

FilterOutcome cmd_filter(const fs::path& observations, const fs::path& model, const fs::path& out,
                         const FilterOptions& options) {
  if (!(options.cutoff_b > 0.0) || !std::isfinite(options.cutoff_b)) {
    throw std::domain_error("filter: cutoff must be a positive number of Hz");
  }
  const TimeSeries ts = read_timeseries_csv(observations);
  const SEHyperparams params = read_json(model).get<SEHyperparams>();
  const BandLimitedKernelSpec spec{params, options.cutoff_b};
  const std::vector<double> query = options.query ? *options.query : default_query_grid(ts);

  FilterOutcome outcome;
  outcome.posterior = posterior(ts, query, spec, options.component);
  ensure_parent(out);
  write_posterior_csv(out, outcome.posterior);

  if (options.spectrum_out) {
    const TimeSeries mean{query, outcome.posterior.mean};
    ensure_parent(*options.spectrum_out);
    write_spectrum_csv(*options.spectrum_out, fft_spectrum(mean));
  }
  if (options.verify) {
    auto mean_of = [&](Component c) {
      return c == options.component ? outcome.posterior.mean : posterior(ts, query, spec, c).mean;
    };
    const std::vector<double> low = mean_of(Component::Low);
    const std::vector<double> high = mean_of(Component::High);
    const std::vector<double> full = mean_of(Component::Full);
    double worst = 0.0;
    for (std::size_t i = 0; i < query.size(); ++i) {
      worst = std::max(worst, std::abs(low[i] + high[i] - full[i]));
    }
    outcome.additivity_error = worst;
  }
  return outcome;
}

ComparisonReport compare(const TimeSeries& observations, const TimeSeries& truth, double cutoff_b,
                         int order, const FitConfig& config,
                         const std::optional<SEHyperparams>& model) {
  if (!(cutoff_b > 0.0)) {
    throw std::domain_error("compare: cutoff must be positive");
  }
  truth.validate();
  ComparisonReport r;
  if (model) {
    r.fit.params = *model;
  } else {
    r.fit = fit(observations, config);
  }
  const BandLimitedKernelSpec spec{r.fit.params, cutoff_b};
  r.gplp = posterior(observations, truth.times, spec, Component::Low);
  r.gplp_mse = mse(r.gplp.mean, truth.values);
  const std::vector<double> sd = r.gplp.stddev();
  std::size_t inside = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (std::abs(r.gplp.mean[i] - truth.values[i]) <= kBand95 * sd[i]) {
      ++inside;
    }
  }
  r.coverage95 = static_cast<double>(inside) / static_cast<double>(truth.size());

  if (!is_uniform(observations.times)) {
    r.butterworth_note = "not applicable: observations are unevenly sampled";
    return r;
  }
  const double span = observations.times.back() - observations.times.front();
  const ButterworthSpec bspec{order, cutoff_b,
                              static_cast<double>(observations.size() - 1) / span};
  try {
    const SosFilter filter = design_butterworth(bspec);
    r.butterworth = filtfilt(observations.values, filter);
  } catch (const std::domain_error& e) {
    r.butterworth_note = std::string("not applicable: ") + e.what();
    return r;
  }
  std::vector<double> reference(observations.size());
  for (std::size_t i = 0; i < observations.size(); ++i) {
    reference[i] = interpolate(truth, observations.times[i]);
  }
  r.butterworth_applicable = true;
  r.butterworth_mse = mse(r.butterworth, reference);
  r.butterworth_note = "forward-backward filter at the observation times";
  return r;
}

json report_json(const ComparisonReport& r, double cutoff_b, int order) {
  json j{{"cutoff_b", cutoff_b},
         {"model", r.fit.params},
         {"gplp",
          {{"mse", r.gplp_mse},
           {"coverage95", r.coverage95},
           {"grid", "ground-truth times"},
           {"mean_policy", "empirical mean removed before conditioning and added back"}}},
         {"butterworth",
          {{"applicable", r.butterworth_applicable},
           {"order", order},
           {"note", r.butterworth_note},
           {"mse", r.butterworth_mse ? json(*r.butterworth_mse) : json()}}}};
  if (r.butterworth_mse) {
    j["gplp_better"] = r.gplp_mse < *r.butterworth_mse;
  }
  if (r.fit.restarts_tried > 0) {
    j["fit"] = r.fit;
  }
  return j;
}

ComparisonReport cmd_compare(const fs::path& observations, const fs::path& truth, double cutoff_b,
                             int order, const FitConfig& config,
                             const std::optional<fs::path>& model, const fs::path& out) {
  const TimeSeries obs = read_timeseries_csv(observations);
  const TimeSeries ref = read_timeseries_csv(truth);
  std::optional<SEHyperparams> params;
  if (model) {
    params = read_json(*model).get<SEHyperparams>();
  }
  ComparisonReport r = compare(obs, ref, cutoff_b, order, config, params);
  ensure_parent(out);
  write_json(out, report_json(r, cutoff_b, order));
  return r;
}

BandEnergy cmd_band_energy(const fs::path& input, double cutoff_hz,
                           const std::optional<fs::path>& json_out) {
  const TimeSeries ts = read_timeseries_csv(input);
  const BandEnergy e = band_energy(ts, cutoff_hz);
  if (json_out) {
    ensure_parent(*json_out);
    write_json(*json_out,
               json{{"ratio", e.ratio},
                    {"cutoff_hz", cutoff_hz},
                    {"low_power", e.low_power},
                    {"total_power", e.total_power},
                    {"degenerate", e.degenerate},
                    {"policy",
                     "mean removed before the FFT; power spectrum; DC bin counted in the low "
                     "band; a zero-energy signal reports 1.0"}});
  }
  return e;
}

namespace {

std::uint64_t resolve_seed(const CLI::Option* flag, std::uint64_t value) {
  if (flag->count() > 0) {
    return value;
  }
  const char* env = std::getenv("GPLP_SEED");
  if (env == nullptr || *env == '\0') {
    return 0;
  }
  char* end = nullptr;
  const unsigned long long parsed = std::strtoull(env, &end, 10);
  if (*end != '\0') {
    throw std::invalid_argument(std::string("GPLP_SEED is not an unsigned integer: ") + env);
  }
  return parsed;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Band-limited Gaussian process low-pass filtering of time series"};
  app.require_subcommand(1);

  // synth
  SynthOptions synth;
  fs::path synth_dir;
  std::string synth_mode = "even";
  bool synth_reference = false;
  std::uint64_t synth_seed = 0;
  auto* s = app.add_subcommand("synth", "Generate the line-spectra test signal and observations");
  s->add_option("--out-dir", synth_dir, "Directory for clean.csv, observations.csv, truth.csv")
      ->required();
  s->add_option("--low-freqs", synth.spec.freqs_low, "Frequencies kept by the filter (Hz)");
  s->add_option("--high-freqs", synth.spec.freqs_high, "Frequencies removed by the filter (Hz)");
  s->add_option("--t-start", synth.spec.t_start);
  s->add_option("--t-end", synth.spec.t_end);
  s->add_option("--n-points", synth.spec.n_points);
  s->add_option("--fraction", synth.fraction, "Fraction of samples observed");
  s->add_option("--mode", synth_mode)->check(CLI::IsMember({"even", "random"}));
  s->add_option("--noise-sigma", synth.noise_sigma);
  auto* synth_seed_opt = s->add_option("--seed", synth_seed);
  s->add_flag("--paper-defaults", synth_reference,
              "Reference signal, 25% even subsampling, noise sigma 1");

  // fit
  fs::path fit_in;
  fs::path fit_out;
  FitConfig fit_config;
  std::uint64_t fit_seed = 0;
  auto* f = app.add_subcommand("fit", "Fit SE hyperparameters by maximum likelihood");
  f->add_option("observations", fit_in, "Observations CSV (time,value)")->required();
  f->add_option("--out", fit_out, "Model JSON")->required();
  f->add_option("--restarts", fit_config.restarts);
  f->add_option("--tolerance", fit_config.tolerance);
  auto* fit_seed_opt = f->add_option("--seed", fit_seed);

  // filter
  fs::path filter_in;
  fs::path filter_model;
  fs::path filter_out;
  FilterOptions filter;
  std::string filter_component = "low";
  double grid_start = 0.0;
  double grid_end = 0.0;
  std::size_t grid_n = 0;
  std::string spectrum_path;
  bool filter_reference = false;
  auto* fl = app.add_subcommand("filter", "Posterior of the low (or high) frequency component");
  fl->add_option("observations", filter_in)->required();
  fl->add_option("--model", filter_model, "Model JSON from fit")->required();
  auto* cutoff_opt = fl->add_option("--cutoff", filter.cutoff_b, "Cutoff frequency b (Hz)");
  fl->add_option("--out", filter_out, "Posterior CSV")->required();
  fl->add_option("--component", filter_component)->check(CLI::IsMember({"low", "high", "full"}));
  auto* gs = fl->add_option("--grid-start", grid_start);
  auto* ge = fl->add_option("--grid-end", grid_end);
  auto* gn = fl->add_option("--grid-n", grid_n);
  gs->needs(ge, gn);
  ge->needs(gs, gn);
  gn->needs(gs, ge);
  fl->add_option("--spectrum", spectrum_path, "Also write the spectrum of the posterior mean");
  fl->add_flag("--verify", filter.verify, "Check low + high = full for the posterior means");
  fl->add_flag("--paper-defaults", filter_reference,
               "Cutoff 0.495 Hz on 5000 points over [-100, 100] s");

  // compare
  fs::path cmp_obs;
  fs::path cmp_truth;
  fs::path cmp_out;
  std::string cmp_model;
  double cmp_cutoff = 0.0;
  int cmp_order = kReferenceOrder;
  std::uint64_t cmp_seed = 0;
  bool cmp_reference = false;
  auto* c = app.add_subcommand("compare", "Score GPLP and Butterworth against the ground truth");
  c->add_option("observations", cmp_obs)->required();
  c->add_option("--truth", cmp_truth, "Ground-truth low component CSV")->required();
  auto* cmp_cutoff_opt = c->add_option("--cutoff", cmp_cutoff);
  c->add_option("--order", cmp_order, "Butterworth order");
  c->add_option("--model", cmp_model, "Reuse a fitted model instead of fitting");
  c->add_option("--out", cmp_out, "Report JSON")->required();
  auto* cmp_seed_opt = c->add_option("--seed", cmp_seed);
  c->add_flag("--paper-defaults", cmp_reference, "Cutoff 0.495 Hz, order 10");

  // band-energy
  fs::path be_in;
  double be_cutoff = 0.0;
  std::string be_json;
  auto* be = app.add_subcommand("band-energy", "Fraction of spectral power below a cutoff");
  be->add_option("input", be_in, "Uniformly sampled CSV")->required();
  be->add_option("--cutoff", be_cutoff, "Cutoff (Hz)")->required();
  be->add_option("--json", be_json, "Also write a JSON summary");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (s->parsed()) {
      if (synth_reference) {
        synth.spec = LineSpectraSpec::reference();
        synth.fraction = kReferenceFraction;
        synth.noise_sigma = kReferenceNoiseSigma;
        synth_mode = "even";
      }
      synth.mode = synth_mode == "random" ? SubsampleMode::Random : SubsampleMode::Even;
      synth.seed = resolve_seed(synth_seed_opt, synth_seed);
      const SynthPaths p = cmd_synth(synth, synth_dir);
      out << p.clean.string() << '\n' << p.observations.string() << '\n'
          << p.truth.string() << '\n';
    } else if (f->parsed()) {
      fit_config.seed = resolve_seed(fit_seed_opt, fit_seed);
      const FitResult r = cmd_fit(fit_in, fit_out, fit_config);
      out << "sigma2=" << r.params.sigma2 << " lengthscale=" << r.params.lengthscale
          << " noise_var=" << r.params.noise_var << " nll=" << r.nll << '\n';
      if (!r.converged) {
        err << "warning: optimiser stopped at the iteration limit\n";
      }
    } else if (fl->parsed()) {
      if (filter_reference) {
        filter.cutoff_b = kReferenceCutoff;
        const LineSpectraSpec ref = LineSpectraSpec::reference();
        filter.query = uniform_grid(ref.t_start, ref.t_end, static_cast<std::size_t>(ref.n_points));
      } else if (cutoff_opt->count() == 0) {
        throw CLI::RequiredError("--cutoff (or --paper-defaults)");
      }
      if (gs->count() > 0) {
        if (grid_n < 1 || !(grid_end >= grid_start)) {
          throw std::invalid_argument("filter: need --grid-n >= 1 and --grid-end >= --grid-start");
        }
        filter.query = uniform_grid(grid_start, grid_end, grid_n);
      }
      filter.component = filter_component == "high"   ? Component::High
                         : filter_component == "full" ? Component::Full
                                                      : Component::Low;
      if (!spectrum_path.empty()) {
        filter.spectrum_out = spectrum_path;
      }
      const FilterOutcome r = cmd_filter(filter_in, filter_model, filter_out, filter);
      out << filter_out.string() << '\n';
      if (r.additivity_error) {
        const bool ok = *r.additivity_error <= 1e-8;
        out << "verify: max |low + high - full| = " << *r.additivity_error
            << (ok ? " (ok)" : " (FAILED)") << '\n';
        if (!ok) {
          throw NumericalFailure("filter: additivity check failed");
        }
      }
    } else if (c->parsed()) {
      if (cmp_reference) {
        cmp_cutoff = kReferenceCutoff;
        cmp_order = kReferenceOrder;
      } else if (cmp_cutoff_opt->count() == 0) {
        throw CLI::RequiredError("--cutoff (or --paper-defaults)");
      }
      FitConfig config;
      config.seed = resolve_seed(cmp_seed_opt, cmp_seed);
      std::optional<fs::path> model;
      if (!cmp_model.empty()) {
        model = cmp_model;
      }
      const ComparisonReport r =
          cmd_compare(cmp_obs, cmp_truth, cmp_cutoff, cmp_order, config, model, cmp_out);
      out << "gplp mse=" << r.gplp_mse << " coverage95=" << r.coverage95 << '\n';
      if (r.butterworth_mse) {
        out << "butterworth mse=" << *r.butterworth_mse << '\n';
      } else {
        out << "butterworth " << r.butterworth_note << '\n';
      }
    } else if (be->parsed()) {
      std::optional<fs::path> json_out;
      if (!be_json.empty()) {
        json_out = be_json;
      }
      const BandEnergy e = cmd_band_energy(be_in, be_cutoff, json_out);
      if (e.degenerate) {
        err << "warning: signal has no energy after mean removal; reporting 1.0\n";
      }
      out << e.ratio << '\n';
    }
  } catch (const CLI::Error& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const FitError& e) {
    err << "error: " << e.what() << '\n';
    for (const std::string& d : e.diagnostics()) {
      err << "  " << d << '\n';
    }
    return kNumerical;
  } catch (const ConditioningError& e) {
    err << "error: " << e.what() << '\n';
    return kNumerical;
  } catch (const NumericalFailure& e) {
    err << "error: " << e.what() << '\n';
    return kNumerical;
  } catch (const std::range_error& e) {
    err << "error: " << e.what() << '\n';
    return kNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kOk;
}

}  // namespace gplp::cli
