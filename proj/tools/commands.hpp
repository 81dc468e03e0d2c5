#ifndef GPLP_TOOLS_COMMANDS_HPP
#define GPLP_TOOLS_COMMANDS_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gplp/butterworth.hpp"
#include "gplp/gp.hpp"
#include "gplp/signals.hpp"

namespace gplp::cli {

// Values used by --paper-defaults.
inline constexpr double kReferenceCutoff = 0.495;
inline constexpr double kReferenceFraction = 0.25;
inline constexpr double kReferenceNoiseSigma = 1.0;
inline constexpr int kReferenceOrder = 10;

enum ExitCode : int { kOk = 0, kUsage = 1, kNumerical = 2 };

struct SynthOptions {
  LineSpectraSpec spec = LineSpectraSpec::reference();
  double fraction = kReferenceFraction;
  SubsampleMode mode = SubsampleMode::Even;
  double noise_sigma = kReferenceNoiseSigma;
  std::uint64_t seed = 0;
};

struct SynthData {
  TimeSeries clean;
  TimeSeries observations;
  TimeSeries truth;  // low-frequency component on the clean grid
};

SynthData synthesize(const SynthOptions& options);

struct SynthPaths {
  std::filesystem::path clean, observations, truth;
};

SynthPaths cmd_synth(const SynthOptions& options, const std::filesystem::path& out_dir);

/// Fits and writes the model JSON.
FitResult cmd_fit(const std::filesystem::path& observations, const std::filesystem::path& model,
                  const FitConfig& config);

/// Uniform grid over the observation span at four times the mean sampling
/// rate.
std::vector<double> default_query_grid(const TimeSeries& observations);

struct FilterOptions {
  double cutoff_b = 0.0;
  Component component = Component::Low;
  std::optional<std::vector<double>> query;  // default_query_grid when empty
  std::optional<std::filesystem::path> spectrum_out;
  bool verify = false;
};

struct FilterOutcome {
  PosteriorEstimate posterior;
  /// max |low + high - full| over the query grid, when verify was requested.
  std::optional<double> additivity_error;
};

FilterOutcome cmd_filter(const std::filesystem::path& observations,
                         const std::filesystem::path& model, const std::filesystem::path& out,
                         const FilterOptions& options);

struct ComparisonReport {
  FitResult fit;
  PosteriorEstimate gplp;
  double gplp_mse = 0.0;
  double coverage95 = 0.0;
  bool butterworth_applicable = false;
  std::vector<double> butterworth;  // filtfilt output at the observation times
  std::optional<double> butterworth_mse;
  std::string butterworth_note;
};

/// GPLP evaluated on the truth grid and forward-backward Butterworth
/// evaluated at the observation times, both scored against the truth.
/// Fits the model unless one is given.
ComparisonReport compare(const TimeSeries& observations, const TimeSeries& truth,
                         double cutoff_b, int order, const FitConfig& config,
                         const std::optional<SEHyperparams>& model = std::nullopt);

nlohmann::json report_json(const ComparisonReport& report, double cutoff_b, int order);

ComparisonReport cmd_compare(const std::filesystem::path& observations,
                             const std::filesystem::path& truth, double cutoff_b, int order,
                             const FitConfig& config,
                             const std::optional<std::filesystem::path>& model,
                             const std::filesystem::path& out);

BandEnergy cmd_band_energy(const std::filesystem::path& input, double cutoff_hz,
                           const std::optional<std::filesystem::path>& json_out);

/// Parses argv and dispatches to one of the commands; returns the exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gplp::cli

#endif  // GPLP_TOOLS_COMMANDS_HPP
