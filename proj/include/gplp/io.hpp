#ifndef GPLP_IO_HPP
#define GPLP_IO_HPP

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "gplp/butterworth.hpp"
#include "gplp/gp.hpp"
#include "gplp/signals.hpp"

namespace gplp {

/// Malformed CSV or JSON input. line() is 1-based, 0 when not applicable.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Half-width multiplier of the reported 95% band.
inline constexpr double kBand95 = 1.96;

// CSV: header `time,value`, one sample per row.
TimeSeries parse_timeseries_csv(std::istream& in, const std::string& source = "<stream>");
TimeSeries read_timeseries_csv(const std::filesystem::path& path);
void write_timeseries_csv(std::ostream& out, const TimeSeries& ts);
void write_timeseries_csv(const std::filesystem::path& path, const TimeSeries& ts);

// CSV: header `time,mean,std,lower95,upper95`.
void write_posterior_csv(std::ostream& out, const PosteriorEstimate& est);
void write_posterior_csv(const std::filesystem::path& path, const PosteriorEstimate& est);

// CSV: header `freq_hz,magnitude,power`.
void write_spectrum_csv(std::ostream& out, const SpectrumEstimate& est);
void write_spectrum_csv(const std::filesystem::path& path, const SpectrumEstimate& est);

void write_json(const std::filesystem::path& path, const nlohmann::json& doc);
nlohmann::json read_json(const std::filesystem::path& path);

// {"sigma2", "lengthscale", "noise_var"}; BandLimitedKernelSpec adds "cutoff_b".
void to_json(nlohmann::json& j, const SEHyperparams& p);
void from_json(const nlohmann::json& j, SEHyperparams& p);
void to_json(nlohmann::json& j, const BandLimitedKernelSpec& spec);
void from_json(const nlohmann::json& j, BandLimitedKernelSpec& spec);

void to_json(nlohmann::json& j, const FitResult& r);
void to_json(nlohmann::json& j, const PosteriorEstimate& est);
void to_json(nlohmann::json& j, const SosFilter& filter);

}  // namespace gplp

#endif  // GPLP_IO_HPP
