#include "gplp/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string_view>

namespace gplp {

namespace {

using nlohmann::json;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

double parse_number(std::string_view field, const std::string& source, std::size_t line) {
  field = trim(field);
  if (!field.empty() && field.front() == '+') {
    field.remove_prefix(1);
  }
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc{} || ptr != field.data() + field.size() || !std::isfinite(v)) {
    throw ParseError(source + ":" + std::to_string(line) + ": not a finite number: '" +
                         std::string(field) + "'",
                     line);
  }
  return v;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open " + path.string() + " for writing");
  }
  return out;
}

// Shortest representation that parses back to the same double.
struct Num {
  double v;
};

std::ostream& operator<<(std::ostream& out, Num n) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, n.v);
  return out.write(buf, ptr - buf);
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) {
    throw std::runtime_error("failed writing " + path.string());
  }
}

double number(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number()) {
    throw ParseError(std::string("missing or non-numeric field '") + key + "'", 0);
  }
  return j.at(key).get<double>();
}

}  // namespace

TimeSeries parse_timeseries_csv(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  TimeSeries ts;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view row = trim(line);
    if (row.empty()) {
      continue;
    }
    if (!header_seen) {
      header_seen = true;
      const auto comma = row.find(',');
      if (comma == std::string_view::npos || trim(row.substr(0, comma)) != "time" ||
          trim(row.substr(comma + 1)) != "value") {
        throw ParseError(source + ":" + std::to_string(line_no) +
                             ": expected header 'time,value'",
                         line_no);
      }
      continue;
    }
    const auto comma = row.find(',');
    if (comma == std::string_view::npos || row.find(',', comma + 1) != std::string_view::npos) {
      throw ParseError(source + ":" + std::to_string(line_no) + ": expected two fields", line_no);
    }
    ts.times.push_back(parse_number(row.substr(0, comma), source, line_no));
    ts.values.push_back(parse_number(row.substr(comma + 1), source, line_no));
    if (ts.times.size() > 1 && !(ts.times.back() > ts.times[ts.times.size() - 2])) {
      throw ParseError(source + ":" + std::to_string(line_no) +
                           ": times must be strictly increasing",
                       line_no);
    }
  }
  if (!header_seen) {
    throw ParseError(source + ": empty file", 0);
  }
  if (ts.times.empty()) {
    throw ParseError(source + ": no samples", line_no);
  }
  return ts;
}

TimeSeries read_timeseries_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open " + path.string());
  }
  return parse_timeseries_csv(in, path.string());
}

void write_timeseries_csv(std::ostream& out, const TimeSeries& ts) {
  out << "time,value\n";
  for (std::size_t i = 0; i < ts.size(); ++i) {
    out << Num{ts.times[i]} << ',' << Num{ts.values[i]} << '\n';
  }
}

void write_timeseries_csv(const std::filesystem::path& path, const TimeSeries& ts) {
  auto out = open_out(path);
  write_timeseries_csv(out, ts);
  finish(out, path);
}

void write_posterior_csv(std::ostream& out, const PosteriorEstimate& est) {
  out << "time,mean,std,lower95,upper95\n";
  const std::vector<double> sd = est.stddev();
  for (std::size_t i = 0; i < est.query_times.size(); ++i) {
    out << Num{est.query_times[i]} << ',' << Num{est.mean[i]} << ',' << Num{sd[i]} << ','
        << Num{est.mean[i] - kBand95 * sd[i]} << ',' << Num{est.mean[i] + kBand95 * sd[i]}
        << '\n';
  }
}

void write_posterior_csv(const std::filesystem::path& path, const PosteriorEstimate& est) {
  auto out = open_out(path);
  write_posterior_csv(out, est);
  finish(out, path);
}

void write_spectrum_csv(std::ostream& out, const SpectrumEstimate& est) {
  out << "freq_hz,magnitude,power\n";
  for (std::size_t k = 0; k < est.freqs.size(); ++k) {
    out << Num{est.freqs[k]} << ',' << Num{est.magnitude[k]} << ',' << Num{est.power[k]} << '\n';
  }
}

void write_spectrum_csv(const std::filesystem::path& path, const SpectrumEstimate& est) {
  auto out = open_out(path);
  write_spectrum_csv(out, est);
  finish(out, path);
}

void write_json(const std::filesystem::path& path, const json& doc) {
  auto out = open_out(path);
  out << doc.dump(2) << '\n';
  finish(out, path);
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open " + path.string());
  }
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what(), 0);
  }
}

void to_json(json& j, const SEHyperparams& p) {
  j = json{{"sigma2", p.sigma2}, {"lengthscale", p.lengthscale}, {"noise_var", p.noise_var}};
}

void from_json(const json& j, SEHyperparams& p) {
  p.sigma2 = number(j, "sigma2");
  p.lengthscale = number(j, "lengthscale");
  p.noise_var = number(j, "noise_var");
  p.validate();
}

void to_json(json& j, const BandLimitedKernelSpec& spec) {
  to_json(j, spec.se);
  j["cutoff_b"] = spec.cutoff_b;
}

void from_json(const json& j, BandLimitedKernelSpec& spec) {
  from_json(j, spec.se);
  spec.cutoff_b = number(j, "cutoff_b");
  spec.validate();
}

void to_json(json& j, const FitResult& r) {
  j = json{{"sigma2", r.params.sigma2},
           {"lengthscale", r.params.lengthscale},
           {"noise_var", r.params.noise_var},
           {"nll", r.nll},
           {"restarts_tried", r.restarts_tried},
           {"converged", r.converged},
           {"best_restart", r.best_restart},
           {"data_mean", r.data_mean},
           {"mean_policy", "empirical mean removed before fitting"}};
  json restarts = json::array();
  for (const RestartReport& rep : r.restarts) {
    json item{{"start", rep.start},
              {"start_nll", std::isfinite(rep.start_nll) ? json(rep.start_nll) : json()},
              {"iterations", rep.iterations},
              {"converged", rep.converged},
              {"failed", rep.failed}};
    if (!rep.failed) {
      item["end"] = rep.end;
      item["end_nll"] = rep.end_nll;
    }
    restarts.push_back(std::move(item));
  }
  j["restarts"] = std::move(restarts);
}

void to_json(json& j, const PosteriorEstimate& est) {
  j = json{{"component", component_name(est.component)},
           {"query_times", est.query_times},
           {"mean", est.mean},
           {"variance", est.variance},
           {"mean_offset", est.mean_offset},
           {"jitter", est.jitter},
           {"mean_policy",
            "empirical mean removed before conditioning; added back to the low and full "
            "components only"}};
  if (est.full_cov) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < est.full_cov->rows(); ++i) {
      std::vector<double> row(static_cast<std::size_t>(est.full_cov->cols()));
      for (Eigen::Index k = 0; k < est.full_cov->cols(); ++k) {
        row[static_cast<std::size_t>(k)] = (*est.full_cov)(i, k);
      }
      rows.push_back(std::move(row));
    }
    j["full_cov"] = std::move(rows);
  }
}

void to_json(json& j, const SosFilter& filter) {
  json sections = json::array();
  for (const Biquad& s : filter.sections) {
    sections.push_back({{"b", {s.b0, s.b1, s.b2}}, {"a", {1.0, s.a1, s.a2}}});
  }
  j = json{{"order", filter.spec.order},
           {"cutoff_hz", filter.spec.cutoff_hz},
           {"sample_rate_hz", filter.spec.sample_rate_hz},
           {"sections", std::move(sections)}};
}

}  // namespace gplp
