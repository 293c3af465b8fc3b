#include "slicekit/report.hpp"

#include <charconv>
#include <cmath>
#include <limits>

#include "report_json.hpp"

namespace slicekit {

void CheckReport::add_failure(Vector point, std::string error) {
  samples.push_back({std::move(point), std::numeric_limits<double>::infinity(), std::move(error)});
}

CheckReport& CheckReport::finalize() {
  max = 0.0;
  double sum = 0.0;
  offending.clear();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double r = std::isnan(samples[i].residual) ? std::numeric_limits<double>::infinity() : samples[i].residual;
    max = std::max(max, r);
    sum += r;
    if (!(r <= tolerance) && offending.size() < kMaxOffending) offending.push_back(i);
  }
  mean = samples.empty() ? 0.0 : sum / static_cast<double>(samples.size());
  pass = max <= tolerance;
  return *this;
}

std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

nlohmann::ordered_json real_json(double v) {
  if (std::isfinite(v)) return v;
  return format_real(v);
}

nlohmann::ordered_json report_json(const CheckReport& report) {
  nlohmann::ordered_json j;
  j["check"] = report.check;
  j["system"] = report.system;
  j["tolerance"] = report.tolerance;
  auto samples = nlohmann::ordered_json::array();
  for (const auto& s : report.samples) {
    nlohmann::ordered_json rec;
    rec["point"] = std::vector<double>(s.point.data(), s.point.data() + s.point.size());
    rec["residual"] = real_json(s.residual);
    if (!s.error.empty()) rec["error"] = s.error;
    samples.push_back(std::move(rec));
  }
  j["samples"] = std::move(samples);
  j["max"] = real_json(report.max);
  j["mean"] = real_json(report.mean);
  j["verdict"] = report.pass ? "pass" : "fail";
  j["citation"] = report.citation;
  if (!report.metrics.empty()) {
    nlohmann::ordered_json m;
    for (const auto& [k, v] : report.metrics) m[k] = real_json(v);
    j["metrics"] = std::move(m);
  }
  if (!report.notes.empty()) j["notes"] = report.notes;
  return j;
}

std::string to_json_string(const CheckReport& report, int indent) { return report_json(report).dump(indent); }

void write_text(std::ostream& out, const CheckReport& report) {
  out << report.check << " [" << report.system << "]: " << (report.pass ? "PASS" : "FAIL") << "  max=" << format_real(report.max)
      << " mean=" << format_real(report.mean) << " tol=" << format_real(report.tolerance) << " samples=" << report.samples.size()
      << '\n';
  for (const auto& [k, v] : report.metrics) out << "  " << k << " = " << format_real(v) << '\n';
  for (const auto i : report.offending) {
    const auto& s = report.samples[i];
    out << "  offending #" << i << " at (";
    for (Eigen::Index k = 0; k < s.point.size(); ++k) out << (k ? ", " : "") << format_real(s.point[k]);
    out << ") residual=" << format_real(s.residual);
    if (!s.error.empty()) out << " error: " << s.error;
    out << '\n';
  }
  for (const auto& n : report.notes) out << "  note: " << n << '\n';
}

void write_csv(std::ostream& out, const CheckReport& report) {
  const Eigen::Index dim = report.samples.empty() ? 0 : report.samples.front().point.size();
  out << "residual";
  for (Eigen::Index k = 0; k < dim; ++k) out << ",x" << k;
  out << '\n';
  for (const auto& s : report.samples) {
    out << format_real(s.residual);
    for (Eigen::Index k = 0; k < s.point.size(); ++k) out << ',' << format_real(s.point[k]);
    out << '\n';
  }
}

}  // namespace slicekit
