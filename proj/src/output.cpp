#include "slicekit/output.hpp"

#include <stdexcept>

#include "report_json.hpp"

namespace slicekit {

namespace {

const char* verdict(bool pass) { return pass ? "pass" : "fail"; }

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

OutputFormat parse_format(const std::string& name) {
  if (name == "text") return OutputFormat::text;
  if (name == "json") return OutputFormat::json;
  if (name == "csv") return OutputFormat::csv;
  throw std::invalid_argument("unknown format '" + name + "'");
}

void write_reports(std::ostream& out, const std::vector<CheckReport>& reports, OutputFormat format) {
  switch (format) {
    case OutputFormat::text:
      for (const auto& r : reports) write_text(out, r);
      break;
    case OutputFormat::json:
      if (reports.size() == 1) {
        out << report_json(reports.front()).dump(2) << '\n';
      } else {
        auto arr = nlohmann::ordered_json::array();
        for (const auto& r : reports) arr.push_back(report_json(r));
        out << arr.dump(2) << '\n';
      }
      break;
    case OutputFormat::csv:
      if (reports.size() == 1) {
        write_csv(out, reports.front());
      } else {
        out << "check,system,verdict,max,mean,tolerance,samples\n";
        for (const auto& r : reports) {
          out << csv_field(r.check) << ',' << csv_field(r.system) << ',' << verdict(r.pass) << ','
              << format_real(r.max) << ',' << format_real(r.mean) << ',' << format_real(r.tolerance) << ','
              << r.samples.size() << '\n';
        }
      }
      break;
  }
}

void write_corpus_results(std::ostream& out, const std::vector<EntryResult>& results, OutputFormat format) {
  switch (format) {
    case OutputFormat::text: {
      std::size_t total = 0;
      std::size_t matched = 0;
      for (const auto& e : results) {
        out << e.id << ": " << (e.all_matched ? "OK" : "MISMATCH") << '\n';
        for (const auto& o : e.outcomes) {
          ++total;
          matched += o.matched ? 1 : 0;
          out << "  " << (o.matched ? "ok   " : "BAD  ") << o.spec.name << " (" << o.spec.op << "): " << verdict(o.report.pass)
              << ", expected " << verdict(o.spec.expect.value_or(true)) << ", max=" << format_real(o.report.max) << '\n';
          for (const auto& n : o.report.notes) out << "       note: " << n << '\n';
        }
      }
      out << matched << "/" << total << " verdicts reproduced\n";
      break;
    }
    case OutputFormat::json: {
      auto arr = nlohmann::ordered_json::array();
      for (const auto& e : results) {
        nlohmann::ordered_json entry;
        entry["entry"] = e.id;
        entry["all_matched"] = e.all_matched;
        auto checks = nlohmann::ordered_json::array();
        for (const auto& o : e.outcomes) {
          nlohmann::ordered_json c;
          c["name"] = o.spec.name;
          c["op"] = o.spec.op;
          c["expected"] = verdict(o.spec.expect.value_or(true));
          c["matched"] = o.matched;
          c["report"] = report_json(o.report);
          checks.push_back(std::move(c));
        }
        entry["checks"] = std::move(checks);
        arr.push_back(std::move(entry));
      }
      out << arr.dump(2) << '\n';
      break;
    }
    case OutputFormat::csv:
      out << "entry,check,op,expected,verdict,matched,max,mean,tolerance,samples\n";
      for (const auto& e : results) {
        for (const auto& o : e.outcomes) {
          out << e.id << ',' << csv_field(o.spec.name) << ',' << o.spec.op << ',' << verdict(o.spec.expect.value_or(true))
              << ',' << verdict(o.report.pass) << ',' << (o.matched ? "yes" : "no") << ',' << format_real(o.report.max)
              << ',' << format_real(o.report.mean) << ',' << format_real(o.report.tolerance) << ','
              << o.report.samples.size() << '\n';
        }
      }
      break;
  }
}

void write_trajectory(std::ostream& out, const Trajectory& trajectory, const CoordinateSpace& space,
                      OutputFormat format) {
  switch (format) {
    case OutputFormat::csv:
      write_trajectory_csv(out, trajectory, space);
      break;
    case OutputFormat::json: {
      nlohmann::ordered_json j;
      j["space"] = space.name();
      j["coordinates"] = space.coordinates();
      j["method"] = trajectory.method == Method::rk4 ? "rk4" : "rk45";
      j["status"] = trajectory.status;
      j["truncated"] = trajectory.truncated;
      j["max_error_estimate"] = real_json(trajectory.max_error_estimate);
      j["times"] = trajectory.times;
      auto pts = nlohmann::ordered_json::array();
      for (const auto& p : trajectory.points) pts.push_back(std::vector<double>(p.data(), p.data() + p.size()));
      j["points"] = std::move(pts);
      out << j.dump(2) << '\n';
      break;
    }
    case OutputFormat::text: {
      out << "integrate [" << space.name() << "]: " << trajectory.status << ", " << trajectory.times.size() << " points";
      if (!trajectory.times.empty()) {
        out << ", t=" << format_real(trajectory.times.back()) << " at (";
        const Vector& p = trajectory.points.back();
        for (Eigen::Index k = 0; k < p.size(); ++k) out << (k ? ", " : "") << format_real(p[k]);
        out << ")";
      }
      out << '\n';
      break;
    }
  }
}

}  // namespace slicekit
