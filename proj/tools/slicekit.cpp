// Command-line front end. Exit codes: 0 all checks pass, 1 a check failed,
// 2 usage or definition error.

#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "slicekit/output.hpp"

namespace {

using namespace slicekit;

constexpr int kPass = 0;
constexpr int kFail = 1;
constexpr int kUsage = 2;

struct OpCommand {
  CLI::App* app = nullptr;
  std::string op;
  std::vector<std::string> keys;
  std::map<std::string, std::string> values;
  std::string check_name;
};

std::vector<CheckSpec> select_checks(const Definition& def, const OpCommand& cmd) {
  CheckSpec adhoc;
  adhoc.name = cmd.op;
  adhoc.op = cmd.op;
  for (const auto& key : cmd.keys) {
    if (cmd.app->count("--" + key) > 0) adhoc.args[key] = cmd.values.at(key);
  }
  if (!cmd.check_name.empty()) {
    if (!adhoc.args.empty()) throw ConfigError("--check cannot be combined with operation arguments");
    const CheckSpec& spec = def.check(cmd.check_name);
    if (spec.op != cmd.op) throw ConfigError("check '" + spec.name + "' runs '" + spec.op + "', not '" + cmd.op + "'");
    return {spec};
  }
  if (!adhoc.args.empty()) return {adhoc};
  std::vector<CheckSpec> out;
  for (const auto& spec : def.checks()) {
    if (spec.op == cmd.op) out.push_back(spec);
  }
  if (out.empty()) throw ConfigError("no arguments given and the file has no '" + cmd.op + "' checks");
  return out;
}

Vector parse_point(const std::vector<std::string>& parts) {
  Vector v(static_cast<Eigen::Index>(parts.size()));
  for (std::size_t i = 0; i < parts.size(); ++i) v[static_cast<Eigen::Index>(i)] = parse_real(parts[i]);
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"slicekit: numerical checks for slicings of dynamical systems"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string system_file;
  std::string format_name = "text";
  std::string out_path;
  RunOptions options;
  app.add_option("--system", system_file, "system definition file");
  app.add_option("--tolerance", options.tolerance, "zero-residual tolerance")->capture_default_str();
  app.add_option("--samples", options.samples, "sample count")->capture_default_str();
  app.add_option("--seed", options.seed, "sampling seed")->capture_default_str();
  app.add_option("--format", format_name, "text, json or csv")
      ->check(CLI::IsMember({"text", "json", "csv"}))
      ->capture_default_str();
  app.add_option("--out", out_path, "write the report here instead of stdout");

  std::vector<std::unique_ptr<OpCommand>> commands;
  for (const auto& info : operations()) {
    auto cmd = std::make_unique<OpCommand>();
    cmd->op = info.name;
    cmd->app = app.add_subcommand(info.name, info.summary);
    cmd->keys = info.required;
    cmd->keys.insert(cmd->keys.end(), info.optional.begin(), info.optional.end());
    cmd->keys.push_back("strategy");
    cmd->keys.push_back("bounds");
    for (const auto& key : cmd->keys) {
      const bool required = std::find(info.required.begin(), info.required.end(), key) != info.required.end();
      cmd->app->add_option("--" + key, cmd->values[key], required ? "required unless --check" : "optional");
    }
    cmd->app->add_option("--check", cmd->check_name, "run a named check from the system file");
    commands.push_back(std::move(cmd));
  }

  std::string dynamics_name;
  std::vector<std::string> x0_text;
  double t_end = 1.0;
  std::string method = "rk45";
  IntegrationOptions integration;
  CLI::App* integrate_cmd = app.add_subcommand("integrate", "integral curve of a dynamical system");
  integrate_cmd->add_option("--dynamics", dynamics_name, "system name")->required();
  integrate_cmd->add_option("--x0", x0_text, "initial point, e.g. --x0 1 0")->required()->expected(1, -1);
  integrate_cmd->add_option("--t", t_end, "final time")->capture_default_str();
  integrate_cmd->add_option("--method", method, "rk4 or rk45")->check(CLI::IsMember({"rk4", "rk45"}))->capture_default_str();
  integrate_cmd->add_option("--step", integration.step, "rk4 step / rk45 initial step")->capture_default_str();
  integrate_cmd->add_option("--integrator-tolerance", integration.tolerance, "rk45 local error")->capture_default_str();

  CLI::App* corpus_cmd = app.add_subcommand("corpus", "built-in worked examples");
  corpus_cmd->require_subcommand(1);
  std::string corpus_id;
  CLI::App* corpus_run = corpus_cmd->add_subcommand("run", "run an entry's expected verdicts");
  corpus_run->add_option("id", corpus_id, "entry id or 'all'")->required();
  CLI::App* corpus_list = corpus_cmd->add_subcommand("list", "list entries");
  CLI::App* corpus_show = corpus_cmd->add_subcommand("show", "print an entry's definition");
  corpus_show->add_option("id", corpus_id, "entry id")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kPass : kUsage;
  }

  std::ostringstream buffer;
  int code = kPass;
  try {
    const OutputFormat format = parse_format(format_name);
    if (corpus_cmd->parsed()) {
      if (corpus_list->parsed()) {
        for (const auto& e : corpus_entries()) buffer << e.id << "  " << e.summary << '\n';
      } else if (corpus_show->parsed()) {
        buffer << corpus_entry(corpus_id).source;
      } else if (corpus_run->parsed()) {
        std::vector<EntryResult> results;
        if (corpus_id == "all") {
          for (const auto& e : corpus_entries()) results.push_back(run_corpus_entry(e.id, options));
        } else {
          corpus_entry(corpus_id);
          results.push_back(run_corpus_entry(corpus_id, options));
        }
        write_corpus_results(buffer, results, format);
        for (const auto& r : results) {
          if (!r.all_matched) code = kFail;
        }
      }
    } else {
      if (system_file.empty()) throw ConfigError("--system is required");
      const Definition def = Definition::load_file(system_file);
      if (integrate_cmd->parsed()) {
        integration.method = method == "rk4" ? Method::rk4 : Method::rk45;
        const DynamicalSystem sys = def.dynamics(dynamics_name);
        const Trajectory traj = integrate(sys, parse_point(x0_text), t_end, integration);
        write_trajectory(buffer, traj, *sys.space, format);
        if (traj.truncated) code = kFail;
      } else {
        for (const auto& cmd : commands) {
          if (!cmd->app->parsed()) continue;
          std::vector<CheckReport> reports;
          for (const auto& spec : select_checks(def, *cmd)) {
            reports.push_back(run_check(def, spec, options));
            if (!reports.back().pass) code = kFail;
          }
          write_reports(buffer, reports, format);
        }
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }

  if (out_path.empty()) {
    std::cout << buffer.str();
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) {
      std::cerr << "error: cannot write '" << out_path << "'\n";
      return kUsage;
    }
    out << buffer.str();
  }
  return code;
}
