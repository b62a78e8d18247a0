// jcindex command-line front end. Every subcommand takes an optional
// key=value --config file; flags override file values.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <map>

#include "jcindex/error.hpp"
#include "jcindex/harness.hpp"

namespace {

int exit_code(const std::exception& e) {
  if (const auto* err = dynamic_cast<const jcindex::Error*>(&e)) {
    switch (jcindex::error_category(err->code())) {
      case jcindex::ErrorCategory::usage:
        return 1;
      case jcindex::ErrorCategory::data:
        return 2;
      case jcindex::ErrorCategory::numerical:
        return 3;
    }
  }
  return 3;
}

void report_error(const std::exception& e) { std::cerr << jcindex::dump(jcindex::error_json(e)); }

std::string dashed(std::string s) {
  for (auto& ch : s) {
    if (ch == '_') ch = '-';
  }
  return s;
}

struct Sub {
  CLI::App* app = nullptr;
  std::string config_file;
  std::map<std::string, std::string> flags;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint concordance index toolkit for competing-risks models"};
  app.require_subcommand(1);

  const std::map<std::string, std::string> help = {
      {"evaluate", "Evaluate a risk model on a CSV dataset"},
      {"fit", "Fit a cause-specific proportional-hazards model"},
      {"simulate", "Write a synthetic dataset as CSV"},
      {"simulate-table1", "Efficiency study of the weighted estimator"},
      {"simulate-table2", "EXP vs CSC comparison on a large uncensored cohort"},
      {"rank-variables", "Variable-importance ranking"},
  };

  std::map<std::string, Sub> subs;
  for (const auto& name : jcindex::command_names()) {
    Sub& s = subs[name];
    s.app = app.add_subcommand(name, help.at(name));
    s.app->add_option("--config", s.config_file, "key=value settings file");
    std::vector<std::pair<std::string, std::string>> keys = jcindex::command_defaults(name);
    keys.insert(keys.end(), {{"threads", "0"}, {"output", ""}, {"format", "json"}});
    for (const auto& [key, def] : keys) {
      std::string names = "--" + key;
      if (dashed(key) != key) names += ",--" + dashed(key);
      const std::string desc = def.empty() ? std::string() : "default: " + def;
      s.app->add_option_function<std::string>(names, [&s, key = key](const std::string& v) { s.flags[key] = v; }, desc);
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    report_error(jcindex::Error(jcindex::ErrorCode::InvalidArgument, e.what()));
    return 1;
  }

  for (auto& [name, s] : subs) {
    if (!s.app->parsed()) continue;
    try {
      jcindex::RunConfig given;
      if (!s.config_file.empty()) given = jcindex::RunConfig::parse_file(s.config_file);
      for (const auto& [k, v] : s.flags) given.set(k, v);
      const jcindex::RunConfig resolved = jcindex::resolve_config(name, given);
      const jcindex::json artifact = jcindex::run_command(name, resolved);

      if (artifact.contains("result") && artifact["result"].contains("rankings")) {
        for (const auto& r : artifact["result"]["rankings"]) {
          for (const auto& w : r["warnings"]) std::cerr << "warning: " << w.get<std::string>() << "\n";
        }
      }
      const std::string text = jcindex::dump(artifact);
      const std::string& output = resolved.get("output");
      // simulate writes its CSV to `output`; the artifact goes to stdout.
      if (!output.empty() && name != "simulate") {
        std::ofstream out(output, std::ios::binary);
        if (!out) throw jcindex::Error(jcindex::ErrorCode::IoError, "cannot write " + output);
        out << text;
        if (!out) throw jcindex::Error(jcindex::ErrorCode::IoError, "write failed for " + output);
      }
      if (resolved.get("format") == "table") {
        std::cout << jcindex::render_table(artifact);
      } else if (output.empty() || name == "simulate") {
        std::cout << text;
      }
    } catch (const std::exception& e) {
      report_error(e);
      return exit_code(e);
    }
  }
  return 0;
}
