// Copyright 2026 The Lineage Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "lineage_tools/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "lineage/checkpoint.hpp"
#include "lineage/config.hpp"
#include "lineage/error.hpp"
#include "lineage/orchestrator.hpp"
#include "lineage/report.hpp"

namespace lineage::cli {

namespace fs = std::filesystem;

namespace {

int exit_for(const CampaignReport& r) { return r.pass ? kExitPass : kExitFail; }

RunOptions make_options(int verbosity, std::ostream& err) {
  RunOptions o;
  if (verbosity > 0) {
    o.on_log = [verbosity, &err](const std::string& line) {
      // -v shows campaign and cycle lines, -vv every transcript line.
      if (verbosity >= 2 || line.rfind("  ", 0) != 0) err << line << "\n";
    };
  }
  return o;
}

void print_summary(const CampaignReport& r, const fs::path& dir, std::ostream& out) {
  out << render_report({ReportRow{dir.string(), r, ""}}, ReportFormat::kTable);
  if (!r.annotation.empty()) out << "note: " << r.annotation << "\n";
}

int cmd_run(const std::string& config_path, const fs::path& out_dir, std::optional<std::uint64_t> seed,
            int verbosity, std::ostream& out, std::ostream& err) {
  CampaignConfig config;
  try {
    config = load_config(config_path, seed);
  } catch (const ConfigError& e) {
    err << e.what() << "\n";
    return kExitConfig;
  }
  try {
    DirectoryLock lock(out_dir);
    if (fs::exists(out_dir / kMetaFile)) {
      err << out_dir.string() << " already holds a campaign; use resume or pick another --out\n";
      return kExitConfig;
    }
    auto options = make_options(verbosity, err);
    options.checkpoint_dir = out_dir;
    Campaign campaign(config, options);
    const auto report = campaign.run();
    print_summary(report, out_dir, out);
    return exit_for(report);
  } catch (const TransportError& e) {
    err << "backend outage: " << e.what() << "\ncheckpoint saved; continue with: resume --out "
        << out_dir.string() << "\n";
    return kExitOutage;
  } catch (const Error& e) {
    err << e.what() << "\n";
    return kExitConfig;
  }
}

int cmd_resume(const fs::path& out_dir, int verbosity, std::ostream& out, std::ostream& err) {
  try {
    DirectoryLock lock(out_dir);
    const auto report = resume(out_dir, make_options(verbosity, err));
    print_summary(report, out_dir, out);
    return exit_for(report);
  } catch (const TransportError& e) {
    err << "backend outage: " << e.what() << "\ncheckpoint saved; run resume again later\n";
    return kExitOutage;
  } catch (const Error& e) {
    err << e.what() << "\n";
    return kExitConfig;
  }
}

int cmd_report(const std::vector<std::string>& dirs, const std::string& format, std::ostream& out) {
  std::vector<ReportRow> rows;
  bool failed = false;
  for (const auto& d : dirs) {
    ReportRow row{d, std::nullopt, ""};
    try {
      row.report = load_report(d);
    } catch (const Error& e) {
      row.error = e.what();
      failed = true;
    }
    rows.push_back(std::move(row));
  }
  out << render_report(rows, format == "csv" ? ReportFormat::kCsv : ReportFormat::kTable);
  return failed ? kExitConfig : kExitPass;
}

int cmd_export(const std::vector<std::string>& dirs, const std::string& out_path, std::ostream& out,
               std::ostream& err) {
  try {
    std::vector<fs::path> paths(dirs.begin(), dirs.end());
    const auto n = export_dataset(paths, out_path);
    out << n << " records written to " << out_path << "\n";
    return kExitPass;
  } catch (const Error& e) {
    err << e.what() << "\n";
    return kExitConfig;
  }
}

int cmd_validate(const std::string& config_path, std::ostream& out, std::ostream& err) {
  std::ifstream in(config_path);
  if (!in) {
    err << config_path << ": cannot read config\n";
    return kExitConfig;
  }
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    err << config_path << ": not valid JSON: " << e.what() << "\n";
    return kExitConfig;
  }
  const auto result = parse_config(doc);
  if (result.config) {
    out << "OK\n";
    return kExitPass;
  }
  for (const auto& v : result.violations) err << v.str() << "\n";
  return kExitConfig;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Search for detector-evading program variants with a strategy tree.", "lineage"};
  app.require_subcommand(1);
  int global_verbosity = 0;
  int run_verbosity = 0;
  int resume_verbosity = 0;
  app.add_flag("-v,--verbose", global_verbosity, "Log cycles to stderr; repeat for every transcript line");

  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::string format = "table";
  std::vector<std::string> dirs;
  std::string dataset_out;

  auto* run_cmd = app.add_subcommand("run", "Start a campaign");
  run_cmd->add_option("--config", config_path, "Campaign config (JSON)")->required();
  run_cmd->add_option("--out", out_dir, "Checkpoint directory")->required();
  run_cmd->add_option("--seed", seed, "Override rng_seed");

  auto* resume_cmd = app.add_subcommand("resume", "Continue a campaign from its checkpoint");
  resume_cmd->add_option("--out", out_dir, "Checkpoint directory")->required()->check(CLI::ExistingDirectory);

  auto* report_cmd = app.add_subcommand("report", "Render campaign reports");
  report_cmd->add_option("dirs", dirs, "Checkpoint directories");
  report_cmd->add_option("--format", format, "table or csv")->check(CLI::IsMember({"table", "csv"}));

  auto* export_cmd = app.add_subcommand("export-dataset", "Write admitted variants as JSON lines");
  export_cmd->add_option("dirs", dirs, "Checkpoint directories")->required();
  export_cmd->add_option("--out", dataset_out, "Output file")->required();

  auto* validate_cmd = app.add_subcommand("validate-config", "Check a config without running it");
  validate_cmd->add_option("--config", config_path, "Campaign config (JSON)")->required();

  run_cmd->add_flag("-v,--verbose", run_verbosity, "Log cycles to stderr; repeat for every transcript line");
  resume_cmd->add_flag("-v,--verbose", resume_verbosity, "Log cycles to stderr; repeat for every transcript line");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitPass : kExitConfig;
  }

  const int verbosity = global_verbosity + run_verbosity + resume_verbosity;
  if (*run_cmd) return cmd_run(config_path, out_dir, seed, verbosity, out, err);
  if (*resume_cmd) return cmd_resume(out_dir, verbosity, out, err);
  if (*report_cmd) return cmd_report(dirs, format, out);
  if (*export_cmd) return cmd_export(dirs, dataset_out, out, err);
  return cmd_validate(config_path, out, err);
}

}  // namespace lineage::cli
