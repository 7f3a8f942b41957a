/**
 * Copyright The gossipsim Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <sstream>

#include <CLI11.hpp>

#include "gossipsim/config.hpp"
#include "gossipsim/parallel.hpp"
#include "gossipsim/trace.hpp"

namespace fs = std::filesystem;
using namespace gossipsim;

namespace {

  constexpr int kExitOk = 0;
  constexpr int kExitRunFailure = 1;
  constexpr int kExitConfigError = 2;

  constexpr const char *kWorkersEnv = "GOSSIPSIM_WORKERS";

  struct RunOptions {
    std::string config;
    std::string out_dir;
    bool trace = false;
    int workers = 0;
    std::vector<std::string> overrides;
  };

  int workers_from_env() {
    const char *v = std::getenv(kWorkersEnv);
    if (v == nullptr || *v == '\0') {
      return 0;
    }
    try {
      const int n = std::stoi(v);
      if (n >= 1) {
        return n;
      }
    } catch (const std::exception &) {
    }
    throw ConfigError(std::string("expected a positive integer, got '") + v
                          + "'",
                      kWorkersEnv, 0);
  }

  std::string fmt_ms(const std::optional<SimTime> &v) {
    return v ? std::to_string(*v) : std::string("-");
  }

  /// Writes every per-run artifact except the trace. Returns an error text
  /// or an empty string.
  std::string write_outputs(const fs::path &dir, const RunReport &report) {
    struct Out {
      const char *name;
      void (*write)(const RunReport &, std::ostream &);
    };
    const Out outs[] = {
        {"report.json",
         [](const RunReport &r, std::ostream &o) { o << report_json(r); }},
        {"cdf.csv", write_cdf_csv},
        {"mesh_timeline.csv", write_mesh_timeline_csv},
        {"cdf.svg", write_cdf_svg},
    };
    for (const auto &o : outs) {
      std::ofstream f(dir / o.name);
      o.write(report, f);
      if (!f) {
        return std::string("cannot write ") + (dir / o.name).string();
      }
    }
    return {};
  }

  void print_summary(std::ostream &out, const std::vector<ExpandedRun> &runs,
                     const std::vector<RunOutcome> &outcomes) {
    std::size_t w = 5;
    for (const auto &r : runs) {
      w = std::max(w, r.label.size());
    }
    out << std::left << std::setw(static_cast<int>(w) + 2) << "run"
        << std::right << std::setw(8) << "msgs" << std::setw(9) << "loss%"
        << std::setw(8) << "p50" << std::setw(8) << "p99" << std::setw(8)
        << "max" << std::setw(10) << "mean" << std::setw(11) << "dups"
        << std::setw(11) << "GB/mo" << '\n';
    for (std::size_t i = 0; i < runs.size(); ++i) {
      out << std::left << std::setw(static_cast<int>(w) + 2) << runs[i].label
          << std::right;
      const auto &o = outcomes[i];
      if (!o.ok) {
        out << "FAILED: " << o.error << '\n';
        continue;
      }
      const auto &r = o.report;
      out << std::setw(8) << r.messages << std::setw(9) << std::fixed
          << std::setprecision(2) << 100.0 * r.loss_fraction << std::setw(8)
          << fmt_ms(r.p50) << std::setw(8) << fmt_ms(r.p99) << std::setw(8)
          << fmt_ms(r.max) << std::setw(10) << std::setprecision(1)
          << r.mean_latency << std::setw(11) << r.duplicates << std::setw(11)
          << std::setprecision(1) << r.bandwidth_estimate_gb_month << '\n';
      out.unsetf(std::ios::floatfield);
    }
  }

  void write_summary_csv(const fs::path &path,
                         const std::vector<ExpandedRun> &runs,
                         const std::vector<RunOutcome> &outcomes) {
    std::ofstream f(path);
    f << "run,ok,messages,loss_fraction,p50_ms,p99_ms,max_ms,mean_ms,"
         "duplicates,bandwidth_gb_month\n";
    for (std::size_t i = 0; i < runs.size(); ++i) {
      const auto &o = outcomes[i];
      f << runs[i].label << ',' << (o.ok ? 1 : 0);
      if (o.ok) {
        const auto &r = o.report;
        f << ',' << r.messages << ',' << r.loss_fraction << ','
          << fmt_ms(r.p50) << ',' << fmt_ms(r.p99) << ',' << fmt_ms(r.max)
          << ',' << r.mean_latency << ',' << r.duplicates << ','
          << r.bandwidth_estimate_gb_month;
      } else {
        f << ",,,,,,,,";
      }
      f << '\n';
    }
  }

  int execute(const RunOptions &opt, bool with_sweep) {
    std::vector<ExpandedRun> runs;
    ConfigFile file;
    int workers = opt.workers;
    try {
      file = load_config(opt.config);
      for (const auto &kv : opt.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) {
          throw ConfigError("expected key=value, got '" + kv + "'", "--set",
                            0);
        }
        const auto key = kv.substr(0, eq);
        apply_override(file.base, key, kv.substr(eq + 1));
        if (key == "n_publishers") {
          file.auto_publishers = false;
        }
        if (key == "seed") {
          file.seeds = {file.base.seed};
        }
      }
      runs = expand(file, with_sweep);
      if (workers <= 0) {
        workers = workers_from_env();
      }
    } catch (const ConfigError &ex) {
      std::cerr << "config error: " << ex.what() << '\n';
      return kExitConfigError;
    }

    const fs::path root =
        fs::path(opt.out_dir.empty() ? file.output_dir : opt.out_dir)
        / file.base.name;
    const bool trace = opt.trace || file.trace;
    std::vector<fs::path> dirs;
    for (const auto &r : runs) {
      dirs.push_back(root / r.label);
    }
    std::error_code ec;
    for (const auto &d : dirs) {
      fs::create_directories(d, ec);
      if (ec) {
        std::cerr << "cannot create " << d << ": " << ec.message() << '\n';
        return kExitRunFailure;
      }
    }

    std::vector<ScenarioConfig> configs;
    for (const auto &r : runs) {
      configs.push_back(r.config);
    }

    std::mutex log_mu;
    std::size_t finished = 0;
    const auto started = std::chrono::steady_clock::now();
    // Trace files stay open until their run's callback closes them.
    std::vector<std::unique_ptr<std::ofstream>> trace_files(runs.size());
    SinkFactory sinks;
    if (trace) {
      sinks = [&](std::size_t i) -> std::unique_ptr<TraceSink> {
        trace_files[i] =
            std::make_unique<std::ofstream>(dirs[i] / "trace.jsonl");
        return std::make_unique<JsonlTraceWriter>(*trace_files[i]);
      };
    }
    auto on_done = [&](std::size_t i, const ScenarioConfig &,
                       RunOutcome &outcome) {
      if (trace_files[i]) {
        trace_files[i]->close();
        if (trace_files[i]->fail() && outcome.ok) {
          outcome.ok = false;
          outcome.error = "cannot write trace.jsonl";
        }
        trace_files[i].reset();
      }
      if (outcome.ok) {
        if (auto err = write_outputs(dirs[i], outcome.report); !err.empty()) {
          outcome.ok = false;
          outcome.error = err;
        }
      }
      const double secs = std::chrono::duration<double>(
                              std::chrono::steady_clock::now() - started)
                              .count();
      std::lock_guard lock(log_mu);
      ++finished;
      std::cerr << '[' << finished << '/' << runs.size() << "] "
                << runs[i].label << (outcome.ok ? " done" : " FAILED")
                << " (" << std::fixed << std::setprecision(1) << secs
                << " s)\n";
      std::cerr.unsetf(std::ios::floatfield);
    };

    const auto outcomes = run_all(configs, workers, on_done, sinks);

    print_summary(std::cout, runs, outcomes);
    write_summary_csv(root / "summary.csv", runs, outcomes);
    std::cout << "outputs: " << root.string() << '\n';

    bool failed = false;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
      if (!outcomes[i].ok) {
        std::cerr << "run " << runs[i].label
                  << " failed: " << outcomes[i].error << '\n';
        failed = true;
      }
    }
    return failed ? kExitRunFailure : kExitOk;
  }

  void add_run_options(CLI::App *cmd, RunOptions &opt) {
    cmd->add_option("config", opt.config,
                    "Scenario file or built-in scenario name")
        ->required();
    cmd->add_option("-o,--out", opt.out_dir,
                    "Output root, overrides output_dir");
    cmd->add_flag("--trace", opt.trace, "Also write trace.jsonl per run");
    cmd->add_option("-j,--workers", opt.workers,
                    std::string("Parallel runs; defaults to $") + kWorkersEnv);
    cmd->add_option("--set", opt.overrides,
                    "Override a key, e.g. --set mesh.d=12 (repeatable)");
  }

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"gossipsim: attack-resilient gossip pubsub simulator"};
  app.set_version_flag("--version", GOSSIPSIM_VERSION);
  app.require_subcommand(1);

  RunOptions run_opt;
  RunOptions sweep_opt;
  auto *run_cmd = app.add_subcommand(
      "run", "Run a scenario once per seed, ignoring sweep axes");
  add_run_options(run_cmd, run_opt);
  auto *sweep_cmd = app.add_subcommand(
      "sweep", "Run every point of the sweep axes for every seed");
  add_run_options(sweep_cmd, sweep_opt);

  std::string show;
  auto *scen_cmd = app.add_subcommand("scenarios", "List built-in scenarios");
  scen_cmd->add_option("--show", show,
                       "Print the config file of one built-in scenario");
  auto *explain_cmd = app.add_subcommand(
      "explain-config", "Print every config key with its default");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return kExitConfigError;
  }

  if (*run_cmd) {
    return execute(run_opt, false);
  }
  if (*sweep_cmd) {
    return execute(sweep_opt, true);
  }
  if (*scen_cmd) {
    if (!show.empty()) {
      const auto b = find_builtin(show);
      if (!b) {
        std::cerr << "unknown scenario '" << show << "'\n";
        return kExitConfigError;
      }
      std::cout << b->yaml;
      return kExitOk;
    }
    for (const auto &b : builtin_scenarios()) {
      std::cout << std::left << std::setw(16) << b.name << b.description
                << '\n';
    }
    return kExitOk;
  }
  if (*explain_cmd) {
    explain_config(std::cout);
    return kExitOk;
  }
  return kExitOk;
}
