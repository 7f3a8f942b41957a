/**
 * Copyright The gossipsim Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gossipsim/simnet.hpp"

namespace gossipsim {

  /// Malformed file, unknown key or violated constraint. `line` is 1-based
  /// and 0 when no position is known.
  class ConfigError : public std::runtime_error {
   public:
    ConfigError(const std::string &what, std::string source, int line);

    const std::string &source() const {
      return source_;
    }
    int line() const {
      return line_;
    }

   private:
    std::string source_;
    int line_;
  };

  struct SweepAxis {
    std::string key;
    /// Values kept as YAML scalars and applied like a config entry.
    std::vector<std::string> values;
  };

  /// A config file after defaults are applied, before expansion.
  struct ConfigFile {
    ScenarioConfig base;
    std::vector<std::uint64_t> seeds;
    std::vector<SweepAxis> sweep;
    std::string output_dir = "out";
    bool trace = false;
    /// n_publishers follows n_honest unless the file sets it.
    bool auto_publishers = true;
    /// File name or builtin:<name>, for error messages.
    std::string source;
  };

  struct ExpandedRun {
    /// Directory-safe run label, unique within one expansion.
    std::string label;
    ScenarioConfig config;
  };

  ConfigFile parse_config_text(const std::string &text,
                               const std::string &source = "<string>");
  ConfigFile parse_config_file(const std::string &path);

  /// Built-in name or path to a file.
  ConfigFile load_config(const std::string &name_or_path);

  /// Seeds only, or, with `with_sweep`, sweep axes x seeds (first axis
  /// outermost, seeds innermost).
  std::vector<ExpandedRun> expand(const ConfigFile &file, bool with_sweep);

  /// Applies one dotted-key override, e.g. ("mesh.d", "12").
  void apply_override(ScenarioConfig &cfg, const std::string &key,
                      const std::string &value);

  struct BuiltinScenario {
    std::string name;
    std::string description;
    std::string yaml;
  };

  const std::vector<BuiltinScenario> &builtin_scenarios();
  std::optional<BuiltinScenario> find_builtin(const std::string &name);

  /// Every accepted key with its type, default and meaning.
  void explain_config(std::ostream &out);

}  // namespace gossipsim
