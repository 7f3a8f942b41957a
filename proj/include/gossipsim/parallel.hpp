/**
 * Copyright The gossipsim Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "gossipsim/simnet.hpp"

namespace gossipsim {

  // Each kernel comes as a serial reference and an OpenMP version that must
  // produce identical results. `threads` <= 0 leaves the OpenMP default.

  struct ScoreInput {
    PeerStats stats;
    std::size_t peers_on_ip = 1;
  };

  std::vector<double> batch_scores_serial(const std::vector<ScoreInput> &in,
                                          SimTime now,
                                          const ScoreParams &params);
  std::vector<double> batch_scores(const std::vector<ScoreInput> &in,
                                   SimTime now, const ScoreParams &params,
                                   int threads = 0);

  /// Monte Carlo count of trials in which one fixed peer out of
  /// `candidates` is never picked as a gossip target over `rounds`
  /// heartbeats. Trial t draws from its own stream derive_seed(seed, t).
  std::uint64_t gossip_miss_count_serial(const MeshParams &params,
                                         std::size_t candidates, int rounds,
                                         std::uint64_t trials,
                                         std::uint64_t seed);
  std::uint64_t gossip_miss_count(const MeshParams &params,
                                  std::size_t candidates, int rounds,
                                  std::uint64_t trials, std::uint64_t seed,
                                  int threads = 0);

  struct RunOutcome {
    bool ok = false;
    std::string error;
    RunReport report;
  };

  /// Invoked once per finished run, possibly from a worker thread.
  using RunCallback =
      std::function<void(std::size_t index, const ScenarioConfig &cfg,
                         RunOutcome &outcome)>;

  /// Optional extra trace sink for run `index`; may return null.
  using SinkFactory =
      std::function<std::unique_ptr<TraceSink>(std::size_t index)>;

  std::vector<RunOutcome> run_all_serial(
      const std::vector<ScenarioConfig> &configs,
      const RunCallback &on_done = {}, const SinkFactory &sinks = {});
  /// Runs scenarios on `workers` threads. Results are returned in config
  /// order and are identical to run_all_serial.
  std::vector<RunOutcome> run_all(const std::vector<ScenarioConfig> &configs,
                                  int workers,
                                  const RunCallback &on_done = {},
                                  const SinkFactory &sinks = {});

}  // namespace gossipsim
