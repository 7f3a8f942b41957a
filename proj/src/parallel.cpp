/**
 * Copyright The gossipsim Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include "gossipsim/parallel.hpp"

#include <exception>

#include <omp.h>

namespace gossipsim {

  namespace {

    int resolve_threads(int threads) {
      return threads > 0 ? threads : omp_get_max_threads();
    }

    bool missed_in_trial(const MeshParams &params, std::size_t candidates,
                         int rounds, std::uint64_t seed, std::uint64_t t) {
      Rng rng(derive_seed(seed, t));
      std::vector<PeerId> pool(candidates);
      for (std::size_t i = 0; i < candidates; ++i) {
        pool[i] = PeerId{static_cast<std::uint32_t>(i)};
      }
      for (int r = 0; r < rounds; ++r) {
        for (auto p : select_gossip_targets(params, pool, rng)) {
          if (p.value == 0) {
            return false;
          }
        }
      }
      return true;
    }

    RunOutcome run_one(const ScenarioConfig &cfg, std::size_t index,
                       const SinkFactory &sinks) {
      RunOutcome out;
      try {
        auto sink = sinks ? sinks(index) : nullptr;
        out.report = run(cfg, sink.get());
        out.ok = true;
      } catch (const std::exception &ex) {
        out.error = ex.what();
      }
      return out;
    }

  }  // namespace

  std::vector<double> batch_scores_serial(const std::vector<ScoreInput> &in,
                                          SimTime now,
                                          const ScoreParams &params) {
    std::vector<double> out(in.size());
    for (std::size_t i = 0; i < in.size(); ++i) {
      out[i] = evaluate_score(in[i].stats, in[i].peers_on_ip, now, params);
    }
    return out;
  }

  std::vector<double> batch_scores(const std::vector<ScoreInput> &in,
                                   SimTime now, const ScoreParams &params,
                                   int threads) {
    std::vector<double> out(in.size());
    const auto n = static_cast<std::int64_t>(in.size());
#pragma omp parallel for schedule(static) num_threads(resolve_threads(threads))
    for (std::int64_t i = 0; i < n; ++i) {
      out[i] = evaluate_score(in[i].stats, in[i].peers_on_ip, now, params);
    }
    return out;
  }

  std::uint64_t gossip_miss_count_serial(const MeshParams &params,
                                         std::size_t candidates, int rounds,
                                         std::uint64_t trials,
                                         std::uint64_t seed) {
    std::uint64_t misses = 0;
    for (std::uint64_t t = 0; t < trials; ++t) {
      misses += missed_in_trial(params, candidates, rounds, seed, t) ? 1 : 0;
    }
    return misses;
  }

  std::uint64_t gossip_miss_count(const MeshParams &params,
                                  std::size_t candidates, int rounds,
                                  std::uint64_t trials, std::uint64_t seed,
                                  int threads) {
    std::uint64_t misses = 0;
    const auto n = static_cast<std::int64_t>(trials);
#pragma omp parallel for schedule(static) reduction(+ : misses) \
    num_threads(resolve_threads(threads))
    for (std::int64_t t = 0; t < n; ++t) {
      misses += missed_in_trial(params, candidates, rounds, seed,
                                static_cast<std::uint64_t>(t))
                  ? 1
                  : 0;
    }
    return misses;
  }

  std::vector<RunOutcome> run_all_serial(
      const std::vector<ScenarioConfig> &configs, const RunCallback &on_done,
      const SinkFactory &sinks) {
    std::vector<RunOutcome> out(configs.size());
    for (std::size_t i = 0; i < configs.size(); ++i) {
      out[i] = run_one(configs[i], i, sinks);
      if (on_done) {
        on_done(i, configs[i], out[i]);
      }
    }
    return out;
  }

  std::vector<RunOutcome> run_all(const std::vector<ScenarioConfig> &configs,
                                  int workers, const RunCallback &on_done,
                                  const SinkFactory &sinks) {
    std::vector<RunOutcome> out(configs.size());
    const auto n = static_cast<std::int64_t>(configs.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(resolve_threads(workers))
    for (std::int64_t i = 0; i < n; ++i) {
      out[i] = run_one(configs[i], static_cast<std::size_t>(i), sinks);
      if (on_done) {
        on_done(static_cast<std::size_t>(i), configs[i], out[i]);
      }
    }
    return out;
  }

}  // namespace gossipsim
