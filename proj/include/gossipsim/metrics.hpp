/**
 * Copyright The gossipsim Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "gossipsim/trace.hpp"

namespace gossipsim {

  /// Nearest-rank quantile: element ceil(q * n) of the ascending sort,
  /// 1-based. Throws std::invalid_argument on empty input or q outside
  /// (0, 1].
  SimTime quantile(std::vector<SimTime> samples, double q);

  inline constexpr double kSecondsPerMonth = 30.0 * 24 * 3600;

  /// msg_rate [1/s] * msg_size [bytes] * connections over a 30-day month,
  /// in decimal GB.
  double bandwidth_estimate(double msg_rate_per_s, double msg_size_bytes,
                            double connections);

  /// Fate of one published message across the honest nodes that were live
  /// and subscribed when it was published.
  struct MessageOutcome {
    MessageId id;
    PeerId publisher;
    SimTime publish_time = 0;
    std::size_t eligible = 0;
    std::size_t delivered = 0;
    /// Last eligible first-delivery minus publish time.
    SimTime latency = 0;

    bool complete() const {
      return delivered == eligible;
    }
  };

  struct MeshSample {
    SimTime time_ms = 0;
    std::uint64_t heartbeat = 0;
    PeerId node;
    std::uint32_t honest_in_mesh = 0;
    std::uint32_t sybil_in_mesh = 0;
  };

  struct WindowStats {
    std::size_t messages = 0;
    std::size_t lost = 0;
    double loss_fraction = 0;
    std::optional<SimTime> p99;
    std::optional<SimTime> max;
  };

  /// Loss and latency of messages published in [from, to), optionally
  /// restricted to one publisher.
  WindowStats summarize(const std::vector<MessageOutcome> &outcomes,
                        SimTime from, SimTime to,
                        std::optional<PeerId> publisher = std::nullopt);

  /// Mean over honest nodes with a nonempty mesh of the honest share of
  /// that mesh, one point per heartbeat index.
  std::vector<std::pair<SimTime, double>> honest_fraction_series(
      const std::vector<MeshSample> &timeline);

  struct TrafficCounters {
    std::uint64_t rpcs_sent = 0;
    std::uint64_t rpcs_delivered = 0;
    std::uint64_t rpcs_dropped = 0;
    std::uint64_t rpcs_in_flight = 0;
    std::uint64_t connections_refused = 0;
    std::uint64_t honest_bytes_sent = 0;
  };

  struct RunReport {
    std::string scenario;
    std::string protocol;
    std::uint64_t seed = 0;
    SimTime duration_ms = 0;
    std::size_t n_honest = 0;
    std::size_t n_sybil = 0;

    std::size_t messages = 0;
    std::size_t complete = 0;
    double loss_fraction = 0;
    /// Ascending latencies of fully delivered messages.
    std::vector<SimTime> latencies;
    std::optional<SimTime> p50;
    std::optional<SimTime> p99;
    std::optional<SimTime> max;
    double mean_latency = 0;
    double deadline_pass_6s = 0;
    double deadline_pass_12s = 0;

    std::uint64_t deliveries = 0;
    std::uint64_t duplicates = 0;
    std::uint64_t invalid = 0;

    double bandwidth_estimate_gb_month = 0;
    double measured_gb_month_per_node = 0;

    TrafficCounters traffic;
    std::vector<MessageOutcome> outcomes;
    std::vector<MeshSample> mesh_timeline;
  };

  /// Consumes the event stream as it is produced. The report is only
  /// available once a run_end event has been seen.
  class ReportBuilder : public TraceSink {
   public:
    void on_event(const TraceEvent &e) override;

    bool finished() const {
      return finished_;
    }

    /// Throws std::runtime_error if the stream was truncated.
    RunReport build() const;

   private:
    struct Record {
      MessageOutcome outcome;
      std::vector<bool> eligible;
      std::vector<bool> delivered;
    };

    std::vector<bool> live_honest_;
    std::vector<bool> honest_;
    std::size_t n_live_honest_ = 0;
    std::vector<Record> records_;
    std::unordered_map<MessageId, std::size_t> index_;
    std::vector<MeshSample> timeline_;
    std::uint64_t deliveries_ = 0;
    std::uint64_t duplicates_ = 0;
    std::uint64_t invalid_ = 0;
    SimTime end_time_ = 0;
    bool finished_ = false;
  };

  /// Report from a complete recorded trace. Throws std::runtime_error when
  /// the trace does not end with run_end.
  RunReport compute_report(const std::vector<TraceEvent> &trace);

  /// Fills the latency statistics from `outcomes`.
  void finalize_latency(RunReport &report);

  /// JSON document for report.json. The version stamp is the only field
  /// that may differ between builds.
  std::string report_json(const RunReport &report);
  void write_cdf_csv(const RunReport &report, std::ostream &out);
  void write_mesh_timeline_csv(const RunReport &report, std::ostream &out);
  void write_cdf_svg(const RunReport &report, std::ostream &out);

}  // namespace gossipsim
