/**
 * Copyright The gossipsim Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include "gossipsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

#ifndef GOSSIPSIM_VERSION
#define GOSSIPSIM_VERSION "dev"
#endif

namespace gossipsim {

  namespace {

    void grow(std::vector<bool> &v, std::size_t idx) {
      if (v.size() <= idx) {
        v.resize(idx + 1, false);
      }
    }

    bool test(const std::vector<bool> &v, std::size_t idx) {
      return idx < v.size() && v[idx];
    }

    nlohmann::ordered_json opt(const std::optional<SimTime> &v) {
      return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
    }

    constexpr SimTime kTimelineBucketMs = 10000;

  }  // namespace

  SimTime quantile(std::vector<SimTime> samples, double q) {
    if (samples.empty()) {
      throw std::invalid_argument("quantile of an empty sample");
    }
    if (!(q > 0 && q <= 1)) {
      throw std::invalid_argument("quantile q must lie in (0, 1]");
    }
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    // The epsilon absorbs representation error such as 0.99 * 100.
    auto rank = static_cast<std::size_t>(std::ceil(q * n - 1e-9));
    rank = std::clamp<std::size_t>(rank, 1, samples.size());
    return samples[rank - 1];
  }

  double bandwidth_estimate(double msg_rate_per_s, double msg_size_bytes,
                            double connections) {
    return msg_rate_per_s * msg_size_bytes * connections * kSecondsPerMonth
         / 1e9;
  }

  WindowStats summarize(const std::vector<MessageOutcome> &outcomes,
                        SimTime from, SimTime to,
                        std::optional<PeerId> publisher) {
    WindowStats w;
    std::vector<SimTime> lat;
    for (const auto &o : outcomes) {
      if (o.publish_time < from || o.publish_time >= to) {
        continue;
      }
      if (publisher && o.publisher != *publisher) {
        continue;
      }
      ++w.messages;
      if (o.complete()) {
        lat.push_back(o.latency);
      } else {
        ++w.lost;
      }
    }
    if (w.messages > 0) {
      w.loss_fraction =
          static_cast<double>(w.lost) / static_cast<double>(w.messages);
    }
    if (!lat.empty()) {
      w.p99 = quantile(lat, 0.99);
      w.max = *std::max_element(lat.begin(), lat.end());
    }
    return w;
  }

  std::vector<std::pair<SimTime, double>> honest_fraction_series(
      const std::vector<MeshSample> &timeline) {
    struct Acc {
      SimTime time = 0;
      double sum = 0;
      std::size_t n = 0;
    };
    std::map<std::uint64_t, Acc> by_hb;
    for (const auto &s : timeline) {
      const std::uint32_t total = s.honest_in_mesh + s.sybil_in_mesh;
      auto &a = by_hb[s.heartbeat];
      a.time = std::max(a.time, s.time_ms);
      if (total == 0) {
        continue;
      }
      a.sum += static_cast<double>(s.honest_in_mesh) / total;
      ++a.n;
    }
    std::vector<std::pair<SimTime, double>> out;
    for (const auto &[_, a] : by_hb) {
      if (a.n > 0) {
        out.emplace_back(a.time, a.sum / static_cast<double>(a.n));
      }
    }
    return out;
  }

  void ReportBuilder::on_event(const TraceEvent &e) {
    const std::size_t node = e.node.value;
    switch (e.kind) {
      case TraceKind::kJoin:
        grow(honest_, node);
        honest_[node] = e.honest;
        if (e.honest) {
          grow(live_honest_, node);
          if (!live_honest_[node]) {
            live_honest_[node] = true;
            ++n_live_honest_;
          }
        }
        break;
      case TraceKind::kLeave:
        if (test(live_honest_, node)) {
          live_honest_[node] = false;
          --n_live_honest_;
        }
        break;
      case TraceKind::kPublish: {
        if (index_.contains(e.id)) {
          break;
        }
        Record r;
        r.outcome.id = e.id;
        r.outcome.publisher = e.node;
        r.outcome.publish_time = e.time_ms;
        r.outcome.eligible = n_live_honest_;
        r.eligible = live_honest_;
        r.delivered.assign(live_honest_.size(), false);
        index_.emplace(e.id, records_.size());
        records_.push_back(std::move(r));
        break;
      }
      case TraceKind::kDeliver: {
        if (!test(honest_, node)) {
          break;
        }
        ++deliveries_;
        auto it = index_.find(e.id);
        if (it == index_.end()) {
          break;
        }
        auto &r = records_[it->second];
        if (!test(r.eligible, node) || r.delivered[node]) {
          break;
        }
        r.delivered[node] = true;
        ++r.outcome.delivered;
        r.outcome.latency =
            std::max(r.outcome.latency, e.time_ms - r.outcome.publish_time);
        break;
      }
      case TraceKind::kDuplicate:
        if (test(honest_, node)) {
          ++duplicates_;
        }
        break;
      case TraceKind::kInvalid:
        if (test(honest_, node)) {
          ++invalid_;
        }
        break;
      case TraceKind::kMeshSnapshot:
        timeline_.push_back(MeshSample{e.time_ms, e.heartbeat, e.node,
                                       e.honest_in_mesh, e.sybil_in_mesh});
        break;
      case TraceKind::kRunEnd:
        end_time_ = e.time_ms;
        finished_ = true;
        break;
      default:
        break;
    }
  }

  RunReport ReportBuilder::build() const {
    if (!finished_) {
      throw std::runtime_error("trace truncated: no run_end event");
    }
    RunReport r;
    r.duration_ms = end_time_;
    r.outcomes.reserve(records_.size());
    for (const auto &rec : records_) {
      r.outcomes.push_back(rec.outcome);
    }
    r.mesh_timeline = timeline_;
    r.deliveries = deliveries_;
    r.duplicates = duplicates_;
    r.invalid = invalid_;
    finalize_latency(r);
    return r;
  }

  RunReport compute_report(const std::vector<TraceEvent> &trace) {
    ReportBuilder b;
    for (const auto &e : trace) {
      b.on_event(e);
    }
    return b.build();
  }

  void finalize_latency(RunReport &report) {
    report.messages = report.outcomes.size();
    report.latencies.clear();
    std::size_t within6 = 0;
    std::size_t within12 = 0;
    for (const auto &o : report.outcomes) {
      if (!o.complete()) {
        continue;
      }
      report.latencies.push_back(o.latency);
      within6 += o.latency <= 6000 ? 1 : 0;
      within12 += o.latency <= 12000 ? 1 : 0;
    }
    std::sort(report.latencies.begin(), report.latencies.end());
    report.complete = report.latencies.size();
    report.p50.reset();
    report.p99.reset();
    report.max.reset();
    report.mean_latency = 0;
    report.loss_fraction = 0;
    report.deadline_pass_6s = 0;
    report.deadline_pass_12s = 0;
    if (report.messages > 0) {
      const auto n = static_cast<double>(report.messages);
      report.loss_fraction =
          static_cast<double>(report.messages - report.complete) / n;
      report.deadline_pass_6s = static_cast<double>(within6) / n;
      report.deadline_pass_12s = static_cast<double>(within12) / n;
    }
    if (!report.latencies.empty()) {
      report.p50 = quantile(report.latencies, 0.5);
      report.p99 = quantile(report.latencies, 0.99);
      report.max = report.latencies.back();
      double sum = 0;
      for (auto l : report.latencies) {
        sum += static_cast<double>(l);
      }
      report.mean_latency = sum / static_cast<double>(report.latencies.size());
    }
  }

  std::string report_json(const RunReport &r) {
    nlohmann::ordered_json j;
    j["version"] = GOSSIPSIM_VERSION;
    j["scenario"] = r.scenario;
    j["protocol"] = r.protocol;
    j["seed"] = r.seed;
    j["duration_ms"] = r.duration_ms;
    j["n_honest"] = r.n_honest;
    j["n_sybil"] = r.n_sybil;
    j["messages"] = r.messages;
    j["complete"] = r.complete;
    j["lost"] = r.messages - r.complete;
    j["loss_fraction"] = r.loss_fraction;
    j["latency_ms"] = {{"p50", opt(r.p50)},
                       {"p99", opt(r.p99)},
                       {"max", opt(r.max)},
                       {"mean", r.mean_latency}};
    j["deadline_pass"] = {{"6000", r.deadline_pass_6s},
                          {"12000", r.deadline_pass_12s}};
    j["deliveries"] = r.deliveries;
    j["duplicates"] = r.duplicates;
    j["invalid"] = r.invalid;
    j["bandwidth"] = {
        {"estimate_gb_month", r.bandwidth_estimate_gb_month},
        {"measured_gb_month_per_node", r.measured_gb_month_per_node}};
    j["traffic"] = {{"rpcs_sent", r.traffic.rpcs_sent},
                    {"rpcs_delivered", r.traffic.rpcs_delivered},
                    {"rpcs_dropped", r.traffic.rpcs_dropped},
                    {"rpcs_in_flight", r.traffic.rpcs_in_flight},
                    {"connections_refused", r.traffic.connections_refused},
                    {"honest_bytes_sent", r.traffic.honest_bytes_sent}};

    auto timeline = nlohmann::ordered_json::array();
    for (SimTime from = 0; from < r.duration_ms; from += kTimelineBucketMs) {
      const auto w = summarize(r.outcomes, from, from + kTimelineBucketMs);
      if (w.messages == 0) {
        continue;
      }
      timeline.push_back({{"from_ms", from},
                          {"messages", w.messages},
                          {"lost", w.lost},
                          {"p99", opt(w.p99)}});
    }
    j["latency_timeline"] = std::move(timeline);

    auto fraction = nlohmann::ordered_json::array();
    for (const auto &[t, f] : honest_fraction_series(r.mesh_timeline)) {
      if (t % kTimelineBucketMs < 1000) {
        fraction.push_back({{"time_ms", t}, {"honest_fraction", f}});
      }
    }
    j["mesh_honest_fraction"] = std::move(fraction);
    return j.dump(2);
  }

  void write_cdf_csv(const RunReport &r, std::ostream &out) {
    out << "latency_ms,cumulative_fraction\n";
    if (r.messages == 0) {
      return;
    }
    const auto n = static_cast<double>(r.messages);
    for (std::size_t i = 0; i < r.latencies.size(); ++i) {
      if (i + 1 < r.latencies.size() && r.latencies[i + 1] == r.latencies[i]) {
        continue;
      }
      out << r.latencies[i] << ',' << static_cast<double>(i + 1) / n << '\n';
    }
  }

  void write_mesh_timeline_csv(const RunReport &r, std::ostream &out) {
    out << "time_ms,heartbeat,node,honest_in_mesh,sybil_in_mesh\n";
    for (const auto &s : r.mesh_timeline) {
      out << s.time_ms << ',' << s.heartbeat << ',' << s.node.value << ','
          << s.honest_in_mesh << ',' << s.sybil_in_mesh << '\n';
    }
  }

  void write_cdf_svg(const RunReport &r, std::ostream &out) {
    constexpr double kW = 640, kH = 400, kL = 60, kR = 20, kT = 30, kB = 50;
    const double pw = kW - kL - kR;
    const double ph = kH - kT - kB;

    SimTime xmax = r.max.value_or(1);
    // Round the axis up to 1, 2 or 5 times a power of ten.
    double mag = std::pow(10.0, std::floor(std::log10(std::max<double>(xmax, 1))));
    double top = mag;
    for (double f : {1.0, 2.0, 5.0, 10.0}) {
      if (f * mag >= static_cast<double>(xmax)) {
        top = f * mag;
        break;
      }
    }
    auto x = [&](double v) { return kL + pw * v / top; };
    auto y = [&](double v) { return kT + ph * (1.0 - v); };

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW
        << "\" height=\"" << kH << "\" font-family=\"sans-serif\" "
        << "font-size=\"12\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << kW / 2 << "\" y=\"18\" text-anchor=\"middle\">"
        << "Delivery latency CDF: " << r.scenario << " (" << r.protocol
        << ", seed " << r.seed << ")</text>\n";
    for (int i = 0; i <= 5; ++i) {
      const double fx = top * i / 5;
      const double fy = i / 5.0;
      out << "<line x1=\"" << x(fx) << "\" y1=\"" << y(0) << "\" x2=\""
          << x(fx) << "\" y2=\"" << y(1) << "\" stroke=\"#ddd\"/>\n";
      out << "<line x1=\"" << x(0) << "\" y1=\"" << y(fy) << "\" x2=\""
          << x(top) << "\" y2=\"" << y(fy) << "\" stroke=\"#ddd\"/>\n";
      out << "<text x=\"" << x(fx) << "\" y=\"" << y(0) + 16
          << "\" text-anchor=\"middle\">" << fx << "</text>\n";
      out << "<text x=\"" << x(0) - 6 << "\" y=\"" << y(fy) + 4
          << "\" text-anchor=\"end\">" << fy << "</text>\n";
    }
    out << "<text x=\"" << kL + pw / 2 << "\" y=\"" << kH - 12
        << "\" text-anchor=\"middle\">latency (ms)</text>\n";
    out << "<text transform=\"translate(16," << kT + ph / 2
        << ") rotate(-90)\" text-anchor=\"middle\">fraction of messages"
        << "</text>\n";

    if (!r.latencies.empty() && r.messages > 0) {
      const auto n = static_cast<double>(r.messages);
      out << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" "
          << "points=\"" << x(0) << ',' << y(0);
      double frac = 0;
      for (std::size_t i = 0; i < r.latencies.size(); ++i) {
        const double lx = x(static_cast<double>(r.latencies[i]));
        out << ' ' << lx << ',' << y(frac);
        frac = static_cast<double>(i + 1) / n;
        out << ' ' << lx << ',' << y(frac);
      }
      out << "\"/>\n";
    }
    out << "</svg>\n";
  }

}  // namespace gossipsim
