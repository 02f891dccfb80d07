#include "trialmsm/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace trialmsm {

namespace {

struct RiskSet {
  std::vector<double> entries;  // sorted
  std::vector<double> exits;    // sorted

  // #{rows with entry < t <= exit}
  double at(double t) const {
    const auto entered = std::lower_bound(entries.begin(), entries.end(), t) - entries.begin();
    const auto left = std::lower_bound(exits.begin(), exits.end(), t) - exits.begin();
    return static_cast<double>(entered - left);
  }
};

RiskSet risk_set(std::span<const MsmRecord> records, int from) {
  RiskSet rs;
  for (const auto& rec : records) {
    for (const auto& row : rec.rows) {
      if (row.from != from) continue;
      rs.entries.push_back(row.entry);
      rs.exits.push_back(row.exit);
    }
  }
  std::sort(rs.entries.begin(), rs.entries.end());
  std::sort(rs.exits.begin(), rs.exits.end());
  return rs;
}

StepFunction make_step(double initial, const std::vector<double>& t, const std::vector<double>& v) {
  StepFunction f;
  f.initial = initial;
  f.times = Eigen::Map<const Eigen::VectorXd>(t.data(), static_cast<Eigen::Index>(t.size()));
  f.values = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
  return f;
}

void require_state_pair(int from, int to) {
  const bool ok = (from == 0 && (to == 1 || to == 2)) || (from == 1 && to == 2);
  if (!ok) throw std::invalid_argument("transition must be 0->1, 0->2 or 1->2");
}

}  // namespace

double StepFunction::operator()(double t) const {
  const auto it = std::upper_bound(times.data(), times.data() + times.size(), t);
  const auto k = it - times.data();
  return k == 0 ? initial : values[k - 1];
}

MsmRecord derive_idm_record(const EndpointRow& row, std::size_t index) {
  if (!(row.pfs_time > 0.0) || !(row.os_time > 0.0) || std::isinf(row.pfs_time) ||
      std::isinf(row.os_time)) {
    throw InvalidRecord(index, "times must be finite and > 0");
  }
  if (row.pfs_time > row.os_time) throw InvalidRecord(index, "PFS time exceeds OS time");
  if (row.os_event && !row.pfs_event) throw InvalidRecord(index, "death without a PFS event");
  MsmRecord rec{row.id, row.arm, {}};
  if (!row.pfs_event) {
    rec.rows.push_back({0, std::nullopt, 0.0, row.pfs_time});
  } else if (row.os_event && row.os_time == row.pfs_time) {
    rec.rows.push_back({0, 2, 0.0, row.pfs_time});
  } else {
    rec.rows.push_back({0, 1, 0.0, row.pfs_time});
    if (row.os_time > row.pfs_time) {
      rec.rows.push_back(
          {1, row.os_event ? std::optional(2) : std::nullopt, row.pfs_time, row.os_time});
    }
  }
  return rec;
}

DerivedRecords derive_idm_records(std::span<const EndpointRow> rows) {
  DerivedRecords out;
  out.records.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    try {
      out.records.push_back(derive_idm_record(rows[i], i));
    } catch (const InvalidRecord& e) {
      out.rejected.emplace_back(i, e.what());
    }
  }
  return out;
}

StepFunction kaplan_meier(std::span<const double> times, std::span<const bool> events) {
  if (times.size() != events.size()) throw std::invalid_argument("kaplan_meier: length mismatch");
  std::vector<std::size_t> order(times.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return times[a] < times[b]; });
  std::vector<double> jt, jv;
  double s = 1.0;
  double at_risk = static_cast<double>(times.size());
  std::size_t i = 0;
  while (i < order.size()) {
    const double t = times[order[i]];
    double d = 0.0, leaving = 0.0;
    for (; i < order.size() && times[order[i]] == t; ++i) {
      leaving += 1.0;
      if (events[order[i]]) d += 1.0;
    }
    if (d > 0.0) {
      s *= 1.0 - d / at_risk;
      jt.push_back(t);
      jv.push_back(s);
    }
    at_risk -= leaving;
  }
  return make_step(1.0, jt, jv);
}

StepFunction nelson_aalen(std::span<const MsmRecord> records, int from, int to,
                          std::size_t min_at_risk) {
  require_state_pair(from, to);
  const RiskSet rs = risk_set(records, from);
  std::vector<double> event_times;
  for (const auto& rec : records) {
    for (const auto& row : rec.rows) {
      if (row.from == from && row.to == to) event_times.push_back(row.exit);
    }
  }
  std::sort(event_times.begin(), event_times.end());
  std::vector<double> jt, jv;
  double cum = 0.0;
  std::size_t i = 0;
  while (i < event_times.size()) {
    const double t = event_times[i];
    double d = 0.0;
    for (; i < event_times.size() && event_times[i] == t; ++i) d += 1.0;
    const double y = rs.at(t);
    if (y >= static_cast<double>(min_at_risk) && y > 0.0) cum += d / y;
    jt.push_back(t);
    jv.push_back(cum);
  }
  return make_step(0.0, jt, jv);
}

Eigen::Matrix3d AalenJohansenPath::at(double t) const {
  const auto k = std::upper_bound(times.begin(), times.end(), t) - times.begin();
  return k == 0 ? Eigen::Matrix3d::Identity() : matrices[static_cast<std::size_t>(k - 1)];
}

AalenJohansenPath aalen_johansen_path(std::span<const MsmRecord> records, double s) {
  const RiskSet rs0 = risk_set(records, 0);
  const RiskSet rs1 = risk_set(records, 1);
  struct Jump {
    double time;
    int from;
    int to;
  };
  std::vector<Jump> jumps;
  for (const auto& rec : records) {
    for (const auto& row : rec.rows) {
      if (row.to && row.exit > s) jumps.push_back({row.exit, row.from, *row.to});
    }
  }
  std::sort(jumps.begin(), jumps.end(), [](const Jump& a, const Jump& b) { return a.time < b.time; });
  AalenJohansenPath path;
  path.start = s;
  Eigen::Matrix3d p = Eigen::Matrix3d::Identity();
  std::size_t i = 0;
  while (i < jumps.size()) {
    const double t = jumps[i].time;
    double d01 = 0.0, d02 = 0.0, d12 = 0.0;
    for (; i < jumps.size() && jumps[i].time == t; ++i) {
      const Jump& j = jumps[i];
      if (j.from == 0) (j.to == 1 ? d01 : d02) += 1.0;
      else d12 += 1.0;
    }
    Eigen::Matrix3d step = Eigen::Matrix3d::Identity();
    const double y0 = rs0.at(t);
    if (y0 > 0.0) {
      const double d0 = d01 + d02;
      step(0, 0) = 1.0 + -(d0 / y0);
      step(0, 1) = d01 / y0;
      step(0, 2) = d02 / y0;
    }
    const double y1 = rs1.at(t);
    if (y1 > 0.0) {
      step(1, 1) = 1.0 + -(d12 / y1);
      step(1, 2) = d12 / y1;
    }
    p = p * step;
    path.times.push_back(t);
    path.matrices.push_back(p);
  }
  return path;
}

Eigen::Matrix3d aalen_johansen(std::span<const MsmRecord> records, double s, double t) {
  if (s > t) throw std::domain_error("aalen_johansen: s must not exceed t");
  return aalen_johansen_path(records, s).at(t);
}

PiecewiseFit fit_piecewise_exponential(std::span<const MsmRecord> records, int from, int to,
                                       std::vector<double> breaks) {
  require_state_pair(from, to);
  if (breaks.empty() || breaks.front() != 0.0) {
    throw std::invalid_argument("piecewise fit: breaks must start at 0");
  }
  for (std::size_t i = 1; i < breaks.size(); ++i) {
    if (!(breaks[i] > breaks[i - 1])) {
      throw std::invalid_argument("piecewise fit: breaks must be strictly increasing");
    }
  }
  const std::size_t k = breaks.size();
  PiecewiseFit fit{std::move(breaks), std::vector<double>(k, 0.0), std::vector<double>(k, 0.0),
                   std::vector<double>(k, 0.0), std::vector<bool>(k, false)};
  auto upper = [&](std::size_t i) {
    return i + 1 < k ? fit.breaks[i + 1] : std::numeric_limits<double>::infinity();
  };
  for (const auto& rec : records) {
    for (const auto& row : rec.rows) {
      if (row.from != from) continue;
      for (std::size_t i = 0; i < k; ++i) {
        const double lo = std::max(row.entry, fit.breaks[i]);
        const double hi = std::min(row.exit, upper(i));
        if (hi > lo) fit.exposure[i] += hi - lo;
      }
      if (row.to == to) {
        const auto it = std::upper_bound(fit.breaks.begin(), fit.breaks.end(), row.exit);
        fit.events[static_cast<std::size_t>(it - fit.breaks.begin()) - 1] += 1.0;
      }
    }
  }
  for (std::size_t i = 0; i < k; ++i) {
    if (fit.exposure[i] > 0.0) {
      fit.rates[i] = fit.events[i] / fit.exposure[i];
    } else {
      fit.zero_exposure[i] = true;
    }
  }
  return fit;
}

std::vector<std::pair<double, Eigen::Vector2d>> paired_cumulative(const StepFunction& a,
                                                                  const StepFunction& b) {
  std::vector<double> grid(a.times.data(), a.times.data() + a.times.size());
  grid.insert(grid.end(), b.times.data(), b.times.data() + b.times.size());
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  std::vector<std::pair<double, Eigen::Vector2d>> out;
  out.reserve(grid.size());
  for (double t : grid) out.emplace_back(t, Eigen::Vector2d(a(t), b(t)));
  return out;
}

}  // namespace trialmsm
