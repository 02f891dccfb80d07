#include "trialmsm/hazard.hpp"

#include "trialmsm/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace trialmsm {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

void require_rate(double rate, const char* what) {
  if (!(rate >= 0.0) || std::isinf(rate)) {
    throw InvalidHazard(std::string(what) + ": rates must be finite and >= 0");
  }
}

// Index of the interval containing t under the [break_i, break_{i+1}) convention.
std::size_t interval_of(const PiecewiseHazard& h, double t) {
  const auto it = std::upper_bound(h.breaks.begin(), h.breaks.end(), t);
  return static_cast<std::size_t>(std::distance(h.breaks.begin(), it)) - 1;
}

double base_rate(const BaseHazard& h, double t) {
  return std::visit(
      overloaded{
          [](const ConstantHazard& c) { return c.rate; },
          [t](const PiecewiseHazard& p) { return p.rates[interval_of(p, t)]; },
          [t](const WeibullHazard& w) {
            return w.shape / w.scale * std::pow(t / w.scale, w.shape - 1.0);
          },
      },
      h);
}

// Lambda(0, t).
double base_cumulative(const BaseHazard& h, double t) {
  return std::visit(overloaded{
                        [t](const ConstantHazard& c) { return c.rate * t; },
                        [t](const PiecewiseHazard& p) {
                          const std::size_t i = interval_of(p, t);
                          return p.cumulative_at_breaks[i] + p.rates[i] * (t - p.breaks[i]);
                        },
                        [t](const WeibullHazard& w) { return std::pow(t / w.scale, w.shape); },
                    },
                    h);
}

double base_cumulative(const BaseHazard& h, double a, double b) {
  if (const auto* c = std::get_if<ConstantHazard>(&h)) return c->rate * (b - a);
  if (const auto* p = std::get_if<PiecewiseHazard>(&h)) {
    const std::size_t ia = interval_of(*p, a);
    const std::size_t ib = interval_of(*p, b);
    if (ia == ib) return p->rates[ia] * (b - a);
    double total = p->rates[ia] * (p->breaks[ia + 1] - a);
    for (std::size_t i = ia + 1; i < ib; ++i) {
      total += p->rates[i] * (p->breaks[i + 1] - p->breaks[i]);
    }
    return total + p->rates[ib] * (b - p->breaks[ib]);
  }
  return base_cumulative(h, b) - base_cumulative(h, a);
}

double base_invert(const BaseHazard& h, double a, double target) {
  if (target == 0.0) return a;
  return std::visit(
      overloaded{
          [&](const ConstantHazard& c) { return c.rate > 0.0 ? a + target / c.rate : kInf; },
          [&](const PiecewiseHazard& p) {
            std::size_t i = interval_of(p, a);
            double remaining = target;
            double t = a;
            for (; i + 1 < p.breaks.size(); ++i) {
              if (remaining <= 0.0) return t;
              const double mass = p.rates[i] * (p.breaks[i + 1] - t);
              if (mass >= remaining && p.rates[i] > 0.0) return t + remaining / p.rates[i];
              remaining -= mass;
              t = p.breaks[i + 1];
            }
            if (remaining <= 0.0) return t;
            return p.rates[i] > 0.0 ? t + remaining / p.rates[i] : kInf;
          },
          [&](const WeibullHazard& w) {
            const double total = std::pow(a / w.scale, w.shape) + target;
            return w.scale * std::pow(total, 1.0 / w.shape);
          },
      },
      h);
}

double shift_for(const HazardSpec& spec, std::optional<double> entry, double t) {
  if (spec.needs_entry()) {
    if (!entry) throw std::invalid_argument("entry-shifted hazard needs an entry time");
    if (*entry > t) throw std::domain_error("entry time exceeds evaluation time");
    return spec.clock_mode() == ClockMode::clock_reset ? *entry : 0.0;
  }
  if (entry) throw std::invalid_argument("entry time supplied for a non-shifted hazard");
  return 0.0;
}

}  // namespace

HazardSpec HazardSpec::constant(double rate) {
  require_rate(rate, "constant hazard");
  return HazardSpec(ConstantHazard{rate}, std::nullopt);
}

HazardSpec HazardSpec::piecewise(std::vector<double> breaks, std::vector<double> rates) {
  if (breaks.empty() || breaks.front() != 0.0) {
    throw InvalidHazard("piecewise hazard: breaks must start at 0");
  }
  if (rates.size() != breaks.size()) {
    throw InvalidHazard("piecewise hazard: need exactly one rate per interval");
  }
  for (std::size_t i = 1; i < breaks.size(); ++i) {
    if (!(breaks[i] > breaks[i - 1]) || std::isinf(breaks[i])) {
      throw InvalidHazard("piecewise hazard: breaks must be finite and strictly increasing");
    }
  }
  for (double r : rates) require_rate(r, "piecewise hazard");
  std::vector<double> cumulative(breaks.size(), 0.0);
  for (std::size_t i = 1; i < breaks.size(); ++i) {
    cumulative[i] = cumulative[i - 1] + rates[i - 1] * (breaks[i] - breaks[i - 1]);
  }
  return HazardSpec(PiecewiseHazard{std::move(breaks), std::move(rates), std::move(cumulative)},
                    std::nullopt);
}

HazardSpec HazardSpec::weibull(double shape, double scale) {
  if (!(shape > 0.0) || !(scale > 0.0) || std::isinf(shape) || std::isinf(scale)) {
    throw InvalidHazard("weibull hazard: shape and scale must be finite and > 0");
  }
  return HazardSpec(WeibullHazard{shape, scale}, std::nullopt);
}

HazardSpec HazardSpec::entry_shifted(const HazardSpec& inner, ClockMode mode) {
  if (inner.needs_entry()) throw InvalidHazard("entry-shifted hazards do not nest");
  return HazardSpec(inner.base_, mode);
}

std::optional<double> HazardSpec::constant_rate() const noexcept {
  if (clock_) return std::nullopt;
  if (const auto* c = std::get_if<ConstantHazard>(&base_)) return c->rate;
  return std::nullopt;
}

bool HazardSpec::operator==(const HazardSpec& other) const {
  if (clock_ != other.clock_ || base_.index() != other.base_.index()) return false;
  return std::visit(
      overloaded{
          [&](const ConstantHazard& x) { return x.rate == std::get<ConstantHazard>(other.base_).rate; },
          [&](const PiecewiseHazard& x) {
            const auto& y = std::get<PiecewiseHazard>(other.base_);
            return x.breaks == y.breaks && x.rates == y.rates;
          },
          [&](const WeibullHazard& x) {
            const auto& y = std::get<WeibullHazard>(other.base_);
            return x.shape == y.shape && x.scale == y.scale;
          },
      },
      base_);
}

double hazard_at(const HazardSpec& spec, double t, std::optional<double> entry) {
  if (!(t >= 0.0)) throw std::domain_error("hazard_at: t must be >= 0");
  const double shift = shift_for(spec, entry, t);
  return base_rate(spec.base(), t - shift);
}

double cumulative_hazard(const HazardSpec& spec, double a, double b, std::optional<double> entry) {
  if (!(a >= 0.0)) throw std::domain_error("cumulative_hazard: a must be >= 0");
  if (a > b) throw std::domain_error("cumulative_hazard: a must not exceed b");
  const double shift = shift_for(spec, entry, a);
  if (std::isinf(b)) {
    const auto* p = std::get_if<PiecewiseHazard>(&spec.base());
    const auto* c = std::get_if<ConstantHazard>(&spec.base());
    if (p && p->rates.back() == 0.0) {
      const double end = std::max(a - shift, p->breaks.back());
      return base_cumulative(spec.base(), a - shift, end);
    }
    if (c && c->rate == 0.0) return 0.0;
    return kInf;
  }
  return base_cumulative(spec.base(), a - shift, b - shift);
}

double invert_cumulative_hazard(const HazardSpec& spec, double a, double target,
                                std::optional<double> entry) {
  if (!(a >= 0.0)) throw std::domain_error("invert_cumulative_hazard: a must be >= 0");
  if (!(target >= 0.0)) throw std::domain_error("invert_cumulative_hazard: target must be >= 0");
  const double shift = shift_for(spec, entry, a);
  return base_invert(spec.base(), a - shift, target) + shift;
}

}  // namespace trialmsm
