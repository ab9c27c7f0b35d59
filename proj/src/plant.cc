#include "dfmsynth/plant.h"

#include <algorithm>

#include "dfmsynth/errors.h"

namespace dfmsynth {

std::string_view sensor_name(Sensor y) { return y == Sensor::kFull ? "Full" : "Empty"; }

Sensor parse_sensor(std::string_view name) {
  if (name == "Empty") return Sensor::kEmpty;
  if (name == "Full") return Sensor::kFull;
  throw AlphabetError("unknown sensor symbol '" + std::string(name) + "'");
}

std::vector<Symbol> sensor_alphabet() { return {"Empty", "Full"}; }

Interval Interval::intersect(const Interval& other) const {
  Interval r;
  r.lo = std::max(lo, other.lo);
  if (hi < other.hi) {
    r.hi = hi;
    r.hi_closed = hi_closed;
  } else if (other.hi < hi) {
    r.hi = other.hi;
    r.hi_closed = other.hi_closed;
  } else {
    r.hi = hi;
    r.hi_closed = hi_closed && other.hi_closed;
  }
  return r;
}

std::string to_string(const Interval& interval) {
  if (interval.hi_closed && interval.lo == interval.hi) return "{" + to_decimal_string(interval.lo) + "}";
  return "[" + to_decimal_string(interval.lo) + ", " + to_decimal_string(interval.hi) +
         (interval.hi_closed ? "]" : ")");
}

MonotoneMap::MonotoneMap(Rational height, std::vector<std::pair<Rational, Rational>> knots)
    : height_(std::move(height)), knots_(std::move(knots)) {
  if (height_ <= 0) throw ParameterError("map domain height must be positive");
  if (knots_.size() < 2) throw ParameterError("monotone map needs at least two knots");
  if (knots_.front().first != 0 || knots_.back().first != height_) {
    throw ParameterError("monotone map knots must span [0, h]");
  }
  for (std::size_t i = 0; i < knots_.size(); ++i) {
    const auto& [x, y] = knots_[i];
    if (y < 0 || y > height_) throw ParameterError("monotone map leaves [0, h]");
    if (i > 0) {
      if (x <= knots_[i - 1].first) throw ParameterError("monotone map knots must increase in x");
      if (y < knots_[i - 1].second) throw ParameterError("map is not nondecreasing");
    }
  }
}

MonotoneMap MonotoneMap::identity(const Rational& height) {
  return MonotoneMap(height, {{Rational(0), Rational(0)}, {height, height}});
}

MonotoneMap MonotoneMap::saturated_shift(const Rational& height, const Rational& shift) {
  const Rational zero(0);
  if (shift >= height) return MonotoneMap(height, {{zero, height}, {height, height}});
  if (-shift >= height) return MonotoneMap(height, {{zero, zero}, {height, zero}});
  if (shift > 0) {
    return MonotoneMap(height, {{zero, shift}, {height - shift, height}, {height, height}});
  }
  if (shift < 0) {
    return MonotoneMap(height, {{zero, zero}, {-shift, zero}, {height, height + shift}});
  }
  return identity(height);
}

Rational MonotoneMap::operator()(const Rational& x) const {
  if (x < 0 || x > height_) throw DomainError("map argument outside [0, h]");
  auto it = std::lower_bound(knots_.begin(), knots_.end(), x,
                             [](const auto& knot, const Rational& v) { return knot.first < v; });
  if (it->first == x) return it->second;
  const auto& [x1, y1] = *it;
  const auto& [x0, y0] = *std::prev(it);
  return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
}

bool MonotoneMap::flat_left_of(const Rational& x) const {
  // Segment [x_j, x_{j+1}] with x_j < x <= x_{j+1}.
  for (std::size_t j = 0; j + 1 < knots_.size(); ++j) {
    if (knots_[j].first < x && x <= knots_[j + 1].first) {
      return knots_[j].second == knots_[j + 1].second;
    }
  }
  return false;
}

Interval MonotoneMap::image(const Interval& interval) const {
  if (interval.empty()) throw DomainError("image of an empty interval");
  Interval out;
  out.lo = (*this)(interval.lo);
  out.hi = (*this)(interval.hi);
  out.hi_closed = interval.hi_closed || flat_left_of(interval.hi);
  return out;
}

void Plant1D::validate() const {
  if (height <= 0) throw ParameterError("plant height must be positive");
  if (controls.empty()) throw ParameterError("plant needs at least one control");
  if (!(0 < threshold && threshold < height)) throw ParameterError("sensor threshold must lie in (0, h)");
  if (!(0 <= band.lo && band.lo < band.hi && band.hi <= height)) {
    throw ParameterError("performance band must satisfy 0 <= lo < hi <= h");
  }
  for (std::size_t i = 0; i < controls.size(); ++i) {
    if (controls[i].map.knots().back().first != height) {
      throw ParameterError("control map '" + controls[i].name + "' is not defined on [0, h]");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (controls[j].name == controls[i].name) throw ParameterError("duplicate control name");
    }
  }
}

std::size_t Plant1D::control_index(const Symbol& name) const {
  for (std::size_t i = 0; i < controls.size(); ++i) {
    if (controls[i].name == name) return i;
  }
  throw AlphabetError("unknown control '" + name + "'");
}

std::vector<Symbol> Plant1D::control_names() const {
  std::vector<Symbol> names;
  for (const auto& c : controls) names.push_back(c.name);
  return names;
}

Interval Plant1D::sensor_region(Sensor y) const {
  return y == Sensor::kFull ? Interval::closed(threshold, height)
                            : Interval::half_open(Rational(0), threshold);
}

Rational tank_displacement(const TankParams& p) {
  return Rational(1000) * p.pump_lpm * p.sample_s / (Rational(60) * p.area_cm2);
}

Plant1D make_tank(const TankParams& p) {
  if (p.area_cm2 <= 0 || p.height_cm <= 0 || p.pump_lpm <= 0 || p.sample_s <= 0) {
    throw ParameterError("tank parameters must be positive");
  }
  const Rational delta = tank_displacement(p);
  Plant1D plant;
  plant.height = p.height_cm;
  plant.controls = {
      {"Pump", MonotoneMap::saturated_shift(p.height_cm, delta)},
      {"Drain", MonotoneMap::saturated_shift(p.height_cm, -delta)},
  };
  plant.threshold = p.threshold;
  plant.band = p.band;
  plant.validate();
  return plant;
}

TankParams reference_tank_params() {
  return TankParams{Rational(100), Rational(30),          Rational(1),
                    Rational(15, 2), Band{Rational(45, 2), Rational(25)}, Rational(15)};
}

Rational plant_step(const Plant1D& plant, const Rational& x, std::size_t control) {
  if (x < 0 || x > plant.height) throw DomainError("state " + to_decimal_string(x) + " outside [0, h]");
  if (control >= plant.controls.size()) throw AlphabetError("control index out of range");
  return plant.controls[control].map(x);
}

Trajectory simulate_open_loop(const Plant1D& plant, const Rational& x0,
                              std::span<const std::size_t> controls) {
  if (x0 < 0 || x0 > plant.height) throw DomainError("initial state outside [0, h]");
  Trajectory rows;
  rows.reserve(controls.size() + 1);
  Rational x = x0;
  for (std::size_t t = 0; t <= controls.size(); ++t) {
    TrajectoryRow row{t, x, plant.sense(x), std::nullopt, plant.performance(x)};
    if (t < controls.size()) {
      row.u = controls[t];
      x = plant_step(plant, x, controls[t]);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

Interval interval_image(const Plant1D& plant, std::size_t control, const Interval& interval) {
  if (control >= plant.controls.size()) throw AlphabetError("control index out of range");
  if (interval.empty()) throw DomainError("image of an empty interval");
  if (interval.lo < 0 || interval.hi > plant.height) throw DomainError("interval outside [0, h]");
  return plant.controls[control].map.image(interval);
}

}  // namespace dfmsynth
