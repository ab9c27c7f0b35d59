#ifndef DFMSYNTH_PLANT_H_
#define DFMSYNTH_PLANT_H_

// One-dimensional quantized plants: a state x in [0, h], a finite set of
// controls each acting through a monotone saturated map, a binary threshold
// sensor and a binary band-membership performance output.

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dfmsynth/gain.h"
#include "dfmsynth/rational.h"

namespace dfmsynth {

enum class Sensor { kEmpty = 0, kFull = 1 };

inline constexpr std::array<Sensor, 2> kSensorValues = {Sensor::kEmpty, Sensor::kFull};

std::string_view sensor_name(Sensor y);
Sensor parse_sensor(std::string_view name);  // AlphabetError on anything else
std::vector<Symbol> sensor_alphabet();

// [lo, hi) or [lo, hi]. The lower end is always closed.
struct Interval {
  Rational lo;
  Rational hi;
  bool hi_closed = false;

  static Interval closed(Rational lo, Rational hi) { return {std::move(lo), std::move(hi), true}; }
  static Interval half_open(Rational lo, Rational hi) { return {std::move(lo), std::move(hi), false}; }

  bool empty() const { return hi < lo || (hi == lo && !hi_closed); }
  bool contains(const Rational& x) const { return x >= lo && (hi_closed ? x <= hi : x < hi); }
  // Intersection; the result may be empty.
  Interval intersect(const Interval& other) const;
  bool operator==(const Interval&) const = default;
};

std::string to_string(const Interval& interval);

// Continuous, nondecreasing, piecewise-linear map on [0, h] given by knots
// (x_0 = 0 < ... < x_k = h, y_0 <= ... <= y_k) with every y_i in [0, h].
class MonotoneMap {
 public:
  MonotoneMap(Rational height, std::vector<std::pair<Rational, Rational>> knots);

  static MonotoneMap identity(const Rational& height);
  // x -> min(h, max(0, x + shift)).
  static MonotoneMap saturated_shift(const Rational& height, const Rational& shift);

  Rational operator()(const Rational& x) const;
  // Exact image of a nonempty interval. An open upper end stays open unless
  // the map is flat just below it, in which case the supremum is attained.
  Interval image(const Interval& interval) const;

  const std::vector<std::pair<Rational, Rational>>& knots() const { return knots_; }
  bool operator==(const MonotoneMap&) const = default;

 private:
  bool flat_left_of(const Rational& x) const;

  Rational height_;
  std::vector<std::pair<Rational, Rational>> knots_;
};

struct Control {
  Symbol name;
  MonotoneMap map;
};

struct Band {
  Rational lo;
  Rational hi;
  bool contains(const Rational& x) const { return lo <= x && x <= hi; }
};

// The sensor reads Full iff x >= threshold; performance v = 0 iff x lies in
// the closed band.
struct Plant1D {
  Rational height;
  std::vector<Control> controls;
  Rational threshold;
  Band band;

  void validate() const;  // throws ParameterError
  Sensor sense(const Rational& x) const { return x >= threshold ? Sensor::kFull : Sensor::kEmpty; }
  int performance(const Rational& x) const { return band.contains(x) ? 0 : 1; }
  std::size_t control_index(const Symbol& name) const;  // AlphabetError
  std::vector<Symbol> control_names() const;
  // Set of states producing sensor reading y.
  Interval sensor_region(Sensor y) const;
};

struct TankParams {
  Rational area_cm2;
  Rational height_cm;
  Rational pump_lpm;
  Rational sample_s;
  Band band;
  Rational threshold;
};

// Level displacement per sample: 10^3 * p * T / (60 * A) cm.
Rational tank_displacement(const TankParams& params);

// Controls "Pump" (x -> min(h, x + d)) and "Drain" (x -> max(0, x - d)).
Plant1D make_tank(const TankParams& params);

// Values used throughout the water tank example.
TankParams reference_tank_params();

Rational plant_step(const Plant1D& plant, const Rational& x, std::size_t control);

struct TrajectoryRow {
  std::size_t t = 0;
  Rational x;
  Sensor y = Sensor::kEmpty;
  std::optional<std::size_t> u;  // absent on the final row of an open-loop run
  int v = 0;
};

using Trajectory = std::vector<TrajectoryRow>;

// Rows t = 0..controls.size(); row t applies controls[t] to x(t).
Trajectory simulate_open_loop(const Plant1D& plant, const Rational& x0,
                              std::span<const std::size_t> controls);

Interval interval_image(const Plant1D& plant, std::size_t control, const Interval& interval);

}  // namespace dfmsynth

#endif  // DFMSYNTH_PLANT_H_
