#ifndef DFMSYNTH_IO_H_
#define DFMSYNTH_IO_H_

// Scenario and certificate documents (JSON). Rationals are carried as
// "p/q" strings.

#include <cstddef>
#include <string>
#include <vector>

#include "dfmsynth/machine.h"
#include "dfmsynth/objective.h"
#include "dfmsynth/plant.h"
#include "dfmsynth/synthesis.h"

namespace dfmsynth {

struct Scenario {
  TankParams tank;
  std::string threshold_tie = "full";
  std::string objective_rho = "zero";
  std::string objective_mu = "indicator_v";
  std::size_t base_cells = 6;
  std::string schedule = "double";
  int max_level = 4;
  std::string delta_rho = "one";
  std::string delta_mu = "identity_w";
  Rational tau = 1;
  std::vector<Symbol> tie_order{"Pump", "Drain"};
  std::vector<Rational> sim_x0;
  std::size_t sim_steps = 1000;

  bool operator==(const Scenario&) const;
};

// The water tank with a 13-point x0 sweep over [0, h].
Scenario reference_scenario();

// Throws ConfigError on syntax errors, unknown keys or unsupported values.
Scenario parse_scenario(const std::string& json_text);
std::string write_scenario(const Scenario& scenario);

Plant1D scenario_plant(const Scenario& scenario);
Objective scenario_objective(const Scenario& scenario);
ErrorModel scenario_error_model(const Scenario& scenario);
PipelineOptions scenario_pipeline_options(const Scenario& scenario);

struct CertificateDocument {
  Scenario scenario;
  Certificate certificate;
  Dfm controller;
};

// The document carries a SHA-256 content digest over everything else.
std::string write_certificate(const CertificateDocument& document);
// Throws CertificateError when the document is malformed or its content
// digest does not match.
CertificateDocument read_certificate(const std::string& json_text);

std::string read_file(const std::string& path);  // ConfigError if unreadable
void write_file(const std::string& path, const std::string& contents);

}  // namespace dfmsynth

#endif  // DFMSYNTH_IO_H_
