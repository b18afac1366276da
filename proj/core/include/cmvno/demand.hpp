#pragma once

#include <string>
#include <utility>
#include <vector>

#include "cmvno/environment.hpp"

namespace cmvno {

enum class DemandFamily {
  kQuadratic,  // D = scale / M * (q - q_max)^2 on [0, q_max]
  kLinear,     // D = scale / M * (q_max - q)
  kTable,      // D = table(q) / M, piecewise linear
};

const char* to_string(DemandFamily family);
DemandFamily demand_family_from_string(const std::string& name);

/// One application class in the traffic mix.
struct Application {
  double share = 1.0;                // theta_k
  DiscreteDistribution file_length;  // packets per file
};

/// Expected packet demand as a function of market state and price, plus the
/// user/file structure used to draw actual arrivals. The expected number of
/// users is the packet demand divided by the mix's mean file length.
struct DemandModel {
  DemandFamily family = DemandFamily::kQuadratic;
  double scale = 1.0;
  double q_max = 5.0;
  double a_max = 200.0;
  std::vector<std::pair<double, double>> table;  // (price, demand at M = 1)
  std::vector<Application> applications;

  /// Sum over applications of theta_k * l_k.
  double mean_file_length() const;
  /// Whether (q - s) * D(M, q) is unimodal on [0, q_max] for every shift s.
  bool unimodal() const;
};

void validate(const DemandModel& demand);

/// Expected packets per slot, D(M, q). Non-increasing in q, zero for q >= q_max.
double expected_demand(const DemandModel& demand, double market, double price);

/// Expected number of arriving users per slot, E[N](M, q).
double expected_users(const DemandModel& demand, double market, double price);

struct PricingDecision {
  double price = 0.0;
  bool admit = false;
  double objective = 0.0;  // (q - Q/V) * D(M, q) at the returned price
};

/// Maximizes (q - Q/V) * D(M, q) over q in [0, q_max] and admits demand iff the
/// maximum is strictly positive. Depends on Q and V only through Q / V.
PricingDecision optimal_price(const DemandModel& demand, double market, double backlog,
                              double tradeoff);

}  // namespace cmvno
