#include "cmvno/demand.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "cmvno/errors.hpp"

namespace cmvno {

namespace {

constexpr double kInvPhi = 0.6180339887498949;  // (sqrt(5) - 1) / 2
constexpr int kGridPoints = 10000;

double table_demand(const std::vector<std::pair<double, double>>& table, double q) {
  if (q <= table.front().first) return table.front().second;
  if (q >= table.back().first) return table.back().second;
  auto hi = std::upper_bound(table.begin(), table.end(), q,
                             [](double x, const auto& p) { return x < p.first; });
  auto lo = hi - 1;
  const double t = (q - lo->first) / (hi->first - lo->first);
  return lo->second + t * (hi->second - lo->second);
}

// Maximizes f on [a, b], assuming unimodality there.
double golden_max(const std::function<double(double)>& f, double a, double b) {
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int it = 0; it < 200 && b - a > 1e-12 * std::max(1.0, std::abs(b)); ++it) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

const char* to_string(DemandFamily family) {
  switch (family) {
    case DemandFamily::kQuadratic:
      return "quadratic_s7";
    case DemandFamily::kLinear:
      return "linear";
    case DemandFamily::kTable:
      return "table";
  }
  return "unknown";
}

DemandFamily demand_family_from_string(const std::string& name) {
  if (name == "quadratic_s7" || name == "quadratic") return DemandFamily::kQuadratic;
  if (name == "linear") return DemandFamily::kLinear;
  if (name == "table") return DemandFamily::kTable;
  throw ConfigError("unknown demand family '" + name + "' (expected quadratic_s7, linear, table)");
}

double DemandModel::mean_file_length() const {
  double mean = 0.0;
  for (const auto& app : applications) {
    double l = 0.0;
    for (std::size_t k = 0; k < app.file_length.values.size(); ++k) {
      l += app.file_length.values[k] * app.file_length.probabilities[k];
    }
    mean += app.share * l;
  }
  return mean;
}

bool DemandModel::unimodal() const { return family != DemandFamily::kTable; }

void validate(const DemandModel& demand) {
  if (!(demand.q_max > 0.0)) throw ConfigError("q_max must be positive");
  if (!(demand.a_max > 0.0)) throw ConfigError("a_max must be positive");
  if (!(demand.scale >= 0.0)) throw ConfigError("demand scale must be non-negative");
  if (demand.applications.empty()) throw ConfigError("at least one application is required");
  double total = 0.0;
  for (const auto& app : demand.applications) {
    if (!(app.share >= 0.0)) throw ConfigError("application share must be non-negative");
    total += app.share;
    validate(app.file_length, "file_length");
    for (double l : app.file_length.values) {
      if (!(l >= 1.0) || l != std::floor(l)) {
        throw ConfigError("file lengths must be positive whole packet counts");
      }
    }
  }
  if (std::abs(total - 1.0) > 1e-9) throw ConfigError("application shares must sum to 1");
  if (demand.family == DemandFamily::kTable) {
    if (demand.table.size() < 2) throw ConfigError("demand table needs at least two points");
    for (std::size_t k = 0; k < demand.table.size(); ++k) {
      if (!(demand.table[k].second >= 0.0)) throw ConfigError("demand table values must be >= 0");
      if (k > 0) {
        if (!(demand.table[k].first > demand.table[k - 1].first)) {
          throw ConfigError("demand table prices must be strictly increasing");
        }
        if (demand.table[k].second > demand.table[k - 1].second) {
          throw ConfigError("demand table must be non-increasing in price");
        }
      }
    }
    if (demand.table.front().first > 0.0) throw ConfigError("demand table must start at price 0");
  }
}

double expected_demand(const DemandModel& demand, double market, double price) {
  if (price >= demand.q_max) return 0.0;
  const double q = std::max(price, 0.0);
  switch (demand.family) {
    case DemandFamily::kQuadratic: {
      const double d = q - demand.q_max;
      return demand.scale / market * d * d;
    }
    case DemandFamily::kLinear:
      return demand.scale / market * (demand.q_max - q);
    case DemandFamily::kTable:
      return demand.scale / market * table_demand(demand.table, q);
  }
  return 0.0;
}

double expected_users(const DemandModel& demand, double market, double price) {
  const double mean = demand.mean_file_length();
  if (!(mean > 0.0)) return 0.0;
  return expected_demand(demand, market, price) / mean;
}

PricingDecision optimal_price(const DemandModel& demand, double market, double backlog,
                              double tradeoff) {
  if (!(tradeoff > 0.0)) throw DomainError("tradeoff V must be positive");
  if (backlog < 0.0) throw DomainError("backlog must be non-negative");
  const double shift = backlog / tradeoff;
  const double q_max = demand.q_max;
  auto f = [&](double q) { return (q - shift) * expected_demand(demand, market, q); };

  // Candidates: both ends plus the interior maximizer; keep the best, smallest q on ties.
  double best_q = 0.0;
  double best = f(0.0);
  auto consider = [&](double q) {
    q = std::clamp(q, 0.0, q_max);
    const double v = f(q);
    if (v > best || (v == best && q < best_q)) {
      best = v;
      best_q = q;
    }
  };

  if (demand.unimodal()) {
    // Revenue is non-positive below the shift, so search only above it.
    const double lo = std::clamp(shift, 0.0, q_max);
    consider(golden_max(f, lo, q_max));
  } else {
    const double step = q_max / kGridPoints;
    int arg = 0;
    double arg_v = f(0.0);
    for (int k = 1; k <= kGridPoints; ++k) {
      const double v = f(k * step);
      if (v > arg_v) {
        arg_v = v;
        arg = k;
      }
    }
    consider(arg * step);
    consider(golden_max(f, std::max(0.0, (arg - 1) * step), std::min(q_max, (arg + 1) * step)));
  }
  consider(q_max);

  PricingDecision out;
  if (best > 0.0) {
    out.price = best_q;
    out.admit = true;
    out.objective = best;
  } else {
    out.price = q_max;
    out.admit = false;
    out.objective = std::max(best, 0.0);
  }
  return out;
}

}  // namespace cmvno
