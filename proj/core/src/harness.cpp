#include "cmvno/harness.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <mutex>
#include <ostream>
#include <thread>

#include <boost/math/distributions/students_t.hpp>

#include "cmvno/errors.hpp"

namespace cmvno {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string v_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

void set_idle_probability(PolicyConfig& policy, double p) {
  for (auto& ch : policy.environment.sensing) {
    if (auto* iid = std::get_if<IidOccupancy>(&ch.occupancy)) {
      iid->p_idle = p;
    } else {
      auto& m = std::get<MarkovOccupancy>(ch.occupancy);
      m.p_busy_to_idle = p;
      m.p_idle_to_idle = p;
    }
  }
}

// One cell of the experiment grid.
struct Point {
  PolicyConfig policy;
  std::string strategy;
  std::optional<double> p_idle;
};

std::vector<Point> expand(const ExperimentConfig& config) {
  std::vector<Point> points;
  auto add_tradeoffs = [&](PolicyConfig base, const std::string& strategy, std::optional<double> p) {
    for (double v : config.tradeoffs) {
      base.tradeoff = v;
      points.push_back({base, strategy, p});
    }
  };
  if (!config.sweep) {
    add_tradeoffs(config.policy, "", std::nullopt);
    return points;
  }
  for (double p : config.sweep->p_idle) {
    for (const auto& s : config.sweep->strategies) {
      PolicyConfig policy = config.policy;
      set_idle_probability(policy, p);
      policy.fixed_tech = s.tech;
      add_tradeoffs(policy, s.name, p);
    }
  }
  return points;
}

std::string slot_file_name(const ExperimentConfig& config, const Point& point, std::uint64_t rep) {
  std::string name = "slots_" + config.name + "_V" + v_label(point.policy.tradeoff);
  if (!point.strategy.empty()) name += "_" + point.strategy;
  if (point.p_idle) name += "_p" + v_label(*point.p_idle);
  return name + "_rep" + std::to_string(rep) + ".csv";
}

void write_slot_row(std::ostream& out, const StepResult& r) {
  const auto& m = r.metrics;
  const auto& d = r.decision;
  int collisions = 0;
  for (int x : m.collisions) collisions += x;
  const auto& p0 = d.pricing[0];
  out << m.slot << ',' << num(m.markets[0]) << ',' << num(p0.price) << ',' << (p0.admit ? 1 : 0)
      << ',' << num(m.queue_arrivals[0]) << ',' << num(m.queue_rates[0]) << ','
      << num(m.backlogs[0]) << ',' << num(m.profit) << ',' << d.sensing_set.size() << ','
      << d.leasing_set.size() << ',' << num(m.tech_cost) << ',' << collisions;
  for (std::size_t j = 1; j < m.backlogs.size(); ++j) {
    out << ',' << num(m.markets[j]) << ',' << num(d.pricing[j].price) << ','
        << (d.pricing[j].admit ? 1 : 0) << ',' << num(m.queue_arrivals[j]) << ','
        << num(m.queue_rates[j]) << ',' << num(m.backlogs[j]);
  }
  out << '\n';
}

void ensure_writable(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  const auto probe = dir / ".cmvno-write-probe";
  {
    std::ofstream f(probe);
    if (!f) throw IoError("output directory is not writable: " + dir.string());
  }
  std::filesystem::remove(probe, ec);
}

}  // namespace

void validate(const ExperimentConfig& config) {
  if (config.horizon < 1) throw ConfigError("horizon must be at least 1");
  if (config.replications < 1) throw ConfigError("replications must be at least 1");
  if (config.tradeoffs.empty()) throw ConfigError("at least one V value is required");
  for (double v : config.tradeoffs) {
    if (!(v > 0.0)) throw ConfigError("V values must be positive");
  }
  if (!(config.burn_in >= 0.0 && config.burn_in < 1.0)) throw ConfigError("burn_in must be in [0, 1)");
  if (config.sweep) {
    if (config.sweep->p_idle.empty() || config.sweep->strategies.empty()) {
      throw ConfigError("a sweep needs idle probabilities and strategies");
    }
    for (double p : config.sweep->p_idle) {
      if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("sweep idle probabilities must be in [0, 1]");
    }
  }
  for (const auto& point : expand(config)) validate(point.policy);
}

Estimate estimate(const std::vector<double>& samples) {
  Estimate e;
  const auto n = samples.size();
  if (n == 0) return {kNaN, kNaN};
  for (double x : samples) e.mean += x;
  e.mean /= static_cast<double>(n);
  if (n == 1) {
    e.half_width = kNaN;
    return e;
  }
  double ss = 0.0;
  for (double x : samples) ss += (x - e.mean) * (x - e.mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  const boost::math::students_t dist(static_cast<double>(n - 1));
  e.half_width = boost::math::quantile(boost::math::complement(dist, 0.025)) * sd /
                 std::sqrt(static_cast<double>(n));
  return e;
}

ReplicationSummary run_replication(const PolicyConfig& policy, std::uint64_t horizon,
                                   double burn_in, std::uint64_t seed, std::uint64_t replication,
                                   std::ostream* sink) {
  Simulation sim(policy, seed, replication);
  const std::size_t queues = policy.environment.queues;
  const std::size_t ns = policy.environment.sensing.size();
  const auto burn = static_cast<std::uint64_t>(std::floor(burn_in * static_cast<double>(horizon)));

  ReplicationSummary s;
  s.collision_rates.assign(ns, 0.0);
  s.queue_rates.assign(queues, 0.0);
  s.queue_revenues.assign(queues, 0.0);
  s.queue_backlogs.assign(queues, 0.0);
  s.tech_share.assign(policy.menu.size(), 0.0);
  std::uint64_t sensing_slots = 0;

  if (sink) *sink << per_slot_header(queues);
  for (std::uint64_t t = 0; t < horizon; ++t) {
    const StepResult r = sim.step();
    const auto& m = r.metrics;
    if (m.queue_bound_violated || m.collision_bound_violated) ++s.bound_violations;
    for (double q : m.backlogs) s.max_queue = std::max(s.max_queue, q);
    if (sink) write_slot_row(*sink, r);
    if (t < burn) continue;
    s.avg_profit += m.profit;
    for (std::size_t j = 0; j < queues; ++j) {
      s.avg_queue += m.backlogs[j];
      s.queue_backlogs[j] += m.backlogs[j];
      s.queue_rates[j] += m.queue_rates[j];
      s.queue_revenues[j] += m.queue_revenues[j];
    }
    for (std::size_t i = 0; i < ns; ++i) s.collision_rates[i] += m.collisions[i];
    if (!r.decision.sensing_set.empty()) {
      ++sensing_slots;
      s.tech_share[r.decision.tech] += 1.0;
    }
  }
  const double n = static_cast<double>(horizon - burn);
  s.avg_profit /= n;
  s.avg_queue /= n;
  for (auto* v : {&s.collision_rates, &s.queue_rates, &s.queue_revenues, &s.queue_backlogs}) {
    for (double& x : *v) x /= n;
  }
  s.sensing_share = static_cast<double>(sensing_slots) / n;
  if (sensing_slots > 0) {
    for (double& x : s.tech_share) x /= static_cast<double>(sensing_slots);
  }
  return s;
}

std::string per_slot_header(std::size_t queues) {
  std::string h = "t,M,q,O,A,r,Q,profit,n_sense,n_lease,tech_cost,collisions_total";
  for (std::size_t j = 2; j <= queues; ++j) {
    const auto s = std::to_string(j);
    h += ",M_" + s + ",q_" + s + ",O_" + s + ",A_" + s + ",r_" + s + ",Q_" + s;
  }
  return h + "\n";
}

AggregateReport run_experiment(const ExperimentConfig& config) {
  validate(config);
  if (config.output_dir) ensure_writable(*config.output_dir);

  const std::vector<Point> points = expand(config);
  const std::uint64_t reps = config.replications;
  const std::size_t jobs = points.size() * reps;
  std::vector<ReplicationSummary> results(jobs);

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= jobs) return;
      const Point& point = points[k / reps];
      const std::uint64_t rep = k % reps;
      try {
        std::ofstream file;
        std::ostream* sink = nullptr;
        if (config.per_slot && config.output_dir) {
          file.open(*config.output_dir / slot_file_name(config, point, rep));
          if (!file) throw IoError("cannot write per-slot CSV");
          sink = &file;
        }
        results[k] = run_replication(point.policy, config.horizon, config.burn_in, config.seed, rep, sink);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = jobs;
      }
    }
  };
  unsigned threads = config.threads ? config.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, jobs));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < threads; ++k) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  AggregateReport report;
  for (std::size_t p = 0; p < points.size(); ++p) {
    const Point& point = points[p];
    const auto bounds = theorem_bounds(point.policy);
    AggregateRow row;
    row.preset = config.name;
    row.strategy = point.strategy;
    row.p_idle = point.p_idle;
    row.tradeoff = point.policy.tradeoff;
    row.rep_count = reps;
    row.queue_bound = bounds.queue_bound;
    row.collision_backlog_bound = bounds.collision_backlog_bound;
    row.replications.assign(results.begin() + static_cast<std::ptrdiff_t>(p * reps),
                            results.begin() + static_cast<std::ptrdiff_t>((p + 1) * reps));
    const std::size_t ns = point.policy.environment.sensing.size();
    const std::size_t queues = point.policy.environment.queues;
    for (const auto& ch : point.policy.environment.sensing) row.tolerances.push_back(ch.collision_tolerance);
    row.collision_rates.assign(ns, 0.0);

    std::vector<double> profit, queue;
    std::vector<std::vector<double>> rate(queues), revenue(queues), backlog(queues);
    for (const auto& r : row.replications) {
      profit.push_back(r.avg_profit);
      queue.push_back(r.avg_queue);
      row.max_queue_observed = std::max(row.max_queue_observed, r.max_queue);
      row.bound_violations += r.bound_violations;
      row.sensing_share += r.sensing_share / static_cast<double>(reps);
      for (std::size_t i = 0; i < ns; ++i) row.collision_rates[i] += r.collision_rates[i] / static_cast<double>(reps);
      for (std::size_t j = 0; j < queues; ++j) {
        rate[j].push_back(r.queue_rates[j]);
        revenue[j].push_back(r.queue_revenues[j]);
        backlog[j].push_back(r.queue_backlogs[j]);
      }
    }
    row.profit = estimate(profit);
    row.queue = estimate(queue);
    for (std::size_t j = 0; j < queues; ++j) {
      row.queue_rates.push_back(estimate(rate[j]));
      row.queue_revenues.push_back(estimate(revenue[j]));
      row.queue_backlogs.push_back(estimate(backlog[j]));
    }
    report.rows.push_back(std::move(row));
  }

  if (config.output_dir) {
    std::ofstream agg(*config.output_dir / "aggregate.csv");
    if (!agg) throw IoError("cannot write aggregate CSV");
    write_aggregate_csv(report, agg);
    if (config.sweep) {
      std::ofstream sw(*config.output_dir / "sweep.csv");
      if (!sw) throw IoError("cannot write sweep CSV");
      write_sweep_csv(report, sw);
    }
  }
  return report;
}

void write_aggregate_csv(const AggregateReport& report, std::ostream& out) {
  out << "# schema=aggregate/1\n";
  if (report.rows.empty()) return;
  const auto& first = report.rows.front();
  out << "preset,V,rep_count,avg_profit,profit_hw,avg_queue,queue_hw,max_queue_observed,q_bound";
  for (std::size_t i = 1; i <= first.collision_rates.size(); ++i) out << ",coll_rate_" << i;
  for (std::size_t i = 1; i <= first.tolerances.size(); ++i) out << ",eta_" << i;
  out << ",bound_violations";
  for (std::size_t j = 1; j <= first.queue_rates.size(); ++j) {
    out << ",rate_q" << j << ",rate_hw_q" << j << ",revenue_q" << j << ",revenue_hw_q" << j;
  }
  out << '\n';
  for (const auto& r : report.rows) {
    out << r.preset << ',' << num(r.tradeoff) << ',' << r.rep_count << ',' << num(r.profit.mean)
        << ',' << num(r.profit.half_width) << ',' << num(r.queue.mean) << ','
        << num(r.queue.half_width) << ',' << num(r.max_queue_observed) << ',' << num(r.queue_bound);
    for (double c : r.collision_rates) out << ',' << num(c);
    for (double e : r.tolerances) out << ',' << num(e);
    out << ',' << r.bound_violations;
    for (std::size_t j = 0; j < r.queue_rates.size(); ++j) {
      out << ',' << num(r.queue_rates[j].mean) << ',' << num(r.queue_rates[j].half_width) << ','
          << num(r.queue_revenues[j].mean) << ',' << num(r.queue_revenues[j].half_width);
    }
    out << '\n';
  }
}

void write_sweep_csv(const AggregateReport& report, std::ostream& out) {
  out << "# schema=sweep/1\n";
  out << "preset,strategy,p0,V,rep_count,avg_profit,profit_hw,avg_queue,queue_hw,sensing_share,"
         "bound_violations\n";
  for (const auto& r : report.rows) {
    out << r.preset << ',' << r.strategy << ',' << num(r.p_idle.value_or(kNaN)) << ','
        << num(r.tradeoff) << ',' << r.rep_count << ',' << num(r.profit.mean) << ','
        << num(r.profit.half_width) << ',' << num(r.queue.mean) << ',' << num(r.queue.half_width)
        << ',' << num(r.sensing_share) << ',' << r.bound_violations << '\n';
  }
}

}  // namespace cmvno
