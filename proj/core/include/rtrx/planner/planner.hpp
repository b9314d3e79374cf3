#pragma once

#include <string>
#include <vector>

namespace rtrx::planner {

// Design-time parametrization of the multiqueue NIC, in microseconds.
// Pure functions throughout.

// Worst-case packet processing delay when every queue delivers a full burst
// at once: t_netstack * sum(n_q).
double wcpd_us(double t_netstack_us, const std::vector<int>& queue_sizes);

// Time to fill a queue at its maximum expected rate: n_q / R_max.
double t_qf_us(int n_q, double r_max_pps);

// Upper bound on the absolute timer: max(t_d, t_qf) - WCPD. A negative
// result means the configuration is infeasible; it is reported, not clamped.
double t_abs_max_us(double t_d_us, double t_qf_us, double wcpd_us);

struct PackRange {
  double lo_us = 0.0;
  double hi_us = 0.0;
  bool empty() const { return lo_us > hi_us; }
};

// Valid packet-timer window: t_P <= t_pack <= t_abs.
PackRange t_pack_range(double t_p_us, double t_abs_us);

struct QueueInput {
  std::string name;
  int n_q = 1;
  double r_max_pps = 0.0;   // <= 0: unknown (t_qf treated as 0)
  double t_d_us = 0.0;      // <= 0: no deadline given (no t_abs bound)
  double t_p_us = 0.0;      // expected arrival period of the mapped flow
  double t_abs_us = 0.0;    // configured values under review (0 = disabled)
  double t_pack_us = 0.0;
  bool moderated() const { return t_abs_us > 0.0 || t_pack_us > 0.0; }
};

struct QueueReport {
  std::string name;
  double t_qf_us = 0.0;
  double t_abs_max_us = 0.0;  // +inf when unconstrained
  double pack_lo_us = 0.0;
  double pack_hi_us = 0.0;
};

struct PlanReport {
  double wcpd_us = 0.0;
  std::vector<QueueReport> queues;
  std::uint64_t memory_bytes = 0;
  // Upper bound on the sustained interrupt rate when every packet timer
  // fires each iteration: sum over moderated queues of 1 / t_pack.
  double irq_rate_bound_hz = 0.0;
  std::vector<std::string> violations;
  std::vector<std::string> warnings;

  bool ok() const { return violations.empty(); }
};

PlanReport validate(double t_netstack_us, const std::vector<QueueInput>& queues);

std::string format_text(const PlanReport& report);
std::string format_csv(const PlanReport& report);

}  // namespace rtrx::planner
