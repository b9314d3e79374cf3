#include "rtrx/planner/planner.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "rtrx/nic/mq_nic.hpp"

namespace rtrx::planner {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

}  // namespace

double wcpd_us(double t_netstack_us, const std::vector<int>& queue_sizes) {
  long total = 0;
  for (int n : queue_sizes) total += n;
  return t_netstack_us * static_cast<double>(total);
}

double t_qf_us(int n_q, double r_max_pps) {
  if (r_max_pps <= 0.0) return 0.0;
  return static_cast<double>(n_q) / r_max_pps * 1e6;
}

double t_abs_max_us(double t_d_us, double t_qf_us, double wcpd_us) {
  return std::max(t_d_us, t_qf_us) - wcpd_us;
}

PackRange t_pack_range(double t_p_us, double t_abs_us) {
  return PackRange{t_p_us, t_abs_us};
}

PlanReport validate(double t_netstack_us, const std::vector<QueueInput>& queues) {
  PlanReport report;
  std::vector<int> sizes;
  for (const QueueInput& q : queues) {
    if (q.n_q < 1) {
      report.violations.push_back("queue " + q.name + ": n_q must be >= 1");
    }
    sizes.push_back(q.n_q);
  }
  report.wcpd_us = wcpd_us(t_netstack_us, sizes);
  report.memory_bytes = nic::nic_memory_bytes(queues.size());

  for (const QueueInput& q : queues) {
    QueueReport row;
    row.name = q.name;
    row.t_qf_us = t_qf_us(q.n_q, q.r_max_pps);

    if (q.t_abs_us > 0.0 && q.t_pack_us > 0.0 && q.t_pack_us > q.t_abs_us) {
      report.violations.push_back("queue " + q.name + ": t_pack (" +
                                  fmt(q.t_pack_us) + "us) exceeds t_abs (" +
                                  fmt(q.t_abs_us) + "us)");
    }

    bool has_bound = q.t_d_us > 0.0 || q.r_max_pps > 0.0;
    if (has_bound) {
      row.t_abs_max_us = t_abs_max_us(q.t_d_us, row.t_qf_us, report.wcpd_us);
      if (row.t_abs_max_us < 0.0) {
        report.violations.push_back(
            "queue " + q.name + ": infeasible, WCPD " + fmt(report.wcpd_us) +
            "us exceeds max(t_d, t_qf) = " +
            fmt(std::max(q.t_d_us, row.t_qf_us)) + "us");
      } else if (q.t_abs_us > row.t_abs_max_us) {
        report.violations.push_back("queue " + q.name + ": t_abs " +
                                    fmt(q.t_abs_us) + "us exceeds bound " +
                                    fmt(row.t_abs_max_us) + "us");
      }
      if (q.t_d_us > 0.0 && row.t_abs_max_us > q.t_d_us) {
        // The published bound uses max(t_d, t_qf); when the queue fills
        // slowly this admits timers beyond the process deadline.
        report.warnings.push_back("queue " + q.name +
                                  ": t_abs bound exceeds the process delay "
                                  "budget t_d (slow-filling queue)");
      }
    } else {
      row.t_abs_max_us = std::numeric_limits<double>::infinity();
    }

    if (q.t_abs_us > 0.0) {
      PackRange range = t_pack_range(q.t_p_us, q.t_abs_us);
      row.pack_lo_us = range.lo_us;
      row.pack_hi_us = range.hi_us;
      if (range.empty()) {
        report.violations.push_back("queue " + q.name +
                                    ": empty packet-timer range [" +
                                    fmt(range.lo_us) + ", " + fmt(range.hi_us) +
                                    "]us");
      } else if (q.t_pack_us > 0.0 &&
                 (q.t_pack_us < range.lo_us || q.t_pack_us > range.hi_us)) {
        report.violations.push_back("queue " + q.name + ": t_pack " +
                                    fmt(q.t_pack_us) + "us outside [" +
                                    fmt(range.lo_us) + ", " +
                                    fmt(range.hi_us) + "]us");
      }
    }
    if (q.t_pack_us > 0.0) {
      report.irq_rate_bound_hz += 1e6 / q.t_pack_us;
    }
    report.queues.push_back(row);
  }
  return report;
}

std::string format_text(const PlanReport& report) {
  std::ostringstream out;
  out << "WCPD: " << fmt(report.wcpd_us) << " us\n";
  out << "NIC register memory: " << report.memory_bytes << " B\n";
  out << "packet-timer interrupt rate bound: " << fmt(report.irq_rate_bound_hz)
      << " /s\n";
  for (const QueueReport& q : report.queues) {
    out << "queue " << q.name << ": t_qf=" << fmt(q.t_qf_us)
        << "us t_abs_max=" << fmt(q.t_abs_max_us) << "us t_pack=["
        << fmt(q.pack_lo_us) << ", " << fmt(q.pack_hi_us) << "]us\n";
  }
  if (report.violations.empty()) {
    out << "no violations\n";
  } else {
    for (const std::string& v : report.violations) out << "violation: " << v << "\n";
  }
  for (const std::string& w : report.warnings) out << "warning: " << w << "\n";
  return out.str();
}

std::string format_csv(const PlanReport& report) {
  std::ostringstream out;
  out << "queue,t_qf_us,t_abs_max_us,t_pack_lo_us,t_pack_hi_us,wcpd_us,"
         "memory_bytes,irq_rate_bound_hz,violations\n";
  for (const QueueReport& q : report.queues) {
    out << q.name << ',' << fmt(q.t_qf_us) << ',' << fmt(q.t_abs_max_us) << ','
        << fmt(q.pack_lo_us) << ',' << fmt(q.pack_hi_us) << ','
        << fmt(report.wcpd_us) << ',' << report.memory_bytes << ','
        << fmt(report.irq_rate_bound_hz) << ',' << report.violations.size()
        << '\n';
  }
  return out.str();
}

}  // namespace rtrx::planner
