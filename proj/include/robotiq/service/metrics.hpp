#ifndef ROBOTIQ_SERVICE_METRICS_HPP_
#define ROBOTIQ_SERVICE_METRICS_HPP_

#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

namespace robotiq::service {

// One executed (or aborted) plan step. Failed steps carry t_robot = 0, so
// t_total is then the compile share alone.
struct TaskRecord {
  int trial = 0;
  std::string task;  // e.g. "go_to(kitchen)"
  double t_llm = 0.0;
  double t_robot = 0.0;
  double t_total = 0.0;
  bool success = false;
  std::string detail;  // failure reason
};

// Applies the accounting convention: failed tasks record t_robot = 0 and
// t_total = t_llm + t_robot.
TaskRecord make_record(std::string task, double t_llm, double t_robot, bool success,
                       std::string detail = {}, int trial = 0);

struct TaskMetrics {
  std::string task;
  int count = 0;
  double mean_t_llm = 0.0;
  double mean_t_robot = 0.0;
  double mean_t_total = 0.0;
  double success_rate = 0.0;
};

struct CdfPoint {
  double t_total = 0.0;
  double cum_fraction = 0.0;
};

struct MetricsReport {
  int trials = 0;
  int records = 0;
  std::vector<TaskMetrics> tasks;  // first-seen order
  std::vector<CdfPoint> cdf;       // over all records, one point per distinct t_total
};

// Means include failed records exactly as recorded. Empty input gives an
// empty report.
MetricsReport metrics_report(const std::vector<TaskRecord>& records, int trials = 0);

nlohmann::json record_to_json(const TaskRecord& r);
nlohmann::json report_to_json(const MetricsReport& r);

// trial,task,t_llm,t_robot,t_total,success with round-trip precision.
void write_records_csv(std::ostream& out, const std::vector<TaskRecord>& records);
// t_total,cum_fraction
void write_cdf_csv(std::ostream& out, const MetricsReport& report);

}  // namespace robotiq::service

#endif  // ROBOTIQ_SERVICE_METRICS_HPP_
