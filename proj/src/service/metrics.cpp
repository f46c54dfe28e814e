#include "robotiq/service/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <map>

namespace robotiq::service {

using nlohmann::json;

TaskRecord make_record(std::string task, double t_llm, double t_robot, bool success,
                       std::string detail, int trial) {
  TaskRecord r;
  r.trial = trial;
  r.task = std::move(task);
  r.t_llm = t_llm;
  r.t_robot = success ? t_robot : 0.0;
  r.t_total = r.t_llm + r.t_robot;
  r.success = success;
  r.detail = std::move(detail);
  return r;
}

MetricsReport metrics_report(const std::vector<TaskRecord>& records, int trials) {
  MetricsReport rep;
  rep.trials = trials;
  rep.records = static_cast<int>(records.size());
  std::map<std::string, size_t> index;
  for (const auto& r : records) {
    auto [it, fresh] = index.emplace(r.task, rep.tasks.size());
    if (fresh) rep.tasks.push_back({r.task, 0, 0.0, 0.0, 0.0, 0.0});
    TaskMetrics& m = rep.tasks[it->second];
    ++m.count;
    m.mean_t_llm += r.t_llm;
    m.mean_t_robot += r.t_robot;
    m.mean_t_total += r.t_total;
    m.success_rate += r.success ? 1.0 : 0.0;
  }
  for (auto& m : rep.tasks) {
    const double n = m.count;
    m.mean_t_llm /= n;
    m.mean_t_robot /= n;
    m.mean_t_total /= n;
    m.success_rate /= n;
  }
  std::vector<double> totals;
  for (const auto& r : records) totals.push_back(r.t_total);
  std::sort(totals.begin(), totals.end());
  const double n = static_cast<double>(totals.size());
  for (size_t i = 0; i < totals.size(); ++i) {
    // Ties collapse into one point at the highest fraction.
    if (i + 1 < totals.size() && totals[i + 1] == totals[i]) continue;
    rep.cdf.push_back({totals[i], i + 1 == totals.size() ? 1.0 : static_cast<double>(i + 1) / n});
  }
  return rep;
}

json record_to_json(const TaskRecord& r) {
  json j = {{"trial", r.trial},     {"task", r.task},       {"t_llm", r.t_llm},
            {"t_robot", r.t_robot}, {"t_total", r.t_total}, {"success", r.success}};
  if (!r.detail.empty()) j["detail"] = r.detail;
  return j;
}

json report_to_json(const MetricsReport& r) {
  json tasks = json::array();
  for (const auto& t : r.tasks) {
    tasks.push_back({{"task", t.task},
                     {"count", t.count},
                     {"mean_t_llm", t.mean_t_llm},
                     {"mean_t_robot", t.mean_t_robot},
                     {"mean_t_total", t.mean_t_total},
                     {"success_rate", t.success_rate}});
  }
  json cdf = json::array();
  for (const auto& p : r.cdf) cdf.push_back({p.t_total, p.cum_fraction});
  return {{"trials", r.trials},
          {"records", r.records},
          {"tasks", tasks},
          {"cdf", cdf},
          {"note", "failed tasks count with t_robot = 0"}};
}

void write_records_csv(std::ostream& out, const std::vector<TaskRecord>& records) {
  out << "trial,task,t_llm,t_robot,t_total,success\n";
  char buf[256];
  for (const auto& r : records) {
    std::snprintf(buf, sizeof buf, "%d,%s,%.17g,%.17g,%.17g,%d\n", r.trial, r.task.c_str(), r.t_llm,
                  r.t_robot, r.t_total, r.success ? 1 : 0);
    out << buf;
  }
}

void write_cdf_csv(std::ostream& out, const MetricsReport& report) {
  out << "t_total,cum_fraction\n";
  char buf[96];
  for (const auto& p : report.cdf) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", p.t_total, p.cum_fraction);
    out << buf;
  }
}

}  // namespace robotiq::service
