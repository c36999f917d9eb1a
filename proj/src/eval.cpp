#include "subrep/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace subrep {

double average_precision(const RankedList& ranked,
                         const std::set<std::string>& relevant) {
  if (relevant.empty()) {
    std::fprintf(stderr, "warning: AP over empty relevant set, defined as 0\n");
    return 0.0;
  }
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t k = 0; k < ranked.ids.size(); ++k) {
    if (relevant.count(ranked.ids[k])) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(k + 1);
    }
  }
  return sum / static_cast<double>(relevant.size());
}

MAPReport map_over_classes(const std::map<std::string, RankedList>& results,
                           const std::map<std::string, std::string>& truth) {
  MAPReport report;
  for (const auto& [cls, ranked] : results) {
    for (const auto& id : ranked.ids)
      if (!truth.count(id))
        throw ValidationError("evaluate: test id '" + id + "' missing from truth");
    std::set<std::string> relevant;
    for (const auto& [id, label] : truth)
      if (label == cls) relevant.insert(id);
    report.per_class_ap[cls] = average_precision(ranked, relevant);
  }
  double sum = 0.0;
  for (const auto& [cls, ap] : report.per_class_ap) sum += ap;
  report.map = report.per_class_ap.empty()
                   ? 0.0
                   : sum / static_cast<double>(report.per_class_ap.size());
  return report;
}

std::string learning_curve_csv(const std::vector<MAPReport>& reports,
                               const std::vector<std::string>& class_order) {
  for (std::size_t i = 1; i < reports.size(); ++i) {
    if (reports[i].train_size == reports[i - 1].train_size)
      throw ValidationError("learning curve: duplicate train size " +
                            std::to_string(reports[i].train_size));
    if (reports[i].train_size < reports[i - 1].train_size)
      throw ValidationError("learning curve: reports must be sorted by size");
  }
  std::ostringstream out;
  out << "train_size,map";
  for (const auto& cls : class_order) out << ",ap_" << cls;
  out << "\n";
  char buf[64];
  for (const auto& rep : reports) {
    out << rep.train_size;
    std::snprintf(buf, sizeof(buf), "%.17g", rep.map);
    out << "," << buf;
    for (const auto& cls : class_order) {
      auto it = rep.per_class_ap.find(cls);
      double ap = it == rep.per_class_ap.end() ? 0.0 : it->second;
      std::snprintf(buf, sizeof(buf), "%.17g", ap);
      out << "," << buf;
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace subrep
