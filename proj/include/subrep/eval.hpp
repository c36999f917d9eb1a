#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "subrep/types.hpp"

namespace subrep {

struct RankedList {
  std::vector<std::string> ids;  // best first
  std::vector<double> scores;    // aligned, non-increasing
};

struct MAPReport {
  std::map<std::string, double> per_class_ap;
  double map = 0.0;
  int train_size = 0;
};

// Non-interpolated AP normalized by |relevant| (relevant ids missing from the
// ranking contribute 0). Empty relevant set -> 0 with a stderr warning.
double average_precision(const RankedList& ranked,
                         const std::set<std::string>& relevant);

MAPReport map_over_classes(const std::map<std::string, RankedList>& results,
                           const std::map<std::string, std::string>& truth);

// Rows: train_size, map, ap per class in the given column order. Reports must
// be sorted by train_size ascending with distinct sizes.
std::string learning_curve_csv(const std::vector<MAPReport>& reports,
                               const std::vector<std::string>& class_order);

}  // namespace subrep
