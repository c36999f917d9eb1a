#include "subrep/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_set>

#include "json.hpp"
#include "subrep/rng.hpp"

namespace subrep {

using nlohmann::json;

std::vector<ImageRecord> load_records(const std::string& path,
                                      const LoadOptions& opts) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open corpus file: " + path);

  std::unordered_set<std::string> allowed;
  if (opts.label_whitelist)
    for (const auto& l : *opts.label_whitelist)
      allowed.insert(normalize_tag(l));

  std::vector<ImageRecord> records;
  std::unordered_set<std::string> seen_ids;
  int dim = opts.expected_dim.value_or(-1);
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::exception& e) {
      throw ValidationError(path + ":" + std::to_string(lineno) +
                            ": malformed JSON: " + e.what());
    }
    auto fail = [&](const std::string& msg) -> ValidationError {
      return ValidationError(path + ":" + std::to_string(lineno) + ": " + msg);
    };
    if (!obj.is_object() || !obj.contains("id") || !obj.contains("label") ||
        !obj.contains("tags") || !obj.contains("features"))
      throw fail("record must have id, label, tags, features");

    ImageRecord rec;
    try {
      rec.id = obj.at("id").get<std::string>();
      rec.label = normalize_tag(obj.at("label").get<std::string>());
      for (const auto& t : obj.at("tags")) {
        std::string norm = normalize_tag(t.get<std::string>());
        if (!norm.empty()) rec.tags.insert(norm);
      }
      rec.features = obj.at("features").get<std::vector<double>>();
    } catch (const json::exception& e) {
      throw fail(std::string("bad field type: ") + e.what());
    }
    if (rec.id.empty()) throw fail("empty id");
    if (rec.label.empty()) throw fail("empty label");
    if (!seen_ids.insert(rec.id).second) throw fail("duplicate id: " + rec.id);
    if (!allowed.empty() && !allowed.count(rec.label))
      throw fail("unknown class label: " + rec.label);
    for (double v : rec.features)
      if (!std::isfinite(v)) throw fail("non-finite feature value");
    if (rec.features.empty()) throw fail("empty feature vector");
    if (dim < 0) dim = static_cast<int>(rec.features.size());
    if (static_cast<int>(rec.features.size()) != dim)
      throw fail("feature dimension " + std::to_string(rec.features.size()) +
                 ", expected " + std::to_string(dim));
    records.push_back(std::move(rec));
  }
  return records;
}

void save_records(const std::string& path,
                  const std::vector<ImageRecord>& records) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write corpus file: " + path);
  for (const auto& r : records) {
    json obj;
    obj["id"] = r.id;
    obj["label"] = r.label;
    obj["tags"] = r.tags;
    obj["features"] = r.features;
    out << obj.dump() << "\n";
  }
}

DatasetSplit split_dataset(const std::vector<ImageRecord>& records,
                           int r1, int r2, int r3, std::uint64_t seed) {
  if (records.empty()) throw ValidationError("split: empty record list");
  if (r1 < 1 || r2 < 1 || r3 < 1)
    throw ValidationError("split: ratios must be >= 1");

  // class order = first occurrence, so the split is a pure function of input
  ClassIndex classes = ClassIndex::from_records(records);
  std::vector<std::vector<std::size_t>> per_class(classes.size());
  for (std::size_t i = 0; i < records.size(); ++i)
    per_class[classes.index_of(records[i].label)].push_back(i);

  DatasetSplit split;
  split.seed = seed;
  const long ratio_sum = static_cast<long>(r1) + r2 + r3;
  for (int c = 0; c < classes.size(); ++c) {
    auto& idx = per_class[c];
    if (idx.size() < 3)
      throw ValidationError("split: class '" + classes.label(c) +
                            "' has only " + std::to_string(idx.size()) +
                            " records, cannot populate all parts");
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(c)));
    shuffle(idx, rng);

    const long n = static_cast<long>(idx.size());
    long sizes[3] = {n * r1 / ratio_sum, n * r2 / ratio_sum, n * r3 / ratio_sum};
    long rem = n - sizes[0] - sizes[1] - sizes[2];
    for (int p = 0; p < 3 && rem > 0; ++p, --rem) ++sizes[p];

    std::size_t pos = 0;
    std::vector<ImageRecord>* parts[3] = {&split.part_subclass, &split.part_top,
                                          &split.part_val};
    for (int p = 0; p < 3; ++p)
      for (long k = 0; k < sizes[p]; ++k) parts[p]->push_back(records[idx[pos++]]);
  }
  return split;
}

BinaryTrainingSet build_binary_set(const std::vector<ImageRecord>& pool,
                                   const SubclassId& subclass, int cap,
                                   double neg_ratio, std::uint64_t seed) {
  if (cap < 1) throw ValidationError("binary set: cap must be >= 1");
  if (neg_ratio <= 0) throw ValidationError("binary set: neg_ratio must be > 0");

  std::vector<std::size_t> pos_idx;
  std::map<std::string, std::vector<std::size_t>> neg_by_class;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const auto& r = pool[i];
    if (r.has_tag(subclass.tag)) {
      if (r.label == subclass.parent) pos_idx.push_back(i);
    } else {
      neg_by_class[r.label].push_back(i);
    }
  }
  if (pos_idx.empty())
    throw ValidationError("binary set: no positives for subclass '" +
                          subclass.tag + "' under class '" + subclass.parent +
                          "'");

  BinaryTrainingSet set;
  set.subclass = subclass;

  Rng rng(derive_seed(seed, 0x5cULL));
  if (static_cast<int>(pos_idx.size()) > cap) {
    auto keep = sample_indices(pos_idx.size(), static_cast<std::size_t>(cap), rng);
    std::sort(keep.begin(), keep.end());
    std::vector<std::size_t> capped;
    capped.reserve(keep.size());
    for (auto k : keep) capped.push_back(pos_idx[k]);
    pos_idx = std::move(capped);
  }
  for (auto i : pos_idx) set.positives.push_back(pool[i]);

  std::size_t available = 0;
  for (auto& [label, v] : neg_by_class) {
    Rng class_rng(derive_seed(seed, std::hash<std::string>{}(label)));
    shuffle(v, class_rng);
    available += v.size();
  }
  std::size_t want = static_cast<std::size_t>(
      std::llround(neg_ratio * static_cast<double>(set.positives.size())));
  want = std::min(want, available);

  // round-robin across classes keeps negatives evenly stratified
  std::vector<std::size_t> chosen;
  std::size_t round = 0;
  while (chosen.size() < want) {
    bool any = false;
    for (auto& [label, v] : neg_by_class) {
      if (round < v.size() && chosen.size() < want) {
        chosen.push_back(v[round]);
        any = true;
      }
    }
    if (!any) break;
    ++round;
  }
  std::sort(chosen.begin(), chosen.end());  // stable output order
  for (auto i : chosen) set.negatives.push_back(pool[i]);
  return set;
}

}  // namespace subrep
