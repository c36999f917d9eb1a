#include "subrep/tagmine.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

namespace subrep {

int TagVocabulary::intern(const std::string& tag) {
  auto it = index_.find(tag);
  if (it != index_.end()) return it->second;
  int idx = static_cast<int>(tags_.size());
  tags_.push_back(tag);
  index_.emplace(tag, idx);
  return idx;
}

int TagVocabulary::index_of(const std::string& tag) const {
  auto it = index_.find(tag);
  return it == index_.end() ? -1 : it->second;
}

std::int64_t CooccurrenceMatrix::tag_total(int tag) const {
  std::int64_t s = 0;
  for (auto v : counts[tag]) s += v;
  return s;
}

CooccurrenceMatrix build_cooccurrence(const std::vector<ImageRecord>& records,
                                      const ClassIndex& classes) {
  CooccurrenceMatrix c;
  c.classes = classes;
  for (const auto& r : records) {
    int cls = classes.index_of(r.label);
    if (cls < 0)
      throw ValidationError("cooccurrence: record '" + r.id +
                            "' has label outside the class list: " + r.label);
    for (const auto& t : r.tags) {
      int ti = c.vocabulary.intern(t);
      if (ti == static_cast<int>(c.counts.size()))
        c.counts.emplace_back(classes.size(), 0);
      ++c.counts[ti][cls];
    }
  }
  return c;
}

DistinctiveScores distinctive_scores(const CooccurrenceMatrix& c) {
  DistinctiveScores s;
  s.scores.reserve(c.counts.size());
  for (std::size_t t = 0; t < c.counts.size(); ++t) {
    std::int64_t total = c.tag_total(static_cast<int>(t));
    if (total <= 0)
      throw ValidationError("distinctive scores: all-zero row for tag '" +
                            c.vocabulary.tag(static_cast<int>(t)) + "'");
    std::vector<double> row(c.counts[t].size());
    for (std::size_t j = 0; j < row.size(); ++j)
      row[j] = static_cast<double>(c.counts[t][j]) / static_cast<double>(total);
    s.scores.push_back(std::move(row));
  }
  return s;
}

SubclassCatalog select_subclasses(const DistinctiveScores& s,
                                  const CooccurrenceMatrix& c,
                                  const MiningConfig& config) {
  if (s.scores.size() != c.counts.size())
    throw ValidationError("select: scores and counts are not aligned");

  SubclassCatalog catalog;
  for (int j = 0; j < c.classes.size(); ++j) {
    const std::string& cls = c.classes.label(j);
    std::vector<CatalogEntry> cand;
    for (int t = 0; t < c.vocabulary.size(); ++t) {
      double score = s.scores[t][j];
      if (!(score > config.thr_distin)) continue;  // strict, per threshold rule
      const std::string& tag = c.vocabulary.tag(t);
      if (config.exclude_class_tags && tag == cls) continue;
      cand.push_back({cls, tag, c.at(t, j), score});
    }
    std::sort(cand.begin(), cand.end(), [](const CatalogEntry& a,
                                           const CatalogEntry& b) {
      if (a.photo_count != b.photo_count) return a.photo_count > b.photo_count;
      return a.tag < b.tag;
    });
    if (static_cast<int>(cand.size()) > config.top_k)
      cand.resize(config.top_k);
    std::erase_if(cand, [&](const CatalogEntry& e) {
      return e.photo_count < config.min_photos;
    });
    if (cand.empty())
      std::fprintf(stderr, "warning: class '%s' yielded no subclasses\n",
                   cls.c_str());
    for (auto& e : cand) catalog.entries.push_back(std::move(e));
  }
  return catalog;
}

void write_catalog_csv(const std::string& path, const SubclassCatalog& cat) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write catalog: " + path);
  out << "parent_class,tag,photo_count,score\n";
  char buf[64];
  for (const auto& e : cat.entries) {
    std::snprintf(buf, sizeof(buf), "%.17g", e.score);
    out << e.parent << "," << e.tag << "," << e.photo_count << "," << buf
        << "\n";
  }
}

void write_cooccurrence_csv(const std::string& path,
                            const CooccurrenceMatrix& c) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write cooccurrence: " + path);
  out << "tag,class,count\n";
  for (int t = 0; t < c.vocabulary.size(); ++t)
    for (int j = 0; j < c.classes.size(); ++j)
      if (c.at(t, j) > 0)
        out << c.vocabulary.tag(t) << "," << c.classes.label(j) << ","
            << c.at(t, j) << "\n";
}

}  // namespace subrep
