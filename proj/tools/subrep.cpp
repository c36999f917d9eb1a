// subrep: subclass-representation image classification pipeline.
//
// Commands: mine, run, compare, split, evaluate. All outputs land under the
// output directory with fixed relative names (see --help per command).

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "subrep/dataset.hpp"
#include "subrep/eval.hpp"
#include "subrep/pipeline.hpp"
#include "subrep/tagmine.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace subrep;

namespace {

struct RunConfig {
  std::string corpus;
  std::string test_corpus;
  std::string out = "out";
  std::vector<std::string> methods = {"SVM_SubClassProb", "SVM_VisFeat",
                                      "SVM_ClassProb"};
  PipelineConfig pipeline;
};

json pipeline_to_json(const PipelineConfig& p) {
  json obj;
  obj["seed"] = p.seed;
  obj["jobs"] = p.jobs;
  obj["split_ratios"] = {p.split_r1, p.split_r2, p.split_r3};
  obj["mining"] = {{"thr_distin", p.mining.thr_distin},
                   {"top_k", p.mining.top_k},
                   {"min_photos", p.mining.min_photos},
                   {"exclude_class_tags", p.mining.exclude_class_tags}};
  obj["train"] = {{"c", p.train.c},
                  {"tolerance", p.train.tolerance},
                  {"max_epochs", p.train.max_epochs}};
  obj["calibration_folds"] = p.calibration_folds;
  obj["subclass_cap"] = p.subclass_cap;
  obj["neg_ratio"] = p.neg_ratio;
  obj["representation_mode"] =
      p.representation_mode == RepresentationMode::Probability ? "probability"
                                                               : "margin";
  obj["per_class_train_sizes"] = p.per_class_train_sizes;
  return obj;
}

json config_to_json(const RunConfig& c) {
  json obj = pipeline_to_json(c.pipeline);
  obj["corpus"] = c.corpus;
  obj["test_corpus"] = c.test_corpus;
  obj["out"] = c.out;
  obj["methods"] = c.methods;
  return obj;
}

RunConfig config_from_json(const json& obj) {
  RunConfig c;
  try {
    if (obj.contains("corpus")) c.corpus = obj["corpus"].get<std::string>();
    if (obj.contains("test_corpus"))
      c.test_corpus = obj["test_corpus"].get<std::string>();
    if (obj.contains("out")) c.out = obj["out"].get<std::string>();
    if (obj.contains("methods"))
      c.methods = obj["methods"].get<std::vector<std::string>>();
    PipelineConfig& p = c.pipeline;
    if (obj.contains("seed")) p.seed = obj["seed"].get<std::uint64_t>();
    if (obj.contains("jobs")) p.jobs = obj["jobs"].get<int>();
    if (obj.contains("split_ratios")) {
      auto r = obj["split_ratios"].get<std::vector<int>>();
      if (r.size() != 3)
        throw ValidationError("config: split_ratios must have 3 entries");
      p.split_r1 = r[0]; p.split_r2 = r[1]; p.split_r3 = r[2];
    }
    if (obj.contains("mining")) {
      const auto& m = obj["mining"];
      if (m.contains("thr_distin")) p.mining.thr_distin = m["thr_distin"];
      if (m.contains("top_k")) p.mining.top_k = m["top_k"];
      if (m.contains("min_photos")) p.mining.min_photos = m["min_photos"];
      if (m.contains("exclude_class_tags"))
        p.mining.exclude_class_tags = m["exclude_class_tags"];
    }
    if (obj.contains("train")) {
      const auto& t = obj["train"];
      if (t.contains("c")) p.train.c = t["c"];
      if (t.contains("tolerance")) p.train.tolerance = t["tolerance"];
      if (t.contains("max_epochs")) p.train.max_epochs = t["max_epochs"];
    }
    if (obj.contains("calibration_folds"))
      p.calibration_folds = obj["calibration_folds"].get<int>();
    if (obj.contains("subclass_cap"))
      p.subclass_cap = obj["subclass_cap"].get<int>();
    if (obj.contains("neg_ratio")) p.neg_ratio = obj["neg_ratio"].get<double>();
    if (obj.contains("representation_mode")) {
      std::string mode = obj["representation_mode"].get<std::string>();
      if (mode == "probability")
        p.representation_mode = RepresentationMode::Probability;
      else if (mode == "margin")
        p.representation_mode = RepresentationMode::Margin;
      else
        throw ValidationError("config: unknown representation_mode: " + mode);
    }
    if (obj.contains("per_class_train_sizes"))
      p.per_class_train_sizes =
          obj["per_class_train_sizes"].get<std::vector<int>>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config: bad field: ") + e.what());
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  json obj;
  try {
    in >> obj;
  } catch (const json::exception& e) {
    throw ValidationError(path + ": malformed config JSON: " + e.what());
  }
  return config_from_json(obj);
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string catalog_csv_text(const SubclassCatalog& cat) {
  std::ostringstream out;
  out << "parent_class,tag,photo_count,score\n";
  for (const auto& e : cat.entries)
    out << e.parent << "," << e.tag << "," << e.photo_count << ","
        << fmt_double(e.score) << "\n";
  return out.str();
}

std::string ranking_csv_text(const RankedList& list) {
  std::ostringstream out;
  out << "rank,id,probability\n";
  for (std::size_t k = 0; k < list.ids.size(); ++k)
    out << (k + 1) << "," << list.ids[k] << "," << fmt_double(list.scores[k])
        << "\n";
  return out.str();
}

int cmd_mine(const std::string& corpus, const RunConfig& config) {
  auto records = load_records(corpus);
  if (records.empty()) throw ValidationError("mine: empty corpus");
  ClassIndex classes = ClassIndex::from_records(records);
  CooccurrenceMatrix c = build_cooccurrence(records, classes);
  DistinctiveScores s = distinctive_scores(c);
  SubclassCatalog catalog = select_subclasses(s, c, config.pipeline.mining);

  fs::create_directories(config.out);
  write_text(fs::path(config.out) / "catalog.csv", catalog_csv_text(catalog));
  write_cooccurrence_csv((fs::path(config.out) / "cooccurrence.csv").string(),
                         c);

  std::map<std::string, int> per_class;
  for (const auto& e : catalog.entries) ++per_class[e.parent];
  for (int j = 0; j < classes.size(); ++j)
    std::printf("%s: %d subclasses\n", classes.label(j).c_str(),
                per_class[classes.label(j)]);
  std::printf("total: %d subclasses\n", catalog.size());
  return 0;
}

int cmd_split(const std::string& corpus, const RunConfig& config) {
  auto records = load_records(corpus);
  DatasetSplit split =
      split_dataset(records, config.pipeline.split_r1, config.pipeline.split_r2,
                    config.pipeline.split_r3, config.pipeline.seed);
  fs::create_directories(config.out);
  save_records((fs::path(config.out) / "part_subclass.jsonl").string(),
               split.part_subclass);
  save_records((fs::path(config.out) / "part_top.jsonl").string(),
               split.part_top);
  save_records((fs::path(config.out) / "part_val.jsonl").string(),
               split.part_val);
  std::printf("split: %zu / %zu / %zu records\n", split.part_subclass.size(),
              split.part_top.size(), split.part_val.size());
  return 0;
}

int cmd_run(const RunConfig& config, const std::string& config_path) {
  if (config.corpus.empty() || config.test_corpus.empty())
    throw ValidationError("run: config must set corpus and test_corpus");
  if (config.methods.empty())
    throw ValidationError("run: config must list at least one method");

  auto records = load_records(config.corpus);
  auto test = load_records(config.test_corpus);
  DatasetSplit split =
      split_dataset(records, config.pipeline.split_r1, config.pipeline.split_r2,
                    config.pipeline.split_r3, config.pipeline.seed);

  std::map<std::string, std::string> truth;
  for (const auto& r : test) truth[r.id] = r.label;

  fs::path out(config.out);
  fs::create_directories(out / "rankings");
  fs::create_directories(out / "reports");

  json manifest;
  manifest["config"] = config_to_json(config);
  if (!config_path.empty()) manifest["config_path"] = config_path;
  manifest["seed"] = config.pipeline.seed;
  json outputs = json::array();
  json warnings = json::array();

  std::vector<std::string> class_order;
  for (const std::string& mname : config.methods) {
    MethodKind method = method_from_name(mname);
    auto results = run_method(method, split, test, config.pipeline);

    std::vector<MAPReport> reports;
    for (const auto& result : results) {
      if (class_order.empty()) class_order = result.classes;
      std::string run_tag = mname + "_s" + std::to_string(result.train_size);
      fs::path rank_dir = out / "rankings" / run_tag;
      fs::create_directories(rank_dir);
      for (const auto& [cls, list] : result.rankings) {
        fs::path p = rank_dir / (cls + ".csv");
        write_text(p, ranking_csv_text(list));
        outputs.push_back(fs::relative(p, out).string());
      }
      if (result.clamped)
        warnings.push_back("clamped per-class size for " + run_tag);

      MAPReport report = map_over_classes(result.rankings, truth);
      report.train_size = result.train_size;
      reports.push_back(report);

      json rj;
      rj["method"] = mname;
      rj["train_size"] = report.train_size;
      rj["map"] = report.map;
      rj["per_class_ap"] = report.per_class_ap;
      fs::path rp = out / "reports" / ("report_" + run_tag + ".json");
      write_text(rp, rj.dump(2) + "\n");
      outputs.push_back(fs::relative(rp, out).string());

      if (method == MethodKind::SubClassProb) {
        std::string csv = catalog_csv_text(result.catalog);
        fs::path cp = out / ("catalog_s" + std::to_string(result.train_size) +
                             ".csv");
        write_text(cp, csv);
        outputs.push_back(fs::relative(cp, out).string());
        manifest["catalog_hash_s" + std::to_string(result.train_size)] =
            fnv1a(csv);
      }
    }
    std::sort(reports.begin(), reports.end(),
              [](const MAPReport& a, const MAPReport& b) {
                return a.train_size < b.train_size;
              });
    fs::path curve = out / ("curve_" + mname + ".csv");
    write_text(curve, learning_curve_csv(reports, class_order));
    outputs.push_back(fs::relative(curve, out).string());
    for (const auto& rep : reports)
      std::printf("%s size %d: MAP %.4f\n", mname.c_str(), rep.train_size,
                  rep.map);
  }

  manifest["outputs"] = outputs;
  manifest["warnings"] = warnings;
  write_text(out / "manifest.json", manifest.dump(2) + "\n");
  return 0;
}

struct Curve {
  std::vector<int> sizes;
  std::vector<double> maps;
};

Curve read_curve(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open curve file: " + path.string());
  Curve curve;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    std::getline(row, cell, ',');
    curve.sizes.push_back(std::stoi(cell));
    std::getline(row, cell, ',');
    curve.maps.push_back(std::stod(cell));
  }
  return curve;
}

int cmd_compare(const std::string& dir, const RunConfig& config) {
  fs::path d(dir);
  std::map<std::string, Curve> curves;
  for (const auto& name :
       {"SVM_SubClassProb", "SVM_VisFeat", "SVM_ClassProb"}) {
    fs::path p = d / ("curve_" + std::string(name) + ".csv");
    if (fs::exists(p)) curves[name] = read_curve(p);
  }
  if (!curves.count("SVM_SubClassProb") || curves.size() < 2)
    throw ValidationError(
        "compare: need curve_SVM_SubClassProb.csv plus at least one baseline "
        "curve in " + dir);

  const Curve& sub = curves["SVM_SubClassProb"];
  for (const auto& [name, curve] : curves) {
    if (curve.sizes != sub.sizes) {
      std::ostringstream msg;
      msg << "compare: size grid of " << name << " (";
      for (auto s : curve.sizes) msg << s << " ";
      msg << ") does not match SVM_SubClassProb (";
      for (auto s : sub.sizes) msg << s << " ";
      msg << ")";
      throw ValidationError(msg.str());
    }
  }

  std::ostringstream csv, txt;
  csv << "baseline,train_size,map_subclass,map_baseline,delta,relative_gain\n";
  txt << "baseline          size      MAP_sub     MAP_base     delta     "
         "rel_gain\n";
  for (const auto& [name, curve] : curves) {
    if (name == "SVM_SubClassProb") continue;
    double sum_delta = 0.0, sum_rel = 0.0;
    for (std::size_t i = 0; i < sub.sizes.size(); ++i) {
      double delta = sub.maps[i] - curve.maps[i];
      double rel = curve.maps[i] > 0 ? delta / curve.maps[i] : 0.0;
      sum_delta += delta;
      sum_rel += rel;
      csv << name << "," << sub.sizes[i] << "," << fmt_double(sub.maps[i])
          << "," << fmt_double(curve.maps[i]) << "," << fmt_double(delta)
          << "," << fmt_double(rel) << "\n";
      char line[160];
      std::snprintf(line, sizeof(line),
                    "%-16s %6d   %9.4f   %9.4f   %+8.4f   %+8.2f%%\n",
                    name.c_str(), sub.sizes[i], sub.maps[i], curve.maps[i],
                    delta, 100.0 * rel);
      txt << line;
    }
    double n = static_cast<double>(sub.sizes.size());
    csv << name << ",average," << "," << "," << fmt_double(sum_delta / n)
        << "," << fmt_double(sum_rel / n) << "\n";
    char line[160];
    std::snprintf(line, sizeof(line),
                  "%-16s    avg                            %+8.4f   %+8.2f%%\n",
                  name.c_str(), sum_delta / n, 100.0 * sum_rel / n);
    txt << line;
  }
  fs::create_directories(config.out);
  write_text(fs::path(config.out) / "compare.csv", csv.str());
  write_text(fs::path(config.out) / "compare.txt", txt.str());
  std::fputs(txt.str().c_str(), stdout);
  return 0;
}

int cmd_evaluate(const std::string& rankings_dir, const std::string& truth_path,
                 const RunConfig& config) {
  auto test = load_records(truth_path);
  std::map<std::string, std::string> truth;
  for (const auto& r : test) truth[r.id] = r.label;

  std::map<std::string, RankedList> rankings;
  for (const auto& entry : fs::directory_iterator(rankings_dir)) {
    if (entry.path().extension() != ".csv") continue;
    std::string cls = entry.path().stem().string();
    std::ifstream in(entry.path());
    if (!in) throw IoError("cannot open ranking: " + entry.path().string());
    RankedList list;
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::istringstream row(line);
      std::string rank, id, prob;
      std::getline(row, rank, ',');
      std::getline(row, id, ',');
      std::getline(row, prob, ',');
      list.ids.push_back(id);
      list.scores.push_back(std::stod(prob));
    }
    rankings[cls] = std::move(list);
  }
  if (rankings.empty())
    throw ValidationError("evaluate: no ranking CSVs in " + rankings_dir);

  MAPReport report = map_over_classes(rankings, truth);
  std::ostringstream csv;
  csv << "class,ap\n";
  for (const auto& [cls, ap] : report.per_class_ap)
    csv << cls << "," << fmt_double(ap) << "\n";
  csv << "MAP," << fmt_double(report.map) << "\n";
  fs::create_directories(config.out);
  write_text(fs::path(config.out) / "map_report.csv", csv.str());
  std::printf("MAP: %.6f over %zu classes\n", report.map,
              report.per_class_ap.size());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"subrep: subclass-representation image ranking pipeline"};
  app.require_subcommand(1);

  std::string config_path, out_override, corpus_arg;
  std::uint64_t seed_override = 0;
  bool seed_set = false;
  int jobs_override = 0;
  app.add_option("--config", config_path, "config JSON file");
  app.add_option("--out", out_override, "output directory (overrides config)");
  app.add_option("--seed", seed_override, "seed (overrides config)")
      ->each([&](const std::string&) { seed_set = true; });
  app.add_option("--jobs", jobs_override, "worker threads (overrides config)");

  auto* mine = app.add_subcommand(
      "mine", "mine the subclass catalog; writes catalog.csv, cooccurrence.csv");
  std::string mine_corpus;
  mine->add_option("corpus", mine_corpus, "training corpus JSONL")->required();

  auto* run = app.add_subcommand(
      "run",
      "full experiment; writes rankings/<method>_s<size>/<class>.csv, "
      "reports/report_*.json, curve_<method>.csv, manifest.json");

  auto* split_cmd = app.add_subcommand(
      "split", "three-way split; writes part_{subclass,top,val}.jsonl");
  std::string split_corpus;
  split_cmd->add_option("corpus", split_corpus, "corpus JSONL")->required();

  auto* compare = app.add_subcommand(
      "compare", "MAP deltas vs baselines; writes compare.csv, compare.txt");
  std::string compare_dir;
  compare->add_option("reports", compare_dir,
                      "directory holding curve_<method>.csv files")
      ->required();

  auto* evaluate = app.add_subcommand(
      "evaluate", "score standalone rankings; writes map_report.csv");
  std::string eval_rankings, eval_truth;
  evaluate->add_option("rankings", eval_rankings,
                       "directory of per-class ranking CSVs")
      ->required();
  evaluate->add_option("truth", eval_truth, "truth corpus JSONL")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    RunConfig config;
    if (!config_path.empty()) config = load_config(config_path);
    if (!out_override.empty()) config.out = out_override;
    if (seed_set) config.pipeline.seed = seed_override;
    if (jobs_override > 0) config.pipeline.jobs = jobs_override;

    if (*mine) return cmd_mine(mine_corpus, config);
    if (*run) return cmd_run(config, config_path);
    if (*split_cmd) return cmd_split(split_corpus, config);
    if (*compare) return cmd_compare(compare_dir, config);
    if (*evaluate) return cmd_evaluate(eval_rankings, eval_truth, config);
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const IoError& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return 3;
  } catch (const InternalError& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 4;
  }
  return 0;
}
