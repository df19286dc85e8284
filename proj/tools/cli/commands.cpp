#include "commands.hpp"

#include <yaml-cpp/yaml.h>

#include <CLI11.hpp>
#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

#include "hierseg/data.hpp"
#include "hierseg/error.hpp"
#include "hierseg/hierarchy.hpp"
#include "hierseg/io.hpp"
#include "hierseg/mask.hpp"
#include "hierseg/metrics.hpp"
#include "hierseg/model.hpp"
#include "hierseg/train.hpp"

namespace hierseg::cli {

namespace fs = std::filesystem;

namespace {

struct Common {
  std::uint64_t seed = 0;
  std::string config;
  std::string data;
  std::string out;
};

struct SynthOpts {
  SynthConfig synth;
};

struct TrainOpts {
  int folds = 4;
  std::optional<int> fold;
  int epochs = 50;
  int batch_size = 5;
  double lr = 1e-4;
  int patience = 3;
  double decay = 2.0;
  double min_lr = 1e-6;
  double epsilon = 1e-6;
  std::string reduction = "sum";
  bool no_augment = false;
  std::string hierarchy;
};

struct EvalOpts {
  std::string model;
  std::string predictions;
  int folds = 4;
  std::optional<int> fold;
};

struct CompareOpts {
  std::string annotators;
  std::string reference;
  std::string timing;
};

struct RenderOpts {
  std::string pred;
  std::string target;
  std::string images;
  std::string cls = "full";
};

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create directory " + dir.string());
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

// Every *.png below `root`, as sorted relative paths.
std::vector<fs::path> list_pngs(const fs::path& root) {
  if (!fs::is_directory(root)) throw IoError("missing directory " + root.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (entry.is_regular_file() && entry.path().extension() == ".png") files.push_back(fs::relative(entry.path(), root));
  }
  std::sort(files.begin(), files.end());
  return files;
}

LabelMask read_label(const fs::path& path) {
  try {
    return decode_label_mask(read_png(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

// Resolved options of `sub` as a YAML map keyed by flag name; replayable
// through --config.
std::string resolved_config(const std::string& name, const CLI::App& sub) {
  YAML::Emitter y;
  y << YAML::BeginMap << YAML::Key << "command" << YAML::Value << name;
  for (const CLI::Option* opt : sub.get_options()) {
    const std::string key = opt->get_single_name();
    if (key == "help" || key == "config") continue;
    if (opt->get_expected_min() == 0) {
      y << YAML::Key << key << YAML::Value << (opt->count() > 0 ? "true" : "false");
    } else if (opt->count() > 0) {
      y << YAML::Key << key << YAML::Value << opt->results().back();
    } else if (!opt->get_default_str().empty()) {
      y << YAML::Key << key << YAML::Value << opt->get_default_str();
    }
  }
  y << YAML::EndMap;
  return std::string(y.c_str()) + "\n";
}

// Turns a config file into flag tokens placed ahead of the command line, so
// later flags win.
std::vector<std::string> config_tokens(const fs::path& path, const CLI::App& sub) {
  YAML::Node root;
  try {
    root = YAML::Load(read_text_file(path));
  } catch (const YAML::Exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  if (!root.IsMap()) throw ConfigError(path.string() + ": expected a key: value map");
  std::vector<std::string> tokens;
  for (const auto& kv : root) {
    const auto key = kv.first.as<std::string>();
    if (key == "command") continue;
    const CLI::Option* opt = sub.get_option_no_throw("--" + key);
    if (!opt || key == "config") throw ConfigError(path.string() + ": unknown key '" + key + "'");
    if (!kv.second.IsScalar()) throw ConfigError(path.string() + ": '" + key + "' must be a scalar");
    const auto value = kv.second.as<std::string>();
    if (opt->get_expected_min() == 0) {
      if (value == "true") tokens.push_back("--" + key);
      else if (value != "false") throw ConfigError(path.string() + ": '" + key + "' must be true or false");
    } else {
      tokens.push_back("--" + key);
      tokens.push_back(value);
    }
  }
  return tokens;
}

void write_record(const fs::path& dir, const std::string& name, const CLI::App& sub) {
  ensure_dir(dir);
  write_file_atomic(dir / (name + ".config.yaml"), resolved_config(name, sub));
}

std::string sample_id(const PatientRecord& p, const ImageRecord& r) { return p.dir_name() + "/" + r.condition.key(); }

std::vector<int> patient_ids(const std::vector<PatientRecord>& patients) {
  std::vector<int> ids;
  for (const auto& p : patients) ids.push_back(p.id);
  return ids;
}

std::string format_folds(const FoldAssignment& fa) {
  std::string text = "k=" + std::to_string(fa.k) + "\n";
  for (const auto& [id, fold] : fa.fold_of) text += "patient=" + std::to_string(id) + " fold=" + std::to_string(fold) + "\n";
  return text;
}

FoldAssignment parse_folds(const fs::path& path) {
  std::istringstream in(read_text_file(path));
  FoldAssignment fa;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    int a = 0, b = 0;
    if (std::sscanf(line.c_str(), "patient=%d fold=%d", &a, &b) == 2) {
      fa.fold_of[a] = b;
    } else if (std::sscanf(line.c_str(), "k=%d", &a) == 1) {
      fa.k = a;
    } else {
      throw FormatError(path.string() + ": malformed line '" + line + "'");
    }
  }
  if (fa.k <= 0) throw FormatError(path.string() + ": missing fold count");
  for (const auto& [id, fold] : fa.fold_of) {
    if (fold < 0 || fold >= fa.k) throw FormatError(path.string() + ": fold out of range for patient " + std::to_string(id));
  }
  return fa;
}

void require_same_patients(const FoldAssignment& fa, const std::vector<PatientRecord>& patients) {
  std::set<int> have;
  for (const auto& p : patients) have.insert(p.id);
  std::set<int> listed;
  for (const auto& [id, fold] : fa.fold_of) listed.insert(id);
  if (have != listed) throw ConfigError("fold assignment does not match the patients in the dataset");
}

std::vector<int> selected_folds(int k, const std::optional<int>& fold) {
  if (k <= 0) throw ConfigError("fold count must be positive");
  if (fold) {
    if (*fold < 0 || *fold >= k) throw ConfigError("fold " + std::to_string(*fold) + " outside 0.." + std::to_string(k - 1));
    return {*fold};
  }
  std::vector<int> all(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) all[static_cast<std::size_t>(i)] = i;
  return all;
}

fs::path fold_dir(const fs::path& root, int fold) { return root / ("fold_" + std::to_string(fold)); }

ClassHierarchy resolve_hierarchy(const std::string& file) {
  ClassHierarchy h = file.empty() ? default_occlusal_hierarchy() : build_hierarchy(load_hierarchy_spec(file));
  std::vector<std::string> expected;
  for (int c = 0; c < kNumContactClasses; ++c) expected.emplace_back(class_name(static_cast<ContactClass>(c)));
  if (h.leaf_names() != expected) {
    throw ConfigError("hierarchy leaves must be Background, MTP, MFP in that order to match the mask codec");
  }
  return h;
}

void cmd_synth(const Common& c, const SynthOpts& o, std::ostream& out) {
  if (c.out.empty()) throw ConfigError("synth needs --out");
  SynthConfig cfg = o.synth;
  cfg.seed = c.seed;
  const auto patients = synth_generate(cfg);
  write_dataset(patients, c.out);
  std::size_t images = 0;
  for (const auto& p : patients) images += p.images.size();
  out << "patients=" << patients.size() << " images=" << images << " out=" << c.out << "\n";
}

void cmd_gen_masks(const Common& c, std::ostream& out) {
  if (c.data.empty()) throw ConfigError("gen-masks needs --data");
  const fs::path dest = c.out.empty() ? fs::path(c.data) : fs::path(c.out);
  const auto patients = load_dataset(c.data, {.apply_transform = false});
  std::size_t written = 0;
  for (const auto& p : patients) {
    const fs::path dir = dest / p.dir_name();
    ensure_dir(dir);
    for (const auto& r : p.images) {
      LabelMask label;
      try {
        label = generate_mtp_mfp(r.ap, p.ofr_test, p.ofr_retest);
      } catch (const ShapeError& e) {
        throw ShapeError(p.dir_name() + " " + r.condition.key() + ": " + e.what());
      }
      write_png(dir / ("mask_" + r.condition.key() + ".png"), encode_label_mask(label));
      ++written;
    }
  }
  out << "patients=" << patients.size() << " masks=" << written << " out=" << dest.string() << "\n";
}

std::vector<Sample> samples_of(const std::vector<PatientRecord>& patients, const FoldAssignment& fa, int fold,
                               bool in_fold) {
  std::vector<Sample> samples;
  for (const auto& p : patients) {
    if ((fa.fold_of.at(p.id) == fold) != in_fold) continue;
    for (const auto& r : p.images) samples.push_back({sample_id(p, r), r.image, *r.label});
  }
  return samples;
}

void cmd_train(const Common& c, const TrainOpts& o, std::ostream& out) {
  if (c.data.empty() || c.out.empty()) throw ConfigError("train needs --data and --out");
  TrainConfig cfg;
  cfg.epochs = o.epochs;
  cfg.batch_size = o.batch_size;
  cfg.learning_rate = o.lr;
  cfg.patience = o.patience;
  cfg.decay_factor = o.decay;
  cfg.min_learning_rate = o.min_lr;
  cfg.augment = !o.no_augment;
  cfg.loss.epsilon = o.epsilon;
  cfg.loss.hcel_reduction = o.reduction == "mean" ? Reduction::kMean : Reduction::kSum;
  cfg.validate();
  const auto folds = selected_folds(o.folds, o.fold);
  const ClassHierarchy h = resolve_hierarchy(o.hierarchy);

  const auto patients = load_dataset(c.data, {.require_labels = true});
  const FoldAssignment fa = kfold_split(patient_ids(patients), o.folds, c.seed);
  const fs::path root(c.out);
  ensure_dir(root);
  write_file_atomic(root / "folds.txt", format_folds(fa));
  write_file_atomic(root / "hierarchy.yaml", format_hierarchy(h));

  for (int fold : folds) {
    const auto train_set = samples_of(patients, fa, fold, false);
    const auto val_set = samples_of(patients, fa, fold, true);
    cfg.seed = derive_seed(c.seed, 21, static_cast<std::uint64_t>(fold));
    NetConfig net_cfg;
    net_cfg.num_leaves = h.num_leaves();
    auto net = DualBranchNet::initialized(net_cfg, derive_seed(c.seed, 20, static_cast<std::uint64_t>(fold)));

    std::string log;
    const auto result = train(std::move(net), train_set, val_set, h, cfg, [&](const EpochLog& e) {
      const std::string line = format_epoch_log(e);
      log += line + "\n";
      out << "fold=" << fold << " " << line << "\n" << std::flush;
    });
    const fs::path dir = fold_dir(root, fold);
    ensure_dir(dir);
    save_weights(result.net, dir / "weights.bin");
    write_file_atomic(dir / "epochs.log", log);
    out << "fold=" << fold << " best_epoch=" << result.best_epoch << " best_monitor=" << fmt("%.17g", result.best_score)
        << " weights=" << (dir / "weights.bin").string() << "\n";
  }
}

void cmd_eval(const Common& c, const EvalOpts& o, std::ostream& out) {
  if (c.data.empty() || c.out.empty()) throw ConfigError("eval needs --data and --out");
  if (o.model.empty() && o.predictions.empty()) throw ConfigError("eval needs --model or --predictions");
  const auto patients = load_dataset(c.data, {.require_labels = true});

  FoldAssignment fa;
  if (!o.model.empty()) {
    fa = parse_folds(fs::path(o.model) / "folds.txt");
  } else {
    fa = kfold_split(patient_ids(patients), o.folds, c.seed);
  }
  require_same_patients(fa, patients);
  const auto folds = selected_folds(fa.k, o.fold);

  const fs::path root(c.out);
  ensure_dir(root);
  std::vector<ImageMetrics> rows;
  for (int fold : folds) {
    std::optional<DualBranchNet> net;
    if (o.predictions.empty()) {
      const fs::path weights = fold_dir(o.model, fold) / "weights.bin";
      if (!fs::is_regular_file(weights)) throw ConfigError("no weights for fold " + std::to_string(fold) + " at " + weights.string());
      net = load_weights(weights, kNumContactClasses);
    }
    for (const auto& p : patients) {
      if (fa.fold_of.at(p.id) != fold) continue;
      for (const auto& r : p.images) {
        const std::string name = "mask_" + r.condition.key() + ".png";
        LabelMask pred;
        if (net) {
          pred = net->predict(to_tensor(r.image));
          const fs::path dir = root / "predictions" / p.dir_name();
          ensure_dir(dir);
          write_png(dir / name, encode_label_mask(pred));
        } else {
          const fs::path path = fs::path(o.predictions) / p.dir_name() / name;
          if (!fs::is_regular_file(path)) throw IoError("missing file " + path.string());
          pred = read_label(path);
        }
        rows.push_back(evaluate_image(sample_id(p, r), fold, pred, *r.label));
      }
    }
  }
  const auto report = aggregate_folds({kEvalClasses.begin(), kEvalClasses.end()}, rows, folds);
  const std::string table = format_report_table(report);
  write_file_atomic(root / "report.txt", table);
  write_file_atomic(root / "report.csv", format_report_csv(report));
  write_file_atomic(root / "per_image.csv", format_per_image_csv(report));
  out << table;
}

std::map<std::string, std::pair<double, int>> read_timing(const fs::path& path) {
  std::istringstream in(read_text_file(path));
  std::map<std::string, std::pair<double, int>> sums;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || (lineno == 1 && line.rfind("annotator", 0) == 0)) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    double seconds = 0.0;
    try {
      if (cells.size() != 3) throw std::invalid_argument("cells");
      std::size_t used = 0;
      seconds = std::stod(cells[2], &used);
      if (used != cells[2].size()) throw std::invalid_argument("tail");
    } catch (const std::exception&) {
      throw FormatError(path.string() + ":" + std::to_string(lineno) + ": expected annotator,image,seconds");
    }
    auto& acc = sums[cells[0]];
    acc.first += seconds;
    acc.second += 1;
  }
  return sums;
}

void cmd_compare(const Common& c, const CompareOpts& o, std::ostream& out) {
  if (o.annotators.empty() || o.reference.empty() || c.out.empty()) {
    throw ConfigError("compare needs --annotators, --reference and --out");
  }
  const auto reference = list_pngs(o.reference);
  if (reference.empty()) throw IoError("no masks under " + o.reference);
  std::vector<fs::path> annotators;
  for (const auto& entry : fs::directory_iterator(o.annotators)) {
    if (entry.is_directory()) annotators.push_back(entry.path());
  }
  std::sort(annotators.begin(), annotators.end());
  if (annotators.empty()) throw IoError("no annotator directories under " + o.annotators);

  std::vector<std::string> unmatched;
  for (const auto& dir : annotators) {
    const auto files = list_pngs(dir);
    const std::string who = dir.filename().string();
    for (const auto& f : reference) {
      if (!std::binary_search(files.begin(), files.end(), f)) unmatched.push_back(who + ": missing " + f.string());
    }
    for (const auto& f : files) {
      if (!std::binary_search(reference.begin(), reference.end(), f)) unmatched.push_back(who + ": extra " + f.string());
    }
  }
  if (!unmatched.empty()) {
    std::string msg = "unmatched filenames:";
    for (const auto& u : unmatched) msg += "\n  " + u;
    throw ValidationError(msg);
  }

  std::map<std::string, std::pair<double, int>> timing;
  if (!o.timing.empty()) timing = read_timing(o.timing);

  std::vector<LabelMask> targets;
  for (const auto& f : reference) targets.push_back(read_label(fs::path(o.reference) / f));

  std::string table = "annotator";
  for (Metric m : kAllMetrics) table += std::string(",") + metric_name(m);
  table += ",time_s\n";
  std::string csv = "annotator,image,iou,dice,precision,recall\n";
  for (const auto& dir : annotators) {
    const std::string who = dir.filename().string();
    std::vector<ImageMetrics> rows;
    for (std::size_t i = 0; i < reference.size(); ++i) {
      const LabelMask pred = read_label(dir / reference[i]);
      const MetricValues v = metric_values(full_contact_metrics(pred, targets[i]));
      rows.push_back({reference[i].string(), 0, {v}});
      csv += who + "," + reference[i].string();
      for (const auto& x : v) csv += "," + (x ? fmt("%.17g", *x) : std::string("undef"));
      csv += "\n";
    }
    const auto report = aggregate_folds({"FULL"}, rows, {0});
    table += who;
    for (Metric m : kAllMetrics) {
      const Stat& s = report.at("FULL", m);
      table += "," + (s.mean ? fmt("%.4f", *s.mean) + " (" + fmt("%.4f", *s.std) + ")" : std::string("undef"));
    }
    const auto t = timing.find(who);
    table += "," + (t != timing.end() ? fmt("%.1f", t->second.first / t->second.second) : std::string("-")) + "\n";
  }
  const fs::path root(c.out);
  ensure_dir(root);
  write_file_atomic(root / "compare.csv", table);
  write_file_atomic(root / "compare_per_image.csv", csv);
  out << table;
}

void cmd_render(const Common& c, const RenderOpts& o, std::ostream& out) {
  if (o.pred.empty() || o.target.empty() || c.out.empty()) throw ConfigError("render needs --pred, --target and --out");
  std::optional<ContactClass> cls;
  if (o.cls == "mtp") cls = ContactClass::kMtp;
  else if (o.cls == "mfp") cls = ContactClass::kMfp;
  else if (o.cls != "full") throw ConfigError("--class must be full, mtp or mfp");
  const auto select = [&](const LabelMask& m) { return cls ? m.class_mask(*cls) : m.foreground(); };

  const auto files = list_pngs(o.pred);
  std::size_t written = 0;
  for (const auto& rel : files) {
    const fs::path target_path = fs::path(o.target) / rel;
    if (!fs::is_regular_file(target_path)) throw IoError("missing target " + target_path.string());
    std::optional<Raster8> base;
    if (!o.images.empty()) {
      std::string name = rel.filename().string();
      if (name.rfind("mask_", 0) == 0) name = "image_" + name.substr(5);
      const fs::path image_path = fs::path(o.images) / rel.parent_path() / name;
      if (!fs::is_regular_file(image_path)) throw IoError("missing image " + image_path.string());
      base = read_png(image_path);
    }
    Raster8 overlay;
    try {
      overlay = render_overlay(select(read_label(fs::path(o.pred) / rel)), select(read_label(target_path)), base);
    } catch (const ShapeError& e) {
      throw ShapeError(rel.string() + ": " + e.what());
    }
    const fs::path dest = fs::path(c.out) / rel.parent_path();
    ensure_dir(dest);
    write_png(dest / ("overlay_" + rel.filename().string()), overlay);
    ++written;
  }
  out << "overlays=" << written << " out=" << c.out << "\n";
}

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--seed", c.seed, "Master seed");
  sub->add_option("--config", c.config, "YAML file of flag values; flags override it");
  sub->add_option("--data", c.data, "Dataset root");
  sub->add_option("--out", c.out, "Output directory");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hierarchical occlusal contact segmentation", "hierseg"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast)->always_capture_default();

  Common common;
  SynthOpts synth;
  TrainOpts tr;
  EvalOpts ev;
  CompareOpts cmp;
  RenderOpts rnd;

  auto* s = app.add_subcommand("synth", "Generate a synthetic dataset");
  add_common(s, common);
  s->add_option("--patients", synth.synth.patients);
  s->add_option("--size", synth.synth.size);
  s->add_option("--overlap", synth.synth.overlap);
  s->add_option("--min-sites", synth.synth.min_sites);
  s->add_option("--max-sites", synth.synth.max_sites);
  s->add_option("--ink-probability", synth.synth.ink_probability);
  s->add_option("--noise", synth.synth.noise);

  auto* g = app.add_subcommand("gen-masks", "Derive MTP/MFP masks from AP and OFR masks");
  add_common(g, common);

  auto* t = app.add_subcommand("train", "Train one model per fold");
  add_common(t, common);
  t->add_option("--folds", tr.folds, "Number of patient folds");
  t->add_option("--fold", tr.fold, "Train this fold only");
  t->add_option("--epochs", tr.epochs);
  t->add_option("--batch-size", tr.batch_size);
  t->add_option("--lr", tr.lr);
  t->add_option("--patience", tr.patience);
  t->add_option("--decay", tr.decay);
  t->add_option("--min-lr", tr.min_lr);
  t->add_option("--epsilon", tr.epsilon);
  t->add_option("--reduction", tr.reduction)->check(CLI::IsMember({"sum", "mean"}));
  t->add_flag("--no-augment", tr.no_augment);
  t->add_option("--hierarchy", tr.hierarchy, "Hierarchy YAML");

  auto* e = app.add_subcommand("eval", "Evaluate fold models on their validation patients");
  add_common(e, common);
  e->add_option("--model", ev.model, "Directory written by train");
  e->add_option("--predictions", ev.predictions, "Precomputed masks instead of a model");
  e->add_option("--folds", ev.folds, "Fold count when no model directory is given");
  e->add_option("--fold", ev.fold, "Evaluate this fold only");

  auto* cp = app.add_subcommand("compare", "Score annotator masks against reference masks");
  add_common(cp, common);
  cp->add_option("--annotators", cmp.annotators, "One subdirectory per annotator");
  cp->add_option("--reference", cmp.reference);
  cp->add_option("--timing", cmp.timing, "CSV: annotator,image,seconds");

  auto* r = app.add_subcommand("render", "Write TP/FP/FN overlays");
  add_common(r, common);
  r->add_option("--pred", rnd.pred);
  r->add_option("--target", rnd.target);
  r->add_option("--images", rnd.images, "Photographs to draw under the overlay");
  r->add_option("--class", rnd.cls)->check(CLI::IsMember({"full", "mtp", "mfp"}));

  try {
    std::vector<std::string> tokens = args;
    if (!args.empty()) {
      const auto cfg = std::find(args.begin(), args.end(), "--config");
      if (CLI::App* sub = app.get_subcommand_no_throw(args.front()); sub && cfg != args.end() && cfg + 1 != args.end()) {
        auto extra = config_tokens(*(cfg + 1), *sub);
        tokens.insert(tokens.begin() + 1, extra.begin(), extra.end());
      }
    }
    std::reverse(tokens.begin(), tokens.end());
    app.parse(tokens);

    CLI::App* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();
    if (name == "synth") cmd_synth(common, synth, out);
    else if (name == "gen-masks") cmd_gen_masks(common, out);
    else if (name == "train") cmd_train(common, tr, out);
    else if (name == "eval") cmd_eval(common, ev, out);
    else if (name == "compare") cmd_compare(common, cmp, out);
    else cmd_render(common, rnd, out);
    const fs::path record_dir = !common.out.empty() ? fs::path(common.out) : fs::path(common.data);
    write_record(record_dir, name, *sub);
    return 0;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace hierseg::cli
