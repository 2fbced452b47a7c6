// Command-line driver: import, train, cv, decode, eval.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "sludec/checkpoint.hpp"
#include "sludec/decoder.hpp"
#include "sludec/errors.hpp"
#include "sludec/frames.hpp"
#include "sludec/metrics.hpp"

namespace fs = std::filesystem;
using namespace sludec;

namespace {

enum Exit { ok = 0, usage = 1, data_error = 2, numeric = 3 };

RunConfig resolve_config(const std::string& file, const std::vector<std::string>& overrides) {
  RunConfig c = file.empty() ? RunConfig{} : RunConfig::from_file(file);
  for (const auto& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("override '" + kv + "' is not key=value");
    c.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  return c;
}

void write_text(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p);
  if (!out) throw FormatError("cannot write " + p.string());
  out << text;
}

fs::path sidecar(const fs::path& out, const std::string& suffix) {
  return out.parent_path() / (out.filename().string() + suffix);
}

void progress(const std::string& msg) { std::cout << msg << std::endl; }

struct Stat {
  double mean = 0, stdev = 0;
};

Stat mean_stdev(const std::vector<double>& v) {
  Stat s;
  for (double x : v) s.mean += x;
  s.mean /= static_cast<double>(v.size());
  if (v.size() > 1) {
    for (double x : v) s.stdev += (x - s.mean) * (x - s.mean);
    s.stdev = std::sqrt(s.stdev / static_cast<double>(v.size() - 1));
  }
  return s;
}

std::string pct(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << 100.0 * v;
  return os.str();
}

int cmd_import(const std::string& root, const std::vector<std::string>& flists, const std::string& out,
               const std::string& channel) {
  RunConfig c;
  c.set("asr_channel", channel);
  ImportOptions opts;
  opts.channel = c.asr_channel;
  std::vector<fs::path> lists(flists.begin(), flists.end());
  const auto ds = import_dstc2(root, lists, opts);
  write_canonical(ds, fs::path(out));
  write_text(sidecar(out, ".config.txt"), c.to_text());
  std::cout << "imported " << ds.num_dialogues() << " dialogues, " << ds.turns.size() << " turns\n"
            << "checksum " << ds.provenance.checksum << "\n";
  return ok;
}

int cmd_train(const RunConfig& config, const std::string& data, const std::string& out) {
  const auto ds = read_canonical(fs::path(data));
  std::cout << "config " << config.hash() << ", " << ds.turns.size() << " training turns\n";
  const auto decoder = train_decoder(ds, config, progress);
  save_decoder(out, decoder);
  std::cout << "checkpoint written to " << out << "\n";
  return ok;
}

int cmd_cv(const RunConfig& config, const std::string& data, const std::string& out) {
  const auto ds = read_canonical(fs::path(data));
  const auto plan = make_folds(ds, config.folds, config.fold_seed);
  fs::create_directories(out);
  write_text(fs::path(out) / "config.txt", config.to_text());

  std::vector<double> f1, p, r, acc, ice_v, s1;
  std::ostringstream table;
  table << "config_hash\t" << config.hash() << "\n"
        << "fold\tf1\tprecision\trecall\taccuracy\tice\tstep1_f1\n";
  for (int k = 0; k < plan.k; ++k) {
    const auto [train, test] = plan.split(ds, k);
    progress("fold " + std::to_string(k) + ": " + std::to_string(train.turns.size()) + " train / " +
             std::to_string(test.turns.size()) + " test turns");
    const auto decoder = train_decoder(train, config, progress);
    const auto frames = decode_all(decoder, test);
    const auto refs = references(test);
    const auto full = evaluate(frames, refs, decoder.ontology().slots, EvalLevel::full);
    std::vector<SemanticFrame> step1_frames;
    for (const auto& t : test.turns) step1_frames.push_back(decoder.step1.frame(t));
    const auto step1 = evaluate(step1_frames, refs, decoder.ontology().slots, EvalLevel::step1);

    f1.push_back(full.f1);
    p.push_back(full.precision);
    r.push_back(full.recall);
    acc.push_back(step1.accuracy);
    s1.push_back(step1.f1);
    if (full.ice) ice_v.push_back(*full.ice);
    table << k << "\t" << full.f1 << "\t" << full.precision << "\t" << full.recall << "\t" << step1.accuracy
          << "\t" << (full.ice ? std::to_string(*full.ice) : "undefined") << "\t" << step1.f1 << "\n";
    std::cout << "fold " << k << "  F1 " << pct(full.f1) << "  P " << pct(full.precision) << "  R "
              << pct(full.recall) << "  step1 acc " << pct(step1.accuracy) << "  step1 F1 " << pct(step1.f1)
              << "  ICE " << (full.ice ? std::to_string(*full.ice) : "undefined") << "\n";
  }
  auto line = [&](const std::string& name, const std::vector<double>& v, bool as_pct) {
    if (v.empty()) return;
    const auto s = mean_stdev(v);
    std::cout << name << " " << (as_pct ? pct(s.mean) : std::to_string(s.mean)) << " +- "
              << (as_pct ? pct(s.stdev) : std::to_string(s.stdev)) << "\n";
    table << "mean_" << name << "\t" << s.mean << "\nstdev_" << name << "\t" << s.stdev << "\n";
  };
  line("f1", f1, true);
  line("precision", p, true);
  line("recall", r, true);
  line("step1_accuracy", acc, true);
  line("step1_f1", s1, true);
  line("ice", ice_v, false);
  write_text(fs::path(out) / "cv_report.tsv", table.str());
  return ok;
}

int cmd_decode(const std::string& checkpoint, const std::string& data, const std::string& out) {
  const auto decoder = load_decoder(checkpoint);
  const auto ds = read_turn_records(data);
  FramesFile file;
  file.header = {decoder.config.hash(), decoder.ontology().hash(), ds.provenance.checksum,
                 decoder.ontology().slots};
  file.frames = decode_all(decoder, ds);
  if (out == "-") {
    write_frames(std::cout, file);
  } else {
    write_frames(fs::path(out), file);
    write_text(sidecar(out, ".config.txt"), decoder.config.to_text());
    std::cout << "decoded " << file.frames.size() << " turns\n";
  }
  return ok;
}

int cmd_eval(const std::string& frames_path, const std::string& data, const std::string& level,
             const std::string& checkpoint, const std::string& out) {
  const auto frames = read_frames(fs::path(frames_path));
  const auto ds = read_turn_records(data);
  if (!checkpoint.empty()) {
    const auto decoder = load_decoder(checkpoint);
    if (decoder.ontology().hash() != frames.header.ontology_hash)
      throw IncompatibilityError("frames were decoded with ontology " + frames.header.ontology_hash +
                                 ", checkpoint has " + decoder.ontology().hash());
  }
  if (frames.header.dataset_checksum != ds.provenance.checksum)
    throw IncompatibilityError("frames were decoded from dataset " + frames.header.dataset_checksum +
                               ", reference data is " + ds.provenance.checksum);
  const auto lvl = level == "step1" ? EvalLevel::step1 : EvalLevel::full;
  const auto report = evaluate(frames.frames, references(ds), frames.header.slots, lvl);
  std::cout << "config_hash " << frames.header.config_hash << "\n"
            << "ontology_hash " << frames.header.ontology_hash << "\n"
            << report.to_text();
  if (!out.empty())
    write_text(out, "config_hash\t" + frames.header.config_hash + "\nontology_hash\t" +
                        frames.header.ontology_hash + "\n" + report.to_table());
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semantic decoder for spoken dialogue turns"};
  app.require_subcommand(1);

  std::string root, out, data, config_file, channel = "live", checkpoint, frames, level = "full";
  std::vector<std::string> flists, overrides;
  int folds = 0;

  auto* imp = app.add_subcommand("import", "Convert DSTC2 call logs into a dataset file");
  imp->add_option("--root", root, "Corpus root directory")->required();
  imp->add_option("--flist", flists, "File list(s) of call directories, relative to the root")->required();
  imp->add_option("--out", out, "Output dataset file")->required();
  imp->add_option("--channel", channel, "ASR channel")->check(CLI::IsMember({"live", "batch"}));

  auto add_config = [&](CLI::App* sub) {
    sub->add_option("--config", config_file, "Config file (key = value lines)");
    sub->add_option("--set", overrides, "Override a config key, key=value");
  };

  auto* train = app.add_subcommand("train", "Train Step I and Step II models");
  add_config(train);
  train->add_option("--data", data, "Training dataset file")->required();
  train->add_option("--out", out, "Checkpoint directory")->required();

  auto* cv = app.add_subcommand("cv", "k-fold cross-validation over dialogues");
  add_config(cv);
  cv->add_option("--data", data, "Dataset file")->required();
  cv->add_option("--out", out, "Report directory")->required();
  cv->add_option("--folds", folds, "Number of folds (overrides the config)");

  auto* dec = app.add_subcommand("decode", "Decode turns into semantic frames");
  dec->add_option("--checkpoint", checkpoint, "Checkpoint directory")->required();
  dec->add_option("--data", data, "Dataset file or turn records")->required();
  dec->add_option("--out", out, "Frames file, '-' for stdout")->required();

  auto* ev = app.add_subcommand("eval", "Score frames against reference annotations");
  ev->add_option("--frames", frames, "Frames file")->required();
  ev->add_option("--data", data, "Reference dataset file")->required();
  ev->add_option("--level", level, "step1: act + slot presence; full: act + slot-value pairs")
      ->check(CLI::IsMember({"step1", "full"}));
  ev->add_option("--checkpoint", checkpoint, "Refuse frames decoded with a different ontology");
  ev->add_option("--out", out, "Write the report as metric<TAB>value lines");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? Exit::ok : Exit::usage;
  }

  try {
    if (*imp) return cmd_import(root, flists, out, channel);
    if (*train) return cmd_train(resolve_config(config_file, overrides), data, out);
    if (*cv) {
      auto c = resolve_config(config_file, overrides);
      if (folds) c.set("folds", std::to_string(folds));
      return cmd_cv(c, data, out);
    }
    if (*dec) return cmd_decode(checkpoint, data, out);
    if (*ev) return cmd_eval(frames, data, level, checkpoint, out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return Exit::usage;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return Exit::numeric;
  } catch (const StateError& e) {
    std::cerr << "model state error: " << e.what() << "\n";
    return Exit::numeric;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return Exit::data_error;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return Exit::data_error;
  }
  return Exit::usage;
}
