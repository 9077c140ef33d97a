/*
 * SPDX-FileCopyrightText: Copyright (c) 2026, The fithand authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#include "fithand/cli.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <memory>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fithand/audit.hpp"
#include "fithand/augment.hpp"
#include "fithand/checkpoint.hpp"
#include "fithand/dataset.hpp"
#include "fithand/error.hpp"
#include "fithand/gradcheck.hpp"
#include "fithand/synth.hpp"
#include "fithand/threads.hpp"
#include "fithand/train.hpp"

namespace fs = std::filesystem;

namespace fithand {

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Value {
  std::string text;
  std::string source;
};

/// Values for one subcommand after layering defaults, config file and flags.
class Settings {
 public:
  void set(const std::string& key, std::string text, std::string source) {
    values_[key] = {std::move(text), std::move(source)};
  }

  bool has(const std::string& key) const {
    const auto it = values_.find(key);
    return it != values_.end() && !it->second.text.empty();
  }

  const std::string& text(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end() || it->second.text.empty()) throw UsageError("missing required flag --" + key);
    return it->second.text;
  }

  std::uint64_t u64(const std::string& key) const {
    const std::string& s = text(key);
    std::uint64_t v = 0;
    const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || end != s.data() + s.size()) {
      throw UsageError("--" + key + " expects a non-negative integer, got '" + s + "'");
    }
    return v;
  }

  std::size_t count(const std::string& key) const { return static_cast<std::size_t>(u64(key)); }

  double real(const std::string& key) const {
    const std::string& s = text(key);
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
    throw UsageError("--" + key + " expects a number, got '" + s + "'");
  }

  bool flag(const std::string& key) const {
    if (!has(key)) return false;
    const std::string& s = text(key);
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    throw UsageError("--" + key + " expects true or false, got '" + s + "'");
  }

  void print(std::ostream& out) const {
    out << "settings (defaults < config file < flags):\n";
    for (const auto& [key, v] : values_) {
      out << "  " << key << " = " << (v.text.empty() ? "<unset>" : v.text) << "  [" << v.source << "]\n";
    }
  }

 private:
  std::map<std::string, Value> values_;
};

/// Flag storage and defaults of one subcommand.
struct Command {
  CLI::App* app = nullptr;
  std::map<std::string, std::string> raw;
  std::map<std::string, CLI::Option*> options;
  std::map<std::string, std::string> defaults;
  std::map<std::string, bool> switches;
  std::string config_path;
  bool verbose = false;

  void value(const std::string& key, const std::string& fallback, const std::string& help,
             const std::string& type = "VALUE") {
    defaults[key] = fallback;
    const std::string suffix = fallback.empty() ? "" : " (default " + fallback + ")";
    options[key] = app->add_option("--" + key, raw[key], help + suffix)->type_name(type);
  }

  void toggle(const std::string& key, const std::string& help) {
    defaults[key] = "false";
    options[key] = app->add_flag("--" + key, switches[key], help);
  }
};

std::set<std::string>& known_keys() {
  static std::set<std::string> keys;
  return keys;
}

std::vector<std::pair<std::string, std::string>> read_config_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file " + path.string());
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  std::size_t number = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++number;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError(path.string() + ":" + std::to_string(number) + ": expected key=value");
    }
    std::string key = trim(line.substr(0, eq));
    if (key.rfind("--", 0) == 0) key = key.substr(2);
    if (!known_keys().count(key)) {
      throw UsageError(path.string() + ":" + std::to_string(number) + ": unknown key '" + key + "'");
    }
    out.emplace_back(key, trim(line.substr(eq + 1)));
  }
  return out;
}

Settings resolve(const Command& cmd) {
  Settings s;
  for (const auto& [key, v] : cmd.defaults) s.set(key, v, "default");
  if (!cmd.config_path.empty()) {
    for (const auto& [key, v] : read_config_file(cmd.config_path)) {
      if (cmd.defaults.count(key)) s.set(key, v, "config");
    }
  }
  for (const auto& [key, opt] : cmd.options) {
    if (opt->count() == 0) continue;
    const auto sw = cmd.switches.find(key);
    s.set(key, sw != cmd.switches.end() ? (sw->second ? "true" : "false") : cmd.raw.at(key), "flag");
  }
  return s;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

NetConfig net_config_from(const Settings& s, std::size_t classes, std::size_t channels) {
  NetConfig c;
  try {
    c.variant = parse_variant(s.text("variant"));
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
  c.classes = classes;
  c.in_channels = channels;
  c.depth_divisor = s.count("depth-scale");
  c.input_size = s.count("input-size");
  try {
    c.validate();
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
  return c;
}

SplitPlan split_plan_from(const Settings& s) {
  SplitPlan plan;
  try {
    plan.mode = parse_split_mode(s.text("split"));
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
  plan.seed = s.u64("seed");
  if (s.has("train-subjects")) plan.train_subjects = split_list(s.text("train-subjects"));
  if (plan.mode == SplitMode::si && plan.train_subjects.empty()) {
    throw UsageError("--split si needs --train-subjects");
  }
  return plan;
}

LossKind loss_from(const Settings& s, VariantId variant) {
  if (!s.has("loss")) return variant_loss(variant);
  try {
    return parse_loss(s.text("loss"));
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

// Subcommands. Each returns an exit code; library errors propagate.

int cmd_synth(const Settings& s, std::ostream& out) {
  SynthSpec spec;
  spec.classes = s.count("classes");
  spec.per_class = s.count("per-class");
  spec.size = s.count("input-size");
  spec.seed = s.u64("seed");
  const fs::path dir = s.text("out");
  if (spec.classes < 2) throw UsageError("--classes must be at least 2");
  const std::size_t n = synth_dataset(spec, dir);
  out << "wrote " << n << " images to " << dir.string() << '\n';
  return kExitOk;
}

int cmd_augment(const Settings& s, std::ostream& out) {
  const fs::path input = s.text("in");
  const fs::path outdir = s.text("outdir");
  const Image image = read_image(input);
  std::error_code ec;
  fs::create_directories(outdir, ec);
  if (ec) throw IoError("cannot create " + outdir.string() + ": " + ec.message());
  const std::string ext = image.channels == 1 ? ".pgm" : ".ppm";
  const auto images = augment(image);
  for (std::size_t i = 0; i < images.size(); ++i) {
    char prefix[8];
    std::snprintf(prefix, sizeof prefix, "_%02zu_", i);
    write_pnm(outdir / (input.stem().string() + prefix + images[i].tag + ext), images[i].image);
  }
  out << "wrote " << images.size() << " images to " << outdir.string() << '\n';
  return kExitOk;
}

int cmd_train(const Settings& s, std::ostream& out) {
  const fs::path data_dir = s.text("data");
  const fs::path model_path = s.text("out");
  const SplitPlan plan = split_plan_from(s);
  TrainConfig tc;
  tc.lr = s.real("lr");
  tc.epochs = s.count("epochs");
  tc.batch = s.count("batch");
  tc.momentum = s.real("momentum");
  tc.seed = s.u64("seed");
  if (!(tc.lr > 0.0)) throw UsageError("--lr must be positive");
  try {
    tc.validate();
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }

  const Dataset data = load_dataset(data_dir);
  if (s.has("classes") && s.count("classes") != data.classes()) {
    throw ConfigError("--classes " + s.text("classes") + " but the dataset has " + std::to_string(data.classes()));
  }
  if (s.has("channels") && s.count("channels") != data.channels) {
    throw ConfigError("--channels " + s.text("channels") + " but the dataset images have " +
                      std::to_string(data.channels));
  }
  const NetConfig nc = net_config_from(s, data.classes(), data.channels);
  tc.loss = loss_from(s, nc.variant);

  const Split parts = split(data, plan);
  const TensorSet train_set = prepare(parts.train, nc.input_size, s.flag("augment"));
  const TensorSet test_set = prepare(parts.test, nc.input_size);
  out << "train samples " << train_set.size() << ", test samples " << test_set.size() << ", classes "
      << nc.classes << '\n';

  Network<float> net(build_network(nc));
  net.initialize(tc.seed);
  const TrainLog log = train(net, train_set, tc, &out);

  save_checkpoint(net, model_path);
  const fs::path log_path = s.has("log") ? fs::path(s.text("log")) : fs::path(model_path.string() + ".csv");
  write_text(log_path, log.csv());
  out << "checkpoint=" << model_path.string() << "\nlog=" << log_path.string() << '\n';
  out << "test split:\n" << format_metrics(evaluate(net, test_set), data.class_names);
  return kExitOk;
}

int cmd_eval(const Settings& s, std::ostream& out) {
  const Network<float> net = load_checkpoint(s.text("checkpoint"));
  const Dataset data = load_dataset(s.text("data"));
  Dataset subset = data;
  if (s.text("split") != "all") subset = split(data, split_plan_from(s)).test;
  const TensorSet set = prepare(subset, net.config().input_size);
  out << "variant=" << variant_name(net.config().variant) << "\nevaluated=" << set.size() << '\n';
  out << format_metrics(evaluate(net, set, s.count("batch")), data.class_names);
  return kExitOk;
}

int cmd_audit(const Settings& s, std::ostream& out) {
  const std::size_t classes = s.count("classes");
  const std::size_t channels = s.count("channels");
  if (channels != 1 && channels != 3) throw UsageError("--channels must be 1 or 3");
  const NetConfig nc = net_config_from(s, classes, channels);
  out << format_audit(audit(build_network(nc))) << '\n';
  out << format_variant_table(variant_comparison(classes, channels, nc.depth_divisor, nc.input_size));
  return kExitOk;
}

int cmd_gradcheck(const Settings& s, std::ostream& out) {
  const auto rows = run_gradcheck_suite(s.u64("seed"));
  bool ok = true;
  std::size_t width = 4;
  for (const auto& r : rows) width = std::max(width, r.name.size());
  for (const auto& r : rows) {
    char line[160];
    std::snprintf(line, sizeof line, "%-*s  max_rel_err=%.3e  probes=%zu  %s\n", static_cast<int>(width),
                  r.name.c_str(), r.result.max_rel_error, r.result.probes, r.passed() ? "ok" : "FAIL");
    out << line;
    ok = ok && r.passed();
  }
  out << "tolerance=" << kGradCheckTolerance << "\nstatus=" << (ok ? "pass" : "fail") << '\n';
  return ok ? kExitOk : kExitRuntime;
}

int cmd_dump(const Settings& s, std::ostream& out) {
  const Network<float> net = load_checkpoint(s.text("checkpoint"));
  const Image image = read_image(s.text("in"));
  if (image.channels != net.config().in_channels) {
    throw ConfigError("image has " + std::to_string(image.channels) + " channels, network expects " +
                      std::to_string(net.config().in_channels));
  }
  const auto tensor = resize_and_normalize<float>(image, net.config().input_size);
  for (const auto& p : dump_mean_activations(net, tensor, s.text("outdir"))) out << p.string() << '\n';
  return kExitOk;
}

using Handler = int (*)(const Settings&, std::ostream&);

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-scale attention CNN for static hand gesture recognition", "fithand"};
  app.require_subcommand(1);
  app.fallthrough(false);

  std::vector<std::unique_ptr<Command>> commands;
  std::map<CLI::App*, std::pair<Command*, Handler>> dispatch;
  auto add = [&](const std::string& name, const std::string& about, Handler handler) -> Command& {
    auto cmd = std::make_unique<Command>();
    cmd->app = app.add_subcommand(name, about);
    cmd->app->add_option("--config", cmd->config_path, "key=value file; flags override it")->type_name("FILE");
    cmd->app->add_flag("--verbose", cmd->verbose, "print resolved settings and their sources");
    dispatch[cmd->app] = {cmd.get(), handler};
    commands.push_back(std::move(cmd));
    return *commands.back();
  };
  auto net_flags = [](Command& c, const std::string& size) {
    c.value("variant", "full", "network variant", "NAME");
    c.value("input-size", size, "square input side in pixels", "N");
    c.value("depth-scale", "1", "stage depth divisor: 1, 2, 4 or 8", "N");
  };

  Command& synth = add("synth", "write a synthetic gesture dataset", cmd_synth);
  synth.value("out", "", "output directory (required)", "DIR");
  synth.value("classes", "4", "number of gesture classes", "N");
  synth.value("per-class", "50", "images per class and subject", "N");
  synth.value("input-size", "64", "image side in pixels", "N");
  synth.value("seed", "7", "generator seed", "N");

  Command& aug = add("augment", "expand one image into its ten augmented copies", cmd_augment);
  aug.value("in", "", "input image (required)", "FILE");
  aug.value("outdir", "", "output directory (required)", "DIR");

  Command& tr = add("train", "train a network and write a checkpoint and CSV log", cmd_train);
  tr.value("data", "", "dataset root <subject>/<class>/<images> (required)", "DIR");
  tr.value("out", "", "checkpoint path (required)", "PATH");
  tr.value("log", "", "CSV log path (default <out>.csv)", "PATH");
  net_flags(tr, "256");
  tr.value("split", "sd", "sd (random 80:20) or si (by subject)", "sd|si");
  tr.value("train-subjects", "", "comma-separated training subjects for --split si", "LIST");
  tr.value("classes", "", "expected class count (checked against the data)", "N");
  tr.value("channels", "", "expected channel count (checked against the data)", "1|3");
  tr.value("lr", "0.0001", "learning rate", "F");
  tr.value("momentum", "0", "SGD momentum in [0, 1)", "F");
  tr.value("epochs", "30", "training epochs", "N");
  tr.value("batch", "16", "mini-batch size", "N");
  tr.value("loss", "", "ce or kl (default: implied by the variant)", "ce|kl");
  tr.value("seed", "1", "seed for initialization, shuffling and splitting", "N");
  tr.toggle("augment", "train on the ten augmented copies of every training image");

  Command& ev = add("eval", "evaluate a checkpoint on a dataset", cmd_eval);
  ev.value("checkpoint", "", "checkpoint path (required)", "PATH");
  ev.value("data", "", "dataset root (required)", "DIR");
  ev.value("split", "sd", "sd or si selects the held-out part; all uses every sample", "sd|si|all");
  ev.value("train-subjects", "", "training subjects excluded under --split si", "LIST");
  ev.value("seed", "1", "split seed (match the training run)", "N");
  ev.value("batch", "32", "evaluation batch size", "N");

  Command& au = add("audit", "print the per-layer parameter table and variant comparison", cmd_audit);
  net_flags(au, "256");
  au.value("classes", "10", "number of classes", "N");
  au.value("channels", "3", "input channels", "1|3");

  Command& gc = add("gradcheck", "compare analytic and finite-difference gradients", cmd_gradcheck);
  gc.value("seed", "1", "seed for the probe points", "N");

  Command& dump = add("dump-activations", "write channel-mean stage activations as PGM", cmd_dump);
  dump.value("checkpoint", "", "checkpoint path (required)", "PATH");
  dump.value("in", "", "input image (required)", "FILE");
  dump.value("outdir", "", "output directory (required)", "DIR");

  for (const auto& c : commands) {
    for (const auto& [key, v] : c->defaults) known_keys().insert(key);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  CLI::App* chosen = app.get_subcommands().front();
  auto [cmd, handler] = dispatch.at(chosen);
  try {
    const Settings settings = resolve(*cmd);
    const std::size_t threads = configure_threads();
    if (cmd->verbose) {
      settings.print(out);
      out << "  threads = " << threads << '\n';
    }
    return handler(settings, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n" << chosen->help();
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace fithand
