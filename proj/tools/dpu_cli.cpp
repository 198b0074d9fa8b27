#include <CLI11.hpp>
#include <iostream>
#include <string>

#include "dpu/pipeline.hpp"

// dpu <verb> [--config PATH] [--seed N] [--out DIR] [-D key=value ...]
//
// Verbs: ingest, synth, select, train, eval, adapt, ops, report.
// Precedence: -D overrides > DPU_* environment > config file > defaults.

namespace {

struct Common {
  std::string config_path;
  std::string out_dir = "run";
  long long seed = -1;
  std::vector<std::string> defines;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config_path, "flat key=value config file");
  sub->add_option("--seed", c.seed, "master seed (overrides config)");
  sub->add_option("--out", c.out_dir, "run directory for artifacts");
  sub->add_option("-D,--define", c.defines, "extra key=value overrides");
}

dpu::Config build_config(const Common& c) {
  dpu::Config cfg;
  if (!c.config_path.empty()) cfg = dpu::Config::parse_file(c.config_path);
  cfg.apply_env("DPU_");
  for (const auto& d : c.defines) {
    const auto eq = d.find('=');
    if (eq == std::string::npos) throw std::runtime_error("bad -D, expected key=value: " + d);
    cfg.set(d.substr(0, eq), d.substr(eq + 1));
  }
  if (c.seed >= 0) cfg.set("seed", std::to_string(c.seed));
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"diffractive photonic computing unit toolkit for EEG seizure detection"};
  app.require_subcommand(1);

  Common common;
  using Handler = int (*)(const dpu::Config&, const std::string&, std::ostream&);
  struct Verb {
    const char* name;
    const char* help;
    Handler fn;
  };
  const Verb verbs[] = {
      {"synth", "generate a synthetic segment store", dpu::pipeline::cmd_synth},
      {"ingest", "parse EDF recordings into a segment store", dpu::pipeline::cmd_ingest},
      {"select", "rank channels with the random forest", dpu::pipeline::cmd_select},
      {"train", "train freespace/integrated/forest models", dpu::pipeline::cmd_train},
      {"eval", "evaluate a checkpoint and write the metrics report", dpu::pipeline::cmd_eval},
      {"adapt", "adaptive retraining against an aberration profile", dpu::pipeline::cmd_adapt},
      {"ops", "throughput/density/efficiency calculator", dpu::pipeline::cmd_ops},
      {"report", "summarize manifests and reports in a run directory", dpu::pipeline::cmd_report},
  };

  Handler selected = nullptr;
  for (const auto& v : verbs) {
    auto* sub = app.add_subcommand(v.name, v.help);
    add_common(sub, common);
    sub->callback([&selected, fn = v.fn] { selected = fn; });
  }

  CLI11_PARSE(app, argc, argv);
  try {
    const dpu::Config cfg = build_config(common);
    return selected(cfg, common.out_dir, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
