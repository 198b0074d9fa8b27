#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "dpu/config.hpp"
#include "dpu/recording.hpp"

// Command implementations behind the CLI verbs. Every command reads a flat
// key=value Config (plus DPU_* environment overrides applied by the CLI),
// writes its artifacts into a run directory, and records a manifest. Exit
// status 0 means all declared outputs were written and validated.

namespace dpu::pipeline {

struct Store {
  std::vector<Segment> segments;
  double sample_rate = 0;
  std::string modality;  // "eeg" or "ieeg"
  std::string patient;
  int n_channels = 0;
};

void save_store(const std::string& dir, const Store& store);
Store load_store(const std::string& dir);

// chosen channels persisted by `select`, consumed by train/eval
std::vector<int> read_channel_list(const std::string& path);

int cmd_synth(const Config& cfg, const std::string& out_dir, std::ostream& log);
int cmd_ingest(const Config& cfg, const std::string& out_dir, std::ostream& log);
int cmd_select(const Config& cfg, const std::string& out_dir, std::ostream& log);
int cmd_train(const Config& cfg, const std::string& out_dir, std::ostream& log);
int cmd_eval(const Config& cfg, const std::string& out_dir, std::ostream& log);
int cmd_adapt(const Config& cfg, const std::string& out_dir, std::ostream& log);
int cmd_ops(const Config& cfg, const std::string& out_dir, std::ostream& log);
int cmd_report(const Config& cfg, const std::string& out_dir, std::ostream& log);

}  // namespace dpu::pipeline
