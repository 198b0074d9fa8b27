#include "dpu/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include "dpu/adapt.hpp"
#include "dpu/bands.hpp"
#include "dpu/edf.hpp"
#include "dpu/features.hpp"
#include "dpu/forest.hpp"
#include "dpu/manifest.hpp"
#include "dpu/metrics.hpp"
#include "dpu/ops.hpp"
#include "dpu/rng.hpp"
#include "dpu/synth.hpp"
#include "dpu/tensor.hpp"
#include "dpu/train.hpp"

namespace dpu::pipeline {

namespace fs = std::filesystem;

namespace {

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

std::uint64_t master_seed(const Config& cfg) {
  return static_cast<std::uint64_t>(cfg.get_int("seed", 0));
}

std::string metric_str(const std::optional<double>& v) {
  if (!v) return "absent";
  std::ostringstream os;
  os << std::setprecision(6) << std::fixed << *v;
  return os.str();
}

std::vector<std::pair<double, double>> interval_pairs(const std::vector<double>& flat,
                                                      const char* what) {
  if (flat.size() % 2 != 0)
    throw std::runtime_error(std::string(what) + ": expected start,end pairs");
  std::vector<std::pair<double, double>> out;
  for (std::size_t i = 0; i < flat.size(); i += 2) out.emplace_back(flat[i], flat[i + 1]);
  return out;
}

void write_split_file(const std::string& path, const DatasetSplit& split,
                      const std::vector<Segment>& all) {
  // recover indices by identity of (start_s, seizure) per ordered scan
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  auto dump = [&](const char* tag, const std::vector<Segment>& part) {
    os << tag;
    for (const auto& seg : part) {
      for (std::size_t i = 0; i < all.size(); ++i) {
        if (all[i].start_s == seg.start_s && all[i].recording_id == seg.recording_id) {
          os << ' ' << i;
          break;
        }
      }
    }
    os << '\n';
  };
  dump("train", split.train);
  dump("test", split.test);
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> read_split_file(
    const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read " + path);
  std::vector<std::size_t> train, test;
  std::string line;
  while (std::getline(is, line)) {
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    std::size_t i;
    while (ls >> i) (tag == "train" ? train : test).push_back(i);
  }
  return {train, test};
}

StftConfig stft_config(const Config& cfg, const std::string& modality, double sample_rate) {
  StftConfig sc;
  if (modality == "ieeg") {
    sc.win_len = static_cast<int>(std::llround(sample_rate / 2.0));
    sc.f_max = 100.0;
  } else {
    sc.win_len = 51;
    sc.f_max = 50.0;
  }
  sc.win_len = static_cast<int>(cfg.get_int("stft.win_len", sc.win_len));
  sc.hop = static_cast<int>(cfg.get_int("stft.hop", 1));
  int pad = static_cast<int>(cfg.get_int("stft.pad_len", 512));
  while (pad < sc.win_len) pad *= 2;
  sc.pad_len = pad;
  sc.f_max = cfg.get_num("stft.f_max", sc.f_max);
  return sc;
}

int vector_parts(const Config& cfg, const std::string& modality) {
  return static_cast<int>(cfg.get_int("features.parts", modality == "ieeg" ? 5 : 4));
}

std::vector<int> pick_channels(const Config& cfg, const std::string& out_dir, int n_channels,
                               std::uint64_t seed) {
  const std::string mode = cfg.get_str("train.channel_mode", "selected");
  const int k = static_cast<int>(cfg.get_int("train.n_channels", 1));
  if (cfg.has("train.channels")) {
    std::vector<int> out;
    for (double v : cfg.get_list("train.channels")) out.push_back(static_cast<int>(v));
    return out;
  }
  if (mode == "selected") {
    const std::string path = out_dir + "/channels.txt";
    if (fs::exists(path)) return read_channel_list(path);
  }
  if (mode == "random") {
    Rng rng(derive_seed(seed, "channel.random"));
    std::vector<int> all(n_channels);
    for (int i = 0; i < n_channels; ++i) all[i] = i;
    rng.shuffle(all);
    all.resize(std::min(k, n_channels));
    return all;
  }
  if (mode == "all") {
    std::vector<int> all(n_channels);
    for (int i = 0; i < n_channels; ++i) all[i] = i;
    return all;
  }
  // fall back to the leading channels
  std::vector<int> out;
  for (int i = 0; i < std::min(k, n_channels); ++i) out.push_back(i);
  return out;
}

train::FreespaceDataset image_features(const Store& store, const std::vector<Segment>& segs,
                                       const std::vector<int>& channels, const StftConfig& sc,
                                       Eigen::Index grid) {
  train::FreespaceDataset ds;
  ds.images.reserve(segs.size());
  for (const auto& seg : segs) {
    std::vector<Spectrogram> spectros;
    for (int ch : channels)
      spectros.push_back(stft(seg.data.row(ch).transpose(), sc, store.sample_rate));
    ds.images.push_back(assemble_image(spectros, grid, grid).pixels);
    ds.labels.push_back(seg.seizure);
  }
  return ds;
}

train::VectorDataset vector_features(const Store& store, const std::vector<Segment>& segs,
                                     int channel, int parts) {
  const BandSpec spec = integrated_bands();
  train::VectorDataset ds;
  if (segs.empty()) return ds;
  ds.X.resize(static_cast<Eigen::Index>(segs.size()),
              static_cast<Eigen::Index>(parts * spec.size()));
  for (std::size_t i = 0; i < segs.size(); ++i) {
    const FeatureVector fv = feature_vector(segs[i], channel, parts, spec, store.sample_rate);
    ds.X.row(static_cast<Eigen::Index>(i)) = fv.attrs.transpose();
    ds.labels.push_back(segs[i].seizure);
  }
  return ds;
}

Eigen::MatrixXd attr_matrix(const Store& store, const std::vector<Segment>& segs) {
  const BandSpec spec = eeg_bands(store.sample_rate);
  Eigen::MatrixXd X(static_cast<Eigen::Index>(segs.size()),
                    static_cast<Eigen::Index>(store.n_channels * spec.size()));
  for (std::size_t i = 0; i < segs.size(); ++i)
    X.row(static_cast<Eigen::Index>(i)) =
        channel_band_attrs(segs[i], spec, store.sample_rate).transpose();
  return X;
}

void export_tensor(const std::string& path, const std::vector<Eigen::ArrayXXd>& maps,
                   const std::vector<bool>& labels) {
  Tensor t;
  const auto rows = static_cast<std::uint32_t>(maps[0].rows());
  const auto cols = static_cast<std::uint32_t>(maps[0].cols());
  t.dims = {static_cast<std::uint32_t>(maps.size()), rows, cols};
  for (const auto& m : maps)
    for (std::uint32_t r = 0; r < rows; ++r)
      for (std::uint32_t c = 0; c < cols; ++c) t.data.push_back(static_cast<float>(m(r, c)));
  for (std::size_t i = 0; i < maps.size(); ++i)
    t.labels.push_back(i < labels.size() && labels[i] ? 1 : 0);
  save_tensor(path, t);
}

DatasetSplit pipeline_split(const Config& cfg, const Store& store) {
  return split(store.segments, derive_seed(master_seed(cfg), "split"));
}

train::TrainConfig train_config(const Config& cfg, std::uint64_t stage_seed) {
  train::TrainConfig tc;
  tc.learning_rate = cfg.get_num("train.learning_rate", 0.01);
  tc.epochs = static_cast<int>(cfg.get_int("train.epochs", 1000));
  tc.batch_size = static_cast<int>(cfg.get_int("train.batch_size", 32));
  const std::string loss = cfg.get_str("train.loss", "");
  if (!loss.empty())
    tc.loss = loss == "cross_entropy" ? LossKind::CrossEntropy : LossKind::Mse;
  tc.seed = stage_seed;
  tc.shuffle = cfg.get_bool("train.shuffle", true);
  if (cfg.get_str("train.binarize", "hard") == "relaxed")
    tc.binarize_mode = integrated::BinarizeMode::Relaxed;
  return tc;
}

void write_trace(const std::string& path, const std::vector<train::TraceRow>& trace) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << "epoch\tloss\ttrain_acc\n";
  for (const auto& row : trace)
    os << row.epoch << '\t' << std::setprecision(12) << row.loss << '\t' << row.accuracy << '\n';
}

void write_report(const std::string& path, const ConfusionStats& stats, const MetricSet& m,
                  std::ostream& log) {
  std::ostringstream os;
  os << "tp = " << stats.tp << "\nfp = " << stats.fp << "\ntn = " << stats.tn
     << "\nfn = " << stats.fn << '\n';
  os << "accuracy = " << metric_str(m.accuracy) << '\n';
  os << "sensitivity = " << metric_str(m.sensitivity) << '\n';
  os << "specificity = " << metric_str(m.specificity) << '\n';
  os << "f2 = " << metric_str(m.f_beta) << '\n';
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << os.str();
  log << os.str();
}

freespace::AberrationProfile profile_from_config(const Config& cfg, Eigen::Index rows,
                                                 Eigen::Index cols, std::uint64_t seed) {
  const std::string kind = cfg.get_str("aberration.kind", "stress");
  if (kind == "identity") return freespace::identity_profile(rows, cols);
  freespace::AberrationProfile p = freespace::stress_profile(
      rows, cols, derive_seed(seed, "aberration"), cfg.get_num("aberration.phase_sigma", 0.3));
  p.shift = {static_cast<int>(cfg.get_int("aberration.shift_rows", p.shift.first)),
             static_cast<int>(cfg.get_int("aberration.shift_cols", p.shift.second))};
  p.detector_gain[0] = cfg.get_num("aberration.gain1", p.detector_gain[0]);
  p.detector_gain[1] = cfg.get_num("aberration.gain2", p.detector_gain[1]);
  return p;
}

}  // namespace

void save_store(const std::string& dir, const Store& store) {
  fs::create_directories(dir);
  if (store.segments.empty()) throw std::runtime_error("save_store: no segments");
  const auto nc = store.segments[0].data.rows();
  const auto ns = store.segments[0].data.cols();

  Tensor t;
  t.dims = {static_cast<std::uint32_t>(store.segments.size()), static_cast<std::uint32_t>(nc),
            static_cast<std::uint32_t>(ns)};
  t.data.reserve(store.segments.size() * nc * ns);
  for (const auto& seg : store.segments) {
    if (seg.data.rows() != nc || seg.data.cols() != ns)
      throw std::runtime_error("save_store: ragged segments");
    for (Eigen::Index r = 0; r < nc; ++r)
      for (Eigen::Index c = 0; c < ns; ++c) t.data.push_back(static_cast<float>(seg.data(r, c)));
    t.labels.push_back(seg.seizure ? 1 : 0);
  }
  save_tensor(dir + "/segments.dput", t);

  std::ofstream meta(dir + "/store.meta");
  if (!meta) throw std::runtime_error("save_store: cannot write meta");
  meta << "modality = " << store.modality << '\n';
  meta << "patient = " << store.patient << '\n';
  meta << "sample_rate = " << store.sample_rate << '\n';
  meta << "n_channels = " << store.n_channels << '\n';
  meta << "n_segments = " << store.segments.size() << '\n';
  // window start times, one per record, to keep segments self-describing
  meta << "window_s = " << (ns / store.sample_rate) << '\n';
  std::ofstream starts(dir + "/starts.tsv");
  for (const auto& seg : store.segments)
    starts << seg.recording_id << '\t' << seg.start_s << '\n';
}

Store load_store(const std::string& dir) {
  const Tensor t = load_tensor(dir + "/segments.dput");
  if (t.dims.size() != 3) throw std::runtime_error("load_store: segments tensor must be rank 3");
  const Config meta = Config::parse_file(dir + "/store.meta");

  Store store;
  store.modality = meta.get_str("modality", "eeg");
  store.patient = meta.get_str("patient", "unknown");
  store.sample_rate = meta.get_num("sample_rate", 256.0);
  store.n_channels = static_cast<int>(t.dims[1]);

  std::vector<std::pair<std::string, double>> starts;
  {
    std::ifstream is(dir + "/starts.tsv");
    std::string id;
    double s;
    while (is >> id >> s) starts.emplace_back(id, s);
  }

  const std::size_t rec = t.record_size();
  for (std::uint32_t i = 0; i < t.dims[0]; ++i) {
    Segment seg;
    seg.recording_id = i < starts.size() ? starts[i].first : store.patient;
    seg.start_s = i < starts.size() ? starts[i].second : 0.0;
    seg.duration_s = t.dims[2] / store.sample_rate;
    seg.seizure = t.labels[i] != 0;
    seg.data.resize(t.dims[1], t.dims[2]);
    const float* p = t.data.data() + i * rec;
    for (std::uint32_t r = 0; r < t.dims[1]; ++r)
      for (std::uint32_t c = 0; c < t.dims[2]; ++c) seg.data(r, c) = *p++;
    store.segments.push_back(std::move(seg));
  }
  return store;
}

std::vector<int> read_channel_list(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read channel list " + path);
  std::vector<int> out;
  int c;
  while (is >> c) out.push_back(c);
  return out;
}

int cmd_synth(const Config& cfg, const std::string& out_dir, std::ostream& log) {
  Stopwatch timer;
  SynthConfig sc;
  sc.n_channels = static_cast<int>(cfg.get_int("synth.n_channels", 23));
  sc.sample_rate = cfg.get_num("synth.sample_rate", 256.0);
  sc.duration_s = cfg.get_num("synth.duration_s", 120.0);
  for (double v : cfg.get_list("synth.active_channels"))
    sc.active_channels.push_back(static_cast<int>(v));
  sc.seizure_intervals =
      interval_pairs(cfg.get_list("synth.seizure_intervals"), "synth.seizure_intervals");
  sc.background_rms_uV = cfg.get_num("synth.background_rms", 20.0);
  sc.burst_amplitude_rms = cfg.get_num("synth.burst_amplitude", 4.0);
  sc.seed = derive_seed(master_seed(cfg), "synth");

  const Recording rec = synth_recording(sc);
  const std::string modality = cfg.get_str("modality", "eeg");
  const double window_s = cfg.get_num("window.seconds", modality == "ieeg" ? 5.0 : 1.0);
  const double hop_s = cfg.get_num("window.hop", modality == "ieeg" ? 1.0 : window_s);

  Store store;
  store.segments = window(rec, window_s, hop_s);
  store.sample_rate = sc.sample_rate;
  store.modality = modality;
  store.patient = "synth";
  store.n_channels = sc.n_channels;
  save_store(out_dir, store);

  RunManifest man;
  man.command = "synth";
  man.config_hash = cfg.hash();
  man.seed = master_seed(cfg);
  man.add_artifact("segments", out_dir + "/segments.dput");
  man.add_artifact("meta", out_dir + "/store.meta");
  man.timings_s["total"] = timer.seconds();
  man.save(out_dir + "/manifest_synth.txt");
  log << "synth: " << store.segments.size() << " segments, " << sc.n_channels
      << " channels -> " << out_dir << "\n";
  return 0;
}

int cmd_ingest(const Config& cfg, const std::string& out_dir, std::ostream& log) {
  Stopwatch timer;
  const std::string edf_dir = cfg.require_str("ingest.edf_dir");
  const std::string summary_path = cfg.get_str("ingest.summary", "");

  std::vector<SummaryEntry> summary;
  if (!summary_path.empty()) {
    std::ifstream is(summary_path);
    if (!is) throw std::runtime_error("ingest: cannot open summary " + summary_path);
    std::ostringstream ss;
    ss << is.rdbuf();
    summary = parse_chb_summary(ss.str());
  }
  auto intervals_for = [&](const std::string& name) {
    for (const auto& e : summary)
      if (e.file_name == name) return e.seizure_intervals;
    return std::vector<std::pair<double, double>>{};
  };

  std::vector<std::string> files;
  for (const auto& entry : fs::directory_iterator(edf_dir))
    if (entry.path().extension() == ".edf") files.push_back(entry.path().string());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw std::runtime_error("ingest: no .edf files in " + edf_dir);

  const std::string modality = cfg.get_str("modality", "eeg");
  const double window_s = cfg.get_num("window.seconds", modality == "ieeg" ? 5.0 : 1.0);
  const double hop_s = cfg.get_num("window.hop", modality == "ieeg" ? 1.0 : window_s);

  Store store;
  store.modality = modality;
  store.patient = cfg.get_str("ingest.patient", fs::path(edf_dir).filename().string());
  int failures = 0;
  std::vector<Segment> seizure_windows, non_windows;
  for (const auto& path : files) {
    try {
      Recording rec = parse_edf_file(path);
      rec.seizure_intervals = intervals_for(fs::path(path).filename().string());
      rec.validate();
      if (store.sample_rate == 0) store.sample_rate = rec.sample_rate;
      if (rec.sample_rate != store.sample_rate)
        throw std::runtime_error("sample rate differs from first file");
      if (store.n_channels == 0) store.n_channels = rec.n_channels();
      if (rec.n_channels() != store.n_channels)
        throw std::runtime_error("channel count differs from first file");
      for (auto& seg : window(rec, window_s, hop_s))
        (seg.seizure ? seizure_windows : non_windows).push_back(std::move(seg));
    } catch (const std::exception& e) {
      ++failures;
      log << "ingest: FAILED " << path << ": " << e.what() << "\n";
    }
  }
  if (seizure_windows.empty() && non_windows.empty())
    throw std::runtime_error("ingest: no usable windows");

  // non-seizure pool: a contiguous seeded span (default 2 hours)
  const double pool_hours = cfg.get_num("ingest.nonseizure_hours", 2.0);
  const auto pool_count =
      static_cast<std::size_t>(std::llround(pool_hours * 3600.0 / std::max(hop_s, 1e-9)));
  if (non_windows.size() > pool_count) {
    Rng rng(derive_seed(master_seed(cfg), "nonseizure.pool"));
    const auto start = static_cast<std::size_t>(rng.below(non_windows.size() - pool_count + 1));
    non_windows = std::vector<Segment>(non_windows.begin() + start,
                                       non_windows.begin() + start + pool_count);
  }

  store.segments = std::move(seizure_windows);
  for (auto& seg : non_windows) store.segments.push_back(std::move(seg));
  save_store(out_dir, store);

  RunManifest man;
  man.command = "ingest";
  man.config_hash = cfg.hash();
  man.seed = master_seed(cfg);
  man.add_artifact("segments", out_dir + "/segments.dput");
  man.add_artifact("meta", out_dir + "/store.meta");
  man.timings_s["total"] = timer.seconds();
  man.save(out_dir + "/manifest_ingest.txt");
  log << "ingest: " << store.segments.size() << " windows from " << files.size() << " files ("
      << failures << " failed) -> " << out_dir << "\n";
  return failures == 0 ? 0 : 1;
}

int cmd_select(const Config& cfg, const std::string& out_dir, std::ostream& log) {
  Stopwatch timer;
  const Store store = load_store(out_dir);
  const int k = static_cast<int>(cfg.get_int("select.k", 1));
  if (k < 1 || k > store.n_channels) throw std::runtime_error("select: k out of range");

  const DatasetSplit sp = pipeline_split(cfg, store);
  Eigen::MatrixXd X = attr_matrix(store, sp.train);
  std::vector<int> y;
  for (const auto& seg : sp.train) y.push_back(seg.seizure ? 1 : 0);

  ForestParams fp;
  fp.n_trees = static_cast<int>(cfg.get_int("select.n_trees", 1000));
  fp.max_features = static_cast<int>(cfg.get_int("select.max_features", 0));
  fp.min_leaf = static_cast<int>(cfg.get_int("select.min_leaf", 1));
  fp.bootstrap = cfg.get_bool("select.bootstrap", true);
  const Forest forest = fit_forest(X, y, fp, derive_seed(master_seed(cfg), "select.forest"));

  ChannelRanking ranking;
  if (store.n_channels == 23 && forest.n_features == 115) {
    ranking = rank_channels(forest);
  } else {
    // same contribution rule on a non-standard channel count
    const int nb = static_cast<int>(forest.n_features / store.n_channels);
    ranking.contributions.resize(store.n_channels);
    for (int c = 0; c < store.n_channels; ++c)
      ranking.contributions(c) = 100.0 * forest.importances.segment(nb * c, nb).sum();
    ranking.order.resize(store.n_channels);
    for (int c = 0; c < store.n_channels; ++c) ranking.order[c] = c;
    std::stable_sort(ranking.order.begin(), ranking.order.end(), [&](int a, int b) {
      return ranking.contributions(a) > ranking.contributions(b);
    });
  }

  std::ofstream tsv(out_dir + "/ranking.tsv");
  tsv << "rank\tchannel\tcontribution_pct\n";
  log << "rank\tchannel\tcontribution_pct\n";
  for (std::size_t i = 0; i < ranking.order.size(); ++i) {
    std::ostringstream row;
    row << i << '\t' << ranking.order[i] << '\t' << std::setprecision(4) << std::fixed
        << ranking.contributions(ranking.order[i]) << '\n';
    tsv << row.str();
    log << row.str();
  }
  std::ofstream chan(out_dir + "/channels.txt");
  for (int i = 0; i < k; ++i) chan << ranking.order[i] << '\n';

  RunManifest man;
  man.command = "select";
  man.config_hash = cfg.hash();
  man.seed = master_seed(cfg);
  man.add_artifact("ranking", out_dir + "/ranking.tsv");
  man.add_artifact("channels", out_dir + "/channels.txt");
  man.timings_s["total"] = timer.seconds();
  man.save(out_dir + "/manifest_select.txt");
  return 0;
}

int cmd_train(const Config& cfg, const std::string& out_dir, std::ostream& log) {
  Stopwatch timer;
  const Store store = load_store(out_dir);
  const std::string model_kind = cfg.get_str("train.model", "freespace");
  const std::uint64_t seed = master_seed(cfg);

  const DatasetSplit sp = pipeline_split(cfg, store);
  write_split_file(out_dir + "/split.txt", sp, store.segments);

  RunManifest man;
  man.command = "train";
  man.config_hash = cfg.hash();
  man.seed = seed;
  man.add_artifact("split", out_dir + "/split.txt");

  if (model_kind == "forest") {
    Eigen::MatrixXd X = attr_matrix(store, sp.train);
    std::vector<int> y;
    for (const auto& seg : sp.train) y.push_back(seg.seizure ? 1 : 0);
    ForestParams fp;
    fp.n_trees = static_cast<int>(cfg.get_int("train.n_trees", 1000));
    fp.max_features = static_cast<int>(cfg.get_int("train.max_features", 0));
    fp.min_leaf = static_cast<int>(cfg.get_int("train.min_leaf", 1));
    fp.bootstrap = cfg.get_bool("train.bootstrap", true);
    const Forest forest = fit_forest(X, y, fp, derive_seed(seed, "forest"));
    save_forest(out_dir + "/forest.txt", forest);
    man.add_artifact("model", out_dir + "/forest.txt");
    log << "train: forest with " << forest.trees.size() << " trees\n";
  } else if (model_kind == "integrated") {
    const std::vector<int> channels = pick_channels(cfg, out_dir, store.n_channels, seed);
    const int parts = vector_parts(cfg, store.modality);
    const auto train_ds = vector_features(store, sp.train, channels.at(0), parts);

    integrated::IntegratedGeometry geom;
    geom.n_inputs = static_cast<int>(train_ds.X.cols());
    geom.n_neurons = static_cast<int>(cfg.get_int("integrated.n_neurons", 600));
    geom.n_eff = cfg.get_num("integrated.n_eff", 2.85);
    geom.validate();
    integrated::IntegratedModel model = integrated::make_model(geom, derive_seed(seed, "integrated.init"));
    model.bias_enabled = cfg.get_bool("integrated.bias", true);

    train::TrainConfig tc = train_config(cfg, derive_seed(seed, "train"));
    if (!cfg.has("train.loss")) tc.loss = LossKind::CrossEntropy;
    auto res = train_integrated(model, train_ds, tc);
    integrated::save_model(out_dir + "/model.dpui", res.model);
    write_trace(out_dir + "/trace.tsv", res.trace);
    man.add_artifact("model", out_dir + "/model.dpui");
    man.add_artifact("trace", out_dir + "/trace.tsv");
    log << "train: integrated, final train acc " << res.trace.back().accuracy << "\n";
  } else if (model_kind == "freespace") {
    const std::vector<int> channels = pick_channels(cfg, out_dir, store.n_channels, seed);
    const StftConfig sc = stft_config(cfg, store.modality, store.sample_rate);
    const auto grid = static_cast<Eigen::Index>(cfg.get_int("train.grid", 400));
    const auto train_ds = image_features(store, sp.train, channels, sc, grid);

    // cache features + the text manifest of (tensor, patient, label)
    export_tensor(out_dir + "/features_train.dput", train_ds.images, train_ds.labels);
    {
      std::ofstream ft(out_dir + "/features.tsv");
      ft << "tensor\tpatient\tlabel\n";
      for (std::size_t i = 0; i < train_ds.labels.size(); ++i)
        ft << "features_train.dput[" << i << "]\t" << store.patient << '\t'
           << (train_ds.labels[i] ? "seizure" : "non-seizure") << '\n';
    }

    freespace::FreespaceModel model = freespace::make_model(
        static_cast<int>(cfg.get_int("train.layers", 2)), grid, grid,
        derive_seed(seed, "freespace.init"));
    model.z = cfg.get_num("freespace.z", 0.10);
    model.pitch = cfg.get_num("freespace.pitch", 9.2e-6);
    model.wavelength = cfg.get_num("freespace.wavelength", 532e-9);

    train::TrainConfig tc = train_config(cfg, derive_seed(seed, "train"));
    auto res = train_freespace(model, train_ds, tc);
    if (cfg.get_bool("train.calibrate_c", true)) {
      const auto readouts = train::collect_readouts(res.model, train_ds);
      res.model.region_scale = calibrate_region_scale(readouts, cfg.get_num("train.f_beta", 2.0));
    }
    freespace::save_model(out_dir + "/model.dpum", res.model);
    write_trace(out_dir + "/trace.tsv", res.trace);
    man.add_artifact("model", out_dir + "/model.dpum");
    man.add_artifact("trace", out_dir + "/trace.tsv");
    man.add_artifact("features", out_dir + "/features_train.dput");
    log << "train: freespace, final train acc " << res.trace.back().accuracy << ", c = "
        << res.model.region_scale << "\n";
  } else {
    throw std::runtime_error("train: unknown model '" + model_kind + "'");
  }

  man.timings_s["total"] = timer.seconds();
  man.save(out_dir + "/manifest_train.txt");
  return 0;
}

int cmd_eval(const Config& cfg, const std::string& out_dir, std::ostream& log) {
  Stopwatch timer;
  const Store store = load_store(out_dir);
  const std::uint64_t seed = master_seed(cfg);

  std::vector<Segment> subset;
  const std::string which = cfg.get_str("eval.subset", "test");
  if (which == "all" || !fs::exists(out_dir + "/split.txt")) {
    subset = store.segments;
  } else {
    const auto [train_idx, test_idx] = read_split_file(out_dir + "/split.txt");
    for (auto i : which == "train" ? train_idx : test_idx)
      subset.push_back(store.segments.at(i));
  }
  if (subset.empty()) throw std::runtime_error("eval: empty evaluation subset");

  ConfusionStats stats;
  const std::string model_kind = cfg.get_str("train.model", "freespace");
  if (model_kind == "forest") {
    const Forest forest = load_forest(out_dir + "/forest.txt");
    const Eigen::MatrixXd X = attr_matrix(store, subset);
    for (Eigen::Index i = 0; i < X.rows(); ++i)
      stats.add(predict(forest, X.row(i).transpose()).label == 1,
                subset[static_cast<std::size_t>(i)].seizure);
  } else if (model_kind == "integrated") {
    const std::vector<int> channels = pick_channels(cfg, out_dir, store.n_channels, seed);
    const auto ds = vector_features(store, subset, channels.at(0),
                                    vector_parts(cfg, store.modality));
    const auto model = integrated::load_model(out_dir + "/model.dpui");
    stats = train::evaluate_integrated(model, ds);
    if (cfg.get_bool("eval.export_field", false)) {
      integrated::Engine eng(model.geometry);
      const auto t = eng.forward(model, ds.X.row(0).transpose());
      std::vector<Eigen::ArrayXXd> maps{
          t.u_out.array().abs().transpose().matrix().array().eval()};
      export_tensor(out_dir + "/field.dput", maps, {ds.labels[0]});
    }
  } else {
    const std::vector<int> channels = pick_channels(cfg, out_dir, store.n_channels, seed);
    const StftConfig sc = stft_config(cfg, store.modality, store.sample_rate);
    const auto model = freespace::load_model(out_dir + "/model.dpum");
    const auto ds = image_features(store, subset, channels, sc, model.rows());
    stats = train::evaluate_freespace(model, ds);
    if (cfg.get_bool("eval.export_maps", false)) {
      freespace::Engine eng(model);
      std::vector<Eigen::ArrayXXd> maps;
      std::vector<bool> labels;
      for (std::size_t i = 0; i < std::min<std::size_t>(8, ds.images.size()); ++i) {
        maps.push_back(eng.forward(model, ds.images[i]).y.back());
        labels.push_back(ds.labels[i]);
      }
      export_tensor(out_dir + "/maps.dput", maps, labels);
    }
  }

  const MetricSet m = metrics(stats, cfg.get_num("eval.f_beta", 2.0));
  write_report(out_dir + "/report.txt", stats, m, log);

  RunManifest man;
  man.command = "eval";
  man.config_hash = cfg.hash();
  man.seed = seed;
  man.add_artifact("report", out_dir + "/report.txt");
  man.timings_s["total"] = timer.seconds();
  man.save(out_dir + "/manifest_eval.txt");
  return 0;
}

int cmd_adapt(const Config& cfg, const std::string& out_dir, std::ostream& log) {
  Stopwatch timer;
  const Store store = load_store(out_dir);
  const std::uint64_t seed = master_seed(cfg);
  auto model = freespace::load_model(out_dir + "/model.dpum");
  if (model.n_layers() < 2) throw std::runtime_error("adapt: needs a 2-layer checkpoint");

  const std::vector<int> channels = pick_channels(cfg, out_dir, store.n_channels, seed);
  const StftConfig sc = stft_config(cfg, store.modality, store.sample_rate);
  const auto [train_idx, test_idx] = read_split_file(out_dir + "/split.txt");
  std::vector<Segment> train_segs, test_segs;
  for (auto i : train_idx) train_segs.push_back(store.segments.at(i));
  for (auto i : test_idx) test_segs.push_back(store.segments.at(i));
  const auto train_ds = image_features(store, train_segs, channels, sc, model.rows());
  const auto test_ds = image_features(store, test_segs, channels, sc, model.rows());

  const auto profile = profile_from_config(cfg, model.rows(), model.cols(), seed);

  train::TrainConfig tc = train_config(cfg, derive_seed(seed, "adapt"));
  tc.epochs = static_cast<int>(cfg.get_int("adapt.epochs", 100));

  const Eigen::ArrayXXd frozen_h1 = model.layers[0];
  const auto res = train::adaptive_retrain(model, profile, train_ds, tc,
                                           cfg.get_num("train.f_beta", 2.0));
  if ((res.model.layers[0] != frozen_h1).any())
    throw std::runtime_error("adapt: first layer changed (freeze contract broken)");

  const double beta = cfg.get_num("eval.f_beta", 2.0);
  const MetricSet pre = metrics(train::evaluate_freespace(model, test_ds), beta);
  const MetricSet post = metrics(train::evaluate_freespace(model, test_ds, &profile), beta);
  const MetricSet adapted = metrics(train::evaluate_freespace(res.model, test_ds, &profile), beta);

  freespace::save_model(out_dir + "/model_adapted.dpum", res.model);
  std::ostringstream os;
  os << "pre_accuracy = " << metric_str(pre.accuracy) << '\n'
     << "post_accuracy = " << metric_str(post.accuracy) << '\n'
     << "adapted_accuracy = " << metric_str(adapted.accuracy) << '\n'
     << "pre_f2 = " << metric_str(pre.f_beta) << '\n'
     << "post_f2 = " << metric_str(post.f_beta) << '\n'
     << "adapted_f2 = " << metric_str(adapted.f_beta) << '\n'
     << "adapted_c = " << res.model.region_scale << '\n';
  std::ofstream f(out_dir + "/report_adapt.txt");
  f << os.str();
  log << os.str();

  RunManifest man;
  man.command = "adapt";
  man.config_hash = cfg.hash();
  man.seed = seed;
  man.add_artifact("model_adapted", out_dir + "/model_adapted.dpum");
  man.add_artifact("report", out_dir + "/report_adapt.txt");
  man.timings_s["total"] = timer.seconds();
  man.save(out_dir + "/manifest_adapt.txt");
  return 0;
}

int cmd_ops(const Config& cfg, const std::string& out_dir, std::ostream& log) {
  const std::string kind = cfg.get_str("ops.kind", "freespace");
  OpsReport r;
  if (kind == "integrated") {
    r = integrated_ops(static_cast<int>(cfg.get_int("ops.n_in", 16)),
                       static_cast<int>(cfg.get_int("ops.n_out", 2)),
                       cfg.get_num("ops.rate_hz", 30e9), cfg.get_num("ops.area_mm2", 0.108),
                       cfg.get_num("ops.power_w", 0.010));
  } else {
    r = freespace_ops(cfg.get_int("ops.rows", 400), cfg.get_int("ops.cols", 400),
                      cfg.get_num("ops.frame_rate_hz", 30.0), cfg.get_num("ops.area_mm2", 0),
                      cfg.get_num("ops.power_w", 0));
  }
  std::ostringstream os;
  os << "ops_per_pass = " << std::setprecision(6) << r.ops_per_pass << '\n';
  os << "ops_per_second = " << r.ops_per_second << '\n';
  os << "tops = " << r.ops_per_second / 1e12 << '\n';
  if (r.ops_per_mm2_s > 0) os << "tops_per_mm2 = " << r.ops_per_mm2_s / 1e12 << '\n';
  if (r.ops_per_watt > 0) os << "tops_per_watt = " << r.ops_per_watt / 1e12 << '\n';
  log << os.str();
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    std::ofstream f(out_dir + "/ops.txt");
    f << os.str();
  }
  return 0;
}

int cmd_report(const Config& cfg, const std::string& out_dir, std::ostream& log) {
  (void)cfg;
  if (!fs::exists(out_dir)) throw std::runtime_error("report: no run directory " + out_dir);
  log << "file\tkey\tvalue\n";
  std::vector<std::string> files;
  for (const auto& entry : fs::directory_iterator(out_dir)) {
    const auto name = entry.path().filename().string();
    if (name.rfind("manifest_", 0) == 0 || name.rfind("report", 0) == 0)
      files.push_back(entry.path().string());
  }
  std::sort(files.begin(), files.end());
  for (const auto& path : files) {
    const Config kv = Config::parse_file(path);
    for (const auto& [k, v] : kv.values())
      log << fs::path(path).filename().string() << '\t' << k << '\t' << v << '\n';
  }
  return 0;
}

}  // namespace dpu::pipeline
