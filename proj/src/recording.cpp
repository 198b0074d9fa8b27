#include "dpu/recording.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dpu/rng.hpp"

namespace dpu {

void Recording::validate() const {
  if (sample_rate <= 0) throw std::invalid_argument("recording: sample_rate must be > 0");
  if (static_cast<int>(channels.size()) != samples.rows())
    throw std::invalid_argument("recording: channel descriptor count mismatch");
  const double dur = duration_s();
  double prev_end = 0.0;
  for (const auto& [s, e] : seizure_intervals) {
    if (!(s < e)) throw std::invalid_argument("recording: seizure interval end before start");
    if (s < prev_end) throw std::invalid_argument("recording: seizure intervals overlap or unsorted");
    if (s < 0 || e > dur + 1e-9)
      throw std::invalid_argument("recording: seizure interval outside record");
    prev_end = e;
  }
}

namespace {

bool midpoint_in_seizure(const Recording& rec, double start_s, double window_s) {
  const double mid = start_s + window_s / 2.0;
  for (const auto& [s, e] : rec.seizure_intervals)
    if (mid >= s && mid < e) return true;
  return false;
}

}  // namespace

std::vector<Segment> window(const Recording& rec, double window_s, double hop_s) {
  rec.validate();
  if (hop_s <= 0 || window_s < hop_s)
    throw std::invalid_argument("window: require 0 < hop_s <= window_s");
  const double dur = rec.duration_s();
  if (window_s > dur + 1e-9) throw std::invalid_argument("window: window longer than recording");

  const auto win_n = static_cast<std::int64_t>(std::llround(window_s * rec.sample_rate));
  const std::int64_t count =
      static_cast<std::int64_t>(std::floor((dur - window_s) / hop_s + 1e-9)) + 1;

  std::vector<Segment> out;
  out.reserve(static_cast<std::size_t>(count));
  for (std::int64_t i = 0; i < count; ++i) {
    const double start_s = i * hop_s;
    const auto start_n = static_cast<std::int64_t>(std::llround(start_s * rec.sample_rate));
    if (start_n + win_n > rec.n_samples()) break;
    Segment seg;
    seg.recording_id = rec.id;
    seg.start_s = start_s;
    seg.duration_s = window_s;
    seg.data = rec.samples.middleCols(start_n, win_n);
    seg.seizure = midpoint_in_seizure(rec, start_s, window_s);
    out.push_back(std::move(seg));
  }
  return out;
}

namespace {

DatasetSplit assemble_split(std::vector<std::size_t> seiz, std::vector<std::size_t> non,
                            const std::vector<Segment>& segments, std::uint64_t seed) {
  const std::size_t n_train_seiz = seiz.size() / 2;
  if (n_train_seiz == 0 || non.size() < n_train_seiz)
    throw std::invalid_argument("split: too few segments of a class");

  DatasetSplit out;
  out.seed = seed;
  for (std::size_t i = 0; i < seiz.size(); ++i)
    (i < n_train_seiz ? out.train : out.test).push_back(segments[seiz[i]]);
  for (std::size_t i = 0; i < non.size(); ++i)
    (i < n_train_seiz ? out.train : out.test).push_back(segments[non[i]]);
  return out;
}

}  // namespace

DatasetSplit split(const std::vector<Segment>& segments, std::uint64_t seed) {
  std::vector<std::size_t> seiz, non;
  for (std::size_t i = 0; i < segments.size(); ++i)
    (segments[i].seizure ? seiz : non).push_back(i);
  if (seiz.size() < 2 || non.size() < 2)
    throw std::invalid_argument("split: need at least 2 segments per class");

  Rng rng(seed);
  rng.shuffle(seiz);
  rng.shuffle(non);
  return assemble_split(std::move(seiz), std::move(non), segments, seed);
}

DatasetSplit split_by_event(const std::vector<Segment>& segments,
                            const Recording& rec, std::uint64_t seed) {
  // map each seizure segment onto the interval containing its midpoint
  std::vector<std::vector<std::size_t>> events(rec.seizure_intervals.size());
  std::vector<std::size_t> non;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    if (!segments[i].seizure) {
      non.push_back(i);
      continue;
    }
    const double mid = segments[i].start_s + segments[i].duration_s / 2.0;
    for (std::size_t e = 0; e < rec.seizure_intervals.size(); ++e) {
      const auto& [s, en] = rec.seizure_intervals[e];
      if (mid >= s && mid < en) {
        events[e].push_back(i);
        break;
      }
    }
  }
  std::erase_if(events, [](const auto& v) { return v.empty(); });
  if (events.size() < 2 || non.size() < 2)
    throw std::invalid_argument("split_by_event: need at least 2 seizure events");

  Rng rng(seed);
  std::vector<std::size_t> order(events.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(order);
  rng.shuffle(non);

  std::vector<std::size_t> seiz;
  const std::size_t n_train_events = events.size() / 2;
  std::size_t boundary = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    for (auto idx : events[order[k]]) seiz.push_back(idx);
    if (k + 1 == n_train_events) boundary = seiz.size();
  }

  // reuse the window-level assembly with the event boundary as the cut
  DatasetSplit out;
  out.seed = seed;
  for (std::size_t i = 0; i < seiz.size(); ++i)
    (i < boundary ? out.train : out.test).push_back(segments[seiz[i]]);
  for (std::size_t i = 0; i < non.size(); ++i)
    (i < boundary ? out.train : out.test).push_back(segments[non[i]]);
  return out;
}

}  // namespace dpu
