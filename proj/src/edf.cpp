#include "dpu/edf.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dpu {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

class HeaderReader {
 public:
  HeaderReader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  std::string field(std::size_t len) {
    if (pos_ + len > bytes_.size()) throw std::runtime_error("parse_edf: truncated header");
    std::string s(reinterpret_cast<const char*>(bytes_.data()) + pos_, len);
    pos_ += len;
    return s;
  }

  double num(std::size_t len, const char* what) {
    std::string raw = trim(field(len));
    if (raw.empty()) throw std::runtime_error(std::string("parse_edf: empty field: ") + what);
    if (raw[0] == '+') raw.erase(0, 1);  // from_chars rejects an explicit plus
    double v = 0;
    const char* first = raw.data();
    const char* last = raw.data() + raw.size();
    auto [p, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || p != last)
      throw std::runtime_error(std::string("parse_edf: field not numeric: ") + what +
                               " ('" + raw + "')");
    return v;
  }

  long integer(std::size_t len, const char* what) {
    const double v = num(len, what);
    if (v != std::floor(v))
      throw std::runtime_error(std::string("parse_edf: field not integral: ") + what);
    return static_cast<long>(v);
  }

  std::size_t pos() const { return pos_; }
  void seek(std::size_t p) { pos_ = p; }

 private:
  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

Recording parse_edf(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 256) throw std::runtime_error("parse_edf: truncated file (no header)");
  HeaderReader hr(bytes);

  const std::string version = trim(hr.field(8));
  if (version != "0") throw std::runtime_error("parse_edf: unsupported version '" + version + "'");
  hr.field(80);  // patient
  hr.field(80);  // recording
  hr.field(8);   // start date
  hr.field(8);   // start time
  const long header_bytes = hr.integer(8, "header bytes");
  hr.field(44);  // reserved
  const long n_records_decl = hr.integer(8, "record count");
  const double record_dur = hr.num(8, "record duration");
  const long ns = hr.integer(4, "signal count");
  if (ns <= 0) throw std::runtime_error("parse_edf: no signals");
  if (record_dur <= 0) throw std::runtime_error("parse_edf: non-positive record duration");
  if (header_bytes != 256 * (ns + 1))
    throw std::runtime_error("parse_edf: header size field inconsistent with signal count");
  if (bytes.size() < static_cast<std::size_t>(header_bytes))
    throw std::runtime_error("parse_edf: truncated file (signal headers)");

  // signal header blocks are field-major
  struct Sig {
    std::string label, unit;
    double phys_min, phys_max, dig_min, dig_max;
    long samples_per_record;
  };
  std::vector<Sig> sigs(ns);
  for (auto& s : sigs) s.label = trim(hr.field(16));
  for (long i = 0; i < ns; ++i) hr.field(80);  // transducer
  for (auto& s : sigs) s.unit = trim(hr.field(8));
  for (auto& s : sigs) s.phys_min = hr.num(8, "physical min");
  for (auto& s : sigs) s.phys_max = hr.num(8, "physical max");
  for (auto& s : sigs) s.dig_min = hr.num(8, "digital min");
  for (auto& s : sigs) s.dig_max = hr.num(8, "digital max");
  for (long i = 0; i < ns; ++i) hr.field(80);  // prefiltering
  for (auto& s : sigs) s.samples_per_record = hr.integer(8, "samples per record");
  for (long i = 0; i < ns; ++i) hr.field(32);  // reserved

  std::size_t record_words = 0;
  for (const auto& s : sigs) {
    if (s.samples_per_record <= 0)
      throw std::runtime_error("parse_edf: non-positive samples per record");
    if (s.dig_min == s.dig_max)
      throw std::runtime_error("parse_edf: degenerate scaling (digital min == max) on '" +
                               s.label + "'");
    record_words += static_cast<std::size_t>(s.samples_per_record);
  }

  const std::size_t payload = bytes.size() - static_cast<std::size_t>(header_bytes);
  long n_records = n_records_decl;
  if (n_records < 0) {  // unknown count: infer from file size
    if (payload % (record_words * 2) != 0)
      throw std::runtime_error("parse_edf: inconsistent record count (payload not a whole record multiple)");
    n_records = static_cast<long>(payload / (record_words * 2));
  } else if (payload != static_cast<std::size_t>(n_records) * record_words * 2) {
    throw std::runtime_error("parse_edf: inconsistent record count");
  }

  // keep data signals, skip EDF+ annotation streams
  std::vector<long> kept;
  for (long i = 0; i < ns; ++i)
    if (sigs[i].label != "EDF Annotations") kept.push_back(i);
  if (kept.empty()) throw std::runtime_error("parse_edf: only annotation signals present");
  const long spr0 = sigs[kept[0]].samples_per_record;
  for (long i : kept)
    if (sigs[i].samples_per_record != spr0)
      throw std::runtime_error("parse_edf: differing sampling rates across signals unsupported");

  Recording rec;
  rec.sample_rate = spr0 / record_dur;
  rec.samples.resize(static_cast<long>(kept.size()), n_records * spr0);
  for (long i : kept) rec.channels.push_back({sigs[i].label, sigs[i].unit});

  const std::uint8_t* p = bytes.data() + header_bytes;
  for (long r = 0; r < n_records; ++r) {
    for (long i = 0; i < ns; ++i) {
      const auto& s = sigs[i];
      const auto it = std::find(kept.begin(), kept.end(), i);
      if (it == kept.end()) {
        p += 2 * s.samples_per_record;
        continue;
      }
      const long row = static_cast<long>(it - kept.begin());
      const double gain = (s.phys_max - s.phys_min) / (s.dig_max - s.dig_min);
      for (long k = 0; k < s.samples_per_record; ++k) {
        const std::int16_t d = static_cast<std::int16_t>(
            static_cast<std::uint16_t>(p[0]) | (static_cast<std::uint16_t>(p[1]) << 8));
        p += 2;
        rec.samples(row, r * spr0 + k) = (d - s.dig_min) * gain + s.phys_min;
      }
    }
  }
  rec.validate();
  return rec;
}

Recording parse_edf_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("parse_edf_file: cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(is)),
                                  std::istreambuf_iterator<char>());
  Recording rec = parse_edf(bytes);
  // recording id = file stem
  auto slash = path.find_last_of('/');
  std::string name = slash == std::string::npos ? path : path.substr(slash + 1);
  auto dot = name.find_last_of('.');
  rec.id = dot == std::string::npos ? name : name.substr(0, dot);
  return rec;
}

namespace {

void put_field(std::string& hdr, const std::string& v, std::size_t len, const char* what) {
  if (v.size() > len)
    throw std::invalid_argument(std::string("write_edf: field too long: ") + what);
  hdr += v;
  hdr.append(len - v.size(), ' ');
}

std::string fmt_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.8g", v);
  std::string s(buf);
  if (s.size() > 8) {
    std::snprintf(buf, sizeof buf, "%.3g", v);
    s = buf;
  }
  return s;
}

}  // namespace

std::vector<std::uint8_t> write_edf(const Recording& rec,
                                    const std::vector<std::pair<double, double>>* ranges_uV) {
  rec.validate();
  const long ns = rec.n_channels();
  if (ns == 0) throw std::invalid_argument("write_edf: no channels");

  // one-second records when the rate divides evenly, otherwise one big record
  const double rate = rec.sample_rate;
  long spr, n_records;
  double record_dur;
  if (rate == std::floor(rate) && rec.n_samples() % static_cast<long>(rate) == 0) {
    spr = static_cast<long>(rate);
    n_records = rec.n_samples() / spr;
    record_dur = 1.0;
  } else {
    spr = static_cast<long>(rec.n_samples());
    n_records = 1;
    record_dur = rec.n_samples() / rate;
  }

  constexpr double kDigMin = -32768, kDigMax = 32767;
  std::vector<std::pair<double, double>> ranges;
  for (long i = 0; i < ns; ++i) {
    double lo, hi;
    if (ranges_uV) {
      lo = (*ranges_uV)[i].first;
      hi = (*ranges_uV)[i].second;
    } else {
      lo = rec.samples.row(i).minCoeff();
      hi = rec.samples.row(i).maxCoeff();
    }
    if (!(lo < hi)) {
      lo -= 1.0;
      hi += 1.0;
    }
    // widen outward to integers so the 8-char header fields carry the
    // quantization range exactly and no sample needs clamping
    lo = std::floor(lo);
    hi = std::ceil(hi);
    if (std::abs(lo) >= 1e8 || std::abs(hi) >= 1e8)
      throw std::invalid_argument("write_edf: physical range too large for the header");
    ranges.emplace_back(lo, hi);
  }

  std::string hdr;
  hdr.reserve(256 * (ns + 1));
  put_field(hdr, "0", 8, "version");
  put_field(hdr, "X X X X", 80, "patient");
  put_field(hdr, "Startdate X X X X", 80, "recording");
  put_field(hdr, "01.01.00", 8, "start date");
  put_field(hdr, "00.00.00", 8, "start time");
  put_field(hdr, std::to_string(256 * (ns + 1)), 8, "header bytes");
  put_field(hdr, "", 44, "reserved");
  put_field(hdr, std::to_string(n_records), 8, "record count");
  put_field(hdr, fmt_num(record_dur), 8, "record duration");
  put_field(hdr, std::to_string(ns), 4, "signal count");

  for (long i = 0; i < ns; ++i) put_field(hdr, rec.channels[i].label, 16, "label");
  for (long i = 0; i < ns; ++i) put_field(hdr, "", 80, "transducer");
  for (long i = 0; i < ns; ++i)
    put_field(hdr, rec.channels[i].unit.empty() ? "uV" : rec.channels[i].unit, 8, "unit");
  for (long i = 0; i < ns; ++i) put_field(hdr, fmt_num(ranges[i].first), 8, "phys min");
  for (long i = 0; i < ns; ++i) put_field(hdr, fmt_num(ranges[i].second), 8, "phys max");
  for (long i = 0; i < ns; ++i) put_field(hdr, fmt_num(kDigMin), 8, "dig min");
  for (long i = 0; i < ns; ++i) put_field(hdr, fmt_num(kDigMax), 8, "dig max");
  for (long i = 0; i < ns; ++i) put_field(hdr, "", 80, "prefiltering");
  for (long i = 0; i < ns; ++i) put_field(hdr, std::to_string(spr), 8, "samples per record");
  for (long i = 0; i < ns; ++i) put_field(hdr, "", 32, "reserved");

  std::vector<std::uint8_t> out(hdr.begin(), hdr.end());
  out.reserve(out.size() + static_cast<std::size_t>(n_records) * ns * spr * 2);
  for (long r = 0; r < n_records; ++r) {
    for (long i = 0; i < ns; ++i) {
      // writer quantization is the exact inverse of the parse scaling
      const double lo = ranges[i].first, hi = ranges[i].second;
      const double gain = (hi - lo) / (kDigMax - kDigMin);
      for (long k = 0; k < spr; ++k) {
        const double p = rec.samples(i, r * spr + k);
        double d = std::round((p - lo) / gain + kDigMin);
        d = std::clamp(d, kDigMin, kDigMax);
        const auto di = static_cast<std::int16_t>(d);
        out.push_back(static_cast<std::uint8_t>(di & 0xFF));
        out.push_back(static_cast<std::uint8_t>((di >> 8) & 0xFF));
      }
    }
  }
  return out;
}

std::vector<SummaryEntry> parse_chb_summary(const std::string& text) {
  std::vector<SummaryEntry> out;
  std::istringstream is(text);
  std::string line;
  std::vector<double> starts, ends;

  auto flush_entry = [&]() {
    if (out.empty()) return;
    if (starts.size() != ends.size())
      throw std::runtime_error("parse_chb_summary: unmatched seizure start/end in " +
                               out.back().file_name);
    auto& iv = out.back().seizure_intervals;
    for (std::size_t i = 0; i < starts.size(); ++i) {
      if (ends[i] <= starts[i])
        throw std::runtime_error("parse_chb_summary: seizure end before start in " +
                                 out.back().file_name);
      iv.emplace_back(starts[i], ends[i]);
    }
    std::sort(iv.begin(), iv.end());
    starts.clear();
    ends.clear();
  };

  auto value_after_colon = [&](const std::string& l) -> std::string {
    auto pos = l.find(':');
    if (pos == std::string::npos) throw std::runtime_error("parse_chb_summary: missing ':'");
    return trim(l.substr(pos + 1));
  };

  auto seconds_value = [&](const std::string& l) -> double {
    std::string v = value_after_colon(l);
    // strip a trailing "seconds"/"sec" unit
    auto sp = v.find(' ');
    if (sp != std::string::npos) v = v.substr(0, sp);
    double x = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc() || p != v.data() + v.size())
      throw std::runtime_error("parse_chb_summary: malformed numeric field '" + v + "'");
    return x;
  };

  while (std::getline(is, line)) {
    if (line.rfind("File Name:", 0) == 0) {
      flush_entry();
      out.push_back({value_after_colon(line), {}});
    } else if (line.find("Seizure") != std::string::npos &&
               line.find("Start Time:") != std::string::npos) {
      if (out.empty()) throw std::runtime_error("parse_chb_summary: seizure before file entry");
      starts.push_back(seconds_value(line));
    } else if (line.find("Seizure") != std::string::npos &&
               line.find("End Time:") != std::string::npos) {
      if (out.empty()) throw std::runtime_error("parse_chb_summary: seizure before file entry");
      ends.push_back(seconds_value(line));
    }
  }
  flush_entry();
  return out;
}

}  // namespace dpu
