#include "ecg/signal.hpp"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

static_assert(std::endian::native == std::endian::little,
              "sample and checkpoint formats assume a little-endian host");

namespace ecg {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Categories
// ---------------------------------------------------------------------------

static constexpr std::array<char, kNumCategories> kSymbols = {'N', 'V', 'S',
                                                              'A', 'Q'};

char category_symbol(RhythmCategory c) { return kSymbols[category_index(c)]; }

RhythmCategory category_from_symbol(char sym) {
  for (int i = 0; i < kNumCategories; ++i)
    if (kSymbols[i] == sym) return static_cast<RhythmCategory>(i);
  throw ValidationError(std::string("unknown rhythm category symbol '") + sym +
                        "'");
}

RhythmCategory category_from_index(int idx) {
  if (idx < 0 || idx >= kNumCategories)
    throw ValidationError("category index " + std::to_string(idx) +
                          " out of range 0..4");
  return static_cast<RhythmCategory>(idx);
}

const std::array<RhythmCategory, kNumCategories>& all_categories() {
  static const std::array<RhythmCategory, kNumCategories> cats = {
      RhythmCategory::N, RhythmCategory::V, RhythmCategory::S,
      RhythmCategory::A, RhythmCategory::Q};
  return cats;
}

const char* provenance_name(Provenance p) {
  return p == Provenance::original ? "original" : "window_augmented";
}

Provenance provenance_from_name(const std::string& name) {
  if (name == "original") return Provenance::original;
  if (name == "window_augmented") return Provenance::window_augmented;
  throw ValidationError("unknown provenance '" + name + "'");
}

// ---------------------------------------------------------------------------
// Record validation
// ---------------------------------------------------------------------------

void EcgRecord::validate() const {
  if (sampling_rate_hz <= 0.0)
    throw ValidationError("sampling_rate_hz must be positive in record '" +
                          record_id + "'");
  const int64_t n = static_cast<int64_t>(samples.size());
  int64_t prev_start = -1;
  for (const auto& a : annotations) {
    if (a.start_index >= a.end_index)
      throw ValidationError("annotation start_index >= end_index in record '" +
                            record_id + "'");
    if (a.start_index < 0 || a.end_index > n)
      throw ValidationError("annotation out of range in record '" + record_id +
                            "'");
    if (a.qrs_start < a.start_index || a.qrs_end > a.end_index ||
        a.qrs_start >= a.qrs_end)
      throw ValidationError("annotation qrs interval not nested in record '" +
                            record_id + "'");
    if (a.start_index < prev_start)
      throw ValidationError("annotations not sorted by start in record '" +
                            record_id + "'");
    prev_start = a.start_index;
  }
}

// ---------------------------------------------------------------------------
// Dataset
// ---------------------------------------------------------------------------

void Dataset::add(LabeledSegment seg) {
  if (segment_length_ == 0) segment_length_ = static_cast<int>(seg.samples.size());
  if (static_cast<int>(seg.samples.size()) != segment_length_)
    throw ValidationError(
        "segment length " + std::to_string(seg.samples.size()) +
        " does not match dataset segment_length " +
        std::to_string(segment_length_));
  counts_[category_index(seg.category)]++;
  segments_.push_back(std::move(seg));
}

std::map<RhythmCategory, int64_t> category_counts(const Dataset& ds) {
  std::map<RhythmCategory, int64_t> out;
  for (RhythmCategory c : all_categories()) out[c] = ds.counts()[category_index(c)];
  return out;
}

// ---------------------------------------------------------------------------
// Paths
// ---------------------------------------------------------------------------

std::string header_path_for(const std::string& sample_path) {
  fs::path p(sample_path);
  p.replace_extension(".hdr");
  return p.string();
}

std::string annotation_path_for(const std::string& sample_path) {
  fs::path p(sample_path);
  p.replace_extension(".ann.csv");
  return p.string();
}

// ---------------------------------------------------------------------------
// Header sidecar
// ---------------------------------------------------------------------------

namespace {

struct Header {
  std::string record_id;
  double sampling_rate_hz = 0.0;
  int64_t sample_count = -1;
  double scale = 1.0;
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

Header parse_header(const std::string& header_path) {
  std::ifstream in(header_path);
  if (!in) throw IoError("cannot open header file '" + header_path + "'");
  Header h;
  bool saw_id = false, saw_rate = false, saw_count = false;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto colon = line.find(':');
    if (colon == std::string::npos)
      throw ValidationError("malformed header line '" + line + "' in '" +
                            header_path + "'");
    const std::string key = trim(line.substr(0, colon));
    const std::string val = trim(line.substr(colon + 1));
    try {
      if (key == "record_id") {
        h.record_id = val;
        saw_id = true;
      } else if (key == "sampling_rate_hz") {
        h.sampling_rate_hz = std::stod(val);
        saw_rate = true;
      } else if (key == "sample_count") {
        h.sample_count = std::stoll(val);
        saw_count = true;
      } else if (key == "scale") {
        h.scale = std::stod(val);
      }
      // unknown keys ignored
    } catch (const std::exception&) {
      throw ValidationError("malformed header value for key '" + key +
                            "' in '" + header_path + "'");
    }
  }
  if (!saw_id) throw ValidationError("header missing record_id");
  if (!saw_rate) throw ValidationError("header missing sampling_rate_hz");
  if (!saw_count) throw ValidationError("header missing sample_count");
  if (h.sampling_rate_hz <= 0.0)
    throw ValidationError("header sampling_rate_hz must be positive");
  if (h.sample_count < 0)
    throw ValidationError("header sample_count must be non-negative");
  return h;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Record I/O
// ---------------------------------------------------------------------------

EcgRecord load_record(const std::string& path, const std::string& header_path) {
  const Header h = parse_header(header_path);

  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open sample file '" + path + "'");
  in.seekg(0, std::ios::end);
  const int64_t bytes = in.tellg();
  in.seekg(0);
  if (bytes != h.sample_count * static_cast<int64_t>(sizeof(float)))
    throw ValidationError(
        "sample count mismatch: header declares " +
        std::to_string(h.sample_count) + " samples but '" + path + "' holds " +
        std::to_string(bytes / static_cast<int64_t>(sizeof(float))));

  EcgRecord rec;
  rec.record_id = h.record_id;
  rec.sampling_rate_hz = h.sampling_rate_hz;
  rec.scale = h.scale;
  rec.samples.resize(h.sample_count);
  if (h.sample_count > 0)
    in.read(reinterpret_cast<char*>(rec.samples.data()),
            h.sample_count * sizeof(float));
  if (!in) throw IoError("short read from '" + path + "'");

  const std::string ann_path = annotation_path_for(path);
  if (fs::exists(ann_path)) {
    std::ifstream ann(ann_path);
    if (!ann) throw IoError("cannot open annotation file '" + ann_path + "'");
    std::string line;
    bool first = true;
    while (std::getline(ann, line)) {
      line = trim(line);
      if (line.empty()) continue;
      if (first) {
        first = false;
        if (line.rfind("record_id", 0) == 0) continue;  // header row
      }
      const auto f = split_csv_line(line);
      if (f.size() != 6)
        throw ValidationError("annotation row needs 6 fields, got " +
                              std::to_string(f.size()) + " in '" + ann_path +
                              "'");
      BeatAnnotation a;
      try {
        a.start_index = std::stoll(f[1]);
        a.end_index = std::stoll(f[2]);
        a.qrs_start = std::stoll(f[3]);
        a.qrs_end = std::stoll(f[4]);
      } catch (const std::exception&) {
        throw ValidationError("malformed annotation indices in '" + ann_path +
                              "'");
      }
      const std::string cat = trim(f[5]);
      if (cat.size() != 1)
        throw ValidationError("malformed annotation category '" + cat + "'");
      a.category = category_from_symbol(cat[0]);
      rec.annotations.push_back(a);
    }
  }

  rec.validate();
  return rec;
}

void save_record(const EcgRecord& record, const std::string& path) {
  record.validate();

  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write sample file '" + path + "'");
    if (!record.samples.empty())
      out.write(reinterpret_cast<const char*>(record.samples.data()),
                record.samples.size() * sizeof(float));
    if (!out) throw IoError("write failed for '" + path + "'");
  }
  {
    std::ofstream out(header_path_for(path), std::ios::trunc);
    if (!out) throw IoError("cannot write header for '" + path + "'");
    out.precision(17);
    out << "record_id: " << record.record_id << "\n"
        << "sampling_rate_hz: " << record.sampling_rate_hz << "\n"
        << "sample_count: " << record.samples.size() << "\n"
        << "scale: " << record.scale << "\n";
  }
  const std::string ann_path = annotation_path_for(path);
  if (record.annotations.empty()) {
    std::error_code ec;
    fs::remove(ann_path, ec);  // no sidecar for annotation-free records
    return;
  }
  std::ofstream out(ann_path, std::ios::trunc);
  if (!out) throw IoError("cannot write annotation file '" + ann_path + "'");
  out << "record_id,start,end,qrs_start,qrs_end,category\n";
  for (const auto& a : record.annotations)
    out << record.record_id << ',' << a.start_index << ',' << a.end_index
        << ',' << a.qrs_start << ',' << a.qrs_end << ','
        << category_symbol(a.category) << "\n";
}

// ---------------------------------------------------------------------------
// Segment archive
// ---------------------------------------------------------------------------

static constexpr char kSegMagic[8] = {'E', 'C', 'G', 'S', 'E', 'G', 'V', '1'};

void save_segments(const Dataset& ds, const std::string& base_path) {
  {
    std::ofstream out(base_path + ".seg", std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write segment archive '" + base_path +
                            ".seg'");
    out.write(kSegMagic, sizeof(kSegMagic));
    const uint32_t len = static_cast<uint32_t>(ds.segment_length());
    const uint64_t count = ds.size();
    out.write(reinterpret_cast<const char*>(&len), sizeof(len));
    out.write(reinterpret_cast<const char*>(&count), sizeof(count));
    std::vector<float> buf(ds.segment_length());
    for (size_t i = 0; i < ds.size(); ++i) {
      const auto& s = ds[i].samples;
      for (size_t j = 0; j < s.size(); ++j) buf[j] = static_cast<float>(s[j]);
      out.write(reinterpret_cast<const char*>(buf.data()),
                buf.size() * sizeof(float));
    }
    if (!out) throw IoError("write failed for '" + base_path + ".seg'");
  }
  std::ofstream out(base_path + ".labels.csv", std::ios::trunc);
  if (!out)
    throw IoError("cannot write label table '" + base_path + ".labels.csv'");
  out << "index,category,source_record,provenance\n";
  for (size_t i = 0; i < ds.size(); ++i)
    out << i << ',' << category_symbol(ds[i].category) << ','
        << ds[i].source_record << ',' << provenance_name(ds[i].provenance)
        << "\n";
}

Dataset load_segments(const std::string& base_path) {
  std::ifstream in(base_path + ".seg", std::ios::binary);
  if (!in) throw IoError("cannot open segment archive '" + base_path + ".seg'");
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kSegMagic, sizeof(magic)) != 0)
    throw ValidationError("bad segment archive magic in '" + base_path +
                          ".seg'");
  uint32_t len = 0;
  uint64_t count = 0;
  in.read(reinterpret_cast<char*>(&len), sizeof(len));
  in.read(reinterpret_cast<char*>(&count), sizeof(count));
  if (!in || len == 0)
    throw ValidationError("bad segment archive header in '" + base_path +
                          ".seg'");

  std::ifstream lab(base_path + ".labels.csv");
  if (!lab)
    throw IoError("cannot open label table '" + base_path + ".labels.csv'");
  std::string line;
  std::getline(lab, line);  // header row
  Dataset ds(static_cast<int>(len));
  ds.reserve(count);
  std::vector<float> buf(len);
  for (uint64_t i = 0; i < count; ++i) {
    in.read(reinterpret_cast<char*>(buf.data()), len * sizeof(float));
    if (!in) throw IoError("segment archive truncated at segment " +
                           std::to_string(i));
    if (!std::getline(lab, line))
      throw ValidationError("label table shorter than archive (row " +
                            std::to_string(i) + ")");
    const auto f = split_csv_line(trim(line));
    if (f.size() != 4)
      throw ValidationError("label row needs 4 fields at row " +
                            std::to_string(i));
    LabeledSegment seg;
    seg.samples.assign(buf.begin(), buf.end());
    const std::string cat = trim(f[1]);
    if (cat.size() != 1)
      throw ValidationError("malformed category in label row " +
                            std::to_string(i));
    seg.category = category_from_symbol(cat[0]);
    seg.source_record = f[2];
    seg.provenance = provenance_from_name(trim(f[3]));
    ds.add(std::move(seg));
  }
  return ds;
}

}  // namespace ecg
