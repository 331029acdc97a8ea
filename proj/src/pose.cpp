#include "autosign/pose.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

namespace autosign {

std::string part_name(Part part) {
  switch (part) {
    case Part::body: return "body";
    case Part::face: return "face";
    case Part::left_hand: return "left_hand";
    case Part::right_hand: return "right_hand";
  }
  return "?";
}

KeypointLayout KeypointLayout::full86() {
  KeypointLayout l;
  l.parts = {{Part::body, 0, 25},
             {Part::face, 25, 19},
             {Part::left_hand, 44, 21},
             {Part::right_hand, 65, 21}};
  return l;
}

Index KeypointLayout::total_points() const {
  Index n = 0;
  for (const PartSpan& s : parts) n += s.count;
  return n;
}

bool KeypointLayout::has(Part part) const {
  for (const PartSpan& s : parts)
    if (s.part == part) return true;
  return false;
}

PartSpan KeypointLayout::span(Part part) const {
  for (const PartSpan& s : parts)
    if (s.part == part) return s;
  throw ConfigError("layout has no part " + part_name(part));
}

void KeypointLayout::validate() const {
  if (parts.empty()) throw ConfigError("empty keypoint layout");
  Index at = 0;
  for (const PartSpan& s : parts) {
    if (s.begin != at || s.count < 1)
      throw ConfigError("layout spans must be contiguous and nonempty");
    at = s.begin + s.count;
  }
}

Vocabulary::Vocabulary(std::vector<std::string> sorted_gloss_tokens) {
  table_ = {"<pad>", "<bos>", "<eos>", "<unk>"};
  for (std::string& t : sorted_gloss_tokens) table_.push_back(std::move(t));
  for (std::size_t i = 0; i < table_.size(); ++i) index_[table_[i]] = static_cast<int>(i);
  if (index_.size() != table_.size())
    throw DataError("duplicate tokens in vocabulary");
}

int Vocabulary::id(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? kUnk : it->second;
}

const std::string& Vocabulary::token(int id) const {
  if (id < 0 || id >= static_cast<int>(table_.size()))
    throw ShapeError("token id " + std::to_string(id) + " out of range");
  return table_[static_cast<std::size_t>(id)];
}

static std::vector<std::string> split_whitespace(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream is(text);
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

std::vector<int> Vocabulary::encode(const std::string& sentence) const {
  std::vector<int> ids;
  for (const std::string& tok : split_whitespace(sentence)) ids.push_back(id(tok));
  return ids;
}

std::string Vocabulary::decode(const std::vector<int>& ids) const {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out += ' ';
    out += token(ids[i]);
  }
  return out;
}

std::vector<std::string> Vocabulary::decode_tokens(const std::vector<int>& ids) const {
  std::vector<std::string> out;
  out.reserve(ids.size());
  for (int id : ids) out.push_back(token(id));
  return out;
}

std::vector<std::string> Vocabulary::gloss_tokens() const {
  return std::vector<std::string>(table_.begin() + kFirstGloss, table_.end());
}

Vocabulary build_vocabulary(const std::vector<std::string>& sentences) {
  if (sentences.empty()) throw DataError("build_vocabulary: empty corpus");
  std::set<std::string> unique;
  for (const std::string& s : sentences)
    for (const std::string& tok : split_whitespace(s)) unique.insert(tok);
  return Vocabulary(std::vector<std::string>(unique.begin(), unique.end()));
}

void GlossSequence::validate() const {
  if (ids.empty()) throw DataError("gloss sequence must contain at least one token");
  for (int id : ids)
    if (id < Vocabulary::kFirstGloss)
      throw DataError("gloss sequence contains reserved id " + std::to_string(id));
}

Index Batch::pose_len(Index b) const {
  Index n = 0;
  for (std::uint8_t m : pose_mask[static_cast<std::size_t>(b)]) n += m;
  return n;
}

Batch pad_and_mask(const std::vector<std::pair<PoseSequence, GlossSequence>>& samples,
                   const Vocabulary& vocab) {
  if (samples.empty()) throw DataError("pad_and_mask: empty sample list");
  (void)vocab;
  Batch batch;
  const Index joints = samples.front().first.joint_count();
  for (const auto& [pose, gloss] : samples) {
    if (pose.joint_count() != joints)
      throw ShapeError("pad_and_mask: inconsistent joint counts in batch");
    gloss.validate();
    batch.t_max = std::max(batch.t_max, pose.frame_count());
    batch.l_max = std::max(batch.l_max, gloss.length());
  }
  batch.joints = joints;

  const Index width = batch.l_max + 1;
  for (const auto& [pose, gloss] : samples) {
    RowMat padded = RowMat::Zero(batch.t_max, 2 * joints);
    padded.topRows(pose.frame_count()) = pose.frames;
    batch.poses.push_back(std::move(padded));

    std::vector<std::uint8_t> pm(static_cast<std::size_t>(batch.t_max), 0);
    for (Index t = 0; t < pose.frame_count(); ++t) pm[static_cast<std::size_t>(t)] = 1;
    batch.pose_mask.push_back(std::move(pm));

    std::vector<int> in(static_cast<std::size_t>(width), Vocabulary::kPad);
    std::vector<int> out(static_cast<std::size_t>(width), Vocabulary::kPad);
    std::vector<std::uint8_t> tm(static_cast<std::size_t>(width), 0);
    in[0] = Vocabulary::kBos;
    for (Index i = 0; i < gloss.length(); ++i) {
      in[static_cast<std::size_t>(i + 1)] = gloss.ids[static_cast<std::size_t>(i)];
      out[static_cast<std::size_t>(i)] = gloss.ids[static_cast<std::size_t>(i)];
    }
    out[static_cast<std::size_t>(gloss.length())] = Vocabulary::kEos;
    for (Index i = 0; i <= gloss.length(); ++i) tm[static_cast<std::size_t>(i)] = 1;
    batch.tokens_in.push_back(std::move(in));
    batch.tokens_out.push_back(std::move(out));
    batch.token_mask.push_back(std::move(tm));
  }
  return batch;
}

namespace {

constexpr char kMagic[4] = {'P', 'S', 'E', 'Q'};
constexpr std::uint32_t kVersion = 1;
constexpr Index kFullPoints = 86;

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace

void write_pose_file(const PoseSequence& seq, const std::string& path) {
  const Index t = seq.frame_count(), j = seq.joint_count();
  if (t < 1 || j < 1) throw DataError("write_pose_file: empty sequence");
  std::string payload;
  payload.reserve(16 + static_cast<std::size_t>(t * j * 2) * 4);
  payload.append(kMagic, 4);
  put_u32(payload, kVersion);
  put_u32(payload, static_cast<std::uint32_t>(t));
  put_u32(payload, static_cast<std::uint32_t>(j));
  for (Index r = 0; r < t; ++r) {
    for (Index c = 0; c < 2 * j; ++c) {
      const float f = static_cast<float>(seq.frames(r, c));
      std::uint32_t bits;
      std::memcpy(&bits, &f, 4);
      put_u32(payload, bits);
    }
  }
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open for writing: " + path);
  os.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  if (!os) throw IoError("write failed: " + path);
}

PoseSequence load_pose_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open: " + path);
  std::string bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  if (bytes.size() < 16) throw FormatError("pose file too small: " + path);
  const unsigned char* p = reinterpret_cast<const unsigned char*>(bytes.data());
  if (std::memcmp(p, kMagic, 4) != 0) throw FormatError("bad magic in " + path);
  const std::uint32_t version = get_u32(p + 4);
  if (version != kVersion)
    throw FormatError("unsupported pose file version " + std::to_string(version));
  const Index t = static_cast<Index>(get_u32(p + 8));
  const Index j = static_cast<Index>(get_u32(p + 12));
  if (t < 1 || j != kFullPoints)
    throw FormatError("pose file must hold T>=1 frames of 86 keypoints, got T=" +
                      std::to_string(t) + " J=" + std::to_string(j));
  const std::size_t expect = 16 + static_cast<std::size_t>(t) * static_cast<std::size_t>(j) * 8;
  if (bytes.size() != expect)
    throw CorruptionError("pose file payload size mismatch in " + path + ": expected " +
                          std::to_string(expect) + " bytes, got " +
                          std::to_string(bytes.size()));

  PoseSequence seq;
  seq.layout = KeypointLayout::full86();
  seq.frames.resize(t, 2 * j);
  const unsigned char* q = p + 16;
  for (Index r = 0; r < t; ++r) {
    for (Index c = 0; c < 2 * j; ++c) {
      const std::uint32_t bits = get_u32(q);
      q += 4;
      float f;
      std::memcpy(&f, &bits, 4);
      if (!std::isfinite(f))
        throw CorruptionError("non-finite coordinate in " + path);
      seq.frames(r, c) = static_cast<double>(f);
    }
  }
  return seq;
}

PoseSequence normalize_sequence(const PoseSequence& seq) {
  const Index t = seq.frame_count(), j = seq.joint_count();
  double min_x = 0, max_x = 0, min_y = 0, max_y = 0;
  bool any = false;
  for (Index r = 0; r < t; ++r) {
    for (Index k = 0; k < j; ++k) {
      if (seq.missing(r, k)) continue;
      const double x = seq.frames(r, 2 * k), y = seq.frames(r, 2 * k + 1);
      if (!any) {
        min_x = max_x = x;
        min_y = max_y = y;
        any = true;
      } else {
        min_x = std::min(min_x, x);
        max_x = std::max(max_x, x);
        min_y = std::min(min_y, y);
        max_y = std::max(max_y, y);
      }
    }
  }
  if (!any) throw DataError("normalize_sequence: all keypoints missing");

  const double span_x = max_x - min_x, span_y = max_y - min_y;
  PoseSequence out = seq;
  for (Index r = 0; r < t; ++r) {
    for (Index k = 0; k < j; ++k) {
      if (seq.missing(r, k)) continue;  // sentinel stays exactly (0,0)
      const double x = seq.frames(r, 2 * k), y = seq.frames(r, 2 * k + 1);
      out.frames(r, 2 * k) = span_x == 0.0 ? 0.0 : 2.0 * (x - min_x) / span_x - 1.0;
      out.frames(r, 2 * k + 1) = span_y == 0.0 ? 0.0 : 2.0 * (y - min_y) / span_y - 1.0;
    }
  }
  return out;
}

Modality parse_modality(const std::string& name) {
  if (name == "full") return Modality::full;
  if (name == "hands_only") return Modality::hands_only;
  if (name == "hands_face") return Modality::hands_face;
  if (name == "body_hands") return Modality::body_hands;
  throw ConfigError("unknown modality '" + name + "'");
}

std::string modality_name(Modality modality) {
  switch (modality) {
    case Modality::full: return "full";
    case Modality::hands_only: return "hands_only";
    case Modality::hands_face: return "hands_face";
    case Modality::body_hands: return "body_hands";
  }
  return "?";
}

const std::vector<Modality>& all_modalities() {
  static const std::vector<Modality> kAll = {Modality::full, Modality::hands_only,
                                             Modality::hands_face, Modality::body_hands};
  return kAll;
}

PoseSequence select_modality(const PoseSequence& seq, Modality modality) {
  if (seq.joint_count() != 86)
    throw ConfigError("select_modality requires the full 86-point layout");
  std::vector<Part> keep;
  switch (modality) {
    case Modality::full:
      keep = {Part::body, Part::face, Part::left_hand, Part::right_hand};
      break;
    case Modality::hands_only:
      keep = {Part::left_hand, Part::right_hand};
      break;
    case Modality::hands_face:
      keep = {Part::face, Part::left_hand, Part::right_hand};
      break;
    case Modality::body_hands:
      keep = {Part::body, Part::left_hand, Part::right_hand};
      break;
  }

  const KeypointLayout full = KeypointLayout::full86();
  PoseSequence out;
  out.signer_id = seq.signer_id;
  out.sample_id = seq.sample_id;
  Index total = 0;
  for (Part p : keep) total += full.span(p).count;
  out.frames.resize(seq.frame_count(), 2 * total);
  Index at = 0;
  for (Part p : keep) {
    const PartSpan s = full.span(p);
    out.layout.parts.push_back({p, at, s.count});
    out.frames.middleCols(2 * at, 2 * s.count) =
        seq.frames.middleCols(2 * s.begin, 2 * s.count);
    at += s.count;
  }
  return out;
}

std::vector<ManifestRow> load_manifest(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open manifest: " + path);
  std::vector<ManifestRow> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    ManifestRow row;
    std::size_t a = line.find('\t');
    std::size_t b = a == std::string::npos ? a : line.find('\t', a + 1);
    std::size_t c = b == std::string::npos ? b : line.find('\t', b + 1);
    if (c == std::string::npos)
      throw FormatError("manifest row needs 4 tab-separated fields: " + line);
    row.sample_id = line.substr(0, a);
    row.signer_id = line.substr(a + 1, b - a - 1);
    row.pose_path = line.substr(b + 1, c - b - 1);
    row.gloss = line.substr(c + 1);
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_manifest(const std::vector<ManifestRow>& rows, const std::string& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot open for writing: " + path);
  for (const ManifestRow& r : rows)
    os << r.sample_id << '\t' << r.signer_id << '\t' << r.pose_path << '\t' << r.gloss
       << '\n';
  if (!os) throw IoError("write failed: " + path);
}

std::vector<std::string> load_split(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open split file: " + path);
  std::vector<std::string> ids;
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty()) ids.push_back(line);
  }
  return ids;
}

void write_split(const std::vector<std::string>& sample_ids, const std::string& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot open for writing: " + path);
  for (const std::string& id : sample_ids) os << id << '\n';
  if (!os) throw IoError("write failed: " + path);
}

}  // namespace autosign
