#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "autosign/tensor.hpp"

namespace autosign {

// Semantic keypoint groups in canonical storage order.
enum class Part { body, face, left_hand, right_hand };

std::string part_name(Part part);

struct PartSpan {
  Part part;
  Index begin = 0;  // first keypoint index within the layout
  Index count = 0;
};

/// Ordered, disjoint, contiguous part spans. The full layout covers 86
/// keypoints: body 0-24, face 25-43, left hand 44-64, right hand 65-85.
struct KeypointLayout {
  std::vector<PartSpan> parts;

  static KeypointLayout full86();

  Index total_points() const;
  bool has(Part part) const;
  PartSpan span(Part part) const;  // throws ConfigError if absent
  void validate() const;           // disjoint + contiguous + ordered
};

/// T x J x 2 keypoint sequence stored as a row-major T x 2J matrix
/// (column 2j holds x of joint j, column 2j+1 its y). Exact (0,0) pairs mark
/// undetected keypoints.
struct PoseSequence {
  RowMat frames;  // T x 2J
  KeypointLayout layout;
  std::string signer_id;
  std::string sample_id;

  Index frame_count() const { return frames.rows(); }
  Index joint_count() const { return frames.cols() / 2; }
  bool missing(Index t, Index j) const {
    return frames(t, 2 * j) == 0.0 && frames(t, 2 * j + 1) == 0.0;
  }
};

/// Token <-> id bijection with fixed reserved ids. Gloss tokens are assigned
/// ids from 4 upward in lexicographic order, so the mapping is stable for a
/// given corpus.
class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kBos = 1;
  static constexpr int kEos = 2;
  static constexpr int kUnk = 3;
  static constexpr int kFirstGloss = 4;

  Vocabulary() = default;
  explicit Vocabulary(std::vector<std::string> sorted_gloss_tokens);

  Index size() const { return static_cast<Index>(table_.size()); }
  int id(const std::string& token) const;  // kUnk when unknown
  const std::string& token(int id) const;
  bool is_reserved(int id) const { return id >= 0 && id < kFirstGloss; }

  std::vector<int> encode(const std::string& sentence) const;  // whitespace split
  std::string decode(const std::vector<int>& ids) const;
  std::vector<std::string> decode_tokens(const std::vector<int>& ids) const;

  /// Gloss tokens in id order (ids 4..size-1).
  std::vector<std::string> gloss_tokens() const;

  bool operator==(const Vocabulary& other) const { return table_ == other.table_; }

 private:
  std::vector<std::string> table_;
  std::map<std::string, int> index_;
};

Vocabulary build_vocabulary(const std::vector<std::string>& sentences);

/// Gloss token ids without BOS/EOS/PAD; at least one token.
struct GlossSequence {
  std::vector<int> ids;

  Index length() const { return static_cast<Index>(ids.size()); }
  void validate() const;  // nonempty, no reserved ids
};

/// Padded training batch. tokens_in rows are BOS-prefixed inputs, tokens_out
/// the same rows shifted left with EOS appended and PAD fill; token_mask
/// marks real target positions.
struct Batch {
  std::vector<RowMat> poses;                         // B x [T_max x 2J], zero padded
  std::vector<std::vector<std::uint8_t>> pose_mask;  // B x T_max
  std::vector<std::vector<int>> tokens_in;           // B x (L_max+1)
  std::vector<std::vector<int>> tokens_out;          // B x (L_max+1)
  std::vector<std::vector<std::uint8_t>> token_mask; // B x (L_max+1)
  Index t_max = 0;
  Index l_max = 0;
  Index joints = 0;

  Index size() const { return static_cast<Index>(poses.size()); }
  Index pose_len(Index b) const;  // true frame count of sample b
};

Batch pad_and_mask(const std::vector<std::pair<PoseSequence, GlossSequence>>& samples,
                   const Vocabulary& vocab);

// Pose file format (little-endian): magic "PSEQ", u32 version=1, u32 T,
// u32 J, then T*J*2 IEEE-754 32-bit floats, frame-major, joint-major, x
// before y. Header is exactly 16 bytes.
PoseSequence load_pose_file(const std::string& path);
void write_pose_file(const PoseSequence& seq, const std::string& path);

/// Per-sequence, per-axis affine map sending the bounding box of detected
/// keypoints onto [-1,1]. (0,0) sentinels survive unchanged; a zero-extent
/// axis maps to 0. Throws DataError when every keypoint is missing.
PoseSequence normalize_sequence(const PoseSequence& seq);

enum class Modality { full, hands_only, hands_face, body_hands };

Modality parse_modality(const std::string& name);  // throws ConfigError
std::string modality_name(Modality modality);
const std::vector<Modality>& all_modalities();

/// Restrict a full-layout sequence to the parts of a modality.
/// J: full=86, hands_only=42, hands_face=61, body_hands=67.
PoseSequence select_modality(const PoseSequence& seq, Modality modality);

// Manifest: UTF-8 TSV, one row per sample, no header:
//   sample_id \t signer_id \t relative_pose_path \t space-separated glosses
struct ManifestRow {
  std::string sample_id;
  std::string signer_id;
  std::string pose_path;  // relative to the manifest directory
  std::string gloss;
};

std::vector<ManifestRow> load_manifest(const std::string& path);
void write_manifest(const std::vector<ManifestRow>& rows, const std::string& path);

// Split files: plain text, one sample_id per line.
std::vector<std::string> load_split(const std::string& path);
void write_split(const std::vector<std::string>& sample_ids, const std::string& path);

}  // namespace autosign
