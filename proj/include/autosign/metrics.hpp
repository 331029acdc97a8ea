#pragma once

#include <string>
#include <vector>

#include "autosign/errors.hpp"

namespace autosign {

enum class EditOp { match, substitute, deletion, insertion };

struct AlignedOp {
  EditOp op;
  std::string ref;  // empty for insertions
  std::string hyp;  // empty for deletions
};

/// Levenshtein alignment summary with operation attribution.
/// wer() == (sub + ins + del) / ref_len.
struct EditSummary {
  long sub = 0;
  long ins = 0;
  long del = 0;
  long ref_len = 0;
  std::vector<AlignedOp> alignment;

  long distance() const { return sub + ins + del; }
  double wer() const { return static_cast<double>(distance()) / static_cast<double>(ref_len); }
};

/// Unit-cost edit alignment. On cost ties the backtrace prefers
/// match > substitution > deletion > insertion, so the alignment is
/// deterministic. Throws DataError on an empty reference.
EditSummary edit_alignment(const std::vector<std::string>& ref,
                           const std::vector<std::string>& hyp);

double wer(const std::vector<std::string>& ref, const std::vector<std::string>& hyp);

struct WerPair {
  std::string sample_id;
  std::vector<std::string> ref;
  std::vector<std::string> hyp;
};

/// Pooled corpus WER: (sum errors) / (sum reference lengths).
double corpus_wer(const std::vector<WerPair>& pairs);

/// Human-readable report: per-sample alignments with op tags, corpus error
/// counts by type, and the most frequent substitution confusions.
/// Deterministic for identical inputs.
std::string error_report(const std::vector<WerPair>& pairs);

/// Machine-readable companion: sample_id\tref\thyp\tsub\tins\tdel.
std::string decodes_tsv(const std::vector<WerPair>& pairs);

}  // namespace autosign
