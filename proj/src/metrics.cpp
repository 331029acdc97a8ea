#include "autosign/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>

namespace autosign {

EditSummary edit_alignment(const std::vector<std::string>& ref,
                           const std::vector<std::string>& hyp) {
  if (ref.empty()) throw DataError("edit_alignment: empty reference has undefined WER");
  const std::size_t r = ref.size(), h = hyp.size();

  // dp[i][j] = distance between ref[0..i) and hyp[0..j)
  std::vector<std::vector<long>> dp(r + 1, std::vector<long>(h + 1, 0));
  for (std::size_t i = 0; i <= r; ++i) dp[i][0] = static_cast<long>(i);
  for (std::size_t j = 0; j <= h; ++j) dp[0][j] = static_cast<long>(j);
  for (std::size_t i = 1; i <= r; ++i) {
    for (std::size_t j = 1; j <= h; ++j) {
      const long diag = dp[i - 1][j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      dp[i][j] = std::min({diag, dp[i - 1][j] + 1, dp[i][j - 1] + 1});
    }
  }

  // Backtrace, preferring match > substitution > deletion > insertion on
  // cost ties so the alignment (not just the distance) is reproducible.
  EditSummary out;
  out.ref_len = static_cast<long>(r);
  std::size_t i = r, j = h;
  std::vector<AlignedOp> rev;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 && ref[i - 1] == hyp[j - 1] && dp[i][j] == dp[i - 1][j - 1]) {
      rev.push_back({EditOp::match, ref[i - 1], hyp[j - 1]});
      --i, --j;
    } else if (i > 0 && j > 0 && dp[i][j] == dp[i - 1][j - 1] + 1) {
      rev.push_back({EditOp::substitute, ref[i - 1], hyp[j - 1]});
      ++out.sub;
      --i, --j;
    } else if (i > 0 && dp[i][j] == dp[i - 1][j] + 1) {
      rev.push_back({EditOp::deletion, ref[i - 1], ""});
      ++out.del;
      --i;
    } else {
      rev.push_back({EditOp::insertion, "", hyp[j - 1]});
      ++out.ins;
      --j;
    }
  }
  out.alignment.assign(rev.rbegin(), rev.rend());
  return out;
}

double wer(const std::vector<std::string>& ref, const std::vector<std::string>& hyp) {
  return edit_alignment(ref, hyp).wer();
}

double corpus_wer(const std::vector<WerPair>& pairs) {
  if (pairs.empty()) throw DataError("corpus_wer: no pairs");
  long errors = 0, ref_tokens = 0;
  for (const WerPair& p : pairs) {
    const EditSummary s = edit_alignment(p.ref, p.hyp);
    errors += s.distance();
    ref_tokens += s.ref_len;
  }
  return static_cast<double>(errors) / static_cast<double>(ref_tokens);
}

namespace {

std::string join(const std::vector<std::string>& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

std::string fmt_wer(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", value);
  return buf;
}

}  // namespace

std::string error_report(const std::vector<WerPair>& pairs) {
  std::ostringstream os;
  long sub = 0, ins = 0, del = 0, ref_tokens = 0;
  std::map<std::pair<std::string, std::string>, long> confusions;

  for (const WerPair& p : pairs) {
    const EditSummary s = edit_alignment(p.ref, p.hyp);
    sub += s.sub;
    ins += s.ins;
    del += s.del;
    ref_tokens += s.ref_len;
    os << "sample " << p.sample_id << "  wer=" << fmt_wer(s.wer()) << "  sub=" << s.sub
       << " ins=" << s.ins << " del=" << s.del << " ref_len=" << s.ref_len << "\n";
    os << "  REF:";
    for (const AlignedOp& op : s.alignment)
      os << ' ' << (op.op == EditOp::insertion ? "*" : op.ref);
    os << "\n  HYP:";
    for (const AlignedOp& op : s.alignment)
      os << ' ' << (op.op == EditOp::deletion ? "*" : op.hyp);
    os << "\n  TAG:";
    for (const AlignedOp& op : s.alignment) {
      switch (op.op) {
        case EditOp::match: os << " ="; break;
        case EditOp::substitute:
          os << " S";
          ++confusions[{op.ref, op.hyp}];
          break;
        case EditOp::deletion: os << " D"; break;
        case EditOp::insertion: os << " I"; break;
      }
    }
    os << "\n";
  }

  const long errors = sub + ins + del;
  os << "corpus: samples=" << pairs.size() << " ref_tokens=" << ref_tokens << " sub=" << sub
     << " ins=" << ins << " del=" << del << " wer="
     << fmt_wer(ref_tokens > 0 ? static_cast<double>(errors) / static_cast<double>(ref_tokens)
                               : 0.0)
     << "\n";

  if (!confusions.empty()) {
    std::vector<std::pair<std::pair<std::string, std::string>, long>> ranked(
        confusions.begin(), confusions.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second > b.second;
      return a.first < b.first;
    });
    os << "top confusions (ref->hyp):\n";
    const std::size_t top = std::min<std::size_t>(ranked.size(), 10);
    for (std::size_t i = 0; i < top; ++i)
      os << "  " << ranked[i].first.first << "->" << ranked[i].first.second << " x"
         << ranked[i].second << "\n";
  }
  return os.str();
}

std::string decodes_tsv(const std::vector<WerPair>& pairs) {
  std::ostringstream os;
  for (const WerPair& p : pairs) {
    const EditSummary s = edit_alignment(p.ref, p.hyp);
    os << p.sample_id << '\t' << join(p.ref) << '\t' << join(p.hyp) << '\t' << s.sub << '\t'
       << s.ins << '\t' << s.del << '\n';
  }
  return os.str();
}

}  // namespace autosign
