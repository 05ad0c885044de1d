#pragma once

// Corpus ingestion: loading minutes files, sentence segmentation and the
// sentence cleaning rules (lowercase, numeric-only removal, boilerplate
// removal, 7-word minimum, 80-word truncation).

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fomc_absa/date.hpp"

namespace fomc_absa {

inline constexpr std::size_t kMinSentenceWords = 7;
inline constexpr std::size_t kMaxSentenceWords = 80;

struct RawDocument {
  std::string doc_id;
  Date meeting_date;
  std::string text;
};

struct Sentence {
  std::string doc_id;
  Date date;
  std::size_t sent_index = 0;  // ordinal among the document's retained sentences
  std::string text;
  std::size_t word_count = 0;

  bool operator==(const Sentence&) const = default;
};

struct PreprocessedText {
  std::string text;
  std::size_t word_count = 0;
};

struct CorpusStats {
  std::size_t n_documents = 0;
  std::size_t n_sentences = 0;
  std::size_t n_words = 0;
  double doc_len_max = 0, doc_len_median = 0, doc_len_min = 0;
  double sent_len_max = 0, sent_len_median = 0, sent_len_min = 0;
};

// Sentences containing any of these lowercase phrases are dropped.
class Blacklist {
 public:
  Blacklist() = default;
  explicit Blacklist(std::vector<std::string> phrases);

  // The one boilerplate line known to recur in published minutes.
  static Blacklist defaults();
  // One phrase per line; blank lines ignored; phrases are lowercased on load.
  static Blacklist load(const std::filesystem::path& path);

  bool matches(std::string_view lowercase_text) const;
  const std::vector<std::string>& phrases() const { return phrases_; }

 private:
  std::vector<std::string> phrases_;
};

// Loads every `<doc_id>__<YYYY-MM-DD>.txt` file in `corpus_dir`, ordered by
// (meeting_date, doc_id). Throws InputError naming the offending file for
// malformed names, invalid UTF-8 or duplicate ids.
std::vector<RawDocument> load_corpus(const std::filesystem::path& corpus_dir);

// Abbreviations whose trailing period never ends a sentence.
const std::vector<std::string>& sentence_abbreviations();

// Rule-based splitter. A boundary follows `.`, `!` or `?` (plus any closing
// quotes or brackets) when whitespace and then an uppercase letter or digit
// come next, unless the word ending there is an abbreviation. Blank lines
// also separate sentences. Segments come back whitespace-collapsed.
std::vector<std::string> segment_document(std::string_view text);

// Applies the cleaning rules to one raw sentence; nullopt when it is dropped.
std::optional<PreprocessedText> preprocess_sentence(std::string_view raw,
                                                    const Blacklist& blacklist = Blacklist::defaults());

std::vector<Sentence> ingest_document(const RawDocument& doc, const Blacklist& blacklist);

// Output is ordered by (meeting_date, doc_id, sent_index) for any worker count.
std::vector<Sentence> ingest_corpus(const std::vector<RawDocument>& docs, const Blacklist& blacklist,
                                    unsigned workers = 1);

// Throws InputError("empty corpus") when there are no documents or sentences.
CorpusStats corpus_stats(const std::vector<RawDocument>& docs, const std::vector<Sentence>& sentences);

// Median of an unsorted sample; mean of the middle pair for even sizes.
double median(std::vector<double> values);

std::string sentences_to_jsonl(const std::vector<Sentence>& sentences);
std::vector<Sentence> sentences_from_jsonl(std::string_view content);
std::string corpus_stats_to_json(const CorpusStats& stats);

}  // namespace fomc_absa
