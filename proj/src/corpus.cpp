#include "fomc_absa/corpus.hpp"

#include <algorithm>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

#include "fomc_absa/error.hpp"
#include "fomc_absa/parallel.hpp"
#include "fomc_absa/text.hpp"

namespace fomc_absa {
namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

Blacklist::Blacklist(std::vector<std::string> phrases) {
  for (auto& p : phrases) {
    auto cleaned = collapse_whitespace(to_lower(p));
    if (!cleaned.empty()) phrases_.push_back(std::move(cleaned));
  }
}

Blacklist Blacklist::defaults() { return Blacklist({"return to the previous page"}); }

Blacklist Blacklist::load(const fs::path& path) {
  auto content = read_file(path);
  std::vector<std::string> phrases;
  std::size_t start = 0;
  while (start <= content.size()) {
    auto end = content.find('\n', start);
    if (end == std::string::npos) end = content.size();
    phrases.emplace_back(content.substr(start, end - start));
    start = end + 1;
  }
  return Blacklist(std::move(phrases));
}

bool Blacklist::matches(std::string_view lowercase_text) const {
  return std::any_of(phrases_.begin(), phrases_.end(), [&](const std::string& p) {
    return lowercase_text.find(p) != std::string_view::npos;
  });
}

std::vector<RawDocument> load_corpus(const fs::path& corpus_dir) {
  std::error_code ec;
  if (!fs::is_directory(corpus_dir, ec)) {
    throw InputError("corpus directory does not exist: " + corpus_dir.string());
  }
  std::vector<RawDocument> docs;
  std::map<std::string, std::string> seen;  // doc_id -> filename
  for (const auto& entry : fs::directory_iterator(corpus_dir)) {
    if (!entry.is_regular_file()) continue;
    auto name = entry.path().filename().string();
    if (name.starts_with(".")) continue;
    // <doc_id>__<YYYY-MM-DD>.txt
    constexpr std::string_view kSuffix = ".txt";
    bool ok = name.size() > kSuffix.size() + 12 && name.ends_with(kSuffix);
    std::optional<Date> date;
    std::string doc_id;
    if (ok) {
      auto stem = std::string_view(name).substr(0, name.size() - kSuffix.size());
      auto sep = stem.size() - 12;
      ok = stem.substr(sep, 2) == "__";
      if (ok) {
        doc_id = std::string(stem.substr(0, sep));
        date = parse_iso_date(stem.substr(sep + 2));
        ok = date.has_value() && !doc_id.empty();
      }
    }
    if (!ok) throw InputError("malformed corpus filename (want <doc_id>__<YYYY-MM-DD>.txt): " + name);
    if (auto [it, inserted] = seen.emplace(doc_id, name); !inserted) {
      throw InputError("duplicate doc_id '" + doc_id + "' in " + it->second + " and " + name);
    }
    auto text = read_file(entry.path());
    if (!is_valid_utf8(text)) throw InputError("file is not valid UTF-8: " + name);
    docs.push_back(RawDocument{std::move(doc_id), *date, std::move(text)});
  }
  std::sort(docs.begin(), docs.end(), [](const RawDocument& a, const RawDocument& b) {
    if (a.meeting_date != b.meeting_date) return a.meeting_date < b.meeting_date;
    return a.doc_id < b.doc_id;
  });
  return docs;
}

const std::vector<std::string>& sentence_abbreviations() {
  // "may" is deliberately absent: the month is never abbreviated, and
  // "... in May. The" must split.
  static const std::vector<std::string> kAbbreviations = {
      "mr.",  "mrs.", "ms.",  "dr.",  "u.s.", "gov.", "jan.", "feb.", "mar.", "apr.",
      "jun.", "jul.", "aug.", "sep.", "sept.", "oct.", "nov.", "dec.", "vol.", "no.",
      "pp.",  "fig.", "e.g.", "i.e."};
  return kAbbreviations;
}

namespace {

// Length of a closing quote or bracket at text[i], or 0.
std::size_t closing_mark_length(std::string_view text, std::size_t i) {
  char c = text[i];
  if (c == '"' || c == '\'' || c == ')' || c == ']') return 1;
  // U+2019 and U+201D
  if (text.substr(i, 3) == "\xE2\x80\x99" || text.substr(i, 3) == "\xE2\x80\x9D") return 3;
  return 0;
}

bool ends_with_abbreviation(std::string_view text, std::size_t period) {
  std::size_t start = period;
  while (start > 0 && !is_space(text[start - 1])) --start;
  auto word = text.substr(start, period - start + 1);
  while (!word.empty() && (word.front() == '"' || word.front() == '(' || word.front() == '\'')) {
    word.remove_prefix(1);
  }
  auto lowered = to_lower(word);
  const auto& abbrevs = sentence_abbreviations();
  return std::find(abbrevs.begin(), abbrevs.end(), lowered) != abbrevs.end();
}

}  // namespace

std::vector<std::string> segment_document(std::string_view text) {
  std::vector<std::size_t> cuts;
  const std::size_t n = text.size();
  for (std::size_t i = 0; i < n; ++i) {
    char c = text[i];
    if (c == '\n') {
      // Paragraph break: a whitespace run holding two or more newlines.
      std::size_t j = i + 1, newlines = 1;
      while (j < n && is_space(text[j])) newlines += text[j++] == '\n';
      if (newlines >= 2) cuts.push_back(i);
      i = j - 1;
      continue;
    }
    if (c != '.' && c != '!' && c != '?') continue;
    std::size_t j = i + 1;
    while (j < n) {
      auto len = closing_mark_length(text, j);
      if (len == 0) break;
      j += len;
    }
    if (j >= n || !is_space(text[j])) continue;
    std::size_t k = j;
    while (k < n && is_space(text[k])) ++k;
    if (k >= n) continue;
    char next = text[k];
    bool starts_sentence = (next >= 'A' && next <= 'Z') || (next >= '0' && next <= '9');
    if (!starts_sentence) continue;
    if (c == '.' && ends_with_abbreviation(text, i)) continue;
    cuts.push_back(j);
  }
  std::vector<std::string> segments;
  std::size_t start = 0;
  cuts.push_back(n);
  for (auto cut : cuts) {
    auto segment = collapse_whitespace(text.substr(start, cut - start));
    if (!segment.empty()) segments.push_back(std::move(segment));
    start = cut;
  }
  return segments;
}

std::optional<PreprocessedText> preprocess_sentence(std::string_view raw, const Blacklist& blacklist) {
  auto lowered = collapse_whitespace(to_lower(raw));
  if (blacklist.matches(lowered)) return std::nullopt;
  auto words = split_words(lowered);
  if (words.size() > kMaxSentenceWords) words.resize(kMaxSentenceWords);
  if (words.size() < kMinSentenceWords) return std::nullopt;
  PreprocessedText out;
  out.word_count = words.size();
  for (auto w : words) {
    if (!out.text.empty()) out.text.push_back(' ');
    out.text.append(w);
  }
  if (!has_alphabetic(out.text)) return std::nullopt;
  return out;
}

std::vector<Sentence> ingest_document(const RawDocument& doc, const Blacklist& blacklist) {
  std::vector<Sentence> out;
  for (const auto& segment : segment_document(doc.text)) {
    auto cleaned = preprocess_sentence(segment, blacklist);
    if (!cleaned) continue;
    out.push_back(Sentence{doc.doc_id, doc.meeting_date, out.size(), std::move(cleaned->text),
                           cleaned->word_count});
  }
  return out;
}

std::vector<Sentence> ingest_corpus(const std::vector<RawDocument>& docs, const Blacklist& blacklist,
                                    unsigned workers) {
  std::vector<std::vector<Sentence>> per_doc(docs.size());
  parallel_for(docs.size(), workers, [&](std::size_t i) { per_doc[i] = ingest_document(docs[i], blacklist); });
  std::vector<Sentence> out;
  for (auto& sentences : per_doc) {
    std::move(sentences.begin(), sentences.end(), std::back_inserter(out));
  }
  return out;
}

double median(std::vector<double> values) {
  if (values.empty()) throw NumericError("median of empty sample");
  std::sort(values.begin(), values.end());
  auto n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

CorpusStats corpus_stats(const std::vector<RawDocument>& docs, const std::vector<Sentence>& sentences) {
  if (docs.empty() || sentences.empty()) throw InputError("empty corpus");
  CorpusStats stats;
  stats.n_documents = docs.size();
  stats.n_sentences = sentences.size();
  std::vector<double> doc_lens, sent_lens;
  for (const auto& d : docs) {
    auto words = count_words(d.text);
    stats.n_words += words;
    doc_lens.push_back(static_cast<double>(words));
  }
  for (const auto& s : sentences) sent_lens.push_back(static_cast<double>(s.word_count));
  auto [dmin, dmax] = std::minmax_element(doc_lens.begin(), doc_lens.end());
  auto [smin, smax] = std::minmax_element(sent_lens.begin(), sent_lens.end());
  stats.doc_len_min = *dmin;
  stats.doc_len_max = *dmax;
  stats.sent_len_min = *smin;
  stats.sent_len_max = *smax;
  stats.doc_len_median = median(doc_lens);
  stats.sent_len_median = median(sent_lens);
  return stats;
}

std::string sentences_to_jsonl(const std::vector<Sentence>& sentences) {
  std::string out;
  for (const auto& s : sentences) {
    ordered_json j;
    j["doc_id"] = s.doc_id;
    j["date"] = format_iso_date(s.date);
    j["sent_index"] = s.sent_index;
    j["text"] = s.text;
    j["word_count"] = s.word_count;
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<Sentence> sentences_from_jsonl(std::string_view content) {
  std::vector<Sentence> out;
  std::size_t line_no = 0, start = 0;
  while (start < content.size()) {
    auto end = content.find('\n', start);
    if (end == std::string_view::npos) end = content.size();
    auto line = content.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (line.empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      auto date = parse_iso_date(j.at("date").get<std::string>());
      if (!date) throw InputError("bad date");
      out.push_back(Sentence{j.at("doc_id").get<std::string>(), *date, j.at("sent_index").get<std::size_t>(),
                             j.at("text").get<std::string>(), j.at("word_count").get<std::size_t>()});
    } catch (const std::exception& e) {
      throw InputError("sentences line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::string corpus_stats_to_json(const CorpusStats& s) {
  ordered_json j;
  j["n_documents"] = s.n_documents;
  j["n_sentences"] = s.n_sentences;
  j["n_words"] = s.n_words;
  j["doc_len"] = {{"max", s.doc_len_max}, {"median", s.doc_len_median}, {"min", s.doc_len_min}};
  j["sent_len"] = {{"max", s.sent_len_max}, {"median", s.sent_len_median}, {"min", s.sent_len_min}};
  return j.dump(2) + "\n";
}

}  // namespace fomc_absa
