#include "rnnalg/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include <json.hpp>

namespace rnnalg {

namespace {

const std::vector<std::string>& emoticons() {
  // Matched against lowercased text, so upper-case variants appear lowered.
  static const std::vector<std::string> list = {
      ":-)", ":-(", ":-d", ":-p", ";-)", ":')", ":'(", "<3",
      ":)",  ":(",  ":d",  ":p",  ";)",  ":/", ":o",  "=)",  "=(",
  };
  return list;
}

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)); }

bool is_word_char(char c) {
  unsigned char u = static_cast<unsigned char>(c);
  return std::isalnum(u) || c == '_' || c == '\'' || u >= 0x80;
}

bool has_prefix(const std::string& s, size_t pos, const char* prefix) {
  size_t len = std::strlen(prefix);
  return s.compare(pos, len, prefix) == 0;
}

size_t match_emoticon(const std::string& s, size_t pos) {
  for (const auto& e : emoticons()) {
    if (s.compare(pos, e.size(), e) == 0) {
      // Emoticons end at a boundary; ":)x" is punctuation plus a word.
      size_t end = pos + e.size();
      if (end == s.size() || is_space(s[end]) || !is_word_char(s[end])) {
        return e.size();
      }
    }
  }
  return 0;
}

}  // namespace

std::vector<std::string> tokenize(const std::string& text) {
  std::string lower = text;
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) {
    return char(std::tolower(c));
  });

  std::vector<std::string> out;
  size_t i = 0;
  const size_t n = lower.size();
  while (i < n) {
    if (is_space(lower[i])) {
      ++i;
      continue;
    }
    if (has_prefix(lower, i, "http://") || has_prefix(lower, i, "https://") ||
        has_prefix(lower, i, "www.")) {
      while (i < n && !is_space(lower[i])) ++i;
      out.push_back("<url>");
      continue;
    }
    if (size_t len = match_emoticon(lower, i); len > 0) {
      out.push_back(lower.substr(i, len));
      i += len;
      continue;
    }
    if ((lower[i] == '@' || lower[i] == '#') && i + 1 < n &&
        is_word_char(lower[i + 1])) {
      size_t j = i + 1;
      while (j < n && is_word_char(lower[j])) ++j;
      out.push_back(lower.substr(i, j - i));
      i = j;
      continue;
    }
    if (is_word_char(lower[i])) {
      size_t j = i;
      while (j < n && is_word_char(lower[j])) ++j;
      out.push_back(lower.substr(i, j - i));
      i = j;
      continue;
    }
    // Punctuation run: one token per character.
    out.push_back(lower.substr(i, 1));
    ++i;
  }
  return out;
}

Vocabulary Vocabulary::build(const std::vector<LabeledDocument>& docs,
                             int min_count) {
  if (min_count < 1) throw ConfigError("vocabulary: min_count must be >= 1");
  Vocabulary v;
  v.min_count_ = min_count;
  v.id_to_token_ = {kPadToken, kUnkToken};
  v.token_to_id_ = {{kPadToken, kPadId}, {kUnkToken, kUnkId}};

  std::unordered_map<std::string, int> counts;
  std::vector<const std::string*> order;
  for (const auto& doc : docs) {
    for (const auto& tok : doc.tokens) {
      auto [it, fresh] = counts.try_emplace(tok, 0);
      if (fresh) order.push_back(&it->first);
      ++it->second;
    }
  }
  for (const std::string* tok : order) {
    if (counts[*tok] >= min_count) {
      v.token_to_id_.emplace(*tok, int(v.id_to_token_.size()));
      v.id_to_token_.push_back(*tok);
    }
  }
  return v;
}

int Vocabulary::encode(const std::string& token) const {
  auto it = token_to_id_.find(token);
  return it == token_to_id_.end() ? kUnkId : it->second;
}

const std::string& Vocabulary::decode(int id) const {
  if (id < 0 || id >= size()) {
    throw IndexError("vocabulary: id " + std::to_string(id) + " out of range");
  }
  return id_to_token_[id];
}

bool Vocabulary::contains(const std::string& token) const {
  return token_to_id_.count(token) > 0;
}

uint64_t Vocabulary::digest() const {
  uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](const std::string& s) {
    for (char c : s) {
      h ^= uint64_t(static_cast<unsigned char>(c));
      h *= 0x100000001b3ULL;
    }
    h ^= uint64_t('\n');
    h *= 0x100000001b3ULL;
  };
  for (const auto& tok : id_to_token_) mix(tok);
  return h;
}

void Vocabulary::save_json(const std::string& path) const {
  nlohmann::json j = nlohmann::json::object();
  for (int id = 0; id < size(); ++id) j[id_to_token_[id]] = id;
  std::ofstream f(path);
  if (!f) throw FormatError("vocabulary: cannot write " + path);
  f << j.dump(2) << "\n";
}

Vocabulary Vocabulary::load_json(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw FormatError("vocabulary: cannot read " + path);
  nlohmann::json j;
  try {
    f >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("vocabulary: " + path + ": " + e.what());
  }
  Vocabulary v;
  v.id_to_token_.resize(j.size());
  for (auto it = j.begin(); it != j.end(); ++it) {
    int id = it.value().get<int>();
    if (id < 0 || id >= int(j.size())) {
      throw FormatError("vocabulary: id " + std::to_string(id) +
                        " out of range in " + path);
    }
    v.id_to_token_[id] = it.key();
    v.token_to_id_[it.key()] = id;
  }
  if (v.size() < 2 || v.id_to_token_[0] != kPadToken ||
      v.id_to_token_[1] != kUnkToken) {
    throw FormatError("vocabulary: " + path + " lacks pad/unk specials");
  }
  return v;
}

CorpusSplits split_corpus(const std::vector<LabeledDocument>& docs,
                          uint64_t seed, std::array<double, 3> fractions) {
  double sum = 0.0;
  for (double f : fractions) {
    if (f < 0.0) throw ConfigError("split: negative fraction");
    sum += f;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw ConfigError("split: fractions sum to " + std::to_string(sum));
  }
  std::vector<size_t> idx(docs.size());
  for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  SeededRng rng(SeededRng::derive(seed, {0x5p117u}));
  rng.shuffle(idx);

  const size_t n = docs.size();
  size_t n_val = size_t(std::llround(double(n) * fractions[1]));
  size_t n_test = size_t(std::llround(double(n) * fractions[2]));
  if (n_val + n_test > n) throw ConfigError("split: fractions overflow corpus");
  size_t n_train = n - n_val - n_test;

  CorpusSplits s;
  s.train.reserve(n_train);
  s.validation.reserve(n_val);
  s.test.reserve(n_test);
  size_t k = 0;
  for (; k < n_train; ++k) s.train.push_back(docs[idx[k]]);
  for (; k < n_train + n_val; ++k) s.validation.push_back(docs[idx[k]]);
  for (; k < n; ++k) s.test.push_back(docs[idx[k]]);
  return s;
}

EncodedDoc encode_doc(const LabeledDocument& doc, const Vocabulary& vocab) {
  EncodedDoc e;
  e.label = doc.label;
  e.ids.reserve(doc.tokens.size());
  for (const auto& tok : doc.tokens) e.ids.push_back(vocab.encode(tok));
  return e;
}

std::vector<EncodedDoc> encode_docs(const std::vector<LabeledDocument>& docs,
                                    const Vocabulary& vocab) {
  std::vector<EncodedDoc> out;
  out.reserve(docs.size());
  for (const auto& d : docs) out.push_back(encode_doc(d, vocab));
  return out;
}

std::vector<EncodedBatch> encode_batches(
    const std::vector<LabeledDocument>& docs, const Vocabulary& vocab,
    int batch_size) {
  if (batch_size < 1) throw ConfigError("encode_batches: batch_size must be >= 1");
  std::vector<EncodedBatch> out;
  for (size_t start = 0; start < docs.size(); start += size_t(batch_size)) {
    size_t end = std::min(docs.size(), start + size_t(batch_size));
    EncodedBatch b;
    b.rows = int(end - start);
    for (size_t i = start; i < end; ++i) {
      b.max_len = std::max(b.max_len, int(docs[i].tokens.size()));
    }
    b.ids.assign(size_t(b.rows) * size_t(b.max_len), Vocabulary::kPadId);
    for (size_t i = start; i < end; ++i) {
      const auto& toks = docs[i].tokens;
      int r = int(i - start);
      for (size_t t = 0; t < toks.size(); ++t) {
        b.ids[size_t(r) * b.max_len + t] = vocab.encode(toks[t]);
      }
      b.lengths.push_back(int(toks.size()));
      b.labels.push_back(docs[i].label);
    }
    out.push_back(std::move(b));
  }
  return out;
}

std::vector<LabeledDocument> synthesize_corpus(uint64_t seed, int classes,
                                               int docs_per_class,
                                               int vocab_size, int len_lo,
                                               int len_hi) {
  if (classes < 2) throw ConfigError("synthesize: need at least 2 classes");
  if (docs_per_class < 1 || vocab_size < classes || len_lo < 1 ||
      len_hi < len_lo) {
    throw ConfigError("synthesize: bad corpus parameters");
  }
  int width = 1;
  for (int v = vocab_size - 1; v >= 10; v /= 10) ++width;
  auto word = [width](int i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "w%0*d", width, i);
    return std::string(buf);
  };

  SeededRng rng(SeededRng::derive(seed, {0xc0fu}));
  const int band = std::max(1, vocab_size / classes);
  std::vector<LabeledDocument> docs;
  docs.reserve(size_t(classes) * size_t(docs_per_class));
  for (int c = 0; c < classes; ++c) {
    const int lo = (c * band) % vocab_size;
    for (int d = 0; d < docs_per_class; ++d) {
      LabeledDocument doc;
      doc.label = c;
      int len = len_lo + int(rng.index(size_t(len_hi - len_lo + 1)));
      for (int t = 0; t < len; ++t) {
        int tok;
        if (rng.uniform() < 0.8) {
          tok = lo + int(rng.index(size_t(band)));
        } else {
          tok = int(rng.index(size_t(vocab_size)));
        }
        doc.tokens.push_back(word(tok));
      }
      docs.push_back(std::move(doc));
    }
  }
  return docs;
}

std::vector<LabeledDocument> load_corpus_jsonl(const std::string& path,
                                               int* skipped) {
  std::ifstream f(path);
  if (!f) throw FormatError("corpus: cannot read " + path);
  std::vector<LabeledDocument> docs;
  std::string line;
  int lineno = 0;
  int dropped = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("corpus: " + path + ":" + std::to_string(lineno) +
                        ": " + e.what());
    }
    if (!j.contains("text") || !j.contains("label")) {
      throw FormatError("corpus: " + path + ":" + std::to_string(lineno) +
                        ": need text and label fields");
    }
    int label = j["label"].get<int>();
    if (label < 0) {
      throw FormatError("corpus: " + path + ":" + std::to_string(lineno) +
                        ": negative label");
    }
    LabeledDocument doc;
    doc.label = label;
    doc.tokens = tokenize(j["text"].get<std::string>());
    if (doc.tokens.empty()) {
      ++dropped;
      continue;
    }
    docs.push_back(std::move(doc));
  }
  if (skipped) *skipped = dropped;
  return docs;
}

void save_corpus_jsonl(const std::string& path,
                       const std::vector<LabeledDocument>& docs) {
  std::ofstream f(path);
  if (!f) throw FormatError("corpus: cannot write " + path);
  for (const auto& doc : docs) {
    std::string text;
    for (size_t i = 0; i < doc.tokens.size(); ++i) {
      if (i) text += ' ';
      text += doc.tokens[i];
    }
    nlohmann::json j{{"text", text}, {"label", doc.label}};
    f << j.dump() << "\n";
  }
}

int class_count(const std::vector<LabeledDocument>& docs) {
  int c = 0;
  for (const auto& d : docs) c = std::max(c, d.label + 1);
  return c;
}

}  // namespace rnnalg
