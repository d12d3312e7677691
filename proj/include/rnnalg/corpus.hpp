#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "rnnalg/errors.hpp"
#include "rnnalg/rng.hpp"

namespace rnnalg {

// Tokens are normalized in place by tokenize(): non-empty, lowercase, no
// surrounding whitespace.
struct LabeledDocument {
  std::vector<std::string> tokens;
  int label = 0;
};

// Rule-based tokenizer, applied in order:
//   1. lowercase (ASCII),
//   2. URLs (http://, https://, www.) collapse to "<url>",
//   3. @mentions and #hashtags stay single tokens,
//   4. known emoticons (fixed list) stay whole,
//   5. punctuation runs split into single-character tokens,
//   6. remaining text splits on whitespace.
std::vector<std::string> tokenize(const std::string& text);

class Vocabulary {
 public:
  static constexpr int kPadId = 0;
  static constexpr int kUnkId = 1;
  static constexpr const char* kPadToken = "<pad>";
  static constexpr const char* kUnkToken = "<unk>";

  // Tokens occurring fewer than min_count times across docs get no id and
  // encode to unk.  Ids are dense and assigned in first-occurrence order.
  static Vocabulary build(const std::vector<LabeledDocument>& docs,
                          int min_count = 5);

  int encode(const std::string& token) const;
  const std::string& decode(int id) const;
  bool contains(const std::string& token) const;
  int size() const { return int(id_to_token_.size()); }
  int min_count() const { return min_count_; }

  // FNV-1a over the id-ordered token list; pins checkpoints to their vocab.
  uint64_t digest() const;

  void save_json(const std::string& path) const;        // {token: id}
  static Vocabulary load_json(const std::string& path);

 private:
  std::unordered_map<std::string, int> token_to_id_;
  std::vector<std::string> id_to_token_;
  int min_count_ = 1;
};

struct EncodedDoc {
  std::vector<int> ids;
  int label = 0;
};

// B x T id grid, right-padded per batch with pad_id.
struct EncodedBatch {
  int rows = 0;
  int max_len = 0;
  std::vector<int> ids;      // row-major rows x max_len
  std::vector<int> lengths;  // true length per row
  std::vector<int> labels;

  int id_at(int r, int t) const { return ids[size_t(r) * max_len + t]; }
};

struct CorpusSplits {
  std::vector<LabeledDocument> train, validation, test;
};

// Deterministic shuffle + split.  fractions must be non-negative and sum to
// 1 within 1e-9; validation/test sizes round to nearest and train absorbs
// the remainder.
CorpusSplits split_corpus(const std::vector<LabeledDocument>& docs,
                          uint64_t seed, std::array<double, 3> fractions);

EncodedDoc encode_doc(const LabeledDocument& doc, const Vocabulary& vocab);
std::vector<EncodedDoc> encode_docs(const std::vector<LabeledDocument>& docs,
                                    const Vocabulary& vocab);
std::vector<EncodedBatch> encode_batches(
    const std::vector<LabeledDocument>& docs, const Vocabulary& vocab,
    int batch_size);

// Deterministic class-separable corpus: each class draws most tokens from
// its own band of the token universe, so a competent classifier clears 95%.
std::vector<LabeledDocument> synthesize_corpus(uint64_t seed, int classes,
                                               int docs_per_class,
                                               int vocab_size, int len_lo,
                                               int len_hi);

// JSON-lines loader, one {"text": ..., "label": ...} object per line.
// Documents whose text tokenizes to nothing are dropped; the count of
// dropped lines is returned through `skipped` when non-null.
std::vector<LabeledDocument> load_corpus_jsonl(const std::string& path,
                                               int* skipped = nullptr);
void save_corpus_jsonl(const std::string& path,
                       const std::vector<LabeledDocument>& docs);

// Number of classes implied by the labels (max label + 1).
int class_count(const std::vector<LabeledDocument>& docs);

}  // namespace rnnalg
