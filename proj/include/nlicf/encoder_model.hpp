#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "nlicf/error.hpp"
#include "nlicf/nli_corpus.hpp"

namespace nlicf {

class ModelError : public Error {
 public:
  enum class Code { EmptyPair, ZeroVector, ShapeMismatch, BadCheckpoint, NonFinite };
  ModelError(Code code, const std::string& detail);
  Code code_kind() const noexcept { return code_; }

 private:
  Code code_;
};

class Vocab {
 public:
  static constexpr std::size_t kPad = 0;
  static constexpr std::size_t kSep = 1;
  static constexpr std::size_t kUnk = 2;

  Vocab();
  // Tokens in order of first appearance (premise, then hypothesis, per pair).
  static Vocab build(std::span<const SentencePair> pairs);
  static Vocab from_tokens(std::vector<std::string> tokens);  // reserved ones first

  std::size_t index(std::string_view token) const;  // kUnk if absent
  std::size_t size() const noexcept { return tokens_.size(); }
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }

  // tokenize(premise) ++ [sep] ++ tokenize(hypothesis) as indices.
  std::vector<std::size_t> encode_pair(const SentencePair& pair) const;

  bool operator==(const Vocab& o) const { return tokens_ == o.tokens_; }

 private:
  void add(const std::string& token);
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct Dims {
  std::size_t embed = 64;
  std::size_t hidden = 64;
  std::size_t proj = 32;
  bool operator==(const Dims&) const = default;
};

inline constexpr std::size_t kNumClasses = 3;

// Row-major dense matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
  std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }

  bool operator==(const Matrix&) const = default;
};

// Embedding table, tanh hidden layer, linear projection to the pair
// embedding z, and a 3-way linear classifier head on z.
struct EncoderParams {
  Matrix embedding;  // |V| x embed
  Matrix w1;         // embed x hidden
  std::vector<double> b1;
  Matrix w2;  // hidden x proj
  std::vector<double> b2;
  Matrix wc;  // proj x 3
  std::vector<double> bc;

  static EncoderParams zeros(std::size_t vocab_size, const Dims& dims);
  // Weights and embeddings ~ U(-0.1, 0.1), biases zero.
  static EncoderParams init_uniform(std::size_t vocab_size, const Dims& dims, std::uint64_t seed);

  Dims dims() const { return {w1.rows, w1.cols, w2.cols}; }
  std::size_t vocab_size() const { return embedding.rows; }

  // Parameter blocks in a fixed order: embedding, w1, b1, w2, b2, wc, bc.
  std::array<std::span<double>, 7> blocks();
  std::array<std::span<const double>, 7> blocks() const;
  std::size_t parameter_count() const;
  bool all_finite() const;

  // p <- p - lr * g, elementwise.
  void sgd_step(const EncoderParams& grads, double lr);

  // FNV-1a over the little-endian bytes of every parameter, block order.
  std::uint64_t checksum() const;

  bool operator==(const EncoderParams&) const = default;
};

// Gradient accumulator shaped like EncoderParams. Tracks which embedding rows
// were touched so zeroing and updates skip the rest of the table.
class Gradients {
 public:
  Gradients() = default;
  Gradients(std::size_t vocab_size, const Dims& dims);

  EncoderParams& values() noexcept { return g_; }
  const EncoderParams& values() const noexcept { return g_; }
  std::span<double> embedding_row(std::size_t r);
  const std::vector<std::size_t>& touched_rows() const noexcept { return touched_; }

  void scale(double k);
  void zero();
  void add(const Gradients& other);
  void apply_sgd(EncoderParams& params, double lr) const;

 private:
  EncoderParams g_;
  std::vector<std::size_t> touched_;
  std::vector<char> flag_;
};

// Forward pass of one pair, with the intermediates backprop needs.
struct PairEmbedding {
  std::vector<std::size_t> ids;
  std::vector<double> pooled;  // mean of token embeddings
  std::vector<double> hidden;  // tanh(pooled W1 + b1)
  std::vector<double> z;       // hidden W2 + b2
};

PairEmbedding encode_ids(const EncoderParams& params, std::vector<std::size_t> ids);
PairEmbedding encode(const EncoderParams& params, const Vocab& vocab, const SentencePair& pair);

std::array<double, 3> classify(const EncoderParams& params, const PairEmbedding& emb);
std::array<double, 3> softmax(const std::array<double, 3>& logits);

// Accumulates d loss / d params given d loss / d z.
void backward_embedding(const EncoderParams& params, const PairEmbedding& emb,
                        std::span<const double> dz, Gradients& grads);
// Accumulates head gradients given d loss / d logits and returns d loss / d z.
std::vector<double> backward_classifier(const EncoderParams& params, const PairEmbedding& emb,
                                        const std::array<double, 3>& dlogits, Gradients& grads);

// a.b / (|a||b|), clamped to [-1, 1]. Throws ZeroVector if a norm < 1e-12.
double cosine_sim(std::span<const double> a, std::span<const double> b);
// Same similarity, plus its gradient with respect to both inputs (unclamped).
double cosine_sim_grad(std::span<const double> a, std::span<const double> b,
                       std::span<double> da, std::span<double> db);

class PairClassifier {
 public:
  virtual ~PairClassifier() = default;
  virtual std::array<double, 3> probabilities(const SentencePair& pair) const = 0;
};

struct Model : PairClassifier {
  Vocab vocab;
  EncoderParams params;

  Model() = default;
  Model(Vocab v, EncoderParams p) : vocab(std::move(v)), params(std::move(p)) {}

  std::array<double, 3> logits(const SentencePair& pair) const;
  std::array<double, 3> probabilities(const SentencePair& pair) const override;
};

// Text checkpoint: header, vocab, then each block as hexfloats. Reloading
// reproduces every parameter bit for bit.
void save_checkpoint(std::ostream& out, const Model& model);
Model load_checkpoint(std::istream& in);
void save_checkpoint_file(const std::string& path, const Model& model);
Model load_checkpoint_file(const std::string& path);

}  // namespace nlicf
