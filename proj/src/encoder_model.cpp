#include "nlicf/encoder_model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "nlicf/rng.hpp"

namespace nlicf {

namespace {

std::string code_name(ModelError::Code c) {
  switch (c) {
    case ModelError::Code::EmptyPair: return "EmptyPair";
    case ModelError::Code::ZeroVector: return "ZeroVector";
    case ModelError::Code::ShapeMismatch: return "ShapeMismatch";
    case ModelError::Code::BadCheckpoint: return "BadCheckpoint";
    case ModelError::Code::NonFinite: return "NonFinite";
  }
  return "Unknown";
}

const std::array<std::string, 3> kReserved{"<pad>", "<sep>", "<unk>"};
constexpr std::array<const char*, 7> kBlockNames{"embedding", "w1", "b1", "w2",
                                                 "b2",        "wc", "bc"};

}  // namespace

ModelError::ModelError(Code code, const std::string& detail)
    : Error("encoder_model", code_name(code), detail), code_(code) {}

// ---------------------------------------------------------------- Vocab

Vocab::Vocab() {
  for (const auto& r : kReserved) add(r);
}

void Vocab::add(const std::string& token) {
  if (index_.emplace(token, tokens_.size()).second) tokens_.push_back(token);
}

Vocab Vocab::build(std::span<const SentencePair> pairs) {
  Vocab v;
  for (const auto& p : pairs) {
    for (const auto& t : tokenize(p.premise)) v.add(t);
    for (const auto& t : tokenize(p.hypothesis)) v.add(t);
  }
  return v;
}

Vocab Vocab::from_tokens(std::vector<std::string> tokens) {
  if (tokens.size() < kReserved.size() ||
      !std::equal(kReserved.begin(), kReserved.end(), tokens.begin())) {
    throw ModelError(ModelError::Code::BadCheckpoint, "vocab must start with reserved tokens");
  }
  Vocab v;
  for (std::size_t i = kReserved.size(); i < tokens.size(); ++i) {
    if (v.index_.contains(tokens[i])) {
      throw ModelError(ModelError::Code::BadCheckpoint, "duplicate vocab token " + tokens[i]);
    }
    v.add(tokens[i]);
  }
  return v;
}

std::size_t Vocab::index(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? kUnk : it->second;
}

std::vector<std::size_t> Vocab::encode_pair(const SentencePair& pair) const {
  const auto p = tokenize(pair.premise);
  const auto h = tokenize(pair.hypothesis);
  if (p.empty() && h.empty()) {
    throw ModelError(ModelError::Code::EmptyPair, "both sentences tokenize to nothing");
  }
  std::vector<std::size_t> ids;
  ids.reserve(p.size() + h.size() + 1);
  for (const auto& t : p) ids.push_back(index(t));
  ids.push_back(kSep);
  for (const auto& t : h) ids.push_back(index(t));
  return ids;
}

// ---------------------------------------------------------------- params

EncoderParams EncoderParams::zeros(std::size_t vocab_size, const Dims& d) {
  EncoderParams p;
  p.embedding = Matrix(vocab_size, d.embed);
  p.w1 = Matrix(d.embed, d.hidden);
  p.b1.assign(d.hidden, 0.0);
  p.w2 = Matrix(d.hidden, d.proj);
  p.b2.assign(d.proj, 0.0);
  p.wc = Matrix(d.proj, kNumClasses);
  p.bc.assign(kNumClasses, 0.0);
  return p;
}

EncoderParams EncoderParams::init_uniform(std::size_t vocab_size, const Dims& d,
                                          std::uint64_t seed) {
  EncoderParams p = zeros(vocab_size, d);
  Rng rng(seed);
  for (Matrix* m : {&p.embedding, &p.w1, &p.w2, &p.wc}) {
    for (double& x : m->data) x = uniform(rng, -0.1, 0.1);
  }
  return p;
}

std::array<std::span<double>, 7> EncoderParams::blocks() {
  return {std::span<double>(embedding.data), std::span<double>(w1.data), std::span<double>(b1),
          std::span<double>(w2.data),        std::span<double>(b2),      std::span<double>(wc.data),
          std::span<double>(bc)};
}

std::array<std::span<const double>, 7> EncoderParams::blocks() const {
  return {std::span<const double>(embedding.data), std::span<const double>(w1.data),
          std::span<const double>(b1),             std::span<const double>(w2.data),
          std::span<const double>(b2),             std::span<const double>(wc.data),
          std::span<const double>(bc)};
}

std::size_t EncoderParams::parameter_count() const {
  std::size_t n = 0;
  for (auto b : blocks()) n += b.size();
  return n;
}

bool EncoderParams::all_finite() const {
  for (auto b : blocks()) {
    for (double x : b) {
      if (!std::isfinite(x)) return false;
    }
  }
  return true;
}

void EncoderParams::sgd_step(const EncoderParams& grads, double lr) {
  auto dst = blocks();
  const auto src = grads.blocks();
  for (std::size_t b = 0; b < dst.size(); ++b) {
    if (dst[b].size() != src[b].size()) {
      throw ModelError(ModelError::Code::ShapeMismatch, "gradient shape differs from params");
    }
    for (std::size_t i = 0; i < dst[b].size(); ++i) dst[b][i] -= lr * src[b][i];
  }
}

std::uint64_t EncoderParams::checksum() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (auto b : blocks()) {
    for (double x : b) {
      auto bits = std::bit_cast<std::uint64_t>(x);
      for (int k = 0; k < 8; ++k) {
        h ^= (bits >> (8 * k)) & 0xffU;
        h *= 0x100000001b3ULL;
      }
    }
  }
  return h;
}

// ---------------------------------------------------------------- gradients

Gradients::Gradients(std::size_t vocab_size, const Dims& dims)
    : g_(EncoderParams::zeros(vocab_size, dims)), flag_(vocab_size, 0) {}

std::span<double> Gradients::embedding_row(std::size_t r) {
  if (!flag_[r]) {
    flag_[r] = 1;
    touched_.push_back(r);
  }
  return g_.embedding.row(r);
}

void Gradients::scale(double k) {
  for (std::size_t r : touched_) {
    for (double& x : g_.embedding.row(r)) x *= k;
  }
  auto blocks = g_.blocks();
  for (std::size_t b = 1; b < blocks.size(); ++b) {
    for (double& x : blocks[b]) x *= k;
  }
}

void Gradients::zero() {
  for (std::size_t r : touched_) {
    std::fill(g_.embedding.row(r).begin(), g_.embedding.row(r).end(), 0.0);
    flag_[r] = 0;
  }
  touched_.clear();
  auto blocks = g_.blocks();
  for (std::size_t b = 1; b < blocks.size(); ++b) std::fill(blocks[b].begin(), blocks[b].end(), 0.0);
}

void Gradients::add(const Gradients& other) {
  for (std::size_t r : other.touched_) {
    auto dst = embedding_row(r);
    const auto src = other.g_.embedding.row(r);
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
  }
  auto dst = g_.blocks();
  const auto src = other.g_.blocks();
  for (std::size_t b = 1; b < dst.size(); ++b) {
    for (std::size_t i = 0; i < dst[b].size(); ++i) dst[b][i] += src[b][i];
  }
}

void Gradients::apply_sgd(EncoderParams& params, double lr) const {
  for (std::size_t r : touched_) {
    auto p = params.embedding.row(r);
    const auto g = g_.embedding.row(r);
    for (std::size_t i = 0; i < p.size(); ++i) p[i] -= lr * g[i];
  }
  auto dst = params.blocks();
  const auto src = g_.blocks();
  for (std::size_t b = 1; b < dst.size(); ++b) {
    for (std::size_t i = 0; i < dst[b].size(); ++i) dst[b][i] -= lr * src[b][i];
  }
}

// ---------------------------------------------------------------- forward/backward

PairEmbedding encode_ids(const EncoderParams& params, std::vector<std::size_t> ids) {
  if (ids.empty()) throw ModelError(ModelError::Code::EmptyPair, "no tokens");
  const Dims d = params.dims();
  PairEmbedding e;
  e.ids = std::move(ids);
  e.pooled.assign(d.embed, 0.0);
  for (std::size_t id : e.ids) {
    const auto row = params.embedding.row(id);
    for (std::size_t k = 0; k < d.embed; ++k) e.pooled[k] += row[k];
  }
  const double inv_n = 1.0 / static_cast<double>(e.ids.size());
  for (double& x : e.pooled) x *= inv_n;

  e.hidden = params.b1;
  for (std::size_t i = 0; i < d.embed; ++i) {
    const double x = e.pooled[i];
    const auto w = params.w1.row(i);
    for (std::size_t j = 0; j < d.hidden; ++j) e.hidden[j] += x * w[j];
  }
  for (double& x : e.hidden) x = std::tanh(x);

  e.z = params.b2;
  for (std::size_t i = 0; i < d.hidden; ++i) {
    const double x = e.hidden[i];
    const auto w = params.w2.row(i);
    for (std::size_t j = 0; j < d.proj; ++j) e.z[j] += x * w[j];
  }
  return e;
}

PairEmbedding encode(const EncoderParams& params, const Vocab& vocab, const SentencePair& pair) {
  return encode_ids(params, vocab.encode_pair(pair));
}

std::array<double, 3> classify(const EncoderParams& params, const PairEmbedding& emb) {
  std::array<double, 3> out{params.bc[0], params.bc[1], params.bc[2]};
  for (std::size_t i = 0; i < emb.z.size(); ++i) {
    for (std::size_t c = 0; c < kNumClasses; ++c) out[c] += emb.z[i] * params.wc(i, c);
  }
  return out;
}

std::array<double, 3> softmax(const std::array<double, 3>& logits) {
  const double m = std::max({logits[0], logits[1], logits[2]});
  std::array<double, 3> p{};
  double sum = 0.0;
  for (std::size_t c = 0; c < 3; ++c) sum += (p[c] = std::exp(logits[c] - m));
  for (double& x : p) x /= sum;
  return p;
}

void backward_embedding(const EncoderParams& params, const PairEmbedding& emb,
                        std::span<const double> dz, Gradients& grads) {
  const Dims d = params.dims();
  EncoderParams& g = grads.values();

  for (std::size_t j = 0; j < d.proj; ++j) g.b2[j] += dz[j];
  std::vector<double> da(d.hidden, 0.0);
  for (std::size_t i = 0; i < d.hidden; ++i) {
    const auto w = params.w2.row(i);
    auto gw = g.w2.row(i);
    double dh = 0.0;
    for (std::size_t j = 0; j < d.proj; ++j) {
      gw[j] += emb.hidden[i] * dz[j];
      dh += w[j] * dz[j];
    }
    da[i] = dh * (1.0 - emb.hidden[i] * emb.hidden[i]);
  }

  for (std::size_t j = 0; j < d.hidden; ++j) g.b1[j] += da[j];
  std::vector<double> dpooled(d.embed, 0.0);
  for (std::size_t i = 0; i < d.embed; ++i) {
    const auto w = params.w1.row(i);
    auto gw = g.w1.row(i);
    double acc = 0.0;
    for (std::size_t j = 0; j < d.hidden; ++j) {
      gw[j] += emb.pooled[i] * da[j];
      acc += w[j] * da[j];
    }
    dpooled[i] = acc;
  }

  const double inv_n = 1.0 / static_cast<double>(emb.ids.size());
  for (std::size_t id : emb.ids) {
    auto row = grads.embedding_row(id);
    for (std::size_t k = 0; k < d.embed; ++k) row[k] += dpooled[k] * inv_n;
  }
}

std::vector<double> backward_classifier(const EncoderParams& params, const PairEmbedding& emb,
                                        const std::array<double, 3>& dlogits, Gradients& grads) {
  EncoderParams& g = grads.values();
  std::vector<double> dz(emb.z.size(), 0.0);
  for (std::size_t c = 0; c < kNumClasses; ++c) g.bc[c] += dlogits[c];
  for (std::size_t i = 0; i < emb.z.size(); ++i) {
    for (std::size_t c = 0; c < kNumClasses; ++c) {
      g.wc(i, c) += emb.z[i] * dlogits[c];
      dz[i] += params.wc(i, c) * dlogits[c];
    }
  }
  return dz;
}

namespace {

struct CosParts {
  double dot = 0.0, na = 0.0, nb = 0.0;
};

CosParts cos_parts(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ModelError(ModelError::Code::ShapeMismatch, "cosine of unequal lengths");
  CosParts p;
  for (std::size_t i = 0; i < a.size(); ++i) {
    p.dot += a[i] * b[i];
    p.na += a[i] * a[i];
    p.nb += b[i] * b[i];
  }
  p.na = std::sqrt(p.na);
  p.nb = std::sqrt(p.nb);
  if (p.na < 1e-12 || p.nb < 1e-12) throw ModelError(ModelError::Code::ZeroVector, "zero-norm vector");
  return p;
}

}  // namespace

double cosine_sim(std::span<const double> a, std::span<const double> b) {
  const auto p = cos_parts(a, b);
  return std::clamp(p.dot / (p.na * p.nb), -1.0, 1.0);
}

double cosine_sim_grad(std::span<const double> a, std::span<const double> b,
                       std::span<double> da, std::span<double> db) {
  const auto p = cos_parts(a, b);
  const double inv = 1.0 / (p.na * p.nb);
  const double s = p.dot * inv;
  for (std::size_t i = 0; i < a.size(); ++i) {
    da[i] = b[i] * inv - s * a[i] / (p.na * p.na);
    db[i] = a[i] * inv - s * b[i] / (p.nb * p.nb);
  }
  return std::clamp(s, -1.0, 1.0);
}

std::array<double, 3> Model::logits(const SentencePair& pair) const {
  return classify(params, encode(params, vocab, pair));
}

std::array<double, 3> Model::probabilities(const SentencePair& pair) const {
  return softmax(logits(pair));
}

// ---------------------------------------------------------------- checkpoint

void save_checkpoint(std::ostream& out, const Model& model) {
  const Dims d = model.params.dims();
  out << "nlicf-checkpoint 1\n";
  out << "dims " << model.vocab.size() << ' ' << d.embed << ' ' << d.hidden << ' ' << d.proj
      << ' ' << kNumClasses << '\n';
  out << "vocab " << model.vocab.size() << '\n';
  for (const auto& t : model.vocab.tokens()) out << t << '\n';
  const auto blocks = model.params.blocks();
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    out << "block " << kBlockNames[b] << ' ' << blocks[b].size() << '\n';
    std::ostringstream line;
    line << std::hexfloat;
    for (std::size_t i = 0; i < blocks[b].size(); ++i) {
      line << blocks[b][i] << ((i + 1) % 8 == 0 || i + 1 == blocks[b].size() ? '\n' : ' ');
    }
    out << line.str();
  }
  out << "end\n";
}

Model load_checkpoint(std::istream& in) {
  auto bad = [](const std::string& what) -> ModelError {
    return ModelError(ModelError::Code::BadCheckpoint, what);
  };
  std::string word;
  int version = 0;
  if (!(in >> word >> version) || word != "nlicf-checkpoint" || version != 1) {
    throw bad("missing or unsupported header");
  }
  std::size_t v = 0, classes = 0;
  Dims d;
  if (!(in >> word >> v >> d.embed >> d.hidden >> d.proj >> classes) || word != "dims" ||
      classes != kNumClasses || d.embed == 0 || d.hidden == 0 || d.proj == 0) {
    throw bad("bad dims line");
  }
  std::size_t nv = 0;
  if (!(in >> word >> nv) || word != "vocab" || nv != v) throw bad("bad vocab line");
  std::vector<std::string> tokens(nv);
  for (auto& t : tokens) {
    if (!(in >> t)) throw bad("truncated vocab");
  }
  Model m;
  m.vocab = Vocab::from_tokens(std::move(tokens));
  m.params = EncoderParams::zeros(v, d);
  auto blocks = m.params.blocks();
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    std::size_t n = 0;
    if (!(in >> word) || word != "block" || !(in >> word) || word != kBlockNames[b] || !(in >> n) ||
        n != blocks[b].size()) {
      throw bad(std::string("bad header for block ") + kBlockNames[b]);
    }
    for (double& x : blocks[b]) {
      if (!(in >> word)) throw bad("truncated block");
      char* end = nullptr;
      x = std::strtod(word.c_str(), &end);
      if (end != word.c_str() + word.size()) throw bad("bad number '" + word + "'");
    }
  }
  if (!(in >> word) || word != "end") throw bad("missing end marker");
  if (!m.params.all_finite()) throw ModelError(ModelError::Code::NonFinite, "non-finite parameter");
  return m;
}

void save_checkpoint_file(const std::string& path, const Model& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("encoder_model", "Io", "cannot write " + path);
  save_checkpoint(out, model);
}

Model load_checkpoint_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("encoder_model", "Io", "cannot open " + path);
  return load_checkpoint(in);
}

}  // namespace nlicf
