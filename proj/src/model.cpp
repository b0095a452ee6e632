#include "codeseq/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "codeseq/error.hpp"
#include "codeseq/vocab.hpp"

namespace codeseq {

using nn::Mat;
using nn::Parameter;
using nn::Tape;
using nn::Var;

// ------------------------------------------------------------------ config

void ModelConfig::validate() const {
  if (layers < 1 || d_model < 1 || d_ff < 1 || heads < 1 || vocab_size < 1 || max_source_len < 1 ||
      max_target_len < 1) {
    throw ConfigError("model dimensions must be positive");
  }
  if (d_model % heads != 0) {
    throw ConfigError("d_model " + std::to_string(d_model) + " is not divisible by " +
                      std::to_string(heads) + " heads");
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must lie in [0, 1)");
  if (!(init_std > 0.0)) throw ConfigError("init_std must be positive");
}

ModelConfig ModelConfig::desk() { return ModelConfig{}; }

ModelConfig ModelConfig::paper() {
  ModelConfig c;
  c.layers = 12;
  c.d_model = 768;
  c.d_ff = 3072;
  c.heads = 12;
  c.dropout = 0.1;
  return c;
}

ModelConfig ModelConfig::preset(std::string_view name) {
  if (name == "desk") return desk();
  if (name == "paper") return paper();
  throw ConfigError("unknown model preset '" + std::string(name) + "'");
}

std::string ModelConfig::to_json() const {
  nlohmann::ordered_json j;
  j["layers"] = layers;
  j["d_model"] = d_model;
  j["d_ff"] = d_ff;
  j["heads"] = heads;
  j["dropout"] = dropout;
  j["vocab_size"] = vocab_size;
  j["max_source_len"] = max_source_len;
  j["max_target_len"] = max_target_len;
  j["seed"] = seed;
  j["init_std"] = init_std;
  return j.dump();
}

ModelConfig ModelConfig::from_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    ModelConfig c;
    c.layers = j.at("layers").get<int>();
    c.d_model = j.at("d_model").get<int>();
    c.d_ff = j.at("d_ff").get<int>();
    c.heads = j.at("heads").get<int>();
    c.dropout = j.at("dropout").get<double>();
    c.vocab_size = j.at("vocab_size").get<int>();
    c.max_source_len = j.at("max_source_len").get<int>();
    c.max_target_len = j.at("max_target_len").get<int>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.init_std = j.value("init_std", 0.02);
    c.validate();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed model config: ") + e.what());
  }
}

// ------------------------------------------------------------------- model

namespace {

Parameter make_param(std::string name, Eigen::Index rows, Eigen::Index cols, bool decay) {
  Parameter p;
  p.name = std::move(name);
  p.value = Mat::Zero(rows, cols);
  p.grad = Mat::Zero(rows, cols);
  p.decay = decay;
  return p;
}

Parameter normal_param(std::string name, Eigen::Index rows, Eigen::Index cols, double std, Rng& rng) {
  Parameter p = make_param(std::move(name), rows, cols, true);
  for (Eigen::Index i = 0; i < p.value.size(); ++i) p.value.data()[i] = std * rng.normal();
  return p;
}

Parameter ones_param(std::string name, Eigen::Index cols) {
  Parameter p = make_param(std::move(name), 1, cols, false);
  p.value.setOnes();
  return p;
}

Parameter zeros_param(std::string name, Eigen::Index cols) {
  return make_param(std::move(name), 1, cols, false);
}

std::vector<char> validity(const std::vector<int>& ids) {
  std::vector<char> v(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) v[i] = ids[i] != kPadId ? 1 : 0;
  return v;
}

constexpr char kMagic[8] = {'C', 'S', 'Q', 'C', 'K', 'P', 'T', '1'};

}  // namespace

Seq2SeqModel::Seq2SeqModel(const ModelConfig& config) : config_(config) {
  config_.validate();
  Rng rng(derive_seed(config_.seed, "init"));
  const int d = config_.d_model;
  embedding_ = normal_param("embedding", config_.vocab_size, d, config_.init_std, rng);
  positions_ = normal_param("positions", config_.positions(), d, config_.init_std, rng);
  out_bias_ = zeros_param("output.bias", config_.vocab_size);
  encoder_.resize(static_cast<std::size_t>(config_.layers));
  decoder_.resize(static_cast<std::size_t>(config_.layers));
  for (int l = 0; l < config_.layers; ++l) {
    init_block(encoder_[static_cast<std::size_t>(l)], "encoder." + std::to_string(l), false, rng);
  }
  for (int l = 0; l < config_.layers; ++l) {
    init_block(decoder_[static_cast<std::size_t>(l)], "decoder." + std::to_string(l), true, rng);
  }
  enc_ln_g_ = ones_param("encoder.ln.gamma", d);
  enc_ln_b_ = zeros_param("encoder.ln.beta", d);
  dec_ln_g_ = ones_param("decoder.ln.gamma", d);
  dec_ln_b_ = zeros_param("decoder.ln.beta", d);
  cls_w1_ = normal_param("classifier.dense.weight", d, d, config_.init_std, rng);
  cls_b1_ = zeros_param("classifier.dense.bias", d);
  cls_w2_ = normal_param("classifier.out.weight", d, 2, config_.init_std, rng);
  cls_b2_ = zeros_param("classifier.out.bias", 2);
}

void Seq2SeqModel::init_block(Block& b, const std::string& prefix, bool decoder, Rng& rng) {
  const int d = config_.d_model;
  const int f = config_.d_ff;
  b.ln1_g = ones_param(prefix + ".ln1.gamma", d);
  b.ln1_b = zeros_param(prefix + ".ln1.beta", d);
  b.q_w = normal_param(prefix + ".self.q.weight", d, d, config_.init_std, rng);
  b.q_b = zeros_param(prefix + ".self.q.bias", d);
  b.k_w = normal_param(prefix + ".self.k.weight", d, d, config_.init_std, rng);
  b.k_b = zeros_param(prefix + ".self.k.bias", d);
  b.v_w = normal_param(prefix + ".self.v.weight", d, d, config_.init_std, rng);
  b.v_b = zeros_param(prefix + ".self.v.bias", d);
  b.o_w = normal_param(prefix + ".self.o.weight", d, d, config_.init_std, rng);
  b.o_b = zeros_param(prefix + ".self.o.bias", d);
  b.ln2_g = ones_param(prefix + ".ln2.gamma", d);
  b.ln2_b = zeros_param(prefix + ".ln2.beta", d);
  if (decoder) {
    b.cq_w = normal_param(prefix + ".cross.q.weight", d, d, config_.init_std, rng);
    b.cq_b = zeros_param(prefix + ".cross.q.bias", d);
    b.ck_w = normal_param(prefix + ".cross.k.weight", d, d, config_.init_std, rng);
    b.ck_b = zeros_param(prefix + ".cross.k.bias", d);
    b.cv_w = normal_param(prefix + ".cross.v.weight", d, d, config_.init_std, rng);
    b.cv_b = zeros_param(prefix + ".cross.v.bias", d);
    b.co_w = normal_param(prefix + ".cross.o.weight", d, d, config_.init_std, rng);
    b.co_b = zeros_param(prefix + ".cross.o.bias", d);
    b.ln3_g = ones_param(prefix + ".ln3.gamma", d);
    b.ln3_b = zeros_param(prefix + ".ln3.beta", d);
  }
  b.ff1_w = normal_param(prefix + ".ff1.weight", d, f, config_.init_std, rng);
  b.ff1_b = zeros_param(prefix + ".ff1.bias", f);
  b.ff2_w = normal_param(prefix + ".ff2.weight", f, d, config_.init_std, rng);
  b.ff2_b = zeros_param(prefix + ".ff2.bias", d);
}

std::vector<Parameter*> Seq2SeqModel::block_parameters(Block& b, bool decoder) {
  std::vector<Parameter*> ps = {&b.ln1_g, &b.ln1_b, &b.q_w, &b.q_b, &b.k_w, &b.k_b, &b.v_w,
                                &b.v_b,   &b.o_w,   &b.o_b, &b.ln2_g, &b.ln2_b};
  if (decoder) {
    for (Parameter* p : {&b.cq_w, &b.cq_b, &b.ck_w, &b.ck_b, &b.cv_w, &b.cv_b, &b.co_w, &b.co_b,
                         &b.ln3_g, &b.ln3_b}) {
      ps.push_back(p);
    }
  }
  for (Parameter* p : {&b.ff1_w, &b.ff1_b, &b.ff2_w, &b.ff2_b}) ps.push_back(p);
  return ps;
}

std::vector<Parameter*> Seq2SeqModel::parameters() {
  std::vector<Parameter*> ps = {&embedding_, &positions_, &out_bias_};
  for (Block& b : encoder_) {
    for (Parameter* p : block_parameters(b, false)) ps.push_back(p);
  }
  ps.push_back(&enc_ln_g_);
  ps.push_back(&enc_ln_b_);
  for (Block& b : decoder_) {
    for (Parameter* p : block_parameters(b, true)) ps.push_back(p);
  }
  for (Parameter* p : {&dec_ln_g_, &dec_ln_b_, &cls_w1_, &cls_b1_, &cls_w2_, &cls_b2_}) ps.push_back(p);
  return ps;
}

std::vector<const Parameter*> Seq2SeqModel::parameters() const {
  auto ps = const_cast<Seq2SeqModel*>(this)->parameters();
  return {ps.begin(), ps.end()};
}

std::size_t Seq2SeqModel::parameter_count() const {
  std::size_t n = 0;
  for (const Parameter* p : parameters()) n += p->size();
  return n;
}

void Seq2SeqModel::zero_grad() {
  for (Parameter* p : parameters()) p->grad.setZero();
}

Var Seq2SeqModel::self_attention(Tape& t, Block& b, Var x, const std::vector<char>& valid,
                                 bool causal, Rng* rng) {
  const Var h = nn::layer_norm(t, x, b.ln1_g, b.ln1_b);
  const Var q = nn::linear(t, h, b.q_w, b.q_b);
  const Var k = nn::linear(t, h, b.k_w, b.k_b);
  const Var v = nn::linear(t, h, b.v_w, b.v_b);
  const Var a = nn::attention(t, q, k, v, config_.heads, causal, valid);
  const Var o = nn::linear(t, a, b.o_w, b.o_b);
  return nn::add(t, x, nn::dropout(t, o, config_.dropout, rng));
}

Var Seq2SeqModel::cross_attention(Tape& t, Block& b, Var x, Var memory,
                                  const std::vector<char>& memory_valid, Rng* rng) {
  const Var h = nn::layer_norm(t, x, b.ln3_g, b.ln3_b);
  const Var q = nn::linear(t, h, b.cq_w, b.cq_b);
  const Var k = nn::linear(t, memory, b.ck_w, b.ck_b);
  const Var v = nn::linear(t, memory, b.cv_w, b.cv_b);
  const Var a = nn::attention(t, q, k, v, config_.heads, false, memory_valid);
  const Var o = nn::linear(t, a, b.co_w, b.co_b);
  return nn::add(t, x, nn::dropout(t, o, config_.dropout, rng));
}

Var Seq2SeqModel::feed_forward(Tape& t, Block& b, Var x, Rng* rng) {
  const Var h = nn::layer_norm(t, x, b.ln2_g, b.ln2_b);
  const Var f = nn::linear(t, nn::gelu(t, nn::linear(t, h, b.ff1_w, b.ff1_b)), b.ff2_w, b.ff2_b);
  return nn::add(t, x, nn::dropout(t, f, config_.dropout, rng));
}

Var Seq2SeqModel::encode(Tape& t, const std::vector<int>& ids, Rng* rng) {
  if (ids.empty()) throw LengthError("empty encoder input");
  if (static_cast<int>(ids.size()) > config_.max_source_len) {
    throw LengthError("encoder input of " + std::to_string(ids.size()) + " ids exceeds " +
                      std::to_string(config_.max_source_len));
  }
  const std::vector<char> valid = validity(ids);
  Var x = nn::dropout(t, nn::embed(t, ids, embedding_, positions_), config_.dropout, rng);
  for (Block& b : encoder_) {
    x = self_attention(t, b, x, valid, false, rng);
    x = feed_forward(t, b, x, rng);
  }
  return nn::layer_norm(t, x, enc_ln_g_, enc_ln_b_);
}

Var Seq2SeqModel::decode(Tape& t, const std::vector<int>& ids, Var memory,
                         const std::vector<char>& memory_valid, Rng* rng) {
  if (ids.empty()) throw LengthError("empty decoder input");
  const std::vector<char> valid = validity(ids);
  Var x = nn::dropout(t, nn::embed(t, ids, embedding_, positions_), config_.dropout, rng);
  for (Block& b : decoder_) {
    x = self_attention(t, b, x, valid, true, rng);
    x = cross_attention(t, b, x, memory, memory_valid, rng);
    x = feed_forward(t, b, x, rng);
  }
  return nn::layer_norm(t, x, dec_ln_g_, dec_ln_b_);
}

Var Seq2SeqModel::generation_logits(Tape& t, const std::vector<int>& encoder_ids,
                                    const std::vector<int>& decoder_input_ids, Rng* rng) {
  if (static_cast<int>(decoder_input_ids.size()) > config_.max_target_len) {
    throw LengthError("decoder input of " + std::to_string(decoder_input_ids.size()) +
                      " ids exceeds " + std::to_string(config_.max_target_len));
  }
  const Var memory = encode(t, encoder_ids, rng);
  const Var y = decode(t, decoder_input_ids, memory, validity(encoder_ids), rng);
  return nn::tied_logits(t, y, embedding_, out_bias_);
}

Var Seq2SeqModel::representation(Tape& t, const std::vector<int>& ids, Rng* rng) {
  const Var memory = encode(t, ids, rng);
  std::vector<int> dec;
  dec.reserve(ids.size() + 2);
  dec.push_back(kSosId);
  dec.insert(dec.end(), ids.begin(), ids.end());
  dec.push_back(kEosId);
  const Var y = decode(t, dec, memory, validity(ids), rng);
  return nn::row(t, y, static_cast<int>(dec.size()) - 1);
}

Var Seq2SeqModel::classification_logits(Tape& t, const std::vector<int>& encoder_ids, Rng* rng) {
  const Var h = representation(t, encoder_ids, rng);
  const Var z = nn::tanh(t, nn::linear(t, h, cls_w1_, cls_b1_));
  return nn::linear(t, nn::dropout(t, z, config_.dropout, rng), cls_w2_, cls_b2_);
}

Mat Seq2SeqModel::forward_generation(const std::vector<int>& encoder_ids,
                                     const std::vector<int>& decoder_input_ids) {
  Tape t(false);
  Rng rng(derive_seed(config_.seed, "forward"));
  return t.value(generation_logits(t, encoder_ids, decoder_input_ids, training_ ? &rng : nullptr));
}

Mat Seq2SeqModel::forward_classification(const std::vector<int>& encoder_ids) {
  Tape t(false);
  Rng rng(derive_seed(config_.seed, "forward"));
  return t.value(classification_logits(t, encoder_ids, training_ ? &rng : nullptr));
}

Eigen::VectorXd Seq2SeqModel::encode_representation(const std::vector<int>& ids) {
  Tape t(false);
  Rng rng(derive_seed(config_.seed, "forward"));
  return t.value(representation(t, ids, training_ ? &rng : nullptr)).row(0).transpose();
}

// ------------------------------------------------------------- generation

std::vector<int> Seq2SeqModel::greedy(const std::vector<int>& encoder_ids, int max_len) {
  Tape enc(false);
  const Mat memory = enc.value(encode(enc, encoder_ids, nullptr));
  const std::vector<char> memory_valid = validity(encoder_ids);
  std::vector<int> prefix = {kSosId};
  std::vector<int> out;
  for (int step = 0; step < max_len; ++step) {
    Tape t(false);
    const Var m = t.constant(memory);
    const Var y = decode(t, prefix, m, memory_valid, nullptr);
    const Var last = nn::row(t, y, static_cast<int>(prefix.size()) - 1);
    const Mat logits = t.value(nn::tied_logits(t, last, embedding_, out_bias_));
    Eigen::Index best = 0;
    logits.row(0).maxCoeff(&best);
    out.push_back(static_cast<int>(best));
    if (best == kEosId) break;
    prefix.push_back(static_cast<int>(best));
  }
  return out;
}

std::vector<Seq2SeqModel::Hypothesis> Seq2SeqModel::generate(const std::vector<int>& encoder_ids,
                                                             int beam_size, int max_len) {
  if (beam_size < 1) throw ArgumentError("beam size must be at least 1");
  if (max_len < 1) throw ArgumentError("max_len must be at least 1");
  max_len = std::min(max_len, config_.max_target_len);
  Tape enc(false);
  const Mat memory = enc.value(encode(enc, encoder_ids, nullptr));
  const std::vector<char> memory_valid = validity(encoder_ids);

  struct Live {
    std::vector<int> ids;
    double logp = 0.0;
  };
  std::vector<Live> live = {{{}, 0.0}};
  std::vector<Live> finished;
  for (int step = 0; step < max_len && !live.empty(); ++step) {
    struct Candidate {
      double logp;
      std::size_t parent;
      int token;
    };
    std::vector<Candidate> candidates;
    for (std::size_t h = 0; h < live.size(); ++h) {
      std::vector<int> prefix = {kSosId};
      prefix.insert(prefix.end(), live[h].ids.begin(), live[h].ids.end());
      Tape t(false);
      const Var m = t.constant(memory);
      const Var y = decode(t, prefix, m, memory_valid, nullptr);
      const Var last = nn::row(t, y, static_cast<int>(prefix.size()) - 1);
      const Mat logits = t.value(nn::tied_logits(t, last, embedding_, out_bias_));
      const double mx = logits.maxCoeff();
      const double lse = mx + std::log((logits.array() - mx).exp().sum());
      // Top beam_size tokens of this hypothesis; ties favor lower ids.
      std::vector<int> order(static_cast<std::size_t>(logits.cols()));
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
      const auto keep = std::min<std::size_t>(static_cast<std::size_t>(beam_size), order.size());
      std::partial_sort(order.begin(), order.begin() + static_cast<long>(keep), order.end(),
                        [&](int a, int b) {
                          if (logits(0, a) != logits(0, b)) return logits(0, a) > logits(0, b);
                          return a < b;
                        });
      for (std::size_t i = 0; i < keep; ++i) {
        candidates.push_back({live[h].logp + logits(0, order[i]) - lse, h, order[i]});
      }
    }
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Candidate& a, const Candidate& b) { return a.logp > b.logp; });
    std::vector<Live> next;
    for (const Candidate& c : candidates) {
      if (static_cast<int>(next.size() + finished.size()) >= beam_size) break;
      Live l{live[c.parent].ids, c.logp};
      l.ids.push_back(c.token);
      if (c.token == kEosId) {
        finished.push_back(std::move(l));
      } else {
        next.push_back(std::move(l));
      }
    }
    live = std::move(next);
    if (static_cast<int>(finished.size()) >= beam_size) break;
  }
  for (Live& l : live) finished.push_back(std::move(l));

  std::vector<Hypothesis> out;
  for (Live& l : finished) {
    out.push_back({std::move(l.ids), l.logp / static_cast<double>(std::max<std::size_t>(1, l.ids.size()))});
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const Hypothesis& a, const Hypothesis& b) { return a.score > b.score; });
  if (static_cast<int>(out.size()) > beam_size) out.resize(static_cast<std::size_t>(beam_size));
  return out;
}

// ------------------------------------------------------------- checkpoint

void Seq2SeqModel::save(const std::filesystem::path& path, std::uint64_t vocab_hash,
                        std::uint64_t step) const {
  nlohmann::ordered_json header;
  header["config"] = nlohmann::ordered_json::parse(config_.to_json());
  header["vocab_hash"] = vocab_hash;
  header["step"] = step;
  nlohmann::ordered_json params = nlohmann::ordered_json::array();
  for (const Parameter* p : parameters()) {
    params.push_back({{"name", p->name}, {"rows", p->value.rows()}, {"cols", p->value.cols()}});
  }
  header["parameters"] = params;
  const std::string text = header.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint '" + path.string() + "'");
  out.write(kMagic, sizeof kMagic);
  const std::uint64_t len = text.size();
  out.write(reinterpret_cast<const char*>(&len), sizeof len);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const Parameter* p : parameters()) {
    out.write(reinterpret_cast<const char*>(p->value.data()),
              static_cast<std::streamsize>(p->value.size() * static_cast<Eigen::Index>(sizeof(double))));
  }
  if (!out) throw IoError("failed writing checkpoint '" + path.string() + "'");
}

Seq2SeqModel Seq2SeqModel::load(const std::filesystem::path& path,
                                std::optional<std::uint64_t> expected_vocab_hash, std::uint64_t* step) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read checkpoint '" + path.string() + "'");
  char magic[sizeof kMagic];
  std::uint64_t len = 0;
  in.read(magic, sizeof magic);
  in.read(reinterpret_cast<char*>(&len), sizeof len);
  if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0 || len > (1u << 26)) {
    throw IoError("'" + path.string() + "' is not a checkpoint");
  }
  std::string text(len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(len));
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("corrupt checkpoint header: ") + e.what());
  }
  const auto hash = header.at("vocab_hash").get<std::uint64_t>();
  if (expected_vocab_hash && *expected_vocab_hash != hash) {
    throw CompatError("checkpoint was trained with a different vocabulary");
  }
  Seq2SeqModel model(ModelConfig::from_json(header.at("config").dump()));
  const auto& shapes = header.at("parameters");
  auto params = model.parameters();
  if (shapes.size() != params.size()) throw CompatError("checkpoint parameter layout differs");
  for (std::size_t i = 0; i < params.size(); ++i) {
    Parameter* p = params[i];
    if (shapes[i].at("name") != p->name || shapes[i].at("rows").get<Eigen::Index>() != p->value.rows() ||
        shapes[i].at("cols").get<Eigen::Index>() != p->value.cols()) {
      throw CompatError("checkpoint parameter '" + p->name + "' does not match the model");
    }
    in.read(reinterpret_cast<char*>(p->value.data()),
            static_cast<std::streamsize>(p->value.size() * static_cast<Eigen::Index>(sizeof(double))));
  }
  if (!in) throw IoError("truncated checkpoint '" + path.string() + "'");
  if (step != nullptr) *step = header.at("step").get<std::uint64_t>();
  return model;
}

}  // namespace codeseq
