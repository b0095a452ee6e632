#include "codeseq/pretrain.hpp"

#include <cmath>
#include <fstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "codeseq/error.hpp"
#include "codeseq/parser.hpp"

namespace codeseq {

MethodFeatures featurize(const MethodRecord& record, const ExprKinds& expr_kinds) {
  MethodFeatures f;
  f.id = record.id;
  f.language = record.language;
  f.code = tokenize_code(record.source, record.language);
  const SyntaxTree tree = parse(record.source, record.language);
  f.ast = xsbt(tree.root, expr_kinds);
  f.nl = build_nl(tree.root);
  return f;
}

void fit_code_budget(MethodFeatures& features, const Vocabulary& vocab, std::size_t budget) {
  auto& tokens = features.code.tokens;
  std::size_t used = 0;
  std::size_t keep = 0;
  while (keep < tokens.size()) {
    const std::size_t n = vocab.encode_word_bpe(tokens[keep]).size();
    if (used + n > budget && keep > features.code.name_index) break;
    used += n;
    ++keep;
  }
  tokens.resize(keep);
}

std::vector<std::vector<std::string>> bpe_training_streams(const std::vector<MethodFeatures>& features) {
  std::vector<std::vector<std::string>> streams;
  streams.reserve(features.size() * 2);
  for (const MethodFeatures& f : features) {
    streams.push_back(f.code.tokens);
    streams.push_back(f.nl.tokens);
  }
  return streams;
}

std::vector<std::string> xsbt_vocabulary(const std::vector<MethodFeatures>& features) {
  std::vector<std::string> words;
  std::unordered_set<std::string> seen;
  for (const MethodFeatures& f : features) {
    for (const std::string& t : f.ast.tokens) {
      if (seen.insert(t).second) words.push_back(t);
    }
  }
  return words;
}

ModelInput assemble_input(std::vector<int> code_ids, std::vector<int> ast_ids,
                          std::vector<int> nl_ids, const Budgets& budgets) {
  const std::size_t limit = budgets.code + budgets.ast + budgets.nl;
  auto total = [&] { return code_ids.size() + ast_ids.size() + nl_ids.size(); };
  if (total() > limit && ast_ids.size() > budgets.ast) ast_ids.resize(budgets.ast);
  if (total() > limit && nl_ids.size() > budgets.nl) nl_ids.resize(budgets.nl);
  if (total() > limit && code_ids.size() > budgets.code) code_ids.resize(budgets.code);
  if (code_ids.empty()) throw InputError("code segment is empty");

  ModelInput in;
  in.segment_lengths = {code_ids.size(), ast_ids.size(), nl_ids.size()};
  in.ids.reserve(total() + 2);
  in.ids.insert(in.ids.end(), code_ids.begin(), code_ids.end());
  in.ids.push_back(kSepId);
  in.ids.insert(in.ids.end(), ast_ids.begin(), ast_ids.end());
  in.ids.push_back(kSepId);
  in.ids.insert(in.ids.end(), nl_ids.begin(), nl_ids.end());
  return in;
}

ModelInput build_input(const std::vector<std::string>& code, const LinearizedAst& ast,
                       const std::vector<std::string>& nl, const Vocabulary& vocab,
                       const Budgets& budgets) {
  return assemble_input(vocab.encode_bpe(code), vocab.encode_words(ast.tokens), vocab.encode_bpe(nl),
                        budgets);
}

std::string_view to_string(Task task) {
  switch (task) {
    case Task::kCap:
      return "cap";
    case Task::kMass:
      return "mass";
    case Task::kMng:
      return "mng";
  }
  return "mass";
}

Task parse_task(std::string_view name) {
  if (name == "cap") return Task::kCap;
  if (name == "mass") return Task::kMass;
  if (name == "mng") return Task::kMng;
  throw ArgumentError("unknown pre-training task '" + std::string(name) + "'");
}

namespace {

// Target ids followed by EOS, cut to the target budget.
std::vector<int> with_eos(std::vector<int> ids, const Budgets& budgets) {
  if (budgets.target > 0 && ids.size() + 1 > budgets.target) ids.resize(budgets.target - 1);
  ids.push_back(kEosId);
  return ids;
}

std::vector<int> teacher_forcing_input(const std::vector<int>& target) {
  std::vector<int> in;
  in.reserve(target.size());
  in.push_back(kSosId);
  in.insert(in.end(), target.begin(), target.end() - 1);
  return in;
}

const std::string kMaskLiteral(kSpecialNames[kMaskId]);

}  // namespace

MassSpan mass_span(const std::vector<std::string>& code, Rng& rng, double mask_ratio) {
  const std::size_t l = code.size();
  if (l == 0) throw InputError("cannot mask an empty code sequence");
  MassSpan m;
  m.k = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(mask_ratio * static_cast<double>(l))));
  if (m.k < l) {
    m.u = 1 + static_cast<std::size_t>(rng.below(l - m.k));
  } else {
    m.k = l;
    m.u = 0;
  }
  m.masked_code.assign(code.begin(), code.begin() + static_cast<long>(m.u));
  m.masked_code.push_back(kMaskLiteral);
  m.masked_code.insert(m.masked_code.end(), code.begin() + static_cast<long>(m.u + m.k), code.end());
  m.span.assign(code.begin() + static_cast<long>(m.u), code.begin() + static_cast<long>(m.u + m.k));
  return m;
}

PretrainInstance make_mass(const MethodFeatures& method, const Vocabulary& vocab,
                           const Budgets& budgets, Rng& rng, double mask_ratio) {
  const MassSpan m = mass_span(method.code.tokens, rng, mask_ratio);
  PretrainInstance inst;
  inst.task = Task::kMass;
  inst.encoder_ids = build_input(m.masked_code, method.ast, method.nl.tokens, vocab, budgets).ids;
  inst.target_ids = with_eos(vocab.encode_bpe(m.span), budgets);
  inst.decoder_input_ids = teacher_forcing_input(*inst.target_ids);
  return inst;
}

PretrainInstance make_mng(const MethodFeatures& method, const Vocabulary& vocab,
                          const Budgets& budgets) {
  std::vector<std::string> code = method.code.tokens;
  code.at(method.code.name_index) = kMaskLiteral;
  const auto s = static_cast<long>(method.nl.s);
  const std::vector<std::string> name(method.nl.tokens.begin(), method.nl.tokens.begin() + s);
  const std::vector<std::string> rest(method.nl.tokens.begin() + s, method.nl.tokens.end());
  PretrainInstance inst;
  inst.task = Task::kMng;
  inst.encoder_ids = build_input(code, method.ast, rest, vocab, budgets).ids;
  inst.target_ids = with_eos(vocab.encode_bpe(name), budgets);
  inst.decoder_input_ids = teacher_forcing_input(*inst.target_ids);
  return inst;
}

PretrainInstance make_cap(const MethodFeatures& method, const std::vector<MethodFeatures>& pool,
                          const Vocabulary& vocab, const Budgets& budgets, Rng& rng) {
  if (pool.size() < 2) throw CapError("CAP needs at least two methods in the pool");
  const bool positive = rng.coin();
  const LinearizedAst* ast = &method.ast;
  if (!positive) {
    std::vector<std::size_t> eligible;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (pool[i].id != method.id && pool[i].ast.tokens != method.ast.tokens) eligible.push_back(i);
    }
    if (eligible.empty()) throw CapError("no method with a different AST for '" + method.id + "'");
    ast = &pool[eligible[rng.below(eligible.size())]].ast;
  }
  PretrainInstance inst;
  inst.task = Task::kCap;
  inst.encoder_ids = build_input(method.code.tokens, *ast, method.nl.tokens, vocab, budgets).ids;
  inst.decoder_input_ids.reserve(inst.encoder_ids.size() + 2);
  inst.decoder_input_ids.push_back(kSosId);
  inst.decoder_input_ids.insert(inst.decoder_input_ids.end(), inst.encoder_ids.begin(),
                                inst.encoder_ids.end());
  inst.decoder_input_ids.push_back(kEosId);
  inst.label = positive ? kIsAst : kNotAst;
  return inst;
}

std::uint64_t instance_seed(std::uint64_t seed, std::string_view method_id, Task task,
                            std::uint64_t epoch) {
  return derive_seed(seed, method_id, to_string(task), epoch);
}

std::vector<PretrainInstance> make_instances(Task task, const std::vector<MethodFeatures>& methods,
                                             const Vocabulary& vocab, const Budgets& budgets,
                                             std::uint64_t seed, std::uint64_t epoch,
                                             double mask_ratio) {
  std::vector<PretrainInstance> out;
  out.reserve(methods.size());
  for (const MethodFeatures& m : methods) {
    Rng rng(instance_seed(seed, m.id, task, epoch));
    switch (task) {
      case Task::kCap:
        out.push_back(make_cap(m, methods, vocab, budgets, rng));
        break;
      case Task::kMass:
        out.push_back(make_mass(m, vocab, budgets, rng, mask_ratio));
        break;
      case Task::kMng:
        out.push_back(make_mng(m, vocab, budgets));
        break;
    }
  }
  return out;
}

std::string instance_to_json(const PretrainInstance& instance) {
  nlohmann::ordered_json j;
  j["task"] = std::string(to_string(instance.task));
  j["encoder_ids"] = instance.encoder_ids;
  j["decoder_input_ids"] = instance.decoder_input_ids;
  j["target_ids"] = instance.target_ids ? nlohmann::ordered_json(*instance.target_ids) : nlohmann::ordered_json();
  j["label"] = instance.label ? nlohmann::ordered_json(*instance.label) : nlohmann::ordered_json();
  return j.dump();
}

PretrainInstance instance_from_json(std::string_view line) {
  try {
    const auto j = nlohmann::json::parse(line);
    PretrainInstance inst;
    inst.task = parse_task(j.at("task").get<std::string>());
    inst.encoder_ids = j.at("encoder_ids").get<std::vector<int>>();
    inst.decoder_input_ids = j.at("decoder_input_ids").get<std::vector<int>>();
    if (!j.at("target_ids").is_null()) inst.target_ids = j.at("target_ids").get<std::vector<int>>();
    if (!j.at("label").is_null()) inst.label = j.at("label").get<int>();
    return inst;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed instance: ") + e.what());
  }
}

void write_instances(const std::filesystem::path& path, const std::vector<PretrainInstance>& instances) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  for (const PretrainInstance& i : instances) out << instance_to_json(i) << '\n';
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::vector<PretrainInstance> read_instances(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path.string() + "'");
  std::vector<PretrainInstance> out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    try {
      out.push_back(instance_from_json(line));
    } catch (const IoError& e) {
      throw IoError(path.string() + ":" + std::to_string(number) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace codeseq
