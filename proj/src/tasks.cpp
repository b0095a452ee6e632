#include "codeseq/tasks.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <exception>
#include <fstream>
#include <mutex>
#include <numeric>
#include <thread>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "codeseq/error.hpp"
#include "codeseq/lexer.hpp"

namespace codeseq {

std::string_view to_string(FinetuneTask task) {
  switch (task) {
    case FinetuneTask::kSummarize: return "summarize";
    case FinetuneTask::kComplete: return "complete";
    case FinetuneTask::kFix: return "fix";
    case FinetuneTask::kTranslate: return "translate";
    case FinetuneTask::kSearch: return "search";
  }
  return "summarize";
}

FinetuneTask parse_finetune_task(std::string_view name) {
  for (FinetuneTask t : {FinetuneTask::kSummarize, FinetuneTask::kComplete, FinetuneTask::kFix,
                         FinetuneTask::kTranslate, FinetuneTask::kSearch}) {
    if (to_string(t) == name) return t;
  }
  throw ArgumentError("unknown task '" + std::string(name) +
                      "' (expected summarize, complete, fix, translate or search)");
}

// ------------------------------------------------------------------ JSONL

namespace {

template <typename T, typename Parse>
std::vector<T> read_jsonl(const std::filesystem::path& path, Parse parse) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read '" + path.string() + "'");
  std::vector<T> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(parse(line));
    } catch (const IoError& e) {
      throw IoError(path.string() + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

template <typename T, typename Dump>
void write_jsonl(const std::filesystem::path& path, const std::vector<T>& items, Dump dump) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  for (const T& item : items) out << dump(item) << '\n';
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace

std::string generation_record_to_json(const GenerationRecord& record) {
  nlohmann::ordered_json j;
  if (!record.id.empty()) j["id"] = record.id;
  if (record.language) j["language"] = std::string(to_string(*record.language));
  if (const auto* s = std::get_if<std::string>(&record.source)) {
    j["source"] = *s;
  } else {
    j["source"] = std::get<Tokens>(record.source);
  }
  j["target"] = record.target;
  return j.dump();
}

GenerationRecord generation_record_from_json(std::string_view line) {
  try {
    const auto j = nlohmann::json::parse(line);
    GenerationRecord r;
    r.id = j.value("id", std::string());
    if (j.contains("language")) {
      const auto lang = parse_language(j.at("language").get<std::string>());
      if (!lang) throw IoError("unknown language '" + j.at("language").get<std::string>() + "'");
      r.language = *lang;
    }
    const auto& src = j.at("source");
    if (src.is_string()) {
      r.source = src.get<std::string>();
    } else {
      r.source = src.get<Tokens>();
    }
    r.target = j.at("target").get<std::string>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed generation record: ") + e.what());
  }
}

void write_generation_records(const std::filesystem::path& path, const std::vector<GenerationRecord>& records) {
  write_jsonl(path, records, generation_record_to_json);
}

std::vector<GenerationRecord> read_generation_records(const std::filesystem::path& path) {
  return read_jsonl<GenerationRecord>(path, generation_record_from_json);
}

std::string search_record_to_json(const SearchRecord& record) {
  nlohmann::ordered_json j;
  j["code_id"] = record.code_id;
  j["query"] = record.query;
  return j.dump();
}

SearchRecord search_record_from_json(std::string_view line) {
  try {
    const auto j = nlohmann::json::parse(line);
    return {j.at("code_id").get<std::string>(), j.at("query").get<std::string>()};
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed search record: ") + e.what());
  }
}

void write_search_records(const std::filesystem::path& path, const std::vector<SearchRecord>& records) {
  write_jsonl(path, records, search_record_to_json);
}

std::vector<SearchRecord> read_search_records(const std::filesystem::path& path) {
  return read_jsonl<SearchRecord>(path, search_record_from_json);
}

// ------------------------------------------------------------------- text

std::optional<std::string> first_sentence(std::string_view docstring) {
  std::string_view text = docstring;
  if (const auto para = text.find("\n\n"); para != std::string_view::npos) text = text.substr(0, para);
  std::string out;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '.' && (i + 1 == text.size() || std::isspace(static_cast<unsigned char>(text[i + 1])))) {
      out += c;
      break;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!out.empty() && out.back() != ' ') out += ' ';
    } else {
      out += c;
    }
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  if (std::none_of(out.begin(), out.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)); })) {
    return std::nullopt;
  }
  return out;
}

Tokens text_tokens(std::string_view text) {
  Tokens out;
  std::string word;
  auto flush = [&] {
    if (!word.empty()) out.push_back(std::move(word));
    word.clear();
  };
  for (const char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c) || c == '_' || c >= 0x80) {
      word += static_cast<char>(std::tolower(c));
    } else {
      flush();
      if (!std::isspace(c)) out.emplace_back(1, ch);
    }
  }
  flush();
  return out;
}

Tokens target_tokens(FinetuneTask task, std::string_view target) {
  if (task == FinetuneTask::kSummarize || task == FinetuneTask::kSearch) return text_tokens(target);
  Tokens out;
  std::string word;
  for (const char ch : target) {
    if (std::isspace(static_cast<unsigned char>(ch))) {
      if (!word.empty()) out.push_back(std::move(word));
      word.clear();
    } else {
      word += ch;
    }
  }
  if (!word.empty()) out.push_back(std::move(word));
  return out;
}

std::vector<GenerationRecord> summarization_records(const std::vector<MethodRecord>& records) {
  std::vector<GenerationRecord> out;
  for (const MethodRecord& r : records) {
    if (!r.docstring) continue;
    const auto sentence = first_sentence(*r.docstring);
    if (!sentence) continue;
    out.push_back({r.id, r.source, *sentence, r.language});
  }
  return out;
}

std::vector<SearchRecord> search_records(const std::vector<MethodRecord>& records) {
  std::vector<SearchRecord> out;
  for (const MethodRecord& r : records) {
    if (!r.docstring) continue;
    const auto sentence = first_sentence(*r.docstring);
    if (!sentence) continue;
    out.push_back({r.id, *sentence});
  }
  return out;
}

// --------------------------------------------------------------- encoding

PretrainInstance teacher_forcing(const std::vector<int>& encoder_ids, std::vector<int> target_ids,
                                 std::size_t target_budget) {
  if (target_budget == 0) throw ArgumentError("target budget must be positive");
  if (target_ids.size() > target_budget - 1) target_ids.resize(target_budget - 1);
  target_ids.push_back(kEosId);
  PretrainInstance inst;
  inst.task = Task::kMass;
  inst.encoder_ids = encoder_ids;
  inst.decoder_input_ids.push_back(kSosId);
  inst.decoder_input_ids.insert(inst.decoder_input_ids.end(), target_ids.begin(), target_ids.end() - 1);
  inst.target_ids = std::move(target_ids);
  return inst;
}

namespace {

std::vector<int> method_input(const std::string& id, const std::string& source, Language language,
                              const Vocabulary& vocab, const Budgets& budgets,
                              const ExprKindsTable& expr_kinds) {
  const auto kinds = expr_kinds.find(language);
  if (kinds != expr_kinds.end()) {
    try {
      MethodRecord r;
      r.id = id;
      r.language = language;
      r.source = source;
      MethodFeatures f = featurize(r, kinds->second);
      fit_code_budget(f, vocab, budgets.code);
      return build_input(f.code.tokens, f.ast, f.nl.tokens, vocab, budgets).ids;
    } catch (const LexError&) {
    } catch (const ParseError&) {
    } catch (const StructureError&) {
    }
  }
  Tokens tokens;
  try {
    tokens = lex_tokens(source, language);
  } catch (const LexError&) {
    tokens = target_tokens(FinetuneTask::kFix, source);
  }
  return assemble_input(vocab.encode_bpe(tokens), {}, {}, budgets).ids;
}

}  // namespace

GenerationExample encode_generation(const GenerationRecord& record, FinetuneTask task,
                                    const Vocabulary& vocab, const Budgets& budgets,
                                    const ExprKindsTable& expr_kinds) {
  GenerationExample ex;
  ex.id = record.id;
  if (const auto* s = std::get_if<std::string>(&record.source)) {
    if (record.language) {
      ex.encoder_ids = method_input(record.id, *s, *record.language, vocab, budgets, expr_kinds);
    } else {
      ex.encoder_ids = assemble_input(vocab.encode_bpe(target_tokens(FinetuneTask::kFix, *s)), {}, {}, budgets).ids;
    }
  } else {
    ex.encoder_ids = assemble_input(vocab.encode_bpe(std::get<Tokens>(record.source)), {}, {}, budgets).ids;
  }
  ex.target = target_tokens(task, record.target);
  if (ex.target.empty()) throw InputError("empty target for '" + record.id + "'");
  ex.instance = teacher_forcing(ex.encoder_ids, vocab.encode_bpe(ex.target), budgets.target);
  return ex;
}

std::vector<GenerationExample> encode_generation(const std::vector<GenerationRecord>& records,
                                                 FinetuneTask task, const Vocabulary& vocab,
                                                 const Budgets& budgets, const ExprKindsTable& expr_kinds) {
  std::vector<GenerationExample> out;
  out.reserve(records.size());
  for (const GenerationRecord& r : records) out.push_back(encode_generation(r, task, vocab, budgets, expr_kinds));
  return out;
}

std::vector<SearchExample> build_search_examples(const std::vector<SearchRecord>& pairs,
                                                 const std::vector<MethodRecord>& methods,
                                                 const Vocabulary& vocab, const Budgets& budgets,
                                                 const ExprKindsTable& expr_kinds, std::uint64_t seed) {
  std::unordered_map<std::string, const MethodRecord*> by_id;
  for (const MethodRecord& m : methods) by_id.emplace(m.id, &m);

  std::vector<SearchExample> out;
  std::vector<Tokens> pool;
  for (const SearchRecord& p : pairs) {
    const auto it = by_id.find(p.code_id);
    if (it == by_id.end()) continue;
    const MethodRecord& m = *it->second;
    const auto kinds = expr_kinds.find(m.language);
    if (kinds == expr_kinds.end()) continue;
    SearchExample ex;
    ex.code_id = p.code_id;
    try {
      MethodFeatures f = featurize(m, kinds->second);
      fit_code_budget(f, vocab, budgets.code);
      ex.code_ids = build_input(f.code.tokens, f.ast, f.nl.tokens, vocab, budgets).ids;
    } catch (const LexError&) {
      continue;
    } catch (const ParseError&) {
      continue;
    } catch (const StructureError&) {
      continue;
    }
    ex.query = text_tokens(p.query);
    if (ex.query.empty()) continue;
    ex.query_ids = vocab.encode_bpe(ex.query);
    if (ex.query_ids.size() > budgets.nl) ex.query_ids.resize(budgets.nl);
    pool.push_back(ex.query);
    out.push_back(std::move(ex));
  }
  for (SearchExample& ex : out) {
    Rng rng(derive_seed(seed, "negative", ex.code_id));
    ex.negative = mine_negative(ex.query, pool, rng);
    ex.negative_ids = vocab.encode_bpe(ex.negative);
    if (ex.negative_ids.size() > budgets.nl) ex.negative_ids.resize(budgets.nl);
  }
  return out;
}

// ------------------------------------------------------------ fine-tuning

namespace {

template <typename Example, typename Step, typename DevLoss>
FinetuneResult run_finetune(const std::vector<Example>& train, const FinetuneConfig& config, Step step,
                            DevLoss dev_loss) {
  if (train.empty()) throw ArgumentError("no training examples");
  if (config.batch_size == 0) throw ArgumentError("batch size must be positive");
  FinetuneResult result;
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  std::size_t cursor = order.size();
  std::uint64_t epoch = 0;
  for (std::size_t s = 1; s <= config.steps; ++s) {
    std::vector<Example> batch;
    while (batch.size() < std::min(config.batch_size, train.size())) {
      if (cursor == order.size()) {
        std::iota(order.begin(), order.end(), 0);
        Rng rng(derive_seed(config.seed, "batches", epoch++));
        rng.shuffle(order);
        cursor = 0;
      }
      batch.push_back(train[order[cursor++]]);
    }
    result.train_losses.push_back(step(batch));
    if (config.eval_every > 0 && s % config.eval_every == 0) {
      if (const auto loss = dev_loss()) {
        result.dev_losses.emplace_back(s, *loss);
        if (config.target_dev_loss && !result.reached_target && *loss <= *config.target_dev_loss) {
          result.reached_target = s;
          if (config.stop_at_target) break;
        }
      }
    }
  }
  return result;
}

}  // namespace

FinetuneResult finetune_generation(Seq2SeqModel& model, const std::vector<PretrainInstance>& train,
                                   const std::vector<PretrainInstance>& dev, const FinetuneConfig& config) {
  Trainer trainer(model, config.optimizer, config.seed);
  auto result = run_finetune(
      train, config, [&](const std::vector<PretrainInstance>& b) { return trainer.train_step(b); },
      [&]() -> std::optional<double> {
        if (dev.empty()) return std::nullopt;
        return trainer.eval_loss(dev);
      });
  model.set_training(false);
  return result;
}

FinetuneResult finetune_search(Seq2SeqModel& model, const std::vector<SearchExample>& train,
                               const std::vector<SearchExample>& dev, const FinetuneConfig& config) {
  Trainer trainer(model, config.optimizer, config.seed);
  std::vector<SearchTriple> dev_triples;
  for (const SearchExample& x : dev) dev_triples.push_back({x.code_ids, x.query_ids, x.negative_ids});

  // The negative query is redrawn every time an example is visited, from the
  // training queries whose BLEU against the positive is below 0.3.
  std::vector<std::vector<std::size_t>> eligible(train.size());
  for (std::size_t i = 0; i < train.size(); ++i) {
    for (std::size_t j = 0; j < train.size(); ++j) {
      if (train[j].query != train[i].query && bleu(train[j].query, train[i].query) < 0.3) eligible[i].push_back(j);
    }
  }
  std::vector<std::size_t> index(train.size());
  std::iota(index.begin(), index.end(), 0);
  std::uint64_t visit = 0;
  auto result = run_finetune(
      index, config,
      [&](const std::vector<std::size_t>& b) {
        std::vector<SearchTriple> batch;
        batch.reserve(b.size());
        for (std::size_t i : b) {
          const SearchExample& x = train[i];
          Rng rng(derive_seed(config.seed, "negative", visit++));
          const std::vector<int>& neg =
              eligible[i].empty() ? x.negative_ids : train[eligible[i][rng.below(eligible[i].size())]].query_ids;
          batch.push_back({x.code_ids, x.query_ids, neg});
        }
        return trainer.train_step(batch);
      },
      [&]() -> std::optional<double> {
        if (dev_triples.empty()) return std::nullopt;
        model.set_training(false);
        return search_batch_loss(model, dev_triples, nullptr, false);
      });
  model.set_training(false);
  return result;
}

// ------------------------------------------------------------- evaluation

std::string EvalReport::to_json() const {
  nlohmann::ordered_json j;
  j["task"] = task;
  j["split"] = split;
  nlohmann::ordered_json m = nlohmann::ordered_json::object();
  for (const auto& [name, value] : metrics) m[name] = value;
  j["metrics"] = m;
  return j.dump(2);
}

EvalReport EvalReport::from_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    EvalReport r;
    r.task = j.at("task").get<std::string>();
    r.split = j.at("split").get<std::string>();
    r.metrics = j.at("metrics").get<std::map<std::string, double>>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed report: ") + e.what());
  }
}

void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& fn) {
  jobs = std::max<std::size_t>(1, std::min(jobs, n));
  if (jobs == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex mu;
  std::vector<std::thread> workers;
  for (std::size_t w = 0; w < jobs; ++w) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (std::thread& t : workers) t.join();
  if (failure) std::rethrow_exception(failure);
}

Tokens decode_hypothesis(const Vocabulary& vocab, const std::vector<int>& ids) {
  std::vector<int> body;
  for (const int id : ids) {
    if (id == kEosId) break;
    if (id == kPadId || id == kSosId) continue;
    body.push_back(id);
  }
  return vocab.decode(body);
}

namespace {

std::string join(const Tokens& tokens) {
  std::string out;
  for (const std::string& t : tokens) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

}  // namespace

EvalReport evaluate_generation(Seq2SeqModel& model, const Vocabulary& vocab,
                               const std::vector<GenerationExample>& examples, FinetuneTask task,
                               std::string_view split, const GenerationEvalOptions& options) {
  if (examples.empty()) throw MetricError("no examples to evaluate");
  model.set_training(false);
  const bool summary = task == FinetuneTask::kSummarize;
  const std::size_t beam = summary ? std::max<std::size_t>(1, options.beam) : std::max<std::size_t>(5, options.beam);
  std::vector<std::vector<Tokens>> candidates(examples.size());
  parallel_for(examples.size(), options.jobs, [&](std::size_t i) {
    const auto hyps = model.generate(examples[i].encoder_ids, static_cast<int>(beam), static_cast<int>(options.max_len));
    for (const auto& h : hyps) candidates[i].push_back(decode_hypothesis(vocab, h.ids));
  });

  EvalReport report;
  report.task = std::string(to_string(task));
  report.split = std::string(split);
  std::vector<std::pair<Tokens, Tokens>> pairs;
  double rouge = 0.0;
  double sentence = 0.0;
  double acc1 = 0.0;
  double acc5 = 0.0;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const Tokens best = candidates[i].empty() ? Tokens{} : candidates[i].front();
    pairs.emplace_back(best, examples[i].target);
    rouge += rouge_l(best, examples[i].target);
    sentence += bleu(best, examples[i].target);
    std::vector<std::string> strings;
    for (const Tokens& c : candidates[i]) strings.push_back(join(c));
    const std::string ref = join(examples[i].target);
    acc1 += exact_match_at_k(strings, ref, 1);
    acc5 += exact_match_at_k(strings, ref, 5);
  }
  const auto n = static_cast<double>(examples.size());
  report.metrics["bleu"] = corpus_bleu(pairs);
  if (options.sentence_bleu) report.metrics["sentence_bleu"] = sentence / n;
  if (summary) {
    report.metrics["rouge_l"] = rouge / n;
  } else {
    report.metrics["acc@1"] = acc1 / n;
    report.metrics["acc@5"] = acc5 / n;
  }
  return report;
}

EvalReport evaluate_search(Seq2SeqModel& model, const std::vector<SearchExample>& examples,
                           std::string_view split, std::size_t jobs) {
  if (examples.empty()) throw MetricError("no examples to evaluate");
  model.set_training(false);
  std::vector<const SearchExample*> codes;
  std::map<std::string, std::size_t> seen;
  for (const SearchExample& ex : examples) {
    if (seen.emplace(ex.code_id, codes.size()).second) codes.push_back(&ex);
  }
  std::vector<std::pair<std::string, Eigen::VectorXd>> codebase(codes.size());
  parallel_for(codes.size(), jobs, [&](std::size_t i) {
    codebase[i] = {codes[i]->code_id, model.encode_representation(codes[i]->code_ids)};
  });
  std::vector<std::size_t> ranks(examples.size());
  parallel_for(examples.size(), jobs, [&](std::size_t i) {
    const Eigen::VectorXd q = model.encode_representation(examples[i].query_ids);
    const auto ranked = rank_codebase(q, codebase);
    ranks[i] = static_cast<std::size_t>(std::find(ranked.begin(), ranked.end(), examples[i].code_id) - ranked.begin()) + 1;
  });
  EvalReport report;
  report.task = "search";
  report.split = std::string(split);
  report.metrics["mrr"] = mrr(ranks);
  return report;
}

}  // namespace codeseq
