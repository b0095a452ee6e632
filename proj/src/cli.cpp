#include "codeseq/cli.hpp"

#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "codeseq/config.hpp"
#include "codeseq/corpus.hpp"
#include "codeseq/error.hpp"
#include "codeseq/linearize.hpp"
#include "codeseq/parser.hpp"
#include "codeseq/pipeline.hpp"
#include "codeseq/schedule.hpp"
#include "codeseq/tasks.hpp"
#include "codeseq/train.hpp"

namespace codeseq::cli {

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> jobs;

  std::string corpus, records, out, split, part = "train", vocab, task, data, dev, checkpoint, report;
  std::string languages, ratios, schedule, split_name = "test";
  std::optional<std::size_t> vocab_size, steps, epoch;
  bool stats = false;
  bool with_summaries = false;
  bool from_scratch = false;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << text;
  if (!out) throw IoError("failed writing '" + path + "'");
}

RunConfig resolve_config(const Options& o) {
  RunConfig c;
  if (!o.config.empty()) c = RunConfig::load(o.config);
  std::map<std::string, std::string> overrides;
  if (o.seed) overrides["seed"] = std::to_string(*o.seed);
  if (o.jobs) overrides["jobs"] = std::to_string(*o.jobs);
  if (!o.languages.empty()) overrides["languages"] = o.languages;
  if (!o.schedule.empty()) overrides["pretrain.schedule"] = o.schedule;
  if (o.vocab_size) overrides["vocab.size"] = std::to_string(*o.vocab_size);
  if (o.steps) overrides["finetune.steps"] = std::to_string(*o.steps);
  if (!overrides.empty()) c.apply(overrides);
  return c;
}

std::vector<MethodRecord> load_records(const Options& o) {
  std::vector<MethodRecord> records = read_records(std::filesystem::path(o.records));
  if (!o.split.empty()) records = select_part(records, split_from_json(slurp(o.split)), o.part);
  return records;
}

int cmd_ingest(const Options& o, const RunConfig& c, std::ostream& out) {
  IngestStats stats;
  const auto records = ingest_corpus(o.corpus, c.language_set(), &stats);
  write_records(std::filesystem::path(o.out), records);
  out << "ingested " << records.size() << " methods from " << stats.files << " files (" << stats.skipped_files
      << " skipped)\n";
  return 0;
}

int cmd_split(const Options& o, const RunConfig& c, std::ostream& out) {
  std::array<double, 3> ratios{c.split_train, c.split_dev, c.split_test};
  if (!o.ratios.empty()) {
    std::istringstream in(o.ratios);
    std::string item;
    for (double& r : ratios) {
      if (!std::getline(in, item, ',')) throw ArgumentError("--ratios needs three comma-separated values");
      try {
        r = std::stod(item);
      } catch (const std::exception&) {
        throw ArgumentError("bad ratio '" + item + "'");
      }
    }
  }
  const auto records = read_records(std::filesystem::path(o.records));
  const DatasetSplit split = split_dataset(records, ratios, c.seed);
  spit(o.out, split_to_json(split) + "\n");
  out << "train " << split.train.size() << " dev " << split.dev.size() << " test " << split.test.size() << "\n";
  return 0;
}

int cmd_build_vocab(const Options& o, const RunConfig& c, std::ostream& out) {
  const auto records = load_records(o);
  std::size_t rejected = 0;
  const auto features = featurize_all(records, builtin_expr_kinds(), &rejected);
  auto streams = bpe_training_streams(features);
  if (o.with_summaries) {
    for (const GenerationRecord& r : summarization_records(records)) streams.push_back(text_tokens(r.target));
  }
  const Vocabulary vocab = Vocabulary::train(streams, xsbt_vocabulary(features), c.vocab_size);
  vocab.save(o.out);
  out << "vocabulary of " << vocab.size() << " entries from " << features.size() << " methods (" << rejected
      << " rejected), hash " << std::hex << std::setw(16) << std::setfill('0') << vocab.hash() << std::dec << "\n";
  return 0;
}

int cmd_linearize(const Options& o, std::ostream& out) {
  const auto records = load_records(o);
  const ExprKindsTable kinds = builtin_expr_kinds();
  std::ofstream dump;
  if (!o.out.empty()) {
    dump.open(o.out, std::ios::binary);
    if (!dump) throw IoError("cannot write '" + o.out + "'");
  }
  std::size_t n = 0, failed = 0, pruned_shorter = 0;
  double sbt_sum = 0, xsbt_sum = 0, pruned_sum = 0, ratio_sum = 0, ratio_max = 0;
  for (const MethodRecord& r : records) {
    SyntaxTree tree;
    try {
      tree = parse(r.source, r.language);
    } catch (const Error&) {
      ++failed;
      continue;
    }
    const auto s = sbt(tree.root);
    const auto x = xsbt(tree.root);
    const auto p = xsbt(tree.root, kinds.at(r.language));
    ++n;
    sbt_sum += static_cast<double>(s.size());
    xsbt_sum += static_cast<double>(x.size());
    pruned_sum += static_cast<double>(p.size());
    const double ratio = static_cast<double>(x.size()) / static_cast<double>(s.size());
    ratio_sum += ratio;
    ratio_max = std::max(ratio_max, ratio);
    if (p.size() < x.size()) ++pruned_shorter;
    if (dump) {
      nlohmann::ordered_json j;
      j["id"] = r.id;
      j["sbt"] = s.tokens;
      j["xsbt"] = x.tokens;
      j["xsbt_pruned"] = p.tokens;
      dump << j.dump() << '\n';
    }
  }
  if (o.stats || o.out.empty()) {
    if (n == 0) throw InputError("no method could be parsed");
    const auto d = static_cast<double>(n);
    nlohmann::ordered_json j;
    j["methods"] = n;
    j["unparsed"] = failed;
    j["sbt_mean_len"] = sbt_sum / d;
    j["xsbt_mean_len"] = xsbt_sum / d;
    j["pruned_xsbt_mean_len"] = pruned_sum / d;
    j["xsbt_sbt_ratio_mean"] = ratio_sum / d;
    j["xsbt_sbt_ratio_max"] = ratio_max;
    j["pruned_shorter"] = pruned_shorter;
    out << j.dump() << "\n";
  }
  return 0;
}

int cmd_make_instances(const Options& o, const RunConfig& c, std::ostream& out) {
  const auto records = load_records(o);
  if (o.task == "summarize") {
    const auto rows = summarization_records(records);
    write_generation_records(o.out, rows);
    out << "wrote " << rows.size() << " summarize examples\n";
    return 0;
  }
  if (o.task == "search") {
    const auto rows = search_records(records);
    write_search_records(o.out, rows);
    out << "wrote " << rows.size() << " search pairs\n";
    return 0;
  }
  const Task task = parse_task(o.task);
  if (o.vocab.empty()) throw ArgumentError("--vocab is required for pre-training instances");
  const Vocabulary vocab = Vocabulary::load(o.vocab);
  auto features = featurize_all(records, builtin_expr_kinds());
  fit_code_budgets(features, vocab, c.budgets);
  const auto instances = make_instances(task, features, vocab, c.budgets, c.seed, o.epoch.value_or(0), c.mask_ratio);
  write_instances(o.out, instances);
  out << "wrote " << instances.size() << " " << to_string(task) << " instances\n";
  return 0;
}

int cmd_pretrain(const Options& o, const RunConfig& c, std::ostream& out) {
  const auto records = load_records(o);
  const Vocabulary vocab = Vocabulary::load(o.vocab);
  auto features = featurize_all(records, builtin_expr_kinds());
  fit_code_budgets(features, vocab, c.budgets);
  const PretrainConfig pc = c.pretrain_config();
  Seq2SeqModel model(c.model_config(static_cast<int>(vocab.size())));
  out << "pre-training " << model.parameter_count() << " parameters on " << features.size() << " methods, schedule "
      << schedule_to_string(pc.schedule) << "\n";
  const auto logs = run_pretraining(model, features, vocab, c.budgets, pc, [&](std::size_t p, std::size_t e, double loss) {
    out << to_string(pc.schedule[p].task) << " epoch " << e + 1 << "/" << pc.schedule[p].epochs << " loss " << loss
        << "\n";
  });
  std::size_t epochs = 0;
  for (const auto& p : pc.schedule) epochs += p.epochs;
  const std::size_t steps = epochs * ((features.size() + pc.batch_size - 1) / pc.batch_size);
  model.save(o.out, vocab.hash(), steps);
  out << "saved " << o.out << "\n";
  return 0;
}

Seq2SeqModel model_for(const Options& o, const RunConfig& c, const Vocabulary& vocab) {
  if (o.from_scratch == !o.checkpoint.empty()) {
    throw ArgumentError("give exactly one of --checkpoint and --from-scratch");
  }
  if (o.from_scratch) return Seq2SeqModel(c.model_config(static_cast<int>(vocab.size())));
  Seq2SeqModel model = Seq2SeqModel::load(o.checkpoint, vocab.hash());
  if (static_cast<int>(c.budgets.max_source_len()) > model.config().max_source_len ||
      static_cast<int>(c.budgets.target) > model.config().max_target_len) {
    throw CompatError("configured budgets exceed the checkpoint's sequence lengths");
  }
  return model;
}

std::vector<PretrainInstance> instances_of(const std::vector<GenerationExample>& xs) {
  std::vector<PretrainInstance> out;
  for (const auto& x : xs) out.push_back(x.instance);
  return out;
}

int cmd_finetune(const Options& o, const RunConfig& c, std::ostream& out) {
  const FinetuneTask task = parse_finetune_task(o.task);
  const Vocabulary vocab = Vocabulary::load(o.vocab);
  Seq2SeqModel model = model_for(o, c, vocab);
  const FinetuneConfig fc = c.finetune_config();
  const ExprKindsTable kinds = builtin_expr_kinds();
  FinetuneResult result;
  if (task == FinetuneTask::kSearch) {
    if (o.records.empty()) throw ArgumentError("--records is required for search");
    const auto methods = read_records(std::filesystem::path(o.records));
    const auto train = build_search_examples(read_search_records(o.data), methods, vocab, c.budgets, kinds, c.seed);
    std::vector<SearchExample> dev;
    if (!o.dev.empty()) dev = build_search_examples(read_search_records(o.dev), methods, vocab, c.budgets, kinds, c.seed);
    result = finetune_search(model, train, dev, fc);
  } else {
    const auto train = encode_generation(read_generation_records(o.data), task, vocab, c.budgets, kinds);
    std::vector<GenerationExample> dev;
    if (!o.dev.empty()) dev = encode_generation(read_generation_records(o.dev), task, vocab, c.budgets, kinds);
    result = finetune_generation(model, instances_of(train), instances_of(dev), fc);
  }
  for (const auto& [step, loss] : result.dev_losses) out << "step " << step << " dev loss " << loss << "\n";
  if (!result.train_losses.empty()) out << "final train loss " << result.train_losses.back() << "\n";
  model.save(o.out, vocab.hash(), result.train_losses.size());
  out << "saved " << o.out << "\n";
  return 0;
}

int cmd_evaluate(const Options& o, const RunConfig& c, std::ostream& out) {
  const FinetuneTask task = parse_finetune_task(o.task);
  const Vocabulary vocab = Vocabulary::load(o.vocab);
  Seq2SeqModel model = Seq2SeqModel::load(o.checkpoint, vocab.hash());
  const ExprKindsTable kinds = builtin_expr_kinds();
  EvalReport report;
  if (task == FinetuneTask::kSearch) {
    if (o.records.empty()) throw ArgumentError("--records is required for search");
    const auto examples = build_search_examples(read_search_records(o.data), read_records(std::filesystem::path(o.records)),
                                                vocab, c.budgets, kinds, c.seed);
    report = evaluate_search(model, examples, o.split_name, c.jobs);
  } else {
    const auto examples = encode_generation(read_generation_records(o.data), task, vocab, c.budgets, kinds);
    report = evaluate_generation(model, vocab, examples, task, o.split_name, c.eval_options());
  }
  const std::string text = report.to_json();
  if (!o.report.empty()) spit(o.report, text + "\n");
  out << text << "\n";
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"codeseq: code sequence pre-training pipeline"};
  app.require_subcommand(1);
  app.fallthrough();
  Options o;
  app.add_option("--config", o.config, "TOML-style run configuration");
  app.add_option("--seed", o.seed, "Seed for every random choice");
  app.add_option("--jobs", o.jobs, "Worker threads for evaluation");

  auto* ingest = app.add_subcommand("ingest", "Extract method records from a source tree");
  ingest->add_option("--corpus", o.corpus, "Corpus root")->required();
  ingest->add_option("--out", o.out, "Records JSONL")->required();
  ingest->add_option("--languages", o.languages, "Comma-separated languages");

  auto* split = app.add_subcommand("split", "Seeded train/dev/test split");
  split->add_option("--records", o.records)->required();
  split->add_option("--out", o.out, "Split JSON")->required();
  split->add_option("--ratios", o.ratios, "train,dev,test");

  auto add_selection = [&o](CLI::App* cmd) {
    cmd->add_option("--records", o.records, "Records JSONL")->required();
    cmd->add_option("--split", o.split, "Split JSON restricting the records");
    cmd->add_option("--part", o.part, "train, dev or test")->check(CLI::IsMember({"train", "dev", "test"}));
  };

  auto* vocab = app.add_subcommand("build-vocab", "Train the BPE + X-SBT vocabulary");
  add_selection(vocab);
  vocab->add_option("--out", o.out)->required();
  vocab->add_option("--vocab-size", o.vocab_size);
  vocab->add_flag("--with-summaries", o.with_summaries, "Also learn docstring summary words");

  auto* lin = app.add_subcommand("linearize", "SBT / X-SBT linearizations and length statistics");
  add_selection(lin);
  lin->add_flag("--stats", o.stats, "Print length statistics");
  lin->add_option("--out", o.out, "Write per-method linearizations as JSONL");

  auto* inst = app.add_subcommand("make-instances", "Pre-training instances or fine-tuning datasets");
  add_selection(inst);
  inst->add_option("--task", o.task)->required()->check(CLI::IsMember({"cap", "mass", "mng", "summarize", "search"}));
  inst->add_option("--vocab", o.vocab);
  inst->add_option("--out", o.out)->required();
  inst->add_option("--epoch", o.epoch);

  auto* pre = app.add_subcommand("pretrain", "Run the pre-training schedule");
  add_selection(pre);
  pre->add_option("--vocab", o.vocab)->required();
  pre->add_option("--out", o.out, "Checkpoint")->required();
  pre->add_option("--schedule", o.schedule, "e.g. cap:10,mass:30,mng:30");

  auto* ft = app.add_subcommand("finetune", "Fine-tune on a downstream task");
  ft->add_option("--task", o.task)->required();
  ft->add_option("--data", o.data, "Training JSONL")->required();
  ft->add_option("--dev", o.dev, "Dev JSONL");
  ft->add_option("--vocab", o.vocab)->required();
  ft->add_option("--checkpoint", o.checkpoint);
  ft->add_flag("--from-scratch", o.from_scratch);
  ft->add_option("--records", o.records, "Method records (search)");
  ft->add_option("--out", o.out, "Checkpoint")->required();
  ft->add_option("--steps", o.steps);

  auto* ev = app.add_subcommand("evaluate", "Evaluate a fine-tuned checkpoint");
  ev->add_option("--task", o.task)->required();
  ev->add_option("--checkpoint", o.checkpoint)->required();
  ev->add_option("--vocab", o.vocab)->required();
  ev->add_option("--data", o.data)->required();
  ev->add_option("--records", o.records, "Method records (search)");
  ev->add_option("--report", o.report, "Report JSON");
  ev->add_option("--split-name", o.split_name);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  }

  try {
    const RunConfig c = resolve_config(o);
    if (*ingest) return cmd_ingest(o, c, out);
    if (*split) return cmd_split(o, c, out);
    if (*vocab) return cmd_build_vocab(o, c, out);
    if (*lin) return cmd_linearize(o, out);
    if (*inst) return cmd_make_instances(o, c, out);
    if (*pre) return cmd_pretrain(o, c, out);
    if (*ft) return cmd_finetune(o, c, out);
    if (*ev) return cmd_evaluate(o, c, out);
  } catch (const Error& e) {
    err << "error: " << e.kind() << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: InternalError: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace codeseq::cli
