#include "codeseq/config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "codeseq/error.hpp"

namespace codeseq {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool valid_key(std::string_view key) {
  if (key.empty()) return false;
  for (const char c : key) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-' && c != '.') return false;
  }
  return true;
}

}  // namespace

std::map<std::string, std::string> parse_key_values(std::string_view text) {
  std::map<std::string, std::string> out;
  std::string section;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string raw;
  auto fail = [&](const std::string& what) {
    throw ConfigError("line " + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail("unterminated section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (!valid_key(section)) fail("bad section name");
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) fail("expected key = value");
    const std::string key = std::string(trim(line.substr(0, eq)));
    if (!valid_key(key)) fail("bad key '" + key + "'");
    std::string_view value = trim(line.substr(eq + 1));
    std::string parsed;
    if (!value.empty() && (value.front() == '"' || value.front() == '\'')) {
      const char quote = value.front();
      const std::size_t close = value.find(quote, 1);
      if (close == std::string_view::npos) fail("unterminated string");
      parsed = std::string(value.substr(1, close - 1));
      const std::string_view rest = trim(value.substr(close + 1));
      if (!rest.empty() && rest.front() != '#') fail("trailing characters after string");
    } else {
      if (const std::size_t hash = value.find('#'); hash != std::string_view::npos) value = trim(value.substr(0, hash));
      if (value.empty()) fail("missing value for '" + key + "'");
      parsed = std::string(value);
    }
    const std::string full = section.empty() ? key : section + "." + key;
    if (!out.emplace(full, parsed).second) fail("duplicate key '" + full + "'");
  }
  return out;
}

namespace {

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if constexpr (std::is_floating_point_v<T>) {
    try {
      std::size_t used = 0;
      value = static_cast<T>(std::stod(text, &used));
      if (used != text.size()) throw std::invalid_argument(text);
    } catch (const std::exception&) {
      throw ConfigError("'" + key + "' expects a number, got '" + text + "'");
    }
  } else {
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) {
      throw ConfigError("'" + key + "' expects a non-negative integer, got '" + text + "'");
    }
  }
  return value;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true") return true;
  if (text == "false") return false;
  throw ConfigError("'" + key + "' expects true or false, got '" + text + "'");
}

}  // namespace

void RunConfig::apply(const std::map<std::string, std::string>& values) {
  using Setter = std::function<void(const std::string&, const std::string&)>;
  auto size = [](std::size_t& field) -> Setter {
    return [&field](const std::string& k, const std::string& v) { field = parse_number<std::size_t>(k, v); };
  };
  auto real = [](double& field) -> Setter {
    return [&field](const std::string& k, const std::string& v) { field = parse_number<double>(k, v); };
  };
  auto text = [](std::string& field) -> Setter {
    return [&field](const std::string&, const std::string& v) { field = v; };
  };
  auto opt_int = [](std::optional<int>& field) -> Setter {
    return [&field](const std::string& k, const std::string& v) { field = parse_number<int>(k, v); };
  };
  const std::map<std::string, Setter> setters = {
      {"seed", [this](const std::string& k, const std::string& v) { seed = parse_number<std::uint64_t>(k, v); }},
      {"jobs", size(jobs)},
      {"languages", text(languages)},
      {"model.preset", text(preset)},
      {"model.layers", opt_int(layers)},
      {"model.d_model", opt_int(d_model)},
      {"model.d_ff", opt_int(d_ff)},
      {"model.heads", opt_int(heads)},
      {"model.dropout", [this](const std::string& k, const std::string& v) { dropout = parse_number<double>(k, v); }},
      {"budgets.code", size(budgets.code)},
      {"budgets.ast", size(budgets.ast)},
      {"budgets.nl", size(budgets.nl)},
      {"budgets.target", size(budgets.target)},
      {"vocab.size", size(vocab_size)},
      {"split.train", real(split_train)},
      {"split.dev", real(split_dev)},
      {"split.test", real(split_test)},
      {"pretrain.schedule", text(schedule)},
      {"pretrain.batch_size", size(pretrain_batch_size)},
      {"pretrain.lr", real(pretrain_lr)},
      {"pretrain.warmup", size(pretrain_warmup)},
      {"pretrain.mask_ratio", real(mask_ratio)},
      {"pretrain.weight_decay", real(weight_decay)},
      {"finetune.steps", size(finetune_steps)},
      {"finetune.batch_size", size(finetune_batch_size)},
      {"finetune.lr", real(finetune_lr)},
      {"finetune.warmup", size(finetune_warmup)},
      {"finetune.eval_every", size(eval_every)},
      {"eval.beam", size(beam)},
      {"eval.max_len", size(max_len)},
      {"eval.sentence_bleu", [this](const std::string& k, const std::string& v) { sentence_bleu = parse_bool(k, v); }},
  };
  for (const auto& [key, value] : values) {
    const auto it = setters.find(key);
    if (it == setters.end()) throw ConfigError("unknown config key '" + key + "'");
    it->second(key, value);
  }
  if (budgets.code == 0 || budgets.target < 2) throw ConfigError("budgets.code must be positive and budgets.target at least 2");
  if (mask_ratio <= 0.0 || mask_ratio > 1.0) throw ConfigError("pretrain.mask_ratio must lie in (0, 1]");
  parse_schedule(schedule);
  language_set();
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  RunConfig config;
  config.apply(parse_key_values(ss.str()));
  return config;
}

std::set<Language> RunConfig::language_set() const {
  std::set<Language> out;
  std::size_t start = 0;
  while (start <= languages.size()) {
    const std::size_t comma = std::min(languages.find(',', start), languages.size());
    const std::string name(trim(std::string_view(languages).substr(start, comma - start)));
    const auto lang = parse_language(name);
    if (!lang || (*lang != Language::kJava && *lang != Language::kPython)) {
      throw ConfigError("unsupported language '" + name + "'");
    }
    out.insert(*lang);
    start = comma + 1;
  }
  return out;
}

ModelConfig RunConfig::model_config(int vocab) const {
  ModelConfig c = ModelConfig::preset(preset);
  if (layers) c.layers = *layers;
  if (d_model) c.d_model = *d_model;
  if (d_ff) c.d_ff = *d_ff;
  if (heads) c.heads = *heads;
  if (dropout) c.dropout = *dropout;
  c.vocab_size = vocab;
  c.max_source_len = static_cast<int>(budgets.max_source_len());
  c.max_target_len = static_cast<int>(budgets.target);
  c.seed = seed;
  c.validate();
  return c;
}

PretrainConfig RunConfig::pretrain_config() const {
  PretrainConfig p;
  p.schedule = parse_schedule(schedule);
  p.batch_size = pretrain_batch_size;
  p.optimizer.lr = pretrain_lr;
  p.optimizer.warmup = pretrain_warmup;
  p.optimizer.weight_decay = weight_decay;
  p.seed = seed;
  p.mask_ratio = mask_ratio;
  return p;
}

FinetuneConfig RunConfig::finetune_config() const {
  FinetuneConfig f;
  f.steps = finetune_steps;
  f.batch_size = finetune_batch_size;
  f.optimizer.lr = finetune_lr;
  f.optimizer.warmup = finetune_warmup;
  f.optimizer.total_steps = finetune_steps;
  f.optimizer.weight_decay = weight_decay;
  f.eval_every = eval_every;
  f.seed = seed;
  return f;
}

GenerationEvalOptions RunConfig::eval_options() const {
  GenerationEvalOptions o;
  o.beam = beam;
  o.max_len = max_len;
  o.sentence_bleu = sentence_bleu;
  o.jobs = jobs;
  return o;
}

}  // namespace codeseq
