#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "codeseq/cli.hpp"
#include "codeseq/error.hpp"
#include "codeseq/linearize.hpp"
#include "codeseq/metrics.hpp"
#include "codeseq/nlextract.hpp"
#include "codeseq/parser.hpp"
#include "codeseq/pipeline.hpp"
#include "codeseq/pretrain.hpp"
#include "codeseq/vocab.hpp"

namespace py = pybind11;
using namespace codeseq;

namespace {

Language language_arg(const std::string& name) {
  const auto lang = parse_language(name);
  if (!lang || *lang == Language::kOther) throw ArgumentError("unsupported language '" + name + "'");
  return *lang;
}

py::dict features_dict(const MethodFeatures& f) {
  py::dict d;
  d["id"] = f.id;
  d["code"] = f.code.tokens;
  d["name_index"] = f.code.name_index;
  d["ast"] = f.ast.tokens;
  d["nl"] = f.nl.tokens;
  d["name_subtokens"] = f.nl.s;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "codeseq native core";

  static py::exception<Error> error(m, "Error");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      error((std::string(e.kind()) + ": " + e.what()).c_str());
    }
  });

  m.def("code_tokens", [](const std::string& source, const std::string& lang) {
    return tokenize_code(source, language_arg(lang)).tokens;
  });
  m.def("sbt", [](const std::string& source, const std::string& lang) {
    return sbt(parse(source, language_arg(lang)).root).tokens;
  });
  m.def(
      "xsbt",
      [](const std::string& source, const std::string& lang, bool pruned) {
        const Language l = language_arg(lang);
        const SyntaxTree tree = parse(source, l);
        return pruned ? xsbt(tree.root, builtin_expr_kinds().at(l)).tokens : xsbt(tree.root).tokens;
      },
      py::arg("source"), py::arg("language"), py::arg("pruned") = true);
  m.def("split_identifier", &split_identifier);
  m.def("featurize", [](const std::string& source, const std::string& lang) {
    MethodRecord r;
    r.id = "method";
    r.language = language_arg(lang);
    r.source = source;
    return features_dict(featurize(r, builtin_expr_kinds().at(r.language)));
  });
  m.def("ingest", [](const std::filesystem::path& root, const std::vector<std::string>& languages) {
    std::set<Language> langs;
    for (const auto& l : languages) langs.insert(language_arg(l));
    py::list out;
    for (const MethodRecord& r : ingest_corpus(root, langs)) {
      py::dict d;
      d["id"] = r.id;
      d["language"] = std::string(to_string(r.language));
      d["source"] = r.source;
      d["path"] = r.path;
      d["docstring"] = r.docstring ? py::cast(*r.docstring) : py::none();
      out.append(d);
    }
    return out;
  });

  m.def("bleu", &bleu, py::arg("candidate"), py::arg("reference"), py::arg("max_n") = 4);
  m.def("corpus_bleu", &corpus_bleu, py::arg("pairs"), py::arg("max_n") = 4);
  m.def("rouge_l", &rouge_l);
  m.def("mrr", &mrr);
  m.def("exact_match_at_k", &exact_match_at_k);

  py::class_<Vocabulary>(m, "Vocabulary")
      .def_static("load", &Vocabulary::load)
      .def_static("from_json", &Vocabulary::from_json)
      .def("to_json", &Vocabulary::to_json)
      .def("save", &Vocabulary::save)
      .def("encode_bpe", &Vocabulary::encode_bpe)
      .def("encode_words", &Vocabulary::encode_words)
      .def("decode", &Vocabulary::decode)
      .def("piece", &Vocabulary::piece)
      .def("hash", &Vocabulary::hash)
      .def("__len__", &Vocabulary::size);

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = cli::run(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      "Runs the command line; returns (exit code, stdout, stderr).");
}
