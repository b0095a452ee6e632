"""Python access to the codeseq core."""

from ._core import (
    Error,
    Vocabulary,
    bleu,
    code_tokens,
    corpus_bleu,
    exact_match_at_k,
    featurize,
    ingest,
    mrr,
    rouge_l,
    run_cli,
    sbt,
    split_identifier,
    xsbt,
)

__all__ = [
    "Error",
    "Vocabulary",
    "bleu",
    "code_tokens",
    "corpus_bleu",
    "exact_match_at_k",
    "featurize",
    "ingest",
    "mrr",
    "rouge_l",
    "run_cli",
    "sbt",
    "split_identifier",
    "xsbt",
]
