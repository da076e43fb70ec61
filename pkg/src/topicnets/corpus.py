"""Bibliographic corpus ingestion, author-name normalization, and text
preprocessing.

Records arrive as line-delimited JSON with fields ``id``, ``title``,
``abstract``, ``authors`` and ``date`` (``YYYY-MM``).  Titles and abstracts
are reduced to alphabetic lowercase tokens, filtered against a stop list,
lemmatized through an override lexicon plus a rule-based plural stripper,
and encoded against a frequency-thresholded vocabulary.
"""

from __future__ import annotations

import json
import re
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from hashlib import sha256
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence, TextIO

__all__ = [
    "NamingConvention",
    "YearMonth",
    "Document",
    "Corpus",
    "ParseIssue",
    "AuthorId",
    "Vocabulary",
    "TokenizedDoc",
    "parse_corpus",
    "serialize_corpus",
    "normalize_author",
    "preprocess_document",
    "lemmatize",
    "build_vocabulary",
    "tokenize_corpus",
    "load_word_list",
    "load_lexicon",
    "default_stopwords",
    "default_lexicon",
    "write_tokenized_corpus",
    "read_tokenized_corpus",
]

_DATE_RE = re.compile(r"^(\d{4})-(\d{2})$")

TOKENS_FORMAT = "topicnets-tokens 1"


class NamingConvention(Enum):
    """How raw author names are collapsed into node labels."""

    FULL_NAME = "full"
    FIRST_INITIAL_LAST_NAME = "initial"

    @classmethod
    def parse(cls, text: str) -> "NamingConvention":
        for member in cls:
            if member.value == text:
                return member
        raise ValueError(f"unknown naming convention: {text!r}")


@dataclass(frozen=True, order=True)
class YearMonth:
    """Calendar month; day-of-month is never tracked."""

    year: int
    month: int

    def __post_init__(self) -> None:
        if not 1 <= self.month <= 12:
            raise ValueError(f"month out of range: {self.month}")

    @classmethod
    def parse(cls, text: str) -> "YearMonth":
        m = _DATE_RE.match(text.strip())
        if m is None:
            raise ValueError(f"date must be YYYY-MM, got {text!r}")
        return cls(int(m.group(1)), int(m.group(2)))

    def __str__(self) -> str:
        return f"{self.year:04d}-{self.month:02d}"

    def index_from(self, origin: "YearMonth") -> int:
        """Months elapsed since ``origin`` (0 for the origin itself)."""
        return (self.year - origin.year) * 12 + (self.month - origin.month)

    def plus(self, months: int) -> "YearMonth":
        total = self.year * 12 + (self.month - 1) + months
        return YearMonth(total // 12, total % 12 + 1)


@dataclass(frozen=True)
class Document:
    doc_id: str
    title: str
    abstract: str
    authors: tuple[str, ...]
    month: YearMonth

    def __post_init__(self) -> None:
        if not self.doc_id:
            raise ValueError("doc_id must be nonempty")
        if not self.authors:
            raise ValueError(f"document {self.doc_id}: empty author list")


@dataclass(frozen=True)
class ParseIssue:
    line_no: int
    message: str


class Corpus:
    """Ordered document collection with unique ids."""

    def __init__(self, documents: Sequence[Document]):
        self.documents = list(documents)
        self._by_id: dict[str, Document] = {}
        for doc in self.documents:
            if doc.doc_id in self._by_id:
                raise ValueError(f"duplicate doc_id: {doc.doc_id}")
            self._by_id[doc.doc_id] = doc

    def __len__(self) -> int:
        return len(self.documents)

    def __iter__(self):
        return iter(self.documents)

    def get(self, doc_id: str) -> Document | None:
        return self._by_id.get(doc_id)

    @property
    def origin(self) -> YearMonth:
        """Earliest publication month; month indices count from here."""
        if not self.documents:
            raise ValueError("empty corpus has no origin month")
        return min(doc.month for doc in self.documents)


def _parse_record(line: str) -> Document:
    try:
        raw = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ValueError(f"invalid JSON: {exc.msg}") from exc
    if not isinstance(raw, dict):
        raise ValueError("record is not an object")
    missing = [k for k in ("id", "title", "abstract", "authors", "date") if k not in raw]
    if missing:
        raise ValueError(f"missing field(s): {', '.join(missing)}")
    authors = raw["authors"]
    if not isinstance(authors, list) or not authors or not all(
        isinstance(a, str) and a.strip() for a in authors
    ):
        raise ValueError("authors must be a nonempty list of nonempty strings")
    return Document(
        doc_id=str(raw["id"]),
        title=str(raw["title"]),
        abstract=str(raw["abstract"]),
        authors=tuple(authors),
        month=YearMonth.parse(str(raw["date"])),
    )


def parse_corpus(
    stream: TextIO | Iterable[str], strict: bool = False
) -> tuple[Corpus, list[ParseIssue]]:
    """Parse line-delimited records into a corpus plus an issue report.

    Malformed lines are skipped and recorded with their 1-based line number;
    ``strict=True`` turns the first malformed line into a raised error.
    Document order follows stream order.
    """
    documents: list[Document] = []
    issues: list[ParseIssue] = []
    seen: set[str] = set()
    for line_no, line in enumerate(stream, start=1):
        if not line.strip():
            continue
        try:
            doc = _parse_record(line)
            if doc.doc_id in seen:
                raise ValueError(f"duplicate doc_id: {doc.doc_id}")
        except ValueError as exc:
            if strict:
                raise ValueError(f"line {line_no}: {exc}") from exc
            issues.append(ParseIssue(line_no, str(exc)))
            continue
        seen.add(doc.doc_id)
        documents.append(doc)
    return Corpus(documents), issues


def serialize_corpus(corpus: Corpus, stream: TextIO) -> None:
    """Inverse of :func:`parse_corpus`; stable field order, one record per line."""
    for doc in corpus:
        record = {
            "id": doc.doc_id,
            "title": doc.title,
            "abstract": doc.abstract,
            "authors": list(doc.authors),
            "date": str(doc.month),
        }
        stream.write(json.dumps(record, ensure_ascii=False) + "\n")


@dataclass(frozen=True)
class AuthorId:
    label: str
    convention: NamingConvention


def normalize_author(raw: str, convention: NamingConvention) -> AuthorId:
    """Collapse a raw author name to a node label.

    Punctuation and digits are dropped, letters lowercased, whitespace
    collapsed.  Under FIRST_INITIAL_LAST_NAME only the first token's initial
    and the last token survive ("Lindsay M. Barnes" -> "l barnes").
    """
    cleaned = "".join(
        ch if ch.isalpha() else (" " if ch.isspace() else "") for ch in raw
    )
    tokens = cleaned.lower().split()
    if not tokens:
        raise ValueError(f"author name reduces to empty: {raw!r}")
    if convention is NamingConvention.FIRST_INITIAL_LAST_NAME:
        label = f"{tokens[0][0]} {tokens[-1]}"
    else:
        label = " ".join(tokens)
    return AuthorId(label=label, convention=convention)


def lemmatize(token: str, lexicon: dict[str, str]) -> str:
    """Lexicon override first, then a conservative plural stripper."""
    if token in lexicon:
        return lexicon[token]
    if len(token) > 4 and token.endswith("ies"):
        return token[:-3] + "y"
    if len(token) > 4 and token.endswith(("sses", "xes", "zes", "ches", "shes")):
        return token[:-2]
    if (
        len(token) >= 4
        and token.endswith("s")
        and not token.endswith(("ss", "us", "is"))
    ):
        return token[:-1]
    return token


def preprocess_document(
    doc: Document, stopwords: frozenset[str] | set[str], lexicon: dict[str, str]
) -> list[str]:
    """Turn title+abstract into a lemmatized token list.

    Non-alphabetic characters (including digits and hyphens) become spaces,
    everything is lowercased, single-letter tokens and stop words are
    dropped, survivors are lemmatized.  Order and duplicates are preserved.
    """
    text = f"{doc.title} {doc.abstract}"
    cleaned = "".join(ch if ch.isalpha() else " " for ch in text).lower()
    out: list[str] = []
    for token in cleaned.split():
        if len(token) < 2 or token in stopwords:
            continue
        out.append(lemmatize(token, lexicon))
    return out


@dataclass
class Vocabulary:
    """Dense term index; ids follow first appearance of retained terms."""

    terms: list[str]
    index: dict[str, int]
    min_count: int

    def __len__(self) -> int:
        return len(self.terms)

    def __contains__(self, term: str) -> bool:
        return term in self.index

    def id_of(self, term: str) -> int | None:
        return self.index.get(term)

    def term_of(self, token_id: int) -> str:
        return self.terms[token_id]

    def digest(self) -> str:
        h = sha256()
        for term in self.terms:
            h.update(term.encode("utf-8"))
            h.update(b"\n")
        return h.hexdigest()


@dataclass(frozen=True)
class TokenizedDoc:
    doc_id: str
    tokens: tuple[int, ...]
    month: YearMonth


def build_vocabulary(
    token_lists: Sequence[Sequence[str]], min_count: int = 5
) -> tuple[Vocabulary, list[list[int]]]:
    """Retain terms with corpus frequency >= ``min_count`` and encode docs.

    Ids are assigned in first-appearance order over the retained terms;
    below-threshold tokens are dropped from the encoded lists.
    """
    if min_count < 1:
        raise ValueError("min_count must be >= 1")
    counts = Counter(t for tokens in token_lists for t in tokens)
    terms: list[str] = []
    index: dict[str, int] = {}
    encoded: list[list[int]] = []
    for tokens in token_lists:
        ids: list[int] = []
        for term in tokens:
            if counts[term] < min_count:
                continue
            tid = index.get(term)
            if tid is None:
                tid = len(terms)
                index[term] = tid
                terms.append(term)
            ids.append(tid)
        encoded.append(ids)
    return Vocabulary(terms=terms, index=index, min_count=min_count), encoded


def tokenize_corpus(
    corpus: Corpus,
    stopwords: frozenset[str] | set[str],
    lexicon: dict[str, str],
    min_count: int = 5,
) -> tuple[Vocabulary, list[TokenizedDoc]]:
    token_lists = [preprocess_document(doc, stopwords, lexicon) for doc in corpus]
    vocab, encoded = build_vocabulary(token_lists, min_count)
    docs = [
        TokenizedDoc(doc_id=doc.doc_id, tokens=tuple(ids), month=doc.month)
        for doc, ids in zip(corpus, encoded)
    ]
    return vocab, docs


def load_word_list(path: str | Path) -> frozenset[str]:
    """Newline-delimited UTF-8 word list; '#' lines are comments."""
    words = set()
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        word = line.strip()
        if word and not word.startswith("#"):
            words.add(word)
    return frozenset(words)


def load_lexicon(path: str | Path) -> dict[str, str]:
    """Tab-separated ``term<TAB>lemma`` pairs; '#' lines are comments."""
    lexicon: dict[str, str] = {}
    for line_no, line in enumerate(
        Path(path).read_text(encoding="utf-8").splitlines(), start=1
    ):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        parts = stripped.split("\t")
        if len(parts) != 2 or not parts[0] or not parts[1]:
            raise ValueError(f"{path}: line {line_no}: expected 'term<TAB>lemma'")
        lexicon[parts[0]] = parts[1]
    return lexicon


def _data_path(name: str) -> Path:
    return Path(str(resources.files("topicnets").joinpath("data", name)))


def default_stopwords() -> frozenset[str]:
    return load_word_list(_data_path("stopwords_en.txt"))


def default_lexicon() -> dict[str, str]:
    return load_lexicon(_data_path("lemmas.txt"))


def write_tokenized_corpus(
    vocab: Vocabulary, docs: Sequence[TokenizedDoc], path: str | Path
) -> None:
    """Versioned text format: header, vocabulary block, then one doc per line."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(TOKENS_FORMAT + "\n")
        fh.write(f"min_count\t{vocab.min_count}\n")
        fh.write(f"vocab\t{len(vocab)}\n")
        for term in vocab.terms:
            fh.write(term + "\n")
        fh.write(f"docs\t{len(docs)}\n")
        for doc in docs:
            ids = " ".join(str(t) for t in doc.tokens)
            fh.write(f"{doc.doc_id}\t{doc.month}\t{ids}\n")


def read_tokenized_corpus(path: str | Path) -> tuple[Vocabulary, list[TokenizedDoc]]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != TOKENS_FORMAT:
        raise ValueError(f"{path}: not a {TOKENS_FORMAT!r} file")
    pos = 1

    def _field(expected: str) -> str:
        nonlocal pos
        key, _, value = lines[pos].partition("\t")
        if key != expected:
            raise ValueError(f"{path}: expected '{expected}' at line {pos + 1}")
        pos += 1
        return value

    min_count = int(_field("min_count"))
    n_terms = int(_field("vocab"))
    terms = lines[pos : pos + n_terms]
    pos += n_terms
    n_docs = int(_field("docs"))
    docs: list[TokenizedDoc] = []
    for line in lines[pos : pos + n_docs]:
        doc_id, date, ids = line.split("\t")
        tokens = tuple(int(t) for t in ids.split()) if ids else ()
        docs.append(TokenizedDoc(doc_id, tokens, YearMonth.parse(date)))
    if len(docs) != n_docs:
        raise ValueError(f"{path}: truncated document block")
    vocab = Vocabulary(
        terms=list(terms),
        index={t: i for i, t in enumerate(terms)},
        min_count=min_count,
    )
    for doc in docs:
        if any(t >= len(vocab) for t in doc.tokens):
            raise ValueError(f"{path}: token id out of range in {doc.doc_id}")
    return vocab, docs
