"""Few-shot prompting harness for LLM-based tagging.

Prompts list ``k`` worked examples followed by the query phrase; responses
are expected as one ``token/TAG`` pair per line. Responses come either from a
chat-completion endpoint or from a directory of canned ``<phrase-id>.txt``
files, which keeps tests hermetic.
"""

from __future__ import annotations

import json
import logging
import os
import re
import time
import urllib.error
import urllib.request
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol, Sequence

import numpy as np

from .corpus import TAGS, Dataset, Phrase, Tag
from .evaluation import EvalReport, evaluate

log = logging.getLogger(__name__)

API_KEY_ENV = "RECIPE_NER_API_KEY"

DEFAULT_PREAMBLE = (
    "You are tagging the tokens of recipe ingredient phrases for named entity recognition.\n"
    "Use exactly one of these tags for every token: "
    + ", ".join(t.value for t in TAGS) + ".\n"
    "NAME is the ingredient, QUANTITY an amount, UNIT a measure, STATE a processing state, "
    "SIZE a size, TEMP a temperature, DF dry or fresh, and O anything else."
)
DEFAULT_INSTRUCTION = "Answer with one token/TAG pair per line, in the order of the tokens."

_TAG_ALIASES = {
    "OTHER": Tag.O, "OUTSIDE": Tag.O, "NONE": Tag.O,
    "TEMPERATURE": Tag.TEMP, "QTY": Tag.QUANTITY, "INGREDIENT": Tag.NAME,
    "DRY/FRESH": Tag.DF, "DRYFRESH": Tag.DF,
}


@dataclass(frozen=True)
class PromptTemplate:
    preamble: str = DEFAULT_PREAMBLE
    k: int = 5
    instruction: str = DEFAULT_INSTRUCTION

    def __post_init__(self):
        if self.k < 0:
            raise ValueError("k must be >= 0")

    @classmethod
    def from_file(cls, path: str | Path, k: int = 5) -> "PromptTemplate":
        """Read a template file: preamble, a line ``---``, then the output instruction."""
        text = Path(path).read_text(encoding="utf-8")
        preamble, sep, instruction = text.partition("\n---\n")
        return cls(preamble.strip(), k, instruction.strip() if sep else DEFAULT_INSTRUCTION)


def render_example(texts: Sequence[str], tags: Sequence[Tag] | None = None) -> str:
    lines = ["Phrase: " + " ".join(texts)]
    if tags is not None:
        lines.append("Tags:")
        lines.extend(f"{w}/{t.value}" for w, t in zip(texts, tags))
    return "\n".join(lines)


def build_prompt(template: PromptTemplate, exemplars: Sequence[Phrase],
                 query: Sequence[str]) -> str:
    if len(exemplars) != template.k:
        raise ValueError(f"template expects {template.k} exemplars, got {len(exemplars)}")
    parts = [template.preamble]
    for i, ex in enumerate(exemplars, start=1):
        parts.append(f"Example {i}\n" + render_example(ex.texts, ex.tags))
    parts.append(render_example(query) + "\n" + template.instruction)
    return "\n\n".join(parts) + "\n"


def select_exemplars(pool: Dataset, k: int, seed: int = 0) -> list[Phrase]:
    if k > len(pool):
        raise ValueError(f"need {k} exemplars but the pool has {len(pool)} phrases")
    rng = np.random.Generator(np.random.PCG64(seed))
    idx = sorted(rng.choice(len(pool), size=k, replace=False)) if k else []
    return [pool[int(i)] for i in idx]


def _parse_tag(s: str) -> Tag | None:
    s = s.strip().strip(".,;:*`'\"()[]").upper()
    if s in _TAG_ALIASES:
        return _TAG_ALIASES[s]
    try:
        return Tag(s)
    except ValueError:
        return None


def _pairs(raw: str) -> list[tuple[str, Tag]]:
    pairs = []
    for line in raw.splitlines():
        for chunk in line.split():
            word, sep, tag_s = chunk.rpartition("/")
            if not sep or not word:
                continue
            tag = _parse_tag(tag_s)
            if tag is not None:
                pairs.append((word, tag))
    return pairs


def parse_response(raw: str, query: Sequence[str]) -> list[Tag]:
    """Map a free-text ``token/TAG`` answer onto ``query`` positions.

    Pairs are matched in order: each pair is assigned to the next query
    position with the same token text (case-insensitive), skipping positions
    the answer left out. Unmatched positions stay O. Never raises.
    """
    out = [Tag.O] * len(query)
    try:
        low = [q.lower() for q in query]
        cursor = 0
        for word, tag in _pairs(raw if isinstance(raw, str) else ""):
            w = word.lower()
            for j in range(cursor, len(query)):
                if low[j] == w:
                    out[j] = tag
                    cursor = j + 1
                    break
    except Exception:  # pragma: no cover - defensive: parsing must stay total
        log.exception("response parsing failed")
    return out


class TransportError(RuntimeError):
    pass


class Transport(Protocol):
    def complete(self, phrase_id: str, prompt: str) -> str: ...


class CannedStore:
    """Responses read from ``<directory>/<phrase-id>.txt``."""

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)
        if not self.directory.is_dir():
            raise FileNotFoundError(f"canned response directory not found: {self.directory}")

    def path_for(self, phrase_id: str) -> Path:
        safe = re.sub(r"[^A-Za-z0-9_.#-]", "_", phrase_id)
        return self.directory / f"{safe}.txt"

    def complete(self, phrase_id: str, prompt: str) -> str:
        path = self.path_for(phrase_id)
        try:
            return path.read_text(encoding="utf-8")
        except OSError as e:
            raise TransportError(f"no canned response for phrase {phrase_id}") from e

    @classmethod
    def write_echo(cls, dataset: Dataset, directory: str | Path) -> "CannedStore":
        """Store gold answers for every phrase (a perfect responder)."""
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        store = cls.__new__(cls)
        store.directory = directory
        for p in dataset:
            store.path_for(p.id).write_text(
                "\n".join(f"{t.text}/{t.tag.value}" for t in p.tokens) + "\n", encoding="utf-8")
        return store


@dataclass(frozen=True)
class TransportConfig:
    endpoint: str
    model: str
    timeout: float = 60.0
    max_retries: int = 2
    backoff: float = 0.5

    def __post_init__(self):
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")


class ChatCompletionTransport:
    """POSTs ``{model, messages}`` and reads ``choices[0].message.content``."""

    def __init__(self, cfg: TransportConfig, api_key: str | None = None):
        self.cfg = cfg
        self.api_key = api_key if api_key is not None else os.environ.get(API_KEY_ENV)

    def _request(self, prompt: str) -> str:
        body = json.dumps({"model": self.cfg.model,
                           "messages": [{"role": "user", "content": prompt}]}).encode()
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        req = urllib.request.Request(self.cfg.endpoint, data=body, headers=headers, method="POST")
        with urllib.request.urlopen(req, timeout=self.cfg.timeout) as resp:
            payload = json.loads(resp.read().decode("utf-8"))
        try:
            return payload["choices"][0]["message"]["content"] or ""
        except (KeyError, IndexError, TypeError) as e:
            raise TransportError(f"unexpected response shape: {str(payload)[:200]}") from e

    def complete(self, phrase_id: str, prompt: str) -> str:
        last: Exception | None = None
        for attempt in range(self.cfg.max_retries + 1):
            try:
                return self._request(prompt)
            except (urllib.error.URLError, TimeoutError, OSError, ValueError, TransportError) as e:
                last = e
                log.warning("request for phrase %s failed (attempt %d): %s", phrase_id, attempt + 1, e)
                if attempt < self.cfg.max_retries:
                    time.sleep(self.cfg.backoff * (2 ** attempt))
        raise TransportError(f"phrase {phrase_id}: {last}")


@dataclass
class FewShotResult:
    report: EvalReport
    predictions: Dataset
    failures: int


def run_fewshot_eval(dataset: Dataset, template: PromptTemplate, transport: Transport,
                     exemplars: Sequence[Phrase] = (), max_in_flight: int = 1) -> FewShotResult:
    """Prompt, parse and score every phrase of ``dataset``.

    A phrase whose request fails is predicted all-O and counted in
    ``report.warnings["transport_failures"]``.
    """
    if not len(dataset):
        raise ValueError("dataset must not be empty")
    exemplars = list(exemplars)

    def one(phrase: Phrase) -> tuple[list[Tag], bool]:
        prompt = build_prompt(template, exemplars, phrase.texts)
        try:
            raw = transport.complete(phrase.id, prompt)
        except TransportError as e:
            log.warning("%s", e)
            return [Tag.O] * len(phrase), False
        return parse_response(raw, phrase.texts), True

    if max_in_flight > 1:
        with ThreadPoolExecutor(max_workers=max_in_flight) as pool:
            results = list(pool.map(one, dataset.phrases))
    else:
        results = [one(p) for p in dataset]

    pred = Dataset(tuple(p.with_tags(tags) for p, (tags, _) in zip(dataset, results)),
                   name=dataset.name)
    failures = sum(1 for _, ok in results if not ok)
    report = evaluate(dataset, pred)
    report.warnings["transport_failures"] = failures
    return FewShotResult(report, pred, failures)
