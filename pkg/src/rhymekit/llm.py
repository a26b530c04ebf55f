"""One-shot LLM rhyme-recognition benchmark.

Builds a fixed instruction-plus-worked-example prompt, sends one poem per
request to a chat-completion REST endpoint, extracts the JSON rhyme
groups from the reply, maps the word groups back onto poem lines, and
scores the result against gold annotations with link F1.
"""

from __future__ import annotations

import csv
import json
import logging
import os
import re
import threading
import time
import unicodedata
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Protocol, Sequence

import requests

from .corpus import Poem, line_final_word
from .errors import (
    ConfigError,
    LlmResponseError,
    ProviderError,
    ResponseParseError,
    ResponseShapeError,
    SchemaError,
)
from .evaluation import Annotation, LinkSet, chains_to_links, f1_links, pooled_f1

logger = logging.getLogger(__name__)

PROMPT_INSTRUCTIONS = (
    "You are an expert in poetry. Your task is to identify end-of-line "
    "rhymes in the given text. Focus exclusively on rhymes that occur "
    "at the end of each line. Ignore internal or slant rhymes unless "
    "they match at the end of the line.  Return your output as a JSON "
    "object containing lists of rhyming words, grouped together. If a "
    "word appears in multiple rhyming lines, repeat it in the output "
    "as many times as it appears."
)

EXAMPLE_POEM = (
    "There was an Old Man with a beard,\n"
    "Who said, 'It is just as I feared!\n"
    "Two Owls and a Hen,\n"
    "Four Larks and a Wren,\n"
    "Have all built their nests in my beard!'"
)

EXAMPLE_OUTPUT = '{"rhymes": [["beard", "feared", "beard"], ["hen", "wren"]]}'

ASSISTANT_EXAMPLE = "EXAMPLE:\nText:\n" + EXAMPLE_POEM + "\n" + EXAMPLE_OUTPUT

DEFAULT_TEMPERATURE = 0.0


@dataclass(frozen=True)
class ProviderConfig:
    endpoint_url: str
    model_name: str
    auth_token_env: str
    max_retries: int = 3
    timeout_s: float = 60.0
    rate_limit_rpm: int = 30

    def __post_init__(self):
        if self.max_retries < 0:
            raise ConfigError(f"max_retries must be >= 0, got {self.max_retries}")
        if self.timeout_s <= 0 or self.rate_limit_rpm <= 0:
            raise ConfigError("timeout_s and rate_limit_rpm must be positive")


def provider_config_from_file(path: str | Path) -> ProviderConfig:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON: {exc}")
    try:
        return ProviderConfig(
            endpoint_url=data["endpoint_url"],
            model_name=data["model_name"],
            auth_token_env=data["auth_token_env"],
            max_retries=int(data.get("max_retries", 3)),
            timeout_s=float(data.get("timeout_s", 60.0)),
            rate_limit_rpm=int(data.get("rate_limit_rpm", 30)),
        )
    except KeyError as exc:
        raise ConfigError(f"{path}: provider config missing field {exc}")


@dataclass(frozen=True)
class RhymeGroups:
    groups: tuple[tuple[str, ...], ...]


def poem_text(poem: Poem) -> str:
    """Lines joined by newlines; blank lines between stanzas."""
    return "\n\n".join("\n".join(stanza) for stanza in poem.stanzas)


def build_prompt(poem: Poem) -> tuple[str, str]:
    """Returns (user_message, assistant_example) for one poem.

    The user message carries the fixed instruction block and the poem; the
    assistant message carries the fixed worked example, ending in the
    output the model is expected to imitate.
    """
    if poem.line_count < 2:
        raise SchemaError(
            f"poem {poem.id!r} has {poem.line_count} lines; need at least 2")
    user = PROMPT_INSTRUCTIONS + "\n\nText:\n" + poem_text(poem)
    return user, ASSISTANT_EXAMPLE


def parse_response(raw: str) -> RhymeGroups:
    """Extract rhyme groups from a raw model reply.

    Scans for the first JSON object with a "rhymes" key, tolerating code
    fences and surrounding prose. Singleton groups are dropped with a
    warning; anything other than lists of non-empty strings is an error.
    """
    decoder = json.JSONDecoder()
    found_object = False
    for match in re.finditer(r"\{", raw):
        try:
            obj, _ = decoder.raw_decode(raw, match.start())
        except json.JSONDecodeError:
            continue
        if not isinstance(obj, dict):
            continue
        found_object = True
        if "rhymes" not in obj:
            continue
        rhymes = obj["rhymes"]
        if not isinstance(rhymes, list):
            raise ResponseShapeError(f'"rhymes" is not a list: {rhymes!r}')
        groups: list[tuple[str, ...]] = []
        for group in rhymes:
            if not isinstance(group, list) or not all(
                    isinstance(w, str) and w for w in group):
                raise ResponseShapeError(
                    f"rhyme group is not a list of non-empty strings: {group!r}")
            if len(group) < 2:
                logger.warning("dropping singleton rhyme group %r", group)
                continue
            groups.append(tuple(group))
        return RhymeGroups(groups=tuple(groups))
    if found_object:
        raise ResponseShapeError('no JSON object with a "rhymes" key found')
    raise ResponseParseError(raw)


def _normalize(word: str) -> str:
    # Unicode lowercase plus stripping leading/trailing non-letters
    stripped = re.sub(r"^[\W\d_]+|[\W\d_]+$", "", word)
    return unicodedata.normalize("NFC", stripped).casefold()


def map_groups_to_lines(groups: RhymeGroups, poem: Poem
                        ) -> tuple[tuple[int, ...], ...]:
    """Map word groups onto line indices by final-word equality.

    Matches are consumed in ascending line order, globally across groups,
    so every line joins at most one chain. Groups left with fewer than two
    lines are dropped; unmatched words are logged with counts.
    """
    final_words = [line_final_word(line) for line in poem.lines]
    consumed: set[int] = set()
    unmatched: Counter = Counter()
    chains: list[tuple[int, ...]] = []
    for group in groups.groups:
        lines: list[int] = []
        for word in group:
            target = _normalize(word)
            for i, final in enumerate(final_words):
                if i in consumed or final != target:
                    continue
                consumed.add(i)
                lines.append(i)
                break
            else:
                unmatched[word] += 1
        if len(lines) >= 2:
            chains.append(tuple(sorted(lines)))
        else:
            consumed.difference_update(lines)
    if unmatched:
        logger.warning("poem %s: unmatched words %s", poem.id, dict(unmatched))
    return tuple(sorted(set(chains)))


class CompletionProvider(Protocol):
    model_name: str

    def complete(self, user_message: str, assistant_example: str) -> str: ...


class RestProvider:
    """Chat-completion REST client with retries and rate limiting.

    The bearer token is read from the configured environment variable at
    call time and never stored on the instance.
    """

    def __init__(self, config: ProviderConfig, session: Optional[requests.Session] = None):
        self.config = config
        self.model_name = config.model_name
        self._session = session or requests.Session()
        self._lock = threading.Lock()
        self._next_allowed = 0.0

    def _wait_for_slot(self) -> None:
        interval = 60.0 / self.config.rate_limit_rpm
        with self._lock:
            now = time.monotonic()
            wait = self._next_allowed - now
            self._next_allowed = max(now, self._next_allowed) + interval
        if wait > 0:
            time.sleep(wait)

    def complete(self, user_message: str, assistant_example: str) -> str:
        token = os.environ.get(self.config.auth_token_env)
        if not token:
            raise ConfigError(
                f"environment variable {self.config.auth_token_env} is not set")
        payload = {
            "model": self.config.model_name,
            "temperature": DEFAULT_TEMPERATURE,
            "messages": [
                {"role": "user", "content": user_message},
                {"role": "assistant", "content": assistant_example},
            ],
        }
        headers = {"Authorization": f"Bearer {token}"}
        last_error: Exception | None = None
        for attempt in range(self.config.max_retries + 1):
            self._wait_for_slot()
            try:
                response = self._session.post(
                    self.config.endpoint_url, json=payload, headers=headers,
                    timeout=self.config.timeout_s)
                if response.status_code in (429,) or response.status_code >= 500:
                    raise ProviderError(
                        f"HTTP {response.status_code}: {response.text[:200]}")
                response.raise_for_status()
                body = response.json()
                return body["choices"][0]["message"]["content"]
            except (requests.RequestException, ProviderError, KeyError,
                    IndexError, ValueError) as exc:
                last_error = exc
                if attempt < self.config.max_retries:
                    time.sleep(min(30.0, 2.0 ** attempt))
        raise ProviderError(
            f"{self.config.model_name}: request failed after "
            f"{self.config.max_retries + 1} attempts: {last_error}")


class ResponseArchive:
    """Append-only directory of raw responses, one JSON file per request."""

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        self._counter = 0

    def store(self, poem_id: str, model: str, raw: str) -> Path:
        with self._lock:
            self._counter += 1
            n = self._counter
            path = self.directory / f"{poem_id}-{n:04d}.json"
            path.write_text(
                json.dumps({
                    "poem_id": poem_id,
                    "model": model,
                    "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
                    "temperature": DEFAULT_TEMPERATURE,
                    "raw": raw,
                }, ensure_ascii=False, sort_keys=True, indent=1) + "\n",
                encoding="utf-8")
        return path


@dataclass(frozen=True)
class BenchmarkReport:
    model: str
    language: str
    pooled: dict[str, Optional[float]]  # annotator id -> pooled F1
    per_poem: dict[str, dict[str, float]]  # poem id -> annotator id -> F1
    failed_poems: tuple[str, ...]


def run_benchmark(provider: CompletionProvider, poems: Sequence[Poem],
                  gold: Sequence[Sequence[Annotation]],
                  archive: Optional[ResponseArchive] = None,
                  language: str = "", concurrency: int = 2) -> BenchmarkReport:
    """Query the provider once per poem and score against each gold set.

    Raw responses are archived before any parsing; poems whose request or
    parse fails are excluded from pooling and listed in the report.
    """
    gold_by_annotator: dict[str, dict[str, Annotation]] = {}
    for annotations in gold:
        for a in annotations:
            gold_by_annotator.setdefault(a.annotator_id, {})[a.poem_id] = a

    def one(poem: Poem) -> tuple[str, Optional[LinkSet]]:
        try:
            user, example = build_prompt(poem)
            raw = provider.complete(user, example)
            if archive is not None:
                archive.store(poem.id, provider.model_name, raw)
            groups = parse_response(raw)
            chains = map_groups_to_lines(groups, poem)
            annotation = Annotation(annotator_id=provider.model_name,
                                    poem_id=poem.id, chains=chains)
            return poem.id, chains_to_links(annotation)
        except (ProviderError, LlmResponseError, SchemaError) as exc:
            logger.warning("poem %s failed: %s", poem.id, exc)
            return poem.id, None

    if concurrency > 1 and len(poems) > 1:
        with ThreadPoolExecutor(max_workers=concurrency) as pool:
            results = list(pool.map(one, poems))
    else:
        results = [one(poem) for poem in poems]

    tagged = {pid: links for pid, links in results if links is not None}
    failed = tuple(pid for pid, links in results if links is None)
    per_poem: dict[str, dict[str, float]] = {}
    pooled: dict[str, Optional[float]] = {}
    for annotator, by_poem in sorted(gold_by_annotator.items()):
        pairs = []
        for pid, links in sorted(tagged.items()):
            if pid not in by_poem:
                continue
            gold_links = chains_to_links(by_poem[pid])
            pairs.append((links, gold_links))
            per_poem.setdefault(pid, {})[annotator] = f1_links(links, gold_links)
        pooled[annotator] = pooled_f1(pairs) if pairs else None
    return BenchmarkReport(
        model=provider.model_name, language=language, pooled=pooled,
        per_poem=per_poem, failed_poems=failed)


REPORT_CSV_HEADER = ["language", "model", "annotator", "f1", "failed_poems"]


def write_benchmark_csv(report: BenchmarkReport, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(REPORT_CSV_HEADER)
        for annotator in sorted(report.pooled):
            f1 = report.pooled[annotator]
            writer.writerow([
                report.language, report.model, annotator,
                "" if f1 is None else f"{f1:.6f}", len(report.failed_poems),
            ])
