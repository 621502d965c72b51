"""Pluggable LLM access for the annotation pipeline.

Three operations share one provider-agnostic completion interface:
k-candidate English-to-gloss translation, fingerspelling typo correction,
and gloss-to-English back-translation. A deterministic offline stub makes
every downstream behavior testable without network access; the HTTP client
speaks a generic JSON chat-completion shape configured via environment
variables.
"""

from __future__ import annotations

import enum
import hashlib
import json
import logging
import os
import re
import time
from dataclasses import dataclass, field
from importlib import resources
from typing import Callable, Protocol

from .gloss import GlossParseError, parse_gloss_sequence

logger = logging.getLogger(__name__)

ENV_ENDPOINT = "SIGNSCRIBE_LLM_ENDPOINT"
ENV_API_KEY = "SIGNSCRIBE_LLM_API_KEY"
ENV_MODEL_ID = "SIGNSCRIBE_LLM_MODEL"

MAX_ATTEMPTS = 3
BACKOFF_INITIAL_SECONDS = 1.0


class PromptName(str, enum.Enum):
    KSHOT_TRANSLATE = "kshot_translate"
    ERROR_CORRECT = "fs_error_correct"
    BACK_TRANSLATE = "back_translate"


@dataclass(frozen=True)
class PromptTemplate:
    name: PromptName
    body: str

    def render(self, phrase: str, k: int | None = None) -> str:
        out = self.body.replace("{phrase}", phrase)
        if k is not None:
            out = out.replace("{k}", str(k))
        return out


def _asset_text(filename: str) -> str:
    return resources.files("signscribe").joinpath("prompts", filename).read_text("utf-8")


def load_prompt(name: PromptName) -> PromptTemplate:
    return PromptTemplate(name=name, body=_asset_text(f"{name.value}.txt"))


def pinned_digests() -> dict[str, str]:
    return json.loads(_asset_text("digests.json"))


def verify_prompt_assets() -> None:
    """Check every prompt asset against its pinned digest."""
    for filename, expected in pinned_digests().items():
        data = (
            resources.files("signscribe").joinpath("prompts", filename).read_bytes()
        )
        actual = hashlib.sha256(data).hexdigest()
        if actual != expected:
            raise RuntimeError(f"prompt asset {filename} drifted: {actual} != {expected}")


class LlmError(RuntimeError):
    """Transport or response-format failure; ``raw`` carries the raw text."""

    def __init__(self, message: str, raw: str | None = None):
        self.raw = raw
        super().__init__(message)


class LlmClient(Protocol):
    model_id: str

    def complete(self, prompt: str, temperature: float = 1.0, max_tokens: int = 1024) -> str:
        ...


@dataclass(frozen=True)
class CandidateSet:
    phrase: str
    candidates: tuple[str, ...]
    model_id: str
    k: int


# --- response parsing ---------------------------------------------------------

_FENCE_RE = re.compile(r"```(?:json)?\s*(.*?)```", re.DOTALL)


def parse_candidate_json(text: str) -> list[tuple[int, str]]:
    """Extract the numbered-candidate JSON object from a completion.

    Tolerates code-fence wrapping and surrounding chatter; preserves the
    numeric-key order. Raises :class:`LlmError` with the raw text attached
    when no parseable object is found.
    """
    bodies = [m.group(1) for m in _FENCE_RE.finditer(text)] + [text]
    for body in bodies:
        start = body.find("{")
        end = body.rfind("}")
        if start < 0 or end <= start:
            continue
        try:
            obj = json.loads(body[start : end + 1])
        except json.JSONDecodeError:
            continue
        if not isinstance(obj, dict):
            continue
        items = []
        try:
            for key, value in obj.items():
                items.append((int(key), str(value)))
        except (TypeError, ValueError):
            continue
        return sorted(items, key=lambda kv: kv[0])
    raise LlmError("response is not a numbered-candidate JSON object", raw=text)


def _strip_wrapping(text: str) -> str:
    out = text.strip()
    fence = _FENCE_RE.search(out)
    if fence:
        out = fence.group(1).strip()
    if len(out) >= 2 and out[0] == '"' and out[-1] == '"':
        out = out[1:-1]
    return out


# --- operations ----------------------------------------------------------------


def translate_candidates(
    client: LlmClient, phrase: str, k: int = 10, temperature: float = 1.0
) -> CandidateSet:
    """Ask for k candidate glossings and keep the ones that parse."""
    if k < 1:
        raise ValueError("k must be >= 1")
    prompt = load_prompt(PromptName.KSHOT_TRANSLATE).render(phrase=phrase, k=k)
    text = client.complete(prompt, temperature=temperature)
    items = parse_candidate_json(text)
    if len(items) < k:
        logger.warning("expected %d candidates, got %d", k, len(items))
    candidates = []
    for _, raw in items[:k]:
        try:
            parse_gloss_sequence(raw)
        except GlossParseError as exc:
            logger.warning("dropping unparseable candidate %r: %s", raw, exc)
            continue
        candidates.append(raw)
    if not candidates:
        raise LlmError("no candidate parsed as a gloss line", raw=text)
    return CandidateSet(
        phrase=phrase, candidates=tuple(candidates), model_id=client.model_id, k=k
    )


def correct_fingerspelling(client: LlmClient, raw: str) -> str:
    """Fix typos in a greedy-decode transcript; returns the corrected line."""
    prompt = load_prompt(PromptName.ERROR_CORRECT).render(phrase=raw)
    return _strip_wrapping(client.complete(prompt, temperature=0.0))


def back_translate(client: LlmClient, glosses: str) -> str:
    """Translate a gloss line back into an English sentence."""
    if not glosses.strip():
        raise ValueError("empty gloss line")
    prompt = load_prompt(PromptName.BACK_TRANSLATE).render(phrase=glosses)
    return _strip_wrapping(client.complete(prompt, temperature=0.0))


# --- deterministic offline stub --------------------------------------------------

_PUNCT_STRIP = str.maketrans("", "", "!\"$%&'*,;<=>?[\\]^`{}~()")
_DROP_WORDS = ("THE", "A", "AN", "IS", "ARE", "AM", "WAS", "WERE", "BE", "OF")


def _naive_gloss(phrase: str) -> list[str]:
    return [w for w in phrase.translate(_PUNCT_STRIP).upper().split() if w]


def _stub_candidates(phrase: str, k: int) -> dict[str, str]:
    """Deterministic candidate glossings derived by simple transforms."""
    base = _naive_gloss(phrase)
    if not base:
        base = ["UNKNOWN"]
    dropped = [w for w in base if w not in _DROP_WORDS] or list(base)
    longest = max(range(len(base)), key=lambda i: len(base[i]))
    variants: list[list[str]] = [
        list(base),
        dropped,
        list(reversed(base)),
        base[-1:] + base[:-1],
        base[1:] + base[:1],
        base + ["FINISH"],
        ["ME" if w == "I" else w for w in base],
        [("fs-" + w) if i == longest else w for i, w in enumerate(base)],
        list(reversed(dropped)),
        ["NOW"] + base,
    ]
    unique: list[list[str]] = []
    for cand in variants:
        if cand not in unique:
            unique.append(cand)
        if len(unique) == k:
            break
    return {str(i + 1): " ".join(c) for i, c in enumerate(unique[:k])}


_STUB_CORRECTIONS = {
    "29 OLD MOUNT PLESANT": "29 OLD MOUNT PLEASANT",
    "HTTPNN//WW..VISISTDALARNASEE": "HTTP://WWW.VISITDALARNA.SE",
}


class StubClient:
    """Offline LLM with a fixture table and deterministic fallback rules.

    Routing inspects the rendered prompt: the stub recognizes each prompt
    template by its distinctive first line and extracts the quoted payload.
    """

    model_id = "stub"

    def __init__(
        self,
        translations: dict[str, dict[str, str]] | None = None,
        corrections: dict[str, str] | None = None,
        back_translations: dict[str, str] | None = None,
    ):
        self.translations = dict(translations or {})
        self.corrections = {**_STUB_CORRECTIONS, **(corrections or {})}
        self.back_translations = dict(back_translations or {})

    @staticmethod
    def _payload(prompt: str, label: str) -> str:
        matches = re.findall(rf'{label}: "(.*?)"\s*\nOutput:', prompt, re.DOTALL)
        if not matches:
            raise LlmError(f"stub could not find the {label} payload", raw=prompt)
        return matches[-1]

    def complete(self, prompt: str, temperature: float = 1.0, max_tokens: int = 1024) -> str:
        if prompt.startswith("You are an expert American Sign Language"):
            phrase = self._payload(prompt, "English")
            m = re.search(r"Please generate (\d+) different gloss translations", prompt)
            k = int(m.group(1)) if m else 10
            table = self.translations.get(phrase) or _stub_candidates(phrase, k)
            return "```json\n" + json.dumps(table, indent=0) + "\n```"
        if prompt.startswith("Your task is to take a line of english text"):
            phrase = self._payload(prompt, "English")
            return self.corrections.get(phrase, phrase)
        if prompt.startswith("You are an American Sign Language translator."):
            glosses = self._payload(prompt, "Glosses")
            if glosses in self.back_translations:
                return self.back_translations[glosses]
            words = []
            for token in glosses.split():
                lowered = token.lower()
                if lowered.startswith(("fs-", "ns-")):
                    words.append(token[3:].capitalize())
                elif token.startswith("#"):
                    words.append(token[1:].capitalize())
                elif token.upper().startswith("CL:"):
                    continue
                else:
                    words.append(token.lower())
            if not words:
                return ""
            words[0] = words[0].capitalize()
            return " ".join(words) + "."
        raise LlmError("stub does not recognize this prompt", raw=prompt)


class HttpClient:
    """Generic JSON-over-HTTP chat-completion client with retry/backoff."""

    def __init__(
        self,
        endpoint: str | None = None,
        api_key: str | None = None,
        model_id: str | None = None,
        max_attempts: int = MAX_ATTEMPTS,
        backoff_initial: float = BACKOFF_INITIAL_SECONDS,
        sleep: Callable[[float], None] = time.sleep,
        session=None,
    ):
        self.endpoint = endpoint or os.environ.get(ENV_ENDPOINT, "")
        self.api_key = api_key if api_key is not None else os.environ.get(ENV_API_KEY, "")
        self.model_id = model_id or os.environ.get(ENV_MODEL_ID, "default")
        if not self.endpoint:
            raise LlmError(f"no endpoint configured (set {ENV_ENDPOINT})")
        self.max_attempts = max_attempts
        self.backoff_initial = backoff_initial
        self._sleep = sleep
        if session is None:
            import requests

            session = requests.Session()
        self._session = session

    def complete(self, prompt: str, temperature: float = 1.0, max_tokens: int = 1024) -> str:
        payload = {
            "model": self.model_id,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": temperature,
            "max_tokens": max_tokens,
        }
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        last_error: Exception | None = None
        for attempt in range(self.max_attempts):
            if attempt:
                self._sleep(self.backoff_initial * (2 ** (attempt - 1)))
            try:
                response = self._session.post(
                    self.endpoint, json=payload, headers=headers, timeout=60
                )
                if response.status_code >= 500:
                    last_error = LlmError(f"server error {response.status_code}")
                    continue
                if response.status_code != 200:
                    raise LlmError(
                        f"request failed with status {response.status_code}",
                        raw=response.text,
                    )
                body = response.json()
                return body["choices"][0]["message"]["content"]
            except LlmError:
                raise
            except Exception as exc:  # transport errors, malformed body
                last_error = exc
        raise LlmError(f"request failed after {self.max_attempts} attempts: {last_error}")


def make_client(mode: str, **kwargs) -> LlmClient:
    if mode == "stub":
        return StubClient(**kwargs)
    if mode == "http":
        return HttpClient(**kwargs)
    raise ValueError(f"unknown llm mode {mode!r}")
