"""Chat completion providers.

The bundled mock is a pure function of the request: a digest of the canonical
request seeds a template generator, so identical requests reproduce identical
replies while any change to system prompt, history, or generation params
changes the output. Live adapters are thin HTTP stubs; the service is fully
usable offline with the mock.
"""
from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from random import Random
from typing import Optional

import requests as _requests

from .errors import ProviderError
from .util import digest_of

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class CompletionRequest:
    system_prompt: str
    # (speaker label, content) pairs; agent turns are labeled participants,
    # never the assistant's own prior turns.
    history: tuple[tuple[str, str], ...]
    max_output_tokens: int
    temperature: float
    top_p: float

    def to_dict(self) -> dict:
        return {
            "system_prompt": self.system_prompt,
            "history": [[label, content] for label, content in self.history],
            "max_output_tokens": self.max_output_tokens,
            "temperature": self.temperature,
            "top_p": self.top_p,
        }

    def digest(self) -> str:
        return digest_of(self.to_dict())


class ChatProvider(ABC):
    @abstractmethod
    def complete(self, request: CompletionRequest) -> str:
        """Return the assistant reply text. Raises ProviderError on failure."""


# ---- mock ----

_MOCK_VERBS = ("Add", "Plant", "Install", "Widen", "Provide",
               "Create", "Expand", "Protect", "Shade", "Buffer")
_MOCK_OBJECTS = ("street trees", "shaded seating", "planter boxes", "rain gardens",
                 "bench clusters", "bus shelters", "corner bulb-outs",
                 "pedestrian lighting", "bike lanes", "market stalls")
_MOCK_PLACES = ("along the main corridor", "near the central crossing",
                "beside the storefront edge", "around the transit stop",
                "along both sidewalk edges", "at the corner crossings",
                "facing the small plaza", "along the shaded block")
_MOCK_THEMES = ("greener sidewalks", "calmer traffic", "more places to sit",
                "safer crossings", "a livelier storefront edge",
                "shade and planting", "cleaner street corners")
_MOCK_MOVES = ("a row of canopy trees", "warm pedestrian lighting",
               "a widened planted sidewalk", "seating nooks between planters",
               "a textured crossing surface", "greenery framing the facades")
_MOCK_OBSERVATIONS = ("this block favors through-traffic over people walking",
                      "the sidewalk network breaks at the corners",
                      "transit riders have nowhere comfortable to wait",
                      "stormwater has no place to go on this stretch")
_MOCK_STEPS = ("piloting a curb extension at the busiest crossing",
               "reallocating one parking lane to greenery",
               "adding a mid-block crossing with daylighting",
               "linking the open spaces with a planted corridor")


class MockChatProvider(ChatProvider):
    """Deterministic offline provider; records every request it serves."""

    def __init__(self):
        self.requests: list[CompletionRequest] = []

    def complete(self, request: CompletionRequest) -> str:
        self.requests.append(request)
        digest = request.digest()
        rng = Random(int(digest[:16], 16))
        tag = digest[:8]
        head = request.system_prompt.split("\n", 1)[0]
        if "produce 4-6 short, actionable urban design prompts" in request.system_prompt:
            return self._prompt_lines(rng)
        if head.startswith("You are an AI facilitator"):
            t1, t2 = rng.sample(_MOCK_THEMES, 2)
            return (f"Thanks, everyone. I'm hearing shared energy around {t1} and {t2}.\n\n"
                    f"Let's push one step further: what would make {t1} feel inviting "
                    f"at eye level? (synthesis {tag})")
        if head.startswith("You are an AI urban designer"):
            m1, m2 = rng.sample(_MOCK_MOVES, 2)
            return (f"Picture {m1} paired with {m2}; together they give the block a "
                    f"clearer rhythm. What mood should the street carry after dark? "
                    f"(design note {tag})")
        if head.startswith("You are an AI urban planner"):
            obs = rng.choice(_MOCK_OBSERVATIONS)
            step = rng.choice(_MOCK_STEPS)
            return (f"From a planning angle, {obs}. A practical next step is {step}. "
                    f"(planning note {tag})")
        return f"Mock reply {tag}."

    @staticmethod
    def _prompt_lines(rng: Random) -> str:
        count = 4 + rng.randrange(3)
        combos = rng.sample(
            [(v, o, p) for v in _MOCK_VERBS for o in _MOCK_OBJECTS for p in _MOCK_PLACES],
            count)
        return "\n".join(f"{verb} {obj} {place}" for verb, obj, place in combos)


class ScriptedChatProvider(ChatProvider):
    """Replays canned outputs in order (the last one repeats); for tests and
    demos that need specific provider behavior."""

    def __init__(self, outputs: list[str]):
        if not outputs:
            raise ValueError("ScriptedChatProvider needs at least one output")
        self.outputs = list(outputs)
        self.requests: list[CompletionRequest] = []

    def complete(self, request: CompletionRequest) -> str:
        self.requests.append(request)
        index = min(len(self.requests) - 1, len(self.outputs) - 1)
        return self.outputs[index]


class FailingChatProvider(ChatProvider):
    def __init__(self, message: str = "chat provider unavailable"):
        self.message = message
        self.requests: list[CompletionRequest] = []

    def complete(self, request: CompletionRequest) -> str:
        self.requests.append(request)
        raise ProviderError(self.message)


# ---- live ----

class LiveChatProvider(ChatProvider):
    """Minimal HTTP adapter: POSTs the request to a completion endpoint and
    expects {"text": ...} back. Credentials are validated by config loading;
    calling an unconfigured adapter fails cleanly."""

    def __init__(self, endpoint: Optional[str], api_key: Optional[str],
                 timeout: float = 30.0):
        self.endpoint = endpoint
        self.api_key = api_key
        self.timeout = timeout

    def complete(self, request: CompletionRequest) -> str:
        if not self.endpoint or not self.api_key:
            raise ProviderError("live chat provider is missing endpoint or api key")
        payload = {
            "system_instruction": request.system_prompt,
            "messages": [{"speaker": label, "content": content}
                         for label, content in request.history],
            "max_output_tokens": request.max_output_tokens,
            "temperature": request.temperature,
            "top_p": request.top_p,
        }
        try:
            resp = _requests.post(
                self.endpoint, json=payload, timeout=self.timeout,
                headers={"Authorization": f"Bearer {self.api_key}"})
            resp.raise_for_status()
            text = resp.json().get("text")
        except Exception as exc:
            raise ProviderError(f"live chat request failed: {exc}") from exc
        if not isinstance(text, str) or not text:
            raise ProviderError("live chat response missing text")
        return text
