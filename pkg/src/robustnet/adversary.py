"""Value-injection strategies for faulty nodes in the consensus simulator.

Under the ``malicious`` model a faulty node sends one value per step to all of
its out-neighbors. Under ``byzantine`` it may send a different value to each
receiver. Every strategy draws from its own seeded generator, in sorted
(sender, receiver) order, so a run is reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .graph import DiGraph

KINDS = ("constant", "ramp", "random", "split", "script", "custom")
MODELS = ("malicious", "byzantine")


class AdversaryError(ValueError):
    pass


@dataclass
class AdversaryStrategy:
    """How faulty nodes pick the values they transmit.

    kinds:
      constant  ``value`` every step; ``value=None`` holds the node's initial value
      ramp      ``value + slope * t`` (``value=None`` starts from the initial value)
      random    uniform draws in ``[low, high]``
      split     ``high`` to half the receivers and ``low`` to the other half
                (alternates by step under the malicious model)
      script    per-step values from ``script``; the last entry is held
      custom    ``func(t, sender, receiver, normal_values)``; receiver is None
                under the malicious model
    """

    kind: str = "constant"
    model: str = "malicious"
    value: float | None = None
    slope: float = 1.0
    low: float = -10.0
    high: float = 10.0
    script: Sequence[float] | Mapping[int, Sequence[float]] = field(default_factory=list)
    func: Callable | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise AdversaryError(f"unknown strategy kind {self.kind!r}; expected one of {KINDS}")
        if self.model not in MODELS:
            raise AdversaryError(f"unknown adversary model {self.model!r}; expected one of {MODELS}")
        if self.kind == "custom" and self.func is None:
            raise AdversaryError("custom strategy needs func")
        if self.kind == "script" and not self.script:
            raise AdversaryError("script strategy needs a nonempty script")

    @property
    def byzantine(self) -> bool:
        return self.model == "byzantine"

    def to_dict(self) -> dict:
        if self.kind == "custom":
            raise AdversaryError("custom strategies hold a Python callable and cannot be serialized")
        d = {"kind": self.kind, "model": self.model, "seed": self.seed}
        if self.kind in ("constant", "ramp"):
            d["value"] = self.value
        if self.kind == "ramp":
            d["slope"] = self.slope
        if self.kind in ("random", "split"):
            d["low"], d["high"] = self.low, self.high
        if self.kind == "script":
            s = self.script
            d["script"] = {str(k): list(v) for k, v in s.items()} if isinstance(s, Mapping) else list(s)
        return d

    @classmethod
    def from_dict(cls, d: Mapping) -> "AdversaryStrategy":
        d = dict(d)
        script = d.pop("script", [])
        if isinstance(script, Mapping):
            script = {int(k): list(v) for k, v in script.items()}
        return cls(script=script, **d)

    def start(self, malicious: frozenset[int], initial: Sequence[float], clamp: float = 1e12) -> "AdversaryRun":
        return AdversaryRun(self, malicious, initial, clamp)


class AdversaryRun:
    """Per-simulation state of a strategy (its random generator)."""

    def __init__(self, strategy: AdversaryStrategy, malicious: frozenset[int], initial: Sequence[float], clamp: float):
        self.s = strategy
        self.malicious = sorted(malicious)
        self.initial = list(initial)
        self.clamp = clamp
        self.rng = np.random.default_rng(strategy.seed)

    def _base(self, t: int, node: int) -> float:
        s = self.s
        if s.kind == "constant":
            return self.initial[node] if s.value is None else s.value
        if s.kind == "ramp":
            start = self.initial[node] if s.value is None else s.value
            return start + s.slope * t
        if s.kind == "script":
            seq = s.script[node] if isinstance(s.script, Mapping) else s.script
            return seq[min(t, len(seq) - 1)]
        raise AssertionError(s.kind)

    def _one(self, t: int, node: int, receiver: int | None, index: int, normal_values: Mapping[int, float]) -> float:
        s = self.s
        if s.kind == "random":
            return float(self.rng.uniform(s.low, s.high))
        if s.kind == "split":
            k = index if receiver is not None else t
            return s.high if k % 2 == 0 else s.low
        if s.kind == "custom":
            return float(s.func(t, node, receiver, normal_values))
        return self._base(t, node)

    def _check(self, v: float, node: int, t: int) -> float:
        if math.isnan(v):
            raise AdversaryError(f"faulty node {node} produced NaN at step {t}")
        return min(max(v, -self.clamp), self.clamp)

    def emit(self, t: int, g: DiGraph, values: Sequence[float]) -> tuple[dict[tuple[int, int], float], dict[int, float]]:
        """Values sent at step ``t``.

        Returns ``(sent, shown)``: ``sent[(sender, receiver)]`` is what each
        receiver observes, ``shown[sender]`` is the value recorded for the
        faulty node in the trajectory (what its lowest-id receiver saw).
        """
        bad = set(self.malicious)
        normal_values = {i: values[i] for i in range(len(values)) if i not in bad}
        sent: dict[tuple[int, int], float] = {}
        shown: dict[int, float] = {}
        for m in self.malicious:
            receivers = sorted(g.out_neighbors(m))
            if self.s.byzantine:
                for k, i in enumerate(receivers):
                    sent[(m, i)] = self._check(self._one(t, m, i, k, normal_values), m, t)
                shown[m] = sent[(m, receivers[0])] if receivers else self._check(self._one(t, m, None, 0, normal_values), m, t)
            else:
                v = self._check(self._one(t, m, None, 0, normal_values), m, t)
                for i in receivers:
                    sent[(m, i)] = v
                shown[m] = v
        return sent, shown


def battery(seeds: Sequence[int] = (1, 2, 3)) -> list[AdversaryStrategy]:
    """Standard set of strategies used by the sufficiency sweeps."""
    out = [
        AdversaryStrategy("constant", value=100.0),
        AdversaryStrategy("ramp", value=-5.0, slope=0.5),
    ]
    out += [AdversaryStrategy("random", low=-50.0, high=50.0, seed=s) for s in seeds]
    out.append(AdversaryStrategy("random", model="byzantine", low=-50.0, high=50.0, seed=seeds[0]))
    return out
