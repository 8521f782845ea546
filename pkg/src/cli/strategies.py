"""
Strategy names: ``<labels>[+<contrastive>][@step=<n>]``

labels is one of hard, lsr, gls; contrastive is bcl (prototype thresholds)
or cl (traditional thresholds). ``@step=0`` on a gls strategy means hard labels.
"""
from dataclasses import dataclass
from typing import List, Optional, Sequence

from ..errors import ConfigError
from ..label_softening import GlsLabels, HardLabels, LabelStrategy, LsrLabels

LABEL_STRATEGIES = ("hard", "lsr", "gls")
CONTRASTIVE_TERMS = ("bcl", "cl")


@dataclass(frozen=True)
class StrategySpec:
    labels: str
    contrastive: Optional[str] = None
    step: Optional[int] = None

    @property
    def name(self) -> str:
        name = self.labels if self.contrastive is None else f"{self.labels}+{self.contrastive}"
        return name if self.step is None else f"{name}@step={self.step}"

    @property
    def is_baseline(self) -> bool:
        """Plain hard-label training without a contrastive term"""
        return self.labels == "hard" and self.contrastive is None and self.step is None

    @property
    def needs_prototype(self) -> bool:
        return self.effective_labels == "gls" or self.contrastive == "bcl"

    @property
    def effective_labels(self) -> str:
        if self.labels == "gls" and self.step == 0:
            return "hard"
        return self.labels

    def with_step(self, step: int) -> "StrategySpec":
        return StrategySpec(self.labels, self.contrastive, step)


def parse_strategy(text: str) -> StrategySpec:
    """Parse one strategy name; raises ConfigError naming the bad part"""
    raw = text.strip().lower()
    body, _, suffix = raw.partition("@")
    step = None
    if suffix:
        key, _, value = suffix.partition("=")
        if key != "step" or not value.isdigit():
            raise ConfigError(f"Strategy {text!r}: expected '@step=<n>' suffix")
        step = int(value)
    labels, _, contrastive = body.partition("+")
    if labels not in LABEL_STRATEGIES:
        raise ConfigError(f"Strategy {text!r}: labels must be one of {', '.join(LABEL_STRATEGIES)}")
    if contrastive and contrastive not in CONTRASTIVE_TERMS:
        raise ConfigError(f"Strategy {text!r}: contrastive term must be one of {', '.join(CONTRASTIVE_TERMS)}")
    if step is not None and labels != "gls":
        raise ConfigError(f"Strategy {text!r}: only gls strategies take a step")
    return StrategySpec(labels, contrastive or None, step)


def expand_steps(strategies: Sequence[StrategySpec], steps: Sequence[int]) -> List[StrategySpec]:
    """One row per STEP for every gls strategy without an explicit step"""
    rows = []
    for spec in strategies:
        if spec.labels == "gls" and spec.step is None and steps:
            rows.extend(spec.with_step(step) for step in steps)
        else:
            rows.append(spec)
    return rows


def label_strategy(spec: StrategySpec, C: int, prototype_matrix=None, step: int = None,
                   cap: float = None, epsilon: float = None) -> LabelStrategy:
    """Instantiate the label strategy of a spec; an explicit spec step wins over `step`"""
    labels = spec.effective_labels
    if labels == "hard":
        return HardLabels(C)
    if labels == "lsr":
        return LsrLabels(C) if epsilon is None else LsrLabels(C, epsilon)
    if prototype_matrix is None:
        raise ConfigError(f"Strategy {spec.name} needs a similarity prototype")
    kwargs = {}
    if spec.step is not None or step is not None:
        kwargs["step"] = spec.step if spec.step is not None else step
    if cap is not None:
        kwargs["cap"] = cap
    return GlsLabels(prototype_matrix, **kwargs)
