"""
Scheduling policies.

A scheduler picks one of the enabled steps. Policies are registered by name
so the CLI can select them with `--policy`.
"""

import random
from typing import List, Optional, Sequence

from runtime.configuration import Configuration
from runtime.semantics import StepId
from utils.decorators import policy, policy_registry


class Scheduler:
    def choose(self, cfg: Configuration, steps: List[StepId]) -> StepId:
        raise NotImplementedError


@policy("random")
class RandomScheduler(Scheduler):
    """Uniform choice from a seeded generator; the same seed gives the same run."""

    def __init__(self, seed: int = 0):
        self.rng = random.Random(seed)

    def choose(self, cfg, steps):
        return self.rng.choice(sorted(steps))


@policy("fifo")
class FifoScheduler(Scheduler):
    """Oldest future first."""

    def __init__(self, seed: int = 0):
        pass

    def choose(self, cfg, steps):
        return min(steps)


@policy("script")
class ScriptScheduler(Scheduler):
    """
    Follows a list of future ids; falls back to fifo once the script is used up.

    An entry whose future has no enabled step is skipped.
    """

    def __init__(self, script: Optional[Sequence[int]] = None, seed: int = 0):
        self.script = list(script or [])

    def choose(self, cfg, steps):
        while self.script:
            wanted = self.script.pop(0)
            for s in steps:
                if s.future.id == wanted:
                    return s
        return min(steps)


def make_scheduler(name: str, seed: int = 0, script: Optional[Sequence[int]] = None) -> Scheduler:
    if name not in policy_registry:
        raise ValueError(f"unknown scheduling policy '{name}'")
    if name == "script":
        return ScriptScheduler(script, seed)
    return policy_registry[name](seed)
