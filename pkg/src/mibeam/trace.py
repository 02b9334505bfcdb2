"""Shared run plumbing: solver options and per-run iteration traces."""

from __future__ import annotations

from dataclasses import dataclass, field

from .kkt import KktReport

MONOTONE_TOL = 1e-9


@dataclass
class BcaOptions:
    """Outer/inner loop controls shared by both algorithms.

    inner_* apply to the batch QCQP solve only; check_surrogate applies to
    the cyclic driver only (it raises if any block update decreases the
    surrogate beyond surrogate_tol, which would signal a solver defect).
    """

    max_outer: int = 100
    mi_tol: float = 1e-8
    feasibility_slack: float = 1e-8
    inner_tol: float = 1e-9
    inner_max_iter: int = 50_000
    check_surrogate: bool = True
    surrogate_tol: float = 1e-7
    compute_kkt: bool = True
    backend: str | None = None


@dataclass
class IterationTrace:
    """One run's record: MI after every outer loop, wall times, final KKT.

    mi_nats[0] is the MI of the initial beamformers (wall_s[0] = 0), so both
    algorithms started from the same initial share their first entry.
    """

    algorithm: str
    mi_nats: list[float] = field(default_factory=list)
    wall_s: list[float] = field(default_factory=list)
    kkt: KktReport | None = None
    metadata: dict = field(default_factory=dict)

    def check(self, tol: float = MONOTONE_TOL):
        """Raise if the trace violates its invariants."""
        if len(self.mi_nats) != len(self.wall_s):
            raise ValueError("mi_nats and wall_s lengths differ")
        for a, b in zip(self.mi_nats, self.mi_nats[1:]):
            if b < a - tol:
                raise ValueError(f"MI decreased from {a!r} to {b!r}")

    def as_dict(self, include_timing: bool = True) -> dict:
        return {
            "algorithm": self.algorithm,
            "mi_nats": list(self.mi_nats),
            "wall_s": list(self.wall_s) if include_timing else [0.0] * len(self.wall_s),
            "kkt": self.kkt.as_dict() if self.kkt is not None else None,
            "metadata": dict(self.metadata),
        }
