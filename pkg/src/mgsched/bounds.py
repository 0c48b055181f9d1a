"""Competitive-ratio constants and worst-case bounds.

All quantities are evaluated in per-slot units: the look-ahead window and the
minimum on/off times are converted to hours with the slot length, ramp limits
are kW per slot.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

from .errors import ConfigError
from .model import check_assumptions

__all__ = ["CrBound", "alpha", "g_lookahead", "cr_bound", "plus_goes_external", "BOUND_KINDS"]

BOUND_KINDS = ("chase_s", "chase_s_plus", "chase_lk", "chase_multi", "chase_gen")


@dataclass(frozen=True)
class CrBound:
    kind: str
    alpha: float
    g_value: float
    bound: float
    components: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "kind": self.kind,
            "alpha": self.alpha,
            "g_value": self.g_value,
            "bound": self.bound,
            "components": dict(self.components),
        }


def alpha(gen, ext) -> float:
    """Ratio of the cheapest local energy cost to the dearest external one."""
    check_assumptions(gen, ext)
    return (gen.incremental_co + gen.idle_cm / gen.capacity_L) / (
        ext.price_max_Pmax + ext.heat_recovery_eta * ext.gas_heat_price_cg
    )


def g_lookahead(alpha_value: float, omega_hours: float, gen) -> float:
    """Look-ahead benefit, rising from ``alpha`` at zero window towards 1.

    Degenerates when the idle cost is zero; ``alpha`` is then returned with a
    warning.
    """
    if not 0 < alpha_value <= 1:
        raise ConfigError(f"alpha must lie in (0, 1], got {alpha_value}")
    if omega_hours < 0:
        raise ConfigError(f"look-ahead must be >= 0, got {omega_hours}")
    if omega_hours == 0:
        return alpha_value
    if alpha_value == 1:
        return 1.0
    L, co, cm, beta = gen.capacity_L, gen.incremental_co, gen.idle_cm, gen.startup_beta
    if cm == 0:
        warnings.warn("g(alpha, omega) is undefined for zero idle cost; using alpha", RuntimeWarning)
        return alpha_value
    ratio = beta * (L * co + cm / (1 - alpha_value)) / (omega_hours * (L * co + cm) * cm)
    return alpha_value + (1 - alpha_value) / (1 + ratio)


def plus_goes_external(gen, ext, omega: int = 0, slot_len: float = 1.0) -> bool:
    """Whether the improved variant should always buy externally.

    True when the all-external ratio ``1/alpha`` is no worse than the tracking
    ratio ``3 - 2 g(alpha, omega)``; with no look-ahead this is the plain
    ``1/alpha <= 3 - 2 alpha`` test.
    """
    a = alpha(gen, ext)
    g = g_lookahead(a, omega * slot_len, gen)
    return 1 / a <= 3 - 2 * g


def slow_factors(gen, ext, slot_len: float = 1.0):
    """The ramp factor ``r1`` and dwell-time factor ``r2`` of the slow-unit bound."""
    L, co, cm, beta = gen.capacity_L, gen.incremental_co, gen.idle_cm, gen.startup_beta
    if cm == 0:
        raise ConfigError("slow-unit bound undefined for zero idle cost")
    if beta <= 0:
        raise ConfigError("slow-unit bound undefined for zero startup cost")
    top = ext.price_max_Pmax + ext.gas_heat_price_cg * ext.heat_recovery_eta
    r1 = 1 + max(
        (top - co) / (L * co + cm) * max(0.0, L - gen.ramp_up_Rup),
        (co / cm) * max(0.0, L - gen.ramp_down_Rdw),
    )
    t_on = gen.min_on_Ton * slot_len
    t_off = gen.min_off_Toff * slot_len
    r2 = (beta + cm * t_on) / beta + L * top * (t_on + t_off) / beta
    return r1, r2


def cr_bound(kind: str, gen, ext, omega: int = 0, slot_len: float = 1.0) -> CrBound:
    """Worst-case competitive ratio for one algorithm family.

    ``omega`` is in slots. ``chase_s`` ignores it.
    """
    if kind not in BOUND_KINDS:
        raise ConfigError(f"unknown bound kind {kind!r}; expected one of {BOUND_KINDS}")
    a = alpha(gen, ext)
    if kind == "chase_s":
        return CrBound(kind, a, a, 3 - 2 * a, {"3-2g": 3 - 2 * a, "1/alpha": 1 / a})
    g = g_lookahead(a, omega * slot_len, gen)
    track = 3 - 2 * g
    if kind == "chase_gen":
        r1, r2 = slow_factors(gen, ext, slot_len)
        return CrBound(kind, a, g, track * max(r1, r2), {"3-2g": track, "r1": r1, "r2": r2})
    if kind == "chase_lk":
        # no external-only fallback, so only the tracking ratio is guaranteed
        return CrBound(kind, a, g, track, {"3-2g": track, "1/alpha": 1 / a})
    return CrBound(kind, a, g, min(track, 1 / a), {"3-2g": track, "1/alpha": 1 / a})
