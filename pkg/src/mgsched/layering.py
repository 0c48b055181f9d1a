"""Bottom-up slicing of electricity and heat demand into per-unit layers."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .model import Trace

__all__ = ["LayeredTraces", "slice_demands"]


@dataclass(frozen=True, eq=False)
class LayeredTraces:
    """Per-unit layers and the residual that only external supply can serve.

    ``layers[n]`` is a single-unit trace sharing the original prices.
    """

    layers: tuple
    a_top: np.ndarray
    h_top: np.ndarray

    @property
    def n_layers(self) -> int:
        return len(self.layers)

    def reassemble(self):
        """Total demand: layers summed bottom-up, then the top residual."""
        a = np.zeros_like(self.a_top)
        h = np.zeros_like(self.h_top)
        for layer in self.layers:
            a = a + layer.a
            h = h + layer.h
        return a + self.a_top, h + self.h_top


def slice_demands(trace: Trace, gen, ext, n_gens: int) -> LayeredTraces:
    """Slice ``(a, h)`` into ``n_gens`` layers of at most ``(L, eta*L)`` each.

    Layer ``n`` takes ``min(cap, residual)`` of whatever the layers below left;
    electricity and heat are sliced independently. The top residual keeps
    everything above the last layer, uncapped, so that balance stays
    satisfiable for demand beyond ``(n_gens + 1) * L``.
    """
    if n_gens < 1:
        raise ConfigError(f"n_gens must be >= 1, got {n_gens}")
    L = gen.capacity_L
    a = np.array(trace.a, dtype=float)
    h = np.array(trace.h, dtype=float)
    below_a = np.zeros_like(a)  # running float sum of the layers so far
    below_h = np.zeros_like(h)
    layers = []
    for _ in range(n_gens):
        la = np.minimum(L, np.maximum(a - below_a, 0.0))
        lh = np.minimum(ext.heat_recovery_eta * L, np.maximum(h - below_h, 0.0))
        below_a = below_a + la
        below_h = below_h + lh
        layers.append(Trace(a=la, h=lh, p=trace.p, slot_len=trace.slot_len))
    return LayeredTraces(
        layers=tuple(layers),
        a_top=_exact_residual(a, below_a),
        h_top=_exact_residual(h, below_h),
    )


def _exact_residual(total, below):
    """``total - below`` clamped at 0, nudged by an ulp where that makes
    ``below + top`` reproduce ``total`` bit for bit."""
    top = np.maximum(total - below, 0.0)
    for k in np.flatnonzero(below + top != total):
        for cand in (np.nextafter(top[k], np.inf), np.nextafter(top[k], 0.0)):
            if below[k] + cand == total[k]:
                top[k] = cand
                break
    return top
