"""Empirical mapping checks: weighted modulation norms, operator ratios and smoothing."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Sequence

from .errors import InputError
from .grid import Field, MixedNormSpec
from .quantize import QuantLike, op_matrix
from .stft import gaussian_window, mod_norm, stft
from .symbols import X_GROWTH, DecayFit, fit_stft_decay
from .weights import Radial, rhocond_slack


def phase_weight(h: float, s: float, d: int = 1) -> Radial:
    """``exp(h (|x|^(1/s) + |xi|^(1/s)))`` on ``(x, xi)``."""
    return Radial(h, s, blocks=(d, d))


@dataclass
class NormLadderReport:
    ladder: list
    norms: list
    threshold: float
    finite_for_some: bool
    finite_for_all: bool
    N: int = 0
    L: float = 0.0

    def to_dict(self) -> dict:
        return asdict(self)


def norm_ladder(
    f: Field,
    phi: Field | None,
    s: float,
    p: float,
    q: float,
    ladder: Sequence[float],
    threshold: float = 1e8,
) -> NormLadderReport:
    """Weighted modulation norms along an increasing ``h`` ladder.

    "Finite" means below ``threshold``; on a grid every norm is finite, so the
    flags only flag visible blow-up.
    """
    ladder = [float(h) for h in ladder]
    if not ladder:
        raise InputError("the h ladder is empty")
    if any(b <= a for a, b in zip(ladder, ladder[1:])):
        raise InputError("the h ladder must be strictly increasing")
    phi = gaussian_window(f.grid) if phi is None else phi
    d = f.grid.dim
    norms = [mod_norm(f, phi, MixedNormSpec(p, q, tuple(range(d)), phase_weight(h, s, d))) for h in ladder]
    finite = [v < threshold for v in norms]
    return NormLadderReport(
        ladder, norms, threshold, any(finite), all(finite),
        N=f.grid.count[0], L=f.grid.halfwidth[0],
    )


@dataclass
class BoundedMapReport:
    ratio: float
    ratios: list
    s: float
    h1: float
    h2: float
    p: float
    q: float
    rhocond: tuple | None = None
    N: int = 0
    L: float = 0.0

    def to_dict(self) -> dict:
        return asdict(self)


def bounded_map_check(
    a: Field,
    A: QuantLike,
    s: float,
    h1: float,
    h2: float,
    p: float,
    q: float,
    test_set: Sequence[Field],
    phi: Field | None = None,
    r1: float | None = None,
    r2: float | None = None,
) -> BoundedMapReport:
    """``max_f |op_A(a) f|_{M(omega_2)} / |f|_{M(omega_1)}`` over a test set.

    ``omega_j = exp(h_j (|x|^(1/s) + |xi|^(1/s)))``. With ``r1, r2`` given the
    two slacks of the admissibility conditions on ``(h1, h2, r1, r2)`` are
    attached.
    """
    tests = list(test_set)
    if not tests:
        raise InputError("empty test set")
    M = op_matrix(a, A)
    d = M.source.dim
    phi = gaussian_window(M.source) if phi is None else phi
    spec1 = MixedNormSpec(p, q, tuple(range(d)), phase_weight(h1, s, d))
    spec2 = MixedNormSpec(p, q, tuple(range(d)), phase_weight(h2, s, d))
    ratios = []
    for f in tests:
        den = mod_norm(f, phi, spec1)
        if den == 0:
            raise InputError("test functions must be nonzero")
        ratios.append(mod_norm(M.apply(f), phi, spec2) / den)
    slack = None if r1 is None or r2 is None else rhocond_slack(h1, h2, r1, r2, s)
    return BoundedMapReport(
        max(ratios), ratios, s, h1, h2, p, q, slack,
        N=M.source.count[0], L=M.source.halfwidth[0],
    )


@dataclass
class SmoothingReport:
    source: DecayFit
    image: DecayFit
    decays: bool = field(default=False)

    def to_dict(self) -> dict:
        return {"source": asdict(self.source), "image": asdict(self.image), "decays": self.decays}


def infinite_order_smoothing_check(
    a: Field,
    f: Field,
    s: float,
    A: QuantLike = 0.0,
    phi: Field | None = None,
    radius: float | None = None,
) -> SmoothingReport:
    """Decay fits of ``f`` and ``op_A(a) f`` (x-growth orientation).

    ``decays`` is true when both fitted exponents of the image are negative,
    i.e. the image STFT decays in ``x`` and in ``xi``.
    """
    phi = gaussian_window(f.grid) if phi is None else phi
    g = op_matrix(a, A).apply(f)
    fit_f = fit_stft_decay(stft(f, phi), s, X_GROWTH, radius=radius)
    fit_g = fit_stft_decay(stft(g, phi), s, X_GROWTH, radius=radius)
    return SmoothingReport(fit_f, fit_g, bool(fit_g.a < 0 and fit_g.b < 0))
