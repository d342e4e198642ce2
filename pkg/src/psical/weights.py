"""Exponential-power weights, the kappa constant and the m_{s,tau} multiplier.

All weights evaluate on arrays of points with the coordinate index last, so
``w(points)`` has shape ``points.shape[:-1]``.  Norms of blocks are Euclidean;
``<x> = (1 + |x|^2)^(1/2)``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError, InputError, PsicalError, ShapeError, TruncationError


def kappa(r: float) -> float:
    """Subadditivity constant of ``t -> t^r``: 1 for ``r <= 1``, else ``2^(r-1)``."""
    if not r > 0:
        raise DomainError(f"kappa needs r > 0, got {r}")
    return 1.0 if r <= 1 else 2.0 ** (r - 1)


def bracket(x) -> np.ndarray:
    """Japanese bracket ``(1 + |x|^2)^(1/2)`` with the coordinate index last."""
    x = np.asarray(x, dtype=float)
    return np.sqrt(1.0 + np.sum(x * x, axis=-1))


def _block_powers(points: np.ndarray, blocks: Sequence[int], s: float) -> np.ndarray:
    """``sum_b |points[block b]|^(1/s)`` with blocks of the given sizes."""
    out = np.zeros(points.shape[:-1])
    start = 0
    for size in blocks:
        part = points[..., start : start + size]
        out = out + np.sqrt(np.sum(part * part, axis=-1)) ** (1.0 / s)
        start += size
    return out


def _points(points, dim: int) -> np.ndarray:
    p = np.asarray(points, dtype=float)
    if p.ndim == 0:
        p = p.reshape(1)
    if p.shape[-1] != dim:
        raise ShapeError(f"weight expects points of dimension {dim}, got {p.shape[-1]}")
    return p


class WeightSpec:
    """Base class; subclasses implement :meth:`log` on points of size :attr:`dim`.

    ``dim`` is ``None`` for weights that accept any dimension.
    """

    kind = "abstract"
    dim: int | None = None

    def log(self, points) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, points) -> np.ndarray:
        return np.exp(self.log(points))

    def on_grid(self, grid) -> np.ndarray:
        return self(grid.mesh())

    def to_dict(self) -> dict:
        raise NotImplementedError

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


@dataclass(frozen=True)
class Unit(WeightSpec):
    kind = "unit"

    def log(self, points) -> np.ndarray:
        p = np.asarray(points, dtype=float)
        if p.ndim == 0:
            return np.zeros(())
        return np.zeros(p.shape[:-1])

    def to_dict(self) -> dict:
        return {"kind": "unit"}


@dataclass(frozen=True)
class Radial(WeightSpec):
    """``exp(h * sum_b |x_b|^(1/s))`` over consecutive blocks of sizes ``blocks``.

    With a single block this is ``exp(h |x|^(1/s))``; ``blocks=(d, d)`` on
    phase space gives ``exp(h (|x|^(1/s) + |xi|^(1/s)))``.
    """

    h: float
    s: float
    blocks: tuple[int, ...] = (1,)

    kind = "radial"

    def __post_init__(self):
        if not self.s > 0:
            raise DomainError("weights need s > 0")
        object.__setattr__(self, "blocks", tuple(int(b) for b in self.blocks))

    @property
    def dim(self) -> int:
        return sum(self.blocks)

    def log(self, points) -> np.ndarray:
        p = _points(points, self.dim)
        return self.h * _block_powers(p, self.blocks, self.s)

    def to_dict(self) -> dict:
        return {"kind": "radial", "h": self.h, "s": self.s, "blocks": list(self.blocks)}


@dataclass(frozen=True)
class Split(WeightSpec):
    """``exp(h |x|^(1/s) - eps |xi|^(1/s))`` on points ``(x, xi)`` of size ``2d``."""

    h: float
    eps: float
    s: float
    d: int = 1

    kind = "split"

    def __post_init__(self):
        if not self.s > 0:
            raise DomainError("weights need s > 0")

    @property
    def dim(self) -> int:
        return 2 * self.d

    def log(self, points) -> np.ndarray:
        p = _points(points, self.dim)
        x = _block_powers(p[..., : self.d], (self.d,), self.s)
        xi = _block_powers(p[..., self.d :], (self.d,), self.s)
        return self.h * x - self.eps * xi

    def to_dict(self) -> dict:
        return {"kind": "split", "h": self.h, "eps": self.eps, "s": self.s, "d": self.d}


@dataclass(frozen=True)
class Product(WeightSpec):
    """Pointwise product of weights defined on the same points."""

    factors: tuple[WeightSpec, ...]

    kind = "product"

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        dims = {f.dim for f in self.factors if f.dim is not None}
        if len(dims) > 1:
            raise ShapeError(f"product of weights with different dimensions {sorted(dims)}")

    @property
    def dim(self) -> int | None:
        dims = [f.dim for f in self.factors if f.dim is not None]
        return dims[0] if dims else None

    def log(self, points) -> np.ndarray:
        out = np.zeros(np.asarray(points).shape[:-1])
        for f in self.factors:
            out = out + f.log(points)
        return out

    def to_dict(self) -> dict:
        return {"kind": "product", "factors": [f.to_dict() for f in self.factors]}


@dataclass(frozen=True)
class Extended(WeightSpec):
    """``omega_R(X, Y) = base(X) * exp(-R sum_b |Y_b|^(1/s))``.

    ``X`` is the first ``base.dim`` coordinates; ``Y`` is split into blocks of
    size ``block`` (so ``(eta, y)`` in phase space for ``block = d``).
    """

    base: WeightSpec
    R: float
    s: float
    base_dim: int | None = None
    block: int = 1

    kind = "extended"

    def __post_init__(self):
        if not self.s > 0:
            raise DomainError("weights need s > 0")
        if self.base_dim is None:
            if self.base.dim is None:
                raise ShapeError("base_dim is required when the base weight has no fixed dimension")
            object.__setattr__(self, "base_dim", int(self.base.dim))

    @property
    def dim(self) -> int:
        return 2 * self.base_dim

    def log(self, points) -> np.ndarray:
        p = _points(points, self.dim)
        nb = (self.base_dim) // self.block
        tail = _block_powers(p[..., self.base_dim :], (self.block,) * nb, self.s)
        return self.base.log(p[..., : self.base_dim]) - self.R * tail

    def to_dict(self) -> dict:
        return {
            "kind": "extended",
            "base": self.base.to_dict(),
            "R": self.R,
            "s": self.s,
            "base_dim": self.base_dim,
            "block": self.block,
        }


def weight_from_dict(data: dict) -> WeightSpec:
    if not isinstance(data, dict):
        raise InputError("a weight spec is a JSON object with a 'kind' key")
    try:
        return _weight_from_dict(data)
    except PsicalError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed weight spec {data!r}: {exc}") from None


def _weight_from_dict(data: dict) -> WeightSpec:
    kind = data.get("kind")
    if kind == "unit":
        return Unit()
    if kind == "radial":
        return Radial(float(data["h"]), float(data["s"]), tuple(data.get("blocks", (1,))))
    if kind == "split":
        return Split(float(data["h"]), float(data["eps"]), float(data["s"]), int(data.get("d", 1)))
    if kind == "product":
        return Product(tuple(weight_from_dict(f) for f in data["factors"]))
    if kind == "extended":
        return Extended(
            weight_from_dict(data["base"]),
            float(data["R"]),
            float(data["s"]),
            data.get("base_dim"),
            int(data.get("block", 1)),
        )
    raise InputError(f"unknown weight kind {kind!r}")


def weight_from_json(text: str) -> WeightSpec:
    try:
        data = json.loads(text)
    except ValueError as exc:
        raise InputError(f"weight spec is not valid JSON: {exc}") from None
    return weight_from_dict(data)


def eval_weight(w: WeightSpec, point) -> float:
    """Value of ``w`` at a single point."""
    p = np.atleast_1d(np.asarray(point, dtype=float))
    if w.dim is not None and p.shape != (w.dim,):
        raise ShapeError(f"weight expects a point of dimension {w.dim}, got shape {p.shape}")
    return float(w(p))


# -- check boxes -----------------------------------------------------------------------


@dataclass(frozen=True)
class Box:
    """Closed symmetric sweep box ``[-radius, radius]^dim`` with ``count`` nodes per axis.

    Unlike :class:`~psical.grid.Grid` the count may be odd, so 0 and both
    endpoints are nodes and node sums stay on the lattice.
    """

    radius: float
    count: int
    dim: int = 1

    def __post_init__(self):
        if self.count < 1 or self.dim < 1:
            raise ShapeError("a box needs count >= 1 and dim >= 1")
        if self.count == 1 and self.radius != 0:
            raise ShapeError("a single-node box must have radius 0")
        if self.count > 1 and not self.radius > 0:
            raise ShapeError("radius must be positive")

    @property
    def nodes(self) -> np.ndarray:
        if self.count == 1:
            return np.zeros(1)
        return np.linspace(-self.radius, self.radius, self.count)

    @property
    def step(self) -> float:
        return 0.0 if self.count == 1 else 2 * self.radius / (self.count - 1)

    def points(self) -> np.ndarray:
        """All nodes, shape ``(count,)*dim + (dim,)``."""
        axes = [self.nodes] * self.dim
        return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)


def moderateness_margin(w: WeightSpec, c: float, s: float, box: Box, blocks: Sequence[int] | None = None) -> float:
    """``sup w(x+y) / (w(x) exp(c|y|^(1/s)))`` over node pairs with ``x+y`` a node.

    With ``blocks`` the penalty is ``c * sum_b |y_b|^(1/s)`` over consecutive
    coordinate blocks (one Euclidean block by default).
    """
    blocks = (box.dim,) if blocks is None else tuple(int(b) for b in blocks)
    if sum(blocks) != box.dim:
        raise ShapeError("blocks must partition the box coordinates")
    n, dim = box.count, box.dim
    nodes = box.nodes
    best = -math.inf
    pts = box.points().reshape(-1, dim)
    logw = w.log(pts)
    flat_index = np.arange(n**dim).reshape((n,) * dim)
    mid = (n - 1) // 2
    multi = np.stack(np.unravel_index(np.arange(n**dim), (n,) * dim), axis=-1)
    for jy in range(n**dim):
        iy = multi[jy]
        # x + y has index ix + iy - mid on each axis
        target = multi + (iy - mid)
        ok = np.all((target >= 0) & (target < n), axis=1)
        if not np.any(ok):
            continue
        tx = flat_index[tuple(target[ok].T)]
        y = nodes[iy]
        penalty = c * float(_block_powers(y, blocks, s))
        val = np.max(logw[tx] - logw[ok] - penalty)
        best = max(best, float(val))
    return math.exp(best)


# -- the m_{s,tau} multiplier ----------------------------------------------------------


@dataclass(frozen=True)
class MultiplierParams:
    """Parameters of ``m_{s,tau}(x) = sum_j (tau <x>^2)^j / (j!)^(2s)``.

    ``J`` caps the number of retained terms (``j = 0..J``).
    """

    s: float
    tau: float
    J: int = 4096

    def __post_init__(self):
        if not self.s >= 0.5:
            raise DomainError("m_{s,tau} needs s >= 1/2")
        if not self.tau > 0:
            raise DomainError("m_{s,tau} needs tau > 0")
        if int(self.J) != self.J or self.J < 0:
            raise DomainError("J must be a non-negative integer")


def log_m_s(params: MultiplierParams, r, check: bool = True) -> np.ndarray:
    """``log m_s(r)`` for ``r >= 0`` by a log-domain series sum.

    With ``check`` the series is extended term by term until the newest term
    is below ``1e-16`` of the running sum and the term ratio is below 1/2;
    exhausting :attr:`MultiplierParams.J` raises :class:`TruncationError`.
    Without ``check`` exactly the terms ``j = 0..J`` are summed.
    """
    r = np.asarray(r, dtype=float)
    flat = r.reshape(-1)
    two_s = 2.0 * params.s
    out = np.empty_like(flat)
    for n, rv in enumerate(flat):
        if rv == 0.0:
            out[n] = 0.0
            continue
        lr = math.log(rv)
        logs = [0.0]
        done = params.J == 0
        j = 0
        while j < params.J:
            j += 1
            logs.append(j * lr - two_s * math.lgamma(j + 1))
            if check:
                top = max(logs)
                ratio = rv / (j + 1) ** two_s
                if logs[-1] - top < math.log(1e-16) and ratio < 0.5:
                    done = True
                    break
        if check and not done:
            raise TruncationError(f"m_s series not converged within J={params.J} terms at r={rv}")
        top = max(logs)
        out[n] = top + math.log(math.fsum(math.exp(v - top) for v in logs))
    return out.reshape(r.shape)


def m_s_tau(params: MultiplierParams, x, check: bool = True) -> np.ndarray:
    """``m_{s,tau}(x)`` for points with the coordinate index last (scalars are 1-d points)."""
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        x = x.reshape(1)
    r = params.tau * bracket(x) ** 2
    return np.exp(log_m_s(params, r, check=check))


def paola_check(params: MultiplierParams, eta: float, eps: float, box: Box) -> tuple[float, float]:
    """Empirical constants of the two-sided exponential sandwich for ``m_{s,tau}``.

    Returns ``(C_low, C_high)`` with ``C_low = sup exp((2s-eps) E) / m`` and
    ``C_high = sup m / exp((2s+eps) E)`` over the box, where
    ``E = eta^(1/(2s)) <x>^(1/s)``.
    """
    s = params.s
    if not 0 < eps < 2 * s:
        raise DomainError("eps must lie in (0, 2s)")
    pts = box.points().reshape(-1, box.dim)
    logm = log_m_s(params, params.tau * bracket(pts) ** 2)
    E = eta ** (1.0 / (2 * s)) * bracket(pts) ** (1.0 / s)
    c_low = math.exp(float(np.max((2 * s - eps) * E - logm)))
    c_high = math.exp(float(np.max(logm - (2 * s + eps) * E)))
    return c_low, c_high


# -- the weight condition of the weighted boundedness result ---------------------------


@dataclass(frozen=True)
class WeightRatioReport:
    max_ratio: float
    pointwise_ok: bool
    worst_gap: float
    rhocond_slack: tuple[float, float]
    radius: float


def rhocond_slack(h1: float, h2: float, r1: float, r2: float, s: float) -> tuple[float, float]:
    """Slacks ``(r2 - k h2 - 2^(-1/s) r1, h1 - k (h2 + r1))`` with ``k = kappa(1/s)``."""
    k = kappa(1.0 / s)
    return r2 - k * h2 - 2.0 ** (-1.0 / s) * r1, h1 - k * (h2 + r1)


def weight_ratio_check(
    h1: float,
    h2: float,
    r1: float,
    r2: float,
    s: float,
    A,
    box: Box,
    tol: float = 1e-12,
) -> WeightRatioReport:
    """Sweep the weight condition on the 4-axis grid ``(x, xi, eta, y)`` (``d = 1``).

    ``max_ratio`` is the largest value of
    ``w2(x - A y, xi + (1-A) eta) / (w1(x + (1-A) y, xi - A eta) w(x, xi, eta, y))``
    with ``w_j = exp(h_j(|x|^(1/s) + |xi|^(1/s)))`` and
    ``w = exp(-r1(|x|^(1/s) + |xi|^(1/s)) + r2(|y|^(1/s) + |eta|^(1/s)))``.
    ``pointwise_ok`` reports whether both scalar inequalities
    ``h2|2x-y|^(1/s) - h1|2x+y|^(1/s) <= 2^(1/s)(r2|y|^(1/s) - r1|x|^(1/s))`` and its
    ``(xi, eta)`` mirror hold at every node, up to ``tol`` relative to the
    magnitudes involved.
    """
    A = float(np.squeeze(np.asarray(A, dtype=float)))
    if box.dim != 1:
        raise ShapeError("weight_ratio_check sweeps d = 1 (a 4-axis grid)")
    t = box.nodes
    x, xi, eta, y = np.meshgrid(t, t, t, t, indexing="ij", sparse=True)
    p = 1.0 / s
    a = np.abs

    log_w2 = h2 * (a(x - A * y) ** p + a(xi + (1 - A) * eta) ** p)
    log_w1 = h1 * (a(x + (1 - A) * y) ** p + a(xi - A * eta) ** p)
    log_w = -r1 * (a(x) ** p + a(xi) ** p) + r2 * (a(y) ** p + a(eta) ** p)
    max_ratio = math.exp(float(np.max(log_w2 - log_w1 - log_w)))

    c = 2.0**p
    worst = -math.inf
    ok = True
    for u, v, flip in ((x, y, 1.0), (xi, eta, -1.0)):
        # the (xi, eta) inequality has the signs of eta reversed
        lhs = h2 * a(2 * u - flip * v) ** p - h1 * a(2 * u + flip * v) ** p
        rhs = c * (r2 * a(v) ** p - r1 * a(u) ** p)
        scale = np.maximum(1.0, np.maximum(a(lhs), a(rhs)))
        gap = (lhs - rhs) / scale
        worst = max(worst, float(np.max(gap)))
        ok = ok and bool(np.all(gap <= tol))
    return WeightRatioReport(
        max_ratio=max_ratio,
        pointwise_ok=ok,
        worst_gap=worst,
        rhocond_slack=rhocond_slack(h1, h2, r1, r2, s),
        radius=box.radius,
    )


def proof_constants(s: float, h: float, eps: float) -> dict:
    """Constants used to deduce continuity on Sigma_s from the weighted bound.

    ``r1 = k h``, ``r2 = eps``, ``h2 = eps / k - 2^(-1/s) k h``, ``h1 = k (h + h2)``
    with ``k = kappa(1/s)``.
    """
    k = kappa(1.0 / s)
    h2 = eps / k - 2.0 ** (-1.0 / s) * k * h
    return {"r1": k * h, "r2": eps, "h2": h2, "h1": k * (h + h2)}


def report_rows_csv(rows: Sequence[dict]) -> str:
    """Render homogeneous dict rows as CSV text (stable column order)."""
    if not rows:
        return ""
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0].keys()), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()
