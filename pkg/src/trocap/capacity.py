"""Capacity formulas, comparison windows, and one-shot optimizers.

Channels whose dilation range is a direct sum of rectangular blocks
(n_i, m_i) have exact single-letter capacities depending only on the n_i.
Modifying such a channel by an environment density f shifts every capacity
upward by at most the entropy defect tau(f log f), which yields two-sided
windows; one-shot coherent-information ascent supplies certified lower
bounds inside those windows.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np
from scipy import optimize

from . import channel as chn
from . import matcore as mc
from .channel import Channel, StinespringSpace, Symbol
from .entropy import entropy_defect, renyi_coherent_information, von_neumann_entropy
from .errors import (
    BadExponent,
    EmptyBlocks,
    HypothesisFailed,
    InvalidSymbol,
    OutOfRange,
)

QUANTITIES = (
    "C",
    "Q",
    "P",
    "C_EA",
    "C_dagger",
    "Q_dagger",
    "P_dagger",
    "Q1",
    "neg_S_cb",
)


@dataclass(frozen=True)
class BoundEntry:
    lower: float
    upper: float
    provenance: str


@dataclass
class BoundReport:
    """Named capacity quantities with (lower, upper, provenance) windows."""

    entries: dict[str, BoundEntry] = field(default_factory=dict)

    def set(self, name: str, lower: float, upper: float, provenance: str) -> None:
        if name not in QUANTITIES:
            raise KeyError(f"unknown quantity {name!r}")
        self.entries[name] = BoundEntry(lower, upper, provenance)

    def raise_lower(self, name: str, lower: float, provenance: str) -> None:
        """Tighten a lower bound, keeping the larger of old and new."""
        old = self.entries[name]
        if lower > old.lower:
            self.entries[name] = BoundEntry(lower, old.upper, provenance)

    def check(self, tol: float = 1e-9) -> None:
        for name, e in self.entries.items():
            if e.lower > e.upper + tol:
                raise ValueError(f"{name}: lower {e.lower} exceeds upper {e.upper}")
        if "Q" in self.entries and "P" in self.entries:
            if self.entries["Q"].lower > self.entries["P"].lower + tol:
                raise ValueError("Q lower bound exceeds P lower bound")


def _block_ns(blocks) -> list[int]:
    ns = []
    for b in blocks:
        n = int(b[0]) if isinstance(b, (tuple, list)) else int(b)
        if n < 1:
            raise EmptyBlocks(f"block sizes must be >= 1, got {n}")
        ns.append(n)
    if not ns:
        raise EmptyBlocks("at least one block required")
    return ns


def tro_capacities(blocks: Sequence) -> BoundReport:
    """Exact capacities of a direct sum of partial traces over blocks (n_i, m_i).

    All quantities are strongly additive here, so one-shot, regularized, and
    strong-converse values coincide.
    """
    ns = _block_ns(blocks)
    q = math.log2(max(ns))
    c = math.log2(sum(ns))
    cea = math.log2(sum(n * n for n in ns))
    report = BoundReport()
    exact = "exact block formula (sum of partial traces; strongly additive)"
    sc = "strong converse equals capacity for block channels"
    report.set("C", c, c, exact)
    report.set("Q", q, q, exact)
    report.set("P", q, q, exact)
    report.set("C_EA", cea, cea, exact)
    report.set("Q1", q, q, exact + "; one-shot value coincides")
    report.set("C_dagger", c, c, sc)
    report.set("Q_dagger", q, q, sc)
    report.set("P_dagger", q, q, sc)
    report.check()
    return report


def comparison_bounds(space: StinespringSpace, symbol: Symbol) -> BoundReport:
    """Two-sided capacity windows for the channel modified by a symbol.

    Lower edges are the block-formula values of the reference channel; upper
    edges add the symbol's entropy defect.  The same windows bound the
    one-shot, potential, and strong-converse variants.
    """
    if not isinstance(symbol, Symbol):
        raise InvalidSymbol("comparison_bounds needs a validated Symbol")
    if symbol.dim != space.dim_env:
        raise InvalidSymbol(
            f"symbol dim {symbol.dim} does not match environment {space.dim_env}"
        )
    cert = symbol.certificate
    ns = _block_ns(cert.blocks)
    defect = entropy_defect(symbol)
    q = math.log2(max(ns))
    c = math.log2(sum(ns))
    cea = math.log2(sum(n * n for n in ns))
    exact_base = cert.space_is_tro
    window = "block value to block value + entropy defect of the symbol"
    if not exact_base:
        window += " (dilation range strictly inside the block space; lower edge relaxed to 0)"
    sc = window + "; valid for strong converse rates"

    def lo(v: float) -> float:
        return v if exact_base else 0.0

    report = BoundReport()
    report.set("C", lo(c), c + defect, window)
    report.set("Q", lo(q), q + defect, window)
    report.set("P", lo(q), q + defect, window)
    report.set("C_EA", lo(cea), cea + defect, window)
    report.set("Q1", lo(q), q + defect, window + "; valid for the one-shot and potential variants")
    report.set("C_dagger", lo(c), c + defect, sc)
    report.set("Q_dagger", lo(q), q + defect, sc)
    report.set(
        "P_dagger",
        lo(q),
        q + defect,
        sc + "; also bounded by the relative entropy of entanglement (not computed)",
    )
    report.check()
    return report


# ---------------------------------------------------------------------------
# gradient ascent over input densities


def _clipped_log2(mat: np.ndarray, floor: float = 1e-18) -> np.ndarray:
    w, v = np.linalg.eigh(mc.hermitize(mat))
    w = np.clip(w, floor, None)
    return (v * np.log2(w)) @ v.conj().T


def _entropy_bits(mat: np.ndarray) -> float:
    return von_neumann_entropy(mat, check=False)


class AscentResult(NamedTuple):
    value: float
    rho: np.ndarray


def _gradient_ascent(g0: np.ndarray, value_and_grad, max_iter: int = 400) -> AscentResult:
    """Maximize F(rho) over densities rho = G G*/tr(G G*).

    ``value_and_grad(rho) -> (F, M)`` with M the hermitian Euclidean
    gradient of F at rho; the chain rule through G gives the ascent
    direction (M - tr(M rho) I) G / tr(G G*).  Step halving on rejection.
    """
    g = g0.astype(complex)
    t = float(np.trace(g @ mc.dagger(g)).real)
    rho = (g @ mc.dagger(g)) / t
    f, m = value_and_grad(rho)
    best = AscentResult(f, rho)
    eta = 0.25
    dim = g.shape[0]
    eye = np.eye(dim)
    for _ in range(max_iter):
        c = float(np.trace(m @ rho).real)
        direction = ((m - c * eye) @ g) / t
        gnorm = mc.frobenius(direction)
        if gnorm < 1e-12:
            break
        accepted = False
        while eta > 1e-13:
            g_new = g + eta * direction
            t_new = float(np.trace(g_new @ mc.dagger(g_new)).real)
            rho_new = (g_new @ mc.dagger(g_new)) / t_new
            f_new, m_new = value_and_grad(rho_new)
            if f_new > f + 1e-14:
                g, t, rho, f, m = g_new, t_new, rho_new, f_new, m_new
                eta = min(eta * 1.3, 10.0)
                accepted = True
                break
            eta *= 0.5
        if not accepted:
            break
        if f > best.value:
            best = AscentResult(f, rho)
    if f > best.value:
        best = AscentResult(f, rho)
    return best


def _coherent_value_and_grad(ch: Channel):
    def fun(rho: np.ndarray):
        out = chn.apply(ch, rho)
        env = chn.complement_apply(ch, rho)
        f = _entropy_bits(out) - _entropy_bits(env)
        m = chn.complement_adjoint_apply(ch, _clipped_log2(env)) - chn.adjoint_apply(
            ch, _clipped_log2(out)
        )
        return f, mc.hermitize(m)

    return fun


def _reverse_value_and_grad(ch: Channel):
    def fun(rho: np.ndarray):
        env = chn.complement_apply(ch, rho)
        f = _entropy_bits(rho) - _entropy_bits(env)
        m = chn.complement_adjoint_apply(ch, _clipped_log2(env)) - _clipped_log2(rho)
        return f, mc.hermitize(m)

    return fun


def _init_pool(
    ch: Channel, restarts: int, seed: int, init_states: Optional[Sequence[np.ndarray]]
) -> list[np.ndarray]:
    """Square roots of the restart densities: structured inits first, then the
    maximally mixed state, then seeded random fills."""
    d = ch.dim_in
    pool: list[np.ndarray] = []
    for s in list(init_states or [])[:restarts]:
        pool.append(mc.matrix_power(mc.asmatrix(s), 0.5))
    if len(pool) < restarts:
        pool.append(np.eye(d, dtype=complex) / math.sqrt(d))
    while len(pool) < restarts:
        rng = np.random.default_rng((seed, len(pool)))
        pool.append(mc.random_complex(rng, (d, d)))
    return pool[:restarts]


def _multi_start(
    ch: Channel,
    value_and_grad,
    restarts: int,
    seed: int,
    init_states: Optional[Sequence[np.ndarray]],
    max_workers: int = 1,
) -> AscentResult:
    if restarts < 1:
        raise OutOfRange(f"restarts must be >= 1, got {restarts}")
    pool = _init_pool(ch, restarts, seed, init_states)

    def run(g0: np.ndarray) -> AscentResult:
        return _gradient_ascent(g0, value_and_grad)

    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as ex:
            results = list(ex.map(run, pool))
    else:
        results = [run(g0) for g0 in pool]
    return max(results, key=lambda r: r.value)


def one_shot_q(
    ch: Channel,
    restarts: int = 32,
    seed: int = 0,
    init_states: Optional[Sequence[np.ndarray]] = None,
    max_workers: int = 1,
) -> AscentResult:
    """Best found coherent information max_rho H(N(rho)) - H(N^E(rho)).

    A certified lower bound on the one-shot quantum capacity; global
    optimality is not guaranteed.  Deterministic for a given seed; extra
    ``init_states`` join the restart pool ahead of random draws.
    """
    return _multi_start(ch, _coherent_value_and_grad(ch), restarts, seed, init_states, max_workers)


def negative_cb_entropy(
    ch: Channel,
    mode: str = "formula",
    restarts: int = 32,
    seed: int = 0,
    max_workers: int = 1,
) -> float:
    """Negative cb-entropy sup_rho H(A) - H(AB) over purified inputs.

    ``formula`` mode uses the closed form log2(|in|/|env|) + tau(f log f),
    which requires channel metadata (a validated symbol over a reference
    space) and a complement that is unital up to the scalar |in|/|env|.
    ``numeric`` mode is a multi-start lower bound.
    """
    if mode == "numeric":
        return _multi_start(ch, _reverse_value_and_grad(ch), restarts, seed, None, max_workers).value
    if mode != "formula":
        raise OutOfRange(f"mode must be 'formula' or 'numeric', got {mode!r}")
    if ch.symbol is None or ch.base_space is None:
        raise InvalidSymbol("formula mode needs symbol/base-space metadata on the channel")
    space = ch.base_space
    unit_env = sum(mc.dagger(h) @ h for h in space.basis)
    target = (space.dim / space.dim_env) * np.eye(space.dim_env)
    if float(np.max(np.abs(unit_env - target))) > 1e-9:
        raise HypothesisFailed("complement of the reference channel is not proportionally unital")
    return math.log2(ch.dim_in / ch.dim_env) + entropy_defect(ch.symbol)


def fidelity_bound(m: int, q1p: float, p: float) -> float:
    """Upper bound m^(-1/p') 2^(q1p/p') on quantum-code fidelity at size m.

    ``q1p`` is a Renyi coherent-information value of the channel at the same
    exponent p.
    """
    if not (p > 1.0):
        raise BadExponent(f"fidelity bound needs p > 1, got {p}")
    if m < 1:
        raise OutOfRange(f"code size must be >= 1, got {m}")
    p_conj = 1.0 if np.isinf(p) else p / (p - 1.0)
    return float(m ** (-1.0 / p_conj) * 2.0 ** (q1p / p_conj))


def renyi_coherent_channel(
    ch: Channel,
    p: float,
    restarts: int = 4,
    seed: int = 0,
    init_states: Optional[Sequence[np.ndarray]] = None,
) -> float:
    """Best found Renyi coherent information over purified channel inputs.

    Lower bound on the one-shot Renyi quantum value at exponent p; optimizes
    the purification amplitude matrix with a quasi-Newton method.
    """
    if not (p > 1.0):
        raise BadExponent(f"needs p > 1, got {p}")
    d = ch.dim_in
    kraus = ch.kraus

    def omega_from_g(g: np.ndarray) -> np.ndarray:
        psi = g.reshape(-1)
        psi = psi / np.linalg.norm(psi)
        rho_aa = np.outer(psi, psi.conj())
        eye = np.eye(d, dtype=complex)
        ops = [np.kron(eye, kraus[e]) for e in range(ch.dim_env)]
        return sum(op @ rho_aa @ mc.dagger(op) for op in ops)

    def objective(x: np.ndarray) -> float:
        g = x[: d * d].reshape(d, d) + 1j * x[d * d :].reshape(d, d)
        if np.linalg.norm(g) < 1e-9:
            return 1e6
        omega = omega_from_g(g)
        omega = mc.hermitize(omega) / np.trace(omega).real
        return -renyi_coherent_information(omega, (d, ch.dim_out), p, seed=seed)

    starts: list[np.ndarray] = []
    for s in list(init_states or [])[:restarts]:
        starts.append(mc.matrix_power(mc.asmatrix(s), 0.5) * math.sqrt(d))
    if len(starts) < restarts:
        starts.append(np.eye(d, dtype=complex))
    while len(starts) < restarts:
        rng = np.random.default_rng((seed, len(starts)))
        starts.append(mc.random_complex(rng, (d, d)))

    best = -math.inf
    for g0 in starts[:restarts]:
        x0 = np.concatenate([g0.real.reshape(-1), g0.imag.reshape(-1)])
        res = optimize.minimize(objective, x0, method="L-BFGS-B", options={"maxiter": 60})
        best = max(best, -res.fun)
        best = max(best, -objective(x0))
    return best


# ---------------------------------------------------------------------------
# capacity-region vertex families


class RegionVertex(NamedTuple):
    distribution: np.ndarray
    constraints: dict[str, float]


def _tilted_distribution(ns: list[int], beta: float) -> np.ndarray:
    weights = np.array([float(n) ** beta for n in ns])
    return weights / weights.sum()


def _shannon_bits(p: np.ndarray) -> float:
    mask = p > 0
    return float(-np.sum(p[mask] * np.log2(p[mask])))


def cqe_region_vertices(blocks: Sequence, lam: float, mu: float) -> RegionVertex:
    """Supporting constraints of the classical/quantum/entanglement region.

    The tilt exponent (2 + lam + mu)/(1 + mu) weights blocks by size; the
    right-hand sides bound C+2Q, Q+E, and C+Q+E at that vertex.
    """
    if lam < 0 or mu < 0:
        raise OutOfRange("lam and mu must be nonnegative")
    ns = _block_ns(blocks)
    p = _tilted_distribution(ns, (2.0 + lam + mu) / (1.0 + mu))
    h = _shannon_bits(p)
    tbar = float(np.sum(p * np.log2(ns)))
    return RegionVertex(p, {"C+2Q": h + 2 * tbar, "Q+E": tbar, "C+Q+E": h + tbar})


def rps_region_vertices(blocks: Sequence, lam: float, mu: float) -> RegionVertex:
    """Supporting constraints of the public/private/secret-key region.

    Tilt exponent (1 + lam + mu)/(1 + mu); right-hand sides bound R+P, P+S,
    and R+P+S.
    """
    if lam < 0 or mu < 0:
        raise OutOfRange("lam and mu must be nonnegative")
    ns = _block_ns(blocks)
    q = _tilted_distribution(ns, (1.0 + lam + mu) / (1.0 + mu))
    h = _shannon_bits(q)
    tbar = float(np.sum(q * np.log2(ns)))
    return RegionVertex(q, {"R+P": h + tbar, "P+S": tbar, "R+P+S": h + tbar})
