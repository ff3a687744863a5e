"""Numerical finite-dimensional operator algebra.

*-algebra generation, block (Wedderburn-style) decomposition, trace-
compatible conditional expectations, ternary-ring detection, left/right
algebras of an operator space, independence tests, and symbol validation.

All span computations are Hilbert-Schmidt orthonormal with SVD rank
decisions at relative threshold 1e-9.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np

from . import matcore as mc
from .channel import Channel, StinespringSpace, Symbol, SymbolCertificate, stinespring_space
from .errors import DimMismatch, NotIndependent, NotNormalized, NotTro

RANK_RTOL = 1e-9
GAP_THRESHOLD = 1e-6


def orthonormal_span(mats: Sequence[np.ndarray], rtol: float = RANK_RTOL) -> list[np.ndarray]:
    """Orthonormal basis (HS inner product) of the span of the given matrices."""
    mats = [np.asarray(m, dtype=complex) for m in mats]
    if not mats:
        return []
    shape = mats[0].shape
    rows = np.stack([m.reshape(-1) for m in mats])
    _, s, vh = np.linalg.svd(rows, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return []
    keep = s > rtol * s[0]
    return [vh[i].reshape(shape) for i in range(len(s)) if keep[i]]


def span_residual(mat: np.ndarray, basis: Sequence[np.ndarray]) -> float:
    """Frobenius distance from mat to the span of an orthonormal basis."""
    proj = np.zeros_like(mat)
    for b in basis:
        proj = proj + mc.hs_inner(b, mat) * b
    return mc.frobenius(mat - proj)


def project_span(mat: np.ndarray, basis: Sequence[np.ndarray]) -> np.ndarray:
    out = np.zeros_like(mat, dtype=complex)
    for b in basis:
        out = out + mc.hs_inner(b, mat) * b
    return out


@dataclass(frozen=True)
class AlgebraBasis:
    """Orthonormal basis of a *-algebra inside B(C^dim)."""

    dim: int
    basis: tuple[np.ndarray, ...]
    unital: bool

    @property
    def rank(self) -> int:
        return len(self.basis)


def _make_algebra(dim: int, basis: Sequence[np.ndarray]) -> AlgebraBasis:
    eye = np.eye(dim, dtype=complex)
    unital = span_residual(eye, basis) <= 1e-8 * np.sqrt(dim)
    frozen = []
    for b in basis:
        b = b.copy()
        b.setflags(write=False)
        frozen.append(b)
    return AlgebraBasis(dim=dim, basis=tuple(frozen), unital=unital)


def generate_star_algebra(generators: Sequence[np.ndarray]) -> AlgebraBasis:
    """Smallest adjoint- and product-closed span containing the generators.

    Iterates span <- span + span*span until the rank stabilizes.
    """
    gens = [mc.asmatrix(g) for g in generators]
    if not gens:
        raise DimMismatch("at least one generator required")
    dim = gens[0].shape[0]
    if any(g.shape != (dim, dim) for g in gens):
        raise DimMismatch("generators must be square with a common dimension")
    basis = orthonormal_span(gens + [mc.dagger(g) for g in gens])
    while True:
        products = [a @ b for a in basis for b in basis]
        new_basis = orthonormal_span(list(basis) + products)
        if len(new_basis) == len(basis):
            return _make_algebra(dim, new_basis)
        basis = new_basis


def left_algebra(space: StinespringSpace) -> AlgebraBasis:
    """C*-algebra spanned by x y* over the space basis (acts on the output)."""
    ops = [x @ mc.dagger(y) for x in space.basis for y in space.basis]
    return generate_star_algebra(ops)


def right_algebra(space: StinespringSpace) -> AlgebraBasis:
    """C*-algebra spanned by x* y over the space basis (acts on the environment)."""
    ops = [mc.dagger(x) @ y for x in space.basis for y in space.basis]
    return generate_star_algebra(ops)


class TroCheck(NamedTuple):
    """Result of a triple-product closure test."""

    ok: bool
    witness: Optional[tuple[int, int, int]]
    residual: float

    def __bool__(self) -> bool:  # pragma: no cover - convenience
        return self.ok


def is_tro(mats: Sequence[np.ndarray], tol: float = 1e-8) -> TroCheck:
    """Check closure of span(mats) under the triple product x y* z.

    On failure the witness is the (i, j, k) basis triple with the largest
    out-of-span residual.
    """
    basis = orthonormal_span(mats)
    worst = 0.0
    witness = None
    for i, x in enumerate(basis):
        for j, y in enumerate(basis):
            xy = x @ mc.dagger(y)
            for k, z in enumerate(basis):
                res = span_residual(xy @ z, basis)
                if res > worst:
                    worst = res
                    witness = (i, j, k)
    if worst > tol:
        return TroCheck(False, witness, worst)
    return TroCheck(True, None, worst)


def smallest_containing_tro(mats: Sequence[np.ndarray]) -> list[np.ndarray]:
    """Triple-product closure: the smallest TRO whose span contains the input."""
    basis = orthonormal_span(mats)
    while True:
        triples = []
        for x in basis:
            for y in basis:
                xy = x @ mc.dagger(y)
                triples.extend(xy @ z for z in basis)
        new_basis = orthonormal_span(list(basis) + triples)
        if len(new_basis) == len(basis):
            return new_basis
        basis = new_basis


# ---------------------------------------------------------------------------
# conditional expectations and independence


def conditional_expectation(m: AlgebraBasis, x: np.ndarray) -> np.ndarray:
    """Trace-compatible conditional expectation onto the algebra.

    Numerically the HS-orthogonal projection onto span(M), with the
    identity adjoined first when M is nonunital.
    """
    x = mc.asmatrix(x)
    if x.shape != (m.dim, m.dim):
        raise DimMismatch(f"operand shape {x.shape} does not match algebra dim {m.dim}")
    basis = list(m.basis)
    if not m.unital:
        basis = orthonormal_span(basis + [np.eye(m.dim, dtype=complex)])
    return project_span(x, basis)


def is_independent(x: np.ndarray, m: AlgebraBasis, tol: float = 1e-9) -> bool:
    """True when E_M(x) = tau(x) * identity within tolerance."""
    x = mc.asmatrix(x)
    tau = np.trace(x) / m.dim
    resid = mc.frobenius(conditional_expectation(m, x) - tau * np.eye(m.dim))
    return resid <= tol * max(1.0, mc.frobenius(x))


def spectral_projections(f: np.ndarray, rtol: float = 1e-8) -> list[tuple[float, np.ndarray]]:
    """Eigenvalue clusters of a hermitian matrix with their projections."""
    w, v = mc.herm_eig(f)
    scale = max(1.0, float(np.max(np.abs(w))))
    groups: list[list[int]] = [[0]]
    for i in range(1, len(w)):
        if w[i] - w[groups[-1][-1]] <= rtol * scale:
            groups[-1].append(i)
        else:
            groups.append([i])
    out = []
    for g in groups:
        cols = v[:, g]
        out.append((float(np.mean(w[g])), cols @ mc.dagger(cols)))
    return out


def strong_independence_residuals(f: np.ndarray, m: AlgebraBasis) -> list[float]:
    """Residuals of E_M(P) - tau(P)*1 over the spectral projections of f.

    Independence of every spectral projection is equivalent to independence
    of all powers of f, since those projections span the algebra f generates.
    """
    eye = np.eye(m.dim)
    resids = []
    for _, proj in spectral_projections(f):
        tau = np.trace(proj).real / m.dim
        resids.append(mc.frobenius(conditional_expectation(m, proj) - tau * eye))
    return resids


def is_strongly_independent(f: np.ndarray, m: AlgebraBasis, tol: float = 1e-9) -> bool:
    return max(strong_independence_residuals(f, m)) <= tol


# ---------------------------------------------------------------------------
# block structure of algebras and TROs


@dataclass(frozen=True)
class _AlgebraBlock:
    factor_dim: int  # n: size of the full matrix factor
    multiplicity: int  # l: copies of each irreducible summand
    frame: np.ndarray  # ambient-dim x (n*l), orthonormal columns


def _hermitian_spanning_set(basis: Sequence[np.ndarray]) -> list[np.ndarray]:
    """Orthonormal basis of the hermitian part of an adjoint-closed span.

    Works over the reals so that the output matrices are genuinely
    hermitian (a complex SVD would introduce phases that break it).
    """
    cands = []
    for b in basis:
        cands.append(b + mc.dagger(b))
        cands.append(1j * (b - mc.dagger(b)))
    shape = cands[0].shape
    rows = np.stack(
        [np.concatenate([m.real.reshape(-1), m.imag.reshape(-1)]) for m in cands]
    )
    _, s, vh = np.linalg.svd(rows, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return []
    keep = s > RANK_RTOL * s[0]
    half = shape[0] * shape[1]
    out = []
    for i in range(len(s)):
        if keep[i]:
            out.append((vh[i, :half] + 1j * vh[i, half:]).reshape(shape))
    return out


def _center_basis(basis: Sequence[np.ndarray], dim: int) -> list[np.ndarray]:
    """Orthonormal basis of the center of the algebra spanned by `basis`."""
    k = len(basis)
    rows = np.zeros((k * dim * dim, k), dtype=complex)
    for j, bj in enumerate(basis):
        col = [(bj @ bk - bk @ bj).reshape(-1) for bk in basis]
        rows[:, j] = np.concatenate(col)
    # rows has at least as many rows as columns, so the reduced SVD still
    # carries every right-singular vector
    _, s, vh = np.linalg.svd(rows, full_matrices=False)
    null_mask = np.ones(k, dtype=bool)
    if s.size:
        null_mask[: len(s)] = s <= RANK_RTOL * max(s[0], 1.0)
    coeffs = vh.conj().T[:, null_mask]
    center = [sum(coeffs[j, c] * basis[j] for j in range(k)) for c in range(coeffs.shape[1])]
    return orthonormal_span(center)


def _cluster_eigh(mat: np.ndarray, gap: float = GAP_THRESHOLD):
    """Eigendecompose and split the spectrum at gaps larger than `gap`."""
    w, v = np.linalg.eigh(mc.hermitize(mat))
    groups: list[list[int]] = [[0]]
    for i in range(1, len(w)):
        if w[i] - w[i - 1] <= gap:
            groups[-1].append(i)
        else:
            groups.append([i])
    return [(w[g], v[:, g]) for g in groups]


def _random_hermitian_element(rng: np.random.Generator, herm_basis: Sequence[np.ndarray]) -> np.ndarray:
    coeffs = rng.standard_normal(len(herm_basis))
    out = np.zeros_like(herm_basis[0])
    for c, h in zip(coeffs, herm_basis):
        out = out + c * h
    return mc.hermitize(out)


def algebra_blocks(
    alg: AlgebraBasis, rng: np.random.Generator, max_tries: int = 12
) -> list[_AlgebraBlock]:
    """Block structure of a C*-algebra: factors M_n with multiplicity l.

    Samples a random hermitian element of the center to split the central
    summands, then a random hermitian element inside each summand to read
    off the factor size from eigenvalue degeneracies.  Degenerate spectra
    are retried with a fresh sample.
    """
    dim = alg.dim
    # Restrict to the support of the algebra unit (the algebra may act
    # trivially on part of the ambient space).
    t = sum(b @ mc.dagger(b) for b in alg.basis)
    w, v = mc.herm_eig(t)
    sup = w > 1e-10 * max(float(np.max(w)), 1.0)
    v_sup = v[:, sup]
    comp = [mc.dagger(v_sup) @ b @ v_sup for b in alg.basis]
    comp = orthonormal_span(comp)
    r = v_sup.shape[1]

    center = _center_basis(comp, r)
    herm_center = _hermitian_spanning_set(center)
    herm_alg = _hermitian_spanning_set(comp)
    n_blocks = len(center)

    for _ in range(max_tries):
        zeta = _random_hermitian_element(rng, herm_center)
        clusters = _cluster_eigh(zeta)
        if len(clusters) != n_blocks:
            continue
        blocks: list[_AlgebraBlock] = []
        ok = True
        for _, cols in clusters:
            blk = _resolve_factor(cols, herm_alg, rng)
            if blk is None:
                ok = False
                break
            blocks.append(blk)
        if not ok:
            continue
        # embed frames back into the ambient space
        out = [
            _AlgebraBlock(b.factor_dim, b.multiplicity, v_sup @ b.frame) for b in blocks
        ]
        if sum(b.factor_dim**2 for b in out) == len(comp):
            return out
    raise NotTro("block resolution failed to stabilize; spectrum persistently degenerate")


def _resolve_factor(
    cols: np.ndarray, herm_alg: Sequence[np.ndarray], rng: np.random.Generator
) -> Optional[_AlgebraBlock]:
    """Resolve one central summand M_n (x) 1_l and build an adapted frame."""
    sub = cols  # r x d_i, orthonormal columns of the central projection
    d_i = sub.shape[1]
    a = mc.dagger(sub) @ _random_hermitian_element(rng, herm_alg) @ sub
    clusters = _cluster_eigh(a)
    sizes = {len(c[0]) for c in clusters}
    if len(sizes) != 1:
        return None
    mult = sizes.pop()
    n = len(clusters)
    if n * mult != d_i:
        return None
    if n == 1:
        return _AlgebraBlock(1, mult, sub @ clusters[0][1])
    # Align multiplicity spaces across eigenvalue clusters with a second
    # random element: the polar part of Q_a* b Q_1 carries cluster 1's
    # multiplicity basis onto cluster a's.
    b = mc.dagger(sub) @ _random_hermitian_element(rng, herm_alg) @ sub
    q1 = clusters[0][1]
    frames = [q1]
    for _, qa in clusters[1:]:
        c = mc.dagger(qa) @ b @ q1
        u, s, vh = np.linalg.svd(c)
        if s.size == 0 or s[-1] <= 1e-8 * max(s[0], 1.0):
            return None
        frames.append(qa @ (u @ vh))
    frame = np.concatenate(frames, axis=1)  # columns ordered (a, s)
    return _AlgebraBlock(n, mult, sub @ frame)


@dataclass(frozen=True)
class TroDecomposition:
    """Rectangular block structure of a TRO with realizing unitaries.

    ``blocks[i] = (n_i, m_i, l_i)``: output size, environment size,
    multiplicity.  Conjugating the TRO basis by the two unitaries supports
    every element on the declared diagonal rectangles.
    """

    blocks: tuple[tuple[int, int, int], ...]
    basis_change_out: np.ndarray
    basis_change_env: np.ndarray

    @property
    def rect_blocks(self) -> tuple[tuple[int, int], ...]:
        return tuple((n, m) for n, m, _ in self.blocks)


def _complete_frame(frames: list[np.ndarray], dim: int) -> np.ndarray:
    """Stack column frames and append an orthonormal basis of the complement."""
    if frames:
        u = np.concatenate(frames, axis=1)
    else:
        u = np.zeros((dim, 0), dtype=complex)
    if u.shape[1] < dim:
        proj = np.eye(dim) - u @ mc.dagger(u)
        w, v = np.linalg.eigh(mc.hermitize(proj))
        comp = v[:, w > 0.5]
        u = np.concatenate([u, comp], axis=1)
    return u


def tro_block_decomposition(
    space, seed: int = 0, tol: float = 1e-8
) -> TroDecomposition:
    """Block decomposition of a verified TRO.

    Accepts a StinespringSpace or a sequence of matrices spanning the TRO.
    Raises NotTro when the span fails the triple-product test.
    """
    if isinstance(space, StinespringSpace):
        mats = list(space.basis)
    else:
        mats = [mc.asmatrix(m) for m in space]
    basis = orthonormal_span(mats)
    check = is_tro(basis, tol=tol)
    if not check.ok:
        raise NotTro(
            f"triple product leaves the span (witness {check.witness}, "
            f"residual {check.residual:.3e})"
        )
    rng = np.random.default_rng(seed)
    dim_out, dim_env = basis[0].shape

    lalg = generate_star_algebra([x @ mc.dagger(y) for x in basis for y in basis])
    ralg = generate_star_algebra([mc.dagger(x) @ y for x in basis for y in basis])
    lblocks = algebra_blocks(lalg, rng)
    rblocks = algebra_blocks(ralg, rng)

    # Pair left and right central summands through the TRO's mass.
    pairs: list[tuple[_AlgebraBlock, _AlgebraBlock]] = []
    used: set[int] = set()
    for lb in lblocks:
        pl = lb.frame @ mc.dagger(lb.frame)
        best, best_mass = None, 0.0
        for j, rb in enumerate(rblocks):
            if j in used:
                continue
            pr = rb.frame @ mc.dagger(rb.frame)
            mass = sum(mc.frobenius(pl @ x @ pr) ** 2 for x in basis)
            if mass > best_mass:
                best, best_mass = j, mass
        if best is None or best_mass <= tol:
            raise NotTro("left summand carries no TRO mass; pairing failed")
        used.add(best)
        pairs.append((lb, rblocks[best]))

    blocks = []
    for lb, rb in pairs:
        if lb.multiplicity != rb.multiplicity:
            raise NotTro(
                f"left/right multiplicities disagree ({lb.multiplicity} vs {rb.multiplicity})"
            )
        blocks.append((lb.factor_dim, rb.factor_dim, lb.multiplicity))

    u_out = _complete_frame([lb.frame for lb, _ in pairs], dim_out)
    u_env = _complete_frame([rb.frame for _, rb in pairs], dim_env)

    # Verify rectangle support of the conjugated basis.
    row_edges = np.cumsum([0] + [n * l for (n, _, l) in blocks])
    col_edges = np.cumsum([0] + [m * l for (_, m, l) in blocks])
    for x in basis:
        y = mc.dagger(u_out) @ x @ u_env
        mask = np.ones_like(y, dtype=bool)
        for i in range(len(blocks)):
            mask[row_edges[i] : row_edges[i + 1], col_edges[i] : col_edges[i + 1]] = False
        off = float(np.max(np.abs(y[mask]))) if mask.any() else 0.0
        if off > tol:
            raise NotTro(f"conjugated basis leaks outside declared rectangles ({off:.3e})")

    if sum(n * m for n, m, _ in blocks) != len(basis):
        raise NotTro("block dimensions do not account for the span dimension")

    return TroDecomposition(
        blocks=tuple(blocks), basis_change_out=u_out, basis_change_env=u_env
    )


# ---------------------------------------------------------------------------
# symbol validation


def validate_symbol(ch: Channel, f: np.ndarray, seed: int = 0, tol: float = 1e-9) -> Symbol:
    """Certify an environment density as a symbol of the channel.

    Computes the smallest TRO containing the channel's dilation range and
    checks strong independence of f from that TRO's right algebra.  The
    certificate records the TRO's block structure and the independence
    residuals.
    """
    f = mc.asmatrix(f)
    space = stinespring_space(ch)
    if f.shape != (space.dim_env, space.dim_env):
        raise DimMismatch(
            f"symbol dim {f.shape[0]} does not match environment {space.dim_env}"
        )
    w, _ = mc.herm_eig(f)
    if float(np.min(w)) < -1e-10 * max(1.0, float(np.max(w))):
        raise NotNormalized("symbol must be positive semidefinite")
    tau = np.trace(f).real / space.dim_env
    if abs(tau - 1.0) > 1e-10:
        raise NotNormalized(f"normalized trace is {tau:.6f}, expected 1")

    tro_basis = smallest_containing_tro(space.basis)
    ralg = generate_star_algebra([mc.dagger(x) @ y for x in tro_basis for y in tro_basis])
    resids = strong_independence_residuals(f, ralg)
    bad = [k for k, r in enumerate(resids) if r > tol]
    if bad:
        raise NotIndependent(
            f"spectral projection(s) {bad} of the symbol fail independence "
            f"(worst residual {max(resids):.3e})"
        )
    decomp = tro_block_decomposition(tro_basis, seed=seed)
    cert = SymbolCertificate(
        blocks=decomp.blocks,
        residuals=tuple(resids),
        right_algebra_dim=ralg.rank,
        tro_dim=len(tro_basis),
        space_is_tro=(len(tro_basis) == space.dim),
    )
    return Symbol(f=f, certificate=cert)


def identity_symbol(ch: Channel, seed: int = 0) -> Symbol:
    """The identity density, always a valid symbol."""
    return validate_symbol(ch, np.eye(ch.dim_env, dtype=complex), seed=seed)
