"""Channel representations and transforms.

A channel is stored as a stacked Kraus family ``kraus[e, i, k]`` mapping
input index ``k`` to output index ``i`` through environment index ``e``.
The Stinespring dilation is ``V|h> = sum_e (K_e |h>) (x) |e>``; its range,
read as operators from the environment to the output, is the channel's
Stinespring space.  Operator representatives ``h`` of input vectors
satisfy ``N(|x><y|) = x y*`` and ``N^E(|x><y|) = y* x``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import matcore as mc
from .errors import (
    DimMismatch,
    InvalidSymbol,
    NotTracePreserving,
    OutOfRange,
    RankDeficient,
)

TP_TOL = 1e-10


@dataclass(frozen=True)
class Channel:
    """CPTP map as a Kraus family with dimension metadata.

    ``base_space`` and ``symbol`` are optional construction metadata: when
    the channel was built by modifying a reference channel with an
    environment density, they record that reference space and the density's
    certificate.  Entropy- and capacity-level code uses them to produce
    exact window bounds.
    """

    kraus: np.ndarray  # shape (dim_env, dim_out, dim_in)
    base_space: Optional["StinespringSpace"] = field(default=None, compare=False)
    symbol: Optional["Symbol"] = field(default=None, compare=False)

    def __post_init__(self):
        k = np.asarray(self.kraus, dtype=complex)
        if k.ndim != 3:
            raise DimMismatch("kraus must be a stacked (env, out, in) array")
        k = k.copy()
        k.setflags(write=False)
        object.__setattr__(self, "kraus", k)

    @property
    def dim_in(self) -> int:
        return self.kraus.shape[2]

    @property
    def dim_out(self) -> int:
        return self.kraus.shape[1]

    @property
    def dim_env(self) -> int:
        return self.kraus.shape[0]

    def with_metadata(self, base_space=None, symbol=None) -> "Channel":
        return Channel(self.kraus, base_space=base_space, symbol=symbol)


@dataclass(frozen=True)
class StinespringSpace:
    """Orthonormal operator basis of the dilation range in B(H_E, H_B)."""

    basis: tuple[np.ndarray, ...]  # each dim_out x dim_env
    dim_out: int
    dim_env: int
    source: Optional[Channel] = field(default=None, compare=False)

    @property
    def dim(self) -> int:
        return len(self.basis)

    def stacked(self) -> np.ndarray:
        return np.stack(self.basis)


@dataclass(frozen=True)
class SymbolCertificate:
    """Record of the independence checks behind a validated symbol.

    ``blocks`` is the rectangular block structure (n_i, m_i, l_i) of the
    smallest triple-product-closed space containing the channel's dilation
    range; ``residuals`` are the conditional-expectation residuals of the
    density's spectral projections against that space's right algebra.
    """

    blocks: tuple[tuple[int, int, int], ...]
    residuals: tuple[float, ...]
    right_algebra_dim: int
    tro_dim: int
    space_is_tro: bool


@dataclass(frozen=True)
class Symbol:
    """Normalized environment density with its independence certificate."""

    f: np.ndarray
    certificate: SymbolCertificate

    def __post_init__(self):
        f = np.asarray(self.f, dtype=complex).copy()
        f.setflags(write=False)
        object.__setattr__(self, "f", f)

    @property
    def dim(self) -> int:
        return self.f.shape[0]


def from_kraus(kraus) -> Channel:
    """Build a channel from a list of equally-shaped Kraus operators.

    Raises NotTracePreserving with the deviation norm when the family does
    not resolve the identity.
    """
    ops = [mc.asmatrix(k) for k in kraus]
    if not ops:
        raise DimMismatch("at least one Kraus operator required")
    shape = ops[0].shape
    if any(k.shape != shape for k in ops):
        raise DimMismatch("Kraus operators must share a common shape")
    stack = np.stack(ops)
    gram = np.einsum("eji,ejk->ik", stack.conj(), stack)
    dev = float(np.max(np.abs(gram - np.eye(shape[1]))))
    if dev > TP_TOL:
        raise NotTracePreserving(f"sum K*K deviates from identity by {dev:.3e}")
    return Channel(stack)


def apply(ch: Channel, rho: np.ndarray) -> np.ndarray:
    """Channel action sum_e K_e rho K_e*."""
    rho = mc.asmatrix(rho)
    if rho.shape != (ch.dim_in, ch.dim_in):
        raise DimMismatch(f"input shape {rho.shape}, channel expects {ch.dim_in}")
    return np.einsum("eij,jk,elk->il", ch.kraus, rho, ch.kraus.conj())


def complement_apply(ch: Channel, rho: np.ndarray) -> np.ndarray:
    """Complementary channel on the environment.

    Entry (a, b) is tr(K_b rho K_a*), so rank-one inputs |x><y| map to
    y* x on operator representatives.
    """
    rho = mc.asmatrix(rho)
    if rho.shape != (ch.dim_in, ch.dim_in):
        raise DimMismatch(f"input shape {rho.shape}, channel expects {ch.dim_in}")
    return np.einsum("bij,jk,aik->ab", ch.kraus, rho, ch.kraus.conj())


def adjoint_apply(ch: Channel, y: np.ndarray) -> np.ndarray:
    """Heisenberg-picture adjoint sum_e K_e* Y K_e."""
    y = mc.asmatrix(y)
    return np.einsum("eji,jk,ekl->il", ch.kraus.conj(), y, ch.kraus)


def complement_adjoint_apply(ch: Channel, z: np.ndarray) -> np.ndarray:
    """Adjoint of the complementary channel: sum_ab z[a,b] K_b* K_a."""
    z = mc.asmatrix(z)
    return np.einsum("ab,bjk,aji->ki", z, ch.kraus.conj(), ch.kraus)


def choi(ch: Channel) -> np.ndarray:
    """Unnormalized Choi matrix sum_ij e_ij (x) N(e_ij) on H_in (x) H_out."""
    d = ch.dim_in
    blocks = np.einsum("eij,ekl->jlik", ch.kraus, ch.kraus.conj())
    # blocks[j, l] = N(e_jl); assemble sum e_jl (x) N(e_jl)
    out = blocks.transpose(0, 2, 1, 3).reshape(d * ch.dim_out, d * ch.dim_out)
    return out


def stinespring_space(ch: Channel, tol: float = 1e-10) -> StinespringSpace:
    """Operator basis of the dilation range.

    For input basis vector |k> the representative is the dim_out x dim_env
    matrix with columns K_e|k>.  Trace preservation makes these orthonormal
    under the Hilbert-Schmidt inner product; a violation raises
    RankDeficient.  The partial-trace identities N(|x><y|) = x y* and
    N^E(|x><y|) = y* x are verified on all basis pairs.
    """
    # kraus[e, i, k] -> basis op for input k has entry [i, e]
    ops = [ch.kraus[:, :, k].T.copy() for k in range(ch.dim_in)]
    gram = np.array([[mc.hs_inner(a, b) for b in ops] for a in ops])
    if float(np.max(np.abs(gram - np.eye(ch.dim_in)))) > tol:
        raise RankDeficient("dilation is not isometric within tolerance")
    d = ch.dim_in
    out_blocks = np.einsum("eij,ekl->jlik", ch.kraus, ch.kraus.conj())
    env_blocks = np.einsum("bij,aik->jkab", ch.kraus, ch.kraus.conj())
    for x in range(d):
        for y in range(d):
            if (
                float(np.max(np.abs(out_blocks[x, y] - ops[x] @ mc.dagger(ops[y])))) > tol
                or float(np.max(np.abs(env_blocks[x, y] - mc.dagger(ops[y]) @ ops[x]))) > tol
            ):
                raise RankDeficient("dilation violates the partial-trace identities")
    for op in ops:
        op.setflags(write=False)
    return StinespringSpace(
        basis=tuple(ops), dim_out=ch.dim_out, dim_env=ch.dim_env, source=ch
    )


def modified_channel(space: StinespringSpace, symbol: Symbol) -> Channel:
    """Channel acting as x f y* on operator representatives.

    Realized through the dilation |x> -> |x sqrt(f)|>, i.e. the Kraus
    columns are read off the representatives right-multiplied by sqrt(f).
    """
    if not isinstance(symbol, Symbol):
        raise InvalidSymbol("modified_channel needs a validated Symbol")
    f = symbol.f
    if f.shape != (space.dim_env, space.dim_env):
        raise InvalidSymbol(
            f"symbol dimension {f.shape[0]} does not match environment {space.dim_env}"
        )
    tau = np.trace(f).real / space.dim_env
    if abs(tau - 1.0) > 1e-10:
        raise InvalidSymbol(f"symbol has normalized trace {tau:.6f}, expected 1")
    sqrt_f = mc.matrix_power(f, 0.5)
    stacked = np.stack([op @ sqrt_f for op in space.basis])  # (in, out, env)
    kraus = stacked.transpose(2, 1, 0)
    ch = Channel(kraus)
    return ch.with_metadata(base_space=space, symbol=symbol)


def base_channel(space: StinespringSpace) -> Channel:
    """Channel whose dilation range is exactly the given space basis."""
    stacked = np.stack(space.basis)  # (in, out, env)
    return Channel(stacked.transpose(2, 1, 0))


def tensor_channels(a: Channel, b: Channel) -> Channel:
    """Tensor product channel with Kraus family {K_e (x) L_e'}."""
    kraus = np.einsum("eij,fkl->efikjl", a.kraus, b.kraus).reshape(
        a.dim_env * b.dim_env, a.dim_out * b.dim_out, a.dim_in * b.dim_in
    )
    return Channel(kraus)


def heralded_channel(a: Channel, b: Channel, lam: float) -> Channel:
    """Probabilistic block-diagonal combination lam*N (+) (1-lam)*M.

    Both channels must share the input dimension; the output spaces are
    stacked so the receiver can tell which branch fired.
    """
    if a.dim_in != b.dim_in:
        raise DimMismatch("heralded channels need a common input dimension")
    if not (0.0 <= lam <= 1.0):
        raise OutOfRange(f"herald probability must lie in [0, 1], got {lam}")
    d_out = a.dim_out + b.dim_out
    ops = []
    for e in range(a.dim_env):
        k = np.zeros((d_out, a.dim_in), dtype=complex)
        k[: a.dim_out] = np.sqrt(lam) * a.kraus[e]
        ops.append(k)
    for e in range(b.dim_env):
        k = np.zeros((d_out, b.dim_in), dtype=complex)
        k[a.dim_out :] = np.sqrt(1.0 - lam) * b.kraus[e]
        ops.append(k)
    return Channel(np.stack(ops))


def identity_channel(dim: int) -> Channel:
    return Channel(np.eye(dim, dtype=complex)[None, :, :])
