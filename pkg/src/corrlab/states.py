"""State families on chains and rings: dense pure states, MPS, expanders, TFIM.

Sites are numbered 0..n-1. On a ring, a region may wrap around; reduced
states of wrapping regions are computed by rotating the sites first so that
the region becomes contiguous.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .tensor import (
    RngSeed,
    as_generator,
    haar_state,
    haar_unitary,
    hermitize,
    partial_trace,
)

UNITAL_TOL = 1e-10


# ---------------------------------------------------------------------------
# regions


@dataclass(frozen=True)
class Region:
    """Contiguous run of ``length`` sites starting at ``start``."""

    start: int
    length: int
    n: int
    topology: str = "ring"

    def __post_init__(self):
        if not 1 <= self.length <= self.n:
            raise ValueError(f"region length {self.length} outside [1, {self.n}]")
        if not 0 <= self.start < self.n:
            raise ValueError(f"region start {self.start} outside [0, {self.n})")
        if self.topology == "line" and self.start + self.length > self.n:
            raise ValueError("regions on a line cannot wrap around")

    @property
    def sites(self) -> list[int]:
        return [(self.start + k) % self.n for k in range(self.length)]

    def gap_to(self, other: "Region") -> int:
        """Number of sites strictly between the two regions (minimum over both sides on a ring)."""
        a, b = set(self.sites), set(other.sites)
        if a & b:
            return -1
        if self.topology == "line":
            if max(a) < min(b):
                return min(b) - max(a) - 1
            return min(a) - max(b) - 1
        # walk clockwise from the end of self to the start of other, and back
        end_self = (self.start + self.length - 1) % self.n
        end_other = (other.start + other.length - 1) % self.n
        right = (other.start - end_self - 1) % self.n
        left = (self.start - end_other - 1) % self.n
        return min(right, left)


def separation(x: Region, y: Region) -> int:
    return x.gap_to(y)


# ---------------------------------------------------------------------------
# chain states


@dataclass
class ChainState:
    """Pure state on ``n`` sites of local dimension ``d``."""

    amplitudes: np.ndarray
    n: int
    d: int = 2
    topology: str = "ring"
    label: str = ""

    def __post_init__(self):
        a = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if self.n < 2:
            raise ValueError("a chain needs at least two sites")
        if a.size != self.d**self.n:
            raise ValueError(f"{a.size} amplitudes do not match d^n = {self.d ** self.n}")
        if abs(np.linalg.norm(a) - 1) > 1e-10:
            raise ValueError(f"amplitudes not normalized (norm {np.linalg.norm(a):.12f})")
        if self.topology not in ("ring", "line"):
            raise ValueError(f"unknown topology {self.topology!r}")
        self.amplitudes = a

    @property
    def dims(self) -> list[int]:
        return [self.d] * self.n

    @property
    def is_pure(self) -> bool:
        return True

    def region(self, start: int, length: int) -> Region:
        return Region(start, length, self.n, self.topology)

    def reduced(self, sites: Iterable[int]) -> np.ndarray:
        """Reduced density matrix on ``sites`` (kept in the order given)."""
        return _reduced_in_order(self.amplitudes, self.dims, list(sites))


@dataclass
class MixedChainState:
    """Mixed state on a chain, stored as a dense density matrix."""

    matrix: np.ndarray
    n: int
    d: int = 2
    topology: str = "ring"
    label: str = ""

    def __post_init__(self):
        m = hermitize(np.asarray(self.matrix, dtype=complex))
        if m.shape != (self.d**self.n, self.d**self.n):
            raise ValueError("density matrix shape does not match d^n")
        if abs(np.trace(m).real - 1) > 1e-10:
            raise ValueError("density matrix must have unit trace")
        self.matrix = m

    @property
    def dims(self) -> list[int]:
        return [self.d] * self.n

    @property
    def is_pure(self) -> bool:
        return False

    def region(self, start: int, length: int) -> Region:
        return Region(start, length, self.n, self.topology)

    def reduced(self, sites: Iterable[int]) -> np.ndarray:
        return _reduced_in_order(self.matrix, self.dims, list(sites))


def _reduced_in_order(op, dims, sites):
    if len(set(sites)) != len(sites):
        raise ValueError("repeated site")
    rho = partial_trace(op, dims, sites)
    order = sorted(sites)
    if order == list(sites):
        return rho
    from .tensor import permute_factors

    sub = [dims[s] for s in order]
    perm = [order.index(s) for s in sites]
    return permute_factors(rho, sub, perm)


def reduced_density(state, region: Region | Sequence[Region]) -> np.ndarray:
    """Reduced state of one region, or of a union of regions (in the order given)."""
    regions = [region] if isinstance(region, Region) else list(region)
    sites = [s for r in regions for s in r.sites]
    return state.reduced(sites)


# ---------------------------------------------------------------------------
# named fixtures


def product_state(n: int, local: Sequence[complex] | None = None, d: int = 2, topology: str = "ring") -> ChainState:
    v = np.asarray(local if local is not None else np.eye(d)[0], dtype=complex)
    v = v / np.linalg.norm(v)
    psi = np.ones(1, dtype=complex)
    for _ in range(n):
        psi = np.kron(psi, v)
    return ChainState(psi, n, v.size, topology, label=f"product:{n}")


def ghz_state(n: int, d: int = 2, topology: str = "ring") -> ChainState:
    psi = np.zeros(d**n, dtype=complex)
    for k in range(d):
        psi[sum(k * d**j for j in range(n))] = 1
    return ChainState(psi / np.sqrt(d), n, d, topology, label=f"ghz:{n}")


def haar_chain(n: int, rng, d: int = 2, topology: str = "ring") -> ChainState:
    return ChainState(haar_state(d**n, rng), n, d, topology, label=f"haar:{n}")


def maximally_mixed_chain(n: int, d: int = 2) -> MixedChainState:
    return MixedChainState(np.eye(d**n) / d**n, n, d, label=f"mixed:{n}")


# ---------------------------------------------------------------------------
# transverse-field Ising model


_X = sp.csr_matrix(np.array([[0, 1], [1, 0]], dtype=float))
_Z = sp.csr_matrix(np.array([[1, 0], [0, -1]], dtype=float))


def _site_op(op, k, n):
    out = sp.identity(1, format="csr")
    for j in range(n):
        out = sp.kron(out, op if j == k else sp.identity(2, format="csr"), format="csr")
    return out


def tfim_hamiltonian(n: int, h: float) -> sp.csr_matrix:
    """-sum_i Z_i Z_{i+1} - h sum_i X_i on a ring (bond i -> i+1 mod n for every i)."""
    dim = 2**n
    ham = sp.csr_matrix((dim, dim))
    zs = [_site_op(_Z, k, n) for k in range(n)]
    for i in range(n):
        ham = ham - zs[i] @ zs[(i + 1) % n]
        ham = ham - h * _site_op(_X, i, n)
    return ham.tocsr()


@dataclass
class GroundState:
    state: ChainState
    energy: float
    residual: float
    method: str


def tfim_groundstate(n: int, h: float, method: str = "auto") -> GroundState:
    """Ground state of the ring TFIM; dense eigensolver up to n = 10, Lanczos above."""
    if not 2 <= n <= 14:
        raise ValueError("TFIM ground states supported for 2 <= n <= 14")
    if h <= 0:
        raise ValueError("transverse field must be positive")
    ham = tfim_hamiltonian(n, h)
    if method == "auto":
        method = "dense" if n <= 10 else "lanczos"
    if method == "dense":
        w, v = np.linalg.eigh(ham.toarray())
        e, psi = float(w[0]), v[:, 0]
    elif method == "lanczos":
        v0 = np.ones(2**n) / np.sqrt(2**n)
        w, v = spla.eigsh(ham, k=1, which="SA", v0=v0, tol=1e-14, maxiter=20000)
        e, psi = float(w[0]), v[:, 0]
    else:
        raise ValueError(f"unknown method {method!r}")
    psi = psi.astype(complex)
    psi /= np.linalg.norm(psi)
    k = int(np.argmax(np.abs(psi)))
    psi *= np.exp(-1j * np.angle(psi[k]))
    residual = float(np.linalg.norm(ham @ psi - e * psi))
    return GroundState(ChainState(psi, n, 2, "ring", label=f"tfim:{n}:{h:g}"), e, residual, method)


# ---------------------------------------------------------------------------
# channels and matrix product states


@dataclass
class QuantumChannel:
    kraus_ops: list[np.ndarray]

    def __post_init__(self):
        self.kraus_ops = [np.asarray(k, dtype=complex) for k in self.kraus_ops]

    @property
    def dim(self) -> int:
        return self.kraus_ops[0].shape[0]

    @property
    def trace_preserving(self) -> bool:
        s = sum(k.conj().T @ k for k in self.kraus_ops)
        return bool(np.max(np.abs(s - np.eye(self.dim))) <= UNITAL_TOL)

    @property
    def unital(self) -> bool:
        s = sum(k @ k.conj().T for k in self.kraus_ops)
        return bool(np.max(np.abs(s - np.eye(self.dim))) <= UNITAL_TOL)

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        return sum(k @ rho @ k.conj().T for k in self.kraus_ops)

    def power(self, rho: np.ndarray, l: int) -> np.ndarray:
        for _ in range(l):
            rho = self(rho)
        return rho

    def transfer_matrix(self) -> np.ndarray:
        """sum_k A_k (x) conj(A_k)."""
        return sum(np.kron(k, k.conj()) for k in self.kraus_ops)


@dataclass
class MatrixProductState:
    """Site tensors of shape (d, D_left, D_right) closed by a trace.

    Open chains use boundary bond dimension 1, so the trace closure covers both.
    """

    site_tensors: list[np.ndarray]
    translation_invariant: bool = False
    norm: float | None = field(default=None)

    def __post_init__(self):
        self.site_tensors = [np.asarray(a, dtype=complex) for a in self.site_tensors]
        for a, b in zip(self.site_tensors, self.site_tensors[1:] + self.site_tensors[:1]):
            if a.shape[2] != b.shape[1]:
                raise ValueError("bond dimensions do not match around the chain")

    @property
    def n(self) -> int:
        return len(self.site_tensors)

    @property
    def d(self) -> int:
        return self.site_tensors[0].shape[0]

    @property
    def bond_dim(self) -> int:
        return max(max(a.shape[1], a.shape[2]) for a in self.site_tensors)

    @property
    def boundary(self) -> str:
        return "open" if self.site_tensors[0].shape[1] == 1 else "ring"

    def channel(self) -> QuantumChannel:
        return QuantumChannel(list(self.site_tensors[0]))

    def raw_coefficients(self) -> np.ndarray:
        """Unnormalized tr(A_{i1} ... A_{in}) for all index strings (lexicographic)."""
        if self.n * np.log2(self.d) > 20:
            raise ValueError("dense expansion limited to n log2 d <= 20")
        first = self.site_tensors[0]
        t = first  # (d^k, D0, Dk)
        for a in self.site_tensors[1:]:
            t = np.einsum("pab,qbc->pqac", t, a).reshape(-1, t.shape[1], a.shape[2])
        return np.einsum("paa->p", t)

    def coefficient(self, indices: Sequence[int]) -> complex:
        m = np.eye(self.site_tensors[0].shape[1], dtype=complex)
        for a, i in zip(self.site_tensors, indices):
            m = m @ a[i]
        return complex(np.trace(m))

    def to_dense(self) -> np.ndarray:
        c = self.raw_coefficients()
        nrm = np.linalg.norm(c)
        if nrm == 0:
            raise ArithmeticError("MPS dense expansion has zero norm")
        self.norm = float(nrm)
        return c / nrm

    def to_chain(self, topology: str = "ring") -> ChainState:
        return ChainState(self.to_dense(), self.n, self.d, topology)

    def norm_from_transfer(self) -> float:
        """sqrt(tr(E_1 ... E_n)) with E the site transfer matrices."""
        m = None
        for a in self.site_tensors:
            e = np.einsum("iab,icd->acbd", a, a.conj()).reshape(a.shape[1] ** 2, a.shape[2] ** 2)
            m = e if m is None else m @ e
        return float(np.sqrt(abs(np.trace(m))))


def aklt_tensors() -> np.ndarray:
    """Spin-1 AKLT tensors A^{+}, A^{0}, A^{-} (D = 2), normalized so sum A^dag A = I."""
    sp_ = np.array([[0, 1], [0, 0]], dtype=complex)
    sz = np.array([[1, 0], [0, -1]], dtype=complex)
    sm = sp_.T.copy()
    return np.array([np.sqrt(2 / 3) * sp_, -np.sqrt(1 / 3) * sz, -np.sqrt(2 / 3) * sm])


def aklt_mps(n: int = 6) -> MatrixProductState:
    a = aklt_tensors()
    return MatrixProductState([a] * n, translation_invariant=True)


def expander_state(d: int, D: int, n: int, rng) -> tuple[MatrixProductState, QuantumChannel]:
    """Translation-invariant MPS with Kraus matrices A_i = U_i / sqrt(d), U_i Haar on C^D."""
    if d < 1 or D < 2 or n < 2:
        raise ValueError("need d >= 1, D >= 2 and n >= 2")
    gen = as_generator(rng)
    for attempt in range(2):
        a = np.array([haar_unitary(D, gen) for _ in range(d)]) / np.sqrt(d)
        ch = QuantumChannel(list(a))
        if not (ch.unital and ch.trace_preserving):
            raise ArithmeticError("sampled expander channel failed the unital/TP check")
        mps = MatrixProductState([a] * n, translation_invariant=True)
        mps.norm = mps.norm_from_transfer()
        if mps.norm > 1e-12:
            return mps, ch
    raise ArithmeticError("expander state has zero norm after resampling")


def expander_purity(ch: QuantumChannel, l: int, D: int | None = None) -> float:
    """(1/D^2) sum_ij tr(Lambda^l(|i><j|) Lambda^l(|j><i|)): purity of an l-site block."""
    if not ch.unital:
        raise ValueError("expander purity formula requires a unital channel")
    if l < 1:
        raise ValueError("block length must be >= 1")
    D = ch.dim if D is None else D
    imgs = {}
    for i in range(D):
        for j in range(D):
            e = np.zeros((D, D), dtype=complex)
            e[i, j] = 1
            imgs[i, j] = ch.power(e, l)
    total = sum(np.trace(imgs[i, j] @ imgs[j, i]) for i in range(D) for j in range(D))
    return float(total.real) / D**2


def expander_block_state(ch: QuantumChannel, l: int) -> np.ndarray:
    """Dense l-site block state sum tr(A_i (I/D) A_j^dag)|i><j| via its purification.

    Builds |psi>_{ABE} = sum_i (I (x) A_{i1}..A_{il}) |Phi>_{AB} |i>_E and traces
    out AB. Independent of the channel-power route in :func:`expander_purity`.
    """
    kr = ch.kraus_ops
    d, D = len(kr), ch.dim
    phi = np.eye(D, dtype=complex) / np.sqrt(D)  # phi[a, b] amplitudes of |Phi>
    prods = [np.eye(D, dtype=complex)]
    for _ in range(l):
        prods = [p @ a for p in prods for a in kr]
    # row i1..il (i1 most significant) holds (I (x) A_{i1}..A_{il})|Phi> = phi @ (A..)^T
    psi = np.array([(phi @ p.T).reshape(-1) for p in prods])
    rho_e = psi @ psi.conj().T
    tr = np.trace(rho_e).real
    if abs(tr - 1) > 1e-10:
        raise ArithmeticError(f"block purification has norm {tr}")
    return rho_e


def open_block_purification(ch: QuantumChannel, m: int) -> np.ndarray:
    """Purification of an m-site block of the infinite chain built from a unital channel.

    Returns a tensor of shape (D, d, ..., d, D) with entries
    (A_{i1}..A_{im})[a, b] / sqrt(D). Tracing the two bond legs gives the
    block state tr(A_i (I/D) A_j^dag), which is the reduced state of any m
    consecutive sites when the channel is unital and trace preserving.
    """
    if not (ch.unital and ch.trace_preserving):
        raise ValueError("open block purification requires a unital trace-preserving channel")
    kr = np.array(ch.kraus_ops)  # (d, D, D)
    D = ch.dim
    t = np.eye(D, dtype=complex) / np.sqrt(D)
    for _ in range(m):
        t = np.tensordot(t, kr, axes=([-1], [1]))  # (..., D) x (d, D, D) -> (..., d, D)
    return t


def expander_purity_dense(ch: QuantumChannel, l: int) -> float:
    rho = expander_block_state(ch, l)
    return float(np.trace(rho @ rho).real)


# ---------------------------------------------------------------------------
# MPS compression


def _sweep(psi: np.ndarray, n: int, d: int, discard: float) -> list[np.ndarray]:
    tensors = []
    rest = psi.reshape(1, -1)
    dl = 1
    total = np.linalg.norm(psi) ** 2
    for _ in range(n - 1):
        m = rest.reshape(dl * d, -1)
        u, s, vh = np.linalg.svd(m, full_matrices=False)
        s2 = s**2 / total
        keep = s > 1e-10 * s[0]
        r = int(np.count_nonzero(keep))
        tail = np.cumsum(s2[::-1])[::-1]  # tail[k] = weight of s_k, s_k+1, ...
        while r > 1 and tail[r - 1] <= discard:
            r -= 1
        tensors.append(u[:, :r].reshape(dl, d, r).transpose(1, 0, 2))
        rest = s[:r, None] * vh[:r]
        dl = r
    tensors.append(rest.reshape(dl, d, 1).transpose(1, 0, 2))
    return tensors


def mps_truncate(state: ChainState, target_fidelity: float) -> tuple[MatrixProductState, int]:
    """Left-to-right SVD sweep; the largest uniform per-cut discard meeting the fidelity."""
    if state.n * np.log2(state.d) > 20:
        raise ValueError("dense compression limited to n log2 d <= 20")
    psi = state.amplitudes
    delta = max(1 - target_fidelity, 0.0)
    candidates = [delta * 2.0**-k / state.n for k in range(0, 60)] + [0.0] if delta > 0 else [0.0]
    for w in candidates:
        mps = MatrixProductState(_sweep(psi, state.n, state.d, w))
        phi = mps.to_dense()
        if abs(np.vdot(psi, phi)) >= target_fidelity - 1e-12:
            return mps, mps.bond_dim
    raise ArithmeticError("exact representation failed to reach the requested fidelity")


# ---------------------------------------------------------------------------
# text format


def write_chainstate(state: ChainState, path, tol: float = 0.0) -> None:
    lines = [f"chainstate n={state.n} d={state.d} topology={state.topology}"]
    for idx, a in enumerate(state.amplitudes):
        if abs(a) > tol:
            lines.append(f"{idx} {a.real:.17g} {a.imag:.17g}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_chainstate(path) -> ChainState:
    text = Path(path).read_text().splitlines()
    if not text or not text[0].startswith("chainstate"):
        raise ValueError("missing 'chainstate' header")
    fields = dict(tok.split("=", 1) for tok in text[0].split()[1:])
    n, d, topo = int(fields["n"]), int(fields["d"]), fields["topology"]
    psi = np.zeros(d**n, dtype=complex)
    for ln in text[1:]:
        if not ln.strip():
            continue
        i, re_, im_ = ln.split()
        psi[int(i)] = float(re_) + 1j * float(im_)
    return ChainState(psi, n, d, topo, label=f"file:{path}")


__all__ = [
    "ChainState",
    "GroundState",
    "MatrixProductState",
    "MixedChainState",
    "QuantumChannel",
    "Region",
    "RngSeed",
    "aklt_mps",
    "aklt_tensors",
    "expander_block_state",
    "expander_purity",
    "expander_purity_dense",
    "expander_state",
    "ghz_state",
    "haar_chain",
    "maximally_mixed_chain",
    "mps_truncate",
    "product_state",
    "read_chainstate",
    "reduced_density",
    "separation",
    "tfim_groundstate",
    "tfim_hamiltonian",
    "write_chainstate",
]
