"""Bounded (tracial) operator representations of decoherence functionals.

The Hermitian form ``Q(x, y) = D(x, y^dag)`` of a bounded functional has a
Gram matrix G over the Hilbert-Schmidt-orthonormal matrix-unit basis.
Eigendecomposing ``G = sum_i lambda_i g_i g_i^dag`` and setting
``A_i = reshape(g_i)^T`` gives

    ``D(x, y) = sum_i lambda_i tr(x A_i) tr(y A_i^dag)``,

so with ``X_i = sqrt(lambda_i) A_i`` for positive eigenvalues and
``Y_i = sqrt(-lambda_i) A_i`` for negative ones,

    ``beta(S) = sum_i tr(S (X_i (x) X_i^dag - Y_i (x) Y_i^dag))``

for every S in the algebraic tensor product.  Summing the simple tensors
yields the bounded operator

    ``M = sum_i (X_i (x) X_i^dag - Y_i (x) Y_i^dag)``

with ``d(p, q) = tr(M (p (x) q))`` on finite-rank projections; M is unique
among bounded operators with that property (see
:func:`reconstruct_from_product_diagonal`, which recovers any bounded
operator from its diagonal on product vectors and in particular shows that
a vanishing product diagonal forces the zero operator).

At a fixed finite truncation every functional is tracially bounded, so the
interesting content is the sweep behaviour: for the pure-state functional
the operator norm of M stays at one while the trace norm of the
trace-pairing representative grows linearly with the dimension.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .functionals import DecoherenceFunctional, _check_dim
from .histories import orthogonal_decompose
from .ils import bilinear_unit_table
from .linalg import (
    ElementaryTensorSum,
    Projection,
    as_vector,
    kron,
    kron_trace,
    mat,
    operator_norm,
    swap_operator,
    trace_pair,
)


class GramHermiticityError(ValueError):
    """The assembled Gram matrix is not Hermitian: the source functional
    violates the Hermiticity axiom upstream."""


class NotTraciallyBoundedError(RuntimeError):
    """The tracial-boundedness probe exceeded the requested bound."""

    def __init__(self, sup_estimate: float, bound: float, dim: int, samples: int, seed: int):
        self.sup_estimate = sup_estimate
        self.bound = bound
        self.dim = dim
        self.samples = samples
        self.seed = seed
        super().__init__(
            f"sup |beta(p_xi)| estimate {sup_estimate:.6g} exceeds bound "
            f"{bound:.6g} at dim {dim} ({samples} samples, seed {seed})"
        )


def gram_matrix(d: DecoherenceFunctional, dim: int, tol: float = 1e-8) -> np.ndarray:
    """Gram matrix ``G[(i,j), (k,l)] = Q(E_ij, E_kl)`` of the Hermitian
    form over the matrix-unit basis, assembled from d on the polarization
    projections."""
    _check_dim(dim, "Gram assembly")
    if dim != d.dim:
        raise ValueError(f"dimension mismatch: functional has dim {d.dim}, got {dim}")
    units = bilinear_unit_table(d, dim)
    # Q(E_ij, E_kl) = D(E_ij, (E_kl)^dag) = D(E_ij, E_lk)
    g = np.transpose(units, (0, 1, 3, 2)).reshape(dim * dim, dim * dim)
    scale = max(1.0, float(np.linalg.norm(g)))
    if np.linalg.norm(g - g.conj().T) > tol * scale:
        raise GramHermiticityError(
            "Gram matrix is not Hermitian; the functional violates Hermiticity"
        )
    return (g + g.conj().T) / 2


@dataclass(frozen=True, eq=False)
class Decomposition:
    """Signed families reproducing beta on the algebraic tensor product.

    ``signature`` holds the retained Gram eigenvalues sorted descending;
    positive ones correspond (in order) to ``x_family``, negative ones to
    ``y_family``.  Family sizes never exceed dim^2.
    """

    x_family: tuple
    y_family: tuple
    signature: tuple
    dim: int

    def beta(self, s: ElementaryTensorSum) -> complex:
        """beta(S) evaluated through the decomposition families."""
        out = 0.0 + 0.0j
        for a, b in s.terms:
            for x in self.x_family:
                out += trace_pair(a, x) * trace_pair(b, x.conj().T)
            for y in self.y_family:
                out -= trace_pair(a, y) * trace_pair(b, y.conj().T)
        return complex(out)

    def pairing_operator(self) -> np.ndarray:
        """``sum_i X_i (x) X_i^dag - sum_i Y_i (x) Y_i^dag`` on H (x) H."""
        n = self.dim * self.dim
        m = np.zeros((n, n), dtype=complex)
        for x in self.x_family:
            m += kron(x, x.conj().T)
        for y in self.y_family:
            m -= kron(y, y.conj().T)
        return m


# Gram eigenvalues below this fraction of the spectral scale are dropped;
# keeps the families minimal and free of noise operators.
EIG_DROP_REL = 1e-12


def hermitian_form_decomposition(
    d: DecoherenceFunctional, dim: int | None = None, drop_tol: float = EIG_DROP_REL
) -> Decomposition:
    """Constructive decomposition of the Hermitian form into signed
    rank-one families.

    Eigenvectors of the Gram matrix, reshaped and transposed, give operators
    ``A_i`` with ``D(x, y) = sum_i lambda_i tr(x A_i) tr(y A_i^dag)``;
    scaling by ``sqrt(|lambda_i|)`` and splitting by sign yields the
    ``{X_i}`` / ``{Y_i}`` families.  An all-zero Gram matrix produces empty
    families.
    """
    if dim is None:
        dim = d.dim
    g = gram_matrix(d, dim)
    w, v = np.linalg.eigh(g)
    scale = float(np.max(np.abs(w))) if w.size else 0.0
    keep = np.abs(w) >= drop_tol * max(scale, 1e-300)
    w = w[keep]
    v = v[:, keep]
    order = np.argsort(-w)
    xs = []
    ys = []
    sig = []
    for idx in order:
        lam = float(w[idx])
        a = v[:, idx].reshape(dim, dim).T
        sig.append(lam)
        if lam > 0:
            xs.append(np.sqrt(lam) * a)
        else:
            ys.append(np.sqrt(-lam) * a)
    return Decomposition(
        x_family=tuple(xs), y_family=tuple(ys), signature=tuple(sig), dim=dim
    )


@dataclass(frozen=True, eq=False)
class TracialOperator:
    """Bounded representative M with ``d(p, q) = tr(M (p (x) q))`` on
    finite-rank projections."""

    m_op: np.ndarray
    operator_norm: float
    source: Decomposition

    @property
    def dim(self) -> int:
        return self.source.dim


def build_tracial_operator(
    d: DecoherenceFunctional,
    dim: int | None = None,
    bound: float | None = None,
    probe_samples: int = 2000,
    seed: int = 0,
) -> TracialOperator:
    """Assemble the bounded operator M from the form decomposition.

    At a fixed truncation every functional yields a finite M, so the
    tracial-boundedness precondition only bites when a ``bound`` is given:
    the probe then estimates ``sup |beta(p_xi)|`` and a violation raises
    :class:`NotTraciallyBoundedError` carrying the evidence.
    """
    if dim is None:
        dim = d.dim
    if bound is not None:
        from .probes import tracial_bound_probe

        sup = tracial_bound_probe(d, dim, samples=probe_samples, seed=seed)
        if sup > bound:
            raise NotTraciallyBoundedError(sup, bound, dim, probe_samples, seed)
    dec = hermitian_form_decomposition(d, dim)
    m = dec.pairing_operator()
    return TracialOperator(m_op=m, operator_norm=operator_norm(m), source=dec)


def householder_basis(psi) -> np.ndarray:
    """Orthonormal basis (as columns) whose first column is psi, obtained
    from a single complex Householder reflection; deterministic in psi."""
    v = as_vector(psi, "psi")
    dim = v.size
    nrm = float(np.linalg.norm(v))
    if abs(nrm - 1.0) > 1e-8:
        raise ValueError(f"psi must be a unit vector, got norm {nrm:.6g}")
    e1 = np.zeros(dim, dtype=complex)
    e1[0] = 1.0
    alpha = v[0]
    phase = alpha / abs(alpha) if abs(alpha) > 0 else 1.0 + 0.0j
    # ||u||^2 = 2 + 2|v_0| >= 2, so the reflector is always well defined.
    u = v + phase * e1
    u = u / np.linalg.norm(u)
    reflector = np.eye(dim, dtype=complex) - 2.0 * np.outer(u, u.conj())
    return -phase * reflector


def pure_state_m(psi, verify: bool = True, seed: int = 0) -> np.ndarray:
    """The bounded representative of the pure-state functional, built as
    P U: U swaps the tensor factors and P projects onto
    span{psi (x) psi_i} for an orthonormal basis {psi_i} extending psi.

    With ``verify`` set, the construction self-checks the defining
    identities: ``(PU)(PU)^dag = P`` and ``beta_psi(S) = tr(S P U)`` on
    seeded elementary tensor sums.
    """
    v = as_vector(psi, "psi")
    dim = v.size
    basis = householder_basis(v)
    n = dim * dim
    p = np.zeros((n, n), dtype=complex)
    for i in range(dim):
        col = np.kron(v, basis[:, i])
        p += np.outer(col, col.conj())
    u = swap_operator(dim)
    m = p @ u
    if verify:
        resid = float(np.linalg.norm(m @ m.conj().T - p))
        if resid > 1e-10:
            raise RuntimeError(f"(PU)(PU)^dag deviates from P by {resid:.3g}")
        rng = np.random.default_rng(np.random.SeedSequence([seed, dim]))
        for _ in range(10):
            terms = []
            for _ in range(int(rng.integers(1, 4))):
                a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
                b = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
                terms.append((a, b))
            s = ElementaryTensorSum(tuple(terms))
            direct = sum(
                complex(np.vdot(bm.conj().T @ v, am @ v)) for am, bm in s.terms
            )
            paired = trace_pair(s.materialize(), m)
            if abs(direct - paired) > 1e-9 * max(1.0, abs(direct)):
                raise RuntimeError("beta_psi(S) != tr(S P U) on a sampled tensor sum")
    return m


def reconstruct_from_product_diagonal(f, dim: int) -> np.ndarray:
    """Recover an operator on H (x) H from its diagonal on product vectors.

    ``f(alpha, beta)`` must return ``<L(alpha (x) beta), alpha (x) beta>``
    for some operator L; every matrix element is then the 16-term double
    polarization

        ``<L(a (x) b), a' (x) b'> =
          (1/16) sum_{k,l=0..3} i^{k+l} f(a + i^k a', b + i^l b')``,

    iterated over basis vectors.  The zero oracle reconstructs the zero
    operator; for inputs that are not genuine product diagonals the output
    is unspecified (garbage in, garbage out).
    """
    if dim < 1:
        raise ValueError("dimension must be >= 1")
    phases = [1.0 + 0.0j, 1.0j, -1.0 + 0.0j, -1.0j]
    eye = np.eye(dim, dtype=complex)
    n = dim * dim
    out = np.zeros((n, n), dtype=complex)
    for a in range(dim):
        for a2 in range(dim):
            lefts = [eye[a] + phases[k] * eye[a2] for k in range(4)]
            for b in range(dim):
                for b2 in range(dim):
                    rights = [eye[b] + phases[l] * eye[b2] for l in range(4)]
                    acc = 0.0 + 0.0j
                    for k in range(4):
                        for l in range(4):
                            acc += phases[(k + l) % 4] * f(lefts[k], rights[l])
                    out[a2 * dim + b2, a * dim + b] = acc / 16.0
    return out


def product_diagonal_of(m) -> "callable":
    """Diagonal oracle ``f(alpha, beta) = <M(alpha (x) beta), alpha (x) beta>``
    of a dense operator, for feeding the reconstructor."""
    mm = np.asarray(m, dtype=complex)

    def f(alpha, beta):
        vec = np.kron(np.asarray(alpha, dtype=complex), np.asarray(beta, dtype=complex))
        return complex(np.vdot(vec, mm @ vec))

    return f


def evaluate_double_sum(m, p: Projection, q: Projection, block_rank: int) -> complex:
    """``sum_i sum_j tr((p_i (x) q_j) M)`` over orthogonal block
    decompositions of p and q with blocks of rank at most ``block_rank``.

    By trace linearity the value equals ``tr(M (p (x) q))`` for every
    admissible block decomposition.
    """
    mm = m.m_op if isinstance(m, TracialOperator) else np.asarray(m, dtype=complex)
    if not isinstance(p, Projection):
        p = Projection.from_matrix(mat(p))
    if not isinstance(q, Projection):
        q = Projection.from_matrix(mat(q))
    out = 0.0 + 0.0j
    for pi in orthogonal_decompose(p, block_rank):
        for qj in orthogonal_decompose(q, block_rank):
            out += kron_trace(pi, qj, mm)
    return complex(out)
