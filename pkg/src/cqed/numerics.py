"""Dense complex linear algebra for small quantum systems.

Self-contained: Hermitian eigensolves (complex Householder reduction to a
real symmetric tridiagonal matrix followed by implicit-shift QL iteration),
Kronecker products for composite state spaces, and norm-preserving time
propagation through the spectral decomposition. Everything operates on plain
numpy arrays; energies are angular frequencies in rad/ns (hbar = 1).
"""

import math
from dataclasses import dataclass

import numpy as np

#: default cap on composite state-space dimension for kron()
MAX_STATE_DIM = 2**20

#: relative hermiticity tolerance (against the max absolute entry)
HERMITICITY_RTOL = 1e-12

#: degenerate eigenvalues closer than this (relative) share an ordering group
DEGENERACY_RTOL = 1e-12

_QL_MAX_ITER = 50


class NonHermitianError(ValueError):
    """Input matrix (or operator use) violates the Hermitian contract."""


class EigensolveError(RuntimeError):
    """QL iteration failed to converge."""


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues (real, ascending) and orthonormal eigenvector columns.

    values[i] pairs with vectors[:, i]. Global phase per vector is fixed by
    making the largest-magnitude component real and positive; exact
    degeneracies are ordered by the index of that component.
    """

    values: np.ndarray
    vectors: np.ndarray


@dataclass(frozen=True)
class TimeTrace:
    """State samples psi(t): times (ns) and one complex row per sample."""

    times: np.ndarray
    states: np.ndarray

    def populations(self):
        """|psi_i(t)|^2, one row per sample."""
        return np.abs(self.states) ** 2


def _as_square_matrix(h, name="H"):
    h = np.asarray(h)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {h.shape}")
    if not np.all(np.isfinite(h)):
        raise ValueError(f"{name} contains non-finite entries")
    return h


def _require_hermitian(h, name="H"):
    """Reject h unless entry(i,j) = conj(entry(j,i)) within tolerance.

    Tolerance is HERMITICITY_RTOL relative to the max absolute entry; the
    diagnostic names the worst-offending entry pair.
    """
    defect = np.abs(h - h.conj().T)
    scale = np.abs(h).max() if h.size else 0.0
    worst = defect.max() if h.size else 0.0
    if worst > HERMITICITY_RTOL * scale:
        i, j = np.unravel_index(int(np.argmax(defect)), defect.shape)
        raise NonHermitianError(
            f"{name} is not Hermitian: entries ({i},{j})={h[i, j]} and "
            f"({j},{i})={h[j, i]} differ by {worst:.3e} "
            f"(allowed {HERMITICITY_RTOL:.0e} of max |entry| = {scale:.3e})"
        )


def _householder_tridiagonalize(h):
    """Reduce a complex Hermitian matrix to real symmetric tridiagonal form.

    Returns (d, e, q) with A = q T q^dagger, T tridiagonal with diagonal d
    and non-negative real sub-diagonal e. Standard Householder similarity
    transformations; a final diagonal phase similarity rotates the complex
    sub-diagonal onto the real axis.
    """
    n = h.shape[0]
    a = np.array(h, dtype=np.complex128)
    q = np.eye(n, dtype=np.complex128)
    for k in range(n - 2):
        x = a[k + 1:, k]
        xnorm = np.linalg.norm(x)
        if xnorm == 0.0:
            continue
        alpha = x[0]
        aabs = abs(alpha)
        phase = alpha / aabs if aabs > 0.0 else 1.0 + 0.0j
        v = x.copy()
        v[0] += phase * xnorm
        vsq = np.vdot(v, v).real
        if vsq == 0.0:
            continue
        beta = 2.0 / vsq
        # Hermitian rank-2 update of the trailing block: P B P with
        # P = I - beta v v^dagger
        b = a[k + 1:, k + 1:]
        w = beta * (b @ v)
        kappa = 0.5 * beta * np.vdot(v, w).real
        u = w - kappa * v
        b -= np.outer(v, u.conj()) + np.outer(u, v.conj())
        sub = -phase * xnorm
        a[k + 1, k] = sub
        a[k, k + 1] = np.conj(sub)
        a[k + 2:, k] = 0.0
        a[k, k + 2:] = 0.0
        qb = q[:, k + 1:]
        qb -= np.outer(qb @ v, beta * v.conj())
    d = np.diag(a).real.copy()
    esub = np.diag(a, -1).astype(np.complex128)
    # phase out the residual complex sub-diagonal: T' = D^dagger T D
    ph = np.ones(n, dtype=np.complex128)
    e = np.empty(max(n - 1, 0))
    for i in range(n - 1):
        mag = abs(esub[i])
        e[i] = mag
        ph[i + 1] = esub[i] * ph[i] / mag if mag > 0.0 else ph[i]
    q *= ph[np.newaxis, :]
    return d, e, q


def _ql_implicit_shift(d, e, zt):
    """Implicit-shift QL iteration on a real symmetric tridiagonal matrix.

    d (length n) and e (length n, last slot workspace) are Python lists and
    are consumed in place; on return d holds the unsorted eigenvalues. zt is
    an (n, dim) array whose rows accumulate the plane rotations: if zt
    starts as Q^T from the Householder reduction, row i ends up as the
    (transposed) eigenvector for d[i]. Pass zt=None to skip the eigenvector
    accumulation entirely (values-only solves).
    """
    n = len(d)
    if n <= 1:
        return
    eps = np.finfo(float).eps
    for l in range(n):
        iterations = 0
        while True:
            m = l
            while m < n - 1 and abs(e[m]) > eps * (abs(d[m]) + abs(d[m + 1])):
                m += 1
            if m == l:
                break
            iterations += 1
            if iterations > _QL_MAX_ITER:
                raise EigensolveError(
                    f"QL iteration for eigenvalue {l} did not converge "
                    f"within {_QL_MAX_ITER} sweeps (dim {n})"
                )
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = c = 1.0
            p = 0.0
            underflow = False
            for i in range(m - 1, l - 1, -1):
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    underflow = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                if zt is not None:
                    row_hi = zt[i + 1].copy()
                    row_lo = zt[i]
                    zt[i + 1] = s * row_lo + c * row_hi
                    zt[i] = c * row_lo - s * row_hi
            if underflow:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0


def _order_and_phase(values, zt, k):
    """Sort eigenpairs ascending, break degenerate ties, fix global phases."""
    values = np.asarray(values, dtype=float)
    order = np.argsort(values, kind="stable")
    values = values[order]
    zt = zt[order]
    peak = np.argmax(np.abs(zt), axis=1)
    # reorder exact-degeneracy groups by the index of the largest component
    scale = max(np.abs(values).max(), 1.0) if values.size else 1.0
    start = 0
    n = len(values)
    while start < n:
        stop = start + 1
        while stop < n and (values[stop] - values[start]) <= DEGENERACY_RTOL * max(
            abs(values[stop]), abs(values[start]), DEGENERACY_RTOL * scale
        ):
            stop += 1
        if stop - start > 1:
            sub = np.argsort(peak[start:stop], kind="stable")
            zt[start:stop] = zt[start:stop][sub]
            values[start:stop] = values[start:stop][sub]
            peak[start:stop] = peak[start:stop][sub]
        start = stop
    vectors = np.array(zt[:k].T, dtype=np.complex128, order="F")
    for col in range(k):
        idx = peak[col]
        amp = vectors[idx, col]
        mag = abs(amp)
        if mag > 0.0:
            vectors[:, col] *= np.conj(amp) / mag
    return values[:k].copy(), vectors


def _is_real_tridiagonal(h):
    if np.iscomplexobj(h) and np.any(h.imag != 0.0):
        return False
    band = np.tri(h.shape[0], k=1) * np.tri(h.shape[0], k=1).T
    return not np.any(h.real * (1.0 - band))


def hermitian_eigensolve(h, k=None):
    """Lowest-k eigenpairs of a Hermitian matrix.

    Parameters
    ----------
    h : array_like
        Square Hermitian matrix (entry(i,j) = conj(entry(j,i)) within 1e-12
        of the max absolute entry).
    k : int, optional
        Number of lowest eigenpairs to return; all of them by default.

    Returns
    -------
    EigenDecomposition
        values ascending; vectors[:, i] normalized with the fixed phase
        convention. Deterministic for identical input.

    Notes
    -----
    Real symmetric tridiagonal input (the charge-basis Hamiltonians) skips
    the Householder reduction and goes straight to the QL iteration.
    """
    h = _as_square_matrix(h)
    n = h.shape[0]
    if n < 1:
        raise ValueError("H must have dimension >= 1")
    if k is None:
        k = n
    if not 1 <= k <= n:
        raise ValueError(f"k = {k} out of range for dimension {n}")
    _require_hermitian(h)
    if _is_real_tridiagonal(h):
        return eigh_tridiagonal(np.diag(h).real, np.diag(h, -1).real, k=k)
    d, e, q = _householder_tridiagonalize(h)
    zt = np.array(q.T, order="C")
    dl = d.tolist()
    el = e.tolist() + [0.0]
    _ql_implicit_shift(dl, el, zt)
    values, vectors = _order_and_phase(dl, zt, k)
    return EigenDecomposition(values=values, vectors=vectors)


def eigh_tridiagonal(diag, offdiag, k=None):
    """Eigenpairs of a real symmetric tridiagonal matrix.

    diag has length n, offdiag length n-1 (first sub-diagonal). Same
    ordering and phase conventions as hermitian_eigensolve.
    """
    d = np.asarray(diag, dtype=float)
    e = np.asarray(offdiag, dtype=float)
    n = d.shape[0]
    if e.shape[0] != max(n - 1, 0):
        raise ValueError(
            f"offdiag length {e.shape[0]} does not match diagonal length {n}"
        )
    if k is None:
        k = n
    if not 1 <= k <= n:
        raise ValueError(f"k = {k} out of range for dimension {n}")
    zt = np.eye(n)
    dl = d.tolist()
    el = e.tolist() + [0.0]
    _ql_implicit_shift(dl, el, zt)
    values, vectors = _order_and_phase(dl, zt, k)
    return EigenDecomposition(values=values, vectors=vectors)


def tridiagonal_eigenvalues(diag, offdiag):
    """Ascending eigenvalues of a real symmetric tridiagonal matrix.

    Same QL iteration as eigh_tridiagonal but without accumulating the
    rotations, which is the dominant cost; use for spectra-only work such
    as offset-charge sweeps.
    """
    d = np.asarray(diag, dtype=float)
    e = np.asarray(offdiag, dtype=float)
    n = d.shape[0]
    if e.shape[0] != max(n - 1, 0):
        raise ValueError(
            f"offdiag length {e.shape[0]} does not match diagonal length {n}"
        )
    dl = d.tolist()
    el = e.tolist() + [0.0]
    _ql_implicit_shift(dl, el, None)
    out = np.asarray(dl, dtype=float)
    out.sort()
    return out


def kron(a, b, max_dim=MAX_STATE_DIM):
    """Kronecker product with a state-space size guard.

    entry((i*rB+k), (j*cB+l)) = A(i,j)*B(k,l); rejects results whose row or
    column count exceeds max_dim (default 2^20).
    """
    a = np.asarray(a)
    b = np.asarray(b)
    if a.ndim != 2 or b.ndim != 2:
        raise ValueError("kron expects two matrices")
    rows = a.shape[0] * b.shape[0]
    cols = a.shape[1] * b.shape[1]
    if rows > max_dim or cols > max_dim:
        raise ValueError(
            f"kron result {rows}x{cols} exceeds the maximum state-space "
            f"dimension {max_dim}"
        )
    return np.kron(a, b)


def evolve(h, psi0, t_grid):
    """Propagate psi0 under a time-independent Hermitian H (hbar = 1).

    Uses the spectral decomposition psi(t) = sum_k exp(-i*lambda_k*t) v_k
    <v_k|psi0>. H is in rad/ns, t_grid in ns, strictly increasing from 0.

    Returns a TimeTrace with one state row per grid time.
    """
    psi0 = np.asarray(psi0, dtype=np.complex128).reshape(-1)
    norm = np.linalg.norm(psi0)
    if abs(norm - 1.0) > 1e-9:
        raise ValueError(f"psi0 is not normalized: |psi0| = {norm!r}")
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size == 0:
        raise ValueError("t_grid must be a non-empty 1-D array of times")
    if t[0] != 0.0:
        raise ValueError("t_grid must start at 0")
    if t.size > 1 and not np.all(np.diff(t) > 0.0):
        raise ValueError("t_grid must be strictly increasing")
    h = _as_square_matrix(h)
    if h.shape[0] != psi0.shape[0]:
        raise ValueError(
            f"dimension mismatch: H is {h.shape[0]}x{h.shape[0]}, "
            f"psi0 has length {psi0.shape[0]}"
        )
    dec = hermitian_eigensolve(h)
    coeff = dec.vectors.conj().T @ psi0
    phases = np.exp(-1j * np.outer(t, dec.values))
    states = (phases * coeff) @ dec.vectors.T
    norms = np.linalg.norm(states, axis=1)
    drift = np.abs(norms - 1.0).max()
    if drift > 1e-9:
        raise EigensolveError(
            f"propagation lost normalization (max drift {drift:.3e})"
        )
    return TimeTrace(times=t, states=states)


def expectation(op, psi):
    """Real expectation value <psi|op|psi> of a Hermitian operator.

    The imaginary residue (roundoff, <= 1e-12 for honest Hermitian input) is
    discarded after checking; a residue above 1e-9 is flagged as using a
    non-Hermitian operator.
    """
    op = _as_square_matrix(op, name="op")
    psi = np.asarray(psi, dtype=np.complex128).reshape(-1)
    if op.shape[0] != psi.shape[0]:
        raise ValueError(
            f"dimension mismatch: op is {op.shape[0]}x{op.shape[0]}, "
            f"psi has length {psi.shape[0]}"
        )
    value = complex(np.vdot(psi, op @ psi))
    if abs(value.imag) > 1e-9:
        raise NonHermitianError(
            f"expectation value {value} has imaginary part above 1e-9; "
            "op is not Hermitian"
        )
    return value.real
