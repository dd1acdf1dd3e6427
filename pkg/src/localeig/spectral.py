"""Eigendecomposition, eigengap selection and local eigenvector centrality.

Eigenvalues are ordered by decreasing real part. The ``i``-th eigengap is the
drop in real part between positions ``i`` and ``i + 1`` (1-based), and the
automatic scale ``k`` is the smallest index attaining the largest gap among
positions whose eigenvalue has a positive real part. Local eigenvector
centrality is the row-wise Euclidean norm of the ``n x k`` matrix built from
the leading eigenvectors:

* a nonzero real eigenvalue contributes its unit eigenvector,
* a complex conjugate pair contributes the normalised real and imaginary
  parts of one member's eigenvector,
* a zero eigenvalue contributes a zero column.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from graphlib import TopologicalSorter
from typing import Optional

import numpy as np
import scipy.sparse
import scipy.sparse.linalg
from scipy.sparse.csgraph import connected_components

from .exceptions import DegenerateSpectrum, InputError, ModeError, NumericalError
from .graph import SquareMatrix

TOL_ZERO = 1e-10
TOL_IMAG = 1e-10
RESIDUAL_TOL = 1e-8
TIE_RTOL = 1e-12
DENSE_LIMIT = 2000
PARTIAL_MARGIN = 10
DEFAULT_PARTIAL = 60

_MIN_PART_NORM = 1e-12
_DEFECT_COND = 1e10
_SOLVE_COND = 1e12
_MAX_JORDAN = 6
_ORDER_RTOL = 1e-12
_DEPENDENT_SV = 1e-5
_NULL_RTOL = 1e-10

METHODS = ("local_eigenvector", "eigenvector", "community_eigenvector", "pagerank")


@dataclass(frozen=True)
class Spectrum:
    """Ordered eigenpairs of a graph matrix.

    ``pair_index`` marks each column as ``real``, ``pair_first``,
    ``pair_second`` or ``zero``. ``deficient`` flags columns for which no
    independent eigenvector exists (defective eigenvalues); their vectors are
    zero. ``complete`` is False when only the leading eigenpairs were computed.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    pair_index: tuple
    residuals: np.ndarray
    deficient: np.ndarray
    defective: bool = False
    complete: bool = True
    mode: str = "adjacency"

    @property
    def n(self) -> int:
        return self.eigenvectors.shape[0]

    @property
    def size(self) -> int:
        return len(self.eigenvalues)

    @property
    def real(self) -> np.ndarray:
        return self.eigenvalues.real


@dataclass(frozen=True)
class EigengapAnalysis:
    gaps: np.ndarray
    admissible: np.ndarray
    prominent: tuple
    selected_k: Optional[int] = None
    selection_mode: str = "auto"
    search_bound: Optional[int] = None


@dataclass(frozen=True)
class VMatrix:
    columns: np.ndarray
    zero_columns: frozenset
    k_requested: int

    @property
    def k(self) -> int:
        return self.columns.shape[1]


@dataclass(frozen=True)
class CentralityVector:
    """Per-node nonnegative scores plus how they were obtained."""

    values: np.ndarray
    method: str
    matrix_mode: str = "adjacency"
    k_used: Optional[int] = None
    normalization: str = "raw"
    node_ids: Optional[tuple] = field(default=None, compare=False)
    warnings: tuple = ()

    def __post_init__(self):
        values = np.array(self.values, dtype=float, copy=True)
        if values.ndim != 1:
            raise InputError("centrality values must be one-dimensional")
        if np.any(~np.isfinite(values)) or np.any(values < 0):
            raise InputError("centrality values must be finite and nonnegative")
        if self.method not in METHODS:
            raise InputError(f"unknown centrality method {self.method!r}")
        if self.normalization == "unit_sum" and abs(values.sum() - 1.0) > 1e-12:
            raise InputError("unit_sum centrality does not sum to one")
        if self.normalization == "unit_2_norm" and abs(np.linalg.norm(values) - 1.0) > 1e-10:
            raise InputError("unit_2_norm centrality does not have unit norm")
        if self.node_ids is not None and len(self.node_ids) != len(values):
            raise InputError("node_ids length does not match values")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "warnings", tuple(self.warnings))

    def __len__(self):
        return len(self.values)

    def as_dict(self) -> dict:
        ids = self.node_ids or tuple(str(i) for i in range(len(self.values)))
        return dict(zip(ids, self.values.tolist()))


@dataclass(frozen=True)
class LocalCentralityResult:
    spectrum: Spectrum
    eigengaps: Optional[EigengapAnalysis]
    v: VMatrix
    centrality: CentralityVector


# -- decomposition ---------------------------------------------------------


@dataclass
class _Unit:
    # a real eigenpair, or a conjugate pair carried by its +Im member
    value: complex
    vector: Optional[np.ndarray]
    pair: bool = False
    deficient: bool = False


def _as_square(m) -> SquareMatrix:
    if isinstance(m, SquareMatrix):
        return m
    return SquareMatrix(np.asarray(m, dtype=float), "adjacency")


def _on_axis(units: list, members: list, radius: float) -> bool:
    return any(not units[i].pair or units[i].value.imag <= radius for i in members)


def _dependence(units: list, members: list, on_axis: bool) -> int:
    # number of numerically dependent directions among the members' vectors
    cols = []
    for i in members:
        cols.append(units[i].vector)
        if units[i].pair and on_axis:
            cols.append(np.conj(units[i].vector))
    if len(cols) < 2:
        return 0
    v = np.column_stack(cols)
    v = v / np.linalg.norm(v, axis=0)
    return int(np.sum(np.linalg.svd(v, compute_uv=False) < _DEPENDENT_SV))


def _defective_clusters(units: list, scale: float) -> list:
    """Candidate groups of units that are numerically one defective eigenvalue.

    A Jordan block of size m comes back from the solver as m values spread by
    about ``eps**(1/m) * ||A||`` with nearly parallel eigenvectors. Level m
    links parts within ``10 * eps**(1/m) * ||A||``, and two parts merge only
    if together they have more dependent directions than apart. Units lying
    within a cluster's own spread (semi-simple copies of the same value) are
    absorbed at the end so the null space dimension counts them.
    """
    eps = np.finfo(float).eps
    values = np.array([u.value for u in units])
    seed_radius = 10 * eps ** 0.5 * scale
    parts = []
    for i in range(len(units)):
        on_axis = _on_axis(units, [i], seed_radius)
        parts.append(([i], _dependence(units, [i], on_axis), on_axis))
    rejected = set()
    for level in range(2, _MAX_JORDAN + 1):
        radius = 10 * eps ** (1 / level) * scale
        close = scipy.sparse.csr_matrix(np.abs(values[:, None] - values[None, :]) <= radius)
        _, label = connected_components(close, directed=False)
        by_label = {}
        for part in parts:
            by_label.setdefault(label[part[0][0]], []).append(part)
        parts = []
        for group in by_label.values():
            changed = len(group) > 1
            while changed:
                changed = False
                for a in range(len(group)):
                    for b in range(a + 1, len(group)):
                        ma, da, _ = group[a]
                        mb, db, _ = group[b]
                        key = (tuple(ma), tuple(mb), level)
                        if key in rejected:
                            continue
                        if np.abs(values[ma][:, None] - values[mb][None, :]).min() > radius:
                            rejected.add(key)
                            continue
                        members = sorted(ma + mb)
                        on_axis = _on_axis(units, members, radius)
                        dep = _dependence(units, members, on_axis)
                        if dep > da + db:
                            group[a] = (members, dep, on_axis)
                            del group[b]
                            changed = True
                            break
                        rejected.add(key)
                    if changed:
                        break
            if len(group) > 2:
                # dependence can appear only once every part is in
                members = sorted(i for m, _, _ in group for i in m)
                on_axis = _on_axis(units, members, radius)
                dep = _dependence(units, members, on_axis)
                if dep > sum(d for _, d, _ in group):
                    group = [(members, dep, on_axis)]
            parts.extend(group)
    loose = {p[0][0] for p in parts if p[1] == 0 and len(p[0]) == 1}

    def center(members, on_axis):
        spread = values[members]
        if on_axis:
            spread = np.concatenate([spread, np.conj(spread)])
        mu = spread.mean()
        return mu, 2 * np.abs(spread - mu).max() + 10 * eps * scale

    # dependent parts sitting on the same value are one eigenvalue
    clusters = [(m, on_axis) for m, dep, on_axis in parts if dep > 0]
    joined = True
    while joined:
        joined = False
        for a in range(len(clusters)):
            for b in range(a + 1, len(clusters)):
                (ma, xa), (mb, xb) = clusters[a], clusters[b]
                if xa != xb:
                    continue
                mu_a, reach_a = center(ma, xa)
                mu_b, reach_b = center(mb, xb)
                if abs(mu_a - mu_b) <= reach_a + reach_b:
                    clusters[a] = (sorted(ma + mb), xa)
                    del clusters[b]
                    joined = True
                    break
            if joined:
                break
    result = []
    for members, on_axis in clusters:
        mu, reach = center(members, on_axis)
        near = sorted(i for i in loose if abs(values[i] - mu) <= reach)
        loose.difference_update(near)
        result.append((sorted(members + near), on_axis))
    return result


def _cluster_center(units: list, members: list, on_axis: bool) -> tuple[complex, int]:
    if on_axis:
        count = sum(2 if units[i].pair else 1 for i in members)
        total = sum(2 * units[i].value.real if units[i].pair else units[i].value.real for i in members)
        return complex(total / count), count
    return complex(np.mean([units[i].value for i in members])), len(members)


def _null_space(m: np.ndarray, scale: float) -> np.ndarray:
    # orthonormal basis of the numerical null space, possibly empty
    _, sv, vh = np.linalg.svd(m)
    g = int(np.sum(sv <= _NULL_RTOL * scale))
    return vh[len(sv) - g:].conj().T


def _merge_defective(units: list, block: np.ndarray) -> tuple[list, bool]:
    """Replace each defective cluster by its mean and a null-space basis.

    The mean of a perturbed Jordan cluster is accurate to rounding level even
    though the individual values are not, and the null space of ``A - mu I``
    gives the eigenvectors that actually exist. Its dimension is the
    geometric multiplicity; the remaining columns are deficient. A cluster
    whose mean has no null vector is not one eigenvalue: its farthest member
    is dropped until the mean checks out, or the cluster is abandoned.
    """
    scale = max(float(np.linalg.norm(block)), 1e-300)
    eye = np.eye(block.shape[0])
    replaced = set()
    merged = []
    for members, on_axis in _defective_clusters(units, scale):
        members = list(members)
        while members:
            mu, count = _cluster_center(units, members, on_axis)
            shifted = block - (mu.real if on_axis else mu) * eye
            basis = _null_space(shifted, scale)
            if basis.shape[1]:
                break
            if len(members) == 1:
                members = []
                break
            far = max(members, key=lambda i: min(abs(units[i].value - mu), abs(np.conj(units[i].value) - mu)))
            members.remove(far)
        if not members:
            continue
        replaced.update(members)
        g = min(basis.shape[1], count)
        for c in range(g):
            merged.append(_Unit(mu, basis[:, c].astype(complex), pair=not on_axis))
        for _ in range(count - g):
            merged.append(_Unit(mu, None, pair=not on_axis, deficient=True))
    if not replaced:
        return units, False
    kept = [u for i, u in enumerate(units) if i not in replaced]
    return kept + merged, True


def _lapack_units(block: np.ndarray) -> tuple[list, bool]:
    try:
        w, vecs = np.linalg.eig(block)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"dense eigensolver failed: {exc}") from exc
    sv = np.linalg.svd(vecs, compute_uv=False)
    defective = block.shape[0] > 1 and sv[-1] < sv[0] / _DEFECT_COND
    units = []
    j = 0
    while j < len(w):
        lam = w[j]
        if lam.imag > 0:
            if j + 1 >= len(w) or w[j + 1] != np.conj(lam):
                raise NumericalError("eigensolver returned an unpaired complex eigenvalue", column=j + 1)
            units.append(_Unit(complex(lam), vecs[:, j].astype(complex), pair=True))
            j += 2
        elif lam.imag < 0:
            raise NumericalError("eigensolver returned an unpaired complex eigenvalue", column=j + 1)
        else:
            units.append(_Unit(complex(lam.real), vecs[:, j].real.astype(complex)))
            j += 1
    # any dependent subset of the unit columns caps the smallest singular value
    if sv[-1] >= _DEPENDENT_SV:
        return units, defective
    units, merged = _merge_defective(units, block)
    return units, defective or merged


def _block_order(a: np.ndarray):
    """Permutation putting ``a`` in block upper-triangular form by strong components."""
    ncomp, labels = connected_components(scipy.sparse.csr_matrix(a != 0), directed=True,
                                         connection="strong")
    if ncomp == 1:
        return None
    preds = {c: set() for c in range(ncomp)}
    rows, cols = np.nonzero(a)
    for i, j in zip(labels[rows], labels[cols]):
        if i != j:
            preds[j].add(i)
    order = list(TopologicalSorter(preds).static_order())
    members = [np.flatnonzero(labels == c) for c in order]
    perm = np.concatenate(members)
    bounds = np.cumsum([0] + [len(mem) for mem in members])
    return perm, [slice(bounds[b], bounds[b + 1]) for b in range(len(members))]


def _back_substitute(b_mat, slices, b, lam, y):
    """Extend block eigenvector ``y`` of block ``b`` to the whole matrix, or None."""
    n = b_mat.shape[0]
    x = np.zeros(n, dtype=complex)
    sb = slices[b]
    x[sb] = y
    for c in range(b - 1, -1, -1):
        sc = slices[c]
        rhs = b_mat[sc, sc.stop:sb.stop] @ x[sc.stop:sb.stop]
        if not np.any(rhs):
            continue
        shifted = lam * np.eye(sc.stop - sc.start) - b_mat[sc, sc]
        if np.linalg.cond(shifted) < _SOLVE_COND:
            x[sc] = np.linalg.solve(shifted, rhs)
            continue
        sol = np.linalg.lstsq(shifted, rhs, rcond=None)[0]
        if np.linalg.norm(shifted @ sol - rhs) > 1e-10 * np.linalg.norm(rhs):
            return None
        x[sc] = sol
    return x


def _condensed_units(a: np.ndarray, zero_cut: float) -> tuple[list, bool]:
    """Eigenpairs via the strong-component condensation.

    Nodes outside every cycle form 1x1 diagonal blocks whose eigenvalue is
    read off exactly, so structurally zero eigenvalues come out exactly zero
    instead of as the ``eps**(1/m)`` cloud a dense solver leaves behind.
    """
    blocks = _block_order(a)
    if blocks is None:
        return _lapack_units(a)
    perm, slices = blocks
    b_mat = a[np.ix_(perm, perm)]
    units, defective = [], False
    for b, sb in enumerate(slices):
        block = b_mat[sb, sb]
        if block.shape[0] == 1:
            local = [_Unit(complex(block[0, 0]), np.ones(1, dtype=complex))]
        else:
            local, block_defective = _lapack_units(block)
            defective |= block_defective
        for u in local:
            if abs(u.value) <= zero_cut:
                units.append(_Unit(u.value, None, u.pair))
                continue
            if u.deficient:
                units.append(u)
                continue
            x = _back_substitute(b_mat, slices, b, u.value, u.vector)
            if x is None:
                defective = True
                units.append(_Unit(u.value, None, u.pair, deficient=True))
                continue
            full = np.empty_like(x)
            full[perm] = x
            units.append(_Unit(u.value, full / np.linalg.norm(full), u.pair))
    return units, defective


def _partial_units(a: np.ndarray, count: int, symmetric: bool) -> list:
    n = a.shape[0]
    sp = scipy.sparse.csr_matrix(a)
    v0 = np.full(n, 1.0 / np.sqrt(n))
    try:
        if symmetric:
            w, vecs = scipy.sparse.linalg.eigsh(sp, k=count, which="LA", v0=v0)
        else:
            w, vecs = scipy.sparse.linalg.eigs(sp, k=count, which="LR", v0=v0)
    except scipy.sparse.linalg.ArpackError as exc:
        raise NumericalError(f"iterative eigensolver failed: {exc}") from exc
    units = []
    scale = max(np.abs(w).max(), 1e-300)
    taken = np.zeros(len(w), dtype=bool)
    for j in np.argsort(-w.real, kind="stable"):
        if taken[j]:
            continue
        taken[j] = True
        lam = complex(w[j])
        x = vecs[:, j].astype(complex)
        if abs(lam.imag) <= TOL_IMAG * scale:
            units.append(_Unit(complex(lam.real), x.real.astype(complex)))
            continue
        # absorb the conjugate partner when ARPACK returned it too
        partners = np.flatnonzero(~taken & (np.abs(w - np.conj(lam)) <= 1e-8 * scale))
        taken[partners[:1]] = True
        if lam.imag < 0:
            lam, x = np.conj(lam), np.conj(x)
        units.append(_Unit(lam, x, pair=True))
    return units


def _canonical_phase(x: np.ndarray) -> np.ndarray:
    """Rotate ``x`` so its real and imaginary parts are orthogonal, real part dominant.

    This removes the arbitrary complex phase a solver attaches to an
    eigenvector, which otherwise changes ``Re(x)`` and ``Im(x)``.
    """
    s = np.sum(x * x)
    if abs(s) > 1e-12 * np.vdot(x, x).real:
        return x * np.exp(-0.5j * np.angle(s))
    # circular vector: every phase gives the same row norms
    j = int(np.argmax(np.abs(x)))
    return x * np.exp(-1j * np.angle(x[j]))


def _sort_units(units: list, scale: float) -> None:
    """Descending real part; real parts equal up to rounding count as ties.

    A run of tied real parts is set to its mean and ordered by larger
    ``|Im|`` first. Without the tolerance, rounding noise in the real parts
    would decide the order and with it the columns a user ``k`` selects.
    """
    units.sort(key=lambda u: -u.value.real)
    run, key = 0, {}
    for prev, u in zip([None] + units[:-1], units):
        if prev is not None and prev.value.real - u.value.real > _ORDER_RTOL * scale:
            run += 1
        key[id(u)] = run
    runs = {}
    for u in units:
        runs.setdefault(key[id(u)], []).append(u)
    for run_units in runs.values():
        if len(run_units) > 1:
            # exact zeros stay exact
            exact = any(u.value == 0 for u in run_units)
            re = 0.0 if exact else float(np.mean([u.value.real for u in run_units]))
            for u in run_units:
                u.value = complex(re, u.value.imag)
    units.sort(key=lambda u: (key[id(u)], -abs(u.value.imag)))


def _orthonormalize_repeated(a: np.ndarray, units: list, scale: float) -> bool:
    """Rebuild the eigenspace of each repeated real eigenvalue from ``A - mu I``.

    Row norms of the eigenvector columns only depend on the eigenspace when
    its basis is orthonormal; a non-symmetric solver returns an arbitrary one,
    which would make the scores depend on node order. Back substitution can
    also lose directions that only some combinations of block eigenvectors
    keep. The numerical null space fixes both: its dimension is the number of
    live columns, and the other copies become deficient. A group whose null
    space is smaller than its live columns, or larger than the group, is left
    as it is. Returns whether any column ended up deficient.
    """
    radius = 10 * np.finfo(float).eps ** 0.5 * scale
    real = [u for u in units if not u.pair and u.value != 0]
    real.sort(key=lambda u: u.value.real)
    missing = False
    start = 0
    while start < len(real):
        stop = start + 1
        while stop < len(real) and real[stop].value.real - real[start].value.real <= radius:
            stop += 1
        group = real[start:stop]
        start = stop
        alive = sum(not u.deficient for u in group)
        if len(group) < 2 and alive == 1:
            continue
        mu = float(np.mean([u.value.real for u in group]))
        q = _null_space(a - mu * np.eye(a.shape[0]), scale)
        g = q.shape[1]
        if g < alive or g > len(group):
            missing |= alive < len(group)
            continue
        for c, u in enumerate(group):
            u.value = complex(mu)
            u.vector = q[:, c].astype(complex) if c < g else None
            u.deficient = c >= g
        missing |= g < len(group)
    return missing


def decompose(m, tol_zero: float = TOL_ZERO, tol_imag: float = TOL_IMAG,
              n_components: Optional[int] = None) -> Spectrum:
    """Full (or leading partial) eigendecomposition of a real square matrix.

    Parameters
    ----------
    m : SquareMatrix or array_like
        Arrays are treated as general real matrices (no sign constraints).
    tol_zero : float
        Eigenvalues with ``|lambda| <= tol_zero * ||m||_F`` become exactly zero.
    tol_imag : float
        Conjugate pairs with ``|Im| <= tol_imag * (||m||_F + |lambda|)`` are
        split into two real eigenpairs.
    n_components : int, optional
        Compute only this many leading eigenpairs with ARPACK. Defaults to
        all of them up to ``DENSE_LIMIT`` nodes and ``DEFAULT_PARTIAL`` beyond.

    Raises
    ------
    NumericalError
        Solver failure, or a column whose relative residual
        ``||A v - lambda v|| / ||A||_F`` exceeds ``RESIDUAL_TOL``.
    """
    if isinstance(m, SquareMatrix):
        a, mode = np.asarray(m.entries), m.mode
    else:
        a, mode = np.asarray(m, dtype=float), "general"
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
            raise InputError(f"expected a non-empty square matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise InputError("matrix contains non-finite entries")
    n = a.shape[0]
    scale = float(np.linalg.norm(a))
    zero_cut = tol_zero * scale
    symmetric = bool(np.array_equal(a, a.T))
    if n_components is None and n > DENSE_LIMIT:
        n_components = DEFAULT_PARTIAL
    partial = n_components is not None and n_components < n - 1
    defective = False
    if partial:
        units = _partial_units(a, int(n_components), symmetric)
    elif symmetric:
        w, vecs = np.linalg.eigh(a)
        units = [_Unit(complex(w[j]), vecs[:, j].astype(complex)) for j in range(n)]
    else:
        units, defective = _condensed_units(a, zero_cut)

    snapped = []
    for u in units:
        if abs(u.value) <= zero_cut:
            u.value = 0j
        elif u.pair and abs(u.value.imag) <= tol_imag * (scale + abs(u.value)):
            u.value = complex(u.value.real)
        if not (u.pair and u.value.imag == 0 and u.value != 0):
            snapped.append(u)
        elif u.deficient:
            snapped += [_Unit(u.value, None, deficient=True), _Unit(u.value, None, deficient=True)]
        else:
            # the real and imaginary parts span the real invariant subspace; a
            # split that comes from a Jordan block leaves one part that is not
            # an eigenvector, so that direction is missing
            x = _canonical_phase(u.vector)
            for part in (x.real, x.imag):
                norm = np.linalg.norm(part)
                part = part / max(norm, _MIN_PART_NORM)
                off = np.linalg.norm(a @ part - u.value.real * part) / max(scale, 1e-300)
                if norm < _MIN_PART_NORM or off > RESIDUAL_TOL:
                    defective = True
                    snapped.append(_Unit(u.value, None, deficient=True))
                else:
                    snapped.append(_Unit(u.value, part.astype(complex)))
    units = snapped
    _sort_units(units, scale)
    if not partial and not symmetric:
        defective |= _orthonormalize_repeated(a, units, scale)

    values, vectors, markers, deficient = [], [], [], []

    def add(lam, vec, marker, missing=False):
        values.append(lam)
        vectors.append(np.zeros(n, dtype=complex) if vec is None else vec)
        markers.append(marker)
        deficient.append(missing)

    for u in units:
        count = 2 if u.pair else 1
        if u.deficient:
            if u.pair and u.value.imag != 0:
                add(u.value, None, "pair_first", True)
                add(np.conj(u.value), None, "pair_second", True)
            else:
                for _ in range(count):
                    add(u.value, None, "real", True)
        elif u.value == 0:
            vec = None if (u.pair or u.vector is None) else u.vector
            for _ in range(count):
                add(0j, vec, "zero")
        elif not u.pair:
            add(u.value, u.vector.real.astype(complex) / np.linalg.norm(u.vector), "real")
        else:
            x = _canonical_phase(u.vector)
            x = x / np.linalg.norm(x)
            add(u.value, x, "pair_first")
            add(np.conj(u.value), np.conj(x), "pair_second")

    eigvals = np.array(values, dtype=complex)
    eigvecs = np.column_stack(vectors) if vectors else np.zeros((n, 0), dtype=complex)
    residuals = np.zeros(len(values))
    if scale > 0:
        resid = a @ eigvecs - eigvecs * eigvals[None, :]
        residuals = np.linalg.norm(resid, axis=0) / scale
    bad = np.flatnonzero(residuals > RESIDUAL_TOL)
    if bad.size:
        j = int(bad[0])
        raise NumericalError(f"eigenpair residual {residuals[j]:.3e} exceeds {RESIDUAL_TOL:g}",
                             column=j + 1)
    deficient = np.array(deficient, dtype=bool)
    for arr in (eigvals, eigvecs, residuals, deficient):
        arr.setflags(write=False)
    return Spectrum(eigvals, eigvecs, tuple(markers), residuals, deficient,
                    defective or bool(deficient.any()), not partial, mode)


# -- eigengaps -------------------------------------------------------------


def eigengaps(s: Spectrum) -> EigengapAnalysis:
    """Consecutive real-part drops ``g_i`` for ``i = 1 .. size - 1``."""
    if s.size < 2:
        raise InputError("eigengap analysis needs at least two eigenvalues")
    re = s.real
    gaps = re[:-1] - re[1:]
    admissible = re[:-1] > 0
    order = sorted(range(len(gaps)), key=lambda i: (-gaps[i], i))
    prominent = tuple((i + 1, float(gaps[i])) for i in order)
    return EigengapAnalysis(gaps, admissible, prominent, search_bound=s.size)


def select_k(e: EigengapAnalysis) -> int:
    """Smallest admissible index attaining the largest admissible gap."""
    idx = np.flatnonzero(e.admissible)
    if idx.size == 0:
        raise DegenerateSpectrum("no eigenvalue with positive real part; no centrality analysis possible")
    best = e.gaps[idx].max()
    ties = idx[e.gaps[idx] >= best - TIE_RTOL * abs(best)]
    return int(ties[0]) + 1


# -- V matrix and centrality ----------------------------------------------


def build_v(s: Spectrum, k: int) -> VMatrix:
    """Real ``n x k`` matrix assembled from the leading ``k`` eigenpairs.

    If column ``k`` opens a conjugate pair, ``k`` grows by one so both
    replacement vectors enter together.
    """
    k = int(k)
    if not 1 <= k <= s.size:
        raise InputError(f"k={k} outside 1..{s.size}")
    k_eff = k + 1 if s.pair_index[k - 1] == "pair_first" else k
    cols = np.zeros((s.n, k_eff))
    zero_cols = set()
    j = 0
    while j < k_eff:
        marker = s.pair_index[j]
        if marker == "zero" or s.deficient[j]:
            zero_cols.add(j)
            j += 1
        elif marker == "pair_first":
            x = s.eigenvectors[:, j]
            for offset, part in enumerate((x.real, x.imag)):
                norm = np.linalg.norm(part)
                if norm < _MIN_PART_NORM:
                    raise NumericalError("complex pair has a vanishing real or imaginary part",
                                         column=j + 1 + offset)
                cols[:, j + offset] = part / norm
            j += 2
        elif marker == "pair_second":
            raise NumericalError("conjugate pair split by k", column=j + 1)
        else:
            v = s.eigenvectors[:, j].real
            cols[:, j] = v / np.linalg.norm(v)
            j += 1
    cols.setflags(write=False)
    return VMatrix(cols, frozenset(zero_cols), k)


def analyze(m, k="auto", tol_zero: float = TOL_ZERO, tol_imag: float = TOL_IMAG,
            n_components: Optional[int] = None) -> LocalCentralityResult:
    """Run decomposition, gap selection and the centrality in one pass."""
    m = _as_square(m)
    auto = isinstance(k, str)
    if auto and k != "auto":
        raise InputError(f"k must be 'auto' or a positive integer, got {k!r}")
    if not auto and n_components is None and m.n > DENSE_LIMIT:
        n_components = int(k) + PARTIAL_MARGIN
    s = decompose(m, tol_zero, tol_imag, n_components)
    gaps = eigengaps(s) if s.size >= 2 else None
    warnings = []
    if auto:
        if gaps is None:
            raise InputError("automatic k needs at least two eigenvalues")
        try:
            k_sel = select_k(gaps)
        except DegenerateSpectrum as exc:
            zero = CentralityVector(np.zeros(m.n), "local_eigenvector", m.mode, None, "raw",
                                    m.node_ids, ("degenerate_spectrum",))
            raise DegenerateSpectrum(str(exc), centrality=zero) from None
        gaps = replace(gaps, selected_k=k_sel, selection_mode="auto")
    else:
        k_sel = int(k)
        if k_sel < 1:
            raise InputError(f"k must be positive, got {k_sel}")
        if gaps is not None:
            gaps = replace(gaps, selected_k=k_sel, selection_mode="user")
        if k_sel <= s.size and s.real[k_sel - 1] <= 0:
            warnings.append("non_positive_user_k")
    v = build_v(s, k_sel)
    if v.k != k_sel:
        warnings.append("pair_boundary_extension")
    if s.defective:
        warnings.append("eigenspace_deficiency")
    if not s.complete:
        warnings.append(f"partial_spectrum:{s.size}")
    values = np.linalg.norm(v.columns, axis=1)
    c = CentralityVector(values, "local_eigenvector", m.mode, v.k, "raw", m.node_ids, tuple(warnings))
    return LocalCentralityResult(s, gaps, v, c)


def local_centrality(m, k="auto", **kwargs) -> CentralityVector:
    """Local eigenvector centrality: row norms of the V matrix.

    Raises DegenerateSpectrum (with an all-zero ``centrality`` payload) when
    ``k='auto'`` and no eigenvalue has a positive real part.
    """
    return analyze(m, k, **kwargs).centrality


def eigenvector_centrality(m, n_components: Optional[int] = None) -> CentralityVector:
    """Absolute values of the unit principal eigenvector of an adjacency matrix."""
    m = _as_square(m)
    if m.mode != "adjacency":
        raise ModeError(f"eigenvector centrality needs an adjacency matrix, got {m.mode}")
    if n_components is None and m.n > DENSE_LIMIT:
        n_components = 1 + PARTIAL_MARGIN
    s = decompose(m, n_components=n_components)
    if s.pair_index[0] == "zero" or s.deficient[0]:
        return CentralityVector(np.zeros(m.n), "eigenvector", m.mode, 1, "raw", m.node_ids)
    v = s.eigenvectors[:, 0].real
    v = v / np.linalg.norm(v)
    if v.sum() < 0:
        v = -v
    return CentralityVector(np.abs(v), "eigenvector", m.mode, 1, "unit_2_norm", m.node_ids)
