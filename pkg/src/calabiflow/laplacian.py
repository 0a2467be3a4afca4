"""The dual Laplacian of a circle packing metric.

The matrix ``L = -d K / d u`` (curvatures differentiated in log radii,
sign chosen so that ``L`` is positive semi-definite) is a weighted graph
Laplacian: ``L_ij = -B_ij`` for an edge ``ij`` and ``L_ii = sum_k B_ik``,
where the edge weight ``B_ij`` collects one half-contribution

    d theta_i / d r_j * r_j

from each of the two faces containing the edge.  Each half-contribution
lies in ``(0, sqrt(3))``, hence ``0 < B_ij < 2 sqrt(3)``; the kernel of
``L`` is exactly the constant vectors, so the rank is ``N - 1``.

Two independent routes compute the half-contributions: a closed-form chain
rule through the cosine law (the default), and a ratio of dual edge length
to primal edge length computed from two auxiliary triangles spanned by the
circle intersection points.  The dual route exists as a cross-check and is
exercised by the test suite and a CLI flag.
"""

from __future__ import annotations

import math
from functools import cached_property

import numpy as np
import scipy.sparse as sparse
import scipy.sparse.linalg as sparse_linalg

from . import _kernels
from .errors import DomainError, InternalConsistencyError
from .geometry import PackingMetric, Weight, edge_length, triangle_angles
from .mesh import Triangulation

__all__ = [
    "DualLaplacian",
    "half_weight_analytic",
    "half_weight_dual",
    "assemble",
    "apply",
    "lambda1",
]

DENSE_LIMIT = 512


def _phi_between(phi, a: int, b: int) -> float:
    """Weight of the face edge between local vertices a and b (0, 1, 2)."""
    pair = (min(a, b), max(a, b))
    return float(phi[{(0, 1): 0, (1, 2): 1, (0, 2): 2}[pair]])


def _face_inputs(r, phi, corner: int, moving: int):
    if corner == moving or not {corner, moving} <= {0, 1, 2}:
        raise DomainError("corner and moving must be distinct members of {0, 1, 2}")
    r = [float(x) for x in r]
    phi = [float(x) for x in phi]
    if len(r) != 3 or len(phi) != 3:
        raise DomainError("expected three radii and three weights")
    other = 3 - corner - moving
    return r, phi, other


def half_weight_analytic(r, phi, corner: int, moving: int) -> float:
    """One face's contribution to ``B``, by the cosine-law chain rule.

    Parameters
    ----------
    r : (r_0, r_1, r_2)
        Radii at the face's three vertices.
    phi : (phi_01, phi_12, phi_20)
        Weights of the three face edges.
    corner, moving : int
        Differentiates the angle at ``corner`` with respect to the radius
        at ``moving`` (then multiplies by that radius).
    """
    r, phi, other = _face_inputs(r, phi, corner, moving)
    r_c, r_m, r_o = r[corner], r[moving], r[other]
    l_cm = edge_length(r_c, r_m, _phi_between(phi, corner, moving))
    l_co = edge_length(r_c, r_o, _phi_between(phi, corner, other))
    l_mo = edge_length(r_m, r_o, _phi_between(phi, moving, other))
    theta_c, theta_m, _ = triangle_angles(l_mo, l_co, l_cm)
    bracket = (r_m + r_o * math.cos(_phi_between(phi, moving, other))) - (
        l_mo * math.cos(theta_m) / l_cm
    ) * (r_m + r_c * math.cos(_phi_between(phi, corner, moving)))
    return r_m / (l_cm * l_co * math.sin(theta_c)) * bracket


def _aux_cos(r_near: float, side: float, r_far: float) -> float:
    """Angle cosine in the auxiliary triangle (r_near, side; r_far opposite)."""
    arg = (r_near * r_near + side * side - r_far * r_far) / (2.0 * r_near * side)
    if abs(arg) - 1.0 > _kernels.CLAMP_TOL:
        raise InternalConsistencyError(
            f"auxiliary triangle degenerate (cos = {arg!r}); unreachable for "
            "weights in [0, pi/2]"
        )
    return min(1.0, max(-1.0, arg))


def half_weight_dual(r, phi, corner: int, moving: int) -> float:
    """One face's contribution to ``B``, as dual length over primal length.

    The circles at ``moving`` and ``other`` (resp. ``corner`` and
    ``moving``) meet in a point that spans an auxiliary triangle with the
    corresponding primal edge; the half-contribution is the quotient of the
    resulting dual edge length by the primal edge length.  Agrees with
    :func:`half_weight_analytic` to roundoff.
    """
    r, phi, other = _face_inputs(r, phi, corner, moving)
    r_c, r_m, r_o = r[corner], r[moving], r[other]
    l_cm = edge_length(r_c, r_m, _phi_between(phi, corner, moving))
    l_co = edge_length(r_c, r_o, _phi_between(phi, corner, other))
    l_mo = edge_length(r_m, r_o, _phi_between(phi, moving, other))
    _, theta_m, _ = triangle_angles(l_mo, l_co, l_cm)
    cos_aux1 = _aux_cos(r_m, l_mo, r_o)
    cos_aux2 = _aux_cos(r_m, l_cm, r_c)
    dual = r_m * (cos_aux1 - math.cos(theta_m) * cos_aux2) / math.sin(theta_m)
    return dual / l_cm


def _dual_halves(t: Triangulation, w: Weight, m: PackingMetric) -> np.ndarray:
    """Vectorized dual-route half-contributions, aligned like face_edges."""
    r = m.r
    ea = t.edges[:, 0]
    eb = t.edges[:, 1]
    lens = np.sqrt(
        r[ea] ** 2 + r[eb] ** 2 + 2.0 * r[ea] * r[eb] * w.cos_phi
    )
    L = lens[t.face_edges]
    cc = np.empty_like(L)
    for mm in range(3):
        p = (mm + 1) % 3
        q = (mm + 2) % 3
        cc[:, mm] = (L[:, p] ** 2 + L[:, q] ** 2 - L[:, mm] ** 2) / (
            2.0 * L[:, p] * L[:, q]
        )
    if float(np.max(np.abs(cc))) - 1.0 > _kernels.CLAMP_TOL:
        raise InternalConsistencyError("cosine-law value left [-1, 1]")
    cc = np.clip(cc, -1.0, 1.0)
    sn = np.sqrt(1.0 - cc * cc)
    rv = r[t.faces]
    halves = np.empty_like(L)
    for mm in range(3):
        p = (mm + 1) % 3
        q = (mm + 2) % 3
        r_c, r_m, r_o = rv[:, p], rv[:, q], rv[:, mm]
        l_cm, l_mo = L[:, mm], L[:, p]
        aux1 = (r_m * r_m + l_mo * l_mo - r_o * r_o) / (2.0 * r_m * l_mo)
        aux2 = (r_m * r_m + l_cm * l_cm - r_c * r_c) / (2.0 * r_m * l_cm)
        for aux in (aux1, aux2):
            if float(np.max(np.abs(aux))) - 1.0 > _kernels.CLAMP_TOL:
                raise InternalConsistencyError("auxiliary triangle degenerate")
        aux1 = np.clip(aux1, -1.0, 1.0)
        aux2 = np.clip(aux2, -1.0, 1.0)
        halves[:, mm] = r_m * (aux1 - cc[:, q] * aux2) / (sn[:, q] * l_cm)
    return halves


def _helmert(n: int) -> np.ndarray:
    """Orthonormal basis of the complement of the constant vectors, (n-1, n)."""
    s = np.zeros((n - 1, n))
    for k in range(1, n):
        s[k - 1, :k] = 1.0
        s[k - 1, k] = -float(k)
        s[k - 1] /= math.sqrt(k * (k + 1.0))
    return s


class DualLaplacian:
    """Assembled dual Laplacian: edge weights plus the matrix itself.

    The matrix is dense for N <= 512 and CSR-sparse above.  ``weights``
    holds ``B`` per edge, aligned with the triangulation's edge table.
    """

    def __init__(self, n: int, edges: np.ndarray, weights: np.ndarray):
        self.n = int(n)
        self.edges = edges
        self.weights = np.asarray(weights, dtype=np.float64)
        if self.weights.shape[0] != edges.shape[0]:
            raise DomainError("one weight per edge required")
        if self.weights.size and not np.all(np.isfinite(self.weights)):
            raise DomainError("edge weights must be finite")
        if self.weights.size and (
            float(self.weights.min()) <= 0.0
            or float(self.weights.max()) >= 2.0 * math.sqrt(3.0)
        ):
            raise DomainError(
                "edge weights must lie in the open interval (0, 2*sqrt(3))"
            )
        a = edges[:, 0]
        b = edges[:, 1]
        diag = np.zeros(self.n)
        np.add.at(diag, a, self.weights)
        np.add.at(diag, b, self.weights)
        if self.n <= DENSE_LIMIT:
            mat = np.zeros((self.n, self.n))
            mat[a, b] = -self.weights
            mat[b, a] = -self.weights
            mat[np.arange(self.n), np.arange(self.n)] = diag
            self.matrix = mat
        else:
            rows = np.concatenate([a, b, np.arange(self.n)])
            cols = np.concatenate([b, a, np.arange(self.n)])
            vals = np.concatenate([-self.weights, -self.weights, diag])
            self.matrix = sparse.csr_matrix(
                (vals, (rows, cols)), shape=(self.n, self.n)
            )
        self.row_sum_residuals = self.matrix @ np.ones(self.n)

    @property
    def is_dense(self) -> bool:
        return isinstance(self.matrix, np.ndarray)

    def apply(self, f: np.ndarray) -> np.ndarray:
        """Discrete Laplacian of a vertex function: sum_j B_ij (f_j - f_i)."""
        f = np.asarray(f, dtype=np.float64)
        if f.shape != (self.n,):
            raise DomainError(f"expected a vector of length {self.n}")
        return _kernels.lap_apply(self.weights, self.edges[:, 0], self.edges[:, 1], f)

    @cached_property
    def _eigh(self):
        if not self.is_dense:
            raise InternalConsistencyError("full spectrum needs the dense path")
        vals, vecs = np.linalg.eigh(self.matrix)
        return vals, vecs

    def eigenvalues(self) -> np.ndarray:
        """All eigenvalues ascending (dense storage only)."""
        return self._eigh[0]

    def spectral_summary(self) -> tuple[float, float, float]:
        """(smallest, second smallest, largest) eigenvalue."""
        if self.is_dense:
            vals = self.eigenvalues()
            return float(vals[0]), float(vals[1]), float(vals[-1])
        lo = sparse_linalg.eigsh(
            self.matrix, k=2, sigma=0.0, which="LM", v0=self._start_vector()
        )[0]
        hi = sparse_linalg.eigsh(
            self.matrix, k=1, which="LA", v0=self._start_vector()
        )[0]
        lo = np.sort(lo)
        return float(lo[0]), float(lo[1]), float(hi[0])

    def _start_vector(self):
        # fixed ARPACK start vector so repeated runs are deterministic
        return np.linspace(1.0, 2.0, self.n)

    def lambda1(self) -> float:
        """Smallest eigenvalue of L restricted to the complement of the kernel.

        The constant direction is deflated with an explicit orthonormal
        basis of its complement (dense path), or by shift-invert around 0
        (sparse path).  The result is validated against the Rayleigh
        quotient of the corresponding eigenvector.
        """
        if self.is_dense:
            s = _helmert(self.n)
            reduced = s @ self.matrix @ s.T
            vals, vecs = np.linalg.eigh(reduced)
            lam = float(vals[0])
            vec = s.T @ vecs[:, 0]
        else:
            vals, vecs = sparse_linalg.eigsh(
                self.matrix, k=2, sigma=0.0, which="LM", v0=self._start_vector()
            )
            order = np.argsort(vals)
            lam = float(vals[order[1]])
            vec = vecs[:, order[1]]
        quotient = float(vec @ (self.matrix @ vec) / (vec @ vec))
        scale = max(abs(lam), 1e-12 * self._norm_estimate())
        if abs(quotient - lam) > 1e-8 * scale:
            raise InternalConsistencyError(
                f"eigenvalue {lam!r} fails Rayleigh validation ({quotient!r})"
            )
        return lam

    def _norm_estimate(self) -> float:
        diag = self.matrix.diagonal()
        return 2.0 * float(np.max(diag)) if len(diag) else 0.0

    def coordinate_lines(self) -> list[str]:
        """The matrix as sorted ``i j value`` lines, both symmetric entries."""
        entries = []
        diag = self.matrix.diagonal()
        for i in range(self.n):
            entries.append((i, i, float(diag[i])))
        for (a, b), wgt in zip(self.edges, self.weights):
            entries.append((int(a), int(b), -float(wgt)))
            entries.append((int(b), int(a), -float(wgt)))
        entries.sort(key=lambda e: (e[0], e[1]))
        return [f"{i} {j} {v:.17g}" for i, j, v in entries]


def assemble(
    t: Triangulation, w: Weight, m: PackingMetric, route: str = "analytic"
) -> DualLaplacian:
    """Assemble the dual Laplacian of a metric.

    ``route`` selects how half-contributions are computed: ``"analytic"``
    (closed-form chain rule, the default) or ``"dual"`` (dual-length
    quotient, the verification path).  Both must agree to roundoff.
    """
    if m.n != t.n_vertices or w.phi.shape[0] != t.n_edges:
        raise DomainError("mesh, weight and metric sizes are inconsistent")
    if route == "analytic":
        _, _, _, _, b, _, err = _kernels.state(
            m.r, t.faces, t.face_edges, t.edges[:, 0], t.edges[:, 1], w.cos_phi
        )
        _kernels.raise_state_error(err)
    elif route == "dual":
        halves = _dual_halves(t, w, m)
        b = np.zeros(t.n_edges)
        np.add.at(b, t.face_edges.ravel(), halves.ravel())
        if float(b.min()) <= 0.0 or float(b.max()) >= _kernels.TWO_SQRT3:
            raise InternalConsistencyError(
                "an edge weight left the open interval (0, 2*sqrt(3))"
            )
    else:
        raise DomainError(f"unknown assembly route {route!r}")
    return DualLaplacian(t.n_vertices, t.edges, b)


def apply(lap: DualLaplacian, f: np.ndarray) -> np.ndarray:
    """Module-level alias for :meth:`DualLaplacian.apply`."""
    return lap.apply(f)


def lambda1(lap: DualLaplacian) -> float:
    """Module-level alias for :meth:`DualLaplacian.lambda1`."""
    return lap.lambda1()
