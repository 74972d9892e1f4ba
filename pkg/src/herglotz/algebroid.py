"""Local charts of Lie algebroids.

A rank-r algebroid over an n-dimensional base is described in a chart by the
anchor components ``rho[i, a] = rho^i_a(x)`` (an n-by-r matrix field) and the
structure functions ``C[g, a, b] = C^g_ab(x)`` (an r-by-r-by-r tensor field,
skew in the two lower indices).  Together they encode the anchor map and the
bracket of the chosen frame:

    rho(e_a) = rho^i_a(x) d/dx^i,        [e_a, e_b] = C^g_ab(x) e_g.

A curve ``(x(t), y(t))`` is admissible when ``xdot = rho(x) y``.  The bracket
and anchor are not arbitrary: the Leibniz rule forces the anchor to intertwine
brackets and the Jacobi identity constrains the structure functions.  Both
conditions are checked numerically by :func:`validate_identities`.

Lie algebras are charts with ``base_dim == 0``; every operation accepts empty
base arrays.  Charts are immutable after construction and all evaluation
callbacks must be pure, so instances can be shared freely across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import EvaluationError

__all__ = [
    "AlgebroidChart",
    "ValidationReport",
    "anchor_eval",
    "structure_eval",
    "admissibility_residual",
    "validate_identities",
    "sample_points",
    "tangent_bundle",
    "lie_algebra",
    "so3_chart",
    "so3_structure",
    "action_algebroid",
    "action_so3_r3",
    "atiyah_chart",
    "hamel_chart",
]

DEFAULT_FD_STEP = 1e-5
DEFAULT_SEED = 42


@dataclass(frozen=True)
class AlgebroidChart:
    """Local data of a Lie algebroid chart.

    Attributes:
        base_dim: dimension n of the base (0 for a Lie algebra).
        fiber_rank: rank r of the bundle.
        anchor: map ``x -> (n, r)`` array of anchor components.
        structure: map ``x -> (r, r, r)`` array, axes ordered ``(g, a, b)``
            for ``C^g_ab``; must be skew in the last two axes.
        label: human-readable chart name.
        anchor_jac: optional exact derivative ``x -> (n, r, n)`` with axes
            ``(i, a, j) = d rho^i_a / dx^j``; overrides finite differences.
        structure_jac: optional exact derivative ``x -> (r, r, r, n)``.
    """

    base_dim: int
    fiber_rank: int
    anchor: Callable[[np.ndarray], np.ndarray]
    structure: Callable[[np.ndarray], np.ndarray]
    label: str = ""
    anchor_jac: Optional[Callable[[np.ndarray], np.ndarray]] = None
    structure_jac: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __post_init__(self):
        if self.base_dim < 0 or self.fiber_rank <= 0:
            raise ValueError(
                "need base_dim >= 0 and fiber_rank >= 1, got "
                f"n={self.base_dim}, r={self.fiber_rank}"
            )


@dataclass(frozen=True)
class ValidationReport:
    """Residuals of the defining identities, sampled at a set of points."""

    max_skew_residual: float
    max_compat_residual: float
    max_jacobi_residual: float
    sample_points: np.ndarray
    tolerance: float
    passed: bool

    def worst(self) -> float:
        return max(
            self.max_skew_residual,
            self.max_compat_residual,
            self.max_jacobi_residual,
        )


def _as_base_point(chart: AlgebroidChart, x) -> np.ndarray:
    x = np.atleast_1d(np.asarray(x, dtype=float)).reshape(-1)
    if x.shape != (chart.base_dim,):
        raise ValueError(
            f"base point has shape {x.shape}, chart expects ({chart.base_dim},)"
        )
    if not np.all(np.isfinite(x)):
        raise ValueError("base point has non-finite entries")
    return x


def anchor_eval(chart: AlgebroidChart, x) -> np.ndarray:
    """Evaluate the anchor matrix ``rho^i_a(x)`` with shape (n, r)."""
    x = _as_base_point(chart, x)
    rho = np.asarray(chart.anchor(x), dtype=float)
    expected = (chart.base_dim, chart.fiber_rank)
    if rho.shape != expected:
        raise ValueError(f"anchor returned shape {rho.shape}, expected {expected}")
    if not np.all(np.isfinite(rho)):
        bad = np.argwhere(~np.isfinite(rho))[0]
        raise EvaluationError(
            f"anchor component (i={bad[0]}, alpha={bad[1]}) is non-finite at x={x!r}"
        )
    return rho


def structure_eval(chart: AlgebroidChart, x) -> np.ndarray:
    """Evaluate the structure tensor ``C^g_ab(x)`` with shape (r, r, r)."""
    x = _as_base_point(chart, x)
    C = np.asarray(chart.structure(x), dtype=float)
    r = chart.fiber_rank
    if C.shape != (r, r, r):
        raise ValueError(f"structure returned shape {C.shape}, expected {(r, r, r)}")
    if not np.all(np.isfinite(C)):
        bad = np.argwhere(~np.isfinite(C))[0]
        raise EvaluationError(
            f"structure component (gamma={bad[0]}, alpha={bad[1]}, beta={bad[2]}) "
            f"is non-finite at x={x!r}"
        )
    return C


def admissibility_residual(chart: AlgebroidChart, x, xdot, y) -> np.ndarray:
    """Componentwise defect ``xdot - rho(x) y`` of the admissibility condition."""
    x = _as_base_point(chart, x)
    xdot = np.asarray(xdot, dtype=float).reshape(-1)
    y = np.asarray(y, dtype=float).reshape(-1)
    if xdot.shape != (chart.base_dim,):
        raise ValueError(
            f"xdot has shape {xdot.shape}, expected ({chart.base_dim},)"
        )
    if y.shape != (chart.fiber_rank,):
        raise ValueError(f"y has shape {y.shape}, expected ({chart.fiber_rank},)")
    return xdot - anchor_eval(chart, x) @ y


def sample_points(chart: AlgebroidChart, count: int = 100, seed: int = DEFAULT_SEED,
                  low: float = -1.0, high: float = 1.0) -> np.ndarray:
    """Reproducible pseudo-random base points in ``[low, high]^n``.

    For a rank over a point (n = 0) a single empty point is returned so that
    validation still exercises the constant identities once.
    """
    if chart.base_dim == 0:
        return np.zeros((1, 0))
    rng = np.random.default_rng(seed)
    return rng.uniform(low, high, size=(count, chart.base_dim))


def _anchor_jacobian(chart: AlgebroidChart, x: np.ndarray, h: float) -> np.ndarray:
    if chart.anchor_jac is not None:
        return np.asarray(chart.anchor_jac(x), dtype=float)
    n, r = chart.base_dim, chart.fiber_rank
    out = np.zeros((n, r, n))
    for j in range(n):
        dx = np.zeros(n)
        dx[j] = h
        out[:, :, j] = (anchor_eval(chart, x + dx) - anchor_eval(chart, x - dx)) / (2 * h)
    return out


def _structure_jacobian(chart: AlgebroidChart, x: np.ndarray, h: float) -> np.ndarray:
    if chart.structure_jac is not None:
        return np.asarray(chart.structure_jac(x), dtype=float)
    n, r = chart.base_dim, chart.fiber_rank
    out = np.zeros((r, r, r, n))
    for j in range(n):
        dx = np.zeros(n)
        dx[j] = h
        out[:, :, :, j] = (
            structure_eval(chart, x + dx) - structure_eval(chart, x - dx)
        ) / (2 * h)
    return out


def validate_identities(chart: AlgebroidChart, points, fd_step: float = DEFAULT_FD_STEP,
                        tol: float = 1e-6) -> ValidationReport:
    """Check skew-symmetry, anchor/bracket compatibility and the Jacobi identity.

    At each supplied base point three residuals are evaluated:

    * skew:   ``max |C^g_ab + C^g_ba|``
    * compat: ``max |rho^j_a d_j rho^i_b - rho^j_b d_j rho^i_a - rho^i_g C^g_ab|``
    * jacobi: ``max`` over all index choices of the cyclic sum (over the three
      lower indices) of ``rho^i_a d_i C^nu_bg + C^nu_am C^m_bg``

    Derivatives fall back to central differences of step ``fd_step`` unless
    the chart registers exact jacobians.
    """
    points = np.asarray(points, dtype=float)
    if points.ndim == 1:
        points = points.reshape(1, -1)
    if points.shape[0] == 0:
        raise ValueError("validate_identities needs at least one sample point")
    if fd_step <= 0:
        raise ValueError("fd_step must be positive")

    skew = 0.0
    compat = 0.0
    jacobi = 0.0
    for x in points:
        rho = anchor_eval(chart, x)
        C = structure_eval(chart, x)
        skew = max(skew, float(np.max(np.abs(C + np.swapaxes(C, 1, 2)), initial=0.0)))

        drho = _anchor_jacobian(chart, x, fd_step)
        # lie[i, a, b] = rho^j_a d_j rho^i_b - rho^j_b d_j rho^i_a
        lie = np.einsum("ja,ibj->iab", rho, drho) - np.einsum("jb,iaj->iab", rho, drho)
        comp = lie - np.einsum("ig,gab->iab", rho, C)
        compat = max(compat, float(np.max(np.abs(comp), initial=0.0)))

        dC = _structure_jacobian(chart, x, fd_step)
        # term[nu, a, b, g] = rho^i_a d_i C^nu_bg + C^nu_am C^m_bg
        term = np.einsum("ia,nbgi->nabg", rho, dC) + np.einsum("nam,mbg->nabg", C, C)
        cyc = term + np.transpose(term, (0, 2, 3, 1)) + np.transpose(term, (0, 3, 1, 2))
        jacobi = max(jacobi, float(np.max(np.abs(cyc), initial=0.0)))

    passed = skew <= tol and compat <= tol and jacobi <= tol
    return ValidationReport(skew, compat, jacobi, points, tol, passed)


# ---------------------------------------------------------------------------
# builders
# ---------------------------------------------------------------------------


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    a.setflags(write=False)
    return a


def _skew_part(C: np.ndarray) -> np.ndarray:
    return 0.5 * (C - np.swapaxes(C, 1, 2))


def tangent_bundle(n: int, label: str = "") -> AlgebroidChart:
    """Tangent-bundle chart: identity anchor, commuting coordinate frame."""
    rho = _frozen(np.eye(n))
    C = _frozen(np.zeros((n, n, n)))
    zero_aj = _frozen(np.zeros((n, n, n)))
    zero_cj = _frozen(np.zeros((n, n, n, n)))
    return AlgebroidChart(
        base_dim=n,
        fiber_rank=n,
        anchor=lambda x: rho,
        structure=lambda x: C,
        anchor_jac=lambda x: zero_aj,
        structure_jac=lambda x: zero_cj,
        label=label or f"TQ(n={n})",
    )


def lie_algebra(C, label: str = "") -> AlgebroidChart:
    """Lie-algebra chart: base dimension 0, vanishing anchor, constant bracket.

    The input tensor is antisymmetrized in its lower indices, so callers may
    hand in any tensor whose skew part is the intended bracket.
    """
    C = _frozen(_skew_part(np.asarray(C, dtype=float)))
    r = C.shape[0]
    if C.shape != (r, r, r):
        raise ValueError(f"structure tensor must be cubic, got shape {C.shape}")
    rho = _frozen(np.zeros((0, r)))
    return AlgebroidChart(
        base_dim=0,
        fiber_rank=r,
        anchor=lambda x: rho,
        structure=lambda x: C,
        anchor_jac=lambda x: np.zeros((0, r, 0)),
        structure_jac=lambda x: np.zeros((r, r, r, 0)),
        label=label or f"lie_algebra(r={r})",
    )


def so3_structure() -> np.ndarray:
    """Structure tensor of so(3): C^g_ab = Levi-Civita epsilon_abg."""
    eps = np.zeros((3, 3, 3))
    for a, b, g in [(0, 1, 2), (1, 2, 0), (2, 0, 1)]:
        eps[g, a, b] = 1.0
        eps[g, b, a] = -1.0
    return eps


def so3_chart(label: str = "so(3)") -> AlgebroidChart:
    return lie_algebra(so3_structure(), label=label)


def action_algebroid(generators: Sequence[Callable[[np.ndarray], np.ndarray]],
                     C, n: int, label: str = "",
                     generator_jacs: Optional[Sequence[Callable]] = None) -> AlgebroidChart:
    """Action algebroid chart from r generator vector fields on R^n.

    ``generators[a](x)`` is the anchor image of the a-th frame section; ``C``
    is the constant bracket tensor of the acting algebra.  For the chart to
    validate, the generators must represent that bracket:
    ``[rho_a, rho_b] = C^g_ab rho_g`` as vector fields.
    """
    C = _frozen(_skew_part(np.asarray(C, dtype=float)))
    r = C.shape[0]
    if len(generators) != r:
        raise ValueError(f"got {len(generators)} generators for rank-{r} bracket")

    def anchor(x):
        return np.stack([np.asarray(g(x), dtype=float) for g in generators], axis=1)

    anchor_jac = None
    if generator_jacs is not None:
        if len(generator_jacs) != r:
            raise ValueError("generator_jacs must match the number of generators")

        def anchor_jac(x):  # noqa: F811 - deliberate rebinding
            return np.stack(
                [np.asarray(j(x), dtype=float) for j in generator_jacs], axis=1
            )

    return AlgebroidChart(
        base_dim=n,
        fiber_rank=r,
        anchor=anchor,
        structure=lambda x: C,
        anchor_jac=anchor_jac,
        structure_jac=lambda x: np.zeros((r, r, r, n)),
        label=label or f"action(n={n}, r={r})",
    )


def action_so3_r3(label: str = "so(3) acting on R^3") -> AlgebroidChart:
    """so(3) acting on R^3 by rotations, anchored by cross-product fields.

    The generators are taken as ``rho_a(x) = x cross e_a`` so that the frame
    bracket matches the plain epsilon tensor (the opposite orientation would
    represent the opposite algebra).
    """
    basis = np.eye(3)
    gens = [lambda x, a=a: np.cross(x, basis[:, a]) for a in range(3)]
    # x -> x cross e_a is linear; its jacobian is minus the hat matrix of e_a.
    hats = [np.array([[0.0, -e[2], e[1]], [e[2], 0.0, -e[0]], [-e[1], e[0], 0.0]])
            for e in basis.T]
    jacs = [lambda x, a=a: -hats[a] for a in range(3)]
    return action_algebroid(gens, so3_structure(), n=3, label=label,
                            generator_jacs=jacs)


def atiyah_chart(n: int, d: int, conn_coeffs, curvature=None, structure_consts=None,
                 conn_jac=None, fd_step: float = DEFAULT_FD_STEP,
                 label: str = "") -> AlgebroidChart:
    """Atiyah-algebroid chart of a principal bundle in a local trivialization.

    Frame ordering: the first n sections project to the coordinate fields on
    the base, the last d are vertical.  Bracket table:

        [e_i, e_j]   = -B^A_ij ehat_A
        [e_i, eh_A]  =  c^C_AB Aconn^B_i eh_C
        [eh_A, eh_B] =  c^C_AB eh_C

    Args:
        conn_coeffs: connection coefficients, a constant ``(d, n)`` array or a
            map ``x -> (d, n)``.
        curvature: optional ``(d, n, n)`` array or map, skew in the base
            indices.  When omitted it is derived from the connection as
            ``B^A_ij = d_i A^A_j - d_j A^A_i - c^A_BC A^B_i A^C_j`` (which is
            the unique choice compatible with the Jacobi identity).
        structure_consts: constant ``(d, d, d)`` bracket tensor of the
            structure group algebra, skew in the lower indices; defaults to
            the abelian bracket.
        conn_jac: optional exact ``x -> (d, n, n)`` with axes
            ``(A, i, j) = d Aconn^A_i / dx^j``.
    """
    r = n + d
    if structure_consts is None:
        c = np.zeros((d, d, d))
    else:
        c = np.asarray(structure_consts, dtype=float)
        if c.shape != (d, d, d):
            raise ValueError(f"structure_consts must have shape {(d, d, d)}")
        if np.max(np.abs(c + np.swapaxes(c, 1, 2)), initial=0.0) > 0.0:
            raise ValueError("structure_consts must be skew in the lower indices")
    c = _frozen(c)

    if callable(conn_coeffs):
        conn_fn = lambda x: np.asarray(conn_coeffs(x), dtype=float)
    else:
        conn_const = _frozen(np.asarray(conn_coeffs, dtype=float))
        if conn_const.shape != (d, n):
            raise ValueError(f"conn_coeffs must have shape {(d, n)}")
        conn_fn = lambda x: conn_const

    def conn_jacobian(x):
        if conn_jac is not None:
            return np.asarray(conn_jac(x), dtype=float)
        if not callable(conn_coeffs):
            return np.zeros((d, n, n))
        out = np.zeros((d, n, n))
        for j in range(n):
            dx = np.zeros(n)
            dx[j] = fd_step
            out[:, :, j] = (conn_fn(x + dx) - conn_fn(x - dx)) / (2 * fd_step)
        return out

    if curvature is None:
        def curv_fn(x):
            dA = conn_jacobian(x)
            B = np.transpose(dA, (0, 2, 1)) - dA  # d_i A_j - d_j A_i in [A, i, j]
            A = conn_fn(x)
            B -= np.einsum("abc,bi,cj->aij", c, A, A)
            return B
    elif callable(curvature):
        curv_fn = lambda x: np.asarray(curvature(x), dtype=float)
    else:
        curv_const = _frozen(np.asarray(curvature, dtype=float))
        if curv_const.shape != (d, n, n):
            raise ValueError(f"curvature must have shape {(d, n, n)}")
        curv_fn = lambda x: curv_const

    rho = np.zeros((n, r))
    rho[:, :n] = np.eye(n)
    rho = _frozen(rho)

    def structure(x):
        C = np.zeros((r, r, r))
        B = curv_fn(x)
        A = conn_fn(x)
        C[n:, :n, :n] = -B
        mixed = np.einsum("cab,bi->cia", c, A)  # [e_i, eh_A] components
        C[n:, :n, n:] = mixed
        C[n:, n:, :n] = -np.transpose(mixed, (0, 2, 1))
        C[n:, n:, n:] = c
        return C

    return AlgebroidChart(
        base_dim=n,
        fiber_rank=r,
        anchor=lambda x: rho,
        structure=structure,
        anchor_jac=lambda x: np.zeros((n, r, n)),
        label=label or f"atiyah(n={n}, d={d})",
    )


def hamel_chart(frame: Callable[[np.ndarray], np.ndarray], n: int,
                frame_jac: Optional[Callable[[np.ndarray], np.ndarray]] = None,
                fd_step: float = DEFAULT_FD_STEP, label: str = "") -> AlgebroidChart:
    """Tangent-bundle chart rewritten in a quasi-velocity frame.

    ``frame(q)`` returns the (n, n) matrix ``a^alpha_i(q)`` mapping coordinate
    velocities to quasi-velocities, ``y = a(q) qdot``.  The anchor is the
    inverse frame and the structure functions are the commutation functions of
    the frame fields ``e_alpha = (a^-1)^i_alpha d/dq^i``, obtained from the
    frame's derivatives (finite differences of step ``fd_step`` unless
    ``frame_jac(q) -> (n, n, n)`` with axes ``(alpha, i, j) = d a^alpha_i/dq^j``
    is supplied).
    """

    def inv_frame(q):
        a = np.asarray(frame(q), dtype=float)
        if a.shape != (n, n):
            raise ValueError(f"frame must return shape {(n, n)}")
        return np.linalg.inv(a)

    def inv_frame_jac(q):
        psi = inv_frame(q)
        if frame_jac is not None:
            da = np.asarray(frame_jac(q), dtype=float)
            # d(a^-1) = -a^-1 (da) a^-1, applied per base direction
            return -np.einsum("ia,abj,bk->ikj", psi, da, psi)
        out = np.zeros((n, n, n))
        for j in range(n):
            dq = np.zeros(n)
            dq[j] = fd_step
            out[:, :, j] = (inv_frame(q + dq) - inv_frame(q - dq)) / (2 * fd_step)
        return out

    def structure(q):
        a = np.asarray(frame(q), dtype=float)
        psi = np.linalg.inv(a)
        dpsi = inv_frame_jac(q)
        # [e_a, e_b]^i = psi^j_a d_j psi^i_b - psi^j_b d_j psi^i_a
        lie = np.einsum("ja,ibj->iab", psi, dpsi) - np.einsum("jb,iaj->iab", psi, dpsi)
        return np.einsum("gi,iab->gab", a, lie)

    return AlgebroidChart(
        base_dim=n,
        fiber_rank=n,
        anchor=inv_frame,
        structure=structure,
        label=label or f"hamel(n={n})",
    )
