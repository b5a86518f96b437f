"""Temporal bases and coupling matrices for variational time discretisation.

Two families are supported on each time slab: discontinuous Galerkin in
time of order ``r >= 0`` (trial = test, Lagrange basis at the (r+1)-point
Gauss nodes of the reference interval [0,1]) and continuous Petrov-Galerkin
in time of order ``q >= 1`` (trial basis at {0} plus the q Gauss nodes,
test basis of degree q-1 at the Gauss nodes).  All slab-level integrals
reduce to reference-interval integrals; only the mass-type coupling scales
with the slab length.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def gauss_legendre(k: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on [0, 1].

    Exact for polynomials of degree <= 2k - 1.  Nodes are strictly
    increasing in (0, 1); weights are positive and sum to 1.
    """
    if k < 1:
        raise ValueError(f"need at least one quadrature point, got k={k}")
    x, w = np.polynomial.legendre.leggauss(k)
    return (x + 1.0) / 2.0, w / 2.0


class LagrangeBasis:
    """Lagrange basis on a 1D node set, evaluated in barycentric form.

    Derivatives are exact: the differentiation matrix D with
    D[i, j] = l_j'(x_i) is formed analytically from the barycentric
    weights, and l_j' (a polynomial of one degree less) is re-expanded
    in the same basis, so derivative values at arbitrary points come
    from ``values(t) @ D``.
    """

    def __init__(self, nodes):
        self.nodes = np.asarray(nodes, dtype=float)
        if self.nodes.ndim != 1 or self.nodes.size == 0:
            raise ValueError("nodes must be a non-empty 1D array")
        if np.unique(self.nodes).size != self.nodes.size:
            raise ValueError("nodes must be distinct")
        diff = self.nodes[:, None] - self.nodes[None, :]
        np.fill_diagonal(diff, 1.0)
        self.bary_weights = 1.0 / np.prod(diff, axis=1)
        n = self.nodes.size
        D = np.zeros((n, n))
        for i in range(n):
            for j in range(n):
                if i != j:
                    D[i, j] = (self.bary_weights[j] / self.bary_weights[i]) / (
                        self.nodes[i] - self.nodes[j]
                    )
            D[i, i] = -np.sum(D[i, :])
        self.diff_matrix = D

    @property
    def size(self) -> int:
        return self.nodes.size

    def values(self, t) -> np.ndarray:
        """Evaluate all basis functions at points ``t``; shape (*t, n)."""
        t = np.asarray(t, dtype=float)
        scalar = t.ndim == 0
        tt = np.atleast_1d(t)
        d = tt[:, None] - self.nodes[None, :]
        exact = np.abs(d) < 1e-14
        with np.errstate(divide="ignore", invalid="ignore"):
            c = self.bary_weights[None, :] / d
            vals = c / np.sum(c, axis=1, keepdims=True)
        hit = exact.any(axis=1)
        if np.any(hit):
            vals[hit] = exact[hit].astype(float)
        return vals[0] if scalar else vals

    def derivs(self, t) -> np.ndarray:
        """Evaluate all first derivatives at points ``t``; shape (*t, n)."""
        return self.values(t) @ self.diff_matrix


@dataclass(frozen=True)
class SchemeLabel:
    """Per-slab time discretisation label: kind 'dg' or 'cg' plus order."""

    kind: str
    order: int

    def __post_init__(self):
        if self.kind not in ("dg", "cg"):
            raise ValueError(f"unknown scheme kind {self.kind!r}")
        if self.kind == "dg" and self.order < 0:
            raise ValueError("dg order must be >= 0")
        if self.kind == "cg" and self.order < 1:
            raise ValueError("cg order must be >= 1")

    @property
    def trial_count(self) -> int:
        """Number of temporal trial coefficients per slab."""
        return self.order + 1

    @property
    def unknown_count(self) -> int:
        """Temporal coefficient blocks actually solved for per slab."""
        return self.order + 1 if self.kind == "dg" else self.order

    def __str__(self):
        return f"{self.kind}{self.order}"

    @staticmethod
    def parse(text: str) -> "SchemeLabel":
        text = text.strip().lower()
        if len(text) < 3 or text[:2] not in ("dg", "cg") or not text[2:].isdigit():
            raise ValueError(f"cannot parse scheme label {text!r}")
        return SchemeLabel(text[:2], int(text[2:]))


def trial_nodes(label: SchemeLabel) -> np.ndarray:
    """Reference-interval node positions of the trial basis."""
    if label.kind == "dg":
        return gauss_legendre(label.order + 1)[0]
    return np.concatenate(([0.0], gauss_legendre(label.order)[0]))


@dataclass(frozen=True)
class TimeCoupling:
    """Per-slab temporal coupling assemblies.

    ``alpha[i, j]`` couples test function i with the derivative of trial
    function j (reference-interval integral, dimensionless); ``beta``
    couples test i with trial j and carries one factor of the slab length.
    For dG slabs, ``gamma_minus[i]`` is the test trace at the slab start
    and ``gamma_plus[i, j]`` the product of test and trial start traces.
    """

    label: SchemeLabel
    tau: float
    alpha: np.ndarray
    beta: np.ndarray
    gamma_minus: np.ndarray | None
    gamma_plus: np.ndarray | None
    trial_nodes: np.ndarray = field(repr=False)


def dg_time_matrices(r: int, tau: float) -> TimeCoupling:
    """Coupling matrices for a dG(r) slab of length ``tau``.

    With the Gauss-node Lagrange trial basis, ``beta`` is exactly
    ``tau * diag(w)`` (the integrand degree 2r is within quadrature
    exactness 2r+1).
    """
    label = SchemeLabel("dg", r)
    if tau <= 0.0:
        raise ValueError(f"slab length must be positive, got {tau}")
    nodes = trial_nodes(label)
    basis = LagrangeBasis(nodes)
    qx, qw = gauss_legendre(r + 2)
    vals = basis.values(qx)
    ders = basis.derivs(qx)
    alpha = vals.T @ (qw[:, None] * ders)
    beta = tau * (vals.T @ (qw[:, None] * vals))
    g = basis.values(0.0)
    return TimeCoupling(
        label=label,
        tau=tau,
        alpha=alpha,
        beta=beta,
        gamma_minus=g.copy(),
        gamma_plus=np.outer(g, g),
        trial_nodes=nodes,
    )


def cg_time_matrices(q: int, tau: float) -> TimeCoupling:
    """Coupling matrices for a cG(q) slab of length ``tau``.

    ``alpha`` and ``beta`` have shape (q, q+1); column j=0 corresponds to
    the slab-start trial node, which time marching supplies as known data.
    Integrals use q+1 Gauss points (exact up to degree 2q+1, covering the
    degree 2q-1 integrands).
    """
    label = SchemeLabel("cg", q)
    if tau <= 0.0:
        raise ValueError(f"slab length must be positive, got {tau}")
    tnodes = trial_nodes(label)
    trial = LagrangeBasis(tnodes)
    test_nodes, _ = gauss_legendre(q)
    test = LagrangeBasis(test_nodes)
    qx, qw = gauss_legendre(q + 1)
    test_vals = test.values(qx)
    trial_vals = trial.values(qx)
    trial_ders = trial.derivs(qx)
    alpha = test_vals.T @ (qw[:, None] * trial_ders)
    beta = tau * (test_vals.T @ (qw[:, None] * trial_vals))
    return TimeCoupling(
        label=label,
        tau=tau,
        alpha=alpha,
        beta=beta,
        gamma_minus=None,
        gamma_plus=None,
        trial_nodes=tnodes,
    )


def time_coupling(label: SchemeLabel, tau: float) -> TimeCoupling:
    if label.kind == "dg":
        return dg_time_matrices(label.order, tau)
    return cg_time_matrices(label.order, tau)


def eval_trial(label: SchemeLabel, coefficients, that: float) -> np.ndarray:
    """Evaluate the slab trial representation at reference time ``that``.

    ``coefficients`` is an array of shape (m, ...) with one row per trial
    node (m = r+1 for dG, q+1 for cG).  Evaluation at ``that = 1`` gives
    the slab-end trace used for inter-slab transfer; for cG this is an
    extrapolation since the trial nodes exclude the slab end.
    """
    coefficients = np.asarray(coefficients, dtype=float)
    nodes = trial_nodes(label)
    if coefficients.shape[0] != nodes.size:
        raise ValueError(
            f"{label} expects {nodes.size} coefficient rows, "
            f"got {coefficients.shape[0]}"
        )
    w = LagrangeBasis(nodes).values(float(that))
    return np.tensordot(w, coefficients, axes=(0, 0))


class TimeGrid:
    """Partition of (0, T) into slabs with a scheme label per slab."""

    def __init__(self, boundaries, labels):
        boundaries = np.asarray(boundaries, dtype=float)
        if boundaries.ndim != 1 or boundaries.size < 2:
            raise ValueError("need at least one slab")
        if boundaries[0] != 0.0:
            raise ValueError("time grid must start at 0")
        if np.any(np.diff(boundaries) <= 0.0):
            raise ValueError("slab boundaries must be strictly increasing")
        labels = list(labels)
        if len(labels) != boundaries.size - 1:
            raise ValueError(
                f"{boundaries.size - 1} slabs but {len(labels)} scheme labels"
            )
        self.boundaries = boundaries
        self.labels = labels

    @property
    def final_time(self) -> float:
        return float(self.boundaries[-1])

    @property
    def num_slabs(self) -> int:
        return self.boundaries.size - 1

    def tau(self, n: int) -> float:
        """Length of slab n (1-based, matching the marching index)."""
        return float(self.boundaries[n] - self.boundaries[n - 1])

    @property
    def tau_max(self) -> float:
        return float(np.max(np.diff(self.boundaries)))

    def slab_times(self, n: int, label=None) -> np.ndarray:
        """Physical times of the trial nodes of slab n."""
        label = label or self.labels[n - 1]
        return self.boundaries[n - 1] + self.tau(n) * trial_nodes(label)

    @staticmethod
    def uniform(final_time: float, num_slabs: int, labels) -> "TimeGrid":
        if final_time <= 0.0 or num_slabs < 1:
            raise ValueError("final time and slab count must be positive")
        if isinstance(labels, SchemeLabel):
            labels = [labels] * num_slabs
        return TimeGrid(np.linspace(0.0, final_time, num_slabs + 1), labels)
