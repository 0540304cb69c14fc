"""Independent verification paths for the degree score.

Two facts make the graph degree trustworthy as a normality score, and both
are checkable numerically on small instances:

  * spectral route: expanding the all-ones vector in the eigenbasis of the
    kernel matrix and weighting by eigenvalues reproduces the degree
    vector, so the degree equals an eigenvalue-weighted combination of
    (soft) cluster indicators;
  * discrepancy route: the squared maximum mean discrepancy between the
    dataset and a single sample drawn from it reduces to a closed form in
    which the sample's degree is the only non-constant term, so ranking by
    discrepancy equals ranking by (negated) degree.

The eigensolver here is a self-contained cyclic Jacobi so the spectral
check does not depend on the library paths it is checking.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .errors import EmptyDataset, IndexOutOfRange, NoConvergence, ZeroVector
from .kernel import DegreeVector, KernelMatrix, KernelParams, degree

_JACOBI_MAX_SWEEPS = 100
_JACOBI_TOL = 1e-12


@dataclass(frozen=True)
class EigenSystem:
    """Full symmetric eigendecomposition, eigenvalues descending.

    eigenvectors holds unit-norm eigenvectors as columns, aligned with
    eigenvalues.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def _off_diagonal_norm(a: np.ndarray) -> float:
    off = a - np.diag(np.diag(a))
    return float(np.linalg.norm(off))


def symmetric_eigen(
    k: KernelMatrix,
    tol: float = _JACOBI_TOL,
    max_sweeps: int = _JACOBI_MAX_SWEEPS,
) -> EigenSystem:
    """Cyclic Jacobi eigendecomposition of a symmetric matrix.

    Sweeps rotate away off-diagonal entries until the off-diagonal
    Frobenius norm falls below tol * ||K||_F; raises NoConvergence after
    max_sweeps. Adequate for the oracle-scale matrices this module uses.
    """
    a = np.array(k.values, dtype=np.float64, copy=True)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError("matrix must be square")
    v = np.eye(n)
    norm = float(np.linalg.norm(a))
    # entries this small cannot push the off-diagonal norm above target
    skip = tol * norm / (10.0 * max(n, 1))
    for _ in range(max_sweeps):
        if _off_diagonal_norm(a) <= tol * norm:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= skip:
                    continue
                tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, tau) / (abs(tau) + math.hypot(1.0, tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                rot = np.array([[c, s], [-s, c]])
                a[:, [p, q]] = a[:, [p, q]] @ rot
                a[[p, q], :] = rot.T @ a[[p, q], :]
                v[:, [p, q]] = v[:, [p, q]] @ rot
    else:
        if _off_diagonal_norm(a) > tol * norm:
            raise NoConvergence(
                f"Jacobi sweeps exhausted at off-diagonal norm "
                f"{_off_diagonal_norm(a):.3e} (target {tol * norm:.3e})"
            )
    eigenvalues = np.diag(a).copy()
    order = np.argsort(-eigenvalues, kind="stable")
    return EigenSystem(eigenvalues=eigenvalues[order], eigenvectors=v[:, order])


def rayleigh_quotient(k: KernelMatrix, x) -> float:
    """(x^T K x) / (x^T x); for an eigenvector this is its eigenvalue."""
    x = np.asarray(x, dtype=np.float64).ravel()
    denom = float(x @ x)
    if denom == 0.0:
        raise ZeroVector("Rayleigh quotient requires a nonzero vector")
    return float(x @ k.values @ x) / denom


def spectral_degree(k: KernelMatrix) -> DegreeVector:
    """Degree vector reconstructed through the eigendecomposition.

    Computes sum_i lambda_i * psi_i * (psi_i^T 1) rather than row sums;
    agreement with the blocked row-sum path is the spectral identity the
    test suite asserts.
    """
    es = symmetric_eigen(k)
    ones = np.ones(k.n)
    weights = es.eigenvectors.T @ ones
    values = es.eigenvectors @ (es.eigenvalues * weights)
    return DegreeVector(values=values, params=k.params)


def _pairwise_kernel(a: np.ndarray, b: np.ndarray, params: KernelParams) -> np.ndarray:
    """Direct-difference kernel block; local so the oracle stays
    independent of the blocked production path."""
    d = a.shape[1]
    d2 = ((a[:, None, :] - b[None, :, :]) ** 2).sum(axis=-1)
    dim = d if params.dim_normalize else 1
    return np.exp(-d2 / (2.0 * params.sigma**2 * dim))


def mmd2_empirical(x: Dataset, y: Dataset, params: KernelParams) -> float:
    """Unbiased squared-MMD estimate between two sample sets.

    Three terms: within-X mean kernel (i != j), within-Y mean kernel, and
    twice the cross mean. For a single-sample Y the middle term's
    1/(n(n-1)) is undefined; it is defined as k(y1, y1) = 1 instead (the
    RBF self-similarity). The estimate is unbiased and may be negative.
    """
    xm = x.features
    yn = y.features
    m, n = xm.shape[0], yn.shape[0]
    if m < 2:
        raise EmptyDataset(f"reference set needs at least 2 samples, got {m}")
    if n < 1:
        raise EmptyDataset("comparison set is empty")
    if xm.shape[1] != yn.shape[1]:
        raise ValueError("sample sets must share a feature dimension")
    kxx = _pairwise_kernel(xm, xm, params)
    term1 = float(kxx.sum() - np.trace(kxx)) / (m * (m - 1))
    if n == 1:
        term2 = 1.0
    else:
        kyy = _pairwise_kernel(yn, yn, params)
        term2 = float(kyy.sum() - np.trace(kyy)) / (n * (n - 1))
    kxy = _pairwise_kernel(xm, yn, params)
    term3 = 2.0 * float(kxy.sum()) / (m * n)
    return term1 + term2 - term3


def mmd2_single(x: Dataset, l: int, params: KernelParams) -> float:
    """Squared MMD between a dataset and one of its own samples.

    Closed form using only degrees: (d_avg - 1)/(m - 1) + 1 - 2 d_l / m,
    where d_l is sample l's degree (self-term included) and d_avg the mean
    degree. Equal to mmd2_empirical(x, {x_l}) and monotone decreasing in
    the sample's degree.
    """
    m = x.n_samples
    if m < 2:
        raise EmptyDataset(f"dataset needs at least 2 samples, got {m}")
    if not 0 <= l < m:
        raise IndexOutOfRange(f"sample index {l} outside [0, {m})")
    nu = degree(x, params).values
    d_avg = float(nu.mean())
    return (d_avg - 1.0) / (m - 1.0) + 1.0 - 2.0 * float(nu[l]) / m


# --- identity suite (used by the CLI verify command) ---


@dataclass(frozen=True)
class IdentityCheck:
    name: str
    max_residual: float
    tolerance: float
    passed: bool


def run_identity_suite(seed: int = 0, inject_fault: bool = False) -> list[IdentityCheck]:
    """Run every verifiable identity on freshly generated datasets.

    inject_fault asymmetrically perturbs one kernel entry of the first
    dataset; the symmetry check must then fail, which gives the suite a
    negative control.
    """
    from .kernel import kernel_matrix  # local import to keep module loads light

    rng = np.random.default_rng(seed)
    cases = [(20, 2, 0.15), (40, 5, 0.5), (32, 3, 0.05)]
    datasets = []
    for n, d, sigma in cases:
        ds = Dataset.from_features(rng.normal(size=(n, d)))
        datasets.append((ds, KernelParams(sigma=sigma)))

    matrices = [kernel_matrix(ds, p) for ds, p in datasets]
    if inject_fault:
        matrices[0].values[0, 1] += 1e-3

    checks: list[IdentityCheck] = []

    def record(name: str, residual: float, tolerance: float):
        checks.append(
            IdentityCheck(
                name=name,
                max_residual=residual,
                tolerance=tolerance,
                passed=residual <= tolerance,
            )
        )

    symmetry = diagonal = value_range = 0.0
    spectral = completeness = 0.0
    first_term = third_term = 0.0
    for k, (ds, p) in zip(matrices, datasets):
        symmetry = max(symmetry, float(np.abs(k.values - k.values.T).max()))
        diagonal = max(diagonal, float(np.abs(np.diag(k.values) - 1.0).max()))
        value_range = max(
            value_range, float(k.values.max() - 1.0), float(-k.values.min()), 0.0
        )
        blocked = degree(ds, p, block_size=7).values
        try:
            spectral = max(
                spectral, float(np.abs(spectral_degree(k).values - blocked).max())
            )
            es = symmetric_eigen(k)
            recombined = es.eigenvectors @ (es.eigenvectors.T @ np.ones(k.n))
            completeness = max(completeness, float(np.abs(recombined - 1.0).max()))
        except NoConvergence:
            # an asymmetric matrix has no orthogonal eigendecomposition
            spectral = completeness = math.inf
        m = k.n
        nu = k.values.sum(axis=1)
        lhs1 = (k.values.sum() - np.trace(k.values)) / (m * (m - 1))
        first_term = max(first_term, abs(lhs1 - (nu.mean() - 1.0) / (m - 1.0)))
        lhs3 = 2.0 * k.values[:, 0].sum() / m
        third_term = max(third_term, abs(lhs3 - 2.0 * nu[0] / m))
    record("kernel-symmetry", symmetry, 0.0)
    record("kernel-diagonal", diagonal, 0.0)
    record("kernel-range", value_range, 0.0)
    record("spectral-identity", spectral, 1e-8)
    record("eigenbasis-completeness", completeness, 1e-8)
    record("mmd-first-term", float(first_term), 1e-12)
    record("mmd-third-term", float(third_term), 1e-12)

    reduction = 0.0
    inversions = 0
    for ds, p in datasets:
        m = ds.n_samples
        singles = np.array([mmd2_single(ds, l, p) for l in range(m)])
        for l in range(m):
            y = Dataset.from_features(ds.features[l : l + 1])
            reduction = max(reduction, abs(mmd2_empirical(ds, y, p) - singles[l]))
        nu = degree(ds, p).values
        # duality: a strictly higher degree must never give a strictly
        # higher discrepancy (rounding may tie one side, never flip it)
        higher_degree = nu[:, None] > nu[None, :]
        higher_mmd = singles[:, None] > singles[None, :]
        inversions += int(np.count_nonzero(higher_degree & higher_mmd))
    record("mmd-reduction", float(reduction), 1e-12)
    record("mmd-degree-rank-duality", float(inversions), 0.0)

    return checks
