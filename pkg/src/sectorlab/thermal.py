"""Thermal reference families on a finite classifying grid and the selection criteria built on them.

The matrix ``M[i, k] = omega_{beta_i}(Phi_k)`` carries everything: the
classical-to-quantum channel is ``rho -> rho @ M`` on the chosen observable
subspace, and every thermality question is a small linear program over it.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy.optimize import linprog, nnls

from . import numerics as nx
from .algebra import StateFunctional
from .errors import InvalidInput, NoExtension, NotInK

__all__ = [
    "FEAS_TOL", "ClassifyingGrid", "ReferenceStateFamily", "ObservableSubspace", "ThermalMeasure",
    "SignedMeasureSplit", "DiscriminationReport", "NormBoundResult", "thermal_function", "cq_channel",
    "moment_matrix", "check_discrimination", "invert_on_K", "is_S_thermal", "check_norm_bound",
    "signed_extension", "classify_deviation", "maximal_thermal_subspace", "states_equivalent",
    "verify_adjunction_thermal",
]

FEAS_TOL = 1e-8
_HIGHS = {"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10}


@dataclass(frozen=True)
class ClassifyingGrid:
    betas: tuple[float, ...]
    extras: tuple[tuple[float, ...], ...] = ()
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        betas = tuple(float(b) for b in self.betas)
        if not betas or any(not np.isfinite(b) or b <= 0 for b in betas):
            raise InvalidInput("grid needs at least one finite inverse temperature > 0")
        extras = tuple(tuple(float(v) for v in e) for e in self.extras) or tuple(() for _ in betas)
        if len(extras) != len(betas):
            raise InvalidInput("one extras tuple per grid point")
        pts = list(zip(betas, extras))
        if len(set(pts)) != len(pts):
            raise InvalidInput("grid points must be distinct")
        labels = tuple(self.labels) or tuple(f"beta={b:g}" + (f",mu={list(e)}" if e else "") for b, e in pts)
        if len(labels) != len(betas):
            raise InvalidInput("one label per grid point")
        object.__setattr__(self, "betas", betas)
        object.__setattr__(self, "extras", extras)
        object.__setattr__(self, "labels", labels)

    def __len__(self):
        return len(self.betas)


@dataclass(frozen=True, eq=False)
class ReferenceStateFamily:
    """Gibbs states ``exp(-beta H)/Z`` at every grid point (extras carry no dynamics)."""

    hamiltonian: np.ndarray
    grid: ClassifyingGrid
    densities: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        h = np.asarray(self.hamiltonian, dtype=complex)
        if h.ndim != 2 or h.shape[0] != h.shape[1] or not np.all(np.isfinite(h)):
            raise InvalidInput("Hamiltonian must be a finite square matrix")
        if not nx.close(h, nx.dagger(h), 1e-9):
            raise InvalidInput("Hamiltonian must be Hermitian")
        h = (h + nx.dagger(h)) / 2
        e, v = np.linalg.eigh(h)
        dens = []
        for b in self.grid.betas:
            w = np.exp(-b * (e - e[0]))
            w /= w.sum()
            if w.min() <= 0:
                raise InvalidInput(f"Gibbs state at beta={b} is not full rank in double precision")
            dens.append((v * w) @ nx.dagger(v))
        object.__setattr__(self, "hamiltonian", h)
        object.__setattr__(self, "densities", np.array(dens))

    @property
    def dim(self) -> int:
        return self.hamiltonian.shape[0]

    def __len__(self):
        return len(self.grid)

    def state(self, i: int) -> StateFunctional:
        return StateFunctional(self.densities[i], self.grid.labels[i])


@dataclass(frozen=True, eq=False)
class ObservableSubspace:
    basis: tuple[np.ndarray, ...]
    names: tuple[str, ...] = ()

    def __post_init__(self):
        mats = tuple(np.asarray(b, dtype=complex) for b in self.basis)
        if not mats:
            raise InvalidInput("observable subspace needs at least one element")
        n = mats[0].shape[0]
        for m in mats:
            if m.shape != (n, n) or not nx.close(m, nx.dagger(m), 1e-9):
                raise InvalidInput("observable basis elements must be Hermitian and equally sized")
        real = np.array([np.concatenate([m.real.ravel(), m.imag.ravel()]) for m in mats]).T
        s = np.linalg.svd(real, compute_uv=False)
        if s[-1] <= 1e-9 * max(1.0, s[0]):
            raise InvalidInput("observable basis is linearly dependent")
        eye = np.eye(n).ravel()
        coef, *_ = np.linalg.lstsq(real, np.concatenate([eye, np.zeros(n * n)]), rcond=None)
        if np.linalg.norm(real @ coef - np.concatenate([eye, np.zeros(n * n)])) > 1e-9:
            raise InvalidInput("identity must lie in the observable subspace")
        names = tuple(self.names) or tuple(f"phi{k}" for k in range(len(mats)))
        object.__setattr__(self, "basis", mats)
        object.__setattr__(self, "names", names)

    @property
    def dim(self) -> int:
        return len(self.basis)

    def element(self, coefficients) -> np.ndarray:
        return np.tensordot(np.asarray(coefficients, dtype=float), np.array(self.basis), 1)

    def contains(self, other: "ObservableSubspace") -> bool:
        real = lambda ms: np.array([np.concatenate([m.real.ravel(), m.imag.ravel()]) for m in ms]).T
        a, b = real(self.basis), real(other.basis)
        coef, *_ = np.linalg.lstsq(a, b, rcond=None)
        return bool(np.linalg.norm(a @ coef - b) <= 1e-9 * max(1.0, np.linalg.norm(b)))


def _probability(w, what: str) -> np.ndarray:
    w = np.asarray(w, dtype=float).reshape(-1)
    if np.any(~np.isfinite(w)) or w.min(initial=0) < -1e-12 or abs(w.sum() - 1) > 1e-10:
        raise InvalidInput(f"{what} must be non-negative and sum to one")
    return w


@dataclass(frozen=True, eq=False)
class ThermalMeasure:
    weights: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "weights", _probability(self.weights, "thermal measure"))

    def mean(self, grid: ClassifyingGrid) -> float:
        return float(self.weights @ np.array(grid.betas))

    def variance(self, grid: ClassifyingGrid) -> float:
        b = np.array(grid.betas)
        return float(self.weights @ (b - self.mean(grid)) ** 2)

    def as_dict(self, grid: ClassifyingGrid) -> dict[str, float]:
        return dict(zip(grid.labels, self.weights.tolist()))


@dataclass(frozen=True, eq=False)
class SignedMeasureSplit:
    nu_plus: np.ndarray
    nu_minus: np.ndarray

    def __post_init__(self):
        for name in ("nu_plus", "nu_minus"):
            v = np.asarray(getattr(self, name), dtype=float)
            if v.min(initial=0) < -1e-12:
                raise InvalidInput(f"{name} must be non-negative")
            object.__setattr__(self, name, np.clip(v, 0, None))

    @property
    def nu(self) -> np.ndarray:
        return self.nu_plus - self.nu_minus

    @property
    def negative_mass(self) -> float:
        return float(self.nu_minus.sum())


def thermal_function(fam: ReferenceStateFamily, a) -> np.ndarray:
    """``C(A)(beta_i) = omega_{beta_i}(A)``; real for Hermitian ``A``."""
    a = np.asarray(a, dtype=complex)
    if a.shape != (fam.dim, fam.dim):
        raise InvalidInput("observable dimension does not match the Hamiltonian")
    vals = np.einsum("iab,ba->i", fam.densities, a)
    return vals.real if nx.close(a, nx.dagger(a), 1e-9) else vals


def cq_channel(fam: ReferenceStateFamily, rho: ThermalMeasure | Sequence[float]) -> StateFunctional:
    w = rho.weights if isinstance(rho, ThermalMeasure) else _probability(rho, "thermal measure")
    if len(w) != len(fam):
        raise InvalidInput("measure and grid have different sizes")
    d = np.tensordot(w, fam.densities, 1)
    return StateFunctional((d + nx.dagger(d)) / 2, "C*(rho)")


def moment_matrix(fam: ReferenceStateFamily, s: ObservableSubspace) -> np.ndarray:
    if s.basis[0].shape != (fam.dim, fam.dim):
        raise InvalidInput("observables and Hamiltonian have different dimensions")
    return np.array([thermal_function(fam, phi) for phi in s.basis]).T


def _moments(state: StateFunctional, s: ObservableSubspace) -> np.ndarray:
    if state.dim != s.basis[0].shape[0]:
        raise InvalidInput("state and observables have different dimensions")
    return np.array([state.expect(phi) for phi in s.basis])


@dataclass(frozen=True)
class DiscriminationReport:
    discriminates: bool  # rho -> rho(C(Phi_k)) injective on measures
    separates_points: bool
    rank: int
    grid_size: int
    condition: float

    def __bool__(self):
        return self.discriminates


def check_discrimination(fam: ReferenceStateFamily, s: ObservableSubspace, rtol: float = 1e-9) -> DiscriminationReport:
    m = moment_matrix(fam, s)
    sv = np.linalg.svd(m, compute_uv=False)
    rank = int(np.sum(sv > rtol * sv[0]))
    n = len(fam)
    cond = float(sv[0] / sv[n - 1]) if len(sv) >= n and sv[n - 1] > 0 else float("inf")
    sep = all(np.linalg.norm(m[i] - m[j]) > 1e-9 for i in range(n) for j in range(i + 1, n))
    return DiscriminationReport(rank == n, sep, rank, n, cond)


def invert_on_K(fam: ReferenceStateFamily, state: StateFunctional, s: ObservableSubspace,
                tol: float = FEAS_TOL) -> ThermalMeasure:
    """Unique ``rho`` with ``C*(rho) = omega`` on ``span(S)``."""
    if not check_discrimination(fam, s):
        raise InvalidInput("observables do not discriminate the grid; the inverse is not unique")
    m = moment_matrix(fam, s)
    w = _moments(state, s)
    lam = max(1.0, float(np.abs(m).max()))
    a = np.vstack([m.T, lam * np.ones((1, len(fam)))])
    rho, _ = nnls(a, np.concatenate([w, [lam]]), maxiter=50 * len(fam))
    resid = max(float(np.abs(m.T @ rho - w).max()), abs(rho.sum() - 1))
    if resid > tol:
        raise NotInK(f"state is not a grid mixture on the observables (residual {resid:.3g})")
    return ThermalMeasure(rho / rho.sum())


def _lp(c, a_eq=None, b_eq=None, a_ub=None, b_ub=None, bounds=(0, None)):
    return linprog(c, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=b_eq, bounds=bounds,
                   method="highs", options=_HIGHS)


def is_S_thermal(fam: ReferenceStateFamily, state: StateFunctional, s: ObservableSubspace,
                 tol: float = FEAS_TOL) -> ThermalMeasure | None:
    """Witness ``rho >= 0`` with ``rho @ M = omega(S)``, or ``None``.

    Among feasible witnesses the one with least moment dispersion is
    returned, so a grid Gibbs state yields its point mass.
    """
    m = moment_matrix(fam, s)
    w = _moments(state, s)
    n = len(fam)
    a_eq = np.vstack([m.T, np.ones((1, n))])
    b_eq = np.concatenate([w, [1.0]])
    cost = np.sum((m - w) ** 2, axis=1)
    res = _lp(cost, a_eq, b_eq)
    if res.status != 0:
        return None
    rho = np.clip(res.x, 0, None)
    if np.abs(a_eq @ rho - b_eq).max() > tol:
        return None
    return ThermalMeasure(rho / rho.sum())


@dataclass(frozen=True, eq=False)
class NormBoundResult:
    holds: bool
    optimum: float
    bounded: bool
    certificate: np.ndarray | None  # Phi violating the bound, normalized to omega(Phi) = 1 when unbounded
    coefficients: np.ndarray | None

    def report(self) -> dict:
        return {"norm_bound_ok": self.holds, "optimum": self.optimum, "bounded": self.bounded,
                "certificate_coefficients": None if self.coefficients is None else self.coefficients.tolist()}


def check_norm_bound(fam: ReferenceStateFamily, state: StateFunctional, s: ObservableSubspace,
                     subset: Sequence[int] | None = None) -> NormBoundResult:
    """Does ``|omega(Phi)| <= max_{beta in B} |omega_beta(Phi)|`` hold on ``span(S)``?"""
    idx = list(range(len(fam))) if subset is None else sorted(set(int(i) for i in subset))
    if not idx or idx[0] < 0 or idx[-1] >= len(fam):
        raise InvalidInput("subset must be a non-empty list of grid indices")
    mb = moment_matrix(fam, s)[idx]
    w = _moments(state, s)
    # semi-norm directions: C(Phi) = 0 on B but omega(Phi) != 0
    null = nx.null_space(mb.astype(complex)).real
    if null.size:
        d = null @ (null.T @ w)
        if abs(w @ d) > 1e-9 * max(1.0, np.linalg.norm(w)):
            d = d / (w @ d)
            return NormBoundResult(False, float("inf"), False, s.element(d), d)
    res = _lp(-w, a_ub=np.vstack([mb, -mb]), b_ub=np.ones(2 * len(idx)), bounds=(None, None))
    if res.status == 3:
        return NormBoundResult(False, float("inf"), False, None, None)
    if res.status != 0:
        raise InvalidInput(f"norm-bound program failed: {res.message}")
    opt = float(-res.fun)
    ok = opt <= 1 + FEAS_TOL
    return NormBoundResult(ok, opt, True, None if ok else s.element(res.x), None if ok else res.x)


def signed_extension(fam: ReferenceStateFamily, state: StateFunctional, s: ObservableSubspace) -> SignedMeasureSplit:
    """``nu = nu+ - nu-`` reproducing ``omega`` on ``S`` with least negative mass."""
    m = moment_matrix(fam, s)
    w = _moments(state, s)
    n = len(fam)
    a_eq = np.hstack([m.T, -m.T])
    res = _lp(np.concatenate([np.zeros(n), np.ones(n)]), a_eq, w)
    if res.status != 0 or np.abs(a_eq @ res.x - w).max() > FEAS_TOL:
        raise NoExtension("no signed grid measure reproduces the state on the observables")
    plus, minus = res.x[:n], res.x[n:]
    # a second pass pins the positive part to the least-dispersion representative
    mass = float(minus.sum())
    cost = np.concatenate([np.sum((m - w) ** 2, axis=1), np.zeros(n)])
    res2 = _lp(cost, np.vstack([a_eq, np.concatenate([np.zeros(n), np.ones(n)])[None]]),
               np.concatenate([w, [mass]]))
    if res2.status == 0 and np.abs(a_eq @ res2.x - w).max() <= FEAS_TOL:
        plus, minus = res2.x[:n], res2.x[n:]
    common = np.minimum(plus, minus)
    return SignedMeasureSplit(plus - common, minus - common)


def states_equivalent(a: StateFunctional, b: StateFunctional, s: ObservableSubspace, tol: float = 1e-9) -> bool:
    return bool(np.abs(_moments(a, s) - _moments(b, s)).max() <= tol)


def maximal_thermal_subspace(fam: ReferenceStateFamily, state: StateFunctional,
                             chain: Sequence[ObservableSubspace]) -> dict:
    """Largest chain index at which the state is thermal (``-1`` if none)."""
    for lo, hi in zip(chain, chain[1:]):
        if not hi.contains(lo) or hi.dim <= lo.dim:
            raise InvalidInput("chain must be strictly nested")
    flags = [is_S_thermal(fam, state, s) is not None for s in chain]
    best = max((k for k, f in enumerate(flags) if f), default=-1)
    monotone = all(flags[:best + 1])
    return {"max_thermal_index": best, "feasible": flags, "monotone": monotone}


def classify_deviation(fam: ReferenceStateFamily, states: Mapping[str, StateFunctional],
                       s: ObservableSubspace) -> dict:
    """Sources of non-thermality across sites.

    a: variation of the fitted mean inverse temperature across sites;
    b: per-site variance of the fitted measure;
    c: per-site negative mass needed by a signed extension.
    """
    grid = fam.grid
    sites = {}
    for name, st in states.items():
        rho = is_S_thermal(fam, st, s)
        if rho is not None:
            sites[name] = {"thermal": True, "mean_beta": rho.mean(grid), "variance": rho.variance(grid),
                           "nu_minus_mass": 0.0}
            continue
        try:
            split = signed_extension(fam, st, s)
        except NoExtension:
            sites[name] = {"thermal": False, "mean_beta": None, "variance": None, "nu_minus_mass": None}
            continue
        plus = split.nu_plus / split.nu_plus.sum()
        fitted = ThermalMeasure(plus)
        sites[name] = {"thermal": False, "mean_beta": fitted.mean(grid), "variance": fitted.variance(grid),
                       "nu_minus_mass": split.negative_mass}
    means = [v["mean_beta"] for v in sites.values() if v["mean_beta"] is not None]
    return {
        "sites": sites,
        "a": {"mean_beta": {k: v["mean_beta"] for k, v in sites.items()},
              "spread": float(max(means) - min(means)) if means else 0.0},
        "b": {k: v["variance"] for k, v in sites.items()},
        "c": {k: v["nu_minus_mass"] for k, v in sites.items()},
    }


def verify_adjunction_thermal(fam: ReferenceStateFamily, state: StateFunctional,
                              rho: ThermalMeasure | Sequence[float], s: ObservableSubspace) -> dict:
    """``omega ~_S C*(rho)`` versus ``rho`` lying in the class of the signed inverse images of ``omega``."""
    rho = rho if isinstance(rho, ThermalMeasure) else ThermalMeasure(np.asarray(rho, dtype=float))
    m = moment_matrix(fam, s)
    left = states_equivalent(state, cq_channel(fam, rho), s)
    try:
        nu = signed_extension(fam, state, s).nu
        right = bool(np.abs(nu @ m - rho.weights @ m).max() <= 1e-9)
    except NoExtension:
        right = False
    return {"left": left, "right": right, "holds": left == right}
