"""Sector structure of an unbroken finite symmetry.

Given ``G`` acting by ``Ad U(g)`` on the full matrix algebra of a Hilbert
space, the observable algebra is the fixed-point algebra, the Hilbert space
splits into isotypic sectors ``H = (+)_gamma  C^{m_gamma} (x) V_gamma``, and
the center of the observables is spanned by the isotypic projections.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from . import numerics as nx
from .algebra import CPMap, FiniteCStarAlgebra, StateFunctional, center_of
from .errors import InternalInconsistency, InvalidInput, InvalidSection, NotCovariant
from .groups import (GroupAction, GroupDual, UnitaryRep, character_table, fixed_point_algebra,
                     isotypic_projections)

__all__ = [
    "Sector", "SectorDecomposition", "ChargeDistribution", "ChargingChannel",
    "decompose_sectors", "central_decompose_state", "build_charging_channel",
    "verify_adjunction_charges", "realize_charge_vector", "folium_support",
]


@dataclass(frozen=True, eq=False)
class Sector:
    label: str
    multiplicity: int
    irrep_dim: int
    projection: np.ndarray
    isometry: np.ndarray  # columns indexed a*d + i (multiplicity a, irrep i)

    @property
    def rank(self) -> int:
        return self.multiplicity * self.irrep_dim


@dataclass(frozen=True, eq=False)
class SectorDecomposition:
    rep: UnitaryRep
    dual: GroupDual
    observables: FiniteCStarAlgebra
    sectors: tuple[Sector, ...]
    center: FiniteCStarAlgebra
    central_projections: tuple[np.ndarray, ...]

    @property
    def dim(self) -> int:
        return self.rep.dim

    @property
    def labels(self) -> list[str]:
        return [s.label for s in self.sectors]

    @property
    def unitary(self) -> np.ndarray:
        return np.hstack([s.isometry for s in self.sectors])

    def sector(self, label: str) -> Sector:
        for s in self.sectors:
            if s.label == label:
                return s
        raise KeyError(label)

    def deviations(self) -> dict[str, float]:
        """Max deviation of every structural invariant of the decomposition."""
        n = self.dim
        w = self.unitary
        out = {"dimension_count": float(abs(sum(s.rank for s in self.sectors) - n)),
               "unitarity": nx.hs_norm(nx.dagger(w) @ w - np.eye(n))}
        rep_err = 0.0
        for g in range(self.rep.group.order):
            target = np.zeros((n, n), dtype=complex)
            o = 0
            for s in self.sectors:
                gam = self.dual[s.label].matrices[g]
                target[o:o + s.rank, o:o + s.rank] = np.kron(np.eye(s.multiplicity), gam)
                o += s.rank
            rep_err = max(rep_err, nx.hs_norm(nx.dagger(w) @ self.rep(g) @ w - target))
        out["rep_block_form"] = rep_err
        obs_err = 0.0
        for a in self.observables.basis:
            b = nx.dagger(w) @ a @ w
            target = np.zeros_like(b)
            o = 0
            for s in self.sectors:
                m, d = s.multiplicity, s.irrep_dim
                blk = b[o:o + s.rank, o:o + s.rank].reshape(m, d, m, d)
                reduced = np.einsum("aibi->ab", blk) / d
                target[o:o + s.rank, o:o + s.rank] = np.kron(reduced, np.eye(d))
                o += s.rank
            obs_err = max(obs_err, nx.hs_norm(b - target))
        out["observable_block_form"] = obs_err
        proj = self.projection_match()
        out["center_projections"] = proj
        out["center_dimension"] = float(abs(self.center.dim - len(self.sectors)))
        return out

    def projection_match(self) -> float:
        """Distance between minimal central projections and isotypic projections."""
        cps = list(self.central_projections)
        if len(cps) != len(self.sectors):
            return float("inf")
        worst = 0.0
        for s in self.sectors:
            worst = max(worst, min(nx.hs_norm(z - s.projection) for z in cps))
        return worst

    def report(self) -> list[dict]:
        return [{"label": s.label, "multiplicity": s.multiplicity, "irrep_dim": s.irrep_dim,
                 "center_projection_rank": s.rank} for s in self.sectors]


def _check_covariance(act: GroupAction, rep: UnitaryRep):
    alg = act.algebra
    if alg.block_dims is None or len(alg.block_dims) != 1 or alg.ambient_dim != rep.dim:
        raise NotCovariant("the field algebra must be the full matrix algebra of the representation space")
    if act.group.order != rep.group.order or not np.array_equal(act.group.cayley, rep.group.cayley):
        raise NotCovariant("action and representation are over different groups")
    for g in range(rep.group.order):
        u = rep(g)
        for f in alg.basis:
            if not nx.close(act.apply(g, f), u @ f @ nx.dagger(u), 1e-8):
                raise NotCovariant(f"U({g}) does not implement tau_{g}")


def decompose_sectors(act: GroupAction, rep: UnitaryRep, dual: GroupDual | None = None) -> SectorDecomposition:
    """Isotypic decomposition of ``rep`` with explicit intertwining isometries.

    For each irrep ``gamma`` present, ``E_ij = (d/|G|) sum_g conj(gamma(g)_ij) U(g)``
    are matrix units: the range of ``E_00`` is the multiplicity space and
    ``E_i0`` carries it onto the ``i``-th irrep coordinate.
    """
    _check_covariance(act, rep)
    dual = character_table(rep.group) if dual is None else dual
    obs = fixed_point_algebra(act)
    projs = isotypic_projections(rep, dual)
    order = rep.group.order
    sectors = []
    for irr in dual:
        p = projs[irr.label]
        rank = float(np.real(np.trace(p)))
        if rank < 0.5:
            continue
        d = irr.dim
        m = int(round(rank / d))
        units = [d / order * np.einsum("g,gij->ij", irr.matrices[:, i, 0].conj(), rep.matrices)
                 for i in range(d)]
        e00 = (units[0] + nx.dagger(units[0])) / 2
        w, v = np.linalg.eigh(e00)
        mult_space = nx.canonical_span(v[:, w > 0.5])
        if mult_space.shape[1] != m:
            raise InternalInconsistency(
                f"intertwiner space for {irr.label} has dimension {mult_space.shape[1]}, expected {m}")
        cols = [units[i] @ mult_space[:, a] for a in range(m) for i in range(d)]
        sectors.append(Sector(irr.label, m, d, p, np.array(cols).T))
    center, cps = center_of(obs)
    return SectorDecomposition(rep, dual, obs, tuple(sectors), center, tuple(cps))


@dataclass(frozen=True)
class ChargeDistribution:
    """Probability weights over sector labels, in sector order."""

    weights: tuple[tuple[str, float], ...]

    def __post_init__(self):
        vals = [w for _, w in self.weights]
        if any(w < -1e-12 for w in vals):
            raise InvalidInput("charge weights must be non-negative")
        if abs(sum(vals) - 1) > 1e-10:
            raise InvalidInput(f"charge weights sum to {sum(vals):.12g}, expected 1")

    @classmethod
    def from_mapping(cls, labels: Sequence[str], values: Mapping[str, float] | Sequence[float]):
        if isinstance(values, Mapping):
            extra = set(values) - set(labels)
            if extra:
                raise InvalidInput(f"unknown sector labels {sorted(extra)}")
            return cls(tuple((lab, float(values.get(lab, 0.0))) for lab in labels))
        values = list(values)
        if len(values) != len(labels):
            raise InvalidInput("one weight per sector is required")
        return cls(tuple((lab, float(v)) for lab, v in zip(labels, values)))

    def as_dict(self) -> dict[str, float]:
        return dict(self.weights)

    def as_array(self) -> np.ndarray:
        return np.array([w for _, w in self.weights])

    @property
    def labels(self) -> list[str]:
        return [lab for lab, _ in self.weights]


def central_decompose_state(state: StateFunctional, dec: SectorDecomposition):
    """Charge distribution ``mu(gamma) = omega(P_gamma)`` and the sector states.

    Sector states ``omega_gamma = P omega P / mu(gamma)`` are ``None`` where
    ``mu(gamma) <= 1e-12``.
    """
    if state.dim != dec.dim:
        raise InvalidInput("state and decomposition act on different spaces")
    weights, parts = [], {}
    for s in dec.sectors:
        mu = state.expect(s.projection)
        weights.append((s.label, max(mu, 0.0)))
        if mu > 1e-12:
            rho = s.projection @ state.density @ s.projection / mu
            parts[s.label] = StateFunctional((rho + nx.dagger(rho)) / 2, f"{state.label}|{s.label}")
        else:
            parts[s.label] = None
    total = sum(w for _, w in weights)
    weights = [(lab, w / total) for lab, w in weights]
    return ChargeDistribution(tuple(weights)), parts


def reconstruction_error(state: StateFunctional, dec: SectorDecomposition) -> float:
    """Max over the observable basis of ``|sum mu omega_gamma(A) - omega(A)|``."""
    mu, parts = central_decompose_state(state, dec)
    worst = 0.0
    for a in dec.observables.basis:
        approx = sum(w * parts[lab](a) for lab, w in mu.weights if parts[lab] is not None)
        worst = max(worst, abs(approx - state(a)))
    return worst


@dataclass(frozen=True, eq=False)
class ChargingChannel:
    """``Lambda(A)(gamma) = <xi_gamma, A xi_gamma>`` and its dual on charge distributions."""

    decomposition: SectorDecomposition
    vectors: tuple[np.ndarray, ...]

    @property
    def labels(self) -> list[str]:
        return self.decomposition.labels

    def reference_state(self, label: str) -> StateFunctional:
        return StateFunctional.from_vector(self.vectors[self.labels.index(label)], f"ref[{label}]")

    def forward(self, a) -> np.ndarray:
        a = np.asarray(a, dtype=complex)
        return np.array([np.vdot(x, a @ x) for x in self.vectors])

    def as_cpmap(self) -> CPMap:
        n = len(self.vectors)
        return CPMap.from_function(lambda a: np.diag(self.forward(a)), self.decomposition.dim, n)

    def dual(self, nu: ChargeDistribution) -> StateFunctional:
        if nu.labels != self.labels:
            raise InvalidInput("charge distribution is over different sectors")
        rho = sum(w * np.outer(x, x.conj()) for (_, w), x in zip(nu.weights, self.vectors))
        return StateFunctional(rho, "charged")

    def readout(self, state: StateFunctional) -> ChargeDistribution:
        return central_decompose_state(state, self.decomposition)[0]


def build_charging_channel(dec: SectorDecomposition, section: Mapping[str, np.ndarray] | None = None
                           ) -> ChargingChannel:
    """Charging channel from one unit vector per present sector.

    The default section takes the first column of each sector isometry.
    """
    vectors = []
    for s in dec.sectors:
        if section is None:
            x = s.isometry[:, 0]
        else:
            if s.label not in section:
                raise InvalidSection(f"no section vector for sector {s.label}")
            x = np.asarray(section[s.label], dtype=complex).reshape(-1)
        if x.shape != (dec.dim,) or abs(np.linalg.norm(x) - 1) > 1e-9:
            raise InvalidSection(f"section vector for {s.label} is not a unit vector")
        if np.linalg.norm(s.projection @ x - x) > 1e-9:
            raise InvalidSection(f"section vector for {s.label} is not in its sector")
        vectors.append(x)
    return ChargingChannel(dec, tuple(vectors))


def verify_adjunction_charges(state: StateFunctional, nu: ChargeDistribution, ch: ChargingChannel,
                              eps: float = 1e-9) -> dict:
    """Both sides of the charge adjunction: measure equality and support equality."""
    mu = ch.readout(state).as_array()
    target = nu.as_array()
    measure_equal = bool(np.max(np.abs(mu - target)) <= eps)
    support_equal = bool(np.array_equal(mu > eps, target > eps))
    return {"measure_equal": measure_equal, "support_equal": support_equal,
            "implication_holds": (not measure_equal) or support_equal}


def realize_charge_vector(nu: ChargeDistribution, ch: ChargingChannel) -> np.ndarray:
    """``Psi = sum_gamma sqrt(nu_gamma) xi_gamma``."""
    if nu.labels != ch.labels:
        raise InvalidInput("charge distribution is over different sectors")
    psi = sum(np.sqrt(max(w, 0.0)) * x for (_, w), x in zip(nu.weights, ch.vectors))
    return psi / np.linalg.norm(psi)


def folium_support(state: StateFunctional, dec: SectorDecomposition, eps: float = 1e-9) -> list[str]:
    return [s.label for s in dec.sectors if state.expect(s.projection) > eps]
