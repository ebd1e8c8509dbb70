"""Projective measurements realized by a coupling to a classical pointer.

The composite carrier is ``system (x) pointer`` in that kronecker order, and
the pointer basis is indexed by the distinct eigenvalues of the measured
observable in ascending order.  Outcome sets ``delta`` are given as
eigenvalues; they are matched to the spectrum within the clustering tolerance.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from . import numerics as nx
from .algebra import CPMap, StateFunctional, is_completely_positive, random_state
from .errors import InvalidInput, NotAnInstrumentCoupling, ZeroProbabilityOutcome

__all__ = [
    "SpectralObservable", "CompositeSystem", "CouplingModel", "Instrument", "PreparationFamily",
    "PreparationChannel", "functional_calculus", "outcome_distribution", "build_instrument",
    "verify_measurement_scheme", "realizability_factorization", "conditional_output_state",
    "check_repeatability", "preparation_channel", "central_decomposition_composite", "prepare_state",
    "controlled_shift", "partial_swap",
]

CONTINUOUS_NOTE = "discrete spectra only; approximate schemes for continuous spectra are not modelled"


@dataclass(frozen=True, eq=False)
class SpectralObservable:
    matrix: np.ndarray
    spectrum: np.ndarray = field(init=False)
    projections: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        a = np.asarray(self.matrix, dtype=complex)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or not np.all(np.isfinite(a)):
            raise InvalidInput("observable must be a finite square matrix")
        if not nx.close(a, nx.dagger(a), 1e-9):
            raise InvalidInput("observable must be Hermitian")
        a = (a + nx.dagger(a)) / 2
        parts = nx.spectral_projections(a, nx.CLUSTER_TOL)
        object.__setattr__(self, "matrix", a)
        object.__setattr__(self, "spectrum", np.array([v for v, _ in parts]))
        object.__setattr__(self, "projections", np.array([p for _, p in parts]))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def size(self) -> int:
        return len(self.spectrum)

    def index(self, value: float) -> int:
        hits = np.flatnonzero(np.abs(self.spectrum - float(value)) <= nx.CLUSTER_TOL * max(1.0, abs(value)))
        if len(hits) != 1:
            raise InvalidInput(f"{value} is not an eigenvalue of the observable")
        return int(hits[0])

    def indices(self, delta: Iterable[float] | None) -> list[int]:
        if delta is None:
            return list(range(self.size))
        return sorted({self.index(v) for v in delta})

    def spectral_measure(self, delta: Iterable[float] | None) -> np.ndarray:
        idx = self.indices(delta)
        return sum((self.projections[i] for i in idx), np.zeros((self.dim, self.dim), dtype=complex))


def functional_calculus(obs: SpectralObservable, f: Callable[[float], complex] | Mapping[float, complex]) -> np.ndarray:
    """``f(A) = sum_a f(a) E_A({a})``."""
    vals = []
    for a in obs.spectrum:
        if callable(f):
            vals.append(complex(f(float(a))))
            continue
        hit = [v for k, v in f.items() if abs(float(k) - a) <= nx.CLUSTER_TOL * max(1.0, abs(a))]
        if not hit:
            raise InvalidInput(f"function undefined at eigenvalue {a:g}")
        vals.append(complex(hit[0]))
    return np.tensordot(np.array(vals), obs.projections, 1)


def outcome_distribution(obs: SpectralObservable, state: StateFunctional) -> np.ndarray:
    if state.dim != obs.dim:
        raise InvalidInput("state and observable have different dimensions")
    p = np.array([state.expect(e) for e in obs.projections])
    return np.clip(p, 0.0, None)


@dataclass(frozen=True)
class CompositeSystem:
    """``H (x) C^n`` with pointer-diagonal operators ``sum_a B_a (x) |a><a|``."""

    system_dim: int
    pointer_dim: int

    @property
    def dim(self) -> int:
        return self.system_dim * self.pointer_dim

    def _pointer_vec(self, a: int) -> np.ndarray:
        e = np.zeros((self.pointer_dim, 1))
        e[a] = 1
        return np.kron(np.eye(self.system_dim), e)

    def component(self, x, a: int) -> np.ndarray:
        """``(I (x) <a|) X (I (x) |a>)``."""
        v = self._pointer_vec(a)
        return v.T @ np.asarray(x) @ v

    def embed(self, b, a: int) -> np.ndarray:
        p = np.zeros((self.pointer_dim, self.pointer_dim))
        p[a, a] = 1
        return np.kron(np.asarray(b), p)

    def iota_prime(self, f: Sequence[complex]) -> np.ndarray:
        return np.kron(np.eye(self.system_dim), np.diag(np.asarray(f, dtype=complex)))

    def is_pointer_diagonal(self, x, tol: float = 1e-9) -> bool:
        x = np.asarray(x)
        rebuilt = sum(self.embed(self.component(x, a), a) for a in range(self.pointer_dim))
        return nx.close(x, rebuilt, tol)

    def partial_trace_pointer(self, rho) -> np.ndarray:
        n, m = self.system_dim, self.pointer_dim
        return np.einsum("iaja->ij", np.asarray(rho).reshape(n, m, n, m))

    def pointer_marginal(self, rho) -> np.ndarray:
        n, m = self.system_dim, self.pointer_dim
        return np.real(np.einsum("iaib->ab", np.asarray(rho).reshape(n, m, n, m)).diagonal()).copy()


@dataclass(frozen=True, eq=False)
class CouplingModel:
    unitary: np.ndarray
    mu0: np.ndarray
    system_dim: int

    def __post_init__(self):
        v = np.asarray(self.unitary, dtype=complex)
        mu = np.asarray(self.mu0, dtype=float).reshape(-1)
        n = int(self.system_dim)
        if n < 1 or v.shape != (n * len(mu), n * len(mu)):
            raise InvalidInput("coupling unitary must act on system (x) pointer")
        if not nx.close(v @ nx.dagger(v), np.eye(v.shape[0]), 1e-9):
            raise InvalidInput("coupling must be unitary")
        if mu.min(initial=0) < -1e-12 or abs(mu.sum() - 1) > 1e-10:
            raise InvalidInput("pointer distribution must be a probability vector")
        object.__setattr__(self, "unitary", v)
        object.__setattr__(self, "mu0", np.clip(mu, 0, None))
        object.__setattr__(self, "system_dim", n)

    @property
    def composite(self) -> CompositeSystem:
        return CompositeSystem(self.system_dim, len(self.mu0))

    def evolve(self, rho) -> np.ndarray:
        """``V (rho (x) mu0) V*`` on the composite."""
        full = np.kron(np.asarray(rho), np.diag(self.mu0))
        return self.unitary @ full @ nx.dagger(self.unitary)

    def collision(self, rho) -> np.ndarray:
        return self.composite.partial_trace_pointer(self.evolve(rho))


def controlled_shift(system_dim: int = 2) -> np.ndarray:
    """``|0><0| (x) 1 + |1><1| (x) X`` for a qubit system and two-label pointer."""
    if system_dim != 2:
        raise InvalidInput("controlled shift is defined for a qubit system")
    p0, p1 = np.diag([1.0, 0.0]), np.diag([0.0, 1.0])
    return (np.kron(p0, np.eye(2)) + np.kron(p1, np.array([[0, 1], [1, 0]]))).astype(complex)


def partial_swap(theta: float) -> np.ndarray:
    """``exp(-i theta (s- (x) s+ + h.c.))``: moves a system excitation into the pointer."""
    lower = np.array([[0, 1], [0, 0]], dtype=complex)
    gen = np.kron(lower, lower.T) + np.kron(lower.T, lower)
    w, v = np.linalg.eigh(gen)
    return (v * np.exp(-1j * theta * w)) @ nx.dagger(v)


@dataclass(frozen=True, eq=False)
class Instrument:
    observable: SpectralObservable
    coupling: CouplingModel
    channel: CPMap  # composite -> system, observable direction

    def I(self, b_hat) -> np.ndarray:  # noqa: E743 - conventional name
        return self.channel(b_hat)

    def joint_density(self, delta: Iterable[float] | None, state: StateFunctional) -> np.ndarray:
        """Density ``sigma`` with ``J(delta|omega)(B) = Tr(sigma B)``."""
        comp = self.coupling.composite
        chi = np.zeros(comp.pointer_dim)
        chi[self.observable.indices(delta)] = 1
        out = self.coupling.evolve(state.density)
        return comp.partial_trace_pointer(comp.iota_prime(chi) @ out)

    def J(self, delta: Iterable[float] | None, state: StateFunctional, b=None) -> complex:
        sigma = self.joint_density(delta, state)
        b = np.eye(sigma.shape[0]) if b is None else np.asarray(b)
        return complex(np.trace(sigma @ b))

    def probability(self, delta: Iterable[float] | None, state: StateFunctional) -> float:
        return float(np.real(self.J(delta, state)))


def build_instrument(obs: SpectralObservable, cm: CouplingModel) -> Instrument:
    """``I(B^) = sum_a mu0(a) (V* B^ V)_a`` with ``J`` read off the same coupling.

    The coupling must send pointer projections ``1 (x) |a><a|`` to pointer-diagonal
    operators; this is what makes outcome events well defined after the dynamics.
    """
    comp = cm.composite
    if comp.pointer_dim != obs.size or comp.system_dim != obs.dim:
        raise InvalidInput("pointer labels must match the observable's spectrum")
    v = cm.unitary
    for a in range(comp.pointer_dim):
        chi = np.zeros(comp.pointer_dim)
        chi[a] = 1
        if not comp.is_pointer_diagonal(nx.dagger(v) @ comp.iota_prime(chi) @ v):
            raise NotAnInstrumentCoupling(f"pointer event {obs.spectrum[a]:g} is not pointer-diagonal after coupling")

    def i_map(b_hat):
        x = nx.dagger(v) @ b_hat @ v
        return sum(cm.mu0[a] * comp.component(x, a) for a in range(comp.pointer_dim))

    ch = CPMap.from_function(i_map, comp.dim, comp.system_dim)
    ok, lam = is_completely_positive(ch)
    if not ok or not ch.is_unital():
        raise NotAnInstrumentCoupling(f"instrument map is not unital CP (min Choi eigenvalue {lam:.3g})")
    return Instrument(obs, cm, ch)


def _events(obs: SpectralObservable) -> list[list[float]]:
    out = []
    for a in obs.spectrum:
        out.append([a])
        if obs.size > 1:
            out.append([b for b in obs.spectrum if b != a])
    out.append(list(obs.spectrum))
    return out


def verify_measurement_scheme(obs: SpectralObservable, cm: CouplingModel,
                              states: Sequence[StateFunctional], tol: float = 1e-10) -> dict:
    """``omega(E_A(delta)) = (omega (x) mu0)[V*(1 (x) chi_delta)V]`` on singletons and complements."""
    comp = cm.composite
    worst = 0.0
    for st in states:
        out = cm.evolve(st.density)
        for delta in _events(obs):
            chi = np.zeros(comp.pointer_dim)
            chi[obs.indices(delta)] = 1
            lhs = st.expect(obs.spectral_measure(delta))
            rhs = float(np.real(np.trace(comp.iota_prime(chi) @ out)))
            worst = max(worst, abs(lhs - rhs))
    return {"scheme_ok": worst <= tol, "max_deviation": worst, "checked_states": len(states)}


def _spanning_states(n: int) -> list[StateFunctional]:
    out = []
    for i in range(n):
        out.append(StateFunctional.from_vector(np.eye(n)[i]))
        for j in range(i + 1, n):
            for phase in (1, 1j):
                v = np.zeros(n, dtype=complex)
                v[i], v[j] = 1, phase
                out.append(StateFunctional.from_vector(v / np.sqrt(2)))
    return out


def realizability_factorization(obs: SpectralObservable, cm: CouplingModel, samples: int = 100,
                                tol: float = 1e-9) -> dict:
    """Does the pointer readout of ``I*(omega)`` reproduce the spectral distribution?"""
    comp = cm.composite
    gen = nx.rng(5, samples)
    worst = 0.0
    for _ in range(samples):
        st = random_state(obs.dim, gen)
        readout = comp.pointer_marginal(cm.evolve(st.density))
        worst = max(worst, float(np.abs(readout - outcome_distribution(obs, st)).max()))
    scheme = verify_measurement_scheme(obs, cm, _spanning_states(obs.dim), tol)
    ok = worst <= tol
    return {"factorizes": ok, "max_deviation": worst, "scheme_ok": scheme["scheme_ok"],
            "consistent": ok == scheme["scheme_ok"]}


def conditional_output_state(inst: Instrument, delta: Iterable[float] | None, state: StateFunctional) -> StateFunctional:
    sigma = inst.joint_density(delta, state)
    p = float(np.real(np.trace(sigma)))
    if p <= 1e-12:
        raise ZeroProbabilityOutcome(f"outcome {list(delta) if delta is not None else 'all'} has probability {p:.3g}")
    sigma = sigma / p
    return StateFunctional((sigma + nx.dagger(sigma)) / 2, "conditional")


@dataclass(frozen=True, eq=False)
class PreparationFamily:
    states: tuple[StateFunctional, ...]

    def __post_init__(self):
        if not self.states or len({s.dim for s in self.states}) != 1:
            raise InvalidInput("preparation family needs equally sized states")


def check_repeatability(obs: SpectralObservable, phi: PreparationFamily, tol: float = 1e-9) -> dict:
    if len(phi.states) != obs.size:
        raise InvalidInput("one prepared state per spectral value")
    devs = [1.0 - float(outcome_distribution(obs, st)[a]) for a, st in enumerate(phi.states)]
    labels = [float(a) for a in obs.spectrum]
    return {"repeatable": all(d <= tol for d in devs), "deviation": max(devs),
            "per_label": [{"label": lab, "deviation": d, "ok": d <= tol} for lab, d in zip(labels, devs)],
            "eigenfamily_available": True, "note": CONTINUOUS_NOTE}


@dataclass(frozen=True, eq=False)
class PreparationChannel:
    """``C(B^)(a) = omega_a(B^_a)`` and its dual ``rho -> sum_a rho(a) omega_a (x) delta_a``."""

    observable: SpectralObservable
    family: PreparationFamily

    @property
    def composite(self) -> CompositeSystem:
        return CompositeSystem(self.observable.dim, self.observable.size)

    def forward(self, b_hat) -> np.ndarray:
        comp = self.composite
        return np.array([st(comp.component(b_hat, a)) for a, st in enumerate(self.family.states)])

    def dual(self, rho: Sequence[float]) -> StateFunctional:
        comp = self.composite
        rho = np.asarray(rho, dtype=float)
        if rho.shape != (comp.pointer_dim,) or rho.min() < -1e-12 or abs(rho.sum() - 1) > 1e-10:
            raise InvalidInput("rho must be a probability vector over the spectrum")
        d = sum(r * comp.embed(st.density, a) for a, (r, st) in enumerate(zip(rho, self.family.states)))
        return StateFunctional(d, "C*(rho)")

    def as_cpmap(self) -> CPMap:
        comp = self.composite
        return CPMap.from_function(lambda b: np.diag(self.forward(b)), comp.dim, comp.pointer_dim)


def preparation_channel(obs: SpectralObservable, phi: PreparationFamily) -> PreparationChannel:
    if len(phi.states) != obs.size or phi.states[0].dim != obs.dim:
        raise InvalidInput("family must hold one system state per spectral value")
    ch = PreparationChannel(obs, phi)
    ok, lam = is_completely_positive(ch.as_cpmap())
    if not ok:
        raise InvalidInput(f"preparation channel is not completely positive ({lam:.3g})")
    return ch


def central_decomposition_composite(state: StateFunctional, pointer_dim: int):
    """``mu(a) = omega^(1 (x) |a><a|)`` and the conditional system states."""
    if state.dim % pointer_dim:
        raise InvalidInput("state dimension is not a multiple of the pointer size")
    comp = CompositeSystem(state.dim // pointer_dim, pointer_dim)
    mu = np.zeros(pointer_dim)
    conds: list[StateFunctional | None] = []
    for a in range(pointer_dim):
        block = comp.component(state.density, a)
        mu[a] = max(float(np.real(np.trace(block))), 0.0)
        conds.append(StateFunctional((block + nx.dagger(block)) / (2 * mu[a]), f"pointer{a}")
                     if mu[a] > 1e-12 else None)
    rebuilt = sum(m * comp.embed(c.density, a) for a, (m, c) in enumerate(zip(mu, conds)) if c is not None)
    restricted = sum(comp.embed(comp.component(state.density, a), a) for a in range(pointer_dim))
    return mu, conds, nx.hs_norm(rebuilt - restricted)


def _trace_distance(a, b) -> float:
    return 0.5 * float(np.abs(np.linalg.eigvalsh((a - b + nx.dagger(a - b)) / 2)).sum())


def prepare_state(target: StateFunctional, cm: CouplingModel, max_steps: int = 200,
                  initial: StateFunctional | None = None, tol: float = 1e-6) -> dict:
    """Iterate the collision map ``rho -> Tr_P V (rho (x) mu0) V*`` towards ``target``."""
    if target.dim != cm.system_dim:
        raise InvalidInput("target lives on a different system")
    rho = (initial or StateFunctional.maximally_mixed(cm.system_dim)).density
    dist = [_trace_distance(rho, target.density)]
    reached = dist[0] < tol
    steps = 0
    final_pointer = np.asarray(cm.mu0, dtype=float)
    min_eig, trace_err = 0.0, 0.0
    while not reached and steps < max_steps:
        full = cm.evolve(rho)
        final_pointer = cm.composite.pointer_marginal(full)
        rho = cm.composite.partial_trace_pointer(full)
        rho = (rho + nx.dagger(rho)) / 2
        trace_err = max(trace_err, abs(float(np.real(np.trace(rho))) - 1))
        min_eig = min(min_eig, float(np.linalg.eigvalsh(rho)[0]))
        steps += 1
        dist.append(_trace_distance(rho, target.density))
        reached = dist[-1] < tol
    return {"converged": bool(reached), "steps": steps, "final_distance": dist[-1], "distances": dist,
            "final_pointer_measure": final_pointer, "trace_error": trace_err, "min_eigenvalue": min_eig,
            "positive_and_trace_preserving": trace_err <= 1e-10 and min_eig >= -1e-10,
            "final_state": rho}
