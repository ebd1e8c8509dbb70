"""Spontaneous symmetry breaking for finite groups acting on multi-matrix algebras.

A symmetry is broken in a representation when its induced action moves
points of the spectrum of the representation's center.  Broken symmetries
are restored on the induced space over the coset space ``H\\G``, whose
coset-indexed blocks play the role of degenerate vacua.

Coset conventions: right cosets ``Hg`` with representatives of minimal
element index, ``G`` acting on coset labels from the right.  Block ``c`` of
the induced space holds the value of an equivariant function at ``r_c^-1``,
so ``pi_bar(F)`` acts there as ``pi(tau_{r_c}(F))``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import numerics as nx
from .algebra import (CPMap, FiniteCStarAlgebra, StateFunctional, center_of, generated_algebra)
from .errors import (InternalInconsistency, InvalidInput, InvalidSection, NotHCovariant,
                     PropositionViolated)
from .groups import (FiniteGroup, GroupAction, UnitaryRep, character_table, fixed_point_algebra,
                     group_average, inner_action, isotypic_projections)
from .sectors import decompose_sectors

__all__ = [
    "BlockRepresentation", "SubgroupPair", "SsbVerdict", "InducedSystem", "SsbCentres",
    "OrderParameterChannel", "classify_symmetry", "phase_diagram", "implementer_space",
    "induce_representation", "compute_ssb_centres", "ssb_channel", "order_parameter_readout",
    "goldstone_gap_report",
]

AE_NOTE = "counting measure on a finite spectrum: 'almost everywhere' is read as 'everywhere'"


@dataclass(frozen=True, eq=False)
class BlockRepresentation:
    """``pi(F) = V ((+)_k F_k (x) 1_{n_k}) V*`` for a multi-matrix algebra."""

    algebra: FiniteCStarAlgebra
    multiplicities: tuple[int, ...]
    unitary: np.ndarray | None = None

    def __post_init__(self):
        alg = self.algebra
        if alg.block_dims is None:
            raise InvalidInput("representations are defined on explicit multi-matrix algebras")
        mult = tuple(int(m) for m in self.multiplicities)
        if len(mult) != len(alg.block_dims) or min(mult) < 0 or sum(mult) == 0:
            raise InvalidInput("need one non-negative multiplicity per block, not all zero")
        object.__setattr__(self, "multiplicities", mult)
        if self.unitary is not None:
            v = np.asarray(self.unitary, dtype=complex)
            if v.shape != (self.dim, self.dim) or not nx.close(v @ nx.dagger(v), np.eye(self.dim), 1e-8):
                raise InvalidInput("representation unitary has wrong shape or is not unitary")
            object.__setattr__(self, "unitary", v)

    @property
    def dim(self) -> int:
        return sum(d * m for d, m in zip(self.algebra.block_dims, self.multiplicities))

    @property
    def present_blocks(self) -> list[int]:
        return [k for k, m in enumerate(self.multiplicities) if m > 0]

    def is_factor(self) -> bool:
        return len(self.present_blocks) == 1

    def is_irreducible(self) -> bool:
        return self.is_factor() and self.multiplicities[self.present_blocks[0]] == 1

    def __call__(self, x) -> np.ndarray:
        alg = self.algebra
        parts = [np.kron(alg.block(x, k), np.eye(m)) for k, m in enumerate(self.multiplicities) if m > 0]
        out = np.zeros((self.dim, self.dim), dtype=complex)
        o = 0
        for p in parts:
            out[o:o + p.shape[0], o:o + p.shape[0]] = p
            o += p.shape[0]
        if self.unitary is not None:
            out = self.unitary @ out @ nx.dagger(self.unitary)
        return out

    def images(self, alg: FiniteCStarAlgebra | None = None) -> list[np.ndarray]:
        alg = self.algebra if alg is None else alg
        return [self(b) for b in alg.basis]


@dataclass(frozen=True, eq=False)
class SubgroupPair:
    group: FiniteGroup
    subgroup: tuple[int, ...]
    representatives: tuple[int, ...] = field(init=False)
    coset_of: np.ndarray = field(init=False, repr=False)
    action: np.ndarray = field(init=False, repr=False)  # action[c, g] = coset of r_c g

    def __post_init__(self):
        g = self.group
        h = tuple(sorted(set(int(x) for x in self.subgroup)))
        if not g.is_subgroup(h):
            raise InvalidInput(f"{list(h)} is not a subgroup")
        object.__setattr__(self, "subgroup", h)
        coset_of = -np.ones(g.order, dtype=np.int64)
        reps = []
        for x in range(g.order):
            if coset_of[x] >= 0:
                continue
            for y in h:
                coset_of[g.mul(y, x)] = len(reps)
            reps.append(x)
        act = np.array([[coset_of[g.mul(r, x)] for x in range(g.order)] for r in reps])
        object.__setattr__(self, "representatives", tuple(reps))
        object.__setattr__(self, "coset_of", coset_of)
        object.__setattr__(self, "action", act)
        for a in range(g.order):
            for b in range(g.order):
                if not np.array_equal(act[act[:, a], b], act[:, g.mul(a, b)]):
                    raise InternalInconsistency("coset action is not a right action")

    @property
    def index(self) -> int:
        return len(self.representatives)

    def label(self, c: int) -> str:
        return f"Hg{self.representatives[c]}"


@dataclass(frozen=True, eq=False)
class SsbVerdict:
    status: str
    points: tuple[dict, ...]
    point_action: np.ndarray  # [g, point] -> image point, -1 if it leaves the spectrum
    orbits: tuple[dict, ...]
    note: str = AE_NOTE

    def report(self) -> dict:
        return {"status": self.status, "spectrum_points": list(self.points),
                "orbits": list(self.orbits), "note": self.note}


def _spectrum_points(act: GroupAction, pi: BlockRepresentation):
    if pi.algebra is not act.algebra and pi.algebra.block_dims != act.algebra.block_dims:
        raise InvalidInput("representation and action are on different algebras")
    alg = act.algebra
    gen = generated_algebra(pi.images(), pi.dim)
    _, projs = center_of(gen)
    points = []
    for z in projs:
        carriers = [k for k in pi.present_blocks if nx.hs_norm(pi(alg.block_unit(k)) @ z) > 1e-6]
        if len(carriers) != 1:
            raise InternalInconsistency("a central projection is not carried by exactly one block")
        points.append(carriers[0])
    return points, projs


def classify_symmetry(act: GroupAction, pi: BlockRepresentation) -> SsbVerdict:
    """Unbroken iff the induced action fixes every point of Spec Z_pi(F)."""
    blocks, projs = _spectrum_points(act, pi)
    g = act.group
    where = {b: i for i, b in enumerate(blocks)}
    point_action = np.array([[where.get(int(act.perms[x, b]), -1) for b in blocks]
                             for x in range(g.order)])
    fixed = bool(np.all(point_action == np.arange(len(blocks))))
    orbits = []
    seen: set[int] = set()
    for b in blocks:
        if b in seen:
            continue
        orbit_blocks = sorted({int(act.perms[x, b]) for x in range(g.order)})
        present = [blk for blk in orbit_blocks if blk in where]
        seen.update(present)
        orbits.append({"points": [where[blk] for blk in present], "blocks": present,
                       "orbit_blocks": orbit_blocks,
                       "status": "unbroken" if len(orbit_blocks) == 1 else "broken"})
    points = tuple({"index": i, "block": b, "rank": int(round(float(np.real(np.trace(z)))))}
                   for i, (b, z) in enumerate(zip(blocks, projs)))
    return SsbVerdict("unbroken" if fixed else "broken", points, point_action, tuple(orbits))


def phase_diagram(act: GroupAction, pi: BlockRepresentation) -> list[dict]:
    """Central-ergodic decomposition: orbits of the spectrum, each broken or unbroken."""
    return list(classify_symmetry(act, pi).orbits)


def implementer_space(pi: BlockRepresentation, act: GroupAction, g: int) -> np.ndarray:
    """Basis of ``{V : V pi(F) = pi(tau_g F) V for all F}`` as ``(k, n, n)``."""
    n = pi.dim
    eye = np.eye(n)
    gram = np.zeros((n * n, n * n), dtype=complex)
    for f in act.algebra.basis:
        k = np.kron(eye, pi(f).T) - np.kron(pi(act.apply(g, f)), eye)
        gram += k.conj().T @ k
    w, v = np.linalg.eigh(gram)
    kernel = v[:, w <= 1e-9 * max(1.0, float(w[-1]))]
    return nx.canonical_span(kernel).T.reshape(-1, n, n)


def _block_implementers(pi: BlockRepresentation, act: GroupAction, h: int):
    present = pi.present_blocks
    if any(act.perms[h, k] != k for k in present):
        return None
    blocks = [np.kron(act.unitaries[h][k], np.eye(m)) for k, m in enumerate(pi.multiplicities) if m > 0]
    u = np.zeros((pi.dim, pi.dim), dtype=complex)
    o = 0
    for b in blocks:
        u[o:o + b.shape[0], o:o + b.shape[0]] = b
        o += b.shape[0]
    if pi.unitary is not None:
        u = pi.unitary @ u @ nx.dagger(pi.unitary)
    return u


def _searched_implementer(pi: BlockRepresentation, act: GroupAction, h: int) -> np.ndarray:
    space = implementer_space(pi, act, h)
    if space.shape[0] == 0:
        raise NotHCovariant(f"element {h} is not unitarily implementable in the representation")
    gen = nx.rng(17, h)
    c = gen.normal(size=space.shape[0]) + 1j * gen.normal(size=space.shape[0])
    v = np.tensordot(c, space, 1)
    u, _, wh = np.linalg.svd(v)
    return u @ wh


def _h_representation(pi, act, pair, implementers) -> UnitaryRep:
    sub, parent = act.group.subgroup(pair.subgroup)
    if implementers is not None:
        given = {int(k): np.asarray(v, dtype=complex) for k, v in implementers.items()}
        if set(given) == set(parent):
            return UnitaryRep(sub, np.array([given[p] for p in parent]))
        local = {parent.index(k): v for k, v in given.items()}
        return UnitaryRep.from_generators(sub, local)
    mats = [_block_implementers(pi, act, h) for h in parent]
    if all(m is not None for m in mats):
        try:
            return UnitaryRep(sub, np.array(mats))
        except InvalidInput:
            pass
    # intertwiner search, then phase-fix generators so the lift is linear
    gens: list[int] = []
    span = {0}
    for x in range(sub.order):
        if x not in span:
            gens.append(x)
            span = _closure(sub, gens)
    images = {}
    for s in gens:
        u = _searched_implementer(pi, act, parent[s])
        k, y = 1, s
        while y != 0:
            y = sub.mul(s, y)
            k += 1
        power = np.linalg.matrix_power(u, k)
        phase = np.trace(power) / pi.dim
        if abs(abs(phase) - 1) < 1e-8 and nx.close(power, phase * np.eye(pi.dim), 1e-8):
            u = u * np.exp(-1j * np.angle(phase) / k)
        images[s] = u
    try:
        return UnitaryRep.from_generators(sub, images)
    except InvalidInput as exc:
        raise NotHCovariant("implementers of H only form a projective representation; "
                            "supply implementing unitaries explicitly") from exc


def _closure(group: FiniteGroup, gens: Sequence[int]) -> set[int]:
    out = {0}
    frontier = [0]
    while frontier:
        nxt = []
        for p in frontier:
            for s in gens:
                q = group.mul(s, p)
                if q not in out:
                    out.add(q)
                    nxt.append(q)
        frontier = nxt
    return out


@dataclass(frozen=True, eq=False)
class InducedSystem:
    base: BlockRepresentation
    pair: SubgroupPair
    action: GroupAction
    h_rep: UnitaryRep  # U(h) on the base space, indexed by subgroup position
    u_hat: UnitaryRep

    @property
    def base_dim(self) -> int:
        return self.base.dim

    @property
    def dim(self) -> int:
        return self.pair.index * self.base.dim

    def pi_bar(self, x) -> np.ndarray:
        n = self.base.dim
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for c, r in enumerate(self.pair.representatives):
            out[c * n:(c + 1) * n, c * n:(c + 1) * n] = self.base(self.action.apply(r, x))
        return out

    def embedding(self, x) -> list[np.ndarray]:
        """Field-valued function ``g -> tau_g(F)`` on the whole group."""
        return [self.action.apply(g, x) for g in range(self.action.group.order)]

    def coset_projection(self, c: int) -> np.ndarray:
        n = self.base.dim
        p = np.zeros((self.dim, self.dim), dtype=complex)
        p[c * n:(c + 1) * n, c * n:(c + 1) * n] = np.eye(n)
        return p

    def lift(self, c: int, x) -> np.ndarray:
        """Place a base-space operator in coset block ``c``."""
        n = self.base.dim
        out = np.zeros((self.dim, self.dim), dtype=complex)
        out[c * n:(c + 1) * n, c * n:(c + 1) * n] = x
        return out

    def covariance_error(self) -> float:
        worst = 0.0
        for g in range(self.action.group.order):
            u = self.u_hat(g)
            for f in self.action.algebra.basis:
                lhs = self.pi_bar(self.action.apply(g, f))
                worst = max(worst, nx.hs_norm(lhs - u @ self.pi_bar(f) @ nx.dagger(u)))
        return worst


def induce_representation(pi: BlockRepresentation, pair: SubgroupPair, act: GroupAction,
                          implementers: Mapping[int, np.ndarray] | None = None) -> InducedSystem:
    """Induced covariant representation of the full group on ``(+)_{cosets} H``.

    ``implementers`` maps parent element indices of ``H`` (all of them, or
    generators) to unitaries implementing the action in ``pi``; when absent
    they are read off the action's block data or found by intertwiner search.
    """
    if pair.group is not act.group and not np.array_equal(pair.group.cayley, act.group.cayley):
        raise InvalidInput("subgroup pair and action use different groups")
    h_rep = _h_representation(pi, act, pair, implementers)
    _, parent = act.group.subgroup(pair.subgroup)
    pos = {p: i for i, p in enumerate(parent)}
    for i, h in enumerate(parent):
        u = h_rep(i)
        for f in act.algebra.basis:
            if not nx.close(pi(act.apply(h, f)), u @ pi(f) @ nx.dagger(u), 1e-8):
                raise NotHCovariant(f"U({h}) does not implement tau_{h} in the base representation")
    g = act.group
    n = pi.dim
    k = pair.index
    mats = np.zeros((g.order, k * n, k * n), dtype=complex)
    for x in range(g.order):
        xinv = g.inv(x)
        for c, r in enumerate(pair.representatives):
            c2 = int(pair.action[c, x])
            h = g.mul(g.mul(pair.representatives[c2], xinv), g.inv(r))
            if h not in pos:
                raise InternalInconsistency("coset bookkeeping produced an element outside H")
            mats[x, c * n:(c + 1) * n, c2 * n:(c2 + 1) * n] = nx.dagger(h_rep(pos[h]))
    sys = InducedSystem(pi, pair, act, h_rep, UnitaryRep(g, mats))
    err = sys.covariance_error()
    if err > 1e-8:
        raise InternalInconsistency(f"induced representation is not covariant (error {err:.3g})")
    return sys


@dataclass(frozen=True, eq=False)
class SsbCentres:
    field_center: tuple[np.ndarray, ...]
    observable_center: tuple[np.ndarray, ...]
    dual_center: tuple[np.ndarray, ...]
    h_sector_labels: tuple[str, ...]
    joint_labels: tuple[tuple[int, str], ...]
    joint_projections: tuple[np.ndarray, ...]
    expected: dict
    checks: dict

    @property
    def dims(self) -> tuple[int, int, int]:
        return (len(self.field_center), len(self.observable_center), len(self.dual_center))

    def report(self) -> dict:
        return {"dims": list(self.dims), "expected": dict(self.expected), "checks": dict(self.checks),
                "h_sectors": list(self.h_sector_labels)}


def _match(projs, targets, tol=1e-8) -> tuple[bool, float]:
    if len(projs) != len(targets):
        return False, float("inf")
    worst = 0.0
    used = set()
    for p in projs:
        dists = [(nx.hs_norm(p - t), j) for j, t in enumerate(targets) if j not in used]
        d, j = min(dists)
        used.add(j)
        worst = max(worst, d)
    return worst <= tol, worst


def _h_sectors(sys: InducedSystem):
    sub = sys.h_rep.group
    dual = character_table(sub)
    projs = isotypic_projections(sys.h_rep, dual)
    present = [(lab, p) for lab, p in projs.items() if np.real(np.trace(p)) > 0.5]
    return dual, present


def compute_ssb_centres(sys: InducedSystem, strict: bool = True) -> SsbCentres:
    """Centers of F, A = F^G and A^d = F^H in the induced representation.

    Checks ``Z(F) = l^inf(H\\G)``, ``Z(A) = 1 (x) Z_pi(A)`` and
    ``Z(A^d) = Z(F) v Z(A)`` with dimensions ``(|H\\G|, k, |H\\G| k)`` where
    ``k`` is the number of ``H``-sectors present in the base space.
    """
    act, pair = sys.action, sys.pair
    n_hat = sys.dim
    _, present = _h_sectors(sys)
    k = len(present)

    field_alg = generated_algebra([sys.pi_bar(b) for b in act.algebra.basis], n_hat)
    _, z_field = center_of(field_alg)

    obs = fixed_point_algebra(act)
    obs_hat = generated_algebra([sys.pi_bar(b) for b in obs.basis], n_hat)
    _, z_obs = center_of(obs_hat)
    base_obs = generated_algebra([sys.base(b) for b in obs.basis], sys.base_dim)
    _, z_base = center_of(base_obs)

    dual_alg = fixed_point_algebra(act, pair.subgroup)
    dual_hat = generated_algebra([sys.pi_bar(b) for b in dual_alg.basis], n_hat)
    _, z_dual = center_of(dual_hat)

    checks = {}
    cosets = [sys.coset_projection(c) for c in range(pair.index)]
    ok1, dev1 = _match(z_field, cosets)
    checks["field_center_is_coset_functions"] = {"ok": ok1, "deviation": dev1,
                                                 "applies": sys.base.is_factor()}
    lifted = [sum(sys.lift(c, z) for c in range(pair.index)) for z in z_base]
    ok2, dev2 = _match(z_obs, lifted)
    checks["observable_center_is_lifted_base_center"] = {"ok": ok2, "deviation": dev2}

    labels = []
    for z in z_base:
        hit = [lab for lab, p in present if nx.hs_norm(p - z) <= 1e-8]
        labels.append(hit[0] if hit else f"z{len(labels)}")
    checks["base_center_is_h_sectors"] = {"ok": all(not lab.startswith("z") for lab in labels)
                                          and len(labels) == k}

    joint, joint_labels = [], []
    for c, zc in enumerate(z_field if ok1 else cosets):
        for lab, zo in zip(labels, z_obs if ok2 else lifted):
            prod = zc @ zo
            if nx.hs_norm(prod) > 1e-6:
                coset = next(i for i, e in enumerate(cosets) if nx.hs_norm(e @ prod) > 1e-6)
                joint.append(prod)
                joint_labels.append((coset, lab))
    ok3, dev3 = _match(z_dual, joint)
    checks["dual_center_is_product"] = {"ok": ok3, "deviation": dev3}

    expected = {"field": pair.index, "observable": k, "dual": pair.index * k}
    dims_ok = (len(z_obs) == k and len(z_dual) == pair.index * k
               and (len(z_field) == pair.index or not sys.base.is_factor()))
    checks["dimensions"] = {"ok": dims_ok}
    order = sorted(range(len(joint)), key=lambda i: joint_labels[i])
    result = SsbCentres(tuple(z_field), tuple(z_obs), tuple(z_dual), tuple(labels),
                        tuple(joint_labels[i] for i in order), tuple(joint[i] for i in order),
                        expected, checks)
    if strict:
        failed = [name for name, c in checks.items() if not c["ok"] and c.get("applies", True)]
        if failed:
            raise PropositionViolated(f"center structure checks failed: {failed}")
    return result


@dataclass(frozen=True, eq=False)
class OrderParameterChannel:
    """``Psi(B)(c, eta) = <xi, pi(m_H(tau_{r_c}(B))) xi>`` with ``xi`` in H-sector ``eta``."""

    system: InducedSystem
    centres: SsbCentres
    vectors: tuple[np.ndarray, ...]  # one per joint label

    @property
    def labels(self) -> tuple[tuple[int, str], ...]:
        return self.centres.joint_labels

    def _reference(self, i: int) -> np.ndarray:
        xi = self.vectors[i]
        rho = np.outer(xi, xi.conj())
        mats = self.system.h_rep.matrices
        return sum(nx.dagger(u) @ rho @ u for u in mats) / len(mats)

    def forward(self, b) -> np.ndarray:
        sys = self.system
        h = sys.pair.subgroup
        out = []
        for (c, _), xi in zip(self.labels, self.vectors):
            x = group_average(sys.action, sys.action.apply(sys.pair.representatives[c], b), h)
            out.append(np.vdot(xi, sys.base(x) @ xi))
        return np.array(out)

    def as_cpmap(self) -> CPMap:
        return CPMap.from_function(lambda b: np.diag(self.forward(b)),
                                   self.system.action.algebra.ambient_dim, len(self.vectors))

    def dual(self, joint: Mapping[tuple[int, str], float] | Sequence[float]) -> StateFunctional:
        """State on the induced space reproducing ``joint`` as its order-parameter readout."""
        if isinstance(joint, Mapping):
            weights = [float(joint.get(lab, 0.0)) for lab in self.labels]
        else:
            weights = [float(w) for w in joint]
        if len(weights) != len(self.labels) or min(weights) < -1e-12 or abs(sum(weights) - 1) > 1e-10:
            raise InvalidInput("joint distribution must be a probability vector over (coset, sector)")
        rho = sum(w * self.system.lift(c, self._reference(i))
                  for i, ((c, _), w) in enumerate(zip(self.labels, weights)))
        return StateFunctional((rho + nx.dagger(rho)) / 2, "order-parameter")

    def readout(self, state: StateFunctional) -> dict:
        return order_parameter_readout(state, self.system, self.centres)


def ssb_channel(sys: InducedSystem, section: Mapping[tuple[int, str], np.ndarray] | None = None,
                centres: SsbCentres | None = None) -> OrderParameterChannel:
    """Order-parameter channel; default section uses the first sector vector of each H-sector."""
    centres = compute_ssb_centres(sys) if centres is None else centres
    _, present = _h_sectors(sys)
    proj = dict(present)
    defaults = {}
    if section is None:
        dec = decompose_sectors(inner_action(sys.h_rep), sys.h_rep)
        defaults = {s.label: s.isometry[:, 0] for s in dec.sectors}
    vectors = []
    for c, lab in centres.joint_labels:
        xi = defaults.get(lab) if section is None else section.get((c, lab))
        if xi is None:
            raise InvalidSection(f"no reference vector for coset {c}, sector {lab}")
        xi = np.asarray(xi, dtype=complex).reshape(-1)
        if xi.shape != (sys.base_dim,) or abs(np.linalg.norm(xi) - 1) > 1e-9:
            raise InvalidSection(f"reference vector for ({c}, {lab}) is not a unit vector")
        if lab in proj and np.linalg.norm(proj[lab] @ xi - xi) > 1e-9:
            raise InvalidSection(f"reference vector for ({c}, {lab}) is not in its sector")
        vectors.append(xi)
    return OrderParameterChannel(sys, centres, tuple(vectors))


def order_parameter_readout(state: StateFunctional, sys: InducedSystem, centres: SsbCentres | None = None) -> dict:
    """Joint distribution over (coset, H-sector) and its coset marginal."""
    centres = compute_ssb_centres(sys) if centres is None else centres
    if state.dim != sys.dim:
        raise InvalidInput("state does not live on the induced space")
    joint = {lab: max(state.expect(p), 0.0) for lab, p in zip(centres.joint_labels, centres.joint_projections)}
    marginal = np.zeros(sys.pair.index)
    for (c, _), w in joint.items():
        marginal[c] += w
    return {"joint": joint, "marginal": marginal}


def goldstone_gap_report(act: GroupAction, subgroup: Sequence[int]) -> dict:
    """``dim F^H - dim F^G`` and the G-irrep content of the complement.

    When ``F^H`` is not G-stable (H not normal), the content is computed on
    the smallest G-stable subspace containing it.
    """
    pair = SubgroupPair(act.group, tuple(subgroup))
    fg = fixed_point_algebra(act)
    fh = fixed_point_algebra(act, pair.subgroup)
    n = act.algebra.ambient_dim
    bh = fh.basis.reshape(fh.dim, -1).T
    stable = all(fh.contains(act.apply(g, b), 1e-8) for g in range(act.group.order) for b in fh.basis)
    if stable:
        span = bh
    else:
        imgs = [act.apply(g, b).reshape(-1) for g in range(act.group.order) for b in fh.basis]
        span = nx.canonical_span(np.array(imgs).T)
    bg = fg.basis.reshape(fg.dim, -1).T
    resid = span - bg @ (bg.conj().T @ span)
    comp = nx.canonical_span(resid) if resid.size else resid
    dual = character_table(act.group)
    chi = np.array([sum(np.vdot(comp[:, i], act.apply(g, comp[:, i].reshape(n, n)).reshape(-1))
                        for i in range(comp.shape[1])) for g in range(act.group.order)])
    content = {}
    for irr in dual:
        m = float(np.real(np.vdot(irr.character, chi))) / act.group.order
        if round(m) > 0:
            content[irr.label] = int(round(m))
    return {"dim_fixed_G": fg.dim, "dim_fixed_H": fh.dim, "gap": fh.dim - fg.dim,
            "complement_dim": comp.shape[1], "g_stable": stable, "irrep_content": content,
            "coset_count": pair.index}
