"""Named analyses runnable from a model document.

Each analysis takes the parsed :class:`ModelSpec` and its option object and
returns plain data (dicts, lists, numbers, numpy arrays) for the report layer.
"""
from __future__ import annotations

from typing import Callable

import numpy as np

from . import measurement as ms
from . import numerics as nx
from . import sectors as sc
from . import ssb
from . import thermal as th
from .algebra import random_state
from .groups import character_table, inner_action
from .modelspec import ModelSpec, SpecError, parse_matrix, parse_state, parse_vector

__all__ = ["ANALYSES", "run_analysis"]


def _need(spec: ModelSpec, *fields: str):
    for f in fields:
        if getattr(spec, f) is None:
            raise SpecError(f, "section required by this analysis")


def character_table_analysis(spec: ModelSpec, opts: dict) -> dict:
    _need(spec, "group")
    dual = character_table(spec.group)
    return {"labels": dual.labels, "dims": [irr.dim for irr in dual],
            "classes": [list(c) for c in spec.group.classes], "table": dual.table(),
            "orthogonality_error": dual.orthogonality_error()}


def _sector_setup(spec: ModelSpec):
    _need(spec, "group", "unitary_rep")
    rep = spec.unitary_rep
    return sc.decompose_sectors(inner_action(rep), rep)


def sectors_analysis(spec: ModelSpec, opts: dict) -> dict:
    dec = _sector_setup(spec)
    state = parse_state(opts.get("state", "maximally_mixed"), "analyses.sectors.state", dec.dim)
    mu, _ = sc.central_decompose_state(state, dec)
    dev = dec.deviations()
    return {"sectors": dec.report(), "sector_count": len(dec.sectors), "center_dim": dec.center.dim,
            "deviations": dev, "max_deviation": max(dev.values()),
            "charge_distribution": mu.as_dict(), "reconstruction_error": sc.reconstruction_error(state, dec),
            "folium": sc.folium_support(state, dec)}


def charging_analysis(spec: ModelSpec, opts: dict) -> dict:
    dec = _sector_setup(spec)
    ch = sc.build_charging_channel(dec)
    raw = opts.get("distribution")
    if raw is None:
        nu = sc.ChargeDistribution.from_mapping(dec.labels, np.full(len(dec.labels), 1 / len(dec.labels)))
    elif isinstance(raw, dict):
        nu = sc.ChargeDistribution.from_mapping(dec.labels, {k: float(v) for k, v in raw.items()})
    else:
        nu = sc.ChargeDistribution.from_mapping(dec.labels, np.real(parse_vector(raw, "distribution")))
    state = ch.dual(nu)
    back = ch.readout(state)
    return {"distribution": nu.as_dict(), "readout": back.as_dict(),
            "round_trip_error": float(np.abs(back.as_array() - nu.as_array()).max()),
            "adjunction": sc.verify_adjunction_charges(state, nu, ch),
            "charge_vector": sc.realize_charge_vector(nu, ch)}


def _field_setup(spec: ModelSpec):
    _need(spec, "action", "field_multiplicities")
    return spec.action, ssb.BlockRepresentation(spec.action.algebra, spec.field_multiplicities)


def ssb_analysis(spec: ModelSpec, opts: dict) -> dict:
    act, pi = _field_setup(spec)
    verdict = ssb.classify_symmetry(act, pi)
    sub = spec.subgroup if spec.subgroup is not None else (0,)
    out = verdict.report()
    out["non_implementable"] = [g for g in range(act.group.order)
                                if ssb.implementer_space(pi, act, g).shape[0] == 0]
    if opts.get("induce", True):
        pair = ssb.SubgroupPair(act.group, sub)
        sys = ssb.induce_representation(pi, pair, act)
        centres = ssb.compute_ssb_centres(sys)
        out["induced_dims"] = {"base": sys.base_dim, "cosets": pair.index, "induced": sys.dim}
        out["covariance_error"] = sys.covariance_error()
        out["three_center_dims"] = list(centres.dims)
        out["three_center_expected"] = [centres.expected[k] for k in ("field", "observable", "dual")]
        out["center_checks"] = centres.checks
        out["order_parameter_labels"] = [f"{pair.label(c)}|{lab}" for c, lab in centres.joint_labels]
        ch = ssb.ssb_channel(sys, centres=centres)
        k = len(centres.joint_labels)
        st = ch.dual(np.full(k, 1 / k))
        read = ch.readout(st)
        out["uniform_round_trip_error"] = float(max(abs(v - 1 / k) for v in read["joint"].values()))
    gap = ssb.goldstone_gap_report(act, sub)
    out["goldstone_gap"] = gap["gap"]
    out["goldstone_irrep_content"] = gap["irrep_content"]
    out["goldstone"] = gap
    return out


def phase_diagram_analysis(spec: ModelSpec, opts: dict) -> dict:
    act, pi = _field_setup(spec)
    return {"orbits": ssb.phase_diagram(act, pi)}


_PAULI = {"X": np.array([[0, 1], [1, 0]], dtype=complex), "Y": np.array([[0, -1j], [1j, 0]]),
          "Z": np.diag([1.0, -1.0]).astype(complex)}


def _thermal_setup(spec: ModelSpec):
    raw = spec.raw.get("thermal")
    if raw is None:
        raise SpecError("thermal", "section required by this analysis")
    h = parse_matrix(raw.get("hamiltonian"), "thermal.hamiltonian")
    betas = raw.get("betas")
    if not isinstance(betas, list) or not betas:
        raise SpecError("thermal.betas", "expected a non-empty list")
    extras = tuple(tuple(e) for e in raw.get("extras", ()))
    try:
        grid = th.ClassifyingGrid(tuple(float(b) for b in betas), extras)
        fam = th.ReferenceStateFamily(h, grid)
    except (TypeError, ValueError) as exc:
        raise SpecError("thermal", str(exc)) from exc
    n = fam.dim
    named = {"I": np.eye(n, dtype=complex), "H": fam.hamiltonian, "H2": fam.hamiltonian @ fam.hamiltonian}
    if n == 2:
        named.update(_PAULI)
    _, vecs = np.linalg.eigh(fam.hamiltonian)
    for k in range(n):
        named[f"P{k}"] = np.outer(vecs[:, k], vecs[:, k].conj())
    for name, m in (raw.get("definitions") or {}).items():
        named[name] = parse_matrix(m, f"thermal.definitions.{name}", n)

    def subspace(names, path):
        if not isinstance(names, list) or not all(isinstance(x, str) for x in names):
            raise SpecError(path, "expected a list of observable names")
        missing = [x for x in names if x not in named]
        if missing:
            raise SpecError(path, f"unknown observables {missing}")
        try:
            return th.ObservableSubspace(tuple(named[x] for x in names), tuple(names))
        except ValueError as exc:
            raise SpecError(path, str(exc)) from exc

    s = subspace(raw.get("observables", ["I", "H"]), "thermal.observables")
    chain = [subspace(c, f"thermal.chain[{i}]") for i, c in enumerate(raw.get("chain", []))]
    states = {}
    for name, d in (raw.get("states") or {}).items():
        path = f"thermal.states.{name}"
        if isinstance(d, dict) and "gibbs_index" in d:
            states[name] = fam.state(int(d["gibbs_index"]))
        elif isinstance(d, dict) and "mixture" in d:
            w = np.real(parse_vector(d["mixture"], f"{path}.mixture"))
            try:
                states[name] = th.cq_channel(fam, w)
            except ValueError as exc:
                raise SpecError(path, str(exc)) from exc
        else:
            states[name] = parse_state(d, path, n)
    return raw, fam, s, chain, states


def thermal_analysis(spec: ModelSpec, opts: dict) -> dict:
    raw, fam, s, chain, states = _thermal_setup(spec)
    disc = th.check_discrimination(fam, s)
    subset = raw.get("norm_bound_subset")
    out_states = {}
    for name, st in states.items():
        rho = th.is_S_thermal(fam, st, s)
        try:
            split = th.signed_extension(fam, st, s)
            neg = split.negative_mass
        except th.NoExtension:
            neg = None
        nb = th.check_norm_bound(fam, st, s, subset)
        entry = {"feasible": rho is not None,
                 "witness_measure": None if rho is None else rho.as_dict(fam.grid),
                 "nu_minus_mass": neg, "norm_bound_ok": nb.holds, "norm_bound_optimum": nb.optimum,
                 "norm_bound_certificate": nb.coefficients}
        if chain:
            entry["max_thermal_index"] = th.maximal_thermal_subspace(fam, st, chain)["max_thermal_index"]
        if disc:
            try:
                entry["inverse"] = th.invert_on_K(fam, st, s).as_dict(fam.grid)
            except th.NotInK:
                entry["inverse"] = None
        out_states[name] = entry
    return {"grid": list(fam.grid.labels), "observables": list(s.names),
            "discrimination": {"discriminates": disc.discriminates, "separates_points": disc.separates_points,
                               "rank": disc.rank, "grid_size": disc.grid_size},
            "states": out_states,
            "deviation_abc": th.classify_deviation(fam, states, s) if states else None}


def _measurement_setup(spec: ModelSpec):
    raw = spec.raw.get("measurement")
    if raw is None:
        raise SpecError("measurement", "section required by this analysis")
    obs = ms.SpectralObservable(parse_matrix(raw.get("observable"), "measurement.observable"))
    c = raw.get("coupling", "identity")
    if c == "controlled_shift":
        v = ms.controlled_shift(obs.dim)
    elif c == "identity":
        v = np.eye(obs.dim * obs.size, dtype=complex)
    elif isinstance(c, dict) and "partial_swap" in c:
        v = ms.partial_swap(float(c["partial_swap"]))
    elif isinstance(c, dict) and "unitary" in c:
        v = parse_matrix(c["unitary"], "measurement.coupling.unitary")
    else:
        raise SpecError("measurement.coupling", "expected 'controlled_shift', 'identity', {partial_swap} or {unitary}")
    mu0 = raw.get("mu0", [1.0] + [0.0] * (obs.size - 1))
    try:
        cm = ms.CouplingModel(v, np.real(parse_vector(mu0, "measurement.mu0")), obs.dim)
    except ValueError as exc:
        raise SpecError("measurement.coupling", str(exc)) from exc
    states = {name: parse_state(d, f"measurement.states.{name}", obs.dim)
              for name, d in (raw.get("states") or {}).items()}
    return raw, obs, cm, states


def measurement_analysis(spec: ModelSpec, opts: dict) -> dict:
    raw, obs, cm, states = _measurement_setup(spec)
    gen = nx.rng(11)
    tests = list(states.values()) + [random_state(obs.dim, gen) for _ in range(int(opts.get("random_states", 100)))]
    scheme = ms.verify_measurement_scheme(obs, cm, tests)
    out = {"spectrum": obs.spectrum, "scheme_ok": scheme["scheme_ok"], "max_deviation": scheme["max_deviation"],
           "outcome_distributions": {k: ms.outcome_distribution(obs, st) for k, st in states.items()},
           "note": ms.CONTINUOUS_NOTE}
    try:
        inst = ms.build_instrument(obs, cm)
        out["instrument_distributions"] = {k: [inst.probability([a], st) for a in obs.spectrum]
                                           for k, st in states.items()}
    except ms.NotAnInstrumentCoupling as exc:
        out["instrument_distributions"] = None
        out["instrument_error"] = str(exc)
    out["realizability"] = ms.realizability_factorization(obs, cm, int(opts.get("random_states", 100)))
    fam_raw = raw.get("family")
    if fam_raw is not None:
        fam = ms.PreparationFamily(tuple(parse_state(d, f"measurement.family[{i}]", obs.dim)
                                         for i, d in enumerate(fam_raw)))
        rep = ms.check_repeatability(obs, fam)
        out["repeatability"] = {"repeatable": rep["repeatable"], "deviation": rep["deviation"]}
    prep = raw.get("preparation")
    if prep is not None:
        target = parse_state(prep.get("target"), "measurement.preparation.target", obs.dim)
        init = prep.get("initial")
        init = None if init is None else parse_state(init, "measurement.preparation.initial", obs.dim)
        r = ms.prepare_state(target, cm, int(prep.get("max_steps", 200)), init)
        out["preparation"] = {"converged": r["converged"], "steps": r["steps"],
                              "final_distance": r["final_distance"],
                              "positive_and_trace_preserving": r["positive_and_trace_preserving"]}
    return out


ANALYSES: dict[str, Callable[[ModelSpec, dict], dict]] = {
    "character_table": character_table_analysis,
    "sectors": sectors_analysis,
    "charging": charging_analysis,
    "ssb": ssb_analysis,
    "phase_diagram": phase_diagram_analysis,
    "thermal": thermal_analysis,
    "measurement": measurement_analysis,
}


def run_analysis(spec: ModelSpec, name: str, opts: dict) -> dict:
    if name not in ANALYSES:
        raise SpecError("analyses", f"unknown analysis '{name}' (known: {sorted(ANALYSES)})")
    return ANALYSES[name](spec, opts)
