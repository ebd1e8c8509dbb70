"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Every criterion is computed by a ``suite_N(seed)`` function returning a
JSON-ready summary, so the determinism criterion can rerun them all.
Run directly with ``python3 tests/test_acceptance.py``.
"""
from __future__ import annotations

import functools
import json
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from helpers import (PAULI_X, PAULI_Z, block_swap_model, commutant_oracle, controlled_shift_model,  # noqa: E402
                     damping_model, mixed_model, preset_models, random_covariant_model,
                     random_inner_action, s3_z3_model)
from sectorlab import numerics as nx  # noqa: E402
from sectorlab.algebra import StateFunctional, random_state  # noqa: E402
from sectorlab.cli import run_spec  # noqa: E402
from sectorlab.groups import inner_action  # noqa: E402
from sectorlab.measurement import (CouplingModel, SpectralObservable, build_instrument,  # noqa: E402
                                   central_decomposition_composite, conditional_output_state,
                                   outcome_distribution, partial_swap, prepare_state,
                                   verify_measurement_scheme)
from sectorlab.report import render_json  # noqa: E402
from sectorlab.sectors import (ChargeDistribution, build_charging_channel, decompose_sectors,  # noqa: E402
                               realize_charge_vector)
from sectorlab.ssb import (BlockRepresentation, SubgroupPair, classify_symmetry,  # noqa: E402
                           compute_ssb_centres, implementer_space, induce_representation, phase_diagram)
from sectorlab.thermal import (ClassifyingGrid, ObservableSubspace, ReferenceStateFamily,  # noqa: E402
                               check_discrimination, check_norm_bound, cq_channel, invert_on_K,
                               is_S_thermal, moment_matrix, signed_extension, thermal_function)

SEED = nx.DEFAULT_SEED
MODELS_DIR = Path(__file__).resolve().parent.parent / "models"
VERDICTS: dict[int, str] = {}


def verdict(n: int, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}"
    VERDICTS[n] = line
    print(line)
    assert ok, line


@functools.lru_cache(maxsize=None)
def _decompositions(seed: int):
    """Presets plus 50 random covariant models, decomposed once per seed."""
    with nx.settings(seed=seed):
        gen = nx.rng(101)
        models = [(name, rep, None) for name, rep in preset_models()]
        for k in range(50):
            _, rep, mult = random_covariant_model(gen)
            models.append((f"random{k}", rep, mult))
        start = time.perf_counter()
        decs = [decompose_sectors(inner_action(rep), rep) for _, rep, _ in models]
        elapsed = time.perf_counter() - start
    return models, decs, elapsed


def suite_1(seed: int = SEED) -> dict:
    models, decs, _ = _decompositions(seed)
    worst, mismatches = 0.0, []
    for (name, rep, mult), dec in zip(models, decs):
        worst = max(worst, max(dec.deviations().values()))
        got = sorted((s.rank, s.multiplicity) for s in dec.sectors)
        if got != commutant_oracle(rep):
            mismatches.append(name)
        if mult is not None and {s.label: s.multiplicity for s in dec.sectors} != mult:
            mismatches.append(name + ":known")
    return {"models": len(models), "max_deviation": worst, "oracle_mismatches": mismatches}


def suite_2(seed: int = SEED) -> dict:
    models, decs, _ = _decompositions(seed)
    dim_mismatch, worst = [], 0.0
    for (name, _, _), dec in zip(models, decs):
        if dec.center.dim != len(dec.sectors):
            dim_mismatch.append(name)
        worst = max(worst, dec.projection_match())
    return {"models": len(models), "center_dim_mismatches": dim_mismatch, "projection_deviation": worst}


def suite_3(seed: int = SEED) -> dict:
    with nx.settings(seed=seed):
        gen = nx.rng(103)
        decs = [decompose_sectors(inner_action(rep), rep) for _, rep in preset_models()]
        charge_err = 0.0
        for k in range(200):
            ch = build_charging_channel(decs[k % len(decs)])
            w = gen.dirichlet(np.ones(len(ch.labels)))
            w[gen.random(len(w)) < 0.2] = 0  # some sectors empty
            if w.sum() == 0:
                w[0] = 1
            nu = ChargeDistribution.from_mapping(ch.labels, w / w.sum())
            back = ch.readout(ch.dual(nu)).as_array()
            pure = ch.readout(StateFunctional.from_vector(realize_charge_vector(nu, ch))).as_array()
            charge_err = max(charge_err, float(np.abs(back - nu.as_array()).max()),
                             float(np.abs(pure - nu.as_array()).max()))
        thermal_err, skipped = 0.0, 0
        for _ in range(200):
            k = int(gen.integers(3, 9))
            n = int(gen.integers(k, 9))
            energies = np.arange(n) * gen.uniform(0.8, 1.5)
            betas = np.sort(gen.choice(np.linspace(0.1, 3.0, 300), size=k, replace=False))
            fam = ReferenceStateFamily(np.diag(energies), ClassifyingGrid(tuple(betas)))
            s = ObservableSubspace(tuple(np.diag(np.eye(n)[i]) for i in range(n)))
            if not check_discrimination(fam, s).discriminates:
                skipped += 1
                continue
            rho = gen.dirichlet(np.ones(k))
            rho[gen.random(k) < 0.3] = 0
            rho = rho / rho.sum() if rho.sum() > 0 else np.eye(k)[0]
            got = invert_on_K(fam, cq_channel(fam, rho), s).weights
            thermal_err = max(thermal_err, float(np.abs(got - rho).max()))
    return {"charge_round_trips": 200, "charge_error": charge_err, "thermal_round_trips": 200 - skipped,
            "thermal_skipped": skipped, "thermal_error": thermal_err}


def suite_4(seed: int = SEED) -> dict:
    with nx.settings(seed=seed):
        _, alg, act = block_swap_model()
        swap = classify_symmetry(act, BlockRepresentation(alg, (1, 1)))
        gen = nx.rng(104)
        inner = []
        for _ in range(50):
            a, mult = random_inner_action(gen)
            inner.append(classify_symmetry(a, BlockRepresentation(a.algebra, mult)).status)
        _, malg, mact = mixed_model()
        diagram = phase_diagram(mact, BlockRepresentation(malg, (1, 1, 1)))
    return {"block_swap": {"status": swap.status, "orbit_sizes": [len(o["orbit_blocks"]) for o in swap.orbits]},
            "inner_unbroken": sum(s == "unbroken" for s in inner), "inner_total": len(inner),
            "mixed": sorted([o["status"], len(o["orbit_blocks"])] for o in diagram)}


def suite_5(seed: int = SEED) -> dict:
    out = {}
    with nx.settings(seed=seed):
        g, alg, act = block_swap_model()
        cases = [("block_swap", act, BlockRepresentation(alg, (1, 0)), (0,), [1])]
        g3, alg3, act3, even = s3_z3_model()
        odd = [x for x in range(g3.order) if x not in even]
        cases.append(("s3_z3", act3, BlockRepresentation(alg3, (1, 0)), even, odd))
        for name, a, pi, sub, broken in cases:
            pair = SubgroupPair(a.group, sub)
            centres = compute_ssb_centres(induce_representation(pi, pair, a), strict=False)
            exp = centres.expected
            out[name] = {
                "dims": list(centres.dims),
                "expected": [exp["field"], exp["observable"], exp["dual"]],
                "checks_ok": all(c["ok"] for c in centres.checks.values()),
                "max_projection_deviation": max(c.get("deviation", 0.0) for c in centres.checks.values()),
                "broken_implementer_dims": [int(implementer_space(pi, a, x).shape[0]) for x in broken],
            }
    return out


def _herm(gen, n):
    a = gen.normal(size=(n, n)) + 1j * gen.normal(size=(n, n))
    return (a + a.conj().T) / 2


def suite_6(seed: int = SEED) -> dict:
    band = 1e-7
    stats = {"triples": 500, "comparisons": 0, "agree": 0, "boundary_band": 0, "mismatch": 0,
             "feasible": 0, "nu_minus_mismatch": 0, "max_chain_dim": 0}
    with nx.settings(seed=seed):
        gen = nx.rng(106)
        for _ in range(500):
            n, k = int(gen.integers(2, 4)), int(gen.integers(3, 7))
            h = _herm(gen, n)
            fam = ReferenceStateFamily(h, ClassifyingGrid(tuple(np.sort(gen.uniform(0.2, 3.0, size=k)))))
            basis = [np.eye(n)]
            for _ in range(20):  # C(S) has rank at most n, so chains stop there
                if len(basis) == min(4, n):
                    break
                phi = _herm(gen, n)
                m = moment_matrix(fam, ObservableSubspace(tuple(basis + [phi])))
                if np.linalg.svd(m, compute_uv=False)[-1] > 1e-6 * np.abs(m).max():
                    basis.append(phi)
            kind = int(gen.integers(5))
            mix = cq_channel(fam, gen.dirichlet(np.ones(k))).density
            if kind == 0:
                rho = mix
            elif kind == 1:
                rho = random_state(n, gen).density
            elif kind == 2:
                rho = ReferenceStateFamily(h, ClassifyingGrid((float(gen.uniform(0.05, 4)),))).densities[0]
            elif kind == 3:
                t = gen.uniform(0.7, 1)
                rho = t * mix + (1 - t) * random_state(n, gen).density
            else:  # close to the thermal boundary
                eps = 10 ** gen.uniform(-9, -2)
                rho = (1 - eps) * mix + eps * random_state(n, gen).density
            state = StateFunctional(rho)
            stats["max_chain_dim"] = max(stats["max_chain_dim"], len(basis))
            for d in range(2, len(basis) + 1):
                s = ObservableSubspace(tuple(basis[:d]))
                stats["comparisons"] += 1
                feasible = is_S_thermal(fam, state, s) is not None
                nb = check_norm_bound(fam, state, s)
                stats["feasible"] += feasible
                if np.isfinite(nb.optimum) and 1e-10 < nb.optimum - 1 <= band:
                    stats["boundary_band"] += 1
                    continue
                if feasible == nb.holds:
                    stats["agree"] += 1
                else:
                    stats["mismatch"] += 1
                if (signed_extension(fam, state, s).negative_mass > 1e-9) == feasible:
                    stats["nu_minus_mismatch"] += 1
        fam = ReferenceStateFamily(np.diag([0.0, 1.0]), ClassifyingGrid((0.5, 1.0, 2.0)))
        s = ObservableSubspace((np.eye(2), np.diag([0.0, 1.0])), ("I", "H"))
        plus = StateFunctional.from_vector([1, 1])
        stats["plus_feasible"] = is_S_thermal(fam, plus, s) is not None
        stats["plus_nu_minus"] = signed_extension(fam, plus, s).negative_mass
    return stats


def suite_7(seed: int = SEED) -> dict:
    betas = (0.5, 1.0, 2.0)
    fam = ReferenceStateFamily(np.diag([0.0, 1.0]), ClassifyingGrid(betas))
    got = thermal_function(fam, np.diag([0.0, 1.0]))
    oracle = np.array([np.exp(-b) / (1 + np.exp(-b)) for b in betas])
    return {"values": got, "oracle": oracle, "error": float(np.abs(got - oracle).max())}


def suite_8(seed: int = SEED) -> dict:
    obs = SpectralObservable(PAULI_Z)
    cm = controlled_shift_model()
    inst = build_instrument(obs, cm)
    with nx.settings(seed=seed):
        gen = nx.rng(108)
        states = [random_state(2, gen, rank=int(gen.integers(1, 3))) for _ in range(100)]
    scheme = verify_measurement_scheme(obs, cm, states, tol=1e-12)
    three, cond = 0.0, 0.0
    for st in states:
        spectral = outcome_distribution(obs, st)
        instrument = np.array([inst.probability([a], st) for a in obs.spectrum])
        pointer, _, _ = central_decomposition_composite(StateFunctional(cm.evolve(st.density)), 2)
        three = max(three, float(np.abs(spectral - instrument).max()), float(np.abs(spectral - pointer).max()))
        for i, a in enumerate(obs.spectrum):
            p = obs.projections[i]
            prob = st.expect(p)
            if prob > 1e-9:
                hand = p @ st.density @ p / prob
                cond = max(cond, nx.hs_norm(conditional_output_state(inst, [a], st).density - hand))
    return {"scheme_ok": scheme["scheme_ok"], "scheme_deviation": scheme["max_deviation"],
            "distribution_disagreement": three, "conditional_state_error": cond, "states": len(states)}


def suite_9(seed: int = SEED) -> dict:
    cm = damping_model()
    target = StateFunctional.from_vector([1, 0])
    runs = []
    with nx.settings(seed=seed):
        gen = nx.rng(109)
        for _ in range(20):
            r = prepare_state(target, cm, max_steps=200, initial=random_state(2, gen), tol=1e-6)
            runs.append((r["converged"], r["steps"], r["final_distance"]))
    unital = CouplingModel(partial_swap(np.pi / 8), [0.5, 0.5], 2)
    u = prepare_state(target, unital, max_steps=200)
    return {"converged": sum(c for c, _, _ in runs), "runs": len(runs), "max_steps": max(s for _, s, _ in runs),
            "max_final_distance": max(d for _, _, d in runs), "unital_converged": u["converged"],
            "unital_final_distance": u["final_distance"]}


SUITES = [suite_1, suite_2, suite_3, suite_4, suite_5, suite_6, suite_7, suite_8, suite_9]


def test_criterion_1_sector_fidelity():
    r = suite_1()
    _, _, elapsed = _decompositions(SEED)
    ok = r["max_deviation"] <= 1e-8 and not r["oracle_mismatches"] and elapsed <= 5.0
    verdict(1, ok, f"{r['models']} models, max invariant deviation {r['max_deviation']:.2e}, "
                   f"oracle mismatches {len(r['oracle_mismatches'])}, {elapsed:.2f}s")


def test_criterion_2_center_order_parameter():
    r = suite_2()
    ok = not r["center_dim_mismatches"] and r["projection_deviation"] <= 1e-8
    verdict(2, ok, f"{r['models']} models, center dimension mismatches {len(r['center_dim_mismatches'])}, "
                   f"projection deviation {r['projection_deviation']:.2e}")


def test_criterion_3_channel_round_trips():
    r = suite_3()
    ok = r["charge_error"] <= 1e-9 and r["thermal_error"] <= 1e-8
    verdict(3, ok, f"charge error {r['charge_error']:.2e} over 200, thermal error {r['thermal_error']:.2e} "
                   f"over {r['thermal_round_trips']} (skipped {r['thermal_skipped']})")


def test_criterion_4_ssb_classification():
    r = suite_4()
    ok = (r["block_swap"] == {"status": "broken", "orbit_sizes": [2]}
          and r["inner_unbroken"] == r["inner_total"] == 50
          and r["mixed"] == [["broken", 2], ["unbroken", 1]])
    verdict(4, ok, f"block swap {r['block_swap']['status']} {r['block_swap']['orbit_sizes']}, "
                   f"inner unbroken {r['inner_unbroken']}/50, mixed {r['mixed']}")


def test_criterion_5_three_centres():
    r = suite_5()
    ok = all(v["dims"] == v["expected"] and v["checks_ok"] and v["max_projection_deviation"] <= 1e-8
             and all(d == 0 for d in v["broken_implementer_dims"]) for v in r.values())
    ok = ok and r["block_swap"]["dims"] == [2, 1, 2] and r["s3_z3"]["dims"] == [2, 3, 6]
    verdict(5, ok, "; ".join(f"{k} dims {v['dims']} expected {v['expected']}, broken implementers "
                             f"{v['broken_implementer_dims']}" for k, v in r.items()))


def test_criterion_6_thermality_equivalence():
    r = suite_6()
    ok = (r["mismatch"] == 0 and r["nu_minus_mismatch"] == 0 and not r["plus_feasible"]
          and r["plus_nu_minus"] > 0)
    verdict(6, ok, f"{r['comparisons']} comparisons from 500 triples: agree {r['agree']}, band "
                   f"{r['boundary_band']}, mismatch {r['mismatch']}; |+> feasible {r['plus_feasible']}, "
                   f"nu- mass {r['plus_nu_minus']:.3f}")


def test_criterion_7_thermal_function():
    r = suite_7()
    verdict(7, r["error"] <= 1e-12, f"max error {r['error']:.2e} against the closed form")


def test_criterion_8_measurement_scheme():
    r = suite_8()
    ok = (r["scheme_ok"] and r["scheme_deviation"] <= 1e-12 and r["distribution_disagreement"] <= 1e-9
          and r["conditional_state_error"] <= 1e-9)
    verdict(8, ok, f"scheme deviation {r['scheme_deviation']:.2e} on {r['states']} states, distributions "
                   f"agree to {r['distribution_disagreement']:.2e}, conditional states {r['conditional_state_error']:.2e}")


def test_criterion_9_preparation():
    r = suite_9()
    ok = (r["converged"] == r["runs"] == 20 and r["max_steps"] <= 200 and r["max_final_distance"] < 1e-6
          and not r["unital_converged"])
    verdict(9, ok, f"converged {r['converged']}/20 within {r['max_steps']} steps, final distance "
                   f"{r['max_final_distance']:.2e}; unital counterexample reached: {r['unital_converged']}")


def _cli(model: Path, *extra: str) -> bytes:
    return subprocess.run([sys.executable, "-m", "sectorlab", "--input", str(model), "--seed", "7", *extra],
                          capture_output=True, check=False).stdout


def test_criterion_10_determinism():
    differing = []
    for suite in SUITES:
        _decompositions.cache_clear()
        first = render_json(suite(SEED))
        _decompositions.cache_clear()
        if render_json(suite(SEED)) != first:
            differing.append(suite.__name__)
    models = sorted(MODELS_DIR.glob("*.json"))
    for model in models:
        text = model.read_text()
        a = render_json(run_spec(text, seed=7))
        b = render_json(run_spec(text, seed=7, jobs=4))
        if a != b or json.loads(a)["seed"] != 7:
            differing.append(model.name)
    for model in models[:2]:
        if _cli(model) != _cli(model, "--jobs", "3"):
            differing.append(model.name + " (cli)")
    verdict(10, not differing and len(models) > 0,
            f"{len(SUITES)} suites and {len(models)} models rerun; differing: {differing or 'none'}")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q", "-s"]))
