"""Batch drivers: disorder Monte-Carlo, figure-style report generation,
run configuration, and deterministic file writers.

Determinism contract: identical seed and configuration produce byte-identical
output files within this implementation. All randomness flows through PCG64
generators keyed by SeedSequence(entropy=seed, spawn_key=(tags...)) so cases,
groups, and resamples own independent substreams regardless of execution
order; JSON floats print with repr (shortest round-trip form).
"""
from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields, replace

import numpy as np

from .errors import ConfigError
from .loops import (
    DIRECTIONS,
    EvolutionReport,
    LoopSchedule,
    bell_eigenstate,
    evolve,
    loop1_schedule,
    loop2_schedule,
    optimize_schedule,
)
from .metrics import BELL_LABELS, bell_index, bell_state, classify, density_matrix, fidelity_pure
from .spectrum import find_ep, riemann_surface, surface_csv
from .tomo import TomoConfig, bootstrap_error, counts_csv, reconstruct, simulate_counts
from .walk import WalkParams

GRANULARITIES = ("per_step", "per_loop")
INPUT_KINDS = ("eigenstate", "bell")


def thread_count() -> int:
    """Worker cap from EPLOOP_THREADS (default 1, floor 1)."""
    try:
        return max(1, int(os.environ.get("EPLOOP_THREADS", "1")))
    except ValueError:
        return 1


def _pmap(fn, items):
    items = list(items)
    n = thread_count()
    if n > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=n) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


@dataclass(frozen=True)
class DisorderConfig:
    strength: float = 0.025
    groups: int = 10
    seed: int = 1234
    granularity: str = "per_step"

    def __post_init__(self):
        if self.strength < 0:
            raise ConfigError(f"disorder strength must be >= 0, got {self.strength}")
        if self.groups < 1:
            raise ConfigError(f"disorder needs >= 1 group, got {self.groups}")
        if self.granularity not in GRANULARITIES:
            raise ConfigError(f"granularity must be one of {GRANULARITIES}, got {self.granularity!r}")


@dataclass(frozen=True)
class CaseStats:
    input_label: str
    direction: str
    reference_label: str
    base_fidelity: float
    mean_fidelity: float
    sd_fidelity: float
    unchanged_fraction: float

    @property
    def drop(self) -> float:
        return self.base_fidelity - self.mean_fidelity


@dataclass(frozen=True)
class DisorderSummary:
    cases: tuple[CaseStats, ...]

    @property
    def unchanged_fraction(self) -> float:
        return float(np.mean([c.unchanged_fraction for c in self.cases]))

    @property
    def max_drop(self) -> float:
        return max(c.drop for c in self.cases)


def _perturbed(schedule: LoopSchedule, rng: np.random.Generator, cfg: DisorderConfig) -> LoopSchedule:
    if cfg.granularity == "per_loop":
        dth = rng.uniform(-cfg.strength, cfg.strength)
        dph = rng.uniform(-cfg.strength, cfg.strength)
        steps = tuple(
            replace(p, theta1=p.theta1 + dth, phi=p.phi + dph) for p in schedule.steps
        )
    else:
        steps = []
        for p in schedule.steps:
            dth = rng.uniform(-cfg.strength, cfg.strength)
            dph = rng.uniform(-cfg.strength, cfg.strength)
            steps.append(replace(p, theta1=p.theta1 + dth, phi=p.phi + dph))
        steps = tuple(steps)
    return LoopSchedule(steps=steps, direction=schedule.direction, label=schedule.label)


def _case_input(label, kind: str, p: WalkParams) -> np.ndarray:
    if kind == "eigenstate":
        return bell_eigenstate(label, p)
    return bell_state(label)


def disorder_run(
    base,
    inputs,
    cfg: DisorderConfig,
    engine: str = "simplified",
    input_kind: str = "eigenstate",
) -> DisorderSummary:
    """Monte-Carlo perturbation study over one schedule or a list of them.

    Cases enumerate (schedule, input) pairs schedule-major. Each group
    perturbs theta1 and phi by independent uniform draws in
    (-strength, strength) at the configured granularity, evolves the case,
    and scores fidelity to the unperturbed run's classified output. Case i,
    group g draws from substream (seed, spawn_key=(i, g)), so results do not
    depend on execution order or worker count.
    """
    if input_kind not in INPUT_KINDS:
        raise ConfigError(f"input_kind must be one of {INPUT_KINDS}, got {input_kind!r}")
    schedules = [base] if isinstance(base, LoopSchedule) else list(base)
    if not schedules:
        raise ConfigError("disorder_run needs at least one schedule")
    cases = [(sched, label) for sched in schedules for label in inputs]

    def one_case(item) -> CaseStats:
        case_idx, (sched, label) = item
        psi0 = _case_input(label, input_kind, sched.steps[0])
        base_rep = evolve(sched, psi0, engine=engine, record_steps=False)
        ref_idx = bell_index(base_rep.classified_output)
        base_f = base_rep.fidelities[ref_idx - 1]
        fids, unchanged = [], 0
        for g in range(cfg.groups):
            rng = np.random.Generator(
                np.random.PCG64(np.random.SeedSequence(entropy=cfg.seed, spawn_key=(case_idx, g)))
            )
            rep = evolve(_perturbed(sched, rng, cfg), psi0, engine=engine, record_steps=False)
            fids.append(rep.fidelities[ref_idx - 1])
            if rep.classified_output == base_rep.classified_output:
                unchanged += 1
        return CaseStats(
            input_label=BELL_LABELS[bell_index(label) - 1],
            direction=sched.direction,
            reference_label=base_rep.classified_output,
            base_fidelity=float(base_f),
            mean_fidelity=float(np.mean(fids)),
            sd_fidelity=float(np.std(fids)),
            unchanged_fraction=unchanged / cfg.groups,
        )

    stats = _pmap(one_case, enumerate(cases))
    return DisorderSummary(cases=tuple(stats))


@dataclass(frozen=True)
class RunConfig:
    loop: int = 1
    n_steps: int = 100
    directions: tuple[str, ...] = ("cw", "ccw")
    engine: str = "full"
    inputs: tuple[str, ...] = BELL_LABELS
    input_kind: str = "eigenstate"
    tomography: bool = False
    counts_per_basis: int = 10000
    psd_projection: bool = False
    resamples: int = 100
    disorder: bool = False
    strength: float = 0.025
    groups: int = 10
    granularity: str = "per_step"
    seed: int = 1234
    record_steps: bool = False

    def __post_init__(self):
        if self.loop not in (1, 2):
            raise ConfigError(f"loop must be 1 or 2, got {self.loop!r}")
        if self.n_steps < 1:
            raise ConfigError(f"n_steps must be >= 1, got {self.n_steps}")
        for d in self.directions:
            if d not in DIRECTIONS:
                raise ConfigError(f"unknown direction {d!r}")
        if self.engine not in ("full", "simplified"):
            raise ConfigError(f"engine must be full or simplified, got {self.engine!r}")
        for label in self.inputs:
            bell_index(label)
        if self.input_kind not in INPUT_KINDS:
            raise ConfigError(f"input_kind must be one of {INPUT_KINDS}, got {self.input_kind!r}")
        if self.tomography and not self.inputs:
            raise ConfigError("tomography needs at least one evolution input")
        if self.counts_per_basis < 1:
            raise ConfigError(f"counts_per_basis must be >= 1, got {self.counts_per_basis}")
        if self.resamples < 2:
            raise ConfigError(f"resamples must be >= 2, got {self.resamples}")
        DisorderConfig(strength=self.strength, groups=self.groups, seed=self.seed, granularity=self.granularity)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        coerced = dict(data)
        for key in ("directions", "inputs"):
            if key in coerced:
                coerced[key] = tuple(coerced[key])
        try:
            return cls(**coerced)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    def schedule(self, direction: str) -> LoopSchedule:
        maker = loop1_schedule if self.loop == 1 else loop2_schedule
        return maker(self.n_steps, direction)

    def tomo_config(self, seed: int | None = None) -> TomoConfig:
        return TomoConfig(
            counts_per_basis=self.counts_per_basis,
            seed=self.seed if seed is None else seed,
            psd_projection=self.psd_projection,
        )

    def disorder_config(self) -> DisorderConfig:
        return DisorderConfig(
            strength=self.strength, groups=self.groups, seed=self.seed, granularity=self.granularity
        )


def _interleave(values: np.ndarray) -> list[float]:
    flat = np.asarray(values, dtype=complex).reshape(-1)
    out = []
    for z in flat:
        out.append(float(z.real))
        out.append(float(z.imag))
    return out


def report_dict(report: EvolutionReport, include_steps: bool | None = None) -> dict:
    """Evolution report as a JSON-ready dict with fixed key order."""
    if include_steps is None:
        include_steps = report.per_step is not None
    out = {
        "input": report.input_label,
        "direction": report.direction,
        "N": report.n_steps,
        "loop": report.loop_label,
        "engine": report.engine,
        "output_state": _interleave(report.output_state),
        "density": _interleave(report.output_density),
        "fidelities": {
            label: float(f) for label, f in zip(BELL_LABELS, report.fidelities)
        },
        "classified": report.classified_output,
    }
    if include_steps and report.per_step is not None:
        out["steps"] = [
            {
                "n": rec.index,
                "weights": [float(w) for w in rec.weights],
                "weights_raw": [float(w) for w in rec.weights_raw],
                "log_magnitude": float(rec.log_magnitude),
            }
            for rec in report.per_step
        ]
    return out


def dump_json(obj) -> str:
    return json.dumps(obj, separators=(",", ":")) + "\n"


def write_text(path: str, text: str) -> str:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return path


def report_csv(reports) -> str:
    lines = ["input,direction,N,loop,engine,classified,f_zeta1,f_zeta2,f_zeta3,f_zeta4"]
    for r in reports:
        fid = ",".join(f"{f:.12g}" for f in r.fidelities)
        lines.append(
            f"{r.input_label},{r.direction},{r.n_steps},{r.loop_label},{r.engine},{r.classified_output},{fid}"
        )
    return "\n".join(lines) + "\n"


def _derived_seed(seed: int, *tags: int) -> int:
    return int(np.random.SeedSequence(entropy=seed, spawn_key=tags).generate_state(1, np.uint64)[0])


def disorder_csv(rows) -> str:
    """Case table `direction,input,mean_on,sd_on,mean_off,sd_off`."""
    lines = ["direction,input,mean_on,sd_on,mean_off,sd_off"]
    for on, off in rows:
        lines.append(
            f"{on.direction},{on.input_label},{on.mean_fidelity:.12g},{on.sd_fidelity:.12g},"
            f"{off.mean_fidelity:.12g},{off.sd_fidelity:.12g}"
        )
    return "\n".join(lines) + "\n"


def _fig1b(out_dir: str, cfg: RunConfig) -> list[str]:
    samples = riemann_surface((-0.3, 0.3, 61), (-0.8, 0.0, 61))
    ep = find_ep()
    return [
        write_text(os.path.join(out_dir, "fig1b_surface.csv"), surface_csv(samples)),
        write_text(
            os.path.join(out_dir, "fig1b_ep.json"),
            dump_json({"phi": ep.phi, "theta1": ep.theta1, "residual": ep.residual}),
        ),
    ]


def _input_report(label, schedule: LoopSchedule, input_kind: str) -> dict:
    psi = _case_input(label, input_kind, schedule.steps[0])
    cls = classify(psi)
    return {
        "input": BELL_LABELS[bell_index(label) - 1],
        "direction": "none",
        "N": 0,
        "loop": schedule.label,
        "engine": "input",
        "output_state": _interleave(psi),
        "density": _interleave(density_matrix(psi)),
        "fidelities": {lab: float(f) for lab, f in zip(BELL_LABELS, cls.fidelities)},
        "classified": cls.label,
    }


def _fig2(out_dir: str, cfg: RunConfig) -> list[str]:
    paths = []
    sched0 = loop1_schedule(100, "cw")
    for label in BELL_LABELS:
        paths.append(
            write_text(
                os.path.join(out_dir, f"fig2_input_{label}.json"),
                dump_json(_input_report(label, sched0, cfg.input_kind)),
            )
        )
    cases = [(d, label) for d in DIRECTIONS for label in BELL_LABELS]

    def one(case):
        direction, label = case
        sched = loop1_schedule(100, direction)
        psi0 = _case_input(label, cfg.input_kind, sched.steps[0])
        return evolve(sched, psi0, engine="full", input_label=label, record_steps=cfg.record_steps)

    for (direction, label), rep in zip(cases, _pmap(one, cases)):
        paths.append(
            write_text(
                os.path.join(out_dir, f"fig2_{direction}_{label}.json"),
                dump_json(report_dict(rep)),
            )
        )
    return paths


def _fig4(out_dir: str, cfg: RunConfig, optimized: bool = False) -> list[str]:
    paths = []
    if optimized:
        result = optimize_schedule(8)
        schedules = result.schedules()
        paths.append(
            write_text(
                os.path.join(out_dir, "fig4_schedule.json"),
                dump_json(
                    {
                        "increments": list(result.increments),
                        "objective": result.objective,
                        "baseline_objective": result.baseline_objective,
                    }
                ),
            )
        )
    else:
        schedules = {d: loop1_schedule(8, d) for d in DIRECTIONS}
    cases = [(d, label) for d in DIRECTIONS for label in BELL_LABELS]

    def one(item):
        case_idx, (direction, label) = item
        sched = schedules[direction]
        psi0 = _case_input(label, cfg.input_kind, sched.steps[0])
        rep = evolve(sched, psi0, engine="simplified", input_label=label, record_steps=cfg.record_steps)
        tomo_cfg = cfg.tomo_config(seed=_derived_seed(cfg.seed, case_idx))
        counts = simulate_counts(rep.output_density, tomo_cfg)
        rho_rec = reconstruct(counts, tomo_cfg)
        sds = bootstrap_error(counts, tomo_cfg, cfg.resamples)
        return rep, counts, rho_rec, sds

    for (direction, label), (rep, counts, rho_rec, sds) in zip(
        cases, _pmap(one, enumerate(cases))
    ):
        body = report_dict(rep)
        body["reconstructed_density"] = _interleave(rho_rec)
        rec_cls = classify_density_fidelities(rho_rec)
        body["reconstructed_fidelities"] = rec_cls
        body["bootstrap_sd"] = {lab: float(s) for lab, s in zip(BELL_LABELS, sds)}
        paths.append(
            write_text(
                os.path.join(out_dir, f"fig4_{direction}_{label}.json"), dump_json(body)
            )
        )
        paths.append(
            write_text(
                os.path.join(out_dir, f"fig4_{direction}_{label}_counts.csv"), counts_csv(counts)
            )
        )
    return paths


def classify_density_fidelities(rho: np.ndarray) -> dict:
    return {
        label: float(fidelity_pure(bell_state(j), rho))
        for j, label in enumerate(BELL_LABELS, start=1)
    }


def _fig5(out_dir: str, cfg: RunConfig) -> list[str]:
    paths = []
    off_cfg = DisorderConfig(strength=0.0, groups=1, seed=cfg.seed, granularity=cfg.granularity)
    for n_steps in (8, 100):
        scheds = [loop1_schedule(n_steps, d) for d in DIRECTIONS]
        on = disorder_run(scheds, BELL_LABELS, cfg.disorder_config(), engine="simplified", input_kind=cfg.input_kind)
        off = disorder_run(scheds, BELL_LABELS, off_cfg, engine="simplified", input_kind=cfg.input_kind)
        rows = list(zip(on.cases, off.cases))
        paths.append(
            write_text(os.path.join(out_dir, f"fig5_disorder_N{n_steps}.csv"), disorder_csv(rows))
        )
    return paths


FIGURES = ("fig1b", "fig2", "fig4", "fig5")


def reproduce_figure(which: str, out_dir: str, cfg: RunConfig | None = None, optimized: bool = False) -> list[str]:
    """Generate the report files behind one figure-style dataset.

    fig1b: quasienergy surface grid + EP location. fig2: N=100 full-engine
    densities for 4 inputs and 8 evolution cases. fig4: N=8 simplified-engine
    cases with simulated tomography (equal spacing, or the optimizer's
    schedule when optimized=True). fig5: disorder summary tables at N=8 and
    N=100.
    """
    if which not in FIGURES:
        raise ConfigError(f"figure must be one of {FIGURES}, got {which!r}")
    cfg = cfg or RunConfig()
    os.makedirs(out_dir, exist_ok=True)
    if which == "fig1b":
        return _fig1b(out_dir, cfg)
    if which == "fig2":
        return _fig2(out_dir, cfg)
    if which == "fig4":
        return _fig4(out_dir, cfg, optimized=optimized)
    return _fig5(out_dir, cfg)
