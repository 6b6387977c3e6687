"""Command-line front end.

    gausschord simulate scenario.toml
    gausschord list-models
    gausschord print-schema
    gausschord --version

``simulate`` runs the configured tasks in order and writes ``report.json``
plus data files to the output directory (``output.dir`` in the config,
overridden by the ``GAUSSCHORD_OUTPUT_DIR`` environment variable).  Exit
codes: 0 success, 2 invalid configuration, 3 numerical failure (the failure
time and component index are recorded in the report).
"""

from __future__ import annotations

import argparse
import inspect
import json
import math
import os
import sys
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, load, schema_text
from .core import (AliasWarning, GaussChordError, J, NonFiniteError,
                   SingularMError, TruncationWarning, build_coupling)
from .fock import (ChordSampler, FockSpace, build_hamiltonian_matrix,
                   density_from_kets, integrate, lindblad_operator)
from .hamiltonian import BUILTIN, make_model
from .heller import HellerState, unitary_equivalence_check
from .propagator import (CSV_COLUMNS, StepControl, Trajectory, evolve_ensemble,
                         probe_residual, write_csv)
from .quadratic_exact import exact_coeffs, flow_for
from .states import (ChordEnsemble, SqueezedSpec, cat_ensemble, coherent_chord)
from .transforms import (GridSpec, auto_grid, eval_chord, purity,
                         wigner_from_chord)

ENV_OUTPUT_DIR = "GAUSSCHORD_OUTPUT_DIR"
EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3

FOCK_CSV_COLUMNS = ["t", "xi_p", "xi_q", "re_gauss", "im_gauss",
                    "re_fock", "im_fock", "abs_err"]
LEAKAGE_LIMIT = 1e-8


# -- scenario assembly --------------------------------------------------------

@dataclass
class Scenario:
    cfg: dict
    hbar: float
    model: object
    coupling: object
    ensemble: ChordEnsemble
    specs: list
    control: StepControl
    t1: float


def _spec(params, kind):
    omega = params.get("omega", 1.0)
    if kind == "coherent" and omega != 1.0:
        raise ConfigError("initial/params/omega: a coherent state has omega = 1; "
                          "use kind = \"squeezed\"")
    return SqueezedSpec(params["center"], omega)


def build_scenario(cfg: dict) -> Scenario:
    hbar = float(cfg["hbar"])
    ham = cfg["hamiltonian"]
    try:
        model = make_model(ham["name"], **ham.get("params", {}))
        coupling = build_coupling(cfg["coupling"]["l_re"], cfg["coupling"]["l_im"], hbar)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"hamiltonian/coupling: {exc}") from None

    init = cfg["initial"]
    kind, params = init["kind"], init["params"]
    specs = []
    try:
        if kind in ("coherent", "squeezed"):
            specs = [_spec(params, kind)]
            ensemble = ChordEnsemble([(1.0, coherent_chord(specs[0], hbar))])
        elif kind == "cat":
            specs = [_spec(params["a"], "squeezed"), _spec(params["b"], "squeezed")]
            ensemble = cat_ensemble(*specs, hbar)
        else:
            path = Path(cfg.get("_base_dir", ".")) / params["path"]
            ensemble = ChordEnsemble.from_json(path.read_text())
            if not len(ensemble):
                raise ValueError("ensemble file has no components")
        if init.get("normalize", True):
            ensemble = ensemble.normalized(hbar)
    except (OSError, KeyError, ValueError) as exc:
        raise ConfigError(f"initial: {exc}") from None

    tm = cfg["time"]
    try:
        control = StepControl(dt=tm["dt"], record_every=tm["record_every"],
                              error_monitor=tm["error_monitor"])
    except ValueError as exc:
        raise ConfigError(f"time: {exc}") from None
    return Scenario(cfg, hbar, model, coupling, ensemble, specs, control, float(tm["t1"]))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return [_jsonable(obj.real), _jsonable(obj.imag)]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def probe_chords(radius, centre=(0.0, 0.0)):
    """21 chord points: the centre plus ten on each of two rings."""
    ang = 2.0 * np.pi * np.arange(10) / 10.0
    ring = np.stack([np.cos(ang), np.sin(ang)], axis=-1)
    c = np.asarray(centre, dtype=float)
    return np.vstack([c, c + 0.5 * radius * ring, c + radius * ring])


# -- task runner --------------------------------------------------------------

class Runner:
    def __init__(self, scenario: Scenario, outdir: Path):
        self.sc = scenario
        self.out = outdir
        self.formats = set(scenario.cfg["output"]["formats"])
        self._trajs = None
        self._exact = None
        self.report = {
            "version": __version__,
            "status": "running",
            "rng_seed": None,
            "config": {k: v for k, v in scenario.cfg.items() if not k.startswith("_")},
            "model": scenario.model.name,
            "coupling": {"gamma": scenario.coupling.gamma, "D": scenario.coupling.D},
            "n_components": len(scenario.ensemble),
            "tasks": {},
            "files": [],
        }

    def _path(self, name):
        self.report["files"].append(name)
        return self.out / name

    # shared results

    def trajectories(self) -> list[Trajectory]:
        if self._trajs is None:
            sc = self.sc
            self._trajs = evolve_ensemble(sc.ensemble, sc.model, sc.coupling,
                                          0.0, sc.t1, sc.control)
        return self._trajs

    @property
    def times(self):
        return self.trajectories()[0].times

    def ensemble_at(self, i) -> ChordEnsemble:
        return self.sc.ensemble.with_states([tr.states[i] for tr in self.trajectories()])

    def exact_states(self):
        if self._exact is None:
            sc = self.sc
            if not sc.model.is_quadratic:
                raise ConfigError(f"exact solution needs a quadratic Hamiltonian, "
                                  f"got {sc.model.name!r}")
            flow = flow_for(sc.model.quadratic_matrix, sc.coupling)
            self._exact = [[exact_coeffs(s, flow, sc.coupling, t)
                            for t in self.times]
                           for _, s in sc.ensemble.components]
        return self._exact

    # tasks

    def task_evolve(self):
        sc, trajs = self.sc, self.trajectories()
        if "csv" in self.formats:
            for k, tr in enumerate(trajs):
                tr.to_csv(self._path(f"trajectory_{k}.csv"))
        origin = np.array([complex(self.ensemble_at(i).evaluate(np.zeros(2), sc.hbar))
                           for i in range(len(self.times))])
        probes = probe_chords(math.sqrt(sc.hbar)) @ J.T
        sym_err = 0.0
        for i in range(len(self.times)):
            ens = self.ensemble_at(i)
            sym_err = max(sym_err, float(np.abs(
                ens.evaluate(probes, sc.hbar) - np.conj(ens.evaluate(-probes, sc.hbar))).max()))
        comps = []
        for tr in trajs:
            b = tr.field("b")
            M, N = tr.field("M"), tr.field("N")
            comps.append({
                "component": tr.component,
                "steps": tr.steps,
                "max_residual": tr.max_residual,
                "max_error_estimate": tr.max_error_estimate,
                "b_final": float(b[-1]),
                "b_min_increment": float(np.diff(b).min()) if len(b) > 1 else 0.0,
                "matrix_asymmetry": float(max(np.abs(M - M.transpose(0, 2, 1)).max(),
                                              np.abs(N - N.transpose(0, 2, 1)).max())),
                "final": tr.final.to_vector(),
            })
        res = {
            "t1": sc.t1,
            "n_samples": len(self.times),
            "trace_drift": float(np.abs(origin - origin[0]).max()),
            "trace_initial": 2 * np.pi * sc.hbar * origin[0],
            "hermitian_symmetry_max": sym_err,
            "max_residual": max(c["max_residual"] for c in comps),
            "b_nondecreasing": all(c["b_min_increment"] >= -1e-12 for c in comps),
            "components": comps,
        }
        if "png" in self.formats:
            from .plotting import plot_decoherence
            plot_decoherence(self.times, [tr.field("b") for tr in trajs], sc.hbar,
                             self._path("decoherence.png"))
        return res

    def task_exact(self):
        sc = self.sc
        exact = self.exact_states()
        if "csv" in self.formats:
            for k, states in enumerate(exact):
                rows = ([t, *s.to_vector(), probe_residual(s, sc.model, sc.coupling, t)]
                        for t, s in zip(self.times, states))
                write_csv(self._path(f"exact_{k}.csv"), CSV_COLUMNS, rows)
        return {"n_samples": len(self.times),
                "components": [states[-1].to_vector() for states in exact]}

    def task_compare_exact(self):
        exact = self.exact_states()
        errs = []
        for tr, states in zip(self.trajectories(), exact):
            errs.append(max(float(np.abs(s.to_vector() - e.to_vector()).max())
                            for s, e in zip(tr.states, states)))
        return {"max_field_err": max(errs), "per_component": errs}

    def _fock_initial(self, space):
        sc = self.sc
        kind = sc.cfg["initial"]["kind"]
        if kind == "ensemble-file":
            raise ConfigError("compare_fock needs a coherent, squeezed or cat initial state")
        kets = [space.ket_from_wavefunction(lambda q, s=s: s.wavefunction(q, sc.hbar))
                for s in sc.specs]
        if kind == "cat":
            ka, kb = kets
            rho = density_from_kets([(0.5, ka, ka), (0.5, kb, kb),
                                     (0.5, ka, kb), (0.5, kb, ka)])
        else:
            rho = density_from_kets([(1.0, kets[0], kets[0])])
        if sc.cfg["initial"].get("normalize", True):
            rho = rho / np.trace(rho)
        return rho

    def task_compare_fock(self):
        sc = self.sc
        ocfg = sc.cfg["oracle"]
        space = FockSpace(ocfg["dim"], sc.hbar)
        try:
            Hmat = build_hamiltonian_matrix(sc.model, space)
        except ValueError as exc:
            raise ConfigError(f"compare_fock: {exc}") from None
        Lmat = lindblad_operator(sc.coupling, space)
        rho0 = self._fock_initial(space)
        sampler = ChordSampler(space)
        radius = ocfg.get("probe_radius", min(math.sqrt(sc.hbar), 0.9 * sampler.bound()))
        rhos = integrate(rho0, Hmat, Lmat, sc.hbar, sc.t1, ocfg["dt"],
                         sample_times=list(self.times))
        rows, curve = [], []
        max_leak = 0.0
        for i, (t, rho) in enumerate(zip(self.times, rhos)):
            ens = self.ensemble_at(i)
            # probes centred on the chord of the first component's maximum
            xis = probe_chords(radius, -J @ ens.components[0][1].Y)
            g = ens.evaluate(xis @ J.T, sc.hbar)
            f = sampler.samples(rho, xis)
            err = np.abs(g - f)
            rel = np.abs(np.abs(g) - np.abs(f)) / np.maximum(np.abs(f), 1e-300)
            curve.append({"t": t, "max_abs_err": float(err.max()),
                          "max_rel_abs_err": float(rel.max())})
            max_leak = max(max_leak, space.leakage(rho))
            rows.extend([t, *xi, gv.real, gv.imag, fv.real, fv.imag, e]
                        for xi, gv, fv, e in zip(xis, g, f, err))
        if max_leak > LEAKAGE_LIMIT:
            warnings.warn(f"Fock truncation leakage {max_leak:.2e} exceeds "
                          f"{LEAKAGE_LIMIT:g}", TruncationWarning, stacklevel=2)
        if "csv" in self.formats:
            write_csv(self._path("fock_probes.csv"), FOCK_CSV_COLUMNS, rows)
        if "png" in self.formats:
            from .plotting import plot_error_growth
            plot_error_growth([c["t"] for c in curve],
                              [c["max_rel_abs_err"] for c in curve],
                              self._path("fock_error.png"))
        return {
            "dim": space.dim,
            "probe_radius": radius,
            "n_probes": 21,
            "max_abs_err": max(c["max_abs_err"] for c in curve),
            "max_rel_abs_err": max(c["max_rel_abs_err"] for c in curve),
            "max_leakage": max_leak,
            "error_growth": curve,
        }

    def task_wigner(self):
        sc = self.sc
        ens = self.ensemble_at(-1)
        gcfg = sc.cfg["grid"]
        try:
            if gcfg["half_width"] == "auto":
                grid = auto_grid(ens, sc.hbar, gcfg["points"])
            else:
                grid = GridSpec(np.zeros(2), gcfg["half_width"], gcfg["points"])
        except ValueError as exc:
            raise ConfigError(f"grid: {exc}") from None
        chord = eval_chord(ens, grid, sc.hbar)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", AliasWarning)
            W = wigner_from_chord(chord, sc.hbar)
        if "bin" in self.formats:
            chord.to_binary(self._path("chord_field.bin"))
            W.to_binary(self._path("wigner.bin"))
        if "csv" in self.formats:
            W.to_csv(self._path("wigner.csv"))
        if "png" in self.formats:
            from .plotting import plot_wigner
            plot_wigner(W, self._path("wigner.png"), f"Wigner function, t = {sc.t1:g}")
        peak = float(np.abs(W.values).max())
        return {
            "t": sc.t1,
            "chord_grid": {"half_widths": grid.half_widths, "points": grid.points},
            "wigner_grid": {"half_widths": W.grid.half_widths, "points": W.grid.points},
            "integral": W.integral().real,
            "min": float(W.values.real.min()),
            "max": float(W.values.real.max()),
            "imag_ratio": float(np.abs(W.values.imag).max() / peak) if peak else 0.0,
            "chord_edge_ratio": chord.boundary_ratio(),
            "alias_warning": bool(caught),
        }

    def task_purity(self):
        vals = [purity(self.ensemble_at(i), self.sc.hbar) for i in range(len(self.times))]
        if "png" in self.formats:
            from .plotting import plot_purity
            plot_purity(self.times, vals, self._path("purity.png"))
        steps = np.diff(vals)
        return {"times": self.times, "values": vals,
                "initial": vals[0], "final": vals[-1],
                "max_increase": float(steps.max()) if steps.size else 0.0}

    def task_heller_check(self):
        sc = self.sc
        if sc.cfg["initial"]["kind"] not in ("coherent", "squeezed"):
            raise ConfigError("heller_check needs a coherent or squeezed initial state")
        if sc.model.potential is None:
            raise ConfigError(f"heller_check needs a p^2/2m + V(q) model, "
                              f"got {sc.model.name!r}")
        spec = sc.specs[0]
        init = HellerState.from_width(*spec.center, 0.5j / spec.omega**2)
        rep = unitary_equivalence_check(sc.model, None, init, sc.t1, sc.control.dt)
        if "json" in self.formats:
            self._path("heller_report.json").write_text(rep.to_json() + "\n")
        return {**rep.to_dict(), "note": "unitary limit; the configured coupling is ignored"}

    def run(self):
        for name in self.sc.cfg["tasks"]:
            self.report["tasks"][name] = getattr(self, f"task_{name}")()
        self.report["status"] = "ok"

    def write_report(self):
        (self.out / "report.json").write_text(
            json.dumps(_jsonable(self.report), indent=2) + "\n")


# -- entry points -------------------------------------------------------------

def output_dir(cfg) -> Path:
    return Path(os.environ.get(ENV_OUTPUT_DIR) or cfg["output"]["dir"])


def simulate(config_path, stderr=None) -> int:
    stderr = stderr or sys.stderr
    try:
        cfg = load(config_path)
        scenario = build_scenario(cfg)
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=stderr)
        return EXIT_VALIDATION
    except ConfigError as exc:
        print(f"error: invalid config: {exc}", file=stderr)
        return EXIT_VALIDATION
    out = output_dir(cfg)
    out.mkdir(parents=True, exist_ok=True)
    runner = Runner(scenario, out)
    code = EXIT_OK
    try:
        runner.run()
    except ConfigError as exc:
        print(f"error: invalid config: {exc}", file=stderr)
        return EXIT_VALIDATION
    except (SingularMError, NonFiniteError, GaussChordError) as exc:
        runner.report["status"] = "numerical_failure"
        runner.report["failure"] = {
            "type": type(exc).__name__,
            "message": str(exc),
            "t": getattr(exc, "t", None),
            "component": getattr(exc, "component", None),
        }
        print(f"error: numerical failure: {exc}", file=stderr)
        code = EXIT_NUMERICAL
    runner.write_report()
    return code


def list_models() -> str:
    lines = []
    for name, factory in BUILTIN.items():
        model = factory()
        params = ", ".join(f"{p.name}={p.default!r}"
                           for p in inspect.signature(factory).parameters.values())
        tags = [t for t, on in (("quadratic", model.is_quadratic),
                                ("polynomial", model.poly_terms is not None),
                                ("separable", model.potential is not None)) if on]
        lines.append(f"{name}({params})  [{', '.join(tags)}]")
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gausschord",
        description="Gaussian chord-function evolution under linear Lindblad coupling.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sim = sub.add_parser("simulate", help="run a TOML scenario")
    sim.add_argument("config", help="path to the scenario file")
    sub.add_parser("list-models", help="list builtin Hamiltonians")
    sub.add_parser("print-schema", help="print the scenario JSON schema")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "simulate":
        return simulate(args.config)
    if args.command == "list-models":
        print(list_models())
    elif args.command == "print-schema":
        print(schema_text())
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
