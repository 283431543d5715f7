"""Command line entry point.

Subcommands mirror the library pipeline: build a model, inspect coordinate
transforms, evolve moments, run decoherence branches, compare the two
decompositions of one run, cross-check against the dense solver, and evolve
the position-coupling master equation.

Exit codes: 0 success, 1 invalid config/arguments, 2 numerical-trust failure
(dense-solver leakage above gate at every grid time, or transformed-potential
positivity violation without the override).
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, ScenarioConfig, parse_config
from .decomposition import (cm_relative_transform, many_mode_constants,
                            normal_mode_transform, transform_hamiltonian,
                            two_mode_constants, verify_constants)
from .dynamics import energy, evolve, evolve_branches
from .fock import gaussian_crosscheck
from .master import (MasterEqScenario, backend_name, coherence_profile,
                     evolve_master)
from .metrics import MetricsError, build_report, parallel_compare
from .phase_space import (CoherentAmplitude, PhaseSpaceLayout, coherent_state,
                          purity, thermal_state)
from .reporting import (write_comparison, write_crosscheck, write_csv,
                        write_decoherence, write_manifest, write_matrix,
                        write_moments)


def _load(args: argparse.Namespace) -> tuple[ScenarioConfig, Path, str]:
    text = Path(args.config).read_text()
    cfg = parse_config(text)
    overrides = {}
    if args.seed is not None:
        overrides["run.seed"] = args.seed
    if args.workers is not None:
        overrides["run.workers"] = args.workers
    if overrides:
        cfg = ScenarioConfig({**cfg.values, **overrides})
    out_dir = Path(args.out)
    digest = write_manifest(cfg, out_dir)
    return cfg, out_dir, digest


def _amplitudes(cfg: ScenarioConfig, mode: str,
                prefix: str = "") -> tuple[CoherentAmplitude, CoherentAmplitude]:
    a = CoherentAmplitude(mode, cfg[f"state.{prefix}alpha_x"],
                          cfg[f"state.{prefix}alpha_p"])
    b = CoherentAmplitude(mode, cfg[f"state.{prefix}beta_x"],
                          cfg[f"state.{prefix}beta_p"])
    return a, b


def _scales(cfg: ScenarioConfig) -> tuple[list[float], list[float]]:
    """(masses, reference freqs) per mode for state construction."""
    if cfg["model.kind"] == "two_mode":
        p = cfg.two_mode()
        return [p.m_s, p.m_e], [1.0, p.omega]
    bath = cfg.bath()
    pot = cfg.potential()
    w_s = pot.omega_s if pot.variant == "harmonic" else cfg["run.open_freq_ref"]
    return [pot.m_s, *bath.masses], [w_s, *bath.freqs]


def _cmd_build(cfg: ScenarioConfig, out: Path, digest: str) -> int:
    ham = cfg.hamiltonian()
    write_matrix(out / "hamiltonian.csv", ham.h, digest)
    print(f"model.kind={cfg['model.kind']} modes={ham.layout.n_modes}")
    print(f"wrote {out / 'hamiltonian.csv'}")
    return 0


def _cmd_transform(cfg: ScenarioConfig, out: Path, digest: str) -> int:
    ham = cfg.hamiltonian()
    masses, _ = _scales(cfg)
    tr = cm_relative_transform(np.asarray(masses), source=ham.layout)
    ham_cm = transform_hamiltonian(ham, tr)
    write_matrix(out / "transform_cm.csv", tr.A, digest)
    write_matrix(out / "hamiltonian_cm.csv", ham_cm.h, digest)
    if cfg["model.kind"] == "two_mode":
        consts = two_mode_constants(cfg.two_mode())
    else:
        consts = many_mode_constants(cfg.potential(), cfg.bath())
    residuals = verify_constants(ham_cm, consts)
    rows = [[k, float(v)] for k, v in sorted(residuals.items())]
    write_csv(out / "constants_residuals.csv", ["constant", "residual"],
              rows, digest)
    worst = max(residuals.values()) if residuals else 0.0
    print(f"constants residual max={worst:.3e} "
          f"positivity_ok={consts.positivity_ok}")
    if cfg["model.kind"] == "caldeira_leggett":
        env_labels = ham_cm.layout.mode_labels[1:]
        nm, ham_modes = normal_mode_transform(ham_cm, env_labels)
        write_matrix(out / "transform_modes.csv", nm.A, digest)
        write_matrix(out / "hamiltonian_modes.csv", ham_modes.h, digest)
        n = ham_modes.layout.n_modes
        freqs = np.sqrt(np.diag(ham_modes.h)[1:n] * 2)
        print(f"relative-mode frequencies head={freqs[:3].round(6).tolist()}")
    print(f"wrote transforms to {out}")
    return 0


def _cmd_evolve(cfg: ScenarioConfig, out: Path, digest: str) -> int:
    ham = cfg.hamiltonian()
    masses, freqs = _scales(cfg)
    alpha, _ = _amplitudes(cfg, "S")
    state = coherent_state(ham.layout, masses, freqs, [alpha])
    temp = cfg["state.temperature"]
    if temp > 0:
        therm = thermal_state(ham.layout, masses, freqs, temp)
        state = type(state)(state.layout, state.mean, therm.cov)
    t_grid = cfg.t_grid()
    means, purities, energies = [], [], []
    for t in t_grid:
        st = evolve(state, ham, t)
        means.append(st.mean)
        purities.append(purity(st))
        energies.append(energy(st, ham))
    labels = ([f"x_{l}" for l in ham.layout.mode_labels]
              + [f"p_{l}" for l in ham.layout.mode_labels])
    write_moments(out / "moments.csv", t_grid, means, purities, energies,
                  labels, digest)
    drift = max(abs(e - energies[0]) for e in energies)
    print(f"energy drift={drift:.3e} purity(t0)={purities[0]:.6f}")
    print(f"wrote {out / 'moments.csv'}")
    return 0


def _cmd_decohere(cfg: ScenarioConfig, out: Path, digest: str,
                  with_oracle: bool) -> int:
    ham = cfg.hamiltonian()
    masses, freqs = _scales(cfg)
    alpha, beta = _amplitudes(cfg, "S")
    env_labels = ham.layout.mode_labels[1:]
    env = thermal_state(PhaseSpaceLayout(env_labels), masses[1:], freqs[1:],
                        cfg["state.temperature"])
    t_grid = np.asarray(cfg.t_grid())
    open_scale = (masses[0], freqs[0])
    branches = evolve_branches(alpha, beta, env, ham, t_grid, open_scale)
    report = build_report("S+E", branches, env_labels, open_scale, ham)
    write_decoherence(out / "decoherence.csv", [report], digest)
    print(f"tau={report.tau_dec!r} lambda(t_end)={float(report.lambda_fit[-1])!r}")
    print(f"wrote {out / 'decoherence.csv'}")
    if with_oracle:
        if cfg["model.kind"] != "two_mode":
            print("--oracle needs model.kind = two_mode", file=sys.stderr)
            return 1
        return _cmd_oracle(cfg, out, digest)
    return 0


def _cmd_compare(cfg: ScenarioConfig, out: Path, digest: str) -> int:
    if cfg["model.kind"] != "caldeira_leggett":
        print("compare requires model.kind = caldeira_leggett",
              file=sys.stderr)
        return 1
    pair_s = _amplitudes(cfg, "S")
    pair_cm = _amplitudes(cfg, "CM", prefix="cm_")
    t_grid = np.asarray(cfg.t_grid())
    try:
        cmp = parallel_compare(
            cfg.potential(), cfg.bath(), pair_s, pair_cm,
            temperature=cfg["state.temperature"], t_grid=t_grid,
            open_freq_ref=cfg["run.open_freq_ref"],
            allow_positivity_violation=cfg["run.allow_positivity_violation"],
            workers=cfg["run.workers"])
    except MetricsError as exc:
        print(f"positivity gate: {exc}", file=sys.stderr)
        return 2
    write_decoherence(out / "decoherence_both.csv",
                      [cmp.report_s, cmp.report_cm], digest)
    write_comparison(out / "comparison.csv", cmp, digest)
    print(f"tau_open={cmp.report_s.tau_dec!r} tau_cm={cmp.report_cm.tau_dec!r}"
          f" ratio={cmp.tau_ratio!r} [{cmp.ratio_flag}]")
    print(f"frame residual={cmp.frame_residual:.3e}")
    print(f"wrote {out / 'comparison.csv'}")
    return 0


def _cmd_oracle(cfg: ScenarioConfig, out: Path, digest: str) -> int:
    if cfg["model.kind"] != "two_mode":
        print("oracle requires model.kind = two_mode", file=sys.stderr)
        return 1
    p = cfg.two_mode()
    t_grid = np.asarray(cfg.t_grid())
    d = cfg["oracle.dim"]
    report = gaussian_crosscheck(p, cfg["oracle.x0"], t_grid, dims=(d, d),
                                 negativity_time=cfg["oracle.negativity_time"])
    write_crosscheck(out / "crosscheck.csv", report, digest)
    print(f"trusted horizon={report.trusted_horizon!r} "
          f"worst dev mean={report.max_dev_mean:.3e} "
          f"cov={report.max_dev_cov:.3e} overlap={report.max_dev_overlap:.3e}")
    print(f"negativity dense={report.negativity_oracle!r} "
          f"gaussian={report.negativity_gauss!r} "
          f"sign_agrees={report.negativity_sign_agrees}")
    print(f"wrote {out / 'crosscheck.csv'}")
    if not any(row.trusted for row in report.rows):
        print("no trusted times: truncation leakage above gate everywhere",
              file=sys.stderr)
        return 2
    return 0


def _cmd_master(cfg: ScenarioConfig, out: Path, digest: str) -> int:
    scen = MasterEqScenario(cfg["master.variant"], cfg["master.lam"],
                            cfg["master.dim"], cfg["master.dt"],
                            cfg["model.m_s"], cfg["model.omega_s"])
    t_grid = cfg.master_t_grid()
    x0 = cfg["master.x0"]
    from .fock import coherent_vector
    a = coherent_vector(scen.dim, scen.mass, scen.basis_freq, x0)
    b = coherent_vector(scen.dim, scen.mass, scen.basis_freq, -x0)
    psi = a + b
    psi = psi / np.linalg.norm(psi)
    rho0 = np.outer(psi, psi.conj())
    result = evolve_master(rho0, scen, t_grid)
    half = 2.5 * x0 + 2.0
    xs = np.linspace(-half, half, 121)
    vis = coherence_profile(result, xs, (x0 - 0.8, x0 + 0.8),
                            (-x0 - 0.8, -x0 + 0.8), scen.mass,
                            scen.basis_freq)
    rows = [[float(t), float(v)] for t, v in zip(t_grid, vis)]
    write_csv(out / "visibility.csv", ["t", "visibility"], rows, digest)
    print(f"backend={backend_name()} dt_used={result.dt_used!r} "
          f"halvings={result.halvings}")
    print(f"trace drift={result.max_trace_drift:.3e} "
          f"min eig={result.min_eigenvalue:.3e} "
          f"positivity_ok={result.positivity_ok}")
    print(f"wrote {out / 'visibility.csv'}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="oscidec",
        description="Coupled-oscillator decoherence across coordinate "
                    "decompositions.")
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
            ("build", "assemble the model and dump its Hamiltonian matrix"),
            ("transform", "emit CM/relative and normal-mode transforms"),
            ("evolve", "propagate first/second moments on the time grid"),
            ("decohere", "branch overlap decay in the original coordinates"),
            ("compare", "run both decompositions and compare timescales"),
            ("oracle", "cross-check against the dense number-basis solver"),
            ("master-eq", "evolve the position-coupling master equation")]:
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("--config", required=True, help="scenario file")
        sp.add_argument("--out", default="out", help="output directory")
        sp.add_argument("--workers", type=int, default=None,
                        help="parallel branch workers (overrides config)")
        sp.add_argument("--seed", type=int, default=None,
                        help="override run.seed")
        if name == "decohere":
            sp.add_argument("--oracle", action="store_true",
                            help="also write the dense cross-check report")
    args = parser.parse_args(argv)
    try:
        cfg, out_dir, digest = _load(args)
    except FileNotFoundError as exc:
        print(f"config not found: {exc.filename}", file=sys.stderr)
        return 1
    except ConfigError as exc:
        for err in exc.errors:
            print(f"config error: {err}", file=sys.stderr)
        return 1
    try:
        if args.command == "build":
            return _cmd_build(cfg, out_dir, digest)
        if args.command == "transform":
            return _cmd_transform(cfg, out_dir, digest)
        if args.command == "evolve":
            return _cmd_evolve(cfg, out_dir, digest)
        if args.command == "decohere":
            return _cmd_decohere(cfg, out_dir, digest,
                                 getattr(args, "oracle", False))
        if args.command == "compare":
            return _cmd_compare(cfg, out_dir, digest)
        if args.command == "oracle":
            return _cmd_oracle(cfg, out_dir, digest)
        if args.command == "master-eq":
            return _cmd_master(cfg, out_dir, digest)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 1


if __name__ == "__main__":
    sys.exit(main())
