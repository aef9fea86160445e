"""Command implementations behind the CLI, and the CSV/JSON writers they share."""

from __future__ import annotations

import csv
import dataclasses
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import energy as en
from . import geometry as geo
from . import kinematics as kin
from . import suites
from .config import RunConfig, config_hash, validate
from .errors import ShellError
from .quadrature import QuadratureSpec, SyntheticField, convergence_study, domain_center, surface_rule

ROUNDING_LEVEL = 1e-16  # residual / energy below this means the reduction is exact for the case


def apply_overrides(cfg: RunConfig, seed=None, out=None, tol=None, threads=None) -> RunConfig:
    kw = {}
    if seed is not None:
        kw["seed"] = seed
    if out is not None:
        kw["out"] = out
    if tol is not None:
        kw["tol"] = tol
    if threads is not None:
        kw["threads"] = threads
    if not kw:
        return cfg
    cfg = dataclasses.replace(cfg, run=dataclasses.replace(cfg.run, **kw))
    validate(cfg)
    return cfg


def rng_for(cfg: RunConfig) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(cfg.run.seed))


def header_line(cfg: RunConfig, command: str) -> str:
    return f"cosserat_shell {__version__} command={command} config_sha256={config_hash(cfg)}"


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (np.integer,)):
        return str(int(v))
    return str(v)


def write_csv(path: Path, cfg: RunConfig, command: str, columns, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"# {header_line(cfg, command)}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_cell(v) for v in r])


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else None
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.bool_,)):
        return bool(v)
    if isinstance(v, np.ndarray):
        return _jsonable(v.tolist())
    return v


def write_json(path: Path, cfg: RunConfig, command: str, payload: dict) -> None:
    doc = {"header": header_line(cfg, command), **payload}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_jsonable(doc), fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")


# ---------------------------------------------------------------------------


def curvature_scale(surface: geo.Surface) -> float:
    """1 / max |principal curvature| over a sampling of the domain (1 for flat surfaces)."""
    x1, x2, _ = surface_rule(surface, QuadratureSpec(n_cells=(8, 8), n_gauss_cell=3))
    f = geo.frame_at(surface, x1, x2)
    _, k1, k2 = geo.admissibility_check(f, 1.0)
    kmax = float(np.max(np.maximum(np.abs(k1), np.abs(k2))))
    return 1.0 / kmax if kmax > 1e-12 else 1.0


def synthetic_field(cfg: RunConfig, surface: geo.Surface) -> SyntheticField:
    it = cfg.integrate
    return SyntheticField(seed=cfg.run.seed, amp_m=it.amp_m, amp_q=it.amp_q, center=domain_center(surface))


def cmd_verify(cfg: RunConfig, out: Path) -> int:
    surface = cfg.surface.build()
    results = suites.run_all(surface, cfg.material, rng_for(cfg), cfg.run.samples, cfg.run.tol)
    ok = all(r.passed for r in results)
    write_json(out / "verify.json", cfg, "verify",
               {"surface": cfg.surface.name, "suites": [r.as_dict() for r in results], "pass": ok})
    for r in results:
        status = "pass" if r.passed else "FAIL"
        print(f"{status} {r.name}: max residual {r.max_residual:.3e} (tol {r.tol:.1e})")
        if not r.passed:
            print(f"  worst sample at x = {r.worst_point}", file=sys.stderr)
    return 0 if ok else 1


def cmd_reduce(cfg: RunConfig, out: Path) -> int:
    surface = cfg.surface.build()
    n = max(1, math.ceil(math.sqrt(cfg.run.samples)))
    (a1, b1), (a2, b2) = surface.domain
    g1 = a1 + (b1 - a1) * (np.arange(n) + 0.5) / n
    g2 = a2 + (b2 - a2) * (np.arange(n) + 0.5) / n
    X1, X2 = np.meshgrid(g1, g2, indexing="ij")
    f = geo.frame_at(surface, X1.ravel(), X2.ravel())
    if not geo.admissibility_check(f, cfg.material.h)[0]:
        print(f"error: thickness h={cfg.material.h} violates h|kappa| < 1/2", file=sys.stderr)
        return 1
    sm = kin.strain_measures(f, synthetic_field(cfg, surface)(f), cfg.material)
    eb = en.reduced_density(f, sm, cfg.material)
    cols = ["x1", "x2", "memb", "memb_bend", "bend_curv", "area_element", "total", "rho_m", "rho_b"]
    rows = zip(f.x[:, 0], f.x[:, 1], eb.memb, eb.memb_bend, eb.bend_curv, eb.area_element, eb.total,
               sm.rho_m, sm.rho_b)
    write_csv(out / "reduce.csv", cfg, "reduce", cols, rows)
    print(f"wrote {len(f.H)} points to {out / 'reduce.csv'}")
    return 0


def cmd_integrate(cfg: RunConfig, out: Path) -> int:
    it = cfg.integrate
    surface = cfg.surface.build()
    scale = curvature_scale(surface) if it.relative_h else 1.0
    h_list = [scale * h for h in it.h_list]
    field = synthetic_field(cfg, surface)
    spec = QuadratureSpec(n_gauss_x3=it.n_gauss_x3, n_cells=tuple(it.n_cells), n_gauss_cell=it.n_gauss_cell)
    fine = dataclasses.replace(spec, n_gauss_x3=2 * it.n_gauss_x3)
    res = convergence_study(surface, field, cfg.material, h_list, spec)
    ref = convergence_study(surface, field, cfg.material, h_list, fine)
    change = np.abs(res.residuals - ref.residuals) / np.maximum(ref.residuals, 1e-300)
    relative = res.residuals / np.maximum(np.abs(res.volume), 1e-300)
    exact = bool(np.all(relative < ROUNDING_LEVEL))
    in_window = bool(it.slope_min <= res.slope <= it.slope_max)
    refined = bool(np.all(change < 0.01))
    status = "exact" if exact else ("pass" if in_window and refined else "fail")
    cols = ["h", "h_over_scale", "volume", "reduced", "residual", "residual_refined", "refinement_change"]
    rows = zip(res.h, res.h / scale, res.volume, res.reduced, res.residuals, ref.residuals, change)
    write_csv(out / "integrate.csv", cfg, "integrate", cols, rows)
    write_json(out / "integrate.json", cfg, "integrate", {
        "surface": cfg.surface.name, "curvature_scale": scale, "slope": res.slope,
        "slope_window": [it.slope_min, it.slope_max], "max_refinement_change": float(np.max(change)),
        "max_relative_residual": float(np.max(relative)), "status": status,
    })
    print(f"slope {res.slope:.3f} window [{it.slope_min}, {it.slope_max}] refinement change "
          f"{np.max(change):.2e} -> {status}")
    if status == "exact":
        print("residuals are at rounding level: the truncation vanishes for this case, slope test skipped")
    if status == "fail":
        print(f"integrate failed: slope {res.slope:.3f}, refinement change {np.max(change):.2e}", file=sys.stderr)
    return 0 if status != "fail" else 1


def cmd_solve(cfg: RunConfig, out: Path) -> int:
    from . import minimizer as mn

    sv = cfg.solve
    surface = cfg.surface.build()
    grid = mn.ShellGrid(surface, sv.n1, sv.n2)
    loads = en.LoadResultants(np.array(sv.f_bar), np.array(sv.t_bar), np.array(sv.c_omega), np.array(sv.c_gamma))
    m_map = None if sv.stretch == 1.0 else (lambda y, x: sv.stretch * y)
    bcs = mn.clamped(grid, sv.clamp_sides, m_map=m_map, traction_sides=sv.traction_sides, loads=loads)
    scfg = mn.SolverConfig(max_iters=sv.max_iters, gtol=sv.gtol, armijo_c=sv.armijo_c, backtrack=sv.backtrack,
                           fd_step=sv.fd_step, optimizer=sv.optimizer, memory=sv.memory)
    problem = mn.assemble(grid, bcs, surface, cfg.material)
    dofs, report = mn.minimize(problem, scfg)
    rm, rb = problem.cell_center_rho(dofs)
    cols = ["x1", "x2", "y0_1", "y0_2", "y0_3", "m_1", "m_2", "m_3", "q_w", "q_x", "q_y", "q_z"]
    write_csv(out / "solution.csv", cfg, "solve", cols, problem.node_records(dofs))
    payload = dataclasses.asdict(report)
    payload.update({"rho_m_range": [float(rm.min()), float(rm.max())],
                    "rho_b_range": [float(rb.min()), float(rb.max())], "n_free_nodes": int(problem.n_free)})
    write_json(out / "report.json", cfg, "solve", payload)
    print(f"{report.reason} after {report.iterations} iterations, energy {report.breakdown['total']:.12g}, "
          f"gradient norm {report.grad_norm:.2e}")
    if report.error:
        print(f"solver error: {report.error}", file=sys.stderr)
        return 1
    return 0


def cmd_compare(cfg: RunConfig, out: Path) -> int:
    surface = cfg.surface.build()
    p = cfg.material
    rng = rng_for(cfg)
    x1, x2 = suites.sample_points(surface, cfg.run.samples, rng)
    f = geo.frame_at(surface, x1, x2)
    tol = cfg.run.tol if cfg.run.tol is not None else 1e-12
    rows, worst = [], 0.0
    for k in range(len(x1)):
        fk = f[k]
        c = en.identify_coefficients(p, fk.K)
        rel = 0.0
        for _ in range(8):
            E, Ke = (rng.standard_normal((3, 3)) * np.array([1.0, 1.0, 0.0]) @ fk.grad_theta0_inv for _ in range(2))
            ours = en.w_our_density(E, Ke, fk, p)
            rel = max(rel, abs(ours - en.wep_density(E, Ke, fk, c)) / abs(ours))
        wp = en.wp_density(E, Ke, fk, p, cfg.compare.alpha_s, cfg.compare.alpha_t)
        worst = max(worst, rel)
        rows.append([x1[k], x2[k], fk.K, *c.alpha, *c.beta, c.mu_c_drill, ours, wp, rel])
    cols = ["x1", "x2", "K", "alpha1", "alpha2", "alpha3", "alpha4", "beta1", "beta2", "beta3", "beta4",
            "mu_c_drill", "w_our", "w_p", "w_our_vs_wep_residual"]
    write_csv(out / "compare.csv", cfg, "compare", cols, rows)
    ok = worst < tol
    print(f"max relative |W_our - W_EP| = {worst:.3e} (tol {tol:.1e}) -> {'pass' if ok else 'FAIL'}")
    return 0 if ok else 1


_COMMANDS = {"verify": cmd_verify, "reduce": cmd_reduce, "integrate": cmd_integrate, "solve": cmd_solve,
             "compare": cmd_compare}


def execute(command: str, cfg: RunConfig) -> int:
    out = Path(cfg.run.out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        return _COMMANDS[command](cfg, out)
    except ShellError as exc:
        print(f"{command} failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
