"""Command line front end: coeffs, fock-sweep, binding, verify.

Each command reads an optional JSON config (keys = fields of the command's
config dataclass; unknown keys are rejected), applies flag overrides,
validates everything, runs, and writes a "pflab-report/1" JSON report to
stdout or --out. fock-sweep also writes a CSV table.

Exit codes: 0 success, 1 validation error or failed check, 2 numerical
non-convergence (the partial report is still written).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import __version__, binding, coeffs, fock, kernels
from .integrate import NonConvergenceError, default_threads

SCHEMA = "pflab-report/1"
EXIT_OK, EXIT_FAIL, EXIT_NUMERICAL = 0, 1, 2


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# configs

@dataclass
class CoeffsConfig:
    lams: list = field(default_factory=lambda: [1.0])
    alphas: list = field(default_factory=list)
    tol: float = 1e-6
    tol_1d: float = 1e-9
    n_samples: int = 10**6
    variant: str = "exact"
    seed: int = 0
    threads: int = 0

    def validate(self):
        if not self.lams:
            raise ConfigError("lams must be nonempty")
        _all(self.lams, lambda x: x >= 0, "lams must be >= 0")
        _all(self.alphas, lambda x: x > 0, "alphas must be > 0")
        _positive(self, "tol", "tol_1d")
        if self.n_samples < 10**4:
            raise ConfigError("n_samples must be >= 1e4")
        if self.variant not in ("exact", "commuting"):
            raise ConfigError("variant must be 'exact' or 'commuting'")


@dataclass
class FockSweepConfig:
    lam: float = 1.0
    grids: list = field(default_factory=lambda: [[8, 6, 6]])
    alphas: list = field(default_factory=lambda: [1e-3, 2e-3, 4e-3, 8e-3])
    tol: float = 1e-11
    max_iter: int = 400
    infrared_shift: bool = False
    diagonal_pairs: bool = True
    memory_budget_bytes: int = 4 * 2**30
    csv: str | None = None
    seed: int = 0
    threads: int = 0

    def validate(self):
        if not self.lam > 0:
            raise ConfigError("lam must be > 0")
        if not self.grids:
            raise ConfigError("grids must be nonempty")
        for gsz in self.grids:
            if len(gsz) != 3:
                raise ConfigError("each grid is [n_r, n_t, n_phi]")
            n_r, n_t, n_phi = gsz
            if n_r < 2 or n_t < 2 or n_phi < 4 or n_phi % 2:
                raise ConfigError(f"invalid grid {gsz}: need n_r, n_t >= 2 and even n_phi >= 4")
            need = fock.estimated_memory_bytes(2 * n_r * n_t * n_phi)
            if need > self.memory_budget_bytes:
                raise ConfigError(f"grid {gsz} needs ~{need} bytes, above the budget {self.memory_budget_bytes}")
        if len(set(self.alphas)) < 4:
            raise ConfigError("alphas needs at least 4 distinct values")
        _all(self.alphas, lambda x: 0 < x <= 1e-2, "alphas must lie in (0, 1e-2]")
        _positive(self, "tol", "max_iter")


@dataclass
class BindingConfig:
    potential: str = "smooth_bump"
    r0: float = 1.0
    bracket: list | None = None
    lam: float = 1.0
    alpha: float = 1e-2
    j_max: int = 12
    n_steps: int = 4000
    tol: float = 1e-12
    g_max: float = 200.0
    pd_check: bool = True
    seed: int = 0
    threads: int = 0

    def validate(self):
        if self.potential not in binding.POTENTIALS:
            raise ConfigError(f"potential must be one of {sorted(binding.POTENTIALS)}")
        _positive(self, "r0", "n_steps", "tol", "g_max")
        if self.lam < 0 or self.alpha < 0 or self.j_max < 0:
            raise ConfigError("lam, alpha and j_max must be >= 0")
        if self.n_steps % 200:
            raise ConfigError("n_steps must be a multiple of 200")
        if self.bracket is not None and (len(self.bracket) != 2 or not 0 <= self.bracket[0] < self.bracket[1]):
            raise ConfigError("bracket must be [lo, hi] with 0 <= lo < hi")


@dataclass
class VerifyConfig:
    lam: float = 1.0
    grid: list = field(default_factory=lambda: [4, 4, 6])
    alpha: float = 1e-2
    n_random_grids: int = 20
    random_max_sizes: list = field(default_factory=lambda: [4, 4, 6])
    random_lam: list = field(default_factory=lambda: [0.5, 3.0])
    mc_samples: int = 10**5
    quad_tol: float = 1e-6
    n_pairs: int = 100
    asymmetric_t_shift: float = 0.05
    seed: int = 0
    threads: int = 0

    def validate(self):
        if self.lam < 0:
            raise ConfigError("lam must be >= 0")
        n_r, n_t, n_phi = self.grid
        if n_r < 2 or n_t < 2 or n_phi < 4 or n_phi % 2:
            raise ConfigError("invalid grid")
        if not 0 <= self.alpha <= 1:
            raise ConfigError("alpha must lie in [0, 1]")
        if self.n_random_grids < 0 or self.n_pairs < 1:
            raise ConfigError("n_random_grids >= 0 and n_pairs >= 1")
        m_r, m_t, m_phi = self.random_max_sizes
        if m_r < 2 or m_t < 2 or m_phi < 4:
            raise ConfigError("random_max_sizes must be at least [2, 2, 4]")
        lo, hi = self.random_lam
        if not 0 < lo <= hi:
            raise ConfigError("random_lam must be [lo, hi] with 0 < lo <= hi")
        if self.mc_samples < 10**4:
            raise ConfigError("mc_samples must be >= 1e4")
        _positive(self, "quad_tol")


CONFIGS = {"coeffs": CoeffsConfig, "fock-sweep": FockSweepConfig, "binding": BindingConfig, "verify": VerifyConfig}


def _all(values, pred, message):
    if not all(pred(v) for v in values):
        raise ConfigError(message)


def _positive(cfg, *names):
    for n in names:
        if not getattr(cfg, n) > 0:
            raise ConfigError(f"{n} must be > 0")


def load_config(command: str, path: str | None, overrides: dict):
    cls = CONFIGS[command]
    data = {}
    if path:
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"unknown config keys: {unknown}")
    data.update({k: v for k, v in overrides.items() if v is not None})
    try:
        cfg = cls(**data)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    try:
        cfg.validate()
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    return cfg


# ---------------------------------------------------------------------------
# report helpers

def num(value, error=0.0, route="closed") -> dict:
    return {"value": value, "error": error, "route": route}


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


class Report:
    def __init__(self, command: str, cfg):
        self.command = command
        self.config = asdict(cfg)
        self.results: dict = {}
        self.checks: list = []
        self.warnings: list = []
        self.flags: list = []
        self.status = "ok"

    def check(self, name: str, passed: bool, value=None, tolerance=None, route=None, note=None, expected_fail=False):
        self.checks.append({"name": name, "passed": bool(passed), "value": value, "tolerance": tolerance,
                            "route": route, "note": note, "expected_failure": expected_fail})

    @property
    def failed(self) -> bool:
        return any(not c["passed"] for c in self.checks)

    def to_dict(self) -> dict:
        return _clean({
            "schema": SCHEMA,
            "metadata": {"version": __version__, "command": self.command, "config": self.config,
                         "seed": self.config.get("seed")},
            "status": self.status,
            "results": self.results,
            "checks": self.checks,
            "diagnostics": {"warnings": self.warnings, "flags": self.flags},
        })

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, allow_nan=False) + "\n"


def write_csv(path, header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in row])
    text = buf.getvalue()
    if path:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    return text


# ---------------------------------------------------------------------------
# commands

def cmd_coeffs(cfg: CoeffsConfig, negative_control: bool = False, rep: Report | None = None) -> Report:
    rep = rep or Report("coeffs", cfg)
    variant = "commuting" if negative_control else cfg.variant
    threads = cfg.threads or default_threads()
    rows = []
    rep.results["per_lambda"] = rows
    for lam in cfg.lams:
        try:
            c = coeffs.e2_total(lam, cfg.tol, cfg.tol_1d, cfg.n_samples, cfg.seed, variant, threads)
        except coeffs.CoefficientError as exc:
            partial = {n: {"quad": num(q.value, q.error_estimate, "quad")} for n, (q, _) in exc.partial.items()}
            rows.append({"lam": lam, "partial": partial, "error": str(exc)})
            rep.status = "nonconvergence"
            raise
        integrals = {}
        for name, (q, mc) in c.breakdown.items():
            agree = abs(q.value - mc.mean) <= 3 * mc.std_error + q.error_estimate
            integrals[name] = {"quad": num(q.value, q.error_estimate, "quad"),
                               "mc": num(mc.mean, mc.std_error, "mc"), "route_agreement": agree}
            rep.check(f"route_agreement[{name}, lam={lam}]", agree, abs(q.value - mc.mean),
                      3 * mc.std_error + q.error_estimate, "quad/mc",
                      expected_fail=negative_control and name in ("eeee", "epd"))
        quad_err = sum(abs(w) * c.breakdown[n][0].error_estimate for n, w in coeffs.E2_WEIGHTS.items())
        iee_q = c.breakdown["iee"][0]
        identity = abs(lam * lam / np.pi - iee_q.value - c.e1)
        rep.check(f"first_order_identity[lam={lam}]", identity <= max(1e-8, iee_q.error_estimate), identity, 1e-8,
                  "closed/quad")
        rows.append({
            "lam": lam,
            "e1": num(c.e1, 0.0, "closed"),
            "e2": num(c.e2, quad_err, "quad"),
            "e2_mc": num(c.e2_mc, c.e2_mc_error, "mc"),
            "integrals": integrals,
            "sigma": [{"alpha": a, **num(a * c.e1 + a * a * c.e2, quad_err * a * a, "quad")} for a in cfg.alphas],
        })
    return rep


def cmd_fock_sweep(cfg: FockSweepConfig, negative_control: bool = False, rep: Report | None = None) -> Report:
    rep = rep or Report("fock-sweep", cfg)
    lam = cfg.lam
    target = lam * lam / np.pi
    conv = []
    for n_r, n_t, n_phi in cfg.grids:
        g = fock.build_grid(lam, n_r, n_t, n_phi)
        dc = fock.discrete_coeffs(g, cfg.diagonal_pairs)
        conv.append({"grid": [n_r, n_t, n_phi], "modes": g.size,
                     "vacuum_constant": num(g.vacuum_constant, 0.0, "discrete"),
                     "vacuum_constant_target": num(target, 0.0, "closed"),
                     "vacuum_constant_rel_diff": (g.vacuum_constant - target) / target,
                     "e1_disc": num(dc.e1, 0.0, "discrete"), "e2_disc": num(dc.e2, 0.0, "discrete")})
    rep.results["grid_convergence"] = conv
    n_r, n_t, n_phi = cfg.grids[0]
    grid = fock.build_grid(lam, n_r, n_t, n_phi)
    dc = fock.discrete_coeffs(grid, cfg.diagonal_pairs)
    op_kwargs = dict(infrared_shift=cfg.infrared_shift, diagonal_pairs=cfg.diagonal_pairs)
    fit = fock.fit_expansion(grid, cfg.alphas, cfg.tol, cfg.seed, **op_kwargs)
    rel1 = (fit.c1 - dc.e1) / dc.e1
    rel2 = (fit.c2 - dc.e2) / dc.e2
    rep.results["fit"] = {"c1": num(fit.c1, fit.fit_residual, "fit"), "c2": num(fit.c2, fit.fit_residual, "fit"),
                          "e1_disc": num(dc.e1, 0.0, "discrete"), "e2_disc": num(dc.e2, 0.0, "discrete"),
                          "c1_rel_err": rel1, "c2_rel_err": rel2}
    rep.check("fit_c1_vs_e1_disc", abs(rel1) <= 1e-3, abs(rel1), 1e-3, "fit/discrete")
    rep.check("fit_c2_vs_e2_disc", abs(rel2) <= 5e-2, abs(rel2), 5e-2, "fit/discrete")
    rows = []
    table = []
    for a, res in zip(fit.alphas, fit.results):
        op = fock.assemble(grid, a, **op_kwargs)
        q2 = fock.rayleigh_quotient(op, fock.trial_state(op, "tf2"))
        q1 = fock.rayleigh_quotient(op, fock.trial_state(op, "tf1"))
        rem = fock.remainder_diagnostics(op, res)
        row = {"alpha": a, "energy": num(res.energy, res.residual, "discrete"), "residual": res.residual,
               "degeneracy_gap": res.degeneracy_gap, "pair_splitting": res.pair_splitting,
               "tf2_quotient": num(q2, 0.0, "discrete"), "tf1_quotient": num(q1, 0.0, "discrete"),
               "tf2_minus_expansion": q2 - (a * dc.e1 + a * a * dc.e2),
               "remainder_h_energy": rem.h_energy, "remainder_over_alpha2": rem.ratio_alpha2,
               "remainder_over_alpha3": rem.ratio_alpha3}
        if negative_control:
            row["tf2_literal_sign_quotient"] = fock.rayleigh_quotient(op, fock.trial_state(op, "tf2", True))
        rows.append(row)
        rep.check(f"variational_chain[alpha={a}]", res.energy <= q2 + 1e-15 and q2 <= q1 + 1e-15,
                  [res.energy, q2, q1], None, "discrete")
        table.append([a, res.energy, res.residual, q2, q1, rem.h_energy])
    rep.results["per_alpha"] = rows
    csv_path = cfg.csv
    rep.results["csv"] = write_csv(csv_path, ["alpha", "energy", "energy_err", "tf2_quotient", "tf1_quotient",
                                              "remainder_h_energy"], table)
    return rep


def cmd_binding(cfg: BindingConfig, negative_control: bool = False, rep: Report | None = None) -> Report:
    rep = rep or Report("binding", cfg)
    pot = binding.POTENTIALS[cfg.potential](cfg.r0)
    bracket = cfg.bracket or binding.scan_bracket(pot, cfg.g_max)
    res = binding.find_resonance_coupling(pot, tuple(bracket), cfg.tol, cfg.n_steps)
    rep.results["resonance"] = {"g_star": num(res.g_star, res.bracket[1] - res.bracket[0], "discrete"),
                                "shoot_residual": res.shoot_residual,
                                "integral_equation_residual": res.integral_equation_residual,
                                "tail_deviation": res.tail_deviation, "tail_constant": res.tail_constant}
    rep.check("integral_equation_residual", res.integral_equation_residual <= 1e-6,
              res.integral_equation_residual, 1e-6, "discrete")
    rep.check("newton_tail", res.tail_deviation <= 1e-8, res.tail_deviation, 1e-8, "discrete")
    scan = binding.epsilon_scan(res, cfg.lam, cfg.alpha, cfg.j_max)
    if not scan:
        raise ConfigError("no epsilon in the scan satisfies 1/(eps alpha) >= 2 r0")
    rows = []
    for r in scan:
        st = r.state
        rows.append({"epsilon": r.epsilon, "margin": num(r.margin, 0.0, "quad"), "d": r.d, "delta": r.delta,
                     "nu": r.nu, "c1": st.c1, "c2": st.c2, "norm2": st.norm2, "p_norm2": st.p_norm2,
                     "p2_norm2": st.p2_norm2, "ims": r.localization_terms})
    rep.results["epsilon_scan"] = rows
    best = binding.best_margin(scan)
    status = "binds" if best.binds else "no binding"
    rep.results["best"] = {"epsilon": best.epsilon, "margin": num(best.margin, 0.0, "quad"), "delta": best.delta,
                           "nu": best.nu, "status": status}
    if cfg.alpha > 0:
        sigma = coeffs.sigma_prediction(cfg.lam, cfg.alpha, coeffs.e2_total(cfg.lam, n_samples=None))
        rep.results["sigma_prediction"] = {**num(sigma.sigma, 0.0, "quad"), "note": sigma.error_order_note}
    else:
        rep.check("no_binding_without_field", best.margin >= 0, best.margin, 0.0, "quad")
    if cfg.pd_check and cfg.lam > 0:
        closed = binding.closed_form_pd(cfg.lam)
        quad = binding.pd_quadrature(cfg.lam)
        rel = abs(closed - quad) / closed
        rep.results["pd_closed_form"] = {"closed": num(closed, 0.0, "closed"), "quad": num(quad, 0.0, "quad"),
                                         "rel_diff": rel}
        rep.check("pd_closed_form_vs_quadrature", rel <= 1e-8, rel, 1e-8, "closed/quad")
    return rep


def _random_grid(rng: np.random.Generator, lam: float, max_sizes) -> fock.ModeGrid:
    """Product-rule grid with random node counts and a random polarization frame."""
    n_r = int(rng.integers(2, max_sizes[0] + 1))
    n_t = int(rng.integers(2, max_sizes[1] + 1))
    n_phi = 2 * int(rng.integers(2, max_sizes[2] // 2 + 1))
    return fock.build_grid(lam, n_r, n_t, n_phi, rotation=float(rng.uniform(0, 2 * np.pi)))


def cmd_verify(cfg: VerifyConfig, negative_control: bool = False, rep: Report | None = None) -> Report:
    rep = rep or Report("verify", cfg)
    rng = np.random.default_rng(cfg.seed)
    lam = cfg.lam
    threads = cfg.threads or default_threads()

    # kernel reductions: angular integration vs closed reduced forms, then quadrature vs MC
    if lam > 0:
        worst = 0.0
        for name in coeffs.TWO_PHOTON:
            for r1, r2, t in ((0.3, 0.7, 0.2), (0.9, 0.4, -0.6)):
                r1, r2 = r1 * lam, r2 * lam
                a = kernels.angular_reduce(name, r1, r2, t, lam)
                b = float(kernels.reduced_kernel(name, r1, r2, t, lam))
                worst = max(worst, abs(a - b) / max(abs(b), 1e-300))
        rep.check("kernel_angular_reduction", worst <= 1e-10, worst, 1e-10, "quad")
        for name in kernels.KERNEL_NAMES:
            if name in coeffs.TWO_PHOTON:
                q, mc = coeffs.vev2(name, lam, cfg.quad_tol, cfg.mc_samples, cfg.seed, threads=threads)
            else:
                q, mc = coeffs.one_photon(name, lam, 1e-9, cfg.mc_samples, cfg.seed, threads)
            diff = abs(q.value - mc.mean)
            bound = 3 * mc.std_error + q.error_estimate
            rep.check(f"quad_vs_mc[{name}]", diff <= bound, diff, bound, "quad/mc")
    else:
        rep.warnings.append("lam = 0: kernel checks are vacuous")

    grid = fock.build_grid(lam, *cfg.grid)
    if grid.size == 0:
        rep.warnings.append("empty mode grid: operator checks are vacuous")
        return rep

    shift = cfg.asymmetric_t_shift if negative_control else 0.0
    eps_grid = fock.build_grid(lam, *cfg.grid, t_shift=shift)
    resid = fock.check_epstens(eps_grid)
    rep.check("epstens_residual", resid <= 1e-12, resid, 1e-12, "discrete",
              note="asymmetric t grid" if negative_control else None, expected_fail=negative_control)

    aux = [fock.check_auxiliary_bounds(grid, cfg.alpha)]
    lams = rng.uniform(*cfg.random_lam, size=cfg.n_random_grids)
    for lam_r in lams:
        aux.append(fock.check_auxiliary_bounds(_random_grid(rng, lam_r, cfg.random_max_sizes), cfg.alpha))
    for key in ("D", "E"):
        worst = min(min(a[key]["sector1_min"], a[key]["sector2_min"]) for a in aux)
        rep.check(f"auxiliary_bound[{key}]", worst >= -1e-10, worst, -1e-10, "discrete",
                  note=f"{len(aux)} grids")
    comm = aux[0]["X"]
    rep.results["commutator"] = comm
    rep.check("commutator_identity_multiple", max(comm["diag_spread"], comm["off_diagonal"]) <= 1e-12,
              max(comm["diag_spread"], comm["off_diagonal"]), 1e-12, "discrete")
    d_disp = abs(comm["displayed_formula"] - comm["quadrature"])
    d_flip = abs(comm["sign_flipped_formula"] - comm["quadrature"])
    if d_disp > 10 * d_flip:
        rep.flags.append({"flag": "displayed-formula-discrepancy",
                          "what": "commutator constant: the displayed +3 a^3 ln(1/a) term disagrees with "
                                  "quadrature; the sign-flipped form agrees",
                          "displayed_minus_quad": d_disp, "flipped_minus_quad": d_flip})

    op = fock.assemble(grid, cfg.alpha)
    basis = op.basis
    worst_sa = 0.0
    for _ in range(cfg.n_pairs):
        u, v = basis.random_state(rng), basis.random_state(rng)
        lhs = np.vdot(u, op.apply(v))
        rhs = np.vdot(op.apply(u), v)
        worst_sa = max(worst_sa, abs(lhs - rhs) / (np.linalg.norm(u) * np.linalg.norm(v)))
    rep.check("self_adjoint", worst_sa <= 1e-12, worst_sa, 1e-12, "discrete")

    v = basis.random_state(rng)
    direct = float(np.real(np.vdot(v, op.apply(v))))
    sectors = fock.sector_energy(op, v)
    square = fock.completed_square_energy(op, v)
    rel_s = abs(direct - sectors) / abs(direct)
    rel_c = abs(direct - square) / abs(direct)
    rep.check("sector_decomposition", rel_s <= 1e-10, rel_s, 1e-10, "discrete")
    rep.check("completed_square", rel_c <= 1e-10, rel_c, 1e-10, "discrete")
    worst_a10 = 0.0
    for sector in (1, 2):
        rho = fock.photon_density(op, v, sector)
        hf = op.hf_expectation(v, sector)
        worst_a10 = max(worst_a10, abs(float(rho @ grid.omega) - hf) / max(1.0, abs(hf)))
    rep.check("photon_density_identity", worst_a10 <= 1e-12, worst_a10, 1e-12, "discrete")
    return rep


COMMANDS = {"coeffs": cmd_coeffs, "fock-sweep": cmd_fock_sweep, "binding": cmd_binding, "verify": cmd_verify}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pflab", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", help="JSON config file")
        s.add_argument("--out", help="report path (default: stdout)")
        s.add_argument("--seed", type=int)
        s.add_argument("--threads", type=int)
        s.add_argument("--negative-control", action="store_true")
        if name == "fock-sweep":
            s.add_argument("--csv", help="CSV table path (default: next to --out)")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {"seed": args.seed, "threads": args.threads}
    if args.command == "fock-sweep":
        csv_path = args.csv or (str(Path(args.out).with_suffix(".csv")) if args.out else None)
        overrides["csv"] = csv_path
    if args.seed is not None and args.seed < 0:
        print("error: --seed must be >= 0", file=sys.stderr)
        return EXIT_FAIL
    if args.threads is not None and args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_FAIL
    try:
        cfg = load_config(args.command, args.config, overrides)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    rep = Report(args.command, cfg)
    code = EXIT_OK
    try:
        COMMANDS[args.command](cfg, args.negative_control, rep)
        if rep.failed:
            rep.status = "check-failed"
            code = EXIT_FAIL
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (NonConvergenceError, coeffs.CoefficientError, fock.EigenNonConvergence,
            binding.NoResonanceError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        code = EXIT_NUMERICAL
        rep.status = "nonconvergence"
        rep.warnings.append(str(exc))
    text = rep.dumps()
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
