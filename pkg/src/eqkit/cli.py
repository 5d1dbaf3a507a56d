"""``eqkit`` command-line entry point.

Exit codes: 0 success, 2 when ``verify`` finds the Maxwellian not admissible,
1 on any error (the JSON on stdout then carries an ``"error"`` key).
"""
import argparse
import sys
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from . import __version__
from .classify import classify
from .config import load_domain, load_field, load_params
from .constraints import (BC_KINDS, analyze, boundary_residual, forward_check,
                          theta_labels)
from .errors import ConfigError, EqkitError
from .flows import closed_form_flow, rk4_flow
from .geometry import make_rng
from .maxwellian import factor, normalized_transport_residual, positivity_window
from .report import dumps
from .transport import stationarity_test

TRANSPORT_POINTS = 1000
TRANSPORT_TOL = 1e-8


@dataclass
class RunConfig:
    command: str
    domain_file: Optional[str] = None
    params_file: Optional[str] = None
    field_file: Optional[str] = None
    bc: str = "specular"
    samples: int = 256
    seed: int = 42
    tol: float = 1e-7
    out: Optional[str] = None
    dump_matrix: Optional[str] = None
    x0: Optional[list] = None
    t_end: float = 10.0
    steps: int = 10000
    method: str = "closed_form"
    n_particles: int = 100000
    checkpoints: list = field(default_factory=list)
    dump_particles: Optional[str] = None
    t: float = 0.0
    x: Optional[list] = None

    def validate(self):
        if self.bc not in BC_KINDS:
            raise ConfigError(f"bc must be one of {BC_KINDS}")
        if self.samples < 8:
            raise ConfigError("samples must be at least 8")
        if not self.tol > 0:
            raise ConfigError("tol must be positive")
        needs = {
            "classify": ("domain_file",),
            "verify": ("domain_file", "params_file"),
            "trace": ("field_file", "x0"),
            "simulate": ("domain_file", "params_file"),
            "factor": ("params_file", "x"),
        }[self.command]
        for name in needs:
            if getattr(self, name) is None:
                raise ConfigError(f"{self.command} needs --{name.replace('_file', '').replace('_', '-')}")

    def echo(self):
        keep = {
            "classify": ("domain_file", "bc", "samples", "seed", "tol"),
            "verify": ("domain_file", "params_file", "bc", "samples", "seed", "tol"),
            "trace": ("field_file", "x0", "t_end", "steps", "method"),
            "simulate": ("domain_file", "params_file", "bc", "n_particles", "t_end", "seed",
                         "checkpoints"),
            "factor": ("params_file", "t", "x"),
        }[self.command]
        d = asdict(self)
        return {k: d[k] for k in keep}


def _header(config):
    return {"tool_version": __version__, "command": config.command, "config": config.echo()}


def run_classify(config):
    domain = load_domain(config.domain_file)
    family = analyze(domain, config.bc, config.samples, config.seed, config.tol)
    fresh = domain.sample(config.samples, config.seed + 1)
    if config.dump_matrix:
        np.savetxt(config.dump_matrix, family.system.original_matrix, delimiter=",",
                   header=",".join(theta_labels(domain.dim)), comments="", fmt="%.17g")
    cls = classify(family)
    report = _header(config)
    report.update({
        "dim": domain.dim,
        "bc": config.bc,
        "theta_labels": theta_labels(domain.dim),
        "singular_values": family.singular_values,
        "null_dim": family.null_dim,
        "gap_ratio": family.gap_ratio,
        "gap_warning": bool(family.gap_warning),
        "basis": family.basis,
        "classification": cls.to_dict(),
        "forward_check": forward_check(family, fresh),
    })
    return report, 0


def run_verify(config):
    params = load_params(config.params_file)
    domain = load_domain(config.domain_file)
    if params.dim != domain.dim:
        raise ConfigError(f"params are {params.dim}-dimensional, domain is {domain.dim}")
    rng = make_rng(config.seed)
    d = params.dim
    t = rng.uniform(-1.0, 1.0, TRANSPORT_POINTS)
    x = rng.uniform(-1.0, 1.0, (TRANSPORT_POINTS, d)) * domain.scale
    v = rng.standard_normal((TRANSPORT_POINTS, d))
    res = normalized_transport_residual(params, t, x, v)
    samples = domain.sample(config.samples, config.seed)
    bres = boundary_residual(params.theta, samples, config.bc)
    admissible = bool(res.max() <= TRANSPORT_TOL and bres <= 10.0 * config.tol)
    report = _header(config)
    report.update({
        "params": params.to_dict(),
        "transport": {"points": TRANSPORT_POINTS, "max_normalized_residual": float(res.max()),
                      "mean_normalized_residual": float(res.mean()), "tolerance": TRANSPORT_TOL},
        "boundary": {"samples": config.samples, "residual": bres, "tolerance": 10.0 * config.tol},
        "admissible": admissible,
    })
    return report, 0 if admissible else 2


def run_trace(config):
    fld = load_field(config.field_file)
    if config.method == "rk4":
        curve = rk4_flow(fld, config.x0, config.t_end, config.steps)
    else:
        curve = closed_form_flow(fld, config.x0, np.linspace(0.0, config.t_end, config.steps + 1))
    cols = ["t"] + [f"x{i}" for i in range(fld.dim)]
    table = np.column_stack([curve.times, curve.points])
    lines = [",".join(cols)] + [",".join(format(v, ".17g") for v in row) for row in table]
    return "\n".join(lines) + "\n", 0


def run_simulate(config):
    params = load_params(config.params_file)
    domain = load_domain(config.domain_file)
    rep = stationarity_test(params, domain, config.bc, config.n_particles, config.t_end,
                            seed=config.seed, checkpoints=config.checkpoints or None)
    report = _header(config)
    report["stationarity"] = rep.to_dict()
    if config.dump_particles:
        from .transport import advance, sample_initial
        ens = advance(sample_initial(params, domain, config.n_particles, config.seed),
                      domain, config.bc, config.t_end)
        d = domain.dim
        header = ",".join([f"x{i}" for i in range(d)] + [f"v{i}" for i in range(d)])
        np.savetxt(config.dump_particles, np.hstack([ens.positions, ens.velocities]),
                   delimiter=",", header=header, comments="", fmt="%.17g")
    return report, 0


def run_factor(config):
    params = load_params(config.params_file)
    x = np.asarray(config.x, dtype=float)
    f = factor(params, config.t, x[None, :])
    report = _header(config)
    report.update({
        "params": params.to_dict(),
        "positivity_window": list(positivity_window(params) or []),
        "t": config.t,
        "x": x,
        "rho": float(f.rho[0]),
        "rho_explicit": float(f.rho_explicit[0]),
        "a": float(f.a),
        "u": f.u[0],
    })
    return report, 0


COMMANDS = {"classify": run_classify, "verify": run_verify, "trace": run_trace,
            "simulate": run_simulate, "factor": run_factor}


def run(config):
    """Execute one command; returns ``(report, exit_code)``.

    ``report`` is a dict for JSON commands and CSV text for ``trace``.
    """
    config.validate()
    return COMMANDS[config.command](config)


def _floats(text):
    try:
        return [float(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def build_parser():
    p = argparse.ArgumentParser(prog="eqkit", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"eqkit {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, domain=True, params=False):
        if domain:
            sp.add_argument("--domain", dest="domain_file", required=True)
        if params:
            sp.add_argument("--params", dest="params_file", required=True)
        sp.add_argument("--out")

    def bc(sp):
        sp.add_argument("--bc", choices=BC_KINDS, default="specular")
        sp.add_argument("--samples", type=int, default=256)
        sp.add_argument("--seed", type=int, default=42)
        sp.add_argument("--tol", type=float, default=1e-7)

    sp = sub.add_parser("classify", help="nullspace and symmetry class of a domain")
    common(sp)
    bc(sp)
    sp.add_argument("--dump-matrix", help="write the constraint matrix as CSV")

    sp = sub.add_parser("verify", help="check one Maxwellian against a domain")
    common(sp, params=True)
    bc(sp)

    sp = sub.add_parser("trace", help="flow of an affine field, as CSV")
    sp.add_argument("--field", dest="field_file", required=True)
    sp.add_argument("--x0", type=_floats, required=True)
    sp.add_argument("--t-end", type=float, default=10.0)
    sp.add_argument("--steps", type=int, default=10000)
    sp.add_argument("--method", choices=("closed_form", "rk4"), default="closed_form")
    sp.add_argument("--out")

    sp = sub.add_parser("simulate", help="particle stationarity test")
    common(sp, params=True)
    sp.add_argument("--bc", choices=BC_KINDS, default="specular")
    sp.add_argument("-N", dest="n_particles", type=int, default=100000)
    sp.add_argument("--t-end", type=float, default=2.0)
    sp.add_argument("--seed", type=int, default=42)
    sp.add_argument("--checkpoints", type=_floats, default=[])
    sp.add_argument("--dump-particles", help="write final positions and velocities as CSV")

    sp = sub.add_parser("factor", help="factored (rho, a, u) at one point")
    sp.add_argument("--params", dest="params_file", required=True)
    sp.add_argument("--t", type=float, default=0.0)
    sp.add_argument("--x", type=_floats, required=True)
    sp.add_argument("--out")
    return p


def _emit(text, out):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None):
    args = vars(build_parser().parse_args(argv))
    config = RunConfig(**{k: v for k, v in args.items() if v is not None or k == "out"})
    try:
        report, code = run(config)
    except (EqkitError, OSError, ValueError) as exc:
        err = {"tool_version": __version__, "command": config.command,
               "error": str(exc), "error_type": type(exc).__name__}
        sys.stdout.write(dumps(err))
        return 1
    _emit(report if isinstance(report, str) else dumps(report), config.out)
    return code


if __name__ == "__main__":
    sys.exit(main())
