"""Command-line front end.

Subcommands write one file each (``--output``, default stdout): JSON for
records, CSV for grids. Exit codes: 0 success, 2 no roots, 3 contract
violation, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from dataclasses import dataclass

import numpy as np

from ringbethe import __version__
from ringbethe.bae import SearchWindow, residual_fields, scan_roots
from ringbethe.core import RapidityPair, SystemParams, scattering_lengths
from ringbethe.oracle import OracleConfig, match_levels, odd_sector_spectrum
from ringbethe.strong_coupling import expansion_energy, ExpansionParams, fit_coefficients
from ringbethe.wavefunction import (
    EigenstateEvaluator,
    norm_squared,
    normalize,
    sample_grid,
    verify_contracts,
)

EXIT_OK = 0
EXIT_NO_ROOTS = 2
EXIT_CONTRACT = 3
EXIT_NUMERICAL = 4

log = logging.getLogger("ringbethe")


@dataclass
class RunConfig:
    subcommand: str
    params: SystemParams | None
    window: SearchWindow | None
    oracle_cfg: OracleConfig | None
    output_path: str
    output_format: str


def _plain(obj):
    """Recursively convert numpy scalars/arrays to builtin types."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    return obj


def _write(cfg: RunConfig, text: str) -> None:
    if cfg.output_path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(cfg.output_path, "w", newline="") as fh:
            fh.write(text)


def _json(payload) -> str:
    return json.dumps(_plain(payload), indent=2, allow_nan=True) + "\n"


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([format(v, ".17g") if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def _param_block(p: SystemParams) -> dict:
    lens = scattering_lengths(p)
    return {"xi": p.xi, "xi_b": p.xi_b, "ring_length": p.ring_length, "a": lens.a, "a_b": lens.a_b}


def _roots(cfg: RunConfig, args) -> list[RapidityPair]:
    return scan_roots(cfg.params, cfg.window, allow_attractive=args.allow_attractive)


def _select_root(cfg, args) -> RapidityPair | None:
    roots = _roots(cfg, args)
    if not 0 <= args.root_index < len(roots):
        log.error("root index %d out of range (%d roots in window)", args.root_index, len(roots))
        return None
    return roots[args.root_index]


def cmd_spectrum(cfg: RunConfig, args) -> int:
    roots = _roots(cfg, args)
    records = []
    for i, r in enumerate(roots):
        raw = EigenstateEvaluator.from_pair(r, cfg.params)
        records.append({
            "index": i, "k1": r.k1, "k2": r.k2, "energy": r.energy,
            "residual_1": r.residual_1, "residual_2": r.residual_2,
            "norm": math.sqrt(norm_squared(raw)),
        })
    if cfg.output_format == "csv":
        cols = ["index", "k1", "k2", "energy", "residual_1", "residual_2", "norm"]
        _write(cfg, _csv(cols, [[rec[c] for c in cols] for rec in records]))
    else:
        payload = {
            "params": _param_block(cfg.params),
            "window": {"k_max": cfg.window.k_max, "grid_n": cfg.window.grid_n,
                       "newton_tol": cfg.window.newton_tol, "dedup_tol": cfg.window.dedup_tol},
            "energy_cap": 0.5 * cfg.window.k_max**2,
            "roots": records,
        }
        if args.emit_contours:
            k, r1, r2 = residual_fields(
                cfg.params, SearchWindow(cfg.window.k_max, args.contour_n))
            payload["contours"] = {"k": k, "residual_1": r1, "residual_2": r2}
        _write(cfg, _json(payload))
    if not records:
        log.error("no roots found; try a larger --k-max or --grid-n")
        return EXIT_NO_ROOTS
    return EXIT_OK


def cmd_wavefunction(cfg: RunConfig, args) -> int:
    root = _select_root(cfg, args)
    if root is None:
        return EXIT_NO_ROOTS
    ev = normalize(EigenstateEvaluator.from_pair(root, cfg.params))
    x1, x2, psi = sample_grid(ev, args.n)
    if cfg.output_format == "json":
        _write(cfg, _json({"params": _param_block(cfg.params), "k1": root.k1, "k2": root.k2,
                           "energy": root.energy, "n": args.n,
                           "x1": x1, "x2": x2, "psi": psi}))
    else:
        _write(cfg, _csv(["x1", "x2", "psi"], zip(x1.tolist(), x2.tolist(), psi.tolist())))
    return EXIT_OK


def cmd_verify(cfg: RunConfig, args) -> int:
    root = _select_root(cfg, args)
    if root is None:
        return EXIT_NO_ROOTS
    if args.perturb_k2:
        root = RapidityPair.from_rapidities(root.k1, root.k2 + args.perturb_k2)
    ev = normalize(EigenstateEvaluator.from_pair(root, cfg.params))
    report = verify_contracts(ev, tol=args.tol, n_probes=args.probes, seed=args.seed)
    payload = {"params": _param_block(cfg.params), "root_index": args.root_index,
               "perturb_k2": args.perturb_k2, **report.to_dict()}
    _write(cfg, _json(payload))
    if not report.passed:
        log.error("contract violations: %s", ", ".join(report.failures))
        return EXIT_CONTRACT
    return EXIT_OK


def cmd_expansion(cfg: RunConfig, args) -> int:
    samples = [float(x) for x in args.xi_samples.split(",")]
    base = SystemParams(max(samples), cfg.params.xi_b, cfg.params.ring_length)
    fit = fit_coefficients(base, samples, branch=args.branch, extra_orders=args.extra_orders)
    rows = []
    orb = fit.orbitals
    for xi, pair in zip(fit.xi, fit.pairs):
        res = expansion_energy(ExpansionParams(orb["eta1"], orb["eta2"], xi, base.xi_b),
                               L=base.ring_length)
        rows.append({
            "xi": xi, "k1": pair.k1, "k2": pair.k2, "E_exact": pair.energy,
            "E_expansion": res.energy, "order0": res.orders[0], "order1": res.orders[1],
            "order2": res.orders[2], "difference": pair.energy - res.energy,
        })
    if cfg.output_format == "csv":
        cols = list(rows[0])
        _write(cfg, _csv(cols, [[r[c] for c in cols] for r in rows]))
    else:
        _write(cfg, _json({
            "xi_b": base.xi_b, "ring_length": base.ring_length, "branch": args.branch,
            "orbitals": orb, "rows": rows,
            "fit": {"c0": fit.c0, "c1": fit.c1, "c2": fit.c2, "higher": fit.higher,
                    "residual": fit.residual},
            "closed_form": {"c0": fit.closed_form[0], "c1": fit.closed_form[1], "c2": fit.closed_form[2]}
            if fit.closed_form else None,
        }))
    return EXIT_OK


def cmd_oracle(cfg: RunConfig, args) -> int:
    res = odd_sector_spectrum(cfg.params, cfg.oracle_cfg)
    payload = {"params": {"xi": cfg.params.xi, "xi_b": cfg.params.xi_b,
                          "ring_length": cfg.params.ring_length},
               "levels": cfg.oracle_cfg.levels, "order": cfg.oracle_cfg.order,
               **res.to_dict()}
    if args.match:
        with open(args.match) as fh:
            prior = json.load(fh)
        energies = [r["energy"] for r in prior["roots"]]
        # the top oracle level can sit on either side of its Bethe partner,
        # so only compare below the midpoint of the two highest levels
        e = res.energies
        top = float(0.5 * (e[-1] + e[-2])) if len(e) > 1 else float(e[-1])
        cap = min(prior.get("energy_cap", math.inf), top)
        payload["match"] = match_levels(energies, res, cap)
        payload["match"]["cap"] = cap
    if cfg.output_format == "csv":
        rows = zip(range(len(res.energies)), res.energies.tolist(), res.estimated_error.tolist())
        _write(cfg, _csv(["level", "energy", "estimated_error"], rows))
    else:
        _write(cfg, _json(payload))
    return EXIT_OK


COMMANDS = {
    "spectrum": cmd_spectrum,
    "wavefunction": cmd_wavefunction,
    "verify": cmd_verify,
    "expansion": cmd_expansion,
    "oracle": cmd_oracle,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--xi", type=float, help="particle-particle coupling g L")
    common.add_argument("--xi-b", type=float, required=True, help="barrier coupling g_B L")
    common.add_argument("--ring-length", type=float, default=1.0)
    common.add_argument("--output", default="-", help="output path (default stdout)")
    common.add_argument("--format", choices=["json", "csv"], default=None)
    common.add_argument("--seed", type=int, default=0, help="probe-point seed")
    common.add_argument("--allow-attractive", action="store_true",
                        help="admit non-positive couplings (analytic continuation)")
    common.add_argument("-v", "--verbose", action="store_true")

    scan = argparse.ArgumentParser(add_help=False)
    scan.add_argument("--k-max", type=float, default=None, help="default 12 pi / L")
    scan.add_argument("--grid-n", type=int, default=800)
    scan.add_argument("--newton-tol", type=float, default=1e-12)

    root = argparse.ArgumentParser(add_help=False)
    root.add_argument("--root-index", type=int, default=0)

    p = argparse.ArgumentParser(prog="ringbethe", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="subcommand", required=True)

    s = sub.add_parser("spectrum", parents=[common, scan], help="enumerate rapidity pairs")
    s.add_argument("--emit-contours", action="store_true")
    s.add_argument("--contour-n", type=int, default=200)

    s = sub.add_parser("wavefunction", parents=[common, scan, root], help="sample a state")
    s.add_argument("--n", type=int, default=201)

    s = sub.add_parser("verify", parents=[common, scan, root], help="contract report")
    s.add_argument("--tol", type=float, default=None)
    s.add_argument("--probes", type=int, default=128)
    s.add_argument("--perturb-k2", type=float, default=0.0)

    s = sub.add_parser("expansion", parents=[common], help="1/xi expansion vs exact")
    s.add_argument("--xi-samples", default="200,400,800,1600,3200")
    s.add_argument("--branch", type=int, default=0)
    s.add_argument("--extra-orders", type=int, default=1)

    s = sub.add_parser("oracle", parents=[common], help="finite-difference spectrum")
    s.add_argument("--grid-n", type=int, default=512)
    s.add_argument("--levels", type=int, default=10)
    s.add_argument("--no-extrapolate", action="store_true")
    s.add_argument("--match", default=None, help="spectrum JSON to compare against")
    return p


def make_config(args) -> RunConfig:
    fmt = args.format or ("csv" if args.subcommand == "wavefunction" else "json")
    if args.subcommand != "expansion" and args.xi is None:
        raise ValueError("--xi is required for this subcommand")
    xi = args.xi if args.xi is not None else 1.0
    params = SystemParams(xi, args.xi_b, args.ring_length)
    if args.subcommand != "oracle":
        if args.subcommand == "expansion":
            if not (args.xi_b > 0 or args.allow_attractive):
                raise ValueError("attractive barrier needs --allow-attractive")
        else:
            params.require_repulsive(args.allow_attractive)
    elif not params.repulsive and not args.allow_attractive:
        raise ValueError("attractive or zero couplings need --allow-attractive")
    window = oracle_cfg = None
    if args.subcommand in ("spectrum", "wavefunction", "verify"):
        k_max = args.k_max if args.k_max is not None else 12 * math.pi / args.ring_length
        window = SearchWindow(k_max=k_max, grid_n=args.grid_n, newton_tol=args.newton_tol,
                              dedup_tol=1e-6 / args.ring_length)
    if args.subcommand == "oracle":
        oracle_cfg = OracleConfig(grid_n=args.grid_n, levels=args.levels,
                                  extrapolate=not args.no_extrapolate)
    return RunConfig(args.subcommand, params, window, oracle_cfg, args.output, fmt)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = make_config(args)
    except ValueError as exc:
        log.error("invalid configuration: %s", exc)
        return EXIT_NUMERICAL
    try:
        return COMMANDS[cfg.subcommand](cfg, args)
    except (RuntimeError, ValueError, np.linalg.LinAlgError) as exc:
        log.error("numerical failure: %s", exc)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
