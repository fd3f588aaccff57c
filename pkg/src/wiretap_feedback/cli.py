"""Command-line front end.

Exit codes: 0 success, 2 input error, 3 numerical non-convergence,
4 budget exceeded.
"""

import argparse
import csv
import datetime as _dt
import io
import json
import math
import os
import sys
import tempfile

import numpy as np

from . import __version__, channels, feedback_sim, lattice, secrecy_rates
from .errors import BudgetExceededError, ConvergenceError
from .info_theory import JointPmf, binary_entropy, channel_capacity_ba

EXIT_INPUT = 2
EXIT_CONVERGENCE = 3
EXIT_BUDGET = 4
SEED_ENV = "WIRETAP_SEED"
DETECT_TOL = 1e-9
CASES = {
    "noiseless": "noiseless",
    "independent": "independent",
    "degraded-main": "degraded_main",
    "degraded-wiretap": "degraded_wiretap",
}


class InputError(ValueError):
    pass


def _round(obj):
    """Round floats to 12 significant digits, recursively."""
    if isinstance(obj, float):
        if not math.isfinite(obj):
            return obj
        return float(f"{obj:.12g}")
    if isinstance(obj, (np.floating,)):
        return _round(float(obj))
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return _round(obj.tolist())
    if isinstance(obj, dict):
        return {k: _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    return obj


def manifest(command, params, seed=None):
    return {
        "command": command,
        "params": params,
        "seed": seed,
        "tool_version": __version__,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
    }


def dumps(doc):
    return json.dumps(_round(doc), indent=2, sort_keys=True) + "\n"


def write_atomic(path, text):
    path = os.path.abspath(path)
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(path), prefix=".tmp-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(doc, out):
    text = dumps(doc)
    if out:
        write_atomic(out, text)
    else:
        sys.stdout.write(text)


# -- spec parsing --------------------------------------------------------------

def _load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON: {exc}") from exc


def bsc_from_json(d):
    try:
        return channels.BscWiretapSpec(
            float(d["eps"]), float(d["delta"]),
            d.get("correlation", "independent").replace("-", "_"),
            custom=d.get("tensor"),
        )
    except KeyError as exc:
        raise InputError(f"bsc spec missing {exc}") from exc


def channel_from_json(doc):
    """Build a ModAddChannelSpec from the channel-file schema (or its BSC shorthand)."""
    try:
        if "bsc" in doc:
            return channels.bsc_to_modadd(bsc_from_json(doc["bsc"]))
        alph = doc["alphabets"]
        noise = doc["noise"]
        qy, qz = int(alph["y"]), int(alph["z"])
        q0 = int(alph.get("y0", 2))
        kind = noise.get("type", "independent")
        if kind == "independent":
            n1 = np.asarray(noise["n1"], dtype=float)
            n2 = np.asarray(noise["n2"], dtype=float)
            n0 = np.asarray(noise["n0"], dtype=float) if "n0" in noise else np.full(q0, 1.0 / q0)
            law = n0[:, None, None] * n1[None, :, None] * n2[None, None, :]
        elif kind == "joint":
            tensor = np.asarray(noise["tensor"], dtype=float)
            if tensor.ndim == 2:
                law = np.full(q0, 1.0 / q0)[:, None, None] * tensor[None, :, :]
            elif tensor.ndim == 3:
                law = tensor
            else:
                raise InputError("joint noise tensor must have 2 or 3 axes")
        else:
            raise InputError(f"unknown noise type {kind!r}")
        return channels.ModAddChannelSpec(
            x_size=int(alph.get("x", min(qy, qz))),
            x1_size=int(alph.get("x1", qz)),
            y0_size=q0,
            y_size=qy,
            z_size=qz,
            noise_law=JointPmf(law),
        )
    except KeyError as exc:
        raise InputError(f"channel spec missing field {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise InputError(f"invalid channel spec: {exc}") from exc


def lattice_from_json(doc):
    try:
        g = np.asarray(doc["g"], dtype=float)
        m = int(doc.get("m", g.shape[0]))
        if g.shape != (m, m):
            raise InputError(f"generator shape {g.shape} does not match m={m}")
        return lattice.LatticeSpec(
            g,
            sigma1_sq=float(doc["sigma1_sq"]),
            sigma2_sq=float(doc.get("sigma2_sq", 1.0)),
            sigma0_sq=float(doc.get("sigma0_sq", 1.0)),
        )
    except KeyError as exc:
        raise InputError(f"lattice spec missing field {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise InputError(f"invalid lattice spec: {exc}") from exc


def structure_flags(spec, tol=DETECT_TOL):
    """Detect independence and degradation of the (N1, N2) law."""
    n12 = spec.n12
    n1, n2 = n12.sum(axis=1), n12.sum(axis=0)
    flags = {"independent": bool(np.abs(n12 - np.outer(n1, n2)).max() <= tol)}
    if spec.y_size == spec.z_size:
        q = spec.y_size
        idx = np.arange(q)
        # degraded wiretap: N2 - N1 independent of N1; degraded main: N1 - N2 independent of N2
        d_wire = np.array([[n12[a, (a + d) % q] for d in range(q)] for a in idx])
        d_main = np.array([[n12[(b + d) % q, b] for d in range(q)] for b in idx])
        flags["degraded_wiretap"] = bool(
            np.abs(d_wire - np.outer(n1, d_wire.sum(axis=0))).max() <= tol)
        flags["degraded_main"] = bool(
            np.abs(d_main - np.outer(n2, d_main.sum(axis=0))).max() <= tol)
    else:
        flags["degraded_wiretap"] = flags["degraded_main"] = False
    return flags


# -- commands -------------------------------------------------------------------

def cmd_capacity(args):
    spec = channel_from_json(_load_json(args.channel_file))
    cap, p = channel_capacity_ba(channels.main_channel(spec), tol=args.tol, max_iter=args.max_iter)
    return {
        "manifest": manifest("capacity", {"channel_file": args.channel_file, "tol": args.tol}),
        "capacity_bits": cap,
        "input_pmf": np.asarray(p).tolist(),
    }


def cmd_secrecy(args):
    spec = channel_from_json(_load_json(args.channel_file))
    modes = ["no-feedback", "public", "full-duplex"] if args.mode == "all" else [args.mode]
    out = {"manifest": manifest("secrecy", {"channel_file": args.channel_file, "mode": args.mode,
                                            "grid_steps": args.grid_steps})}
    if "no-feedback" in modes:
        out["no_feedback"] = secrecy_rates.no_feedback_secrecy_lower(spec, args.grid_steps).to_dict()
    if "public" in modes:
        lo, up = secrecy_rates.public_discussion_bounds(spec, args.grid_steps)
        flags = structure_flags(spec)
        tight = []
        if flags["independent"]:
            tight.append("independent noise: C_s^p = max I(X;Y)-I(Y;Z)")
        if flags["degraded_wiretap"]:
            tight.append("degraded wiretap X->Y->Z: C_s^p = max I(X;Y)-I(X;Z)")
        if flags["degraded_main"]:
            tight.append("degraded main X->Z->Y: C_s^p = 0")
        out["public"] = {
            "lower": lo.to_dict(),
            "upper": up.to_dict(),
            "structure": flags,
            "tightness": tight,
            "bounds_meet": abs(up.rate_bits - lo.rate_bits) <= 1e-9,
        }
    if "full-duplex" in modes:
        out["full_duplex"] = secrecy_rates.full_duplex_secrecy_capacity(spec).to_dict()
    return out


def cmd_halfduplex(args):
    params = {"eps": args.eps, "delta": args.delta}
    if args.optimize:
        params["grid"] = args.grid
        rep = secrecy_rates.halfduplex_optimize(args.eps, args.delta, grid=args.grid,
                                                refine_tol=args.refine_tol)
        return {"manifest": manifest("halfduplex", params), "report": rep.to_dict()}
    if args.mu is None or args.t is None:
        raise InputError("give --mu and --t, or --optimize")
    params.update(mu=args.mu, t=args.t)
    rate = secrecy_rates.halfduplex_rate(args.eps, args.delta, args.mu, args.t)
    return {
        "manifest": manifest("halfduplex", params),
        "rate_bits": rate,
        "delta_hat": channels.halfduplex_equivalent_wiretap(args.delta, args.t),
    }


def sim_config_from_json(doc, seed_override=None, workers=1):
    try:
        scheme = doc["scheme"]
        if scheme == "mod_lambda":
            chan = lattice_from_json(doc["channel"])
        else:
            chan = channel_from_json(doc["channel"])
        seed = int(doc.get("seed", 0)) if seed_override is None else int(seed_override)
        return feedback_sim.SimConfig(
            scheme=scheme,
            n=int(doc["n"]),
            m_size=int(doc["m_size"]),
            trials=int(doc["trials"]),
            seed=seed,
            channel=chan,
            t=None if doc.get("t") is None else float(doc["t"]),
            mu=float(doc.get("mu", 0.5)),
            workers=workers,
        )
    except KeyError as exc:
        raise InputError(f"simulation config missing field {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise InputError(f"invalid simulation config: {exc}") from exc


def cmd_simulate(args):
    doc = _load_json(args.config_file)
    env_seed = os.environ.get(SEED_ENV)
    if env_seed is not None:
        try:
            env_seed = int(env_seed)
        except ValueError as exc:
            raise InputError(f"{SEED_ENV} must be an integer") from exc
    cfg = sim_config_from_json(doc, env_seed, args.workers)
    report = feedback_sim.run(cfg)
    # worker count is an execution detail and stays out of the manifest
    params = {k: v for k, v in doc.items() if k != "seed"}
    result = {
        "manifest": manifest("simulate", params, cfg.seed),
        "report": report.to_dict(),
    }
    stem = args.out or os.path.splitext(os.path.basename(args.config_file))[0] + "_report"
    write_atomic(stem + ".json", dumps(result))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(feedback_sim.CSV_COLUMNS)
    w.writerow(_round(report.csv_row()))
    write_atomic(stem + ".csv", buf.getvalue())
    return {"json": stem + ".json", "csv": stem + ".csv", "report": report.to_dict()}


def cmd_lattice(args):
    spec = lattice_from_json(_load_json(args.lattice_file))
    h = lattice.wrapped_gaussian_entropy(spec, spec.sigma1_sq)
    log_v = math.log2(spec.volume)
    return {
        "manifest": manifest("lattice", {"lattice_file": args.lattice_file}),
        "h_bits": h,
        "log2_volume": log_v,
        "capacity_bits": log_v - h,
    }


def compare_row(eps, delta, case, grid=64):
    """One row of the scheme comparison for a binary wiretap case."""
    corr = CASES.get(case, case)
    if corr == "noiseless":
        eps = delta = 0.0
    spec = channels.bsc_to_modadd(channels.BscWiretapSpec(eps, delta, corr))
    nf = secrecy_rates.no_feedback_secrecy_lower(spec)
    lo, up = secrecy_rates.public_discussion_bounds(spec)
    fd = secrecy_rates.full_duplex_secrecy_capacity(spec)
    hd = secrecy_rates.halfduplex_optimize(eps, delta, grid=grid)
    return {
        "case": case,
        "eps": eps,
        "delta": delta,
        "C_s": nf.rate_bits,
        "C_s_p_lower": lo.rate_bits,
        "C_s_p_upper": up.rate_bits,
        "C_s_p_closed_form": secrecy_rates.bsc_closed_forms(eps, delta, corr)["C_s_p"],
        "C_s_f": fd.rate_bits,
        "half_duplex_opt": hd.rate_bits,
        "half_duplex_opt_mu": hd.achieving_params["mu"],
        "half_duplex_opt_t": hd.achieving_params["t"],
        "half_duplex_half": secrecy_rates.halfduplex_rate(eps, delta, 0.5, 0.5),
    }


COMPARE_COLUMNS = (
    "case", "eps", "delta", "C_s", "C_s_p_lower", "C_s_p_upper", "C_s_p_closed_form",
    "C_s_f", "half_duplex_opt", "half_duplex_opt_mu", "half_duplex_opt_t", "half_duplex_half",
)


def cmd_compare(args):
    try:
        row = compare_row(args.eps, args.delta, args.case, args.grid)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    if args.csv:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(COMPARE_COLUMNS)
        w.writerow(_round([row[c] for c in COMPARE_COLUMNS]))
        write_atomic(args.csv, buf.getvalue())
    params = {"eps": args.eps, "delta": args.delta, "case": args.case, "grid": args.grid}
    return {"manifest": manifest("compare", params), "rows": [row]}


def build_parser():
    p = argparse.ArgumentParser(prog="wiretap-fb", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("capacity", help="main-channel capacity (Blahut-Arimoto)")
    c.add_argument("channel_file")
    c.add_argument("--tol", type=float, default=1e-10)
    c.add_argument("--max-iter", type=int, default=100_000)
    c.add_argument("-o", "--out")
    c.set_defaults(func=cmd_capacity)

    s = sub.add_parser("secrecy", help="secrecy rates without/with public/noisy feedback")
    s.add_argument("channel_file")
    s.add_argument("--mode", choices=["no-feedback", "public", "full-duplex", "all"], default="all")
    s.add_argument("--grid-steps", type=int, default=64)
    s.add_argument("-o", "--out")
    s.set_defaults(func=cmd_secrecy)

    h = sub.add_parser("halfduplex", help="half-duplex feedback secrecy rate")
    h.add_argument("--eps", type=float, required=True)
    h.add_argument("--delta", type=float, default=0.0)
    h.add_argument("--mu", type=float)
    h.add_argument("--t", type=float)
    h.add_argument("--optimize", action="store_true")
    h.add_argument("--grid", type=int, default=64)
    h.add_argument("--refine-tol", type=float, default=1e-12)
    h.add_argument("-o", "--out")
    h.set_defaults(func=cmd_halfduplex)

    m = sub.add_parser("simulate", help="run a scheme simulation from a config file")
    m.add_argument("config_file")
    m.add_argument("--workers", type=int, default=1)
    m.add_argument("-o", "--out", help="output path stem (default: <config>_report)")
    m.set_defaults(func=cmd_simulate)

    lt = sub.add_parser("lattice", help="mod-lattice feedback secrecy capacity")
    lt.add_argument("lattice_file")
    lt.add_argument("-o", "--out")
    lt.set_defaults(func=cmd_lattice)

    cp = sub.add_parser("compare", help="compare schemes on a binary wiretap case")
    cp.add_argument("--eps", type=float, default=0.0)
    cp.add_argument("--delta", type=float, default=0.0)
    cp.add_argument("--case", choices=list(CASES), required=True)
    cp.add_argument("--grid", type=int, default=64)
    cp.add_argument("--csv")
    cp.add_argument("-o", "--out")
    cp.set_defaults(func=cmd_compare)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else 0
    try:
        doc = args.func(args)
    except BudgetExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if args.command == "simulate":
        sys.stdout.write(dumps({"json": doc["json"], "csv": doc["csv"]}))
    else:
        _emit(doc, getattr(args, "out", None))
    return 0


if __name__ == "__main__":
    sys.exit(main())
