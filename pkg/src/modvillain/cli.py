"""Command-line front end.

    modvillain complex info --box '{"lower": [0,0,0], "sides": [1,1,1]}'
    modvillain villain wilson --box 1,1,1 --beta 0.02 --samples 20000 --seed 1
    modvillain villain sample --box 1,1,1 --beta 0.1 --n 10 --seed 1 --out s.csv
    modvillain renorm check --chain demo --beta 0.1 --num-chars 100
    modvillain multiplier pi-entry --dim 3 --offset 0,0,4 --plane 1,2 --grid 256
    modvillain correlation twopoint --dim 3 --beta 0.1 --offset 1,0,0 --grid 64
    modvillain correlation decay --dim 3 --beta 0.1 --ns 8,12,16,24,32,48,64 \\
        --grid 512 --out decay.csv --plot decay.svg

Planes and directions are 1-based on the command line. Every written file
starts with the full configuration echo, including the seed.
"""

import argparse
import csv
import io
import json
import sys
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .cache import MISSING, CacheLockTimeout, JsonCache, atomic_write_text, pi_key
from .complex import Box, Cell, coboundary_matrix, enumerate_cells, real_rank, to_coo_text
from .correlation import connected, fit_power_law, marginal_mc_two_point, points_from_entries
from .errors import ModVillainError
from .gauge import build, exact_wilson_expectation, mc_wilson, sample_gauge_class
from .multiplier import pi_entries_along, pi_entry
from .renorm import (coisometry_residual, ft_residuals, renormalize_chain, restriction_chain,
                     subdivision_chain)
from .svgplot import loglog_svg

COMMANDS = ("complex-info", "villain-wilson", "villain-sample", "renorm-check",
            "multiplier-pi", "correlation-twopoint", "correlation-decay")

DECAY_COLUMNS = ["n", "cross_term", "o_value", "floor", "grid_n"]
WILSON_COLUMNS = ["beta", "cell", "exact", "mc_mean", "mc_stderr"]
FT_TOL = 1e-10


class ConfigError(ModVillainError, ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    params: dict = field(default_factory=dict)


@dataclass
class ResultRecord:
    config: dict
    outputs: dict
    version: str = __version__
    wall_time: float = 0.0
    cache_hits: int = 0
    ok: bool = True

    def to_json(self):
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text):
        return cls(**json.loads(text))


# --- parsing helpers -------------------------------------------------------


def parse_ints(text):
    return [int(x) for x in str(text).split(",") if x.strip()]


def parse_floats(text):
    return [float(x) for x in str(text).split(",") if x.strip()]


def parse_box(text):
    """``'{"lower": [...], "sides": [...]}'`` or comma-separated sides at the origin."""
    text = str(text).strip()
    if text.startswith("{"):
        return Box.from_config(json.loads(text))
    sides = parse_ints(text)
    return Box((0,) * len(sides), tuple(sides))


def parse_plane(text, d):
    plane = tuple(sorted(i - 1 for i in parse_ints(text)))
    if len(plane) != 2 or plane[0] == plane[1] or plane[0] < 0 or plane[1] >= d:
        raise ConfigError(f"plane must be two distinct axes in 1..{d}, got {text!r}")
    return plane


def parse_cell(text, d):
    """``base:plane`` with a 1-based plane, e.g. ``0,0,0:1,2``; a leading ``-`` flips orientation."""
    text = text.strip()
    sign = -1 if text.startswith("-") else 1
    base, _, plane = text.lstrip("-").partition(":")
    b = parse_ints(base)
    if len(b) != d:
        raise ConfigError(f"cell base {base!r} does not have {d} coordinates")
    return Cell(tuple(b), parse_plane(plane, d), sign)


def cell_label(c):
    base = ",".join(map(str, c.base))
    plane = ",".join(str(a + 1) for a in c.directions)
    return f"{'-' if c.orientation < 0 else ''}{base}:{plane}"


# --- validation ------------------------------------------------------------


def _need(params, *names):
    missing = [n for n in names if params.get(n) is None]
    if missing:
        raise ConfigError(f"missing required parameters: {', '.join(missing)}")


def validate(config):
    p = config.params
    if config.command not in COMMANDS:
        raise ConfigError(f"unknown command {config.command!r}")
    if "beta" in p and p["beta"] is not None:
        betas = p["beta"] if isinstance(p["beta"], list) else [p["beta"]]
        if not betas or any(not b > 0 for b in betas):
            raise ConfigError("beta must be positive")
    if p.get("grid") is not None and (p["grid"] < 4 or p["grid"] % 2):
        raise ConfigError("grid must be an even integer >= 4")
    if p.get("dim") is not None and p["dim"] < 2:
        raise ConfigError("dim must be >= 2")
    if config.command in ("villain-wilson", "villain-sample", "complex-info"):
        _need(p, "box")
        parse_box(p["box"])
    if config.command == "villain-wilson":
        _need(p, "beta")
        if p.get("samples") and p["samples"] < 100:
            raise ConfigError("samples must be 0 (exact only) or >= 100")
    if config.command == "villain-sample":
        _need(p, "beta", "n")
        if p["n"] < 1:
            raise ConfigError("n must be >= 1")
    if config.command == "renorm-check":
        _need(p, "chain", "beta", "num_chars")
    if config.command in ("multiplier-pi", "correlation-twopoint"):
        _need(p, "dim", "offset", "plane", "grid")
        if len(parse_ints(p["offset"])) != p["dim"]:
            raise ConfigError("offset length must equal dim")
        parse_plane(p["plane"], p["dim"])
    if config.command == "correlation-twopoint":
        _need(p, "beta")
    if config.command == "correlation-decay":
        _need(p, "dim", "beta", "ns", "grid")
        ns = parse_ints(p["ns"])
        if any(n < 1 for n in ns):
            raise ConfigError("separations must be positive")
        if not 1 <= (p.get("direction") or 1) <= p["dim"]:
            raise ConfigError(f"direction must be in 1..{p['dim']}")
        parse_plane(p.get("plane") or "1,2", p["dim"])
        if any(8 * n > p["grid"] for n in ns):
            raise ConfigError(f"grid {p['grid']} too small: need 8n <= grid for every n")
    needs_seed = bool(p.get("samples")) or config.command == "villain-sample"
    if needs_seed and p.get("seed") is None:
        raise ConfigError("Monte Carlo runs need an explicit --seed")
    return config


# --- output ----------------------------------------------------------------


def _csv_text(config, columns, rows):
    buf = io.StringIO()
    buf.write("# " + json.dumps({"config": asdict(config), "version": __version__}, sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    w.writerows(rows)
    return buf.getvalue()


def read_csv(path):
    """Rows of a CSV written by this tool, skipping the configuration comment."""
    with open(path) as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    return list(csv.DictReader(lines))


def _cache(params):
    if params.get("no_cache"):
        return None
    return JsonCache(params.get("cache_dir"))


def _cached_pi(cache, d, p, q, grid, threads):
    key = pi_key(d, np.subtract(q.base, p.base), p.directions, q.directions, grid)
    if cache is not None:
        hit = cache.get(key)
        if hit is not MISSING:
            return p.orientation * q.orientation * hit
    base_p = Cell(p.base, p.directions)
    base_q = Cell(q.base, q.directions)
    value = pi_entry(d, base_p, base_q, grid, workers=threads)
    if cache is not None:
        cache.put(key, value, {"d": d, "offset": list(map(int, np.subtract(q.base, p.base))),
                               "alpha_p": list(p.directions), "alpha_q": list(q.directions),
                               "grid_n": grid})
    return p.orientation * q.orientation * value


# --- commands --------------------------------------------------------------


def run_complex_info(config):
    p = config.params
    box = parse_box(p["box"])
    counts = [len(enumerate_cells(box, k)) for k in range(box.d + 1)]
    ds = [coboundary_matrix(box, k) for k in range(box.d)]
    ranks = [real_rank(m) for m in ds]
    exact = all(not np.any(ds[k + 1] @ ds[k]) for k in range(box.d - 1))
    kernels = [counts[k] - ranks[k] for k in range(box.d)]
    acyclic = all(kernels[k] == ranks[k - 1] for k in range(1, box.d))
    if p.get("out"):
        for k, m in enumerate(ds):
            atomic_write_text(f"{p['out']}.d{k}.coo", to_coo_text(m))
    out = {"box": box.to_config(), "cell_counts": counts, "coboundary_ranks": ranks,
           "kernel_dims": kernels, "dd_zero": exact, "acyclic": acyclic}
    return out, exact and acyclic, 0


def run_villain_wilson(config):
    p = config.params
    g = build(parse_box(p["box"]))
    cells = [parse_cell(c, g.box.d) for c in p["cell"]] if p.get("cell") else g.plaquettes()
    rng = np.random.default_rng(p.get("seed"))
    rows, ok = [], True
    for beta in p["beta"]:
        for c in cells:
            exact = exact_wilson_expectation(g, beta, c)
            if p.get("samples"):
                est, se = mc_wilson(g, beta, c, p["samples"], rng)
                ok &= abs(est.real - exact) <= 3 * se and abs(est.imag) <= 3 * se
                rows.append([beta, cell_label(c), exact, est.real, se])
            else:
                rows.append([beta, cell_label(c), exact, "", ""])
    if p.get("out"):
        atomic_write_text(p["out"], _csv_text(config, WILSON_COLUMNS, rows))
    return {"columns": WILSON_COLUMNS, "rows": rows}, ok, 0


def run_villain_sample(config):
    p = config.params
    g = build(parse_box(p["box"]))
    beta = p["beta"][0] if isinstance(p["beta"], list) else p["beta"]
    rng = np.random.default_rng(p["seed"])
    reps = sample_gauge_class(g, beta, rng, p["n"]).rep
    columns = ["sample"] + [f"e{i}" for i in range(reps.shape[1])]
    rows = [[i] + list(map(float, r)) for i, r in enumerate(reps)]
    if p.get("out"):
        atomic_write_text(p["out"], _csv_text(config, columns, rows))
    return {"num_samples": len(rows), "num_edges": reps.shape[1], "rows": rows}, True, 0


def load_chain(source):
    """``demo`` (d=3, 1³ ⊂ 2³ ⊂ 3³), a JSON object, or a path to a JSON file."""
    if source == "demo":
        cfg = {"kind": "restriction", "boxes": [{"lower": [0, 0, 0], "sides": [s] * 3} for s in (1, 2, 3)]}
    elif str(source).lstrip().startswith("{"):
        cfg = json.loads(source)
    else:
        with open(source) as fh:
            cfg = json.load(fh)
    kind = cfg.get("kind", "restriction")
    if kind == "restriction":
        return restriction_chain([Box.from_config(b) for b in cfg["boxes"]])
    if kind == "subdivision":
        return subdivision_chain(Box.from_config(cfg["coarse"]), int(cfg["levels"]), float(cfg.get("h0", 1.0)))
    raise ConfigError(f"unknown chain kind {kind!r}")


def run_renorm_check(config):
    p = config.params
    chain = load_chain(p["chain"])
    grams = renormalize_chain(chain)
    report, ok = [], True
    for beta in p["beta"]:
        rng = np.random.default_rng(p.get("seed"))
        ft = ft_residuals(chain, grams, beta, p["num_chars"], rng)
        rng = np.random.default_rng(p.get("seed"))
        raw = ft_residuals(chain, chain.base_grams, beta, p["num_chars"], rng)
        for i, (co, f, r) in enumerate(zip(grams.coisometry_residuals, ft, raw), start=1):
            ok &= co <= FT_TOL and f <= FT_TOL
            report.append({"stage": i, "beta": beta, "coisometry_residual": co, "ft_residual": f,
                           "ft_residual_unrenormalized": r,
                           "coisometry_residual_unrenormalized":
                               coisometry_residual(chain.maps[i - 1], chain.base_grams[i],
                                                   chain.base_grams[i - 1])})
    if p.get("out"):
        atomic_write_text(p["out"], json.dumps({"config": asdict(config), "report": report}, indent=1))
    return {"report": report}, ok, 0


def run_multiplier_pi(config):
    p = config.params
    d = p["dim"]
    plane = parse_plane(p["plane"], d)
    plane_q = parse_plane(p["plane_q"], d) if p.get("plane_q") else plane
    cache = _cache(p)
    cp = Cell((0,) * d, plane)
    cq = Cell(tuple(parse_ints(p["offset"])), plane_q)
    value = _cached_pi(cache, d, cp, cq, p["grid"], p.get("threads", 1))
    rec = {"d": d, "offset": parse_ints(p["offset"]), "alpha_p": [a + 1 for a in plane],
           "alpha_q": [a + 1 for a in plane_q], "grid_n": p["grid"], "value": value}
    if p.get("out"):
        atomic_write_text(p["out"], json.dumps({"config": asdict(config), "record": rec}, indent=1))
    return rec, True, cache.hits if cache else 0


def run_correlation_twopoint(config):
    p = config.params
    d = p["dim"]
    plane = parse_plane(p["plane"], d)
    plane_q = parse_plane(p["plane_q"], d) if p.get("plane_q") else plane
    cache = _cache(p)
    threads = p.get("threads", 1)
    origin = (0,) * d
    cp = Cell(origin, plane)
    cq = Cell(tuple(parse_ints(p["offset"])), plane_q)
    pp = _cached_pi(cache, d, cp, cp, p["grid"], threads)
    qq = _cached_pi(cache, d, Cell(origin, plane_q), Cell(origin, plane_q), p["grid"], threads)
    pq = _cached_pi(cache, d, cp, cq, p["grid"], threads)
    rows, ok = [], True
    for beta in p["beta"]:
        row = {"beta": beta, "pi_pp": pp, "pi_qq": qq, "pi_pq": pq,
               "o_value": float(connected(beta, pp, qq, pq))}
        if p.get("samples"):
            est, se = marginal_mc_two_point(d, beta, cp, cq, p["grid"], p["samples"],
                                            np.random.default_rng(p["seed"]))
            row.update(mc_mean=est.real, mc_stderr=se)
            ok &= abs(est.real - row["o_value"]) <= 3 * se
        rows.append(row)
    if p.get("out"):
        atomic_write_text(p["out"], json.dumps({"config": asdict(config), "rows": rows}, indent=1))
    return {"rows": rows}, ok, cache.hits if cache else 0


def run_correlation_decay(config):
    p = config.params
    d, grid = p["dim"], p["grid"]
    beta = p["beta"][0] if isinstance(p["beta"], list) else p["beta"]
    plane = parse_plane(p.get("plane") or "1,2", d)
    axis = (p.get("direction") or 1) - 1
    ns = parse_ints(p["ns"])
    cache = _cache(p)
    points = None
    if cache is not None:
        offsets = [[n if i == axis else 0 for i in range(d)] for n in [0] + ns]
        keys = [pi_key(d, o, plane, plane, grid) for o in offsets]
        vals = [cache.get(k) for k in keys]
        if all(v is not MISSING for v in vals):
            points = points_from_entries(beta, ns, grid, vals[0], vals[1:])
    if points is None:
        entries = pi_entries_along(d, plane, axis, [0] + ns, grid)
        points = points_from_entries(beta, ns, grid, entries[0], entries[1:])
        if cache is not None:
            for k, o, v in zip(keys, offsets, map(float, entries)):
                cache.put(k, v, {"d": d, "offset": o, "alpha_p": list(plane), "alpha_q": list(plane),
                                 "grid_n": grid})
    rows = [[pt.n, pt.cross_term, pt.value, pt.floor, pt.grid_n] for pt in points]
    floor_ok = all(abs(pt.value) >= pt.floor for pt in points)
    out = {"columns": DECAY_COLUMNS, "rows": rows, "floor_ok": floor_ok}
    fit = None
    if sum(abs(pt.value) > 1e-300 for pt in points) >= 4:
        fit = fit_power_law(points)
        out["fit"] = asdict(fit)
    elif p.get("plot"):
        raise ConfigError("cannot plot: fewer than 4 nonzero correlation values")
    if p.get("out"):
        atomic_write_text(p["out"], _csv_text(config, DECAY_COLUMNS, rows))
    if p.get("plot"):
        title = f"d={d}, beta={beta:g}, grid={grid}"
        svg = loglog_svg([pt.n for pt in points], [pt.value for pt in points],
                         (fit.exponent, fit.log_prefactor), title=title)
        svg = svg.replace(">", ">\n<!-- " + json.dumps(asdict(config)).replace("--", "- -") + " -->", 1)
        atomic_write_text(p["plot"], svg)
    return out, floor_ok, cache.hits if cache else 0


RUNNERS = {
    "complex-info": run_complex_info,
    "villain-wilson": run_villain_wilson,
    "villain-sample": run_villain_sample,
    "renorm-check": run_renorm_check,
    "multiplier-pi": run_multiplier_pi,
    "correlation-twopoint": run_correlation_twopoint,
    "correlation-decay": run_correlation_decay,
}


def dispatch(config):
    validate(config)
    t0 = time.perf_counter()
    outputs, ok, hits = RUNNERS[config.command](config)
    return ResultRecord(asdict(config), outputs, __version__, time.perf_counter() - t0, hits, bool(ok))


# --- argparse --------------------------------------------------------------


def _common():
    c = argparse.ArgumentParser(add_help=False)
    c.add_argument("--seed", type=int)
    c.add_argument("--threads", type=int, default=1)
    c.add_argument("--out")
    c.add_argument("--plot")
    c.add_argument("--json", action="store_true", help="print the full result record as JSON")
    c.add_argument("--cache-dir")
    c.add_argument("--no-cache", action="store_true")
    return c


def build_parser():
    common = _common()
    parser = argparse.ArgumentParser(prog="modvillain", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    groups = parser.add_subparsers(dest="group", required=True)

    cx = groups.add_parser("complex").add_subparsers(dest="action", required=True)
    a = cx.add_parser("info", parents=[common])
    a.add_argument("--box", required=True)

    vl = groups.add_parser("villain").add_subparsers(dest="action", required=True)
    a = vl.add_parser("wilson", parents=[common])
    a.add_argument("--box", required=True)
    a.add_argument("--beta", type=parse_floats, required=True)
    a.add_argument("--cell", action="append")
    a.add_argument("--samples", type=int, default=0)
    a = vl.add_parser("sample", parents=[common])
    a.add_argument("--box", required=True)
    a.add_argument("--beta", type=float, required=True)
    a.add_argument("--n", type=int, required=True)

    rn = groups.add_parser("renorm").add_subparsers(dest="action", required=True)
    a = rn.add_parser("check", parents=[common])
    a.add_argument("--chain", default="demo")
    a.add_argument("--beta", type=parse_floats, required=True)
    a.add_argument("--num-chars", type=int, default=100)

    mp = groups.add_parser("multiplier").add_subparsers(dest="action", required=True)
    a = mp.add_parser("pi-entry", parents=[common])
    a.add_argument("--dim", type=int, required=True)
    a.add_argument("--offset", required=True)
    a.add_argument("--plane", required=True)
    a.add_argument("--plane-q")
    a.add_argument("--grid", type=int, default=256)

    co = groups.add_parser("correlation").add_subparsers(dest="action", required=True)
    a = co.add_parser("twopoint", parents=[common])
    a.add_argument("--dim", type=int, required=True)
    a.add_argument("--beta", type=parse_floats, required=True)
    a.add_argument("--offset", required=True)
    a.add_argument("--plane", default="1,2")
    a.add_argument("--plane-q")
    a.add_argument("--grid", type=int, default=256)
    a.add_argument("--samples", type=int, default=0)
    a = co.add_parser("decay", parents=[common])
    a.add_argument("--dim", type=int, required=True)
    a.add_argument("--beta", type=float, required=True)
    a.add_argument("--ns", required=True)
    a.add_argument("--grid", type=int, default=512)
    a.add_argument("--plane", default="1,2")
    a.add_argument("--direction", type=int, default=1)
    return parser


_NAMES = {("complex", "info"): "complex-info", ("villain", "wilson"): "villain-wilson",
          ("villain", "sample"): "villain-sample", ("renorm", "check"): "renorm-check",
          ("multiplier", "pi-entry"): "multiplier-pi", ("correlation", "twopoint"): "correlation-twopoint",
          ("correlation", "decay"): "correlation-decay"}


def config_from_args(args):
    params = {k: v for k, v in vars(args).items() if k not in ("group", "action", "json")}
    return RunConfig(_NAMES[(args.group, args.action)], params)


def _summary(record):
    out = record.outputs
    if "rows" in out and "columns" in out:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(out["columns"])
        w.writerows(out["rows"])
        text = buf.getvalue()
        if "fit" in out:
            text += f"# fitted exponent {out['fit']['exponent']:.4f}\n"
        return text
    return json.dumps(out, indent=1, default=float) + "\n"


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        record = dispatch(config_from_args(args))
    except CacheLockTimeout as exc:
        sys.stderr.write(json.dumps({"error": "CacheLockTimeout", "message": str(exc), "retryable": True}) + "\n")
        return 75
    except (ModVillainError, ValueError, KeyError, OSError) as exc:
        sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc)}) + "\n")
        return 2
    sys.stdout.write(record.to_json() + "\n" if args.json else _summary(record))
    return 0 if record.ok else 1


if __name__ == "__main__":
    sys.exit(main())
