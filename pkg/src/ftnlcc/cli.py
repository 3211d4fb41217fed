"""Command line entry point: ``ftnlcc {sweep,distance,codebook,selftest}``."""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
import types
import typing
from pathlib import Path

from . import sim
from .codebook import CodebookParams, CodebookSizeError, build_codebook, load_codebook
from .pulse_shaping import ModelValidityError

log = logging.getLogger("ftnlcc")

_FIELDS = {f.name: f for f in dataclasses.fields(sim.SimConfig)}
_HINTS = typing.get_type_hints(sim.SimConfig)


def _float_list(text: str) -> list[float]:
    return [float(v) for v in text.replace(" ", "").split(",") if v]


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def parse_field(name: str, text: str):
    """Convert a config-file or flag string to the type of SimConfig.<name>."""
    hint = _HINTS[name]
    base = hint
    if typing.get_origin(hint) is types.UnionType:
        if text.strip().lower() in ("none", ""):
            return None
        base = next(a for a in typing.get_args(hint) if a is not type(None))
    if base is bool:
        return _bool(text)
    if base is int:
        return int(text)
    if base is float:
        return float(text)
    if typing.get_origin(base) is list:
        return _float_list(text)
    return text.strip()


def load_config_file(path) -> dict:
    """Read ``key = value`` lines; '#' starts a comment."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _FIELDS:
            raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
        out[key] = parse_field(key, val)
    return out


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key = value file with SimConfig fields")
    for name in _FIELDS:
        flag = "--" + name.replace("_", "-")
        if _HINTS[name] is bool:
            p.add_argument(flag, dest=name, action=argparse.BooleanOptionalAction, default=None)
        else:
            p.add_argument(flag, dest=name, default=None, metavar="VALUE")
    p.add_argument("--ebn0", dest="ebn0_db_list", default=None, metavar="DB,DB,...",
                   help="alias for --ebn0-db-list")


def build_config(args) -> sim.SimConfig:
    values = load_config_file(args.config) if args.config else {}
    for name in _FIELDS:
        v = getattr(args, name, None)
        if v is None:
            continue
        values[name] = v if isinstance(v, bool) else parse_field(name, v)
    return sim.SimConfig(**values)


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
        log.info("wrote %s", out)
    else:
        sys.stdout.write(text)


def cmd_sweep(args) -> int:
    cfg = build_config(args)
    points = sim.run_sweep(cfg)
    _emit(sim.ber_csv(points, cfg), args.out)
    if args.plot:
        from .plots import plot_ber
        label = f"LCC N_p={cfg.n_p}, N_t={cfg.n_t}" + (" coded" if cfg.coded else "")
        plot_ber({label: points}, args.plot, title=f"tau = {cfg.tau}")
    return 0


def cmd_distance(args) -> int:
    cfg = build_config(args)
    np_range = [int(v) for v in _float_list(args.np_range)]
    profile = sim.distance_profile(cfg, np_range)
    _emit(sim.distance_csv(profile, cfg), args.out)
    if args.plot:
        from .plots import plot_distance
        plot_distance(profile, args.plot, title=f"N_t = {cfg.n_t}")
    return 0


def cmd_codebook(args) -> int:
    if args.inspect:
        book = load_codebook(args.inspect)
    else:
        cfg = build_config(args)
        book = sim.get_codebook(cfg) if cfg.cache_dir else build_codebook(
            CodebookParams(cfg.n_p, cfg.n_t, sim.receiver_taps(cfg)))
        if args.out:
            book.save(args.out)
            log.info("wrote %s", args.out)
    prm = book.params
    print(f"n_p = {prm.n_p}")
    print(f"n_t = {prm.n_t}")
    print(f"rows = {len(book)}")
    print("taps = " + ",".join(repr(float(t)) for t in prm.taps.taps))
    print(f"min_interclass_distance = {book.min_interclass_distance()!r}")
    return 0


def cmd_selftest(args) -> int:
    from .selftest import run_selftest
    return 0 if run_selftest(sys.stdout) else 1


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ftnlcc", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", parents=[common], help="Monte Carlo BER/FER sweep, CSV output")
    _add_config_flags(p)
    p.add_argument("--out", help="CSV path (default stdout)")
    p.add_argument("--plot", help="write a BER figure to this path")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("distance", parents=[common], help="minimum class distance against window length")
    _add_config_flags(p)
    p.add_argument("--np-range", default="1,3,5,7,9,11,13,15")
    p.add_argument("--out", help="CSV path (default stdout)")
    p.add_argument("--plot", help="write a distance figure to this path")
    p.set_defaults(func=cmd_distance)

    p = sub.add_parser("codebook", parents=[common], help="build, cache or inspect a codebook file")
    _add_config_flags(p)
    p.add_argument("--out", help="write the codebook cache file here")
    p.add_argument("--inspect", help="summarize an existing cache file")
    p.set_defaults(func=cmd_codebook)

    p = sub.add_parser("selftest", parents=[common], help="run the oracle consistency checks")
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ValueError, ModelValidityError, CodebookSizeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
