"""Command line front-end: ``psclf {fer,exectime,design,selftest}``."""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .crc import parse_crc_structure
from .harness import (DECODERS, ExperimentConfig, run_design_pipeline, run_exec_time_sweep,
                      run_fer_sweep, write_results)


def parse_snr(text: str) -> tuple:
    """``"2.0"``, ``"1,1.5,2"`` or an inclusive range ``"1.0:0.25:2.75"``."""
    if ":" in text:
        parts = [float(x) for x in text.split(":")]
        if len(parts) != 3 or parts[1] <= 0 or parts[2] < parts[0]:
            raise argparse.ArgumentTypeError(f"bad SNR range {text!r}; use start:step:stop")
        start, step, stop = parts
        n = int(np.floor((stop - start) / step + 1e-9)) + 1
        return tuple(round(start + k * step, 10) for k in range(n))
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad SNR list {text!r}") from None


def _int_list(text: str) -> tuple:
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad integer list {text!r}") from None


def _crc_arg(text: str):
    if text == "heuristic":
        return text
    try:
        return parse_crc_structure(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _add_common(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("code")
    g.add_argument("--n", type=int, default=1024, help="code length N")
    g.add_argument("--k", type=int, default=512, help="payload length K")
    g.add_argument("--c", type=int, default=None, help="total CRC length (default: sum of --crc)")
    g.add_argument("--info-set", default=None, help="information-set file")
    g.add_argument("--construct-snr", type=float, default=2.0,
                   help="design SNR of the GA construction [dB]")
    g = p.add_argument_group("decoder")
    g.add_argument("--decoder", choices=DECODERS, default="psclf")
    g.add_argument("--list", type=int, default=4, dest="L", help="list size L")
    g.add_argument("--schedule", type=_int_list, default=(1, 2, 4, 8, 16),
                   help="ASCL list sizes, e.g. 1,2,4,8,16")
    g.add_argument("--tmax", type=int, default=15, help="max trials (per partition)")
    g.add_argument("--alpha", type=float, default=1.2, help="flip-metric alpha")
    g = p.add_argument_group("partitions")
    g.add_argument("--mu", type=_int_list, default=None, help="explicit boundaries")
    g.add_argument("--cdf", default=None, help="CDF file for boundary design")
    g.add_argument("--partitions", type=int, default=None, help="number of partitions P")
    g.add_argument("--uniform", action="store_true", help="equal non-frozen bits per partition")
    g.add_argument("--crc", type=_crc_arg, default=None,
                   help='CRC lengths "7,7,7,11" or "heuristic"')
    g.add_argument("--crc-floor", type=int, default=7, help="minimum CRC bits per partition")
    g = p.add_argument_group("simulation")
    g.add_argument("--snr", type=parse_snr, default=(2.0,), help="Eb/N0 sweep start:step:stop")
    g.add_argument("--min-errors", type=int, default=200)
    g.add_argument("--max-frames", type=int, default=10**6)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--workers", type=int, default=1)
    g.add_argument("--phi", type=int, default=64, help="processing elements")
    g.add_argument("--noiseless", action="store_true")
    g.add_argument("--out", default=None, help="output file")


def config_from_args(a: argparse.Namespace) -> ExperimentConfig:
    heuristic = a.crc == "heuristic"
    crc = None if heuristic or a.crc is None else a.crc
    C = a.c
    if C is None and crc is None:
        C = 32
    return ExperimentConfig(
        N=a.n, K=a.k, C=C, info_set_file=a.info_set, construction_snr_db=a.construct_snr,
        decoder=a.decoder, L=a.L, L_schedule=a.schedule, T_max=a.tmax, alpha=a.alpha,
        mu=a.mu, cdf_file=a.cdf, partitions=a.partitions, uniform=a.uniform, crc=crc,
        crc_heuristic=heuristic, crc_floor=a.crc_floor, snr=a.snr, min_errors=a.min_errors,
        max_frames=a.max_frames, seed=a.seed, workers=a.workers, phi=a.phi,
        noiseless=a.noiseless)


def _cmd_fer(a) -> int:
    cfg = config_from_args(a)
    rows = run_fer_sweep(cfg)
    P = len(rows[0].ptp)
    for r in rows:
        print(f"{r.ebn0_db:6.2f} dB  frames={r.frames:8d}  errors={r.errors:5d}  "
              f"FER={r.fer:.3e} +-{r.ci:.1e}  tbar={r.tbar:.3f}  cycles={r.cycles:.1f}")
    if a.out:
        write_results(a.out, rows, cfg, P)
    return 0


def _cmd_exectime(a) -> int:
    cfg = config_from_args(a)
    rows = run_exec_time_sweep(cfg)
    print("ebn0_db,fer,cycles")
    for snr, fer, cyc in rows:
        print(f"{snr},{fer:.6g},{cyc:.2f}")
    if a.out:
        with open(a.out, "w") as fh:
            fh.write("ebn0_db,fer,cycles\n")
            for snr, fer, cyc in rows:
                fh.write(f"{snr},{fer!r},{cyc!r}\n")
    return 0


def _cmd_design(a) -> int:
    cfg = config_from_args(a)
    res = run_design_pipeline(cfg, cdf_out=a.out, min_events=a.min_events)
    print(json.dumps(res))
    return 0


def _cmd_selftest(a) -> int:
    from . import latency
    from .crc import CrcSpec, DEFAULT_GENERATORS, crc_append, crc_check

    ok = True

    def check(name, cond):
        nonlocal ok
        ok &= bool(cond)
        print(f"{'PASS' if cond else 'FAIL'}  {name}")

    p = latency.LatencyParams(1024, 64, 544)
    check("L_SC(1023) = 2080", latency.sc_partial_latency(1023, p) == 2080)
    check("L_SCL = 2624", latency.scl_latency(p) == 2624)
    rng = np.random.default_rng(0)
    check("CRC round trip", all(crc_check(crc_append(rng.integers(0, 2, 40), CrcSpec(c)),
                                          CrcSpec(c)) for c in DEFAULT_GENERATORS))
    for dec in DECODERS:
        two = dec == "psclf"
        cfg = ExperimentConfig(N=128, K=56 if two else 64, crc=(8, 8) if two else (8,),
                               mu=(63, 127) if two else None, decoder=dec, noiseless=True,
                               max_frames=20)
        rows = run_fer_sweep(cfg)
        check(f"noiseless {dec}: FER = 0", rows[0].errors == 0)
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="psclf", description=__doc__)
    sub = ap.add_subparsers(dest="verb", required=True)
    for verb, helptext in (("fer", "FER sweep"), ("exectime", "average execution time sweep"),
                           ("design", "estimate the first-error CDF and design partitions")):
        p = sub.add_parser(verb, help=helptext)
        _add_common(p)
        if verb == "design":
            p.add_argument("--min-events", type=int, default=2000)
    sub.add_parser("selftest", help="quick built-in consistency checks")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    a = ap.parse_args(argv)
    handlers = {"fer": _cmd_fer, "exectime": _cmd_exectime, "design": _cmd_design,
                "selftest": _cmd_selftest}
    try:
        return handlers[a.verb](a)
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
