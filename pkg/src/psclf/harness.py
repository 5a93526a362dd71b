"""Monte Carlo FER / execution-time sweeps and the design pipeline."""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import design, latency
from .crc import allocate_crc_structure, crc_specs_for
from .flip import (FlipConfig, ascl_decode, psclf_decode, scf_decode, scl_decode,
                   sclf_decode)
from .frames import draw_frame, iter_frames
from .polar_code import PartitionSpec, PolarCode, load_info_set
from .scl import SclDecoder

DECODERS = ("sc", "scl", "ascl", "scf", "sclf", "psclf")


@dataclass
class ExperimentConfig:
    N: int = 1024
    K: int = 512
    C: int | None = None
    info_set_file: str | None = None
    construction_snr_db: float = 2.0
    decoder: str = "psclf"
    L: int = 4
    L_schedule: tuple = (1, 2, 4, 8, 16)
    T_max: int = 15
    alpha: float = 1.2
    mu: tuple | None = None
    cdf_file: str | None = None
    partitions: int | None = None
    uniform: bool = False
    crc: tuple | None = None
    crc_heuristic: bool = False
    crc_floor: int = 7
    snr: tuple = (2.0,)
    min_errors: int = 200
    max_frames: int = 10**6
    seed: int = 0
    workers: int = 1
    phi: int = 64
    noiseless: bool = False

    def validate(self) -> None:
        """Raise ValueError listing every invalid field."""
        errs = []
        if self.decoder not in DECODERS:
            errs.append(f"decoder: must be one of {DECODERS}, got {self.decoder!r}")
        if self.N < 2 or self.N & (self.N - 1):
            errs.append(f"N: must be a power of two, got {self.N}")
        if self.info_set_file and not Path(self.info_set_file).exists():
            errs.append(f"info_set_file: {self.info_set_file} does not exist")
        if self.cdf_file and not Path(self.cdf_file).exists():
            errs.append(f"cdf_file: {self.cdf_file} does not exist")
        if self.L < 1 or self.L & (self.L - 1):
            errs.append(f"L: must be a power of two, got {self.L}")
        if self.T_max < 1:
            errs.append(f"T_max: must be >= 1, got {self.T_max}")
        if self.alpha < 1:
            errs.append(f"alpha: must be >= 1, got {self.alpha}")
        if not self.snr:
            errs.append("snr: sweep is empty")
        if self.min_errors < 1 or self.max_frames < 1:
            errs.append("min_errors/max_frames: must be positive")
        if self.workers < 1:
            errs.append(f"workers: must be >= 1, got {self.workers}")
        if self.phi < 1:
            errs.append(f"phi: must be >= 1, got {self.phi}")
        if self.crc is None and self.C is None:
            errs.append("crc: give an explicit CRC structure or a total CRC length C")
        if self.crc is not None and self.C is not None and sum(self.crc) != self.C:
            errs.append(f"crc: lengths sum to {sum(self.crc)} but C={self.C}")
        sources = sum(x for x in (self.mu is not None, self.cdf_file is not None, self.uniform))
        if sources > 1:
            errs.append("mu/cdf_file/uniform: choose one partition source")
        if (self.cdf_file or self.uniform) and not self.partitions:
            errs.append("partitions: required with a CDF file or uniform partitions")
        if self.crc_heuristic and not self.cdf_file:
            errs.append("crc_heuristic: needs a CDF file for the partition error probabilities")
        if errs:
            raise ValueError("invalid configuration:\n  " + "\n  ".join(errs))


# --------------------------------------------------------------------------
# resolution

def build_code(cfg: ExperimentConfig) -> PolarCode:
    C = cfg.C if cfg.C is not None else sum(cfg.crc)
    if cfg.info_set_file:
        code = load_info_set(cfg.info_set_file)
        if (code.N, code.K, code.C) != (cfg.N, cfg.K, C):
            raise ValueError(f"info_set_file: holds (N,K,C)={(code.N, code.K, code.C)}, "
                             f"config asks for {(cfg.N, cfg.K, C)}")
        return code
    return PolarCode.construct(cfg.N, cfg.K, C, cfg.construction_snr_db)


def build_partition(cfg: ExperimentConfig, code: PolarCode) -> PartitionSpec:
    cdf = design.load_cdf(cfg.cdf_file, code.N) if cfg.cdf_file else None
    if cfg.mu is not None:
        mu = tuple(cfg.mu)
    elif cdf is not None:
        mu = design.design_partitions(cdf, cfg.partitions, code)
    elif cfg.uniform:
        mu = design.design_partitions_uniform(code, cfg.partitions)
    else:
        mu = (code.N - 1,)
    if cfg.crc is not None:
        crc = tuple(cfg.crc)
    elif cfg.crc_heuristic:
        probs = design.partition_error_probs(cdf, mu)
        crc = allocate_crc_structure(code.C, len(mu), probs, cfg.crc_floor)
    elif len(mu) == 1:
        crc = (code.C,)
    else:
        raise ValueError("crc: a multi-partition code needs an explicit or heuristic CRC structure")
    return PartitionSpec(code, mu, crc)


# --------------------------------------------------------------------------
# per-frame work

_CACHE: dict = {}


def _decoder(code, L):
    dec = _CACHE.get((code, L))
    if dec is None:
        dec = _CACHE[(code, L)] = SclDecoder(code, L)
    return dec


def decode_frame(cfg: ExperimentConfig, code, partition, specs, u, llr):
    d = cfg.decoder
    if d == "sc":
        return scf_decode(llr, code, 1, partition, specs, genie_u=u)
    if d == "scf":
        return scf_decode(llr, code, cfg.T_max, partition, specs, genie_u=u)
    if d == "scl":
        return scl_decode(llr, code, cfg.L, partition, specs, u, _decoder(code, cfg.L))
    if d == "sclf":
        if partition.P != 1:
            raise ValueError("decoder: sclf needs a single partition")
        return sclf_decode(llr, code, cfg.L, FlipConfig(cfg.T_max, cfg.alpha), specs, u,
                           _decoder(code, cfg.L))
    if d == "psclf":
        return psclf_decode(llr, code, partition, cfg.L, FlipConfig(cfg.T_max, cfg.alpha),
                            specs, u, _decoder(code, cfg.L))
    decs = {L: _decoder(code, L) for L in cfg.L_schedule}
    return ascl_decode(llr, code, cfg.L_schedule, partition, specs, u, decs)


def _frame_task(args, index):
    cfg, code, partition, specs, ebn0 = args
    u, llr = draw_frame(code, partition, specs, ebn0, cfg.seed, index, cfg.noiseless)
    out = decode_frame(cfg, code, partition, specs, u, llr)
    coll = [p for p, c in enumerate(out.collision) if c]
    return (bool(out.frame_error), out.trials, coll[0] if coll else -1, out.attempts)


# --------------------------------------------------------------------------
# aggregation

@dataclass
class ResultRow:
    ebn0_db: float
    frames: int
    errors: int
    fer: float
    ci: float
    tbar: float
    tbar_p: tuple
    ptp: tuple
    pep: tuple
    cycles: float
    extra: dict = field(default_factory=dict)

    def csv_values(self) -> list:
        return [self.ebn0_db, self.frames, self.errors, self.fer, self.ci, self.tbar,
                *self.ptp, *self.pep, self.cycles]


def csv_header(P: int) -> list:
    return (["ebn0_db", "frames", "errors", "fer", "ci", "tbar"]
            + [f"ptp_{p}" for p in range(1, P + 1)]
            + [f"pep_{p}" for p in range(1, P + 1)] + ["cycles"])


def fer_ci(errors: int, frames: int, z: float = 1.959964) -> float:
    """Half-width of the normal-approximation binomial confidence interval."""
    if frames == 0:
        return float("nan")
    p = errors / frames
    return z * math.sqrt(p * (1 - p) / frames)


def modeled_cycles(cfg: ExperimentConfig, partition: PartitionSpec, trials: np.ndarray,
                   attempts: list) -> float:
    params = latency.LatencyParams.from_partition(partition, cfg.phi)
    d = cfg.decoder
    tot = float(trials.sum(axis=1).mean())
    if d in ("sc", "scf"):
        return latency.avg_exec_time_scf(tot / partition.P, params)
    if d == "scl":
        return float(latency.scl_latency(params))
    if d == "sclf":
        return latency.avg_exec_time_sclf(tot, params)
    if d == "psclf":
        return latency.avg_exec_time_psclf(latency.ExecTimeStats.from_trials(trials), params)
    return latency.avg_exec_time_ascl(attempts, params)


def simulate_point(cfg: ExperimentConfig, code, partition, specs, ebn0: float) -> ResultRow:
    """Frames 0, 1, ... until ``min_errors`` frame errors or ``max_frames`` frames."""
    args = (cfg, code, partition, specs, ebn0)
    errors = 0
    trials, attempts, first_coll = [], [], []
    for err, t, coll, att in iter_frames(_frame_task, args, cfg.max_frames, cfg.workers):
        trials.append(t)
        attempts.append(att)
        if err:
            errors += 1
            first_coll.append(coll)
            if errors >= cfg.min_errors:
                break
    frames = len(trials)
    tr = np.asarray(trials, dtype=np.int64).reshape(frames, -1)
    stats = latency.ExecTimeStats.from_trials(tr)
    fc = np.asarray(first_coll, dtype=np.int64)
    P = partition.P
    pep = tuple(float((fc == p).sum() / errors) if errors else 0.0 for p in range(P))
    return ResultRow(
        ebn0_db=float(ebn0), frames=frames, errors=errors, fer=errors / frames,
        ci=fer_ci(errors, frames), tbar=float(tr.sum(axis=1).mean()),
        tbar_p=tuple(float(x) for x in stats.tbar), ptp=tuple(float(x) for x in stats.reach),
        pep=pep, cycles=modeled_cycles(cfg, partition, tr, attempts),
        extra={"collisions": int((fc >= 0).sum())})


def run_fer_sweep(cfg: ExperimentConfig) -> list:
    cfg.validate()
    code = build_code(cfg)
    partition = build_partition(cfg, code)
    specs = crc_specs_for(partition)
    rows = [simulate_point(cfg, code, partition, specs, snr) for snr in cfg.snr]
    for a, b in zip(rows, rows[1:]):
        if b.fer - b.ci > a.fer + a.ci:
            warnings.warn(f"FER rises from {a.fer:.3g} at {a.ebn0_db} dB "
                          f"to {b.fer:.3g} at {b.ebn0_db} dB", RuntimeWarning)
    return rows


def run_exec_time_sweep(cfg: ExperimentConfig) -> list:
    """Rows of (ebn0_db, FER, modeled average cycles)."""
    if cfg.decoder == "sc":
        raise ValueError("decoder: exectime supports scf, sclf, psclf, ascl and scl")
    return [(r.ebn0_db, r.fer, r.cycles) for r in run_fer_sweep(cfg)]


def run_design_pipeline(cfg: ExperimentConfig, cdf_out=None, min_events: int = 2000) -> dict:
    """Estimate the CDF at ``cfg.snr[0]`` and derive boundaries and CRC lengths."""
    cfg.validate()
    code = build_code(cfg)
    P = cfg.partitions or 1
    cdf = design.estimate_first_error_cdf(code, cfg.L, cfg.snr[0], min_events, cfg.seed,
                                          cfg.max_frames, cfg.workers)
    if cdf_out:
        design.save_cdf(cdf_out, cdf)
    mu = design.design_partitions(cdf, P, code)
    probs = design.partition_error_probs(cdf, mu)
    crc = allocate_crc_structure(code.C, P, probs, min(cfg.crc_floor, code.C // P))
    spec = PartitionSpec(code, mu, crc)
    return {"mu": list(mu), "error_probs": [float(x) for x in probs], "crc": list(crc),
            "s": list(spec.s), "events": cdf.metadata["events"],
            "frames": cdf.metadata["frames"]}


# --------------------------------------------------------------------------
# output

def write_results(path, rows: list, cfg: ExperimentConfig, P: int) -> None:
    """CSV with a fixed header plus ``<path>.json`` holding config and full rows."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(csv_header(P))
        for r in rows:
            w.writerow(r.csv_values())
    manifest = {"config": asdict(cfg), "rows": [asdict(r) for r in rows]}
    path.with_name(path.name + ".json").write_text(json.dumps(manifest, indent=2))
