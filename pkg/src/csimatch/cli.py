"""Command-line driver for the SNR sweep.

Settings are resolved in increasing priority: desk-scale defaults, the
``--paper`` preset, a ``--config`` file, then explicit flags. The config file is
flat ``key = value`` text using the long flag names without leading dashes::

    # sweep.cfg
    pairs = 5
    snr-db = -10:30:10
    schemes = minimal,full,stable_matching
"""

from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from .harness import SCHEMES, ExperimentConfig, run_experiment
from .network import SystemConfig
from .overhead import InfeasibleCoherenceBlockError

log = logging.getLogger(__name__)

DESK = {
    "pairs": 5,
    "tx-ant": 3,
    "rx-ant": 3,
    "streams": 1,
    "power": 1.0,
    "coherence": 10_000,
    "snr-db": "-10:30:10",
    "deployments": 200,
    "seed": 0,
    "schemes": ",".join(SCHEMES),
    "out": "-",
    "workers": 1,
    "max-iters": 5,
}

PAPER = {"pairs": 25, "tx-ant": 5, "rx-ant": 5, "streams": 2, "coherence": 10_000, "deployments": 250}

EXIT_INFEASIBLE = 3


def parse_snr_grid(text: str) -> tuple[float, ...]:
    """``"a,b,c"`` lists points; ``"start:stop:step"`` is an inclusive range."""
    text = str(text).strip()
    if ":" in text:
        start, stop, step = (float(x) for x in text.split(":"))
        if step <= 0:
            raise ValueError("SNR step must be positive")
        n = int(np.floor((stop - start) / step + 1e-9)) + 1
        return tuple(float(start + i * step) for i in range(n))
    return tuple(float(x) for x in text.split(",") if x.strip())


def read_config_file(path: str) -> dict:
    values = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (s.strip() for s in line.split("=", 1))
            key = key.lstrip("-").replace("_", "-")
            if key not in DESK and key != "paper":
                raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
            values[key] = value
    return values


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="csimatch",
        description="Monte Carlo sweep of CSI-T selection schemes; writes one CSV row per (scheme, SNR).",
        epilog="Negative SNR values need the '=' form, e.g. --snr-db=-10:30:10.",
    )
    p.add_argument("--pairs", type=int, help="transmitter-receiver pairs K")
    p.add_argument("--tx-ant", type=int, help="antennas per transmitter M")
    p.add_argument("--rx-ant", type=int, help="antennas per receiver N")
    p.add_argument("--streams", type=int, help="data streams per link d")
    p.add_argument("--power", type=float, help="transmit power budget (linear)")
    p.add_argument("--coherence", type=int, help="coherence block T in symbol intervals")
    p.add_argument("--snr-db", help="comma list or start:stop:step (inclusive)")
    p.add_argument("--deployments", type=int, help="number of random deployments")
    p.add_argument("--seed", type=int)
    p.add_argument("--schemes", help=f"comma list from {','.join(SCHEMES)}")
    p.add_argument("--out", help="CSV path, '-' for stdout")
    p.add_argument("--workers", type=int, help="worker processes")
    p.add_argument("--max-iters", type=int, help="WMMSE iterations")
    p.add_argument("--paper", action="store_true", default=None, help="25-pair, 250-deployment preset")
    p.add_argument("--config", help="flat key = value file mirroring the flags")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def resolve(args: argparse.Namespace) -> dict:
    file_values = read_config_file(args.config) if args.config else {}
    flag_values = {
        k.replace("_", "-"): v
        for k, v in vars(args).items()
        if v is not None and k not in ("config", "verbose")
    }
    paper = flag_values.get("paper", file_values.get("paper", False))
    if isinstance(paper, str):
        paper = paper.lower() in ("1", "true", "yes", "on")

    settings = dict(DESK)
    if paper:
        settings.update(PAPER)
    settings.update({k: v for k, v in file_values.items() if k != "paper"})
    settings.update({k: v for k, v in flag_values.items() if k != "paper"})
    return settings


def experiment_from_settings(s: dict) -> ExperimentConfig:
    system = SystemConfig(
        K=int(s["pairs"]),
        M=int(s["tx-ant"]),
        N=int(s["rx-ant"]),
        d=int(s["streams"]),
        P=float(s["power"]),
        T=int(s["coherence"]),
        seed=int(s["seed"]),
    )
    schemes = tuple(x.strip() for x in str(s["schemes"]).split(",") if x.strip())
    out = None if s["out"] == "-" else s["out"]
    return ExperimentConfig(
        system=system,
        snr_grid=parse_snr_grid(s["snr-db"]),
        num_deployments=int(s["deployments"]),
        schemes=schemes,
        output_path=out,
        max_iters=int(s["max-iters"]),
        workers=int(s["workers"]),
    )


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        exp = experiment_from_settings(resolve(args))
    except ValueError as exc:
        parser.error(str(exc))

    log.info("running %d deployments x %d SNR points", exp.num_deployments, len(exp.snr_grid))
    try:
        result = run_experiment(exp)
    except InfeasibleCoherenceBlockError as exc:
        print(f"csimatch: infeasible coherence block: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE

    if exp.output_path is None:
        sys.stdout.write(result.to_csv())
    else:
        log.info("wrote %s", exp.output_path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
