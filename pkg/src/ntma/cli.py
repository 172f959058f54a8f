"""Command-line front end.

Every randomized command requires ``--seed``.  Parameters are checked
against the library's preconditions inside :func:`parse_args`, so a bad
value exits with status 2 before any work starts; failures during the run
exit with status 1.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

COMMANDS = ("gen-erc", "gen-gw", "tree-weight", "align", "score", "rate", "tree-test", "sweep")
RANDOMIZED = {"gen-erc", "gen-gw", "rate", "tree-test", "sweep"}


@dataclass(frozen=True)
class RunConfig:
    command: str
    params: dict[str, Any] = field(default_factory=dict)
    seed: int | None = None
    out: Path | None = None
    threads: int = 0


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # noqa: D401 - argparse hook
        self.print_usage(sys.stderr)
        self.exit(2, f"{self.prog}: error: {message}\n")


def _seed(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _build_parser() -> _Parser:
    top = _Parser(prog="ntma", description="Tree matching weights and sparse graph alignment.")
    top.add_argument("--threads", type=int, default=0, help="worker threads for numba kernels (0 = all cores)")
    sub = top.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen-erc", help="sample a correlated Erdos-Renyi pair")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--seed", type=_seed)
    p.add_argument("--out-prefix", required=True)

    p = sub.add_parser("gen-gw", help="sample a (correlated) Galton-Watson tree pair")
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--s", type=float, default=1.0)
    p.add_argument("--delta", type=int, default=0)
    p.add_argument("--independent", action="store_true")
    p.add_argument("--depth-cap", type=int, required=True)
    p.add_argument("--seed", type=_seed)
    p.add_argument("--out-prefix", required=True)

    p = sub.add_parser("tree-weight", help="print the matching weight of two rooted trees")
    p.add_argument("--t1", required=True)
    p.add_argument("--t2", required=True)
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--engine", choices=("dp", "rec", "brute"), default="dp")

    p = sub.add_parser("align", help="align two graphs")
    p.add_argument("--g1", required=True)
    p.add_argument("--g2", required=True)
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--variant", choices=("ntma", "ntma2"), default="ntma")
    p.add_argument("--out", required=True)

    p = sub.add_parser("score", help="score a matching against the planted permutation")
    p.add_argument("--matches", required=True)
    p.add_argument("--sigma", required=True)
    p.add_argument("--n", type=int, required=True)

    p = sub.add_parser("rate", help="estimate the growth rate of log W_d")
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--s", type=float, default=1.0)
    p.add_argument("--delta", type=int, default=0)
    p.add_argument("--independent", action="store_true")
    p.add_argument("--condition", choices=("both", "intersection"), default="both")
    p.add_argument("--dmin", type=int, required=True)
    p.add_argument("--dmax", type=int, required=True)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=_seed)
    p.add_argument("--out", required=True)

    p = sub.add_parser("tree-test", help="type-I error and power of the threshold test")
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=_seed)

    p = sub.add_parser("sweep", help="alignment score grid over ERC samples")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=_seed, help="overrides the config file's seed")
    p.add_argument("--out", required=True)
    return top


def _validate(ns: argparse.Namespace) -> dict[str, Any]:
    """Map parsed flags to library parameters, raising ValueError on a precondition failure."""
    from .alignment import NtmaParams
    from .experiments import parse_sweep_config
    from .random_models import GWParams

    cmd = ns.command
    if cmd == "gen-erc":
        if ns.n < 1:
            raise ValueError("--n must be positive")
        if ns.lam < 0:
            raise ValueError("--lambda must be nonnegative")
        if not 0 <= ns.s <= 1:
            raise ValueError("--s must lie in [0, 1]")
        p = ns.lam / ns.n
        if p * (2 - ns.s) > 1:
            raise ValueError("--lambda too large for --n: need p(2-s) <= 1 with p = lambda/n")
        return {"n": ns.n, "p": p, "s": ns.s}
    if cmd in ("gen-gw", "rate"):
        cap = ns.depth_cap if cmd == "gen-gw" else ns.dmax
        if ns.independent and (ns.s != 1.0 or ns.delta != 0):
            raise ValueError("--independent excludes --s and --delta")
        gw = GWParams(ns.lam, ns.s, ns.delta, cap, ns.independent)
        params: dict[str, Any] = {"gw": gw}
        if cmd == "rate":
            if not 1 <= ns.dmin <= ns.dmax:
                raise ValueError("need 1 <= --dmin <= --dmax")
            if ns.trials < 30:
                raise ValueError("--trials must be at least 30")
            params.update(dmin=ns.dmin, dmax=ns.dmax, trials=ns.trials, condition=ns.condition)
        return params
    if cmd == "tree-weight":
        if ns.depth < 0:
            raise ValueError("--depth must be nonnegative")
        return {"t1": ns.t1, "t2": ns.t2, "depth": ns.depth, "engine": ns.engine}
    if cmd == "align":
        if not ns.gamma > 0:
            raise ValueError("gamma must be positive")
        return {"g1": ns.g1, "g2": ns.g2, "params": NtmaParams(ns.depth, ns.gamma, ns.variant)}
    if cmd == "score":
        if ns.n < 1:
            raise ValueError("--n must be positive")
        return {"matches": ns.matches, "sigma": ns.sigma, "n": ns.n}
    if cmd == "tree-test":
        if not ns.gamma > 0:
            raise ValueError("gamma must be positive")
        if ns.trials < 30:
            raise ValueError("--trials must be at least 30")
        if ns.d < 1:
            raise ValueError("--d must be positive")
        GWParams(ns.lam, ns.s, 0, ns.d)
        if ns.lam * ns.s <= 1:
            raise ValueError("need lambda*s > 1 for the conditioned alternative to exist")
        return {"lam": ns.lam, "s": ns.s, "d": ns.d, "gamma": ns.gamma, "trials": ns.trials}
    if cmd == "sweep":
        try:
            text = Path(ns.config).read_text()
        except OSError as exc:
            raise ValueError(f"--config: {exc.strerror}") from None
        config = parse_sweep_config(text)
        for n, lam, s, d, gamma, variant in config.cells():
            NtmaParams(d, gamma, variant)
            if n < 1 or lam < 0 or not 0 <= s <= 1:
                raise ValueError(f"invalid sweep cell n={n} lambda={lam} s={s}")
        if config.trials < 1:
            raise ValueError("trials must be positive")
        return {"config": config, "seed_in_config": "seed" in _config_keys(text)}
    raise AssertionError(cmd)


def _config_keys(text: str) -> set[str]:
    keys = set()
    for line in text.splitlines():
        line = line.split("#", 1)[0]
        if "=" in line:
            keys.add(line.split("=", 1)[0].strip())
    return keys


def parse_args(argv: Sequence[str] | None = None) -> RunConfig:
    """Parse and validate a command line; exits with status 2 on any usage error."""
    parser = _build_parser()
    ns = parser.parse_args(argv)
    if ns.threads < 0:
        parser.error("--threads must be nonnegative")
    try:
        params = _validate(ns)
    except ValueError as exc:
        parser.error(str(exc))
    seed = getattr(ns, "seed", None)
    if ns.command == "sweep":
        if seed is None and not params.pop("seed_in_config"):
            parser.error("sweep needs a seed (--seed or 'seed =' in the config)")
        params.pop("seed_in_config", None)
        if seed is None:
            seed = params["config"].seed
    elif ns.command in RANDOMIZED and seed is None:
        parser.error(f"{ns.command} requires an explicit --seed")
    out = getattr(ns, "out", None) or getattr(ns, "out_prefix", None)
    return RunConfig(ns.command, params, seed, Path(out) if out else None, ns.threads)


# ------------------------------------------------------------ execution


def _set_threads(threads: int) -> None:
    import numba

    numba.set_num_threads(threads or numba.config.NUMBA_NUM_THREADS)


def run(config: RunConfig) -> int:
    from dataclasses import replace

    from . import experiments, io
    from .alignment import align, score
    from .random_models import sample_erc, sample_gw_pair
    from .weights import weight_root

    _set_threads(config.threads)
    cmd, prm = config.command, config.params
    if cmd == "gen-erc":
        pair = sample_erc(prm["n"], prm["p"], prm["s"], config.seed)
        prefix = str(config.out)
        io.write_graph(pair.g1, prefix + ".g1.txt")
        io.write_graph(pair.g2, prefix + ".g2.txt")
        io.write_sigma(pair.sigma, prefix + ".sigma")
    elif cmd == "gen-gw":
        pair = sample_gw_pair(prm["gw"], config.seed)
        prefix = str(config.out)
        io.write_tree(pair.t1, prefix + ".t1.json")
        io.write_tree(pair.t2, prefix + ".t2.json")
    elif cmd == "tree-weight":
        t1, t2 = io.read_tree(prm["t1"]), io.read_tree(prm["t2"])
        print(weight_root(t1, t2, prm["depth"], prm["engine"]))
    elif cmd == "align":
        g1, g2 = io.read_graph(prm["g1"]), io.read_graph(prm["g2"])
        io.write_matches(align(g1, g2, prm["params"]), config.out)
    elif cmd == "score":
        sc = score(io.read_matches(prm["matches"]), io.read_sigma(prm["sigma"]), prm["n"])
        print(json.dumps(sc.as_dict()))
    elif cmd == "rate":
        est = experiments.estimate_rate(
            prm["gw"], prm["dmin"], prm["dmax"], prm["trials"], config.seed, prm["condition"]
        )
        Path(config.out).write_text(est.to_csv(), newline="\n")
        print(json.dumps(est.summary()))
    elif cmd == "tree-test":
        rep = experiments.test_error_rates(
            prm["lam"], prm["s"], prm["d"], prm["gamma"], prm["trials"], config.seed
        )
        print(json.dumps(rep.as_dict()))
    elif cmd == "sweep":
        rows = experiments.alignment_sweep(replace(prm["config"], seed=config.seed))
        Path(config.out).write_text(experiments.sweep_csv(rows), newline="\n")
    return 0


def main(argv: Sequence[str] | None = None) -> int:
    config = parse_args(argv)
    try:
        return run(config)
    except (OSError, ValueError) as exc:
        print(f"ntma {config.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
