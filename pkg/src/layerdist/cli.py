"""Command-line entry point.

Subcommands mirror the pipeline stages: sample-size, gen-sample, canonize,
signatures, sketch, compare, replicate. Exit codes: 0 success, 1 usage
error, 2 data error. All randomness is controlled by explicit --seed
flags, and every seed is echoed into output files, so rerunning a command
with the same flags rewrites byte-identical outputs.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import __version__
from .canonicalize import canonicalize_network
from .errors import LayerdistError
from .experiment import TrainConfig, run_replication
from .matching import compare_layers
from .model_io import load_network, save_network
from .sampling import (
    VcQuery,
    generate_lhs,
    generate_uniform,
    load_samples,
    save_samples,
    solve_min_samples,
)
from .signatures import (
    classify_neurons,
    compute_signature_matrix,
    load_signature_matrix,
    save_signature_matrix,
)
from .sketching import build_hash_family, save_sketches, sketch_layer


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; the CLI contract wants 1
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _parse_bounds(text: str) -> list[tuple[float, float]]:
    bounds = []
    for part in text.split(","):
        lo, _, hi = part.partition(":")
        try:
            bounds.append((float(lo), float(hi)))
        except ValueError:
            raise LayerdistError(f"bad bounds component {part!r}; expected low:high") from None
    return bounds


def _add_threads(p: argparse.ArgumentParser) -> None:
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1,
                   help="worker thread cap (results do not depend on it)")


def _cmd_sample_size(args) -> int:
    q = VcQuery(args.din, args.neurons, args.eps, args.delta)
    print(solve_min_samples(q))
    return 0


def _cmd_gen_sample(args) -> int:
    bounds = _parse_bounds(args.bounds)
    if args.strategy == "lhs":
        samples = generate_lhs(args.n, bounds, args.seed)
    else:
        samples = generate_uniform(args.n, bounds, args.seed)
    save_samples(samples, args.out)
    return 0


def _cmd_canonize(args) -> int:
    network = load_network(args.infile)
    canon, scales = canonicalize_network(network)
    save_network(canon, args.out)
    if args.scales:
        doc = {"scales": [s.values.tolist() for s in scales]}
        Path(args.scales).write_text(json.dumps(doc) + "\n", encoding="utf-8")
    return 0


def _cmd_signatures(args) -> int:
    network = load_network(args.net)
    canon, _ = canonicalize_network(network)
    if not 0 <= args.layer < len(canon.layers):
        raise LayerdistError(f"network has no layer {args.layer}")
    samples = load_samples(args.samples)
    matrix = compute_signature_matrix(canon.layers[args.layer], samples,
                                      n_threads=args.threads)
    save_signature_matrix(matrix, args.out)
    return 0


def _cmd_sketch(args) -> int:
    matrix = load_signature_matrix(args.sasm)
    report = classify_neurons(matrix)
    family = build_hash_family(args.k, args.seed)
    sketches = sketch_layer(matrix, report, family)
    save_sketches(sketches, args.out)
    return 0


def _cmd_compare(args) -> int:
    net_a = load_network(args.net_a)
    net_b = load_network(args.net_b)
    samples = load_samples(args.samples)
    family = build_hash_family(args.k, args.seed)
    report = compare_layers(net_a, net_b, args.layer, samples, family,
                            exact=args.exact, n_threads=args.threads)
    report.save(args.out)
    print(f"layer_distance {report.layer_distance:.6f}")
    return 0


def _cmd_replicate(args) -> int:
    config = TrainConfig(epochs=args.epochs)
    result = run_replication(
        args.seed_a,
        args.seed_b,
        n_samples=args.n,
        k=args.k,
        sample_seed=args.sample_seed,
        master_seed=args.master_seed,
        config=config,
        n_threads=args.threads,
    )
    out = Path(args.out)
    result.report.save(out)
    save_network(result.net_a, out.with_name(out.stem + "_net_a.json"))
    save_network(result.net_b, out.with_name(out.stem + "_net_b.json"))
    print(f"test_accuracy {result.accuracy_a:.4f} {result.accuracy_b:.4f}")
    print(f"layer_distance {result.report.layer_distance:.6f}")
    if result.report.validation is not None:
        v = result.report.validation
        print(f"exact_layer_distance {v.exact_layer_distance:.6f}")
        print(f"mae {v.mae:.6f} rmse {v.rmse:.6f} agreement {v.agreement:.4f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="layerdist")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample-size", help="minimum statistically sound sample size")
    p.add_argument("--din", type=int, required=True)
    p.add_argument("--neurons", type=int, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.set_defaults(fn=_cmd_sample_size)

    p = sub.add_parser("gen-sample", help="generate a probe sample CSV")
    p.add_argument("--strategy", choices=("uniform", "lhs"), required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--bounds", required=True, help="low:high per dimension, comma separated")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_gen_sample)

    p = sub.add_parser("canonize", help="L2-normalize hidden layers with compensation")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--scales", help="optional JSON output for the scale factors")
    p.set_defaults(fn=_cmd_canonize)

    p = sub.add_parser("signatures", help="binary activation signature matrix for one layer")
    p.add_argument("--net", required=True)
    p.add_argument("--layer", type=int, default=0)
    p.add_argument("--samples", required=True)
    p.add_argument("--out", required=True)
    _add_threads(p)
    p.set_defaults(fn=_cmd_signatures)

    p = sub.add_parser("sketch", help="MinHash sketches of a signature matrix")
    p.add_argument("--sasm", required=True)
    p.add_argument("--k", type=int, default=512)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_sketch)

    p = sub.add_parser("compare", help="layer distance between two networks")
    p.add_argument("--net-a", required=True)
    p.add_argument("--net-b", required=True)
    p.add_argument("--layer", type=int, default=0)
    p.add_argument("--samples", required=True)
    p.add_argument("--k", type=int, default=512)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--exact", action="store_true",
                   help="also run the exact-Jaccard path and report errors")
    _add_threads(p)
    p.set_defaults(fn=_cmd_compare)

    p = sub.add_parser("replicate", help="train two nets on the ellipse task and compare")
    p.add_argument("--seed-a", type=int, required=True)
    p.add_argument("--seed-b", type=int, required=True)
    p.add_argument("--n", type=int, default=16000)
    p.add_argument("--k", type=int, default=512)
    p.add_argument("--epochs", type=int, default=20)
    p.add_argument("--sample-seed", type=int, default=42)
    p.add_argument("--master-seed", type=int, default=42)
    p.add_argument("--out", required=True)
    _add_threads(p)
    p.set_defaults(fn=_cmd_replicate)

    return parser


def _normalize_argv(argv: list[str]) -> list[str]:
    # argparse mistakes "-10:10,-10:10" for an option; fuse the value onto
    # the flag so `--bounds -10:10,-10:10` works as documented
    out = []
    it = iter(argv)
    for arg in it:
        if arg == "--bounds":
            value = next(it, None)
            if value is None:
                out.append(arg)
            else:
                out.append(f"--bounds={value}")
        else:
            out.append(arg)
    return out


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(_normalize_argv(list(sys.argv[1:] if argv is None else argv)))
    try:
        return args.fn(args)
    except (LayerdistError, ValueError, IndexError, OSError) as exc:
        print(f"layerdist: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
