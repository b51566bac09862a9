"""Command-line front end: template generation, tensor quantization, method
comparison, orientation-curve export, and the training demo.

Machine-readable output (JSON/CSV) goes to the requested file or stdout;
human-oriented summaries go to stderr. Exit codes: 0 ok, 2 usage,
3 I/O, 4 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass

import numpy as np

from . import io as vio
from .baselines import BaselineResult, iterative_l2, linear_round, sign_binary
from .quantizer import QuantResult, drive, quantize, quantize_fixed_lambda
from .template import LambdaTemplate, REFERENCE_LAMBDA, curve, empirical_lambda
from .tensor import Tensor, cosine, stats
from .train import IdxError, TrainConfig, train_demo

METHODS = ("vecq", "iterative-l2", "sign-binary", "linear-round")


@dataclass(frozen=True)
class QuantizerSpec:
    method: str
    bits: int
    lambda_mode: str = "template"  # template | empirical | fixed:<value>

    def __post_init__(self) -> None:
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if self.method == "sign-binary" and self.bits != 1:
            raise ValueError("sign-binary forces bits=1")
        if self.method in ("iterative-l2", "linear-round") and self.bits < 2:
            raise ValueError(f"{self.method} needs bits >= 2")
        if self.fixed_lambda is not None and self.fixed_lambda <= 0.0:
            raise ValueError("fixed lambda must be positive")

    @property
    def fixed_lambda(self) -> float | None:
        if self.lambda_mode.startswith("fixed:"):
            return float(self.lambda_mode.split(":", 1)[1])
        if self.lambda_mode in ("template", "empirical"):
            return None
        raise ValueError(f"unknown lambda-mode {self.lambda_mode!r}")


def run_spec(w, spec: QuantizerSpec, max_iters: int = 50, alpha0: float | None = None):
    if spec.method == "vecq":
        if spec.lambda_mode == "template":
            return quantize(w, spec.bits)
        if spec.lambda_mode == "empirical":
            lam = empirical_lambda(w, spec.bits) * stats(w).std
            return quantize_fixed_lambda(w, spec.bits, lam)
        return quantize_fixed_lambda(w, spec.bits, spec.fixed_lambda)
    if spec.method == "iterative-l2":
        return iterative_l2(w, spec.bits, max_iters=max_iters, alpha0=alpha0)
    if spec.method == "sign-binary":
        return sign_binary(w)
    return linear_round(w, spec.bits)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_template(args) -> int:
    template = LambdaTemplate.baked() if args.baked else LambdaTemplate.solve()
    records = template.to_records(args.k_min, args.k_max)
    text = json.dumps(records, indent=2, sort_keys=True)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    print("k   lambda      reference   diff", file=sys.stderr)
    for rec in records:
        k = rec["k"]
        ref = REFERENCE_LAMBDA.get(k, 6.0 / 2**k)
        note = "  (lambda free, set to 1)" if k == 1 else ""
        print(f"{k:<3d} {rec['lambda']:<11.6f} {ref:<11.6f} {rec['lambda'] - ref:+.6f}{note}", file=sys.stderr)
    return 0


def cmd_quantize(args) -> int:
    spec = QuantizerSpec(method=args.method, bits=args.bits, lambda_mode=args.lambda_mode)
    t = vio.read_tensor(args.input)
    result = run_spec(t.data, spec, max_iters=args.max_iters, alpha0=args.alpha0)
    rec = vio.layer_record(args.name, result)
    if args.out:
        vio.write_tensor(args.out, Tensor(result.reconstructed, t.shape))
    if args.codes_out:
        vio.write_tensor(args.codes_out, Tensor(result.codes, t.shape))
    if args.report:
        vio.write_report(args.report, vio.QuantReport(layers=(rec,)))
    print(
        f"{args.name}: method={spec.method} k={result.bits} J_l2={result.loss_l2:.6g} "
        f"compression={rec.compression_ratio:.2f}x",
        file=sys.stderr,
    )
    return 0


def _parse_code_vectors(text: str) -> list[np.ndarray]:
    out = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if chunk:
            out.append(np.array([float(v) for v in chunk.split(",")], dtype=np.float64))
    if not out:
        raise ValueError("no code vectors given")
    return out


def _trial_vectors(args):
    if args.input is not None:
        yield 0, vio.read_tensor(args.input).data
        return
    for t in range(args.trials):
        rng = np.random.default_rng([args.seed, t])
        yield t, rng.standard_normal(args.dim)


def cmd_compare(args) -> int:
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    for m in methods:
        if m not in METHODS:
            raise ValueError(f"unknown method {m!r}")
    bits = [int(b) for b in args.bits.split(",")]
    candidates = _parse_code_vectors(args.codes) if args.codes else None

    rows = []
    wins: dict[int, list[int]] = {k: [] for k in bits}
    for trial, w in _trial_vectors(args):
        for k in bits:
            results: dict[str, QuantResult] = {}
            for m in methods:
                if m == "vecq" and candidates is not None:
                    # vector-loss selection among the explicit candidates
                    driven = [_driven_result(w, c, k) for c in candidates]
                    results[m] = min(driven, key=lambda r: r.loss_vector)
                else:
                    spec = QuantizerSpec(method=m, bits=1 if m == "sign-binary" else k)
                    results[m] = run_spec(w, spec, max_iters=args.max_iters, alpha0=args.alpha0)
            if candidates is not None:
                for c in candidates:
                    label = "drive[" + ",".join(f"{v:g}" for v in c) + "]"
                    results[label] = _driven_result(w, c, k)
            for m, res in results.items():
                rows.extend(_result_rows(trial, m, k, w, res))
            if "vecq" in results and "iterative-l2" in results:
                wins[k].append(int(results["vecq"].loss_l2 <= results["iterative-l2"].loss_l2))
    for k in bits:
        if wins[k]:
            rows.append(("summary", "vecq_vs_iterative-l2", k, "win_or_tie_rate", float(np.mean(wins[k]))))

    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        writer = csv.writer(out)
        writer.writerow(["trial", "method", "bits", "metric", "value"])
        for row in rows:
            writer.writerow(row)
    finally:
        if args.out:
            out.close()
    return 0


def _driven_result(w, codes, k) -> QuantResult:
    from .quantizer import _assemble

    if codes.size != np.asarray(w).size:
        raise ValueError(f"code vector length {codes.size} does not match input {np.asarray(w).size}")
    return _assemble(np.asarray(w, dtype=np.float64), codes, 1.0, k)


def _result_rows(trial, method, k, w, res: QuantResult):
    metrics = {
        "loss_l2": res.loss_l2,
        "loss_orientation": res.loss_orientation,
        "loss_modulus": res.loss_modulus,
        "loss_vector": res.loss_vector,
        "cosine": cosine(w, res.reconstructed) if res.reconstructed.any() else 0.0,
        "alpha": res.alpha,
        "lambda": res.lam,
    }
    if isinstance(res, BaselineResult):
        metrics["iterations"] = res.iterations
    return [(trial, method, k, name, value) for name, value in metrics.items()]


def _parse_grid(text: str) -> list[float]:
    try:
        start, stop, step = (float(v) for v in text.split(":"))
    except ValueError as exc:
        raise ValueError(f"bad grid {text!r}, expected start:stop:step") from exc
    if step <= 0 or stop < start:
        raise ValueError(f"bad grid {text!r}")
    n = int(round((stop - start) / step))
    return [start + i * step for i in range(n + 1) if start + i * step <= stop + 1e-12]


def cmd_curve(args) -> int:
    grid = _parse_grid(args.grid)
    c = curve(args.k, grid)
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        writer = csv.writer(out)
        writer.writerow(["lambda", "J_o"])
        for lam, jo in c.samples:
            writer.writerow([f"{lam:.6g}", f"{jo:.10g}"])
    finally:
        if args.out:
            out.close()
    return 0


def cmd_train(args) -> int:
    with open(args.config) as fh:
        config = TrainConfig.from_dict(json.load(fh))
    report = train_demo(config, metrics_path=args.metrics)
    summary = {k: v for k, v in report.items() if k != "records"}
    print(json.dumps(summary, indent=2, sort_keys=True))
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="vecq", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("template", help="solve and export the optimal-interval table")
    t.add_argument("--k-min", type=int, default=1)
    t.add_argument("--k-max", type=int, default=8)
    t.add_argument("--out", help="output JSON path (default stdout)")
    t.add_argument("--baked", action="store_true", help="emit the frozen constants instead of re-solving")
    t.set_defaults(func=cmd_template)

    q = sub.add_parser("quantize", help="quantize a stored tensor")
    q.add_argument("--in", dest="input", required=True, help="input tensor file")
    q.add_argument("--method", choices=METHODS, default="vecq")
    q.add_argument("--bits", type=int, default=2)
    q.add_argument("--lambda-mode", default="template", help="template | empirical | fixed:<value>")
    q.add_argument("--out", help="reconstructed tensor output path")
    q.add_argument("--codes-out", help="code tensor output path")
    q.add_argument("--report", help="report JSON output path")
    q.add_argument("--name", default="tensor", help="layer name used in the report")
    q.add_argument("--max-iters", type=int, default=50)
    q.add_argument("--alpha0", type=float, default=None, help="iterative-l2 starting scale")
    q.set_defaults(func=cmd_quantize)

    c = sub.add_parser("compare", help="paired loss comparison across methods")
    c.add_argument("--in", dest="input", default=None, help="tensor file (otherwise random trials)")
    c.add_argument("--bits", default="2", help="comma-separated bitwidths")
    c.add_argument("--methods", default="vecq,iterative-l2")
    c.add_argument("--trials", type=int, default=100)
    c.add_argument("--dim", type=int, default=1024)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--codes", default=None,
                   help="explicit candidate code vectors 'a,b;c,d'; vecq then "
                        "picks the candidate with the least vector loss")
    c.add_argument("--alpha0", type=float, default=None, help="iterative-l2 starting scale")
    c.add_argument("--max-iters", type=int, default=50)
    c.add_argument("--out", help="CSV output path (default stdout)")
    c.set_defaults(func=cmd_compare)

    v = sub.add_parser("curve", help="export the orientation-loss curve as CSV")
    v.add_argument("--k", type=int, required=True)
    v.add_argument("--grid", default="0.05:3.0:0.05", help="start:stop:step")
    v.add_argument("--out", help="CSV output path (default stdout)")
    v.set_defaults(func=cmd_curve)

    tr = sub.add_parser("train", help="run the quantized-training demo")
    tr.add_argument("--config", required=True, help="JSON config path")
    tr.add_argument("--metrics", default=None, help="JSON-lines metrics output path")
    tr.set_defaults(func=cmd_train)

    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (vio.TensorFileError, IdxError, OSError) as exc:
        print(f"vecq: I/O error: {exc}", file=sys.stderr)
        return 3
    except (ValueError, ArithmeticError, KeyError) as exc:
        print(f"vecq: numeric error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
