"""gradcheck command"""

import argparse
from typing import Optional

import numpy as np

from app.models.gradcheck import EPSILON, TOLERANCE, GradHook, check_gradients, default_case

VARIANTS = ("bilstm", "gru", "hybrid")


def register(subparsers) -> None:
    parser = subparsers.add_parser("gradcheck", help="compare backprop against central differences")
    parser.add_argument("--variant", choices=VARIANTS, help="check one variant (default: all)")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--eps", type=float, default=EPSILON)
    parser.add_argument("--tolerance", type=float, default=TOLERANCE)
    # shifts the analytic gradient of one tensor, to show a wrong gradient is caught
    parser.add_argument("--corrupt", metavar="TENSOR", help=argparse.SUPPRESS)
    parser.set_defaults(run=run)


def _corruption(name: Optional[str]) -> Optional[GradHook]:
    if name is None:
        return None

    def hook(tensor: str, grad: np.ndarray) -> np.ndarray:
        return grad + 1.0 if tensor == name else grad

    return hook


def run(args: argparse.Namespace) -> int:
    """Print the worst relative error per tensor; exit 0 only if all pass"""
    variants = [args.variant] if args.variant else list(VARIANTS)
    hook = _corruption(args.corrupt)
    failed = []
    print("Variant | Tensor | Size | Max rel. error | Result")
    for variant in variants:
        spec, params, features, labels = default_case(variant, args.seed)
        results = check_gradients(
            spec, params, features, labels, eps=args.eps, tolerance=args.tolerance, hook=hook
        )
        for result in results:
            verdict = "pass" if result.passed else "FAIL"
            print(f"{variant} | {result.name} | {result.size} | {result.max_error:.3e} | {verdict}")
            if not result.passed:
                failed.append(f"{variant}:{result.name}")
    if failed:
        print(f"{len(failed)} tensor(s) failed: {', '.join(failed)}")
        return 1
    return 0
