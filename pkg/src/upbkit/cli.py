"""Command-line interface: ``upbkit construct|verify|boundent|locc``.

Exit status is 0 when every requested check passes, 1 when a check fails and
2 for usage or input errors.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from typing import Any

import numpy as np

from . import __version__
from .bound_entanglement import (
    all_cuts,
    all_cuts_ppt,
    complementary_state,
    decomposition_error,
    eof_reconstruction_error,
    eof_upper_bound,
    range_has_product_state,
)
from .constructions import (
    CONSTRUCTIONS,
    ProductBasis,
    cut_decomposition,
    embedded_pyramid_3x5,
    make_bob_povm,
    make_completion_3x5,
    make_x_basis,
    shifts_cut_decomposition,
)
from .extendibility import (
    ENUMERATION_BUDGET,
    check_extendible,
    min_upb_size,
    product_overlap_min,
)
from .linalg import TOL_ORTH, TOL_RANK
from .locc import (
    DiscriminationReport,
    demo_2x2,
    distinguish_2xn,
    neumark_restriction_error,
    random_2xn_basis,
    run_pyramid34_protocol,
    verify_completion_orthobasis,
    verify_povm,
)
from .serialization import (
    SchemaError,
    content_hash,
    decode_basis,
    dumps,
    encode_basis,
    encode_povm,
    encode_states,
    encode_vector,
    encode_vectors,
    load_json,
    write_atomic,
)

log = logging.getLogger("upbkit")

CONSTRUCT_NAMES = (
    "pyramid",
    "tiles",
    "shifts",
    "pyramid34",
    "bob-povm",
    "x-basis",
    "completion-3x5",
    "shifts-cut-decomposition",
)
PROTOCOLS = ("pyramid34", "2xn-demo", "completion-check")


class UsageError(Exception):
    pass


class Certificate:
    def __init__(self, label: str, subject: dict, seed: int):
        self.label = label
        self.subject_hash = content_hash(subject)
        self.seed = seed
        self.checks: list[dict] = []
        self.extra: dict[str, Any] = {}

    def add(self, name: str, passed: bool, **evidence) -> bool:
        self.checks.append({"name": name, "passed": bool(passed), "evidence": evidence})
        return bool(passed)

    @property
    def passed(self) -> bool:
        return all(c["passed"] for c in self.checks)

    def to_json(self) -> dict:
        out = {
            "subject": {"label": self.label, "sha256": self.subject_hash},
            "checks": self.checks,
            "passed": self.passed,
            "failures": [c["name"] for c in self.checks if not c["passed"]],
            "tool_version": __version__,
            "seed": self.seed,
        }
        out.update(self.extra)
        return out

    def to_human(self) -> str:
        lines = [f"{self.label}  (sha256 {self.subject_hash[:12]}, seed {self.seed})"]
        for key, val in self.extra.items():
            if not isinstance(val, (dict, list)):
                lines.append(f"  {key}: {val}")
        for c in self.checks:
            ev = ", ".join(f"{k}={_short(v)}" for k, v in c["evidence"].items())
            lines.append(f"  [{'PASS' if c['passed'] else 'FAIL'}] {c['name']}  {ev}")
        return "\n".join(lines)


def _short(v):
    if isinstance(v, float):
        return f"{v:.6g}"
    if isinstance(v, (list, dict)) and len(str(v)) > 60:
        return "..."
    return v


def resolve_seed(value: int | None) -> int:
    if value is not None:
        return value
    env = os.environ.get("UPBKIT_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"UPBKIT_SEED={env!r} is not an integer") from None


def load_basis(args) -> ProductBasis:
    if bool(args.construction) == bool(args.input):
        raise UsageError("give exactly one of --construction or --input")
    if args.construction:
        if args.construction not in CONSTRUCTIONS:
            raise UsageError(f"unknown construction {args.construction!r}; choose from {sorted(CONSTRUCTIONS)}")
        basis = CONSTRUCTIONS[args.construction]()
    else:
        try:
            basis = decode_basis(load_json(args.input))
        except OSError as exc:
            raise UsageError(f"cannot read {args.input}: {exc}") from None
    for k in sorted(set(args.drop or []), reverse=True):
        if not 0 <= k < len(basis):
            raise UsageError(f"--drop {k} out of range for {len(basis)} states")
        basis = basis.without(k)
    return basis


def _orthogonality(basis: ProductBasis, tol: float) -> None:
    bad = basis.orthogonality_violations(tol)
    if bad:
        pairs = "; ".join(f"states {i} and {j}: |overlap| = {v:.3g}" for i, j, v in bad)
        raise SchemaError(f"basis is not orthogonal ({pairs})")


def cmd_construct(args) -> tuple[dict, int]:
    name = args.name
    if name in CONSTRUCTIONS:
        return encode_basis(CONSTRUCTIONS[name]()), 0
    if name == "bob-povm":
        return encode_povm(make_bob_povm(), "bob-povm"), 0
    if name == "x-basis":
        return encode_vectors(make_x_basis(), "x-basis"), 0
    if name == "completion-3x5":
        return encode_states(make_completion_3x5(), "completion-3x5"), 0
    if name == "shifts-cut-decomposition":
        if args.cut not in (0, 1, 2):
            raise UsageError("--cut must be 0, 1 or 2")
        members = shifts_cut_decomposition(args.cut)
        return encode_states(members, f"shifts-cut-{args.cut}", cut=[args.cut], weights=[0.25] * 4), 0
    if os.path.exists(name):
        basis = decode_basis(load_json(name))
        return encode_basis(basis), 0
    raise UsageError(f"unknown construction {name!r}; choose from {', '.join(CONSTRUCT_NAMES)} or a file")


def _verify_checks(basis: ProductBasis, cert: Certificate, args) -> str:
    n, D = len(basis), basis.D
    cert.add("orthogonal", True, max_overlap=float(np.max(np.abs(basis.gram() - np.eye(n)), initial=0.0)))
    if n >= D:
        cert.extra["verdict"] = "complete"
        return "complete"
    part = None
    if basis.m ** n <= ENUMERATION_BUDGET:
        part = check_extendible(basis, args.tol_rank)
    oracle = product_overlap_min(basis, args.restarts, cert.seed)
    if part is not None:
        agree = (not part.extendible and oracle.verdict == "no-product-state") or (
            part.extendible and oracle.verdict == "product-state-exists"
        )
        cert.add(
            "partition_oracle_agree",
            agree,
            partitions_checked=part.partitions_checked,
            extendible=part.extendible,
            oracle_min=oracle.min_value,
            oracle_verdict=oracle.verdict,
        )
        extendible = part.extendible
    else:
        cert.add("oracle", oracle.verdict != "inconclusive", oracle_min=oracle.min_value, oracle_verdict=oracle.verdict)
        extendible = oracle.verdict == "product-state-exists"
    if extendible:
        witness = part.witness_state if part is not None else oracle.argmin
        cert.extra["verdict"] = "extendible"
        cert.extra["witness_state"] = [encode_vector(v) for v in witness.locals]
        if part is not None:
            cert.extra["witness_partition"] = list(part.witness_partition)
        overlaps = np.abs(basis.matrix().conj() @ witness.vector)
        cert.add("witness_orthogonal", bool(np.all(overlaps <= TOL_ORTH)), max_overlap=float(overlaps.max(initial=0.0)))
        return "extendible"
    bound = min_upb_size(basis.dims)
    cert.add("size_bound", n >= bound, n=n, bound=bound)
    cert.extra["verdict"] = "UPB"
    return "UPB"


def cmd_verify(args) -> tuple[dict, int]:
    basis = load_basis(args)
    _orthogonality(basis, args.tol_orth)
    cert = Certificate(basis.label or "basis", encode_basis(basis), args.seed)
    _verify_checks(basis, cert, args)
    return cert, 0 if cert.passed else 1


def cmd_boundent(args) -> tuple[dict, int]:
    basis = load_basis(args)
    _orthogonality(basis, args.tol_orth)
    pre = Certificate(basis.label, encode_basis(basis), args.seed)
    if _verify_checks(basis, pre, args) != "UPB" or not pre.passed:
        raise UsageError(f"{basis.label or 'input'} is not a verified UPB; refusing to certify its complement")
    rho = complementary_state(basis)
    cert = Certificate(basis.label or "basis", encode_basis(basis), args.seed)
    cert.extra["rank"] = rho.rank()
    for check in all_cuts_ppt(rho):
        cert.add(f"ppt[{check.cut.label()}]", check.passed, min_eigenvalue=check.min_eigenvalue)
    rng_res = range_has_product_state(rho, args.restarts, args.seed)
    cert.add("entangled", rng_res.verdict == "no-product-state", range_residual=rng_res.min_value)
    if args.eof:
        cuts = all_cuts(basis.m)
        for cut in cuts:
            est = eof_upper_bound(rho, cut, args.k_max, args.eof_restarts, args.seed)
            err = eof_reconstruction_error(rho, est, cut)
            limit = float(np.log2(min(est.dims)))
            cert.add(
                f"eof[{cut.label()}]",
                err <= 1e-8 and -1e-12 <= est.value <= limit + 1e-12,
                ebits=est.value,
                decomposition_size=est.decomposition_size,
                reconstruction_error=err,
            )
    if args.separability_witness:
        if basis.m < 3:
            cert.add("separable_cuts", False, reason="a bipartite UPB complement is entangled across its only cut")
        for p in range(basis.m) if basis.m >= 3 else []:
            try:
                members = cut_decomposition(basis, p)
                err = decomposition_error(rho, members, [1 / len(members)] * len(members), p)
                cert.add(f"separable[{p}|rest]", err <= 1e-10, frobenius_error=err, members=len(members))
            except ValueError as exc:
                cert.add(f"separable[{p}|rest]", False, reason=str(exc))
    return cert, 0 if cert.passed else 1


def report_json(report: DiscriminationReport) -> dict:
    return {
        "success_probability": report.success_probability,
        "per_input": {
            str(j): {
                "success": report.success(j),
                "paths": [
                    {
                        "rounds": [
                            {"party": r.party, "measurement": r.description, "outcome": r.outcome, "probability": r.probability}
                            for r in t.rounds
                        ],
                        "probability": t.probability,
                        "identified": t.identified_index,
                    }
                    for t in paths
                ],
            }
            for j, paths in report.per_input.items()
        },
        "notes": report.notes,
    }


def cmd_locc(args) -> tuple[Certificate, int]:
    proto = args.protocol
    if proto not in PROTOCOLS:
        raise UsageError(f"unknown protocol {proto!r}; choose from {', '.join(PROTOCOLS)}")
    if proto == "pyramid34":
        cert = Certificate("pyramid34", {"protocol": proto}, args.seed)
        povm, x = make_bob_povm(), make_x_basis()
        cert.add("povm_valid", verify_povm(povm, x), completeness_error=povm.completeness_error(),
                 neumark_error=neumark_restriction_error(povm, x))
        report = run_pyramid34_protocol()
        cert.add("success", abs(report.success_probability - 1) <= 1e-9, success_probability=report.success_probability)
        cert.extra["report"] = report_json(report)
    elif proto == "completion-check":
        states = make_completion_3x5() + embedded_pyramid_3x5()
        cert = Certificate("completion-3x5", encode_states(states, "completion-3x5"), args.seed)
        M = np.array([s.vector for s in states])
        err = float(np.max(np.abs(M.conj() @ M.T - np.eye(len(states)))))
        cert.add("orthonormal_basis", verify_completion_orthobasis(states, (3, 5)), states=len(states), gram_error=err)
    else:
        if args.n < 2:
            raise UsageError("--n must be at least 2")
        basis = demo_2x2() if args.n == 2 else random_2xn_basis(args.n, args.seed)
        cert = Certificate(basis.label, encode_basis(basis), args.seed)
        report = distinguish_2xn(basis)
        cert.add("success", abs(report.success_probability - 1) <= 1e-9, success_probability=report.success_probability)
        cert.extra["report"] = report_json(report)
    return cert, 0 if cert.passed else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="upbkit", description="Unextendible product bases and bound entanglement.")
    parser.add_argument("--version", action="version", version=f"upbkit {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, source=True):
        if source:
            p.add_argument("--construction", help=f"one of {', '.join(sorted(CONSTRUCTIONS))}")
            p.add_argument("--input", metavar="FILE", help="basis JSON file")
            p.add_argument("--drop", type=int, action="append", metavar="INDEX", help="remove state INDEX (repeatable)")
        p.add_argument("--seed", type=int, default=None, help="RNG seed (default $UPBKIT_SEED or 0)")
        p.add_argument("--restarts", type=int, default=1000, help="random starts for the product-state search")
        p.add_argument("--tol-orth", type=float, default=TOL_ORTH)
        p.add_argument("--tol-rank", type=float, default=TOL_RANK)
        p.add_argument("--format", choices=("human", "json"), default="human")
        p.add_argument("--output", metavar="PATH")

    p = sub.add_parser("construct", help="emit a named object as JSON")
    p.add_argument("name", help=f"one of {', '.join(CONSTRUCT_NAMES)} or a basis file")
    p.add_argument("--cut", type=int, default=0, help="cut party for shifts-cut-decomposition")
    p.add_argument("--output", metavar="PATH")
    p.add_argument("--format", choices=("human", "json"), default="json")
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("verify", help="orthogonality, extendibility and size checks")
    common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("boundent", help="certify the complementary state as bound entangled")
    common(p)
    p.add_argument("--eof", action="store_true", help="estimate the entanglement of formation")
    p.add_argument("--k-max", type=int, default=16)
    p.add_argument("--eof-restarts", type=int, default=200)
    p.add_argument("--separability-witness", action="store_true")
    p.set_defaults(func=cmd_boundent)

    p = sub.add_parser("locc", help="simulate a local discrimination protocol")
    p.add_argument("protocol", help=", ".join(PROTOCOLS))
    p.add_argument("--n", type=int, default=2, help="Bob dimension for 2xn-demo")
    common(p, source=False)
    p.set_defaults(func=cmd_locc)
    return parser


def _emit(text: str, path: str | None) -> None:
    if path:
        write_atomic(path, text + "\n")
    else:
        print(text)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        if hasattr(args, "seed"):
            args.seed = resolve_seed(args.seed)
        for name in ("tol_orth", "tol_rank"):
            if getattr(args, name, 1) <= 0:
                raise UsageError(f"--{name.replace('_', '-')} must be positive")
        if getattr(args, "restarts", 1) < 1:
            raise UsageError("--restarts must be at least 1")
        result, code = args.func(args)
    except (UsageError, SchemaError) as exc:
        err = {"error": str(exc), "failures": ["input"]}
        print(dumps(err) if getattr(args, "format", "json") == "json" else f"error: {exc}", file=sys.stderr)
        return 2
    if isinstance(result, Certificate):
        text = dumps(result.to_json()) if args.format == "json" else result.to_human()
    elif args.format == "human":
        text = f"{result.get('label', '')}: " + ", ".join(f"{k}={_short(v)}" for k, v in result.items() if k != "label")
    else:
        text = dumps(result)
    _emit(text, args.output)
    return code


if __name__ == "__main__":
    sys.exit(main())
