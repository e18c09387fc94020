"""Command-line interface.

Exit codes for `check`: 0 identifiable, 1 unidentifiable, 2 inconclusive;
anything above 2 is an error (3 = domain error, 4 = usage/file error).
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from typing import Optional

from . import modelio
from .distance import (
    CircuitParams,
    SimConfig,
    circuit_nds,
    default_k1_grid,
    dsid_freq,
    dsid_time,
    sweep_circuit,
    sweep_to_csv,
)
from .errors import NdsidError
from .ident import (
    Verdict,
    check_chain,
    check_cor2,
    check_sufficient,
    check_thm5,
    pencil_chain,
)
from .model import network_tfms, realize, subsystem_tfms
from .polymat import smith_mcmillan
from .ratpoly import format_poly

EXIT_BY_VERDICT = {
    Verdict.IDENTIFIABLE: 0,
    Verdict.UNIDENTIFIABLE: 1,
    Verdict.INCONCLUSIVE: 2,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems must not collide with verdicts
        self.exit(4, f"{self.prog}: error: {message}\n")


def _witness_json(w):
    if w is None:
        return None
    return {
        "block": [w.i, w.j],
        "delta": [[str(x) for x in row] for row in w.delta],
        "phi1": [[str(x) for x in row] for row in w.phi1.matrix],
        "phi2": [[str(x) for x in row] for row in w.phi2.matrix],
        "sampled_lambdas": [
            {"lambda": str(lam), "responses_equal": ok} for lam, ok in w.sampled_lambdas
        ],
    }


def _report(verdict, method, elapsed) -> dict:
    return {
        "format_version": 1,
        "verdict": verdict.status.value,
        "method": verdict.theorem_used,
        "requested_method": method,
        "certificate": verdict.certificate,
        "witness": _witness_json(verdict.witness),
        "exit_code": EXIT_BY_VERDICT[verdict.status],
        "timing_s": round(elapsed, 6),
    }


def _print_report(report: dict, out: str) -> None:
    if out == "json":
        print(json.dumps(report, indent=2, default=str))
        return
    print(f"verdict: {report['verdict']}  (method: {report['method']})")
    cert = report["certificate"]
    if "ranks" in cert:
        for row in cert["ranks"]:
            print(
                f"  subsystem {row['subsystem']}: "
                f"G_yv FNCR={row['g_yv_fncr']}  G_zu FNRR={row['g_zu_fnrr']}"
            )
    if "xi" in cert:
        bad = [c for c in cert["xi"] if not c["fcr"]]
        print(f"  xi pairs checked: {len(cert['xi'])}, rank-deficient: {len(bad)}")
    w = report["witness"]
    if w:
        print(f"  witness block (i, j) = {tuple(w['block'])}")
        print(f"  delta = {w['delta']}")
        print("  the two connection matrices below produce identical TFMs:")
        print(f"    phi1 = {w['phi1']}")
        print(f"    phi2 = {w['phi2']}")
    print(f"  elapsed: {report['timing_s']} s")


def cmd_check(args) -> int:
    model, extras = modelio.load_model(args.model)
    t0 = time.perf_counter()
    method = args.method
    if method == "auto":
        if "gbar_yv" in extras:
            method = "cor2"
        else:
            net = network_tfms(model)
            method = "thm5" if net.g_zv.is_zero() else "thm2"
    if method == "thm2":
        verdict = check_sufficient(model)
    elif method == "thm5":
        verdict = check_thm5(model)
    elif method == "chain":
        verdict = check_chain(model)
    else:  # cor2
        if "gbar_yv" not in extras:
            raise NdsidError(
                "method cor2 needs a 'factorization' section in the model file"
            )
        verdict = check_cor2(model, extras["gbar_yv"], extras["gbar_zu"])
    report = _report(verdict, args.method, time.perf_counter() - t0)
    _print_report(report, args.out)
    return report["exit_code"]


def cmd_smith(args) -> int:
    model, _ = modelio.load_model(args.model)
    if not (0 <= args.subsystem < model.n):
        raise NdsidError(f"subsystem index {args.subsystem} out of range")
    bundle = subsystem_tfms(realize(model.subsystems[args.subsystem]))
    tfm = {"yv": bundle.g_yv, "zu": bundle.g_zu, "zv": bundle.g_zv, "yu": bundle.g_yu}[
        args.tfm
    ]
    sm = smith_mcmillan(tfm)
    print(f"G_{args.tfm}(subsystem {args.subsystem}): {tfm.rows}x{tfm.cols}, rank {sm.rank}")
    for j in range(sm.rank):
        print(f"  alpha[{j+1}]/beta[{j+1}] = ({format_poly(sm.alphas[j])}) / ({format_poly(sm.betas[j])})")
    print("U =")
    for i in range(sm.u.rows):
        print("   [" + ", ".join(format_poly(sm.u[i, j]) for j in range(sm.u.cols)) + "]")
    print("V =")
    for i in range(sm.v.rows):
        print("   [" + ", ".join(format_poly(sm.v[i, j]) for j in range(sm.v.cols)) + "]")
    if args.self_test:
        ok = sm.reassemble(tfm.rows, tfm.cols) == tfm
        print(f"self-test (U * diag * V == TFM): {'pass' if ok else 'FAIL'}")
        if not ok:
            return 3
    return 0


def cmd_kcf(args) -> int:
    model, _ = modelio.load_model(args.model)
    if not (0 <= args.subsystem < model.n):
        raise NdsidError(f"subsystem index {args.subsystem} out of range")
    chain = pencil_chain(model.subsystems[args.subsystem])
    mrows, mcols = chain.m_pencil.shape
    print(f"pencil M(lam): {mrows}x{mcols}")
    if chain.kform is None:
        print("output rows have full column rank: FNCR certain, no KCF needed")
        return 0
    form = chain.kform
    print("KCF blocks of the reduced leading pencil (L, H, K, N, J order):")
    for b in form.blocks:
        print(f"  {b.kind}_{b.size}  ({b.shape[0]}x{b.shape[1]})")
    if chain.fncr_certain:
        print("no L blocks: FNCR certain")
    else:
        print(f"L-part columns m(i) = {chain.m_cols}; indices {list(chain.xi_l_indices)}")
    if args.self_test:
        ok = form.reassemble() == chain.top_pencil
        print(f"self-test (U * blocks * V == pencil): {'pass' if ok else 'FAIL'}")
        if not ok:
            return 3
    return 0


def cmd_distance(args) -> int:
    if args.sweep is not None:
        parts = args.sweep.split(":")
        if len(parts) == 3:
            from .ratpoly import as_rat

            start, step, stop = (as_rat(p) for p in parts)
            grid = []
            k = start
            while k <= stop:
                grid.append(str(k))
                k = k + step
        else:
            grid = default_k1_grid()
        rows = sweep_circuit(grid, n1=args.n1, n2=args.n2, seed=args.seed)
        csv_text = sweep_to_csv(rows, args.n1, args.n2, args.seed)
        if args.csv:
            with open(args.csv, "w", encoding="utf-8") as f:
                f.write(csv_text)
            print(f"wrote {len(rows)} rows to {args.csv}")
        else:
            print(csv_text, end="")
        return 0
    if args.model is None:
        raise NdsidError("distance needs a model path or --sweep")
    model, _ = modelio.load_model(args.model)
    est = dsid_freq(model, n1=args.n1, n2=args.n2, seed=args.seed)
    est.d_time = dsid_time(model, (est.phi1, est.phi2), SimConfig(prbs_seed=args.seed))
    print(f"d_sid_F = {est.d_freq:.6e}")
    print(f"d_sid_T = {est.d_time:.6e}")
    print(f"d_scm   = {est.d_scm:.6e}")
    print(f"argmin pair: outer {est.argmin_outer}, inner {est.argmin_inner}")
    if args.csv:
        with open(args.csv, "w", encoding="utf-8") as f:
            f.write(f"# ndsid-distance-csv format_version=1 seed={args.seed} n1={args.n1} n2={args.n2}\n")
            f.write("d_scm,d_sid_F,d_sid_T\n")
            f.write(f"{est.d_scm:.6e},{est.d_freq:.6e},{est.d_time:.6e}\n")
    return 0


def cmd_example(args) -> int:
    model = circuit_nds(
        CircuitParams(t=args.t, k1=args.k1, k2=args.k12),
        CircuitParams(t=args.t, k1=args.k1, k2=args.k22),
    )
    meta = {
        "description": "two op-amp circuit subsystems, three RC stages each",
        "t": str(args.t),
        "k11": str(args.k1),
        "k21": str(args.k1),
        "k12": str(args.k12),
        "k22": str(args.k22),
    }
    modelio.save_model(model, args.out, metadata=meta)
    print(f"wrote circuit model to {args.out}")
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="ndsid", description="structure identifiability toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p_check = sub.add_parser("check", help="decide structure identifiability")
    p_check.add_argument("model", help="model JSON path")
    p_check.add_argument(
        "--method",
        choices=["auto", "thm2", "thm5", "cor2", "chain"],
        default="auto",
        help="certificate route (auto prefers necessary-and-sufficient tests)",
    )
    p_check.add_argument("--out", choices=["text", "json"], default="text")
    p_check.set_defaults(func=cmd_check)

    p_smith = sub.add_parser("smith", help="print a Smith-McMillan decomposition")
    p_smith.add_argument("model")
    p_smith.add_argument("--tfm", choices=["yv", "zu", "zv", "yu"], required=True)
    p_smith.add_argument("--subsystem", type=int, default=0)
    p_smith.add_argument("--self-test", action="store_true", dest="self_test")
    p_smith.set_defaults(func=cmd_smith)

    p_kcf = sub.add_parser("kcf", help="print the reduction pencil's Kronecker form")
    p_kcf.add_argument("model")
    p_kcf.add_argument("--subsystem", type=int, default=0)
    p_kcf.add_argument("--self-test", action="store_true", dest="self_test")
    p_kcf.set_defaults(func=cmd_kcf)

    p_dist = sub.add_parser("distance", help="Monte-Carlo distance estimates")
    p_dist.add_argument("model", nargs="?", default=None)
    p_dist.add_argument(
        "--sweep",
        nargs="?",
        const="default",
        default=None,
        metavar="START:STEP:STOP",
        help="sweep the circuit example over a k1 grid (default 0.05:0.05:0.95)",
    )
    p_dist.add_argument("--n1", type=int, default=200)
    p_dist.add_argument("--n2", type=int, default=400)
    p_dist.add_argument("--seed", type=int, default=0)
    p_dist.add_argument("--csv", default=None)
    p_dist.set_defaults(func=cmd_distance)

    p_ex = sub.add_parser("example", help="emit the bundled circuit model")
    p_ex.add_argument("--t", default="1")
    p_ex.add_argument("--k1", default="2/5")
    p_ex.add_argument("--k12", default="2/5")
    p_ex.add_argument("--k22", default="9/10")
    p_ex.add_argument("--out", required=True)
    p_ex.set_defaults(func=cmd_example)

    return parser


def main(argv: Optional[list] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NdsidError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
