"""Command-line front end.

Every subcommand prints one JSON report on stdout (``ap-scan`` prints CSV)
and exits 0; failures print a JSON error on stderr and exit with the code
attached to the error class.  Exit 1 means a verification suite failed and
exit 2 is an argument error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .addcomb import (bsg_extract, croot_sisask_trial, default_sample_size, energy,
                      is_arithmetically_connected, translate_family)
from .decompose import (STRATEGIES, exact_min_cost, greedy_decompose, load_decomposition,
                        save_decomposition)
from .errors import BudgetExhausted, CosetForgeError, InputError
from .functions import (GroupFunction, convolve_count, convolve_mean, load_function,
                        round_almost_integer, save_function, support, uniform_measure)
from .groups import (enumerate_subgroups, generated_subgroup, group_by_name, load_group,
                     save_group)
from .spectral import algebra_norm, fourier_l1_abelian, linf_norm
from .suites import SUITES, ap_scan, ap_scan_csv, run_suite
from .trees import (compile_decomposition, evaluate, evaluate_all, export_dot, leaf_bound,
                    leaf_count, load_tree, prune, save_tree)

SCHEMA = 1
EXIT_VERIFY_FAILED = 1


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = sorted(obj) if isinstance(obj, (set, frozenset)) else obj
        return [_jsonable(v) for v in items]
    if isinstance(obj, Fraction):
        return int(obj) if obj.denominator == 1 else float(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, complex):
        return [obj.real, obj.imag] if obj.imag else obj.real
    return obj


def _parse_set(text: str) -> list[int]:
    try:
        return [int(tok) for tok in text.replace(" ", "").split(",") if tok]
    except ValueError:
        raise InputError(f"expected comma-separated integers, got {text!r}")


def _parse_mode(text: str):
    if text == "exhaustive":
        return "exhaustive"
    if text.startswith("samples:"):
        try:
            return ("samples", int(text.split(":", 1)[1]))
        except ValueError:
            pass
    raise InputError(f"mode must be 'exhaustive' or 'samples:N', got {text!r}")


def _write(path, payload_text: str):
    if path:
        Path(path).write_text(payload_text)


# ---------------------------------------------------------------------------
# handlers: each returns (inputs, outputs)

def cmd_group(args):
    if args.action == "make":
        G = group_by_name(args.name)
        if args.out:
            save_group(G, args.out)
        return {"name": args.name}, {"name": G.name, "order": G.order, "identity": G.identity,
                                     "abelian": G.is_abelian, "written": args.out}
    G = load_group(args.group)
    if args.action == "validate":
        return {"group": args.group}, {"valid": True, "name": G.name, "order": G.order,
                                       "identity": G.identity, "abelian": G.is_abelian}
    subs = enumerate_subgroups(G)
    return {"group": args.group}, {"count": len(subs), "subgroups": [
        {"order": H.order, "normal": H.is_normal, "elements": list(H.elements)} for H in subs]}


def cmd_fn(args):
    if args.action == "make":
        G = load_group(args.group)
        S = _parse_set(args.set)
        f = GroupFunction.indicator(G, S)
        if args.out:
            save_function(f, args.out)
        return {"group": args.group, "set": S}, {"values": [int(v) for v in f.values],
                                                 "written": args.out}
    f = load_function(args.fn)
    if args.action == "norm":
        try:
            l1 = fourier_l1_abelian(f)
        except CosetForgeError:
            l1 = None
        return {"fn": args.fn}, {"algebra_norm": algebra_norm(f), "linf": linf_norm(f),
                                 "abelian_l1": l1}
    if args.action == "round":
        fz = round_almost_integer(f, args.epsilon)
        if args.out:
            save_function(fz, args.out)
        return {"fn": args.fn, "epsilon": args.epsilon}, {"values": fz.integer_values(),
                                                          "written": args.out}
    g = load_function(args.fn2, group=f.group)
    h = convolve_mean(f, g) if args.normalization == "mean" else convolve_count(f, g)
    if args.out:
        save_function(h, args.out)
    vals = [v for v in h.values]
    return ({"fn": args.fn, "fn2": args.fn2, "normalization": args.normalization},
            {"mode": h.mode, "values": vals, "written": args.out})


def cmd_decompose(args):
    f = load_function(args.fn)
    inputs = {"fn": args.fn, "strategy": args.strategy, "epsilon": args.epsilon,
              "exact_min": args.exact_min}
    if args.exact_min:
        try:
            found = exact_min_cost(f, args.cost_budget, args.node_budget, args.epsilon)
        except BudgetExhausted as exc:
            decomposition, report = exc.incumbent
            found = (decomposition, report)
        if found is None:
            return inputs, {"found": False}
        decomposition, report = found
    else:
        decomposition, report = greedy_decompose(f, args.epsilon, args.strategy)
    if args.out:
        save_decomposition(decomposition, args.out)
    layers = [{"subgroup": list(layer.subgroup.elements),
               "terms": [{"rep": r, "coeff": z} for r, z in layer.terms]}
              for layer in decomposition.layers]
    return inputs, {"report": report.to_dict(), "layers": layers,
                    "algebra_norm": algebra_norm(f), "written": args.out}


def cmd_tree(args):
    if args.action == "compile":
        decomposition = load_decomposition(args.decomp)
        tree = compile_decomposition(decomposition)
        unpruned = leaf_count(tree)
        if args.prune:
            tree = prune(tree)
        if args.out:
            save_tree(tree, args.out)
        return ({"decomp": args.decomp, "prune": args.prune},
                {"leaves": leaf_count(tree), "leaves_unpruned": unpruned,
                 "leaf_bound": leaf_bound(decomposition), "nodes": len(tree.nodes),
                 "written": args.out})
    tree = load_tree(args.tree)
    if args.action == "eval":
        if args.x is not None:
            return {"tree": args.tree, "x": args.x}, {"value": evaluate(tree, args.x)}
        return {"tree": args.tree}, {"values": evaluate_all(tree).tolist()}
    if args.action == "prune":
        pruned = prune(tree)
        if args.out:
            save_tree(pruned, args.out)
        return {"tree": args.tree}, {"leaves_before": leaf_count(tree),
                                     "leaves_after": leaf_count(pruned), "written": args.out}
    dot = export_dot(tree)
    _write(args.out, dot)
    return {"tree": args.tree}, {"dot": dot, "written": args.out}


def _set_arg(args, G, attr="set"):
    text = getattr(args, attr)
    if text is not None:
        return _parse_set(text)
    if getattr(args, "fn", None):
        f = load_function(args.fn, group=G)
        return sorted(support(round_almost_integer(f, args.epsilon)))
    raise InputError(f"--{attr.replace('_', '-')} or --fn is required")


def cmd_connect(args):
    G = load_group(args.group)
    A = _set_arg(args, G)
    rng = np.random.default_rng(args.seed)
    cert = is_arithmetically_connected(G, A, args.k, args.l, _parse_mode(args.mode), rng)
    out = cert.to_dict()
    out["witnesses_recheck"] = cert.recheck(G, A)
    return {"group": args.group, "set": A, "k": args.k, "l": args.l, "mode": args.mode,
            "seed": args.seed}, out


def cmd_energy(args):
    G = load_group(args.group)
    A = _set_arg(args, G)
    B = _parse_set(args.set2) if args.set2 else A
    return {"group": args.group, "A": A, "B": B}, {"energy": energy(G, A, B),
                                                   "size_A": len(set(A)), "size_B": len(set(B))}


def cmd_bsg(args):
    G = load_group(args.group)
    A = _set_arg(args, G)
    B = _parse_set(args.set2) if args.set2 else A
    res = bsg_extract(G, A, B, args.threshold)
    return {"group": args.group, "A": A, "B": B, "threshold": args.threshold}, res.to_dict()


def cmd_cs_trial(args):
    G = load_group(args.group)
    rng = np.random.default_rng(args.seed)
    if args.fn:
        f = load_function(args.fn, group=G)
    else:
        f = GroupFunction.random(G, rng, complex_valued=False)
    H = generated_subgroup(G, _parse_set(args.subgroup))
    r = args.r if args.r is not None else default_sample_size(args.p, args.eps)
    res = croot_sisask_trial(uniform_measure(G, H.elements), translate_family(f), args.p,
                             args.eps, r, args.trials, rng)
    return ({"group": args.group, "fn": args.fn, "subgroup_generators": args.subgroup,
             "p": args.p, "eps": args.eps, "trials": args.trials, "seed": args.seed},
            {"subgroup_order": H.order, **res.to_dict()})


def cmd_verify(args):
    results = run_suite(args.suite, args.seed)
    passed = all(r.passed for r in results)
    return ({"suite": args.suite, "seed": args.seed},
            {"passed": passed, "properties": [r.to_dict() for r in results]})


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cosetforge", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--seed", type=int, default=0, help="master seed for stochastic steps")
    parser.add_argument("--timing", action="store_true", help="include wall-clock time in the report")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("group", help="build, validate or list subgroups of a group")
    p.add_argument("action", choices=["make", "validate", "subgroups"])
    p.add_argument("--name", help="group name for make, e.g. Z12, D6, S4, Z2^4, Z2xZ4")
    p.add_argument("--group", help="group file or name")
    p.add_argument("--out")
    p.set_defaults(handler=cmd_group)

    p = sub.add_parser("fn", help="functions on a group")
    p.add_argument("action", choices=["make", "norm", "round", "conv"])
    p.add_argument("--group")
    p.add_argument("--set", help="comma-separated elements for make")
    p.add_argument("--fn")
    p.add_argument("--fn2")
    p.add_argument("--epsilon", type=float, default=0.0)
    p.add_argument("--normalization", choices=["mean", "count"], default="mean")
    p.add_argument("--out")
    p.set_defaults(handler=cmd_fn)

    p = sub.add_parser("decompose", help="write f_Z as integer combination of coset indicators")
    p.add_argument("--fn", required=True)
    p.add_argument("--strategy", choices=STRATEGIES, default="largest-subgroup")
    p.add_argument("--epsilon", type=float, default=0.0)
    p.add_argument("--exact-min", action="store_true", help="branch-and-bound minimum cost")
    p.add_argument("--cost-budget", type=int)
    p.add_argument("--node-budget", type=int, default=200_000)
    p.add_argument("--out")
    p.set_defaults(handler=cmd_decompose)

    p = sub.add_parser("tree", help="coset decision trees")
    p.add_argument("action", choices=["compile", "eval", "prune", "dot"])
    p.add_argument("--decomp")
    p.add_argument("--tree")
    p.add_argument("--x", type=int)
    p.add_argument("--prune", action="store_true")
    p.add_argument("--out")
    p.set_defaults(handler=cmd_tree)

    def set_options(q, second=False):
        q.add_argument("--group", required=True)
        q.add_argument("--set", help="comma-separated elements of A")
        q.add_argument("--fn", help="use supp f_Z as A")
        q.add_argument("--epsilon", type=float, default=0.0)
        if second:
            q.add_argument("--set2", help="comma-separated elements of B (default A)")

    p = sub.add_parser("connect", help="(k,l)-arithmetic connectivity")
    set_options(p)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--l", type=int, default=1)
    p.add_argument("--mode", default="exhaustive", help="exhaustive or samples:N")
    p.set_defaults(handler=cmd_connect)

    p = sub.add_parser("energy", help="multiplicative energy E(A,B)")
    set_options(p, second=True)
    p.set_defaults(handler=cmd_energy)

    p = sub.add_parser("bsg", help="small-doubling subset from an energy lower bound")
    set_options(p, second=True)
    p.add_argument("--threshold", type=float, required=True, help="K in E(A,B) >= |A|^3/K")
    p.set_defaults(handler=cmd_bsg)

    p = sub.add_parser("cs-trial", help="Croot-Sisask sampling experiment on a translate family")
    p.add_argument("--group", default="Z64")
    p.add_argument("--fn")
    p.add_argument("--subgroup", default="4", help="generators of H; nu = m_H")
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--eps", type=float, default=0.5)
    p.add_argument("--r", type=int)
    p.add_argument("--trials", type=int, default=200)
    p.set_defaults(handler=cmd_cs_trial)

    p = sub.add_parser("verify", help="run property suites")
    p.add_argument("suite", help="all or one of: " + ", ".join(SUITES))
    p.set_defaults(handler=cmd_verify)

    p = sub.add_parser("ap-scan", help="norms of arithmetic progressions in Z/p (CSV)")
    p.add_argument("--p", type=int, default=2053)
    p.add_argument("--N", default="32,64,128,256,512")
    p.add_argument("--out")
    p.set_defaults(handler=None)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "ap-scan":
            text = ap_scan_csv(ap_scan(args.p, _parse_set(args.N)))
            _write(args.out, text)
            sys.stdout.write(text)
            return 0
        start = time.perf_counter()
        inputs, outputs = args.handler(args)
        report = {"schema": SCHEMA, "version": __version__, "command": args.command,
                  "inputs": inputs, "outputs": outputs}
        if args.timing:
            report["seconds"] = time.perf_counter() - start
        sys.stdout.write(json.dumps(_jsonable(report), sort_keys=True, indent=2) + "\n")
        if args.command == "verify" and not outputs["passed"]:
            return EXIT_VERIFY_FAILED
        return 0
    except CosetForgeError as exc:
        sys.stderr.write(json.dumps(_jsonable(exc.to_dict()), sort_keys=True) + "\n")
        return exc.exit_code
    except ValueError as exc:
        sys.stderr.write(json.dumps({"error": "InputError", "message": str(exc)}) + "\n")
        return InputError.exit_code


if __name__ == "__main__":
    sys.exit(main())
