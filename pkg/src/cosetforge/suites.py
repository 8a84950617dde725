"""Batch property checks and the arithmetic-progression norm scan.

Each suite returns a list of :class:`PropertyResult`; a suite passes when
every property does.  All randomness flows from one master seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .addcomb import (croot_sisask_trial, default_sample_size, ruzsa_cover, surjection_check,
                      translate_family)
from .errors import InputError, NotPrime, SuiteUnknown
from .functions import GroupFunction, convolve_mean, translate, uniform_measure
from .groups import (enumerate_subgroups, generated_subgroup, group_by_name, left_cosets,
                     make_cyclic, make_symmetric)
from .spectral import algebra_norm, fourier_l1_array, linf_norm, split

BUILTIN_GROUPS = ("Z12", "Z2xZ4", "D6", "S3", "Z2^3")
SUITES = ("split", "banach", "coset-norm", "cover", "cs", "ct")


@dataclass
class PropertyResult:
    name: str
    passed: bool
    checked: int
    worst: float | None = None
    counterexample: dict | None = None
    notes: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {"name": self.name, "passed": self.passed, "checked": self.checked}
        if self.worst is not None:
            out["worst"] = self.worst
        if self.counterexample is not None:
            out["counterexample"] = self.counterexample
        if self.notes:
            out["notes"] = self.notes
        return out


def _rng(seed: int, *salt: int) -> np.random.Generator:
    return np.random.default_rng([seed, *salt])


def suite_coset_norm(seed: int = 0, tol: float = 1e-9) -> list[PropertyResult]:
    out = []
    for name in BUILTIN_GROUPS:
        G = group_by_name(name)
        worst, bad, count = 0.0, None, 0
        for H in enumerate_subgroups(G):
            for W in left_cosets(G, H):
                err = abs(algebra_norm(GroupFunction.indicator(G, W.members).to_float()) - 1)
                count += 1
                if err > worst:
                    worst = err
                    if err > tol:
                        bad = {"subgroup": list(H.elements), "rep": W.representative, "error": err}
        out.append(PropertyResult(f"coset-norm[{name}]", bad is None, count, worst, bad))
    return out


def suite_split(seed: int = 0, groups=BUILTIN_GROUPS, trials: int = 20,
                tol: float = 1e-8) -> list[PropertyResult]:
    out = []
    for gi, name in enumerate(groups):
        G = group_by_name(name)
        rng = _rng(seed, 1, gi)
        worst, bad, count = 0.0, None, 0
        worst_normal = 0.0
        for H in enumerate_subgroups(G):
            for _ in range(trials):
                res = split(GroupFunction.random(G, rng), H, certify=False)
                err = res.additivity_error
                count += 1
                if H.is_normal:
                    worst_normal = max(worst_normal, err)
                if err > worst:
                    worst = err
                    if err > tol:
                        bad = {"subgroup": list(H.elements), "normal": H.is_normal, "error": err}
        out.append(PropertyResult(f"split[{name}]", bad is None, count, worst, bad,
                                  {"worst_over_normal_subgroups": worst_normal}))
    return out


def suite_banach(seed: int = 0, pairs: int = 100, tol: float = 1e-8) -> list[PropertyResult]:
    out = []
    for gi, name in enumerate(BUILTIN_GROUPS):
        G = group_by_name(name)
        rng = _rng(seed, 2, gi)
        worst = {"submultiplicative": 0.0, "domination": 0.0, "triangle": 0.0,
                 "homogeneity": 0.0, "translation": 0.0}
        bad = {}
        for _ in range(pairs):
            f, g = GroupFunction.random(G, rng), GroupFunction.random(G, rng)
            nf, ng = algebra_norm(f), algebra_norm(g)
            c = complex(rng.standard_normal(), rng.standard_normal())
            y = int(rng.integers(G.order))
            gaps = {
                "submultiplicative": algebra_norm(convolve_mean(f, g)) - nf * ng,
                "domination": linf_norm(f) - nf,
                "triangle": algebra_norm(f + g) - nf - ng,
                "homogeneity": abs(algebra_norm(f * c) - abs(c) * nf),
                "translation": abs(algebra_norm(translate(f, y)) - nf),
            }
            for key, gap in gaps.items():
                if gap > worst[key]:
                    worst[key] = gap
                    if gap > tol:
                        bad.setdefault(key, {"gap": gap})
        for key, w in worst.items():
            out.append(PropertyResult(f"{key}[{name}]", key not in bad, pairs, w, bad.get(key)))
    return out


def suite_cover(seed: int = 0, pairs: int = 50) -> list[PropertyResult]:
    out = []
    for gi, G in enumerate((make_cyclic(64), make_symmetric(4))):
        rng = _rng(seed, 3, gi)
        bad, count = None, 0
        for _ in range(pairs):
            X = rng.choice(G.order, size=int(rng.integers(1, G.order + 1)), replace=False)
            W = rng.choice(G.order, size=int(rng.integers(1, G.order // 2 + 1)), replace=False)
            res = ruzsa_cover(G, X, W)
            count += 1
            if not res.ok and bad is None:
                bad = {"X": sorted(map(int, X)), "W": sorted(map(int, W)), "T": list(res.T),
                       "bound": float(res.bound), "covered": res.covered}
        out.append(PropertyResult(f"ruzsa-cover[{G.name}]", bad is None, count, None, bad))
    return out


def croot_sisask_experiment(seed: int = 0, trials: int = 200, p: float = 2.0,
                            eps: float = 0.5, subgroup_gen: int = 4) -> dict:
    """Translates of a random real ``f`` on Z/64 integrated against ``m_H``."""
    G = make_cyclic(64)
    rng = _rng(seed, 4)
    f = GroupFunction.random(G, rng, complex_valued=False)
    H = generated_subgroup(G, [subgroup_gen])
    res = croot_sisask_trial(uniform_measure(G, H.elements), translate_family(f), p, eps,
                             default_sample_size(p, eps), trials, rng)
    return {"subgroup_order": H.order, **res.to_dict()}


def suite_cs(seed: int = 0, threshold: float = 0.35) -> list[PropertyResult]:
    exp = croot_sisask_experiment(seed)
    out = [PropertyResult("croot-sisask-rate", exp["success_rate"] >= threshold, exp["trials"],
                          exp["success_rate"], None if exp["success_rate"] >= threshold else exp,
                          {"r_used": exp["r_used"]})]
    # monotone in r on a fixed instance, allowing 5% Monte Carlo noise
    G = make_cyclic(64)
    f = GroupFunction.random(G, _rng(seed, 5), complex_valued=False)
    H = generated_subgroup(G, [4])
    rates = [croot_sisask_trial(uniform_measure(G, H.elements), translate_family(f), 2.0, 0.2,
                                r, 300, _rng(seed, 6, r)).success_rate for r in (4, 16, 64)]
    mono = all(b >= a - 0.05 for a, b in zip(rates, rates[1:]))
    out.append(PropertyResult("croot-sisask-monotone", mono, 3, None,
                              None if mono else {"rates": rates}, {"rates": rates}))
    return out


def suite_ct(seed: int = 0, kmax: int = 4, rmax: int = 3) -> list[PropertyResult]:
    rows = [surjection_check(k, r) for k in range(1, kmax + 1) for r in range(1, rmax + 1)]
    bad = [row for row in rows if not (row["partition_ok"] and row["inequality_ok"])]
    return [PropertyResult("trivial-index-surjection", not bad, len(rows), None,
                           bad[0] if bad else None)]


_SUITES = {"split": suite_split, "banach": suite_banach, "coset-norm": suite_coset_norm,
           "cover": suite_cover, "cs": suite_cs, "ct": suite_ct}


def run_suite(name: str, seed: int = 0) -> list[PropertyResult]:
    if name == "all":
        return [res for key in SUITES for res in _SUITES[key](seed)]
    if name not in _SUITES:
        raise SuiteUnknown(f"unknown suite {name!r}; choose from all, {', '.join(SUITES)}",
                           suite=name)
    return _SUITES[name](seed)


# ---------------------------------------------------------------------------
# arithmetic progressions

def is_prime(p: int) -> bool:
    if p < 2:
        return False
    return all(p % q for q in range(2, math.isqrt(p) + 1))


def ap_norm(p: int, N: int) -> float:
    """``||1_{{0..N-1}}||_A`` on Z/p via the DFT oracle."""
    vals = np.zeros(p)
    vals[:N] = 1.0
    return fourier_l1_array(vals, (p,))


def ap_scan(p: int, Ns) -> dict:
    """Norms of initial segments of Z/p and the least-squares slope against ``ln N``."""
    if not is_prime(p):
        raise NotPrime(f"{p} is not prime", p=p)
    Ns = sorted(int(N) for N in Ns)
    bad = [N for N in Ns if not 1 <= N < p / 2]
    if bad:
        raise InputError(f"N must satisfy 1 <= N < p/2; got {bad}", p=p, rejected=bad)
    rows = [(N, ap_norm(p, N), math.log(N)) for N in Ns]
    slope = intercept = None
    if len(rows) >= 2:
        slope, intercept = np.polyfit([r[2] for r in rows], [r[1] for r in rows], 1)
        slope, intercept = float(slope), float(intercept)
    return {"p": p, "rows": rows, "slope": slope, "intercept": intercept,
            "reference_slope": 4 / math.pi ** 2}


def ap_scan_csv(scan: dict) -> str:
    lines = ["N,algebra_norm,ln_N"]
    lines += [f"{N},{norm:.12g},{lnN:.12g}" for N, norm, lnN in scan["rows"]]
    if scan["slope"] is not None:
        lines.append(f"# slope={scan['slope']:.6f} intercept={scan['intercept']:.6f} "
                     f"reference={scan['reference_slope']:.6f}")
    return "\n".join(lines) + "\n"
