"""Batch command-line front end; every command prints one JSON RunReport."""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time

import numpy as np

from . import acceptance
from . import correspondence as corr
from . import duality as dual
from . import metaplectic as meta
from .errors import NcThetaError
from .nc_algebra import NcElement, ThetaMatrix, coefficient_distance, multiply
from .sampling import random_antisymmetric, random_nc_element, random_vector
from .schwartz_module import PolyGaussianVector, curvature_residual, holomorphic_residual, theta_vector
from .symplectic import SymplecticIntMatrix, is_in_gamma12
from .theta_classical import check_periodicity, check_quasi_periodicity, modular_ratio, theta


class UsageError(Exception):
    pass


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def _json_arg(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"malformed JSON: {exc}") from None


def _matrix(text: str, dtype=float) -> np.ndarray:
    """Square matrix from JSON or a whitespace/comma separated row-major list."""
    text = text.strip()
    if text.startswith("["):
        arr = np.array(_json_arg(text), dtype=dtype)
    else:
        try:
            arr = np.array([dtype(t) for t in text.replace(",", " ").split()])
        except ValueError:
            raise UsageError(f"cannot parse matrix {text!r}") from None
    if arr.ndim == 1:
        n = int(round(np.sqrt(arr.size)))
        if n * n != arr.size:
            raise UsageError(f"{arr.size} entries do not form a square matrix")
        arr = arr.reshape(n, n)
    return arr


def _omega(args) -> np.ndarray:
    g = args.g
    im = np.array(args.omega_im, dtype=float)
    re = np.zeros(g * g) if args.omega_re is None else np.array(args.omega_re, dtype=float)
    if im.size == 1 and g > 1:
        im = (np.eye(g) * im[0]).ravel()
    if im.size != g * g or re.size != g * g:
        raise UsageError(f"omega needs {g * g} entries per part")
    return re.reshape(g, g) + 1j * im.reshape(g, g)


def _complex_vector(values, g: int, name: str) -> np.ndarray:
    vals = np.array(values if values is not None else [0.0] * (2 * g), dtype=float)
    if vals.size != 2 * g:
        raise UsageError(f"--{name} takes {g} (re, im) pairs")
    return vals[0::2] + 1j * vals[1::2]


def _report(command: str, inputs, results, residuals, passed=None) -> dict:
    res = [{"name": n, "value": float(v), "tol": t, "pass": bool(v <= t)} for n, v, t in residuals]
    if passed is None:
        passed = all(r["pass"] for r in res)
    return {
        "command": command,
        "inputs": _jsonable(inputs),
        "results": _jsonable(results),
        "residuals": res,
        "pass": bool(passed),
    }


# ---------------------------------------------------------------------------
# commands


def cmd_theta_eval(args):
    om = _omega(args)
    z = _complex_vector(args.z, args.g, "z")
    r = theta(z, om, args.tol)
    return _report(
        "theta eval",
        {"g": args.g, "z": z, "omega": om, "tol": args.tol},
        r.to_json(),
        [("tail_bound", r.tail_bound, args.tol)],
    )


def cmd_theta_quasi(args):
    om = _omega(args)
    z = _complex_vector(args.z, args.g, "z")
    m = np.array(args.m, dtype=np.int64)
    if m.size != args.g:
        raise UsageError(f"--m needs {args.g} integers")
    per = check_periodicity(z, om, m)
    quasi = check_quasi_periodicity(z, om, m)
    return _report(
        "theta check-quasi",
        {"g": args.g, "z": z, "omega": om, "m": m},
        {"periodicity": per, "quasi_periodicity": quasi},
        [("periodicity", per, args.max_residual), ("quasi_periodicity", quasi, args.max_residual)],
    )


def cmd_theta_modular(args):
    gamma = _matrix(args.gamma, int)
    g = gamma.shape[0] // 2
    args.g = g
    om = _omega(args)
    z = _complex_vector(args.z, g, "z")
    rng = np.random.default_rng(args.seed)
    samples = [np.zeros(g)] + [rng.uniform(-0.4, 0.4, g) for _ in range(args.samples - 1)]
    zeta, spread = modular_ratio(gamma, z, om, samples)
    return _report(
        "theta check-modular",
        {"gamma": gamma, "omega": om, "z": z, "samples": len(samples), "seed": args.seed},
        {"zeta": zeta, "zeta_power_8": zeta**8},
        [("constancy", spread, 1e-8), ("eighth_root", abs(zeta**8 - 1), 1e-8)],
    )


def cmd_nct_mul(args):
    theta_m = ThetaMatrix(_matrix(args.theta))
    f = NcElement.from_json(_json_arg(args.f))
    h = NcElement.from_json(_json_arg(args.h))
    prod = multiply(f, h, theta_m)
    return _report("nct mul", {"theta": theta_m.theta, "f": f.to_json(), "h": h.to_json()}, prod.to_json(), [])


def cmd_nct_assoc(args):
    rng = np.random.default_rng(args.seed)
    worst = 0.0
    for _ in range(args.trials):
        theta_m = ThetaMatrix(random_antisymmetric(rng, args.d))
        f, g, h = (random_nc_element(rng, args.d, args.support) for _ in range(3))
        lhs = multiply(multiply(f, g, theta_m), h, theta_m)
        rhs = multiply(f, multiply(g, h, theta_m), theta_m)
        worst = max(worst, coefficient_distance(lhs, rhs))
    return _report(
        "nct check-assoc",
        {"d": args.d, "trials": args.trials, "support": args.support, "seed": args.seed},
        {"max_error": worst},
        [("associativity", worst, 1e-12)],
    )


def _vector_or_theta(args, om):
    if args.vector:
        return PolyGaussianVector.from_json(_json_arg(args.vector))
    return theta_vector(om)


def cmd_module_theta_vector(args):
    om = _omega(args)
    v = theta_vector(om)
    holo = holomorphic_residual(om, v)
    return _report("module theta-vector", {"omega": om}, v.to_json(), [("holomorphic_residual", holo, 1e-12)])


def cmd_module_holo(args):
    om = _omega(args)
    v = _vector_or_theta(args, om)
    holo = holomorphic_residual(om, v)
    return _report(
        "module holo-residual",
        {"omega": om, "vector": v.to_json()},
        {"residual": holo, "holomorphic": holo <= 1e-12},
        [],
        passed=True,
    )


def cmd_module_curvature(args):
    theta_m = _matrix(args.theta)
    g = theta_m.shape[0] // 2
    if args.vector:
        vectors = [PolyGaussianVector.from_json(_json_arg(args.vector))]
    else:
        rng = np.random.default_rng(args.seed)
        vectors = [random_vector(rng, g) for _ in range(args.trials)]
    worst = max(curvature_residual(theta_m, v) for v in vectors)
    return _report(
        "module curvature",
        {"theta": theta_m, "vectors": len(vectors), "seed": args.seed},
        {"max_residual": worst},
        [("curvature", worst, 1e-11)],
    )


def cmd_corr_check(args):
    om = _omega(args)
    grid = corr.uniform_grid(args.g, args.grid_n)
    records = corr.correspondence_records(om, grid, args.tol)
    worst = max(r["residual"] for r in records)
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["rho", "sigma", "lhs_re", "lhs_im", "rhs_re", "rhs_im", "residual"])
            for r in records:
                writer.writerow(
                    [" ".join(map(repr, r["rho"])), " ".join(map(repr, r["sigma"]))]
                    + r["lhs"]
                    + r["rhs"]
                    + [r["residual"]]
                )
    tol = 1e-9 if args.g == 1 else 1e-8
    return _report(
        "corr check",
        {"omega": om, "grid_n": args.grid_n, "tol": args.tol},
        {"records": records, "max_residual": worst},
        [("correspondence", worst, tol)],
    )


def cmd_corr_roundtrip(args):
    om = _omega(args)
    v = theta_vector(om)
    xs = np.array(args.x, dtype=float).reshape(-1, args.g)
    rows = []
    worst = 0.0
    for x in xs:
        rec = corr.reconstruct(v, x, args.grid_n)
        direct = v.evaluate(x[None, :])[0]
        err = abs(rec - direct)
        worst = max(worst, err)
        rows.append({"x": x, "reconstructed": rec, "direct": direct, "error": err})
    return _report(
        "corr roundtrip",
        {"omega": om, "grid_n": args.grid_n},
        {"points": rows},
        [("roundtrip", worst, 1e-8)],
    )


def _meta_word(text: str):
    data = _json_arg(text)
    if not isinstance(data, list):
        raise UsageError("--word must be a JSON list of generators")
    return [meta.MetaplecticGenerator.from_json(d) for d in data]


def cmd_meta_covariance(args):
    om = _omega(args)
    word = _meta_word(args.word)
    r = meta.check_theta_covariance(word, om)
    return _report(
        "meta covariance",
        {"word": [w.to_json() for w in word], "omega": om},
        {"gamma": meta.word_gamma(word, args.g).entries},
        [("ray_residual", r, 1e-9)],
    )


def cmd_meta_c_alpha(args):
    gamma = SymplecticIntMatrix(_matrix(args.gamma, int))
    g = gamma.g
    theta_m = ThetaMatrix.standard(g) if args.theta is None else ThetaMatrix(_matrix(args.theta))
    phases = meta.c_alpha(gamma, theta_m)
    all_one = all(p == 1 for p in phases)
    member = is_in_gamma12(gamma)
    return _report(
        "meta c-alpha",
        {"gamma": gamma.entries, "theta": theta_m.theta},
        {
            "c_alpha": phases,
            "all_phases_one": all_one,
            "is_in_gamma12": member,
            "criterion_consistent": all_one == member,
        },
        [],
        passed=(all_one == member) if args.theta is None else True,
    )


def cmd_meta_scan(args):
    report = meta.gamma12_criterion_scan(args.g, args.max_len)
    return _report(
        "meta scan",
        {"g": args.g, "max_len": args.max_len},
        report,
        [("counterexamples", len(report["counterexamples"]), 0)],
    )


def _dual_word(text: str, d: int | None):
    data = _json_arg(text)
    if isinstance(data, dict):
        data = [data]
    return [dual.generator_from_json(x, d) for x in data]


def cmd_dual_transform(args):
    word = _dual_word(args.word, args.d)
    theta_m = ThetaMatrix(_matrix(args.theta))
    g = dual.word_product(word, theta_m.d)
    hat = dual.fractional_transform(g, theta_m)
    return _report(
        "dual transform",
        {"word": _json_arg(args.word), "theta": theta_m.theta},
        {"g": g.entries, "theta_hat": hat.theta},
        [("antisymmetry", float(np.max(np.abs(hat.theta + hat.theta.T))), 1e-10)],
    )


def cmd_dual_dim(args):
    word = _dual_word(args.word, args.d)
    n = dual.theta_vector_dimension(word, args.d)
    mu = dual.spinor_word(word, dual.GrassmannElement.scalar(word[0].d if word else args.d))
    return _report(
        "dual dim",
        {"word": _json_arg(args.word)},
        {"N": n, "mu": mu.to_json(), "dimension_claim": "unverified"},
        [],
        passed=True,
    )


def cmd_verify_all(args):
    results = acceptance.run_all(quick=args.quick, seed=args.seed)
    for r in results:
        print(r.line(), file=sys.stderr)
    residuals = []
    for r in results:
        for x in r.residuals:
            residuals.append(
                {"name": f"c{r.number}.{x.name}", "value": x.value, "tol": x.tol, "pass": x.ok}
            )
    return {
        "command": "verify all",
        "inputs": {"quick": args.quick, "seed": args.seed},
        "results": _jsonable([r.to_json() for r in results]),
        "residuals": residuals,
        "pass": all(r.passed for r in results),
    }


# ---------------------------------------------------------------------------
# parser


def _add_omega(p, need_g=True):
    if need_g:
        p.add_argument("--g", type=int, default=1)
    p.add_argument("--omega-re", type=float, nargs="+", default=None)
    p.add_argument("--omega-im", type=float, nargs="+", default=[1.0])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nctheta", description=__doc__)
    parser.add_argument("--seed", type=int, default=0)
    top = parser.add_subparsers(dest="group", required=True)

    def group(name):
        sub = top.add_parser(name).add_subparsers(dest="action", required=True)
        return sub

    th = group("theta")
    p = th.add_parser("eval")
    _add_omega(p)
    p.add_argument("--z", type=float, nargs="+")
    p.add_argument("--tol", type=float, default=1e-12)
    p.set_defaults(func=cmd_theta_eval)
    p = th.add_parser("check-quasi")
    _add_omega(p)
    p.add_argument("--z", type=float, nargs="+")
    p.add_argument("--m", type=int, nargs="+", required=True)
    p.add_argument("--max-residual", type=float, default=1e-10)
    p.set_defaults(func=cmd_theta_quasi)
    p = th.add_parser("check-modular")
    p.add_argument("--gamma", required=True)
    _add_omega(p, need_g=False)
    p.add_argument("--z", type=float, nargs="+")
    p.add_argument("--samples", type=int, default=5)
    p.set_defaults(func=cmd_theta_modular)

    nct = group("nct")
    p = nct.add_parser("mul")
    p.add_argument("--theta", required=True)
    p.add_argument("--f", required=True)
    p.add_argument("--h", required=True)
    p.set_defaults(func=cmd_nct_mul)
    p = nct.add_parser("check-assoc")
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--support", type=int, default=10)
    p.set_defaults(func=cmd_nct_assoc)

    mod = group("module")
    p = mod.add_parser("theta-vector")
    _add_omega(p)
    p.set_defaults(func=cmd_module_theta_vector)
    p = mod.add_parser("holo-residual")
    _add_omega(p)
    p.add_argument("--vector", help="PolyGaussianVector JSON; defaults to the theta-vector")
    p.set_defaults(func=cmd_module_holo)
    p = mod.add_parser("curvature")
    p.add_argument("--theta", required=True)
    p.add_argument("--vector")
    p.add_argument("--trials", type=int, default=5)
    p.set_defaults(func=cmd_module_curvature)

    cr = group("corr")
    p = cr.add_parser("check")
    _add_omega(p)
    p.add_argument("--grid-n", type=int, default=8)
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--csv")
    p.set_defaults(func=cmd_corr_check)
    p = cr.add_parser("roundtrip")
    _add_omega(p)
    p.add_argument("--x", type=float, nargs="+", default=[0.3])
    p.add_argument("--grid-n", type=int, default=16)
    p.set_defaults(func=cmd_corr_roundtrip)

    me = group("meta")
    p = me.add_parser("covariance")
    _add_omega(p)
    p.add_argument("--word", required=True, help='e.g. [{"kind":"shear","B":[[2]]},{"kind":"fourier"}]')
    p.set_defaults(func=cmd_meta_covariance)
    p = me.add_parser("c-alpha")
    p.add_argument("--gamma", required=True)
    p.add_argument("--theta")
    p.set_defaults(func=cmd_meta_c_alpha)
    p = me.add_parser("scan")
    p.add_argument("--g", type=int, default=1)
    p.add_argument("--max-len", type=int, default=4)
    p.set_defaults(func=cmd_meta_scan)

    du = group("dual")
    p = du.add_parser("transform")
    p.add_argument("--word", required=True)
    p.add_argument("--theta", required=True)
    p.add_argument("--d", type=int)
    p.set_defaults(func=cmd_dual_transform)
    p = du.add_parser("dim")
    p.add_argument("--word", required=True, help='e.g. [{"kind":"shear","N":[[0,1],[-1,0]]}]')
    p.add_argument("--d", type=int)
    p.set_defaults(func=cmd_dual_dim)

    ver = group("verify")
    p = ver.add_parser("all")
    p.add_argument("--quick", action="store_true")
    p.set_defaults(func=cmd_verify_all)
    return parser


def run(argv=None) -> tuple[int, dict]:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0), {}
    command = f"{args.group} {args.action}"
    start = time.perf_counter()
    try:
        report = args.func(args)
        code = 0 if report["pass"] else 1
    except UsageError as exc:
        print(f"nctheta: error: {exc}", file=sys.stderr)
        return 2, {}
    except (NcThetaError, np.linalg.LinAlgError, KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, (KeyError, TypeError)) or (
            isinstance(exc, ValueError) and not isinstance(exc, NcThetaError)
        ):
            print(f"nctheta: error: bad input: {exc}", file=sys.stderr)
            return 2, {}
        report = {
            "command": command,
            "inputs": {},
            "results": {"error": {"type": type(exc).__name__, "message": str(exc)}},
            "residuals": [],
            "pass": False,
        }
        code = 1
    report["elapsed_ms"] = int(round((time.perf_counter() - start) * 1000))
    return code, report


def main(argv=None) -> int:
    code, report = run(argv)
    if report:
        print(json.dumps(report, indent=2))
    return code


if __name__ == "__main__":
    sys.exit(main())
