"""Command-line front end.

Subcommands: ``exact``, ``curve``, ``sample``, ``spectrum``, ``hamiltonian``
and ``validate``.  Tables are CSV with 17 significant digits; reports are
JSON.  Exit codes: 0 success, 1 failed numerical validation, 2 usage error.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import stats

from . import asymptotics as asy
from . import closedform as cf
from . import ensembles as ens
from . import entropy as ent
from . import hamiltonians as ham
from . import spectral as spc
from . import validation
from .tables import write_csv

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

ENSEMBLES = ("page", "fixed-n", "weighted", "gaussian", "gaussian-fixed-n", "gaussian-weighted", "bosonic-fixed-n")
MODELS = ("free-fermion", "anderson", "syk2", "hcb", "block-gue", "full-gue")
EXPERIMENTS = ("gue-spacing", "goe-spacing", "direct-sum-gue", "porter-thomas")


class UsageError(ValueError):
    """Invalid or missing command-line parameters."""


def _need(args: argparse.Namespace, *names: str) -> None:
    missing = [f"--{n}" for n in names if getattr(args, n) is None]
    if missing:
        what = getattr(args, "ensemble", None) or getattr(args, "model", None) or args.command
        raise UsageError(f"{what} needs {' '.join(missing)}")


def _emit_text(text: str, path: Optional[str]) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _emit_json(obj: dict, path: Optional[str]) -> None:
    _emit_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", path)


def _weight(args: argparse.Namespace) -> float:
    """Weight parameter from ``--w`` or from the mean filling ``--nbar``."""
    if args.w is not None:
        return args.w
    if args.nbar is None:
        raise UsageError(f"{args.ensemble} needs --w or --nbar")
    if not 0 < args.nbar < 1:
        raise UsageError("--nbar must lie in (0, 1)")
    return math.log(1.0 / args.nbar - 1.0)


# ---------------------------------------------------------------------------
# exact
# ---------------------------------------------------------------------------


def cmd_exact(args: argparse.Namespace) -> int:
    e = args.ensemble
    if e == "page":
        if args.dA is None and args.V is not None and args.VA is not None:
            args.dA, args.dB = 2**args.VA, 2 ** (args.V - args.VA)
        _need(args, "dA", "dB")
        row = (args.dA, args.dB, cf.page_average(args.dA, args.dB), cf.page_variance(args.dA, args.dB))
        header = ["d_A", "d_B", "mean", "variance"]
    else:
        _need(args, "V", "VA")
        V, V_A = args.V, args.VA
        if e in ("weighted", "gaussian-weighted"):
            w = _weight(args)
            g = e == "gaussian-weighted"
            row = (V, V_A, w, cf.weighted_average(V, V_A, w, g), cf.weighted_variance(V, V_A, w, g))
            header = ["V", "V_A", "w", "mean", "variance"]
        elif e == "gaussian":
            row = (V, V_A, cf.gaussian_average(V, V_A), cf.gaussian_variance(V, V_A))
            header = ["V", "V_A", "mean", "variance"]
        else:
            _need(args, "N")
            N = args.N
            if e == "fixed-n":
                mean, var = cf.fixedN_average(V, V_A, N), cf.fixedN_variance(V, V_A, N)
            elif e == "gaussian-fixed-n":
                # only the large-V variance is available in closed form
                mean = cf.gaussian_fixedN_average(V, V_A, N)
                fA, nA, _ = cf.canonical_gaussian_fixedN(V, V_A, N)
                var = 0.0 if fA == 0 else cf.gaussian_fixedN_variance_asymptotic(fA / V, nA / V)
            else:
                mean, var = asy.bosonic_fixedN_exact(V, V_A, N), ""
            row = (V, V_A, N, mean, var)
            header = ["V", "V_A", "N", "mean", "variance"]
    _emit_text(write_csv(None, header, [row]), args.output)
    return EXIT_OK


# ---------------------------------------------------------------------------
# curve
# ---------------------------------------------------------------------------


def leading_coefficient(thermo: Callable[[float], float]) -> float:
    """Coefficient of ``V`` in an expansion ``a V + b sqrt(V) + c + d / V``.

    The four coefficients are solved from evaluations at ``V = 1, 4, 16, 64``,
    which is exact for every expansion in :mod:`asymptotics`.
    """
    Vs = np.array([1.0, 4.0, 16.0, 64.0])
    A = np.column_stack([Vs, np.sqrt(Vs), np.ones(4), 1.0 / Vs])
    return float(np.linalg.solve(A, [thermo(v) for v in Vs])[0])


def _curve_functions(args: argparse.Namespace):
    """``(exact(V_A), thermo(V, f))`` for the chosen ensemble."""
    e, V = args.ensemble, args.V
    if e == "page":
        return lambda a: cf.page_average(2**a, 2 ** (V - a)), lambda v, f: asy.page_thermo(v, f)[0]
    if e == "gaussian":
        return lambda a: cf.gaussian_average(V, a), asy.gaussian_thermo
    if e in ("weighted", "gaussian-weighted"):
        w = _weight(args)
        nbar = 1.0 / (1.0 + math.exp(w))
        g = e == "gaussian-weighted"
        thermo = asy.gaussian_weighted_thermo if g else asy.page_weighted_thermo
        return lambda a: cf.weighted_average(V, a, w, g), lambda v, f: thermo(v, f, nbar)
    _need(args, "N")
    N, n = args.N, args.N / V
    if e == "fixed-n":
        return lambda a: cf.fixedN_average(V, a, N), lambda v, f: asy.fixedN_thermo(v, f, n)
    if e == "gaussian-fixed-n":
        return lambda a: cf.gaussian_fixedN_average(V, a, N), lambda v, f: asy.gaussian_fixedN_thermo(v, f, n)
    return lambda a: asy.bosonic_fixedN_exact(V, a, N), lambda v, f: asy.bosonic_fixedN_thermo(v, f, n)


def cmd_curve(args: argparse.Namespace) -> int:
    _need(args, "V")
    if args.V < 2:
        raise UsageError("--V must be at least 2 for a curve")
    exact, thermo = _curve_functions(args)
    rows = []
    for a in range(1, args.V):
        f = a / args.V
        rows.append((f, a, exact(a), thermo(args.V, f), leading_coefficient(lambda v: thermo(v, f))))
    _emit_text(write_csv(None, ["f", "V_A", "value", "asymptotic_value", "leading_coefficient"], rows), args.output)
    return EXIT_OK


# ---------------------------------------------------------------------------
# sample
# ---------------------------------------------------------------------------


def _sampler(args: argparse.Namespace):
    """``(sampler, statistic, closed_form, params)`` for ``sample``."""
    e = args.ensemble
    _need(args, "V", "VA")
    V, V_A = args.V, args.VA
    params = {"V": V, "V_A": V_A}
    if e == "page":
        part = ent.PartitionSpec(V, V_A)
        return (
            lambda r: ens.sample_haar_state(V, r),
            lambda s: ent.vn_entropy(ent.rdm_spectrum_full(s, part)),
            cf.page_average(2**V_A, 2 ** (V - V_A)),
            params,
        )
    if e == "gaussian":
        return (
            lambda r: ens.sample_gaussian_subsystem(V, V_A, r),
            ent.gaussian_entropy_from_J,
            cf.gaussian_average(V, V_A),
            params,
        )
    if e in ("weighted", "gaussian-weighted"):
        w = _weight(args)
        params["w"] = w
        p = cf.binomial_weights(V, w)
        part = ent.PartitionSpec(V, V_A)
        g = e == "gaussian-weighted"

        def draw(r):
            N = int(r.choice(V + 1, p=p))
            return ens.sample_gaussian_fixedN(V, N, r) if g else ens.sample_sector_state(V, N, r)

        def stat(s):
            return s.entropy(V_A) if g else ent.vn_entropy(ent.rdm_spectrum_sector(s, part))

        return draw, stat, cf.weighted_average(V, V_A, w, g), params
    _need(args, "N")
    N = args.N
    params["N"] = N
    if e == "fixed-n":
        basis = ent.sector_basis(V, N)
        part = ent.PartitionSpec(V, V_A)
        return (
            lambda r: ens.sample_sector_state(V, N, r, basis),
            lambda s: ent.vn_entropy(ent.rdm_spectrum_sector(s, part)),
            cf.fixedN_average(V, V_A, N),
            params,
        )
    if e == "gaussian-fixed-n":
        return (
            lambda r: ens.sample_gaussian_fixedN_subsystem(V, N, V_A, r),
            ent.gaussian_entropy_from_C,
            cf.gaussian_fixedN_average(V, V_A, N),
            params,
        )
    basis = ens.bosonic_sector_basis(V, N)
    return (
        lambda r: ens.sample_bosonic_sector_state(V, N, r),
        lambda a: ent.vn_entropy(ens.bosonic_rdm_spectrum(a, basis, V_A)),
        asy.bosonic_fixedN_exact(V, V_A, N),
        params,
    )


def cmd_sample(args: argparse.Namespace) -> int:
    sampler, stat, exact, params = _sampler(args)
    est = ens.mc_estimate(sampler, stat, args.n, args.seed, args.workers)
    report = {
        "ensemble": args.ensemble,
        "params": params,
        "mean": est.mean,
        "stderr": est.stderr,
        "sample_variance": est.sample_variance,
        "n_samples": est.n_samples,
        "seed": args.seed,
        "closed_form": exact,
        "z_score": est.z_score(exact),
    }
    _emit_json(report, args.output)
    return EXIT_OK


# ---------------------------------------------------------------------------
# spectrum
# ---------------------------------------------------------------------------


def _ks_report(spacings: np.ndarray, beta: int) -> dict:
    wigner = {1: spc.WIGNER_GOE, 2: spc.WIGNER_GUE}[beta]
    ks_w, p_w = spc.spacing_ks(spacings, wigner)
    ks_p, p_p = spc.spacing_ks(spacings, spc.POISSON)
    key = "GOE" if beta == 1 else "GUE"
    return {
        "n_spacings": int(spacings.size),
        f"ks_{key}": ks_w,
        f"p_{key}": p_w,
        "ks_Poisson": ks_p,
        "p_Poisson": p_p,
    }


def cmd_spectrum(args: argparse.Namespace) -> int:
    rng = ens.SeededRng(args.seed).generator()
    x = args.experiment
    report: dict = {"experiment": x, "seed": args.seed}
    if x in ("gue-spacing", "goe-spacing"):
        kind = "GUE" if x == "gue-spacing" else "GOE"
        pooled = [
            spc.bulk_spacings(spc.unfold(spc.sample_gaussian_ensemble(kind, args.d, rng), args.degree), args.bulk)
            for _ in range(args.draws)
        ]
        samples = np.concatenate(pooled)
        report.update({"d": args.d, "draws": args.draws, "degree": args.degree, "bulk": args.bulk})
        report.update(_ks_report(samples, 2 if kind == "GUE" else 1))
        hist_range = (0.0, 4.0)
    elif x == "direct-sum-gue":
        samples = spc.direct_sum_gue_spacing(args.M, args.draws, rng, args.d)
        report.update({"M": args.M, "d": args.d, "draws": args.draws})
        report.update(_ks_report(samples, 2))
        hist_range = (0.0, 4.0)
    else:
        N = args.d
        _, vecs = np.linalg.eigh(spc.gue_matrix(N, rng))
        cols = np.linspace(0, N - 1, args.vectors).astype(int)
        samples = (np.abs(vecs[:, cols]) ** 2).ravel() * N
        edges = -np.log1p(-np.linspace(0, 1, args.bins + 1)[:-1])
        counts, _ = np.histogram(samples, bins=np.append(edges, np.inf))
        report.update(
            {"N": N, "vectors": int(cols.size), "chi2_p": float(stats.chisquare(counts).pvalue), "scaled_by_N": True}
        )
        hist_range = (0.0, 6.0)
    if args.output is not None:
        spc.write_histogram_csv(args.output, spc.histogram_table(samples, args.bins, hist_range))
    _emit_json(report, args.report)
    return EXIT_OK


# ---------------------------------------------------------------------------
# hamiltonian
# ---------------------------------------------------------------------------


def cmd_hamiltonian(args: argparse.Namespace) -> int:
    m = args.model
    seed = args.seed
    if m in ("anderson", "syk2", "block-gue", "full-gue") and seed is None:
        raise UsageError(f"{m} needs --seed")
    if m in ("free-fermion", "anderson", "syk2"):
        if m == "free-fermion":
            _need(args, "V")
            model = ham.build_free_fermion_1d(args.V)
        elif m == "anderson":
            _need(args, "L")
            model = ham.build_anderson_3d(args.L, args.W, seed, periodic=not args.open)
        else:
            _need(args, "V")
            model = ham.build_syk2_dirac(args.V, seed)
        V = model.V
        V_A = V // 2 if args.VA is None else args.VA
        mode = args.mode
        if mode != "all_states" and seed is None:
            raise UsageError(f"mode {mode} needs --seed")
        est = ham.quadratic_eigenstate_average(model, V_A, mode, n=args.n, seed=seed, N=args.N, n_workers=args.workers)
        N_col = "" if args.N is None else args.N
    else:
        _need(args, "V")
        V = args.V
        if m == "hcb":
            N = V // 2 if args.N is None else args.N
            model = ham.build_hcb_chain(V, N, args.t1, args.t2, args.V1, args.V2)
        elif m == "block-gue":
            N = V // 2 if args.N is None else args.N
            model = ham.build_block_gue(V, N, seed)
        else:
            N = None
            model = ham.build_full_gue(V, seed)
        V_A = V // 2 if args.VA is None else args.VA
        est = ham.interacting_eigenstate_average(model, V_A, args.window)
        mode, N_col = f"central_{args.window:g}", "" if N is None else N
    header = ["model", "V", "V_A", "N", "mode", "mean", "stderr", "n_states"]
    row = (m, V, V_A, N_col, mode, est.mean, est.stderr, est.n_samples)
    _emit_text(write_csv(None, header, [row]), args.output)
    return EXIT_OK


# ---------------------------------------------------------------------------
# validate
# ---------------------------------------------------------------------------


def cmd_validate(args: argparse.Namespace) -> int:
    results = validation.run_suite(args.suite, args.seed)
    for r in results:
        print(r.line(), file=sys.stderr)
    failed = [r.id for r in results if r.status == "fail"]
    report = {
        "suite": args.suite,
        "seed": args.seed,
        "all_passed": not failed,
        "failed": failed,
        "criteria": [r.to_dict() for r in results],
    }
    _emit_json(report, args.output)
    return EXIT_FAIL if failed else EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="entanglement-ensembles", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def state_args(q: argparse.ArgumentParser) -> None:
        q.add_argument("--ensemble", required=True, choices=ENSEMBLES)
        q.add_argument("--V", type=int)
        q.add_argument("--VA", type=int)
        q.add_argument("--N", type=int)
        q.add_argument("--w", type=float, help="weight parameter of P_N ~ exp(-w N)")
        q.add_argument("--nbar", type=float, help="mean filling, alternative to --w")
        q.add_argument("--output", "-o", help="output file (default stdout)")

    q = sub.add_parser("exact", help="closed-form mean and variance")
    state_args(q)
    q.add_argument("--dA", type=int)
    q.add_argument("--dB", type=int)
    q.add_argument("--seed", type=int, help="accepted and ignored")
    q.set_defaults(func=cmd_exact)

    q = sub.add_parser("curve", help="exact and asymptotic curves over V_A = 1..V-1")
    state_args(q)
    q.set_defaults(func=cmd_curve)

    q = sub.add_parser("sample", help="Monte Carlo estimate against the closed form")
    state_args(q)
    q.add_argument("--n", type=int, default=1000, help="number of samples")
    q.add_argument("--seed", type=int, required=True)
    q.add_argument("--workers", type=int)
    q.set_defaults(func=cmd_sample)

    q = sub.add_parser("spectrum", help="level-spacing and eigenvector statistics")
    q.add_argument("--experiment", required=True, choices=EXPERIMENTS)
    q.add_argument("--seed", type=int, required=True)
    q.add_argument("--d", type=int, default=None, help="matrix size (default 400, 100 for direct-sum, 256 for Porter-Thomas)")
    q.add_argument("--M", type=int, default=1, help="number of direct-sum blocks")
    q.add_argument("--draws", type=int, default=100)
    q.add_argument("--degree", type=int, default=7, help="unfolding polynomial degree")
    q.add_argument("--bulk", type=float, default=0.8)
    q.add_argument("--bins", type=int, default=20)
    q.add_argument("--vectors", type=int, default=20, help="eigenvectors used for Porter-Thomas")
    q.add_argument("--output", "-o", help="histogram CSV path")
    q.add_argument("--report", help="JSON report path (default stdout)")
    q.set_defaults(func=cmd_spectrum)

    q = sub.add_parser("hamiltonian", help="eigenstate entanglement of lattice models")
    q.add_argument("--model", required=True, choices=MODELS)
    q.add_argument("--V", type=int)
    q.add_argument("--L", type=int)
    q.add_argument("--W", type=float, default=1.0)
    q.add_argument("--open", action="store_true", help="open boundaries for the Anderson model")
    q.add_argument("--N", type=int)
    q.add_argument("--VA", type=int)
    q.add_argument("--t1", type=float, default=1.0)
    q.add_argument("--t2", type=float, default=0.0)
    q.add_argument("--V1", type=float, default=0.0)
    q.add_argument("--V2", type=float, default=0.0)
    q.add_argument(
        "--mode", default="sampled", choices=("all_states", "sampled", "stratified", "fixed_N_sampled")
    )
    q.add_argument("--n", type=int, default=1000)
    q.add_argument("--window", type=float, default=0.2, help="central fraction of eigenstates")
    q.add_argument("--seed", type=int)
    q.add_argument("--workers", type=int)
    q.add_argument("--output", "-o")
    q.set_defaults(func=cmd_hamiltonian)

    q = sub.add_parser("validate", help="run the acceptance criteria")
    q.add_argument("--suite", choices=("quick", "full"), default="quick")
    q.add_argument("--seed", type=int, default=20240601)
    q.add_argument("--output", "-o", help="JSON report path (default stdout)")
    q.set_defaults(func=cmd_validate)
    return p


_DEFAULT_D = {"gue-spacing": 400, "goe-spacing": 400, "direct-sum-gue": 100, "porter-thomas": 256}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # --help exits 0; malformed arguments exit 2
        return int(exc.code or 0)
    if args.command == "spectrum" and args.d is None:
        args.d = _DEFAULT_D[args.experiment]
    try:
        return args.func(args)
    except ValueError as exc:
        # module preconditions and missing parameters are usage errors
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
