"""Command-line front end: ``ksdminimax {estimate,oracle,rate-sweep,lecam,finite}``.

Results go to stdout or ``--output`` as JSON (single records) or CSV (tables).
Exit codes: 0 success, 2 usage error, 3 input error, 4 model error,
5 quadrature did not converge, 6 degenerate perturbation, 7 negative
perturbed probability, 8 file I/O error.
"""

import argparse
from dataclasses import asdict, dataclass, field
import csv
import io
import json
import math
import os
import sys
from typing import Optional

import numpy as np

from . import __version__, _accel
from .errors import InputError, KSDError
from .estimators import DEFAULT_REL_TOL, Method, SampleSet, ksd_nystrom, ksd_v_statistic_samples
from .finite import center_phi, load_model, lower_bound_demo
from .kernels import KernelSpec
from .minimax import adversarial_pair, kl_gaussians, kl_product, le_cam_bound, rate_fit, risk_sweep
from .oracle import (QuadratureConfig, as_covariance, ksd_gaussian_closed_form,
                     ksd_squared_gaussian_closed_form, ksd_squared_quadrature, minimax_separation)
from .stein import GaussianMeasure

SEED_ENV = "KSDMINIMAX_SEED"
EXIT_USAGE = 2
EXIT_IO = 8
COMMANDS = ("estimate", "oracle", "rate-sweep", "lecam", "finite")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: usage error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


@dataclass
class RunConfig:
    command: str
    params: dict = field(default_factory=dict)
    output: Optional[str] = None
    threads: int = 0


def _floats(text):
    try:
        return [float(t) for t in str(text).split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text):
    out = []
    for tok in str(text).split(","):
        tok = tok.strip()
        if not tok:
            continue
        if ":" in tok:
            # a:b means powers of two 2^a .. 2^b
            a, b = (int(x) for x in tok.split(":"))
            out.extend(2**k for k in range(a, b + 1))
        else:
            try:
                val = float(tok)
            except ValueError:
                val = math.nan
            if not val.is_integer():
                raise argparse.ArgumentTypeError(f"expected integers, got {tok!r}")
            out.append(int(val))
    return out


def _mean_vector(values, dim):
    """A single value means a shift of that size along the first axis."""
    values = list(values)
    if len(values) == dim:
        return np.asarray(values, dtype=float)
    if len(values) == 1:
        mu = np.zeros(dim)
        mu[0] = values[0]
        return mu
    raise InputError(f"mean needs 1 or {dim} components, got {len(values)}")


def _covariance(text, dim):
    if text is None or text.strip().lower() in {"identity", "i", "eye"}:
        return None
    vals = _floats(text)
    if len(vals) == dim * dim and dim > 1:
        return as_covariance(np.reshape(vals, (dim, dim)), dim)
    if len(vals) == 1:
        return as_covariance(vals[0], dim)
    return as_covariance(np.asarray(vals), dim)


def _read_samples(path):
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines:
        raise InputError(f"{path}: no observations")
    rows = list(csv.reader(lines))
    try:
        [float(v) for v in rows[0]]
    except ValueError:
        rows = rows[1:]  # header row
    try:
        data = np.array([[float(v) for v in r] for r in rows], dtype=float)
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from None
    if data.ndim != 2 or data.shape[0] == 0:
        raise InputError(f"{path}: rows must all have the same number of columns")
    return data


def _json(record):
    return json.dumps(record, sort_keys=True, indent=2) + "\n"


def _emit(text, output):
    if output in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(output, "w", newline="") as fh:
            fh.write(text)


def _seed(args):
    if args.seed is not None:
        return args.seed
    env = os.environ.get(SEED_ENV)
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise InputError(f"{SEED_ENV} must be an integer, got {env!r}") from None
    return 0


def build_parser():
    p = _Parser(prog="ksdminimax", description="Kernel Stein discrepancy estimation and minimax checks.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, seed=False):
        sp.add_argument("--output", "-o", help="write results here instead of stdout")
        sp.add_argument("--threads", type=int, default=0, help="cap numba worker threads (0 = auto)")
        if seed:
            sp.add_argument("--seed", type=int, default=None, help=f"base seed (default ${SEED_ENV} or 0)")

    sp = sub.add_parser("estimate", help="estimate KSD from a sample file")
    sp.add_argument("--input", "-i", required=True, help="CSV file, one observation per row")
    sp.add_argument("--method", default="v", help="v (V-statistic) or nystrom")
    sp.add_argument("--gamma", type=float, required=True)
    sp.add_argument("--target-mu", type=_floats, default=None, help="target mean (default 0)")
    sp.add_argument("--target-sigma", default=None, help="target covariance (default identity)")
    sp.add_argument("--landmarks", "-m", type=int, default=None, help="Nystrom landmarks (default ceil(sqrt(n)))")
    sp.add_argument("--rel-tol", type=float, default=DEFAULT_REL_TOL)
    common(sp, seed=True)

    sp = sub.add_parser("oracle", help="exact KSD between N(0, I) and N(mu, Sigma)")
    sp.add_argument("--gamma", type=float, required=True)
    sp.add_argument("--dim", type=int, required=True)
    sp.add_argument("--mu", type=_floats, default=[0.0])
    sp.add_argument("--sigma", default="identity", help="identity, scalar, diagonal list or row-major matrix")
    sp.add_argument("--quadrature", action="store_true", help="also report the cubature value (dim <= 3)")
    sp.add_argument("--abs-tol", type=float, default=QuadratureConfig().abs_tol)
    common(sp)

    sp = sub.add_parser("rate-sweep", help="Monte Carlo risk curve and log-log rate fit")
    sp.add_argument("--gamma", type=float, default=1.0)
    sp.add_argument("--dim", type=int, default=1)
    sp.add_argument("--mu", type=_floats, default=[0.5], help="mean of the sampling distribution")
    sp.add_argument("--sigma", default="identity")
    sp.add_argument("--n-grid", type=_ints, default=_ints("7:13"), help="sizes, or a:b for 2^a..2^b")
    sp.add_argument("--reps", type=int, default=200)
    sp.add_argument("--method", default="v")
    sp.add_argument("--landmarks", "-m", type=int, default=None, help="fixed m (default ceil(sqrt(n)))")
    sp.add_argument("--rel-tol", type=float, default=DEFAULT_REL_TOL)
    sp.add_argument("--jobs", type=int, default=1, help="parallel replications")
    sp.add_argument("--fit-output", help="also write {slope, intercept} JSON here")
    common(sp, seed=True)

    sp = sub.add_parser("lecam", help="two-point lower-bound quantities for the Gaussian pair")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--gamma", type=float, required=True)
    sp.add_argument("--dim", type=int, required=True)
    sp.add_argument("--axis", type=int, default=1)
    common(sp)

    sp = sub.add_parser("finite", help="finite-domain perturbation lower bound table")
    sp.add_argument("--model", required=True, help="JSON model document")
    sp.add_argument("--phi", type=_floats, default=None, help="raw perturbation (overrides the model's phi)")
    sp.add_argument("--n-grid", type=_ints, default=[1, 10, 100, 1000, 10000])
    common(sp)
    return p


def parse_config(argv=None) -> RunConfig:
    args = build_parser().parse_args(argv)
    params = {k: v for k, v in vars(args).items() if k not in {"command", "output", "threads"}}
    return RunConfig(args.command, params, args.output, args.threads)


def _run_estimate(p, seed):
    data = _read_samples(p["input"])
    samples = SampleSet(data, seed=None)
    d = samples.dim
    mu = np.zeros(d) if p["target_mu"] is None else _mean_vector(p["target_mu"], d)
    target = GaussianMeasure(mu, _covariance(p["target_sigma"], d))
    spec = KernelSpec(p["gamma"], d)
    method = Method.parse(p["method"])
    record = {"input": p["input"], "n": samples.n, "dim": d, "gamma": spec.gamma,
              "method": method.value, "target_mu": mu.tolist(),
              "target_sigma": p["target_sigma"] or "identity"}
    if method is Method.V_STATISTIC:
        res = ksd_v_statistic_samples(target, spec, samples)
    else:
        m = p["landmarks"] or int(math.ceil(math.sqrt(samples.n)))
        res = ksd_nystrom(target, spec, samples, m, np.random.default_rng(seed), p["rel_tol"])
        record.update(seed=seed, rel_tol=p["rel_tol"], landmarks=res.landmarks_used,
                      dropped_eigenvalues=res.dropped_eigenvalues)
    record.update(ksd=res.ksd, ksd_squared=res.ksd_squared)
    return _json(record)


def _run_oracle(p):
    d = p["dim"]
    mu = _mean_vector(p["mu"], d)
    cov = _covariance(p["sigma"], d)
    record = {"gamma": p["gamma"], "dim": d, "mu": mu.tolist(),
              "sigma": "identity" if cov is None else cov.tolist(),
              "ksd": ksd_gaussian_closed_form(p["gamma"], d, mu, cov),
              "ksd_squared": ksd_squared_gaussian_closed_form(p["gamma"], d, mu, cov)}
    if p["quadrature"]:
        q = ksd_squared_quadrature(p["gamma"], d, mu, cov, QuadratureConfig(abs_tol=p["abs_tol"]))
        record.update(quadrature_ksd_squared=q.value, quadrature_error_bound=q.error,
                      quadrature_ksd=math.sqrt(max(q.value, 0.0)), abs_tol=p["abs_tol"])
    return _json(record)


def _run_rate_sweep(p, seed):
    d = p["dim"]
    spec = KernelSpec(p["gamma"], d)
    p_true = GaussianMeasure(_mean_vector(p["mu"], d), _covariance(p["sigma"], d))
    kwargs = {}
    if p["landmarks"] is not None:
        kwargs["landmarks"] = p["landmarks"]
    curve = risk_sweep(GaussianMeasure.standard(d), spec, p_true, p["n_grid"], p["reps"], p["method"],
                       seed, rel_tol=p["rel_tol"], n_jobs=p["jobs"], **kwargs)
    if p["fit_output"]:
        slope, intercept = rate_fit(curve) if len(curve.rows) >= 2 else (float("nan"), float("nan"))
        _emit(_json({"slope": slope, "intercept": intercept, "true_ksd": curve.true_ksd,
                     "method": Method.parse(p["method"]).value, "seed": seed, "reps": p["reps"],
                     "n_grid": p["n_grid"], "gamma": spec.gamma, "dim": d,
                     "mu": p_true.mean.tolist(), "sigma": p["sigma"], "landmarks": p["landmarks"],
                     "rel_tol": p["rel_tol"], "spec_version": __version__}), p["fit_output"])
    return curve.to_csv()


def _run_lecam(p):
    n, gamma, d = p["n"], p["gamma"], p["dim"]
    pair = adversarial_pair(n, d, p["axis"])
    kl = kl_gaussians(pair.p1.mean, None, pair.p0.mean, None)
    n_kl = kl_product(n, kl)
    return _json({"n": n, "gamma": gamma, "dim": d, "axis": pair.axis, "rho": pair.rho,
                  "s_n": minimax_separation(n, gamma, d),
                  "ksd_pair": ksd_gaussian_closed_form(gamma, d, pair.p1.mean),
                  "n_times_kl": n_kl, "le_cam_prob": le_cam_bound(n_kl)})


def _run_finite(p):
    model, phi = load_model(p["model"])
    if p["phi"] is not None:
        phi = np.asarray(p["phi"], dtype=float)
    if phi is None:
        raise InputError("no perturbation: give phi in the model document or --phi")
    rows = lower_bound_demo(model, center_phi(phi, model.p0), p["n_grid"])
    buf = io.StringIO()
    fields = list(asdict(rows[0]).keys()) if rows else []
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(fields)
    for r in rows:
        w.writerow([repr(v) if isinstance(v, float) else v for v in asdict(r).values()])
    return buf.getvalue()


def run(config: RunConfig) -> int:
    """Execute one command; returns the process exit status."""
    try:
        _accel.set_threads(config.threads)
        p = config.params
        if config.command == "estimate":
            text = _run_estimate(p, _seed(argparse.Namespace(**p)))
        elif config.command == "oracle":
            text = _run_oracle(p)
        elif config.command == "rate-sweep":
            text = _run_rate_sweep(p, _seed(argparse.Namespace(**p)))
        elif config.command == "lecam":
            text = _run_lecam(p)
        elif config.command == "finite":
            text = _run_finite(p)
        else:
            raise InputError(f"unknown command {config.command!r}")
        if text.startswith("{"):
            rec = json.loads(text)
            rec["spec_version"] = __version__
            rec["backend"] = _accel.backend_name()
            text = _json(rec)
        _emit(text, config.output)
    except KSDError as exc:
        print(f"ksdminimax {config.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"ksdminimax {config.command}: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return 0


def main(argv=None):
    return run(parse_config(argv))


if __name__ == "__main__":
    sys.exit(main())
