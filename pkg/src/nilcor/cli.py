"""Batch front end.

Loads a JSON experiment config, dispatches to the library, and emits CSV
and JSON artifacts plus a one-page summary.  Output is deterministic:
identical configs produce byte-identical numeric CSVs (floats are written
with shortest round-trip repr, sums are exactly rounded, and files are
written atomically so failed runs leave nothing behind).

Experiment kinds: decompose, prime-average, equidist, riesz,
compare-weights, recurrence, cesaro.  See README for config examples.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

from . import correlations, nullity, primes_avg, spectral
from .exact import cis, frac_scaled, to_fraction
from .seq import IntegerPolynomial, SequenceSpec
from .spectral import RieszProductSpec, SpectralMeasure
from .systems import ComponentTorus, HeisenbergNil, TrigObservable

SCHEMA = 1


class ConfigError(ValueError):
    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field
        self.message = message


def _need(cfg: dict, field: str, kind=None, path: str = ""):
    full = f"{path}{field}"
    if field not in cfg:
        raise ConfigError(full, "missing required field")
    value = cfg[field]
    if kind is not None and not isinstance(value, kind):
        raise ConfigError(full, f"expected {getattr(kind, '__name__', kind)}")
    return value


def _opt(cfg: dict, field: str, default=None):
    return cfg.get(field, default)


# --------------------------------------------------------------------------
# config parsers
# --------------------------------------------------------------------------

def parse_system(cfg: dict, path: str = "system."):
    kind = _need(cfg, "type", str, path)
    if kind == "torus":
        alpha = _need(cfg, "alpha", list, path)
        d = int(_opt(cfg, "d", 1))
        if d < 1:
            raise ConfigError(path + "d", "component count must be >= 1")
        flags = _opt(cfg, "rationality")
        try:
            return ComponentTorus.make(alpha, d=d, rationality_flags=flags)
        except (ValueError, TypeError) as exc:
            raise ConfigError(path + "alpha", str(exc)) from exc
    if kind == "heisenberg":
        tau = _need(cfg, "tau", list, path)
        if len(tau) != 3:
            raise ConfigError(path + "tau", "needs exactly three coordinates")
        return HeisenbergNil.make(*tau)
    raise ConfigError(path + "type", f"unknown system type {kind!r}")


def parse_point(cfg: dict, system, path: str = "point."):
    if isinstance(system, HeisenbergNil):
        xyz = _need(cfg, "xyz", list, path)
        if len(xyz) != 3:
            raise ConfigError(path + "xyz", "needs exactly three coordinates")
        return system.point(*xyz)
    x = _need(cfg, "x", list, path)
    j = int(_opt(cfg, "component", 0))
    try:
        return system.point(x, j)
    except ValueError as exc:
        raise ConfigError(path + "x", str(exc)) from exc


def parse_polynomial(cfg: dict, path: str = "polynomial."):
    if "monomial" in cfg:
        try:
            return IntegerPolynomial.from_monomial(cfg["monomial"])
        except ValueError as exc:
            raise ConfigError(path + "monomial", str(exc)) from exc
    if "binomial" in cfg:
        return IntegerPolynomial.from_binomial(cfg["binomial"])
    raise ConfigError(path, "needs 'monomial' or 'binomial' coefficients")


def parse_observable(cfg: dict, system, path: str = "observable."):
    kind = _need(cfg, "kind", str, path)
    try:
        if kind == "constant":
            v = _opt(cfg, "value", [1.0, 0.0])
            return TrigObservable.constant(system, complex(v[0], v[1]))
        if kind == "component_indicator":
            return TrigObservable.component_indicator(
                system, int(_need(cfg, "component", int, path))
            )
        if kind == "character":
            return TrigObservable.character(
                system, _need(cfg, "freq", list, path), int(_opt(cfg, "char", 0))
            )
        if kind == "terms":
            terms = []
            for row in _need(cfg, "terms", list, path):
                coeff = row.get("coeff", [1.0, 0.0])
                terms.append(
                    (
                        int(row.get("component", 0)),
                        tuple(int(v) for v in row["freq"]),
                        complex(coeff[0], coeff[1]),
                    )
                )
            return TrigObservable.from_terms(system, terms)
    except ConfigError:
        raise
    except (KeyError, ValueError, TypeError, IndexError) as exc:
        raise ConfigError(path, str(exc)) from exc
    raise ConfigError(path + "kind", f"unknown observable kind {kind!r}")


def parse_sequence(cfg: dict, path: str = "sequence."):
    kind = _need(cfg, "kind", str, path)
    offset = int(_opt(cfg, "offset", 0))
    stride = int(_opt(cfg, "stride", 1))
    try:
        if kind == "identity":
            return SequenceSpec.identity(offset, stride)
        if kind == "polynomial":
            poly = parse_polynomial(_need(cfg, "polynomial", dict, path), path)
            return SequenceSpec.polynomial(poly, offset, stride)
        if kind == "primes":
            return SequenceSpec.primes(offset, stride)
        if kind == "polynomial_of_primes":
            poly = parse_polynomial(_need(cfg, "polynomial", dict, path), path)
            return SequenceSpec.polynomial_of_primes(poly, offset, stride)
        if kind == "primes_in_ap":
            return SequenceSpec.primes_in_ap(
                int(_need(cfg, "modulus", int, path)),
                int(_need(cfg, "residue", int, path)),
                offset,
                stride,
            )
        if kind == "hardy_floor":
            return SequenceSpec.hardy_floor(_need(cfg, "c", (str, float, int), path), offset, stride)
        if kind == "geometric":
            return SequenceSpec.geometric(int(_need(cfg, "q", int, path)), offset, stride)
        if kind == "factorial":
            return SequenceSpec.factorial(offset, stride)
        if kind == "explicit":
            return SequenceSpec.explicit(_need(cfg, "terms", list, path))
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(path, str(exc)) from exc
    raise ConfigError(path + "kind", f"unknown sequence kind {kind!r}")


def parse_measure(cfg: dict, path: str = "measure."):
    atoms = []
    for i, row in enumerate(_opt(cfg, "atoms", [])):
        try:
            atoms.append((row["theta"], float(row["mass"])))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"{path}atoms[{i}]", str(exc)) from exc
    riesz = None
    weight = 0.0
    if "riesz" in cfg:
        r = cfg["riesz"]
        try:
            riesz = RieszProductSpec(
                base=int(r.get("base", 3)),
                coeffs=tuple(float(v) for v in r.get("coeffs", [])),
                tail=float(r.get("tail", 1.0)),
            )
        except (ValueError, TypeError) as exc:
            raise ConfigError(path + "riesz", str(exc)) from exc
        weight = float(_opt(cfg, "riesz_weight", 1.0))
    try:
        return SpectralMeasure(
            atoms=tuple((to_fraction(t) if isinstance(t, str) else t, w) for t, w in atoms),
            riesz=riesz,
            riesz_weight=weight,
        )
    except ValueError as exc:
        raise ConfigError(path, str(exc)) from exc


def parse_schedule(cfg: dict, field: str = "schedule") -> list[int]:
    sched = _need(cfg, field, list)
    try:
        sched = [int(v) for v in sched]
    except (TypeError, ValueError) as exc:
        raise ConfigError(field, "horizons must be integers") from exc
    if not sched or any(v < 1 for v in sched):
        raise ConfigError(field, "horizons must be positive")
    if any(b <= a for a, b in zip(sched, sched[1:])):
        raise ConfigError(field, "horizons must be increasing")
    return sched


def parse_bounded_sequence(cfg: dict, path: str = "a."):
    """A bounded coefficient function n -> a(n) for averaging experiments."""
    kind = _need(cfg, "kind", str, path)
    if kind == "exponential":
        alpha = to_fraction(_need(cfg, "alpha", (str, float, int), path))
        return lambda n: cis(frac_scaled(n, alpha))
    if kind == "constant":
        v = _opt(cfg, "value", [1.0, 0.0])
        c = complex(v[0], v[1])
        return lambda n: c
    if kind == "measure":
        measure = parse_measure(cfg, path)
        return measure
    raise ConfigError(path + "kind", f"unknown coefficient kind {kind!r}")


# --------------------------------------------------------------------------
# formatting and output
# --------------------------------------------------------------------------

def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def build_csv(header: list[str], rows: list[tuple], config_hash: str) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    lines.append(f"# config_hash={config_hash}")
    return "\n".join(lines) + "\n"


def write_atomic(path: str, text: str) -> None:
    directory = os.path.dirname(path) or "."
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".nilcor-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def config_digest(cfg: dict) -> str:
    canon = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:16]


def _json_text(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def _complex_pair(z: complex) -> list[float]:
    return [z.real, z.imag]


def _checkpoints(n: int) -> list[int]:
    pts = {n}
    p = 10
    while p < n:
        pts.add(p)
        p *= 10
    return sorted(pts)


# --------------------------------------------------------------------------
# experiment handlers: each returns (files: name -> text, summary rows)
# --------------------------------------------------------------------------

def run_prime_average(cfg: dict, digest: str, threads: int):
    t0 = time.perf_counter()
    system = parse_system(_need(cfg, "system", dict))
    f = parse_observable(_need(cfg, "observable", dict), system)
    poly = parse_polynomial(_need(cfg, "polynomial", dict))
    x = parse_point(_need(cfg, "point", dict), system)
    n_primes = int(_need(cfg, "n_primes", int))
    if n_primes < 1:
        raise ConfigError("n_primes", "must be positive")
    exclude = bool(_opt(cfg, "exclude_primes_dividing_d", False))

    checkpoints = _checkpoints(n_primes)
    with ThreadPoolExecutor(max_workers=max(threads, 1)) as pool:
        partial = list(
            pool.map(
                lambda N: primes_avg.prime_orbit_average(
                    system, f, poly, x, N, exclude
                ),
                checkpoints,
            )
        )
    lhs = partial[-1]
    k = x.j if hasattr(x, "j") else 0
    rhs = primes_avg.corollary_rhs(system, f, poly, k)
    err = abs(lhs - rhs)
    elapsed = (time.perf_counter() - t0) * 1000.0

    rows = [
        (N, v.real, v.imag, abs(v - rhs)) for N, v in zip(checkpoints, partial)
    ]
    files = {
        "lhs_rhs.json": _json_text(
            {
                "schema": SCHEMA,
                "lhs": _complex_pair(lhs),
                "rhs": _complex_pair(rhs),
                "abs_error": err,
                "N": n_primes,
                "runtime_ms": elapsed,
            }
        ),
        "series.csv": build_csv(
            ["N", "lhs_re", "lhs_im", "abs_error"], rows, digest
        ),
    }
    summary = [
        ("experiment", "prime-average"),
        ("N (primes)", n_primes),
        ("LHS", f"{lhs:.8f}"),
        ("RHS", f"{rhs:.8f}"),
        ("|LHS-RHS|", f"{err:.3e}"),
    ]
    return files, summary


def run_decompose(cfg: dict, digest: str, threads: int):
    ns_cfg = _need(cfg, "ns", dict)
    start, stop = int(_opt(ns_cfg, "start", 0)), int(_need(ns_cfg, "stop", int, "ns."))
    if stop <= start:
        raise ConfigError("ns.stop", "must exceed ns.start")
    ns = range(start, stop)
    if "measure" in cfg:
        spec = correlations.MeasureCorrelation(parse_measure(cfg["measure"]))
    else:
        system = parse_system(_need(cfg, "system", dict))
        obs = tuple(
            parse_observable(o, system, f"observables[{i}].")
            for i, o in enumerate(_need(cfg, "observables", list))
        )
        polys = tuple(
            parse_polynomial(p, f"polynomials[{i}].")
            for i, p in enumerate(_need(cfg, "polynomials", list))
        )
        try:
            spec = correlations.OrbitCorrelation(system, obs, polys)
        except ValueError as exc:
            raise ConfigError("observables", str(exc)) from exc
    try:
        split = correlations.nil_and_null_components(spec)
    except correlations.DecompositionUnsupportedError as exc:
        raise ConfigError("system.type", str(exc)) from exc
    rows = correlations.series_rows(spec, ns)
    files = {
        "series.csv": build_csv(
            ["n", "a_re", "a_im", "psi_re", "psi_im", "eps_re", "eps_im"],
            rows,
            digest,
        ),
        "decompose.json": _json_text(
            {"schema": SCHEMA, "note": split.note, "n_count": len(rows)}
        ),
    }
    return files, [("experiment", "decompose"), ("note", split.note), ("rows", len(rows))]


def run_equidist(cfg: dict, digest: str, threads: int):
    system = parse_system(_need(cfg, "system", dict))
    if not isinstance(system, ComponentTorus):
        raise ConfigError("system.type", "equidist runs on torus systems")
    x = parse_point(_need(cfg, "point", dict), system)
    seq_spec = parse_sequence(_need(cfg, "sequence", dict))
    max_freq = int(_opt(cfg, "max_freq", 3))
    bins = int(_opt(cfg, "bins", 1 << 10))
    n_terms = int(_need(cfg, "n_terms", int))
    if max_freq < 1:
        raise ConfigError("max_freq", "must be >= 1")
    if n_terms < bins:
        raise ConfigError("n_terms", "needs at least as many terms as bins")
    rep = nullity.equidist_report(system, x, seq_spec, max_freq, bins, n_terms)

    weyl_rows = []
    for comp in sorted(rep.weyl):
        for k, v in sorted(rep.weyl[comp].items()):
            weyl_rows.append((comp, " ".join(map(str, k)), v))
    hist_rows = []
    for comp in sorted(rep.hist_counts):
        for coord, counts in enumerate(rep.hist_counts[comp]):
            for b, c in enumerate(counts):
                hist_rows.append((comp, coord, b, c))
    files = {
        "report.json": _json_text(
            {
                "schema": SCHEMA,
                "n_terms": rep.n_terms,
                "component_counts": list(rep.component_counts),
                "component_freqs": list(rep.component_freqs),
                "predicted_freqs": list(rep.predicted_freqs)
                if rep.predicted_freqs
                else None,
                "star_discrepancy": {str(k): v for k, v in rep.star_discrepancy.items()},
                "max_weyl": {
                    str(comp): max(rep.weyl[comp].values()) for comp in rep.weyl
                },
                "bins": rep.bins,
                "max_freq": rep.max_freq,
            }
        ),
        "weyl.csv": build_csv(["component", "freq", "weyl_abs"], weyl_rows, digest),
        "histogram.csv": build_csv(
            ["component", "coordinate", "bin", "count"], hist_rows, digest
        ),
    }
    summary = [
        ("experiment", "equidist"),
        ("components", " ".join(f"{v:.4f}" for v in rep.component_freqs)),
        (
            "predicted",
            " ".join(f"{v:.4f}" for v in rep.predicted_freqs)
            if rep.predicted_freqs
            else "n/a",
        ),
        ("max weyl", max((max(t.values()) for t in rep.weyl.values()), default=0.0)),
    ]
    return files, summary


def run_riesz(cfg: dict, digest: str, threads: int):
    riesz_cfg = {"riesz": _opt(cfg, "riesz", {}), "riesz_weight": 1.0}
    measure = parse_measure(riesz_cfg)
    seq_spec = parse_sequence(_need(cfg, "sequence", dict))
    schedule = parse_schedule(cfg)
    floor = float(_opt(cfg, "floor_threshold", 0.05))
    decay = float(_opt(cfg, "decay_factor", 0.5))
    table = nullity.cesaro_abs(measure, seq_spec, schedule, floor, decay)
    wiener = [spectral.wiener_discrete_mass(measure, n) for n in schedule]
    rows = [
        (n, v, w, table.verdict)
        for n, v, w in zip(table.schedule, table.values, wiener)
    ]
    files = {
        "cesaro.csv": build_csv(
            ["N", "cesaro_abs", "wiener_sq", "verdict"], rows, digest
        ),
        "riesz.json": _json_text(
            {
                "schema": SCHEMA,
                "schedule": list(table.schedule),
                "cesaro_abs": list(table.values),
                "wiener_sq": wiener,
                "verdict": table.verdict,
                "floor_threshold": floor,
                "decay_factor": decay,
            }
        ),
    }
    summary = [
        ("experiment", "riesz"),
        ("verdict", table.verdict),
        ("last cesaro", table.values[-1]),
        ("last wiener", wiener[-1]),
    ]
    return files, summary


def run_cesaro(cfg: dict, digest: str, threads: int):
    a = parse_bounded_sequence(_need(cfg, "a", dict))
    seq_spec = parse_sequence(_need(cfg, "sequence", dict))
    schedule = parse_schedule(cfg)
    floor = float(_opt(cfg, "floor_threshold", 0.05))
    decay = float(_opt(cfg, "decay_factor", 0.5))
    table = nullity.cesaro_abs(a, seq_spec, schedule, floor, decay)
    rows = list(zip(table.schedule, table.values, [table.verdict] * len(table.values)))
    files = {
        "cesaro.csv": build_csv(["N", "cesaro_abs", "verdict"], rows, digest),
        "cesaro.json": _json_text(
            {
                "schema": SCHEMA,
                "schedule": list(table.schedule),
                "values": list(table.values),
                "verdict": table.verdict,
            }
        ),
    }
    return files, [("experiment", "cesaro"), ("verdict", table.verdict)]


def run_compare_weights(cfg: dict, digest: str, threads: int):
    a = parse_bounded_sequence(_need(cfg, "a", dict))
    if isinstance(a, SpectralMeasure):
        measure = a
        a = measure.fourier_coeff
    modulus = int(_need(cfg, "modulus", int))
    residue = int(_need(cfg, "residue", int))
    schedule = parse_schedule(cfg, "horizons")
    omega = _opt(cfg, "omega")
    with ThreadPoolExecutor(max_workers=max(threads, 1)) as pool:
        reports = list(
            pool.map(
                lambda N: primes_avg.compare_weighted_natural(
                    a, modulus, residue, N, omega
                ),
                schedule,
            )
        )
    rows = [
        (
            r.horizon,
            r.natural_avg.real,
            r.natural_avg.imag,
            r.weighted_avg.real,
            r.weighted_avg.imag,
            r.difference,
            r.prime_count,
        )
        for r in reports
    ]
    files = {
        "compare.csv": build_csv(
            [
                "N",
                "natural_re",
                "natural_im",
                "weighted_re",
                "weighted_im",
                "difference",
                "prime_count",
            ],
            rows,
            digest,
        ),
        "compare.json": _json_text(
            {
                "schema": SCHEMA,
                "modulus": modulus,
                "residue": residue,
                "horizons": schedule,
                "differences": [r.difference for r in reports],
            }
        ),
    }
    summary = [
        ("experiment", "compare-weights"),
        ("(d, r)", f"({modulus}, {residue})"),
        ("final difference", f"{reports[-1].difference:.3e}"),
    ]
    return files, summary


def run_recurrence(cfg: dict, digest: str, threads: int):
    alpha = _need(cfg, "alpha", (str, float, int))
    interval = _need(cfg, "interval", dict)
    start = _opt(interval, "start", 0)
    length = _need(interval, "length", (str, float, int), "interval.")
    level = int(_opt(cfg, "level", 3))
    delta = float(_need(cfg, "delta", (int, float)))
    n_primes = int(_need(cfg, "n_primes", int))
    grid = int(_opt(cfg, "grid_size", 10**4))
    try:
        empirical = primes_avg.recurrence_density(
            alpha, (start, length), level, delta, n_primes
        )
        oracle = primes_avg.recurrence_density_grid((start, length), level, delta, grid)
    except ValueError as exc:
        raise ConfigError("recurrence", str(exc)) from exc
    L = float(to_fraction(length))
    files = {
        "recurrence.json": _json_text(
            {
                "schema": SCHEMA,
                "empirical_density": empirical,
                "grid_density": oracle,
                "threshold": L**level - delta,
                "level": level,
                "delta": delta,
                "n_primes": n_primes,
                "grid_size": grid,
            }
        )
    }
    summary = [
        ("experiment", "recurrence"),
        ("empirical density", empirical),
        ("grid density", oracle),
    ]
    return files, summary


_EXPERIMENTS = {
    "prime-average": run_prime_average,
    "decompose": run_decompose,
    "equidist": run_equidist,
    "riesz": run_riesz,
    "cesaro": run_cesaro,
    "compare-weights": run_compare_weights,
    "recurrence": run_recurrence,
}


def run(config: dict, out_dir: str, threads: int, verbose: bool = False) -> int:
    """Validate, compute, then write all artifacts atomically."""
    if not isinstance(config, dict):
        raise ConfigError("config", "top level must be a JSON object")
    kind = _need(config, "experiment", str)
    handler = _EXPERIMENTS.get(kind)
    if handler is None:
        raise ConfigError(
            "experiment", f"unknown kind {kind!r}; known: {sorted(_EXPERIMENTS)}"
        )
    digest = config_digest(config)
    t0 = time.perf_counter()
    files, summary = handler(config, digest, threads)
    elapsed = time.perf_counter() - t0
    for name, text in files.items():
        write_atomic(os.path.join(out_dir, name), text)
    width = max(len(str(k)) for k, _ in summary)
    print(f"nilcor {kind}  (config {digest}, {elapsed:.2f}s)")
    for key, value in summary:
        print(f"  {str(key):<{width}}  {value}")
    print(f"  wrote: {', '.join(sorted(files))} -> {out_dir}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="nilcor", description="run a nilcor experiment config"
    )
    parser.add_argument("--config", required=True, help="path to JSON config")
    parser.add_argument("--out", default=None, help="output directory")
    parser.add_argument(
        "--threads",
        type=int,
        default=None,
        help="worker threads (default: NILCOR_THREADS or all cores)",
    )
    parser.add_argument("--seed", type=int, default=None, help="reserved; unused")
    parser.add_argument("--verbose", action="store_true")
    args = parser.parse_args(argv)

    threads = args.threads
    if threads is None:
        env = os.environ.get("NILCOR_THREADS")
        threads = int(env) if env else (os.cpu_count() or 1)

    try:
        with open(args.config, "r", encoding="utf-8") as fh:
            config = json.load(fh)
    except OSError as exc:
        print(json.dumps({"schema": SCHEMA, "error": {"field": "config", "message": str(exc)}}))
        return 2
    except json.JSONDecodeError as exc:
        print(json.dumps({"schema": SCHEMA, "error": {"field": "config", "message": f"invalid JSON: {exc}"}}))
        return 2

    out_dir = args.out or config.get("out_dir", ".")
    try:
        return run(config, out_dir, threads, args.verbose)
    except ConfigError as exc:
        print(
            json.dumps(
                {
                    "schema": SCHEMA,
                    "error": {"field": exc.field, "message": exc.message},
                },
                sort_keys=True,
            )
        )
        return 2


if __name__ == "__main__":
    sys.exit(main())
