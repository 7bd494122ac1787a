"""normlens command-line interface.

Subcommands map one-to-one onto the analysis surfaces: ``norm apply``
(file-to-file normalization), ``shift study`` (attention-shift metric
reports), ``signflip check|estimate|sweep`` (sign-flip conditions and
Monte Carlo estimates), ``elb curve|k50|landscape|verify`` (entropy
lower-bound tooling), and ``gradcheck``.

Every run is deterministic given its flags and seed: reports carry the
seed in their header, floats are written in shortest round-trip form, and
chunked work is partitioned independently of the worker count
(``NORMLENS_THREADS`` caps workers; ``NORMLENS_NO_NUMBA=1`` selects the
numpy kernels).

Exit codes: 0 all checks passed, 1 a mathematical assertion failed,
2 usage or I/O error.
"""

import functools
import sys
from pathlib import Path

import click
import numpy as np

from ._backend import active_backend, map_ordered
from .attention import shift_report
from .core import gaussian_batch
from .elb import elb, elb_at_config, elb_bruteforce, elb_curve, k50
from .embeddings import EmbeddingFile, load_embeddings, sample_sequences
from .gradcheck import run_gradcheck
from .norms import DEFAULT_UNITNORM_K, METHODS, NormConfig, normalize
from .reports import (
    csv_text,
    json_text,
    metric_report_csv,
    metric_report_dict,
    write_text,
)
from .signflip import (
    GaussianTokenModel,
    corollary_condition,
    corollary_ratio,
    dot_mean,
    dot_variance,
    estimate_signflip,
    sweep_dimensions,
    tally_signs,
    theorem_condition,
    theorem_condition_sides,
)

DEFAULT_SEED = 7
SIGNFLIP_BOUND = 0.40


def cli_errors(f):
    """Map failures onto the exit-code contract."""

    @functools.wraps(f)
    def wrapper(*args, **kwargs):
        try:
            return f(*args, **kwargs)
        except (ValueError, OSError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(2)
        except RuntimeError as exc:
            click.echo(f"assertion failed: {exc}", err=True)
            sys.exit(1)

    return wrapper


def _emit_text(text: str, out: str | None):
    if out:
        write_text(out, text)
        click.echo(f"wrote {out}")
    else:
        click.echo(text, nl=False)


def _emit_json(obj: dict, out: str | None):
    _emit_text(json_text(obj), out)


def _ints(text: str) -> list[int]:
    try:
        return [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise ValueError(f"expected comma-separated integers, got {text!r}") from None


def _floats(text: str) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise ValueError(f"expected comma-separated numbers, got {text!r}") from None


def _parse_methods(text: str, eps: float) -> list[NormConfig]:
    configs = []
    for token in text.split(","):
        token = token.strip()
        if not token:
            continue
        if ":" in token:
            name, _, karg = token.partition(":")
            cfg = NormConfig(method=name, eps=eps, k=float(karg))
        else:
            cfg = NormConfig(method=token, eps=eps)
        configs.append(cfg)
    if not configs:
        raise ValueError("no methods given")
    return configs


def _slug(label: str) -> str:
    return label.replace("(", "_").replace(")", "").replace("=", "").replace(".", "p")


@click.group()
def main():
    """Normalization kernels and their attention-analysis toolkit."""


# ---------------------------------------------------------------------------
# norm
# ---------------------------------------------------------------------------


@main.group()
def norm():
    """Apply normalization methods to token files."""


@norm.command("apply")
@click.option("--input", "input_path", required=True, type=click.Path(), help="Token file.")
@click.option("--format", "fmt", type=click.Choice(["csv", "rawf32"]), default="csv", show_default=True)
@click.option("--dim", "-D", required=True, type=int, help="Feature dimension of the file.")
@click.option("--limit", type=int, default=None, help="Read at most this many tokens.")
@click.option("--method", type=click.Choice(list(METHODS)), required=True)
@click.option("--k", type=float, default=DEFAULT_UNITNORM_K, show_default=True, help="unitnorm modulus.")
@click.option("--eps", type=float, default=1e-5, show_default=True, help="Variance regularizer.")
@click.option("--out", required=True, type=click.Path(), help="Output CSV path.")
@cli_errors
def norm_apply(input_path, fmt, dim, limit, method, k, eps, out):
    """Normalize every token in a file and write the result as CSV."""
    pool = load_embeddings(EmbeddingFile(input_path, fmt, dim, limit))
    cfg = NormConfig(method=method, eps=eps, k=k)
    result = normalize(pool[np.newaxis, :, :], cfg)[0]
    lines = [f"# normlens norm apply method={cfg.label()} dim={dim} tokens={result.shape[0]}"]
    for row in result:
        lines.append(",".join(repr(float(v)) for v in row))
    write_text(out, "\n".join(lines) + "\n")
    click.echo(f"wrote {out}")


# ---------------------------------------------------------------------------
# shift
# ---------------------------------------------------------------------------


@main.group()
def shift():
    """Attention-shift studies."""


@shift.command("study")
@click.option("--input", "input_path", type=click.Path(), default=None, help="Embedding file source.")
@click.option("--format", "fmt", type=click.Choice(["csv", "rawf32"]), default="csv", show_default=True)
@click.option("--dim", "-D", required=True, type=int, help="Feature dimension.")
@click.option("--limit", type=int, default=None, help="Token limit for file sources.")
@click.option("--mu", type=float, default=None, help="Synthetic per-feature mean (default: 6/dim**0.25).")
@click.option("--sigma2", type=float, default=1.0, show_default=True, help="Synthetic per-feature variance.")
@click.option("--batches", "-N", type=int, default=32, show_default=True)
@click.option("--length", "-L", type=int, default=64, show_default=True)
@click.option("--sets", type=int, default=10, show_default=True, help="Independent seeded sets.")
@click.option("--seed", type=int, default=DEFAULT_SEED, show_default=True)
@click.option("--methods", default="unitnorm:1.5,rmsnorm,layernorm_practice,batchnorm", show_default=True)
@click.option("--eps", type=float, default=1e-5, show_default=True)
@click.option("--outdir", required=True, type=click.Path(), help="Directory for per-set reports.")
@click.option("--emit", type=click.Choice(["json", "csv", "both"]), default="both", show_default=True)
@click.option("--include-pairs", is_flag=True, help="Embed per-anchor values in the JSON reports.")
@cli_errors
def shift_study(
    input_path, fmt, dim, limit, mu, sigma2, batches, length, sets, seed,
    methods, eps, outdir, emit, include_pairs,
):
    """Compute shift metrics for several methods over seeded data sets."""
    configs = _parse_methods(methods, eps)
    if sets < 1:
        raise ValueError(f"sets must be >= 1, got {sets}")
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)

    if input_path is not None:
        pool = load_embeddings(EmbeddingFile(input_path, fmt, dim, limit))
        source = {"type": "file", "path": str(input_path), "format": fmt, "dim": dim}
    else:
        pool = None
        if mu is None:
            mu = corollary_ratio(dim)
        source = {"type": "synthetic", "mu": mu, "sigma2": sigma2, "dim": dim}
    children = np.random.SeedSequence(seed).spawn(sets)

    def one_set(idx):
        if pool is None:
            batch = gaussian_batch(batches, length, np.full(dim, mu), np.full(dim, sigma2), children[idx])
        else:
            batch = sample_sequences(pool, batches, length, children[idx])
        return {cfg.label(): shift_report(batch, cfg) for cfg in configs}

    per_set = map_ordered(one_set, range(sets))

    labels = [cfg.label() for cfg in configs]
    metric_names = ("chebyshev", "cosine", "kl", "entropy_original", "entropy_normalized")
    summary_methods = {}
    for label in labels:
        entry = {}
        for name in metric_names:
            per_set_median = [rep[label].summaries[name]["median"] for rep in per_set]
            pooled = np.concatenate([rep[label].metric(name).ravel() for rep in per_set])
            entry[name] = {
                "median_per_set": per_set_median,
                "median_pooled": float(np.quantile(pooled, 0.5, method="midpoint")),
                "mean_pooled": float(pooled.mean()),
            }
        summary_methods[label] = entry

    for idx, reps in enumerate(per_set):
        for label, rep in reps.items():
            stem = outdir / f"shift_{_slug(label)}_set{idx:02d}"
            if emit in ("json", "both"):
                payload = {"command": "shift study", "seed": seed, "set": idx, "source": source}
                payload.update(metric_report_dict(rep, include_pairs=include_pairs))
                write_text(f"{stem}.json", json_text(payload))
            if emit in ("csv", "both"):
                write_text(f"{stem}.csv", metric_report_csv(rep))

    by_cheb = sorted(labels, key=lambda m: summary_methods[m]["chebyshev"]["median_pooled"])
    by_entropy = sorted(
        labels,
        key=lambda m: summary_methods[m]["entropy_normalized"]["median_pooled"],
        reverse=True,
    )
    summary = {
        "command": "shift study",
        "backend": active_backend(),
        "seed": seed,
        "sets": sets,
        "batches": batches,
        "length": length,
        "source": source,
        "methods": summary_methods,
        "orderings": {
            "chebyshev_median_ascending": by_cheb,
            "entropy_normalized_median_descending": by_entropy,
        },
    }
    write_text(outdir / "summary.json", json_text(summary))
    click.echo(f"wrote {outdir}/summary.json")


# ---------------------------------------------------------------------------
# signflip
# ---------------------------------------------------------------------------


def _model_from_flags(dim, mu, sigma2, mu_y, sigma2_y):
    if mu is None:
        mu = corollary_ratio(dim)
    if mu_y is None:
        mu_y = mu
    if sigma2_y is None:
        sigma2_y = sigma2
    model = GaussianTokenModel(
        np.full(dim, mu), np.full(dim, sigma2), np.full(dim, mu_y), np.full(dim, sigma2_y)
    )
    scalars = {"mu_x": mu, "sigma2_x": sigma2, "mu_y": mu_y, "sigma2_y": sigma2_y}
    return model, scalars


def _condition_block(model, scalars, dim):
    lhs, rhs = theorem_condition_sides(model)
    block = {
        "theorem_holds": theorem_condition(model),
        "theorem_lhs": lhs,
        "theorem_rhs": rhs,
    }
    sx = np.sqrt(scalars["sigma2_x"])
    sy = np.sqrt(scalars["sigma2_y"])
    if sx > 0 and sy > 0:
        block["corollary_holds"] = corollary_condition(
            scalars["mu_x"], sx, scalars["mu_y"], sy, dim
        )
        block["corollary_threshold"] = corollary_ratio(dim)
    return block


@main.group()
def signflip():
    """Sign-flip conditions and Monte Carlo estimation."""


@signflip.command("check")
@click.option("--dim", "-D", required=True, type=int)
@click.option("--mu", type=float, default=None, help="Shared mean of x (default: 6/dim**0.25).")
@click.option("--sigma2", type=float, default=1.0, show_default=True)
@click.option("--mu-y", type=float, default=None, help="Mean of y (default: same as x).")
@click.option("--sigma2-y", type=float, default=None, help="Variance of y (default: same as x).")
@click.option("--out", type=click.Path(), default=None)
@cli_errors
def signflip_check(dim, mu, sigma2, mu_y, sigma2_y, out):
    """Report condition verdicts and closed-form moments for a model."""
    model, scalars = _model_from_flags(dim, mu, sigma2, mu_y, sigma2_y)
    payload = {
        "command": "signflip check",
        "backend": active_backend(),
        "dim": dim,
        **scalars,
        "dot_mean": dot_mean(model),
        "dot_variance": dot_variance(model),
        **_condition_block(model, scalars, dim),
    }
    _emit_json(payload, out)


@signflip.command("estimate")
@click.option("--dim", "-D", required=True, type=int)
@click.option("--mu", type=float, default=None, help="Shared mean of x (default: 6/dim**0.25).")
@click.option("--sigma2", type=float, default=1.0, show_default=True)
@click.option("--mu-y", type=float, default=None)
@click.option("--sigma2-y", type=float, default=None)
@click.option("--samples", type=int, default=100_000, show_default=True)
@click.option("--seed", type=int, default=DEFAULT_SEED, show_default=True)
@click.option("--standardize", type=click.Choice(["model", "empirical"]), default="model", show_default=True)
@click.option("--out", type=click.Path(), default=None)
@cli_errors
def signflip_estimate(dim, mu, sigma2, mu_y, sigma2_y, samples, seed, standardize, out):
    """Estimate the flip probability; nonzero exit if the 0.40 bound fails."""
    model, scalars = _model_from_flags(dim, mu, sigma2, mu_y, sigma2_y)
    tally = tally_signs(model, samples, seed, standardize)
    conditions = _condition_block(model, scalars, dim)
    std_err = tally.std_err(tally.n_flip)
    bound_applicable = conditions["theorem_holds"] and standardize == "model"
    bound_ok = tally.p_flip + 3.0 * std_err >= SIGNFLIP_BOUND if bound_applicable else None
    payload = {
        "command": "signflip estimate",
        "backend": active_backend(),
        "dim": dim,
        **scalars,
        "n_samples": samples,
        "seed": seed,
        "standardize": standardize,
        "p_hat": tally.p_flip,
        "std_err": std_err,
        "p_raw_nonpositive": tally.p_raw_nonpositive,
        "p_norm_positive": tally.p_norm_positive,
        "bound": SIGNFLIP_BOUND,
        "bound_satisfied": bound_ok,
        **conditions,
    }
    _emit_json(payload, out)
    if bound_applicable and not bound_ok:
        click.echo(
            f"assertion failed: p_hat={tally.p_flip:.5f} + 3*std_err < {SIGNFLIP_BOUND}",
            err=True,
        )
        sys.exit(1)


@signflip.command("sweep")
@click.option("--dims", default="81,256,625,1296", show_default=True, help="Comma-separated dimensions.")
@click.option("--ratio", type=float, default=None, help="Mean/std ratio (default: 6/dim**0.25 per dim).")
@click.option("--sigma2", type=float, default=1.0, show_default=True)
@click.option("--samples", type=int, default=100_000, show_default=True)
@click.option("--seed", type=int, default=DEFAULT_SEED, show_default=True)
@click.option("--out", type=click.Path(), default=None)
@cli_errors
def signflip_sweep(dims, ratio, sigma2, samples, seed, out):
    """Flip-probability sweep across dimensions, emitted as CSV."""
    rows = sweep_dimensions(_ints(dims), samples, seed, ratio=ratio, sigma2=sigma2)
    header = ("dim", "ratio", "corollary_holds", "theorem_holds", "p_hat", "std_err", "seed")
    _emit_text(csv_text(header, [[r[h] for h in header] for r in rows]), out)
    failures = [
        r for r in rows
        if r["theorem_holds"] and r["p_hat"] + 3.0 * r["std_err"] < SIGNFLIP_BOUND
    ]
    if failures:
        click.echo(f"assertion failed: {len(failures)} sweep rows violate the 0.40 bound", err=True)
        sys.exit(1)


# ---------------------------------------------------------------------------
# elb
# ---------------------------------------------------------------------------


@main.group("elb")
def elb_group():
    """Entropy lower-bound tooling."""


@elb_group.command("curve")
@click.option("--length", "-L", required=True, type=int)
@click.option("--dim", "-D", required=True, type=int)
@click.option("--k-min", type=float, default=-1.0, show_default=True)
@click.option("--k-max", type=float, default=3.0, show_default=True)
@click.option("--steps", type=int, default=101, show_default=True)
@click.option("--out", type=click.Path(), default=None)
@cli_errors
def elb_curve_cmd(length, dim, k_min, k_max, steps, out):
    """Sample the bound on a uniform k grid, emitted as CSV."""
    points = elb_curve(length, dim, k_min, k_max, steps)
    rows = [(p.k, p.length, p.dim, p.d_val, p.elb) for p in points]
    _emit_text(csv_text(("k", "length", "dim", "d_val", "elb"), rows), out)


@elb_group.command("k50")
@click.option("--length", "-L", required=True, type=int)
@click.option("--dim", "-D", required=True, type=int)
@click.option("--tol", type=float, default=1e-9, show_default=True)
@click.option("--out", type=click.Path(), default=None)
@cli_errors
def elb_k50_cmd(length, dim, tol, out):
    """Solve for the k at which the bound is half of log L."""
    import math

    star = k50(length, dim, tol)
    value = elb(star, length, dim)
    target = 0.5 * math.log(length)
    payload = {
        "command": "elb k50",
        "length": length,
        "dim": dim,
        "tol": tol,
        "k50": star,
        "elb_at_k50": value,
        "target": target,
        "residual": abs(value - target),
    }
    _emit_json(payload, out)


@elb_group.command("landscape")
@click.option("--lengths", default="64,128,256,512,1024", show_default=True)
@click.option("--dims", default="64,128,256,512,1024", show_default=True)
@click.option("--tol", type=float, default=1e-9, show_default=True)
@click.option("--out", type=click.Path(), default=None)
@cli_errors
def elb_landscape_cmd(lengths, dims, tol, out):
    """k50 over an (L, D) grid, emitted as CSV."""
    rows = []
    for length in _ints(lengths):
        for dim in _ints(dims):
            rows.append((length, dim, k50(length, dim, tol)))
    _emit_text(csv_text(("length", "dim", "k50"), rows), out)


@elb_group.command("verify")
@click.option("--lengths", default="2,3,4", show_default=True)
@click.option("--ks", default="-1,0,1,1.5", show_default=True)
@click.option("--dims", default="1,4,64", show_default=True)
@click.option("--grid", type=int, default=2001, show_default=True)
@click.option("--tol-match", type=float, default=1e-6, show_default=True)
@click.option("--out", type=click.Path(), default=None)
@cli_errors
def elb_verify_cmd(lengths, ks, dims, grid, tol_match, out):
    """Check the closed form against brute-force row entropies.

    Per combo: the closed form must equal the independently computed row
    entropy of the all-(-1) configuration within the tolerance, and the
    grid minimum can never exceed that configuration's entropy.
    """
    rows = []
    all_ok = True
    for length in _ints(lengths):
        for k in _floats(ks):
            for dim in _ints(dims):
                closed = elb(k, length, dim)
                config = elb_at_config(k, length, dim, -np.ones(length - 1))
                brute = elb_bruteforce(k, length, dim, grid)
                match = abs(closed - config) <= tol_match
                brute_ok = brute <= config + 1e-12
                all_ok = all_ok and match and brute_ok
                rows.append(
                    {
                        "k": k,
                        "length": length,
                        "dim": dim,
                        "grid": grid,
                        "elb": closed,
                        "config_entropy": config,
                        "abs_diff": abs(closed - config),
                        "match": match,
                        "brute_min": brute,
                        "brute_at_most_config": brute_ok,
                        "bound_holds_on_grid": brute >= closed - 1e-9,
                    }
                )
    payload = {
        "command": "elb verify",
        "backend": active_backend(),
        "grid": grid,
        "tol_match": tol_match,
        "rows": rows,
        "all_ok": all_ok,
    }
    _emit_json(payload, out)
    if not all_ok:
        click.echo("assertion failed: closed form disagrees with brute-force entropies", err=True)
        sys.exit(1)


# ---------------------------------------------------------------------------
# gradcheck
# ---------------------------------------------------------------------------


@main.command("gradcheck")
@click.option("--trials", type=int, default=100, show_default=True)
@click.option("--seed", type=int, default=DEFAULT_SEED, show_default=True)
@click.option("--dim-in", type=int, default=6, show_default=True)
@click.option("--dim-out", type=int, default=8, show_default=True)
@click.option("--k", type=float, default=DEFAULT_UNITNORM_K, show_default=True)
@click.option("--out", type=click.Path(), default=None)
@cli_errors
def gradcheck_cmd(trials, seed, dim_in, dim_out, k, out):
    """Run randomized Jacobian and gradient-identity checks."""
    report = run_gradcheck(trials, seed, dim_in=dim_in, dim_out=dim_out, k=k)
    payload = {"command": "gradcheck", "backend": active_backend(), **report}
    _emit_json(payload, out)
    if not report["all_passed"]:
        failed = [name for name, ok in report["checks"].items() if not ok]
        click.echo(f"assertion failed: {', '.join(failed)}", err=True)
        sys.exit(1)


if __name__ == "__main__":
    main()
