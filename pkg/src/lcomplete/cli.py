"""Config-driven experiment runner and the ``lcv`` command line tool.

The pipeline chains sampling -> abstraction -> completion -> certification
-> optional infinite-horizon extension -> verification, and emits a single
JSON report that fully determines a rerun (the effective seed is embedded).
Each stage is also exposed as a subcommand operating on serialized
artifacts (trace CSV, automaton text, certificate JSON), so externally
collected traces can be certified without any built-in system.
"""

from __future__ import annotations

import dataclasses
import json
import sys
import time
from dataclasses import dataclass
from typing import Any, Optional

import click

from . import abstraction, guarantees, scenario, systems
from .abstraction import Slca
from .config import ExperimentConfig, VerifyQuery, build_environment, load_config, parse_rational
from .core import DAGGER_CSV, DAGGER_NAME, TraceSet
from .scenario import Certificate

SCHEMA_VERSION = 1


class PipelineError(RuntimeError):
    def __init__(self, stage: str, cause: Exception) -> None:
        super().__init__(f"[{stage}] {cause}")
        self.stage = stage
        self.cause = cause


@dataclass
class ExperimentResult:
    report: dict[str, Any]
    traces: TraceSet
    slca_pre: Slca
    slca_post: Slca
    certificate: Certificate

    @property
    def all_hold(self) -> bool:
        return all(v["holds"] for v in self.report["verification"])

    def report_json(self) -> str:
        return json.dumps(self.report, indent=2) + "\n"


def _resolve_symbols(slca: Slca, names) -> set[int]:
    out = set()
    for name in names:
        canonical = DAGGER_NAME if name == DAGGER_CSV else name
        if canonical not in slca.alphabet:
            raise ValueError(f"symbol {name!r} is not in the automaton alphabet")
        out.add(slca.alphabet.id(canonical))
    return out


def _run_queries(slca: Slca, queries) -> list[dict[str, Any]]:
    results = []
    for q in queries:
        if q.kind == "invariance":
            verdict = abstraction.verify_invariance(slca, _resolve_symbols(slca, q.bad))
            entry: dict[str, Any] = {"property": "invariance", "bad": list(q.bad)}
        elif q.kind == "reach_stay":
            verdict = abstraction.verify_reach_stay(
                slca, _resolve_symbols(slca, q.target), _resolve_symbols(slca, q.bad)
            )
            entry = {"property": "reach_stay", "target": list(q.target), "bad": list(q.bad)}
        else:
            raise ValueError(f"unknown property kind {q.kind!r}")
        entry["holds"] = verdict.holds
        if not verdict.holds:
            entry["witness"] = verdict.describe(slca.alphabet)
        results.append(entry)
    return results


def _non_dagger_count(alphabet) -> int:
    return len(alphabet) - (1 if alphabet.dagger_id is not None else 0)


def _infinite_horizon_block(
    cfg: ExperimentConfig, slca_post: Slca, certificate: Certificate
) -> tuple[dict[str, Any], Certificate]:
    strategy = cfg.strategy
    block: dict[str, Any] = {"strategy": strategy}
    if strategy == "none":
        return block, certificate

    if strategy == "affine_phi":
        params = guarantees.AffineBoundParams(
            alpha=float(cfg.strategy_cfg["alpha"]),
            rho=float(cfg.strategy_cfg["rho"]),
            d_min=float(parse_rational(cfg.strategy_cfg["d_min"])),
            d_max=float(parse_rational(cfg.strategy_cfg["d_max"])),
        )
        profile = guarantees.PhiProfile.from_params(params)
        k = cfg.horizon - cfg.l
        phi = guarantees.phi_affine(profile, k)
        gb = guarantees.gamma_bar(certificate.epsilon, phi)
        block.update(
            {
                "alpha": params.alpha,
                "rho": params.rho,
                "d_min": params.d_min,
                "d_max": params.d_max,
                "k_bar": profile.k_bar,
                "k": k,
                "phi": phi,
                "gamma_bar": gb,
                "established": True,
            }
        )
        certificate = dataclasses.replace(certificate, gamma_bar=gb, phi_value=phi)
        return block, certificate

    if strategy == "bisimulation":
        n_outputs = int(
            cfg.strategy_cfg.get("n_outputs", _non_dagger_count(slca_post.alphabet))
        )
        verdict = guarantees.check_bisim_extension(
            slca_post, cfg.horizon, cfg.l, n_outputs
        )
        established = verdict is not guarantees.BisimExtension.NOT_ESTABLISHED
        block.update(
            {
                "n_outputs": n_outputs,
                "horizon_bound": n_outputs ** (cfg.l - 1) + cfg.l - 1,
                "result": verdict.value,
                "assumes_bisimulation": True,
                "established": established,
            }
        )
        if established:
            block["gamma_bar"] = certificate.epsilon
            certificate = dataclasses.replace(
                certificate, gamma_bar=certificate.epsilon, phi_value=1.0
            )
        return block, certificate

    if strategy == "oracle_1d":
        if cfg.system_cfg.get("variant") != "hybrid1d":
            raise ValueError("the oracle_1d strategy needs the hybrid1d system")
        lam = parse_rational(cfg.system_cfg["lam"])
        geometry = guarantees.hybrid_pre_analysis(lam, cfg.l)
        k_bar = geometry.k_bar_exact
        established = cfg.horizon >= k_bar + cfg.l
        block.update(
            {
                "lam": str(lam),
                "k_bar_exact": k_bar,
                "required_horizon": k_bar + cfg.l,
                "established": established,
                "probabilities": {
                    geometry.alphabet.format_lseq(seq, sep=""): str(prob)
                    for seq, prob in geometry.probabilities().items()
                },
            }
        )
        if established:
            block["phi"] = 1.0
            block["gamma_bar"] = certificate.epsilon
            certificate = dataclasses.replace(
                certificate, gamma_bar=certificate.epsilon, phi_value=1.0
            )
        return block, certificate

    raise ValueError(f"unknown strategy {strategy!r}")


def _counts(slca: Slca) -> dict[str, Any]:
    return {
        "states": len(slca.states),
        "edges": slca.n_edges,
        "added_by_completion": len(slca.added_by_completion),
        "non_blocking": abstraction.is_non_blocking(slca),
        "deterministic": abstraction.is_deterministic(slca),
    }


def run_pipeline(
    cfg: ExperimentConfig,
    traces: Optional[TraceSet] = None,
    threads: int = 1,
) -> ExperimentResult:
    """Run the experiment; when ``traces`` is given, skip the sampling stage."""
    timing: dict[str, float] = {}

    def timed(stage, fn):
        t0 = time.perf_counter()
        try:
            out = fn()
        except Exception as exc:
            raise PipelineError(stage, exc) from exc
        timing[stage] = time.perf_counter() - t0
        return out

    if traces is None:
        system, partition, dist = timed("setup", lambda: build_environment(cfg))
        if isinstance(system, systems.Gridworld):
            train_cfg = dict(cfg.system_cfg.get("train", {}))
            policy = timed(
                "train",
                lambda: systems.train_gridworld_policy(
                    system,
                    episodes=int(train_cfg.get("episodes", 100_000)),
                    alpha=float(train_cfg.get("alpha", 0.2)),
                    gamma=float(train_cfg.get("gamma", 0.95)),
                    epsilon=float(train_cfg.get("epsilon", 0.1)),
                    max_steps=int(train_cfg.get("max_steps", 40)),
                    seed=int(train_cfg.get("seed", 0)),
                ),
            )
            system = system.with_policy(policy)
        trained_system = system
        traces = timed(
            "sample",
            lambda: systems.sample_traces(
                trained_system, partition, dist, cfg.n, cfg.horizon, cfg.seed, threads
            ),
        )
    else:
        if traces.horizon != cfg.horizon or len(traces) != cfg.n:
            raise PipelineError(
                "setup",
                ValueError(
                    f"trace file has N={len(traces)}, H={traces.horizon}; "
                    f"config expects N={cfg.n}, H={cfg.horizon}"
                ),
            )

    slca_pre = timed("abstract", lambda: abstraction.build_slca(traces, cfg.l))
    slca_post = timed("complete", lambda: abstraction.domino_complete(slca_pre))
    certificate = timed("certify", lambda: scenario.certify(traces, cfg.l, cfg.beta))
    inf_block, certificate = timed(
        "guarantees", lambda: _infinite_horizon_block(cfg, slca_post, certificate)
    )
    verification = timed("verify", lambda: _run_queries(slca_post, cfg.queries))

    empirical: Optional[dict[str, Any]] = None
    if cfg.empirical_cfg is not None:
        emp_cfg = cfg.empirical_cfg

        def run_empirical() -> dict[str, Any]:
            fresh_seed = int(emp_cfg.get("seed", cfg.seed + 1))
            if fresh_seed == cfg.seed:
                raise ValueError("empirical validation needs a seed different from training")
            system, partition, dist = build_environment(cfg)
            if isinstance(system, systems.Gridworld):
                raise ValueError("empirical validation re-trains no policies; use a built-in system")
            fresh = systems.sample_traces(
                system, partition, dist,
                int(emp_cfg.get("fresh_n", cfg.n)), cfg.horizon, fresh_seed, threads,
            )
            rate = scenario.empirical_violation(slca_pre.states, fresh, cfg.l)
            return {
                "fresh_n": len(fresh),
                "seed": fresh_seed,
                "violation": rate,
                "epsilon": certificate.epsilon,
                "within_bound": rate <= certificate.epsilon,
            }

        empirical = timed("empirical", run_empirical)

    config_echo = dict(cfg.raw)
    config_echo["seed"] = cfg.seed  # effective seed (env override included)
    report = {
        "schema_version": SCHEMA_VERSION,
        "config": config_echo,
        "counts": {"pre_completion": _counts(slca_pre), "post_completion": _counts(slca_post)},
        "certificate": certificate.to_json_dict(),
        "infinite_horizon": inf_block,
        "verification": verification,
    }
    if empirical is not None:
        report["empirical"] = empirical
    report["timing_s"] = timing
    return ExperimentResult(
        report=report,
        traces=traces,
        slca_pre=slca_pre,
        slca_post=slca_post,
        certificate=certificate,
    )


def _write_outputs(result: ExperimentResult, cfg: ExperimentConfig) -> None:
    out = cfg.output_cfg
    if "report" in out:
        with open(out["report"], "w", encoding="utf-8") as fh:
            fh.write(result.report_json())
    if "traces" in out:
        from .core import save_traces_csv

        save_traces_csv(result.traces, out["traces"])
    if "slca" in out:
        abstraction.save_slca(result.slca_post, out["slca"])
    if "dot" in out:
        with open(out["dot"], "w", encoding="utf-8") as fh:
            fh.write(abstraction.to_dot(result.slca_post))


# ---------------------------------------------------------------------------
# Command line interface


@click.group()
def main() -> None:
    """Data-driven l-complete abstractions with PAC inclusion certificates."""


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--threads", default=1, show_default=True, help="sampling worker cap")
@click.option("--report", "report_path", default=None, type=click.Path())
def run(config_path: str, threads: int, report_path: Optional[str]) -> None:
    """Full pipeline: sample, abstract, certify, verify, report.

    Exit code is nonzero iff some requested verification fails.
    """
    cfg = load_config(config_path)
    try:
        result = run_pipeline(cfg, threads=threads)
    except PipelineError as exc:
        raise click.ClickException(str(exc)) from exc
    _write_outputs(result, cfg)
    if report_path:
        with open(report_path, "w", encoding="utf-8") as fh:
            fh.write(result.report_json())
    if not cfg.output_cfg and not report_path:
        click.echo(result.report_json(), nl=False)
    sys.exit(0 if result.all_hold else 1)


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--threads", default=1, show_default=True)
def sample(config_path: str, out_path: str, threads: int) -> None:
    """Sample trajectories per the config and write the trace CSV."""
    from .core import save_traces_csv

    cfg = load_config(config_path)
    system, partition, dist = build_environment(cfg)
    if isinstance(system, systems.Gridworld):
        train_cfg = dict(cfg.system_cfg.get("train", {}))
        policy = systems.train_gridworld_policy(
            system,
            episodes=int(train_cfg.get("episodes", 100_000)),
            alpha=float(train_cfg.get("alpha", 0.2)),
            gamma=float(train_cfg.get("gamma", 0.95)),
            epsilon=float(train_cfg.get("epsilon", 0.1)),
            max_steps=int(train_cfg.get("max_steps", 40)),
            seed=int(train_cfg.get("seed", 0)),
        )
        system = system.with_policy(policy)
    traces = systems.sample_traces(
        system, partition, dist, cfg.n, cfg.horizon, cfg.seed, threads
    )
    save_traces_csv(traces, out_path)
    click.echo(f"wrote {len(traces)} traces (H={traces.horizon}) to {out_path}")


@main.command("abstract")
@click.option("--traces", "traces_path", required=True, type=click.Path(exists=True))
@click.option("--l", "l", required=True, type=int)
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--dot", "dot_path", default=None, type=click.Path())
@click.option("--no-complete", is_flag=True, help="skip the domino completion")
def abstract_cmd(
    traces_path: str, l: int, out_path: str, dot_path: Optional[str], no_complete: bool
) -> None:
    """Build the automaton over witnessed l-sequences from a trace CSV."""
    from .core import load_traces_csv

    traces = load_traces_csv(traces_path)
    try:
        slca = abstraction.build_slca(traces, l)
    except ValueError as exc:
        raise click.ClickException(str(exc)) from exc
    if not no_complete:
        slca = abstraction.domino_complete(slca)
    abstraction.save_slca(slca, out_path)
    if dot_path:
        with open(dot_path, "w", encoding="utf-8") as fh:
            fh.write(abstraction.to_dot(slca))
    click.echo(
        f"automaton: {len(slca.states)} states, {slca.n_edges} edges "
        f"({len(slca.added_by_completion)} added by completion)"
    )


@main.command()
@click.option("--traces", "traces_path", required=True, type=click.Path(exists=True))
@click.option("--l", "l", required=True, type=int)
@click.option("--beta", required=True, type=float)
@click.option("--out", "out_path", default=None, type=click.Path())
def certify(traces_path: str, l: int, beta: float, out_path: Optional[str]) -> None:
    """Certificate (complexity + risk bound) for a trace CSV."""
    from .core import load_traces_csv

    traces = load_traces_csv(traces_path)
    try:
        cert = scenario.certify(traces, l, beta)
    except ValueError as exc:
        raise click.ClickException(str(exc)) from exc
    text = cert.to_json() + "\n"
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)


def _parse_property(spec: str) -> VerifyQuery:
    kind, _, rest = spec.partition(":")
    kind = kind.strip().replace("-", "_")
    if kind == "invariance":
        bad = tuple(s.strip() for s in rest.split(",") if s.strip())
        return VerifyQuery(kind="invariance", bad=bad)
    if kind == "reach_stay":
        target_part, _, bad_part = rest.partition("/")
        return VerifyQuery(
            kind="reach_stay",
            target=tuple(s.strip() for s in target_part.split(",") if s.strip()),
            bad=tuple(s.strip() for s in bad_part.split(",") if s.strip()),
        )
    raise click.ClickException(
        f"unknown property {spec!r}; use 'invariance:SYM,..' or 'reach-stay:TGT,../BAD,..'"
    )


@main.command()
@click.option("--slca", "slca_path", required=True, type=click.Path(exists=True))
@click.option(
    "--property",
    "properties",
    multiple=True,
    required=True,
    help="invariance:R,DAGGER or reach-stay:G/R,DAGGER (repeatable)",
)
def verify(slca_path: str, properties: tuple[str, ...]) -> None:
    """Check temporal properties on a serialized automaton."""
    slca = abstraction.load_slca(slca_path)
    queries = [_parse_property(p) for p in properties]
    try:
        results = _run_queries(slca, queries)
    except ValueError as exc:
        raise click.ClickException(str(exc)) from exc
    ok = True
    for entry in results:
        status = "holds" if entry["holds"] else entry.get("witness", "fails")
        click.echo(f"{entry['property']}: {status}")
        ok = ok and entry["holds"]
    sys.exit(0 if ok else 1)


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--traces", "traces_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
def report(config_path: str, traces_path: str, out_path: str) -> None:
    """Pipeline on externally supplied traces (no sampling stage)."""
    from .core import load_traces_csv

    cfg = load_config(config_path)
    traces = load_traces_csv(traces_path)
    try:
        result = run_pipeline(cfg, traces=traces)
    except PipelineError as exc:
        raise click.ClickException(str(exc)) from exc
    with open(out_path, "w", encoding="utf-8") as fh:
        fh.write(result.report_json())
    sys.exit(0 if result.all_hold else 1)


@main.command()
@click.option(
    "--lam", "--lambda", "lam", required=True,
    help="reset window as a rational, e.g. 1/100",
)
@click.option("--l", "l", default=2, show_default=True, type=int)
@click.option("--csv", "csv_path", default=None, type=click.Path())
def oracle(lam: str, l: int, csv_path: Optional[str]) -> None:
    """Exact sequence probabilities and Pre-chain depth of the hybrid map."""
    try:
        geometry = guarantees.hybrid_pre_analysis(lam, l)
    except ValueError as exc:
        raise click.ClickException(str(exc)) from exc
    table = {
        geometry.alphabet.format_lseq(seq, sep=""): str(prob)
        for seq, prob in geometry.probabilities().items()
    }
    click.echo(json.dumps({"lam": str(geometry.lam), "l": l,
                           "probabilities": table,
                           "k_bar_exact": geometry.k_bar_exact}, indent=2))
    if csv_path:
        with open(csv_path, "w", encoding="utf-8") as fh:
            fh.write(guarantees.geometry_to_csv(geometry))


if __name__ == "__main__":
    main()
