# app/cli/main.py - Command-line surface over the simulation and analysis services
import argparse
import json
import logging
import os
import sys
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence

from app.config.logging_config import configure_logging
from app.config.mermin_config import SIMULATION_CONFIG
from app.core.core_types import ALL_PAIRS, SettingPair
from app.core.errors import HullQueryError, InvalidSettingError
from app.schemas.reports import FactsReport, McConfig, RunConfig, TallyTable
from app.services.analysis_service import HullQuery, analysis_service
from app.services.lad_monte_carlo_service import lad_monte_carlo_service
from app.services.local_realism_service import SetDistribution, local_realism_service
from app.services.quantum_model_service import OUTCOMES, quantum_model_service
from app.services.realm_matrix_service import realm_matrix_service
from app.services.report_service import ConsolidatedReport, report_service
from app.services.rng_service import GENERATOR_NAME, rng_service
from app.utils import table_formatter

logger = logging.getLogger("mermin")

TABLE_2_LITERAL = "GGR:1,RRG:1,GRG:1,RGR:1,GRR:2,RGG:2"
EXTENSIONS = {"csv": "csv", "json": "json", "text": "txt"}
RECORDS_DEFAULT = 1_000

Outputs = Dict[str, str]


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None,
                        help="Master seed (default: MERMIN_SEED, else generated and echoed)")
    common.add_argument("--format", choices=["csv", "json", "text"], default="text", help="Output format")
    common.add_argument("--out", default=None, metavar="DIR", help="Write one file per table into DIR")
    common.add_argument("--threads", type=int, default=None, help="Worker threads for chunked simulation")
    common.add_argument("--chunk-size", type=int, default=None, help="Draws per seeded chunk")
    common.add_argument("--store", action="store_true", help="Persist simulation results to the run store")
    common.add_argument("--log-level", default=None, help="Logging level (default: MERMIN_LOG_LEVEL or WARNING)")
    return common


def _header(**items) -> Dict[str, object]:
    return {k: v for k, v in items.items() if v is not None}


def _fmt(value: Optional[float]) -> Optional[str]:
    return None if value is None else f"{value:.6f}"


def _parse_list(text: str, size: int, name: str) -> List[str]:
    items = [item.strip() for item in text.split(",") if item.strip()]
    if len(items) != size:
        raise HullQueryError(f"{name} needs {size} comma-separated values, got {len(items)}")
    return items


def _facts_output(cfg: RunConfig, report: FactsReport, **extra) -> str:
    if cfg.output_format == "json":
        return report.model_dump_json(indent=2) + "\n"
    header = _header(
        seed=report.seed, generator=report.generator, source=report.source, policy=report.policy,
        n_trials=report.n_trials, chunk_size=report.chunk_size,
        case_a_same_fraction=_fmt(report.case_a_same_fraction),
        case_b_same_fraction=_fmt(report.case_b_same_fraction), **extra,
    )
    return table_formatter.render(table_formatter.facts_frame(report), cfg.output_format, header)


def _tally_output(cfg: RunConfig, t: TallyTable) -> str:
    relation = realm_matrix_service.get_relation(t.relation)
    header = _header(
        relation=relation.arrow, n_vectors=t.n_vectors, p_minus=t.p_minus, seed=t.seed,
        seed_path="/".join(str(k) for k in t.seed_path) or None, generator=t.generator,
        chunk_size=t.chunk_size,
        column_draws=" ".join(f"{k}={v}" for k, v in (t.column_draws or {}).items()) or None,
        case_b_same_fraction=_fmt(float(lad_monte_carlo_service.case_b_same_fraction(t))),
    )
    return table_formatter.render(table_formatter.tally_frame(t), cfg.output_format, header)


def _store(cfg: RunConfig, tallies: Sequence[TallyTable] = (), facts: Sequence[FactsReport] = ()) -> None:
    if not cfg.store:
        return
    from app.database.crud import SimulationRunCRUD
    from app.database.database import new_session

    db = new_session()
    try:
        for t in tallies:
            SimulationRunCRUD.create_from_tally(db, t, command=cfg.command)
        for report in facts:
            SimulationRunCRUD.create_from_facts(db, report)
        logger.info(f"[OK] Stored {len(tallies) + len(facts)} runs")
    finally:
        db.close()


def run_quantum(cfg: RunConfig, args: argparse.Namespace) -> Outputs:
    if args.exact:
        rows = []
        for pair in ALL_PAIRS:
            probs = quantum_model_service.exact_probabilities(pair.theta)
            row = {"pair": pair.label, "theta": pair.theta.degrees}
            row.update({str(o): str(probs[o]) for o in OUTCOMES})
            rows.append(row)
        return {"quantum_exact": table_formatter.render(table_formatter.records_frame(rows), cfg.output_format)}
    if args.records:
        if not args.pair:
            raise InvalidSettingError("--records needs a fixed --pair")
        pair = SettingPair.from_label(args.pair)
        seed = rng_service.resolve_seed(cfg.seed)
        records = quantum_model_service.trial_records(pair, cfg.n or RECORDS_DEFAULT, rng_service.generator(seed))
        header = _header(seed=seed, generator=GENERATOR_NAME, pair=pair.label, n_trials=len(records))
        frame = table_formatter.trials_frame(records)
        return {"quantum_trials": table_formatter.render(frame, cfg.output_format, header)}
    report = quantum_model_service.run_quantum_experiment(
        cfg.n or SIMULATION_CONFIG["device_trials"], args.pair or "uniform", cfg.seed, cfg.chunk_size, cfg.threads,
    )
    _store(cfg, facts=[report])
    return {"quantum_facts": _facts_output(cfg, report)}


def run_bell(cfg: RunConfig, args: argparse.Namespace) -> Outputs:
    d = SetDistribution.from_literal(cfg.distribution or TABLE_2_LITERAL)
    case_b = local_realism_service.mixture_case_b_fraction(d)
    header = _header(
        distribution=",".join(f"{k}:{v}" for k, v in d.to_dict().items()),
        case_b_fraction=str(case_b),
        bell_bound_holds=case_b >= Fraction(1, 3),
    )
    if args.enumerate:
        rows = [{"set": k, "case_b_agreement": str(v)} for k, v in local_realism_service.bell_enumeration().items()]
        frame = table_formatter.records_frame(rows)
    else:
        frame = table_formatter.fractions_frame(local_realism_service.mixture_per_pair_fractions(d), exact=args.exact)
    outputs = {"bell": table_formatter.render(frame, cfg.output_format, header)}
    if cfg.n:
        report = local_realism_service.simulate_instruction_sets(d, cfg.n, cfg.seed, cfg.chunk_size, cfg.threads)
        _store(cfg, facts=[report])
        outputs["bell_simulation"] = _facts_output(cfg, report)
    return outputs


def run_superdet(cfg: RunConfig, args: argparse.Namespace) -> Outputs:
    scenario = local_realism_service.build_superdet_scenario()
    if args.exact:
        rows = []
        for s in scenario.production:
            row = {"set": s.label, "production": str(scenario.production[s])}
            row.update({k: str(v) for k, v in scenario.conditional_pair_distribution(s).items()})
            row["case_b_same"] = str(scenario.case_b_same_fraction(s))
            rows.append(row)
        aggregate = {"set": "all", "production": "1"}
        aggregate.update({k: str(v) for k, v in scenario.aggregate_pair_marginal().items()})
        rows.append(aggregate)
        return {"superdet_weighting": table_formatter.render(table_formatter.records_frame(rows), cfg.output_format)}
    report = local_realism_service.simulate_superdet(
        scenario, cfg.n or SIMULATION_CONFIG["device_trials"], cfg.seed, cfg.chunk_size, cfg.threads,
    )
    _store(cfg, facts=[report])
    gap = local_realism_service.statistical_independence_gap(report)
    return {"superdet_facts": _facts_output(cfg, report, independence_gap=_fmt(gap))}


def run_realm(cfg: RunConfig, args: argparse.Namespace) -> Outputs:
    if args.relations:
        excluded = ", ".join(f"{a}{b}" for a, b in realm_matrix_service.excluded_row_pairs())
        frame = table_formatter.relations_frame(realm_matrix_service.relations)
        return {"relations": table_formatter.render(frame, cfg.output_format, {"excluded_row_pairs": excluded})}
    frame = table_formatter.realm_frame(realm_matrix_service.matrix)
    return {"table_1": table_formatter.render(frame, cfg.output_format)}


def run_mc(cfg: RunConfig, args: argparse.Namespace) -> Outputs:
    mc = McConfig(
        relation=cfg.relation,
        n_vectors=cfg.n or SIMULATION_CONFIG["mc_vectors"],
        p_minus=SIMULATION_CONFIG["p_minus"] if args.p_minus is None else args.p_minus,
        seed=cfg.seed,
        chunk_size=cfg.chunk_size,
        threads=cfg.threads,
    )
    tally = lad_monte_carlo_service.run_simulation(mc)
    _store(cfg, tallies=[tally])
    return {f"table_3_relation_{tally.relation}": _tally_output(cfg, tally)}


def run_mc_all(cfg: RunConfig, args: argparse.Namespace) -> Outputs:
    tallies = lad_monte_carlo_service.run_all_relations(
        cfg.n, args.p_minus, cfg.seed, cfg.chunk_size, cfg.threads,
    )
    _store(cfg, tallies=tallies)
    distributions = {t.relation: analysis_service.recover_distribution(t) for t in tallies}
    summary = []
    for t in tallies:
        d = distributions[t.relation]
        ratio = analysis_service.same_different_ratio(d)
        summary.append({
            "relation": t.relation,
            "case_b_fraction": float(lad_monte_carlo_service.case_b_same_fraction(t)),
            "same": ratio.same,
            "different": ratio.different,
            "ratio": str(ratio.ratio),
        })
    header = _header(seed=tallies[0].seed, generator=tallies[0].generator, n_vectors=tallies[0].n_vectors,
                     p_minus=tallies[0].p_minus, chunk_size=tallies[0].chunk_size)
    outputs = {
        "table_4": table_formatter.render(table_formatter.distribution_frame(distributions), cfg.output_format, header),
        "relation_summary": table_formatter.render(table_formatter.records_frame(summary), cfg.output_format),
    }
    if cfg.out_dir:
        for t in tallies:
            outputs[f"table_3_relation_{t.relation}"] = _tally_output(cfg, t)
    return outputs


def run_recover(cfg: RunConfig, args: argparse.Namespace) -> Outputs:
    if args.published:
        tally = analysis_service.published_table_3_tally()
    elif args.counts:
        counts = [int(c) for c in _parse_list(args.counts, 9, "--counts")]
        tally = TallyTable(relation=cfg.relation, n_vectors=cfg.n or counts[0], counts=counts)
    else:
        raise HullQueryError("recover needs --counts or --published")
    d = analysis_service.recover_distribution(tally)
    ratio = analysis_service.same_different_ratio(d)
    decomposition = analysis_service.decompose_case_b_fraction(d)
    header = _header(
        n=d.n, same=ratio.same, different=ratio.different,
        ratio=str(ratio.ratio) if ratio.defined else "undefined",
        case_b_fraction=f"{decomposition.base} + {decomposition.excess} = {decomposition.total}",
    )
    rows = [{"data_vector": label, "count": count} for label, count in d.by_label().items()]
    return {"recovered": table_formatter.render(table_formatter.records_frame(rows), cfg.output_format, header)}


def run_hull(cfg: RunConfig, args: argparse.Namespace) -> Outputs:
    if args.uniform_b is not None:
        query = HullQuery.uniform_case_b(args.uniform_b)
    elif args.target is not None:
        query = HullQuery(tuple(_parse_list(args.target, 9, "--target")))
    else:
        query = HullQuery.from_expectations(_parse_list(args.expectations, 9, "--expectations"))
    verdict = analysis_service.hull_membership(query)
    if cfg.output_format == "json":
        content = json.dumps(verdict.to_dict(), indent=2) + "\n"
    elif cfg.output_format == "csv":
        row = {"feasible": verdict.feasible,
               "weights": " ".join(str(w) for w in verdict.weights or ()),
               "certificate": verdict.certificate or ""}
        content = table_formatter.render(table_formatter.records_frame([row]), "csv")
    else:
        content = verdict.summary() + "\n"
    return {"hull": content}


def run_report(cfg: RunConfig, args: argparse.Namespace) -> Outputs:
    report = report_service.full_report(
        cfg.seed, cfg.n, p_minus=args.p_minus, chunk_size=cfg.chunk_size, threads=cfg.threads,
    )
    _store(cfg, tallies=report.tallies, facts=[report.quantum, report.superdet])
    if not cfg.out_dir:
        if cfg.output_format == "json":
            return {"report": report.to_json()}
        if cfg.output_format == "csv":
            return _report_tables(report)
        return {"report": report.to_markdown()}
    return {"report.md": report.to_markdown(), "report.json": report.to_json(), **_report_tables(report)}


def _report_tables(report: ConsolidatedReport) -> Outputs:
    """Every report table as csv, each headed by '# table: <name>'."""
    frames = {
        "quantum_facts": (table_formatter.facts_frame(report.quantum), {"seed": report.seed}),
        "table_1": (table_formatter.realm_frame(report.realm), {}),
        "table_2": (table_formatter.fractions_frame(report.table_2), {}),
        "superdet_facts": (table_formatter.facts_frame(report.superdet), {"seed": report.seed}),
    }
    for t in report.tallies:
        frames[f"table_3_relation_{t.relation}"] = (
            table_formatter.tally_frame(t), {"seed": t.seed, "seed_path": t.seed_path[0]})
    frames["table_4"] = (table_formatter.distribution_frame(report.distributions), {"seed": report.seed})
    return {
        f"{name}.csv": table_formatter.render(frame, "csv", {"table": name, **header})
        for name, (frame, header) in frames.items()
    }


def run_runs(cfg: RunConfig, args: argparse.Namespace) -> Outputs:
    from app.database.crud import SimulationRunCRUD
    from app.database.database import new_session

    db = new_session()
    try:
        runs = [r.to_dict() for r in SimulationRunCRUD.get_runs(db, relation=cfg.relation, limit=args.limit)]
    finally:
        db.close()
    columns = ["id", "command", "relation", "seed", "n", "p_minus", "case_b_fraction", "created_at"]
    rows = [{k: r[k] for k in columns} for r in runs]
    return {"runs": table_formatter.render(table_formatter.records_frame(rows, columns), cfg.output_format)}


def build_parser() -> argparse.ArgumentParser:
    common = _common_options()
    parser = argparse.ArgumentParser(
        prog="mermin",
        description="Mermin device, instruction sets, superdeterminism and Lad's G9 realm matrix simulations.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(name: str, handler: Callable[[RunConfig, argparse.Namespace], Outputs], help_text: str):
        p = sub.add_parser(name, parents=[common], help=help_text, description=help_text)
        p.set_defaults(handler=handler)
        return p

    p = add("quantum", run_quantum,
            "Facts 1 and 2: simulate the quantum device and tally RR/RG/GR/GG at each setting pair.")
    p.add_argument("--n", type=int, default=None, help="Trials (default 9,000,000)")
    p.add_argument("--pair", default=None, help="Fix one setting pair such as 23 instead of uniform random pairs")
    p.add_argument("--exact", action="store_true", help="Print the exact joint probabilities per pair instead")
    p.add_argument("--records", action="store_true",
                   help="Export one row per trial at the fixed --pair (default 1,000 trials)")

    p = add("bell", run_bell,
            "Table 2 and the Bell bound: per-pair same-color fractions of an instruction-set mixture.")
    p.add_argument("--distribution", default=None, help=f"SET:weight list (default {TABLE_2_LITERAL})")
    p.add_argument("--exact", action="store_true", help="Print exact rationals instead of two decimals")
    p.add_argument("--enumerate", action="store_true", help="List every instruction set's case (b) agreement")
    p.add_argument("--n", type=int, default=None, help="Also simulate this many trials of the mixture")

    p = add("superdet", run_superdet,
            "Superdeterministic source: set-dependent setting pairs that reproduce Facts 1 and 2.")
    p.add_argument("--n", type=int, default=None, help="Trials (default 9,000,000)")
    p.add_argument("--exact", action="store_true", help="Print the exact conditional pair weighting instead")

    p = add("realm", run_realm, "Table 1: the realm matrix R9-4 of G9 vectors, or its functional relations.")
    p.add_argument("--relations", action="store_true", help="List the twelve functional relations")

    p = add("mc", run_mc, "Table 3: -1 tallies of one functional relation's Monte Carlo run.")
    p.add_argument("--relation", required=True, help="Relation label such as 23")
    p.add_argument("--n", type=int, default=None, help="G9 vectors (default 1,000,000)")
    p.add_argument("--p-minus", type=float, default=None, help="Probability of -1 per domain coordinate (default 0.25)")

    p = add("mc-all", run_mc_all, "Table 4: G9 distributions recovered from all twelve relations' runs.")
    p.add_argument("--n", type=int, default=None, help="G9 vectors per relation (default 1,000,000)")
    p.add_argument("--p-minus", type=float, default=None, help="Probability of -1 per domain coordinate")

    p = add("recover", run_recover,
            "Table 4 from Table 3: solve the four linear equations for N1..N4 and check Different/Same = 2.")
    p.add_argument("--counts", default=None, help="Nine comma-separated -1 counts in pair order 11..33")
    p.add_argument("--n", type=int, default=None, help="Number of G9 vectors (default: the count at 11)")
    p.add_argument("--relation", default=None, help="Relation label to echo")
    p.add_argument("--published", action="store_true", help="Use the published relation 23 tally")

    p = add("hull", run_hull,
            "Convex hull of the G9 vectors: QM's 1/4 point lies outside, the 3/8 point inside.")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--uniform-b", default=None, help="Same fraction f at all six case (b) pairs")
    group.add_argument("--target", default=None, help="Nine comma-separated same fractions")
    group.add_argument("--expectations", default=None, help="Nine comma-separated +-1 expectations")

    p = add("report", run_report,
            "All tables: Facts 1-2, Bell bound, Table 2, superdeterminism, Tables 1, 3, 4 and the hull verdicts.")
    p.add_argument("--n", type=int, default=None, help="G9 vectors per relation; device runs use 9n trials")
    p.add_argument("--p-minus", type=float, default=None, help="Probability of -1 per domain coordinate")

    p = add("runs", run_runs, "List simulation runs kept in the run store.")
    p.add_argument("--relation", default=None, help="Only runs of this relation")
    p.add_argument("--limit", type=int, default=20, help="Maximum runs to list")
    return parser


def _emit(cfg: RunConfig, outputs: Outputs) -> None:
    if cfg.out_dir:
        os.makedirs(cfg.out_dir, exist_ok=True)
        for name, content in outputs.items():
            filename = name if "." in name else f"{name}.{EXTENSIONS[cfg.output_format]}"
            path = os.path.join(cfg.out_dir, filename)
            with open(path, "w", encoding="utf-8", newline="\n") as handle:
                handle.write(content)
            logger.info(f"[OK] Wrote {path}")
        return
    if cfg.output_format == "json" and len(outputs) > 1:
        sys.stdout.write(json.dumps({k: json.loads(v) for k, v in outputs.items()}, indent=2) + "\n")
        return
    sys.stdout.write("\n".join(outputs.values()))


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)
    try:
        cfg = RunConfig(
            command=args.command,
            n=getattr(args, "n", None),
            seed=args.seed,
            relation=getattr(args, "relation", None),
            distribution=getattr(args, "distribution", None),
            output_format=args.format,
            out_dir=args.out,
            threads=args.threads or SIMULATION_CONFIG["threads"],
            chunk_size=args.chunk_size or SIMULATION_CONFIG["chunk_size"],
            store=args.store,
        )
        _emit(cfg, args.handler(cfg, args))
    except ValueError as e:
        # MerminError and pydantic validation errors both land here
        logger.error(f"[ERROR] {e}")
        return 1
    return 0
