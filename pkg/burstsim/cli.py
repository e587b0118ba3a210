"""
Command-line entry point.

    burstsim run --scenario scenarios/default.yaml --out output/default
    burstsim compare --scenario scenarios/overload.yaml --policies AlwaysHpc DualSubmit CostModel
    burstsim replay --log output/default/events.jsonl
    burstsim validate --scenario scenarios/default.yaml
    burstsim serve --scenario scenarios/default.yaml --port 8080

Exit codes: 0 success, 1 configuration or input error, 2 runtime invariant violation.
"""

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import *

from tqdm import tqdm
from yacs.config import CfgNode

from burstsim.config import load_scenario, save_config_to_yaml
from burstsim.errors import BurstSimError, InvariantViolation
from burstsim.federation import POLICY_CLASS, load_policy
from burstsim.metrics import (
    binned_wait_report,
    collect,
    comparison_report,
    format_decimal,
    policy_table,
    summary,
    tts_reduction,
    write_records_csv,
)
from burstsim.sim import EventLog
from burstsim.simulation import Simulation
from burstsim.utils.logging import config_output_dir, init_logger, logger
from burstsim.utils.reproducibility import seeded_rng
from burstsim.workload import Trace, load_trace

EXIT_OK, EXIT_CONFIG, EXIT_INVARIANT = 0, 1, 2


def summary_json(data: Dict) -> str:
    return json.dumps(data, sort_keys=True, indent=2) + "\n"


def write_outputs(out_dir: str, log: EventLog) -> Dict:
    r"""Write ``events.jsonl``, ``records.csv``, ``wait_bins.csv``/``.json`` and
    ``summary.json`` for one finished run; returns the summary. Runs that executed the same
    application on both clusters also get ``comparison.csv``, HPC against cloud."""
    records = collect(log)
    log.to_jsonl(os.path.join(out_dir, "events.jsonl"))
    write_records_csv(records, os.path.join(out_dir, "records.csv"))
    report = binned_wait_report(records)
    report.to_csv(os.path.join(out_dir, "wait_bins.csv"))
    with open(os.path.join(out_dir, "wait_bins.json"), "w", encoding="utf-8") as f:
        f.write(report.to_json_string() + "\n")
    executed = {kind: [r for r in records if r.executed and r.kind == kind] for kind in ("hpc", "cloud")}
    if {r.app for r in executed["hpc"]} & {r.app for r in executed["cloud"]}:
        comparison = comparison_report(executed["hpc"], executed["cloud"])
        comparison.to_csv(os.path.join(out_dir, "comparison.csv"), index=False, lineterminator="\n")
    result = summary(records, log)
    with open(os.path.join(out_dir, "summary.json"), "w", encoding="utf-8") as f:
        f.write(summary_json(result))
    logger.info(f"outputs written to {out_dir}")
    return result


def cmd_run(args) -> int:
    config = load_scenario(args.scenario)
    if args.policy:
        config.policy.variant = args.policy
    out_dir = config_output_dir(args.out, overwrite=config.logging.overwrite)
    config.logging.path = out_dir
    init_logger(os.path.join(out_dir, "burstsim.log"), config.logging.file_level, config.logging.console_level)
    save_config_to_yaml(config, out_dir)
    simulation = Simulation(config)
    log = simulation.run()
    result = write_outputs(out_dir, log)
    print(summary_json(result), end="")
    return EXIT_OK


def _run_policy(config: CfgNode, trace: Trace, variant: str) -> Dict:
    simulation = Simulation(config, trace=trace, policy=load_policy(config.policy, variant))
    log = simulation.run()
    return summary(collect(log), log)


def cmd_compare(args) -> int:
    policies = [p for item in args.policies for p in item.split(",") if p]
    if len(policies) < 2:
        logger.error("compare needs at least two policies")
        return EXIT_CONFIG
    unknown = [p for p in policies if p not in POLICY_CLASS]
    if unknown:
        logger.error(f"unknown policies {unknown}, choose from {sorted(POLICY_CLASS)}")
        return EXIT_CONFIG
    config = load_scenario(args.scenario)
    # one realization of the workload, shared by every policy
    trace = load_trace(config, seeded_rng(config.reproduce.seed))
    summaries: Dict[str, Dict] = {}
    if args.workers > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            futures = {p: pool.submit(_run_policy, config, trace, p) for p in policies}
            for policy in tqdm(policies, desc="policies"):
                summaries[policy] = futures[policy].result()
    else:
        for policy in tqdm(policies, desc="policies"):
            summaries[policy] = _run_policy(config, trace, policy)
    table = policy_table(summaries)
    print(table.to_string(index=False))
    baseline = policies[0]
    for policy in policies[1:]:
        reduction = tts_reduction(summaries[baseline], summaries[policy])
        if reduction is not None:
            print(f"{policy}: median time-to-solution {format_decimal(100 * reduction, 1)}% below {baseline}")
    if args.out:
        out_dir = config_output_dir(args.out, overwrite=True)
        table.to_csv(os.path.join(out_dir, "compare.csv"), index=False, lineterminator="\n")
        with open(os.path.join(out_dir, "compare.json"), "w", encoding="utf-8") as f:
            f.write(summary_json(summaries))
    return EXIT_OK


def cmd_replay(args) -> int:
    log = EventLog.from_jsonl(args.log)
    result = summary(collect(log), log)
    text = summary_json(result)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as f:
            f.write(text)
    print(text, end="")
    return EXIT_OK


def cmd_validate(args) -> int:
    config = load_scenario(args.scenario)
    trace = load_trace(config, seeded_rng(config.reproduce.seed))
    logger.info(f"{args.scenario}: valid, {len(trace)} jobs")
    return EXIT_OK


def cmd_serve(args) -> int:
    from burstsim.gateway import GatewayService, create_app

    config = load_scenario(args.scenario)
    service = GatewayService(config)
    app = create_app(service)
    host = args.host or config.gateway.host
    port = args.port or config.gateway.port
    logger.info(f"gateway listening on {host}:{port}")
    app.run(host=host, port=port, threaded=True)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser("burstsim", description="HPC + cloud bursting simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="simulate one scenario")
    run.add_argument("--scenario", required=True, type=str)
    run.add_argument("--out", required=True, type=str, help="output directory")
    run.add_argument("--policy", type=str, default=None, help="override policy.variant")
    run.set_defaults(func=cmd_run)

    compare = sub.add_parser("compare", help="run one scenario under several policies")
    compare.add_argument("--scenario", required=True, type=str)
    compare.add_argument("--policies", required=True, nargs="+", help="policy names, space or comma separated")
    compare.add_argument("--workers", type=int, default=1)
    compare.add_argument("--out", type=str, default=None)
    compare.set_defaults(func=cmd_compare)

    replay = sub.add_parser("replay", help="recompute the summary of a logged run")
    replay.add_argument("--log", required=True, type=str)
    replay.add_argument("--out", type=str, default=None, help="write the summary JSON here")
    replay.set_defaults(func=cmd_replay)

    validate = sub.add_parser("validate", help="check a scenario without running it")
    validate.add_argument("--scenario", required=True, type=str)
    validate.set_defaults(func=cmd_validate)

    serve = sub.add_parser("serve", help="serve the gateway API over a scenario")
    serve.add_argument("--scenario", required=True, type=str)
    serve.add_argument("--host", type=str, default=None)
    serve.add_argument("--port", type=int, default=None)
    serve.set_defaults(func=cmd_serve)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InvariantViolation as e:
        logger.error(f"invariant violated: {e}")
        return EXIT_INVARIANT
    except (BurstSimError, OSError) as e:
        logger.error(str(e))
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
