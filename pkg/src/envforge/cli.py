"""Command-line entry point.

Exit codes: 0 success, 1 operational error, 64 usage error; `validate`
exits with 5 - level so scripts can branch on the ladder outcome.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from pathlib import Path

from .artifacts import EnvArtifact, RunnerLimits
from .calibration import CalibrationConfig, calibrate, q_unc
from .clients import EndpointGenerator, EndpointPolicyClient, EndpointReviewer, EndpointSolver, PolicyClients, ScriptedSolver
from .errors import EnvForgeError
from . import ledger as ledger_mod
from . import loop as loop_mod
from . import pool as pool_mod
from .review import AGGREGATION_RULES, audit
from .runconfig import ENV_RUN_DIR, RunConfig, resolve_config
from .validator import ValidationConfig, validate

USAGE_EXIT = 64
ERROR_EXIT = 1


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(USAGE_EXIT)


def _build_parser() -> _Parser:
    parser = _Parser(prog="envforge")
    parser.add_argument("--json", action="store_true", help="machine-readable output")
    sub = parser.add_subparsers(dest="command")

    p_validate = sub.add_parser("validate", help="run the L1-L5 ladder on an artifact")
    p_validate.add_argument("artifact", help="artifact description file (JSON)")
    p_validate.add_argument("--report", help="where to write the report (default: <artifact>.report.json)")
    p_validate.add_argument("--seeds", type=int, default=5)
    p_validate.add_argument("--difficulties", type=int, nargs="+", default=[1, 2, 3])
    p_validate.add_argument("--repeats", type=int, default=3)
    p_validate.add_argument("--timeout", type=float, default=30.0)

    p_cal = sub.add_parser("calibrate", help="estimate solver-relative accuracy")
    p_cal.add_argument("artifact")
    p_cal.add_argument("--solver", required=True,
                       help="client spec: scripted:p=0.3[,seed=N] or endpoint:URL")
    p_cal.add_argument("-m", type=int, default=8)
    p_cal.add_argument("--difficulty", type=int, default=2)

    p_run = sub.add_parser("run", help="execute a scripted or endpoint-backed run")
    p_run.add_argument("--config", help="run-config file (JSON or YAML)")
    p_run.add_argument("--steps", type=int)
    p_run.add_argument("--clients", choices=["scripted", "endpoint"])
    p_run.add_argument("--run-dir", help=f"run directory (or ${ENV_RUN_DIR})")
    p_run.add_argument("--seed", type=int, help="run seed override")

    p_pool = sub.add_parser("pool", help="inspect or mutate a pool manifest")
    pool_sub = p_pool.add_subparsers(dest="pool_command")
    for name in ("show", "rotate", "export"):
        p = pool_sub.add_parser(name)
        p.add_argument("--manifest", required=True)
        if name == "rotate":
            p.add_argument("--at-step", type=int, required=True)
        if name == "export":
            p.add_argument("-o", "--out")

    p_audit = sub.add_parser("audit-review", help="agreement grid for all four aggregation rules")
    p_audit.add_argument("labels", help="TSV: env_id  truth  verdict1 [verdict2 verdict3 ...]")

    p_export = sub.add_parser("export-batches", help="repackage a run's batch files for the trainer")
    p_export.add_argument("run_dir")
    p_export.add_argument("-o", "--out", default="batches.jsonl")

    p_ledger = sub.add_parser("ledger", help="run-ledger inspection")
    ledger_sub = p_ledger.add_subparsers(dest="ledger_command")
    p_verify = ledger_sub.add_parser("verify")
    p_verify.add_argument("path")

    return parser


def _cmd_validate(args) -> int:
    artifact = EnvArtifact.load(args.artifact)
    config = ValidationConfig(
        seeds_per_layer=args.seeds,
        difficulties_probed=tuple(args.difficulties),
        determinism_repeats=args.repeats,
    )
    limits = RunnerLimits(wall_clock_timeout=args.timeout)
    report = validate(artifact, config, limits)
    report_path = Path(args.report or (str(args.artifact) + ".report.json"))
    report_path.write_text(json.dumps(report.to_dict(), indent=2))
    if args.json:
        print(json.dumps(report.to_dict()))
    else:
        print(f"{artifact.env_id}: level {report.level}")
        for evidence in report.layer_evidence:
            mark = "pass" if evidence.passed else "FAIL"
            cause = f"  ({evidence.cause})" if evidence.cause else ""
            print(f"  L{evidence.layer}: {mark}{cause}")
        print(f"report written to {report_path}")
    return 5 - report.level


def _parse_solver_spec(spec: str):
    if spec.startswith("scripted:"):
        params = dict(part.split("=", 1) for part in spec[len("scripted:"):].split(",") if part)
        p = float(params.get("p", 0.3))
        seed = int(params.get("seed", 0))
        return ScriptedSolver(p, random.Random(f"{seed}|solver"))
    if spec.startswith("endpoint:"):
        return EndpointSolver(EndpointPolicyClient(spec[len("endpoint:"):]))
    raise ValueError(f"unknown solver spec {spec!r}")


def _cmd_calibrate(args) -> int:
    artifact = EnvArtifact.load(args.artifact)
    solver = _parse_solver_spec(args.solver)
    config = CalibrationConfig(m=args.m, difficulty=args.difficulty)
    report = calibrate(artifact, solver, config)
    reward = q_unc(report.empirical_accuracy, config)
    if args.json:
        print(json.dumps({
            "empirical_accuracy": report.empirical_accuracy,
            "m_effective": report.m_effective,
            "q_unc": reward,
            "per_instance": [
                {"seed": i.seed, "score": i.score, "digest": i.solver_response_digest}
                for i in report.per_instance
            ],
        }))
    else:
        print(f"{artifact.env_id}: accuracy {report.empirical_accuracy:.3f} "
              f"over {report.m_effective} instances, q_unc {reward:.4f}")
        for inst in report.per_instance:
            print(f"  seed={inst.seed} score={inst.score:.3f} response={inst.digest}")
    return 0


def _cmd_run(args) -> int:
    import os

    overrides: dict = {}
    if args.steps is not None:
        overrides.setdefault("loop", {})["steps"] = args.steps
    if args.clients is not None:
        overrides["clients"] = args.clients
    if args.seed is not None:
        overrides["run_seed"] = args.seed
    config = resolve_config(args.config, overrides)
    run_dir = args.run_dir or os.environ.get(ENV_RUN_DIR)
    if not run_dir:
        print(f"error: no run directory (use --run-dir or ${ENV_RUN_DIR})", file=sys.stderr)
        return USAGE_EXIT
    clients = None
    if config.clients == "endpoint":
        if not config.policy_endpoint:
            print("error: endpoint clients need policy_endpoint", file=sys.stderr)
            return USAGE_EXIT
        transport = EndpointPolicyClient(config.policy_endpoint)
        clients = PolicyClients(
            generator=EndpointGenerator(transport, config.candidate_entry_command),
            solver=EndpointSolver(transport),
            reviewer=EndpointReviewer(transport),
        )
    reports, final_digest = loop_mod.run(config, run_dir, clients)
    last = reports[-1] if reports else None
    if args.json:
        print(json.dumps({
            "steps": len(reports),
            "final_digest": final_digest,
            "admitted_total": last.admitted_total if last else 0,
            "pool_active": last.pool_active if last else 0,
        }))
    else:
        print(f"run complete: {len(reports)} steps, final ledger digest {final_digest}")
        if last:
            print(f"pool: {last.pool_active} active, {last.pool_retired} retired, "
                  f"{last.prototype_count} tag prototypes, {last.admitted_total} admitted")
    return 0


def _cmd_pool(args) -> int:
    state = pool_mod.load_manifest(args.manifest)
    if args.pool_command == "show":
        if args.json:
            print(json.dumps({
                "step": state.step,
                "active": state.active_ids,
                "fewshot": state.fewshot_ids,
                "seed_share": state.seed_share(),
                "prototypes": len(state.registry.prototypes),
            }))
        else:
            print(f"step {state.step}: {len(state.active)} active, "
                  f"{len(state.retired_ids)} retired, seed share {state.seed_share():.2f}")
            for entry in state.active:
                print(f"  {entry.env_id} origin={entry.origin} epochs={entry.epochs_used} "
                      f"tags={','.join(sorted(entry.tags)) or '-'}")
        return 0
    if args.pool_command == "rotate":
        state.step = args.at_step
        result = pool_mod.rotate(state)
        pool_mod.save_manifest(state, args.manifest)
        print(f"retired {len(result.retired)}: {', '.join(result.retired) or '-'}")
        if result.floor_kept:
            print(f"floor kept: {', '.join(result.floor_kept)}")
        return 0
    if args.pool_command == "export":
        out = args.out or "-"
        payload = Path(args.manifest).read_text()
        if out == "-":
            print(payload)
        else:
            Path(out).write_text(payload)
            print(f"exported to {out}")
        return 0
    print("error: pool needs a subcommand (show|rotate|export)", file=sys.stderr)
    return USAGE_EXIT


def _parse_bool(token: str) -> bool:
    token = token.strip().lower()
    if token in ("1", "true", "yes", "bug", "reject"):
        return True
    if token in ("0", "false", "no", "ok", "accept"):
        return False
    raise ValueError(f"cannot parse boolean {token!r}")


def _cmd_audit_review(args) -> int:
    rows = []
    for line in Path(args.labels).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t") if "\t" in line else line.split()
        truth = _parse_bool(parts[1])
        verdicts = [_parse_bool(v) for v in parts[2:]]
        if not verdicts:
            raise ValueError(f"no verdicts for {parts[0]}")
        rows.append((truth, verdicts))

    def flag_for(rule: str, verdicts: list[bool]) -> bool:
        if rule == "single":
            return verdicts[0]
        if rule == "majority":
            return sum(verdicts) * 2 > len(verdicts)
        if rule == "any_reject":
            return any(verdicts)
        return all(verdicts)

    results = {}
    for rule in AGGREGATION_RULES:
        labels = [(flag_for(rule, verdicts), truth) for truth, verdicts in rows]
        results[rule] = audit(labels)
    if args.json:
        print(json.dumps({
            rule: {"accuracy": a.accuracy, "precision": a.precision, "recall": a.recall,
                   "f1": a.f1, "confusion": [a.tp, a.fp, a.tn, a.fn]}
            for rule, a in results.items()
        }))
    else:
        print(f"{'aggregation':<12} {'acc':>6} {'prec':>6} {'recall':>6} {'f1':>6}   (TP, FP, TN, FN)")
        for rule, a in results.items():
            print(f"{rule:<12} {a.accuracy * 100:>5.1f}% {a.precision * 100:>5.1f}% "
                  f"{a.recall * 100:>5.1f}% {a.f1 * 100:>5.1f}%   ({a.tp}, {a.fp}, {a.tn}, {a.fn})")
    return 0


def _cmd_export_batches(args) -> int:
    batch_dir = Path(args.run_dir) / "batches"
    files = sorted(batch_dir.glob("step-*.jsonl"))
    if not files:
        print(f"error: no batch files under {batch_dir}", file=sys.stderr)
        return ERROR_EXIT
    out = Path(args.out)
    with out.open("w") as sink:
        for path in files:
            sink.write(path.read_text())
    print(f"wrote {out} from {len(files)} step files")
    return 0


def _cmd_ledger(args) -> int:
    if args.ledger_command != "verify":
        print("error: ledger needs a subcommand (verify)", file=sys.stderr)
        return USAGE_EXIT
    result = ledger_mod.verify_file(args.path)
    if args.json:
        print(json.dumps({
            "ok": result.ok, "events": result.events,
            "final_digest": result.final_digest,
            "first_bad_seq": result.first_bad_seq, "detail": result.detail,
        }))
    elif result.ok:
        print(f"ok: {result.events} events, final digest {result.final_digest}")
    else:
        print(f"VIOLATION at seq {result.first_bad_seq}: {result.detail}")
    return 0 if result.ok else ERROR_EXIT


def dispatch(argv: list[str]) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else USAGE_EXIT
    if args.command is None:
        parser.print_help()
        return USAGE_EXIT
    handlers = {
        "validate": _cmd_validate,
        "calibrate": _cmd_calibrate,
        "run": _cmd_run,
        "pool": _cmd_pool,
        "audit-review": _cmd_audit_review,
        "export-batches": _cmd_export_batches,
        "ledger": _cmd_ledger,
    }
    try:
        return handlers[args.command](args)
    except EnvForgeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return ERROR_EXIT
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return ERROR_EXIT


def main() -> None:
    raise SystemExit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
