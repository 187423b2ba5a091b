"""Command-line front end: ``index``, ``simulate``, ``evaluate``, ``report``.

Exit codes: 0 success, 1 validation problem, 2 runtime failure,
3 simulation finished but anomalies exceeded the configured threshold.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import BACKEND_HTTP, BACKEND_SCRIPTED, CampaignConfig, ConfigError
from .corpus import ParseReport
from .index import build_index, load_index, save_index
from .llm import probe_endpoint
from .metrics import (
    SCOPE_INSPECTED,
    SCOPE_JUDGED,
    aggregate_curves,
    information_gain_curve,
    sdcg_curve,
    write_csv,
)
from .session import (
    read_campaign_manifest,
    read_session_log,
    run_campaign,
    write_campaign_manifest,
    write_session_log,
)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2
EXIT_ANOMALIES = 3


def _fail(message: str, code: int) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def _load_config(args) -> CampaignConfig:
    config = CampaignConfig.from_file(args.config)
    if getattr(args, "out", None):
        config.output_dir = Path(args.out)
    if getattr(args, "backend", None):
        config.backend_kind = args.backend
    if getattr(args, "seed", None) is not None:
        config.campaign_seed = args.seed
    return config


def _index_path(config: CampaignConfig) -> Path:
    return config.output_dir / "index.json"


def cmd_index(args) -> int:
    try:
        config = _load_config(args)
    except ConfigError as exc:
        return _fail(str(exc), EXIT_VALIDATION)
    problems = config.validate(simulate=False)
    if problems:
        return _fail("; ".join(problems), EXIT_VALIDATION)
    try:
        report = ParseReport()
        documents = config.load_documents(report)
        index = build_index(documents, stopwords=config.index_stopwords(),
                            stem=config.stem)
        config.output_dir.mkdir(parents=True, exist_ok=True)
        path = _index_path(config)
        save_index(index, path)
    except Exception as exc:
        return _fail(f"indexing failed: {exc}", EXIT_RUNTIME)
    print(f"indexed {index.n_docs} documents into {path}")
    print(f"n_docs={index.n_docs} vocabulary={index.vocabulary_size} "
          f"avg_doc_len={index.avg_doc_len:.2f} skipped={report.skipped}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    try:
        config = _load_config(args)
    except ConfigError as exc:
        return _fail(str(exc), EXIT_VALIDATION)
    problems = config.validate()
    index_path = _index_path(config)
    if not index_path.is_file():
        problems.append(f"index not found at {index_path}; run the index command first")
    if problems:
        return _fail("; ".join(problems), EXIT_VALIDATION)
    if config.backend_kind == BACKEND_HTTP:
        from .llm import BackendConfig
        probe = BackendConfig(endpoint=config.endpoint, model=config.model,
                              timeout=min(config.timeout, 10.0))
        if not probe_endpoint(probe):
            return _fail(f"chat endpoint unreachable: {config.endpoint}", EXIT_RUNTIME)
    try:
        index = load_index(index_path)
        topics = config.load_topics()
        qrels = config.load_qrels()
        backend = config.make_backend()
        logs = run_campaign(topics, config.ordered_users(), index, qrels,
                            policy=config.policy, cost_model=config.cost_model,
                            backend=backend, campaign_seed=config.campaign_seed,
                            workers=args.workers, **config.session_kwargs())
        config_hash = config.semantic_hash()
        logs_dir = config.output_dir / "logs"
        logs_dir.mkdir(parents=True, exist_ok=True)
        for log in logs:
            log.config_hash = config_hash
            write_session_log(log, logs_dir)
        write_campaign_manifest(logs_dir, logs, campaign_seed=config.campaign_seed,
                                config_hash=config_hash)
    except Exception as exc:
        return _fail(f"simulation failed: {exc}", EXIT_RUNTIME)
    anomalies = sum(log.anomaly_count for log in logs)
    print(f"wrote {len(logs)} session logs to {logs_dir} "
          f"(config hash {config_hash[:12]}, {anomalies} anomalies)")
    if anomalies > config.anomaly_threshold:
        print(f"anomaly count {anomalies} exceeds threshold {config.anomaly_threshold}",
              file=sys.stderr)
        return EXIT_ANOMALIES
    return EXIT_OK


def _collect_logs(logs_dir: Path, force: bool):
    manifest = None
    if (logs_dir / "manifest.json").is_file():
        manifest = read_campaign_manifest(logs_dir)
    logs = [read_session_log(p) for p in sorted(logs_dir.glob("*.jsonl"))]
    if not logs:
        raise ConfigError(f"no session logs found in {logs_dir}")
    hashes = {log.config_hash for log in logs}
    if len(hashes) > 1 and not force:
        raise ConfigError(
            "logs come from different campaign configs "
            f"({len(hashes)} distinct hashes); rerun with --force to mix them")
    return logs, manifest


def cmd_evaluate(args) -> int:
    logs_dir = Path(args.logs)
    if not logs_dir.is_dir():
        return _fail(f"logs directory not found: {logs_dir}", EXIT_VALIDATION)
    qrels = None
    if args.qrels:
        qrels_path = Path(args.qrels)
        if not qrels_path.is_file():
            return _fail(f"qrels file not found: {qrels_path}", EXIT_VALIDATION)
        from .corpus import parse_qrels
        qrels = parse_qrels(qrels_path.read_bytes())
    if args.scope == SCOPE_INSPECTED and qrels is None:
        return _fail("--scope inspected needs --qrels", EXIT_VALIDATION)
    try:
        logs, manifest = _collect_logs(logs_dir, args.force)
    except ConfigError as exc:
        return _fail(str(exc), EXIT_VALIDATION)
    except Exception as exc:
        return _fail(f"could not read session logs: {exc}", EXIT_RUNTIME)

    out_dir = Path(args.out) if args.out else logs_dir.parent / "eval"
    raw_dir = out_dir / "raw"
    try:
        raw_dir.mkdir(parents=True, exist_ok=True)
        name = args.name
        by_kind: dict[str, list] = {}
        unjudged_rows = []
        for log in logs:
            ig = information_gain_curve(log)
            sd = sdcg_curve(log, b=args.sdcg_b, bq=args.sdcg_bq,
                            scope=args.scope, qrels=qrels)
            stem = f"{log.topic_id}__{log.user_kind.value}"
            write_csv(raw_dir / f"{stem}.ig.csv", ig.points, ("x", "y"))
            write_csv(raw_dir / f"{stem}.sdcg.csv", sd.points, ("x", "y"))
            by_kind.setdefault(log.user_kind.value, []).append((ig, sd))
            unjudged_rows.append((log.user_kind.value, log.topic_id,
                                  ig.unjudged_relevant_count))
        files = []
        for kind in sorted(by_kind):
            igs = [pair[0] for pair in by_kind[kind]]
            sds = [pair[1] for pair in by_kind[kind]]
            for metric, curves in (("ig", igs), ("sdcg", sds)):
                rows = aggregate_curves(curves)
                filename = f"{name}.{metric}.{kind}.csv"
                write_csv(out_dir / filename, rows, ("x", "mean_y", "n"))
                files.append(filename)
        unjudged_rows.sort()
        write_csv(out_dir / "unjudged_summary.csv", unjudged_rows,
                  ("user_kind", "topic_id", "unjudged_relevant_count"))
        eval_manifest = {
            "record": "evaluation",
            "config_hashes": sorted({log.config_hash for log in logs if log.config_hash}),
            "campaign_seed": manifest.get("campaign_seed") if manifest else None,
            "scope": args.scope,
            "sdcg_b": args.sdcg_b,
            "sdcg_bq": args.sdcg_bq,
            "files": files + ["unjudged_summary.csv"],
        }
        (out_dir / "eval_manifest.json").write_text(
            json.dumps(eval_manifest, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    except Exception as exc:
        return _fail(f"evaluation failed: {exc}", EXIT_RUNTIME)
    print(f"wrote {len(files) + 1} curve files to {out_dir}")
    return EXIT_OK


def cmd_report(args) -> int:
    out_dir = Path(args.eval_dir)
    manifest_path = out_dir / "eval_manifest.json"
    if not manifest_path.is_file():
        return _fail(f"no evaluation manifest in {out_dir}", EXIT_VALIDATION)
    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    rows = []
    for filename in manifest.get("files", []):
        if filename == "unjudged_summary.csv" or not filename.endswith(".csv"):
            continue
        parts = filename[:-4].split(".")
        if len(parts) != 3:
            continue
        _name, metric, kind = parts
        lines = (out_dir / filename).read_text(encoding="utf-8").strip().splitlines()
        final = lines[-1].split(",") if len(lines) > 1 else None
        if final:
            rows.append((kind, metric, float(final[0]), float(final[1])))
    if not rows:
        return _fail(f"no curve files listed in {manifest_path}", EXIT_VALIDATION)
    print(f"{'user':10} {'metric':6} {'final_x':>12} {'final_mean':>12}")
    for kind, metric, x, y in sorted(rows):
        print(f"{kind:10} {metric:6} {x:12.3f} {y:12.4f}")
    unjudged = out_dir / "unjudged_summary.csv"
    if unjudged.is_file():
        total = sum(int(line.rsplit(",", 1)[1])
                    for line in unjudged.read_text().strip().splitlines()[1:])
        print(f"unjudged-but-relevant judgments across sessions: {total}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="searchsim",
        description="Simulate interactive search sessions and evaluate the logs.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_index = sub.add_parser("index", help="parse a collection and build the index")
    p_index.add_argument("--config", required=True)
    p_index.add_argument("--out", help="override the output directory")
    p_index.set_defaults(func=cmd_index)

    p_sim = sub.add_parser("simulate", help="run the configured campaign")
    p_sim.add_argument("--config", required=True)
    p_sim.add_argument("--out", help="override the output directory")
    p_sim.add_argument("--backend", choices=[BACKEND_SCRIPTED, BACKEND_HTTP])
    p_sim.add_argument("--seed", type=int, help="override the campaign seed")
    p_sim.add_argument("--workers", type=int, default=1)
    p_sim.set_defaults(func=cmd_simulate)

    p_eval = sub.add_parser("evaluate", help="compute curves from session logs")
    p_eval.add_argument("--logs", required=True, help="directory of session logs")
    p_eval.add_argument("--out", help="output directory (default: sibling 'eval')")
    p_eval.add_argument("--qrels", help="qrels file, required for --scope inspected")
    p_eval.add_argument("--scope", choices=[SCOPE_JUDGED, SCOPE_INSPECTED],
                        default=SCOPE_JUDGED)
    p_eval.add_argument("--sdcg-b", type=float, default=2.0)
    p_eval.add_argument("--sdcg-bq", type=float, default=4.0)
    p_eval.add_argument("--name", default="campaign", help="prefix for curve files")
    p_eval.add_argument("--force", action="store_true",
                        help="allow logs from mixed campaign configs")
    p_eval.set_defaults(func=cmd_evaluate)

    p_rep = sub.add_parser("report", help="print a summary of an evaluation")
    p_rep.add_argument("eval_dir")
    p_rep.set_defaults(func=cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except KeyboardInterrupt:
        return _fail("interrupted", EXIT_RUNTIME)


if __name__ == "__main__":
    sys.exit(main())
