"""``floorgraph generate|train|predict|eval``.

Exit codes: 0 success, 2 usage, 3 data error, 4 model error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict

from floorgraph import modelfile
from floorgraph.dataset import Dataset, iter_jsonl, load_jsonl, split, write_jsonl
from floorgraph.eline import TrainConfig
from floorgraph.errors import DataError, ModelError, OutsideBuilding
from floorgraph.graph import WeightConfig
from floorgraph.pipeline import fit, keep_macs
from floorgraph.predict_eval import EvalReport
from floorgraph.synthgen import BuildingSpec, generate

log = logging.getLogger("floorgraph")

EXIT_USAGE, EXIT_DATA, EXIT_MODEL = 2, 3, 4


class StageError(Exception):
    def __init__(self, stage: str, exc: Exception):
        self.stage, self.exc = stage, exc
        super().__init__(f"[{stage}] {type(exc).__name__}: {exc}")


def _stage(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except (DataError, ModelError, OSError, ValueError) as exc:
        raise StageError(name, exc) from exc


def _write_report(report: EvalReport, path: str | None) -> None:
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(report.to_dict(), fh, indent=2)
    print(f"micro-F {report.micro_f:.4f}  macro-F {report.macro_f:.4f}  ({report.n_records} records)")


def cmd_generate(args) -> None:
    spec = BuildingSpec(
        floors=args.floors,
        aps_per_floor=args.aps_per_floor,
        records_per_floor=args.records_per_floor,
        floor_height_m=args.floor_height,
        floor_attenuation_db=args.floor_attenuation,
        path_loss_exponent=args.path_loss_exponent,
        tx_power_dbm=args.tx_power,
        noise_sigma_db=args.noise_sigma,
        detection_threshold_dbm=args.threshold,
        max_aps_per_scan=args.max_aps,
        seed=args.seed,
    )
    dataset = _stage("generate", generate, spec)
    _stage("write", write_jsonl, dataset, args.out)
    log.info("wrote %d records to %s", len(dataset), args.out)


def cmd_train(args) -> None:
    dataset = _stage("load", load_jsonl, args.data)
    train_set, test_set = _stage(
        "split", split, dataset, args.train_frac, args.labels_per_floor, args.seed
    )
    weight_config = WeightConfig("power" if args.weight == "power" else "offset", args.alpha)
    train_config = TrainConfig(
        dim=args.dim,
        learning_rate=args.lr,
        dropout_rate=args.dropout,
        negatives_k=args.neg,
        samples_per_edge=args.samples_per_edge,
        mode="line2" if args.mode == "line2" else "eline",
        lr_decay=args.lr_decay,
        seed=args.seed,
    )
    model, train_report = _stage("train", fit, train_set, weight_config, train_config)
    log.info("trained on %d records in %.1fs", len(train_set), train_report.wall_time)
    _stage("save", modelfile.save, model, args.model)
    if args.test_out:
        _stage("write", write_jsonl, test_set, args.test_out)
    if len(test_set):
        report = _stage("evaluate", model.evaluate, test_set.records)
        _write_report(report, args.report)


def _read_scans(source: str):
    if source == "-":
        return list(iter_jsonl(sys.stdin))
    with open(source, encoding="utf-8") as fh:
        return list(iter_jsonl(fh))


def _threads() -> int:
    return int(os.environ.get("FLOORGRAPH_THREADS", "0") or 0)


def cmd_predict(args) -> None:
    model = _stage("load-model", modelfile.load, args.model)
    records = _stage("load", _read_scans, args.scan)

    def one(record):
        try:
            p = model.predict(record)
        except OutsideBuilding:
            return {"record_id": record.record_id, "error": "outside_building"}
        return {
            "record_id": p.record_id,
            "floor": p.floor_label,
            "distance": p.distance,
            "margin": p.runner_up_margin,
        }

    workers = _threads()
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(one, records))
    else:
        results = [one(r) for r in records]
    out = open(args.out, "w", encoding="utf-8") if args.out else sys.stdout
    try:
        for row in results:
            out.write(json.dumps(row) + "\n")
    finally:
        if args.out:
            out.close()


def cmd_eval(args) -> None:
    model = _stage("load-model", modelfile.load, args.model)
    data: Dataset = _stage("load", load_jsonl, args.data)
    unlabeled = [r.record_id for r in data if r.floor_label is None]
    if unlabeled:
        raise StageError("load", DataError(f"{len(unlabeled)} records lack a floor label"))
    keep = None
    if args.mac_keep_fraction < 1.0:
        keep = _stage("filter", keep_macs, model, args.mac_keep_fraction, args.seed)
    report = _stage("evaluate", model.evaluate, data.records, keep)
    _write_report(report, args.report)


def _fraction(text: str) -> float:
    value = float(text)
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"{text} is not in [0, 1]")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="floorgraph", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    d = BuildingSpec()
    g = sub.add_parser("generate", help="write a synthetic building as JSONL")
    g.add_argument("--floors", type=int, default=d.floors)
    g.add_argument("--aps-per-floor", type=int, default=d.aps_per_floor)
    g.add_argument("--records-per-floor", type=int, default=d.records_per_floor)
    g.add_argument("--floor-height", type=float, default=d.floor_height_m)
    g.add_argument("--floor-attenuation", type=float, default=d.floor_attenuation_db)
    g.add_argument("--path-loss-exponent", type=float, default=d.path_loss_exponent)
    g.add_argument("--tx-power", type=float, default=d.tx_power_dbm)
    g.add_argument("--noise-sigma", type=float, default=d.noise_sigma_db)
    g.add_argument("--threshold", type=float, default=d.detection_threshold_dbm)
    g.add_argument("--max-aps", type=int, default=d.max_aps_per_scan)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_generate)

    t = sub.add_parser("train", help="split, train, cluster, and score the held-out part")
    t.add_argument("--data", required=True)
    t.add_argument("--labels-per-floor", type=int, default=4)
    t.add_argument("--train-frac", type=float, default=0.7)
    t.add_argument("--dim", type=int, default=8)
    t.add_argument("--lr", type=float, default=0.001)
    t.add_argument("--dropout", type=float, default=0.1)
    t.add_argument("--neg", type=int, default=5)
    t.add_argument("--samples-per-edge", type=int, default=100)
    t.add_argument("--lr-decay", choices=("constant", "linear"), default="constant")
    t.add_argument("--mode", choices=("eline", "line2"), default="eline")
    t.add_argument("--alpha", type=float, default=120.0)
    t.add_argument("--weight", choices=("offset", "power"), default="offset")
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--model", required=True)
    t.add_argument("--report", help="held-out EvalReport JSON path")
    t.add_argument("--test-out", help="write the held-out split as JSONL")
    t.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="predict floors for scans")
    p.add_argument("--model", required=True)
    p.add_argument("--scan", default="-", help="JSONL path, or - for stdin")
    p.add_argument("--out", help="output path (default stdout)")
    p.set_defaults(func=cmd_predict)

    e = sub.add_parser("eval", help="score a model on labeled scans")
    e.add_argument("--model", required=True)
    e.add_argument("--data", required=True)
    e.add_argument("--report")
    e.add_argument("--mac-keep-fraction", type=_fraction, default=1.0)
    e.add_argument("--seed", type=int, default=0)
    e.set_defaults(func=cmd_eval)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        args.func(args)
    except StageError as err:
        print(f"floorgraph: {err}", file=sys.stderr)
        if isinstance(err.exc, ValueError):
            return EXIT_USAGE
        return EXIT_MODEL if isinstance(err.exc, ModelError) else EXIT_DATA
    return 0


if __name__ == "__main__":
    sys.exit(main())
