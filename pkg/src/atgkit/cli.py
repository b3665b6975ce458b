"""Thin command-line client for the service.

Every subcommand builds a JSON request and posts it to the service --
in-process by default (the app is mounted on an ASGI transport), or to a
remote instance via ``--server``.  Results land as JSON/JSONL/CSV files in
``--out`` and a short summary goes to stdout.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import httpx

from .service import app

DEFAULT_DB = str(Path(__file__).parent / "data" / "prop.mm")


def _client(server: str | None) -> httpx.Client:
    if server:
        return httpx.Client(base_url=server, timeout=None)
    import warnings
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        from fastapi.testclient import TestClient
        client = TestClient(app)
    client.timeout = None
    return client


def _post(client: httpx.Client, path: str, payload: dict) -> dict:
    response = client.post(path, json=payload)
    if response.status_code != 200:
        try:
            detail = response.json().get("detail", response.text)
        except ValueError:
            detail = response.text
        raise SystemExit(f"error: {detail}")
    return response.json()


def _write_json(path: Path, blob) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(blob, indent=2, sort_keys=True) + "\n")


def cmd_verify(args: argparse.Namespace) -> int:
    with _client(args.server) as client:
        payload = {"db_path": args.db}
        if args.labels:
            payload["labels"] = args.labels
        report = _post(client, "/verify", payload)
    if args.out:
        _write_json(Path(args.out) / "verify.json", report)
    print(f"verified {report['verified']}/{report['total']}")
    for failure in report["failures"][:1]:
        print(f"first failure: {failure['label']}: {failure.get('error')}")
    return 0 if report["verified"] == report["total"] else 1


def cmd_build(args: argparse.Namespace) -> int:
    with _client(args.server) as client:
        result = _post(client, "/build", {
            "db_path": args.db, "preset": args.preset, "seed": args.seed})
    out = Path(args.out)
    _write_json(out / "split.json", result["split"])
    stats = result["stats"]
    parts = {k: v for k, v in stats.items() if isinstance(v, dict)}
    columns = sorted({key for entry in parts.values() for key in entry})
    with (out / "stats.csv").open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["part"] + columns)
        for part in sorted(parts):
            writer.writerow([part] + [parts[part].get(k, "")
                                      for k in columns])
    counts = {part: parts[part].get("count") for part in sorted(parts)}
    print(f"split written to {out}: {counts}")
    return 0


def _generate_payload(args: argparse.Namespace) -> dict:
    return {
        "db_path": args.db, "preset": args.preset, "method": args.method,
        "seed": args.seed, "split_seed": args.split_seed,
        "episodes": args.episodes, "generations": args.generations,
        "simulations": args.simulations, "max_steps": args.max_steps,
        "c_puct": args.c_puct, "gamma": args.gamma, "expand": args.expand,
        "iterations": args.iterations,
    }


def cmd_generate(args: argparse.Namespace) -> int:
    with _client(args.server) as client:
        result = _post(client, "/generate", _generate_payload(args))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "metrics.json", result["metrics"])
    with (out / "episodes.jsonl").open("w") as handle:
        for record in result["curve"]:
            handle.write(json.dumps(record, sort_keys=True) + "\n")
    (out / "generated.mm").write_text(result["mm_text"])
    m = result["metrics"]
    print(f"{args.method}/{args.preset}: len_LG={m['len_LG']} "
          f"APR={m['APR']:.2f} precision={m['precision_pct']:.2f}%")
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    if len(args.c_values) < 2:
        raise SystemExit("error: sweep requires at least two --c values")
    payload = _generate_payload(args)
    payload["c_values"] = args.c_values
    with _client(args.server) as client:
        result = _post(client, "/sweep", payload)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with (out / "sweep.csv").open("w", newline="") as handle:
        writer = csv.DictWriter(
            handle, fieldnames=["c_puct", "len_LG", "APR", "precision_pct"])
        writer.writeheader()
        writer.writerows(result["rows"])
    for row in result["rows"]:
        print(f"c={row['c_puct']}: len_LG={row['len_LG']} "
              f"APR={row['APR']:.2f} precision={row['precision_pct']:.2f}%")
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="atgkit", description="Metamath automated theorem generation")
    parser.add_argument("--server", default=None,
                        help="remote service URL (default: in-process)")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--db", default=DEFAULT_DB)
        p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("verify", help="verify all $p proofs")
    common(p)
    p.add_argument("--labels", nargs="*", default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("build", help="write train/test split manifests")
    common(p)
    p.add_argument("--preset", default="wb")
    p.add_argument("--out", default="out/build")
    p.set_defaults(func=cmd_build)

    def generation(p: argparse.ArgumentParser) -> None:
        common(p)
        p.add_argument("--preset", default="wb")
        p.add_argument("--method", default="mcts",
                       choices=["random", "mcts", "mcts_pvn", "bpe"])
        p.add_argument("--split-seed", type=int, default=2)
        p.add_argument("--episodes", type=int, default=100)
        p.add_argument("--generations", type=int, default=100)
        p.add_argument("--simulations", type=int, default=100)
        p.add_argument("--max-steps", type=int, default=32)
        p.add_argument("--c-puct", type=float, default=0.3)
        p.add_argument("--gamma", type=float, default=0.95)
        p.add_argument("--expand", default="all", choices=["all", "best"])
        p.add_argument("--iterations", type=int, default=3,
                       help="self-play rounds for mcts_pvn")

    p = sub.add_parser("generate", help="generate theorems and score them")
    generation(p)
    p.add_argument("--out", default="out/generate")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("sweep", help="compare c_puct values")
    generation(p)
    p.add_argument("--c", dest="c_values", type=float, action="append",
                   default=None, help="c_puct value (repeatable)")
    p.add_argument("--out", default="out/sweep")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "c_values", "absent") is None:
        args.c_values = []
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
