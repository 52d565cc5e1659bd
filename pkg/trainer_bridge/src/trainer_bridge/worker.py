"""Wire-protocol server: one JSON object per line over stdin/stdout.

  <- {"type":"hello","protocol":1}      -> echoed back
  <- {"id":N,"type":"evaluate","arch":...,"epochs":E,"seed":S}
  -> {"id":N,"status":"ok","val_acc":A,"params":P,"wall_time":T}
  -> {"id":N,"status":"error","message":M}   (per-request failures only)
  <- {"type":"shutdown"}                 -> exits

One request at a time per process; spawn several workers to parallelize.
Diagnostics go to stderr, never stdout.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass

import torch

from .data import load, train_val_split
from .net import build_network, parameter_count
from .train import train_and_validate

PROTOCOL_VERSION = 1


@dataclass(frozen=True)
class WorkerConfig:
    dataset: str = "synthetic"
    data_dir: str | None = None
    subset_size: int = 5000
    val_fraction: float = 0.10
    device: str = "auto"
    batch_size: int = 64
    lr: float = 0.025
    momentum: float = 0.9
    weight_decay: float = 3e-4
    num_stages: int = 3
    data_seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.val_fraction < 1.0:
            raise ValueError("val_fraction must be in (0, 1)")
        if self.subset_size < self.batch_size:
            raise ValueError("subset_size must be at least one batch")

    def resolved_device(self) -> str:
        if self.device != "auto":
            return self.device
        return "cuda" if torch.cuda.is_available() else "cpu"


def _handle_evaluate(request: dict, config: WorkerConfig, datasets) -> dict:
    arch = request["arch"]
    epochs = int(request["epochs"])
    seed = int(request.get("seed", 0))
    if epochs < 1:
        raise ValueError(f"epochs must be >= 1, got {epochs}")
    torch.manual_seed(seed)  # weight init happens at build time
    model = build_network(arch, in_channels=1, num_stages=config.num_stages)
    params = parameter_count(model)
    train_data, val_data = datasets
    val_acc, wall = train_and_validate(
        model, train_data, val_data, epochs, seed,
        device=config.resolved_device(), batch_size=config.batch_size,
        lr=config.lr, momentum=config.momentum, weight_decay=config.weight_decay,
    )
    return {"id": request["id"], "status": "ok", "val_acc": val_acc,
            "params": params, "wall_time": wall}


def serve(stdin, stdout, config: WorkerConfig) -> None:
    def reply(obj: dict) -> None:
        stdout.write(json.dumps(obj, separators=(",", ":")) + "\n")
        stdout.flush()

    line = stdin.readline()
    if not line:
        return
    try:
        hello = json.loads(line)
    except json.JSONDecodeError:
        print(f"worker: bad handshake line {line!r}", file=sys.stderr)
        return
    if hello.get("type") != "hello":
        print(f"worker: expected hello, got {hello!r}", file=sys.stderr)
        return
    reply({"type": "hello", "protocol": PROTOCOL_VERSION})

    images, labels = load(config.subset_size, seed=config.data_seed,
                          cache_dir=config.data_dir, name=config.dataset)
    datasets = train_val_split(images, labels, config.val_fraction)
    print(f"worker: serving on {config.resolved_device()} "
          f"({len(datasets[0][1])} train / {len(datasets[1][1])} val)", file=sys.stderr)

    for line in stdin:
        try:
            request = json.loads(line)
        except json.JSONDecodeError:
            reply({"id": -1, "status": "error", "message": f"invalid JSON: {line.strip()!r}"})
            continue
        kind = request.get("type")
        if kind == "shutdown":
            print("worker: shutdown", file=sys.stderr)
            return
        if kind != "evaluate" or "id" not in request:
            reply({"id": request.get("id", -1), "status": "error",
                   "message": f"unsupported request: {kind!r}"})
            continue
        try:
            reply(_handle_evaluate(request, config, datasets))
        except Exception as exc:  # keep the stream alive for the next request
            reply({"id": request["id"], "status": "error", "message": str(exc)})


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="gnas-worker", description=__doc__)
    parser.add_argument("--dataset", default="synthetic")
    parser.add_argument("--data-dir", default=None,
                        help="dataset cache directory (default: $GNAS_DATA_DIR or ./gnas_data)")
    parser.add_argument("--subset-size", type=int, default=5000)
    parser.add_argument("--val-fraction", type=float, default=0.10)
    parser.add_argument("--device", default="auto")
    parser.add_argument("--batch-size", type=int, default=64)
    parser.add_argument("--num-stages", type=int, default=3)
    parser.add_argument("--data-seed", type=int, default=0)
    parser.add_argument("--threads", type=int, default=0,
                        help="torch CPU threads (0 keeps the default)")
    args = parser.parse_args(argv)
    if args.threads > 0:
        torch.set_num_threads(args.threads)
    config = WorkerConfig(
        dataset=args.dataset, data_dir=args.data_dir, subset_size=args.subset_size,
        val_fraction=args.val_fraction, device=args.device, batch_size=args.batch_size,
        num_stages=args.num_stages, data_seed=args.data_seed,
    )
    serve(sys.stdin, sys.stdout, config)
    return 0


if __name__ == "__main__":
    sys.exit(main())
