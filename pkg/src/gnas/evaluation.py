"""Candidate evaluation: the budgeted-training contract, a deterministic
synthetic surrogate, a JSONL-backed result cache, and a client for external
trainer processes speaking newline-delimited JSON.
"""

from __future__ import annotations

import json
import math
import queue
import subprocess
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol

from .arch import Architecture, arch_hash, count_params, to_dict
from .errors import EvalFailed, EvalTimeout, ProtocolError, WorkerDied

PROTOCOL_VERSION = 1

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class EvalRequest:
    """One budgeted training of one candidate."""

    arch: Architecture
    epochs: int
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")


@dataclass(frozen=True)
class EvalResult:
    """Validation accuracy (percent), parameter count, and wall time (s)."""

    val_acc: float
    params: int
    wall_time: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.val_acc <= 100.0:
            raise ValueError(f"val_acc must be in [0, 100], got {self.val_acc}")


class Evaluator(Protocol):
    def evaluate(self, request: EvalRequest) -> EvalResult: ...


def evaluate(request: EvalRequest, evaluator: Evaluator) -> EvalResult:
    """Evaluate one candidate through whichever evaluator the run is using."""
    return evaluator.evaluate(request)


# ---------------------------------------------------------------------------
# Synthetic surrogate
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SurrogateConfig:
    """Constants of the synthetic accuracy model.

    The ceiling grows with parameter count and depth (saturating in both)
    while the learning-curve time constant tau grows with parameter count, so
    bigger networks reach higher ceilings more slowly. sigma scales a
    per-architecture noise term; the curve-shape constants must stay positive.
    """

    a_base: float = 50.0
    a_p: float = 30.0
    p0: float = 1e6
    a_d: float = 10.0
    d0: float = 30.0
    sigma: float = 1.5
    a_floor: float = 10.0
    tau0: float = 5.0
    p_tau: float = 2e6
    seed: int = 0

    def __post_init__(self):
        for name in ("p0", "d0", "tau0", "p_tau"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")
        for name in ("a_p", "a_d", "sigma"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if not 0 <= self.a_floor <= self.a_base:
            raise ValueError("need 0 <= a_floor <= a_base")
        if self.a_base + self.a_p + self.a_d + self.sigma > 100.0:
            raise ValueError("a_base + a_p + a_d + sigma must not exceed 100")


def _splitmix64(z: int) -> int:
    """SplitMix64 finalizer; the standard 64-bit integer mixer."""
    z = (z + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def noise_unit(hash64: int, seed: int) -> float:
    """Deterministic per-architecture noise in [-1, 1), from integer mixing
    only — no RNG library involved, identical on every platform."""
    z = _splitmix64((hash64 ^ _splitmix64(seed & _MASK64)) & _MASK64)
    return (z >> 11) / float(1 << 52) - 1.0


def surrogate_ceiling(params: int, depth: int, u: float, config: SurrogateConfig) -> float:
    """Asymptotic accuracy A_max of the synthetic learning curve."""
    return (
        config.a_base
        + config.a_p * (1.0 - math.exp(-params / config.p0))
        + config.a_d * (1.0 - math.exp(-depth / config.d0))
        + config.sigma * u
    )


def surrogate_accuracy_unclamped(
    arch: Architecture,
    epochs: float,
    config: SurrogateConfig,
    in_channels: int = 3,
    num_stages: int = 3,
) -> float:
    params = count_params(arch, in_channels=in_channels, num_stages=num_stages)
    u = noise_unit(arch_hash(arch), config.seed)
    ceiling = surrogate_ceiling(params, arch.depth, u, config)
    tau = config.tau0 * (1.0 + params / config.p_tau)
    return config.a_floor + (ceiling - config.a_floor) * (1.0 - math.exp(-epochs / tau))


def surrogate_accuracy(
    arch: Architecture,
    epochs: int,
    config: SurrogateConfig,
    in_channels: int = 3,
    num_stages: int = 3,
) -> float:
    """Synthetic validation accuracy in [0, 100], strictly increasing in the
    epoch budget for any fixed architecture."""
    if epochs < 1:
        raise ValueError(f"epochs must be >= 1, got {epochs}")
    acc = surrogate_accuracy_unclamped(arch, epochs, config, in_channels, num_stages)
    return min(100.0, max(0.0, acc))


class SurrogateEvaluator:
    """Pure, instantaneous evaluator backed by the synthetic accuracy model."""

    def __init__(self, config: SurrogateConfig | None = None,
                 in_channels: int = 3, num_stages: int = 3):
        self.config = config if config is not None else SurrogateConfig()
        self.in_channels = in_channels
        self.num_stages = num_stages

    def evaluate(self, request: EvalRequest) -> EvalResult:
        acc = surrogate_accuracy(
            request.arch, request.epochs, self.config,
            in_channels=self.in_channels, num_stages=self.num_stages,
        )
        params = count_params(
            request.arch, in_channels=self.in_channels, num_stages=self.num_stages
        )
        return EvalResult(val_acc=acc, params=params, wall_time=0.0)


# ---------------------------------------------------------------------------
# Result cache
# ---------------------------------------------------------------------------

class EvalCache:
    """(arch_hash, epochs, seed) -> result map with optional append-only JSONL
    persistence. Reads are lock-free; writes are serialized."""

    def __init__(self, path: str | Path | None = None):
        self._store: dict[tuple[int, int, int], tuple[float, int]] = {}
        self._lock = threading.Lock()
        self._path = Path(path) if path is not None else None
        if self._path is not None and self._path.exists():
            with self._path.open() as fh:
                for line in fh:
                    line = line.strip()
                    if not line:
                        continue
                    rec = json.loads(line)
                    key = (int(rec["hash"]), int(rec["epochs"]), int(rec["seed"]))
                    self._store[key] = (float(rec["val_acc"]), int(rec["params"]))

    def __len__(self) -> int:
        return len(self._store)

    def get(self, hash64: int, epochs: int, seed: int) -> EvalResult | None:
        hit = self._store.get((hash64, epochs, seed))
        if hit is None:
            return None
        val_acc, params = hit
        return EvalResult(val_acc=val_acc, params=params, wall_time=0.0)

    def put(self, hash64: int, epochs: int, seed: int, result: EvalResult) -> None:
        with self._lock:
            self._store[(hash64, epochs, seed)] = (result.val_acc, result.params)
            if self._path is not None:
                record = {
                    "hash": hash64,
                    "epochs": epochs,
                    "seed": seed,
                    "val_acc": result.val_acc,
                    "params": result.params,
                }
                with self._path.open("a") as fh:
                    fh.write(json.dumps(record, separators=(",", ":")) + "\n")


class CachingEvaluator:
    """Wraps any evaluator with an EvalCache. Repeated requests are answered
    from the cache with wall_time 0."""

    def __init__(self, inner: Evaluator, cache: EvalCache | None = None,
                 path: str | Path | None = None):
        self.inner = inner
        self.cache = cache if cache is not None else EvalCache(path)

    def evaluate(self, request: EvalRequest) -> EvalResult:
        key = arch_hash(request.arch)
        hit = self.cache.get(key, request.epochs, request.seed)
        if hit is not None:
            return hit
        result = self.inner.evaluate(request)
        self.cache.put(key, request.epochs, request.seed, result)
        return result


# ---------------------------------------------------------------------------
# External worker client
# ---------------------------------------------------------------------------

class ExternalEvaluator:
    """Client for a trainer worker subprocess.

    Wire protocol, one JSON object per line over the worker's stdin/stdout:

      -> {"type":"hello","protocol":1}          <- {"type":"hello","protocol":1}
      -> {"id":N,"type":"evaluate","arch":...,"epochs":E,"seed":S}
      <- {"id":N,"status":"ok","val_acc":A,"params":P,"wall_time":T}
      <- {"id":N,"status":"error","message":M}
      -> {"type":"shutdown"}                    (then streams close)

    Ids increase strictly within a session and at most one request is
    outstanding at a time; run several workers for parallelism.
    """

    def __init__(self, command: list[str], timeout_s: float = 3600.0):
        self.command = list(command)
        self.timeout_s = timeout_s
        self._proc: subprocess.Popen | None = None
        self._lines: queue.Queue = queue.Queue()
        self._next_id = 1
        self._lock = threading.Lock()

    # -- session management

    def _reader(self, stream) -> None:
        for line in stream:
            self._lines.put(line)
        self._lines.put(None)

    def _ensure_started(self) -> None:
        if self._proc is not None:
            return
        try:
            self._proc = subprocess.Popen(
                self.command,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
                bufsize=1,
            )
        except OSError as exc:
            raise WorkerDied(f"failed to start worker {self.command!r}: {exc}") from exc
        threading.Thread(target=self._reader, args=(self._proc.stdout,), daemon=True).start()
        self._send({"type": "hello", "protocol": PROTOCOL_VERSION})
        reply = self._recv()
        if reply.get("type") != "hello" or reply.get("protocol") != PROTOCOL_VERSION:
            raise ProtocolError(f"bad handshake reply: {reply}")

    def _send(self, obj: dict) -> None:
        if self._proc is None or self._proc.stdin is None:
            raise WorkerDied("worker process not running")
        try:
            self._proc.stdin.write(json.dumps(obj, separators=(",", ":")) + "\n")
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise WorkerDied(f"worker stdin closed: {exc}") from exc

    def _recv(self) -> dict:
        try:
            line = self._lines.get(timeout=self.timeout_s)
        except queue.Empty:
            raise EvalTimeout(f"no worker response within {self.timeout_s} s")
        if line is None:
            raise WorkerDied("worker closed its output stream")
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ProtocolError(f"invalid JSON from worker: {line.strip()!r}") from exc
        if not isinstance(obj, dict):
            raise ProtocolError(f"expected a JSON object from worker, got {line.strip()!r}")
        return obj

    def evaluate(self, request: EvalRequest) -> EvalResult:
        with self._lock:
            self._ensure_started()
            req_id = self._next_id
            self._next_id += 1
            self._send({
                "id": req_id,
                "type": "evaluate",
                "arch": to_dict(request.arch),
                "epochs": request.epochs,
                "seed": request.seed,
            })
            reply = self._recv()
        if reply.get("id") != req_id:
            raise ProtocolError(f"response id {reply.get('id')} does not match request id {req_id}")
        status = reply.get("status")
        if status == "error":
            raise EvalFailed(str(reply.get("message", "worker reported an error")))
        if status != "ok":
            raise ProtocolError(f"unknown response status: {reply!r}")
        try:
            return EvalResult(
                val_acc=float(reply["val_acc"]),
                params=int(reply["params"]),
                wall_time=float(reply.get("wall_time", 0.0)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ProtocolError(f"malformed ok response: {reply!r}") from exc

    def shutdown(self, grace_s: float = 10.0) -> None:
        if self._proc is None:
            return
        try:
            self._send({"type": "shutdown"})
            self._proc.stdin.close()
        except (WorkerDied, OSError):
            pass
        try:
            self._proc.wait(timeout=grace_s)
        except subprocess.TimeoutExpired:
            self._proc.kill()
            self._proc.wait()
        self._proc = None

    def __enter__(self) -> "ExternalEvaluator":
        self._ensure_started()
        return self

    def __exit__(self, *exc) -> None:
        self.shutdown()
