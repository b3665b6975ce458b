"""HTTP service exposing the pipeline: verify, build, generate, sweep.

All endpoints are stateless apart from a parsed-database cache keyed by
file path.  Requests carry every knob explicitly (seeds included), so a
repeated request is byte-identical in its response.
"""

from __future__ import annotations

import functools
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from . import graph, kernel, metrics, model, search

app = FastAPI(title="atgkit")

METHODS = ("random", "mcts", "mcts_pvn", "bpe")


@functools.lru_cache(maxsize=4)
def _load(db_path: str) -> kernel.Database:
    path = Path(db_path)
    if not path.is_file():
        raise HTTPException(status_code=404,
                            detail=f"database not found: {db_path}")
    try:
        return kernel.parse_database(path.read_text())
    except kernel.MMError as exc:
        raise HTTPException(status_code=422, detail=str(exc))


class VerifyRequest(BaseModel):
    db_path: str
    labels: Optional[list[str]] = None


class VerifyResponse(BaseModel):
    total: int
    verified: int
    failures: list[dict]


class BuildRequest(BaseModel):
    db_path: str
    preset: str = "wb"
    seed: int = 0


class BuildResponse(BaseModel):
    split: dict
    stats: dict


class GenerateRequest(BaseModel):
    db_path: str
    preset: str = "wb"
    method: str = "mcts"
    seed: int = 0
    split_seed: int = 2
    episodes: int = Field(default=100, ge=1)
    generations: int = Field(default=100, ge=1)
    simulations: int = Field(default=100, ge=0)
    max_steps: int = Field(default=32, ge=1)
    c_puct: float = Field(default=0.3, ge=0.0)
    gamma: float = Field(default=0.95, gt=0.0, le=1.0)
    expand: str = "all"
    iterations: int = Field(default=3, ge=1)  # self-play rounds (mcts_pvn)


class GenerateResponse(BaseModel):
    metrics: dict
    curve: list[dict]
    theorems: list[dict]
    mm_text: str


class SweepRequest(GenerateRequest):
    c_values: list[float]


class SweepResponse(BaseModel):
    rows: list[dict]


@app.get("/health")
def health() -> dict:
    return {"status": "ok"}


@app.post("/verify", response_model=VerifyResponse)
def verify(req: VerifyRequest) -> VerifyResponse:
    db = _load(req.db_path)
    report = kernel.verification_report(db, req.labels)
    failures = [e for e in report if not e["ok"]]
    return VerifyResponse(total=len(report),
                          verified=len(report) - len(failures),
                          failures=failures)


@app.post("/build", response_model=BuildResponse)
def build(req: BuildRequest) -> BuildResponse:
    db = _load(req.db_path)
    if req.preset not in graph.PRESETS:
        raise HTTPException(status_code=422,
                            detail=f"unknown preset {req.preset!r}")
    try:
        split = graph.make_split(db, req.preset, seed=req.seed)
    except ValueError as exc:
        raise HTTPException(status_code=422, detail=str(exc))
    return BuildResponse(split=split.to_dict(),
                         stats=graph.split_stats(db, split))


def _config(req: GenerateRequest) -> search.GenerationConfig:
    return search.GenerationConfig(
        max_steps=req.max_steps, generations_per_episode=req.generations,
        episodes=req.episodes, simulations=req.simulations,
        c_puct=req.c_puct, gamma=req.gamma, expand=req.expand, seed=req.seed)


def _generate(db: kernel.Database, split: graph.Split,
              req: GenerateRequest) -> GenerateResponse:
    config = _config(req)
    curve: list[dict] = []
    if req.method == "bpe":
        generated = search.bpe_mine(
            db, list(split.train_library) + list(split.train_problems),
            library=list(split.axioms) + list(split.train_library))
    elif req.method == "mcts_pvn":
        result = model.self_play(db, split, config,
                                 iterations=req.iterations)
        generated = result.generated
        curve = [vars(r) for r in result.curve]
    else:
        generated, records = search.run_episodes(db, split, req.method,
                                                 config)
        curve = [vars(r) for r in records]
    report = metrics.report(
        db, req.preset, "test",
        list(split.axioms) + list(split.test_library),
        list(split.test_problems), generated,
        human=list(split.test_library) + list(split.test_problems))
    mm_text = "".join(
        kernel.emit_theorem(db, thm.frame, thm.proof)
        for thm in generated if thm.proof is not None)
    theorems = [{"label": thm.label,
                 "conclusion": " ".join(thm.frame.conclusion),
                 "hypotheses": [" ".join(e) for _, e
                                in thm.frame.essentials],
                 "episode": thm.episode}
                for thm in generated]
    return GenerateResponse(metrics=report, curve=curve,
                            theorems=theorems, mm_text=mm_text)


def _validate_generate(req: GenerateRequest) -> None:
    if req.method not in METHODS:
        raise HTTPException(status_code=422,
                            detail=f"unknown method {req.method!r}")
    if req.method in ("mcts", "mcts_pvn") and req.simulations < 1:
        raise HTTPException(
            status_code=422,
            detail="--simulations must be >= 1 for MCTS methods")
    if req.expand not in ("all", "best"):
        raise HTTPException(status_code=422,
                            detail=f"unknown expand mode {req.expand!r}")
    if req.preset not in graph.PRESETS:
        raise HTTPException(status_code=422,
                            detail=f"unknown preset {req.preset!r}")


@app.post("/generate", response_model=GenerateResponse)
def generate(req: GenerateRequest) -> GenerateResponse:
    _validate_generate(req)
    db = _load(req.db_path)
    try:
        split = graph.make_split(db, req.preset, seed=req.split_seed)
    except ValueError as exc:
        raise HTTPException(status_code=422, detail=str(exc))
    return _generate(db, split, req)


@app.post("/sweep", response_model=SweepResponse)
def sweep(req: SweepRequest) -> SweepResponse:
    if len(req.c_values) < 2:
        raise HTTPException(status_code=422,
                            detail="sweep requires at least two c values")
    _validate_generate(req)
    db = _load(req.db_path)
    try:
        split = graph.make_split(db, req.preset, seed=req.split_seed)
    except ValueError as exc:
        raise HTTPException(status_code=422, detail=str(exc))
    rows = []
    for c in req.c_values:
        sub = req.model_copy(update={"c_puct": c})
        result = _generate(db, split, sub)
        rows.append({"c_puct": c,
                     "len_LG": result.metrics["len_LG"],
                     "APR": result.metrics["APR"],
                     "precision_pct": result.metrics["precision_pct"]})
    return SweepResponse(rows=rows)
