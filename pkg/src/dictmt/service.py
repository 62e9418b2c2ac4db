"""HTTP service backing the human-translation study workbench.

The engine exposes dictionary search, corpus search, session management,
and gated LLM suggestions over a versioned /v1/ API.  Sessions draw their
instance order and condition assignment (human-only vs human+llm,
alternating) deterministically from a seed.  Every user action appends one
line to a per-session JSONL event log with a server-side epoch-millisecond
timestamp (monotone within the session); the session summary is computed
purely by folding that log, so replaying the file reproduces it exactly.

Timestamps come from an injectable clock so tests can script timelines.
Dictionary and corpus searches are attributed to a session via the
X-Session-Id / X-Instance-Id request headers; without them the search is
anonymous and unlogged.

No ``from __future__ import annotations`` here: route signatures must carry
real (non-string) annotations for the request-body models to be resolved.
"""

import json
import threading
import time
import uuid
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

from . import metrics, prompting, retrieve, segment, store
from .llm import LlmClient, LlmError
from .llm import LlmRequest
from .pipeline import Resources, RunConfig, make_client, build_instance_prompt, _side_text

EVENT_KINDS = ("open", "word-search", "corpus-search", "llm-view", "edit", "submit")
CONDITIONS = ("human+llm", "human-only")


class ServiceError(Exception):
    status = 400


class NotFoundError(ServiceError):
    status = 404


class ForbiddenError(ServiceError):
    status = 403


class ConflictError(ServiceError):
    status = 409


class InvalidError(ServiceError):
    status = 422


@dataclass(frozen=True)
class ActionEvent:
    session_id: str
    instance_id: int | None
    kind: str
    ts_ms: int
    language: str | None = None
    payload: dict | None = None

    def to_dict(self) -> dict:
        return {
            "session_id": self.session_id,
            "instance_id": self.instance_id,
            "kind": self.kind,
            "ts_ms": self.ts_ms,
            "language": self.language,
            "payload": self.payload,
        }


class StudyEngine:
    """All service behavior, HTTP-free (the FastAPI layer is a thin shim)."""

    def __init__(
        self,
        res: Resources,
        data_dir: str | Path,
        clock: Callable[[], int] | None = None,
        client: LlmClient | None = None,
    ) -> None:
        if res.test is None:
            raise store.DataError("service config names no test set")
        self.res = res
        self.cfg = res.cfg
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self.clock = clock or (lambda: int(time.time() * 1000))
        self.client = client or make_client(res.cfg)
        self._lock = threading.Lock()
        self._last_ts: dict[str, int] = {}
        self._suggestions: dict[tuple[str, int], dict] = {}
        self._reverse_dict: store.BilingualDictionary | None = None
        self._tgt_index: retrieve.Bm25Index | None = None
        self.query_side = res.cfg.query_side()

    # -- storage ------------------------------------------------------

    def _meta_path(self, sid: str) -> Path:
        return self.data_dir / f"{sid}.json"

    def _events_path(self, sid: str) -> Path:
        return self.data_dir / f"{sid}.events.jsonl"

    def _load_meta(self, sid: str) -> dict:
        path = self._meta_path(sid)
        if not path.is_file():
            raise NotFoundError(f"no such session: {sid}")
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)

    def _read_events(self, sid: str) -> list[ActionEvent]:
        path = self._events_path(sid)
        if not path.is_file():
            return []
        events = []
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                if not line.strip():
                    continue
                raw = json.loads(line)
                events.append(
                    ActionEvent(
                        session_id=raw["session_id"],
                        instance_id=raw["instance_id"],
                        kind=raw["kind"],
                        ts_ms=raw["ts_ms"],
                        language=raw.get("language"),
                        payload=raw.get("payload"),
                    )
                )
        return events

    def _stamp(self, sid: str) -> int:
        ts = int(self.clock())
        last = self._last_ts.get(sid)
        if last is not None and ts < last:
            ts = last
        self._last_ts[sid] = ts
        return ts

    def _append_event(
        self,
        sid: str,
        kind: str,
        instance_id: int | None,
        language: str | None = None,
        payload: dict | None = None,
    ) -> ActionEvent:
        if kind not in EVENT_KINDS:
            raise InvalidError(f"unknown event kind {kind!r}")
        with self._lock:
            ev = ActionEvent(
                session_id=sid,
                instance_id=instance_id,
                kind=kind,
                ts_ms=self._stamp(sid),
                language=language,
                payload=payload,
            )
            with open(self._events_path(sid), "a", encoding="utf-8") as fh:
                fh.write(json.dumps(ev.to_dict(), ensure_ascii=False) + "\n")
        return ev

    # -- search -------------------------------------------------------

    def _dict_for_lang(self, lang: str) -> store.BilingualDictionary:
        if lang == self.cfg.direction[0]:
            return self.res.dictionary
        if lang == self.cfg.direction[1]:
            if self._reverse_dict is None:
                self._reverse_dict = store.reverse_dictionary(self.res.dictionary)
            return self._reverse_dict
        raise InvalidError(
            f"lang must be one of {self.cfg.direction}, got {lang!r}"
        )

    def dict_search(self, q: str, lang: str, limit: int = 20) -> list[dict]:
        """Exact entry first, then maximum-matching related words, then
        prefix matches, capped at ``limit`` rows."""
        if not q.strip():
            raise InvalidError("empty query")
        d = self._dict_for_lang(lang)
        q = q.strip()
        rows: list[dict] = []
        listed: set[str] = set()

        def add(headword: str, match: str) -> None:
            entry = d.lookup(headword)
            if entry is None or headword in listed:
                return
            listed.add(headword)
            rows.append(
                {
                    "headword": entry.headword,
                    "match": match,
                    "senses": [
                        {"text": s.text, "provenance": s.provenance, "score": s.score}
                        for s in entry.senses
                    ],
                    "pos": entry.pos,
                }
            )

        exact = d.lookup(q) or d.lookup(q.casefold())
        if exact is not None:
            add(exact.headword, "exact")
        else:
            for m in segment.fuzzy_lookup(q.casefold(), d).matches:
                add(m.headword, "fuzzy")
        for headword in d.headwords():
            if len(rows) >= limit:
                break
            if headword.startswith(q) and headword not in listed:
                add(headword, "prefix")
        return rows[:limit]

    def _corpus_index(self, side: str) -> retrieve.Bm25Index:
        if side not in ("src", "tgt"):
            raise InvalidError(f"side must be 'src' or 'tgt', got {side!r}")
        if side == self.query_side:
            return self.res.bm25
        if self._tgt_index is None:
            lang = (
                self.cfg.corpus_langs[0] if side == "src" else self.cfg.corpus_langs[1]
            )
            d = None
            if lang in segment.SPACELESS_LANGS:
                d = self._dict_for_lang(lang) if lang in self.cfg.direction else None
            self._tgt_index = retrieve.build_bm25(
                self.res.corpus, side=side, lang=lang, d=d, k1=self.cfg.k1, b=self.cfg.b
            )
        return self._tgt_index

    def corpus_search(self, q: str, side: str = "src", k: int = 5) -> list[dict]:
        if not q.strip():
            raise InvalidError("empty query")
        if k < 1:
            raise InvalidError("k must be >= 1")
        index = self._corpus_index(side)
        hits = retrieve.bm25_topk(index, q.strip(), k)
        return [
            {"id": p.id, "src": p.src, "tgt": p.tgt, "tag": p.tag, "score": score}
            for p, score in hits.items
        ]

    def side_lang(self, side: str) -> str:
        return self.cfg.corpus_langs[0] if side == "src" else self.cfg.corpus_langs[1]

    # -- sessions -----------------------------------------------------

    def create_session(self, participant_id: str, seed: int | None = None) -> dict:
        if not participant_id.strip():
            raise InvalidError("participant_id must be non-empty")
        if seed is None:
            seed = int.from_bytes(
                participant_id.strip().encode("utf-8")[:8].ljust(8, b"\0"), "big"
            )
        assert self.res.test is not None
        ids = [p.id for p in self.res.test]
        rng = random.Random(seed)
        order = rng.sample(ids, len(ids))
        anchor = rng.randrange(2)
        instances = [
            {"id": iid, "condition": CONDITIONS[(anchor + i) % 2]}
            for i, iid in enumerate(order)
        ]
        sid = uuid.uuid4().hex
        meta = {
            "session_id": sid,
            "participant_id": participant_id.strip(),
            "seed": seed,
            "direction": list(self.cfg.direction),
            "instances": instances,
            "created_ms": self._stamp(sid),
        }
        with open(self._meta_path(sid), "w", encoding="utf-8") as fh:
            json.dump(meta, fh, ensure_ascii=False, indent=2)
        return meta

    def _condition_of(self, meta: dict, instance_id: int) -> str:
        for row in meta["instances"]:
            if row["id"] == instance_id:
                return row["condition"]
        raise NotFoundError(f"instance {instance_id} not in session")

    def _submitted_ids(self, events: list[ActionEvent]) -> set[int]:
        return {
            e.instance_id
            for e in events
            if e.kind == "submit" and e.instance_id is not None
        }

    def _current_instance(self, meta: dict, events: list[ActionEvent]) -> dict | None:
        done = self._submitted_ids(events)
        for row in meta["instances"]:
            if row["id"] not in done:
                return row
        return None

    def next_instance(self, sid: str) -> dict:
        """The first unsubmitted instance, with its gloss panel; logs an
        "open" event the first time each instance is served."""
        meta = self._load_meta(sid)
        events = self._read_events(sid)
        row = self._current_instance(meta, events)
        if row is None:
            return {"done": True, "total": len(meta["instances"])}
        assert self.res.test is not None
        inst = self.res.test.by_id(row["id"])
        assert inst is not None
        query = _side_text(inst, self.query_side)
        glosses = prompting.gloss_sentence(
            query, self.res.dictionary, self.cfg.prompt
        )
        opened = any(
            e.kind == "open" and e.instance_id == row["id"] for e in events
        )
        if not opened:
            self._append_event(sid, "open", row["id"])
        done = self._submitted_ids(events)
        return {
            "done": False,
            "instance_id": row["id"],
            "condition": row["condition"],
            "source": query,
            "src_lang": self.cfg.direction[0],
            "tgt_lang": self.cfg.direction[1],
            "index": len(done),
            "total": len(meta["instances"]),
            "glosses": [
                {
                    "surface": g.surface,
                    "kind": g.kind,
                    "covered": g.covered,
                    "glosses": [{"text": t, "origin": o} for t, o in g.glosses],
                }
                for g in glosses
            ],
        }

    def log_event(
        self,
        sid: str,
        kind: str,
        instance_id: int | None,
        language: str | None = None,
        payload: dict | None = None,
    ) -> dict:
        meta = self._load_meta(sid)
        if instance_id is not None:
            self._condition_of(meta, instance_id)  # 404 for foreign ids
        if kind == "submit":
            raise InvalidError("use the submit endpoint for submissions")
        ev = self._append_event(sid, kind, instance_id, language, payload)
        return {"ok": True, "ts_ms": ev.ts_ms}

    def submit(self, sid: str, instance_id: int, text: str) -> dict:
        if not text.strip():
            raise InvalidError("submission text must be non-empty")
        meta = self._load_meta(sid)
        events = self._read_events(sid)
        row = self._current_instance(meta, events)
        if row is None:
            raise ConflictError("session already complete")
        if row["id"] != instance_id:
            raise ConflictError(
                f"instance {instance_id} is not current (expected {row['id']})"
            )
        ev = self._append_event(sid, "submit", instance_id, payload={"text": text})
        remaining = (
            len(meta["instances"]) - len(self._submitted_ids(events)) - 1
        )
        return {"ok": True, "ts_ms": ev.ts_ms, "remaining": remaining}

    def suggest(self, sid: str, instance_id: int) -> dict:
        """LLM suggestion for a human+llm instance; repeated views replay
        the cached text.  Every view is logged."""
        meta = self._load_meta(sid)
        condition = self._condition_of(meta, instance_id)
        if condition != "human+llm":
            raise ForbiddenError(
                f"instance {instance_id} is {condition}; suggestions are disabled"
            )
        key = (sid, instance_id)
        cached = self._suggestions.get(key)
        if cached is None:
            assert self.res.test is not None
            inst = self.res.test.by_id(instance_id)
            if inst is None:
                raise NotFoundError(f"no such instance: {instance_id}")
            query = _side_text(inst, self.query_side)
            spec = build_instance_prompt(self.res, query, instance_id)
            try:
                resp = self.client.complete(
                    LlmRequest(
                        prompt=spec.text,
                        model=self.cfg.model,
                        max_tokens=self.cfg.max_tokens,
                    )
                )
            except LlmError as exc:
                raise ServiceError(f"suggestion backend failed: {exc}") from exc
            cached = {"text": resp.text, "coverage": spec.coverage}
            self._suggestions[key] = cached
        self._append_event(
            sid, "llm-view", instance_id, payload={"chars": len(cached["text"])}
        )
        return dict(cached)

    # -- summary ------------------------------------------------------

    def summary(self, sid: str) -> dict:
        """Pure fold over the event log (plus the immutable session meta)."""
        meta = self._load_meta(sid)
        events = self._read_events(sid)
        return fold_summary(meta, events, self._refs(), self.cfg)

    def _refs(self) -> dict[int, str]:
        assert self.res.test is not None
        ref_side = self.cfg.ref_side()
        return {p.id: _side_text(p, ref_side) for p in self.res.test}


def fold_summary(
    meta: dict,
    events: list[ActionEvent],
    refs: dict[int, str] | None = None,
    cfg: RunConfig | None = None,
) -> dict:
    """Aggregate a session's event log into the study summary.

    Per instance: elapsed time (first open to last submit), action counts,
    and the submitted text.  Totals count events by kind, word searches by
    language; per-condition mean elapsed covers submitted instances only.
    When references are supplied, submitted texts are scored.
    """
    per: dict[int, dict] = {}
    for row in meta["instances"]:
        per[row["id"]] = {
            "instance_id": row["id"],
            "condition": row["condition"],
            "opened_ms": None,
            "submitted_ms": None,
            "elapsed_ms": None,
            "text": None,
            "counts": {k: 0 for k in EVENT_KINDS},
            "word_searches_by_language": {},
        }
    totals = {k: 0 for k in EVENT_KINDS}
    word_by_lang: dict[str, int] = {}
    for e in events:
        totals[e.kind] = totals.get(e.kind, 0) + 1
        if e.kind == "word-search" and e.language:
            word_by_lang[e.language] = word_by_lang.get(e.language, 0) + 1
        if e.instance_id is None or e.instance_id not in per:
            continue
        row = per[e.instance_id]
        row["counts"][e.kind] = row["counts"].get(e.kind, 0) + 1
        if e.kind == "open" and row["opened_ms"] is None:
            row["opened_ms"] = e.ts_ms
        if e.kind == "submit":
            row["submitted_ms"] = e.ts_ms
            row["text"] = (e.payload or {}).get("text")
        if e.kind == "word-search" and e.language:
            by_lang = row["word_searches_by_language"]
            by_lang[e.language] = by_lang.get(e.language, 0) + 1

    for row in per.values():
        if row["opened_ms"] is not None and row["submitted_ms"] is not None:
            row["elapsed_ms"] = row["submitted_ms"] - row["opened_ms"]

    mean_elapsed: dict[str, float | None] = {}
    for condition in CONDITIONS:
        vals = [
            r["elapsed_ms"]
            for r in per.values()
            if r["condition"] == condition and r["elapsed_ms"] is not None
        ]
        mean_elapsed[condition] = sum(vals) / len(vals) if vals else None

    report = None
    if refs:
        scored = [
            (r["text"], refs[r["instance_id"]], None)
            for r in per.values()
            if r["text"] is not None and r["instance_id"] in refs
        ]
        if scored:
            tokenization = "intl"
            if cfg is not None and cfg.direction[1] in segment.SPACELESS_LANGS:
                tokenization = "han-aware"
            report = metrics.evaluate(scored, tokenization=tokenization).to_dict()

    ordered = [per[row["id"]] for row in meta["instances"]]
    return {
        "session_id": meta["session_id"],
        "participant_id": meta["participant_id"],
        "instances": ordered,
        "totals": totals,
        "word_searches_by_language": word_by_lang,
        "mean_elapsed_ms": mean_elapsed,
        "submitted": sum(1 for r in ordered if r["text"] is not None),
        "report": report,
    }


def create_app(engine: StudyEngine):
    """FastAPI app over a StudyEngine; imported lazily so library users
    without the service extra never load FastAPI."""
    from fastapi import FastAPI, Request
    from fastapi.middleware.cors import CORSMiddleware
    from fastapi.responses import JSONResponse
    from pydantic import BaseModel

    app = FastAPI(title="dictmt study service", version="1.0")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(ServiceError)
    async def _service_error(_request: Request, exc: ServiceError):
        return JSONResponse(status_code=exc.status, content={"detail": str(exc)})

    def _session_headers(request: Request) -> tuple[str | None, int | None]:
        sid = request.headers.get("X-Session-Id")
        inst = request.headers.get("X-Instance-Id")
        iid = None
        if inst is not None:
            try:
                iid = int(inst)
            except ValueError:
                raise InvalidError(f"bad X-Instance-Id header: {inst!r}")
        return sid, iid

    @app.get("/v1/dict")
    def dict_search(q: str, lang: str, request: Request):
        results = engine.dict_search(q, lang)
        sid, iid = _session_headers(request)
        if sid:
            engine.log_event(
                sid,
                "word-search",
                iid,
                language=lang,
                payload={"query": q, "results": len(results)},
            )
        return {"query": q, "lang": lang, "results": results}

    @app.get("/v1/corpus")
    def corpus_search(q: str, request: Request, side: str = "src", k: int = 5):
        results = engine.corpus_search(q, side, k)
        sid, iid = _session_headers(request)
        if sid:
            engine.log_event(
                sid,
                "corpus-search",
                iid,
                language=engine.side_lang(side),
                payload={"query": q, "side": side, "results": len(results)},
            )
        return {"query": q, "side": side, "results": results}

    class SessionBody(BaseModel):
        participant_id: str
        seed: int | None = None

    @app.post("/v1/session")
    def create_session(body: SessionBody):
        return engine.create_session(body.participant_id, body.seed)

    @app.get("/v1/session/{sid}/next")
    def next_instance(sid: str):
        return engine.next_instance(sid)

    class EventBody(BaseModel):
        kind: str
        instance_id: int | None = None
        language: str | None = None
        payload: dict | None = None

    @app.post("/v1/session/{sid}/event")
    def log_event(sid: str, body: EventBody):
        return engine.log_event(
            sid, body.kind, body.instance_id, body.language, body.payload
        )

    class SubmitBody(BaseModel):
        instance_id: int
        text: str

    @app.post("/v1/session/{sid}/submit")
    def submit(sid: str, body: SubmitBody):
        return engine.submit(sid, body.instance_id, body.text)

    @app.get("/v1/session/{sid}/summary")
    def summary(sid: str):
        return engine.summary(sid)

    class SuggestBody(BaseModel):
        session_id: str
        instance_id: int

    @app.post("/v1/suggest")
    def suggest(body: SuggestBody):
        return engine.suggest(body.session_id, body.instance_id)

    return app
