"""Session state and file-backed persistence.

Each session lives in one JSON file under the sessions directory, written
atomically (temp file + rename). Mutations on one session are serialized by a
per-session lock; distinct sessions proceed concurrently.
"""

import threading
import uuid
from contextlib import contextmanager
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .. import jsonio
from ..agents import AgentTrace, ReActStep, ReportBundle
from ..cbm.types import Prediction
from ..errors import StorageFailure, UnknownSession
from ..providers.types import ChatMessage
from ..store.index import ChunkEmbeddingIndex

SESSION_FORMAT_VERSION = 1


def utc_now_iso() -> str:
    return datetime.now(timezone.utc).isoformat()


@dataclass
class SessionAnalysis:
    concept_set_id: str
    grid_h: int
    grid_w: int
    similarity: np.ndarray  # (T, K): heatmaps derive from this, edits never touch it
    raw: np.ndarray  # (K,) pooled activations
    normalized: np.ndarray  # (K,) current scores, overrides applied
    overrides: dict[str, float] = field(default_factory=dict)
    prediction: Prediction | None = None


@dataclass
class Session:
    id: str
    created_at: str
    updated_at: str
    image_ref: str | None = None
    image_media_type: str | None = None
    analysis: SessionAnalysis | None = None
    report: ReportBundle | None = None
    chat_history: list[ChatMessage] = field(default_factory=list)
    last_chat_prompt: list[ChatMessage] | None = None


def _prediction_to_dict(prediction: Prediction) -> dict:
    return {
        "logits": [float(v) for v in prediction.logits],
        "probabilities": [float(v) for v in prediction.probabilities],
        "predicted_label": prediction.predicted_label,
    }


def _prediction_from_dict(data: dict) -> Prediction:
    return Prediction(
        logits=np.asarray(data["logits"], dtype=np.float64),
        probabilities=np.asarray(data["probabilities"], dtype=np.float64),
        predicted_label=data["predicted_label"],
    )


def session_to_dict(session: Session) -> dict:
    analysis = None
    if session.analysis is not None:
        a = session.analysis
        analysis = {
            "concept_set_id": a.concept_set_id,
            "grid_h": a.grid_h,
            "grid_w": a.grid_w,
            "similarity": [[float(v) for v in row] for row in a.similarity],
            "raw": [float(v) for v in a.raw],
            "normalized": [float(v) for v in a.normalized],
            "overrides": {k: float(v) for k, v in a.overrides.items()},
            "prediction": _prediction_to_dict(a.prediction) if a.prediction else None,
        }
    return {
        "format_version": SESSION_FORMAT_VERSION,
        "id": session.id,
        "created_at": session.created_at,
        "updated_at": session.updated_at,
        "image_ref": session.image_ref,
        "image_media_type": session.image_media_type,
        "analysis": analysis,
        "report": session.report.to_dict() if session.report else None,
        "chat_history": [{"role": m.role, "content": m.content} for m in session.chat_history],
        "last_chat_prompt": (
            [{"role": m.role, "content": m.content} for m in session.last_chat_prompt]
            if session.last_chat_prompt is not None
            else None
        ),
    }


def _report_from_dict(data: dict) -> ReportBundle:
    traces = []
    for t in data.get("traces", []):
        traces.append(
            AgentTrace(
                agent_name=t["agent_name"],
                steps=[
                    ReActStep(
                        thought=s["thought"],
                        action=s.get("action"),
                        action_input=s.get("action_input"),
                        observation=s.get("observation"),
                    )
                    for s in t.get("steps", [])
                ],
                final_answer=t.get("final_answer", ""),
                terminated_by=t.get("terminated_by", "final_answer"),
            )
        )
    return ReportBundle(
        findings=data["findings"],
        diagnosis=data["diagnosis"],
        guidelines=data["guidelines"],
        traces=traces,
        created_at=data.get("created_at", ""),
    )


def session_from_dict(data: dict) -> Session:
    analysis = None
    if data.get("analysis"):
        a = data["analysis"]
        analysis = SessionAnalysis(
            concept_set_id=a["concept_set_id"],
            grid_h=a["grid_h"],
            grid_w=a["grid_w"],
            similarity=np.asarray(a["similarity"], dtype=np.float64),
            raw=np.asarray(a["raw"], dtype=np.float64),
            normalized=np.asarray(a["normalized"], dtype=np.float64),
            overrides=dict(a.get("overrides", {})),
            prediction=_prediction_from_dict(a["prediction"]) if a.get("prediction") else None,
        )
    return Session(
        id=data["id"],
        created_at=data["created_at"],
        updated_at=data["updated_at"],
        image_ref=data.get("image_ref"),
        image_media_type=data.get("image_media_type"),
        analysis=analysis,
        report=_report_from_dict(data["report"]) if data.get("report") else None,
        chat_history=[
            ChatMessage(role=m["role"], content=m["content"])
            for m in data.get("chat_history", [])
        ],
        last_chat_prompt=(
            [ChatMessage(role=m["role"], content=m["content"]) for m in data["last_chat_prompt"]]
            if data.get("last_chat_prompt") is not None
            else None
        ),
    )


class SessionStore:
    """One JSON file per session plus a sibling uploads store file."""

    def __init__(self, directory: Path | str):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self._locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()
        self._uploads: dict[str, ChunkEmbeddingIndex] = {}

    def _lock_for(self, session_id: str) -> threading.Lock:
        with self._locks_guard:
            return self._locks.setdefault(session_id, threading.Lock())

    @contextmanager
    def locked(self, session_id: str):
        lock = self._lock_for(session_id)
        with lock:
            yield

    def _path(self, session_id: str) -> Path:
        return self.directory / f"{session_id}.json"

    def _uploads_path(self, session_id: str) -> Path:
        return self.directory / f"{session_id}.uploads.json"

    def image_path(self, session_id: str, suffix: str) -> Path:
        return self.directory / f"{session_id}.image{suffix}"

    def create(self) -> Session:
        now = utc_now_iso()
        session = Session(id=str(uuid.uuid4()), created_at=now, updated_at=now)
        self.save(session)
        return session

    def get(self, session_id: str) -> Session:
        path = self._path(session_id)
        if not path.exists():
            raise UnknownSession(f"no session {session_id!r}")
        try:
            return session_from_dict(jsonio.load_file(path))
        except (OSError, ValueError, KeyError) as exc:
            raise StorageFailure(f"cannot load session {session_id!r}: {exc}") from exc

    def save(self, session: Session) -> None:
        session.updated_at = utc_now_iso()
        try:
            jsonio.dump_file(session_to_dict(session), self._path(session.id))
        except OSError as exc:
            raise StorageFailure(f"cannot persist session {session.id!r}: {exc}") from exc

    def exists(self, session_id: str) -> bool:
        return self._path(session_id).exists()

    def uploads_index(self, session_id: str) -> ChunkEmbeddingIndex:
        """The session's user_uploads store, loaded from disk on first touch."""
        if session_id not in self._uploads:
            path = self._uploads_path(session_id)
            if path.exists():
                index = ChunkEmbeddingIndex.load(path)
                index.store_id = "user_uploads"
            else:
                index = ChunkEmbeddingIndex("user_uploads")
            self._uploads[session_id] = index
        return self._uploads[session_id]

    def uploads_path(self, session_id: str) -> Path:
        return self._uploads_path(session_id)
