"""Application state and the operations behind the HTTP endpoints.

Holds the loaded classifier, concept set (with embeddings computed once at
startup), knowledge-store catalog, providers, and session store. Endpoint
handlers stay thin; the logic lives here so the CLI can reuse it.
"""

from pathlib import Path
from typing import Callable

import numpy as np

from ..agents import (
    CaseState,
    PromptLibrary,
    ReportBundle,
    chat as run_chat,
)
from ..agents.roles import run_report_pipeline
from ..cbm import (
    ConceptEmbeddings,
    ConceptVector,
    LinearClassifier,
    Prediction,
    SimilarityMatrix,
    classify,
    concept_vector,
    contributions,
    load_classifier,
    load_concept_set,
    load_projection,
    saliency,
    similarity_matrix,
)
from ..cbm.types import ConceptSet
from ..errors import (
    NoAnalysis,
    ScoreOutOfRange,
    UnknownConcept,
    UnsupportedMediaType,
)
from ..providers import ProviderBundle
from ..store import StoreCatalog, USER_UPLOADS_STORE_ID
from .config import AppConfig, build_providers
from .heatmap import render_png
from .sessions import Session, SessionAnalysis, SessionStore, utc_now_iso

TEXT_UPLOAD_TYPES = {"text/plain", "text/markdown"}
MEDIA_UPLOAD_TYPES = {"audio/mpeg", "video/mp4"}


def embed_concept_set(
    concept_set: ConceptSet, bundle: ProviderBundle, projection: np.ndarray | None
) -> ConceptEmbeddings:
    vectors = bundle.text_embedder.embed_text([c.prompt_text for c in concept_set.concepts])
    matrix = np.asarray([v.values for v in vectors], dtype=np.float64)
    if projection is not None:
        matrix = matrix @ projection  # (K, d_text) x (d_text, d_image)
    return ConceptEmbeddings(concept_set_id=concept_set.id, matrix=matrix)


class AppState:
    def __init__(
        self,
        config: AppConfig,
        bundle: ProviderBundle | None = None,
        clock: Callable[[], str] = utc_now_iso,
    ):
        self.config = config
        self.bundle = bundle or build_providers(config)
        self.clock = clock
        self.concept_set: ConceptSet = load_concept_set(config.resolved_concepts_path())
        self.classifier: LinearClassifier = load_classifier(config.resolved_model_path())
        projection = (
            load_projection(config.paths.projection_path)
            if config.paths.projection_path
            else None
        )
        self.concept_embeddings = embed_concept_set(self.concept_set, self.bundle, projection)
        self.catalog = StoreCatalog.bootstrap(
            config.paths.stores_dir,
            max_chars=config.chunking.max_chars,
            overlap=config.chunking.overlap,
        )
        self.sessions = SessionStore(config.paths.sessions_dir)
        self.prompts = PromptLibrary(config.paths.prompts_dir or None)

    # -- helpers ---------------------------------------------------------------

    def _concept_index(self, concept_id: str) -> int:
        try:
            return self.concept_set.index_of(concept_id)
        except KeyError:
            raise UnknownConcept(f"unknown concept id {concept_id!r}") from None

    def _current_vector(self, analysis: SessionAnalysis) -> ConceptVector:
        # raw is rebuilt from the current normalized values so overrides stay
        # consistent with the (raw, normalized) invariant
        normalized = analysis.normalized
        return ConceptVector(
            concept_set_id=analysis.concept_set_id,
            raw=2.0 * normalized - 1.0,
            normalized=normalized,
        )

    def _session_catalog(self, session_id: str) -> StoreCatalog:
        uploads = self.sessions.uploads_index(session_id)
        return self.catalog.with_session_uploads(uploads, self.sessions.uploads_path(session_id))

    def concepts_payload(self, session: Session) -> list[dict]:
        """Every concept with score/contribution, ordered by |contribution|
        descending, ties by concept index ascending."""
        analysis = session.analysis
        vec = self._current_vector(analysis)
        contribs = contributions(
            self.classifier, vec, analysis.prediction.predicted_label
        ).per_concept
        order = sorted(
            range(len(self.concept_set)), key=lambda j: (-abs(float(contribs[j])), j)
        )
        rows = []
        for j in order:
            concept = self.concept_set.concepts[j]
            rows.append(
                {
                    "id": concept.concept_id,
                    "name": concept.name,
                    "score": float(analysis.normalized[j]),
                    "contribution": float(contribs[j]),
                    "overridden": concept.concept_id in analysis.overrides,
                    "heatmap_url": f"/v1/sessions/{session.id}/heatmaps/{concept.concept_id}",
                }
            )
        return rows

    def prediction_payload(self, prediction: Prediction) -> dict:
        labels = self.classifier.class_labels
        return {
            "predicted_label": prediction.predicted_label,
            "probabilities": {
                label: float(p) for label, p in zip(labels, prediction.probabilities)
            },
            "logits": {label: float(z) for label, z in zip(labels, prediction.logits)},
        }

    def session_payload(self, session: Session) -> dict:
        payload = {
            "id": session.id,
            "created_at": session.created_at,
            "updated_at": session.updated_at,
            "has_image": session.image_ref is not None,
            "prediction": None,
            "concepts": None,
            "report": session.report.to_dict() if session.report else None,
            "chat_history": [
                {"role": m.role, "content": m.content} for m in session.chat_history
            ],
        }
        if session.analysis is not None and session.analysis.prediction is not None:
            payload["prediction"] = self.prediction_payload(session.analysis.prediction)
            payload["concepts"] = self.concepts_payload(session)
        return payload

    # -- operations ---------------------------------------------------------------

    def analyze_image(self, session_id: str, image_bytes: bytes, media_type: str) -> dict:
        with self.sessions.locked(session_id):
            session = self.sessions.get(session_id)
            tokens = self.bundle.image_embedder.embed_image(image_bytes, media_type)
            S = similarity_matrix(tokens, self.concept_embeddings)
            vec = concept_vector(self.concept_set.id, S)
            prediction = classify(self.classifier, vec)
            suffix = ".png" if media_type == "image/png" else ".jpg"
            image_path = self.sessions.image_path(session_id, suffix)
            image_path.write_bytes(image_bytes)
            session.image_ref = image_path.name
            session.image_media_type = media_type
            session.analysis = SessionAnalysis(
                concept_set_id=self.concept_set.id,
                grid_h=S.grid_h,
                grid_w=S.grid_w,
                similarity=S.values,
                raw=vec.raw,
                normalized=vec.normalized,
                overrides={},
                prediction=prediction,
            )
            session.report = None  # a new image invalidates any previous report
            self.sessions.save(session)
            return {
                "session_id": session.id,
                "prediction": self.prediction_payload(prediction),
                "concepts": self.concepts_payload(session),
            }

    def get_heatmap(self, session_id: str, concept_id: str, width: int, height: int) -> bytes:
        session = self.sessions.get(session_id)
        if session.analysis is None:
            raise NoAnalysis("no analysis has been run for this session")
        j = self._concept_index(concept_id)
        S = SimilarityMatrix(
            values=session.analysis.similarity,
            grid_h=session.analysis.grid_h,
            grid_w=session.analysis.grid_w,
        )
        sal = saliency(S, j, concept_id=concept_id)
        return render_png(sal.grid, width, height)

    def update_concepts(self, session_id: str, overrides: dict[str, float]) -> dict:
        with self.sessions.locked(session_id):
            session = self.sessions.get(session_id)
            if session.analysis is None:
                raise NoAnalysis("no analysis has been run for this session")
            indexed: dict[int, float] = {}
            for concept_id, score in overrides.items():
                j = self._concept_index(concept_id)
                score = float(score)
                if not (0.0 <= score <= 1.0):
                    raise ScoreOutOfRange(
                        f"score for {concept_id!r} must be in [0, 1], got {score}"
                    )
                indexed[j] = score
            analysis = session.analysis
            for j, score in indexed.items():
                analysis.normalized[j] = score
                analysis.overrides[self.concept_set.concepts[j].concept_id] = score
            vec = self._current_vector(analysis)
            analysis.prediction = classify(self.classifier, vec)
            self.sessions.save(session)
            return {
                "session_id": session.id,
                "prediction": self.prediction_payload(analysis.prediction),
                "concepts": self.concepts_payload(session),
            }

    def ingest_upload(
        self, session_id: str, file_bytes: bytes, media_type: str, doc_id: str
    ) -> int:
        with self.sessions.locked(session_id):
            self.sessions.get(session_id)  # existence check
            catalog = self._session_catalog(session_id)
            if media_type in TEXT_UPLOAD_TYPES:
                text = file_bytes.decode("utf-8", errors="replace")
                return catalog.ingest_document(
                    USER_UPLOADS_STORE_ID, doc_id, text, self.bundle.text_embedder
                )
            if media_type in MEDIA_UPLOAD_TYPES:
                return catalog.ingest_media(
                    USER_UPLOADS_STORE_ID,
                    doc_id,
                    file_bytes,
                    media_type,
                    self.bundle.transcriber,
                    self.bundle.text_embedder,
                )
            raise UnsupportedMediaType(
                f"media type {media_type!r} not accepted here; images go to the image endpoint"
            )

    def generate_report(self, session_id: str) -> dict:
        with self.sessions.locked(session_id):
            session = self.sessions.get(session_id)
            if session.analysis is None or session.analysis.prediction is None:
                raise NoAnalysis("run image analysis before generating a report")
            analysis = session.analysis
            vec = self._current_vector(analysis)
            contribs = contributions(
                self.classifier, vec, analysis.prediction.predicted_label
            )
            bundle: ReportBundle = run_report_pipeline(
                analysis.prediction,
                contribs,
                self.concept_set,
                self._session_catalog(session_id),
                self.bundle.completer,
                self.bundle.text_embedder,
                prompts=self.prompts,
                max_iterations=self.config.agents.max_iterations,
                retrieval_k=self.config.agents.retrieval_k,
                upload_hits_k=self.config.agents.upload_hits_k,
                overridden_ids=frozenset(analysis.overrides),
                clock=self.clock,
            )
            session.report = bundle
            self.sessions.save(session)
            return bundle.to_dict()

    def chat_message(self, session_id: str, message: str) -> dict:
        with self.sessions.locked(session_id):
            session = self.sessions.get(session_id)
            case_state = CaseState()
            if session.analysis is not None and session.analysis.prediction is not None:
                case_state.predicted_label = session.analysis.prediction.predicted_label
                case_state.concept_scores = {
                    c.concept_id: float(session.analysis.normalized[j])
                    for j, c in enumerate(self.concept_set.concepts)
                }
            if session.report is not None:
                case_state.report_text = "\n".join(
                    [
                        f"FINDINGS: {session.report.findings}",
                        f"DIAGNOSIS: {session.report.diagnosis}",
                        f"GUIDELINES: {session.report.guidelines}",
                    ]
                )
            result = run_chat(
                case_state,
                message,
                session.chat_history,
                self._session_catalog(session_id),
                self.bundle.completer,
                self.bundle.text_embedder,
                prompts=self.prompts,
                history_turns=self.config.agents.history_turns,
                max_iterations=self.config.agents.max_iterations,
                retrieval_k=self.config.agents.retrieval_k,
            )
            session.chat_history = result.history
            session.last_chat_prompt = result.prompt_turns
            self.sessions.save(session)
            return {
                "session_id": session.id,
                "reply": result.reply,
                "history_length": len(result.history),
            }
