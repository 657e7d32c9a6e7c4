"""HTTP JSON API for the curation and triage application.

All model math happens server-side; clients only render what these
endpoints return. Mutations are validated up front and return 400 on bad
input, 404 on unknown ids, and 409 when a merge races another curator.
"""

from __future__ import annotations

from typing import Optional

from fastapi import Depends, FastAPI, HTTPException, Query, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from ..errors import MailTopicsError
from ..topicmodel import FittedTopicModel
from .core import ConcurrentMergeError, TopicService


class MergeRequest(BaseModel):
    groups: list[list[int]]
    what_if: bool = True
    expected_topics: Optional[int] = None


class LabelRequest(BaseModel):
    label: str = Field(min_length=1)


class DerivedMapRequest(BaseModel):
    map: dict[str, str]


class ReviewedRequest(BaseModel):
    reviewed: bool


class BatchRequest(BaseModel):
    limit: int = Field(default=1000, ge=1)


def _topic_payload(model: FittedTopicModel) -> list[dict]:
    return [
        {
            "topic_id": rep.topic_id,
            "keywords": [[term, weight] for term, weight in rep.keywords],
            "size": rep.size,
            "custom_label": model.custom_labels.get(rep.topic_id),
            "derived_label": model.derived_map.get(rep.topic_id),
        }
        for rep in model.representations
    ]


def create_app(service: TopicService, api_token: Optional[str] = None) -> FastAPI:
    app = FastAPI(title="mailtopics service", version="0.1.0")

    def auth(request: Request) -> None:
        if api_token and request.headers.get("x-api-token") != api_token:
            raise HTTPException(status_code=401, detail="missing or bad token")

    def model_or_404() -> FittedTopicModel:
        model = service.model
        if model is None:
            raise HTTPException(status_code=404, detail="no model loaded")
        return model

    @app.exception_handler(MailTopicsError)
    async def on_pipeline_error(_, exc: MailTopicsError):
        status = 409 if isinstance(exc, ConcurrentMergeError) else 400
        return JSONResponse(status_code=status, content={"detail": str(exc)})

    @app.get("/healthz")
    def healthz():
        return {"status": "ok", "model_loaded": service.model is not None}

    @app.get("/topics", dependencies=[Depends(auth)])
    def topics():
        return {"topics": _topic_payload(model_or_404())}

    @app.get("/hierarchy", dependencies=[Depends(auth)])
    def hierarchy():
        model = model_or_404()
        tree = model.hierarchy()
        return {
            "n_leaves": tree.n_leaves,
            "steps": [
                {
                    "left": s.left,
                    "right": s.right,
                    "distance": s.distance,
                    "new_id": s.new_id,
                }
                for s in tree.steps
            ],
        }

    @app.post("/topics/merge", dependencies=[Depends(auth)])
    def merge(req: MergeRequest):
        model = model_or_404()
        if req.expected_topics is not None and req.expected_topics != model.n_topics:
            raise HTTPException(
                status_code=409,
                detail=f"model changed: has {model.n_topics} topics, "
                f"preview saw {req.expected_topics}",
            )
        try:
            if req.what_if:
                preview = service.merge_preview(req.groups)
                return {
                    "committed": False,
                    "n_topics": preview.n_topics,
                    "topics": _topic_payload(preview),
                }
            merged = service.merge_commit(req.groups)
        except ValueError as err:
            raise HTTPException(status_code=400, detail=str(err))
        return {"committed": True, "n_topics": merged.n_topics}

    @app.put("/topics/{topic_id}/label", dependencies=[Depends(auth)])
    def set_label(topic_id: int, req: LabelRequest):
        model = model_or_404()
        if not 0 <= topic_id < model.n_topics:
            raise HTTPException(status_code=404, detail=f"unknown topic {topic_id}")
        service.set_custom_label(topic_id, req.label)
        return {"topic_id": topic_id, "custom_label": req.label}

    @app.put("/derived-map", dependencies=[Depends(auth)])
    def set_derived_map(req: DerivedMapRequest):
        model = model_or_404()
        try:
            mapping = {int(k): v for k, v in req.map.items()}
        except ValueError:
            raise HTTPException(status_code=400, detail="topic ids must be integers")
        needed = set(range(model.n_topics)) | {-1}
        merged_keys = set(model.derived_map) | set(mapping)
        uncovered = sorted(needed - merged_keys)
        if uncovered:
            raise HTTPException(
                status_code=400,
                detail=f"derived map leaves topics uncovered: {uncovered}",
            )
        try:
            service.set_derived_map(mapping)
        except ValueError as err:
            raise HTTPException(status_code=400, detail=str(err))
        return {"derived_map": {str(k): v for k, v in service.model.derived_map.items()}}

    @app.get("/topics/{topic_id}/representative-docs", dependencies=[Depends(auth)])
    def representative_docs(topic_id: int):
        model = model_or_404()
        if not 0 <= topic_id < model.n_topics:
            raise HTTPException(status_code=404, detail=f"unknown topic {topic_id}")
        ids = model.representative_docs.get(topic_id, [])
        texts = {d.email_id: d.text for d in service.training_docs}
        return {
            "topic_id": topic_id,
            "documents": [{"email_id": i, "text": texts.get(i)} for i in ids],
        }

    @app.get("/emails", dependencies=[Depends(auth)])
    def emails(
        derived_label: Optional[str] = Query(default=None),
        disposition: Optional[str] = Query(default=None),
        reviewed: Optional[bool] = Query(default=None),
        page: int = Query(default=1, ge=1),
        page_size: int = Query(default=50, ge=1, le=500),
    ):
        records, total = service.store.query(
            derived_label=derived_label,
            disposition=disposition,
            reviewed=reviewed,
            page=page,
            page_size=page_size,
        )
        return {
            "items": [r.to_dict() for r in records],
            "page": page,
            "page_size": page_size,
            "total": total,
        }

    @app.put("/emails/{email_id}/reviewed", dependencies=[Depends(auth)])
    def set_reviewed(email_id: str, req: ReviewedRequest):
        if not service.store.set_reviewed(email_id, req.reviewed):
            raise HTTPException(status_code=404, detail=f"unknown email {email_id}")
        return {"id": email_id, "reviewed": req.reviewed}

    @app.post("/batches/run", dependencies=[Depends(auth)])
    def run_batch(req: BatchRequest):
        return service.run_batch(req.limit).to_dict()

    @app.get("/batches", dependencies=[Depends(auth)])
    def batches():
        return {"jobs": service.store.list_jobs()}

    @app.get("/reports/{month}", dependencies=[Depends(auth)])
    def report(month: str):
        if len(month) != 7 or month[4] != "-":
            raise HTTPException(status_code=400, detail="month must be YYYY-MM")
        return service.monthly_report(month).to_dict()

    return app
