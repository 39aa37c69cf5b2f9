"""HTTP evaluation service.

One ``POST /api/v1/<suite>/evaluate`` endpoint per suite. JSON bodies for
structured payloads, multipart/form-data for file uploads. Every 2xx
response corresponds to exactly one appended results-log row.

Status codes: 404 unknown test case, 400 malformed body or unreadable
upload, 413 upload over the size cap, 422 missing or mis-shaped fields.
"""

from __future__ import annotations

import json
from typing import Any, List, Optional, Union

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel, ConfigDict, ValidationError
from starlette.concurrency import run_in_threadpool
from starlette.datastructures import UploadFile

from .errors import (
    GroundTruthUnavailable,
    InvalidReport,
    ParseError,
    UnknownTestCase,
)
from .evaluate import Evaluator
from .records import parse_block_ranges, sqlite_case
from .scorers.carving import FORMATS, CarvedFile
from .metrics import Suite, suite_for_test_case
from .scorers.dfr import DfrRecoveredFile
from .scorers.registry import RegistryRow, dump_bytes
from .scorers.sqlite import (
    SqliteConfigReport,
    SqliteRowRecoveryReport,
    SqliteSchemaReport,
    SqliteSourceReport,
    TableReport,
)

PREFIX = "/api/v1"
ENDPOINTS = {
    Suite.STRING_SEARCH: f"{PREFIX}/string-search/evaluate",
    Suite.DELETED_FILE_RECOVERY: f"{PREFIX}/deleted-file-recovery/evaluate",
    Suite.FILE_CARVING: f"{PREFIX}/file-carving/evaluate",
    Suite.WINDOWS_REGISTRY: f"{PREFIX}/windows-registry/evaluate",
    Suite.SQLITE: f"{PREFIX}/sqlite-recovery/evaluate",
}
DEFAULT_MAX_UPLOAD = 64 * 1024 * 1024


class _Common(BaseModel):
    model_config = ConfigDict(extra="forbid")

    base_test_case: str
    tool: Optional[str] = None
    job_id: Optional[str] = None


class StringSearchRequest(_Common):
    os: str
    content: str


BlockSpec = Union[int, List[int], str]


class RecoveredFileModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    file_name: Optional[str] = None
    size: Optional[int] = None
    accessed: Optional[Union[str, int]] = None
    modified: Optional[Union[str, int]] = None
    created: Optional[Union[str, int]] = None
    blocks: Optional[List[BlockSpec]] = None

    def to_file(self) -> DfrRecoveredFile:
        return DfrRecoveredFile(
            file_name=self.file_name,
            size=self.size,
            accessed=self.accessed,
            modified=self.modified,
            created=self.created,
            blocks=None if self.blocks is None else _block_set(self.blocks),
        )


class DeletedFileRequest(_Common, RecoveredFileModel):
    files: Optional[List[RecoveredFileModel]] = None


class _SqliteCommon(_Common):
    database_name: Optional[str] = None


class Sft01Request(_SqliteCommon):
    page_size: int
    journal_mode: str
    page_count: int
    file_hash: str
    text_encoding: str


class TableModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: str
    columns: List[str]
    row_count: int


class Sft02Request(_SqliteCommon):
    tables: List[TableModel]


class Sft03Request(_SqliteCommon):
    deleted_row_ids: List[int] = []
    updated_row_ids: List[int] = []


class Sft04Request(_SqliteCommon):
    source_file: str


_SQLITE_MODELS = {"SFT-01": Sft01Request, "SFT-02": Sft02Request, "SFT-03": Sft03Request, "SFT-04": Sft04Request}


def _block_set(specs) -> frozenset:
    blocks = set()
    for spec in specs:
        if isinstance(spec, int):
            blocks.add(spec)
        elif isinstance(spec, str):
            blocks.update(b for r in parse_block_ranges(spec) for b in r.blocks())
        else:
            if len(spec) != 2 or spec[0] > spec[1]:
                raise InvalidReport(f"block range must be [start, end], got {spec}")
            blocks.update(range(spec[0], spec[1] + 1))
    return frozenset(blocks)


def _claimed_format(content_type: Optional[str]) -> Optional[str]:
    """``image/<format>`` on an upload part declares the carved file's format."""
    if not content_type:
        return None
    kind, _, sub = content_type.split(";")[0].strip().lower().partition("/")
    if kind != "image":
        return None
    sub = {"tif": "tiff", "heif": "heic", "x-ms-bmp": "bmp"}.get(sub, sub)
    return sub if sub in FORMATS else None


class _HTTPError(Exception):
    def __init__(self, status: int, detail: Any):
        self.status = status
        self.detail = detail


async def _json_body(request: Request) -> dict:
    raw = await request.body()
    try:
        body = json.loads(raw)
    except (ValueError, UnicodeDecodeError) as exc:
        raise _HTTPError(400, f"malformed JSON body: {exc}") from None
    if not isinstance(body, dict):
        raise _HTTPError(400, "JSON body must be an object")
    return body


def _validate(model, body: dict):
    try:
        return model.model_validate(body)
    except ValidationError as exc:
        raise _HTTPError(422, json.loads(exc.json(include_url=False))) from None


def create_app(evaluator: Evaluator, max_upload_bytes: int = DEFAULT_MAX_UPLOAD) -> FastAPI:
    app = FastAPI(title="dfbench evaluation service", version="1.0")
    app.state.evaluator = evaluator

    @app.exception_handler(_HTTPError)
    async def _http_error(request, exc: _HTTPError):
        return JSONResponse({"detail": exc.detail}, status_code=exc.status)

    @app.exception_handler(UnknownTestCase)
    async def _unknown(request, exc):
        return JSONResponse({"detail": f"UnknownTestCase: {exc}"}, status_code=404)

    @app.exception_handler(ParseError)
    async def _parse(request, exc):
        return JSONResponse({"detail": f"ParseError: {exc}", "line": exc.line}, status_code=400)

    @app.exception_handler(InvalidReport)
    async def _invalid(request, exc):
        return JSONResponse({"detail": f"InvalidReport: {exc}"}, status_code=422)

    @app.exception_handler(GroundTruthUnavailable)
    async def _gt(request, exc):
        return JSONResponse({"detail": f"GroundTruthUnavailable: {exc}"}, status_code=500)

    async def _respond(fn, *args):
        result = await run_in_threadpool(fn, *args)
        return JSONResponse(result.as_dict())

    async def _form(request: Request):
        declared = request.headers.get("content-length", "")
        # multipart framing adds overhead per part; the per-part check below is exact
        if declared.isdigit() and int(declared) > 2 * max_upload_bytes + 1024 * 1024:
            raise _HTTPError(413, f"request body exceeds the {max_upload_bytes}-byte upload cap")
        try:
            return await request.form()
        except Exception as exc:  # noqa: BLE001
            if "size" in str(exc).lower() or getattr(exc, "status_code", None) == 413:
                raise _HTTPError(413, f"upload exceeds {max_upload_bytes} bytes") from None
            raise _HTTPError(400, f"malformed multipart body: {exc}") from None

    def _form_common(form) -> _Common:
        fields = {k: form.get(k) for k in ("base_test_case", "tool", "job_id") if isinstance(form.get(k), str)}
        return _validate(_Common, fields)

    async def _read_upload(part: UploadFile) -> bytes:
        data = await part.read()
        if len(data) > max_upload_bytes:
            raise _HTTPError(413, f"{part.filename}: upload exceeds {max_upload_bytes} bytes")
        if not data:
            raise _HTTPError(400, f"{part.filename}: empty or unreadable part")
        return data

    @app.post(ENDPOINTS[Suite.STRING_SEARCH])
    async def string_search(request: Request):
        req = _validate(StringSearchRequest, await _json_body(request))
        lines = [line for line in req.content.splitlines() if line.strip()]
        return await _respond(
            evaluator.string_search, req.base_test_case, req.os, lines, req.tool, req.job_id
        )

    @app.post(ENDPOINTS[Suite.DELETED_FILE_RECOVERY])
    async def deleted_file_recovery(request: Request):
        req = _validate(DeletedFileRequest, await _json_body(request))
        single = RecoveredFileModel.model_validate(
            req.model_dump(include=set(RecoveredFileModel.model_fields))
        )
        has_single = any(v is not None for v in single.model_dump().values())
        if req.files is None and not has_single:
            raise _HTTPError(422, "no recovered file fields supplied")
        models = list(req.files or []) + ([single] if has_single else [])
        files = [m.to_file() for m in models]
        return await _respond(evaluator.deleted_file_recovery, req.base_test_case, files, req.tool, req.job_id)

    @app.post(ENDPOINTS[Suite.FILE_CARVING])
    async def file_carving(request: Request):
        form = await _form(request)
        common = _form_common(form)
        carved = []
        for key, part in form.multi_items():
            if isinstance(part, UploadFile):
                data = await _read_upload(part)
                carved.append(CarvedFile(part.filename or key, data, _claimed_format(part.content_type)))
        if not carved:
            raise _HTTPError(400, "at least one carved file part is required")
        return await _respond(evaluator.file_carving, common.base_test_case, carved, common.tool, common.job_id)

    @app.post(ENDPOINTS[Suite.WINDOWS_REGISTRY])
    async def windows_registry(request: Request):
        form = await _form(request)
        common = _form_common(form)
        parts = [p for _, p in form.multi_items() if isinstance(p, UploadFile)]
        if len(parts) != 1:
            raise _HTTPError(400, "exactly one dump CSV file part is required")
        data = await _read_upload(parts[0])
        return await _respond(evaluator.windows_registry, common.base_test_case, data, common.tool, common.job_id)

    @app.post(ENDPOINTS[Suite.SQLITE])
    async def sqlite_recovery(request: Request):
        body = await _json_body(request)
        test_case = body.get("base_test_case")
        if not isinstance(test_case, str):
            raise _HTTPError(422, "base_test_case is required")
        try:
            model = _SQLITE_MODELS[sqlite_case(test_case)]
        except (KeyError, UnknownTestCase):
            raise _HTTPError(404, f"UnknownTestCase: {test_case!r}") from None
        req = _validate(model, body)
        if isinstance(req, Sft01Request):
            report = SqliteConfigReport(
                req.page_size, req.journal_mode, req.page_count, req.file_hash, req.text_encoding, req.database_name
            )
        elif isinstance(req, Sft02Request):
            names = [t.name for t in req.tables]
            if len(set(names)) != len(names):
                raise _HTTPError(422, "table names must be unique")
            report = SqliteSchemaReport(
                [TableReport(t.name, tuple(t.columns), t.row_count) for t in req.tables], req.database_name
            )
        elif isinstance(req, Sft03Request):
            report = SqliteRowRecoveryReport(
                req.database_name, frozenset(req.deleted_row_ids), frozenset(req.updated_row_ids)
            )
        else:
            report = SqliteSourceReport(req.source_file, req.database_name)
        return await _respond(evaluator.sqlite, req.base_test_case, report, req.tool, req.job_id)

    return app


def _json_time(value):
    return value if value is None or isinstance(value, (str, int)) else str(value)


def encode_request(test_case: str, payload, tool: Optional[str] = None, job_id: Optional[str] = None):
    """Client-side encoding of an :meth:`Evaluator.evaluate` payload.

    Returns ``(path, kwargs)`` where ``kwargs`` suits ``httpx``/``TestClient``
    ``post``: ``json=`` for structured suites, ``data=`` plus ``files=`` for
    uploads.
    """
    suite = suite_for_test_case(test_case)
    common = {"base_test_case": test_case}
    if tool is not None:
        common["tool"] = tool
    if job_id is not None:
        common["job_id"] = job_id
    path = ENDPOINTS[suite]

    if suite is Suite.STRING_SEARCH:
        os, lines = payload
        return path, {"json": {**common, "os": os, "content": "\n".join(lines)}}
    if suite is Suite.DELETED_FILE_RECOVERY:
        files = [
            {
                "file_name": f.file_name,
                "size": f.size,
                "accessed": _json_time(f.accessed),
                "modified": _json_time(f.modified),
                "created": _json_time(f.created),
                "blocks": None if f.blocks is None else sorted(f.blocks),
            }
            for f in payload
        ]
        return path, {"json": {**common, "files": files}}
    if suite is Suite.FILE_CARVING:
        uploads = [
            ("files", (c.name, c.data, f"image/{c.claimed_format}" if c.claimed_format else "application/octet-stream"))
            for c in payload
        ]
        return path, {"data": common, "files": uploads}
    if suite is Suite.WINDOWS_REGISTRY:
        data = payload if isinstance(payload, (bytes, bytearray)) else dump_bytes(
            r if isinstance(r, RegistryRow) else RegistryRow(*r) for r in payload
        )
        return path, {"data": common, "files": [("dump", ("dump.csv", bytes(data), "text/csv"))]}

    body = {**common}
    if payload.database_name is not None:
        body["database_name"] = payload.database_name
    if isinstance(payload, SqliteConfigReport):
        body.update(
            page_size=payload.page_size,
            journal_mode=payload.journal_mode,
            page_count=payload.page_count,
            file_hash=payload.file_hash,
            text_encoding=payload.text_encoding,
        )
    elif isinstance(payload, SqliteSchemaReport):
        body["tables"] = [
            {"name": t.name, "columns": list(t.columns), "row_count": t.row_count} for t in payload.tables
        ]
    elif isinstance(payload, SqliteRowRecoveryReport):
        body["deleted_row_ids"] = sorted(payload.deleted_row_ids)
        body["updated_row_ids"] = sorted(payload.updated_row_ids)
    else:
        body["source_file"] = payload.source_file
    return path, {"json": body}
