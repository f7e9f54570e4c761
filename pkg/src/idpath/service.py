"""HTTP service wrapping the checker and the witness compiler.

Every request is stateless: the source text travels with the request and
all checking happens against the signature it declares.
"""

from __future__ import annotations

from fastapi import FastAPI
from pydantic import BaseModel, Field

from . import drive, loader, surface as sf
from .checker import CheckError
from .syntax import Signature

app = FastAPI(
    title="idpath",
    description="Type checker and witness compiler for propositional identity types",
    version="0.1.0",
)


class CheckRequest(BaseModel):
    source: str
    strong_sums: bool = False


class DirectiveRecord(BaseModel):
    line: int
    directive: str
    verdict: str
    rule: str = ""
    detail: str = ""


class CheckResponse(BaseModel):
    exit_code: int
    records: list[DirectiveRecord]
    derive_output: list[str] = Field(default_factory=list)


class DeriveRequest(BaseModel):
    source: str = ""
    kind: str
    context: str = ""
    type_name: str = ""
    names: list[str] = Field(default_factory=list)
    strong_sums: bool = False
    emit: bool = False


class DeriveResponse(BaseModel):
    exit_code: int
    lines: list[str]
    detail: str = ""
    emitted_source: str = ""


class ExplainResponse(BaseModel):
    kind: str
    text: str


@app.get("/health")
def health() -> dict:
    return {"status": "ok"}


@app.post("/check", response_model=CheckResponse)
def check(req: CheckRequest) -> CheckResponse:
    try:
        parsed = sf.parse(req.source)
    except sf.ParseError as e:
        return CheckResponse(
            exit_code=2,
            records=[DirectiveRecord(line=e.line, directive="parse", verdict="error", detail=str(e))],
        )
    extra: list[str] = []

    def handler(sig, directive):
        outcome = drive.run_derive(sig, directive.kind, directive.params, directive.names)
        extra.extend(outcome.lines)
        return outcome.report(), outcome.sig if outcome.sig is not None else sig

    _, results = loader.run_directives(parsed, strong_sums=req.strong_sums, derive_handler=handler)
    records = []
    all_ok = True
    for r in results:
        all_ok &= r.report.ok
        records.append(
            DirectiveRecord(
                line=r.line,
                directive=type(r.directive).__name__,
                verdict="accept" if r.report.ok else "reject",
                rule=r.report.rule,
                detail=r.report.detail,
            )
        )
    return CheckResponse(exit_code=0 if all_ok else 1, records=records, derive_output=extra)


@app.post("/derive", response_model=DeriveResponse)
def derive(req: DeriveRequest) -> DeriveResponse:
    if req.kind not in drive.DERIVE_KINDS:
        return DeriveResponse(exit_code=2, lines=[], detail=f"unknown derive kind {req.kind!r}")
    try:
        if req.source:
            parsed = sf.parse(req.source)
            sig = loader.load_signature(parsed, strong_sums=req.strong_sums)
        else:
            sig = Signature().with_strong_sums(req.strong_sums)
    except (sf.ParseError, CheckError) as e:
        return DeriveResponse(exit_code=2, lines=[], detail=str(e))
    params: tuple = ()
    if req.context:
        try:
            params = sf.parse_params_text(req.context)
        except sf.ParseError as e:
            return DeriveResponse(exit_code=2, lines=[], detail=f"bad context: {e}")
    elif req.type_name:
        try:
            params = sf.parse_params_text(f"(it : {req.type_name})")
        except sf.ParseError as e:
            return DeriveResponse(exit_code=2, lines=[], detail=f"bad type: {e}")
    outcome = drive.run_derive(sig, req.kind, params, tuple(req.names))
    emitted = drive.emitted_source(req.source, outcome) if (req.emit and outcome.ok) else ""
    return DeriveResponse(
        exit_code=0 if outcome.ok else 1,
        lines=outcome.lines,
        detail=outcome.detail,
        emitted_source=emitted,
    )


@app.get("/explain/{kind}", response_model=ExplainResponse)
def explain(kind: str) -> ExplainResponse:
    text = drive.EXPLANATIONS.get(kind, "")
    return ExplainResponse(kind=kind, text=text)
