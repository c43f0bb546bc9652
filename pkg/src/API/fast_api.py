import os, logging
from typing import Optional

from fastapi import FastAPI, Depends, HTTPException, Body
from fastapi.middleware.cors import CORSMiddleware
from fastapi.security import APIKeyHeader
from pydantic import BaseModel

from src import __version__
from src.analysis.flow import cost_total, flow_report
from src.cli_io.documents import NetworkDocument, from_document, to_document
from src.core.errors import UnitaryNetworkError
from src.core.netgraph import validate
from src.core.tensor import TOL
from src.sim.gallery import GALLERY, GalleryParams, build

#  Simple API key auth (POC)
API_KEY = os.getenv("API_KEY", "dev-secret")
api_key_header = APIKeyHeader(name="x-api-key", auto_error=False)

def require_api_key(key: str = Depends(api_key_header)):
    if key != API_KEY:
        raise HTTPException(status_code=401, detail="Invalid or missing API key")

#  Logging
logger = logging.getLogger("api")
logging.basicConfig(level=logging.INFO)

#  Schema
class GalleryRequest(BaseModel):
    n_sites: int = 4
    d: int = 2
    variant: Optional[str] = None
    theta: float = 0.0
    seed: int = 0
    red_dim: Optional[int] = None

#  Helpers
def _network(doc: NetworkDocument):
    """Document -> network; domain errors become 422 with the offending path."""
    try:
        return from_document(doc)
    except UnitaryNetworkError as exc:
        logger.info("rejected document: %s", exc)
        raise HTTPException(status_code=422, detail=str(exc))

# The App
app = FastAPI(title="Unitary Network Analysis API", version=__version__)
app.add_middleware(CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"])

@app.get("/healthz")
def healthz():
    return {"ok": True, "version": __version__, "gallery": len(GALLERY)}

@app.get("/gallery", dependencies=[Depends(require_api_key)])
def gallery_names():
    return {"networks": sorted(GALLERY)}

@app.post("/gallery/{name}", dependencies=[Depends(require_api_key)])
def gallery_build(name: str, req: GalleryRequest = Body(default=GalleryRequest())):
    if name not in GALLERY:
        raise HTTPException(status_code=404, detail=f"No gallery network named {name}")
    try:
        net = build(name, GalleryParams(**req.model_dump()))
    except UnitaryNetworkError as exc:
        raise HTTPException(status_code=422, detail=str(exc))
    logger.info("built %s with %s", name, req.model_dump())
    return to_document(net).model_dump(mode="json", by_alias=True)

@app.post("/validate", dependencies=[Depends(require_api_key)])
def validate_doc(doc: NetworkDocument, tol: float = TOL):
    net = _network(doc)
    return validate(net, tol).to_dict()

@app.post("/flow", dependencies=[Depends(require_api_key)])
def flow(doc: NetworkDocument):
    net = _network(doc)
    return flow_report(net).to_dict()

@app.post("/cost", dependencies=[Depends(require_api_key)])
def cost(doc: NetworkDocument):
    net = _network(doc)
    return cost_total(net).to_dict()
