import os
import time
import tempfile
from contextlib import asynccontextmanager
from typing import Any, Dict

from fastapi import FastAPI, File, Form, Request, UploadFile
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from cli import stats_payload
from linewidths.reference import load_linewidths
from optics.etalon import DEFAULT_INDEX, RefractiveIndex
from optics.fit import fit_thickness
from optics.spectrum import read_spectrum
from photons.interference import (
    DEFAULT_LIFETIME_NS,
    DEFAULT_WINDOW_PS,
    FilterWindow,
    PhotonSource,
    barrett_kok_gain,
    hom_visibility,
    max_linewidth_for_visibility,
)
from ple.fitting import fit_line_gaussian
from ple.model import read_scan
from runtime.config import TOOL_VERSION, logger, set_run_id
from runtime.errors import ConfigurationError, NvForgeError

CORS_ORIGINS = [u.strip() for u in os.getenv("NVFORGE_CORS_ORIGINS", "").split(",") if u.strip()]
UPLOAD_SUFFIX = ".csv"


@asynccontextmanager
async def lifespan(app: FastAPI):
    logger.info(f"🚀 nvforge API {TOOL_VERSION} starting")
    yield
    logger.info("✅ nvforge API stopped")


app = FastAPI(
    title="nvforge API",
    description="Etalon thickness fits, PLE line fits, linewidth statistics and photon interference estimates.",
    version=TOOL_VERSION,
    lifespan=lifespan,
)

if CORS_ORIGINS:
    app.add_middleware(
        CORSMiddleware,
        allow_origins=CORS_ORIGINS,
        allow_methods=["GET", "POST"],
        allow_headers=["*"],
    )
    logger.info(f"CORS configured to allow origins: {CORS_ORIGINS}")


@app.middleware("http")
async def add_run_id_and_cache_headers(request: Request, call_next):
    """Tag the request with a run id for log correlation and keep JSON results out of caches."""
    run_id = set_run_id(request.headers.get("X-Run-ID"))
    start = time.time()
    response = await call_next(request)
    response.headers["X-Run-ID"] = run_id
    response.headers.setdefault("X-Content-Type-Options", "nosniff")
    response.headers.setdefault("X-Frame-Options", "DENY")
    response.headers.setdefault("Referrer-Policy", "no-referrer")

    content_type = (response.headers.get("content-type") or "").lower()
    if "application/json" in content_type:
        response.headers["Cache-Control"] = "no-store, no-cache, must-revalidate, private"
        response.headers["Pragma"] = "no-cache"
        response.headers["Expires"] = "0"
    logger.info(f"{request.method} {request.url.path} -> {response.status_code} ({time.time() - start:.3f}s)")
    return response


@app.exception_handler(NvForgeError)
async def nvforge_error_handler(request: Request, exc: NvForgeError):
    logger.warning(f"⚠️ {request.url.path}: {type(exc).__name__}: {exc}")
    return JSONResponse(status_code=422, content={"status": "error", "error": type(exc).__name__,
                                                  "message": str(exc)})


@app.exception_handler(Exception)
async def unexpected_error_handler(request: Request, exc: Exception):
    logger.error(f"Unhandled error on {request.url.path}: {exc}", exc_info=True)
    return JSONResponse(status_code=500, content={"status": "error", "message": "Internal server error"})


def _number(payload: Dict[str, Any], key: str, default: Any = None) -> float:
    value = payload.get(key, default)
    if value is None:
        raise ConfigurationError(f"'{key}' is required")
    try:
        return float(value)
    except (TypeError, ValueError):
        raise ConfigurationError(f"'{key}' must be a number, got {value!r}")


async def _with_upload(upload: UploadFile, reader):
    """Spool an uploaded CSV to a temporary file and parse it with `reader`."""
    if not upload.filename:
        raise ConfigurationError("no file provided")
    with tempfile.NamedTemporaryFile(delete=False, suffix=UPLOAD_SUFFIX) as tmp:
        tmp.write(await upload.read())
        path = tmp.name
    try:
        return reader(path)
    finally:
        if os.path.exists(path):
            os.remove(path)


@app.get("/health")
async def health():
    return {"status": "ok", "version": TOOL_VERSION}


@app.post("/hom")
async def hom_api(payload: dict):
    """Filtered HOM visibility for `fwhm_mhz`, `t1_ns` and `window_ps`."""
    source = PhotonSource(_number(payload, "t1_ns", DEFAULT_LIFETIME_NS), _number(payload, "fwhm_mhz"))
    window = FilterWindow(_number(payload, "window_ps", DEFAULT_WINDOW_PS))
    return {"visibility": hom_visibility(source, window), "lifetime_limit_mhz": source.lifetime_limit}


@app.post("/hom/invert")
async def hom_invert_api(payload: dict):
    limit = max_linewidth_for_visibility(_number(payload, "t1_ns", DEFAULT_LIFETIME_NS),
                                         _number(payload, "window_ps", DEFAULT_WINDOW_PS),
                                         _number(payload, "target_v", 0.9))
    return {"max_fwhm_mhz": limit}


@app.post("/bk-gain")
async def bk_gain_api(payload: dict):
    return {"gain": barrett_kok_gain(_number(payload, "bare"), _number(payload, "enhanced"))}


@app.post("/stats")
async def stats_api(file: UploadFile = File(...), threshold: float = Form(150.0), alpha: float = Form(0.05),
                    band: str = Form("dkw")):
    """Linewidth statistics of an uploaded `fwhm_mhz,thickness_um,sample,region` CSV."""
    samples = await _with_upload(file, load_linewidths)
    logger.info(f"📝 Statistics for {len(samples)} linewidths from {file.filename}")
    return stats_payload(samples, threshold, alpha, band)


@app.post("/etalon/fit")
async def etalon_fit_api(file: UploadFile = File(...), n: float = Form(DEFAULT_INDEX), cauchy_b: float = Form(0.0),
                         dmin: float = Form(1.0), dmax: float = Form(10.0), envelope: str = Form("median")):
    spectrum = await _with_upload(file, read_spectrum)
    fit = fit_thickness(spectrum, RefractiveIndex(n, cauchy_b), (dmin, dmax), envelope=envelope)
    return fit.to_dict()


@app.post("/ple/fit")
async def ple_fit_api(file: UploadFile = File(...)):
    scan = await _with_upload(file, read_scan)
    return fit_line_gaussian(scan).to_dict()
