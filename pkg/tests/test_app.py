import io

import numpy as np
import pytest
from fastapi.testclient import TestClient

from app import app
from linewidths.stats import samples_to_frame
from optics.spectrum import synthesize_psb_spectrum
from ple.fitting import gauss
from ple.model import PleScan

client = TestClient(app)


def _csv(frame):
    buffer = io.StringIO()
    frame.to_csv(buffer, index=False)
    return buffer.getvalue().encode("utf-8")


def test_health():
    response = client.get("/health")
    assert response.status_code == 200
    assert response.json()["status"] == "ok"


def test_lifespan_logs_start_and_stop(caplog):
    caplog.set_level("INFO", logger="NvForge")
    with TestClient(app) as started:
        assert started.get("/health").status_code == 200
    assert "nvforge API" in caplog.text and "starting" in caplog.text
    assert "stopped" in caplog.text


def test_security_and_cache_headers():
    response = client.get("/health", headers={"X-Run-ID": "abc123"})
    assert response.headers["X-Run-ID"] == "abc123"
    assert response.headers["X-Content-Type-Options"] == "nosniff"
    assert response.headers["X-Frame-Options"] == "DENY"
    assert "no-store" in response.headers["Cache-Control"]


def test_hom():
    response = client.post("/hom", json={"fwhm_mhz": 150.0, "t1_ns": 12.0, "window_ps": 300.0})
    assert response.status_code == 200
    assert response.json()["visibility"] == pytest.approx(0.882, abs=3e-3)


def test_hom_invert_and_gain():
    assert 120.0 <= client.post("/hom/invert", json={}).json()["max_fwhm_mhz"] <= 180.0
    assert client.post("/bk-gain", json={"bare": 0.03, "enhanced": 0.3}).json()["gain"] == pytest.approx(100.0)


@pytest.mark.parametrize("payload", [{"fwhm_mhz": 5.0}, {"t1_ns": 12.0}, {"fwhm_mhz": "wide"}])
def test_hom_errors_are_unprocessable(payload):
    response = client.post("/hom", json=payload)
    assert response.status_code == 422
    assert response.json()["status"] == "error"


def test_stats_upload(linewidth_table):
    files = {"file": ("lines.csv", _csv(samples_to_frame(linewidth_table)), "text/csv")}
    response = client.post("/stats", files=files, data={"threshold": "150"})
    assert response.status_code == 200
    body = response.json()
    assert body["fractions_below"]["all"]["n"] == 45
    assert set(body["fits"]) == {"A", "B", "C", "all"}


def test_etalon_upload():
    frame = synthesize_psb_spectrum(2.5, noise_level=0.05, seed=8).to_frame()
    response = client.post("/etalon/fit", files={"file": ("psb.csv", _csv(frame), "text/csv")},
                           data={"n": "2.41", "dmin": "1", "dmax": "10"})
    assert response.status_code == 200
    assert response.json()["thickness_um"] == pytest.approx(2.5, rel=0.02)


def test_ple_upload():
    x = np.linspace(-200.0, 200.0, 81)
    frame = PleScan(x, gauss(x, 10.0, 400.0, 5.0, 30.0)).to_frame()
    response = client.post("/ple/fit", files={"file": ("scan.csv", _csv(frame), "text/csv")})
    assert response.status_code == 200
    assert response.json()["fwhm_mhz"] == pytest.approx(2.3548 * 30.0, rel=1e-3)


def test_bad_upload_is_unprocessable():
    response = client.post("/ple/fit", files={"file": ("scan.csv", b"a,b\n1,2\n", "text/csv")})
    assert response.status_code == 422
    assert response.json()["error"] == "ConfigurationError"
