import argparse
import json

import pytest
from fastapi.testclient import TestClient

from tamperscore.cli import build_parser
from tamperscore.service import CAPABILITIES, ServiceConfig, create_app

USB_SOURCES = ["setupapi-dev-log", "usbstor-key", "mounteddevices-key", "windows-event-logs"]


@pytest.fixture()
def client(tmp_path):
    config = ServiceConfig(data_dir=tmp_path / "docs", cscale_threshold=1)
    app = create_app(config)
    with TestClient(app) as test_client:
        yield test_client


def create_usb_doc(client) -> str:
    response = client.post(
        "/api/assessments",
        json={"title": "USB case", "sources": USB_SOURCES, "profile_name": "home-admin"},
    )
    assert response.status_code == 201
    return response.json()["id"]


def test_get_rubric(client):
    payload = client.get("/api/rubric").json()
    assert payload["version"] == "1.0.0"
    assert [f["id"] for f in payload["factors"]] == [
        "visibility", "permissions", "edit-software", "access-facets",
        "encryption", "file-format", "organization",
    ]


def test_get_kb_sources(client):
    payload = client.get("/api/kb/sources").json()
    assert len(payload["sources"]) == 7
    assert "class_index" in payload


def test_get_profiles(client):
    payload = client.get("/api/profiles").json()
    names = {p["name"] for p in payload["profiles"]}
    assert names == {"home-admin", "corporate-standard-user"}


def test_create_and_fetch_assessment(client):
    doc_id = create_usb_doc(client)
    doc = client.get(f"/api/assessments/{doc_id}").json()
    by_source = {s["source"]: s for s in doc["source_assessments"]}
    categories = {a["factor"]: a["category"] for a in by_source["usbstor-key"]["assignments"]}
    assert categories["permissions"] == "accessible-with-prompt"
    assert categories["file-format"] == "na-ui-tool"


def test_missing_document_404(client):
    response = client.get("/api/assessments/nope")
    assert response.status_code == 404
    assert response.json()["error"] == "not-found"


def test_put_assignment_returns_severity(client):
    doc_id = create_usb_doc(client)
    response = client.put(
        f"/api/assessments/{doc_id}/assignments",
        json={
            "source": "mounteddevices-key",
            "factor": "edit-software",
            "category": "added-hex-tool",
            "rationale": "third-party hex editor found",
        },
    )
    assert response.status_code == 200
    payload = response.json()
    assert payload["severity"] == 2
    doc = client.get(f"/api/assessments/{doc_id}").json()
    assignments = {
        a["factor"]: a
        for s in doc["source_assessments"] if s["source"] == "mounteddevices-key"
        for a in s["assignments"]
    }
    assert assignments["edit-software"]["provenance"] == "manual-override-of-suggestion"


def test_put_invalid_category_is_422(client):
    doc_id = create_usb_doc(client)
    response = client.put(
        f"/api/assessments/{doc_id}/assignments",
        json={"source": "usbstor-key", "factor": "visibility", "category": "no-encryption"},
    )
    assert response.status_code == 422
    payload = response.json()
    assert payload["error"] == "invalid-category-for-factor"
    assert "detail" in payload


def test_whatif_endpoint(client):
    doc_id = create_usb_doc(client)
    response = client.post(
        f"/api/assessments/{doc_id}/whatif",
        json={"profile_name": "corporate-standard-user"},
    )
    assert response.status_code == 200
    entries = response.json()["entries"]
    cell = next(e for e in entries if e["source"] == "usbstor-key" and e["factor"] == "permissions")
    assert (cell["old_severity"], cell["new_severity"]) == (3, 1)


def test_whatif_identity_empty(client):
    doc_id = create_usb_doc(client)
    response = client.post(f"/api/assessments/{doc_id}/whatif", json={"profile_name": "home-admin"})
    assert response.json()["entries"] == []


def test_report_formats(client):
    doc_id = create_usb_doc(client)
    html = client.get(f"/api/assessments/{doc_id}/report", params={"format": "html"})
    assert html.status_code == 200
    assert "text/html" in html.headers["content-type"]
    assert "#F5B7B1" in html.text
    payload = client.get(f"/api/assessments/{doc_id}/report", params={"format": "json"}).json()
    assert payload["score_vectors"]["setupapi-dev-log"] == [3, 3, 3, 2, 3, 3, 2]


def test_rank_endpoint(client):
    doc_id = create_usb_doc(client)
    payload = client.get(f"/api/assessments/{doc_id}/rank").json()
    assert payload["rank"][0]["source"] == "windows-event-logs"


def test_cscale_endpoint(client):
    doc_id = create_usb_doc(client)
    response = client.post(
        f"/api/assessments/{doc_id}/cscale",
        json={"sources": ["setupapi-dev-log"]},
    )
    payload = response.json()
    assert payload["non_resistant_count"] == 1
    assert "ADVISORY" in payload["advisory_text"]


def test_cscale_empty_sources_is_422(client):
    doc_id = create_usb_doc(client)
    response = client.post(f"/api/assessments/{doc_id}/cscale", json={"sources": []})
    assert response.status_code == 422
    assert response.json()["error"] == "empty-source-set"


def test_ingest_endpoint(client):
    content = (
        "datetime,source,message\n"
        "2023-01-05T10:00:00Z,WinRegistry,a\n"
        "2023-01-05T10:00:01Z,EVT,b\n"
    )
    response = client.post("/api/ingest", json={"content": content, "format": "csv"})
    payload = response.json()
    assert payload["mapped"] == ["windows-event-logs", "usbstor-key"]
    assert payload["rejected_rows"] == 0


def test_inline_profile_accepted(client):
    profile = {
        "os_family": "windows-workstation",
        "user_privilege": "standard-user",
        "installed_software": [],
        "execution_facets": [],
        "volume_encryption": "none",
        "setting_flags": {},
    }
    response = client.post(
        "/api/assessments",
        json={"title": "inline", "sources": ["usbstor-key"], "profile": profile},
    )
    assert response.status_code == 201


def test_concurrent_distinct_documents(client):
    first = create_usb_doc(client)
    second = create_usb_doc(client)
    assert first != second
    assert client.get(f"/api/assessments/{first}").status_code == 200
    assert client.get(f"/api/assessments/{second}").status_code == 200


# -- CLI/HTTP parity ----------------------------------------------------------

def _leaf_subcommands(parser) -> set[str]:
    leaves = set()
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            for name, sub in action.choices.items():
                nested = _leaf_subcommands(sub)
                if nested:
                    leaves.update(f"{name} {leaf}" for leaf in nested)
                else:
                    leaves.add(name)
    return leaves


def test_capability_inventory_covers_cli_and_http(tmp_path):
    subcommands = _leaf_subcommands(build_parser())
    assert subcommands == {
        "rubric validate", "kb validate", "assess new", "assess set",
        "score", "rank", "whatif", "ingest", "report", "cscale", "serve",
    }
    inventory_cli = {entry["cli"] for entry in CAPABILITIES}
    for subcommand in subcommands:
        assert any(value == subcommand or value.startswith(subcommand + " ") for value in inventory_cli), subcommand

    app = create_app(ServiceConfig(data_dir=tmp_path / "docs"))
    routes = {
        (method, route.path)
        for route in app.routes
        if getattr(route, "methods", None) and route.path.startswith("/api")
        for method in route.methods
        if method != "HEAD"
    }
    inventory_http = {entry["http"] for entry in CAPABILITIES if entry["http"]}
    assert inventory_http <= routes
    assert routes <= inventory_http
    for entry in CAPABILITIES:
        assert entry["cli"], entry
        assert entry["http"] is not None or entry["capability"] == "serve"


def test_report_unknown_format_is_422(client):
    doc_id = create_usb_doc(client)
    response = client.get(f"/api/assessments/{doc_id}/report", params={"format": "pdf"})
    assert response.status_code == 422
    assert response.json()["error"] == "unknown-format"


def test_assessment_body_without_profile_is_400(client):
    response = client.post("/api/assessments", json={"title": "x", "sources": []})
    assert response.status_code == 400
    assert response.json()["error"] == "schema-error"


def test_unknown_profile_name_is_404(client):
    response = client.post(
        "/api/assessments",
        json={"title": "x", "sources": [], "profile_name": "does-not-exist"},
    )
    assert response.status_code == 404
    assert response.json()["error"] == "not-found"


def test_rank_of_incomplete_document_is_409(client, tmp_path):
    doc_id = create_usb_doc(client)
    # drop one assignment through the store to simulate an older partial doc
    from tamperscore.assessment import dump_document, load_document

    from pathlib import Path

    config = client.app.state.config
    path = next(p for p in Path(config.data_dir).glob("*.json") if p.stem == doc_id)
    doc = load_document(path.read_bytes())
    doc.source_assessments[0].assignments.pop()
    path.write_bytes(dump_document(doc))

    response = client.get(f"/api/assessments/{doc_id}/rank")
    assert response.status_code == 409
    assert response.json()["error"] == "incomplete-assessment"
