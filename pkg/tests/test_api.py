import json

import pytest

from dfbench.api import ENDPOINTS, create_app, encode_request
from dfbench.evaluate import Evaluator
from dfbench.metrics import Suite
from dfbench.records import GroundTruthRecord
from dfbench.roundtrip import reference_payloads
from dfbench.scorers.registry import dump_bytes
from dfbench.scorers.sqlite import SqliteSchemaReport
from fastapi.testclient import TestClient

FSS = ENDPOINTS[Suite.STRING_SEARCH]
DFR = ENDPOINTS[Suite.DELETED_FILE_RECOVERY]
FC = ENDPOINTS[Suite.FILE_CARVING]
WRR = ENDPOINTS[Suite.WINDOWS_REGISTRY]
SDR = ENDPOINTS[Suite.SQLITE]


def post(client, test_case, payload, **kw):
    path, body = encode_request(test_case, payload, **kw)
    return client.post(path, **body)


def reference(store, case):
    return reference_payloads(store, case)[0]


def test_string_search_round_trip(client, loaded_store):
    r = post(client, "FT-SS-01", reference(loaded_store, "FT-SS-01"), tool="grep", job_id="j1")
    assert r.status_code == 200
    body = r.json()
    assert body["f1"] == 1.0 and body["tool"] == "grep" and body["job_id"] == "j1"
    assert set(body) >= {"test_case", "tp", "fp", "fn", "precision", "recall", "f1"}


def test_job_id_defaults_to_fresh_token(client, loaded_store):
    payload = reference(loaded_store, "FT-SS-01")
    a = post(client, "FT-SS-01", payload).json()["job_id"]
    b = post(client, "FT-SS-01", payload).json()["job_id"]
    assert a and b and a != b


@pytest.mark.parametrize(
    "path, body, status",
    [
        (FSS, {"base_test_case": "FT-SS-99", "os": "windows", "content": "0001 x"}, 404),
        (FSS, {"base_test_case": "FT-SS-01", "content": "0001 x"}, 422),
        (FSS, {"base_test_case": "FT-SS-01", "os": "windows", "content": "x", "bogus": 1}, 422),
        (DFR, {"base_test_case": "DFR-06", "blocks": [1, 2]}, 404),
        (DFR, {"base_test_case": "DFR-01"}, 422),
        (DFR, {"base_test_case": "DFR-01", "file_name": "only-a-name"}, 422),
        (DFR, {"base_test_case": "DFR-01-BOGUS", "blocks": [1]}, 404),
        (SDR, {"base_test_case": "SFT-01", "tables": []}, 422),
        (SDR, {"base_test_case": "SFT-09", "source_file": "x"}, 404),
        (SDR, {"source_file": "x"}, 422),
        (DFR, {"base_test_case": "FT-SS-01", "blocks": [1]}, 404),
    ],
)
def test_error_statuses(client, path, body, status):
    assert client.post(path, json=body).status_code == status


def test_malformed_json(client):
    r = client.post(FSS, content=b"{not json", headers={"content-type": "application/json"})
    assert r.status_code == 400
    assert client.post(FSS, json=[1, 2]).status_code == 400


def test_dfr_variants(client, loaded_store):
    for case in ("DFR-01", "DFR-01-MAC", "DFR-01-SIZE", "DFR-04-CHAR"):
        r = post(client, case, reference(loaded_store, case))
        assert r.status_code == 200 and r.json()["f1"] == 1.0, case


def test_dfr_single_file_fields(client, loaded_store):
    (f,) = reference(loaded_store, "DFR-01-MAC")[:1]
    body = {"base_test_case": "DFR-01-MAC", "file_name": f.file_name,
            "accessed": f.accessed, "modified": f.modified, "created": f.created}
    r = client.post(DFR, json=body)
    assert r.status_code == 200 and r.json()["tp"] == 1


def test_dfr_block_encodings(client, loaded_store):
    files = reference(loaded_store, "DFR-02")
    ranges = []
    for f in files:
        blocks = sorted(f.blocks)
        ranges.append({"blocks": [[blocks[0], blocks[-1]]] if blocks == list(range(blocks[0], blocks[-1] + 1))
                       else blocks})
    r = client.post(DFR, json={"base_test_case": "DFR-02", "files": ranges})
    assert r.json()["f1"] == 1.0
    r = client.post(DFR, json={"base_test_case": "DFR-02", "files": [{"blocks": [[5, 2]]}]})
    assert r.status_code == 422


def test_carving(client, loaded_store):
    payload = reference(loaded_store, "carve-conti-bmp")
    r = post(client, "carve-conti-bmp", payload)
    assert r.status_code == 200
    body = r.json()
    assert body["f1"] == 1.0
    assert len(body["verdicts"]) == len(payload)
    junk = client.post(FC, data={"base_test_case": "carve-conti-bmp"},
                       files=[("f", ("junk.bin", b"\x01" * 4096))])
    assert junk.json()["fp"] >= 1
    none = client.post(FC, data={"base_test_case": "carve-conti-bmp"})
    assert none.status_code == 400
    empty = client.post(FC, data={"base_test_case": "carve-conti-bmp"}, files=[("f", ("e.bin", b""))])
    assert empty.status_code == 400


def test_upload_cap(evaluator):
    small = TestClient(create_app(evaluator, max_upload_bytes=1024))
    r = small.post(FC, data={"base_test_case": "carve-conti-bmp"}, files=[("f", ("big.bin", b"\x00" * 4096))])
    assert r.status_code == 413
    r = small.post(FC, data={"base_test_case": "carve-conti-bmp"}, files=[("f", ("huge.bin", b"\x00" * 4_000_000))])
    assert r.status_code == 413


def test_registry(client, loaded_store):
    rows = reference(loaded_store, "MR-02")
    assert post(client, "MR-02", rows).json()["f1"] == 1.0
    extra = rows + [type(rows[0])("HKLM\\Extra\\Key", "REG_SZ", "surplus", "")]
    body = post(client, "MR-02", extra).json()
    assert body["fp"] == 1 and body["fn"] == 0
    bad = client.post(WRR, data={"base_test_case": "MR-02"},
                      files=[("dump", ("d.csv", b"k,REG_SZ,v,\n"))])
    assert bad.status_code == 400 and bad.json()["line"] == 1
    two = client.post(WRR, data={"base_test_case": "MR-02"},
                      files=[("a", ("a.csv", dump_bytes(rows))), ("b", ("b.csv", dump_bytes(rows)))])
    assert two.status_code == 400
    assert post(client, "CR-01", rows).status_code == 404


def test_sqlite(client, loaded_store):
    for case in ("SFT-01", "SFT-02", "SFT-03", "SFT-04"):
        for payload in reference_payloads(loaded_store, case):
            r = post(client, case, payload)
            assert r.status_code == 200 and r.json()["f1"] == 1.0, case
    (sft04,) = reference_payloads(loaded_store, "SFT-04")[:1]
    wrong = client.post(SDR, json={"base_test_case": "SFT-04", "database_name": sft04.database_name,
                                   "source_file": "nope.db"})
    assert wrong.json()["f1"] == 0.0
    # two databases back SFT-04, so the report must name one
    ambiguous = client.post(SDR, json={"base_test_case": "SFT-04", "source_file": "x.db"})
    assert ambiguous.status_code == 422


def test_sqlite_duplicate_tables(client, loaded_store):
    payload = reference(loaded_store, "SFT-02")
    dup = SqliteSchemaReport(list(payload.tables) * 2, payload.database_name)
    assert post(client, "SFT-02", dup).status_code == 422


def test_each_success_appends_one_row(client, loaded_store):
    for case in ["FT-SS-02", "DFR-03", "carve-frag-png", "MR-03", "SFT-03"]:
        before = len(loaded_store.list_results())
        body = post(client, case, reference(loaded_store, case)).json()
        after = loaded_store.list_results()
        assert len(after) == before + 1
        last = after[-1]
        assert (last.counts.tp, last.counts.fp, last.counts.fn) == (body["tp"], body["fp"], body["fn"])
        assert (last.test_case, last.job_id, last.f1) == (case, body["job_id"], body["f1"])


def test_failures_append_nothing(client, loaded_store):
    before = len(loaded_store.list_results())
    client.post(FSS, json={"base_test_case": "FT-SS-99", "os": "windows", "content": "x"})
    client.post(FSS, json={"base_test_case": "FT-SS-01"})
    client.post(FC, data={"base_test_case": "carve-conti-bmp"})
    assert len(loaded_store.list_results()) == before


def test_missing_ground_truth_file_is_server_error(tmp_path, loaded_store):
    loaded_store.insert_ground_truth(GroundTruthRecord(
        "carve-non-png", Suite.FILE_CARVING, carve_type="non", payload=str(tmp_path / "vanished.png")))
    client = TestClient(create_app(Evaluator(loaded_store)))
    r = client.post(FC, data={"base_test_case": "carve-non-png"}, files=[("f", ("a.png", b"\x89PNG"))])
    assert r.status_code == 500
    assert json.loads(r.content)["detail"].startswith("GroundTruthUnavailable")
