import pytest
from fastapi.testclient import TestClient

from app.api.main import app
from app.database.database import configure_engine


@pytest.fixture
def client(tmp_path):
    configure_engine(f"sqlite:///{tmp_path / 'api.db'}")
    return TestClient(app)


def test_health(client):
    assert client.get("/health").json()["status"] == "healthy"


def test_realm_and_relations(client):
    realm = client.get("/realm").json()
    assert realm["columns"]["G9-4"]["23"] == -1
    assert realm["instruction_sets"]["G9-1"] == ["GGG", "RRR"]
    relations = client.get("/relations").json()
    assert [r["label"] for r in relations["relations"]][:3] == ["23", "26", "27"]
    assert relations["excluded_row_pairs"] == [[2, 4], [3, 7], [6, 8]]


def test_quantum_probability(client):
    body = client.get("/quantum/probability", params={"outcome": "RR", "theta": 120}).json()
    assert body["probability"] == "1/8"
    assert client.get("/quantum/probability", params={"outcome": "XX", "theta": 0}).status_code == 400


def test_quantum_run(client):
    body = client.post("/quantum/run", json={"n_trials": 9_000, "seed": 1}).json()
    assert body["report"]["n_trials"] == 9_000
    assert body["report"]["case_a_same_fraction"] == 1.0


def test_bell(client):
    body = client.post("/bell", json={"distribution": "GGR:1,GRG:1,GRR:2"}).json()
    assert body["per_pair_fractions"]["23"] == "1/2"
    assert body["case_b_fraction"] == "1/3"
    assert client.post("/bell", json={"distribution": "nope"}).status_code == 400


def test_superdet(client):
    body = client.get("/superdet").json()
    assert set(body["scenario"]["aggregate_pair_marginal"].values()) == {"1/9"}


def test_mc_store_and_runs(client):
    body = client.post("/mc", json={"relation": "23", "n_vectors": 4_000, "seed": 6, "store": True}).json()
    assert body["tally"]["counts"][0] == 4_000
    assert body["recovered"] == body["tally"]["column_draws"]
    runs = client.get("/runs").json()["runs"]
    assert runs[0]["id"] == body["run_id"]
    assert client.get(f"/runs/{body['run_id']}").json()["run"]["relation"] == "23"
    assert client.delete(f"/runs/{body['run_id']}").status_code == 200
    assert client.get(f"/runs/{body['run_id']}").status_code == 404


def test_mc_unknown_relation(client):
    assert client.post("/mc", json={"relation": "99", "n_vectors": 10, "seed": 1}).status_code == 400


def test_recover(client):
    counts = [1000000, 250191, 250332, 250191, 1000000, 625225, 250332, 625225, 1000000]
    body = client.post("/recover", json={"counts": counts}).json()
    assert body["distribution"] == {"G9-1": 62874, "G9-2": 187317, "G9-3": 187458, "G9-4": 562351}
    assert body["same_different"]["ratio"] == "2"
    bad = client.post("/recover", json={"counts": [8, 1, 1, 1, 8, 1, 1, 1, 8]})
    assert bad.status_code == 400


def test_hull(client):
    body = client.post("/hull", json={"uniform_b": "1/4"}).json()
    assert body["summary"] == "infeasible, w1 = -1/8"
    assert client.post("/hull", json={}).status_code == 422
    assert client.post("/hull", json={"uniform_b": "abc"}).status_code == 400
    assert client.post("/hull", json={"uniform_b": "1/0"}).status_code == 400
    assert client.post("/hull", json={"target": ["1"] * 8 + ["x"]}).status_code == 400


def test_report(client):
    body = client.get("/report", params={"seed": 5, "n": 3_000}).json()
    assert body["report"]["seed"] == 5
    assert len(body["report"]["monte_carlo"]) == 12


def test_bad_run_parameters_are_rejected(client):
    assert client.post("/quantum/run", json={"n_trials": 10, "seed": -1}).status_code == 400
    assert client.post("/bell", json={"n_trials": 10, "seed": -5}).status_code == 400
    assert client.get("/superdet", params={"n_trials": 10, "seed": -2}).status_code == 400
    assert client.get("/report", params={"seed": -3, "n": 100}).status_code == 400
