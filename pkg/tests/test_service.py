import threading
import time

import pytest
from fastapi.testclient import TestClient

from wikibridge.service import (
    ServiceConfig,
    WikiState,
    create_app,
    hash_password,
    render_users,
    verify_password,
)

ONTOLOGY = """\
class Structure
class Building subclassof Structure
class Church subclassof Building
datatype property name domain Structure range string
datatype property height domain Building range decimal max 1
relation Dating
  role method : string required
  role year : integer
rule "dating-needs-year" when { (?d, rdf:type, wb:onto/Dating) } expect { (?d, wb:onto/year, ?y) }
"""

ACL = """\
user admin groups admins
user alice groups specialists
user bob groups contributors
user carol groups readers
allow group:readers read *
allow group:contributors read *
allow group:contributors edit *
allow group:contributors annotate *
allow group:specialists read *
allow group:specialists edit *
allow group:specialists annotate *
allow group:specialists query *
allow group:admins read *
allow group:admins edit *
allow group:admins annotate *
allow group:admins query *
allow group:admins admin *
"""

PASSWORDS = {
    "admin": "admin-pw",
    "alice": "alice-pw",
    "bob": "bob-pw",
    "carol": "carol-pw",
}


class FakeClock:
    def __init__(self):
        self.tick = 0

    def __call__(self):
        self.tick += 1
        return f"2026-08-10T00:{self.tick // 60:02d}:{self.tick % 60:02d}Z"


def make_state(tmp_path, **config_kwargs) -> WikiState:
    data = tmp_path / "data"
    data.mkdir(parents=True, exist_ok=True)
    (data / "ontology.wbo").write_text(ONTOLOGY, "utf-8")
    (data / "acl.conf").write_text(ACL, "utf-8")
    (data / "users.auth").write_text(
        render_users({u: hash_password(p, iterations=1000) for u, p in PASSWORDS.items()}),
        "utf-8",
    )
    config_kwargs.setdefault("clock", FakeClock())
    return WikiState.load(ServiceConfig(data_dir=data, **config_kwargs))


@pytest.fixture()
def state(tmp_path):
    return make_state(tmp_path)


@pytest.fixture()
def client(state):
    return TestClient(create_app(state))


def login(client, user):
    response = client.post(
        "/api/login", json={"user": user, "password": PASSWORDS[user]}
    )
    assert response.status_code == 200
    return {"Authorization": f"Bearer {response.json()['token']}"}


GOOD_PAGE = 'A church. {{#ann: type=Church | name="st m" | height=12.5}}'


class TestAuth:
    def test_login_and_use_token(self, client):
        headers = login(client, "alice")
        assert client.get("/api/pages", headers=headers).status_code == 200

    def test_wrong_password(self, client):
        response = client.post("/api/login", json={"user": "alice", "password": "nope"})
        assert response.status_code == 401

    def test_bad_token(self, client):
        response = client.get("/api/pages", headers={"Authorization": "Bearer junk"})
        assert response.status_code == 401

    def test_anonymous_is_denied_without_rules(self, client):
        response = client.get("/api/pages")
        assert response.status_code == 403

    def test_password_hashing_round_trip(self):
        stored = hash_password("secret", iterations=1000)
        assert verify_password("secret", stored)
        assert not verify_password("other", stored)

    def test_token_idle_expiry(self, tmp_path):
        state = make_state(tmp_path, token_ttl=0.05)
        client = TestClient(create_app(state))
        headers = login(client, "alice")
        assert client.get("/api/pages", headers=headers).status_code == 200
        time.sleep(0.1)
        assert client.get("/api/pages", headers=headers).status_code == 401


class TestPutGet:
    def test_create_and_fetch(self, client):
        headers = login(client, "alice")
        put = client.put(
            "/api/pages/Main/StMartin", json={"text": GOOD_PAGE}, headers=headers
        )
        assert put.status_code == 200, put.text
        body = put.json()
        assert body["revision"]["number"] == 1
        assert body["report"]["violations"] == []

        got = client.get("/api/pages/Main/StMartin", headers=headers)
        assert got.status_code == 200
        page = got.json()
        assert page["text"] == GOOD_PAGE
        assert page["annotations"]["count"] == 3
        assert "wb" not in page["annotations"]["nquads"]  # full IRIs in N-Quads

    def test_unknown_page_404(self, client):
        headers = login(client, "alice")
        assert client.get("/api/pages/Main/Nope", headers=headers).status_code == 404

    def test_parse_error_400(self, client):
        headers = login(client, "alice")
        response = client.put(
            "/api/pages/Main/Broken", json={"text": "{{#ann: x=1"}, headers=headers
        )
        assert response.status_code == 400
        assert response.json()["diagnostics"][0]["kind"] == "UnterminatedBlock"

    def test_conflict_409(self, client):
        headers = login(client, "alice")
        client.put("/api/pages/Main/P", json={"text": GOOD_PAGE}, headers=headers)
        response = client.put(
            "/api/pages/Main/P",
            json={"text": GOOD_PAGE + " edited", "base_revision": 3},
            headers=headers,
        )
        assert response.status_code == 409
        # nothing written
        revisions = client.get("/api/pages/Main/P/revisions", headers=headers).json()
        assert [r["number"] for r in revisions["revisions"]] == [1]

    def test_acl_deny_403(self, client):
        headers = login(client, "carol")  # readers: no edit
        response = client.put(
            "/api/pages/Main/P", json={"text": "hello"}, headers=headers
        )
        assert response.status_code == 403
        assert response.json()["action"] == "edit"

    def test_strict_mode_rejects_and_changes_nothing(self, client, state):
        headers = login(client, "alice")
        before = state.export_nquads()
        response = client.put(
            "/api/pages/Main/Bad",
            json={"text": '{{#ann: type=Church | height="tall"}}', "mode": "strict"},
            headers=headers,
        )
        assert response.status_code == 422
        body = response.json()
        assert body["report"]["violations"][0]["kind"] == "DatatypeViolation"
        assert state.export_nquads() == before
        assert client.get("/api/pages/Main/Bad", headers=headers).status_code == 404

    def test_lenient_mode_saves_with_violations(self, client):
        headers = login(client, "alice")
        response = client.put(
            "/api/pages/Main/Flawed",
            json={"text": '{{#ann: type=Church | height="tall"}}'},
            headers=headers,
        )
        assert response.status_code == 200
        assert response.json()["report"]["violations"] != []


class TestRevisions:
    def test_history(self, client):
        headers = login(client, "alice")
        texts = [GOOD_PAGE, GOOD_PAGE + " v2", GOOD_PAGE + " v3"]
        for i, text in enumerate(texts):
            response = client.put(
                "/api/pages/Main/P",
                json={"text": text, "base_revision": i},
                headers=headers,
            )
            assert response.status_code == 200
        listing = client.get("/api/pages/Main/P/revisions", headers=headers).json()
        assert [r["number"] for r in listing["revisions"]] == [3, 2, 1]
        rev2 = client.get("/api/pages/Main/P/revisions/2", headers=headers)
        assert rev2.json()["text"] == texts[1]
        assert client.get("/api/pages/Main/P/revisions/0", headers=headers).status_code == 404

    def test_only_current_graph_queryable(self, client, state):
        headers = login(client, "alice")
        client.put("/api/pages/Main/P", json={"text": GOOD_PAGE}, headers=headers)
        client.put("/api/pages/Main/P", json={"text": GOOD_PAGE + " x"}, headers=headers)
        graphs = {g.value for g in state.store.graphs()}
        assert "http://wikibridge.example/graph/P/2" in graphs
        assert "http://wikibridge.example/graph/P/1" not in graphs


class TestCheckEndpoint:
    def test_dry_run_is_stateless(self, client, state):
        headers = login(client, "alice")
        before = state.export_nquads()
        response = client.post(
            "/api/check", json={"text": '{{#ann: colour="red"}}'}, headers=headers
        )
        assert response.status_code == 200
        kinds = [v["kind"] for v in response.json()["violations"]]
        assert "UndefinedTerm" in kinds
        assert state.export_nquads() == before
        assert client.get("/api/pages", headers=headers).json()["pages"] == []

    def test_parse_errors_in_report(self, client):
        headers = login(client, "alice")
        response = client.post(
            "/api/check", json={"text": "{{#ann: x=1"}, headers=headers
        )
        assert response.status_code == 400
        assert response.json()["diagnostics"][0]["kind"] == "UnterminatedBlock"

    def test_check_by_title(self, client):
        headers = login(client, "alice")
        client.put("/api/pages/Main/P", json={"text": GOOD_PAGE}, headers=headers)
        response = client.post("/api/check", json={"title": "P"}, headers=headers)
        assert response.status_code == 200
        assert response.json()["violations"] == []

    def test_identical_checks_identical_reports(self, client):
        headers = login(client, "alice")
        body = {"text": '{{#ann: type=Church | height="tall"}}'}
        a = client.post("/api/check", json=body, headers=headers).json()
        b = client.post("/api/check", json=body, headers=headers).json()
        a.pop("checked_at")
        b.pop("checked_at")
        assert a == b


class TestSparqlEndpoint:
    def test_query(self, client):
        headers = login(client, "alice")
        client.put("/api/pages/Main/A", json={"text": GOOD_PAGE}, headers=headers)
        response = client.post(
            "/api/sparql",
            json={"query": "SELECT ?p WHERE { ?p rdf:type wb:onto/Church . }"},
            headers=headers,
        )
        assert response.status_code == 200
        bindings = response.json()["results"]["bindings"]
        assert bindings == [
            {"p": {"type": "uri", "value": "http://wikibridge.example/page/A"}}
        ]

    def test_entailment(self, client):
        headers = login(client, "alice")
        client.put("/api/pages/Main/A", json={"text": GOOD_PAGE}, headers=headers)
        q = "SELECT ?p WHERE { ?p rdf:type wb:onto/Building . }"
        off = client.post("/api/sparql", json={"query": q}, headers=headers).json()
        on = client.post(
            "/api/sparql", json={"query": q, "entailment": True}, headers=headers
        ).json()
        assert off["results"]["bindings"] == []
        assert len(on["results"]["bindings"]) == 1

    def test_syntax_error_400(self, client):
        headers = login(client, "alice")
        response = client.post(
            "/api/sparql", json={"query": "SELECT ?x WHERE { }"}, headers=headers
        )
        assert response.status_code == 400
        assert "offset" in response.json()

    def test_reader_cannot_query(self, client):
        headers = login(client, "carol")
        response = client.post(
            "/api/sparql", json={"query": "SELECT ?p WHERE { ?p ?q ?r . }"}, headers=headers
        )
        assert response.status_code == 403

    def test_sparql_query_media_type(self, client):
        headers = login(client, "alice")
        client.put("/api/pages/Main/A", json={"text": GOOD_PAGE}, headers=headers)
        response = client.post(
            "/api/sparql",
            content="SELECT ?p WHERE { ?p rdf:type wb:onto/Church . }",
            headers={**headers, "Content-Type": "application/sparql-query"},
        )
        assert response.status_code == 200


class TestOntologyEndpoint:
    def test_get_requires_admin(self, client):
        assert client.get("/api/ontology", headers=login(client, "alice")).status_code == 403
        response = client.get("/api/ontology", headers=login(client, "admin"))
        assert response.status_code == 200
        assert response.text == ONTOLOGY

    def test_put_validates_and_swaps(self, client, state):
        headers = login(client, "admin")
        bad = "property height domain Missing range decimal"
        response = client.put("/api/ontology", content=bad, headers=headers)
        assert response.status_code == 422
        assert state.ontology_text == ONTOLOGY  # old ontology retained

        good = ONTOLOGY + "class Chapel subclassof Church\n"
        response = client.put("/api/ontology", content=good, headers=headers)
        assert response.status_code == 200
        assert client.get("/api/ontology", headers=headers).text == good

    def test_ontology_change_refreshes_report(self, client):
        alice = login(client, "alice")
        admin = login(client, "admin")
        client.put("/api/pages/Main/P", json={"text": GOOD_PAGE}, headers=alice)
        page = client.get("/api/pages/Main/P", headers=alice).json()
        assert page["report"]["violations"] == []
        # Drop the Church class: existing page becomes invalid without a new revision.
        reduced = ONTOLOGY.replace("class Church subclassof Building\n", "")
        assert client.put("/api/ontology", content=reduced, headers=admin).status_code == 200
        page = client.get("/api/pages/Main/P", headers=alice).json()
        kinds = [v["kind"] for v in page["report"]["violations"]]
        assert "UndefinedTerm" in kinds
        assert page["revision"]["number"] == 1


class TestRebuildInvariant:
    def test_reload_reproduces_store(self, tmp_path):
        state = make_state(tmp_path)
        client = TestClient(create_app(state))
        headers = login(client, "alice")
        client.put("/api/pages/Main/A", json={"text": GOOD_PAGE}, headers=headers)
        client.put(
            "/api/pages/Main/B",
            json={"text": '{{#rel: Dating | method="C14" | year=850}}'},
            headers=headers,
        )
        export_live = state.export_nquads()
        reloaded = WikiState.load(state.config)
        assert reloaded.export_nquads() == export_live

    def test_history_files_immutable(self, tmp_path):
        state = make_state(tmp_path)
        client = TestClient(create_app(state))
        headers = login(client, "alice")
        client.put("/api/pages/Main/A", json={"text": GOOD_PAGE}, headers=headers)
        first = (state.config.data_dir / "pages" / "Main" / "A" / "1.wiki").read_bytes()
        client.put("/api/pages/Main/A", json={"text": GOOD_PAGE + " v2"}, headers=headers)
        assert (state.config.data_dir / "pages" / "Main" / "A" / "1.wiki").read_bytes() == first


class TestStaticAssets:
    def test_ui_mounted_when_configured(self, tmp_path):
        static = tmp_path / "static"
        static.mkdir()
        (static / "index.html").write_text("<!doctype html><title>ui</title>", "utf-8")
        state = make_state(tmp_path, static_dir=static)
        client = TestClient(create_app(state))
        response = client.get("/ui/")
        assert response.status_code == 200
        assert "ui" in response.text

    def test_no_mount_without_config(self, client):
        assert client.get("/ui/").status_code == 404


class TestConcurrency:
    def test_parallel_reads_and_writes(self, client):
        headers = login(client, "alice")
        client.put("/api/pages/Main/P", json={"text": GOOD_PAGE}, headers=headers)
        errors = []

        def reader():
            for _ in range(30):
                r = client.get("/api/pages/Main/P", headers=headers)
                if r.status_code != 200:
                    errors.append(r.status_code)

        def writer():
            for i in range(10):
                r = client.put(
                    "/api/pages/Main/P", json={"text": GOOD_PAGE + f" v{i}"}, headers=headers
                )
                if r.status_code != 200:
                    errors.append(r.status_code)

        threads = [threading.Thread(target=t) for t in (reader, writer, reader)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert errors == []
