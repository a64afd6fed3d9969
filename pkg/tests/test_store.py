import random

import pytest

from wikibridge.datatypes import Datatype
from wikibridge.store import (
    NQuadsSyntaxError,
    Quad,
    QuadPattern,
    QuadStore,
    import_nquads,
)
from wikibridge.terms import Blank, Iri, Literal

from generators import rand_store
from oracles import match_oracle

G1 = Iri("http://wikibridge.example/graph/A/1")
G2 = Iri("http://wikibridge.example/graph/B/1")
TYPE = Iri("http://www.w3.org/1999/02/22-rdf-syntax-ns#type")


def q(s="s", p="p", o="o", g=G1):
    return Quad(
        Iri(f"http://x.example/{s}"),
        Iri(f"http://x.example/{p}"),
        Iri(f"http://x.example/{o}") if isinstance(o, str) else o,
        g,
    )


class TestInsertRemove:
    def test_set_semantics(self):
        store = QuadStore()
        assert store.insert(q()) is True
        assert store.insert(q()) is False
        assert len(store) == 1

    def test_graph_part_of_identity(self):
        store = QuadStore()
        store.insert(q(g=G1))
        store.insert(q(g=G2))
        assert len(store) == 2

    def test_remove(self):
        store = QuadStore()
        store.insert(q())
        assert store.remove(q()) is True
        assert store.remove(q()) is False
        assert len(store) == 0

    def test_insert_remove_restores_state(self):
        store = QuadStore()
        quads = [q(s=f"s{i}", o=f"o{i % 3}") for i in range(20)]
        for item in quads:
            store.insert(item)
        before = store.export_nquads()
        extra = q(s="fresh", p="fresh", o="fresh")
        store.insert(extra)
        store.remove(extra)
        assert store.export_nquads() == before

    def test_drop_graph(self):
        store = QuadStore()
        for i in range(4):
            store.insert(q(s=f"s{i}", g=G1))
        store.insert(q(s="other", g=G2))
        assert store.drop_graph(G1) == 4
        assert store.match(g=G1) == []
        assert len(store.match(g=G2)) == 1
        assert store.drop_graph(Iri("http://x.example/absent")) == 0


class TestMatch:
    def test_type_pattern(self):
        store = QuadStore()
        typed = [q(s=f"s{i}", p="t", o="C") for i in range(2)]
        for item in typed:
            store.insert(item)
        for i in range(3):
            store.insert(q(s=f"s{i}", p="other", o=f"o{i}"))
        got = store.match(p=Iri("http://x.example/t"))
        assert set(got) == set(typed)

    def test_all_wildcard(self):
        store = QuadStore()
        quads = {q(s=f"s{i}") for i in range(5)}
        for item in quads:
            store.insert(item)
        assert set(store.match()) == quads

    def test_fully_concrete_absent(self):
        store = QuadStore()
        store.insert(q())
        absent = q(s="nope")
        got = store.match(absent.s, absent.p, absent.o, absent.g)
        assert got == []

    def test_match_pattern_object(self):
        store = QuadStore()
        store.insert(q())
        assert store.match_pattern(QuadPattern()) == store.match()

    def test_index_coherence_random(self):
        rng = random.Random(99)
        for _ in range(25):
            store = rand_store(rng, max_quads=120)
            quads = list(store.quads())
            subjects = {x.s for x in quads}
            predicates = {x.p for x in quads}
            objects = {x.o for x in quads}
            graphs = {x.g for x in quads}
            cases = []
            for _ in range(40):
                s = rng.choice(sorted(subjects, key=str)) if rng.random() < 0.5 else None
                p = rng.choice(sorted(predicates, key=str)) if rng.random() < 0.5 else None
                o = rng.choice(sorted(objects, key=str)) if rng.random() < 0.5 else None
                g = rng.choice(sorted(graphs, key=str)) if rng.random() < 0.5 else None
                cases.append((s, p, o, g))
            for s, p, o, g in cases:
                assert set(store.match(s, p, o, g)) == match_oracle(store, s, p, o, g)

    def test_graph_isolation(self):
        rng = random.Random(5)
        store = rand_store(rng)
        graphs = store.graphs()
        if len(graphs) < 2:
            return
        g_removed, g_kept = graphs[0], graphs[1]
        before = set(store.match(g=g_kept))
        store.drop_graph(g_removed)
        assert set(store.match(g=g_kept)) == before


class TestNQuads:
    def test_empty_store(self):
        assert QuadStore().export_nquads() == ""

    def test_round_trip_random(self):
        rng = random.Random(123)
        store = rand_store(rng, max_quads=100)
        text = store.export_nquads()
        back = import_nquads(text)
        assert set(back.quads()) == set(store.quads())

    def test_export_deterministic(self):
        rng = random.Random(3)
        store = rand_store(rng)
        again = QuadStore(sorted(store.quads(), key=lambda x: str(x), reverse=True))
        assert store.export_nquads() == again.export_nquads()

    def test_malformed_line(self):
        with pytest.raises(NQuadsSyntaxError) as e:
            import_nquads("malformed line")
        assert e.value.line == 1

    def test_line_number_in_error(self):
        good = q()
        text = QuadStore([good]).export_nquads() + "<a> <b> broken\n"
        with pytest.raises(NQuadsSyntaxError) as e:
            import_nquads(text)
        assert e.value.line == 2

    def test_literals_round_trip(self):
        tricky = [
            Literal('say "hi"\nline2\ttab\\end'),
            Literal("42", Datatype.INTEGER),
            Literal("2020-02-29", Datatype.DATE),
            Literal("control\x01char"),
        ]
        store = QuadStore()
        for i, lit in enumerate(tricky):
            store.insert(q(s=f"s{i}", o=lit))
        back = import_nquads(store.export_nquads())
        assert set(back.quads()) == set(store.quads())

    def test_blank_nodes_preserved(self):
        store = QuadStore()
        store.insert(
            Quad(Blank("a1"), Iri("http://x.example/p"), Blank("a2"), G1)
        )
        text = store.export_nquads()
        assert "_:a1" in text and "_:a2" in text
        assert set(import_nquads(text).quads()) == set(store.quads())

    def test_duplicate_lines_collapse(self):
        line = "<http://x.example/s> <http://x.example/p> <http://x.example/o> <http://x.example/g> ."
        store = import_nquads(line + "\n" + line + "\n")
        assert len(store) == 1
