import pytest

from app.core.core_types import PAIR_LABELS
from app.core.errors import MalformedDomainError, UnknownRelationError
from app.services.local_realism_service import ALL_INSTRUCTION_SETS
from app.services.realm_matrix_service import (
    G9_LABELS,
    apply_relation,
    build_realm_matrix,
    enumerate_functional_relations,
    g9_vector,
    realm_matrix_service,
)

RELATION_LABELS = ["23", "26", "27", "28", "34", "36", "38", "46", "47", "48", "67", "78"]


def _minus_pairs(label):
    col = build_realm_matrix().column(label)
    return [PAIR_LABELS[r - 1] for r in col.minus_rows()]


def test_table_1_columns():
    m = build_realm_matrix()
    assert [c.label for c in m.columns] == list(G9_LABELS)
    assert _minus_pairs("G9-1") == list(PAIR_LABELS)
    assert _minus_pairs("G9-2") == ["11", "12", "21", "22", "33"]
    assert _minus_pairs("G9-3") == ["11", "13", "22", "31", "33"]
    assert _minus_pairs("G9-4") == ["11", "22", "23", "32", "33"]


def test_instruction_sets_collapse_in_mirror_pairs():
    assert g9_vector("GGR") == g9_vector("RRG")
    assert g9_vector("GGG") == g9_vector("RRR")
    assert len({g9_vector(s).entries for s in ALL_INSTRUCTION_SETS}) == 4
    assert [s.label for s in g9_vector("GRR").sources] == ["GRR", "RGG"]


def test_rows_of_realm_matrix():
    m = realm_matrix_service.matrix
    assert m.row(1) == (-1, -1, -1, -1)
    assert m.row(6) == (-1, 1, 1, -1)
    assert len(m.rows()) == 9


def test_twelve_functional_relations():
    relations = enumerate_functional_relations()
    assert [r.label for r in relations] == RELATION_LABELS
    for r in relations:
        assert len(r.codomain_rows) == 7
        assert len({col.label for col in r.lookup.values()}) == 4


def test_excluded_row_pairs_are_the_swapped_settings():
    excluded = realm_matrix_service.excluded_row_pairs()
    assert excluded == [(2, 4), (3, 7), (6, 8)]
    names = [tuple(PAIR_LABELS[r - 1] for r in rows) for rows in excluded]
    assert names == [("12", "21"), ("13", "31"), ("23", "32")]


def test_relation_23_lookup():
    r = realm_matrix_service.get_relation("23")
    assert r.setting_pair_names == ("12", "13")
    assert r.arrow == "23 -> 1456789"
    assert apply_relation(r, (-1, -1)).label == "G9-1"
    assert apply_relation(r, (-1, 1)).label == "G9-2"
    assert apply_relation(r, (1, -1)).label == "G9-3"
    assert apply_relation(r, (1, 1)).label == "G9-4"


@pytest.mark.parametrize("label", RELATION_LABELS)
@pytest.mark.parametrize("column", G9_LABELS)
def test_relation_application_recovers_every_column(label, column):
    r = realm_matrix_service.get_relation(label)
    col = build_realm_matrix().column(column)
    found = apply_relation(r, col.restrict(r.domain_rows))
    assert found.label == column
    assert found.restrict(r.codomain_rows) == col.restrict(r.codomain_rows)
    assert found.entries == col.entries


@pytest.mark.parametrize("label", RELATION_LABELS)
def test_relation_application_matches_every_instruction_set(label):
    r = realm_matrix_service.get_relation(label)
    for s in ALL_INSTRUCTION_SETS:
        record = g9_vector(s)
        assert apply_relation(r, record.restrict(r.domain_rows)).entries == record.entries


def test_relation_67_lookup():
    r = realm_matrix_service.get_relation("67")
    assert r.setting_pair_names == ("23", "31")
    assert apply_relation(r, (1, -1)).label == "G9-3"
    assert apply_relation(r, (-1, 1)).label == "G9-4"
    assert apply_relation(r, (1, 1)).label == "G9-2"
    assert apply_relation(r, (-1, -1)).label == "G9-1"


def test_relation_errors():
    with pytest.raises(UnknownRelationError):
        realm_matrix_service.get_relation("24")
    r = realm_matrix_service.get_relation("78")
    with pytest.raises(MalformedDomainError):
        apply_relation(r, (0, 1))
    with pytest.raises(MalformedDomainError):
        apply_relation(r, (1, 1, 1))
