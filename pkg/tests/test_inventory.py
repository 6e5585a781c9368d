import io

import pytest
from hypothesis import given, strategies as st

from clusteralloc.inventory import (
    EmptyFleetError,
    Fleet,
    FleetParseError,
    FleetValidationError,
    Node,
    availability_subset,
    check_fleet_text,
    derive_classes,
    dump_fleet,
    load_fleet,
    read_fleet,
    save_fleet,
)

from conftest import LPC10_CAPACITIES, make_fleet


def test_table1_file(data_dir):
    fleet = load_fleet(data_dir / "table1.csv")
    assert len(fleet) == 5
    node = fleet.node(3)
    assert (node.capacity_pct, node.class_label) == (100, 1)
    # explicit column keeps the table's banding: 80 and 90 both class II
    assert [n.class_label for n in fleet] == [2, 2, 1, 1, 2]


def test_lpc10_file(lpc10):
    assert [lpc10.capacity(i) for i in range(1, 11)] == LPC10_CAPACITIES


def test_duplicate_id_rejected():
    with pytest.raises(FleetValidationError, match="duplicate"):
        read_fleet("7,80\n7,90\n")


@pytest.mark.parametrize(
    "text, error",
    [
        ("1,80\n2,abc\n", FleetParseError),
        ("1,80,2,9\n", FleetParseError),
        ("1\n", FleetParseError),
        ("1,150\n", FleetValidationError),
        ("1,0\n", FleetValidationError),
        ("0,50\n", FleetValidationError),
        ("", EmptyFleetError),
        ("# only a comment\n\n", EmptyFleetError),
    ],
)
def test_load_errors(text, error):
    with pytest.raises(error):
        read_fleet(text)


def test_comments_blank_lines_and_streams():
    text = "# header\n\n1, 80\n  # indented comment\n2,100,1\n"
    for source in (text.encode(), io.StringIO(text), io.BytesIO(text.encode())):
        fleet = load_fleet(source)
        assert fleet.capacities == {1: 80, 2: 100}


def test_check_collects_every_problem():
    nodes, diags = check_fleet_text("1,80\n2,150\n1,90\nx,1\n")
    assert [n.id for n in nodes] == [1]
    assert [(d.line, d.kind) for d in diags] == [(2, "validation"), (3, "validation"), (4, "parse")]


def test_save_sorts_and_writes_class(tmp_path):
    fleet = Fleet((Node(3, 100, 1), Node(1, 80, 3), Node(2, 90, 2)))
    path = tmp_path / "f.csv"
    save_fleet(fleet, path)
    body = [l for l in path.read_text().splitlines() if not l.startswith("#")]
    assert body == ["1,80,3", "2,90,2", "3,100,1"]


@given(st.dictionaries(st.integers(1, 500), st.integers(1, 100), min_size=1, max_size=30))
def test_round_trip(caps):
    fleet = Fleet(tuple(Node(i, c) for i, c in sorted(caps.items())))
    fleet = derive_classes(fleet)
    assert read_fleet(dump_fleet(fleet)) == fleet


def test_round_trip_keeps_explicit_classes(data_dir):
    fleet = load_fleet(data_dir / "table1.csv")
    assert read_fleet(dump_fleet(fleet)) == fleet


@pytest.mark.parametrize(
    "caps, classes",
    [
        ([100, 100, 90, 80], [1, 1, 2, 3]),
        ([75], [1]),
        ([80, 90, 100, 100, 90], [3, 2, 1, 1, 2]),
    ],
)
def test_derive_classes(caps, classes):
    assert [n.class_label for n in derive_classes(make_fleet(caps))] == classes


@given(st.lists(st.integers(1, 100), min_size=1, max_size=25))
def test_derive_classes_properties(caps):
    once = derive_classes(make_fleet(caps))
    assert derive_classes(once) == once
    nodes = once.nodes
    for a in nodes:
        for b in nodes:
            assert (a.class_label == b.class_label) == (a.capacity_pct == b.capacity_pct)


def test_derive_classes_empty():
    with pytest.raises(EmptyFleetError):
        derive_classes(Fleet(()))


def test_availability_subset(lpc10):
    assert availability_subset(lpc10, set()) == lpc10
    rest = availability_subset(lpc10, set(range(1, 8)))
    assert rest.ids == [8, 9, 10]
    assert len(lpc10) == 10
    with pytest.raises(KeyError):
        availability_subset(lpc10, {99})


def test_fleet_is_immutable(lpc10):
    with pytest.raises(AttributeError):
        lpc10.nodes = ()
    with pytest.raises(FleetValidationError):
        Node(1, 101)
