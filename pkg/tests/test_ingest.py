import io
import math
import random
import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from localeig import IngestWarning, InputError, build_adjacency
from localeig.ingest import (load_contacts, load_edge_list, load_road_network, parse_contacts,
                             travel_time, write_communities, write_edge_list)

NODES = "id,lat,lon\na,55.86,-4.25\nb,55.87,-4.26\nc,55.88,-4.24\n"


def text(s):
    return io.StringIO(s)


class TestEdgeList:
    def test_path_rows(self):
        g = load_edge_list(text("a,b\nb,c"))
        assert g.n == 3 and len(g.edges) == 2
        assert not g.directed

    def test_parallel_weights_summed(self):
        g = load_edge_list(text("a,b,0.4\na,b,0.6"))
        assert g.edges == ((0, 1, 1.0),)

    def test_empty(self):
        g = load_edge_list(text(""))
        assert g.n == 0 and g.edges == ()

    def test_header_detected(self):
        g = load_edge_list(text("source,target,weight\nx,y,2.5\n"))
        assert g.node_ids == ("x", "y") and g.edges[0][2] == 2.5

    def test_directed_keeps_orientation(self):
        g = load_edge_list(text("b,a\na,b,2\n"), directed=True)
        a = build_adjacency(g).entries
        np.testing.assert_array_equal(a, [[0, 2], [1, 0]])

    def test_undirected_reverse_rows_merge(self):
        g = load_edge_list(text("b,a\na,b,2\n"))
        assert g.edges == ((0, 1, 3.0),)

    def test_tab_delimiter_and_comments(self):
        g = load_edge_list(text("# comment\nu\tv\t0.5\n"), delimiter="\t")
        assert g.edges == ((0, 1, 0.5),)

    @pytest.mark.parametrize("body,line", [("a,b\nc\n", 2), ("a,b\na,b,-1\n", 2),
                                           ("a,b,1\nb,c,x\n", 2), ("a,b,c,d\n", 1),
                                           ("a,b\nb,c,inf\n", 2)])
    def test_errors_carry_line(self, body, line):
        with pytest.raises(InputError) as info:
            load_edge_list(text(body))
        assert info.value.line == line
        assert str(info.value).startswith(f"line {line}:")

    def test_reads_path(self, tmp_path):
        f = tmp_path / "g.csv"
        f.write_text("a,b\n")
        assert load_edge_list(f).n == 2


class TestContacts:
    def test_counts(self):
        g = load_contacts(text("20 i j\n40 j i\n60 i j\n80 j k\n"))
        assert g.node_ids == ("i", "j", "k")
        assert dict(((i, j), w) for i, j, w in g.edges) == {(0, 1): 3.0, (1, 2): 1.0}

    def test_duration_weighting(self):
        g = load_contacts(text("20 i j\n40 i j\n"), weighting="duration")
        assert g.edges[0][2] == 40.0

    def test_inline_labels(self):
        g = load_contacts(text("20\t1\t2\t1A\t1B\n40\t2\t3\t1B\tTeachers\n"))
        assert g.communities == {"1": "1A", "2": "1B", "3": "Teachers"}

    def test_self_contact_skipped_with_warning(self):
        with pytest.warns(IngestWarning, match="1 self-contact"):
            g = load_contacts(text("20 i i\n40 i j\n"))
        assert g.edges == ((0, 1, 1.0),)

    def test_conflicting_inline_labels(self):
        with pytest.raises(InputError, match="labels") as info:
            load_contacts(text("20 1 2 A B\n40 1 3 C D\n"))
        assert info.value.line == 2

    def test_side_table_conflict(self):
        with pytest.raises(InputError):
            load_contacts(text("20 1 2 A B\n"), metadata=text("1,A\n2,Z\n"))

    def test_side_table_only(self):
        g = load_contacts(text("20 1 2\n"), metadata=text("node_id,community\n1\tA\n2 B\n"))
        assert g.communities == {"1": "A", "2": "B"}

    def test_malformed_record(self):
        with pytest.raises(InputError) as info:
            parse_contacts(text("20 1 2\n40 1\n"))
        assert info.value.line == 2

    def test_unknown_weighting(self):
        with pytest.raises(InputError):
            load_contacts(text(""), weighting="seconds")

    @given(st.lists(st.tuples(st.integers(0, 5), st.integers(0, 5)), max_size=40))
    def test_total_weight_equals_valid_records(self, pairs):
        body = "".join(f"{20 * t} {i} {j}\n" for t, (i, j) in enumerate(pairs))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", IngestWarning)
            g = load_contacts(text(body))
        assert math.fsum(w for *_, w in g.edges) == sum(i != j for i, j in pairs)


class TestTravelTime:
    @pytest.mark.parametrize("d,v,t", [(100, 10, 10), (100, 50, 10), (400, 10, 40)])
    def test_examples(self, d, v, t):
        assert travel_time(d, v) == pytest.approx(t, abs=1e-12)

    @given(st.floats(1e-3, 1e5), st.floats(1e-3, 100))
    def test_floor(self, d, v):
        assert travel_time(d, v) >= math.sqrt(d) * (1 - 1e-15)

    @pytest.mark.parametrize("d,v", [(0, 1), (1, 0), (-5, 3)])
    def test_non_positive(self, d, v):
        with pytest.raises(InputError):
            travel_time(d, v)


class TestRoadNetwork:
    def test_single_edge_weight(self):
        g = load_road_network(text(NODES), text("u,v,length_m,speed\na,b,100,10\n"), speed_unit="m/s")
        assert g.edges == ((0, 1, pytest.approx(1 / 11)),)
        assert g.coords["a"] == (-4.25, 55.86)
        assert g.n == 3

    def test_inverse_time(self):
        g = load_road_network(text(NODES), text("u,v,length_m,speed\na,b,400,10\n"), speed_unit="m/s",
                              weighting="inverse-time")
        assert g.edges[0][2] == pytest.approx(1 / 40)

    def test_weighting_alias(self):
        g = load_road_network(text(NODES), text("u,v,length_m,speed\na,b,100,10\n"), speed_unit="m/s",
                              weighting="inverse-onepluststime")
        assert g.edges[0][2] == pytest.approx(1 / 11)

    def test_duplicates_keep_fastest(self):
        # 10 s forward, 12 s back (144 m at 12 m/s is floor-bound: sqrt(144) = 12)
        edges = "u,v,length_m,speed\na,b,100,10\nb,a,144,12\n"
        g = load_road_network(text(NODES), text(edges), speed_unit="m/s")
        assert g.edges == ((0, 1, pytest.approx(1 / 11)),)

    def test_mph_default(self):
        g = load_road_network(text(NODES), text("u,v,length_m,speed\na,b,4000,30\n"))
        t = 4000 / (30 * 0.44704)
        assert g.edges[0][2] == pytest.approx(1 / (1 + t))

    def test_per_row_unit(self):
        edges = "u,v,length_m,speed,speed_unit\na,b,400,36,km/h\n"
        g = load_road_network(text(NODES), text(edges))
        assert g.edges[0][2] == pytest.approx(1 / 41)

    def test_missing_endpoint(self):
        with pytest.raises(InputError, match="'z'") as info:
            load_road_network(text(NODES), text("u,v,length_m,speed\na,b,1,1\na,z,1,1\n"))
        assert info.value.line == 3

    @pytest.mark.parametrize("row", ["a,b,0,10", "a,b,10,-1"])
    def test_non_positive_row(self, row):
        with pytest.raises(InputError) as info:
            load_road_network(text(NODES), text("u,v,length_m,speed\n" + row + "\n"))
        assert info.value.line == 2

    def test_missing_column(self):
        with pytest.raises(InputError, match="missing columns"):
            load_road_network(text(NODES), text("u,v,speed\na,b,3\n"))

    def test_self_loop_warning(self):
        with pytest.warns(IngestWarning):
            g = load_road_network(text(NODES), text("u,v,length_m,speed\na,a,10,10\n"))
        assert g.edges == ()

    @given(st.lists(st.tuples(st.sampled_from("abc"), st.sampled_from("abc"),
                              st.floats(0.01, 1e4), st.floats(0.1, 60)), max_size=12))
    def test_weights_in_unit_interval(self, rows):
        body = "u,v,length_m,speed\n" + "".join(f"{u},{v},{d!r},{s!r}\n" for u, v, d, s in rows)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", IngestWarning)
            g = load_road_network(text(NODES), text(body))
        assert all(0 < w <= 1 for *_, w in g.edges)


def test_loaders_order_insensitive():
    rng = random.Random(0)
    rows = [f"{rng.choice('pqrstu')},{rng.choice('pqrstu')},{rng.random():.6f}" for _ in range(40)]
    ref = build_adjacency(load_edge_list(text("\n".join(rows)))).entries
    contacts = [f"{20 * t} {rng.choice('pqrs')} {rng.choice('tuv')}" for t in range(30)]
    cref = build_adjacency(load_contacts(text("\n".join(contacts)))).entries
    for _ in range(5):
        rng.shuffle(rows)
        rng.shuffle(contacts)
        np.testing.assert_array_equal(build_adjacency(load_edge_list(text("\n".join(rows)))).entries, ref)
        np.testing.assert_array_equal(build_adjacency(load_contacts(text("\n".join(contacts)))).entries,
                                      cref)


def test_writers_round_trip():
    g = load_contacts(text("20 1 2 A B\n40 2 3 B B\n"))
    out = io.StringIO()
    write_edge_list(g, out)
    assert load_edge_list(text(out.getvalue())) == load_edge_list(text("1,2,1\n2,3,1\n"))
    out = io.StringIO()
    write_communities(g, out)
    assert out.getvalue() == "node_id,community\n1,A\n2,B\n3,B\n"
