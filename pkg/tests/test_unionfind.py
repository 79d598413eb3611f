from hypothesis import given, strategies as st

from dexnet.unionfind import UnionFind


def test_basic():
    uf = UnionFind("abcd")
    assert uf.count == 4
    assert uf.union("a", "b")
    assert not uf.union("b", "a")
    uf.union("c", "d")
    assert uf.count == 2
    assert sorted(uf.component_sizes()) == [2, 2]
    assert uf.find("a") == uf.find("b") != uf.find("c")


@given(st.lists(st.tuples(st.integers(0, 30), st.integers(0, 30)), max_size=80))
def test_matches_label_propagation(pairs):
    uf = UnionFind(range(31))
    label = list(range(31))
    for a, b in pairs:
        uf.union(a, b)
        la, lb = label[a], label[b]
        label = [la if x == lb else x for x in label]
    assert uf.count == len(set(label))
    for a in range(31):
        for b in range(31):
            assert (uf.find(a) == uf.find(b)) == (label[a] == label[b])
