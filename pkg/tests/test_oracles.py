from treeshift import Window
from treeshift import oracles
from treeshift.fixtures import tree


def test_words_counts():
    tg = tree("golden")
    assert len(oracles.words(tg.matrix, (1, 1), 3)) == 11
    assert len(oracles.words(tg.matrix, (1, 0), 2)) == 4


def test_cps_small():
    t2 = tree("full2")
    assert oracles.complete_prefix_sets(t2.matrix, 1) == {frozenset({()}), frozenset({(0,), (1,)})}
    assert len(oracles.complete_prefix_sets(t2.matrix, 2)) == 5


def test_metric_and_allowed():
    t2 = tree("full2")
    a = t2.uniform(t2.root, 2, "0")
    b = Window(t2.root, 2, a.labels[:3] + ("1",) + a.labels[4:])
    assert oracles.metric(t2.matrix, a, b).exponent == 1
    assert not oracles.window_allowed(t2.matrix, a, [t2.uniform(t2.root, 1, "0")])
    assert oracles.window_allowed(t2.matrix, b, [t2.uniform(t2.root, 2, "1")])


def test_extension_search():
    t2 = tree("full2")
    ones = t2.uniform(t2.root, 1, "1")
    pats = [t2.window(t2.root, 1, {(): "1", (0,): x, (1,): y}) for x in "01" for y in "01"]
    assert not oracles.extendable(t2.matrix, ones, pats, 1, ("0", "1"))
    assert oracles.extendable(t2.matrix, t2.uniform(t2.root, 1, "0"), pats, 1, ("0", "1"))
