import pytest

from sceneqa.stats import compute_stats, tokenize


def rec(q, a="yes", qtype="exist"):
    return {"question": q, "answer": a, "qtype": qtype}


def test_tokenize():
    assert tokenize("How many cars, or buses?") == ["how", "many", "cars", "or", "buses"]


def test_lengths_and_prefixes():
    records = [rec("How many cars are there?", "2", "count"),
               rec("How many buses are to the front of me?", "0", "count"),
               rec("Are there any cars?")]
    s = compute_stats(records, k=2)
    assert s.total == 3
    assert s.lengths == {5: 1, 9: 1, 4: 1}
    assert s.prefix_count(["how"]) == 2 and s.prefix_count(["How", "many"]) == 2
    assert s.prefix_count(["how", "many", "cars"]) == 0  # deeper than k
    assert s.qtypes == {"count": 2, "exist": 1}
    assert s.answers["count"] == {"2": 1, "0": 1}
    assert s.trie()["how"]["children"]["many"]["count"] == 2


def test_prefix_counts_nest():
    records = [rec(q) for q in ("a b c d", "a b x", "a y", "z")]
    s = compute_stats(records, k=3)
    for prefix, n in s.prefixes.items():
        if len(prefix) > 1:
            assert n <= s.prefixes[prefix[:-1]]
    assert sum(n for p, n in s.prefixes.items() if len(p) == 1) == 4


def test_errors():
    with pytest.raises(ValueError, match="empty"):
        compute_stats([])
    with pytest.raises(ValueError):
        compute_stats([rec("a")], k=0)


def test_tables_and_dict():
    s = compute_stats([rec("Is it a car?"), rec("Is it?", "no")])
    tables = s.tables()
    assert tables["lengths"].splitlines()[0] == "words,count"
    assert "exist,no,1" in tables["answers"]
    d = s.to_dict()
    assert d["total"] == 2 and d["first_words"]["is"]["count"] == 2
