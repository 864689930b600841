import numpy as np
import pytest
from scipy import stats

from causal_priors.bayesnet import (
    BifSyntaxError,
    MetadataError,
    align_metadata,
    forward_sample,
    load_bundled_metadata,
    load_metadata,
    load_network,
    parse_bif,
    read_dataset_csv,
    render_bif,
    write_dataset_csv,
)

SMALL = """
network rain_net { }
variable rain {
  type discrete [ 2 ] { yes, no };
}
variable grass {
  type discrete [ 2 ] { wet, dry };
  property note = "x";
}
probability ( rain ) {
  table 0.2, 0.8;
}
// comment
probability ( grass | rain ) {
  (yes) 0.9, 0.1;
  (no) 0.3, 0.7;
}
"""


@pytest.mark.parametrize("name,d,m", [("asia", 8, 8), ("child", 20, 25), ("insurance", 27, 52)])
def test_bundled_network_sizes(name, d, m):
    bn = load_network(name)
    assert bn.d == d and bn.graph.m == m


@pytest.mark.parametrize("name", ["asia", "child", "insurance"])
def test_round_trip_is_exact(name):
    bn = load_network(name)
    again = parse_bif(render_bif(bn))
    assert again == bn


def test_parse_small_network():
    bn = parse_bif(SMALL)
    assert bn.names == ["rain", "grass"]
    assert bn.parents == [(), (0,)]
    np.testing.assert_array_equal(bn.cpts[1], [[0.9, 0.1], [0.3, 0.7]])


def test_syntax_error_reports_position():
    bad = SMALL.replace("table 0.2, 0.8;", "table 0.2 0.8;")
    with pytest.raises(BifSyntaxError) as info:
        parse_bif(bad)
    assert info.value.line > 0


def test_rows_far_from_one_are_rejected():
    with pytest.raises(Exception):
        parse_bif(SMALL.replace("0.2, 0.8", "0.2, 0.7"))


def test_rows_near_one_are_renormalized():
    with pytest.warns(UserWarning):
        bn = parse_bif(SMALL.replace("0.2, 0.8", "0.2, 0.8000005"))
    assert abs(bn.cpts[0].sum() - 1.0) < 1e-12


def test_forward_sample_is_reproducible():
    bn = load_network("asia")
    a = forward_sample(bn, 200, 3)
    b = forward_sample(bn, 200, 3)
    c = forward_sample(bn, 200, 4)
    np.testing.assert_array_equal(a.values, b.values)
    assert not np.array_equal(a.values, c.values)


def test_root_marginal_chi_square():
    bn = load_network("asia")
    n = 20_000
    data = forward_sample(bn, n, 0)
    for v in range(bn.d):
        if bn.parents[v]:
            continue
        counts = np.bincount(data.values[:, v], minlength=bn.cardinalities[v])
        expected = bn.cpts[v][0] * n
        assert stats.chisquare(counts, expected).pvalue > 1e-3


def test_conditional_frequencies_match_cpt():
    bn = parse_bif(SMALL)
    data = forward_sample(bn, 50_000, 1)
    rain, grass = data.values[:, 0], data.values[:, 1]
    for r in (0, 1):
        freq = np.mean(grass[rain == r] == 0)
        assert abs(freq - bn.cpts[1][r, 0]) < 0.02


def test_dataset_csv_round_trip(tmp_path):
    bn = load_network("asia")
    data = forward_sample(bn, 50, 0)
    path = tmp_path / "asia.csv"
    write_dataset_csv(data, path)
    back = read_dataset_csv(path, bn.cardinalities)
    np.testing.assert_array_equal(back.values, data.values)
    assert back.names == data.names


def test_metadata_parsing():
    text = (
        "Domain description: the impact of meteorological phenomena\n"
        "Variable id, Variable name, Metadata\n"
        '1, rain, "the presence of rain"\n'
        "2, grass, the grass being wet\n"
    )
    metas = load_metadata(text)
    assert [m.index for m in metas] == [0, 1]
    assert metas[0].description == "the presence of rain"
    assert metas[1].domain == "the impact of meteorological phenomena"
    with pytest.raises(MetadataError):
        load_metadata(text + "2, other, dup\n")


@pytest.mark.parametrize("name", ["asia", "child", "insurance"])
def test_bundled_metadata_aligns_with_network(name):
    bn = load_network(name)
    metas = align_metadata(bn, load_bundled_metadata(name))
    assert [m.name for m in metas] == bn.names
    assert all(m.description and m.domain for m in metas)
