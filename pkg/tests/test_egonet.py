import io

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from signed_ego.egonet import (
    ContactFrequency, EgoNetwork, MeanShiftResult, assemble_circles, build_ego_network,
    compute_frequencies, estimate_bandwidth, mean_shift_1d, read_egonets_json, scaling_ratios,
    write_egonets_json,
)
from signed_ego.errors import DegenerateBandwidth, ZeroSpan
from signed_ego.signing import RelationshipProfile
from signed_ego.synthetic import BAND_SIZES, dunbar_frequencies

YEAR = 365.25 * 86400


def prof(alter, n):
    return RelationshipProfile("e", alter, n_pos=n)


@pytest.mark.parametrize("n,years,freq,active", [
    (12, 2.0, 6.0, True), (1, 1.0, 1.0, True), (1, 2.0, 0.5, False),
])
def test_frequencies(n, years, freq, active):
    (f,) = compute_frequencies([prof("x", n)], (0, years * YEAR))
    assert f.freq_per_year == pytest.approx(freq) and f.active is active


def test_zero_span():
    with pytest.raises(ZeroSpan):
        compute_frequencies([prof("x", 1)], (5, 5))


def test_single_point():
    r = mean_shift_1d([3.0])
    assert list(r.cluster_centers) == [3.0] and list(r.assignments) == [0]


def test_two_separated_groups():
    rng = np.random.default_rng(1)
    x = np.concatenate([1 + rng.uniform(-0.1, 0.1, 10), 100 + rng.uniform(-0.1, 0.1, 10)])
    r = mean_shift_1d(x, bandwidth=5)
    assert r.n_clusters == 2
    assert sorted(r.cluster_sizes()) == [10, 10]
    assert r.cluster_centers[0] == pytest.approx(100, abs=0.1)


def test_bad_bandwidth():
    with pytest.raises(DegenerateBandwidth):
        mean_shift_1d([1.0, 2.0], bandwidth=0.0)


def test_bandwidth_fallback_on_ties():
    assert estimate_bandwidth([1.0, 1.0, 1.0, 1.0, 2.0]) == 1.0


values = st.lists(st.floats(-50, 50, allow_nan=False).map(lambda v: round(v, 3)), min_size=1, max_size=40)


@settings(max_examples=80, deadline=None)
@given(values, st.sampled_from([0.25, 0.5, 2.0, 4.0]))
def test_scale_equivariance(xs, c):
    # powers of two keep every product exact
    a = mean_shift_1d(xs, bandwidth=1.0)
    b = mean_shift_1d([c * v for v in xs], bandwidth=c)
    np.testing.assert_array_equal(a.assignments, b.assignments)
    np.testing.assert_allclose(b.cluster_centers, c * a.cluster_centers, rtol=1e-9, atol=1e-9)


@settings(max_examples=80, deadline=None)
@given(values)
def test_idempotence(xs):
    a = mean_shift_1d(xs, bandwidth=1.0)
    b = mean_shift_1d(list(a.cluster_centers), bandwidth=1.0)
    np.testing.assert_allclose(b.cluster_centers, a.cluster_centers)


@settings(max_examples=50, deadline=None)
@given(values, st.randoms(use_true_random=False))
def test_order_invariance(xs, rnd):
    a = mean_shift_1d(xs, bandwidth=1.0)
    perm = list(range(len(xs)))
    rnd.shuffle(perm)
    b = mean_shift_1d([xs[i] for i in perm], bandwidth=1.0)
    np.testing.assert_array_equal(a.cluster_centers, b.cluster_centers)
    np.testing.assert_array_equal(a.assignments[perm], b.assignments)


def kde_partition(x, bw):
    """Oracle: Gaussian KDE modes on a fine grid, points split at the density minima."""
    grid = np.linspace(x.min() - 1, x.max() + 1, 20001)
    d = np.exp(-0.5 * ((grid[:, None] - x[None, :]) / bw) ** 2).sum(axis=1)
    inner = d[1:-1]
    minima = grid[1:-1][(inner < d[:-2]) & (inner <= d[2:])]
    n_modes = int(((inner > d[:-2]) & (inner >= d[2:])).sum())
    labels = np.searchsorted(minima, x)
    return n_modes, labels


@pytest.mark.parametrize("seed", range(5))
def test_dunbar_fixture_matches_kde_oracle(seed):
    freqs, band = dunbar_frequencies(seed)
    x = np.log(freqs)
    r = mean_shift_1d(x)
    n_modes, labels = kde_partition(x, r.bandwidth)
    assert r.n_clusters == n_modes == 5
    # clusters are numbered from the top, KDE labels from the bottom
    np.testing.assert_array_equal(r.assignments, 4 - labels)
    np.testing.assert_array_equal(r.assignments, band)
    assert np.cumsum(r.cluster_sizes()).tolist() == [2, 5, 15, 50, 150]


def freq(alter, f):
    return ContactFrequency("e", alter, int(f), 1.0, f, f >= 1)


def test_assemble_cumulative():
    ms = MeanShiftResult(np.array([3.0, 2.0, 1.0, 0.5, 0.1]), np.repeat(np.arange(5), BAND_SIZES), 1.0)
    fs = [freq(f"a{i:03d}", 200 - i) for i in range(150)]
    net = assemble_circles(ms, fs)
    assert [c.size for c in net.circles] == [2, 5, 15, 50, 150]
    assert scaling_ratios([c.size for c in net.circles]) == pytest.approx([2.5, 3.0, 10 / 3, 3.0])
    assert net.active_size == 150
    assert set(net.circles[1].alters) >= set(net.circles[0].alters)


def test_single_cluster_circle():
    fs = [freq(f"a{i}", 10.0) for i in range(7)]
    net = build_ego_network("e", fs)
    assert net.n_circles == 1 and net.active_size == 7


def test_inactive_alters_excluded():
    fs = [freq("a", 10.0), freq("b", 9.5), freq("z", 0.5)]
    net = build_ego_network("e", fs)
    assert "z" not in net.active_alters and net.active_size == 2


def test_empty_and_lone_active():
    assert build_ego_network("e", [freq("z", 0.5)]).n_circles == 0
    assert build_ego_network("e", [freq("a", 4.0)]).active_size == 1


def test_dunbar_network_end_to_end():
    freqs, _ = dunbar_frequencies(0)
    fs = [freq(f"a{i:03d}", f) for i, f in enumerate(freqs)]
    net = build_ego_network("e", fs)
    sizes = [c.size for c in net.circles]
    assert sizes == [2, 5, 15, 50, 150]
    assert 2.5 <= np.mean(scaling_ratios(sizes)) <= 3.5


def test_egonets_json_round_trip():
    freqs, _ = dunbar_frequencies(1)
    net = build_ego_network("e", [freq(f"a{i:03d}", f) for i, f in enumerate(freqs)])
    buf = io.StringIO()
    write_egonets_json([net], buf, {"seed": 1})
    (back,) = read_egonets_json(io.StringIO(buf.getvalue()))
    assert back.to_json() == net.to_json() and back.layer == net.layer
    assert isinstance(back, EgoNetwork)
