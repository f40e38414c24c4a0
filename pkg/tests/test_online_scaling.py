import numpy as np
import pytest

from bicm_gmi_lab import detector as det
from bicm_gmi_lab import online_scaling as osc
from bicm_gmi_lab._search import SearchParams, multiplicative_search
from bicm_gmi_lab.detector import LlrRecords
from bicm_gmi_lab.gmi import icurve_value


def records(llr, bits, bit_class=0, decided=None):
    llr = np.asarray(llr, dtype=np.float64)
    n = llr.size
    return LlrRecords(
        llr=llr,
        bit_class=np.full(n, bit_class, np.int16),
        true_bit=np.asarray(bits, dtype=np.int8),
        decided_bit=(np.full(n, -1, np.int8) if decided is None
                     else np.asarray(decided, dtype=np.int8)),
        frame=np.zeros(n, np.int64),
        pos=np.arange(n),
    )


def consistent(n, mu, rng, scale=1.0, bit_class=0):
    b = rng.integers(0, 2, n)
    l = rng.normal((2 * b - 1) * mu, np.sqrt(2 * mu)) * scale
    return records(l, b, bit_class=bit_class)


def test_multiplicative_search_on_parabola():
    res = multiplicative_search(lambda s: -(s - 2.0) ** 2)
    assert res.converged
    assert abs(np.log(res.s / 2.0)) <= np.log(1.05) + 1e-12


def test_search_params_validation():
    with pytest.raises(ValueError):
        SearchParams(alpha=1.0)
    with pytest.raises(ValueError):
        SearchParams(bounds=(0.0, 1.0))
    with pytest.raises(ValueError):
        SearchParams(bounds=(2.0, 1.0))


def test_search_hits_bound_flagged():
    # monotone increasing objective: the search runs into the upper bound
    res = multiplicative_search(lambda s: s)
    assert not res.converged
    assert res.s == pytest.approx(10.0, rel=0.05)


def test_approx_icurve_genie_equivalence():
    # with decided == true the approximation is the genie I-curve exactly
    rng = np.random.default_rng(0)
    b = rng.integers(0, 2, 10_000)
    l = rng.normal((2 * b - 1) * 3.0, np.sqrt(6.0))
    l[l == 0.0] = 0.1
    rec = records(l, b, decided=b)
    for s in (0.4, 1.0, 2.7):
        assert abs(osc.approx_icurve(rec, s, "decided")
                   - icurve_value(l, b, s)) < 1e-12


def test_zero_llrs_are_excluded():
    rng = np.random.default_rng(1)
    rec = consistent(20_000, 3.0, rng)
    rec.decided_bit[:] = rec.true_bit
    spiked = rec.with_llr(np.where(np.arange(len(rec)) % 7 == 0, 0.0, rec.llr))
    nz = spiked.llr != 0
    want = icurve_value(spiked.llr[nz], spiked.true_bit[nz], 1.3)
    assert osc.approx_icurve(spiked, 1.3, "decided") == pytest.approx(want, abs=1e-14)
    all_zero = rec.with_llr(np.zeros(len(rec)))
    with pytest.raises(ValueError):
        osc.search_scale(all_zero, bit_source="true")


def test_search_scale_matches_grid():
    rng = np.random.default_rng(2)
    rec = consistent(50_000, 3.0, rng, scale=1.0 / 1.7)
    res = osc.search_scale(rec, bit_source="true")
    grid = np.arange(0.1, 5.0, 0.001)
    vals = [icurve_value(rec.llr, rec.true_bit, s) for s in grid]
    s_grid = grid[int(np.argmax(vals))]
    assert abs(np.log(res.s / s_grid)) <= np.log(1.05) + 1e-9


def test_two_level_separates_the_joint_search():
    # the sign-split objective is separable: the pairwise result matches a 2-D grid
    rng = np.random.default_rng(3)
    b = rng.integers(0, 2, 40_000)
    l = rng.normal((2 * b - 1) * 3.0, np.sqrt(6.0))
    l = np.where(l > 0, 2.0 * l, 0.5 * l)     # asymmetric distortion
    rec = records(l, b)
    res = osc.two_level_search(rec, bit_source="true")
    assert not res.plus_fallback and not res.minus_fallback
    assert res.plus.s == pytest.approx(0.5, abs=0.05)
    assert res.minus.s == pytest.approx(2.0, abs=0.2)

    grid = np.geomspace(0.2, 5.0, 120)
    pos, neg = l > 0, l < 0

    def half(mask, s):
        return icurve_value(l[mask], b[mask], s) * mask.mean()

    joint = np.array([[half(pos, sp) + half(neg, sm) for sm in grid] for sp in grid])
    ip, im = np.unravel_index(np.argmax(joint), joint.shape)
    assert abs(np.log(res.plus.s / grid[ip])) < np.log(1.08)
    assert abs(np.log(res.minus.s / grid[im])) < np.log(1.08)


def test_two_level_fallback_on_empty_sign_subset():
    rng = np.random.default_rng(4)
    b = np.ones(5000, dtype=np.int8)
    l = np.abs(rng.normal(3.0, 1.0, 5000))
    res = osc.two_level_search(records(l, b), bit_source="true")
    assert res.minus_fallback and not res.plus_fallback
    assert res.minus.s == res.plus.s or res.minus is res.plus


def test_per_class_single_factor_for_class_zero():
    rng = np.random.default_rng(5)
    parts = [consistent(20_000, 3.0, rng, bit_class=k) for k in (0, 1)]
    rec = det.concat_records(parts)
    out = osc.two_level_search_per_class(rec, bit_source="true")
    assert out[0].plus.s == out[0].minus.s
    assert set(out) == {0, 1}


def test_normalized_mean_error():
    s = [1.0, 2.0, 4.0]
    s_hat = [1.1, 1.8, 4.0]
    want = np.mean([0.1, 0.1, 0.0])
    assert osc.normalized_mean_error(s, s_hat) == pytest.approx(want)
    with pytest.raises(ValueError):
        osc.normalized_mean_error([1.0], [1.0, 2.0])
    with pytest.raises(ValueError):
        osc.normalized_mean_error([0.0], [1.0])


def test_scaling_report_json():
    rng = np.random.default_rng(6)
    rec = consistent(20_000, 3.0, rng)
    single = osc.search_scale_per_class(rec, bit_source="true")
    rep = osc.ScalingReport.from_single(single, bit_source="true")
    payload = rep.to_json()
    assert '"factor"' in payload and '"0"' in payload
    two = osc.two_level_search_per_class(rec, bit_source="true",
                                         single_factor_classes=())
    rep2 = osc.ScalingReport.from_two_level(two, bit_source="true")
    assert '"s_plus"' in rep2.to_json()
