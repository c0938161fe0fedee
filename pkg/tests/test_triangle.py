"""Triangle data model, CSV ingestion, and derived quantities."""

import numpy as np
import pytest

import dirichlet_reserving as dr
from dirichlet_reserving.triangle import TriangleError


def write(tmp_path, text, name="tri.csv"):
    path = tmp_path / name
    path.write_text(text)
    return path


HEADER10 = "accident_year,premium," + ",".join(f"dev_{j}" for j in range(1, 11))


class TestLoad:
    def test_bundled_fixture(self, triangle18):
        assert triangle18.m == 18
        assert triangle18.n == 10
        assert triangle18.years == tuple(range(1989, 2007))
        assert triangle18.premiums[0] == 165339
        assert triangle18.losses[0, 0] == 41891
        assert list(triangle18.k[:9]) == [10] * 9
        assert list(triangle18.k[9:]) == [9, 8, 7, 6, 5, 4, 3, 2, 1]

    def test_single_row(self, tmp_path):
        path = write(tmp_path, HEADER10 + "\n2006,341973,66827" + "," * 9 + "\n")
        t = dr.load_triangle(path)
        assert t.m == 1 and t.n == 10
        assert int(t.k[0]) == 1
        assert t.losses[0, 0] == 66827

    def test_zero_premium(self, tmp_path):
        path = write(tmp_path, HEADER10 + "\n2006,0,66827" + "," * 9 + "\n")
        with pytest.raises(TriangleError, match="premium"):
            dr.load_triangle(path)

    def test_zero_loss(self, tmp_path):
        path = write(tmp_path, HEADER10 + "\n2006,341973,0" + "," * 9 + "\n")
        with pytest.raises(TriangleError, match="loss"):
            dr.load_triangle(path)

    def test_gap_in_row_mask(self, tmp_path):
        row = "2005,313808,68185,," + "1000" + "," * 7
        path = write(tmp_path, HEADER10 + "\n" + row + "\n2006,341973,66827" + "," * 9 + "\n")
        with pytest.raises(TriangleError, match="staircase"):
            dr.load_triangle(path)

    def test_non_staircase_shape(self, tmp_path):
        # two observed cells on the newest year break the valuation layout
        text = (
            HEADER10
            + "\n2005,313808,68185,54385"
            + "," * 8
            + "\n2006,341973,66827,1000"
            + "," * 8
            + "\n"
        )
        with pytest.raises(TriangleError, match="staircase"):
            dr.load_triangle(write(tmp_path, text))

    def test_thousands_separator_rejected(self, tmp_path):
        path = write(tmp_path, HEADER10 + '\n2006,"341,973",66827' + "," * 9 + "\n")
        with pytest.raises(TriangleError, match="separator"):
            dr.load_triangle(path)

    def test_bad_header(self, tmp_path):
        path = write(tmp_path, "year,premium,dev_1\n2006,1,1\n")
        with pytest.raises(TriangleError, match="header"):
            dr.load_triangle(path)

    def test_descending_years(self, tmp_path):
        text = (
            HEADER10
            + "\n2006,341973,66827" + "," * 9
            + "\n2005,313808,68185,54385" + "," * 8
            + "\n"
        )
        with pytest.raises(TriangleError, match="ascending"):
            dr.load_triangle(write(tmp_path, text))


class TestLossRatios:
    def test_quotient(self, triangle18, lr18):
        assert lr18.ratios[8, 0] == triangle18.losses[8, 0] / triangle18.premiums[8]
        assert lr18.ratios[8, 0] == pytest.approx(0.1869305, abs=5e-7)

    def test_unit_ratio(self):
        t = dr.RunOffTriangle([2000], np.array([500.0]), np.array([[500.0]]))
        lr = dr.to_loss_ratios(t)
        assert lr.ratios[0, 0] == 1.0

    def test_full_row_cumulative(self, lr18):
        # accident year 1997 developed to 0.629 within the horizon
        assert round(float(np.nansum(lr18.ratios[8])), 3) == 0.629

    def test_roundtrip_within_ulp(self, triangle18, lr18):
        back = lr18.ratios * triangle18.premiums[:, None]
        obs = ~np.isnan(triangle18.losses)
        diff = np.abs(back[obs] - triangle18.losses[obs])
        assert np.all(diff <= np.spacing(triangle18.losses[obs]))

    def test_mask_preserved(self, triangle18, lr18):
        np.testing.assert_array_equal(np.isnan(lr18.ratios), np.isnan(triangle18.losses))


class TestCumulative:
    def test_reference_partial_sum(self, lr18):
        assert dr.cumulative(lr18, 10, 1, 9) == pytest.approx(0.70846, abs=5e-6)

    def test_single_term(self, lr18):
        assert dr.cumulative(lr18, 3, 4, 4) == lr18.ratios[2, 3]

    def test_full_row(self, lr18):
        assert round(dr.cumulative(lr18, 9, 1, 10), 3) == 0.629

    def test_unobserved_range(self, lr18):
        with pytest.raises(TriangleError, match="unobserved"):
            dr.cumulative(lr18, 10, 1, 10)

    def test_strictly_increasing(self, lr18):
        vals = [dr.cumulative(lr18, 12, 1, k2) for k2 in range(1, int(lr18.k[11]) + 1)]
        assert np.all(np.diff(vals) > 0)

    def test_bad_indices(self, lr18):
        with pytest.raises(IndexError):
            dr.cumulative(lr18, 0, 1, 1)
        with pytest.raises(IndexError):
            dr.cumulative(lr18, 1, 3, 2)


class TestRestrict:
    def test_to_recent_ten(self, triangle18):
        t = dr.restrict_years(triangle18, 1997)
        assert t.m == 10 and t.n == 10
        assert t.years[0] == 1997
        assert list(t.k) == [10, 9, 8, 7, 6, 5, 4, 3, 2, 1]

    def test_identity(self, triangle18):
        t = dr.restrict_years(triangle18, triangle18.years[0])
        assert t.years == triangle18.years
        np.testing.assert_array_equal(
            np.nan_to_num(t.losses), np.nan_to_num(triangle18.losses)
        )

    def test_full_range(self, triangle18):
        t = dr.restrict_years(triangle18, 1989)
        assert t.m == 18
        # nine accident years carry a complete ten-year history
        assert int((t.k == 10).sum()) == 9

    def test_empty_selection(self, triangle18):
        with pytest.raises(TriangleError):
            dr.restrict_years(triangle18, 2010)

    def test_most_recent_years(self, triangle18):
        t = dr.most_recent_years(triangle18, 10)
        assert t.years[0] == 1997
        with pytest.raises(TriangleError):
            dr.most_recent_years(triangle18, 40)


def test_immutable(triangle18):
    with pytest.raises(ValueError):
        triangle18.losses[0, 0] = 1.0
    with pytest.raises(ValueError):
        triangle18.premiums[0] = 1.0
