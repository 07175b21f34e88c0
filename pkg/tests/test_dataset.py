import hashlib
import io
from collections import Counter

import pytest
from hypothesis import given
from hypothesis import strategies as st

from gepucs.dataset import (
    Dataset,
    DatasetError,
    DensityMeasurement,
    ParseError,
    RockSample,
    load_csv,
    porosity,
    porosity_percent,
    split,
    table1,
    table1_path,
)

TABLE1_SHA256 = "d737d3c9e89a1498829832b0c8ffafac901fac0ac71f7981c96d3d70867ab5fe"


class TestPorosity:
    @pytest.mark.parametrize("rho_d, rho_s, expected", [
        (2.7, 2.7, 0.0), (2.0, 2.5, 0.2), (2.16, 2.70, 0.2),
    ])
    def test_values(self, rho_d, rho_s, expected):
        assert porosity(DensityMeasurement(rho_d, rho_s)) == pytest.approx(expected, abs=1e-15)

    def test_percent(self):
        assert porosity_percent(DensityMeasurement(2.0, 2.5)) == pytest.approx(20.0)

    @pytest.mark.parametrize("rho_d, rho_s", [(2.8, 2.7), (0.0, 2.7), (-1.0, 2.7), (1.0, 0.0)])
    def test_domain_errors(self, rho_d, rho_s):
        with pytest.raises(DatasetError):
            porosity(DensityMeasurement(rho_d, rho_s))

    @given(st.floats(0.01, 10), st.floats(0.01, 10), st.floats(0.01, 10))
    def test_range_and_monotone(self, a, b, rho_s):
        lo, hi = sorted((a, b))
        lo, hi = min(lo, rho_s), min(hi, rho_s)
        p_lo = porosity(DensityMeasurement(lo, rho_s))
        p_hi = porosity(DensityMeasurement(hi, rho_s))
        assert 0.0 <= p_hi <= p_lo < 1.0
        if lo < hi:
            assert p_hi < p_lo


class TestLoadCsv:
    def test_single_row(self):
        ds = load_csv(io.StringIO("n_percent,v_mps,ucs_mpa\n24.9,2551.2,69.1\n"))
        assert ds.samples == (RockSample(24.9, 2551.2, 69.1),)

    def test_crlf_and_no_target(self):
        ds = load_csv(io.StringIO("n_percent,v_mps\r\n10,3000\r\n"))
        assert ds.samples == (RockSample(10.0, 3000.0),)
        assert not ds.has_target

    def test_empty_file(self):
        with pytest.raises(ParseError, match="empty"):
            load_csv(io.StringIO(""))

    def test_out_of_range_porosity(self):
        text = "n_percent,v_mps,ucs_mpa\n24.9,2551.2,69.1\n150,3000,50\n"
        with pytest.raises(ParseError) as err:
            load_csv(io.StringIO(text))
        assert err.value.row == 3 and err.value.column == "n_percent"

    def test_non_numeric(self):
        with pytest.raises(ParseError) as err:
            load_csv(io.StringIO("n_percent,v_mps,ucs_mpa\n24.9,fast,69.1\n"))
        assert (err.value.row, err.value.column) == (2, "v_mps")

    def test_missing_column(self):
        with pytest.raises(ParseError) as err:
            load_csv(io.StringIO("n_percent,ucs_mpa\n24.9,69.1\n"))
        assert err.value.column == "v_mps"

    def test_require_target(self):
        with pytest.raises(ParseError):
            load_csv(io.StringIO("n_percent,v_mps\n10,3000\n"), require_target=True)

    def test_header_only(self):
        assert len(load_csv(io.StringIO("n_percent,v_mps,ucs_mpa\n"))) == 0


class TestTable1:
    def test_rows(self):
        ds = table1()
        assert len(ds) == 39
        assert ds.samples[0] == RockSample(24.9, 2551.2, 69.1)
        assert ds.samples[16] == RockSample(18.0, 3973.4, 46.6)
        assert ds.samples[-1] == RockSample(11.2, 4946.1, 34.5)

    def test_fixture_checksum(self):
        data = table1_path().read_bytes()
        assert hashlib.sha256(data).hexdigest() == TABLE1_SHA256

    def test_csv_roundtrip(self):
        ds = table1()
        assert load_csv(io.StringIO(ds.to_csv())) == ds


class TestSplit:
    def test_published_sizes(self):
        ds = Dataset(tuple(RockSample(1 + i % 90, 3000.0 + i, 40.0) for i in range(117)))
        train, test = split(ds, 2 / 3, 0)
        assert (len(train), len(test)) == (78, 39)

    def test_rounding(self):
        ds = Dataset(tuple(RockSample(10.0 + i, 3000.0) for i in range(3)))
        assert tuple(map(len, split(ds, 2 / 3, 0))) == (2, 1)
        ds4 = Dataset(tuple(RockSample(10.0 + i, 3000.0) for i in range(4)))
        # 0.625 * 4 = 2.5 rounds toward train
        assert tuple(map(len, split(ds4, 0.625, 0))) == (3, 1)

    def test_degenerate(self):
        ds = Dataset((RockSample(10.0, 3000.0), RockSample(11.0, 3000.0)))
        with pytest.raises(DatasetError):
            split(ds, 0.1, 0)
        with pytest.raises(DatasetError):
            split(Dataset((RockSample(10.0, 3000.0),)), 0.5, 0)

    @given(st.integers(0, 2**32), st.floats(0.2, 0.8))
    def test_partition(self, seed, frac):
        ds = table1()
        train, test = split(ds, frac, seed)
        assert Counter(train.samples) + Counter(test.samples) == Counter(ds.samples)

    def test_seeded(self):
        assert split(table1(), 2 / 3, 7) == split(table1(), 2 / 3, 7)


def test_mixed_target_presence_rejected():
    with pytest.raises(DatasetError):
        Dataset((RockSample(10.0, 3000.0, 40.0), RockSample(11.0, 3000.0)))
