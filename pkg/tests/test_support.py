import io
import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qmelab import io as qio
from qmelab.distributions import Distribution, polar_normals
from qmelab.errors import InvalidSample
from qmelab.rng import ALGORITHM, derive_seed, resolve_seed, substream


class TestRng:
    def test_same_path_same_stream(self):
        assert substream(1, 2, 3).random() == substream(1, 2, 3).random()

    def test_paths_differ(self):
        draws = {substream(1, *p).random() for p in [(), (2,), (2, 3), (3, 2)]}
        assert len(draws) == 4

    def test_algorithm_reproduces_stream(self):
        # the stream is named by ALGORITHM and the tuple alone
        assert "pcg64" in ALGORITHM
        raw = np.random.Generator(np.random.PCG64(np.random.SeedSequence([9, 4, 1]))).random(3)
        np.testing.assert_array_equal(substream(9, 4, 1).random(3), raw)

    def test_derive_seed(self):
        s = derive_seed(5, 2, 1)
        assert s == derive_seed(5, 2, 1) != derive_seed(5, 2, 2)
        assert 0 <= s < 2**64

    @pytest.mark.parametrize("bad", [-1, 2**64])
    def test_range(self, bad):
        with pytest.raises(ValueError):
            substream(bad)

    def test_resolve(self, monkeypatch):
        monkeypatch.delenv("QMELAB_SEED", raising=False)
        assert resolve_seed(None) == 0
        assert resolve_seed(None, default=3) == 3
        monkeypatch.setenv("QMELAB_SEED", "12")
        assert resolve_seed(None) == 12
        assert resolve_seed(4) == 4


class TestDistributions:
    def test_polar_moments(self):
        z = polar_normals(substream(0, 3), 200_000)
        assert abs(z.mean()) < 4 / math.sqrt(z.size)
        assert z.var() == pytest.approx(1.0, abs=0.02)

    def test_polar_deterministic(self):
        np.testing.assert_array_equal(polar_normals(substream(1), 17), polar_normals(substream(1), 17))

    @pytest.mark.parametrize(
        "text,mean,var",
        [
            ("gaussian:2,0.5", 2.0, 0.25),
            ("uniform:-1,3", 1.0, 16 / 12),
            ("mixture:0.5,-2,1,2,1", 0.0, 5.0),
        ],
    )
    def test_moments(self, text, mean, var):
        x = Distribution.parse(text).sample(substream(2), 100_000)
        assert x.mean() == pytest.approx(mean, abs=5 * math.sqrt(var / x.size))
        assert x.var() == pytest.approx(var, rel=0.03)

    @pytest.mark.parametrize("text", ["gaussian:0", "gaussian:0,-1", "uniform:1,0", "beta:1,2",
                                      "mixture:2,0,1,0,1", "gaussian:a,b"])
    def test_parse_errors(self, text):
        with pytest.raises(ValueError):
            Distribution.parse(text)

    def test_round_trip(self):
        d = Distribution.parse("mixture:0.3,-1,0.5,2,1")
        assert Distribution.parse(str(d)) == d


class TestCsv:
    def test_header_skipped(self):
        np.testing.assert_array_equal(qio.parse_csv("x\n1\n2\n"), [[1.0], [2.0]])

    def test_multi_column(self):
        assert qio.parse_csv("a,b\n1,2\n3,4\n").shape == (2, 2)

    def test_blank_lines(self):
        assert qio.parse_csv("\n1\n\n2\n").shape == (2, 1)

    @pytest.mark.parametrize("text,line", [("1\nx\n", 2), ("1,2\n3\n", 2), ("x\n1\nnan\n", 3)])
    def test_errors_name_line(self, text, line):
        with pytest.raises(InvalidSample, match=f"line {line}"):
            qio.parse_csv(text)

    def test_empty(self):
        with pytest.raises(InvalidSample):
            qio.parse_csv("x\n")


class TestJson:
    def test_flat_and_nested(self):
        np.testing.assert_array_equal(qio.parse_json("[1, 2]"), qio.parse_json("[[1], [2]]"))

    @pytest.mark.parametrize("text", ["[]", "{}", "[[1], [2, 3]]", "[true]", "[[1], 'a']", "[1,"])
    def test_errors(self, text):
        with pytest.raises(InvalidSample):
            qio.parse_json(text)

    def test_load_by_suffix(self, tmp_path):
        p = tmp_path / "s.json"
        p.write_text("[0.5]")
        assert qio.load_sample(p)[0, 0] == 0.5


class TestOutput:
    @given(st.floats(allow_nan=False, allow_infinity=False))
    def test_float_round_trip(self, x):
        assert json.loads(qio.dumps({"v": x}))["v"] == x

    def test_non_finite_is_null(self):
        assert json.loads(qio.dumps([math.inf, math.nan])) == [None, None]

    def test_numpy_scalars(self):
        assert json.loads(qio.dumps({"a": np.int64(3), "b": np.float64(0.1)})) == {"a": 3, "b": 0.1}

    def test_config_hash_order_free(self):
        assert qio.config_hash({"a": 1, "b": 2}) == qio.config_hash({"b": 2, "a": 1})
        assert qio.config_hash({"a": 1}) != qio.config_hash({"a": 2})

    def test_write_csv(self):
        buf = io.StringIO()
        qio.write_csv(buf, ["n", "v"], [[1, 0.1], [2, None]])
        assert buf.getvalue() == "n,v\n1,0.10000000000000001\n2,\n"
