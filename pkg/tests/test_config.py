import numpy as np
import pytest
from importlib import resources

from wvamp import ParseError, ValidationError
from wvamp.config import parse_config

MINIMAL = """
eigenvalues = -1, 1
pre = 0.7071067811865476, 0.7071067811865476
c = 0.01
g = 0.1
"""


class TestParseMinimal:
    def test_defaults_applied(self):
        cfg = parse_config(MINIMAL)
        assert cfg.d == 1.0
        assert cfg.delta_q == 0.0
        assert cfg.delta_p == 0.0
        assert cfg.eta == 0.95
        assert cfg.n0 == 1_000_000
        assert cfg.channels == frozenset(("q", "p"))
        assert cfg.check_engine is False
        assert cfg.mc_trials == 0
        assert cfg.output == "scan.csv"
        assert cfg.seed == 0

    def test_observable_and_states(self):
        cfg = parse_config(MINIMAL)
        assert cfg.observable.eigenvalues.tolist() == [-1.0, 1.0]
        assert cfg.pre.dim == 2
        assert cfg.c == 0.01

    def test_comments_and_blanks_ignored(self):
        cfg = parse_config("# header\n\n" + MINIMAL + "\nd = 2.0  # width\n")
        assert cfg.d == 2.0


class TestParseErrors:
    def test_eta_out_of_range_names_field_and_line(self):
        text = MINIMAL + "eta = 1.5\n"
        with pytest.raises(ValidationError) as err:
            parse_config(text)
        assert "eta" in str(err.value)
        assert "(0, 1)" in str(err.value)
        assert err.value.line == 6

    def test_missing_equals_sign(self):
        with pytest.raises(ParseError) as err:
            parse_config("eigenvalues -1, 1\n")
        assert err.value.line == 1

    def test_duplicate_key(self):
        with pytest.raises(ParseError):
            parse_config(MINIMAL + "g = 0.2\n")

    def test_unknown_key(self):
        with pytest.raises(ValidationError) as err:
            parse_config(MINIMAL + "wobble = 3\n")
        assert "wobble" in str(err.value)

    def test_bad_number(self):
        with pytest.raises(ParseError):
            parse_config("eigenvalues = -1, banana\npre = 1, 0\nc = 0.1\ng = 0.1\n")

    def test_missing_postselection(self):
        with pytest.raises(ValidationError):
            parse_config("eigenvalues = -1, 1\npre = 1, 1\ng = 0.1\n")

    def test_conflicting_postselection(self):
        with pytest.raises(ValidationError):
            parse_config(MINIMAL + "post = 0, 1\n")

    def test_wrong_amplitude_count(self):
        with pytest.raises(ValidationError):
            parse_config("eigenvalues = -1, 1\npre = 1, 0, 0\nc = 0.1\ng = 0.1\n")

    def test_zero_coupling_rejected(self):
        with pytest.raises(ValidationError):
            parse_config("eigenvalues = -1, 1\npre = 1, 1\nc = 0.1\ng = 0\n")

    def test_zero_c_rejected(self):
        with pytest.raises(ValidationError):
            parse_config("eigenvalues = -1, 1\npre = 1, 1\nc = 0\ng = 0.1\n")

    def test_negative_width_rejected(self):
        with pytest.raises(ValidationError):
            parse_config(MINIMAL + "d = -1\n")

    def test_c_scan_needs_positive_bounds(self):
        with pytest.raises(ValidationError):
            parse_config(
                "eigenvalues = -1, 1\npre = 1, 1\nc_scan = 0, 1, 5\ng = 0.1\n"
            )

    def test_cannot_scan_both(self):
        with pytest.raises(ValidationError):
            parse_config(
                "eigenvalues = -1, 1\npre = 1, 1\nc_scan = 0.1, 1, 5\n"
                "g_scan = 0.1, 1, 5\n"
            )


class TestModes:
    def test_explicit_postselection(self):
        cfg = parse_config(
            "eigenvalues = -1, 1\npre = 1, 1\npost = 0, 1\ng = 0.1\n"
        )
        assert cfg.post is not None
        assert np.allclose(cfg.post.amplitudes, [0.0, 1.0])

    def test_complex_amplitudes(self):
        cfg = parse_config(
            "eigenvalues = -1, 1\npre = 1, 0.5+0.5j\npost = 0, 1j\ng = 0.1\n"
        )
        assert abs(np.vdot(cfg.pre.amplitudes, cfg.pre.amplitudes) - 1.0) < 1e-12

    def test_c_scan_values_log_spaced(self):
        cfg = parse_config(
            "eigenvalues = -1, 1\npre = 1, 1\nc_scan = 0.001, 1, 4\ng = 0.1\n"
        )
        vals = cfg.c_scan.values()
        assert len(vals) == 4
        ratios = vals[1:] / vals[:-1]
        assert np.allclose(ratios, ratios[0])

    def test_g_scan(self):
        cfg = parse_config(
            "eigenvalues = -1, 1\npre = 1, 1\nc = 0.1\ng_scan = 0.01, 1, 9\n"
        )
        assert cfg.g is None
        assert len(cfg.g_scan.values()) == 9

    def test_hermitian_2x2(self):
        cfg = parse_config(
            "hermitian_2x2 = 1, 0.5, 0.25, -1\npre = 1, 0\nc = 0.1\ng = 0.1\n"
        )
        m = cfg.observable.matrix
        assert m[0, 0] == pytest.approx(1.0)
        assert m[0, 1] == pytest.approx(0.5 + 0.25j)

    def test_explicit_projectors_three_dim(self):
        text = (
            "eigenvalues = -1, 0, 1\n"
            "projector_1 = 1, 0, 0, 0, 0, 0, 0, 0, 0\n"
            "projector_2 = 0, 0, 0, 0, 1, 0, 0, 0, 0\n"
            "projector_3 = 0, 0, 0, 0, 0, 0, 0, 0, 1\n"
            "pre = 1, 1, 1\n"
            "c = 0.1\n"
            "g = 0.1\n"
        )
        cfg = parse_config(text)
        assert cfg.observable.dim == 3

    def test_channels_single(self):
        cfg = parse_config(MINIMAL + "channels = q\n")
        assert cfg.channels == frozenset(("q",))


class TestFigureRecipe:
    def test_packaged_recipe_parses_to_published_parameters(self):
        text = (
            resources.files("wvamp")
            .joinpath("recipes/figure1.cfg")
            .read_text(encoding="utf-8")
        )
        cfg = parse_config(text)
        assert cfg.d == 4.0
        assert cfg.g == 0.02
        assert cfg.n0 == 10_000_000
        assert cfg.delta_q == 0.5
        assert cfg.eta == 0.95
        assert cfg.observable.eigenvalues.tolist() == [-0.5, 0.5]
        assert cfg.c_scan is not None
