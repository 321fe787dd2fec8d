import hashlib
import math
from pathlib import Path

import pytest
from hypothesis import given, strategies as st

from pbec.config import KEYS, ConfigError, defaults_table, emit_config, load_config, parse_config, safe_eval
from pbec.params import TWO_PI

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


class TestParse:
    def test_empty_is_defaults(self):
        cfg = parse_config("")
        for k in KEYS.values():
            assert cfg.values[k.name] == k.default

    def test_comments_and_expressions(self):
        cfg = parse_config("# header\nOmega0 = 2*pi*40e9   # trap\n\nT = 300 K\n")
        assert cfg.Omega0 == TWO_PI * 40e9 and cfg.T == 300.0

    def test_ambiguous_interaction(self):
        with pytest.raises(ConfigError, match="ambiguous") as info:
            parse_config("g_tilde = 1e-3\nchi3 = 5e-20\n")
        assert info.value.line in (1, 2)

    def test_chi3_alone(self):
        cfg = parse_config("chi3 = 5e-20\n")
        assert cfg.g_tilde is None and cfg.physical().chi3 == 5e-20

    @pytest.mark.parametrize(
        "text,line,pattern",
        [
            ("T = 300\nfoo = 1\n", 2, "unknown key"),
            ("lambda_vac = 580 nm\n", 1, "unit"),
            ("\n\nn_L = 0.5\n", 3, "n_L"),
            ("bit_depth = 10\n", 1, "bit_depth"),
            ("model = hybrid\n", 1, "model"),
            ("q = 2.5\n", 1, "integer"),
            ("T = __import__('os')\n", 1, "T"),
            ("T\n", 1, "key = value"),
            ("T = 1\nT = 2\n", 2, "already"),
            ("n_k = 0\n", 1, "n_k"),
            ("T = none\n", 1, "required"),
        ],
    )
    def test_diagnostics(self, text, line, pattern):
        with pytest.raises(ConfigError, match=pattern) as info:
            parse_config(text)
        assert info.value.line == line
        assert str(info.value).startswith(f"line {line}:")

    def test_safe_eval(self):
        assert safe_eval("2*pi*1e9") == 2 * math.pi * 1e9
        assert safe_eval("-(3 + 1)**2/8") == -2.0
        for bad in ("pi.__class__", "open('x')", "[1]", "1 if 1 else 2"):
            with pytest.raises(ValueError):
                safe_eval(bad)


def value_strategy(key):
    if key.kind == "bool":
        return st.booleans()
    if key.kind == "word":
        return st.sampled_from(key.choices)
    if key.kind == "path":
        return st.sampled_from([None, "out/a.csv"]) if key.optional else st.just("x")
    if key.choices:
        return st.sampled_from(key.choices)
    if key.kind == "int":
        return st.integers(1, 10_000)
    return st.floats(1.01, 1e3)


class TestEmission:
    @given(st.data())
    def test_round_trip(self, data):
        safe = ["T", "N_bec", "Omega0", "gamma_net", "f_obj", "bit_depth", "model", "lda", "n_k", "r_cut", "out",
                "normalization", "exposure", "kappa_broad"]
        names = data.draw(st.lists(st.sampled_from(safe), unique=True))
        text = "".join(f"{n} = {data.draw(value_strategy(KEYS[n]))!r}\n".replace("'", "") for n in names)
        text = text.replace("True", "true").replace("False", "false").replace("None", "none")
        cfg = parse_config(text)
        again = parse_config(emit_config(cfg))
        assert again == cfg
        assert emit_config(again) == emit_config(cfg)

    def test_hash_is_emission_digest(self):
        cfg = parse_config("g_tilde = 1e-5\n")
        assert cfg.sha256() == hashlib.sha256(emit_config(cfg).encode()).hexdigest()
        assert parse_config(emit_config(cfg)).sha256() == cfg.sha256()

    def test_every_key_documented(self):
        table = defaults_table()
        assert all(f"`{k}`" in table for k in KEYS)


class TestShippedConfigs:
    def test_open_configs(self):
        for name in ("open_strong.cfg", "open_weak.cfg"):
            cfg = load_config(CONFIGS / name)
            assert cfg.gamma_net == pytest.approx(TWO_PI * 1e9, rel=1e-15)
            assert cfg.T == 300.0
            assert cfg.Omega0 == pytest.approx(TWO_PI * 4e10, rel=1e-15)
            assert cfg.N_bec == 1e5
        assert load_config(CONFIGS / "open_strong.cfg").g_tilde == 1e-3
        assert load_config(CONFIGS / "open_weak.cfg").g_tilde == 1e-5

    @pytest.mark.parametrize("name", ["camera_weak.cfg", "reference_optics.cfg"])
    def test_parse(self, name):
        load_config(CONFIGS / name).physical()
