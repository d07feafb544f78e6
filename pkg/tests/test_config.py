import pytest

from slitlab.config import (
    LENGTH,
    config_digest,
    parse_config,
    parse_quantity,
    serialize_config,
)
from slitlab.errors import ConfigError, UnitError

ELECTRON_DOC = """
command = "simulate"

[scenario]
species = "electron"
wavelength = "1nm"
slit_width = "20um"
distance = "1m"
"""


class TestParseQuantity:
    @pytest.mark.parametrize("raw,expected", [
        ("1nm", 1e-9),
        ("20um", 20e-6),
        ("1m", 1.0),
        ("2.5cm", 2.5e-2),
        ("1e-9m", 1e-9),
        (".5mm", 0.5e-3),
    ])
    def test_lengths(self, raw, expected):
        assert parse_quantity(raw, LENGTH, "k") == pytest.approx(expected, rel=1e-12)

    def test_bare_number_rejected(self):
        with pytest.raises(UnitError, match="slit_width"):
            parse_quantity(20.0, LENGTH, "slit_width")

    def test_unknown_unit_rejected(self):
        with pytest.raises(UnitError, match="parsec"):
            parse_quantity("1parsec", LENGTH, "k")

    def test_garbage_rejected(self):
        with pytest.raises(UnitError):
            parse_quantity("fast", LENGTH, "k")


class TestParseConfig:
    def test_minimal_electron_document(self):
        cfg = parse_config(ELECTRON_DOC)
        assert cfg.command == "simulate"
        assert cfg.scenario.wavelength == 1e-9
        assert cfg.scenario.slit_width == 20e-6
        assert cfg.scenario.distance == 1.0
        assert cfg.scenario.kernel == "auto"
        assert cfg.scenario.grid_n == 2 ** 16
        # defaults were applied and recorded
        assert any(d.startswith("scenario.kernel") for d in cfg.applied_defaults)
        assert any(d.startswith("sampling.seed") for d in cfg.applied_defaults)

    def test_round_trip(self):
        cfg = parse_config(ELECTRON_DOC)
        again = parse_config(serialize_config(cfg))
        assert again == cfg
        assert config_digest(again) == config_digest(cfg)

    def test_round_trip_with_fine_source_and_species(self):
        doc = ELECTRON_DOC.replace('source = "wide"', "") + """
[model]
gain = 1.25
sign = 1

[species]
"Mg+" = "24.305amu"
"""
        doc = doc.replace('species = "electron"', 'species = "Mg+"') + \
            '\n[sampling]\nseed = 7\ncheckpoints = [5, 50]\n'
        cfg = parse_config(doc)
        assert cfg.model.gain == 1.25
        assert cfg.sampling.checkpoints == (5, 50)
        assert dict(cfg.species_extra)["Mg+"] == pytest.approx(24.305 * 1.66053906660e-27)
        assert parse_config(serialize_config(cfg)) == cfg

    def test_missing_unit_names_the_key(self):
        doc = ELECTRON_DOC.replace('slit_width = "20um"', "slit_width = 20")
        with pytest.raises(UnitError, match="slit_width"):
            parse_config(doc)

    def test_unitless_string_names_the_key(self):
        doc = ELECTRON_DOC.replace('slit_width = "20um"', 'slit_width = "20"')
        with pytest.raises(UnitError, match="slit_width"):
            parse_config(doc)

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError, match="slitwidth"):
            parse_config(ELECTRON_DOC + "\n[model]\nslitwidth = 1\n")

    def test_unknown_section_rejected(self):
        with pytest.raises(ConfigError, match="extras"):
            parse_config(ELECTRON_DOC + "\n[extras]\nx = 1\n")

    def test_parse_error_carries_location(self):
        with pytest.raises(ConfigError, match="line"):
            parse_config("[scenario\nwavelength=")

    def test_command_mismatch_rejected(self):
        with pytest.raises(ConfigError, match="onset"):
            parse_config(ELECTRON_DOC, command="onset")

    def test_cli_command_fills_in_when_absent(self):
        doc = ELECTRON_DOC.replace('command = "simulate"', "")
        cfg = parse_config(doc, command="simulate")
        assert cfg.command == "simulate"

    def test_fine_source_requires_beam_fwhm(self):
        doc = ELECTRON_DOC + 'source = "fine"\n'
        # toml forbids duplicate keys across tables; build a fresh doc instead
        doc = """
[scenario]
wavelength = "1nm"
slit_width = "20um"
distance = "1m"
source = "fine"
"""
        with pytest.raises(ConfigError, match="beam_fwhm"):
            parse_config(doc)

    def test_sweep_command_requires_fine_source(self):
        with pytest.raises(ConfigError, match="fine"):
            parse_config(ELECTRON_DOC.replace('command = "simulate"',
                                              'command = "sweep-xb"'))

    def test_invalid_checkpoints_rejected(self):
        with pytest.raises(ConfigError, match="checkpoints"):
            parse_config(ELECTRON_DOC + "\n[sampling]\ncheckpoints = [1.5, 2]\n")

    def test_bad_command_rejected(self):
        with pytest.raises(ConfigError):
            parse_config('command = "explode"\n')

    def test_unknown_output_format_rejected(self):
        with pytest.raises(ConfigError, match="pdf"):
            parse_config(ELECTRON_DOC + '\n[output]\nformats = ["pdf"]\n')

    def test_gravity_override(self):
        cfg = parse_config(ELECTRON_DOC + '\n[constants]\ngravity = "9.80665m/s2"\n')
        assert cfg.gravity == 9.80665

    def test_onset_bounds_validated(self):
        with pytest.raises(ConfigError, match="fresnel_min"):
            parse_config(ELECTRON_DOC + "\n[onset]\nfresnel_min = 0.5\n")


def test_digest_changes_with_seed():
    a = parse_config(ELECTRON_DOC)
    b = parse_config(ELECTRON_DOC + "\n[sampling]\nseed = 999\n")
    assert config_digest(a) != config_digest(b)
