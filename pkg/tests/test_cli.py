import csv
import io
import math
from pathlib import Path

from pytest import approx, mark, raises

from casimir.cli import (
    SI_FACTORS, columns, dump_config, exit_code, main, parse_config, run, sweep_point,
)
from casimir.errors import ConfigError, ConvergenceError, DomainError, StackError
from casimir.materials import Basis, Drude, PerfectConductor, Vacuum, Weyl

from .oracles import classical_force

CONFIG_DIR = Path(__file__).resolve().parent.parent / 'configs'

GAP = """\
schema_version: 1
observable: force
stack:
  - material: perfect_conductor
  - material: vacuum
    width: 1.0
  - material: perfect_conductor
targets:
  gap: 1
thermal:
  temperature: 20.0
"""

MIXED = """\
schema_version: 1
observable: body-force
basis: helicity
length_unit_nm: 50.0
stack:
  - material: vacuum
  - material: dielectric
    eps: {model: drude, omega_p: 2.0, gamma: 0.1}
    width: 0.5
  - material: vacuum
    width: 0.8
  - material: weyl
    b: 0.4
    width: 0.3
  - material: vacuum
    width: 0.6
  - material: dielectric
    eps: {model: constant, value: 3.5}
    width: 0.5
  - material: vacuum
targets:
  body: [2, 4]
thermal:
  temperature: 0.3
quadrature:
  tolerance: 1.0e-8
  richardson: true
  scale: 0.5
sweep:
  parameter: stack.3.b
  values: [0.2, 0.4]
far_boundary: true
output:
  format: tsv
  timing: true
"""


def _table(text):
    lines = [line for line in text.splitlines() if not line.startswith('#')]
    delimiter = '\t' if '\t' in lines[0] else ','
    return list(csv.DictReader(lines, delimiter=delimiter))


def _run(config):
    out = io.StringIO()
    code = run(config, out)
    return code, out.getvalue()


def test_parse_minimal_config():
    config = parse_config(GAP)
    assert config.observable == 'force' and config.targets.gap == 1
    assert config.stack.N == 1
    assert isinstance(config.stack.regions[0].material, PerfectConductor)
    assert config.thermal.temperature == 20.0
    assert config.basis is Basis.TMTE and config.sweep is None
    assert config.output.format == 'csv' and not config.output.si_units


def test_parse_full_config():
    config = parse_config(MIXED)
    assert config.basis is Basis.HELICITY and config.far_boundary
    assert config.targets.body == (2, 4)
    assert config.stack.regions[1].material.eps_model == Drude(2.0, 0.1)
    assert config.stack.regions[3].material == Weyl(0.4)
    assert config.quadrature.richardson and config.quadrature.scale == 0.5
    assert config.sweep.values == (0.2, 0.4)
    assert sweep_point(config, 0.2).stack.regions[3].material == Weyl(0.2)
    assert sweep_point(config, 0.2).sweep is None


def test_dump_round_trip():
    config = parse_config(MIXED)
    assert parse_config(dump_config(config)) == config


def test_overrides_apply_before_validation():
    config = parse_config(GAP, {'quadrature.threads': 3, 'output.format': 'tsv'})
    assert config.quadrature.threads == 3 and config.output.format == 'tsv'
    with raises(ConfigError) as err:
        parse_config(GAP, {'quadrature.tolerance': 5.0})
    assert err.value.path == 'quadrature'


def test_overrides_fill_null_sections():
    config = parse_config(GAP + "quadrature:\noutput:\n", {'quadrature.threads': 2,
                                                         'output.format': 'tsv'})
    assert config.quadrature.threads == 2 and config.output.format == 'tsv'
    assert parse_config(GAP + "quadrature:\n").quadrature.threads == 1


def test_unknown_field_reports_path_and_line():
    text = GAP.replace("  - material: vacuum\n", "  - material: vacuum\n    colour: red\n")
    with raises(ConfigError) as err:
        parse_config(text)
    assert err.value.path == 'stack.1.colour'
    assert err.value.line == 6
    assert 'line 6' in str(err.value)


@mark.parametrize('old, new, path', [
    ('width: 1.0', 'width: -1.0', 'stack.1.width'),
    ('width: 1.0', 'width: lots', 'stack.1.width'),
    ('gap: 1', 'gap: 2', 'targets'),
    ('schema_version: 1', 'schema_version: 2', 'schema_version'),
    ('observable: force', 'observable: pressure', 'observable'),
    ('temperature: 20.0', 'temperature: -1.0', 'thermal.temperature'),
    ('targets:\n  gap: 1\n', '', 'targets.gap'),
    ('  - material: perfect_conductor\ntargets', '  - material: perfect_conductor\n    width: 2\ntargets',
     'stack.2.width'),
])
def test_invalid_configs(old, new, path):
    text = GAP.replace(old, new)
    assert text != GAP
    with raises(ConfigError) as err:
        parse_config(text)
    assert err.value.path == path


def test_unsupported_pairing_is_a_config_error():
    text = MIXED.replace("  - material: vacuum\n    width: 0.6\n", "")
    with raises(ConfigError) as err:
        parse_config(text)
    assert err.value.path == 'stack' and 'Weyl' in err.value.reason


def test_yaml_syntax_error_has_line():
    with raises(ConfigError) as err:
        parse_config("schema_version: 1\nstack: [\n  - oops: {\n")
    assert err.value.line is not None


@mark.parametrize('sweep, path', [
    ("sweep:\n  parameter: stack.0.width\n  values: [1.0]\n", 'sweep.parameter'),
    ("sweep:\n  parameter: quadrature.tolerance\n  values: [1.0e-6]\n", 'sweep.parameter'),
    ("sweep:\n  parameter: stack.9.width\n  values: [1.0]\n", 'sweep.parameter'),
    ("sweep:\n  parameter: stack.1.width\n  values: [1.0, -0.5]\n", 'sweep.values.1'),
])
def test_invalid_sweeps(sweep, path):
    with raises(ConfigError) as err:
        parse_config(GAP + sweep)
    assert err.value.path == path


def test_empty_sweep_writes_header_only():
    config = parse_config(GAP + "sweep:\n  parameter: stack.1.width\n  values: []\n")
    code, text = _run(config)
    assert code == 0
    lines = text.splitlines()
    assert [line.split(':')[0] for line in lines[:4]] == [
        '# casimir-multilayer 0.1.0', '# schema_version', '# config_sha256', '# observable']
    assert lines[4] == ','.join(columns(config))
    assert len(lines) == 5


def test_sweep_rows_match_classical_limit():
    config = parse_config(GAP + "sweep:\n  parameter: stack.1.width\n  values: [0.5, 1.0]\n")
    code, text = _run(config)
    assert code == 0
    rows = _table(text)
    assert [r['sweep_value'] for r in rows] == ['0.5', '1.0']
    for row, width in zip(rows, (0.5, 1.0)):
        assert row['status'] == 'ok'
        assert float(row['value']) == approx(classical_force(20.0, width), rel=1e-8)
        assert int(row['matsubara_terms']) >= 4


def test_output_is_deterministic():
    config = parse_config(GAP + "sweep:\n  parameter: thermal.temperature\n"
                          "  values: [20.0, 30.0]\n")
    assert _run(config) == _run(config)


def test_tsv_and_si_columns():
    config = parse_config(GAP, {'output.format': 'tsv', 'output.si_units': True})
    code, text = _run(config)
    assert code == 0
    row = _table(text)[0]
    assert list(row) == columns(config)
    assert list(row)[-1] == 'value_si'
    factor, power = SI_FACTORS['force']
    assert float(row['value_si']) == approx(float(row['value']) * factor)


def test_timing_column():
    config = parse_config(GAP + "output:\n  timing: true\n")
    code, text = _run(config)
    row = _table(text)[0]
    assert float(row['wall_time_s']) >= 0.0
    assert columns(config)[-2:] == ['wall_time_s', 'status']


def test_identity_check_rows():
    config = parse_config(GAP.replace('observable: force', 'observable: identity-check')
                          + "identity_check:\n  samples: 5\n  seed: 2\n")
    code, text = _run(config)
    rows = _table(text)
    assert code == 0
    assert {r['identity'] for r in rows} >= {'split_independence', 'uv_factorization'}
    assert all(r['status'] == 'pass' and r['samples'] == '5' for r in rows)


def test_non_convergence_row_and_status():
    config = parse_config(GAP.replace('temperature: 20.0', 'temperature: 0.05')
                          + "quadrature:\n  max_terms: 2\n")
    code, text = _run(config)
    row = _table(text)[0]
    assert code == 3
    assert row['status'] == 'not_converged' and row['matsubara_terms'] == '2'
    assert float(row['value']) < 0.0


def test_exit_codes():
    assert exit_code(ConfigError('bad')) == 2
    assert exit_code(StackError('bad')) == 2
    assert exit_code(DomainError('bad')) == 2
    assert exit_code(ConvergenceError('slow')) == 3
    assert exit_code(RuntimeError('other')) == 4


def test_main_writes_output_file(tmp_path):
    config_path = tmp_path / 'gap.yaml'
    config_path.write_text(GAP)
    out = tmp_path / 'out.csv'
    assert main([str(config_path), '--output', str(out), '--log-level', 'OFF']) == 0
    rows = _table(out.read_text())
    assert rows[0]['status'] == 'ok'


def test_main_reports_config_errors(tmp_path, capsys):
    assert main([str(tmp_path / 'missing.yaml')]) == 2
    bad = tmp_path / 'bad.yaml'
    bad.write_text(GAP.replace('width: 1.0', 'width: -1.0'))
    assert main([str(bad)]) == 2
    assert 'config_invalid' in capsys.readouterr().err


def test_shipped_configs_parse():
    paths = sorted(CONFIG_DIR.glob('*.yaml'))
    assert paths
    for path in paths:
        parse_config(path.read_text())


def test_stack_material_names():
    config = parse_config(MIXED)
    assert isinstance(config.stack.regions[0].material, Vacuum)
    assert dump_config(config).count('material: vacuum') == 4


@mark.slow
def test_shipped_energy_config_converges():
    config = parse_config((CONFIG_DIR / 'conductor_gap_energy.yaml').read_text())
    code, text = _run(config)
    rows = _table(text)
    assert code == 0
    assert [row['status'] for row in rows] == ['ok'] * 3
    for row in rows:
        a = float(row['sweep_value'])
        assert float(row['value']) * a ** 3 == approx(-math.pi ** 2 / 720.0, rel=1e-8)
