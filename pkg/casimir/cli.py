#!/usr/bin/env python3
"""
Batch front end: read a YAML run configuration, evaluate one observable over
an optional parameter sweep and write a delimited table.

Usage:
    python3 -m casimir.cli configs/conductor_gap_force.yaml
    python3 -m casimir.cli run.yaml --threads 4 --format tsv --output out.tsv --si-units

Exit codes:
    0  success
    2  invalid configuration or stack
    3  non-convergence (rows carry status not_converged)
    4  any other numerical failure

Config schema (schema_version 1):

    schema_version: 1
    observable: force            # energy | force | work | body-force | identity-check
    basis: tmte                  # tmte | helicity
    length_unit_nm: 1.0          # length unit of every width, used for --si-units
    stack:                       # regions left to right; boundaries have no width
      - material: perfect_conductor
      - material: dielectric
        eps: {model: drude, omega_p: 9.0, gamma: 0.035}
        width: 0.5
      - material: weyl
        b: 0.3
        width: 1.0
      - material: perfect_conductor
    targets: {gap: 2}            # gap | triple | body | split
    thermal: {temperature: 0.0}
    quadrature: {tolerance: 1.0e-9, threads: 1}
    sweep: {parameter: stack.2.width, values: [0.5, 1.0, 2.0]}
    far_boundary: false
    identity_check: {samples: 100, seed: 0}
    output: {path: '-', format: csv, timing: false, si_units: false}
"""

import argparse
import csv
import hashlib
import io
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, TextIO, Tuple

import yaml

from .config import (
    DEFAULT_THREADS, DEFAULT_TOLERANCE, EV_TO_J, HBAR_C_EV_NM, MAX_EVALUATIONS,
    MAX_MATSUBARA_TERMS, SCHEMA_VERSION, VERSION,
)
from .diagnostics import identity_residuals
from .errors import (
    CasimirError, ConfigError, ConvergenceError, DomainError, StackError,
    UnsupportedPairingError,
)
from .force import ForceQuery, force_general, force_on_body
from .logging_utils import log_error, log_info, log_warn, set_level
from .materials import (
    Basis, Constant, Dielectric, Drude, Material, PerfectConductor, Plasma, Vacuum, Weyl,
)
from .spectral import ordered_triple
from .stack import LayerStack, Region
from .thermo import ObservableResult, QuadratureSpec, ThermalSpec, casimir_energy, work

OBSERVABLES = ('energy', 'force', 'work', 'body-force', 'identity-check')
FORMATS = {'csv': ',', 'tsv': '\t'}
RESULT_COLUMNS = ['sweep_value', 'value', 'error_estimate', 'matsubara_terms', 'evaluations']
IDENTITY_COLUMNS = ['sweep_value', 'identity', 'max_residual', 'threshold', 'samples', 'status']
# natural units -> SI: energy per area in J/m^2, force per area in Pa
SI_FACTORS = {
    'energy': (HBAR_C_EV_NM * EV_TO_J * 1e18, 3),
    'work': (HBAR_C_EV_NM * EV_TO_J * 1e18, 3),
    'force': (HBAR_C_EV_NM * EV_TO_J * 1e27, 4),
    'body-force': (HBAR_C_EV_NM * EV_TO_J * 1e27, 4),
}


# ============================================================================
# Run configuration
# ============================================================================

@dataclass(frozen=True)
class TargetSpec:
    gap: Optional[int] = None
    triple: Optional[Tuple[int, int, int]] = None
    body: Optional[Tuple[int, int]] = None
    split: Optional[int] = None


@dataclass(frozen=True)
class SweepSpec:
    parameter: str
    values: Tuple[float, ...]


@dataclass(frozen=True)
class IdentityCheckSpec:
    samples: int = 100
    seed: int = 0


@dataclass(frozen=True)
class OutputSpec:
    path: str = '-'
    format: str = 'csv'
    timing: bool = False
    si_units: bool = False


@dataclass(frozen=True)
class RunConfig:
    observable: str
    stack: LayerStack
    schema_version: int = SCHEMA_VERSION
    basis: Basis = Basis.TMTE
    length_unit_nm: float = 1.0
    targets: TargetSpec = field(default_factory=TargetSpec)
    thermal: ThermalSpec = field(default_factory=ThermalSpec)
    quadrature: QuadratureSpec = field(default_factory=QuadratureSpec)
    sweep: Optional[SweepSpec] = None
    far_boundary: bool = False
    identity_check: IdentityCheckSpec = field(default_factory=IdentityCheckSpec)
    output: OutputSpec = field(default_factory=OutputSpec)

    def to_dict(self) -> Dict[str, Any]:
        targets = {k: (list(v) if isinstance(v, tuple) else v)
                   for k, v in vars(self.targets).items() if v is not None}
        quad = self.quadrature
        out: Dict[str, Any] = {
            'schema_version': self.schema_version,
            'observable': self.observable,
            'basis': self.basis.value,
            'length_unit_nm': self.length_unit_nm,
            'stack': [_region_to_dict(r) for r in self.stack.regions],
            'targets': targets,
            'thermal': {'temperature': self.thermal.temperature},
            'quadrature': {
                'tolerance': quad.tolerance,
                'max_evaluations': quad.max_evaluations,
                'richardson': quad.richardson,
                'threads': quad.threads,
                'max_terms': quad.max_terms,
                'scale': quad.scale,
            },
            'far_boundary': self.far_boundary,
            'identity_check': {'samples': self.identity_check.samples,
                               'seed': self.identity_check.seed},
            'output': dict(vars(self.output)),
        }
        if self.sweep is not None:
            out['sweep'] = {'parameter': self.sweep.parameter, 'values': list(self.sweep.values)}
        return out


def _eps_to_dict(model) -> Dict[str, Any]:
    if isinstance(model, Constant):
        return {'model': 'constant', 'value': model.eps}
    if isinstance(model, Plasma):
        return {'model': 'plasma', 'omega_p': model.omega_p}
    return {'model': 'drude', 'omega_p': model.omega_p, 'gamma': model.gamma}


def _region_to_dict(region: Region) -> Dict[str, Any]:
    m = region.material
    if isinstance(m, Dielectric):
        out = {'material': 'dielectric', 'eps': _eps_to_dict(m.eps_model)}
    elif isinstance(m, Weyl):
        out = {'material': 'weyl', 'b': m.b}
    elif isinstance(m, PerfectConductor):
        out = {'material': 'perfect_conductor'}
    else:
        out = {'material': 'vacuum'}
    out['width'] = 'infinite' if math.isinf(region.width) else region.width
    return out


def dump_config(config: RunConfig) -> str:
    return yaml.safe_dump(config.to_dict(), sort_keys=False, default_flow_style=False)


# ============================================================================
# Parsing
# ============================================================================

def _line_index(node, path: str, out: Dict[str, int]):
    out.setdefault(path, node.start_mark.line + 1)
    if isinstance(node, yaml.MappingNode):
        for key, value in node.value:
            child = f"{path}.{key.value}" if path else str(key.value)
            out[child] = key.start_mark.line + 1
            _line_index(value, child, out)
    elif isinstance(node, yaml.SequenceNode):
        for idx, item in enumerate(node.value):
            _line_index(item, f"{path}.{idx}" if path else str(idx), out)


class _Reader:
    """Strict field access that reports errors with their dotted path and line."""

    def __init__(self, lines: Dict[str, int]):
        self.lines = lines

    def fail(self, path: str, message: str):
        probe = path
        while probe and probe not in self.lines:
            probe = probe.rpartition('.')[0]
        raise ConfigError(message, path, self.lines.get(probe))

    def mapping(self, value: Any, path: str, allowed: Sequence[str],
                required: Sequence[str] = ()) -> Dict[str, Any]:
        if value is None:
            value = {}
        if not isinstance(value, dict):
            self.fail(path, f"expected a mapping, got {type(value).__name__}")
        for key in value:
            if key not in allowed:
                self.fail(f"{path}.{key}" if path else str(key),
                          f"unknown field; allowed: {', '.join(allowed)}")
        for key in required:
            if key not in value:
                self.fail(f"{path}.{key}" if path else key, "required field missing")
        return value

    def number(self, value: Any, path: str, minimum: Optional[float] = None,
               positive: bool = False) -> float:
        if isinstance(value, str):
            try:
                value = float(value)
            except ValueError:
                self.fail(path, f"expected a number, got {value!r}")
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            self.fail(path, f"expected a number, got {value!r}")
        value = float(value)
        if not math.isfinite(value):
            self.fail(path, f"expected a finite number, got {value}")
        if positive and not value > 0.0:
            self.fail(path, f"must be > 0, got {value}")
        if minimum is not None and value < minimum:
            self.fail(path, f"must be >= {minimum}, got {value}")
        return value

    def integer(self, value: Any, path: str, minimum: Optional[int] = None) -> int:
        if isinstance(value, bool) or not isinstance(value, int):
            self.fail(path, f"expected an integer, got {value!r}")
        if minimum is not None and value < minimum:
            self.fail(path, f"must be >= {minimum}, got {value}")
        return value

    def boolean(self, value: Any, path: str) -> bool:
        if not isinstance(value, bool):
            self.fail(path, f"expected true or false, got {value!r}")
        return value

    def choice(self, value: Any, path: str, options: Sequence[str]) -> str:
        if value not in options:
            self.fail(path, f"expected one of {', '.join(options)}, got {value!r}")
        return value

    def int_list(self, value: Any, path: str, length: int) -> Tuple[int, ...]:
        if not isinstance(value, list) or len(value) != length:
            self.fail(path, f"expected a list of {length} integers")
        return tuple(self.integer(v, f"{path}.{i}", 0) for i, v in enumerate(value))


def _parse_eps(r: _Reader, value: Any, path: str):
    model = r.mapping(value, path, ('model', 'value', 'omega_p', 'gamma'), ('model',))
    kind = r.choice(model['model'], f"{path}.model", ('constant', 'plasma', 'drude'))
    allowed = {'constant': ('model', 'value'), 'plasma': ('model', 'omega_p'),
               'drude': ('model', 'omega_p', 'gamma')}[kind]
    r.mapping(model, path, allowed, allowed)
    try:
        if kind == 'constant':
            return Constant(r.number(model['value'], f"{path}.value"))
        if kind == 'plasma':
            return Plasma(r.number(model['omega_p'], f"{path}.omega_p"))
        return Drude(r.number(model['omega_p'], f"{path}.omega_p"),
                     r.number(model['gamma'], f"{path}.gamma"))
    except DomainError as exc:
        r.fail(path, str(exc))


def _parse_region(r: _Reader, value: Any, path: str, boundary: bool) -> Region:
    entry = r.mapping(value, path, ('material', 'width', 'eps', 'b'), ('material',))
    kind = r.choice(entry['material'], f"{path}.material",
                    ('vacuum', 'perfect_conductor', 'dielectric', 'weyl'))
    extra = {'dielectric': ('eps',), 'weyl': ('b',)}.get(kind, ())
    r.mapping(entry, path, ('material', 'width') + extra, ('material',) + extra)
    material: Material
    if kind == 'dielectric':
        material = Dielectric(_parse_eps(r, entry['eps'], f"{path}.eps"))
    elif kind == 'weyl':
        material = Weyl(r.number(entry['b'], f"{path}.b"))
    elif kind == 'perfect_conductor':
        material = PerfectConductor()
    else:
        material = Vacuum()
    width = entry.get('width', 'infinite' if boundary else None)
    if boundary:
        if width != 'infinite':
            r.fail(f"{path}.width", "boundary regions are semi-infinite; use 'infinite' or omit")
        return Region(material, math.inf)
    if width is None:
        r.fail(f"{path}.width", "required field missing")
    return Region(material, r.number(width, f"{path}.width", minimum=0.0))


def _parse_stack(r: _Reader, value: Any) -> LayerStack:
    if not isinstance(value, list) or len(value) < 2:
        r.fail('stack', "expected a list of at least two regions")
    last = len(value) - 1
    regions = [_parse_region(r, v, f"stack.{i}", i in (0, last)) for i, v in enumerate(value)]
    try:
        return LayerStack(tuple(regions))
    except (StackError, UnsupportedPairingError) as exc:
        r.fail('stack', str(exc))


def _parse_targets(r: _Reader, value: Any, observable: str, stack: LayerStack) -> TargetSpec:
    raw = r.mapping(value, 'targets', ('gap', 'triple', 'body', 'split'))
    needed = {'force': 'gap', 'work': 'triple', 'body-force': 'body'}.get(observable)
    if needed and needed not in raw:
        r.fail(f"targets.{needed}", f"required for observable {observable}")
    spec = TargetSpec(
        gap=r.integer(raw['gap'], 'targets.gap') if 'gap' in raw else None,
        triple=r.int_list(raw['triple'], 'targets.triple', 3) if 'triple' in raw else None,
        body=r.int_list(raw['body'], 'targets.body', 2) if 'body' in raw else None,
        split=r.integer(raw['split'], 'targets.split') if 'split' in raw else None,
    )
    try:
        for name in ('gap', 'split'):
            if getattr(spec, name) is not None:
                stack.check_interior(getattr(spec, name))
        if spec.body is not None:
            for j in spec.body:
                stack.check_interior(j)
            if spec.body[0] == spec.body[1]:
                raise StackError("body gaps must differ")
        if spec.triple is not None:
            ordered_triple(stack, spec.triple)
    except StackError as exc:
        r.fail('targets', str(exc))
    return spec


def _parse_quadrature(r: _Reader, value: Any) -> QuadratureSpec:
    raw = r.mapping(value, 'quadrature', ('tolerance', 'max_evaluations', 'richardson',
                                          'threads', 'max_terms', 'scale'))
    scale = raw.get('scale')
    try:
        return QuadratureSpec(
            tolerance=r.number(raw.get('tolerance', DEFAULT_TOLERANCE), 'quadrature.tolerance'),
            max_evaluations=r.integer(raw.get('max_evaluations', MAX_EVALUATIONS),
                                      'quadrature.max_evaluations', 1),
            richardson=r.boolean(raw.get('richardson', False), 'quadrature.richardson'),
            threads=r.integer(raw.get('threads', DEFAULT_THREADS), 'quadrature.threads', 1),
            max_terms=r.integer(raw.get('max_terms', MAX_MATSUBARA_TERMS),
                                'quadrature.max_terms', 1),
            scale=None if scale is None else r.number(scale, 'quadrature.scale', positive=True),
        )
    except DomainError as exc:
        r.fail('quadrature', str(exc))


def _lookup(data: Any, parts: Sequence[str]) -> Any:
    for part in parts:
        data = data[int(part)] if isinstance(data, list) else data[part]
    return data


def _assign(data: Dict[str, Any], path: str, value: Any):
    parts = path.split('.')
    node: Any = data
    for part in parts[:-1]:
        if isinstance(node, list):
            node = node[int(part)]
        else:
            if node.get(part) is None:
                node[part] = {}
            node = node[part]
    if isinstance(node, list):
        node[int(parts[-1])] = value
    else:
        node[parts[-1]] = value


def _parse_sweep(r: _Reader, value: Any, data: Dict[str, Any]) -> Optional[SweepSpec]:
    if value is None:
        return None
    raw = r.mapping(value, 'sweep', ('parameter', 'values'), ('parameter', 'values'))
    parameter = raw['parameter']
    if not isinstance(parameter, str) or parameter.split('.')[0] not in ('stack', 'thermal'):
        r.fail('sweep.parameter', "expected a dotted path under stack or thermal")
    try:
        current = _lookup(data, parameter.split('.'))
    except (KeyError, IndexError, ValueError, TypeError):
        r.fail('sweep.parameter', f"{parameter} does not name a field of this config")
    if isinstance(current, bool) or not isinstance(current, (int, float)):
        r.fail('sweep.parameter', f"{parameter} is not a numeric field")
    if not isinstance(raw['values'], list):
        r.fail('sweep.values', "expected a list of numbers")
    strictly_positive = parameter.endswith(('width', 'temperature'))
    values = tuple(r.number(v, f"sweep.values.{i}", positive=strictly_positive)
                   for i, v in enumerate(raw['values']))
    return SweepSpec(parameter, values)


def _build(data: Any, r: _Reader) -> RunConfig:
    top = r.mapping(data, '', ('schema_version', 'observable', 'basis', 'length_unit_nm',
                               'stack', 'targets', 'thermal', 'quadrature', 'sweep',
                               'far_boundary', 'identity_check', 'output'),
                    ('schema_version', 'observable', 'stack'))
    version = r.integer(top['schema_version'], 'schema_version')
    if version != SCHEMA_VERSION:
        r.fail('schema_version', f"unsupported schema version {version}; expected {SCHEMA_VERSION}")
    observable = r.choice(top['observable'], 'observable', OBSERVABLES)
    basis = Basis(r.choice(top.get('basis', 'tmte'), 'basis', [b.value for b in Basis]))
    stack = _parse_stack(r, top['stack'])
    thermal_raw = r.mapping(top.get('thermal'), 'thermal', ('temperature',))
    thermal = ThermalSpec(r.number(thermal_raw.get('temperature', 0.0), 'thermal.temperature',
                                   minimum=0.0))
    ident = r.mapping(top.get('identity_check'), 'identity_check', ('samples', 'seed'))
    out = r.mapping(top.get('output'), 'output', ('path', 'format', 'timing', 'si_units'))
    path = out.get('path', '-')
    if not isinstance(path, str) or not path:
        r.fail('output.path', "expected a file path or '-'")
    config = RunConfig(
        observable=observable,
        stack=stack,
        schema_version=version,
        basis=basis,
        length_unit_nm=r.number(top.get('length_unit_nm', 1.0), 'length_unit_nm', positive=True),
        targets=_parse_targets(r, top.get('targets'), observable, stack),
        thermal=thermal,
        quadrature=_parse_quadrature(r, top.get('quadrature')),
        far_boundary=r.boolean(top.get('far_boundary', False), 'far_boundary'),
        identity_check=IdentityCheckSpec(
            samples=r.integer(ident.get('samples', 100), 'identity_check.samples', 1),
            seed=r.integer(ident.get('seed', 0), 'identity_check.seed', 0),
        ),
        output=OutputSpec(
            path=path,
            format=r.choice(out.get('format', 'csv'), 'output.format', tuple(FORMATS)),
            timing=r.boolean(out.get('timing', False), 'output.timing'),
            si_units=r.boolean(out.get('si_units', False), 'output.si_units'),
        ),
    )
    sweep = _parse_sweep(r, top.get('sweep'), config.to_dict())
    if sweep is not None:
        config = replace(config, sweep=sweep)
        for idx, value in enumerate(config.sweep.values):
            try:
                sweep_point(config, value)
            except ConfigError as exc:
                r.fail(f"sweep.values.{idx}", exc.reason)
    return config


def parse_config(text: str, overrides: Optional[Dict[str, Any]] = None) -> RunConfig:
    """
    Validated RunConfig from a YAML document. `overrides` maps dotted paths to
    values applied before validation (command-line flags).
    """
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, 'problem_mark', None)
        raise ConfigError(f"YAML parse error: {getattr(exc, 'problem', exc)}", '',
                          None if mark is None else mark.line + 1) from exc
    lines: Dict[str, int] = {}
    if node is not None:
        _line_index(node, '', lines)
    if overrides and isinstance(data, dict):
        for key, value in overrides.items():
            _assign(data, key, value)
    return _build(data, _Reader(lines))


def sweep_point(config: RunConfig, value: float) -> RunConfig:
    """The config with the swept parameter set to `value` and no sweep."""
    data = config.to_dict()
    data.pop('sweep', None)
    _assign(data, config.sweep.parameter, value)
    return _build(data, _Reader({}))


# ============================================================================
# Running
# ============================================================================

def exit_code(exc: BaseException) -> int:
    if isinstance(exc, (ConfigError, UnsupportedPairingError, StackError, DomainError)):
        return 2
    if isinstance(exc, ConvergenceError):
        return 3
    return 4


def _fmt(value: float) -> str:
    return repr(float(value))


def _evaluate(config: RunConfig) -> ObservableResult:
    stack, thermal, quad = config.stack, config.thermal, config.quadrature
    targets = config.targets
    if config.observable == 'energy':
        return casimir_energy(stack, thermal, quad, config.basis, targets.split,
                              config.far_boundary)
    if config.observable == 'work':
        return work(stack, targets.triple, thermal, quad, config.basis, config.far_boundary)
    if config.observable == 'body-force':
        return force_on_body(stack, targets.body, thermal, quad, config.basis,
                             config.far_boundary)
    return force_general(ForceQuery(stack, targets.gap, thermal, quad, config.basis,
                                    config.far_boundary))


def _si_value(config: RunConfig, value: float) -> float:
    factor, power = SI_FACTORS[config.observable]
    return value * factor / config.length_unit_nm ** power


def _result_rows(config: RunConfig, label: str) -> Tuple[List[Dict[str, str]], int]:
    started = time.perf_counter()
    row = {'sweep_value': label}
    code = 0
    result: Optional[ObservableResult] = None
    try:
        result = _evaluate(config)
        status = 'flagged' if result.flagged else 'ok'
    except ConvergenceError as exc:
        result, status, code = exc.partial, 'not_converged', 3
    except CasimirError as exc:
        log_error('sweep_point_failed', sweep_value=label, error=str(exc))
        status, code = 'error', exit_code(exc)
    if result is not None:
        row.update(value=_fmt(result.value), error_estimate=_fmt(result.error_estimate),
                   matsubara_terms=str(result.terms), evaluations=str(result.evaluations))
        if config.output.si_units:
            row['value_si'] = _fmt(_si_value(config, result.value))
    else:
        row.update({c: '' for c in RESULT_COLUMNS[1:]})
        if config.output.si_units:
            row['value_si'] = ''
    if config.output.timing:
        row['wall_time_s'] = f"{time.perf_counter() - started:.6f}"
    row['status'] = status
    return [row], code


def _identity_rows(config: RunConfig, label: str) -> Tuple[List[Dict[str, str]], int]:
    try:
        residuals = identity_residuals(config.stack, config.identity_check.samples,
                                       config.identity_check.seed, config.basis)
    except CasimirError as exc:
        log_error('identity_check_failed', sweep_value=label, error=str(exc))
        return [{'sweep_value': label, 'identity': '', 'max_residual': '', 'threshold': '',
                 'samples': '', 'status': 'error'}], exit_code(exc)
    rows = [{'sweep_value': label, 'identity': r.identity, 'max_residual': _fmt(r.max_residual),
             'threshold': _fmt(r.threshold), 'samples': str(r.samples),
             'status': 'pass' if r.passed else 'fail'} for r in residuals]
    return rows, 0 if all(r.passed for r in residuals) else 4


def columns(config: RunConfig) -> List[str]:
    if config.observable == 'identity-check':
        return list(IDENTITY_COLUMNS)
    cols = list(RESULT_COLUMNS)
    if config.output.timing:
        cols.append('wall_time_s')
    cols.append('status')
    if config.output.si_units:
        cols.append('value_si')
    return cols


def _header(config: RunConfig) -> List[str]:
    digest = hashlib.sha256(dump_config(config).encode('utf-8')).hexdigest()
    return [
        f"# casimir-multilayer {VERSION}",
        f"# schema_version: {config.schema_version}",
        f"# config_sha256: {digest}",
        f"# observable: {config.observable}",
    ]


def _points(config: RunConfig) -> List[Tuple[str, RunConfig]]:
    if config.sweep is None:
        return [('', config)]
    return [(_fmt(v), sweep_point(config, v)) for v in config.sweep.values]


def run(config: RunConfig, stream: Optional[TextIO] = None) -> int:
    """Evaluate every sweep point and write the table; returns the exit status."""
    points = _points(config)
    log_info('run_start', observable=config.observable, points=len(points),
             threads=config.quadrature.threads)
    workers = config.quadrature.threads if len(points) > 1 else 1
    if workers > 1:
        # the sweep pool owns the threads; each point integrates serially
        points = [(label, replace(c, quadrature=replace(c.quadrature, threads=1)))
                  for label, c in points]
    task = _identity_rows if config.observable == 'identity-check' else _result_rows
    with ThreadPoolExecutor(max_workers=workers) as pool:
        outcomes = list(pool.map(lambda p: task(p[1], p[0]), points))

    buffer = io.StringIO()
    buffer.write('\n'.join(_header(config)) + '\n')
    writer = csv.DictWriter(buffer, fieldnames=columns(config),
                            delimiter=FORMATS[config.output.format], lineterminator='\n')
    writer.writeheader()
    status = 0
    for rows, code in outcomes:
        writer.writerows(rows)
        status = max(status, code)
    if stream is not None:
        stream.write(buffer.getvalue())
    elif config.output.path == '-':
        sys.stdout.write(buffer.getvalue())
    else:
        Path(config.output.path).write_text(buffer.getvalue())
    summary = {rows[0]['sweep_value'] or 'single': rows[-1]['status'] for rows, _ in outcomes}
    if status:
        log_warn('run_complete', status=status, summary=summary)
    else:
        log_info('run_complete', status=status, summary=summary)
    return status


def _overrides(args: argparse.Namespace) -> Dict[str, Any]:
    out: Dict[str, Any] = {}
    if args.observable:
        out['observable'] = args.observable
    if args.threads is not None:
        out['quadrature.threads'] = args.threads
    if args.tolerance is not None:
        out['quadrature.tolerance'] = args.tolerance
    if args.output:
        out['output.path'] = args.output
    if args.format:
        out['output.format'] = args.format
    if args.si_units:
        out['output.si_units'] = True
    return out


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        description="Casimir energy and force for plane-parallel multilayer stacks"
    )
    parser.add_argument('config', help='YAML run configuration')
    parser.add_argument('--observable', choices=OBSERVABLES, help='Override the observable')
    parser.add_argument('--threads', type=int, help='Worker threads (default: from config)')
    parser.add_argument('--tolerance', type=float, help='Relative quadrature tolerance')
    parser.add_argument('--output', help="Output path, '-' for stdout")
    parser.add_argument('--format', choices=tuple(FORMATS), help='Table delimiter')
    parser.add_argument('--si-units', action='store_true',
                        help='Add a value_si column (J/m^2 or Pa)')
    parser.add_argument('--log-level', default='WARN',
                        choices=('DEBUG', 'INFO', 'WARN', 'ERROR', 'OFF'),
                        help='Minimum level of the JSON log lines on stderr (default: WARN)')
    args = parser.parse_args(argv)
    set_level(args.log_level)

    try:
        text = Path(args.config).read_text()
    except OSError as exc:
        log_error('config_unreadable', path=args.config, error=str(exc))
        return 2
    try:
        config = parse_config(text, _overrides(args))
    except CasimirError as exc:
        log_error('config_invalid', path=args.config, error=str(exc))
        return exit_code(exc)
    return run(config)


if __name__ == '__main__':
    sys.exit(main())
