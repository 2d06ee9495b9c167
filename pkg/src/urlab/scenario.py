"""Scenario configs: TOML (or JSON) tables resolved into states, observables and relation requests.

Complex numbers are written as ``[re, im]`` pairs. A minimal scenario::

    seed = 1
    [basis]
    kind = "fock"
    N = 30

    [states.vac]
    kind = "fock"
    n = 0

    [observables]
    p = {op = "p"}
    q = {op = "q"}

    [[relations]]
    name = "schrodinger_two"
    observables = ["p", "q"]
    states = ["vac"]
    expect = "saturated"
"""

from __future__ import annotations

import copy
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from urlab import hilbert
from urlab.hilbert import BasisSpec, Operator, QuantumState
from urlab.relations import CATALOG
from urlab.transforms import LinearMap, apply_linear, random_maps, rotation2, scale_map
from urlab.verdict import NUMERICAL_FLOOR, SATURATION_TOL

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


class ConfigError(ValueError):
    """Invalid or inconsistent scenario configuration."""


def load_config(source) -> dict:
    """Read a scenario from a path or pass through a dict.

    A JSON report produced by ``urlab eval`` is accepted too; its embedded
    config is returned so the run can be replayed.
    """
    if isinstance(source, dict):
        return copy.deepcopy(source)
    path = Path(source)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        if path.suffix == ".json":
            data = json.loads(text)
            return data["config"] if "config" in data and "verdicts" in data else data
        return tomllib.loads(text)
    except (ValueError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc


def apply_overrides(cfg: dict, tol_sat: float | None = None, floor: float | None = None) -> dict:
    cfg = copy.deepcopy(cfg)
    env = os.environ.get("URLAB_SEED")
    if env is not None:
        try:
            cfg["seed"] = int(env)
        except ValueError as exc:
            raise ConfigError(f"URLAB_SEED must be an integer, got {env!r}") from exc
    tols = cfg.setdefault("tolerances", {})
    if tol_sat is not None:
        tols["saturation"] = tol_sat
    if floor is not None:
        tols["floor"] = floor
    return cfg


def set_dotted(cfg: dict, path: str, value) -> None:
    """Assign ``value`` at a dotted path such as ``states.sq.r``."""
    keys = path.split(".")
    node = cfg
    for k in keys[:-1]:
        if k not in node or not isinstance(node[k], dict):
            raise ConfigError(f"sweep parameter {path!r} does not resolve")
        node = node[k]
    node[keys[-1]] = value


def to_complex(x) -> complex:
    if isinstance(x, (int, float)):
        return complex(x)
    if isinstance(x, (list, tuple)) and len(x) == 2 and all(isinstance(v, (int, float)) for v in x):
        return complex(x[0], x[1])
    raise ConfigError(f"cannot read {x!r} as a complex number")


def to_complex_array(x) -> np.ndarray:
    try:
        a = np.asarray(x, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"malformed complex array: {exc}") from exc
    if a.shape[-1:] != (2,):
        raise ConfigError("complex arrays are nested lists of [re, im] pairs")
    return a[..., 0] + 1j * a[..., 1]


@dataclass(frozen=True)
class Tolerances:
    saturation: float = SATURATION_TOL
    floor: float = NUMERICAL_FLOOR
    tail: float = hilbert.TAIL_TOL


def parse_basis(table: dict | None) -> BasisSpec:
    if not table:
        raise ConfigError("no basis declared")
    kind = table.get("kind")
    try:
        if kind == "fock":
            return hilbert.fock_basis(int(table["N"]), int(table.get("modes", 1)))
        if kind == "spin":
            return hilbert.spin_basis(table["j"])
        if kind == "su11":
            return hilbert.su11_basis(float(table["k"]), int(table["N"]))
        if kind == "generic":
            return hilbert.generic_basis(int(table["dim"]))
    except KeyError as exc:
        raise ConfigError(f"basis {kind!r} is missing {exc}") from exc
    except hilbert.BasisError as exc:
        raise ConfigError(str(exc)) from exc
    raise ConfigError(f"unknown basis kind {kind!r}")


@dataclass
class Scenario:
    config: dict
    seed: int
    tolerances: Tolerances
    states: dict[str, QuantumState] = field(default_factory=dict)
    observables: dict[str, Operator] = field(default_factory=dict)
    relations: list[dict] = field(default_factory=list)


def _zeta(table: dict) -> complex:
    if "zeta" in table:
        return to_complex(table["zeta"])
    return float(table.get("r", 0.0)) * np.exp(1j * float(table.get("phase", 0.0)))


def build_state(name: str, table: dict, basis: BasisSpec, rng, tail: float) -> QuantumState:
    kind = table.get("kind")
    N = basis.N
    if kind == "fock":
        n = table.get("n", 0)
        s = hilbert.fock_state(n, N) if basis.modes == 1 or not np.isscalar(n) else \
            hilbert.fock_state([n] * basis.modes, N)
    elif kind == "coherent":
        alpha = [to_complex(a) for a in table["alphas"]] if "alphas" in table else to_complex(table.get("alpha", 0))
        s = hilbert.coherent_state(alpha, N, tail)
    elif kind == "squeezed":
        if "alphas" in table or "rs" in table or "zetas" in table:
            modes = basis.modes
            alphas = [to_complex(a) for a in table.get("alphas", [0] * modes)]
            zetas = [to_complex(z) for z in table["zetas"]] if "zetas" in table else \
                [float(r) for r in table.get("rs", [0.0] * modes)]
            s = hilbert.squeezed_state(alphas, zetas, N, tail)
        else:
            s = hilbert.squeezed_state(to_complex(table.get("alpha", 0)), _zeta(table), N, tail)
    elif kind == "gaussian":
        s = hilbert.gaussian_state(to_complex(table.get("alpha", 0)), _zeta(table),
                                   float(table.get("nbar", 0.0)), N, tail)
    elif kind == "spin_coherent":
        if basis.kind != "spin":
            raise ConfigError(f"state {name}: spin_coherent needs a spin basis")
        s = hilbert.spin_coherent_state(basis.j, float(table.get("theta", 0.0)), float(table.get("phi", 0.0)))
    elif kind == "basis":
        s = hilbert.basis_state(basis, int(table.get("index", 0)))
    elif kind == "random":
        s = hilbert.random_state(basis, rng, table.get("form", "pure"), table.get("rank"), table.get("levels"))
    elif kind == "amplitudes":
        s = QuantumState(basis, to_complex_array(table["values"]))
    elif kind == "density":
        s = QuantumState(basis, rho=to_complex_array(table["values"]))
    else:
        raise ConfigError(f"state {name}: unknown kind {kind!r}")
    return QuantumState(s.basis, s.vector, s.rho, label=name)


def build_observable(name: str, table: dict, basis: BasisSpec, rng) -> Operator:
    if "matrix" in table:
        M = to_complex_array(table["matrix"])
        return Operator(basis, M, bool(table.get("hermitian", True)), name)
    op = table.get("op")
    mode = int(table.get("mode", 0))
    if op in ("p", "q"):
        if basis.kind != "fock":
            raise ConfigError(f"observable {name}: {op} needs a Fock basis")
        ops = hilbert.fock_operators(basis.N, basis.modes)
        X = (ops.p if op == "p" else ops.q)[mode]
    elif op in ("J1", "J2", "J3"):
        if basis.kind != "spin":
            raise ConfigError(f"observable {name}: {op} needs a spin basis")
        X = hilbert.spin_operators(basis.j)[int(op[1]) - 1]
    elif op in ("K1", "K2", "K3"):
        if basis.kind != "su11":
            raise ConfigError(f"observable {name}: {op} needs an su11 basis")
        X = hilbert.su11_operators(basis.k, basis.N)[int(op[1]) - 1]
    elif op == "random_hermitian":
        X = hilbert.random_hermitian(basis, rng)
    else:
        raise ConfigError(f"observable {name}: unknown op {op!r}")
    return Operator(basis, X.matrix, X.hermitian, name)


def build_map(name: str, table: dict, n: int, rng) -> LinearMap:
    kind = table.get("kind")
    if kind == "rotation":
        return rotation2(float(table.get("theta", 0.0)))
    if kind == "scale":
        return scale_map([float(a) for a in table["alphas"]], n)
    if kind == "matrix":
        return LinearMap(np.asarray(table["lam"], dtype=float))
    if kind in ("gl", "orthogonal", "symplectic"):
        return random_maps(kind, n, rng)
    raise ConfigError(f"transform {name}: unknown kind {kind!r}")


def build_scenario(cfg: dict) -> Scenario:
    """Resolve every state, observable and transform; raises :class:`ConfigError` on any problem."""
    try:
        return _build(cfg)
    except ConfigError:
        raise
    except (hilbert.StateError, hilbert.BasisError, ValueError, KeyError, TypeError) as exc:
        raise ConfigError(f"{type(exc).__name__}: {exc}") from exc


def _build(cfg: dict) -> Scenario:
    if "seed" not in cfg:
        raise ConfigError("scenario needs a seed")
    seed = int(cfg["seed"])
    t = cfg.get("tolerances", {})
    tols = Tolerances(float(t.get("saturation", SATURATION_TOL)), float(t.get("floor", NUMERICAL_FLOOR)),
                      float(t.get("tail", hilbert.TAIL_TOL)))
    if min(tols.saturation, tols.floor, tols.tail) <= 0:
        raise ConfigError("tolerances must be positive")
    rng = np.random.default_rng(seed)
    default_basis = parse_basis(cfg["basis"]) if "basis" in cfg else None
    sc = Scenario(cfg, seed, tols)

    def basis_for(table):
        b = parse_basis(table["basis"]) if "basis" in table else default_basis
        if b is None:
            raise ConfigError("no basis declared")
        return b

    for name, table in cfg.get("states", {}).items():
        sc.states[name] = build_state(name, table, basis_for(table), rng, tols.tail)
    for name, table in cfg.get("observables", {}).items():
        sc.observables[name] = build_observable(name, table, basis_for(table), rng)
    for name, table in cfg.get("transforms", {}).items():
        source = table.get("source", [])
        missing = [s for s in source if s not in sc.observables]
        if missing:
            raise ConfigError(f"transform {name}: unknown observables {missing}")
        lmap = build_map(name, table, len(source), rng)
        names = table.get("names") or [f"{s}_{name}" for s in source]
        for new, op in zip(names, apply_linear(lmap, [sc.observables[s] for s in source])):
            sc.observables[new] = Operator(op.basis, op.matrix, op.hermitian, new)
    for i, rel in enumerate(cfg.get("relations", [])):
        if rel.get("name") not in CATALOG:
            raise ConfigError(f"relation #{i}: unknown name {rel.get('name')!r}")
        for s in rel.get("states", []):
            if s not in sc.states:
                raise ConfigError(f"relation #{i}: unknown state {s!r}")
        for o in rel.get("observables", []):
            if o not in sc.observables:
                raise ConfigError(f"relation #{i}: unknown observable {o!r}")
        if not rel.get("states"):
            raise ConfigError(f"relation #{i}: no states given")
        if rel.get("expect", "holds") not in ("holds", "saturated"):
            raise ConfigError(f"relation #{i}: expect must be 'holds' or 'saturated'")
        sc.relations.append(rel)
    return sc
