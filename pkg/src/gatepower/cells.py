"""Low-power cell library: data model, built-in reference data, JSON file format.

A :class:`Library` bundles a :class:`~gatepower.devices.TechnologyModel`, the
reference operating point the cells were characterized at, a process-corner
table, and the cells themselves. Each :class:`Cell` exists in a
``conventional`` and (optionally) a ``stacked`` variant trading leakage
against delay and area.

The built-in library holds the characterization data this package ships
with: four logic cells (NOT, NAND, FULLADDER, MUX1), measured at 1.2 V, in
both variants. A 10 fF loaded measurement record accompanies the
conventional cells; the per-fF delay slope of each cell is derived from the
unloaded/loaded delay difference over that load.
"""

from __future__ import annotations

import ast
import json
import warnings
from dataclasses import dataclass, field, replace

from .devices import (
    OperatingPoint,
    TechnologyModel,
    alpha_power_delay_term,
    subthreshold_current,
)
from .errors import GatepowerError

CONVENTIONAL = "conventional"
STACKED = "stacked"
VARIANTS = (CONVENTIONAL, STACKED)


class LibraryError(GatepowerError):
    """Raised when a library document fails parsing, schema, or invariants."""

    def __init__(self, violations: list[str]):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class LibraryWarning(UserWarning):
    """Non-fatal library file issue (lenient mode only)."""


# ---------------------------------------------------------------------------
# Boolean functions
#
# Cell logic is stored as expression strings over input pin names using
# ~ (not), & (and), | (or), ^ (xor) and parentheses, e.g. "~(a & b)".
# ---------------------------------------------------------------------------

_ALLOWED_BINOPS = (ast.BitAnd, ast.BitOr, ast.BitXor)
_EXPR_CACHE: dict[str, ast.expr] = {}


def _parse_expression(text: str) -> ast.expr:
    tree = _EXPR_CACHE.get(text)
    if tree is not None:
        return tree
    try:
        tree = ast.parse(text, mode="eval").body
    except SyntaxError as exc:
        raise ValueError(f"invalid boolean expression {text!r}: {exc.msg}") from None
    for node in ast.walk(tree):
        if isinstance(node, ast.BinOp) and isinstance(node.op, _ALLOWED_BINOPS):
            continue
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.Invert):
            continue
        if isinstance(node, (ast.Name, *_ALLOWED_BINOPS, ast.Invert, ast.Load)):
            continue
        raise ValueError(
            f"invalid boolean expression {text!r}: only pin names and ~ & | ^ are allowed"
        )
    _EXPR_CACHE[text] = tree
    return tree


def expression_names(text: str) -> set[str]:
    """Pin names referenced by a boolean expression string."""
    tree = _parse_expression(text)
    return {n.id for n in ast.walk(tree) if isinstance(n, ast.Name)}


def evaluate_expression(text: str, env):
    """Evaluate a boolean expression over an env of 0/1 values.

    Works elementwise when the env maps pins to numpy integer arrays, which
    the exhaustive activity oracle relies on.
    """

    def ev(node):
        if isinstance(node, ast.Name):
            return env[node.id]
        if isinstance(node, ast.UnaryOp):
            return ev(node.operand) ^ 1
        left, right = ev(node.left), ev(node.right)
        if isinstance(node.op, ast.BitAnd):
            return left & right
        if isinstance(node.op, ast.BitOr):
            return left | right
        return left ^ right

    return ev(_parse_expression(text))


# ---------------------------------------------------------------------------
# Data model
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CornerSpec:
    """One process corner: a fractional vth0 shift and a delay derate.

    Attributes:
        name: Corner label (TT, FF, SS, FS, SF).
        vth_shift_frac: Signed fractional shift applied to vth0; negative
            means faster, leakier devices.
        delay_derate: Multiplicative factor on intrinsic delays.
    """

    name: str
    vth_shift_frac: float = 0.0
    delay_derate: float = 1.0

    def __post_init__(self):
        if abs(self.vth_shift_frac) > 0.3:
            raise ValueError(f"|vth_shift_frac| must be <= 0.3, got {self.vth_shift_frac}")
        if self.delay_derate <= 0:
            raise ValueError(f"delay_derate must be > 0, got {self.delay_derate}")
        if self.name == "TT" and (self.vth_shift_frac != 0.0 or self.delay_derate != 1.0):
            raise ValueError("TT corner must have zero vth shift and derate 1.0")


def default_corners() -> dict[str, CornerSpec]:
    """The standard five-corner table used when a library file omits one."""
    specs = [
        CornerSpec("TT", 0.0, 1.0),
        CornerSpec("FF", -0.10, 0.9),
        CornerSpec("SS", +0.10, 1.1),
        CornerSpec("FS", -0.05, 1.0),
        CornerSpec("SF", +0.05, 1.0),
    ]
    return {c.name: c for c in specs}


CORNER_NAMES = tuple(default_corners())


@dataclass(frozen=True)
class LoadMeasurement:
    """Alternate measurement of a cell driving a known output load.

    Kept as metadata next to the unloaded characterization; the delay
    difference over ``load_ff`` is where the cell's load coefficient comes
    from.
    """

    load_ff: float
    area_um2: float
    delay_ns: dict[str, float]
    leakage_nw: float
    dynamic_pw: float


@dataclass(frozen=True)
class Cell:
    """One library cell variant.

    Attributes:
        name: Cell type name (NOT, NAND, FULLADDER, MUX1, ...).
        variant: "conventional" or "stacked".
        inputs / outputs: Ordered pin names.
        functions: Output pin -> boolean expression over input pins.
        area_um2: Layout area.
        input_cap_ff: Input pin -> gate capacitance, fF.
        intrinsic_delay_ns: Output pin -> unloaded 50% propagation delay at
            the library reference point.
        load_coeff_ns_per_ff: Extra delay per fF of load on the driven net.
        leakage_nw: Standby leakage power at the reference point.
        ref_dynamic_pw: Informational measured dynamic power, pW.
        load_measurement: Optional loaded measurement record.
    """

    name: str
    variant: str
    inputs: tuple[str, ...]
    outputs: tuple[str, ...]
    functions: dict[str, str]
    area_um2: float
    input_cap_ff: dict[str, float]
    intrinsic_delay_ns: dict[str, float]
    load_coeff_ns_per_ff: float
    leakage_nw: float
    ref_dynamic_pw: float | None = None
    load_measurement: LoadMeasurement | None = None

    @property
    def key(self) -> tuple[str, str]:
        return (self.name, self.variant)

    def total_input_cap_ff(self) -> float:
        return sum(self.input_cap_ff.values())


def cell_violations(cell: Cell) -> list[str]:
    """Invariant violations of a single cell, as human-readable strings."""
    where = f"cell ({cell.name}, {cell.variant})"
    out: list[str] = []
    if cell.variant not in VARIANTS:
        out.append(f"{where}: variant must be one of {VARIANTS}")
    if not cell.area_um2 > 0:
        out.append(f"{where}: area_um2 > 0 violated (got {cell.area_um2})")
    if not cell.leakage_nw >= 0:
        out.append(f"{where}: leakage_nw >= 0 violated (got {cell.leakage_nw})")
    if not cell.load_coeff_ns_per_ff >= 0:
        out.append(f"{where}: load_coeff_ns_per_ff >= 0 violated")
    if len(set(cell.inputs)) != len(cell.inputs) or len(set(cell.outputs)) != len(cell.outputs):
        out.append(f"{where}: duplicate pin names")
    if set(cell.input_cap_ff) != set(cell.inputs):
        out.append(f"{where}: input_cap_ff must cover exactly the input pins")
    if set(cell.intrinsic_delay_ns) != set(cell.outputs):
        out.append(f"{where}: intrinsic_delay_ns must cover exactly the output pins")
    if set(cell.functions) != set(cell.outputs):
        out.append(f"{where}: every output pin needs exactly one function")
    for pin, cap in cell.input_cap_ff.items():
        if not cap >= 0:
            out.append(f"{where}: input_cap_ff[{pin}] >= 0 violated (got {cap})")
    for pin, delay in cell.intrinsic_delay_ns.items():
        if not delay > 0:
            out.append(f"{where}: intrinsic_delay_ns[{pin}] > 0 violated (got {delay})")
    for pin, expr in cell.functions.items():
        try:
            names = expression_names(expr)
        except ValueError as exc:
            out.append(f"{where}: function for {pin}: {exc}")
            continue
        extra = names - set(cell.inputs)
        if extra:
            out.append(
                f"{where}: function for {pin} references undeclared pins {sorted(extra)}"
            )
    return out


@dataclass(frozen=True)
class Library:
    """Immutable cell library bound to a technology and reference point."""

    technology: TechnologyModel
    ref_point: OperatingPoint
    cells: dict[tuple[str, str], Cell]
    corners: dict[str, CornerSpec] = field(default_factory=default_corners)

    def cell(self, name: str, variant: str = CONVENTIONAL) -> Cell:
        try:
            return self.cells[(name, variant)]
        except KeyError:
            raise KeyError(f"library has no cell ({name}, {variant})") from None

    def has_cell(self, name: str, variant: str) -> bool:
        return (name, variant) in self.cells

    def cell_names(self) -> list[str]:
        return sorted({name for name, _ in self.cells})

    def corner(self, name: str) -> CornerSpec:
        try:
            return self.corners[name]
        except KeyError:
            raise KeyError(
                f"unknown corner {name!r}; library defines {sorted(self.corners)}"
            ) from None


# ---------------------------------------------------------------------------
# Built-in reference library
# ---------------------------------------------------------------------------

# Load coefficients are (unloaded delay - 10 fF loaded delay) / 10 fF, the
# multi-output cell using the mean over its outputs. Input pin capacitance
# defaults to area_um2 * 1.0 fF/um^2 per pin (no measured caps exist).
_NOMINAL_MEASUREMENT_LOAD_FF = 10.0
_CAP_PER_AREA_FF_PER_UM2 = 1.0


def _cell(name, variant, inputs, outputs, functions, area, delays, load_coeff,
          leakage_nw, dynamic_pw, measurement=None):
    cap = area * _CAP_PER_AREA_FF_PER_UM2
    return Cell(
        name=name,
        variant=variant,
        inputs=tuple(inputs),
        outputs=tuple(outputs),
        functions=dict(functions),
        area_um2=area,
        input_cap_ff={pin: cap for pin in inputs},
        intrinsic_delay_ns=dict(delays),
        load_coeff_ns_per_ff=load_coeff,
        leakage_nw=leakage_nw,
        ref_dynamic_pw=dynamic_pw,
        load_measurement=measurement,
    )


def builtin_reference_library() -> Library:
    """The characterization data set bundled with this package.

    Conventional and stacked variants of NOT, NAND, FULLADDER and MUX1 at a
    1.2 V / 100 MHz / 300 K reference point. Values are stored verbatim from
    the source measurements; note two quirks of that data set, preserved
    deliberately:

    * the stacked variants report HIGHER leakage than conventional ones,
      while the analytic stack model predicts lower — use
      ``leakage_source="model"`` for the physics view;
    * delays are 50% propagation measurements that include a stimulus
      offset, so treat them as relative numbers.
    """
    technology = TechnologyModel(node_name="130nm-reference")
    ref_point = OperatingPoint(vdd=1.2, frequency=100e6, temperature_k=300.0)

    cells = [
        _cell(
            "NOT", CONVENTIONAL, ("a",), ("y",), {"y": "~a"},
            area=1.32, delays={"y": 30.327}, load_coeff=0.0454,
            leakage_nw=3.98, dynamic_pw=20.801,
            measurement=LoadMeasurement(
                load_ff=_NOMINAL_MEASUREMENT_LOAD_FF, area_um2=1.32,
                delay_ns={"y": 29.873}, leakage_nw=4.27, dynamic_pw=20.801),
        ),
        _cell(
            "NAND", CONVENTIONAL, ("a", "b"), ("y",), {"y": "~(a & b)"},
            area=3.322, delays={"y": 30.339}, load_coeff=0.0486,
            leakage_nw=5.00, dynamic_pw=33.782,
            measurement=LoadMeasurement(
                load_ff=_NOMINAL_MEASUREMENT_LOAD_FF, area_um2=3.322,
                delay_ns={"y": 29.853}, leakage_nw=5.87, dynamic_pw=33.782),
        ),
        _cell(
            "FULLADDER", CONVENTIONAL, ("a", "b", "cin"), ("s", "c"),
            {"s": "a ^ b ^ cin", "c": "(a & b) | (a & cin) | (b & cin)"},
            area=17.89, delays={"s": 30.456, "c": 30.768}, load_coeff=0.1898,
            leakage_nw=16.02, dynamic_pw=167.2793,
            measurement=LoadMeasurement(
                load_ff=_NOMINAL_MEASUREMENT_LOAD_FF, area_um2=20.85,
                delay_ns={"s": 28.762, "c": 28.666}, leakage_nw=21.91,
                dynamic_pw=167.2793),
        ),
        _cell(
            "MUX1", CONVENTIONAL, ("a", "b", "sel"), ("y",),
            {"y": "(a & ~sel) | (b & sel)"},
            area=3.97, delays={"y": 29.635}, load_coeff=0.1100,
            leakage_nw=3.15, dynamic_pw=40.943,
            measurement=LoadMeasurement(
                load_ff=_NOMINAL_MEASUREMENT_LOAD_FF, area_um2=4.93,
                delay_ns={"y": 28.535}, leakage_nw=5.28, dynamic_pw=40.943),
        ),
        _cell(
            "NOT", STACKED, ("a",), ("y",), {"y": "~a"},
            area=1.56, delays={"y": 32.873}, load_coeff=0.0454,
            leakage_nw=5.75, dynamic_pw=23.6805,
        ),
        _cell(
            "NAND", STACKED, ("a", "b"), ("y",), {"y": "~(a & b)"},
            area=3.584, delays={"y": 32.853}, load_coeff=0.0486,
            leakage_nw=6.79, dynamic_pw=37.456,
        ),
        _cell(
            "FULLADDER", STACKED, ("a", "b", "cin"), ("s", "c"),
            {"s": "a ^ b ^ cin", "c": "(a & b) | (a & cin) | (b & cin)"},
            area=21.98, delays={"s": 30.62, "c": 30.67}, load_coeff=0.1898,
            leakage_nw=23.08, dynamic_pw=176.880,
        ),
        _cell(
            "MUX1", STACKED, ("a", "b", "sel"), ("y",),
            {"y": "(a & ~sel) | (b & sel)"},
            area=5.64, delays={"y": 28.535}, load_coeff=0.1100,
            leakage_nw=6.99, dynamic_pw=45.894,
        ),
    ]
    return Library(
        technology=technology,
        ref_point=ref_point,
        cells={c.key: c for c in cells},
    )


# ---------------------------------------------------------------------------
# File format (JSON)
# ---------------------------------------------------------------------------

_TECHNOLOGY_KEYS = (
    "node_name", "vth0", "n_slope", "i0", "w_over_l", "eta_dibl",
    "alpha_sat", "tox_nm", "temperature_k",
)
_REF_POINT_KEYS = ("vdd", "frequency", "temperature_k")
_CORNER_KEYS = ("vth_shift_frac", "delay_derate")
_CELL_REQUIRED_KEYS = (
    "name", "variant", "inputs", "outputs", "functions", "area_um2",
    "input_cap_ff", "intrinsic_delay_ns", "load_coeff_ns_per_ff", "leakage_nw",
)
_CELL_OPTIONAL_KEYS = ("ref_dynamic_pw", "load_measurement")
_MEASUREMENT_KEYS = ("load_ff", "area_um2", "delay_ns", "leakage_nw", "dynamic_pw")


def _check_unknown(obj: dict, known, where: str, violations: list[str], strict: bool):
    for key in obj:
        if key not in known:
            msg = f"{where}: unknown key {key!r}"
            if strict:
                violations.append(msg)
            else:
                warnings.warn(msg, LibraryWarning, stacklevel=3)


def _number(obj, key, where, violations, default=None):
    if key not in obj:
        if default is not None:
            return default
        violations.append(f"{where}: missing key {key!r}")
        return 0.0
    value = obj[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        violations.append(f"{where}: {key} must be a number, got {value!r}")
        return 0.0
    return float(value)


def _str_map(obj, key, where, violations):
    value = obj.get(key)
    if not isinstance(value, dict):
        violations.append(f"{where}: {key} must be an object")
        return {}
    return value


def load_library(text: str, *, strict: bool = True) -> Library:
    """Parse and validate a library document.

    Raises :class:`LibraryError` carrying the full list of parse, schema and
    invariant violations. ``strict=False`` downgrades unknown keys to
    :class:`LibraryWarning`.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise LibraryError(
            [f"parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}"]
        ) from None

    violations: list[str] = []
    if not isinstance(doc, dict):
        raise LibraryError(["document root must be an object"])
    _check_unknown(doc, ("technology", "ref_point", "corners", "cells"),
                   "document", violations, strict)

    tech_obj = doc.get("technology")
    if not isinstance(tech_obj, dict):
        violations.append("missing or malformed 'technology' section")
        tech_obj = {}
    _check_unknown(tech_obj, _TECHNOLOGY_KEYS, "technology", violations, strict)
    node_name = tech_obj.get("node_name", "unnamed")
    if not isinstance(node_name, str):
        violations.append("technology: node_name must be a string")
        node_name = "unnamed"
    tech_numbers = {
        key: _number(tech_obj, key, "technology", violations)
        for key in _TECHNOLOGY_KEYS if key != "node_name"
    }
    technology = None
    if not violations:
        try:
            technology = TechnologyModel(node_name=node_name, **tech_numbers)
        except ValueError as exc:
            violations.append(f"technology: {exc}")

    ref_obj = doc.get("ref_point")
    if not isinstance(ref_obj, dict):
        violations.append("missing or malformed 'ref_point' section")
        ref_obj = {}
    _check_unknown(ref_obj, _REF_POINT_KEYS, "ref_point", violations, strict)
    ref_numbers = {k: _number(ref_obj, k, "ref_point", violations) for k in _REF_POINT_KEYS}
    ref_point = None
    if not violations:
        try:
            ref_point = OperatingPoint(**ref_numbers)
        except ValueError as exc:
            violations.append(f"ref_point: {exc}")

    corners = default_corners()
    if "corners" in doc:
        corners_obj = doc["corners"]
        if not isinstance(corners_obj, dict):
            violations.append("'corners' must be an object")
        elif set(corners_obj) != set(CORNER_NAMES):
            violations.append(
                f"'corners' must define exactly {list(CORNER_NAMES)}, got {sorted(corners_obj)}"
            )
        else:
            parsed = {}
            for name in CORNER_NAMES:
                spec_obj = corners_obj[name]
                where = f"corners.{name}"
                if not isinstance(spec_obj, dict):
                    violations.append(f"{where}: must be an object")
                    continue
                _check_unknown(spec_obj, _CORNER_KEYS, where, violations, strict)
                shift = _number(spec_obj, "vth_shift_frac", where, violations)
                derate = _number(spec_obj, "delay_derate", where, violations)
                try:
                    parsed[name] = CornerSpec(name, shift, derate)
                except ValueError as exc:
                    violations.append(f"{where}: {exc}")
            if len(parsed) == len(CORNER_NAMES):
                corners = parsed

    cells_obj = doc.get("cells")
    if not isinstance(cells_obj, list):
        violations.append("missing or malformed 'cells' list")
        cells_obj = []

    cells: dict[tuple[str, str], Cell] = {}
    for index, cell_obj in enumerate(cells_obj):
        where = f"cells[{index}]"
        if not isinstance(cell_obj, dict):
            violations.append(f"{where}: must be an object")
            continue
        _check_unknown(cell_obj, _CELL_REQUIRED_KEYS + _CELL_OPTIONAL_KEYS,
                       where, violations, strict)
        missing = [k for k in _CELL_REQUIRED_KEYS if k not in cell_obj]
        if missing:
            violations.append(f"{where}: missing keys {missing}")
            continue
        name, variant = cell_obj["name"], cell_obj["variant"]
        if not isinstance(name, str) or not isinstance(variant, str):
            violations.append(f"{where}: name and variant must be strings")
            continue
        where = f"cells[{index}] ({name}, {variant})"
        inputs = cell_obj["inputs"]
        outputs = cell_obj["outputs"]
        if not (isinstance(inputs, list) and all(isinstance(p, str) for p in inputs)):
            violations.append(f"{where}: inputs must be a list of pin names")
            continue
        if not (isinstance(outputs, list) and all(isinstance(p, str) for p in outputs)):
            violations.append(f"{where}: outputs must be a list of pin names")
            continue
        functions = _str_map(cell_obj, "functions", where, violations)
        if not all(isinstance(v, str) for v in functions.values()):
            violations.append(f"{where}: functions must map pins to expression strings")
            continue

        caps = _str_map(cell_obj, "input_cap_ff", where, violations)
        delays = _str_map(cell_obj, "intrinsic_delay_ns", where, violations)
        measurement = None
        if cell_obj.get("load_measurement") is not None:
            m_obj = cell_obj["load_measurement"]
            m_where = f"{where}.load_measurement"
            if not isinstance(m_obj, dict):
                violations.append(f"{m_where}: must be an object")
            else:
                _check_unknown(m_obj, _MEASUREMENT_KEYS, m_where, violations, strict)
                measurement = LoadMeasurement(
                    load_ff=_number(m_obj, "load_ff", m_where, violations),
                    area_um2=_number(m_obj, "area_um2", m_where, violations),
                    delay_ns={k: float(v) for k, v in
                              _str_map(m_obj, "delay_ns", m_where, violations).items()},
                    leakage_nw=_number(m_obj, "leakage_nw", m_where, violations),
                    dynamic_pw=_number(m_obj, "dynamic_pw", m_where, violations),
                )

        ref_dynamic = cell_obj.get("ref_dynamic_pw")
        cell = Cell(
            name=name,
            variant=variant,
            inputs=tuple(inputs),
            outputs=tuple(outputs),
            functions={str(k): str(v) for k, v in functions.items()},
            area_um2=_number(cell_obj, "area_um2", where, violations),
            input_cap_ff={str(k): _number(caps, k, f"{where}.input_cap_ff", violations)
                          for k in caps},
            intrinsic_delay_ns={str(k): _number(delays, k, f"{where}.intrinsic_delay_ns",
                                                violations) for k in delays},
            load_coeff_ns_per_ff=_number(cell_obj, "load_coeff_ns_per_ff", where, violations),
            leakage_nw=_number(cell_obj, "leakage_nw", where, violations),
            ref_dynamic_pw=None if ref_dynamic is None
            else _number(cell_obj, "ref_dynamic_pw", where, violations),
            load_measurement=measurement,
        )
        if cell.key in cells:
            violations.append(f"duplicate cell ({name}, {variant})")
            continue
        violations.extend(cell_violations(cell))
        cells[cell.key] = cell

    if violations:
        raise LibraryError(violations)
    assert technology is not None and ref_point is not None
    return Library(technology=technology, ref_point=ref_point, cells=cells, corners=corners)


def save_library(lib: Library) -> str:
    """Deterministic JSON serialization; load(save(lib)) reproduces lib exactly."""
    tech = lib.technology
    doc = {
        "technology": {key: getattr(tech, key) for key in _TECHNOLOGY_KEYS},
        "ref_point": {key: getattr(lib.ref_point, key) for key in _REF_POINT_KEYS},
        "corners": {
            name: {"vth_shift_frac": c.vth_shift_frac, "delay_derate": c.delay_derate}
            for name, c in ((n, lib.corners[n]) for n in CORNER_NAMES)
        },
        "cells": [],
    }
    for key in sorted(lib.cells):
        cell = lib.cells[key]
        entry = {
            "name": cell.name,
            "variant": cell.variant,
            "inputs": list(cell.inputs),
            "outputs": list(cell.outputs),
            "functions": dict(cell.functions),
            "area_um2": cell.area_um2,
            "input_cap_ff": dict(cell.input_cap_ff),
            "intrinsic_delay_ns": dict(cell.intrinsic_delay_ns),
            "load_coeff_ns_per_ff": cell.load_coeff_ns_per_ff,
            "leakage_nw": cell.leakage_nw,
        }
        if cell.ref_dynamic_pw is not None:
            entry["ref_dynamic_pw"] = cell.ref_dynamic_pw
        if cell.load_measurement is not None:
            m = cell.load_measurement
            entry["load_measurement"] = {
                "load_ff": m.load_ff,
                "area_um2": m.area_um2,
                "delay_ns": dict(m.delay_ns),
                "leakage_nw": m.leakage_nw,
                "dynamic_pw": m.dynamic_pw,
            }
        doc["cells"].append(entry)
    return json.dumps(doc, indent=2) + "\n"


# ---------------------------------------------------------------------------
# Derating to an operating point and corner
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EffectiveCell:
    """A cell's characterized values rescaled to one (op, corner) condition."""

    name: str
    variant: str
    delay_ns: dict[str, float]
    load_coeff_ns_per_ff: float
    leakage_w: float
    switch_energy_fj: float


def operating_vth0(lib: Library, corner: CornerSpec, vth0_override: float | None = None) -> float:
    """Threshold voltage in effect at a corner, optionally re-centered.

    ``vth0_override`` replaces the technology's nominal vth0 before the
    corner shift is applied; the sweep engine uses it for its vth axis.
    """
    base = lib.technology.vth0 if vth0_override is None else vth0_override
    return base * (1.0 + corner.vth_shift_frac)


def leakage_scale(
    lib: Library,
    op: OperatingPoint,
    corner: CornerSpec,
    vth0_override: float | None = None,
) -> float:
    """Ratio of off-current at (op, corner) to off-current at the reference.

    The reference side is always the nominal technology at the library's
    reference point, so the scale is exactly 1.0 at that condition and the
    TT corner. i0 cancels; only vth0, vdd and temperature matter.
    """
    tech = lib.technology
    vth_op = operating_vth0(lib, corner, vth0_override)
    at_op = subthreshold_current(
        replace(tech, vth0=vth_op, temperature_k=op.temperature_k), 0.0, op.vdd)
    at_ref = subthreshold_current(
        replace(tech, temperature_k=lib.ref_point.temperature_k),
        0.0, lib.ref_point.vdd)
    return at_op / at_ref


def delay_scale(
    lib: Library,
    op: OperatingPoint,
    corner: CornerSpec,
    vth0_override: float | None = None,
) -> float:
    """Delay multiplier at (op, corner) relative to the characterized values.

    Alpha-power term at the operating condition over the term at the nominal
    reference condition, times the corner's delay derate. Pinning the
    denominator at the nominal vth0 keeps delay strictly decreasing in
    (vdd - vth) even at the reference supply.
    """
    tech = lib.technology
    vth_op = operating_vth0(lib, corner, vth0_override)
    num = alpha_power_delay_term(op.vdd, vth_op, tech.alpha_sat)
    den = alpha_power_delay_term(lib.ref_point.vdd, tech.vth0, tech.alpha_sat)
    return (num / den) * corner.delay_derate


def derate_cell(
    cell: Cell,
    lib: Library,
    op: OperatingPoint,
    corner: CornerSpec,
    vth0_override: float | None = None,
) -> EffectiveCell:
    """Rescale a cell's delay, leakage and switching energy to (op, corner).

    At the reference point and the TT corner this is the identity on delay
    and leakage. Leakage uses the ratio method: the stored measurement is
    multiplied by the device-model off-current ratio, so reference outputs
    stay table-exact while scaled points follow the physics.
    """
    d_scale = delay_scale(lib, op, corner, vth0_override)
    l_scale = leakage_scale(lib, op, corner, vth0_override)
    leakage_w = cell.leakage_nw * 1e-9 * (op.vdd / lib.ref_point.vdd) * l_scale
    return EffectiveCell(
        name=cell.name,
        variant=cell.variant,
        delay_ns={pin: d * d_scale for pin, d in cell.intrinsic_delay_ns.items()},
        load_coeff_ns_per_ff=cell.load_coeff_ns_per_ff,
        leakage_w=leakage_w,
        switch_energy_fj=cell.total_input_cap_ff() * op.vdd * op.vdd,
    )
