"""Analytical MOSFET models for leakage and delay derating.

The leakage model is a standard weak-inversion drain current with DIBL:

    Isub = i0 * (W/L) * exp((Vgs - Vth_eff) / (n * vT)) * (1 - exp(-Vds / vT))
    Vth_eff = vth0 - eta_dibl * Vds

Delay derating follows the alpha-power law, Td ~ Vdd / (Vdd - Vth)^alpha,
expressed as a ratio against a reference operating point so that cell delays
characterized at the reference point can be rescaled to any (Vdd, Vth).

All functions are pure: identical inputs give bit-identical outputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

BOLTZMANN_J_PER_K = 1.380649e-23
ELECTRON_CHARGE_C = 1.602177e-19


@dataclass(frozen=True)
class TechnologyModel:
    """Calibrated device parameters defining the leakage/delay physics.

    Attributes:
        node_name: Free-form process label.
        vth0: Zero-bias threshold voltage, V.
        n_slope: Subthreshold slope factor (>= 1, dimensionless).
        i0: Leakage pre-factor current at W/L = 1, A. Usually calibrated
            per cell against measured leakage (see :func:`calibrate_i0`).
        w_over_l: Reference device aspect ratio.
        eta_dibl: DIBL coefficient, V of threshold shift per V of Vds.
        alpha_sat: Velocity-saturation exponent of the alpha-power delay law.
        tox_nm: Gate-oxide thickness, nm. Informational only.
        temperature_k: Device temperature, K.
    """

    node_name: str = "130nm-default"
    vth0: float = 0.4
    n_slope: float = 1.5
    i0: float = 1e-7
    w_over_l: float = 1.0
    eta_dibl: float = 0.08
    alpha_sat: float = 1.3
    tox_nm: float = 2.2
    temperature_k: float = 300.0

    def __post_init__(self):
        if self.vth0 <= 0:
            raise ValueError(f"vth0 must be > 0, got {self.vth0}")
        if self.n_slope < 1:
            raise ValueError(f"n_slope must be >= 1, got {self.n_slope}")
        if self.i0 <= 0:
            raise ValueError(f"i0 must be > 0, got {self.i0}")
        if self.w_over_l <= 0:
            raise ValueError(f"w_over_l must be > 0, got {self.w_over_l}")
        if not 0 <= self.eta_dibl < 1:
            raise ValueError(f"eta_dibl must be in [0, 1), got {self.eta_dibl}")
        if not 1 <= self.alpha_sat <= 2:
            raise ValueError(f"alpha_sat must be in [1, 2], got {self.alpha_sat}")
        if self.temperature_k <= 0:
            raise ValueError(f"temperature_k must be > 0, got {self.temperature_k}")


@dataclass(frozen=True)
class OperatingPoint:
    """Supply voltage, clock frequency and temperature of one analysis run."""

    vdd: float
    frequency: float
    temperature_k: float = 300.0

    def __post_init__(self):
        if self.vdd <= 0:
            raise ValueError(f"vdd must be > 0, got {self.vdd}")
        if self.frequency <= 0:
            raise ValueError(f"frequency must be > 0, got {self.frequency}")
        if self.temperature_k <= 0:
            raise ValueError(f"temperature_k must be > 0, got {self.temperature_k}")


def thermal_voltage(temperature_k: float) -> float:
    """kT/q in volts (~25.85 mV at 300 K)."""
    if temperature_k <= 0:
        raise ValueError(f"temperature must be > 0 K, got {temperature_k}")
    return BOLTZMANN_J_PER_K * temperature_k / ELECTRON_CHARGE_C


def subthreshold_current(model: TechnologyModel, vgs: float, vds: float) -> float:
    """Weak-inversion drain current in amperes at the given bias.

    Strictly increasing in vgs and vds, strictly decreasing in vth0. The
    exponential may underflow to exactly 0.0 for strongly negative gate
    overdrive; that is a meaningful "no leakage" result, not an error.
    """
    if vds < 0:
        raise ValueError(f"vds must be >= 0, got {vds}")
    vt = thermal_voltage(model.temperature_k)
    vth_eff = model.vth0 - model.eta_dibl * vds
    exponent = (vgs - vth_eff) / (model.n_slope * vt)
    return model.i0 * model.w_over_l * math.exp(exponent) * (1.0 - math.exp(-vds / vt))


def stack_intermediate_voltage(
    model: TechnologyModel, vdd: float, *, rel_tol: float = 1e-6, max_iter: int = 200
) -> float:
    """Internal node voltage of a two-high off NMOS stack, both gates at 0 V.

    Solves I_top(vgs=-vx, vds=vdd-vx) = I_bottom(vgs=0, vds=vx) for vx by
    bisection on [0, vdd] until the current mismatch is below ``rel_tol``
    relative to the bottom current, or ``max_iter`` halvings. The solution
    is independent of i0 (it cancels from the equality).
    """
    if vdd <= 0:
        raise ValueError(f"vdd must be > 0, got {vdd}")

    def mismatch(vx: float) -> float:
        top = subthreshold_current(model, -vx, vdd - vx)
        bottom = subthreshold_current(model, 0.0, vx)
        return top - bottom

    lo, hi = 0.0, vdd
    # mismatch(0) = I_off(vdd) > 0 and mismatch(vdd) = -I_off-like < 0 for any
    # valid model; anything else means the model violated its own invariants.
    if not (mismatch(lo) > 0.0 and mismatch(hi) < 0.0):
        raise RuntimeError("stack node voltage is not bracketed by (0, vdd)")

    vx = 0.5 * (lo + hi)
    for _ in range(max_iter):
        diff = mismatch(vx)
        bottom = subthreshold_current(model, 0.0, vx)
        if bottom > 0.0 and abs(diff) / bottom <= rel_tol:
            break
        if diff > 0.0:
            lo = vx
        else:
            hi = vx
        vx = 0.5 * (lo + hi)
    return vx


def stack_leakage(model: TechnologyModel, vdd: float, depth: int) -> tuple[float, float]:
    """Standby leakage current of an off transistor stack.

    Returns ``(current_a, stack_factor)``. Depth 1 is a single off device at
    vgs = 0, vds = vdd with stack_factor 1.0. Depth 2 evaluates the current
    through the stack at the solved internal node voltage; stack_factor is
    the depth-1 to depth-2 current ratio (> 1, the stack effect).
    """
    if vdd <= 0:
        raise ValueError(f"vdd must be > 0, got {vdd}")
    if depth == 1:
        return subthreshold_current(model, 0.0, vdd), 1.0
    if depth == 2:
        single = subthreshold_current(model, 0.0, vdd)
        vx = stack_intermediate_voltage(model, vdd)
        stacked = subthreshold_current(model, -vx, vdd - vx)
        return stacked, single / stacked
    raise ValueError(f"unsupported stack depth {depth}; only 1 and 2 are modeled")


def alpha_power_delay_term(vdd: float, vth: float, alpha_sat: float) -> float:
    """Unnormalized alpha-power delay term Vdd / (Vdd - Vth)^alpha.

    Delay ratios between two operating conditions are formed by dividing two
    of these terms; see :func:`delay_scale_factor`.
    """
    if vdd <= vth:
        raise ValueError(
            f"vdd ({vdd} V) must exceed the threshold voltage ({vth} V) "
            "for the device to turn on"
        )
    return vdd / (vdd - vth) ** alpha_sat


def delay_scale_factor(
    model: TechnologyModel, op: OperatingPoint, ref_op: OperatingPoint
) -> float:
    """Multiplier applied to reference-point delays at another supply voltage.

    Equals 1.0 when op == ref_op; grows as vdd drops toward vth0 (slower
    gates) and shrinks above the reference supply.
    """
    num = alpha_power_delay_term(op.vdd, model.vth0, model.alpha_sat)
    den = alpha_power_delay_term(ref_op.vdd, model.vth0, model.alpha_sat)
    return num / den


def calibrate_i0(model: TechnologyModel, target_leakage_w: float, vdd: float) -> float:
    """i0 that makes vdd * Isub(vgs=0, vds=vdd) equal the target leakage power.

    Closed form: i0 enters the current linearly, so one division suffices.
    """
    if target_leakage_w <= 0:
        raise ValueError(f"target leakage must be > 0 W, got {target_leakage_w}")
    if vdd <= 0:
        raise ValueError(f"vdd must be > 0, got {vdd}")
    base = subthreshold_current(model, 0.0, vdd)
    return model.i0 * target_leakage_w / (vdd * base)


def with_vth0(model: TechnologyModel, vth0: float) -> TechnologyModel:
    """Copy of the model with a different threshold voltage."""
    return replace(model, vth0=vth0)
