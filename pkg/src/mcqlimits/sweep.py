"""Frequency sweeps of the bounds and per-frequency optimum reports."""

from __future__ import annotations

import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from . import bounds
from .config import BoundSpec, OutputSection, ScenarioConfig
from .exceptions import ContractError, DivergenceError, SingularityError
from .optimizer import BoundKind, extract_coefficients_analytic, degenerate_family, verify_single_carrier_dominance
from .sensor import CarrierConfig, SensorParams, couplings, kappa_resonant, kappa_tuned, variance_to_amplitude, variance_to_psd

CONVENTIONS = ("variance", "psd", "amplitude")


@dataclass(frozen=True)
class SweepRow:
    """One sideband frequency.  Failed evaluations are NaN and explained in ``diagnostic``."""

    omega: float
    kappa_tot: float
    h_sql: float
    values: Dict[str, float]
    diagnostic: str = ""

    def as_dict(self) -> dict:
        return {"omega": self.omega, "kappa_tot": self.kappa_tot, "h_sql": self.h_sql, **self.values,
                "diagnostic": self.diagnostic}


def sweep_grid(config: ScenarioConfig) -> np.ndarray:
    s = config.sweep
    if s.spacing == "log":
        return np.geomspace(s.omega_min, s.omega_max, s.n_points)
    return np.linspace(s.omega_min, s.omega_max, s.n_points)


def carrier_configs(config: ScenarioConfig) -> List[CarrierConfig]:
    return [CarrierConfig(**c.model_dump()) for c in config.carriers]


def sensor_params(config: ScenarioConfig, omega: float) -> SensorParams:
    return SensorParams(Omega=omega, **config.sensor.model_dump())


def convert(variance: float, convention: str) -> float:
    if convention == "variance":
        return float(variance)
    if convention == "psd":
        return variance_to_psd(variance)
    if convention == "amplitude":
        return variance_to_amplitude(variance)
    raise ContractError(f"unknown convention {convention!r}")


def _equal(values, what: str) -> float:
    values = np.atleast_1d(values)
    if not np.all(values == values[0]):
        raise ContractError(f"this formula assumes the same {what} on every carrier")
    return float(values[0])


def evaluate_bound(spec: BoundSpec, config: ScenarioConfig, kappas, h_sql: float, chi: int = 1) -> bounds.BoundResult:
    """Variance bound for one column at couplings ``kappas`` (overrides applied)."""
    carriers = config.carriers
    eta = config.sensor.eta if spec.eta is None else spec.eta
    r = np.array([c.r if spec.r is None else spec.r for c in carriers])
    phi = np.array([c.phi if spec.phi is None else spec.phi for c in carriers])
    thetas = np.array([c.theta for c in carriers])
    k = np.asarray(kappas, dtype=float)
    kt = float(k.sum())
    f = spec.formula
    if f == "qcrb_general":
        return bounds.qcrb_general(k, r, phi, eta, h_sql=h_sql, chi=chi)
    if f == "crb_homodyne_general":
        return bounds.crb_homodyne_general(k, r, phi, thetas, eta, h_sql=h_sql, chi=chi)
    if f == "crb_signal_quadrature":
        return bounds.crb_signal_quadrature(k, r, phi, eta, h_sql=h_sql, chi=chi)
    if f == "qcrb_lossless":
        return bounds.qcrb_lossless(k, r, chi * phi, h_sql=h_sql)
    if f == "qcrb_equal_squeezing":
        return bounds.qcrb_equal_squeezing(kt, _equal(r, "squeezing"), chi * _equal(phi, "squeezing angle"), eta,
                                           h_sql=h_sql)
    if f == "crb_signal_equal_squeezing":
        return bounds.crb_signal_equal_squeezing(kt, _equal(r, "squeezing"), chi * _equal(phi, "squeezing angle"),
                                                 eta, h_sql=h_sql)
    if f == "crb_signal_optimal_squeeze_angle":
        return bounds.crb_signal_optimal_squeeze_angle(kt, _equal(r, "squeezing"), eta, h_sql=h_sql)
    if f == "qcrb_unsqueezed":
        return bounds.qcrb_unsqueezed(kt, eta, h_sql=h_sql)
    if f == "crb_signal_unsqueezed":
        return bounds.crb_signal_unsqueezed(kt, eta, h_sql=h_sql)
    raise ContractError(f"formula {f!r} cannot be swept")


def evaluate_point(config: ScenarioConfig, omega: float, convention: Optional[str] = None) -> SweepRow:
    """Every requested bound at one sideband frequency."""
    convention = config.output.convention if convention is None else convention
    specs = config.bound_specs()
    nan_row = {s.column: math.nan for s in specs}
    try:
        params = sensor_params(config, float(omega))
        cs = couplings(carrier_configs(config), params, config.coupling_model)
    except (SingularityError, ContractError) as exc:
        return SweepRow(float(omega), math.nan, math.nan, nan_row, f"singular point: {exc}")
    values, notes = {}, []
    for s in specs:
        try:
            v = evaluate_bound(s, config, cs.kappas, cs.h_sql, cs.chi).variance_bound
            values[s.column] = convert(v, convention)
        except (DivergenceError, SingularityError, ContractError, np.linalg.LinAlgError) as exc:
            values[s.column] = math.nan
            notes.append(f"{s.column}: {exc}")
    return SweepRow(float(omega), cs.kappa_tot, cs.h_sql, values, "; ".join(notes))


def run_sweep(config: ScenarioConfig, convention: Optional[str] = None) -> List[SweepRow]:
    return [evaluate_point(config, w, convention) for w in sweep_grid(config)]


def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    return f"{x:.17e}" if math.isfinite(x) else ("nan" if math.isnan(x) else ("inf" if x > 0 else "-inf"))


def render(rows: List[SweepRow], fmt: str = "csv") -> str:
    if not rows:
        raise ContractError("nothing to emit: the sweep produced no rows")
    header = list(rows[0].as_dict())
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row.as_dict().values()])
        return buf.getvalue()
    if fmt == "json-lines":
        # floats are written with repr, which round-trips exactly; NaN becomes null
        lines = []
        for row in rows:
            d = {k: (None if isinstance(v, float) and not math.isfinite(v) else v) for k, v in row.as_dict().items()}
            lines.append(json.dumps(d, allow_nan=False))
        return "\n".join(lines) + "\n"
    raise ContractError(f"unknown output format {fmt!r}")


def emit(rows: List[SweepRow], output: OutputSection, stream=None) -> Optional[Path]:
    """Write ``rows`` to ``output.path`` (or ``stream``/stdout when no path is set)."""
    text = render(rows, output.format)
    if output.path is None:
        (stream or sys.stdout).write(text)
        return None
    path = Path(output.path)
    try:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise ContractError(f"cannot write {path}: {exc.strerror}") from None
    return path


# ---------------------------------------------------------------- optimum


@dataclass
class OptimumSummary:
    entries: Dict[str, object] = field(default_factory=dict)
    notes: List[str] = field(default_factory=list)

    def text(self) -> str:
        lines = [f"{k} = {_value(v)}" for k, v in self.entries.items()]
        lines += [f"# {n}" for n in self.notes]
        return "\n".join(lines) + "\n"


def _value(v) -> str:
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_value(float(x)) for x in np.ravel(v)) + "]"
    return str(v)


def _kappa_per_watt(carrier: CarrierConfig, params: SensorParams, model: str) -> float:
    unit = CarrierConfig(**{**carrier.__dict__, "I": 1.0})
    if model == "tuned":
        return kappa_tuned(unit, params)
    return kappa_resonant(unit, params)[0]


def _optimum_entries(out, tag, kind, r, phi, eta, carriers, params, config, cs) -> None:
    e = out.entries
    rep = degenerate_family(extract_coefficients_analytic(kind, r, phi, eta))
    if rep.shot_noise:
        e[f"{tag}.regime"] = "shot-noise"
        e[f"{tag}.kappa_tot_opt"] = math.inf
        out.notes.append(f"{tag}: eta = 1 leaves no radiation-pressure term (c3 = 0); the bound falls as "
                         "1/kappa_tot and more power always helps")
        return
    best = rep.best_carrier_index
    per_watt = _kappa_per_watt(carriers[best], params, config.coupling_model)
    e[f"{tag}.regime"] = "finite-optimum"
    e[f"{tag}.best_carrier"] = best
    e[f"{tag}.kappa_tot_opt"] = rep.kappa_star
    e[f"{tag}.bound_opt_normalized"] = rep.bound_star
    e[f"{tag}.variance_opt"] = cs.h_sql**2 / 8 * rep.bound_star
    e[f"{tag}.power_opt_w"] = rep.kappa_star / per_watt
    e[f"{tag}.current_over_opt"] = cs.kappa_tot / rep.kappa_star
    if rep.degenerate_family is not None:
        e[f"{tag}.degenerate_carriers"] = list(rep.degenerate_family.indices)


def report_optimum(config: ScenarioConfig, omega: Optional[float] = None, *, verify: bool = True) -> OptimumSummary:
    """Optimal total coupling, implied power and angles at one sideband frequency."""
    omega = config.omega if omega is None else omega
    if omega is None:
        raise ContractError("no designated frequency: pass --omega or set 'omega' in the config")
    params = sensor_params(config, float(omega))
    carriers = carrier_configs(config)
    cs = couplings(carriers, params, config.coupling_model)
    eta = params.eta
    r = np.array([c.r for c in carriers])
    phi = cs.chi * np.array([c.phi for c in carriers])
    out = OptimumSummary()
    e = out.entries
    e["omega"] = float(omega)
    e["frequency_hz"] = float(omega) / (2 * math.pi)
    e["h_sql"] = cs.h_sql
    e["eta"] = eta
    e["chi"] = cs.chi
    e["kappa_tot_current"] = cs.kappa_tot

    cases = [("", r)]
    if np.any(r > 0):
        cases.append(("unsqueezed.", np.zeros_like(r)))
    for prefix, r_case in cases:
        for kind in (BoundKind.FUNDAMENTAL, BoundKind.SIGNAL_QUADRATURE):
            _optimum_entries(out, prefix + kind.value, kind, r_case, phi, eta, carriers, params, config, cs)
    fk, sk = e.get("fundamental.kappa_tot_opt"), e.get("signal_quadrature.kappa_tot_opt")
    if fk is not None and sk is not None and math.isfinite(fk) and math.isfinite(sk):
        e["power_increase_factor"] = fk / sk
    ufk, usk = e.get("unsqueezed.fundamental.kappa_tot_opt"), e.get("unsqueezed.signal_quadrature.kappa_tot_opt")
    if ufk is not None and usk is not None and math.isfinite(ufk):
        e["unsqueezed.power_increase_factor"] = ufk / usk

    equal = bool(np.all(r == r[0]) and np.all(phi == phi[0]))
    if eta == 1:
        e["theta_opt_current"] = [float(t) for t in bounds.optimal_homodyne_angle_lossless(cs.kappas, r, phi)]
    elif equal:
        e["theta_opt_current"] = bounds.optimal_homodyne_angle_equal(cs.kappa_tot, float(r[0]), float(phi[0]), eta)
        if math.isfinite(fk or math.nan):
            e["theta_opt_at_fundamental_opt"] = bounds.optimal_homodyne_angle_equal(fk, float(r[0]), float(phi[0]), eta)
    e["phi_signal_quadrature_current"] = math.atan(cs.kappa_tot)

    if verify:
        if cs.n_carriers <= 4:
            for kind in (BoundKind.FUNDAMENTAL, BoundKind.SIGNAL_QUADRATURE):
                dom = verify_single_carrier_dominance(kind, r, phi, eta, n_random=2000)
                e[f"{kind.value}.dominance"] = ("shot-noise" if dom.passed is None
                                               else "pass" if dom.passed else "FAIL")
        else:
            e["dominance"] = "skipped (more than four carriers)"
    return out
