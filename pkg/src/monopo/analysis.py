"""Measured noise traces: ingestion, shot-noise normalization and model fits."""
from __future__ import annotations

import csv
import json
import os
import warnings
from dataclasses import asdict, dataclass, field, replace
from typing import IO, Iterable, Sequence

import numpy as np
from scipy.optimize import least_squares, minimize_scalar

from .squeezing import (
    Quadrature,
    SqueezingParams,
    pump_to_x,
    squeezing_bandwidth,
    to_db,
    variance,
    variance_with_phase_noise,
)

TRACE_COLUMNS = ("frequency_hz", "power_dbm")
FREE_PARAMS = ("theta_tilde", "p_threshold", "loss_L")
THETA_MAX = np.pi / 4
LOSS_BOUNDS = (0.0, 0.05)


class TraceFormatError(ValueError):
    pass


class FitError(ValueError):
    pass


# ---------------------------------------------------------------------------
# traces
# ---------------------------------------------------------------------------


@dataclass
class SpectrumTrace:
    """Spectrum-analyzer record: frequencies in Hz, powers in dBm."""

    frequency: np.ndarray
    power_dbm: np.ndarray
    rbw: float
    vbw: float
    label: str = ""
    center_frequency: float | None = None

    def __post_init__(self):
        self.frequency = np.asarray(self.frequency, dtype=float)
        self.power_dbm = np.asarray(self.power_dbm, dtype=float)
        if self.frequency.shape != self.power_dbm.shape or self.frequency.ndim != 1:
            raise TraceFormatError("frequency and power_dbm must be 1-D arrays of equal length")
        if self.frequency.size == 0:
            raise TraceFormatError("trace has no points")
        if not self.rbw > 0:
            raise TraceFormatError(f"rbw must be positive, got {self.rbw}")
        if not self.vbw > 0:
            raise TraceFormatError(f"vbw must be positive, got {self.vbw}")
        steps = np.diff(self.frequency)
        if not (np.all(steps > 0) or np.all(steps == 0)):
            raise TraceFormatError("frequency must be strictly increasing (or constant for zero span)")

    @property
    def zero_span(self) -> bool:
        return self.frequency.size > 1 and bool(np.all(self.frequency == self.frequency[0]))

    @property
    def linear_power(self) -> np.ndarray:
        """Power in mW."""
        return 10 ** (self.power_dbm / 10)


def load_trace(source: str | os.PathLike | IO[str]) -> SpectrumTrace:
    """Read a trace CSV.

    The file starts with ``# rbw_hz=``, ``# vbw_hz=`` and ``# label=`` lines
    (``# center_frequency_hz=`` optional), followed by an optional
    ``frequency_hz,power_dbm`` header row and the data rows.
    """
    if isinstance(source, (str, os.PathLike)):
        with open(source) as fh:
            return load_trace(fh)

    meta = {}
    freqs, powers = [], []
    header_seen = False
    for lineno, raw in enumerate(source, start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, sep, value = line[1:].partition("=")
            if not sep:
                continue
            meta[key.strip()] = value.strip()
            continue
        cells = [c.strip() for c in line.split(",")]
        if tuple(cells) == TRACE_COLUMNS and not header_seen and not freqs:
            header_seen = True
            continue
        if len(cells) != 2:
            raise TraceFormatError(f"line {lineno}: expected 2 columns, got {len(cells)}")
        try:
            f, p = float(cells[0]), float(cells[1])
        except ValueError:
            raise TraceFormatError(f"line {lineno}: cannot parse {line!r} as numbers") from None
        if freqs and f < freqs[-1][0]:
            raise TraceFormatError(
                f"line {lineno}: frequency {f} is below previous value {freqs[-1][0]}"
            )
        freqs.append((f, lineno))
        powers.append(p)

    for key in ("rbw_hz", "vbw_hz", "label"):
        if key not in meta:
            raise TraceFormatError(f"missing required header: {key}")
    try:
        rbw, vbw = float(meta["rbw_hz"]), float(meta["vbw_hz"])
        center = float(meta["center_frequency_hz"]) if "center_frequency_hz" in meta else None
    except ValueError as exc:
        raise TraceFormatError(f"bad numeric header value: {exc}") from None
    if not freqs:
        raise TraceFormatError("trace has no data rows")

    f_arr = np.array([f for f, _ in freqs])
    steps = np.diff(f_arr)
    if np.any(steps == 0) and not np.all(steps == 0):
        bad = freqs[int(np.argmax(steps == 0)) + 1][1]
        raise TraceFormatError(f"line {bad}: repeated frequency in a swept trace")
    return SpectrumTrace(f_arr, np.array(powers), rbw, vbw, meta["label"], center)


def write_trace(trace: SpectrumTrace, dest: str | os.PathLike | IO[str]):
    if isinstance(dest, (str, os.PathLike)):
        with open(dest, "w") as fh:
            return write_trace(trace, fh)
    dest.write(f"# rbw_hz={trace.rbw!r}\n# vbw_hz={trace.vbw!r}\n# label={trace.label}\n")
    if trace.center_frequency is not None:
        dest.write(f"# center_frequency_hz={trace.center_frequency!r}\n")
    dest.write(",".join(TRACE_COLUMNS) + "\n")
    for f, p in zip(trace.frequency, trace.power_dbm):
        dest.write(f"{float(f)!r},{float(p)!r}\n")


# ---------------------------------------------------------------------------
# normalization
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NormalizedPoint:
    frequency: float
    relative_power: float
    dark_corrected: bool


def _power_on_grid(ref: SpectrumTrace, grid: np.ndarray) -> np.ndarray:
    """Linear power of ``ref`` on ``grid``: mean for zero-span, else linear interpolation."""
    if ref.zero_span or ref.frequency.size == 1:
        return np.full(grid.shape, ref.linear_power.mean())
    lo, hi = ref.frequency[0], ref.frequency[-1]
    if grid.min() < lo or grid.max() > hi:
        raise ValueError(
            f"trace {ref.label!r} covers {lo:g}-{hi:g} Hz and cannot be extrapolated "
            f"to {grid.min():g}-{grid.max():g} Hz"
        )
    return np.interp(grid, ref.frequency, ref.linear_power)


def normalize(
    signal: SpectrumTrace,
    shot: SpectrumTrace,
    dark: SpectrumTrace | None = None,
    subtract_dark: bool = False,
) -> list[NormalizedPoint]:
    """Express ``signal`` in shot-noise units on its own frequency grid.

    With ``subtract_dark`` the dark-noise power is removed from both signal
    and shot noise before taking the ratio. All arithmetic is in linear
    power; the dBm reference cancels.
    """
    grid = signal.frequency
    p_sig = signal.linear_power
    p_shot = _power_on_grid(shot, grid)
    use_dark = subtract_dark and dark is not None
    if subtract_dark and dark is None:
        raise ValueError("subtract_dark requested without a dark trace")
    if use_dark:
        p_dark = _power_on_grid(dark, grid)
        if np.any(p_shot <= p_dark):
            i = int(np.argmax(p_shot <= p_dark))
            raise ValueError(f"shot noise does not exceed dark noise at {grid[i]:g} Hz")
        ratio = (p_sig - p_dark) / (p_shot - p_dark)
    else:
        ratio = p_sig / p_shot
    if np.any(ratio <= 0):
        i = int(np.argmax(ratio <= 0))
        raise ValueError(f"signal is at or below the dark floor at {grid[i]:g} Hz")
    return [NormalizedPoint(float(f), float(r), use_dark) for f, r in zip(grid, ratio)]


def denormalize(
    points: Sequence[NormalizedPoint],
    shot: SpectrumTrace,
    dark: SpectrumTrace | None = None,
) -> np.ndarray:
    """Undo :func:`normalize`, returning the signal power in dBm."""
    grid = np.array([p.frequency for p in points])
    r = np.array([p.relative_power for p in points])
    p_shot = _power_on_grid(shot, grid)
    if points and points[0].dark_corrected:
        if dark is None:
            raise ValueError("points were dark-corrected; the dark trace is required")
        p_dark = _power_on_grid(dark, grid)
        p_sig = r * (p_shot - p_dark) + p_dark
    else:
        p_sig = r * p_shot
    return 10 * np.log10(p_sig)


def dark_corrected_db(raw_db: float, dark_below_shot_db: float) -> float:
    """Correct a shot-noise-relative level for a dark floor ``dark_below_shot_db`` under shot noise."""
    d = 10 ** (-dark_below_shot_db / 10)
    return float(10 * np.log10((10 ** (raw_db / 10) - d) / (1 - d)))


# ---------------------------------------------------------------------------
# fitting
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Observation:
    """One measured variance ``r`` (shot-noise units).

    Give either the normalized pump amplitude ``x`` or the pump ``power`` in
    W. Fits that free the threshold need ``power``.
    """

    f: float
    quadrature: Quadrature
    r: float
    x: float | None = None
    power: float | None = None

    def __post_init__(self):
        if self.x is None and self.power is None:
            raise ValueError("observation needs x or power")
        if not self.r > 0:
            raise ValueError(f"measured variance must be positive, got {self.r}")


@dataclass
class FitResult:
    theta_tilde: float
    theta_tilde_stderr: float
    params: SqueezingParams
    free: tuple[str, ...]
    residual_rms: float
    n_points: int
    converged: bool = True
    stderr: dict = field(default_factory=dict)
    message: str = ""

    @property
    def theta_tilde_deg(self) -> float:
        return float(np.rad2deg(self.theta_tilde))

    def to_dict(self) -> dict:
        p = asdict(self.params)
        return {
            "theta_tilde_rad": self.theta_tilde,
            "theta_tilde_stderr_rad": self.theta_tilde_stderr,
            "theta_tilde_deg": self.theta_tilde_deg,
            "theta_tilde_stderr_deg": float(np.rad2deg(self.theta_tilde_stderr)),
            "free": list(self.free),
            "stderr": dict(self.stderr),
            "fixed_params": {k: v for k, v in p.items() if k not in self.free},
            "fitted_params": {k: p[k] for k in self.free},
            "residual_rms_db": self.residual_rms,
            "n_points": self.n_points,
            "converged": self.converged,
            "message": self.message,
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


def _design(data: Sequence[Observation], params: SqueezingParams, from_power: bool = False):
    """Noise in the measured quadrature and its conjugate, with theta_tilde = 0.

    ``x`` comes from each observation unless ``from_power`` asks for it to be
    recomputed from pump power and ``params.p_threshold``.
    """
    x = np.array(
        [
            pump_to_x(o.power, params.p_threshold) if from_power or o.x is None else o.x
            for o in data
        ]
    )
    f = np.array([o.f for o in data])
    own = np.empty(len(data))
    other = np.empty(len(data))
    for quad in Quadrature:
        mask = np.array([o.quadrature is quad for o in data])
        if mask.any():
            own[mask] = variance(quad, x[mask], f[mask], params)
            other[mask] = variance(quad.other, x[mask], f[mask], params)
    return own, other


def _residuals(model, measured, domain):
    if domain == "db":
        return 10 * np.log10(model) - 10 * np.log10(measured)
    return model - measured


def fit_theta(
    data: Sequence[Observation],
    fixed: SqueezingParams,
    domain: str = "db",
) -> FitResult:
    """Least-squares phase-lock error with every other parameter held.

    The model is linear in ``s = sin^2(theta)``; the search runs over
    ``s in [0, 1/2)`` (``theta in [0, pi/4)``), first on a grid and then
    with bounded Brent refinement around the best grid cell.
    """
    data = list(data)
    if len(data) < 2:
        raise FitError(f"need at least 2 observations, got {len(data)}")
    if domain not in ("db", "linear"):
        raise ValueError(f"domain must be 'db' or 'linear', got {domain!r}")
    own, other = _design(data, fixed)
    if np.max(np.abs(other - own)) < 1e-12:
        raise FitError("residual landscape is flat in theta_tilde (no pumped data)")
    measured = np.array([o.r for o in data])

    def cost(s):
        return float(np.sum(_residuals(own * (1 - s) + other * s, measured, domain) ** 2))

    s_max = np.sin(THETA_MAX) ** 2
    grid = np.linspace(0.0, s_max, 401)[:-1]
    costs = np.array([cost(s) for s in grid])
    i = int(np.argmin(costs))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
    res = minimize_scalar(cost, bounds=(lo, hi), method="bounded", options={"xatol": 1e-14})
    s_hat = float(res.x) if res.fun <= costs[i] else float(grid[i])
    theta = float(np.arcsin(np.sqrt(s_hat)))

    model = own * (1 - s_hat) + other * s_hat
    resid = _residuals(model, measured, domain)
    # d(model)/d(theta) = (other - own) * sin(2 theta)
    dmodel = (other - own) * np.sin(2 * theta)
    jac = dmodel / (model * np.log(10) / 10) if domain == "db" else dmodel
    stderr = _stderr(resid, jac[:, None])[0]

    return FitResult(
        theta_tilde=theta,
        theta_tilde_stderr=stderr,
        params=replace(fixed, theta_tilde=theta),
        free=("theta_tilde",),
        residual_rms=float(np.sqrt(np.mean(_residuals(model, measured, "db") ** 2))),
        n_points=len(data),
        converged=bool(res.success),
        stderr={"theta_tilde": stderr},
    )


def _stderr(resid: np.ndarray, jac: np.ndarray) -> np.ndarray:
    n, p = jac.shape
    if n <= p:
        return np.full(p, np.nan)
    jtj = jac.T @ jac
    try:
        cov = np.linalg.inv(jtj) * float(resid @ resid) / (n - p)
    except np.linalg.LinAlgError:
        return np.full(p, np.nan)
    return np.sqrt(np.abs(np.diag(cov)))


def fit_model(
    data: Sequence[Observation],
    fixed: SqueezingParams,
    free: Iterable[str] = ("theta_tilde",),
    domain: str = "db",
    max_nfev: int = 2000,
) -> FitResult:
    """Joint least squares over any subset of theta_tilde, p_threshold and loss_L.

    Bounds: ``theta_tilde in [0, pi/4)``, ``p_threshold`` above the largest
    observed pump power, ``loss_L in [0, 0.05]``. Values in ``fixed`` seed the
    search. A run that hits ``max_nfev`` returns its best point with
    ``converged=False``.
    """
    data = list(data)
    requested = set(free)
    unknown = requested - set(FREE_PARAMS)
    free = tuple(name for name in FREE_PARAMS if name in requested)
    if unknown:
        raise ValueError(f"unknown free parameters {sorted(unknown)}")
    if not free:
        raise ValueError("free parameter set is empty")
    if len(free) >= len(data):
        raise FitError(f"{len(free)} free parameters need more than {len(data)} observations")
    if free == ("theta_tilde",):
        return fit_theta(data, fixed, domain)
    if "p_threshold" in free and any(o.power is None for o in data):
        raise FitError("fitting p_threshold needs pump power on every observation")

    measured = np.array([o.r for o in data])
    p_max = max((o.power for o in data if o.power is not None), default=0.0)
    s_max = np.sin(THETA_MAX) ** 2

    lower, upper, start = [], [], []
    for name in free:
        if name == "theta_tilde":
            lower.append(0.0)
            upper.append(s_max * (1 - 1e-12))
            start.append(np.clip(np.sin(fixed.theta_tilde) ** 2, 1e-6, s_max * 0.99))
        elif name == "p_threshold":
            floor = p_max * (1 + 1e-9)
            lower.append(floor)
            upper.append(np.inf)
            start.append(max(fixed.p_threshold, p_max * 1.1))
        else:
            lower.append(LOSS_BOUNDS[0])
            upper.append(LOSS_BOUNDS[1])
            start.append(np.clip(fixed.loss_L, 1e-4, LOSS_BOUNDS[1] * 0.99))
    start = np.array(start)

    def unpack(v):
        kw = {k: float(val) for k, val in zip(free, v)}
        s = kw.pop("theta_tilde", np.sin(fixed.theta_tilde) ** 2)
        return s, replace(fixed, **kw)

    from_power = "p_threshold" in free

    def resid(v):
        s, p = unpack(v)
        own, other = _design(data, p, from_power)
        return _residuals(own * (1 - s) + other * s, measured, domain)

    res = least_squares(
        resid,
        start,
        bounds=(lower, upper),
        x_scale=np.abs(start),
        method="trf",
        xtol=1e-15,
        ftol=1e-15,
        gtol=1e-15,
        max_nfev=max_nfev,
    )
    s_hat, p_hat = unpack(res.x)
    theta = float(np.arcsin(np.sqrt(max(s_hat, 0.0))))
    p_hat = replace(p_hat, theta_tilde=theta)

    jac = np.array(res.jac, dtype=float)
    if "theta_tilde" in free:
        jac[:, free.index("theta_tilde")] *= np.sin(2 * theta)
    errs = dict(zip(free, map(float, _stderr(res.fun, jac))))
    converged = res.status > 0
    if not converged:
        warnings.warn(f"fit did not converge: {res.message}", RuntimeWarning, stacklevel=2)

    own, other = _design(data, p_hat, from_power)
    model = own * np.cos(theta) ** 2 + other * np.sin(theta) ** 2
    return FitResult(
        theta_tilde=theta,
        theta_tilde_stderr=errs.get("theta_tilde", float("nan")),
        params=p_hat,
        free=free,
        residual_rms=float(np.sqrt(np.mean(_residuals(model, measured, "db") ** 2))),
        n_points=len(data),
        converged=converged,
        stderr=errs,
        message=str(res.message),
    )


def synthetic_observations(
    params: SqueezingParams, powers: Iterable[float], f: float = 2e6
) -> list[Observation]:
    """Noiseless model data for both quadratures at each pump power."""
    out = []
    for power in powers:
        x = float(pump_to_x(power, params.p_threshold))
        for quad in Quadrature:
            r = float(variance_with_phase_noise(quad, x, f, params))
            out.append(Observation(f, quad, r, x=x, power=float(power)))
    return out


def load_observations(source: str | os.PathLike | IO[str]) -> list[Observation]:
    """Read fit data: CSV with ``power_mW,freq_MHz,quadrature,value_dB`` columns.

    ``quadrature`` is ``sq`` or ``antisq``; ``value_dB`` is relative to shot
    noise. An ``x`` column may replace ``power_mW``.
    """
    if isinstance(source, (str, os.PathLike)):
        with open(source) as fh:
            return load_observations(fh)

    rows = [line for line in source if line.strip() and not line.lstrip().startswith("#")]
    reader = csv.DictReader(rows)
    if reader.fieldnames is None:
        raise TraceFormatError("fit data is empty")
    need = {"freq_MHz", "quadrature", "value_dB"}
    missing = need - set(reader.fieldnames)
    if missing or not ({"power_mW", "x"} & set(reader.fieldnames)):
        raise TraceFormatError(f"missing required columns: {sorted(missing) or ['power_mW or x']}")
    quads = {"sq": Quadrature.SQUEEZED, "antisq": Quadrature.ANTI_SQUEEZED}
    out = []
    for lineno, row in enumerate(reader, start=2):
        try:
            quad = quads[row["quadrature"].strip()]
            power = float(row["power_mW"]) * 1e-3 if row.get("power_mW") not in (None, "") else None
            x = float(row["x"]) if row.get("x") not in (None, "") else None
            out.append(
                Observation(
                    f=float(row["freq_MHz"]) * 1e6,
                    quadrature=quad,
                    r=10 ** (float(row["value_dB"]) / 10),
                    x=x,
                    power=power,
                )
            )
        except (KeyError, ValueError, TypeError) as exc:
            raise TraceFormatError(f"data row {lineno}: {exc}") from None
    return out


# ---------------------------------------------------------------------------
# summary table
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OpoReportEntry:
    label: str
    params: SqueezingParams
    pump_squeezing: float
    pump_bandwidth: float
    f_measure: float = 2e6


REPORT_COLUMNS = (
    "label",
    "output_coupler_T_pct",
    "threshold_mW",
    "sq_dB",
    "antisq_dB",
    "pump_mW",
    "bandwidth_MHz",
    "bandwidth_pump_mW",
)


def report_table(entries: Iterable[OpoReportEntry]) -> dict[str, list]:
    """Per-OPO model predictions, one list entry per OPO in input order."""
    table = {name: [] for name in REPORT_COLUMNS}
    for e in entries:
        p = e.params
        x = pump_to_x(e.pump_squeezing, p.p_threshold)
        x_bw = pump_to_x(e.pump_bandwidth, p.p_threshold)
        table["label"].append(e.label)
        table["output_coupler_T_pct"].append(p.oc_T * 100)
        table["threshold_mW"].append(p.p_threshold * 1e3)
        table["sq_dB"].append(
            float(to_db(variance_with_phase_noise(Quadrature.SQUEEZED, x, e.f_measure, p)))
        )
        table["antisq_dB"].append(
            float(to_db(variance_with_phase_noise(Quadrature.ANTI_SQUEEZED, x, e.f_measure, p)))
        )
        table["pump_mW"].append(e.pump_squeezing * 1e3)
        table["bandwidth_MHz"].append(float(squeezing_bandwidth(x_bw, p.f0)) / 1e6)
        table["bandwidth_pump_mW"].append(e.pump_bandwidth * 1e3)
    return table


def format_report(table: dict[str, list]) -> str:
    rows = [
        ("Output coupler T", "output_coupler_T_pct", "{:.1f} %"),
        ("Threshold pump power", "threshold_mW", "{:.0f} mW"),
        ("Squeezing (dB)", "sq_dB", "{:+.2f}"),
        ("Anti-squeezing (dB)", "antisq_dB", "{:+.2f}"),
        ("  (pump power)", "pump_mW", "({:.0f} mW)"),
        ("Squeezing bandwidth", "bandwidth_MHz", "{:.1f} MHz"),
        ("  (pump power)", "bandwidth_pump_mW", "({:.0f} mW)"),
    ]
    labels = table["label"]
    width = max([12] + [len(s) + 2 for s in labels])
    lines = ["Label".ljust(24) + "".join(s.rjust(width) for s in labels)]
    for title, key, fmt in rows:
        lines.append(title.ljust(24) + "".join(fmt.format(v).rjust(width) for v in table[key]))
    return "\n".join(lines)
