"""Peak detection, pulse-duration thresholds and the one-parameter axis-angle fit.

Peaks are strict local maxima filtered by prominence, with the prominence
floor expressed as a fraction of the spectrum's global maximum.  The
double/single peak transition over pump duration is located by bisection on
the detected peak count.  The axis-angle fit minimizes the total weighted
squared residual over a shared crystal angle, with per-curve amplitudes
solved in closed form at every trial angle: amplitude is a detection-
efficiency scale, not a spectral shape parameter, so the angle remains the
only shape degree of freedom.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.signal import find_peaks as _scipy_find_peaks

from .dispersion import wavelength_to_omega
from .spectra import (
    CrystalConfig,
    Polarization,
    PumpPulse,
    Spectrum,
    conditional_density_polarized,
    conditional_spectrum,
)

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
INV_PHI_SQ = (3.0 - math.sqrt(5.0)) / 2.0


class SpectrumStructureError(ArithmeticError):
    """A spectrum has a peak count the requested analysis cannot use."""


class BracketError(ArithmeticError):
    """A scan bracket does not straddle the structure it must contain."""


class FitConvergenceError(ArithmeticError):
    """The angle search could not isolate a minimum inside its bracket."""


class ZeroVarianceError(ArithmeticError):
    """R-squared is undefined for data with zero variance."""


class DataFormatError(ValueError):
    """Malformed experimental-spectrum file; message carries the line number."""


@dataclass(frozen=True)
class Peak:
    location_nm: float
    height: float
    prominence: float


@dataclass(frozen=True)
class PeakSet:
    """Detected peaks sorted by location."""

    peaks: tuple[Peak, ...]

    def __len__(self) -> int:
        return len(self.peaks)

    def __iter__(self):
        return iter(self.peaks)

    @property
    def locations_nm(self) -> np.ndarray:
        return np.array([p.location_nm for p in self.peaks])


def find_spectral_peaks(spectrum: Spectrum, min_prominence: float = 0.1) -> PeakSet:
    """All strict local maxima with prominence >= min_prominence * global max.

    Prominence is the height above the higher of the two bounding saddles.
    A flat spectrum has no strict local maxima and yields an empty PeakSet.
    Deterministic, and invariant under positive rescaling of the spectrum.
    """
    if len(spectrum.lambda1_nm) < 3:
        raise ValueError("peak detection needs at least 3 samples")
    if not 0.0 < min_prominence < 1.0:
        raise ValueError("min_prominence must lie strictly between 0 and 1")
    values = spectrum.density
    top = float(values.max())
    if top <= 0.0:
        return PeakSet(())
    idx, props = _scipy_find_peaks(values, prominence=min_prominence * top)
    peaks = tuple(
        Peak(float(spectrum.lambda1_nm[i]), float(values[i]), float(prom))
        for i, prom in zip(idx, props["prominences"])
    )
    return PeakSet(peaks)


def peak_separation_vs_detuning(
    lambda2_values,
    pump: PumpPulse,
    crystal: CrystalConfig,
    lambda1_grid: np.ndarray,
    min_prominence: float = 0.1,
) -> list[tuple[float, float]]:
    """Peak separation of the coincidence spectrum for each fixed lambda2.

    Returns (lambda2, separation_nm) pairs sorted by lambda2, so the result
    is a pure function of the set of requested wavelengths.  A single-peak
    (degenerate) spectrum records separation 0; any other peak count raises
    :class:`SpectrumStructureError` naming the offending wavelength.
    """
    out = []
    for lam2 in sorted(float(v) for v in lambda2_values):
        spec = conditional_spectrum(lam2, lambda1_grid, pump, crystal, normalization="raw")
        peaks = find_spectral_peaks(spec, min_prominence)
        if len(peaks) == 2:
            locs = peaks.locations_nm
            out.append((lam2, float(locs[1] - locs[0])))
        elif len(peaks) == 1:
            out.append((lam2, 0.0))
        else:
            raise SpectrumStructureError(
                f"lambda2 = {lam2} nm yields {len(peaks)} peaks; expected 1 or 2"
            )
    return out


def _peak_count(lambda2_nm: float, tau_fs: float, pump: PumpPulse, crystal: CrystalConfig, grid, min_prominence: float) -> int:
    probe = replace(pump, tau_fs=float(tau_fs))
    spec = conditional_spectrum(lambda2_nm, grid, probe, crystal, normalization="raw")
    return len(find_spectral_peaks(spec, min_prominence))


def doubling_threshold(
    lambda2_nm: float,
    pump: PumpPulse,
    crystal: CrystalConfig,
    tau_bracket_fs: tuple[float, float],
    lambda1_grid: np.ndarray,
    min_prominence: float = 0.1,
) -> float:
    """Largest pump duration (1 fs resolution) with a doubled spectrum.

    The bracket endpoints must show the transition (2 peaks at the short
    end, 1 at the long end); the count flip is then bisected to 1 fs.
    """
    lo, hi = float(tau_bracket_fs[0]), float(tau_bracket_fs[1])
    if not 0.0 < lo < hi:
        raise BracketError(f"invalid duration bracket {tau_bracket_fs}")
    c_lo = _peak_count(lambda2_nm, lo, pump, crystal, lambda1_grid, min_prominence)
    c_hi = _peak_count(lambda2_nm, hi, pump, crystal, lambda1_grid, min_prominence)
    if not (c_lo == 2 and c_hi == 1):
        raise BracketError(
            f"duration bracket {tau_bracket_fs} does not straddle the transition "
            f"(counts {c_lo} vs {c_hi} at lambda2 = {lambda2_nm} nm)"
        )
    while hi - lo > 1.0:
        mid = 0.5 * (lo + hi)
        if _peak_count(lambda2_nm, mid, pump, crystal, lambda1_grid, min_prominence) >= 2:
            lo = mid
        else:
            hi = mid
    return lo


def cod_r2(model_density: np.ndarray, data_counts: np.ndarray, scale: float = 1.0) -> float:
    """Coefficient of determination of scaled model against data.

    R**2 = 1 - SS_res / SS_tot with SS_tot about the data mean; at most 1,
    possibly negative.  Model and data must share abscissas (same length).
    """
    model = np.asarray(model_density, dtype=float)
    data = np.asarray(data_counts, dtype=float)
    if model.shape != data.shape:
        raise ValueError("model and data must share abscissas")
    ss_tot = float(np.sum((data - data.mean()) ** 2))
    if ss_tot == 0.0:
        raise ZeroVarianceError("R-squared is undefined for zero-variance data")
    ss_res = float(np.sum((data - scale * model) ** 2))
    return 1.0 - ss_res / ss_tot


@dataclass(frozen=True)
class ExperimentalSpectrum:
    """Measured coincidence records at a fixed idler wavelength."""

    lambda2_nm: float
    lambda1_nm: np.ndarray
    counts: np.ndarray
    std: np.ndarray
    hwp2: str = "sum"

    def __post_init__(self):
        lam = np.asarray(self.lambda1_nm, dtype=float)
        cnt = np.asarray(self.counts, dtype=float)
        err = np.asarray(self.std, dtype=float)
        if not (lam.shape == cnt.shape == err.shape) or lam.ndim != 1:
            raise ValueError("records must be matching 1-D arrays")
        if np.any(np.diff(lam) <= 0.0):
            raise ValueError("lambda1 records must be strictly increasing")
        if np.any(cnt < 0.0):
            raise ValueError("counts must be nonnegative")
        if np.any(err <= 0.0):
            raise ValueError("standard deviations must be positive")
        if self.hwp2 not in ("H", "V", "sum"):
            raise ValueError(f"hwp2 must be 'H', 'V' or 'sum', got {self.hwp2!r}")
        object.__setattr__(self, "lambda1_nm", lam)
        object.__setattr__(self, "counts", cnt)
        object.__setattr__(self, "std", err)


@dataclass(frozen=True)
class FitResult:
    """Axis-angle fit output: shared angle, per-curve scales and fit quality."""

    phi_rad: float
    per_curve_scale: tuple[float, ...]
    r2_per_curve: tuple[float, ...]
    residual_sum: float
    warnings: tuple[str, ...] = ()

    @property
    def phi_deg(self) -> float:
        return math.degrees(self.phi_rad)


def model_density(dataset: ExperimentalSpectrum, pump: PumpPulse, crystal: CrystalConfig) -> np.ndarray:
    """Raw model density at the dataset's abscissas, honoring its hwp2 routing."""
    omega1 = wavelength_to_omega(dataset.lambda1_nm)
    omega2 = wavelength_to_omega(dataset.lambda2_nm)
    if dataset.hwp2 == "H":
        return conditional_density_polarized(omega1, omega2, Polarization.H, pump, crystal)
    if dataset.hwp2 == "V":
        return conditional_density_polarized(omega1, omega2, Polarization.V, pump, crystal)
    return conditional_density_polarized(omega1, omega2, Polarization.H, pump, crystal) + conditional_density_polarized(
        omega1, omega2, Polarization.V, pump, crystal
    )


def _closed_form_scale(model: np.ndarray, data: np.ndarray, weights: np.ndarray) -> float:
    denom = float(np.sum(weights * model * model))
    if denom <= 0.0:
        raise FitConvergenceError("model vanishes on the data abscissas; no amplitude scale")
    return float(np.sum(weights * data * model)) / denom


def fit_axis_angle(
    datasets: list[ExperimentalSpectrum],
    pump: PumpPulse,
    crystal_template: CrystalConfig,
    angle_bracket_rad: tuple[float, float],
    weighted: bool = True,
    angle_tol_deg: float = 1e-4,
    coarse_points: int = 61,
) -> FitResult:
    """Fit the shared optic-axis angle to one or more coincidence spectra.

    At each trial angle the per-curve amplitude is the closed-form weighted
    least-squares scale (weights 1/std**2, or 1 when ``weighted`` is False);
    the only shape parameter searched is the angle, by golden-section on the
    coarse-scan minimum, refined until the interval is below
    ``angle_tol_deg``.  A coarse scan showing several local minima attaches
    an ambiguity warning to the result; a minimum pinned at a bracket end
    raises :class:`FitConvergenceError`.
    """
    if not datasets:
        raise ValueError("fit needs at least one dataset")
    lo, hi = float(angle_bracket_rad[0]), float(angle_bracket_rad[1])
    if not 0.0 < lo < hi < 0.5 * math.pi:
        raise FitConvergenceError(f"angle bracket {angle_bracket_rad} outside (0, pi/2)")

    weights = [1.0 / ds.std**2 if weighted else np.ones_like(ds.counts) for ds in datasets]

    def objective(phi: float) -> float:
        crystal = replace(crystal_template, phi_rad=phi)
        total = 0.0
        for ds, w in zip(datasets, weights):
            m = model_density(ds, pump, crystal)
            a = _closed_form_scale(m, ds.counts, w)
            total += float(np.sum(w * (ds.counts - a * m) ** 2))
        return total

    grid = np.linspace(lo, hi, coarse_points)
    vals = np.array([objective(p) for p in grid])
    interior_minima = [
        i for i in range(1, coarse_points - 1) if vals[i] < vals[i - 1] and vals[i] < vals[i + 1]
    ]
    warnings: list[str] = []
    if len(interior_minima) > 1:
        warnings.append(
            f"objective has {len(interior_minima)} local minima in the bracket; "
            "reporting the deepest"
        )
    best = int(np.argmin(vals))
    if best == 0 or best == coarse_points - 1:
        raise FitConvergenceError("objective minimum sits at the angle-bracket edge")

    a, b = float(grid[best - 1]), float(grid[best + 1])
    tol = math.radians(angle_tol_deg)
    h = b - a
    c = a + INV_PHI_SQ * h
    d = a + INV_PHI * h
    yc, yd = objective(c), objective(d)
    while h > tol:
        if yc < yd:
            b, d, yd = d, c, yc
            h = b - a
            c = a + INV_PHI_SQ * h
            yc = objective(c)
        else:
            a, c, yc = c, d, yd
            h = b - a
            d = a + INV_PHI * h
            yd = objective(d)
    phi_hat = 0.5 * (a + b)

    crystal = replace(crystal_template, phi_rad=phi_hat)
    scales, r2s = [], []
    residual_sum = 0.0
    for ds, w in zip(datasets, weights):
        m = model_density(ds, pump, crystal)
        scale = _closed_form_scale(m, ds.counts, w)
        scales.append(scale)
        r2s.append(cod_r2(m, ds.counts, scale))
        residual_sum += float(np.sum(w * (ds.counts - scale * m) ** 2))
    return FitResult(phi_hat, tuple(scales), tuple(r2s), residual_sum, tuple(warnings))


# --- experimental-spectrum CSV ingestion -------------------------------------


def read_experimental_csv(path) -> ExperimentalSpectrum:
    """Read coincidence records: '# lambda2_nm=...', '# hwp2=H|V|sum', then
    'lambda1_nm,counts,std' rows.  Any malformed line is a hard error with
    its line number."""
    lambda2 = None
    hwp2 = "sum"
    lam, counts, std = [], [], []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, rawline in enumerate(fh, start=1):
            line = rawline.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if not body or "=" not in body:
                    continue
                key, _, val = body.partition("=")
                key, val = key.strip(), val.strip()
                if key == "lambda2_nm":
                    try:
                        lambda2 = float(val)
                    except ValueError:
                        raise DataFormatError(f"{path}: line {lineno}: bad lambda2_nm {val!r}") from None
                elif key == "hwp2":
                    if val not in ("H", "V", "sum"):
                        raise DataFormatError(f"{path}: line {lineno}: hwp2 must be H, V or sum, got {val!r}")
                    hwp2 = val
                else:
                    raise DataFormatError(f"{path}: line {lineno}: unknown header key {key!r}")
                continue
            if line.startswith("lambda1_nm"):
                continue
            parts = line.split(",")
            if len(parts) != 3:
                raise DataFormatError(
                    f"{path}: line {lineno}: expected 'lambda1_nm,counts,std', got {line!r}"
                )
            try:
                row = [float(v) for v in parts]
            except ValueError:
                raise DataFormatError(f"{path}: line {lineno}: non-numeric field in {line!r}") from None
            lam.append(row[0])
            counts.append(row[1])
            std.append(row[2])
    if lambda2 is None:
        raise DataFormatError(f"{path}: missing '# lambda2_nm=' header")
    if not lam:
        raise DataFormatError(f"{path}: no data rows")
    try:
        return ExperimentalSpectrum(lambda2, np.asarray(lam), np.asarray(counts), np.asarray(std), hwp2)
    except ValueError as exc:
        raise DataFormatError(f"{path}: {exc}") from None


def write_experimental_csv(dataset: ExperimentalSpectrum, path) -> None:
    lines = [f"# lambda2_nm={float(dataset.lambda2_nm)!r}", f"# hwp2={dataset.hwp2}", "lambda1_nm,counts,std"]
    lines.extend(
        f"{float(x)!r},{float(c)!r},{float(s)!r}"
        for x, c, s in zip(dataset.lambda1_nm, dataset.counts, dataset.std)
    )
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
