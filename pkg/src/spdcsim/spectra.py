"""Joint and conditional spectral densities of pulsed collinear type-II SPDC.

The polarization-traced (mixed-state) two-frequency density is, up to a
proportionality constant that this package drops,

    rho(w1, w2) = exp(-(w1+w2-w0)**2 * tau**2 / (4 ln 2))
                  * [sinc(L*delta_12/2)**2 + sinc(L*delta_21/2)**2]

and the coincidence spectrum at fixed w2 is its slice over w1.  The two
sinc**2 terms are the polarization-resolved branches: the first has photon 1
ordinary (H), the second photon 1 extraordinary (V); the symmetrized
two-photon amplitude carries the same Gaussian with 8 ln 2 in place of
4 ln 2.  ``tau`` enters exactly as written; the ln-2 factors encode the
full-width-at-half-maximum convention for the pump duration.

Densities default to unit-maximum normalization because only spectral shapes
are meaningful once the proportionality constant is dropped.  For comparing
maps across pulse durations at fixed pulse energy (tau * E0**2 = const) the
``energy`` normalization multiplies raw values by ``energy_scale / tau``.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .dispersion import (
    SellmeierSet,
    mismatch_12,
    mismatch_21,
    wavelength_to_omega,
)

FOUR_LN2 = 4.0 * math.log(2.0)
EIGHT_LN2 = 8.0 * math.log(2.0)

NORMALIZATIONS = ("raw", "unit-max", "energy")


class Polarization(enum.Enum):
    """Polarization tag of the photon carrying the scanned frequency."""

    H = "H"
    V = "V"


@dataclass(frozen=True)
class PumpPulse:
    """Gaussian pump pulse: central wavelength in nm, FWHM duration in fs.

    ``energy_scale`` is the optional tau * E0**2 constant used by the
    ``energy`` map normalization; leave ``None`` for shape-only work.
    """

    lambda0_nm: float
    tau_fs: float
    energy_scale: float | None = None

    def __post_init__(self):
        if self.lambda0_nm <= 0.0:
            raise ValueError("pump central wavelength must be positive")
        if self.tau_fs <= 0.0:
            raise ValueError("pump duration must be positive")

    @property
    def omega0(self) -> float:
        """Pump central angular frequency in rad/fs."""
        return wavelength_to_omega(self.lambda0_nm)


@dataclass(frozen=True)
class CrystalConfig:
    """Crystal length in mm and optic-axis angle bound to a dispersion set."""

    length_mm: float
    phi_rad: float
    sellmeier: SellmeierSet

    def __post_init__(self):
        if self.length_mm <= 0.0:
            raise ValueError("crystal length must be positive")

    @property
    def length_um(self) -> float:
        return self.length_mm * 1000.0


def sinc(x):
    """sin(x)/x with sinc(0) = 1.

    Below |x| = 1e-4 a short Taylor series replaces the quotient; at that
    cutoff the truncation error is ~1e-18, far below double precision.
    """
    arr = np.asarray(x, dtype=float)
    small = np.abs(arr) < 1e-4
    safe = np.where(small, 1.0, arr)
    out = np.where(small, 1.0 - arr * arr / 6.0 + arr**4 / 120.0, np.sin(safe) / safe)
    return out if np.ndim(x) else float(out)


def pump_intensity_factor(omega1, omega2, pump: PumpPulse):
    """Gaussian pump spectral factor exp(-(w1+w2-w0)**2 tau**2 / (4 ln 2)).

    Equals 1 exactly on the energy-conservation line w1 + w2 = w0 and 1/2 at
    detuning 2 ln 2 / tau.  Depends on the frequencies only through their sum.
    """
    det = np.asarray(omega1, dtype=float) + np.asarray(omega2, dtype=float) - pump.omega0
    out = np.exp(-(det * det) * pump.tau_fs**2 / FOUR_LN2)
    return out if (np.ndim(omega1) or np.ndim(omega2)) else float(out)


def pump_amplitude_factor(omega1, omega2, pump: PumpPulse):
    """Amplitude-level pump factor (8 ln 2 convention); square of its modulus
    is :func:`pump_intensity_factor`."""
    det = np.asarray(omega1, dtype=float) + np.asarray(omega2, dtype=float) - pump.omega0
    out = np.exp(-(det * det) * pump.tau_fs**2 / EIGHT_LN2)
    return out if (np.ndim(omega1) or np.ndim(omega2)) else float(out)


def conditional_density_polarized(omega1, omega2, which: Polarization, pump: PumpPulse, crystal: CrystalConfig):
    """Polarization-resolved conditional density at (w1, w2), raw scale.

    ``which`` names the polarization of the photon carrying ``omega1``:
    H pairs with delta_12 (photon 1 ordinary), V with delta_21.
    """
    if which is Polarization.H:
        delta = mismatch_12(omega1, omega2, crystal.phi_rad, crystal.sellmeier)
    elif which is Polarization.V:
        delta = mismatch_21(omega1, omega2, crystal.phi_rad, crystal.sellmeier)
    else:
        raise ValueError(f"unknown polarization {which!r}")
    s = sinc(0.5 * crystal.length_um * delta)
    return pump_intensity_factor(omega1, omega2, pump) * s * s


def joint_density(omega1, omega2, pump: PumpPulse, crystal: CrystalConfig):
    """Mixed-state two-frequency density (sum of the two polarized branches)."""
    return conditional_density_polarized(omega1, omega2, Polarization.H, pump, crystal) + conditional_density_polarized(
        omega1, omega2, Polarization.V, pump, crystal
    )


def wavelength_grid(start_nm: float, stop_nm: float, step_nm: float) -> np.ndarray:
    """Uniform wavelength grid including both endpoints (up to rounding)."""
    if step_nm <= 0.0 or stop_nm <= start_nm:
        raise ValueError("grid requires stop > start and step > 0")
    n = int(round((stop_nm - start_nm) / step_nm)) + 1
    return start_nm + step_nm * np.arange(n)


def gaussian_response_kernel(step_nm: float, fwhm_nm: float) -> np.ndarray:
    """Discrete unit-area Gaussian kernel for instrument-response smoothing."""
    if fwhm_nm <= 0.0:
        raise ValueError("instrument FWHM must be positive")
    sigma = fwhm_nm / (2.0 * math.sqrt(2.0 * math.log(2.0)))
    half = max(1, int(math.ceil(4.0 * sigma / step_nm)))
    x = np.arange(-half, half + 1) * step_nm
    kernel = np.exp(-0.5 * (x / sigma) ** 2)
    return kernel / kernel.sum()


def _convolve_same(values: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    return np.convolve(values, kernel, mode="same")


@dataclass(frozen=True)
class Spectrum:
    """1-D coincidence spectrum over a lambda1 grid at fixed lambda2."""

    lambda2_nm: float
    lambda1_nm: np.ndarray
    density: np.ndarray
    normalization: str = "raw"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        lam = np.asarray(self.lambda1_nm, dtype=float)
        dens = np.asarray(self.density, dtype=float)
        if lam.ndim != 1 or lam.shape != dens.shape:
            raise ValueError("lambda1 grid and density must be matching 1-D arrays")
        if np.any(np.diff(lam) <= 0.0):
            raise ValueError("lambda1 grid must be strictly increasing")
        if np.any(dens < 0.0):
            raise ValueError("densities must be nonnegative")
        object.__setattr__(self, "lambda1_nm", lam)
        object.__setattr__(self, "density", dens)

    @property
    def step_nm(self) -> float:
        return float(self.lambda1_nm[1] - self.lambda1_nm[0])


@dataclass(frozen=True)
class JointSpectralMap:
    """2-D joint density sampled on wavelength axes; values[i, j] pairs
    lambda1_nm[i] with lambda2_nm[j]."""

    lambda1_nm: np.ndarray
    lambda2_nm: np.ndarray
    values: np.ndarray
    normalization: str = "raw"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        l1 = np.asarray(self.lambda1_nm, dtype=float)
        l2 = np.asarray(self.lambda2_nm, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if v.shape != (l1.size, l2.size):
            raise ValueError("map values must have shape (len(lambda1), len(lambda2))")
        if np.any(np.diff(l1) <= 0.0) or np.any(np.diff(l2) <= 0.0):
            raise ValueError("map axes must be strictly increasing")
        if np.any(v < 0.0):
            raise ValueError("densities must be nonnegative")
        object.__setattr__(self, "lambda1_nm", l1)
        object.__setattr__(self, "lambda2_nm", l2)
        object.__setattr__(self, "values", v)


def conditional_spectrum(
    lambda2_nm: float,
    lambda1_nm: np.ndarray,
    pump: PumpPulse,
    crystal: CrystalConfig,
    normalization: str = "unit-max",
    convolve_fwhm_nm: float | None = None,
) -> Spectrum:
    """Coincidence spectrum at fixed lambda2: sum of the H and V branches.

    Optional Gaussian instrument-response smoothing (``convolve_fwhm_nm``) is
    applied before normalization; ``unit-max`` rescales the maximum to
    exactly 1 and is the default, ``raw`` keeps the branch sum.
    """
    if normalization not in ("raw", "unit-max"):
        raise ValueError(f"unknown spectrum normalization {normalization!r}")
    lam1 = np.asarray(lambda1_nm, dtype=float)
    omega1 = wavelength_to_omega(lam1)
    omega2 = wavelength_to_omega(float(lambda2_nm))
    dens = conditional_density_polarized(omega1, omega2, Polarization.H, pump, crystal) + conditional_density_polarized(
        omega1, omega2, Polarization.V, pump, crystal
    )
    if convolve_fwhm_nm is not None:
        step = float(lam1[1] - lam1[0])
        dens = _convolve_same(dens, gaussian_response_kernel(step, convolve_fwhm_nm))
    if normalization == "unit-max":
        peak = dens.max()
        if peak > 0.0:
            dens = dens / peak
    meta = {
        "lambda2_nm": float(lambda2_nm),
        "lambda0_nm": pump.lambda0_nm,
        "tau_fs": pump.tau_fs,
        "length_mm": crystal.length_mm,
        "axis_angle_deg": math.degrees(crystal.phi_rad),
        "sellmeier": crystal.sellmeier.name,
        "normalization": normalization,
        "convolve_fwhm_nm": convolve_fwhm_nm,
    }
    return Spectrum(float(lambda2_nm), lam1, dens, normalization, meta)


def _map_block(lam1_block: np.ndarray, omega2: np.ndarray, pump: PumpPulse, crystal: CrystalConfig) -> np.ndarray:
    omega1 = wavelength_to_omega(lam1_block)[:, None]
    return joint_density(omega1, omega2[None, :], pump, crystal)


def joint_density_map(
    lambda1_nm: np.ndarray,
    lambda2_nm: np.ndarray,
    pump: PumpPulse,
    crystal: CrystalConfig,
    normalization: str = "unit-max",
    convolve_fwhm_nm: float | None = None,
    workers: int = 1,
) -> JointSpectralMap:
    """Mixed-state joint density on a wavelength grid.

    Rows are independent, so ``workers > 1`` evaluates row blocks on a
    thread pool; every element goes through the same scalar operations, so
    parallel and serial results are bit-identical.

    ``energy`` normalization multiplies raw values by
    ``pump.energy_scale / pump.tau_fs`` so maps computed for different pulse
    durations at fixed pulse energy share a common scale.
    """
    if normalization not in NORMALIZATIONS:
        raise ValueError(f"unknown map normalization {normalization!r}")
    lam1 = np.asarray(lambda1_nm, dtype=float)
    lam2 = np.asarray(lambda2_nm, dtype=float)
    omega2 = wavelength_to_omega(lam2)

    n_blocks = max(1, min(int(workers) * 4, lam1.size)) if workers > 1 else 1
    bounds = np.linspace(0, lam1.size, n_blocks + 1).astype(int)
    blocks = [(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]

    if workers > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=int(workers)) as pool:
            parts = list(pool.map(lambda ab: _map_block(lam1[ab[0] : ab[1]], omega2, pump, crystal), blocks))
        values = np.vstack(parts)
    else:
        values = np.vstack([_map_block(lam1[a:b], omega2, pump, crystal) for a, b in blocks])

    if convolve_fwhm_nm is not None:
        k1 = gaussian_response_kernel(float(lam1[1] - lam1[0]), convolve_fwhm_nm)
        k2 = gaussian_response_kernel(float(lam2[1] - lam2[0]), convolve_fwhm_nm)
        values = np.apply_along_axis(_convolve_same, 0, values, k1)
        values = np.apply_along_axis(_convolve_same, 1, values, k2)

    if normalization == "unit-max":
        peak = values.max()
        if peak > 0.0:
            values = values / peak
    elif normalization == "energy":
        if pump.energy_scale is None:
            raise ValueError("energy normalization requires pump.energy_scale")
        values = values * (pump.energy_scale / pump.tau_fs)

    meta = {
        "lambda0_nm": pump.lambda0_nm,
        "tau_fs": pump.tau_fs,
        "energy_scale": pump.energy_scale,
        "length_mm": crystal.length_mm,
        "axis_angle_deg": math.degrees(crystal.phi_rad),
        "sellmeier": crystal.sellmeier.name,
        "normalization": normalization,
        "convolve_fwhm_nm": convolve_fwhm_nm,
    }
    return JointSpectralMap(lam1, lam2, values, normalization, meta)


# --- CSV serialization ------------------------------------------------------
#
# Headers are comment lines '# key=value' sorted by key; they are part of the
# golden-file contract, as is the shortest round-trip float formatting.


def _header_lines(meta: dict) -> list[str]:
    lines = []
    for key in sorted(meta):
        val = meta[key]
        if isinstance(val, str):
            lines.append(f"# {key}={val!r}")
        elif isinstance(val, (np.floating, np.integer)):
            lines.append(f"# {key}={val.item()}")
        else:
            lines.append(f"# {key}={val}")
    return lines


def write_spectrum_csv(spectrum: Spectrum, path) -> None:
    lines = _header_lines(spectrum.meta)
    lines.append("lambda1_nm,density")
    lines.extend(f"{float(x)!r},{float(y)!r}" for x, y in zip(spectrum.lambda1_nm, spectrum.density))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_spectrum_csv(path) -> Spectrum:
    meta: dict = {}
    lam, dens = [], []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, rawline in enumerate(fh, start=1):
            line = rawline.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" in body:
                    key, _, val = body.partition("=")
                    meta[key.strip()] = val.strip().strip("'")
                continue
            if line.startswith("lambda1_nm"):
                continue
            parts = line.split(",")
            if len(parts) != 2:
                raise ValueError(f"{path}: line {lineno}: expected 'lambda1_nm,density', got {line!r}")
            try:
                lam.append(float(parts[0]))
                dens.append(float(parts[1]))
            except ValueError as exc:
                raise ValueError(f"{path}: line {lineno}: {exc}") from None
    lambda2 = float(meta.get("lambda2_nm", "nan"))
    normalization = meta.get("normalization", "raw")
    if normalization not in ("raw", "unit-max"):
        normalization = "raw"
    return Spectrum(lambda2, np.asarray(lam), np.asarray(dens), normalization, meta)


def write_map_csv(jmap: JointSpectralMap, path) -> None:
    lines = _header_lines(jmap.meta)
    lines.append("lambda1_nm\\lambda2_nm," + ",".join(repr(float(v)) for v in jmap.lambda2_nm))
    for i, lam1 in enumerate(jmap.lambda1_nm):
        lines.append(f"{float(lam1)!r}," + ",".join(repr(float(v)) for v in jmap.values[i]))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_map_csv(path) -> JointSpectralMap:
    meta: dict = {}
    lam2 = None
    lam1, rows = [], []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, rawline in enumerate(fh, start=1):
            line = rawline.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" in body:
                    key, _, val = body.partition("=")
                    meta[key.strip()] = val.strip().strip("'")
                continue
            parts = line.split(",")
            if lam2 is None:
                lam2 = np.asarray([float(v) for v in parts[1:]])
                continue
            try:
                lam1.append(float(parts[0]))
                rows.append([float(v) for v in parts[1:]])
            except ValueError as exc:
                raise ValueError(f"{path}: line {lineno}: {exc}") from None
    if lam2 is None:
        raise ValueError(f"{path}: missing map header line")
    return JointSpectralMap(np.asarray(lam1), lam2, np.asarray(rows), meta.get("normalization", "raw"), meta)
