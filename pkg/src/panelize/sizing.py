"""Stiffened-panel analysis used by the per-panel sizing problem.

The built-in analyzer is a closed-form surrogate for the linear static and
buckling solves of a simply supported stiffened panel:

* stiffeners run along x (panel length ``a``) and are smeared over the width
  ``b``; membrane stresses are the running loads over the effective thickness
  ``t_eff = t + n_stiff * t_stiff * h_stiff / b``;
* buckling uses a Rayleigh-Ritz double sine series on an orthotropic
  Kirchhoff plate whose D11 carries the smeared (eccentric) blade stiffeners.

Loads follow the usual sign convention: tension positive, so a panel in
compression has ``nx < 0``. ``lambda_p`` is the factor on the applied loads
at first buckling.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Protocol

import numpy as np
from scipy import linalg

from .errors import AnalysisError

NON_CRITICAL = "NON_CRITICAL"
LAMBDA_MIN = 1.05


def count_design_variables(n_spars: int, n_ribs: int) -> int:
    """Three sizing variables for each of the (spars + 1) x (ribs + 1) panels."""
    if n_spars < 0 or n_ribs < 0:
        raise ValueError("spar and rib counts must be non-negative")
    return 3 * (n_spars + 1) * (n_ribs + 1)


@dataclass(frozen=True)
class Material:
    E: float
    nu: float
    rho: float
    sigma_y: float

    def __post_init__(self):
        if not (self.E > 0 and 0 <= self.nu < 0.5 and self.rho > 0 and self.sigma_y > 0):
            raise AnalysisError(f"invalid material {self}")


ALUMINUM = Material(E=71e9, nu=0.33, rho=2800.0, sigma_y=345e6)


@dataclass(frozen=True)
class PanelDesign:
    t: float
    t_stiff: float
    h_stiff: float

    def as_array(self) -> np.ndarray:
        return np.array([self.t, self.t_stiff, self.h_stiff], dtype=float)

    @classmethod
    def from_array(cls, x) -> "PanelDesign":
        return cls(float(x[0]), float(x[1]), float(x[2]))


VARIABLES = ("t", "t_stiff", "h_stiff")


@dataclass(frozen=True)
class DesignBounds:
    t: tuple
    t_stiff: tuple
    h_stiff: tuple

    def __post_init__(self):
        for name in VARIABLES:
            lo, hi = getattr(self, name)
            if not (0 < lo <= hi):
                raise AnalysisError(f"bounds for {name} must satisfy 0 < min <= max, got {(lo, hi)}")

    @property
    def lower(self) -> np.ndarray:
        return np.array([self.t[0], self.t_stiff[0], self.h_stiff[0]])

    @property
    def upper(self) -> np.ndarray:
        return np.array([self.t[1], self.t_stiff[1], self.h_stiff[1]])

    def contains(self, d: PanelDesign) -> bool:
        x = d.as_array()
        return bool(np.all(x >= self.lower) and np.all(x <= self.upper))


@dataclass(frozen=True)
class PanelLoads:
    nx: float = 0.0
    ny: float = 0.0
    nxy: float = 0.0
    boundary: str = "SIMPLY_SUPPORTED"

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.nx, self.ny, self.nxy)):
            raise AnalysisError("panel loads must be finite")
        if self.boundary != "SIMPLY_SUPPORTED":
            raise AnalysisError(f"unsupported boundary condition {self.boundary!r}")

    def scaled(self, f: float) -> "PanelLoads":
        return replace(self, nx=self.nx * f, ny=self.ny * f, nxy=self.nxy * f)

    @property
    def is_zero(self) -> bool:
        return self.nx == 0 and self.ny == 0 and self.nxy == 0


@dataclass(frozen=True)
class PanelGeometry:
    """Planform descriptor: length a (along the stiffeners), width b, skin area,
    stiffener count and the run length of one stiffener."""

    a: float
    b: float
    area: float
    n_stiff: int = 0
    stiff_length: float = 0.0

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0 and self.area > 0):
            raise AnalysisError(f"panel geometry needs positive a, b and area, got {self}")
        if self.n_stiff < 0 or self.stiff_length < 0:
            raise AnalysisError("stiffener count and length must be non-negative")

    @classmethod
    def rectangle(cls, a, b, n_stiff=0):
        return cls(a, b, a * b, n_stiff, a if n_stiff else 0.0)


@dataclass
class AnalysisResult:
    sigma_vm_max: float
    lambda_p: Optional[float]          # None when no load combination can buckle the panel
    weight: float
    gradients: Optional[dict] = None   # d(weight|lambda_p)/d(t, t_stiff, h_stiff)

    @property
    def non_critical(self) -> bool:
        return self.lambda_p is None

    def lambda_record(self):
        return NON_CRITICAL if self.lambda_p is None else self.lambda_p


class Analyzer(Protocol):
    def analyze(self, design: PanelDesign, material: Material, loads: PanelLoads,
                geom: PanelGeometry, gradients: bool = False) -> AnalysisResult: ...


# -- surrogate pieces ------------------------------------------------------------

def effective_thickness(d: PanelDesign, geom: PanelGeometry) -> float:
    return d.t + geom.n_stiff * d.t_stiff * d.h_stiff / geom.b


def von_mises_membrane(loads: PanelLoads, t_eff: float) -> float:
    sx, sy, txy = loads.nx / t_eff, loads.ny / t_eff, loads.nxy / t_eff
    return math.sqrt(max(sx * sx - sx * sy + sy * sy + 3.0 * txy * txy, 0.0))


def plate_stiffness(t, ts, hs, material: Material, geom: PanelGeometry):
    """(D11, D22, H) of the smeared plate and their derivatives w.r.t. (t, ts, hs).

    Works on scalars or numpy arrays. The stiffener term is the blade's own
    bending plus the transfer term of its offset ``e = (t + hs)/2`` about the
    skin/stiffener neutral axis.
    """
    E, nu = material.E, material.nu
    c = E / (12.0 * (1.0 - nu * nu))
    D = c * t ** 3
    dD_dt = 3.0 * c * t ** 2
    r = geom.n_stiff / geom.b
    own = E * r * ts * hs ** 3 / 12.0
    Ap = r * ts * hs                      # smeared stiffener area per unit width
    e = 0.5 * (t + hs)
    q = t * Ap / (t + Ap)
    tr = E * q * e ** 2
    # derivatives of the transfer term
    dAp = (0.0 * t, r * hs, r * ts)                       # wrt t, ts, hs
    dq_dt_direct = Ap ** 2 / (t + Ap) ** 2
    dq_dAp = t ** 2 / (t + Ap) ** 2
    de = (0.5, 0.0, 0.5)
    dq = (dq_dt_direct + dq_dAp * dAp[0], dq_dAp * dAp[1], dq_dAp * dAp[2])
    dtr = tuple(E * (dq[i] * e ** 2 + 2.0 * q * e * de[i]) for i in range(3))
    down = (0.0 * t, E * r * hs ** 3 / 12.0, E * r * ts * hs ** 2 / 4.0)
    D11 = D + own + tr
    dD11 = (dD_dt + down[0] + dtr[0], down[1] + dtr[1], down[2] + dtr[2])
    zero = 0.0 * t
    dD = (dD_dt, zero, zero)
    return (D11, D, D), (dD11, dD, dD)


def _mode_grid(n_terms):
    m, n = np.meshgrid(np.arange(1, n_terms + 1), np.arange(1, n_terms + 1), indexing="ij")
    return m.ravel().astype(float), n.ravel().astype(float)


def _ritz_matrices(loads: PanelLoads, geom: PanelGeometry, n_terms):
    """Diagonal of K per unit of (D11, D22, H) and the load matrix G (tension positive)."""
    a, b = geom.a, geom.b
    m, n = _mode_grid(n_terms)
    am, bn = (m / a) ** 2, (n / b) ** 2
    s = a * b / 4.0
    basis = (s * math.pi ** 4 * am ** 2, s * math.pi ** 4 * bn ** 2, s * math.pi ** 4 * 2.0 * am * bn)
    gdiag = s * math.pi ** 2 * (loads.nx * am + loads.ny * bn)
    G = np.diag(gdiag)
    if loads.nxy != 0.0:
        M1, M2 = np.meshgrid(m, m, indexing="ij")
        N1, N2 = np.meshgrid(n, n, indexing="ij")
        odd = ((M1 + M2) % 2 == 1) & ((N1 + N2) % 2 == 1)
        with np.errstate(divide="ignore", invalid="ignore"):
            C = 8.0 * loads.nxy * M1 * N1 * M2 * N2 / ((M2 ** 2 - M1 ** 2) * (N1 ** 2 - N2 ** 2))
        G = G + np.where(odd, C, 0.0)
    return basis, G


@dataclass
class SmearedPlateSurrogate:
    """Closed-form analyzer (see module docstring).

    ``n_terms`` sine terms are used in each direction; with no shear the
    stiffness and load matrices are both diagonal and the eigenproblem
    reduces to a minimum over modes.
    """

    n_terms: int = 12

    def buckling(self, design: PanelDesign, material: Material, loads: PanelLoads,
                 geom: PanelGeometry, gradients=False):
        (D11, D22, H), dstiff = plate_stiffness(design.t, design.t_stiff, design.h_stiff,
                                                material, geom)
        basis, G = _ritz_matrices(loads, geom, self.n_terms)
        k = D11 * basis[0] + D22 * basis[1] + H * basis[2]
        Gm = -G                                     # compression drives buckling
        if loads.nxy == 0.0:
            g = np.diag(Gm)
            with np.errstate(divide="ignore"):
                ratio = np.where(g > 0, k / np.where(g > 0, g, 1.0), np.inf)
            i = int(np.argmin(ratio))
            if not np.isfinite(ratio[i]):
                return None, None
            lam = float(ratio[i])
            if not gradients:
                return lam, None
            grads = [float((dstiff[0][j] * basis[0][i] + dstiff[1][j] * basis[1][i]
                            + dstiff[2][j] * basis[2][i]) / g[i]) for j in range(3)]
            return lam, grads
        # generalised problem  (-G) phi = mu K phi,  lambda = 1 / mu_max
        w = 1.0 / np.sqrt(k)
        S = Gm * w[:, None] * w[None, :]
        mu, vec = linalg.eigh(S)
        if mu[-1] <= 0.0:
            return None, None
        lam = 1.0 / float(mu[-1])
        if not gradients:
            return lam, None
        phi = vec[:, -1] * w                        # K-normalised mode
        grads = []
        for j in range(3):
            dk = dstiff[0][j] * basis[0] + dstiff[1][j] * basis[1] + dstiff[2][j] * basis[2]
            # d lambda = phi' dK phi / phi' (-G) phi, and phi' (-G) phi = mu = 1/lambda
            grads.append(float(lam * np.dot(phi * dk, phi)))
        return lam, grads

    def analyze(self, design: PanelDesign, material: Material, loads: PanelLoads,
                geom: PanelGeometry, gradients: bool = False) -> AnalysisResult:
        if min(design.t, design.t_stiff) <= 0 or design.h_stiff < 0:
            raise AnalysisError(f"non-positive design values {design}")
        t_eff = effective_thickness(design, geom)
        sigma = von_mises_membrane(loads, t_eff)
        stiff_vol = geom.n_stiff * design.t_stiff * design.h_stiff * geom.stiff_length
        weight = material.rho * (design.t * geom.area + stiff_vol)
        lam, dlam = (None, None) if loads.is_zero else self.buckling(design, material, loads, geom,
                                                                       gradients)
        grads = None
        if gradients:
            rho, n, L = material.rho, geom.n_stiff, geom.stiff_length
            grads = {"weight": [rho * geom.area, rho * n * design.h_stiff * L,
                                rho * n * design.t_stiff * L],
                     "lambda_p": dlam}
        return AnalysisResult(sigma, lam, weight, grads)


DEFAULT_ANALYZER = SmearedPlateSurrogate()


def analyze_panel(design: PanelDesign, material: Material, loads: PanelLoads,
                  geom: PanelGeometry, analyzer: Optional[Analyzer] = None,
                  gradients: bool = False) -> AnalysisResult:
    return (analyzer or DEFAULT_ANALYZER).analyze(design, material, loads, geom, gradients)


def analyze_grid(t, ts, hs, material: Material, loads: PanelLoads, geom: PanelGeometry,
                 n_terms: int = 12):
    """Vectorised surrogate over arrays of designs (no-shear loads only).

    Returns ``(sigma_vm_max, lambda_p, weight)`` arrays; ``lambda_p`` is
    ``inf`` where the panel cannot buckle.
    """
    if loads.nxy != 0.0:
        raise AnalysisError("analyze_grid handles loads without shear only")
    t, ts, hs = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (t, ts, hs)))
    t_eff = t + geom.n_stiff * ts * hs / geom.b
    sx, sy = loads.nx / t_eff, loads.ny / t_eff
    sigma = np.sqrt(sx * sx - sx * sy + sy * sy)
    weight = material.rho * (t * geom.area + geom.n_stiff * ts * hs * geom.stiff_length)
    (D11, D22, H), _ = plate_stiffness(t, ts, hs, material, geom)
    lam = np.full(t.shape, np.inf)
    if not loads.is_zero:
        m, n = _mode_grid(n_terms)
        am, bn = (m / geom.a) ** 2, (n / geom.b) ** 2
        g = -(loads.nx * am + loads.ny * bn) / math.pi ** 2
        for i in np.flatnonzero(g > 0):
            k = D11 * am[i] ** 2 + D22 * bn[i] ** 2 + 2.0 * H * am[i] * bn[i]
            np.minimum(lam, k / g[i], out=lam)
    return sigma, lam, weight


# -- constraints -----------------------------------------------------------------

@dataclass(frozen=True)
class Constraints:
    lambda_min: float = LAMBDA_MIN
    tol: float = 0.0       # relative slack; 0 keeps the strict inequalities

    def violation(self, res: AnalysisResult, material: Material) -> float:
        """Largest relative constraint violation (<= 0 means all satisfied)."""
        v_sigma = res.sigma_vm_max / material.sigma_y - 1.0
        v_lam = -np.inf if res.lambda_p is None else 1.0 - res.lambda_p / self.lambda_min
        return float(max(v_sigma, v_lam))

    def feasible(self, res: AnalysisResult, material: Material) -> bool:
        if self.tol > 0:
            return self.violation(res, material) <= self.tol
        lam_ok = res.lambda_p is None or res.lambda_p > self.lambda_min
        return bool(lam_ok and res.sigma_vm_max < material.sigma_y)


# -- gradient check --------------------------------------------------------------

@dataclass
class GradientReport:
    rows: list = field(default_factory=list)   # (quantity, variable, analytic, fd, rel_err)
    tol: float = 1e-4

    @property
    def failing(self) -> list:
        return [r for r in self.rows if not r[4] <= self.tol]

    @property
    def ok(self) -> bool:
        return not self.failing


def gradient_check(analyzer, design: PanelDesign, material: Material, loads: PanelLoads,
                   geom: PanelGeometry, rel_step: float = 1e-6, tol: float = 1e-4) -> GradientReport:
    """Compare analytic sensitivities with central finite differences."""
    base = analyzer.analyze(design, material, loads, geom, gradients=True)
    x0 = design.as_array()
    report = GradientReport(tol=tol)
    for q in ("weight", "lambda_p"):
        if base.gradients.get(q) is None:
            continue
        for j, name in enumerate(VARIABLES):
            h = rel_step * max(abs(x0[j]), 1e-12)
            vals = []
            for sgn in (1.0, -1.0):
                x = x0.copy()
                x[j] += sgn * h
                r = analyzer.analyze(PanelDesign.from_array(x), material, loads, geom)
                vals.append(getattr(r, q))
            fd = (vals[0] - vals[1]) / (2.0 * h)
            an = base.gradients[q][j]
            err = abs(an - fd) / max(abs(fd), abs(an), 1e-300)
            if an == 0.0 and fd == 0.0:
                err = 0.0
            report.rows.append((q, name, an, fd, err))
    return report
