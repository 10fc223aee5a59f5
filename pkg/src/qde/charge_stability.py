"""Classical charge-stability diagrams for the qubit and centre triple dots.

Energies are in units of the on-site repulsion U.  Ground configurations
come from exhaustive enumeration; ties go to the lexicographically
smallest occupation tuple.
"""

import itertools
from dataclasses import dataclass, field

import numpy as np

TIE_TOL = 1e-12
QUBIT_OCCUPATIONS = (0, 1, 2)
CENTER_OCCUPATIONS = (0, 1, 2, 3, 4)


@dataclass(frozen=True, order=True)
class ChargeConfig:
    occupations: tuple

    def __post_init__(self):
        if any(n < 0 for n in self.occupations):
            raise ValueError(f"negative occupation in {self.occupations}")

    @property
    def total(self):
        return sum(self.occupations)

    def mirrored(self):
        return ChargeConfig(tuple(reversed(self.occupations)))

    def __str__(self):
        return "(" + ",".join(str(n) for n in self.occupations) + ")"


@dataclass(frozen=True)
class RxStabilityParams:
    V: float = 0.33
    eps2: float = 0.90
    U: float = 1.0


@dataclass(frozen=True)
class CenterStabilityParams:
    U_c: float = 0.91
    V_c: float = 0.28
    eps_m: float = 2.1
    U: float = 1.0


def rx_configs():
    return np.array(list(itertools.product(QUBIT_OCCUPATIONS, repeat=3)), dtype=int)


def center_configs():
    return np.array(list(itertools.product(QUBIT_OCCUPATIONS, CENTER_OCCUPATIONS, QUBIT_OCCUPATIONS)),
                    dtype=int)


def rx_detunings(eps, v_m, eps2):
    """(eps1, eps2, eps3) from the detuning coordinates."""
    return v_m + eps2 - eps, eps2 + 0.0 * eps, v_m + eps2 + eps


def rx_energy(n, eps1, eps2, eps3, p):
    n1, n2, n3 = n
    onsite = sum(0.5 * p.U * k * (k - 1) for k in n)
    return -eps1 * n1 - eps2 * n2 - eps3 * n3 + onsite + p.V * (n1 * n2 + n2 * n3)


def center_detunings(eps_c, v_mc, eps_m):
    """(eps_a3, eps_b1) from the centre detuning coordinates."""
    return v_mc + eps_m + eps_c, v_mc + eps_m - eps_c


def center_energy(n, eps_a3, eps_b1, p):
    na, nc, nb = n
    onsite = 0.5 * p.U * (na * (na - 1) + nb * (nb - 1)) + 0.5 * p.U_c * nc * (nc - 1)
    return -eps_a3 * na - eps_b1 * nb - p.eps_m * nc + onsite + p.V_c * (na * nc + nc * nb)


def _argmin(configs, energy_fn, shape):
    """Running minimum over configs in lexicographic order; later configs must win by > TIE_TOL."""
    best = np.full(shape, np.inf)
    second = np.full(shape, np.inf)
    idx = np.zeros(shape, dtype=int)
    for k, n in enumerate(configs):
        e = energy_fn(tuple(int(v) for v in n))
        better = e < best - TIE_TOL
        second = np.where(better, best, np.minimum(second, e))
        best = np.where(better, e, best)
        idx = np.where(better, k, idx)
    tied = second - best <= TIE_TOL
    return best, idx, tied


def rx_ground_config(eps, v_m, p=RxStabilityParams()):
    e1, e2, e3 = rx_detunings(eps, v_m, p.eps2)
    best, idx, _ = _argmin(rx_configs(), lambda n: rx_energy(n, e1, e2, e3, p), ())
    return ChargeConfig(tuple(int(v) for v in rx_configs()[int(idx)])), float(best)


def center_ground_config(eps_c, v_mc, p=CenterStabilityParams()):
    ea, eb = center_detunings(eps_c, v_mc, p.eps_m)
    confs = center_configs()
    best, idx, _ = _argmin(confs, lambda n: center_energy(n, ea, eb, p), ())
    return ChargeConfig(tuple(int(v) for v in confs[int(idx)])), float(best)


@dataclass(frozen=True)
class GridSpec:
    x_min: float
    x_max: float
    nx: int
    y_min: float
    y_max: float
    ny: int

    @staticmethod
    def _axis(lo, hi, n):
        if n < 1 or not (np.isfinite(lo) and np.isfinite(hi)):
            raise ValueError("grid needs finite bounds and at least one point")
        if n == 1:
            return np.array([0.5 * (lo + hi)])
        # built about the centre so a symmetric range is exactly antisymmetric
        step = (hi - lo) / (n - 1)
        return 0.5 * (lo + hi) + (np.arange(n) - (n - 1) / 2) * step

    @property
    def x(self):
        return self._axis(self.x_min, self.x_max, self.nx)

    @property
    def y(self):
        return self._axis(self.y_min, self.y_max, self.ny)


RX_GRID = GridSpec(-1.5, 1.5, 401, -0.5, 1.5, 401)
CENTER_GRID = GridSpec(-1.5, 1.5, 401, -2.0, 0.5, 401)


@dataclass
class StabilityMap:
    which: str
    x: np.ndarray
    y: np.ndarray
    # configs[iy, ix] is the occupation tuple of the ground state
    configs: np.ndarray
    energy: np.ndarray
    tied: np.ndarray
    boundaries: list = field(default_factory=list)

    @property
    def axis_names(self):
        return ("eps", "V_m") if self.which == "rx" else ("eps_c", "V_mc")

    def config_at(self, iy, ix):
        return ChargeConfig(tuple(int(v) for v in self.configs[iy, ix]))

    def regions(self):
        return sorted({ChargeConfig(tuple(int(v) for v in c)) for c in self.configs.reshape(-1, 3)})

    def adjacent_pairs(self):
        return {frozenset((a, b)) for _, _, a, b in self.boundaries}

    def rows(self):
        """Row-major (x, y, n1, n2, n3, energy) tuples."""
        out = []
        for iy, yv in enumerate(self.y):
            for ix, xv in enumerate(self.x):
                n = self.configs[iy, ix]
                out.append((float(xv), float(yv), int(n[0]), int(n[1]), int(n[2]), float(self.energy[iy, ix])))
        return out


def _boundaries(x, y, configs):
    """Midpoints between neighbouring cells whose ground configs differ."""
    out = []

    def cfg(iy, ix):
        return ChargeConfig(tuple(int(v) for v in configs[iy, ix]))

    horiz = np.any(configs[:, 1:] != configs[:, :-1], axis=-1)
    vert = np.any(configs[1:, :] != configs[:-1, :], axis=-1)
    for iy, ix in zip(*np.nonzero(horiz)):
        out.append((0.5 * (x[ix] + x[ix + 1]), y[iy], cfg(iy, ix), cfg(iy, ix + 1)))
    for iy, ix in zip(*np.nonzero(vert)):
        out.append((x[ix], 0.5 * (y[iy] + y[iy + 1]), cfg(iy, ix), cfg(iy + 1, ix)))
    out.sort(key=lambda b: (b[1], b[0]))
    return out


def stability_diagram(which, grid=None, params=None, with_boundaries=True):
    if which == "rx":
        grid = grid or RX_GRID
        p = params or RxStabilityParams()
        confs = rx_configs()
        xx, yy = np.meshgrid(grid.x, grid.y)
        e1, e2, e3 = rx_detunings(xx, yy, p.eps2)
        best, idx, tied = _argmin(confs, lambda n: rx_energy(n, e1, e2, e3, p), xx.shape)
    elif which == "center":
        grid = grid or CENTER_GRID
        p = params or CenterStabilityParams()
        confs = center_configs()
        xx, yy = np.meshgrid(grid.x, grid.y)
        ea, eb = center_detunings(xx, yy, p.eps_m)
        best, idx, tied = _argmin(confs, lambda n: center_energy(n, ea, eb, p), xx.shape)
    else:
        raise ValueError(f"unknown diagram {which!r}; expected 'rx' or 'center'")
    configs = confs[idx]
    bounds = _boundaries(grid.x, grid.y, configs) if with_boundaries else []
    return StabilityMap(which, grid.x, grid.y, configs, best, tied, bounds)


def mirror_mismatches(m):
    """Cells where the x -> -x mirror fails (energy differs, or configs differ off a tie)."""
    if not np.allclose(m.x, -m.x[::-1], rtol=0, atol=1e-15):
        raise ValueError("mirror check needs an x axis symmetric about zero")
    flipped_cfg = m.configs[:, ::-1, ::-1]
    flipped_e = m.energy[:, ::-1]
    e_bad = np.abs(m.energy - flipped_e) > TIE_TOL
    c_bad = np.any(m.configs != flipped_cfg, axis=-1) & ~(m.tied | m.tied[:, ::-1])
    return int(np.count_nonzero(e_bad | c_bad))


@dataclass(frozen=True)
class OperationPointCheck:
    residual: float
    detuning_consistent: bool


def operation_point_constraint(v_mc, eps_m, v_m, eps2, eps_c=0.0, eps=0.0, atol=1e-12):
    """Zero residual means both qubits and the centre dot sit at their operation points together."""
    residual = (v_mc + eps_m) - (v_m + eps2)
    return OperationPointCheck(float(residual), abs(eps_c - eps) <= atol)
