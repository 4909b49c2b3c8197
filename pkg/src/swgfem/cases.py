"""Registry of manufactured boundary value problems.

Every case carries the exact solution and its derivatives, the (possibly
piecewise) diffusion tensor, an optional reaction coefficient, and a source
term derived by hand from -div(a grad u) + c u.  All fields are vectorized
over numpy arrays.  `validate_case` re-checks each source term at runtime
against a central-difference evaluation of the operator, so a typo in any
hand-derived expression fails loudly.

Piecewise cases declare the interface lines their meshes must align with; on
aligned meshes every cell interior lies in a single smooth region, which is
all the discretization ever samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .mesh import Domain, UNIT_SQUARE

PI = math.pi


class CaseDefinitionError(RuntimeError):
    """A case's hand-derived source term disagrees with its solution."""


def _const(v: float) -> Callable:
    def field(x, y):
        return np.full(np.shape(np.asarray(x, dtype=float)), v, dtype=float)

    return field


@dataclass(frozen=True)
class ProblemCase:
    """One manufactured test problem."""

    id: str
    description: str
    domain: Domain
    a: Callable        # (x, y) -> (a11, a12, a22), arrays
    u: Callable
    grad_u: Callable   # (x, y) -> (du/dx, du/dy)
    u_xx: Callable     # second tangential derivative source for horizontal sides
    u_yy: Callable     # ... and for vertical sides
    f: Callable
    c: Callable | None = None
    interfaces_x: tuple[float, ...] = ()
    interfaces_y: tuple[float, ...] = ()
    diag_on_boundary: bool = True
    a_constant: tuple[float, float, float] | None = None  # (a11, a12, a22) if uniform

    @property
    def has_reaction(self) -> bool:
        return self.c is not None

    def g(self, x, y):
        """Dirichlet data: the trace of the exact solution."""
        return self.u(x, y)


def _case_patch() -> ProblemCase:
    return ProblemCase(
        id="patch",
        description="linear solution 1 + 2x - 3y, identity tensor, zero source",
        domain=UNIT_SQUARE,
        a=lambda x, y: (_const(1.0)(x, y), _const(0.0)(x, y), _const(1.0)(x, y)),
        u=lambda x, y: 1.0 + 2.0 * np.asarray(x, dtype=float) - 3.0 * np.asarray(y, dtype=float),
        grad_u=lambda x, y: (_const(2.0)(x, y), _const(-3.0)(x, y)),
        u_xx=_const(0.0),
        u_yy=_const(0.0),
        f=_const(0.0),
        a_constant=(1.0, 0.0, 1.0),
    )


def _case_1() -> ProblemCase:
    def u(x, y):
        return np.sin(PI * np.asarray(x)) * np.sin(PI * np.asarray(y))

    return ProblemCase(
        id="1",
        description="homogeneous BVP, u = sin(pi x) sin(pi y), a = I",
        domain=UNIT_SQUARE,
        a=lambda x, y: (_const(1.0)(x, y), _const(0.0)(x, y), _const(1.0)(x, y)),
        u=u,
        grad_u=lambda x, y: (PI * np.cos(PI * np.asarray(x)) * np.sin(PI * np.asarray(y)),
                             PI * np.sin(PI * np.asarray(x)) * np.cos(PI * np.asarray(y))),
        u_xx=lambda x, y: -PI**2 * u(x, y),
        u_yy=lambda x, y: -PI**2 * u(x, y),
        f=lambda x, y: 2.0 * PI**2 * u(x, y),
        a_constant=(1.0, 0.0, 1.0),
    )


def _case_2() -> ProblemCase:
    def u(x, y):
        return np.sin(np.asarray(x)) * np.cos(np.asarray(y))

    return ProblemCase(
        id="2",
        description="nonhomogeneous BVP, u = sin(x) cos(y), a = I",
        domain=UNIT_SQUARE,
        a=lambda x, y: (_const(1.0)(x, y), _const(0.0)(x, y), _const(1.0)(x, y)),
        u=u,
        grad_u=lambda x, y: (np.cos(np.asarray(x)) * np.cos(np.asarray(y)),
                             -np.sin(np.asarray(x)) * np.sin(np.asarray(y))),
        u_xx=lambda x, y: -u(x, y),
        u_yy=lambda x, y: -u(x, y),
        f=lambda x, y: 2.0 * u(x, y),
        a_constant=(1.0, 0.0, 1.0),
    )


def _case_3() -> ProblemCase:
    # harmonic: u_xx + u_yy = 0, so f = 0
    def u(x, y):
        return np.exp(np.asarray(x)) * np.sin(np.asarray(y))

    return ProblemCase(
        id="3",
        description="nonhomogeneous BVP, harmonic u = exp(x) sin(y), a = I",
        domain=UNIT_SQUARE,
        a=lambda x, y: (_const(1.0)(x, y), _const(0.0)(x, y), _const(1.0)(x, y)),
        u=u,
        grad_u=lambda x, y: (np.exp(np.asarray(x)) * np.sin(np.asarray(y)),
                             np.exp(np.asarray(x)) * np.cos(np.asarray(y))),
        u_xx=lambda x, y: u(x, y),
        u_yy=lambda x, y: -u(x, y),
        f=_const(0.0),
        a_constant=(1.0, 0.0, 1.0),
    )


def _case_4() -> ProblemCase:
    # a = [3, 1; 1, 2]: f = -(3 u_xx + 2 u_xy + 2 u_yy)
    def u(x, y):
        return np.sin(np.asarray(x)) * np.sin(np.asarray(y))

    return ProblemCase(
        id="4",
        description="constant full tensor a = [3,1;1,2], u = sin(x) sin(y)",
        domain=UNIT_SQUARE,
        a=lambda x, y: (_const(3.0)(x, y), _const(1.0)(x, y), _const(2.0)(x, y)),
        u=u,
        grad_u=lambda x, y: (np.cos(np.asarray(x)) * np.sin(np.asarray(y)),
                             np.sin(np.asarray(x)) * np.cos(np.asarray(y))),
        u_xx=lambda x, y: -u(x, y),
        u_yy=lambda x, y: -u(x, y),
        f=lambda x, y: 5.0 * np.sin(np.asarray(x)) * np.sin(np.asarray(y))
        - 2.0 * np.cos(np.asarray(x)) * np.cos(np.asarray(y)),
        diag_on_boundary=False,
        a_constant=(3.0, 1.0, 2.0),
    )


def _cosine_sine_case(case_id: str, description: str) -> ProblemCase:
    # shared solution of the graded/perturbed-mesh studies
    def u(x, y):
        return np.cos(PI * np.asarray(x)) * np.sin(PI * np.asarray(y))

    return ProblemCase(
        id=case_id,
        description=description,
        domain=UNIT_SQUARE,
        a=lambda x, y: (_const(1.0)(x, y), _const(0.0)(x, y), _const(1.0)(x, y)),
        u=u,
        grad_u=lambda x, y: (-PI * np.sin(PI * np.asarray(x)) * np.sin(PI * np.asarray(y)),
                             PI * np.cos(PI * np.asarray(x)) * np.cos(PI * np.asarray(y))),
        u_xx=lambda x, y: -PI**2 * u(x, y),
        u_yy=lambda x, y: -PI**2 * u(x, y),
        f=lambda x, y: 2.0 * PI**2 * u(x, y),
        a_constant=(1.0, 0.0, 1.0),
    )


# Test case 8: one diagonal tensor and solution scale per quadrant of
# (-1,1)^2, arranged like the 2x2 parameter table (UL, UR / LL, LR).
# ax*al = 10 and ay*al = 1 in every quadrant, so the normal flux of
# u = al*sin(2 pi x)*sin(2 pi y) is continuous across x=0 and y=0.
_Q8 = {
    "UL": (0.1, 0.01, 100.0),
    "UR": (1000.0, 100.0, 0.01),
    "LL": (100.0, 10.0, 0.1),
    "LR": (1.0, 0.1, 10.0),
}


def _quadrant_select(x, y, component: int):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    upper = np.where(x < 0, _Q8["UL"][component], _Q8["UR"][component])
    lower = np.where(x < 0, _Q8["LL"][component], _Q8["LR"][component])
    return np.where(y > 0, upper, lower)


def _case_8() -> ProblemCase:
    def al(x, y):
        return _quadrant_select(x, y, 2)

    def u(x, y):
        return al(x, y) * np.sin(2 * PI * np.asarray(x)) * np.sin(2 * PI * np.asarray(y))

    def grad_u(x, y):
        s = al(x, y)
        return (s * 2 * PI * np.cos(2 * PI * np.asarray(x)) * np.sin(2 * PI * np.asarray(y)),
                s * 2 * PI * np.sin(2 * PI * np.asarray(x)) * np.cos(2 * PI * np.asarray(y)))

    def f(x, y):
        ax = _quadrant_select(x, y, 0)
        ay = _quadrant_select(x, y, 1)
        return (ax + ay) * 4 * PI**2 * u(x, y)

    return ProblemCase(
        id="8",
        description="piecewise diagonal tensor per quadrant of (-1,1)^2, "
                    "u = al_i sin(2 pi x) sin(2 pi y)",
        domain=(-1.0, 1.0, -1.0, 1.0),
        a=lambda x, y: (_quadrant_select(x, y, 0),
                        np.zeros(np.shape(np.asarray(x, dtype=float))),
                        _quadrant_select(x, y, 1)),
        u=u,
        grad_u=grad_u,
        u_xx=lambda x, y: -4 * PI**2 * u(x, y),
        u_yy=lambda x, y: -4 * PI**2 * u(x, y),
        f=f,
        interfaces_x=(0.0,),
        interfaces_y=(0.0,),
    )


def _case_9() -> ProblemCase:
    # interface at x = 0.5; u and the normal flux a grad(u).n are continuous
    # across it (left flux u_x = 4y + 6 equals the right flux 10u_x + 3u_y).
    def left(x):
        return np.asarray(x, dtype=float) < 0.5

    def u(x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        ul = 1.0 - 2.0 * y**2 + 4.0 * x * y + 6.0 * x + 2.0 * y
        ur = -2.0 * y**2 + 1.6 * x * y - 0.6 * x + 3.2 * y + 4.3
        return np.where(left(x), ul, ur)

    def grad_u(x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        gx = np.where(left(x), 4.0 * y + 6.0, 1.6 * y - 0.6)
        gy = np.where(left(x), -4.0 * y + 4.0 * x + 2.0, -4.0 * y + 1.6 * x + 3.2)
        return gx, gy

    def tensor(x, y):
        x = np.asarray(x, dtype=float)
        mask = left(x)
        a11 = np.where(mask, 1.0, 10.0)
        a12 = np.where(mask, 0.0, 3.0)
        a22 = np.where(mask, 1.0, 1.0)
        return a11, a12, a22

    def f(x, y):
        # -(a11 u_xx + 2 a12 u_xy + a22 u_yy), constant per region
        x = np.asarray(x, dtype=float)
        return np.where(left(x), 4.0, -5.6) + 0.0 * x

    return ProblemCase(
        id="9",
        description="interface at x=0.5: a=I / a=[10,3;3,1], piecewise quadratic u",
        domain=UNIT_SQUARE,
        a=tensor,
        u=u,
        grad_u=grad_u,
        u_xx=_const(0.0),
        u_yy=_const(-4.0),
        f=f,
        interfaces_x=(0.5,),
        diag_on_boundary=False,
    )


def _case_10() -> ProblemCase:
    def u(x, y):
        return np.sin(np.asarray(x)) * np.sin(np.asarray(y))

    def f(x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        # a11 = 1+e^y depends on y only and a22 = 1+e^x on x only, so the
        # divergence has no a' u' terms: f = -(a11 u_xx + 2 a12 u_xy + a22 u_yy)
        return (2.0 + np.exp(x) + np.exp(y)) * np.sin(x) * np.sin(y) \
            - np.cos(x) * np.cos(y)

    return ProblemCase(
        id="10",
        description="variable tensor a11=1+e^y, a12=0.5, a22=1+e^x, u = sin(x) sin(y)",
        domain=UNIT_SQUARE,
        a=lambda x, y: (1.0 + np.exp(np.asarray(y, dtype=float)),
                        _const(0.5)(x, y),
                        1.0 + np.exp(np.asarray(x, dtype=float))),
        u=u,
        grad_u=lambda x, y: (np.cos(np.asarray(x)) * np.sin(np.asarray(y)),
                             np.sin(np.asarray(x)) * np.cos(np.asarray(y))),
        u_xx=lambda x, y: -u(x, y),
        u_yy=lambda x, y: -u(x, y),
        f=f,
        diag_on_boundary=False,
    )


def _case_11() -> ProblemCase:
    def u(x, y):
        return 2.0 * np.sin(2 * PI * np.asarray(x)) * np.sin(3 * PI * np.asarray(y))

    def f(x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        sx, cx = np.sin(2 * PI * x), np.cos(2 * PI * x)
        sy, cy = np.sin(3 * PI * y), np.cos(3 * PI * y)
        ux = 4 * PI * cx * sy
        uy = 6 * PI * sx * cy
        uxx = -8 * PI**2 * sx * sy
        uyy = -18 * PI**2 * sx * sy
        uxy = 12 * PI**2 * cx * cy
        exy = np.exp(x + y)
        a11 = 1.0 + np.exp(2 * x) + y**3
        a22 = 1.0 + np.exp(2 * y) + x**3
        div = (a11 * uxx + 2.0 * np.exp(2 * x) * ux + exy * uxy + exy * uy) \
            + (exy * uxy + exy * ux + a22 * uyy + 2.0 * np.exp(2 * y) * uy)
        return -div + (2.0 + x + y) * 2.0 * sx * sy

    return ProblemCase(
        id="11",
        description="reaction-diffusion: exponential full tensor, c = 2+x+y, "
                    "u = 2 sin(2 pi x) sin(3 pi y)",
        domain=UNIT_SQUARE,
        a=lambda x, y: (1.0 + np.exp(2 * np.asarray(x, dtype=float)) + np.asarray(y, dtype=float)**3,
                        np.exp(np.asarray(x, dtype=float) + np.asarray(y, dtype=float)),
                        1.0 + np.exp(2 * np.asarray(y, dtype=float)) + np.asarray(x, dtype=float)**3),
        u=u,
        grad_u=lambda x, y: (4 * PI * np.cos(2 * PI * np.asarray(x)) * np.sin(3 * PI * np.asarray(y)),
                             6 * PI * np.sin(2 * PI * np.asarray(x)) * np.cos(3 * PI * np.asarray(y))),
        u_xx=lambda x, y: -4 * PI**2 * u(x, y),
        u_yy=lambda x, y: -9 * PI**2 * u(x, y),
        f=f,
        c=lambda x, y: 2.0 + np.asarray(x, dtype=float) + np.asarray(y, dtype=float),
        diag_on_boundary=False,
    )


_REGISTRY: dict[str, Callable[[], ProblemCase]] = {
    "patch": _case_patch,
    "1": _case_1,
    "2": _case_2,
    "3": _case_3,
    "4": _case_4,
    "5": lambda: _cosine_sine_case("5", "u = cos(pi x) sin(pi y), graded meshes"),
    "6": lambda: _cosine_sine_case("6", "u = cos(pi x) sin(pi y), randomly perturbed meshes"),
    "7": lambda: _cosine_sine_case("7", "u = cos(pi x) sin(pi y), resampled perturbed pairs"),
    "8": _case_8,
    "9": _case_9,
    "10": _case_10,
    "11": _case_11,
}

CASE_IDS = tuple(_REGISTRY)


def get_case(case_id) -> ProblemCase:
    """Look up a case by id ('patch' or '1'..'11'; ints accepted)."""
    key = str(case_id)
    try:
        return _REGISTRY[key]()
    except KeyError:
        raise KeyError(f"unknown case id {case_id!r}; known: {', '.join(CASE_IDS)}") from None


# -- runtime validation -------------------------------------------------------

def _smooth_regions(case: ProblemCase) -> list[tuple[float, float, float, float]]:
    x_min, x_max, y_min, y_max = case.domain
    xcuts = [x_min, *sorted(case.interfaces_x), x_max]
    ycuts = [y_min, *sorted(case.interfaces_y), y_max]
    return [(xcuts[i], xcuts[i + 1], ycuts[j], ycuts[j + 1])
            for i in range(len(xcuts) - 1) for j in range(len(ycuts) - 1)]


def pde_residual_max(case: ProblemCase, n_sample: int = 6, step: float = 1e-4):
    """Max |(-div(a grad u) + c u) - f| over sample grids of each smooth
    region, with derivatives by nested central differences; also returns the
    max sampled |f| for scaling."""
    resid_max = 0.0
    f_max = 0.0
    for x0, x1, y0, y1 in _smooth_regions(case):
        mx = max(4 * step, 0.02 * (x1 - x0))
        my = max(4 * step, 0.02 * (y1 - y0))
        X, Y = np.meshgrid(np.linspace(x0 + mx, x1 - mx, n_sample),
                           np.linspace(y0 + my, y1 - my, n_sample))

        def q(x, y):
            a11, a12, a22 = case.a(x, y)
            ux = (case.u(x + step, y) - case.u(x - step, y)) / (2 * step)
            uy = (case.u(x, y + step) - case.u(x, y - step)) / (2 * step)
            return a11 * ux + a12 * uy, a12 * ux + a22 * uy

        q1x = (q(X + step, Y)[0] - q(X - step, Y)[0]) / (2 * step)
        q2y = (q(X, Y + step)[1] - q(X, Y - step)[1]) / (2 * step)
        lhs = -(q1x + q2y)
        if case.c is not None:
            lhs = lhs + case.c(X, Y) * case.u(X, Y)
        fv = case.f(X, Y)
        resid_max = max(resid_max, float(np.max(np.abs(lhs - fv))))
        f_max = max(f_max, float(np.max(np.abs(fv))))
    return resid_max, f_max


def validate_case(case: ProblemCase, rtol: float = 1e-6) -> Callable:
    """Return the case's source term after checking it against the operator.

    The tolerance is relative to the sampled source scale (floor 1) because
    nested central differences at step 1e-4 carry ~1e-5 absolute truncation
    on the stiffest case.
    """
    resid, f_max = pde_residual_max(case)
    limit = rtol * max(1.0, f_max)
    if resid > limit:
        raise CaseDefinitionError(
            f"case {case.id}: PDE residual {resid:.3e} exceeds {limit:.3e}; "
            "the hand-derived source term is inconsistent with the solution"
        )
    return case.f
