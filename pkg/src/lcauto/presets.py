"""Named inputs: the running example, standard sequences and the figure setups."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .algebra import LaurentPoly
from .lca import BoundaryData, GeneratingPolynomial, SpacetimeGrid, generate_grid, generate_grid_zxz
from .substitution import InitialCondition, Substitution, substitution, subst_to_dfao

RUNNING_IMAGES = {"0": "001", "1": "112", "2": "220"}


def running_example() -> Substitution:
    return substitution(RUNNING_IMAGES, coding=[0, 1, 2], p=3)


def thue_morse() -> Substitution:
    return substitution({"0": "01", "1": "10"}, coding=[0, 1], p=2)


def toeplitz() -> Substitution:
    return substitution({"0": "01", "1": "00"}, coding=[0, 1], p=2)


def coincidence_example() -> Substitution:
    """Four letters whose fourth power collapses in one column."""
    return substitution({"a": "ab", "b": "cd", "c": "ac", "d": "da"}, coding=[0, 1, 0, 1], p=2)


def running_annihilator() -> list[tuple[LaurentPoly, int]]:
    """A polynomial in y over F_3(x) vanishing at the generating series of the running example."""
    mk = lambda d: LaurentPoly.from_dict(3, d)
    return [
        (mk({28: 1}), 1),
        (mk({12: 2, 21: 2, 24: 2, 27: 2, 28: 2, 29: 2}), 3),
        (mk({0: 1, 9: 2, 12: 1, 15: 1, 18: 1, 21: 1, 24: 2, 27: 2, 30: 1}), 9),
        (mk({0: 2, 27: 2, 54: 2}), 27),
    ]


def running_initial(both_halves: bool = False) -> InitialCondition:
    R = subst_to_dfao(running_example(), 0)
    return InitialCondition(R, R if both_halves else None, "mirror", "running example")


def coincidence_initial() -> InitialCondition:
    theta = coincidence_example()
    right = subst_to_dfao(theta, "a")
    # left-infinite fixed point of theta^3 ending with a, read right to left
    left = subst_to_dfao(theta.reversed(), "a")
    return InitialCondition(right, left, "shift", "coincidence example")


@dataclass(frozen=True)
class FigureSetup:
    name: str
    phi: GeneratingPolynomial
    window: tuple[int, int, int, int]
    initial: InitialCondition
    boundary: BoundaryData | None = None
    description: str = ""

    @property
    def p(self) -> int:
        return self.phi.p

    def grid(self, window=None) -> SpacetimeGrid:
        window = window or self.window
        if self.boundary is not None:
            return generate_grid_zxz(self.phi, self.boundary, window, self.name)
        return generate_grid(self.phi, self.initial, window, self.name)


HALF = (-255, 255, 0, 255)
FULL = (-255, 255, -255, 255)


def _tm():
    return subst_to_dfao(thue_morse(), 0)


def _fig1():
    return FigureSetup("fig1", GeneratingPolynomial.parse("x^-1+x^-3+x^-7", 2), HALF,
                       InitialCondition(_tm(), None, "mirror", "Thue-Morse right half"),
                       description="Thue-Morse right half, zero left half")


def _fig2():
    ic = InitialCondition(_tm(), subst_to_dfao(toeplitz(), 0), "mirror", "Thue-Morse / Toeplitz")
    return FigureSetup("fig2", GeneratingPolynomial.parse("x+1+x^-1", 2), HALF, ic,
                       description="Thue-Morse right half, Toeplitz left half")


def _fig4():
    return FigureSetup("fig4", GeneratingPolynomial.parse("x+1", 3), HALF, running_initial(False),
                       description="running example right half, zero left half")


def _fig5():
    return FigureSetup("fig5", GeneratingPolynomial.parse("x+1", 3), HALF, running_initial(True),
                       description="running example on both halves, u_m = u_-m")


def _fig6():
    tm = _tm()
    ic = InitialCondition(tm, tm, "mirror", "Thue-Morse both halves")
    return FigureSetup("fig6", GeneratingPolynomial.parse("1+x^-1", 2), FULL, ic,
                       BoundaryData(ic, (tm,), 0),
                       description="Z x Z diagram, column 0 below the axis is Thue-Morse")


def _coincidence_fig():
    return FigureSetup("coincidence", GeneratingPolynomial.parse("1+x^-1", 2), HALF, coincidence_initial(),
                       description="coincidence example, Ledrappier rule")


FIGURES: dict[str, Callable[[], FigureSetup]] = {
    "fig1": _fig1,
    "fig2": _fig2,
    "fig4": _fig4,
    "fig5": _fig5,
    "fig6": _fig6,
    "coincidence": _coincidence_fig,
}


def figure(name: str) -> FigureSetup:
    try:
        return FIGURES[name]()
    except KeyError:
        from .errors import UsageError

        raise UsageError(f"unknown figure {name!r}; choose from {sorted(FIGURES)}") from None
