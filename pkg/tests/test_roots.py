import math

import numpy as np
import pytest

from numerics.roots import (
    NoSignChangeError,
    QuadratureError,
    bracket_scan,
    expand_bracket,
    quadrature,
    root_find,
)


def test_root_find_converges_to_machine_precision():
    """cos(x) = x has its root near 0.739."""
    result = root_find(lambda x: math.cos(x) - x, (0.0, 1.0))

    assert result.root == pytest.approx(0.7390851332151607, abs=1e-14)
    assert result.residual < 1e-14


def test_root_find_accepts_a_root_at_the_end():
    """An endpoint root is returned without iterating."""
    result = root_find(lambda x: x - 2.0, (2.0, 3.0))

    assert result.root == 2.0
    assert result.iterations == 0


def test_root_find_without_sign_change():
    """The error keeps the bracket and the end values."""
    with pytest.raises(NoSignChangeError) as info:
        root_find(lambda x: x * x + 1.0, (-1.0, 1.0))
    assert info.value.bracket == (-1.0, 1.0)
    assert info.value.values == (2.0, 2.0)


def test_bracket_scan_finds_every_sign_change():
    """sin has three roots on [-4, 4]."""
    brackets = bracket_scan(np.sin, -4.0, 4.0, points=801)

    assert len(brackets) == 3
    for (a, b), root in zip(brackets, (-math.pi, 0.0, math.pi)):
        assert a <= root <= b


def test_expand_bracket_keeps_to_the_nearest_branch():
    """Growing from 2.9 reaches the root at 3 before the one at -3."""
    lo, hi = expand_bracket(lambda x: x * x - 9.0, 2.9)

    assert lo <= 3.0 <= hi
    assert lo > 0


def test_expand_bracket_gives_up():
    """A positive function never changes sign."""
    with pytest.raises(NoSignChangeError):
        expand_bracket(lambda x: 1.0 + x * x, 0.0, max_expansions=10)


def test_quadrature_of_gaussian():
    """Integral of exp(-x^2) over the line is sqrt(pi)."""
    value = quadrature(lambda x: math.exp(-x * x), -np.inf, np.inf)

    assert value == pytest.approx(math.sqrt(math.pi), rel=1e-10)


def test_quadrature_reports_divergence():
    """1/x on (0, 1] does not converge."""
    with pytest.raises(QuadratureError):
        quadrature(lambda x: 1.0 / x, 0.0, 1.0, limit=20)
