import numpy as np
import pytest

from fiocalc.symbols import (
    ShubinSymbol,
    constant_symbol,
    custom_symbol,
    gaussian_symbol,
    harmonic_oscillator_symbol,
    polynomial_symbol,
    shubin_decay_test,
)


def test_symbol_kinds_evaluate():
    z = np.array([[1.0, 2.0], [0.0, 0.0]])
    assert np.allclose(constant_symbol(2, 3.0)(z), [3.0, 3.0])
    assert np.allclose(harmonic_oscillator_symbol(2)(z), [5.0, 0.0])
    p = polynomial_symbol(2, [(2.0, (1, 1))])
    assert np.allclose(p(z), [4.0, 0.0])
    ga = gaussian_symbol(2)
    assert np.isclose(ga(np.array([0.0, 0.0])), 1.0)


def test_polynomial_order_is_total_degree():
    p = polynomial_symbol(2, [(1.0, (2, 1)), (1.0, (0, 1))])
    assert p.order == 3.0


def test_serialization_round_trip():
    for sym in (constant_symbol(2, 2.5), harmonic_oscillator_symbol(2),
                polynomial_symbol(2, [(1.0, (1, 0))]),
                gaussian_symbol(2, center=[1.0, -1.0], width=2.0)):
        back = ShubinSymbol.from_dict(sym.to_dict())
        z = np.array([[0.3, -0.7]])
        assert np.allclose(back(z), sym(z))


def test_custom_symbol_does_not_serialize():
    sym = custom_symbol(2, 0.0, 1.0, lambda z: np.ones(z.shape[:-1]))
    with pytest.raises(ValueError):
        sym.to_dict()


def test_gaussian_satisfies_any_nonnegative_order():
    ax = np.linspace(-8, 8, 129)
    X, XI = np.meshgrid(ax, ax, indexing="ij")
    vals = np.exp(-0.5 * (X ** 2 + XI ** 2))
    rep = shubin_decay_test(vals, [ax, ax], 0.0, 1.0)
    assert rep.status == "pass"


def test_quadratic_growth_certified_at_order_two():
    ax = np.linspace(-8, 8, 129)
    X, XI = np.meshgrid(ax, ax, indexing="ij")
    vals = X ** 2 + XI ** 2
    assert shubin_decay_test(vals, [ax, ax], 2.0, 1.0).status == "pass"
    assert shubin_decay_test(vals, [ax, ax], 0.0, 1.0).status == "fail"


def test_constant_fails_negative_order():
    ax = np.linspace(-8, 8, 65)
    vals = np.ones((65, 65))
    assert shubin_decay_test(vals, [ax, ax], 0.0, 1.0).status == "pass"
    assert shubin_decay_test(vals, [ax, ax], -1.0, 1.0).status == "fail"


def test_decay_report_serializes():
    ax = np.linspace(-8, 8, 65)
    vals = np.exp(-(np.add.outer(ax ** 2, ax ** 2)))
    data = shubin_decay_test(vals, [ax, ax], 0.0, 1.0).to_dict()
    assert data["status"] == "pass"
