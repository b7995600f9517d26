import zlib

import numpy as np
import pytest

from wavecert.errors import (
    DomainError,
    ExpOverflowError,
    ParseError,
    UnboundConstantError,
)
from wavecert.expr import (
    BinOp,
    Call,
    Const,
    Neg,
    Num,
    Pow,
    Var,
    differentiate,
    evaluate,
    parse,
    render,
)

# expressions exercised throughout the suite; dim, text, box for sampling,
# constants needed
CORPUS = [
    (2, "1 + x1^2 + x2^2", [(-1.4, 1.4), (-1.4, 1.4)], {}),
    (2, "exp(x1 + x2)", [(1.0, 3.0), (-1.0, 1.0)], {}),
    (2, "exp(x1^3 + x2^3)", [(1.0, 3.0), (1.0, 3.0)], {}),
    (2, "exp(mu1*x1)", [(0.5, 3.5), (-1.5, 1.5)], {"mu1": 0.5}),
    (2, "exp(-mu2*x1^2)", [(0.5, 3.5), (-1.5, 1.5)], {"mu2": 0.1}),
    (2, "(x1^2 + x2^2)/2", [(1.0, 3.0), (-1.0, 1.0)], {}),
    (2, "(x1 - 2)^2 + x2^2 - 1.5", [(0.8, 3.2), (-1.2, 1.2)], {}),
    (3, "x1*x2*x3 + sin(x1)*cos(x2) + sqrt(x3)", [(0.1, 2.0)] * 3, {}),
    (1, "log(1 + x1^2) + x1^-2", [(0.5, 2.0)], {}),
    (2, "2^x1 + x2^0.5", [(0.5, 2.0), (0.5, 2.0)], {}),
]


def central_diff(e, pt, k, consts, step=1e-6):
    lo = list(pt)
    hi = list(pt)
    lo[k - 1] -= step
    hi[k - 1] += step
    return (evaluate(e, hi, consts) - evaluate(e, lo, consts)) / (2 * step)


def interior_points(box, count, seed):
    rng = np.random.default_rng(seed)
    lows = np.array([b[0] for b in box])
    highs = np.array([b[1] for b in box])
    # stay away from the walls so finite differences never step out
    pad = 0.01 * (highs - lows)
    return rng.uniform(lows + pad, highs - pad, size=(count, len(box)))


class TestParse:
    def test_example_coefficient(self):
        e = parse("1 + x1^2 + x2^2", dim=2)
        assert e == BinOp(
            "+", BinOp("+", Num(1.0), Pow(Var(1), 2)), Pow(Var(2), 2)
        )

    def test_single_variable(self):
        assert parse("x1", dim=2) == Var(1)

    def test_named_constant(self):
        e = parse("exp(mu1*x1)", dim=2)
        assert e == Call("exp", BinOp("*", Const("mu1"), Var(1)))

    def test_syntax_error_carries_offset(self):
        with pytest.raises(ParseError) as err:
            parse("1 + * 2", dim=1)
        assert err.value.offset == 4

    def test_unknown_function(self):
        with pytest.raises(ParseError, match="unknown function"):
            parse("tan(x1)", dim=1)

    def test_variable_index_beyond_dim(self):
        with pytest.raises(ParseError, match="exceeds dimension"):
            parse("x3", dim=2)

    def test_variable_index_zero(self):
        with pytest.raises(ParseError):
            parse("x0", dim=2)

    def test_trailing_garbage(self):
        with pytest.raises(ParseError, match="trailing"):
            parse("x1 )", dim=1)

    def test_noninteger_exponent_rewritten(self):
        e = parse("x1^0.5", dim=1)
        assert e == Call("exp", BinOp("*", Num(0.5), Call("log", Var(1))))
        assert evaluate(e, (4.0,)) == pytest.approx(2.0)

    def test_negative_integer_exponent(self):
        e = parse("x1^-2", dim=1)
        assert e == Pow(Var(1), -2)
        assert evaluate(e, (2.0,)) == pytest.approx(0.25)

    def test_unary_minus_binds_inside_power(self):
        # grammar: factor := unary ('^' unary)?, so -x1^2 means (-x1)^2
        assert evaluate(parse("-x1^2", dim=1), (3.0,)) == pytest.approx(9.0)


class TestRender:
    @pytest.mark.parametrize("dim,text,_box,_consts", CORPUS)
    def test_rendered_output_is_fixed_point(self, dim, text, _box, _consts):
        once = render(parse(text, dim))
        twice = render(parse(once, dim))
        assert once == twice

    @pytest.mark.parametrize("dim,text,_box,_consts", CORPUS)
    def test_reparse_is_structurally_equal(self, dim, text, _box, _consts):
        e = parse(text, dim)
        assert parse(render(e), dim) == e

    def test_derivative_trees_round_trip(self):
        for dim, text, _box, _consts in CORPUS:
            e = parse(text, dim)
            for k in range(1, dim + 1):
                d = differentiate(e, k)
                assert parse(render(d), dim) == d

    def test_negation_of_power_parenthesized(self):
        e = Neg(Pow(Var(1), 2))
        assert render(e) == "-(x1^2)"
        assert parse("-(x1^2)", 1) == e


def random_tree(rng, depth, dim=2):
    """Seeded random AST over the full node set; literals stay nonnegative
    (the grammar spells negatives with unary minus)."""
    if depth == 0 or rng.random() < 0.25:
        pick = rng.integers(0, 3)
        if pick == 0:
            return Num(float(round(rng.uniform(0.0, 9.0), 3)))
        if pick == 1:
            return Var(int(rng.integers(1, dim + 1)))
        return Const(rng.choice(["mu1", "mu2", "kappa"]))
    pick = rng.integers(0, 4)
    if pick == 0:
        op = rng.choice(["+", "-", "*", "/"])
        return BinOp(op, random_tree(rng, depth - 1, dim), random_tree(rng, depth - 1, dim))
    if pick == 1:
        return Neg(random_tree(rng, depth - 1, dim))
    if pick == 2:
        return Pow(random_tree(rng, depth - 1, dim), int(rng.integers(-3, 4)))
    func = rng.choice(["exp", "log", "sin", "cos", "sqrt"])
    return Call(func, random_tree(rng, depth - 1, dim))


class TestRenderProperty:
    def test_random_trees_round_trip_structurally(self):
        rng = np.random.default_rng(424242)
        for _ in range(300):
            tree = random_tree(rng, depth=int(rng.integers(1, 6)))
            text = render(tree)
            assert parse(text, 2) == tree, text

    def test_random_derivative_trees_round_trip(self):
        rng = np.random.default_rng(31415)
        for _ in range(100):
            tree = random_tree(rng, depth=3)
            d = differentiate(tree, 1)
            assert parse(render(d), 2) == d


class TestEvaluate:
    def test_direct_arithmetic(self):
        assert evaluate(parse("1 + x1^2 + x2^2", 2), (1.0, 1.0)) == 3.0

    def test_exp_zero(self):
        assert evaluate(parse("exp(mu1*x1)", 2), (0.0, 0.0), {"mu1": 0.5}) == 1.0

    def test_division_by_zero(self):
        with pytest.raises(DomainError):
            evaluate(parse("x1/x2", 2), (1.0, 0.0))

    def test_log_of_nonpositive(self):
        with pytest.raises(DomainError):
            evaluate(parse("log(x1)", 1), (-1.0,))

    def test_sqrt_of_nonpositive(self):
        with pytest.raises(DomainError):
            evaluate(parse("sqrt(x1)", 1), (0.0,))

    def test_unbound_constant(self):
        with pytest.raises(UnboundConstantError):
            evaluate(parse("mu1*x1", 1), (1.0,))

    def test_exp_overflow_guard(self):
        with pytest.raises(ExpOverflowError):
            evaluate(parse("exp(x1)", 1), (800.0,))

    def test_batch_matches_scalar(self):
        rng = np.random.default_rng(7)
        for dim, text, box, consts in CORPUS:
            e = parse(text, dim)
            pts = interior_points(box, 20, seed=11)
            batch = evaluate(e, pts, consts)
            for row, value in zip(pts, batch):
                assert evaluate(e, row, consts) == pytest.approx(
                    value, rel=1e-14, abs=1e-300
                )

    def test_batch_error_carries_point(self):
        pts = np.array([[1.0, 1.0], [1.0, 0.0]])
        with pytest.raises(DomainError) as err:
            evaluate(parse("x1/x2", 2), pts)
        assert err.value.point == (1.0, 0.0)


class TestDifferentiate:
    def test_polynomial_rule(self):
        assert render(differentiate(parse("1 + x1^2 + x2^2", 2), 1)) == "2*x1"

    def test_chain_rule(self):
        assert (
            render(differentiate(parse("exp(mu1*x1)", 2), 1)) == "mu1*exp(mu1*x1)"
        )

    def test_gaussian_derivative_against_central_differences(self):
        e = parse("exp(-mu2*x1^2)", 2)
        d = differentiate(e, 1)
        consts = {"mu2": 0.1}
        rng = np.random.default_rng(3)
        for _ in range(10):
            pt = rng.uniform(-2.0, 2.0, size=2)
            sym = evaluate(d, pt, consts)
            fd = central_diff(e, pt, 1, consts)
            assert sym == pytest.approx(fd, rel=1e-6)

    @pytest.mark.parametrize("dim,text,box,consts", CORPUS)
    def test_corpus_against_central_differences(self, dim, text, box, consts):
        e = parse(text, dim)
        pts = interior_points(box, 100, seed=zlib.crc32(text.encode()))
        for k in range(1, dim + 1):
            d = differentiate(e, k)
            sym = evaluate(d, pts, consts)
            sym = np.broadcast_to(np.asarray(sym), (pts.shape[0],))
            for row, value in zip(pts, sym):
                fd = central_diff(e, row, k, consts)
                # relative where the derivative has size, unit floor where it
                # crosses zero (central differences carry O(ulp/step) noise)
                denom = max(abs(fd), abs(value), 1.0)
                assert abs(value - fd) / denom < 1e-6

    @pytest.mark.parametrize("dim,text,box,consts", CORPUS)
    def test_mixed_partials_commute(self, dim, text, box, consts):
        if dim < 2:
            pytest.skip("needs two variables")
        e = parse(text, dim)
        pts = interior_points(box, 25, seed=5)
        d12 = differentiate(differentiate(e, 1), 2)
        d21 = differentiate(differentiate(e, 2), 1)
        v12 = evaluate(d12, pts, consts)
        v21 = evaluate(d21, pts, consts)
        v12 = np.broadcast_to(np.asarray(v12), (pts.shape[0],))
        v21 = np.broadcast_to(np.asarray(v21), (pts.shape[0],))
        for a, b in zip(v12, v21):
            assert a == pytest.approx(b, rel=1e-12, abs=1e-12)

    def test_constant_folding_collapses_literals(self):
        d = differentiate(parse("3*x1 + 5", 1), 1)
        assert d == Num(3.0)

    def test_derivative_of_constant_expression(self):
        assert differentiate(parse("mu1*mu2", 1), 1) == Num(0.0)
