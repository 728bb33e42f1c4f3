import numpy as np
import pytest
from hypothesis import given, strategies as st

from swipt.gp import (GpProblem, GpStatus, Monomial, Posynomial, add, condense, evaluate, multiply,
                      power, solve_gp, weights_from_point)
from swipt.validation import check_amgm, check_gp_battery, gp_instances, random_posynomial

x, y, z = Monomial.var("x"), Monomial.var("y"), Monomial.var("z")


def terms_of(p):
    return sorted((t.key(), round(t.coeff, 12)) for t in p.terms)


# -- algebra -------------------------------------------------------------------

def test_monomial_product_cancels_exponents():
    m = multiply(2 * x, 3 * x ** -1 * y)
    assert terms_of(m) == terms_of(Posynomial([6 * y]))


def test_square_expands_termwise():
    assert terms_of((x + y) ** 2) == terms_of(Posynomial([x ** 2, 2 * x * y, y ** 2]))


def test_evaluate_monomial():
    assert evaluate(x ** 2 * y, {"x": 3, "y": 2}) == pytest.approx(18)


def test_add_and_power_helpers():
    p = add(x, 2 * x)
    assert len(p) == 1 and p.evaluate({"x": 2}) == pytest.approx(6)
    assert power(4 * x, 0.5).evaluate({"x": 9}) == pytest.approx(6)


def test_division_by_scalar_and_monomial():
    p = (x + y) / (2 * x)
    assert p.evaluate({"x": 2, "y": 6}) == pytest.approx(2.0)
    with pytest.raises(ValueError):
        (x + y) / -1.0


@pytest.mark.parametrize("bad", [0.0, -1.0, float("nan")])
def test_nonpositive_point_rejected(bad):
    with pytest.raises(ValueError):
        (x + y).evaluate({"x": bad, "y": 1.0})
    with pytest.raises(ValueError):
        x.evaluate({"x": bad})


def test_nonpositive_coefficient_rejected():
    with pytest.raises(ValueError):
        Monomial(0.0, {"x": 1})


def test_tiny_coefficients_survive_in_log_space():
    p = Monomial(1e-300, {"x": 1}) * Monomial(1e-300, {"y": 1})
    assert p.log_evaluate({"x": 1.0, "y": 1.0}) == pytest.approx(2 * np.log(1e-300))


def test_dump_lists_every_term():
    text = (x + 3 * y ** 2).dump()
    assert len(text.splitlines()) == 2 and "y^2" in text


# -- condensation --------------------------------------------------------------

def test_condense_equal_weights_tight_at_unit_point():
    m = condense(x + y, [0.5, 0.5])
    assert m.coeff == pytest.approx(2.0)
    assert m.exponents == {"x": 0.5, "y": 0.5}
    assert m.evaluate({"x": 1, "y": 1}) == pytest.approx(2.0)


def test_condense_strict_away_from_anchor():
    m = condense(x + y, [0.5, 0.5])
    assert m.evaluate({"x": 4, "y": 1}) == pytest.approx(4.0)
    assert (x + y).evaluate({"x": 4, "y": 1}) == pytest.approx(5.0)


def test_condense_drops_zero_weights():
    p = x + y
    gamma = [1.0 if t.exponents == {"x": 1.0} else 0.0 for t in p.terms]
    m = condense(p, gamma)
    assert m.exponents == {"x": 1.0} and m.coeff == pytest.approx(1.0)


@pytest.mark.parametrize("gamma", [[0.6, 0.6], [-0.1, 1.1], [1.0]])
def test_condense_rejects_bad_weights(gamma):
    with pytest.raises(ValueError):
        condense(x + y, gamma)


def test_weights_from_point_examples():
    assert weights_from_point(x + y, {"x": 1, "y": 1}) == pytest.approx([0.5, 0.5])
    p = Posynomial([x, 3 * x], merge=False)
    assert weights_from_point(p, {"x": 7.0}) == pytest.approx([0.25, 0.75])
    q = Posynomial([2 * x ** 2, x ** 2], merge=False)
    assert weights_from_point(q, {"x": 2.0}) == pytest.approx([2 / 3, 1 / 3])


@given(seed=st.integers(0, 2 ** 32 - 1))
def test_amgm_dominance_and_tightness(seed):
    rng = np.random.default_rng(seed)
    p = random_posynomial(rng)
    names = sorted(p.variables | {"x0"})
    anchor = {n: float(np.exp(rng.normal())) for n in names}
    m = condense(p, weights_from_point(p, anchor))
    assert m.log_evaluate(anchor) == pytest.approx(p.log_evaluate(anchor), abs=1e-11)
    for _ in range(10):
        pt = {n: float(np.exp(rng.normal(0, 2))) for n in names}
        assert m.log_evaluate(pt) <= p.log_evaluate(pt) + 1e-11


@given(seed=st.integers(0, 2 ** 32 - 1))
def test_condensed_equals_posynomial_only_with_tight_weights(seed):
    rng = np.random.default_rng(seed)
    p = Posynomial([Monomial(float(c), {"x": float(a)}) for c, a in
                    zip(rng.uniform(0.5, 2, 3), [-1.0, 0.5, 2.0])])
    pt = {"x": float(rng.uniform(0.5, 2))}
    tight = weights_from_point(p, pt)
    other = rng.dirichlet(np.ones(3))
    gap = p.log_evaluate(pt) - condense(p, other).log_evaluate(pt)
    if np.max(np.abs(other - tight)) > 1e-3:
        assert gap > 0
    assert condense(p, tight).log_evaluate(pt) == pytest.approx(p.log_evaluate(pt), abs=1e-12)


@given(seed=st.integers(0, 2 ** 32 - 1))
def test_log_space_midpoint_convexity(seed):
    rng = np.random.default_rng(seed)
    p = random_posynomial(rng)
    names = sorted(p.variables | {"x0"})
    u, v = rng.normal(0, 2, len(names)), rng.normal(0, 2, len(names))

    def f(w):
        return p.log_evaluate(dict(zip(names, np.exp(w))))

    assert f((u + v) / 2) <= (f(u) + f(v)) / 2 + 1e-12 * max(1.0, abs(f(u)), abs(f(v)))


# -- solver --------------------------------------------------------------------

def test_box_bound_instance():
    sol = solve_gp(GpProblem((x * y) ** -1, [x / 2, y / 3]))
    assert sol.status is GpStatus.OPTIMAL
    assert sol.values["x"] == pytest.approx(2, rel=1e-7)
    assert sol.values["y"] == pytest.approx(3, rel=1e-7)
    assert sol.objective_value == pytest.approx(1 / 6, rel=1e-7)


def test_unconstrained_instance():
    sol = solve_gp(GpProblem(x + x ** -1))
    assert sol.ok and sol.values["x"] == pytest.approx(1, rel=1e-6)
    assert sol.objective_value == pytest.approx(2, rel=1e-9)


def test_coupled_bounds_instance_satisfies_kkt():
    sol = solve_gp(GpProblem(x ** -1, [x ** 2 * y, Monomial(4) / y]))
    assert sol.values["y"] == pytest.approx(4, rel=1e-7)
    assert sol.values["x"] == pytest.approx(0.5, rel=1e-7)
    assert sol.kkt_residual <= 1e-8


@pytest.mark.parametrize("name,problem,expected", gp_instances(), ids=[c[0] for c in gp_instances()])
def test_battery_instance(name, problem, expected):
    sol = solve_gp(problem)
    assert sol.status is GpStatus.OPTIMAL
    assert sol.objective_value == pytest.approx(expected, rel=1e-6)
    assert sol.max_violation <= 1e-9


def test_battery_summary_passes():
    assert check_gp_battery().passed


def test_amgm_battery_passes(rng):
    assert check_amgm(rng, count=200).passed


def test_infeasible_problem_reports_violation():
    sol = solve_gp(GpProblem(x + x ** -1, [x / 0.5, x ** -1]))
    assert sol.status is GpStatus.INFEASIBLE
    assert sol.max_violation > 0


def test_infeasible_start_is_accepted():
    sol = solve_gp(GpProblem((x * y) ** -1, [x / 2, y / 3]), {"x": 50.0, "y": 1e-3})
    assert sol.ok and sol.objective_value == pytest.approx(1 / 6, rel=1e-7)


def test_objective_scaling_keeps_argmin():
    a = solve_gp(GpProblem(x + 4 * x ** -1, [x / 10]))
    b = solve_gp(GpProblem(7 * (x + 4 * x ** -1), [x / 10]))
    assert b.objective_value == pytest.approx(7 * a.objective_value, rel=1e-9)
    assert b.values["x"] == pytest.approx(a.values["x"], rel=1e-6)


def test_undeclared_variable_rejected():
    with pytest.raises(ValueError, match="undeclared"):
        GpProblem(x + y, [], variables=("x",))


def test_problem_dump_mentions_constraints():
    text = GpProblem(x + y, [x / 2]).dump()
    assert "x" in text and "y" in text


@given(seed=st.integers(0, 2 ** 32 - 1))
def test_solver_matches_cvxpy_on_random_gps(seed):
    cp = pytest.importorskip("cvxpy")
    rng = np.random.default_rng(seed)
    names = ["a", "b", "c"]
    # random objective plus an upper box keeps every instance bounded and feasible
    obj = Posynomial([Monomial(float(rng.uniform(0.5, 2)), {n: float(rng.normal()) for n in names})
                      for _ in range(3)])
    cons = [Posynomial([Monomial(float(rng.uniform(0.1, 0.5)), {n: float(rng.normal()) for n in names})
                        for _ in range(2)]) for _ in range(2)]
    cons += [Monomial(0.01, {n: 1.0}) for n in names] + [Monomial(0.01, {n: -1.0}) for n in names]
    ours = solve_gp(GpProblem(obj, cons))

    v = {n: cp.Variable(pos=True, name=n) for n in names}

    def expr(p):
        return sum(t.coeff * cp.prod([v[k] ** e for k, e in t.exponents.items()]) for t in
                   (p.terms if isinstance(p, Posynomial) else [p]))

    prob = cp.Problem(cp.Minimize(expr(obj)), [expr(c) <= 1 for c in cons])
    prob.solve(gp=True)
    assert prob.status == "optimal"
    assert ours.status is GpStatus.OPTIMAL
    assert ours.objective_value == pytest.approx(prob.value, rel=1e-5)
