import itertools
import math

import pytest

from wildcat.guarantees import taylor_order, taylor_residual, taylor_residual_log, theorem_rank
from wildcat.special import binary_entropy, rho0, w0

# arbitrary precision references
S_TILDE_UNIT = 4.319136566291447141  # 2 / W0(2/e)
SIGMA_4096 = 0.4513260077876245845
R_SUFF_4096 = 11679.14895939983854


def pascal_binom(n, k):
    row = [1]
    for _ in range(n):
        row = [1] + [a + b for a, b in zip(row, row[1:])] + [1]
    return row[k]


class TestTaylorOrder:
    def test_unit_case(self):
        # beta r_k^2 / tau^2 = 1 and n / eps = e
        assert taylor_order(10, 10 / math.e, 1.0, 1.0, 1.0) == pytest.approx(S_TILDE_UNIT, rel=1e-13)
        assert S_TILDE_UNIT == pytest.approx(2 / w0(2 / math.e), rel=1e-13)

    def test_undefined_regime(self):
        with pytest.raises(ValueError):
            taylor_order(4, 4 * math.e, 1.0, 1.0, 1.0)
        with pytest.raises(ValueError):
            taylor_order(4, 0.0, 1.0, 1.0, 1.0)

    def test_constant_kernel(self):
        assert taylor_order(100, 1e-3, 1.0, 0.0, 1.0) == 0.0

    @pytest.mark.parametrize("c", [0.1, 1.0, 5.0])
    def test_increasing_in_inverse_eps(self, c):
        orders = [taylor_order(1000, eps, c, 1.0, 1.0) for eps in (1.0, 1e-2, 1e-5, 1e-10)]
        assert all(b > a for a, b in zip(orders, orders[1:]))

    @pytest.mark.parametrize("n,eps,c", list(itertools.product(
    [2, 64, 4096], [1e-1, 1e-4, 1e-9], [0.05, 1.0, 7.0])))
    def test_truncation_meets_eps(self, n, eps, c):
        s = math.floor(taylor_order(n, eps, c, 1.0, 1.0))
        assert taylor_residual(n, c, 1.0, 1.0, s) <= eps * (1 + 1e-9)


class TestTaylorResidual:
    def test_vanishes(self):
        assert taylor_residual(10, 1.0, 1.0, 1.0, 200) < 1e-100

    def test_formula(self):
        val = taylor_residual(7, 0.5, 2.0, 1.5, 3)
        c = 0.5 * 4 / 2.25
        assert val == pytest.approx(7 * math.exp(c) * (math.e * c / 4) ** 4, rel=1e-13)

    def test_nonincreasing_past_growth(self):
        c = 3.0
        vals = [taylor_residual_log(50, c, 1.0, 1.0, s) for s in range(3, 40)]
        assert all(b <= a for a, b in zip(vals, vals[1:]))

    def test_zero_radius(self):
        assert taylor_residual(5, 1.0, 0.0, 1.0, 0) == 0.0


class TestTheoremRank:
    def test_reference_point(self):
        rep = theorem_rank(4096, 8, 0.5, 1 / math.sqrt(8), 1.0, 1.0)
        assert rep.sigma == pytest.approx(SIGMA_4096, rel=1e-12)
        assert rep.r_sufficient == pytest.approx(R_SUFF_4096, rel=1e-11)
        assert rep.vacuous and not rep.weak_decay and not rep.degenerate
        assert math.isfinite(rep.r_sufficient) and rep.r_sufficient > 0
        assert rep.r_eff == math.ceil(rep.r_sufficient)

    def test_sigma_identity(self):
        rep = theorem_rank(10**6, 16, 1.0, 0.25, 2.0, 3.0)
        r0 = rho0()
        lhs = w0(1 / (2 * r0 * rep.gamma) + 1 / r0) * rep.sigma
        assert lhs == pytest.approx(1.0 + rep.gamma, rel=1e-10)

    def test_delta(self):
        # n must be an integer, so e^8 is rounded to 2981
        rep = theorem_rank(round(math.e**8), 8, 0.5, 1.0, 1.0, 1.0)
        assert rep.delta == pytest.approx(8 / math.log(2981), rel=1e-15)
        assert rep.delta == pytest.approx(1.0, rel=1e-5)

    def test_ratios_echo_inputs(self):
        rep = theorem_rank(1000, 4, 0.75, 0.5, 2.0, 3.0)
        assert rep.gamma == pytest.approx(0.5 * 6 / math.log(1000), rel=1e-15)
        assert rep.delta == pytest.approx(4 / math.log(1000), rel=1e-15)

    def test_bins_use_effective_length(self):
        rep = theorem_rank(8192, 8, 0.5, 0.3, 1.0, 1.0, B=4)
        ref = theorem_rank(2048, 8, 0.5, 0.3, 1.0, 1.0)
        assert rep.n_eff == 2048
        assert rep.sigma == ref.sigma and rep.r_sufficient == ref.r_sufficient
        assert rep.r_total == 4 * ref.r_eff

    def test_flags(self):
        assert theorem_rank(100, 2, 0.25, 1.0, 1.0, 1.0).weak_decay
        rep = theorem_rank(100, 2, 0.5, 1.0, 0.0, 1.0)
        assert rep.degenerate and rep.sigma == 0.0 and math.isfinite(rep.r_sufficient)

    def test_huge_n_stays_finite_in_log(self):
        rep = theorem_rank(10**300, 1000, 2.0, 1.0, 30.0, 30.0)
        assert math.isfinite(rep.log_r_sufficient)
        assert rep.r_sufficient == math.inf and rep.r_total == math.inf

    def test_bad_inputs(self):
        with pytest.raises(ValueError):
            theorem_rank(1, 2, 0.5, 1.0, 1.0, 1.0)
        with pytest.raises(ValueError):
            theorem_rank(100, 2, 0.5, 0.0, 1.0, 1.0)

    def test_nonnegative_fields(self):
        for n, d, a in itertools.product([10, 10**4, 10**9], [1, 8, 64], [0.5, 1.0, 3.0]):
            rep = theorem_rank(n, d, a, 0.2, 1.5, 0.7)
            assert min(rep.gamma, rep.delta, rep.sigma, rep.r_sufficient) >= 0

    def test_text_and_csv(self):
        rep = theorem_rank(4096, 8, 0.5, 0.35, 1.0, 1.0)
        text = rep.to_text()
        assert "vacuous=true" in text and "sigma=" in text
        assert len(rep.csv_header().split(",")) == len(rep.csv_row().split(","))

    def test_entropy_chain(self):
        # (1/sqrt(pi)) n^((sigma+delta) Ent) dominates C(s+d, d) once sigma >= s / log n
        n = 5000
        log_n = math.log(n)
        for s in range(1, 21):
            for d in range(1, 21):
                for stretch in (1.0, 1.3):
                    sigma, delta = stretch * s / log_n, d / log_n
                    log_bound = (log_n * (sigma + delta) * binary_entropy(sigma / (sigma + delta))
                                 - 0.5 * math.log(math.pi))
                    assert log_bound >= math.log(pascal_binom(s + d, d)) - 1e-12
