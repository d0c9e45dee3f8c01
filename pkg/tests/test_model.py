import math

import numpy as np
import pytest

from edgecoop.model import (
    BaseStation,
    ChannelModel,
    CostWeights,
    Group,
    Role,
    Task,
    down_time,
    energy,
    exec_time,
    order_by_priority,
    priority,
    queue_time,
    shannon_rate,
    total_delay,
)

CH = ChannelModel()


def make_task(tid=0, u=5000.0, c=9e7, r=5000.0, t_max=20.0, kind=0):
    return Task(id=tid, u=u, c=c, r=r, t_max=t_max, kind=kind)


class TestTypes:
    def test_task_validation(self):
        with pytest.raises(ValueError):
            Task(id=0, u=0, c=1, r=0, t_max=1)
        with pytest.raises(ValueError):
            Task(id=0, u=1, c=-1, r=0, t_max=1)
        with pytest.raises(ValueError):
            Task(id=0, u=1, c=1, r=-1, t_max=1)
        with pytest.raises(ValueError):
            Task(id=0, u=1, c=1, r=0, t_max=0)

    def test_station_validation(self):
        with pytest.raises(ValueError):
            BaseStation(id=0, role=Role.SBS, f=0, m_c=1, m_u=1, s=1)
        with pytest.raises(ValueError):
            BaseStation(id=0, role=Role.SBS, f=1, m_c=1, m_u=1, s=10, r_used=11)
        bs = BaseStation(id=1, role=Role.MBS, f=1e10, m_c=1e10, m_u=1e8, s=1e5, r_used=4e4)
        assert bs.cache_free == pytest.approx(6e4)

    def test_group_validation(self):
        with pytest.raises(ValueError):
            Group(id=0, mbs=1, sbs_list=[1, 2])
        g = Group(id=0, mbs=1, sbs_list=[2, 3])
        assert g.stations == [1, 2, 3]

    def test_weights_validation(self):
        with pytest.raises(ValueError):
            CostWeights(coe=1.5)
        with pytest.raises(ValueError):
            CostWeights(alpha1=-0.1)


class TestShannonRate:
    def test_monotone_in_distance(self):
        assert shannon_rate(CH, 0.1, 50.0) > shannon_rate(CH, 0.1, 120.0)

    def test_monotone_in_power(self):
        assert shannon_rate(CH, 0.2, 100.0) > shannon_rate(CH, 0.1, 100.0)

    def test_zero_snr_limit(self):
        assert shannon_rate(CH, 0.0, 100.0) == 0.0

    def test_frozen_value_100m(self):
        # B log2(1 + P d^-4 / (N0 B)) at the default constants, d = 100 m,
        # evaluated independently and frozen.
        assert shannon_rate(CH, 0.1, 100.0) == pytest.approx(259045600.8569464, rel=1e-12)

    def test_invalid_distance(self):
        with pytest.raises(ValueError):
            shannon_rate(CH, 0.1, 0.0)

    def test_monotonicity_randomized(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            d1, d2 = sorted(rng.uniform(1.0, 500.0, size=2))
            if d1 == d2:
                continue
            assert shannon_rate(CH, 0.1, d1) > shannon_rate(CH, 0.1, d2)


class TestDelayComponents:
    def test_exec_ratio(self):
        assert exec_time(make_task(c=10), 10.0) == 1.0

    def test_exec_table_workload(self):
        # 18000 cycles/bit on a 5 kbit input at 10 GHz
        assert exec_time(make_task(c=18000 * 5000), 1e10) == pytest.approx(0.009)

    def test_exec_invalid(self):
        with pytest.raises(ValueError):
            exec_time(make_task(), 0.0)

    def test_down_zero_result(self):
        assert down_time(make_task(r=0.0), 1e6) == 0.0

    def test_down_ratio(self):
        assert down_time(make_task(r=2000.0), 1000.0) == 2.0

    def test_down_frozen_composition(self):
        # 5 kbit result over the 100 m user link
        rate = shannon_rate(CH, 0.1, 100.0)
        assert down_time(make_task(r=5000.0), rate) == pytest.approx(1.9301620963488844e-05, rel=1e-12)

    def test_down_invalid(self):
        with pytest.raises(ValueError):
            down_time(make_task(), 0.0)

    def test_queue_empty(self):
        assert queue_time([], [], 1e9) == 0.0

    def test_queue_single(self):
        ahead = make_task(c=1e9, u=2000.0)
        assert queue_time([ahead], [1000.0], 1e9) == pytest.approx(1.0 + 2.0)

    def test_queue_mismatch(self):
        with pytest.raises(ValueError):
            queue_time([make_task()], [], 1e9)

    def test_queue_brute_force(self):
        rng = np.random.default_rng(11)
        tasks = [make_task(tid=i, u=float(rng.integers(1000, 9000)),
                           c=float(rng.integers(1e6, 1e8))) for i in range(3)]
        rates = [float(rng.uniform(1e5, 1e7)) for _ in range(3)]
        f = 5e9
        expected = 0.0
        for t, v in zip(tasks, rates):
            expected += t.c / f
            expected += t.u / v
        assert queue_time(tasks, rates, f) == pytest.approx(expected, rel=1e-12)

    def test_total_delay_zero(self):
        t = make_task(c=1e-9, r=0.0)
        assert total_delay(t, 1e9, 1e6) == pytest.approx(0.0, abs=1e-15)

    def test_total_delay_components(self):
        # queue 3 s, exec 1 s, down 2 s
        ahead = make_task(tid=1, c=1e9, u=2e6)
        t = make_task(tid=2, c=1e9, r=2e6)
        got = total_delay(t, 1e9, 1e6, [ahead], [1e6])
        assert got == pytest.approx(3.0 + 1.0 + 2.0)

    def test_total_delay_compositional(self):
        rng = np.random.default_rng(23)
        for _ in range(25):
            n = int(rng.integers(0, 4))
            ahead = [make_task(tid=i, u=float(rng.uniform(1e3, 1e4)),
                               c=float(rng.uniform(1e6, 1e8))) for i in range(n)]
            rates = [float(rng.uniform(1e5, 1e7)) for _ in range(n)]
            t = make_task(tid=99, u=float(rng.uniform(1e3, 1e4)),
                          c=float(rng.uniform(1e6, 1e8)), r=float(rng.uniform(0, 1e4)))
            f = float(rng.uniform(1e9, 1e10))
            v = float(rng.uniform(1e5, 1e7))
            got = total_delay(t, f, v, ahead, rates)
            want = queue_time(ahead, rates, f) + exec_time(t, f) + down_time(t, v)
            assert got == pytest.approx(want, rel=1e-12)
            assert got >= 0.0 and math.isfinite(got)


class TestEnergy:
    def test_zero_coefficients(self):
        ch = ChannelModel(tx_power_user=1e-30, kappa=1e-40)
        assert energy(make_task(), 1e6, 1e9, ch) == pytest.approx(0.0, abs=1e-12)

    def test_upload_term_only(self):
        ch = ChannelModel(tx_power_user=0.1, kappa=1e-40)
        got = energy(make_task(u=1000.0), 1000.0, 1e9, ch)
        assert got == pytest.approx(0.1, rel=1e-6)

    def test_compute_term_frozen(self):
        # kappa f^2 c = 1e-26 * (1e10)^2 * 9e7 = 90 J
        ch = ChannelModel(tx_power_user=1e-30, kappa=1e-26)
        got = energy(make_task(c=9e7), 1e12, 1e10, ch)
        assert got == pytest.approx(90.0, rel=1e-9)

    def test_invalid(self):
        with pytest.raises(ValueError):
            energy(make_task(), 0.0, 1e9, CH)
        with pytest.raises(ValueError):
            energy(make_task(), 1e6, 0.0, CH)


class TestPriority:
    def test_no_speedup_no_upload_weight(self):
        ch = ChannelModel(f_local=1e10)
        w = CostWeights(alpha1=0.0)
        assert priority(make_task(), 1e6, 1e10, ch, w) == pytest.approx(0.0)

    def test_pure_upload_weight(self):
        w = CostWeights(alpha1=1.0)
        t = make_task(u=4000.0)
        assert priority(t, 8000.0, 1e10, CH, w) == pytest.approx(2.0)

    def test_frozen_mixed_instance(self):
        # alpha1 = 0.5, c = 9e7, f_local = 1 GHz, f_remote = 10 GHz,
        # u = 5 kbit over the 100 m user link; frozen from direct evaluation.
        w = CostWeights(alpha1=0.5)
        rate = shannon_rate(CH, 0.1, 100.0)
        t = make_task(u=5000.0, c=9e7)
        assert priority(t, rate, 1e10, CH, w) == pytest.approx(25904.60058569464, rel=1e-12)

    def test_ranking_invariant_under_cycle_scaling(self):
        # with alpha1 = 0 the score is linear in c, so scaling every c by a
        # common positive factor preserves the ordering
        w = CostWeights(alpha1=0.0)
        rng = np.random.default_rng(3)
        tasks = [make_task(tid=i, c=float(rng.uniform(1e6, 1e9))) for i in range(6)]
        rates = [float(rng.uniform(1e5, 1e7)) for _ in range(6)]
        base = order_by_priority(tasks, rates, 1e10, CH, w)
        scaled = [Task(id=t.id, u=t.u, c=t.c * 7.5, r=t.r, t_max=t.t_max, kind=t.kind)
                  for t in tasks]
        again = order_by_priority(scaled, rates, 1e10, CH, w)
        assert [t.id for t in base] == [t.id for t in again]

    def test_tie_break_ascending_id(self):
        w = CostWeights(alpha1=1.0)
        a = make_task(tid=5, u=1000.0)
        b = make_task(tid=2, u=1000.0)
        ordered = order_by_priority([a, b], [1e6, 1e6], 1e10, CH, w)
        assert [t.id for t in ordered] == [2, 5]
