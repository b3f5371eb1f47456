"""Signed distance, offline robustness, trace IO, and the online monitor."""

import math
import random

import pytest

import stlmon.monitor
from gen import random_instances, random_trace
from oracle import naive_bool, naive_robustness
from stlmon.formula import (
    Comparison, Membership, SignalDomain, horizon, parse_formula,
)
from stlmon.monitor import (
    OnlineMonitor, Sample, Trace, TraceError, Value, WarmUp, load_trace_csv,
    monitor_new, monitor_reset, monitor_step, robustness_offline,
    signed_distance, verdict,
)
from stlmon.semantics import SemanticsConfig

CLASSICAL = SemanticsConfig(kind="classical")
SSS = SemanticsConfig(kind="sss")
LSE = SemanticsConfig(kind="lse")

HOPPER = "ev[0:15](v > 0.5) and alw[0:20]((z > 0.7) and (abs(a) < 1))"


class TestSignedDistance:
    def test_greater_than(self):
        assert signed_distance(0.7, Comparison("v", ">", 0.5)) == \
            pytest.approx(0.2)

    def test_less_than(self):
        assert signed_distance(0.7, Comparison("v", "<", 0.5)) == \
            pytest.approx(-0.2)

    def test_strictness_does_not_change_distance(self):
        assert signed_distance(0.7, Comparison("v", ">", 0.5)) == \
            signed_distance(0.7, Comparison("v", ">=", 0.5))

    def test_membership(self):
        assert signed_distance(0.2, Membership("a", -1.0, 1.0)) == 0.8

    def test_membership_outside_is_negative(self):
        assert signed_distance(1.5, Membership("a", -1.0, 1.0)) == -0.5

    def test_normalized(self):
        domains = {"a": SignalDomain("a", -8.0, 8.0)}
        assert signed_distance(0.2, Membership("a", -1.0, 1.0), domains,
                               normalize=True) == 0.05

    def test_normalize_without_domain_rejected(self):
        with pytest.raises(TraceError, match="domain"):
            signed_distance(0.2, Membership("a", -1.0, 1.0), {},
                            normalize=True)

    def test_normalized_invariant_under_power_of_two_rescale(self):
        domains1 = {"x": SignalDomain("x", -2.0, 2.0)}
        k = 2.0 ** 7
        domains2 = {"x": SignalDomain("x", -2.0 * k, 2.0 * k)}
        for x, c in ((0.3, 0.1), (-1.7, 0.4), (0.9, -1.2)):
            a = signed_distance(x, Comparison("x", ">", c), domains1, True)
            b = signed_distance(k * x, Comparison("x", ">", k * c), domains2,
                                True)
            assert a == b

    def test_normalized_invariant_under_general_rescale(self):
        domains1 = {"x": SignalDomain("x", -2.0, 2.0)}
        k = 3.7
        domains2 = {"x": SignalDomain("x", -2.0 * k, 2.0 * k)}
        a = signed_distance(0.3, Comparison("x", ">", 0.1), domains1, True)
        b = signed_distance(k * 0.3, Comparison("x", ">", k * 0.1), domains2,
                            True)
        assert a == pytest.approx(b, rel=1e-12)


class TestVerdict:
    def test_signs(self):
        assert verdict(0.1) == "sat"
        assert verdict(-0.1) == "unsat"
        assert verdict(0.0) == "marginal"


class TestTraceTypes:
    def test_unequal_lengths_rejected(self):
        with pytest.raises(TraceError, match="unequal"):
            Trace({"x": (1.0, 2.0), "y": (1.0,)})

    def test_non_finite_rejected(self):
        with pytest.raises(TraceError, match="non-finite"):
            Trace({"x": (1.0, math.nan)})

    def test_empty_needs_length(self):
        with pytest.raises(TraceError):
            Trace({})
        assert Trace({}, length=3).length == 3

    def test_zero_length_rejected(self):
        with pytest.raises(TraceError):
            Trace({"x": ()})

    def test_sample_non_finite_rejected(self):
        with pytest.raises(TraceError):
            Sample({"x": math.inf})


class TestLoadTraceCsv:
    def test_basic(self, tmp_path):
        path = tmp_path / "t.csv"
        path.write_text("x,y\n1,4\n2,5\n3,6\n")
        tr = load_trace_csv(str(path))
        assert tr.signals["x"] == (1.0, 2.0, 3.0)
        assert tr.length == 3

    def test_time_column_dropped(self, tmp_path):
        path = tmp_path / "t.csv"
        path.write_text("time,x\n0.0,1\n0.5,2\n1.0,3\n")
        tr = load_trace_csv(str(path))
        assert set(tr.signals) == {"x"}
        assert tr.length == 3

    def test_time_must_increase(self, tmp_path):
        path = tmp_path / "t.csv"
        path.write_text("time,x\n0.0,1\n0.5,2\n0.5,3\n")
        with pytest.raises(TraceError, match="strictly increasing"):
            load_trace_csv(str(path))

    def test_ragged_row_rejected(self, tmp_path):
        path = tmp_path / "t.csv"
        path.write_text("x,y\n1,2\n3\n")
        with pytest.raises(TraceError, match="line 3"):
            load_trace_csv(str(path))

    def test_non_numeric_rejected(self, tmp_path):
        path = tmp_path / "t.csv"
        path.write_text("x\n1\noops\n")
        with pytest.raises(TraceError, match="non-numeric"):
            load_trace_csv(str(path))

    def test_no_rows_rejected(self, tmp_path):
        path = tmp_path / "t.csv"
        path.write_text("x,y\n")
        with pytest.raises(TraceError, match="no data rows"):
            load_trace_csv(str(path))

    def test_duplicate_header_rejected(self, tmp_path):
        path = tmp_path / "t.csv"
        path.write_text("x,x\n1,2\n")
        with pytest.raises(TraceError, match="duplicate"):
            load_trace_csv(str(path))


class TestOfflineRobustness:
    def test_always_is_window_min(self):
        tr = Trace({"x": (1.0, 2.0, 3.0)})
        f = parse_formula("alw[0:2](x>0)")
        assert robustness_offline(f, tr, 0, CLASSICAL) == 1.0

    def test_until_example(self):
        tr = Trace({"x": (1.0, 1.0, 1.0), "y": (-1.0, -1.0, 1.0)})
        f = parse_formula("(x > 0) until[0:2] (y > 0)")
        assert robustness_offline(f, tr, 0, CLASSICAL) == 1.0

    def test_eventually_is_window_max(self):
        tr = Trace({"x": (1.0, 2.0, 3.0)})
        f = parse_formula("ev[0:2](x>2)")
        assert robustness_offline(f, tr, 0, CLASSICAL) == 1.0

    def test_true_is_plus_infinity(self):
        tr = Trace({"x": (1.0,)})
        assert robustness_offline(parse_formula("true"), tr, 0,
                                  CLASSICAL) == math.inf

    def test_true_conjunct_is_neutral(self):
        tr = Trace({"x": (0.4,)})
        lhs = robustness_offline(parse_formula("true and x > 0"), tr, 0,
                                 CLASSICAL)
        rhs = robustness_offline(parse_formula("x > 0"), tr, 0, CLASSICAL)
        assert lhs == rhs

    def test_anchor_beyond_window_rejected(self):
        tr = Trace({"x": (1.0, 2.0, 3.0)})
        f = parse_formula("alw[0:2](x>0)")
        with pytest.raises(TraceError, match="too short"):
            robustness_offline(f, tr, 1, CLASSICAL)

    def test_negative_anchor_rejected(self):
        tr = Trace({"x": (1.0,)})
        with pytest.raises(TraceError, match="negative"):
            robustness_offline(parse_formula("x>0"), tr, -1, CLASSICAL)

    def test_missing_signal_rejected(self):
        tr = Trace({"x": (1.0,)})
        with pytest.raises(TraceError, match="'y' missing"):
            robustness_offline(parse_formula("y>0"), tr, 0, CLASSICAL)

    @pytest.mark.parametrize("cfg", [CLASSICAL, SSS, LSE],
                             ids=lambda c: c.kind)
    def test_implies_equals_negated_disjunction(self, cfg):
        rng = random.Random(99)
        for _ in range(20):
            sigs = random_trace(rng, length=1)
            tr = Trace(sigs)
            a = robustness_offline(parse_formula("x > 0 implies y > 0"),
                                   tr, 0, cfg)
            b = robustness_offline(parse_formula("(not x > 0) or (y > 0)"),
                                   tr, 0, cfg)
            assert a == b

    def test_abs_band_matches_two_sided_margin(self):
        rng = random.Random(100)
        f = parse_formula("abs(a) < 1")
        for _ in range(50):
            a = rng.uniform(-2, 2)
            tr = Trace({"a": (a,)})
            rho = robustness_offline(f, tr, 0, CLASSICAL)
            assert rho == min(1.0 - a, a + 1.0)

    def test_abs_band_matches_conjunction_classically(self):
        rng = random.Random(101)
        band = parse_formula("abs(a) < 1")
        pair = parse_formula("(a < 1) and (a > -1)")
        for _ in range(50):
            tr = Trace({"a": (rng.uniform(-2, 2),)})
            assert robustness_offline(band, tr, 0, CLASSICAL) == \
                robustness_offline(pair, tr, 0, CLASSICAL)

    def test_agrees_with_naive_evaluator(self):
        rng = random.Random(515)
        for f, sigs in random_instances(rng, 40):
            tr = Trace(sigs)
            h = horizon(f)
            for t in (0, (tr.length - 1 - h) // 2, tr.length - 1 - h):
                assert robustness_offline(f, tr, t, CLASSICAL) == \
                    naive_robustness(f, sigs, t)

    def test_sign_soundness_against_boolean_checker(self):
        rng = random.Random(516)
        for f, sigs in random_instances(rng, 60):
            tr = Trace(sigs)
            h = horizon(f)
            for t in (0, tr.length - 1 - h):
                rho = robustness_offline(f, tr, t, CLASSICAL)
                satisfied = naive_bool(f, sigs, t)
                if rho > 0:
                    assert satisfied
                elif rho < 0:
                    assert not satisfied


class TestTemporalAggModes:
    def _pure_temporal(self, rng, depth):
        from stlmon.formula import Always, Eventually, Interval, Not, Until
        from gen import random_predicate
        if depth == 0:
            return random_predicate(rng)
        lo = rng.randint(0, 2)
        iv = Interval(lo, lo + rng.randint(0, 2))
        kind = rng.choice(("ev", "alw", "until", "not"))
        if kind == "not":
            return Not(self._pure_temporal(rng, depth - 1))
        if kind == "ev":
            return Eventually(iv, self._pure_temporal(rng, depth - 1))
        if kind == "alw":
            return Always(iv, self._pure_temporal(rng, depth - 1))
        return Until(iv, self._pure_temporal(rng, depth - 1),
                     self._pure_temporal(rng, depth - 1))

    def test_pointwise_windows_bypass_configured_aggregators(
            self, monkeypatch):
        calls = []
        real_conj = stlmon.monitor.conj
        real_disj = stlmon.monitor.disj
        monkeypatch.setattr(
            stlmon.monitor, "conj",
            lambda v, c: (calls.append("conj"), real_conj(v, c))[1])
        monkeypatch.setattr(
            stlmon.monitor, "disj",
            lambda v, c: (calls.append("disj"), real_disj(v, c))[1])
        cfg = SemanticsConfig(kind="sss", temporal_agg="pointwise")
        rng = random.Random(52)
        for _ in range(20):
            f = self._pure_temporal(rng, 3)
            sigs = random_trace(rng, length=20)
            robustness_offline(f, Trace(sigs), 0, cfg)
        assert calls == []

    def test_pointwise_spatial_nodes_still_aggregate(self, monkeypatch):
        calls = []
        real_conj = stlmon.monitor.conj
        monkeypatch.setattr(
            stlmon.monitor, "conj",
            lambda v, c: (calls.append("conj"), real_conj(v, c))[1])
        cfg = SemanticsConfig(kind="sss", temporal_agg="pointwise")
        tr = Trace({"x": (1.0,), "y": (2.0,)})
        robustness_offline(parse_formula("x > 0 and y > 0"), tr, 0, cfg)
        assert calls == ["conj"]

    def test_semantic_windows_do_aggregate(self, monkeypatch):
        calls = []
        real_conj = stlmon.monitor.conj
        monkeypatch.setattr(
            stlmon.monitor, "conj",
            lambda v, c: (calls.append("conj"), real_conj(v, c))[1])
        cfg = SemanticsConfig(kind="sss", temporal_agg="semantic")
        tr = Trace({"x": (1.0, 2.0, 3.0)})
        robustness_offline(parse_formula("alw[0:2](x > 0)"), tr, 0, cfg)
        assert calls == ["conj"]

    def test_pointwise_value_is_kind_invariant(self):
        rng = random.Random(53)
        for _ in range(30):
            f = self._pure_temporal(rng, 3)
            sigs = random_trace(rng, length=20)
            tr = Trace(sigs)
            values = {
                kind: robustness_offline(
                    f, tr, 0,
                    SemanticsConfig(kind=kind, temporal_agg="pointwise"))
                for kind in ("classical", "lse", "sss")
            }
            assert values["classical"] == values["lse"] == values["sss"]


class TestOnlineMonitor:
    def test_warm_up_then_value(self):
        mon = monitor_new(parse_formula("alw[0:2](x>0)"), CLASSICAL)
        results = [monitor_step(mon, {"x": v}) for v in (1.0, 2.0, 3.0)]
        assert results == [WarmUp(), WarmUp(), Value(1.0)]

    def test_horizon_zero_yields_value_immediately(self):
        mon = monitor_new(parse_formula("v > 0.5"), CLASSICAL)
        assert mon.horizon == 0
        assert monitor_step(mon, {"v": 0.4}) == Value(0.4 - 0.5)

    def test_constant_stream_full_window(self):
        mon = monitor_new(parse_formula(HOPPER), CLASSICAL)
        assert mon.horizon == 20
        sample = {"v": 0.6, "z": 0.9, "a": 0.0}
        results = [monitor_step(mon, sample) for _ in range(21)]
        assert all(r == WarmUp() for r in results[:20])
        # liveness margin 0.6-0.5 is below safety margin min(0.9-0.7, 1.0)
        assert results[20] == Value(0.6 - 0.5)

    def test_missing_signal_rejected(self):
        mon = monitor_new(parse_formula("x > 0 and y > 0"), CLASSICAL)
        with pytest.raises(TraceError, match="missing signals: y"):
            monitor_step(mon, {"x": 1.0})

    def test_extra_signals_ignored(self):
        mon = monitor_new(parse_formula("x > 0"), CLASSICAL)
        assert monitor_step(mon, {"x": 1.0, "junk": 9.0}) == Value(1.0)

    def test_reset_restarts_warm_up(self):
        mon = monitor_new(parse_formula("alw[0:2](x>0)"), CLASSICAL)
        monitor_step(mon, {"x": 1.0})
        monitor_step(mon, {"x": 2.0})
        monitor_reset(mon)
        assert mon.t == 0
        results = [monitor_step(mon, {"x": v}) for v in (1.0, 2.0, 3.0)]
        assert results == [WarmUp(), WarmUp(), Value(1.0)]

    def test_reset_on_fresh_monitor_is_noop(self):
        mon = monitor_new(parse_formula("x>0"), CLASSICAL)
        monitor_reset(mon)
        assert mon.t == 0
        assert monitor_step(mon, {"x": 2.0}) == Value(2.0)

    def test_replay_after_reset_is_identical(self):
        rng = random.Random(54)
        f = parse_formula("ev[0:3](x > 0.5)")
        stream = [{"x": rng.uniform(-2, 2)} for _ in range(12)]
        mon = monitor_new(f, SSS)
        first = [monitor_step(mon, s) for s in stream]
        monitor_reset(mon)
        second = [monitor_step(mon, s) for s in stream]
        assert first == second

    def test_accepts_sample_objects(self):
        mon = monitor_new(parse_formula("x>0"), CLASSICAL)
        assert monitor_step(mon, Sample({"x": 1.5})) == Value(1.5)

    @pytest.mark.parametrize("cfg", [CLASSICAL, SSS, LSE],
                             ids=lambda c: c.kind)
    def test_online_equals_offline_bitwise(self, cfg):
        rng = random.Random(517)
        for f, sigs in random_instances(rng, 25):
            tr = Trace(sigs)
            mon = OnlineMonitor(f, cfg)
            h = mon.horizon
            names = list(sigs)
            for t in range(tr.length):
                result = mon.step({n: sigs[n][t] for n in names})
                if t < h:
                    assert result == WarmUp()
                else:
                    offline = robustness_offline(f, tr, t - h, cfg)
                    assert result == Value(offline)
