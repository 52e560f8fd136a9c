import numpy as np
import pytest

import nonloc.variance as variance_module
from nonloc.transform_core import PacketSpec, TransformKind
from nonloc.variance import (
    Harmonic,
    VarianceResult,
    cross_terms_mo,
    default_d_grid,
    fw_pieces,
    gaussian_variance,
    identity_pieces,
    momentum_pieces,
    radial_expectation,
    radial_grid,
    variance_closed,
    variance_fw_closed,
    variance_mo_closed,
    variance_oracle,
    variance_oracle_result,
    variance_sweep,
)
from shared.exceptions import DomainError, GridResolutionError

KINDS = [TransformKind.MO, TransformKind.FW]


class TestClosedForms:

    @pytest.mark.parametrize("closed", [variance_mo_closed, variance_fw_closed])
    def test_narrow_limit(self, closed):
        assert closed(1e-3).normalized == pytest.approx(3.5, rel=5e-3)

    @pytest.mark.parametrize("closed", [variance_mo_closed, variance_fw_closed])
    def test_wide_limit(self, closed):
        assert closed(20.0).normalized == pytest.approx(1.5, rel=1e-2)

    def test_mo_breakdown(self):
        result = variance_mo_closed(1.0)
        assert result.norm_check == pytest.approx(1.0, abs=1e-12)
        assert result.breakdown["r2_11"] == pytest.approx(0.75)
        assert result.value == pytest.approx(result.breakdown["r2_11"] + result.breakdown["r2_22"])

    def test_fw_normalization(self):
        assert variance_fw_closed(0.4).norm_check == 1.0

    def test_gaussian_floor(self):
        assert gaussian_variance(2.0) == pytest.approx(6.0)
        assert variance_closed(None, 2.0).value == pytest.approx(6.0)

    def test_width_validation(self):
        with pytest.raises(DomainError):
            variance_mo_closed(0.0)
        with pytest.raises(DomainError):
            VarianceResult(TransformKind.FW, 1.0, -1.0, 1.0)

    def test_sweep_shape(self):
        grid = default_d_grid()
        assert len(grid) == 60 and grid[0] == pytest.approx(0.05) and grid[-1] == pytest.approx(20.0)
        mo = np.array([r.normalized for r in variance_sweep(TransformKind.MO, grid)])
        fw = np.array([r.normalized for r in variance_sweep(TransformKind.FW, grid)])
        assert np.all(fw < mo)
        assert np.all(fw >= 1.5) and np.all(mo >= 1.5)
        assert np.all(np.diff(mo) < 0) and np.all(np.diff(fw) < 0)
        assert np.all(mo <= 3.5) and np.all(fw <= 3.5)

    def test_sweep_validates_grid(self):
        with pytest.raises(DomainError):
            variance_sweep(TransformKind.MO, [1.0, 0.5])
        with pytest.raises(DomainError):
            variance_sweep(TransformKind.MO, [1.0], method="montecarlo")

    def test_sweep_uses_threads(self, monkeypatch):
        monkeypatch.setenv("DIRAC_NL_THREADS", "4")
        grid = [0.1, 0.5, 1.0, 2.0]
        threaded = [r.value for r in variance_sweep(TransformKind.FW, grid)]
        monkeypatch.setenv("DIRAC_NL_THREADS", "1")
        serial = [r.value for r in variance_sweep(TransformKind.FW, grid)]
        assert threaded == serial


class TestOracle:

    @pytest.mark.parametrize("kind", KINDS)
    @pytest.mark.parametrize("d", [0.1, 0.5, 1.0, 2.0, 5.0])
    def test_agrees_with_closed_form(self, kind, d):
        closed = variance_closed(kind, d).value
        assert abs(variance_oracle(kind, d) - closed) / closed <= 1e-4

    @pytest.mark.parametrize("kind", KINDS)
    def test_normalization(self, kind):
        assert variance_oracle_result(kind, 0.7).norm_check == pytest.approx(1.0, abs=1e-8)

    def test_fw_narrow_limit(self):
        d = 1e-3
        assert variance_oracle(TransformKind.FW, d) / d ** 2 == pytest.approx(3.5, rel=1e-2)

    @pytest.mark.parametrize("d", [0.3, 2.0])
    def test_identity_transform_gives_gaussian(self, d):
        assert variance_oracle(None, d) == pytest.approx(1.5 * d * d, rel=1e-6)

    def test_cross_terms_vanish(self):
        terms = cross_terms_mo(1.0)
        for key in ("r0_12", "r0_21", "r2_12", "r2_21"):
            assert abs(terms[key]) <= 1e-10
        assert terms["r0_11"].real == pytest.approx(0.5, abs=1e-8)
        assert terms["r0_22"].real == pytest.approx(0.5, abs=1e-8)
        assert terms["r2_11"].real == pytest.approx(0.75, rel=1e-6)

    def test_unresolved_grid_raises_after_retries(self, monkeypatch):
        calls = []
        original = variance_module._oracle_once

        def counting(kind, d, intervals):
            calls.append(intervals)
            return original(kind, d, intervals)

        monkeypatch.setattr(variance_module, "GRID_AGREEMENT", 0.0)
        monkeypatch.setattr(variance_module, "_oracle_once", counting)
        with pytest.raises(GridResolutionError) as info:
            variance_oracle(TransformKind.MO, 1.0, intervals=100)
        assert calls == [100, 200, 400]
        assert info.value.coarse != info.value.fine


class TestPieces:

    def test_fw_pieces_are_normalized_pointwise(self):
        packet = PacketSpec(1.0)
        k = np.linspace(0.0, 5.0, 11)
        f = packet.momentum_amplitude(k)
        total = np.zeros_like(k)
        for piece in fw_pieces(packet):
            total += piece.harmonic.weight * np.abs(piece.radial(k)) ** 2
        np.testing.assert_allclose(total, f ** 2, rtol=1e-13)

    def test_mo_pieces_are_normalized_pointwise(self):
        k = np.linspace(0.0, 5.0, 11)
        pieces = momentum_pieces(TransformKind.MO, 1.0)
        grouped = {}
        for piece in pieces:
            grouped[piece.key] = grouped.get(piece.key, 0) + piece.radial(k)
        total = sum(key[1].weight * np.abs(q) ** 2 for key, q in grouped.items())
        np.testing.assert_allclose(total, PacketSpec(1.0).momentum_amplitude(k) ** 2, rtol=1e-13)

    def test_harmonics(self):
        assert Harmonic.S.l == 0 and Harmonic.Z.l == 1
        assert Harmonic.Z.weight + Harmonic.PLUS.weight == pytest.approx(1.0)

    def test_grid_validation(self):
        with pytest.raises(DomainError):
            radial_grid(1.0, 7)
        grid = radial_grid(1.0, 100)
        assert len(grid.u) == 105
        assert grid.k[grid.interior][0] == 0.0

    def test_radial_expectation_order_validation(self):
        grid = radial_grid(1.0, 100)
        with pytest.raises(DomainError):
            radial_expectation(identity_pieces(PacketSpec(1.0)), grid, 1)
