"""Unit tests for the sampled small-signal models and their identities."""

from __future__ import annotations

import cmath
import dataclasses

import numpy as np
import pytest

from dabss import (P_MINUS, P_PLUS, S_MINUS, S_PLUS, SURFACES, DabParams,
                   FrequencyResponseRow, ResolventSingularityError, Surface,
                   bode_sweep, build_dab, control_input_vector, difference_envelope,
                   half_cycle_model, propagate, rebased_input_vector,
                   relative_residual, resolvent_similarity_residual,
                   solve_periodic_fixed_point, sweep_frequencies,
                   transfer_difference, transfer_difference_residual,
                   transfer_fixed_freq, transfer_same_cycle,
                   verify_surface_equivalence)
from tests.conftest import REFERENCE_KWARGS, fd_sensitivities, random_params


def unit_circle(points: int, t_half: float | None = None) -> np.ndarray:
    """Evenly spaced z values on the upper half unit circle (dc excluded)."""
    thetas = np.linspace(0.0, np.pi, points + 1)[1:]
    return np.exp(1j * thetas)


class TestSurface:
    def test_canonical_registry(self):
        assert set(SURFACES) == {"P+", "S+", "P-", "S-"}
        assert SURFACES["P+"] is P_PLUS
        assert (P_PLUS.a, P_PLUS.b, P_PLUS.polarity) == (1, 2, -1)
        assert (S_PLUS.a, S_PLUS.b, S_PLUS.polarity) == (2, 3, +1)
        assert (P_MINUS.a, P_MINUS.b, P_MINUS.polarity) == (3, 4, -1)
        assert (S_MINUS.a, S_MINUS.b, S_MINUS.polarity) == (4, 1, +1)

    def test_non_consecutive_intervals_rejected(self):
        with pytest.raises(ValueError):
            Surface("bad", 1, 3, -1)

    def test_bad_polarity_rejected(self):
        with pytest.raises(ValueError):
            Surface("bad", 1, 2, 0)

    def test_empty_label_rejected(self):
        with pytest.raises(ValueError):
            Surface("", 1, 2, -1)


class TestHalfCycleModel:
    def test_surface_fixed_points_are_the_boundary_states(self, ref_dab):
        # Each surface samples one interval boundary of the periodic orbit.
        x0 = solve_periodic_fixed_point(ref_dab.schedule)
        x1, x2, x3, _ = propagate(ref_dab.schedule, x0)
        for surface, expected in ((P_PLUS, x0), (S_PLUS, x1), (P_MINUS, x2), (S_MINUS, x3)):
            model = half_cycle_model(ref_dab, surface)
            assert relative_residual(model.x_star, expected) < 1e-10, surface.label

    def test_fixed_point_closes_the_half_cycle(self, ref_dab):
        for surface in SURFACES.values():
            m = half_cycle_model(ref_dab, surface)
            assert relative_residual(m.phi @ m.x_star + m.g, m.x_star) < 1e-12

    def test_end_states_chain_through_the_segments(self, ref_dab):
        m = half_cycle_model(ref_dab, P_PLUS)
        from dabss import RECTIFY
        assert relative_residual(RECTIFY @ m.x_b_end, m.x_star) < 1e-12

    def test_skewed_timing_rejected_on_straddling_surfaces_only(self, ref_params):
        skewed = build_dab(ref_params, t3_skew=0.01 * ref_params.t_half)
        half_cycle_model(skewed, P_PLUS)
        half_cycle_model(skewed, P_MINUS)
        for surface in (S_PLUS, S_MINUS):
            with pytest.raises(ValueError):
                half_cycle_model(skewed, surface)

    def test_sensitivities_match_finite_differences(self, ref_dab):
        for surface in SURFACES.values():
            model, fd_a, fd_b = fd_sensitivities(ref_dab, surface)
            assert relative_residual(fd_a, model.sens_a) < 1e-8, surface.label
            assert relative_residual(fd_b, model.sens_b) < 1e-8, surface.label

    def test_ramp_amplitude_only_scales_the_control_gain(self, ref_params):
        base = half_cycle_model(build_dab(ref_params), P_PLUS)
        doubled_params = dataclasses.replace(ref_params, Vr=2.0 * ref_params.Vr)
        doubled = half_cycle_model(build_dab(doubled_params), P_PLUS)
        np.testing.assert_array_equal(doubled.phi, base.phi)
        np.testing.assert_array_equal(doubled.x_star, base.x_star)
        assert doubled.comp_gain == pytest.approx(0.5 * base.comp_gain, rel=1e-15)
        np.testing.assert_allclose(doubled.b_cur, 0.5 * base.b_cur, rtol=1e-15)
        np.testing.assert_allclose(doubled.b_next, 0.5 * base.b_next, rtol=1e-15)

    def test_timing_law_antisymmetry_of_input_vectors(self, ref_dab):
        # The leading edge enters with the opposite sign of the trailing edge:
        # b_cur is built from +sens_a, b_next from -sens_b, scaled identically.
        for surface in SURFACES.values():
            m = half_cycle_model(ref_dab, surface)
            np.testing.assert_allclose(
                m.b_cur, surface.polarity * m.comp_gain * m.sens_a, rtol=1e-15)
            np.testing.assert_allclose(
                m.b_next, -surface.polarity * m.comp_gain * m.sens_b, rtol=1e-15)

    def test_input_vector_assembly(self, ref_dab):
        m = half_cycle_model(ref_dab, P_PLUS)
        z = 0.3 + 0.4j
        np.testing.assert_allclose(control_input_vector(m, z), m.b_cur + z * m.b_next,
                                   rtol=1e-15)
        np.testing.assert_allclose(rebased_input_vector(m, z),
                                   z * m.b_cur + m.phi @ m.b_next, rtol=1e-15)


class TestTransferFunctions:
    def test_fixed_freq_matches_hand_resolvent(self, ref_dab):
        m = half_cycle_model(ref_dab, P_PLUS)
        z = cmath.exp(0.7j)
        resolvent = np.linalg.inv(z * np.eye(2) - m.phi)
        expected = ref_dab.c_phys @ resolvent @ (m.b_cur + z * m.b_next)
        np.testing.assert_allclose(transfer_fixed_freq(m, ref_dab.c_phys, z), expected,
                                   rtol=1e-12)

    def test_conjugate_symmetry(self, ref_dab):
        m = half_cycle_model(ref_dab, P_PLUS)
        for z in unit_circle(7):
            h = transfer_fixed_freq(m, ref_dab.c_phys, z)
            h_conj = transfer_fixed_freq(m, ref_dab.c_phys, np.conj(z))
            np.testing.assert_allclose(h_conj, np.conj(h), rtol=1e-12)

    def test_pole_evaluation_raises(self, ref_dab):
        m = half_cycle_model(ref_dab, P_PLUS)
        pole = complex(np.linalg.eigvals(m.phi)[0])
        with pytest.raises(ResolventSingularityError):
            transfer_fixed_freq(m, ref_dab.c_phys, pole)

    def test_difference_dual_paths_agree_on_the_unit_circle(self, ref_dab):
        m = half_cycle_model(ref_dab, P_PLUS)
        worst = max(transfer_difference_residual(m, ref_dab.c_phys, z)
                    for z in unit_circle(25))
        assert worst < 1e-12

    def test_difference_vanishes_at_dc(self, ref_dab):
        m = half_cycle_model(ref_dab, P_PLUS)
        diff = transfer_difference(m, ref_dab.c_phys, 1.0)
        assert np.all(diff == 0.0)
        assert transfer_difference_residual(m, ref_dab.c_phys, 1.0) == 0.0

    def test_difference_raises_when_tolerance_is_undercut(self, ref_dab):
        m = half_cycle_model(ref_dab, P_PLUS)
        # Find a point with a nonzero (if tiny) cross-check residual, then
        # demand better than that: the guard must trip.
        for z in unit_circle(50):
            res = transfer_difference_residual(m, ref_dab.c_phys, z)
            if res > 0.0:
                with pytest.raises(ArithmeticError):
                    transfer_difference(m, ref_dab.c_phys, z, rtol=res / 2.0)
                return
        pytest.fail("no grid point produced a nonzero dual-path residual")

    def test_envelope_bounds_the_difference(self, ref_dab):
        m = half_cycle_model(ref_dab, P_PLUS)
        for z in unit_circle(25):
            diff = transfer_difference(m, ref_dab.c_phys, z)
            assert np.linalg.norm(diff) <= difference_envelope(m, ref_dab.c_phys, z) * (1 + 1e-12)

    def test_same_cycle_approximation_degrades_with_frequency(self, ref_dab):
        # ||H_fix - H_sc|| relative to ||H_fix|| should grow monotonically in
        # the envelope sense from dc toward the band edge on a coarse grid.
        m = half_cycle_model(ref_dab, P_PLUS)
        freqs = np.geomspace(100.0, 0.5 / m.t_half * 0.9, 8)
        gaps = []
        for f in freqs:
            z = cmath.exp(2j * cmath.pi * f * m.t_half)
            gaps.append(difference_envelope(m, ref_dab.c_phys, z))
        assert all(a < b for a, b in zip(gaps, gaps[1:]))


class TestResolventSimilarity:
    def test_random_conjugations_satisfy_the_identity(self):
        rng = np.random.default_rng(31)
        for _ in range(20):
            n = int(rng.integers(2, 6))
            a = rng.standard_normal((n, n))
            t = rng.standard_normal((n, n)) + 3.0 * np.eye(n)
            if np.linalg.cond(t) > 1e6:
                continue
            z = complex(2.0 * np.exp(2j * np.pi * rng.uniform()))
            assert resolvent_similarity_residual(a, t, z) < 1e-12

    def test_identity_transform_gives_zero_residual(self):
        a = np.array([[0.0, 1.0], [-2.0, -0.3]])
        assert resolvent_similarity_residual(a, np.eye(2), 2.0 + 1.0j) < 1e-15


class TestSurfaceEquivalence:
    @pytest.mark.parametrize("pair", [(P_PLUS, S_PLUS), (P_MINUS, S_MINUS)])
    def test_equivalent_pairs_pass_on_the_reference(self, ref_dab, pair):
        checks = verify_surface_equivalence(ref_dab, *pair, z_grid=unit_circle(64))
        assert len(checks) == 3
        for check in checks:
            assert check.passed, f"{check.name}: {check.residual:.3e}"
            assert check.note == ""

    def test_equivalent_pairs_pass_on_random_designs(self):
        rng = np.random.default_rng(404)
        grid = unit_circle(16)
        for _ in range(5):
            dab = build_dab(random_params(rng))
            for pair in ((P_PLUS, S_PLUS), (P_MINUS, S_MINUS)):
                checks = verify_surface_equivalence(dab, *pair, z_grid=grid)
                assert all(c.passed for c in checks)

    def test_non_adjacent_pair_rejected(self, ref_dab):
        with pytest.raises(ValueError):
            verify_surface_equivalence(ref_dab, P_PLUS, P_MINUS, z_grid=unit_circle(4))

    def test_same_polarity_fails_as_a_pure_sign_flip(self, ref_dab):
        # Forcing the secondary surface to the primary's comparator polarity
        # must break the input-vector identity by exactly a global sign.
        wrong = Surface("S+", 2, 3, -1)
        checks = verify_surface_equivalence(ref_dab, P_PLUS, wrong,
                                            z_grid=unit_circle(16))
        by_name = {c.name.rsplit("/", 1)[-1]: c for c in checks}
        assert by_name["similarity"].passed
        assert not by_name["input-vector"].passed
        assert by_name["input-vector"].note == (
            "matches after a global sign flip: surface polarity mismatch")


class TestSweeps:
    def test_linear_two_point_grid_is_exactly_the_endpoints(self):
        grid = sweep_frequencies(100.0, 5000.0, 2, "linear", t_half=5e-6)
        np.testing.assert_array_equal(grid, [100.0, 5000.0])

    def test_log_grid_hits_endpoints_and_is_geometric(self):
        grid = sweep_frequencies(10.0, 10000.0, 4, "log", t_half=5e-6)
        assert grid[0] == 10.0 and grid[-1] == 10000.0
        ratios = grid[1:] / grid[:-1]
        np.testing.assert_allclose(ratios, ratios[0], rtol=1e-12)

    @pytest.mark.parametrize("kwargs", [
        dict(f_min=0.0, f_max=100.0, points=3, spacing="log"),
        dict(f_min=200.0, f_max=100.0, points=3, spacing="log"),
        dict(f_min=10.0, f_max=2e5, points=3, spacing="log"),
        dict(f_min=10.0, f_max=100.0, points=1, spacing="log"),
        dict(f_min=10.0, f_max=100.0, points=3, spacing="cubic"),
    ])
    def test_invalid_grids_rejected(self, kwargs):
        with pytest.raises(ValueError):
            sweep_frequencies(t_half=5e-6, **kwargs)

    def test_band_edge_is_allowed(self):
        grid = sweep_frequencies(10.0, 1e5, 3, "log", t_half=5e-6)
        assert grid[-1] == pytest.approx(1e5, rel=1e-15)

    def test_bode_rows_cover_the_grid(self, ref_dab):
        rows = bode_sweep(ref_dab, P_PLUS, "fix", 100.0, 10000.0, 9)
        assert len(rows) == 9
        assert all(not r.flagged for r in rows)
        freqs = [r.f for r in rows]
        assert freqs == sorted(freqs)
        assert freqs[0] == pytest.approx(100.0) and freqs[-1] == pytest.approx(10000.0)

    def test_bode_kinds_differ_away_from_dc(self, ref_dab):
        fix = bode_sweep(ref_dab, P_PLUS, "fix", 1000.0, 10000.0, 5)
        sc = bode_sweep(ref_dab, P_PLUS, "sc", 1000.0, 10000.0, 5)
        assert any(abs(a.h_irec - b.h_irec) > 1e-9 for a, b in zip(fix, sc))

    def test_bode_rejects_unknown_kind(self, ref_dab):
        with pytest.raises(ValueError):
            bode_sweep(ref_dab, P_PLUS, "exact", 100.0, 1000.0, 3)

    def test_flagged_row_reports_none_channels(self):
        row = FrequencyResponseRow(f=1.0, h_irec=None, h_vout=None)
        assert row.flagged
        live = FrequencyResponseRow(f=1.0, h_irec=0j, h_vout=1j)
        assert not live.flagged
