import itertools
import math

import numpy as np
import pytest

from conftest import EXAMPLE_G, EXAMPLE_TABLE
from mmwave_sc.channel import ArrayGeometry, dft_matrix, sample_channel, spatial_signature, to_physical
from mmwave_sc.gf2codes import golay_parity_check, hamming_parity_check, identity_code
from mmwave_sc.measurement import (
    LinkBudget, MeasurementSet, acquire, build_combiners, build_precoders, db_to_linear, total_energy,
)


def banks(G_r, G_t):
    Ur = dft_matrix(ArrayGeometry(G_r.shape[1]))
    Ut = dft_matrix(ArrayGeometry(G_t.shape[1]))
    return Ur, Ut, build_combiners(G_r, Ur), build_precoders(G_t, Ut)


class TestBanks:
    def test_identity_gives_dft_beams(self):
        U = dft_matrix(ArrayGeometry(6))
        W = build_combiners(identity_code(6), U)
        for i in range(6):
            assert np.allclose(W.vectors[i], U[:, i])

    def test_example_first_row(self):
        g = ArrayGeometry(8)
        W = build_combiners(EXAMPLE_G, dft_matrix(g))
        expect = sum(spatial_signature(g, k / g.length_norm) for k in (0, 4, 7))
        assert np.allclose(W.vectors[0], expect)

    @pytest.mark.parametrize("G", [EXAMPLE_G, hamming_parity_check(4), golay_parity_check()])
    def test_pattern_reproduces_code_row(self, G):
        U = dft_matrix(ArrayGeometry(G.shape[1]))
        W = build_combiners(G, U)
        assert np.max(np.abs(W.vectors.conj() @ U - G)) < 1e-9
        assert np.allclose(W.norms_sq, G.sum(axis=1), atol=1e-9)
        assert W.overlap_counts.tolist() == G.sum(axis=1).tolist()

    def test_hamming_precoders(self):
        G = hamming_parity_check(5)
        F = build_precoders(G, dft_matrix(ArrayGeometry(31)))
        assert F.m == 5 and F.overlap_counts.tolist() == [16] * 5
        assert F.overlap("max") == 16 and F.overlap("mean") == 16

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            build_combiners(EXAMPLE_G, dft_matrix(ArrayGeometry(7)))

    def test_non_unitary_basis_rejected(self, rng):
        U = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
        with pytest.raises(ValueError):
            build_combiners(EXAMPLE_G, U)


class TestAcquire:
    def test_example_table(self, rng):
        Ur, Ut, W, F = banks(EXAMPLE_G, identity_code(1))
        for k, y in EXAMPLE_TABLE.items():
            Qa = np.zeros((8, 1))
            Qa[k - 1, 0] = 1
            ms = acquire(to_physical(Qa, Ur, Ut), W, F, math.inf, None, 1.0, rng)
            assert np.allclose(ms.observed[:, 0], y, atol=1e-12)

    def test_all_single_sector_measurements_distinct(self, rng):
        ys = {tuple(v) for v in EXAMPLE_TABLE.values()}
        assert len(ys) == 8 and (0, 0, 0, 0) not in ys

    def test_factorisation(self, rng):
        G_r, G_t = golay_parity_check(), hamming_parity_check(4)
        Ur, Ut, W, F = banks(G_r, G_t)
        for _ in range(100):
            ch = sample_channel(23, 15, 3, 1.0, rng)
            ms = acquire(to_physical(ch, Ur, Ut), W, F, math.inf, None, 1.0, rng)
            assert np.max(np.abs(ms.clean - G_r @ ch.entries @ G_t.T)) < 1e-9
            assert np.array_equal(ms.observed, ms.clean)

    def test_zero_channel(self, rng):
        Ur, Ut, W, F = banks(EXAMPLE_G, identity_code(1))
        ms = acquire(np.zeros((8, 1)), W, F, math.inf, None, 1.0, rng)
        assert not ms.clean.any()

    def test_distinct_channels_distinct_measurements(self, rng):
        G = golay_parity_check()[:, :15]
        Ur, Ut, W, F = banks(G, identity_code(1))

        def measure(ch):
            return acquire(to_physical(ch, Ur, Ut), W, F, math.inf, None, 1.0, rng).clean[:, 0]

        gaps = []
        while len(gaps) < 500:
            a, b = sample_channel(15, 1, 2, 1.0, rng), sample_channel(15, 1, 2, 1.0, rng)
            if np.array_equal(a.entries, b.entries):
                continue
            gaps.append(np.linalg.norm(measure(a) - measure(b)))
        assert min(gaps) > 0

    def test_noise_power_scales_with_beam_norm(self):
        G = golay_parity_check()
        Ur, Ut, W, F = banks(G, identity_code(1))
        rng = np.random.default_rng(5)
        errs = np.array([acquire(np.zeros((23, 1)), W, F, 10.0, None, 1.0, rng).error[:, 0]
                         for _ in range(4000)])
        power = np.mean(np.abs(errs) ** 2, axis=0)
        assert np.allclose(power, W.norms_sq / 10, rtol=0.1)

    def test_quantised_output_on_grid(self, rng):
        Ur, Ut, W, F = banks(golay_parity_check(), identity_code(1))
        ch = sample_channel(23, 1, 3, 1.0, rng)
        ms = acquire(to_physical(ch, Ur, Ut), W, F, 5.0, 3, 3.0, rng)
        step = 3.0 / 4
        assert np.allclose(ms.observed.real / step, np.round(ms.observed.real / step))
        assert np.abs(ms.observed.real).max() <= 3.0

    def test_json_round_trip(self, rng):
        Ur, Ut, W, F = banks(EXAMPLE_G, identity_code(1))
        ch = sample_channel(8, 1, 1, 1.0, rng)
        ms = acquire(to_physical(ch, Ur, Ut), W, F, 3.0, 4, 1.0, rng)
        back = MeasurementSet.from_json(ms.to_json())
        assert np.array_equal(back.observed, ms.observed) and back.adc_bits == 4
        ideal = acquire(to_physical(ch, Ur, Ut), W, F, math.inf, None, 1.0, rng)
        assert MeasurementSet.from_json(ideal.to_json()).snr_db == math.inf


class TestEnergy:
    def test_zero_snr(self):
        assert total_energy(121, 8, 8, 0.0, 10 ** -8.8, 10 ** -8.8, 23e-6) == 0

    def test_linear_in_m(self):
        a = total_energy(10, 2, 3, 1.5, 1.0, 1.0, 1e-3)
        assert total_energy(20, 2, 3, 1.5, 1.0, 1.0, 1e-3) == pytest.approx(2 * a)

    def test_reference_value(self):
        link = LinkBudget()
        assert link.n0_over_mu_mw == pytest.approx(1.0)
        assert link.energy(121, 11, 11, 1.0) == pytest.approx(121 * 121 * 23e-6)
        assert link.energy(121, 11, 11, 1.0) == pytest.approx(0.3367, abs=1e-4)

    def test_monotone(self):
        base = dict(m=10, o_t=2, o_r=2, snr_linear=1.0, n0_mw=1e-9, mu_linear=1e-9, tau_s=1e-5)
        e0 = total_energy(**base)
        for key in ("m", "o_t", "o_r", "snr_linear", "n0_mw", "tau_s"):
            bumped = dict(base, **{key: base[key] * 1.5})
            assert total_energy(**bumped) > e0
        assert total_energy(**dict(base, mu_linear=2e-9)) < e0

    def test_inverse(self):
        link = LinkBudget()
        for m, ot, orr, snr in itertools.product((20, 121), (1, 8), (1, 16), (0.1, 3.0)):
            e = link.energy(m, ot, orr, snr)
            assert link.snr_for_energy(e, m, ot, orr) == pytest.approx(snr)

    def test_db(self):
        assert db_to_linear(10) == pytest.approx(10) and db_to_linear(-math.inf) == 0
