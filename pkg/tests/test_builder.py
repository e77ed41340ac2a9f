import json

import numpy as np
import pytest

from segcoreset import (
    BicriteriaConfig,
    CoresetConfig,
    ParameterError,
    Signal,
    build_coreset,
    exact_loss,
    evaluate_loss,
    ktree_to_segmentation,
    piecewise_signal,
    random_ktree,
)
from segcoreset.io import coreset_to_doc
from segcoreset.partition import validate_cover

ALPHA_ONE = BicriteriaConfig(alpha_formula=lambda k, n: 1.0)


class TestBuildCoreset:
    def test_constant_signal_queries_are_exact(self):
        sig = Signal(np.full((32, 32), 4.25))
        cs = build_coreset(sig, CoresetConfig(k=4, eps=0.2))
        assert cs.sigma == 0.0
        for seed in range(10):
            seg = ktree_to_segmentation(random_ktree(32, 32, 4, seed), 32, 32)
            est = evaluate_loss(cs, seg).loss_estimate
            ref = exact_loss(sig, seg)
            assert est == pytest.approx(ref, rel=1e-9, abs=1e-9)

    def test_practical_mode_compresses(self):
        sig = piecewise_signal(64, 64, 8, 0.5, seed=12)
        cfg = CoresetConfig(k=16, eps=0.2, mode="practical", gamma_override=0.25,
                            bicriteria_cfg=ALPHA_ONE)
        cs = build_coreset(sig, cfg)
        assert cs.size == 4 * len(cs.blocks)
        assert cs.size < 64 * 64

    def test_blocks_tile_grid(self):
        sig = piecewise_signal(32, 32, 8, 0.5, seed=3)
        cs = build_coreset(sig, CoresetConfig(k=8, eps=0.2, gamma_override=0.25,
                                              bicriteria_cfg=ALPHA_ONE))
        assert validate_cover([b.rect for b in cs.blocks], 32, 32)
        origins = [(b.rect.r0, b.rect.c0) for b in cs.blocks]
        assert origins == sorted(origins)

    def test_global_moments(self):
        sig = piecewise_signal(32, 32, 8, 0.5, seed=4)
        cs = build_coreset(sig, CoresetConfig(k=8, eps=0.2, gamma_override=0.25,
                                              bicriteria_cfg=ALPHA_ONE))
        w, s1, s2 = cs.global_moments()
        f = sig.labels.ravel()
        assert w == pytest.approx(1024.0, rel=1e-6)
        assert s1 == pytest.approx(float(f.sum()), rel=1e-6, abs=1e-6)
        assert s2 == pytest.approx(float((f * f).sum()), rel=1e-6)

    def test_deterministic_serialization(self):
        sig = piecewise_signal(32, 32, 8, 0.5, seed=5)
        cfg = CoresetConfig(k=16, eps=0.2, gamma_override=0.25, bicriteria_cfg=ALPHA_ONE)
        a = json.dumps(coreset_to_doc(build_coreset(sig, cfg)))
        b = json.dumps(coreset_to_doc(build_coreset(sig, cfg)))
        assert a == b

    def test_theory_mode_gamma_formula(self):
        sig = piecewise_signal(16, 16, 4, 0.5, seed=6)
        cs = build_coreset(sig, CoresetConfig(k=4, eps=0.2, mode="theory"))
        from segcoreset import bicriteria

        rough = bicriteria(sig, 4)
        expected = 0.2**2 / (float(rough.beta_effective) ** 2 * 4)
        assert cs.gamma == pytest.approx(expected, rel=1e-12)

    def test_delta_divides_eps(self):
        sig = piecewise_signal(16, 16, 4, 0.5, seed=6)
        a = build_coreset(sig, CoresetConfig(k=4, eps=0.2, mode="theory", delta=1.0))
        b = build_coreset(sig, CoresetConfig(k=4, eps=0.2, mode="theory", delta=2.0))
        assert b.gamma == pytest.approx(a.gamma / 4.0, rel=1e-12)

    def test_monotone_refinement_in_gamma(self):
        sig = piecewise_signal(32, 32, 6, 0.5, seed=8)
        sizes = []
        for gamma in (0.5, 0.25, 0.125, 0.0625):
            cfg = CoresetConfig(k=8, eps=0.2, gamma_override=gamma,
                                bicriteria_cfg=ALPHA_ONE)
            sizes.append(len(build_coreset(sig, cfg).blocks))
        assert sizes == sorted(sizes)

    def test_sigma_zero_warning(self):
        # pairwise-constant rows make the rough fit lossless while the
        # partition still fragments on the vertical structure
        row_a = [0.0, 0.0, 5.0, 5.0]
        row_b = [5.0, 5.0, 0.0, 0.0]
        sig = Signal([row_a, row_b, row_a, row_b])
        cs = build_coreset(sig, CoresetConfig(k=1, eps=0.2))
        assert cs.sigma == 0.0
        assert cs.warnings
        assert "compress" in cs.warnings[0]

    def test_parameter_errors(self):
        sig = Signal([[1.0, 2.0]])
        with pytest.raises(ParameterError):
            build_coreset(sig, CoresetConfig(k=3, eps=0.2))
        with pytest.raises(ParameterError):
            CoresetConfig(k=1, eps=0.3)
        with pytest.raises(ParameterError):
            CoresetConfig(k=1, eps=0.0)
        with pytest.raises(ParameterError):
            CoresetConfig(k=1, eps=0.1, mode="fast")
        with pytest.raises(ParameterError):
            CoresetConfig(k=1, eps=0.1, delta=0.5)
        with pytest.raises(ParameterError):
            CoresetConfig(k=1, eps=0.1, gamma_override=1.5)

    def test_degenerate_shapes_end_to_end(self):
        from segcoreset import optimal_ktree, random_ktree

        rng = np.random.default_rng(0)
        for shape in ((1, 64), (64, 1), (2, 3)):
            sig = Signal(rng.uniform(-10, 10, size=shape))
            cfg = CoresetConfig(k=2, eps=0.2, gamma_override=0.5,
                                bicriteria_cfg=ALPHA_ONE)
            cs = build_coreset(sig, cfg)
            assert validate_cover([b.rect for b in cs.blocks], *shape)
            seg = ktree_to_segmentation(random_ktree(*shape, 2, seed=1), *shape)
            est = evaluate_loss(cs, seg).loss_estimate
            ref = exact_loss(sig, seg)
            assert est == pytest.approx(ref, rel=0.25, abs=1e-9)
            optimal_ktree(sig, 2)

    def test_threaded_build_matches_sequential(self, monkeypatch):
        sig = piecewise_signal(32, 32, 8, 0.5, seed=9)
        cfg = CoresetConfig(k=8, eps=0.2, gamma_override=0.25, bicriteria_cfg=ALPHA_ONE)
        seq = build_coreset(sig, cfg)
        monkeypatch.setenv("SEG_CORESET_THREADS", "3")
        par = build_coreset(sig, cfg)
        assert seq == par
