import json

import numpy as np
import pytest

from segcoreset import (
    BicriteriaConfig,
    Coreset,
    CoresetConfig,
    DimensionError,
    KSegmentation,
    Signal,
    ValidationError,
    build_coreset,
    evaluate_loss,
    exact_loss,
    ktree_to_segmentation,
    optimal_ktree,
    optimal_ktree_on_coreset,
    piecewise_signal,
    random_ktree,
)
from segcoreset.io import coreset_to_doc

ALPHA_ONE = BicriteriaConfig(alpha_formula=lambda k, n: 1.0)


def practical_coreset(sig, k=16, gamma=0.25, eps=0.2):
    cfg = CoresetConfig(k=k, eps=eps, mode="practical", gamma_override=gamma,
                        bicriteria_cfg=ALPHA_ONE)
    return build_coreset(sig, cfg)


def block_aligned_seg(cs, seed):
    rng = np.random.default_rng(seed)
    cells = [(b.rect, float(rng.uniform(-10, 10))) for b in cs.blocks]
    return KSegmentation(cs.n, cs.m, cells)


class TestExactBranch:
    def test_block_constant_segmentations_exact(self):
        for seed in range(5):
            sig = piecewise_signal(32, 32, 8, 0.5, seed=seed)
            cs = practical_coreset(sig)
            assert len(cs.blocks) > 4  # actually compressed, non-trivial
            for qseed in range(5):
                seg = block_aligned_seg(cs, qseed)
                rep = evaluate_loss(cs, seg)
                ref = exact_loss(sig, seg)
                assert rep.blocks_intersected == 0
                assert rep.loss_estimate == pytest.approx(ref, rel=1e-9)

    def test_constant_signal_any_query_exact(self):
        sig = Signal(np.full((16, 16), 3.0))
        cs = build_coreset(sig, CoresetConfig(k=4, eps=0.2))
        for seed in range(10):
            seg = ktree_to_segmentation(random_ktree(16, 16, 6, seed), 16, 16)
            rep = evaluate_loss(cs, seg)
            assert rep.loss_estimate == pytest.approx(
                exact_loss(sig, seg), rel=1e-9, abs=1e-9
            )

    def test_theory_mode_error_within_eps(self):
        sig = piecewise_signal(32, 32, 8, 0.5, seed=11)
        cs = build_coreset(sig, CoresetConfig(k=16, eps=0.2, mode="theory"))
        worst = 0.0
        rng = np.random.default_rng(0)
        for _ in range(200):
            k = int(rng.integers(1, 17))
            seg = ktree_to_segmentation(
                random_ktree(32, 32, k, int(rng.integers(2**63))), 32, 32
            )
            ref = exact_loss(sig, seg)
            est = evaluate_loss(cs, seg).loss_estimate
            worst = max(worst, abs(est - ref) / ref)
        assert worst <= 0.2


class TestDrainBranch:
    def test_counts_and_nonnegativity(self):
        sig = piecewise_signal(32, 32, 8, 0.5, seed=2)
        cs = practical_coreset(sig)
        for seed in range(20):
            seg = ktree_to_segmentation(random_ktree(32, 32, 12, seed), 32, 32)
            rep = evaluate_loss(cs, seg)
            assert rep.loss_estimate >= 0.0
            assert rep.blocks_intersected + rep.blocks_exact == len(cs.blocks)
            assert rep.blocks_intersected > 0  # random trees do cut blocks

    def test_practical_errors_reported_not_asserted(self):
        # sanity that the drained estimate is in the right ballpark
        sig = piecewise_signal(32, 32, 8, 0.5, seed=3)
        cs = practical_coreset(sig)
        errs = []
        for seed in range(50):
            seg = ktree_to_segmentation(random_ktree(32, 32, 10, seed), 32, 32)
            ref = exact_loss(sig, seg)
            est = evaluate_loss(cs, seg).loss_estimate
            errs.append(abs(est - ref) / ref)
        assert np.median(errs) < 0.1

    def test_read_only(self):
        sig = piecewise_signal(32, 32, 8, 0.5, seed=4)
        cs = practical_coreset(sig)
        before = json.dumps(coreset_to_doc(cs))
        for seed in range(10):
            seg = ktree_to_segmentation(random_ktree(32, 32, 10, seed), 32, 32)
            evaluate_loss(cs, seg)
        assert json.dumps(coreset_to_doc(cs)) == before

    def test_repeated_evaluation_identical(self):
        sig = piecewise_signal(32, 32, 8, 0.5, seed=5)
        cs = practical_coreset(sig)
        seg = ktree_to_segmentation(random_ktree(32, 32, 9, 0), 32, 32)
        a = evaluate_loss(cs, seg)
        b = evaluate_loss(cs, seg)
        assert a == b

    def test_corrupted_weights_detected(self):
        sig = piecewise_signal(16, 16, 4, 0.5, seed=6)
        cs = practical_coreset(sig, k=4)
        blocks = list(cs.blocks)
        from segcoreset.caratheodory import BlockCoreset, CoresetPoint

        big = max(range(len(blocks)), key=lambda i: blocks[i].rect.area)
        bad = blocks[big]
        assert bad.rect.area >= 4
        pts = [CoresetPoint(p.row, p.col, p.label, p.weight * 0.25) for p in bad.points]
        blocks[big] = BlockCoreset(rect=bad.rect, points=tuple(pts))
        broken = Coreset(cs.n, cs.m, cs.k, cs.eps, cs.gamma, cs.sigma, cs.mode, blocks)
        # a query that cuts through the corrupted block under-drains
        rng = np.random.default_rng(0)
        with pytest.raises(ValidationError):
            for seed in range(50):
                seg = ktree_to_segmentation(
                    random_ktree(16, 16, 12, int(rng.integers(2**63))), 16, 16
                )
                evaluate_loss(broken, seg)


class TestReportFlags:
    def test_over_budget_flag(self):
        sig = piecewise_signal(16, 16, 4, 0.5, seed=7)
        cs = practical_coreset(sig, k=4)
        small = ktree_to_segmentation(random_ktree(16, 16, 3, 0), 16, 16)
        big = ktree_to_segmentation(random_ktree(16, 16, 9, 0), 16, 16)
        assert not evaluate_loss(cs, small).over_budget
        assert evaluate_loss(cs, big).over_budget

    def test_dimension_mismatch(self):
        sig = piecewise_signal(16, 16, 4, 0.5, seed=8)
        cs = practical_coreset(sig, k=4)
        seg = ktree_to_segmentation(random_ktree(8, 8, 4, 0), 8, 8)
        with pytest.raises(DimensionError):
            evaluate_loss(cs, seg)


class TestCoresetSideDP:
    def test_transfer_inequality(self):
        eps = 0.1
        for seed in range(3):
            sig = piecewise_signal(16, 16, 4, 0.3, seed=seed)
            cs = build_coreset(sig, CoresetConfig(k=4, eps=eps, mode="theory"))
            t_c, _ = optimal_ktree_on_coreset(cs, 4)
            _, best = optimal_ktree(sig, 4)
            got = exact_loss(sig, ktree_to_segmentation(t_c, 16, 16))
            assert got <= (1 + eps) / (1 - eps) * best + 1e-9

    def test_estimate_close_to_exact_optimum(self):
        sig = piecewise_signal(16, 16, 4, 0.3, seed=5)
        cs = build_coreset(sig, CoresetConfig(k=4, eps=0.1, mode="theory"))
        _, est = optimal_ktree_on_coreset(cs, 4)
        _, best = optimal_ktree(sig, 4)
        assert est == pytest.approx(best, rel=0.25)
