import numpy as np
import pytest

from segcoreset import (
    KSegmentation,
    Leaf,
    ParameterError,
    Rect,
    Signal,
    SizeGuardError,
    count_leaves,
    exact_loss,
    ktree_to_segmentation,
    opt1,
    optimal_ktree,
    piecewise_signal,
    random_ktree,
    random_sample_estimator,
)
from segcoreset.grid import PrefixStats


class TestOptimalKTree:
    def test_k1_equals_opt1_exactly(self):
        for seed in range(5):
            rng = np.random.default_rng(seed)
            sig = Signal(rng.uniform(-10, 10, size=(7, 9)))
            tree, loss = optimal_ktree(sig, 1)
            assert isinstance(tree, Leaf)
            assert loss == opt1(PrefixStats(sig), sig.full_rect())

    def test_two_vertical_halves(self):
        labels = np.zeros((4, 4))
        labels[:, 2:] = 9.0
        tree, loss = optimal_ktree(Signal(labels), 2)
        assert loss == 0.0
        assert tree.axis == "col" and tree.threshold == 2

    def test_k_equals_cell_count_zero(self):
        rng = np.random.default_rng(1)
        sig = Signal(rng.uniform(-10, 10, size=(4, 4)))
        _, loss = optimal_ktree(sig, 16)
        assert loss == 0.0

    def test_nonincreasing_in_k(self):
        for seed in range(3):
            sig = piecewise_signal(8, 8, 4, 0.5, seed=seed)
            losses = [optimal_ktree(sig, k)[1] for k in range(1, 9)]
            for a, b in zip(losses, losses[1:]):
                assert b <= a + 1e-12

    def test_tree_loss_matches_reported(self):
        for seed in range(5):
            sig = piecewise_signal(8, 8, 4, 0.5, seed=100 + seed)
            k = int(np.random.default_rng(seed).integers(2, 7))
            tree, loss = optimal_ktree(sig, k)
            assert count_leaves(tree) <= k
            seg = ktree_to_segmentation(tree, 8, 8)
            assert exact_loss(sig, seg) == pytest.approx(loss, rel=1e-9, abs=1e-9)

    def test_beats_random_trees(self):
        sig = piecewise_signal(8, 8, 4, 0.5, seed=5)
        _, loss = optimal_ktree(sig, 4)
        for seed in range(30):
            seg = ktree_to_segmentation(random_ktree(8, 8, 4, seed), 8, 8)
            # random labels are no contest; refit each leaf to its mean
            refit = KSegmentation(8, 8, [
                (r, float(sig.labels[r.r0:r.r1, r.c0:r.c1].mean()))
                for r, _ in seg.cells
            ])
            assert exact_loss(sig, refit) >= loss - 1e-9

    def test_size_guard(self):
        sig = Signal(np.zeros((70, 70)))
        with pytest.raises(SizeGuardError):
            optimal_ktree(sig, 2)

    def test_k_validation(self):
        with pytest.raises(ParameterError):
            optimal_ktree(Signal([[1.0]]), 0)


class TestRandomKTree:
    def test_k1_single_leaf(self):
        tree = random_ktree(4, 4, 1, seed=0)
        assert isinstance(tree, Leaf)

    def test_k4_leaf_count(self):
        for seed in range(10):
            tree = random_ktree(8, 8, 4, seed=seed)
            assert count_leaves(tree) == 4
            ktree_to_segmentation(tree, 8, 8)  # validates

    def test_deterministic(self):
        a = random_ktree(16, 16, 7, seed=42)
        b = random_ktree(16, 16, 7, seed=42)
        assert a == b

    def test_stops_when_unsplittable(self):
        tree = random_ktree(2, 2, 10, seed=1)
        assert count_leaves(tree) == 4

    def test_labels_in_range(self):
        seg = ktree_to_segmentation(random_ktree(8, 8, 8, seed=3), 8, 8)
        for _, v in seg.cells:
            assert -10.0 <= v <= 10.0


class TestRandomSample:
    def test_full_sample_is_exact(self):
        rng = np.random.default_rng(2)
        sig = Signal(rng.uniform(-10, 10, size=(6, 6)))
        samp = random_sample_estimator(sig, 36, seed=0)
        for seed in range(10):
            seg = ktree_to_segmentation(random_ktree(6, 6, 4, seed), 6, 6)
            assert samp.loss(seg) == pytest.approx(exact_loss(sig, seg), rel=1e-9)

    def test_tau_one(self):
        sig = Signal([[1.0, 3.0], [5.0, 7.0]])
        samp = random_sample_estimator(sig, 1, seed=7)
        seg = KSegmentation(2, 2, [(Rect(0, 2, 0, 2), 2.0)])
        r, c = int(samp.rows[0]), int(samp.cols[0])
        expected = 4.0 * (2.0 - sig.labels[r, c]) ** 2
        assert samp.loss(seg) == pytest.approx(expected, rel=1e-12)

    def test_constant_signal_zero(self):
        sig = Signal(np.full((5, 5), 2.0))
        seg = KSegmentation(5, 5, [(Rect(0, 5, 0, 5), 2.0)])
        for tau in (1, 5, 25):
            assert random_sample_estimator(sig, tau, seed=tau).loss(seg) == 0.0

    def test_unbiased(self):
        sig = piecewise_signal(8, 8, 3, 0.5, seed=0)
        seg = ktree_to_segmentation(random_ktree(8, 8, 5, seed=1), 8, 8)
        exact = exact_loss(sig, seg)
        rng = np.random.default_rng(99)
        tau = 16
        ests = np.array([
            random_sample_estimator(sig, tau, int(s)).loss(seg)
            for s in rng.integers(2**63, size=10_000)
        ])
        se = ests.std(ddof=1) / np.sqrt(len(ests))
        assert abs(ests.mean() - exact) <= 3.0 * se

    def test_tau_bounds(self):
        sig = Signal([[1.0, 2.0]])
        with pytest.raises(ParameterError):
            random_sample_estimator(sig, 0, seed=0)
        with pytest.raises(ParameterError):
            random_sample_estimator(sig, 3, seed=0)


class TestPiecewiseSignal:
    def test_shape_and_determinism(self):
        a = piecewise_signal(12, 9, 5, 0.3, seed=8)
        b = piecewise_signal(12, 9, 5, 0.3, seed=8)
        assert (a.n, a.m) == (12, 9)
        assert a == b

    def test_zero_noise_is_piecewise(self):
        sig = piecewise_signal(10, 10, 4, 0.0, seed=4)
        assert len(np.unique(sig.labels)) <= 4

    def test_param_validation(self):
        with pytest.raises(ParameterError):
            piecewise_signal(4, 4, 0, 0.1, seed=0)
        with pytest.raises(ParameterError):
            piecewise_signal(4, 4, 2, -0.1, seed=0)
