import mpmath
import numpy as np
import pytest

from wearnoma.beamforming import (BeamPlan, IllConditionedError, build_plan, effective_gains,
                                  received_power_matrix, select_clusters, zf_precoder)
from wearnoma.channel import ChannelState, complex_gaussian, sample_channels
from wearnoma.linkmetrics import d2d_interference
from wearnoma.scenario import ScenarioConfig, sample_topology


def channels_from(h, dwd=0):
    h = np.asarray(h, dtype=complex)
    n = h.shape[0]
    return ChannelState(h_bs_cwd=h, h_bs_dwdrx=np.zeros((dwd, h.shape[1]), complex),
                        g_d2d=np.zeros(dwd), g_dwdtx_cwd=np.zeros((dwd, n)),
                        g_dwdtx_dwdrx=np.zeros((dwd, dwd)))


def random_drop(cfg, seed):
    rng = np.random.default_rng(seed)
    return sample_channels(sample_topology(cfg, rng), cfg, rng)


def normal_equations_zf(H):
    """Pseudoinverse of conj(H) as A^H (A A^H)^-1 in 50-digit arithmetic."""
    with mpmath.workdps(50):
        A = mpmath.matrix([[mpmath.mpc(complex(z)) for z in row] for row in np.conj(H)])
        W = A.H * (A * A.H) ** -1
        W = np.array([[complex(W[i, j]) for j in range(W.cols)] for i in range(W.rows)])
    return W / np.linalg.norm(W, axis=0)


def test_pool_equal_to_beams_assigns_everyone(cfg):
    for seed in range(20):
        beams = select_clusters(random_drop(cfg, seed), cfg)
        flat = [i for b in beams for i in b]
        assert sorted(flat) == list(range(8))
        assert len(beams) == 4 and all(len(b) == 2 for b in beams)


def test_greedy_head_rule_hand_example():
    cfg = ScenarioConfig(antennas_M=2, users_per_beam_K=1, cwd_pool_Nc=3)
    e1, e2 = np.eye(2)
    h = [10 * e1, 5 * e2, 9 * (e1 + e2) / np.sqrt(2)]
    beams = select_clusters(channels_from(h), cfg, threshold=0.5)
    assert sorted(b[0] for b in beams) == [0, 1]


def test_threshold_relaxation_when_pool_exhausted():
    # All candidates strongly correlated: the threshold must relax.
    cfg = ScenarioConfig(antennas_M=2, users_per_beam_K=1, cwd_pool_Nc=2)
    h = [[1.0, 0.1], [0.9, 0.2]]
    beams = select_clusters(channels_from(h), cfg)
    assert sorted(b[0] for b in beams) == [0, 1]


def test_partner_is_most_correlated():
    cfg = ScenarioConfig(antennas_M=2, users_per_beam_K=2, cwd_pool_Nc=4)
    e1, e2 = np.eye(2)
    h = [10 * e1, 8 * e2, 3 * (e1 + 0.1 * e2), 2 * (0.1 * e1 + e2)]
    beams = select_clusters(channels_from(h), cfg)
    assert [list(b) for b in beams] == [[0, 2], [1, 3]]


def test_head_norm_dominates_partners(cfg):
    for seed in range(1000):
        ch = random_drop(cfg, seed)
        norms = np.linalg.norm(ch.h_bs_cwd, axis=1)
        for beam in select_clusters(ch, cfg):
            assert all(norms[beam[0]] >= norms[i] for i in beam[1:])


def test_zf_identity():
    np.testing.assert_allclose(zf_precoder(np.eye(4)), np.eye(4), atol=1e-15)


@pytest.mark.parametrize("seed", range(5))
def test_zf_against_normal_equations(seed):
    H = complex_gaussian(np.random.default_rng(seed), (4, 4))
    W = zf_precoder(H)
    ref = normal_equations_zf(H)
    np.testing.assert_allclose(W, ref, atol=1e-12)
    G = np.abs(np.conj(H) @ W)
    off = G[~np.eye(4, dtype=bool)] / np.linalg.norm(H, axis=1).repeat(3)
    assert off.max() < 1e-9


def test_zf_rank_deficient():
    H = complex_gaussian(np.random.default_rng(1), (4, 4))
    H[1] = H[0]
    with pytest.raises(IllConditionedError):
        zf_precoder(H)


def test_plan_invariants(cfg):
    for seed in range(200):
        ch = random_drop(cfg, seed)
        plan = build_plan(ch, cfg)
        assert len(set(plan.assigned)) == 8
        np.testing.assert_allclose(np.linalg.norm(plan.precoder, axis=0), 1, rtol=1e-12)
        Hh = ch.h_bs_cwd[list(plan.zf_heads)]
        G = np.abs(np.conj(Hh) @ plan.precoder) / np.linalg.norm(Hh, axis=1)[:, None]
        assert G[~np.eye(4, dtype=bool)].max() < 1e-9
        assert plan.per_beam_power == 2.5


def single_beam_plan(h):
    return BeamPlan(beams=((0,),), precoder=np.ones((1, 1), complex), per_beam_power=1.0,
                    zf_heads=(0,))


def test_gain_single_beam():
    cfg = ScenarioConfig(antennas_M=1, users_per_beam_K=1, cwd_pool_Nc=1, noise_power=0.5)
    ch = channels_from([[np.sqrt(2.0)]])
    gains, _ = effective_gains(ch, single_beam_plan(ch), [0.0], cfg)
    assert gains[0][0] == pytest.approx(2.0 / 0.5)
    gains2, _ = effective_gains(ch, single_beam_plan(ch), [0.0], cfg.replace(noise_power=1.0))
    assert gains2[0][0] == pytest.approx(gains[0][0] / 2)


def test_head_gain_free_of_inter_beam_interference(cfg):
    for seed in range(50):
        ch = random_drop(cfg, seed)
        plan = build_plan(ch, cfg)
        G = received_power_matrix(ch.h_bs_cwd, plan.precoder)
        for b, head in enumerate(plan.zf_heads):
            inter = plan.per_beam_power * (G[head].sum() - G[head, b])
            assert inter < 1e-9 * cfg.noise_power


def test_gains_sorted_and_plan_reordered(cfg):
    ch = random_drop(cfg, 3)
    plan = build_plan(ch, cfg)
    gains, ordered = effective_gains(ch, plan, d2d_interference(ch, cfg), cfg)
    for b, g in enumerate(gains):
        assert np.all(np.diff(g) <= 0)
        assert set(ordered.beams[b]) == set(plan.beams[b])
    assert ordered.precoder is plan.precoder


def test_doubling_noise_halves_gains_without_interference():
    cfg = ScenarioConfig(antennas_M=1, users_per_beam_K=3, cwd_pool_Nc=3, noise_power=1e-3)
    ch = channels_from([[3.0], [1.0], [0.5j]])
    plan = BeamPlan(beams=((0, 1, 2),), precoder=np.ones((1, 1), complex), per_beam_power=1.0,
                    zf_heads=(0,))
    g1, _ = effective_gains(ch, plan, np.zeros(3), cfg)
    g2, _ = effective_gains(ch, plan, np.zeros(3), cfg.replace(noise_power=2e-3))
    np.testing.assert_allclose(g2[0], g1[0] / 2, rtol=1e-15)
    np.testing.assert_allclose(g1[0], [9e3, 1e3, 0.25e3], rtol=1e-12)
