"""Fast property suite; runs on its own with ``pytest tests/test_properties.py``."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from infogeo import GridSpec, SolverConfig, build_gridworld, solve
from infogeo.cli import main
from infogeo.geometry import mds_embed
from infogeo.info import action_marginal, entropy, kl_divergence
from infogeo.markov import chain_from_policy, sample_trajectories

simplex = st.integers(2, 8).flatmap(
    lambda k: arrays(np.float64, k, elements=st.floats(0.0, 1.0)).filter(lambda a: a.sum() > 1e-3)
)
grids = st.tuples(st.integers(1, 6), st.integers(1, 6), st.sampled_from(["manhattan", "moore"]))


@settings(max_examples=200, deadline=None)
@given(simplex)
def test_entropy_is_log_n_minus_kl_to_uniform(raw):
    p = raw / raw.sum()
    n = len(p)
    assert entropy(p) == pytest.approx(np.log2(n) - kl_divergence(p, np.full(n, 1.0 / n)), abs=1e-10)


@settings(max_examples=200, deadline=None)
@given(st.integers(2, 6), st.integers(0, 2**32 - 1))
def test_kl_nonnegative_and_zero_iff_equal(k, seed):
    rng = np.random.default_rng(seed)
    p, q = rng.dirichlet(np.ones(k), size=2)
    assert kl_divergence(p, q) >= 0.0
    assert kl_divergence(p, p) == 0.0
    if not np.allclose(p, q):
        assert kl_divergence(p, q) > 0.0


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 10), st.integers(2, 8), st.integers(0, 2**32 - 1))
def test_action_marginal_normalised(n, k, seed):
    rng = np.random.default_rng(seed)
    policy = rng.dirichlet(np.ones(k), size=n)
    dist = rng.dirichlet(np.ones(n))
    assert abs(action_marginal(policy, dist).sum() - 1.0) <= 1e-12


@settings(max_examples=60, deadline=None)
@given(grids, st.integers(0, 2**32 - 1))
def test_transition_and_chain_rows_stochastic(grid, seed):
    w, h, nbhd = grid
    rng = np.random.default_rng(seed)
    spec = GridSpec(w, h, nbhd, int(rng.integers(w * h)))
    mdp = build_gridworld(spec)
    assert np.max(np.abs(mdp.transition.sum(axis=2) - 1.0)) <= 1e-12
    policy = rng.dirichlet(np.ones(mdp.n_actions), size=mdp.n_states)
    kernel = chain_from_policy(mdp, policy)
    assert np.max(np.abs(kernel.sum(axis=1) - 1.0)) <= 1e-12


@settings(max_examples=25, deadline=None)
@given(st.integers(3, 12), st.integers(0, 2**32 - 1), st.sampled_from([2, 3]))
def test_smacof_stress_monotone(n, seed, dims):
    rng = np.random.default_rng(seed)
    pts = rng.normal(size=(n, 4))
    d = np.sqrt(((pts[:, None] - pts[None]) ** 2).sum(-1))
    emb = mds_embed(d, dims=dims, seed=seed % 1000, restarts=2, tol=0.0, max_iter=60)
    hist = np.array(emb.stress_history)
    assert np.all(np.diff(hist) <= 1e-9 * np.maximum(hist[:-1], 1e-12))
    assert emb.stress >= 0


def test_sampling_and_embedding_seed_determinism():
    mdp = build_gridworld(GridSpec(4, 4, "moore", 5))
    policy = solve(mdp, SolverConfig(0.5)).policy
    a = sample_trajectories(mdp, policy, 0, 500, seed=42)
    b = sample_trajectories(mdp, policy, 0, 500, seed=42)
    c = sample_trajectories(mdp, policy, 0, 500, seed=43)
    assert a.mean_visits.tobytes() == b.mean_visits.tobytes()
    assert a.mean_visits.tobytes() != c.mean_visits.tobytes()
    d = np.abs(np.subtract.outer(np.arange(6.0), np.arange(6.0)))
    assert mds_embed(d, seed=1).coords.tobytes() == mds_embed(d, seed=1).coords.tobytes()


@pytest.mark.parametrize("command", [
    ["solve", "--grid", "3x3", "--goal", "4", "--beta", "2"],
    ["pairwise", "--grid", "3x3", "--beta", "0.5"],
    ["embed", "--grid", "3x3", "--beta", "0.5", "--dims", "3", "--seed", "4"],
    ["sample", "--grid", "3x3", "--goal", "8", "--beta", "1", "--start", "0", "--count", "200"],
    ["tradeoff", "--grid", "3x3", "--betas", "0.1..10:4", "--format", "csv"],
])
def test_cli_reruns_byte_identical(tmp_path, command, capsys):
    outs = []
    for run, jobs in (("a", "1"), ("b", "2")):
        extra = ["--jobs", jobs] if command[0] in ("pairwise", "embed") else []
        assert main(command + extra + ["--out", str(tmp_path / run)]) == 0
        outs.append({p.name: p.read_bytes() for p in sorted((tmp_path / run).iterdir())})
    assert outs[0] == outs[1] and outs[0]


def test_exit_code_contract(tmp_path, monkeypatch, capsys):
    out = ["--out", str(tmp_path)]
    assert main(["solve", "--grid", "2x2", "--beta", "1"] + out) == 0
    assert main(["solve", "--grid", "5x5", "--goal", "99", "--beta", "1"] + out) == 1
    assert "goal out of range" in capsys.readouterr().err
    with pytest.raises(SystemExit) as info:
        main(["solve", "--grid", "five", "--beta", "1"])
    assert info.value.code == 1
    with pytest.raises(SystemExit) as info:
        main(["nonsense"])
    assert info.value.code == 1
    assert main(["solve", "--grid", "4x4", "--beta", "0.5", "--max-iters", "2"] + out) == 2
    import infogeo.cli as cli

    def boom(args):
        raise RuntimeError("unexpected")

    monkeypatch.setitem(cli.COMMANDS, "geodesics", boom)
    assert main(["geodesics", "--start", "0", "--goal", "3"] + out) == 3
