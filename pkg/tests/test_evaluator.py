import numpy as np
import pytest
from oracles import brute_force_macro_f1

from pec.evaluator import (
    GroundTruth,
    NoiseSpec,
    interaction_frequency_report,
    load_ground_truth,
    load_labels,
    macro_f1,
    noise_robustness,
    perturb,
    save_labels,
    sweep,
)
from pec.srg import InteractionMatrix
from pec.synth import metro_network, MetroSpec, planted_od


def truth_of(labels, name="t"):
    return GroundTruth.from_labels([f"n{i}" for i in range(len(labels))], labels, name=name)


def test_perfect_prediction():
    truth = truth_of([0, 1, 1, 2, 0])
    assert macro_f1(np.array([0, 1, 1, 2, 0]), truth).macro_f1 == 1.0


def test_label_swap_invariance():
    truth = truth_of([0, 1, 1, 0])
    report = macro_f1(np.array([5, 3, 3, 5]), truth)
    assert report.macro_f1 == 1.0
    assert report.matching == {5: 0, 3: 1}


def test_matching_matches_brute_force():
    rng = np.random.default_rng(3)
    for _ in range(25):
        n_nodes = int(rng.integers(6, 12))
        n_true = int(rng.integers(2, 4))
        truth_labels = rng.integers(0, n_true, size=n_nodes)
        while len(set(truth_labels.tolist())) < n_true:
            truth_labels = rng.integers(0, n_true, size=n_nodes)
        pred = rng.integers(0, int(rng.integers(2, 5)), size=n_nodes)
        truth = truth_of(truth_labels.tolist())
        ours = macro_f1(pred, truth).macro_f1
        oracle = brute_force_macro_f1(pred.tolist(), truth_labels.tolist(), n_true)
        assert ours == pytest.approx(oracle, abs=1e-12)


def test_prediction_permutation_invariance():
    rng = np.random.default_rng(5)
    truth_labels = rng.integers(0, 3, size=10)
    truth = truth_of(truth_labels.tolist())
    pred = rng.integers(0, 3, size=10)
    base = macro_f1(pred, truth).macro_f1
    for _ in range(20):
        mapping = rng.permutation(3)
        assert macro_f1(mapping[pred], truth).macro_f1 == pytest.approx(base, abs=1e-12)


def test_imperfect_prediction_below_one():
    truth = truth_of([0, 0, 1, 1])
    assert macro_f1(np.array([0, 1, 0, 1]), truth).macro_f1 < 1.0


def test_node_alignment_by_ids():
    truth = truth_of([0, 0, 1])
    report = macro_f1(np.array([7, 2, 2]), truth, node_ids=["n2", "n0", "n1"])
    # reordered: n0 -> 2, n1 -> 2, n2 -> 7 equals truth up to naming
    assert report.macro_f1 == 1.0


def test_node_set_mismatch_rejected():
    truth = truth_of([0, 1])
    with pytest.raises(ValueError, match="node set"):
        macro_f1(np.array([0, 1]), truth, node_ids=["a", "b"])


def test_report_mean_consistency():
    truth = truth_of([0, 0, 1, 2])
    report = macro_f1(np.array([0, 0, 1, 1]), truth)
    assert report.macro_f1 == pytest.approx(float(np.mean(report.per_class_f1)), abs=1e-12)


# -- ground truth type ----------------------------------------------------------------


def test_ground_truth_contiguity_enforced():
    with pytest.raises(ValueError, match="contiguous"):
        GroundTruth(("a", "b"), np.array([0, 2]), 3)


def test_ground_truth_from_labels_remaps():
    truth = GroundTruth.from_labels(["a", "b", "c"], [10, -5, 10])
    assert truth.n_true == 2
    assert truth.labels.tolist() == [1, 0, 1]


def test_labels_csv_round_trip(tmp_path):
    path = tmp_path / "labels.csv"
    save_labels(["a", "b"], [3, 1], path)
    ids, labels = load_labels(path)
    assert ids == ("a", "b") and labels.tolist() == [3, 1]
    truth = load_ground_truth(path, name="demo")
    assert truth.name == "demo" and truth.labels.tolist() == [1, 0]


# -- interaction frequency ----------------------------------------------------------------


def test_frequency_single_region():
    od = InteractionMatrix(["a", "b"], [[0, 2], [3, 0]])
    report = interaction_frequency_report(od, [0, 0])
    assert report.matrix.tolist() == [[1.0]]


def test_frequency_block_diagonal_identity():
    od, truth = planted_od(3, 4, intra_rate=5.0, inter_rate=1e-9, seed=1)
    volumes = od.volumes.copy()
    same = truth.labels[:, None] == truth.labels[None, :]
    volumes[~same] = 0.0
    report = interaction_frequency_report(
        InteractionMatrix(od.node_ids, volumes), truth.labels
    )
    assert np.allclose(report.matrix, np.eye(3), atol=1e-12)


def test_frequency_rows_stochastic_and_scale_invariant():
    od, truth = planted_od(4, 6, intra_rate=6.0, inter_rate=2.0, seed=9)
    report = interaction_frequency_report(od, truth.labels)
    assert report.flagged_rows == ()
    assert np.allclose(report.matrix.sum(axis=1), 1.0, atol=1e-9)
    scaled = interaction_frequency_report(
        InteractionMatrix(od.node_ids, od.volumes * 12.5), truth.labels
    )
    assert np.allclose(report.matrix, scaled.matrix, atol=1e-12)


def test_frequency_zero_outgoing_region_flagged():
    od = InteractionMatrix(["a", "b", "c"], [[0, 1, 1], [2, 0, 1], [0, 0, 0]])
    report = interaction_frequency_report(od, [0, 0, 1])
    assert report.flagged_rows == (1,)
    assert np.all(report.matrix[1] == 0.0)


# -- perturbation -----------------------------------------------------------------------


def test_perturb_zero_sigma_identity():
    mat = np.arange(9.0).reshape(3, 3)
    out = perturb(mat, NoiseSpec("gaussian", 0.0, seed=3))
    assert np.array_equal(out, mat)


def test_perturb_noise_component_in_unit_interval():
    mat = np.zeros((20, 20))
    for spec in (NoiseSpec("gaussian", 2.0, seed=1), NoiseSpec("poisson", 4.0, seed=2)):
        out = perturb(mat, spec)
        assert out.min() >= 0.0 and out.max() <= 1.0
        assert out.max() == pytest.approx(1.0, abs=1e-12)


def test_perturb_deterministic():
    mat = np.ones((6, 6))
    spec = NoiseSpec("poisson", 8.0, seed=11)
    assert np.array_equal(perturb(mat, spec), perturb(mat, spec))


def test_perturb_scale_noise_is_sigma_invariant():
    # min-max processing removes the gaussian scale entirely for a fixed seed
    mat = np.ones((10, 10))
    a = perturb(mat, NoiseSpec("gaussian", 0.2, seed=5))
    b = perturb(mat, NoiseSpec("gaussian", 4.0, seed=5))
    assert np.allclose(a, b, atol=1e-12)


def test_perturb_clip_result_mode():
    mat = np.full((8, 8), 0.9)
    out = perturb(mat, NoiseSpec("gaussian", 3.0, seed=7), mode="clip-result")
    assert out.min() >= 0.0 and out.max() <= 1.0
    assert not np.array_equal(out, mat)


def test_perturb_bad_mode():
    with pytest.raises(ValueError, match="mode"):
        perturb(np.zeros((2, 2)), NoiseSpec("gaussian", 1.0), mode="normalize")


def test_noise_spec_validation():
    with pytest.raises(ValueError, match="kind"):
        NoiseSpec("uniform", 1.0)


# -- sweep -------------------------------------------------------------------------------


@pytest.fixture(scope="module")
def tiny_metro():
    spec = MetroSpec(2, 5, ((0, 2, 1, 1),))
    return metro_network(spec)


FAST_PARAMS = {
    "walk_length": 6,
    "num_walks": 3,
    "dim": 4,
    "window": 2,
    "epochs": 2,
    "restarts": 3,
}


def test_sweep_empty_grid():
    g, line_t, transfer_t = metro_network(MetroSpec(2, 5, ((0, 2, 1, 1),)))
    report = sweep(g, [line_t], grid={}, repeats=1, seed=0)
    assert report.cells == ()
    assert report.to_json()["tables"] == {"line-membership": []}


def test_sweep_deterministic(tiny_metro):
    g, line_t, _ = tiny_metro
    kwargs = dict(
        grid={"p": [0.5, 2.0]}, base_params=FAST_PARAMS, repeats=1, seed=3
    )
    r1 = sweep(g, [line_t], **kwargs)
    r2 = sweep(g, [line_t], **kwargs)
    assert r1.to_json() == r2.to_json()


def test_sweep_grid_shape_and_baselines(tiny_metro):
    g, line_t, transfer_t = tiny_metro
    report = sweep(
        g,
        [line_t, transfer_t],
        grid={"p": [0.5, 2.0], "q": [1.0]},
        base_params=FAST_PARAMS,
        repeats=2,
        seed=1,
        include_baselines=True,
    )
    assert len(report.cells) == 2
    for cell in report.cells:
        assert cell.error is None
        for truth_name in ("line-membership", "transfer-vs-not"):
            assert 0.0 <= cell.scores[truth_name]["mean"] <= 1.0
            assert set(cell.baselines[truth_name]) == {"sc", "hca"}
    payload = report.to_json()
    row = payload["tables"]["line-membership"][0]
    assert {"mean", "std", "sc_macro_f1", "hca_macro_f1"} <= set(row)


def test_sweep_records_failures_and_continues(tiny_metro):
    g, line_t, _ = tiny_metro
    report = sweep(
        g, [line_t], grid={"p": [-1.0, 1.0]}, base_params=FAST_PARAMS, repeats=1, seed=2
    )
    assert report.cells[0].error is not None
    assert report.cells[1].error is None


def test_sweep_workers_match_serial(tiny_metro):
    g, line_t, _ = tiny_metro
    kwargs = dict(grid={"p": [1.0]}, base_params=FAST_PARAMS, repeats=3, seed=9)
    assert sweep(g, [line_t], workers=1, **kwargs).to_json() == sweep(
        g, [line_t], workers=3, **kwargs
    ).to_json()


def test_sweep_csv_output(tmp_path, tiny_metro):
    g, line_t, _ = tiny_metro
    report = sweep(g, [line_t], grid={"p": [1.0]}, base_params=FAST_PARAMS, repeats=1, seed=4)
    path = tmp_path / "sweep.csv"
    report.save_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "p,truth,method,macro_f1_mean,macro_f1_std,repeats,error"
    assert len(lines) == 2


# -- noise robustness harness ----------------------------------------------------------------


def test_noise_robustness_report(tiny_metro):
    g, _, transfer_t = tiny_metro
    report = noise_robustness(
        g,
        transfer_t,
        noise=[("gaussian", 1.0)],
        params=FAST_PARAMS,
        repeats=2,
        seed=5,
    )
    assert 0.0 <= report.baseline_mean <= 1.0
    curve = report.curves["gaussian(1)"]
    assert 0.0 <= curve["mean"] <= 1.0
    payload = report.to_json()
    assert payload["truth"] == "transfer-vs-not"
    assert payload["repeats"] == 2


def test_noise_robustness_csv(tmp_path, tiny_metro):
    g, _, transfer_t = tiny_metro
    report = noise_robustness(
        g, transfer_t, noise=[("poisson", 2.0)], params=FAST_PARAMS, repeats=1, seed=6
    )
    path = tmp_path / "noise.csv"
    report.save_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "kind,level,macro_f1_mean,macro_f1_std,repeats"
    assert len(lines) == 3
