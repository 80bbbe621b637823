import itertools
import json
import struct
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

import dkgccl

ROOT = Path(__file__).resolve().parents[2]
FIXTURE = ROOT / "data" / "fixture" / "config.json"


def random_instance(rng, n=30, m=4, d=5):
    assignment = np.concatenate([np.arange(m), rng.integers(0, m, n - m)])
    rng.shuffle(assignment)
    coarse = rng.random((m, m))
    coarse = coarse + coarse.T
    return rng.normal(size=(n, d)), rng.normal(size=(m, d)), assignment.tolist(), coarse


@pytest.mark.parametrize("variant,alpha", [("tensor_product", 0.5), ("linear_combination", 0.0),
                                           ("linear_combination", 0.5), ("linear_combination", 1.0)])
def test_fast_loss_matches_oracle(variant, alpha):
    rng = np.random.default_rng(1)
    nodes, comms, assignment, coarse = random_instance(rng)
    fast, clamped = dkgccl.loss(nodes, comms, assignment, coarse, variant=variant, alpha=alpha)
    oracle, _ = dkgccl.loss(nodes, comms, assignment, coarse, variant=variant, alpha=alpha, oracle=True)
    assert clamped == 0
    assert abs(fast - oracle) <= 1e-10 * abs(oracle)


def test_single_community_loss_is_zero():
    rng = np.random.default_rng(2)
    nodes = rng.normal(size=(10, 3))
    value, _ = dkgccl.loss(nodes, rng.normal(size=(1, 3)), [0] * 10, np.ones((1, 1)))
    assert abs(value) < 1e-15


def test_bad_variant_is_a_config_error():
    rng = np.random.default_rng(3)
    nodes, comms, assignment, coarse = random_instance(rng)
    with pytest.raises(dkgccl.ConfigError):
        dkgccl.loss(nodes, comms, assignment, coarse, variant="sum")


def test_clustering_scores_match_scikit_learn():
    metrics = pytest.importorskip("sklearn.metrics")
    labelings = [list(p) for p in itertools.product(range(3), repeat=5)][::7]
    for a in labelings:
        for b in labelings[::5]:
            assert dkgccl.ari(a, b) == pytest.approx(metrics.adjusted_rand_score(a, b), abs=1e-12)
            expected = metrics.normalized_mutual_info_score(a, b, average_method="arithmetic")
            assert dkgccl.nmi(a, b) == pytest.approx(expected, abs=1e-12)


def test_partition_two_triangles():
    edges = np.array([[0, 1], [1, 2], [0, 2], [3, 4], [4, 5], [3, 5], [2, 3]])
    assignment, cut = dkgccl.partition(edges, 6, 2)
    assert cut == 1
    assert len(set(assignment[:3])) == 1 and len(set(assignment[3:])) == 1
    coarse = dkgccl.coarsen(edges, 6, assignment, "raw")
    assert np.allclose(coarse.sum(), 14)


def test_kmeans_blobs():
    rng = np.random.default_rng(4)
    z = np.vstack([rng.normal(-20, 1, (15, 2)), rng.normal(20, 1, (15, 2))])
    assignment, centroids, inertia = dkgccl.kmeans(z, 2, seed=0)
    assert len(set(assignment[:15])) == 1 and assignment[0] != assignment[-1]
    assert centroids.shape == (2, 2)


def test_substructure_expectation():
    assert dkgccl.substructure_count_expectation(64, 0.5, 2) == pytest.approx(64 * 0.75)


def test_pipeline_on_fixture(tmp_path):
    run_dir = Path(dkgccl.run_pipeline(FIXTURE, tmp_path))
    assert run_dir.name == dkgccl.config_digest(FIXTURE)
    z = dkgccl.read_matrix(run_dir / "embeddings_mlp.bin")
    assert z.shape == (200, 32)
    assert np.isfinite(z).all()
    metrics = json.loads((run_dir / "metrics.json").read_text())
    assert len(metrics["classify"]["gnn"]["accuracies"]) == 3


def test_missing_config_is_a_config_error(tmp_path):
    with pytest.raises(dkgccl.ConfigError):
        dkgccl.run_pipeline(tmp_path / "nope.json", tmp_path)


def test_prepare_cora_linqs_layout(tmp_path):
    raw = tmp_path / "raw"
    raw.mkdir()
    (raw / "cora.content").write_text("p1 1 0 1 Theory\np2 0 1 0 Rule_Learning\np3 1 1 0 Theory\n")
    (raw / "cora.cites").write_text("p1 p2\np2 p3\np3 p1\np2 p1\nmissing p1\n")
    out = tmp_path / "out"
    subprocess.run([sys.executable, str(ROOT / "tools" / "prepare_cora.py"), "--raw", str(raw), "--out", str(out)],
                   check=True, capture_output=True)
    edges = [line for line in (out / "edges.txt").read_text().splitlines() if not line.startswith("#")]
    assert edges == ["0 1", "0 2", "1 2"]
    assert (out / "labels.txt").read_text().split() == ["1", "0", "1"]
    raw_bytes = (out / "features.bin").read_bytes()
    rows, cols = struct.unpack("<II", raw_bytes[:8])
    assert (rows, cols) == (3, 3)
    assert dkgccl.read_matrix(out / "features.bin")[2].tolist() == [1.0, 1.0, 0.0]
