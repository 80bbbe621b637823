"""Convert Cora into the dkgccl dataset layout.

Accepts either the Planetoid files (ind.cora.x, .tx, .allx, .y, .ty, .ally,
.graph, .test.index) or the LINQS release (cora.content, cora.cites) and
writes edges.txt, features.bin and labels.txt into the output directory
(default: data/cora, which the acceptance binary looks at).

    python tools/prepare_cora.py --raw /path/to/planetoid/raw
    python tools/prepare_cora.py --raw /path/to/cora --out data/cora
"""

import argparse
import pickle
import struct
import sys
from pathlib import Path

import numpy as np


def load_planetoid(raw: Path):
    def obj(name):
        with open(raw / f"ind.cora.{name}", "rb") as f:
            return pickle.load(f, encoding="latin1")

    x, tx, allx = obj("x"), obj("tx"), obj("allx")
    y, ty, ally = obj("y"), obj("ty"), obj("ally")
    graph = obj("graph")
    test_index = np.loadtxt(raw / "ind.cora.test.index", dtype=np.int64)

    import scipy.sparse as sp

    features = sp.vstack([allx, tx]).tolil()
    labels = np.vstack([ally, ty])
    order = np.sort(test_index)
    features[test_index, :] = features[order, :]
    labels[test_index, :] = labels[order, :]
    features = np.asarray(features.todense(), dtype=np.float64)
    labels = labels.argmax(axis=1)

    edges = set()
    for u, nbrs in graph.items():
        for v in nbrs:
            if u != v:
                edges.add((min(u, v), max(u, v)))
    del x, tx, y, ty
    return features, labels, sorted(edges)


def load_linqs(raw: Path):
    ids, rows, classes = [], [], []
    with open(raw / "cora.content") as f:
        for line in f:
            parts = line.split()
            ids.append(parts[0])
            rows.append([float(v) for v in parts[1:-1]])
            classes.append(parts[-1])
    index = {paper: i for i, paper in enumerate(ids)}
    names = sorted(set(classes))
    labels = np.array([names.index(c) for c in classes], dtype=np.int64)
    edges = set()
    with open(raw / "cora.cites") as f:
        for line in f:
            a, b = line.split()
            if a in index and b in index and a != b:
                u, v = index[a], index[b]
                edges.add((min(u, v), max(u, v)))
    return np.array(rows, dtype=np.float64), labels, sorted(edges)


def write_matrix_bin(path: Path, m: np.ndarray):
    m = np.ascontiguousarray(m, dtype="<f8")
    with open(path, "wb") as f:
        f.write(struct.pack("<II", m.shape[0], m.shape[1]))
        f.write(m.tobytes())


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--raw", type=Path, required=True, help="directory with the downloaded files")
    parser.add_argument("--out", type=Path, default=Path(__file__).resolve().parents[1] / "data" / "cora")
    parser.add_argument("--row-normalize", action="store_true", help="scale feature rows to sum 1")
    args = parser.parse_args(argv)

    if (args.raw / "ind.cora.x").exists():
        features, labels, edges = load_planetoid(args.raw)
    elif (args.raw / "cora.content").exists():
        features, labels, edges = load_linqs(args.raw)
    else:
        sys.exit(f"no Planetoid or LINQS Cora files in {args.raw}")

    if args.row_normalize:
        sums = features.sum(axis=1, keepdims=True)
        features = features / np.where(sums == 0, 1, sums)

    args.out.mkdir(parents=True, exist_ok=True)
    with open(args.out / "edges.txt", "w") as f:
        f.write(f"# cora: {features.shape[0]} nodes, {len(edges)} undirected edges\n")
        for u, v in edges:
            f.write(f"{u} {v}\n")
    write_matrix_bin(args.out / "features.bin", features)
    np.savetxt(args.out / "labels.txt", labels, fmt="%d")
    print(f"wrote {features.shape[0]} nodes, {len(edges)} edges, {features.shape[1]} features, "
          f"{labels.max() + 1} classes to {args.out}")


if __name__ == "__main__":
    main()
