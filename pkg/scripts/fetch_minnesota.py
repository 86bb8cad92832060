"""Write the Minnesota roadmap as an ``i,j,weight`` edge list.

The adjacency matrix ships inside the PyGSP wheel (``minnesota.mat``).  The
wheel is downloaded with pip into a temporary directory; nothing is
installed.  Usage::

    python scripts/fetch_minnesota.py data/minnesota_edges.csv
    python scripts/fetch_minnesota.py out.csv --mat path/to/minnesota.mat
"""

import argparse
import subprocess
import sys
import tempfile
import zipfile
from pathlib import Path

import numpy as np
import scipy.io
import scipy.sparse as sp

MEMBER = "pygsp/data/pointclouds/minnesota.mat"


def fetch_mat(workdir: Path) -> Path:
    subprocess.run(
        [sys.executable, "-m", "pip", "download", "pygsp==0.6.1", "--no-deps", "-d", str(workdir)],
        check=True,
    )
    wheel = next(workdir.glob("pygsp-*.whl"))
    with zipfile.ZipFile(wheel) as zf:
        zf.extract(MEMBER, workdir)
    return workdir / MEMBER


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("out")
    ap.add_argument("--mat", help="use an existing minnesota.mat instead of downloading")
    args = ap.parse_args()
    with tempfile.TemporaryDirectory() as tmp:
        mat = Path(args.mat) if args.mat else fetch_mat(Path(tmp))
        A = sp.triu(sp.csr_matrix(scipy.io.loadmat(mat)["A"]), k=1).tocoo()
    order = np.lexsort((A.col, A.row))
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", encoding="utf-8") as fh:
        fh.write("# Minnesota roadmap (Gleich), unit weights; 0-based node ids\n")
        fh.write("i,j,weight\n")
        for r, c in zip(A.row[order], A.col[order]):
            fh.write(f"{r},{c},1\n")
    print(f"wrote {A.nnz} edges over {A.shape[0]} nodes to {out}")


if __name__ == "__main__":
    main()
