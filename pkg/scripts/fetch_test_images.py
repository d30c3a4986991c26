"""Recreate tests/data/lena.pgm from the 512x512 Lenna array shipped in scipy 0.15.0.

The array lived in ``scipy/misc/lena.dat`` (a pickle) until scipy dropped
it; the wheel below is the last easy source. Both the wheel and the
resulting PGM are checked against pinned SHA-256 digests.

    python scripts/fetch_test_images.py            # download the wheel
    python scripts/fetch_test_images.py --wheel X  # use a local copy
"""

import argparse
import hashlib
import io
import pickle
import sys
import urllib.request
import zipfile
from pathlib import Path

import numpy as np

WHEEL_URL = (
    "https://pypi.org/packages/db/c4/6e2a7f46c9486c6185c60ab0718e7a1b42a971a96b063c6b6e247b7a01fa/"
    "scipy-0.15.0-cp34-cp34m-manylinux1_x86_64.whl"
)
WHEEL_SHA256 = "77dc45c2c3de2b7550bf9f23024f95f8d16a948e3d73e16757e2daf80af9a987"
PGM_SHA256 = "3c011a8e33645ec9bf30d84b938a0ea56a53739e2fddf18e61df16842006bde1"
DEFAULT_OUT = Path(__file__).resolve().parent.parent / "tests" / "data" / "lena.pgm"


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--wheel", type=Path, help="local scipy-0.15.0 wheel instead of downloading")
    parser.add_argument("--out", type=Path, default=DEFAULT_OUT)
    args = parser.parse_args(argv)

    data = args.wheel.read_bytes() if args.wheel else urllib.request.urlopen(WHEEL_URL, timeout=300).read()
    if hashlib.sha256(data).hexdigest() != WHEEL_SHA256:
        print("wheel checksum mismatch; refusing to unpickle", file=sys.stderr)
        return 1
    with zipfile.ZipFile(io.BytesIO(data)) as zf:
        # safe only because the archive digest is pinned above
        lena = np.asarray(pickle.loads(zf.read("scipy/misc/lena.dat"), encoding="latin1"), dtype=np.uint8)
    pgm = b"P5\n%d %d\n255\n" % (lena.shape[1], lena.shape[0]) + lena.tobytes()
    if hashlib.sha256(pgm).hexdigest() != PGM_SHA256:
        print("extracted image does not match the pinned digest", file=sys.stderr)
        return 1
    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_bytes(pgm)
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
