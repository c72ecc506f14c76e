"""Byte-level conformance between the toolkit and an external exporter.

emit DIR    write activation and eraser files the way the exporter does
check DIR   parse every file the toolkit wrote under a pipeline output DIR
"""

import json
import struct
import sys
from pathlib import Path

import numpy as np

TAPS = ["dec0", "dec1", "dec2", "dec3", "out"]
VERSION = 1


def _str(s):
    b = s.encode("utf-8")
    return struct.pack("<I", len(b)) + b


def encode_activations(tap, features, labels, freqs):
    n, d = features.shape
    return (b"FQPB" + struct.pack("<I", VERSION) + _str(tap) + struct.pack("<QQ", n, d)
            + features.astype("<f4").tobytes() + labels.astype("<i4").tobytes()
            + freqs.astype("<i4").tobytes())


def encode_eraser(tap, P, b, mu):
    d = P.shape[0]
    return (b"FQER" + struct.pack("<I", VERSION) + _str(tap) + struct.pack("<Q", d)
            + P.astype("<f8").tobytes() + b.astype("<f8").tobytes() + mu.astype("<f8").tobytes())


class Reader:
    def __init__(self, data):
        self.data = data
        self.pos = 0

    def take(self, n):
        if self.pos + n > len(self.data):
            raise ValueError("truncated payload")
        out = self.data[self.pos:self.pos + n]
        self.pos += n
        return out

    def u32(self):
        return struct.unpack("<I", self.take(4))[0]

    def u64(self):
        return struct.unpack("<Q", self.take(8))[0]

    def string(self):
        return self.take(self.u32()).decode("utf-8")

    def array(self, dtype, count):
        dt = np.dtype(dtype)
        return np.frombuffer(self.take(dt.itemsize * count), dtype=dt)

    def header(self, magic):
        if self.take(4) != magic:
            raise ValueError("bad magic")
        if self.u32() != VERSION:
            raise ValueError("unsupported version")

    def done(self):
        if self.pos != len(self.data):
            raise ValueError("trailing bytes")


def read_activations(path):
    r = Reader(path.read_bytes())
    r.header(b"FQPB")
    tap = r.string()
    n, d = r.u64(), r.u64()
    feats = r.array("<f4", n * d).reshape(n, d)
    labels = r.array("<i4", n)
    freqs = r.array("<i4", n)
    r.done()
    return tap, feats, labels, freqs


def read_eraser(path):
    r = Reader(path.read_bytes())
    r.header(b"FQER")
    tap = r.string()
    d = r.u64()
    P = r.array("<f8", d * d).reshape(d, d)
    b = r.array("<f8", d)
    mu = r.array("<f8", d)
    r.done()
    return tap, P, b, mu


def read_dataset(path):
    r = Reader(path.read_bytes())
    r.header(b"FQDS")
    n, T = r.u64(), r.u64()
    samples = r.array("<f8", n * T).reshape(n, T)
    labels = r.array("<i4", n)
    freqs = r.array("<i4", n)
    phases = r.array("<f8", n)
    offsets = r.array("<i8", n)
    split = r.array("u1", n)
    r.done()
    return samples, labels, freqs, phases, offsets, split


def read_weights(path):
    r = Reader(path.read_bytes())
    r.header(b"FQWT")
    config = json.loads(r.string())
    tensors = {}
    for _ in range(r.u64()):
        name = r.string()
        rows, cols = r.u64(), r.u64()
        tensors[name] = r.array("<f4", rows * cols).reshape(rows, cols)
    r.done()
    return config, tensors


def emit(out):
    rng = np.random.default_rng(17)
    n, d = 600, 8
    freqs = rng.integers(2, 65, size=n).astype(np.int32)
    labels = (freqs > 33).astype(np.int32)
    expected = {"activations": {}, "erasers": {}}
    for k, tap in enumerate(TAPS):
        feats = rng.normal(size=(n, d)).astype(np.float32)
        feats[:, 0] += (2.0 * labels - 1.0) * (k + 1)
        path = out / "activations" / "LL" / f"{tap}.fqpb"
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(encode_activations(tap, feats, labels, freqs))
        expected["activations"][str(path)] = {
            "tap": tap, "n": n, "d": d,
            "checksum": float(feats.astype(np.float64).sum()),
            "first": [float(v) for v in feats[0]],
            "labels": labels[:10].tolist(), "freqs": freqs[:10].tolist()}
    dm = 32
    for tap in TAPS:
        path = out / "erasers" / "identity" / f"{tap}.fqer"
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(encode_eraser(tap, np.eye(dm), np.zeros(dm), rng.normal(size=dm)))
    P = rng.normal(size=(4, 4))
    b = rng.normal(size=4)
    mu = rng.normal(size=4)
    path = out / "erasers" / "random" / "dec2.fqer"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_eraser("dec2", P, b, mu))
    expected["erasers"][str(path)] = {"tap": "dec2", "P": P.tolist(), "b": b.tolist(), "mu": mu.tolist()}
    (out / "expected.json").write_text(json.dumps(expected))
    print(f"emitted {len(TAPS)} activation files and {len(TAPS) + 1} eraser files under {out}")


def check(root):
    failures = []
    config = json.loads((root / "config.json").read_text())
    taps, tasks = config["taps"], config["tasks"]
    d_model = config["model"]["d_model"]

    for task in tasks:
        ds = read_dataset(root / "data" / f"probe_{task}.fqds")
        samples, labels, freqs, phases, offsets, split = ds
        if not set(np.unique(split)) <= {0, 1, 2}:
            failures.append(f"{task}: split ids outside 0..2")
        if samples.shape[1] != config["signal"]["T"]:
            failures.append(f"{task}: window length {samples.shape[1]}")
        # Each window is the phase-shifted sinusoid recorded beside it.
        n = np.arange(samples.shape[1])
        fs = config["signal"]["fs"]
        for i in range(0, len(freqs), max(1, len(freqs) // 25)):
            ref = np.sin(2 * np.pi * freqs[i] * n / fs + phases[i])
            if np.max(np.abs(ref - samples[i])) > 1e-9:
                failures.append(f"{task}: window {i} disagrees with its frequency and phase")
                break
        for tap in taps:
            path = root / "activations" / task / f"{tap}.fqpb"
            got_tap, feats, alabels, afreqs = read_activations(path)
            if got_tap != tap:
                failures.append(f"{path}: tap id {got_tap}")
            if feats.shape != (len(freqs), d_model):
                failures.append(f"{path}: shape {feats.shape}")
            if not np.array_equal(afreqs, freqs) or not np.array_equal(alabels, labels):
                failures.append(f"{path}: labels or frequencies differ from the dataset")
            if not np.all(np.isfinite(feats)):
                failures.append(f"{path}: non-finite features")

    er = read_dataset(root / "data" / "erasure.fqds")
    if not np.array_equal(er[1], er[2]):
        failures.append("erasure dataset: labels must equal frequencies")

    n_erasers = 0
    for path in sorted((root / "erasers").glob("*/*.fqer")):
        tap, P, b, mu = read_eraser(path)
        n_erasers += 1
        if tap != path.stem or P.shape != (d_model, d_model):
            failures.append(f"{path}: tap {tap} shape {P.shape}")
        if np.max(np.abs(b - (mu - P @ mu))) > 1e-9:
            failures.append(f"{path}: bias does not preserve the mean")
    if n_erasers == 0:
        failures.append("no eraser files found")

    cfg, tensors = read_weights(root / "model" / "weights.fqwt")
    if cfg.get("d_model") != d_model or "embed.w_m" not in tensors:
        failures.append("weights: unexpected config or tensor set")

    for f in failures:
        print("FAIL", f)
    print(f"checked {len(tasks)} datasets, {len(tasks) * len(taps)} activation files, "
          f"{n_erasers} eraser files, {len(tensors)} tensors")
    return 1 if failures else 0


def main(argv):
    if len(argv) != 3 or argv[1] not in ("emit", "check"):
        print(__doc__)
        return 2
    target = Path(argv[2])
    if argv[1] == "emit":
        target.mkdir(parents=True, exist_ok=True)
        emit(target)
        return 0
    return check(target)


if __name__ == "__main__":
    sys.exit(main(sys.argv))
