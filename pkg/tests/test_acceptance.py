"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -v -s` to see the lines as they
complete. The dataset-conditional criterion (user-supplied bearing-fault
export) is skipped unless DFHC_CWRU_MANIFEST points at a manifest; see the
README runbook.
"""

import hashlib
import json
import math
import os
import time

import numpy as np
import pytest

from dfhc.cli import main
from dfhc.cnn.layers import Conv2D, Dense, Flatten, MaxPool2, ReLU, cross_entropy, softmax
from dfhc.fold import FoldMode, FoldPlan, ImageRaster, fold_strip, plan_fold, unfold_image
from dfhc.transforms import dft_magnitude_centered, dwt_decompose, dwt_reconstruct, radon_sinogram


def report(cid: str, ok: bool, detail: str) -> None:
    print(f"[{'PASS' if ok else 'FAIL'}] {cid}: {detail}")
    assert ok, f"{cid}: {detail}"


# ---------------------------------------------------------------------------


def test_criterion_1_fold_geometry_exhaustive():
    t0 = time.perf_counter()
    checked = 0
    for mode in (FoldMode.RGB, FoldMode.GRAY):
        for rows in range(1, 7):
            for length in range(10, 5001):
                plan = plan_fold(rows, length, mode)
                assert plan.width ** 2 == plan.effective_len * rows
                assert plan.width % rows == 0
                assert plan.width <= math.isqrt(rows * length)
                checked += 1
    elapsed = time.perf_counter() - t0
    report(
        "C1 fold geometry",
        elapsed < 1.0,
        f"{checked} plans satisfy w^2 = l_eff*rows, w % rows = 0, "
        f"w <= isqrt(rows*l) in {elapsed:.2f}s (budget 1s)",
    )


def test_criterion_2_fold_round_trip_1000_strips():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    for i in range(1000):
        rows = int(rng.integers(1, 7))
        bands = int(rng.integers(1, 9))
        ch = int(rng.choice([1, 3]))
        w = rows * bands
        plan = FoldPlan(
            width=w,
            effective_len=w * bands,
            strip_rows=rows,
            mode=FoldMode.RGB if ch == 3 else FoldMode.GRAY,
        )
        strip = ImageRaster(rng.uniform(size=(rows, plan.effective_len, ch)))
        back = unfold_image(fold_strip(strip, plan), plan)
        assert np.array_equal(back.data, strip.data), f"strip {i} not pixel-exact"
    elapsed = time.perf_counter() - t0
    report(
        "C2 fold round-trip",
        elapsed < 5.0,
        f"1000 seeded strips fold/unfold pixel-exact in {elapsed:.2f}s (budget 5s)",
    )


def test_criterion_3_dft_vs_direct_sum():
    t0 = time.perf_counter()
    rng = np.random.default_rng(3)
    n = 64
    t_idx = np.arange(n)
    # direct evaluation of the transform sum as an explicit matrix product
    w_matrix = np.exp(-2j * math.pi * np.outer(t_idx, t_idx) / n)
    worst_rel = 0.0
    worst_parseval = 0.0
    for _ in range(100):
        x = rng.normal(size=n)
        direct = np.fft.fftshift(np.abs(w_matrix @ x))
        got = dft_magnitude_centered(x).magnitudes
        scale = np.abs(direct).max()
        worst_rel = max(worst_rel, (np.abs(got - direct) / scale).max())
        energy_sig = (x ** 2).sum()
        energy_spec = (got ** 2).sum() / n
        worst_parseval = max(worst_parseval, abs(energy_spec - energy_sig) / energy_sig)
    elapsed = time.perf_counter() - t0
    report(
        "C3 transform vs direct sum",
        worst_rel < 1e-6 and worst_parseval < 1e-6 and elapsed < 5.0,
        f"100 length-64 signals: max rel err {worst_rel:.2e} (tol 1e-6), "
        f"energy mismatch {worst_parseval:.2e} (tol 1e-6), {elapsed:.2f}s (budget 5s)",
    )


def test_criterion_4_db3_perfect_reconstruction():
    t0 = time.perf_counter()
    rng = np.random.default_rng(4)
    worst = 0.0
    lengths = [n for n in range(8, 513) if n & (n - 1) == 0]  # dyadic 8..512
    for n in lengths:
        for level in (1, 2, 3):
            x = rng.normal(size=n)
            back = dwt_reconstruct(dwt_decompose(x, level))
            worst = max(worst, np.abs(back - x).max())
    elapsed = time.perf_counter() - t0
    report(
        "C4 db3 reconstruction",
        worst < 1e-9 and elapsed < 10.0,
        f"dyadic lengths {lengths}, levels 1-3: max abs err {worst:.2e} "
        f"(tol 1e-9), {elapsed:.2f}s (budget 10s)",
    )


def test_criterion_5_radon_checks():
    t0 = time.perf_counter()
    rng = np.random.default_rng(5)
    worst_theta0 = 0.0
    worst_mass = 0.0
    for _ in range(50):
        img = rng.uniform(size=(64, 64))
        sino = radon_sinogram(img, 180)
        off = (sino.rho_bins - 64) // 2
        worst_theta0 = max(
            worst_theta0, np.abs(sino.data[off : off + 64, 0] - img.sum(axis=0)).max()
        )
        mass = img.sum()
        worst_mass = max(worst_mass, (np.abs(sino.data.sum(axis=0) - mass) / mass).max())
    elapsed = time.perf_counter() - t0
    report(
        "C5 radon checks",
        worst_theta0 < 1e-6 and worst_mass < 0.005 and elapsed < 30.0,
        f"50 random 64x64 images, 180 angles: theta=0 vs column sums "
        f"{worst_theta0:.2e} (tol 1e-6), per-angle mass error {worst_mass:.2e} "
        f"(tol 5e-3), {elapsed:.2f}s (budget 30s)",
    )


def test_criterion_6_cnn_gradient_check():
    t0 = time.perf_counter()
    rng = np.random.default_rng(6)
    layers = [
        Conv2D(2, 4, 3, rng),
        ReLU(),
        MaxPool2(),
        Conv2D(4, 6, 3, rng),
        ReLU(),
        MaxPool2(),
        Flatten(),
        Dense(6 * 2 * 2, 3, rng),
    ]
    x = rng.normal(size=(2, 2, 8, 8))
    labels = np.array([0, 2])

    def loss_now():
        h = x
        for layer in layers:
            h = layer.forward(h)
        return cross_entropy(softmax(h), labels)

    h = x
    for layer in layers:
        h = layer.forward(h)
    probs = softmax(h)
    grad = probs.copy()
    grad[np.arange(2), labels] -= 1.0
    grad /= 2
    dx = grad
    for layer in reversed(layers):
        dx = layer.backward(dx)

    eps = 1e-4
    worst = 0.0
    n_params = 0
    for layer in layers:
        for name, param in layer.params.items():
            it = np.nditer(param, flags=["multi_index"])
            for _ in it:
                idx = it.multi_index
                old = param[idx]
                param[idx] = old + eps
                up = loss_now()
                param[idx] = old - eps
                down = loss_now()
                param[idx] = old
                numeric = (up - down) / (2 * eps)
                analytic = layer.grads[name][idx]
                denom = max(abs(numeric), abs(analytic), 1e-8)
                worst = max(worst, abs(numeric - analytic) / denom)
                n_params += 1
    # parameter-free layers (relu, pool, flatten) via the input gradient
    flat_idx = [(0, 0, 2, 3), (1, 1, 5, 5), (0, 1, 0, 0)]
    for idx in flat_idx:
        old = x[idx]
        x[idx] = old + eps
        up = loss_now()
        x[idx] = old - eps
        down = loss_now()
        x[idx] = old
        numeric = (up - down) / (2 * eps)
        denom = max(abs(numeric), abs(dx[idx]), 1e-8)
        worst = max(worst, abs(numeric - dx[idx]) / denom)
    elapsed = time.perf_counter() - t0
    report(
        "C6 gradient check",
        worst < 1e-4 and elapsed < 60.0,
        f"{n_params} parameters + input taps on an 8x8 toy model: "
        f"max rel err {worst:.2e} (tol 1e-4), {elapsed:.1f}s (budget 60s)",
    )


# ---------------------------------------------------------------------------
# end-to-end criteria share one synthetic dataset and CLI invocations


def _write_json(path, payload):
    path.write_text(json.dumps(payload, indent=2))
    return str(path)


def _png_hashes(directory):
    return {
        p.name: hashlib.sha256(p.read_bytes()).hexdigest()
        for p in sorted(directory.glob("*.png"))
    }


def _run_method(base, manifest, method, tag):
    config = _write_json(
        base / f"config_{tag}.json",
        {
            "codec": {"method": method, "target_size": 32},
            "split_seed": 5,
            "cnn": {
                "epochs": 10,
                "batch_size": 32,
                "learning_rate": 0.05,
                "momentum": 0.9,
                "seed": 5,
            },
        },
    )
    enc_dir = base / f"enc_{tag}"
    run_dir = base / f"run_{tag}"
    assert main(["encode", "--manifest", manifest, "--config", config, "--out", str(enc_dir)]) == 0
    assert main([
        "train", "--index", str(enc_dir / "index.csv"), "--config", config, "--out", str(run_dir),
    ]) == 0
    payload = json.loads((run_dir / "report.json").read_text())
    return enc_dir, payload


@pytest.fixture(scope="session")
def end_to_end(tmp_path_factory):
    base = tmp_path_factory.mktemp("acceptance_e2e")
    spec = _write_json(
        base / "synth.json",
        {
            "cluster_dims": [3],
            "length": 1100,
            "samples_per_class": 100,
            "seed": 11,
            "recipes": [
                {"frequency": 3, "noise_sigma": 0.05},
                {"frequency": 7, "noise_sigma": 0.05},
                {"frequency": 13, "noise_sigma": 0.05},
                {"frequency": 23, "noise_sigma": 0.05},
            ],
        },
    )
    t0 = time.perf_counter()
    data_dir = base / "data"
    assert main(["synth", "--spec", spec, "--out", str(data_dir)]) == 0
    manifest = str(data_dir / "manifest.json")
    results = {}
    for method, tag in (("RGB", "rgb"), ("FFT_RGB", "fft")):
        enc_dir, payload = _run_method(base, manifest, method, tag)
        results[method] = {
            "enc_dir": enc_dir,
            "accuracy": payload["test_accuracy"],
            "hashes": _png_hashes(enc_dir),
        }
    results["elapsed"] = time.perf_counter() - t0
    results["base"] = base
    results["manifest"] = manifest
    return results


def test_criterion_7_synthetic_end_to_end(end_to_end):
    rgb = end_to_end["RGB"]["accuracy"]
    fft = end_to_end["FFT_RGB"]["accuracy"]
    elapsed = end_to_end["elapsed"]
    report(
        "C7 synthetic end-to-end",
        rgb >= 0.95 and fft >= 0.95 and elapsed < 600.0,
        f"4 classes x 100 samples, 10 epochs at 32x32: RGB accuracy {rgb:.4f}, "
        f"FFT_RGB accuracy {fft:.4f} (floor 0.95), {elapsed:.0f}s (budget 600s)",
    )


def test_criterion_8_determinism(end_to_end):
    base = end_to_end["base"]
    manifest = end_to_end["manifest"]
    ok = True
    details = []
    for method, tag in (("RGB", "rgb2"), ("FFT_RGB", "fft2")):
        enc_dir, payload = _run_method(base, manifest, method, tag)
        same_pngs = _png_hashes(enc_dir) == end_to_end[method]["hashes"]
        same_acc = payload["test_accuracy"] == end_to_end[method]["accuracy"]
        ok = ok and same_pngs and same_acc
        details.append(f"{method}: pngs identical={same_pngs}, accuracy identical={same_acc}")
    report("C8 determinism", ok, "; ".join(details))


CWRU_ENV = "DFHC_CWRU_MANIFEST"


@pytest.mark.skipif(
    CWRU_ENV not in os.environ,
    reason=f"dataset-conditional: set {CWRU_ENV} to a manifest for a user-supplied "
    "bearing-fault CSV export (see README runbook)",
)
def test_criterion_9_bearing_fault_runbook(tmp_path):
    manifest = os.environ[CWRU_ENV]
    window = int(os.environ.get("DFHC_CWRU_WINDOW", "4096"))
    results = {}
    for method, floor in (("RGB", 0.95), ("RGB_FFT", 0.97)):
        config = _write_json(
            tmp_path / f"config_{method}.json",
            {
                "codec": {"method": method, "target_size": 64},
                "window": {"length": window, "overlap": 0},
                "split_seed": 5,
                "cnn": {
                    "epochs": 30,
                    "batch_size": 32,
                    "learning_rate": 0.05,
                    "momentum": 0.9,
                    "seed": 5,
                },
            },
        )
        enc_dir = tmp_path / f"enc_{method}"
        run_dir = tmp_path / f"run_{method}"
        assert main(["encode", "--manifest", manifest, "--config", config, "--out", str(enc_dir)]) == 0
        assert main([
            "train", "--index", str(enc_dir / "index.csv"), "--config", config,
            "--out", str(run_dir),
        ]) == 0
        payload = json.loads((run_dir / "report.json").read_text())
        results[method] = (payload["test_accuracy"], floor)
    ok = all(acc >= floor for acc, floor in results.values())
    report(
        "C9 bearing-fault export",
        ok,
        ", ".join(f"{m}: {acc:.4f} (floor {floor})" for m, (acc, floor) in results.items()),
    )
