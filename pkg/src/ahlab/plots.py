"""Figure rendering for the command-line front end.

Every function writes one PNG next to the delimited outputs.  Figures are
diagnostic companions; the CSV/JSON files remain the regression artifacts
(PNG bytes are not covered by the determinism guarantee).
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_multiplier(ks, numeric, closed, path):
    ks = np.asarray(ks)
    rel = np.abs(np.asarray(numeric) / np.asarray(closed) - 1.0)
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8.0, 3.2))
    ax1.plot(ks, closed, "o-", label="closed form")
    ax1.plot(ks, numeric, "x", label="numeric")
    ax1.set_xlabel("mode k")
    ax1.set_ylabel("multiplier")
    ax1.legend()
    ax2.semilogy(ks, np.maximum(rel, 1e-18), "s-")
    ax2.set_xlabel("mode k")
    ax2.set_ylabel("relative deviation")
    return _save(fig, path)


def plot_adapted(profile, path):
    ts = np.linspace(0.01, 20.0, 400)
    val, der = profile.phi(ts)
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8.0, 3.2))
    ax1.semilogy(ts, val)
    ax1.set_xlabel("t")
    ax1.set_ylabel("profile")
    ax2.plot(ts, der)
    ax2.set_xlabel("t")
    ax2.set_ylabel("profile derivative")
    return _save(fig, path)


def plot_volume(curve, path):
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8.0, 3.2))
    ax1.semilogy(curve.grid, curve.area, label="area")
    ax1.semilogy(curve.grid, curve.ball, label="ball")
    ax1.set_xlabel("t")
    ax1.legend()
    ax2.plot(curve.grid, curve.area_ratio, label="area ratio")
    ax2.plot(curve.grid, curve.ball_ratio, label="ball ratio")
    ax2.set_xlabel("t")
    ax2.set_ylabel("ratio vs reference warp")
    ax2.legend()
    return _save(fig, path)


def plot_compactified(grid, rho, j_weighted, h_weighted, path):
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8.0, 3.2))
    ax1.plot(grid, rho)
    ax1.set_xlabel("t")
    ax1.set_ylabel("defining function")
    ax2.plot(grid, j_weighted, label="weighted trace")
    ax2.plot(grid, h_weighted, label="weighted mean curvature")
    ax2.set_xlabel("t")
    ax2.legend()
    return _save(fig, path)


def plot_chain(report, path):
    fig, ax = plt.subplots(figsize=(5.0, 3.2))
    ax.plot(report.grid, report.area_ratio, label="area ratio")
    ax.plot(report.grid, report.ball_ratio, label="ball ratio")
    ax.axhline(1.0, color="k", lw=0.6)
    ax.set_xlabel("t")
    ax.set_ylabel("ratio vs reference warp")
    ax.set_title("status: %s" % report.status)
    ax.legend()
    return _save(fig, path)


def plot_rayleigh(result, expected, path):
    mins = [q for q, _ in result.per_restart]
    fig, ax = plt.subplots(figsize=(5.0, 3.2))
    ax.plot(range(len(mins)), mins, "o")
    ax.axhline(expected, color="k", lw=0.8, label="closed form")
    ax.set_xlabel("restart")
    ax.set_ylabel("minimized quotient")
    ax.legend()
    return _save(fig, path)


def plot_escobar(report, path):
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8.0, 3.2))
    ax1.plot(report.grid, report.ratio)
    ax1.set_xlabel("t")
    ax1.set_ylabel("ball ratio vs round sphere")
    ax2.semilogy(report.grid, np.maximum(np.abs(report.ratio - 1.0), 1e-18))
    ax2.set_xlabel("t")
    ax2.set_ylabel("|ratio - 1|")
    return _save(fig, path)


def plot_verify(results, path):
    labels = ["%d" % r.cid for r in results]
    ratios = [max(r.measured / r.tolerance, 1e-18) if r.tolerance > 0 else 1e-18
              for r in results]
    colors = ["tab:blue" if r.passed else "tab:red" for r in results]
    fig, ax = plt.subplots(figsize=(6.0, 3.2))
    ax.bar(labels, ratios, color=colors)
    ax.set_yscale("log")
    ax.axhline(1.0, color="k", lw=0.8)
    ax.set_xlabel("criterion")
    ax.set_ylabel("measured / tolerance")
    return _save(fig, path)
