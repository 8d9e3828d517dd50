"""Human-readable reports and the on-disk report directory (CSV trace plus figures)."""
from __future__ import annotations

import csv
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np

from .parse import param_names
from .reduction import Pencil
from .sdpnum import ProbeReport, SolveOutcome

_SHORT = 60


def _rational_text(x: Fraction) -> str:
    text = str(x)
    if len(text) <= _SHORT:
        return text
    return f"{float(x):.6e} (exact value has {len(text)} characters)"


def format_point(point: Sequence, names: Sequence[str] | None = None) -> str:
    names = names or param_names(len(point))
    if not point:
        return "()"
    return ", ".join(f"{n}={v}" for n, v in zip(names, point))


def format_outcome(out: SolveOutcome) -> str:
    lines = [f"status: {out.status}", f"message: {out.message}", f"iterations: {out.iterations}"]
    if out.alpha is not None:
        lines.append("alpha: " + format_point([f"{x:.10g}" for x in out.alpha]))
    if out.mu_trace:
        tr = out.mu_trace
        lines.append(f"mu_trace: n={len(tr)} first={tr[0]:.6g} last={tr[-1]:.6g} min={min(tr):.6g}")
    else:
        lines.append("mu_trace: empty")
    lines.append(f"reduced_margin: {out.margin:.6g}")
    lines.append(f"min_eig_estimate: {out.min_eig_estimate:.6g}")
    lines.append(f"common_kernel_dim: {out.kernel_dim}")
    return "\n".join(lines)


def format_probe(report: ProbeReport, point: Sequence[Fraction]) -> str:
    lines = [
        "probe point: " + format_point(point),
        f"phi: {_rational_text(report.phi_value)}",
        "gradient: " + (", ".join(_rational_text(g) for g in report.gradient) or "()"),
        f"singular: {str(report.singular).lower()}",
    ]
    if report.symbolic_det is not None:
        lines.append(f"symbolic_det: {report.symbolic_det.format(param_names(len(point)))}")
    else:
        lines.append("symbolic_det: skipped (size guard)")
    if report.common_kernel_dim:
        lines.append(f"note: all pencil matrices share a kernel of dimension {report.common_kernel_dim}, "
                     "so det F vanishes identically")
    elif report.singular:
        lines.append("note: the determinant and its gradient vanish here: a singular point of det F = 0, "
                     "typical of a solution set with empty interior")
    elif report.phi_value == 0:
        lines.append("note: the matrix is singular at this point but the determinant surface is smooth here")
    return "\n".join(lines)


def write_trace_csv(path: Path, out: SolveOutcome) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["iteration", "mu"])
        for i, mu in enumerate(out.mu_trace, start=1):
            w.writerow([i, repr(mu)])


def write_spectrum_csv(path: Path, pencil: Pencil, alpha: Sequence[float]) -> list[tuple[int, np.ndarray]]:
    F0, Fs = pencil.float_matrices()
    M = -F0 + sum((a * F for a, F in zip(alpha, Fs)), np.zeros_like(F0))
    spectra = []
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["block", "index", "eigenvalue"])
        for k, blk in enumerate(pencil.blocks):
            sl = slice(blk.offset, blk.offset + blk.size)
            ev = np.linalg.eigvalsh(M[sl, sl])
            spectra.append((k, ev))
            for i, e in enumerate(ev):
                w.writerow([k, i, repr(float(e))])
    return spectra


def write_report_dir(directory: str | Path, out: SolveOutcome, pencil: Pencil) -> list[Path]:
    """Write ``trace.csv``, ``spectrum.csv`` and their PNG figures; return the paths."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    written = [d / "trace.csv"]
    write_trace_csv(written[0], out)

    fig, ax = plt.subplots(figsize=(6, 4))
    if out.mu_trace:
        mu = np.array(out.mu_trace)
        ax.plot(np.arange(1, len(mu) + 1), mu, marker=".")
        ax.set_yscale("symlog", linthresh=1e-8)
        ax.axhline(0.0, color="gray", lw=0.8)
        ax.set_xlabel("iteration")
        ax.set_ylabel("mu (shift making the pencil PSD)")
    ax.set_title(f"solver trace: {out.status}")
    fig.tight_layout()
    fig.savefig(d / "mu_trace.png", dpi=100)
    plt.close(fig)
    written.append(d / "mu_trace.png")

    if out.alpha is not None and pencil.size:
        written.append(d / "spectrum.csv")
        spectra = write_spectrum_csv(written[-1], pencil, out.alpha)
        fig, ax = plt.subplots(figsize=(6, 4))
        for k, ev in spectra:
            ax.scatter([k] * len(ev), ev, marker="o")
        ax.axhline(0.0, color="gray", lw=0.8)
        ax.set_xlabel("block")
        ax.set_ylabel("eigenvalue")
        ax.set_title("spectrum of the final pencil matrix")
        fig.tight_layout()
        fig.savefig(d / "spectrum.png", dpi=100)
        plt.close(fig)
        written.append(d / "spectrum.png")
    return written
