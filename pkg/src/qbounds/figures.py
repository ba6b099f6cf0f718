"""Tabular data behind the three figures (no plotting)."""

from __future__ import annotations

import math

import numpy as np

from . import bounds, catalog, robustness, statistics

FIGURES = ("fig1", "fig2", "fig3")


def fig1_rows(n_max: int = 50) -> list[dict]:
    """Classical photon-number bound p_b,n for n = 0..n_max."""
    return [{"n": n, "p_bound": bounds.classical_number_bound(n)} for n in range(n_max + 1)]


def fig2_rows(step: float = 0.05, a_max: float = 4.0) -> list[dict]:
    """Even cat |i a> + |-i a>: quadrature violation at x = 0 and quadrature squeezing, versus a."""
    rows = []
    for k in range(int(round(a_max / step)) + 1):
        a = round(k * step, 10)
        cat = catalog.cat_state(1j * a, "even")
        rep = bounds.state_test(cat, catalog.povm_quadrature(0.0))
        rows.append({
            "alpha_abs": a,
            "violation_pct": rep.violation_pct,
            "squeezing_pct": statistics.squeezing_percentage(cat),
        })
    return rows


def fig3_rows(n_tc: float = 0.7, step: float = 0.01) -> list[dict]:
    """One-photon probability of a lossy photon-added thermal state against 1/e."""
    state = catalog.photon_added_thermal(n_tc)
    povm = catalog.povm_number(1)
    bound = bounds.classical_number_bound(1)
    rows = []
    for k in range(1, int(round(1.0 / step)) + 1):
        eta = round(k * step, 10)
        rep = bounds.state_test(robustness.lossy_state(state, eta), povm)
        rows.append({"eta": eta, "p_t1": rep.probability, "bound": bound, "violated": rep.violated})
    return rows


def figure_rows(name: str) -> list[dict]:
    if name == "fig1":
        return fig1_rows()
    if name == "fig2":
        return fig2_rows()
    if name == "fig3":
        return fig3_rows()
    raise KeyError(f"unknown figure {name!r}; choose from {FIGURES}")


def photon_added_lossy_p1(eta: float, n_tc: float) -> float:
    """Closed-form one-photon probability of the lossy photon-added thermal state."""
    return eta * (1 + 2 * n_tc - eta * n_tc) / (1 + eta * n_tc) ** 3


def cat_violation_closed(a: float) -> float:
    return 100.0 * math.tanh(a * a)


def fig2_oracle(rows: list[dict]) -> np.ndarray:
    return np.array([cat_violation_closed(r["alpha_abs"]) for r in rows])
