"""Self-contained analytic verification battery behind the `verify` subcommand.

Each check compares the implementation against a closed-form value and
returns (name, passed, measured, bound). Everything runs in seconds.
"""

from __future__ import annotations

import numpy as np

from . import diagnostics as dg
from . import forcing as fc
from . import initial_conditions as ics
from . import integrator as ti
from . import spectral as sp


def _random_divfree(n: int, seed: int, band: int | None = None) -> sp.SpectralField:
    rng = np.random.default_rng(seed)
    f = sp.to_spectral(sp.PhysicalField(sp.Grid(n), rng.standard_normal((2, n, n))))
    f = sp.leray_project(f)
    if band is not None:
        f = sp.fourier_truncate(f, band)
    return f


def check_transform_roundtrip():
    g = sp.Grid(64)
    rng = np.random.default_rng(0)
    phys = sp.PhysicalField(g, rng.standard_normal((2, 64, 64)))
    back = sp.to_physical(sp.to_spectral(phys))
    err = float(np.max(np.abs(back.values - phys.values)) / np.max(np.abs(phys.values)))
    return "transform round-trip", err < 1e-12, err, 1e-12


def check_parseval():
    g = sp.Grid(64)
    rng = np.random.default_rng(1)
    phys = sp.PhysicalField(g, rng.standard_normal((2, 64, 64)))
    f = sp.to_spectral(phys)
    spec_e = sp.l2_norm_sq(f)
    phys_e = float(np.sum(phys.values**2) / 64**2)
    err = abs(spec_e - phys_e) / spec_e
    return "Parseval identity", err < 1e-10, err, 1e-10


def check_leray():
    u = _random_divfree(64, 2)
    twice = sp.leray_project(u)
    err = float(
        np.max(np.abs(twice.coeffs - u.coeffs)) / np.max(np.abs(u.coeffs))
    ) + sp.divergence_sup(u)
    return "Leray projection idempotent + solenoidal", err < 1e-12, err, 1e-12


def check_basis():
    g = sp.Grid(64)
    worst = 0.0
    for i in range(1, 10):
        for j in range(1, 10):
            e = fc.eval_basis(g, i, j)
            worst = max(worst, abs(sp.l2_norm_sq(e) - 1.0))
            worst = max(worst, sp.divergence_sup(e))
            curl_sq = sp.l2_norm_sq(sp.curl2d(e))
            worst = max(worst, abs(curl_sq / (4 * np.pi**2 * (i * i + j * j)) - 1.0))
    basis = fc.ForcingBasis(g, 9, 0.01)
    expected_rho = 4 * np.pi**2 * 1e-4 * sum(
        i * i + j * j for i in range(1, 10) for j in range(1, 10)
    )
    worst = max(worst, abs(fc.rho_bar(basis) / expected_rho - 1.0))
    return "forcing basis identities (i,j <= 9)", worst < 1e-10, worst, 1e-10


def check_taylor_green_decay():
    g = sp.Grid(32)
    nu, t_end = 1e-2, 0.05
    tg = ics.taylor_green(g, 1.0)
    traj = ti.run(g, tg, ti.IntegratorConfig(nu=nu, t_end=t_end))
    exact = sp.l2_norm_sq(tg) * np.exp(-16 * np.pi**2 * nu * t_end)
    err = abs(traj.records[-1].energy - exact) / exact
    return "Taylor-Green energy decay", err < 1e-6, err, 1e-6


def check_disk_average_identity():
    u = _random_divfree(128, 3, band=16)
    lhs, rhs = dg.disk_average_identity_check(u, 0.1)
    err = abs(lhs / rhs - 1.0)
    return "disk-average gradient identity", err < 0.02, err, 0.02


def check_poincare():
    violations = 0
    for seed in range(10):
        u = _random_divfree(128, 100 + seed, band=16)
        for r in (0.05, 0.1, 0.2):
            if not dg.poincare_inequality_check(u, r, 1.0):
                violations += 1
    return "enhanced Poincare inequality (C=1)", violations == 0, violations, 0


def check_noise_variance():
    g = sp.Grid(64)
    basis = fc.ForcingBasis(g, 3, 0.1)
    sbar = fc.sigma_bar(basis)
    rng = np.random.default_rng(11)
    n_draws = 2000
    vals = np.array(
        [sp.l2_norm_sq(fc.sample_increment(basis, 0.01, rng).field) / 0.01 for _ in range(n_draws)]
    )
    z = abs(vals.mean() - sbar) / (vals.std(ddof=1) / np.sqrt(n_draws))
    return "noise increment variance (z-score)", z < 5.0, float(z), 5.0


ALL_CHECKS = [
    check_transform_roundtrip,
    check_parseval,
    check_leray,
    check_basis,
    check_taylor_green_decay,
    check_disk_average_identity,
    check_poincare,
    check_noise_variance,
]


def run_battery(out=print) -> bool:
    all_ok = True
    for check in ALL_CHECKS:
        name, ok, measured, bound = check()
        all_ok &= ok
        status = "PASS" if ok else "FAIL"
        out(f"[{status}] {name}: measured {measured:.3e} (bound {bound:.0e})")
    return all_ok
