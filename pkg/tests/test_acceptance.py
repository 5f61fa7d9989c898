"""Acceptance suite: one test per criterion clause, each printing a
PASS/FAIL line (run with -s to see them inline).

Four clauses are implemented at their nominal tolerances but sit just
outside what the exact model produces; their assertion messages carry
the measured values.  Everything else must pass.
"""
import math

import numpy as np

from g4vspec.analysis import (
    chi2_independence,
    ensemble_stats,
    fit_full_model,
    fit_lorentzians,
)
from g4vspec.cli import run_cli
from g4vspec.hamiltonian import a_ple, build_hamiltonian, registry_lookup
from g4vspec.spectrum import (
    merge_lines,
    solve_manifold,
    sweep_field,
    sweep_strain,
    synth_spectrum,
    transition_intensity_matrix,
    transitions,
)
from g4vspec.spinops import SIGMA_Z, kron, spin_matrices

from conftest import local_maxima, random_emitter

DIRECTION_33 = (math.sin(math.radians(33.0)), 0.0, math.cos(math.radians(33.0)))


def check(tag, ok, detail=""):
    print(f"[{tag}] {'PASS' if ok else 'FAIL'} {detail}")
    assert ok, f"{tag}: {detail}"


# ---------------------------------------------------------------------- C1

def test_c01_registry_hyperfine_spacings():
    targets = {
        "29Si": -29.98, "73Ge": -13.78, "115Sn": -316.70,
        "117Sn": -345.02, "119Sn": -360.96,
    }
    worst = max(abs(a_ple(registry_lookup(k)) - v) for k, v in targets.items())
    check("C1", worst <= 0.02,
          f"five tabulated optical spacings reproduced, worst |error| = {worst:.4f} MHz")


# ---------------------------------------------------------------------- C2

def test_c02_spin_half_zero_strain_doublet():
    e = registry_lookup("117Sn")
    freqs, intens = merge_lines(transitions(e))
    sep = freqs[1] - freqs[0] if len(freqs) == 2 else float("nan")
    ok = (
        len(freqs) == 2
        and abs(sep - 345.0) <= 7.0
        and abs(intens[0] / intens[1] - 1.0) < 1e-3
    )
    check("C2", ok, f"{len(freqs)} lines, separation {sep:.2f} MHz, "
                    f"intensity ratio {intens[0] / intens[1]:.6f}")


# ---------------------------------------------------------------------- C3

def _strained_triplet():
    e = registry_lookup("117Sn")
    return merge_lines(transitions(e, alpha_ghz=0.15 * e.gnd.lambda_soc_ghz))


def test_c03a_strained_triplet_resolved_and_split():
    freqs, intens = _strained_triplet()
    span = freqs.max() - freqs.min()
    ok = len(freqs) == 3 and span >= 10.0 * 35.0
    check("C3a", ok, f"{len(freqs)} resolved lines, hyperfine span {span:.1f} MHz "
                     f">= 350 MHz (10 x 35 MHz linewidth)")


def test_c03b_strained_triplet_ratio_tolerance():
    freqs, intens = _strained_triplet()
    intens = intens / intens.min()
    dev = max(abs(intens[0] - 2.0), abs(intens[1] - 1.0), abs(intens[2] - 1.0))
    check(
        "C3b", dev <= 1e-6,
        f"2:1:1 intensity ratio deviation {dev:.2e} vs tolerance 1e-6; exact "
        "diagonalization leaves a ~3e-4 asymmetry between the two weak lines "
        "because ground and excited orbitals mix by different strain angles, "
        "so the 1e-6 target is unreachable for the physical model "
        "(the summed weak-pair weight does match the strong line to ~5e-7)",
    )


# ---------------------------------------------------------------------- C4

def test_c04a_ge_comb_spacing_and_span():
    e = registry_lookup("73Ge")
    table = transitions(e)
    freqs, _ = merge_lines(table)
    spacing_err = np.abs(np.diff(freqs) - 13.78).max()
    span = freqs.max() - freqs.min()
    ok = len(table) == 20 and len(freqs) == 10 and spacing_err <= 0.3 \
        and abs(span - 124.0) <= 3.0
    check("C4a", ok, f"{len(table)} transitions in {len(freqs)} pairs, spacing error "
                     f"{spacing_err:.3f} MHz, span {span:.1f} MHz")


def test_c04b_ge_flat_top_window():
    e = registry_lookup("73Ge")
    grid = np.arange(-200.0, 200.25, 0.25)
    trace = synth_spectrum(transitions(e), 26.0, grid)
    top = trace.signal.max()
    inside = np.abs(grid) <= 40.0
    worst = trace.signal[inside].min() / top
    above = grid[trace.signal >= 0.95 * top]
    window = above.max() - above.min()
    check(
        "C4b", worst >= 0.95,
        f"signal over the central 80 MHz window dips to {worst:.3f} of max "
        f"(the within-5% window is {window:.1f} MHz wide); ten equal lines "
        "spaced 13.78 MHz under a 26 MHz Lorentzian sag ~6.9% at +-40 MHz, "
        "so a 5% ripple bound over a full 80 MHz window is unreachable",
    )


# ---------------------------------------------------------------------- C5

def test_c05_strain_asymptotics():
    sn = registry_lookup("117Sn")
    sweep = sweep_strain(sn, "gnd", [10.0 * sn.gnd.lambda_soc_ghz])
    levels, jsq = sweep.levels[0], sweep.jsq[0]
    j1 = levels[jsq > 1.0]
    j0 = levels[jsq <= 1.0]
    sep_err = abs((j1.mean() - j0.mean()) / sn.gnd.a_fc_mhz - 1.0)
    j1_sorted = np.unique(np.round(np.sort(j1), 4))
    internal_err = abs(
        (j1_sorted[1] - j1_sorted[0]) / (1.5 * abs(sn.gnd.a_dd_mhz)) - 1.0
    )
    ge = registry_lookup("73Ge")
    gsweep = sweep_strain(ge, "gnd", [10.0 * ge.gnd.lambda_soc_ghz])
    glab = np.sort(gsweep.jsq[0])
    label_err = max(np.abs(glab[:9] - 20.0).max(), np.abs(glab[9:] - 30.0).max())
    ok = sep_err <= 0.02 and internal_err <= 0.05 and label_err <= 0.5
    check("C5", ok, f"manifold separation off A_FC by {100 * sep_err:.2f}%, internal "
                    f"spacing off 1.5|A_DD| by {100 * internal_err:.2f}%, "
                    f"J^2 label error {label_err:.3f}")


# ---------------------------------------------------------------------- C6

def test_c06_clock_transition():
    e = registry_lookup("117Sn", strain_alpha_ghz=55.0)

    def gap(bz):
        es = solve_manifold(e, "gnd", (0.0, 0.0, bz))
        return es.values[1] - es.values[0]

    slope = (gap(0.001) - gap(-0.001)) / 0.002
    check("C6", abs(slope) < 0.5,
          f"|d(gap)/dBz| = {abs(slope):.2e} MHz/T at B = 0 (limit 0.5)")


# ---------------------------------------------------------------------- C7

def test_c07a_ge_map_three_local_maxima():
    e = registry_lookup("73Ge")
    grid = np.arange(-300.0, 300.5, 0.5)
    trace = sweep_field(e, DIRECTION_33, [0.1], 26.0, grid)[0]
    peaks = local_maxima(trace.signal, prominence_frac=0.005)
    n = len(peaks)
    check(
        "C7a", n == 3,
        f"{n} prominent local maxima at 0.1 T / 33 deg; the model row is a "
        "central hump with broad sloping shoulders (verified separately), "
        "but the shoulders are inflection plateaus, not local maxima: two "
        "rigidly shifted equal-intensity combs cannot produce a third "
        "prominent maximum at any field/linewidth scanned",
    )


def test_c07b_sn_axial_map_splitting_and_anticrossing():
    e = registry_lookup("117Sn", strain_alpha_ghz=55.0)
    f_h1_zero = merge_lines(transitions(e))[0][0]
    gaps_h1 = {}
    gaps_h0 = []
    b_values = np.arange(-0.03, 0.0301, 0.005)
    for bz in b_values:
        freqs, intens = merge_lines(transitions(e, (0.0, 0.0, bz)))
        if abs(bz) <= 1e-12:
            gaps_h0.append(freqs[2] - freqs[1])
            continue
        near = np.abs(freqs - f_h1_zero) < 100.0
        pick = np.argsort(np.where(near, intens, -1.0))[-2:]
        h1 = np.sort(freqs[pick])
        gaps_h1[round(abs(bz), 6)] = h1[1] - h1[0]
        rest = np.setdiff1d(np.arange(freqs.size), pick)
        bright = rest[np.argsort(intens[rest])[-2:]]
        gaps_h0.append(abs(np.diff(np.sort(freqs[bright]))[0]))
    linear = abs(gaps_h1[0.03] / gaps_h1[0.01] - 3.0) < 0.05 \
        and abs(gaps_h1[0.02] / gaps_h1[0.01] - 2.0) < 0.05
    gaps_h0 = np.array(gaps_h0)
    k0 = np.argmin(np.abs(b_values))
    anticrossing = gaps_h0.min() > 0.0 and gaps_h0[k0] == gaps_h0.max()
    check("C7b", linear and anticrossing,
          f"strong-pair splitting {gaps_h1[0.01]:.1f}/{gaps_h1[0.02]:.1f}/"
          f"{gaps_h1[0.03]:.1f} MHz at 10/20/30 mT (linear), weak-pair gap "
          f"stays open (min {gaps_h0.min():.1f} MHz, widest at B = 0: "
          f"{gaps_h0[k0]:.1f} MHz)")


# ---------------------------------------------------------------------- C8

def _lorentz_peak(f, center, fwhm):
    hw2 = (0.5 * fwhm) ** 2
    return hw2 / ((f - center) ** 2 + hw2)


def test_c08a_triplet_fit_round_trip():
    grid = np.arange(-400.0, 900.0, 2.0)
    truth_aple, truth_delta, truth_fwhm = -445.0, 150.0, 35.0
    clean = _lorentz_peak(grid, -150.0, truth_fwhm) \
        + 0.5 * _lorentz_peak(grid, -150.0 + 445.0 - 75.0, truth_fwhm) \
        + 0.5 * _lorentz_peak(grid, -150.0 + 445.0 + 75.0, truth_fwhm)
    rng = np.random.Generator(np.random.PCG64(42))
    noisy = clean + rng.normal(0.0, 0.05 * clean.max(), clean.size)
    res = fit_lorentzians(type("T", (), {"freq_mhz": grid, "signal": noisy})(),
                          model="triplet211", seed=42)
    err_aple = abs(abs(res.params["a_ple"]) / abs(truth_aple) - 1.0)
    err_delta = abs(res.params["delta"] / truth_delta - 1.0)
    ok = res.converged and err_aple <= 0.02 and err_delta <= 0.05
    check("C8a", ok, f"|a_ple| error {100 * err_aple:.2f}% (limit 2%), "
                     f"delta error {100 * err_delta:.2f}% (limit 5%) at 5% noise")


def test_c08b_ge_field_map_fit():
    base = registry_lookup("73Ge")
    truth_scale = 12.5 / abs(a_ple(base))
    truth_fwhm = 72.0
    gen = base.scaled_hyperfine(truth_scale)
    fields = np.arange(0.0, 0.151, 0.025)
    grid = np.arange(-300.0, 300.0, 3.0)
    traces = sweep_field(gen, DIRECTION_33, fields, truth_fwhm, grid)
    rng = np.random.Generator(np.random.PCG64(8))
    data = []
    for t in traces:
        noisy = t.signal + rng.normal(0.0, 0.10 * t.signal.max(), t.signal.size)
        data.append(type("T", (), {"freq_mhz": t.freq_mhz, "signal": noisy,
                                   "meta": t.meta})())
    res = fit_full_model(data, ("a_ple_scale", "fwhm", "amplitude"), base,
                         init={"a_ple_scale": 1.0, "fwhm": 55.0}, seed=8)
    got_aple = abs(res.params["a_ple_mhz"])
    err_aple = abs(got_aple / 12.5 - 1.0)
    err_fwhm = abs(res.params["fwhm"] / truth_fwhm - 1.0)
    ok = res.converged and err_aple <= 0.10 and err_fwhm <= 0.10
    check("C8b", ok, f"|a_ple| {got_aple:.2f} MHz (error {100 * err_aple:.1f}%), "
                     f"fwhm {res.params['fwhm']:.1f} MHz (error {100 * err_fwhm:.1f}%) "
                     "at 10% noise")


def test_c08c_sn_field_map_fit():
    base = registry_lookup("117Sn", strain_alpha_ghz=55.0)
    truth_scale = 459.0 / abs(a_ple(base))
    truth_alpha, truth_fwhm = 55.0, 336.0
    gen = base.scaled_hyperfine(truth_scale)
    fields = np.arange(0.0, 0.121, 0.02)
    grid = np.arange(-900.0, 1100.0, 8.0)
    traces = sweep_field(gen, (0.0, 0.0, 1.0), fields, truth_fwhm, grid)
    rng = np.random.Generator(np.random.PCG64(9))
    data = []
    for t in traces:
        noisy = t.signal + rng.normal(0.0, 0.10 * t.signal.max(), t.signal.size)
        data.append(type("T", (), {"freq_mhz": t.freq_mhz, "signal": noisy,
                                   "meta": t.meta})())
    res = fit_full_model(
        data, ("a_ple_scale", "strain_alpha", "fwhm", "amplitude"), base,
        init={"a_ple_scale": 1.1, "strain_alpha": 45.0, "fwhm": 280.0}, seed=9,
    )
    got_aple = res.params["a_ple_mhz"]
    err_aple = abs(abs(got_aple) / 459.0 - 1.0)
    err_alpha = abs(res.params["strain_alpha"] / truth_alpha - 1.0)
    err_fwhm = abs(res.params["fwhm"] / truth_fwhm - 1.0)
    ok = res.converged and err_aple <= 0.03 and err_alpha <= 0.10 and err_fwhm <= 0.05
    check("C8c", ok, f"a_ple {got_aple:.1f} MHz ({100 * err_aple:.1f}%, limit 3%), "
                     f"alpha {res.params['strain_alpha']:.1f} GHz "
                     f"({100 * err_alpha:.1f}%, limit 10%), fwhm "
                     f"{res.params['fwhm']:.1f} MHz ({100 * err_fwhm:.1f}%, limit 5%)")


# ---------------------------------------------------------------------- C9

def test_c09a_contingency_test():
    res = chi2_independence(((119 + 92, 17 + 17), (19 + 6, 100 + 87)))
    check("C9a", res["p_value"] < 1e-5,
          f"chi2 = {res['chi2']:.1f}, p = {res['p_value']:.3e} < 1e-5")


def test_c09b_synthetic_ensemble_ratio():
    rng = np.random.Generator(np.random.PCG64(31))
    m119 = abs(a_ple(registry_lookup("119Sn")))
    m117 = abs(a_ple(registry_lookup("117Sn")))
    s119 = ensemble_stats(rng.normal(m119, 1.5, 900), bin_width=5.0)
    s117 = ensemble_stats(rng.normal(m117, 1.5, 900), bin_width=5.0)
    ratio = s119.mean / s117.mean
    check("C9b", abs(ratio - 1.046) <= 0.005,
          f"ensemble mean ratio {ratio:.4f} vs 1.046 +- 0.005")


def test_c09c_model_vs_measured_discrepancy(tmp_path):
    out = tmp_path / "stats.json"
    code = run_cli([
        "stats",
        "--aple-exp", "73Ge=-12.5",
        "--aple-exp", "117Sn=-445",
        "--aple-exp", "119Sn=-484",
        "--out", str(out),
    ])
    assert code == 0
    import json

    rows = {r["isotope"]: r["discrepancy_pct"]
            for r in json.loads(out.read_text())["aple_comparison"]}
    targets = {"73Ge": 9.2, "117Sn": 22.0, "119Sn": 26.0}
    devs = {k: abs(rows[k] - targets[k]) for k in targets}
    check(
        "C9c", max(devs.values()) <= 0.5,
        f"computed discrepancies {rows['73Ge']:.2f}/{rows['117Sn']:.2f}/"
        f"{rows['119Sn']:.2f}% vs quoted 9.2/22/26 (+-0.5); the tabulated "
        "couplings give 25.42% for the third isotope under every normalization "
        "convention (relative to the larger, the smaller, or either value), so "
        "the quoted 26% is not reproducible from the tabulated numbers",
    )


# ---------------------------------------------------------------------- C10

def test_c10_property_sweep_100_seeded_cases():
    n_cases = 120
    failures = []
    for seed in range(n_cases):
        rng = np.random.Generator(np.random.PCG64(seed))
        e = random_emitter(rng)
        i = e.nuclear_spin
        ops = spin_matrices(i)
        if np.abs(ops.x @ ops.y - ops.y @ ops.x - 1j * ops.z).max() > 1e-12:
            failures.append((seed, "commutator"))
        if np.abs(ops.sq - i * (i + 1) * np.eye(ops.dim)).max() > 1e-12:
            failures.append((seed, "casimir"))
        b = tuple(rng.uniform(-0.2, 0.2, size=3))
        es_g = solve_manifold(e, "gnd", b)
        es_e = solve_manifold(e, "exc", b)
        hg = (es_g.vectors * es_g.values) @ es_g.vectors.conj().T
        h = build_hamiltonian(e, "gnd", b)
        if np.abs(h - h.conj().T).max() > 1e-12 * max(1.0, np.abs(h).max()):
            failures.append((seed, "hermiticity"))
        if np.abs(hg - h).max() > 1e-8 * max(1.0, np.abs(h).max()):
            failures.append((seed, "reconstruction"))
        total = transition_intensity_matrix(es_g, es_e).sum()
        if abs(total - e.dim) > 1e-8 * e.dim:
            failures.append((seed, "sum-rule"))
        if seed % 6 == 0:
            f_plus = np.sort(transitions(e, b).freq_mhz)
            f_minus = np.sort(transitions(e, tuple(-c for c in b)).freq_mhz)
            if f_plus.size != f_minus.size or np.abs(f_plus - f_minus).max() > 1e-6:
                failures.append((seed, "field-parity"))
        if seed % 6 == 3:
            bz = (0.0, 0.0, float(rng.uniform(0.05, 0.3)))
            es_g2 = solve_manifold(e, "gnd", bz, alpha_ghz=0.0, beta_ghz=0.0)
            es_e2 = solve_manifold(e, "exc", bz, alpha_ghz=0.0, beta_ghz=0.0)
            nd = e.nuclear_dim
            iz = np.diag(i - np.arange(nd)).astype(complex)
            jz = kron(np.eye(2), 0.5 * SIGMA_Z, np.eye(nd)) \
                + kron(np.eye(2), np.eye(2), iz)
            table = transitions(e, bz, alpha_ghz=0.0, beta_ghz=0.0)
            for rec in table.records():
                vg = es_g2.vectors[:, rec["gnd_index"]]
                ve = es_e2.vectors[:, rec["exc_index"]]
                if abs(np.real(vg.conj() @ jz @ vg) - np.real(ve.conj() @ jz @ ve)) > 1e-6:
                    failures.append((seed, "mj-selection"))
                    break
    check("C10", not failures,
          f"{n_cases} seeded cases, failures: {failures[:5] if failures else 'none'}")
